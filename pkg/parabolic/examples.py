"""
Example Maps

Registry of canonical maps and the JSON map-file format:

    {"numerator": [c0, c1, ...], "denominator": [c0, c1, ...], "z0": c}

Coefficients are in ascending degree; each is a number or an [re, im] pair.
The optional z0 is a start point for inverse iteration.
"""

import json
from typing import Dict, NamedTuple, Optional, Sequence

from .dynamics.rational import RationalMap, RationalMapError
from .errors import ParabolicError

__all__ = [
    'MapFormatError',
    'ExampleMap',
    'REGISTRY',
    'load_map',
    'parse_map',
]


class MapFormatError(ParabolicError):
    """
    A map file or registry name could not be turned into a rational map
    """


class ExampleMap(NamedTuple):
    """
    Named rational map with a start point on its Julia set
    """

    name: str
    numerator: Sequence[complex]
    denominator: Sequence[complex]
    z0: Optional[complex]
    description: str = ''

    def __str__(self) -> str:
        return f'{self.name}: {self.description}'

    def build(self) -> RationalMap:
        try:
            return RationalMap(self.numerator, self.denominator)
        except RationalMapError as ex:
            raise MapFormatError(f'({self.name}) {ex}')


REGISTRY: Dict[str, ExampleMap] = {
    'square': ExampleMap('square', [0, 0, 1], [1], 1 + 0j, 'z^2, J is the unit circle'),
    'quad_parabolic': ExampleMap('quad_parabolic', [0.25, 0, 1], [1], 0.5 + 0j,
                                 'z^2 + 1/4, parabolic fixed point 1/2'),
    'blaschke_parabolic': ExampleMap('blaschke_parabolic', [1, 0, 3], [3, 0, 1], 1 + 0j,
                                     '(3z^2 + 1)/(z^2 + 3), parabolic fixed point 1, J is the unit circle'),
    'cheb': ExampleMap('cheb', [-2, 0, 1], [1], 2 + 0j, 'z^2 - 2, critical point on J'),
}


def _coefficient(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise MapFormatError(f'complex coefficient must be [re, im] (got {value!r})')

        return complex(float(value[0]), float(value[1]))

    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise MapFormatError(f'coefficient must be a number or [re, im] (got {value!r})')

    return complex(value)


def parse_map(doc: dict, name: str = 'file') -> ExampleMap:
    """
    :param doc: decoded map document
    :param name: name to report in errors
    :return: the map description
    :raises MapFormatError: malformed document
    """
    if not isinstance(doc, dict):
        raise MapFormatError(f'({name}) map document must be a JSON object')

    try:
        numerator = [_coefficient(c) for c in doc['numerator']]
        denominator = [_coefficient(c) for c in doc['denominator']]
    except KeyError as ex:
        raise MapFormatError(f'({name}) missing key {ex}')
    except TypeError as ex:
        raise MapFormatError(f'({name}) {ex}')

    z0 = _coefficient(doc['z0']) if doc.get('z0') is not None else None
    return ExampleMap(str(doc.get('name', name)), numerator, denominator, z0, str(doc.get('description', '')))


def load_map(source: str) -> ExampleMap:
    """
    :param source: registry name or path to a JSON map file
    :return: the map description (call .build() for the RationalMap)
    :raises MapFormatError: unknown name, unreadable or malformed file
    """
    if source in REGISTRY:
        return REGISTRY[source]

    try:
        with open(source, 'r') as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise MapFormatError(f'{source!r} is neither a registry name ({", ".join(REGISTRY)}) nor a file')
    except (OSError, json.JSONDecodeError) as ex:
        raise MapFormatError(f'({source}) {ex}')

    return parse_map(doc, source)
