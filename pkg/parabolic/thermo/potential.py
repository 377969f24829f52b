"""
Potentials

Real functions on the Julia set (the geometric family -t log|f'|, constants,
linear combinations, nearest-neighbour tables and iterate sums) and their
Birkhoff sums.
"""

from __future__ import annotations

import csv
import re
from abc import ABC, abstractmethod
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..dynamics.rational import RationalMap
from ..errors import ParabolicError

__all__ = [
    'PotentialError',
    'NearCriticalError',
    'HolderData',
    'BirkhoffSum',
    'Potential',
    'GeometricPotential',
    'ConstantPotential',
    'CombinationPotential',
    'TablePotential',
    'IteratePotential',
    'parse_potential',
    'geometric_holder',
    'birkhoff_sum',
    'birkhoff_sums',
]

G_NEAR_CRITICAL = 1e-300


class PotentialError(ParabolicError):
    """
    A potential could not be parsed or evaluated
    """


class NearCriticalError(PotentialError):
    """
    |f'| fell below the near-critical threshold; `index` locates the point
    """

    def __init__(self, msg: str, index: int):
        super().__init__(msg)
        self.index = index


class HolderData(NamedTuple):
    """
    Declared Hölder data: |phi(x) - phi(y)| <= K |x - y|^exponent
    """

    K: float
    exponent: float


class BirkhoffSum(NamedTuple):
    value: float
    length: int


class Potential(ABC):
    """
    Evaluable real function on J(f)
    """

    holder: Optional[HolderData] = None

    @abstractmethod
    def evaluate(self, z):
        """
        :param z: point or array of points
        :return: potential value(s), float for a scalar input
        """

    @abstractmethod
    def spec(self) -> str:
        """
        :return: the spec string that parses back into this potential
        """

    def __call__(self, z):
        return self.evaluate(z)

    def __add__(self, other) -> CombinationPotential:
        if isinstance(other, Potential):
            return CombinationPotential([(1.0, self), (1.0, other)])

        return self.shifted(float(other))

    def __str__(self) -> str:
        return self.spec()

    def shifted(self, c: float) -> CombinationPotential:
        """
        :return: the potential phi + c
        """
        return CombinationPotential([(1.0, self), (1.0, ConstantPotential(c))])

    @staticmethod
    def _scalar(z, values):
        return float(values.reshape(-1)[0]) if np.ndim(z) == 0 else values


class GeometricPotential(Potential):
    """
    phi_t(z) = -t log|f'(z)|, or -t log ||f'(z)|| in a conformal metric
    """

    def __init__(self, fmap: RationalMap, t: float, metric=None, holder: Optional[HolderData] = None):
        self.map = fmap
        self.t = float(t)
        self.metric = metric
        self.holder = holder

    def spec(self) -> str:
        suffix = ',metric=milnor' if self.metric is not None else ''
        return f'geometric:t={self.t:g}{suffix}'

    def log_derivative(self, z) -> np.ndarray:
        """
        :return: log|f'(z)| (or log of the metric derivative norm)
        :raises NearCriticalError: |f'(z)| below 1e-300
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if self.metric is not None:
            norm = np.atleast_1d(np.asarray(self.metric.derivative_norm(self.map, z), dtype=float))
        else:
            norm = np.abs(np.atleast_1d(self.map.derivative(z)))

        small = norm < G_NEAR_CRITICAL
        if np.any(small):
            index = int(np.argmax(small))
            raise NearCriticalError(f'|f\'| = {norm[index]:.3g} at {z[index]} (index {index})', index)

        return np.log(norm)

    def evaluate(self, z):
        values = -self.t * self.log_derivative(np.asarray(z, dtype=complex).reshape(-1))
        return self._scalar(z, values.reshape(np.shape(z)) if np.ndim(z) else values)


class ConstantPotential(Potential):
    def __init__(self, c: float):
        self.c = float(c)
        self.holder = HolderData(0.0, 1.0)

    def spec(self) -> str:
        return f'const:c={self.c:g}'

    def evaluate(self, z):
        return self._scalar(z, np.full(np.shape(z) if np.ndim(z) else 1, self.c))


class CombinationPotential(Potential):
    """
    Finite linear combination sum w_i phi_i
    """

    def __init__(self, terms: Sequence[Tuple[float, Potential]]):
        if not terms:
            raise PotentialError('empty combination')

        self.terms: List[Tuple[float, Potential]] = [(float(w), p) for w, p in terms]
        holders = [p.holder for _, p in self.terms]
        if all(h is not None for h in holders):
            exponent = min(h.exponent for h in holders)
            self.holder = HolderData(sum(abs(w) * h.K for (w, _), h in zip(self.terms, holders)), exponent)

    def spec(self) -> str:
        return 'mix:' + '+'.join(f'{w:g}*{p.spec()}' for w, p in self.terms)

    def evaluate(self, z):
        total = None
        for weight, potential in self.terms:
            values = weight * np.atleast_1d(np.asarray(potential.evaluate(z), dtype=float))
            total = values if total is None else total + values

        return self._scalar(z, total)


class TablePotential(Potential):
    """
    User table of (point, value) pairs evaluated by nearest-neighbour lookup
    """

    def __init__(self, points: Sequence[complex], values: Sequence[float], source: str = '',
                 holder: Optional[HolderData] = None):
        points = np.asarray(points, dtype=complex)
        self.values = np.asarray(values, dtype=float)
        if len(points) == 0 or len(points) != len(self.values):
            raise PotentialError('table needs equally many points and values')

        self.source = source
        self.holder = holder
        self.__tree = cKDTree(np.column_stack([points.real, points.imag]))

    @classmethod
    def load(cls, filename: str, holder: Optional[HolderData] = None) -> TablePotential:
        """
        :param filename: CSV file with rows re,im,value
        """
        points, values = [], []
        try:
            with open(filename, 'r', newline='') as f:
                for row in csv.reader(f):
                    if not row or row[0].strip().startswith('#'):
                        continue

                    points.append(complex(float(row[0]), float(row[1])))
                    values.append(float(row[2]))
        except (OSError, ValueError, IndexError) as ex:
            raise PotentialError(f'({filename}) {ex}')

        return cls(points, values, filename, holder)

    def spec(self) -> str:
        return f'table:file={self.source}'

    def evaluate(self, z):
        flat = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
        _, index = self.__tree.query(np.column_stack([flat.real, flat.imag]))
        values = self.values[index]
        return self._scalar(z, values.reshape(np.shape(z)) if np.ndim(z) else values)


class IteratePotential(Potential):
    """
    S_k phi viewed as a potential for f^k
    """

    def __init__(self, fmap: RationalMap, potential: Potential, k: int):
        self.map = fmap
        self.potential = potential
        self.k = k

    def spec(self) -> str:
        return f'iterate:k={self.k},{self.potential.spec()}'

    def evaluate(self, z):
        flat = np.atleast_1d(np.asarray(z, dtype=complex)).reshape(-1)
        values = birkhoff_sums(self.map, self.potential, flat, self.k)
        return self._scalar(z, values.reshape(np.shape(z)) if np.ndim(z) else values)


def geometric_holder(fmap: RationalMap, t: float, points: np.ndarray) -> HolderData:
    """
    Lipschitz data for phi_t over a cloud, from |d/dz log f'| = |f''/f'|
    """
    points = np.asarray(points, dtype=complex)
    ratio = np.abs(np.asarray(fmap.second_derivative(points)) / np.asarray(fmap.derivative(points)))
    return HolderData(abs(t) * float(np.max(ratio)), 1.0)


# region Spec strings

_NUMBER = r'[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?'
_TERM_SPLIT = re.compile(r'\+(?=\s*' + _NUMBER + r'\s*\*)')


def _params(body: str) -> dict:
    params = {}
    for item in filter(None, (part.strip() for part in body.split(','))):
        if '=' not in item:
            raise PotentialError(f'malformed parameter {item!r}')

        key, value = item.split('=', 1)
        params[key.strip()] = value.strip()

    return params


def _holder(params: dict) -> Optional[HolderData]:
    if 'K' in params:
        return HolderData(float(params.pop('K')), float(params.pop('a', 1.0)))

    return None


def parse_potential(spec: str, fmap: RationalMap, metric=None) -> Potential:
    """
    :param spec: "geometric:t=1.0[,metric=milnor]", "const:c=0.3",
        "mix:0.5*geometric:t=1+0.5*const:c=0" or "table:file=phi.csv";
        K=<constant>,a=<exponent> declares Hölder data
    :param fmap: rational map the potential lives on
    :param metric: MilnorMetric for geometric:...,metric=milnor
    :return: the potential
    :raises PotentialError: malformed spec
    """
    spec = spec.strip()
    if ':' not in spec:
        raise PotentialError(f'malformed potential spec {spec!r}')

    kind, body = spec.split(':', 1)
    kind = kind.strip()
    try:
        if kind == 'mix':
            terms = []
            for term in _TERM_SPLIT.split(body):
                weight, inner = term.split('*', 1)
                terms.append((float(weight), parse_potential(inner, fmap, metric)))

            return CombinationPotential(terms)

        params = _params(body)
        holder = _holder(params)
        if kind == 'geometric':
            choice = params.get('metric', 'euclidean')
            if choice not in ('euclidean', 'milnor'):
                raise PotentialError(f'unknown metric {choice!r}')

            if choice == 'milnor' and metric is None:
                raise PotentialError('geometric potential in the Milnor metric needs a calibrated metric')

            return GeometricPotential(fmap, float(params['t']), metric if choice == 'milnor' else None, holder)

        if kind == 'const':
            return ConstantPotential(float(params['c']))

        if kind == 'table':
            return TablePotential.load(params['file'], holder)
    except (KeyError, ValueError) as ex:
        raise PotentialError(f'malformed potential spec {spec!r}: {ex}')

    raise PotentialError(f'unknown potential kind {kind!r}')

# endregion


def birkhoff_sum(fmap: RationalMap, potential: Potential, z: complex, n: int) -> BirkhoffSum:
    """
    :return: S_n phi(z) along the forward orbit of z
    :raises PotentialError: evaluation failed, with the failing orbit index
    """
    if n < 1:
        raise ValueError(f'Birkhoff sum length must be >= 1 (got {n})')

    return BirkhoffSum(float(birkhoff_sums(fmap, potential, np.array([z], dtype=complex), n)[0]), n)


def birkhoff_sums(fmap: RationalMap, potential: Potential, z: np.ndarray, n: int) -> np.ndarray:
    """
    :return: S_n phi for every start point in z
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    orbits = fmap.orbit(z, n)
    try:
        values = np.asarray(potential.evaluate(orbits.reshape(-1)), dtype=float).reshape(orbits.shape)
    except NearCriticalError as ex:
        start, step = divmod(ex.index, n)
        raise NearCriticalError(f'near-critical evaluation at orbit index {step} of start {z[start]}', step)

    return np.sum(values, axis=1)
