"""
Report Emission

JSON reports, CSV tables and SVG plots. Every artifact carries the resolved
run configuration, and none carries a timestamp, so identical runs produce
identical bytes.
"""

import csv
import io
import json
import math
import os
from typing import Any, Iterable, Optional, Sequence

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from lxml import etree  # noqa: E402

from . import __version__  # noqa: E402

__all__ = [
    'jsonable',
    'dumps',
    'write_json',
    'write_csv',
    'write_svg',
    'plot_pressure_curve',
    'plot_box_counting',
]

SVG_NS = 'http://www.w3.org/2000/svg'

# fixed salt for the ids matplotlib generates inside SVG output
G_SVG_HASHSALT = 'parabolic'


def _number(value: float) -> Optional[float]:
    value = float(value)
    return value if math.isfinite(value) else None


def jsonable(obj: Any) -> Any:
    """
    :return: obj with NamedTuples as dicts, arrays as lists, complex numbers
        as [re, im] and non-finite floats as null
    """
    if obj is None or isinstance(obj, str):
        return obj

    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)

    if isinstance(obj, (int, np.integer)):
        return int(obj)

    if isinstance(obj, (float, np.floating)):
        return _number(obj)

    if isinstance(obj, (complex, np.complexfloating)):
        return [_number(obj.real), _number(obj.imag)]

    if hasattr(obj, '_asdict'):
        return {key: jsonable(value) for key, value in obj._asdict().items()}

    if isinstance(obj, dict):
        return {str(key): jsonable(value) for key, value in obj.items()}

    if isinstance(obj, np.ndarray):
        return [jsonable(value) for value in obj.tolist()]

    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(value) for value in obj]

    return str(obj)


def dumps(payload: Any) -> str:
    return json.dumps(jsonable(payload), sort_keys=True, indent=2, allow_nan=False) + '\n'


def _prepare(path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)


def write_json(path: str, payload: Any) -> str:
    _prepare(path)
    with open(path, 'w', newline='\n') as f:
        f.write(dumps(payload))

    return path


def _cell(value: Any) -> str:
    if value is None:
        return ''

    if isinstance(value, (bool, np.bool_)):
        return str(int(value))

    if isinstance(value, (float, np.floating)):
        return f'{float(value):.12g}' if math.isfinite(value) else ''

    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]], config: Any = None) -> str:
    """
    CSV table preceded by a `# config ...` comment line when a config is given
    """
    _prepare(path)
    with open(path, 'w', newline='') as f:
        if config is not None:
            f.write(f'# parabolic {__version__} config {json.dumps(jsonable(config), sort_keys=True)}\n')

        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])

    return path


def write_svg(path: str, figure, config: Any) -> str:
    """
    Save a matplotlib figure as SVG with the run configuration embedded as a
    <metadata> element
    """
    _prepare(path)
    plt.rcParams['svg.hashsalt'] = G_SVG_HASHSALT
    buffer = io.BytesIO()
    figure.savefig(buffer, format='svg', metadata={'Date': None})
    plt.close(figure)

    root = etree.fromstring(buffer.getvalue())
    metadata = etree.Element(f'{{{SVG_NS}}}metadata', id='parabolic-run')
    metadata.text = json.dumps({'version': __version__, 'config': jsonable(config)}, sort_keys=True)
    root.insert(0, metadata)
    with open(path, 'wb') as f:
        f.write(etree.tostring(root, xml_declaration=True, encoding='utf-8'))

    return path


def plot_pressure_curve(path: str, rows: Sequence, config: Any, log_d: float, root: Optional[float] = None) -> str:
    """
    t -> P(phi_t) per oracle, annotated with the entropy intercept log d and
    the root h
    """
    t = np.array([row.t for row in rows], dtype=float)
    figure, ax = plt.subplots(figsize=(6, 4))
    for field, label in (('p_tree', 'tree'), ('p_periodic', 'periodic'), ('p_ulam', 'Ulam')):
        values = np.array([getattr(row, field) for row in rows], dtype=float)
        if np.any(np.isfinite(values)):
            ax.plot(t, values, marker='.', label=label)

    ax.axhline(0.0, color='grey', linewidth=0.5)
    ax.annotate(f'log d = {log_d:.4f}', (0.0, log_d), textcoords='offset points', xytext=(8, 0))
    if root is not None and math.isfinite(root):
        ax.axvline(root, color='grey', linestyle='--', linewidth=0.8)
        ax.annotate(f'h = {root:.3f}', (root, 0.0), textcoords='offset points', xytext=(4, 8))

    ax.set_xlabel('t')
    ax.set_ylabel('P(-t log|f\'|)')
    ax.legend()
    return write_svg(path, figure, config)


def plot_box_counting(path: str, box, config: Any) -> str:
    figure, ax = plt.subplots(figsize=(6, 4))
    scales = np.array(box.scales, dtype=float)
    counts = np.array(box.counts, dtype=float)
    ax.loglog(1 / scales, counts, marker='o', linestyle='none', label='boxes')
    if not box.degenerate:
        ax.loglog(1 / scales, np.exp(box.intercept) * (1 / scales) ** box.dimension,
                  label=f'slope {box.dimension:.3f}')

    ax.set_xlabel('1 / box size')
    ax.set_ylabel('occupied boxes')
    ax.legend()
    return write_svg(path, figure, config)
