"""
Pressure Oracles

Topological pressure by independent estimators: weighted sums over preimage
trees, over periodic points, the leading eigenvalue of an Ulam discretization
of the transfer operator, and greedy (n, eps)-separated partition sums
restricted to decomposition classes. On top of these sit the pressure gap
against A(Omega, phi), the pressure curve of the geometric family, the Bowen
root and equilibrium-measure diagnostics.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import curve_fit
from scipy.spatial import cKDTree
from scipy.special import logsumexp

from ..dynamics.julia import as_xy, sample_inverse_iteration
from ..dynamics.model import OmegaSet, PreimageTree
from ..dynamics.periodic import a_omega, cycle_average, find_periodic_points, fixed_points_of_iterate
from ..dynamics.rational import (RationalMap, BudgetExceededError, DegenerateFiberError, G_NODE_BUDGET,
                                 is_infinity)
from ..errors import ParabolicError
from ..util import mklog
from .decomposition import bad_pattern, good_pattern, lambda_pattern
from .metric import MilnorMetric
from .potential import GeometricPotential, Potential, birkhoff_sums

__all__ = [
    'PressureError',
    'EXTRAPOLATION_MODES',
    'OracleConfig',
    'Constraint',
    'PartitionSum',
    'PressureDiagnostics',
    'PressureEstimate',
    'WeightedPointMeasure',
    'GapReport',
    'CurveRow',
    'BowenRoot',
    'EquilibriumReport',
    'HyperbolicityReport',
    'PressureOracle',
    'TreeOracle',
    'PeriodicOracle',
    'UlamOracle',
    'SeparatedOracle',
    'default_anchor',
    'omega_seeds',
    'extrapolate',
    'partition_sum',
    'make_oracle',
    'estimate_pressure',
    'pressure_separated',
    'pressure_tree',
    'pressure_periodic',
    'pressure_ulam',
    'a_omega_vs_pressure',
    'pressure_curve',
    'bowen_root',
    'equilibrium_approx',
    'equilibrium_diagnostics',
    'hyperbolicity_check',
]

EXTRAPOLATION_MODES = ('last', 'ratio', 'powerlaw', 'aitken')

G_ANCHOR_SHIFT = 1e-6
G_CRITICAL_VALUE_TOL = 1e-6
G_ATTRACTING_TOL = 1e-6
G_REPELLING_TOL = 1e-6
G_ULAM_WINDOW = 10  # iterations over which the power-iteration oscillation is measured
G_ULAM_TOL = 1e-6
G_LYAPUNOV_TOL = 1e-6
G_NORMALIZATION_TOL = 1e-12
G_OMEGA_SEED_DEPTH = 6

log = mklog('pressure')


class PressureError(ParabolicError):
    """
    A pressure estimate could not be produced
    """


class OracleConfig(NamedTuple):
    """
    Resolved `pressure` section of the configuration
    """

    oracle: str = 'tree'
    n: int = 14
    extrapolation: str = 'last'
    epsilon: float = 0.05
    anchor: Optional[complex] = None
    floor: bool = True
    periodic_n: int = 10
    ulam_resolution: int = 256
    ulam_iterations: int = 300
    sample_count: int = 20000
    seed: int = 0
    bowen_tol: float = 0.05
    bowen_mode: str = 'powerfit'
    bracket_step: float = 0.5
    bracket_max: float = 3.0
    bisections: int = 10

    @classmethod
    def from_dict(cls, section: dict) -> OracleConfig:
        values = {k: v for k, v in section.items() if k in cls._fields}
        if values.get('anchor') is not None and not isinstance(values['anchor'], complex):
            re, im = values['anchor']
            values['anchor'] = complex(re, im)

        return cls(**values)

    def validate(self):
        assert self.oracle in ('tree', 'periodic', 'ulam', 'separated'), f'unknown oracle {self.oracle!r}'
        assert self.extrapolation in EXTRAPOLATION_MODES, f'unknown extrapolation {self.extrapolation!r}'
        assert self.bowen_mode in ('threshold', 'powerfit'), f'unknown Bowen root mode {self.bowen_mode!r}'
        assert self.n >= 3, f'pressure depth must be >= 3 ({self.n})'
        assert self.epsilon > 0 and self.bowen_tol > 0, 'tolerances must be positive'


class Constraint(NamedTuple):
    """
    Segment class a partition sum is restricted to: all, good (G(eta)),
    bad (B(eta)) or D (ends in E(alpha))
    """

    kind: str = 'all'
    alpha: float = 0.05
    eta: float = 0.5
    omega_points: Tuple[complex, ...] = ()
    metric: Optional[MilnorMetric] = None

    def admits(self, orbits: np.ndarray) -> np.ndarray:
        """
        :param orbits: (m, n) forward orbits
        :return: mask of the orbits whose segments belong to the class
        """
        if self.kind == 'all':
            return np.ones(len(orbits), dtype=bool)

        patterns = lambda_pattern(orbits.reshape(-1), np.asarray(self.omega_points, dtype=complex),
                                  self.alpha, self.metric).reshape(orbits.shape)
        if self.kind in ('good', 'G'):
            return np.array([good_pattern(row, self.eta) for row in patterns], dtype=bool)

        if self.kind in ('bad', 'B'):
            return np.array([bad_pattern(row, self.eta) for row in patterns], dtype=bool)

        if self.kind == 'D':
            return patterns[:, -1] == 1

        raise PressureError(f'unknown constraint {self.kind!r}')

    def __str__(self) -> str:
        if self.kind == 'all':
            return 'all'

        return f'{self.kind}(alpha={self.alpha:g},eta={self.eta:g})'


class PartitionSum(NamedTuple):
    """
    Greedy lower witness for sup over separated sets of sum e^(S_n phi)
    """

    log_value: float
    count: int
    selected: Tuple[int, ...]

    @property
    def value(self) -> float:
        return float(np.exp(self.log_value))


class PressureDiagnostics(NamedTuple):
    depths: Tuple[int, ...]
    sequence: Tuple[float, ...]
    extrapolation: str
    tail_width: float
    floor: Optional[float] = None
    floor_applied: bool = False
    notes: Tuple[str, ...] = ()


class PressureEstimate(NamedTuple):
    value: float
    method: str
    n: int
    epsilon: Optional[float]
    diagnostics: PressureDiagnostics

    def __str__(self) -> str:
        return f'P={self.value:.6g} ({self.method}, n={self.n}, tail={self.diagnostics.tail_width:.3g})'


class WeightedPointMeasure(NamedTuple):
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_log_weights(cls, points: np.ndarray, log_weights: np.ndarray) -> WeightedPointMeasure:
        weights = np.exp(np.asarray(log_weights, dtype=float) - logsumexp(log_weights))
        return cls(np.asarray(points, dtype=complex), weights / np.sum(weights))

    @classmethod
    def point_mass(cls, z: complex) -> WeightedPointMeasure:
        return cls(np.array([z], dtype=complex), np.array([1.0]))

    @property
    def atoms(self) -> List[Tuple[complex, float]]:
        return [(complex(z), float(w)) for z, w in zip(self.points, self.weights)]

    @property
    def is_normalized(self) -> bool:
        return bool(np.all(self.weights >= 0)) and abs(float(np.sum(self.weights)) - 1) <= G_NORMALIZATION_TOL


class GapReport(NamedTuple):
    A: float
    P: float
    gap: bool
    margin: float
    estimate: PressureEstimate


class CurveRow(NamedTuple):
    t: float
    p_tree: float
    p_periodic: float
    p_ulam: float
    n: int
    tail_width: float
    errors: Tuple[str, ...] = ()


class BowenRoot(NamedTuple):
    h: float
    threshold_root: float
    mode: str
    tol: float
    samples: Tuple[Tuple[float, float], ...]
    fit: Optional[Tuple[float, float, float]]
    notes: Tuple[str, ...] = ()


class EquilibriumReport(NamedTuple):
    entropy_estimate: float
    integral: float
    omega_mass: float
    lyapunov: float
    pressure: float
    notes: Tuple[str, ...] = ()

    @property
    def entropy_positive(self) -> bool:
        return self.entropy_estimate > 0

    @property
    def mass_ok(self) -> bool:
        return self.omega_mass < 0.5

    @property
    def lyapunov_ok(self) -> bool:
        return self.lyapunov >= -G_LYAPUNOV_TOL


class HyperbolicityReport(NamedTuple):
    sup_average: float
    period: int
    pressure: float
    margin: float

    @property
    def hyperbolic(self) -> bool:
        return self.sup_average < self.pressure - self.margin


# region Extrapolation

def extrapolate(depths: Sequence[int], log_sums: Sequence[float], mode: str) -> float:
    """
    :param depths: increasing depths k
    :param log_sums: log Lambda_k
    :param mode: last ((1/n) log Lambda_n), ratio (log Lambda_n - log Lambda_(n-1)),
        powerlaw (P of log Lambda_k = a + gamma log k + P k through the last three
        depths) or aitken (Delta^2 on the last three averages)
    :return: the extrapolated growth rate
    """
    if mode not in EXTRAPOLATION_MODES:
        raise PressureError(f'unknown extrapolation mode {mode!r}')

    k = np.asarray(depths, dtype=float)
    L = np.asarray(log_sums, dtype=float)
    last = float(L[-1] / k[-1])
    if not np.all(np.isfinite(L[-3:])):
        return last

    if mode == 'powerlaw' and len(L) >= 3:
        system = np.column_stack([np.ones(3), np.log(k[-3:]), k[-3:]])
        return float(np.linalg.solve(system, L[-3:])[2])

    if mode in ('ratio', 'powerlaw') and len(L) >= 2:
        return float((L[-1] - L[-2]) / (k[-1] - k[-2]))

    if mode == 'aitken' and len(L) >= 3:
        v = L[-3:] / k[-3:]
        curvature = v[2] - 2 * v[1] + v[0]
        if abs(curvature) > 1e-14 * (1 + abs(v[2])):
            return float(v[2] - (v[2] - v[1]) ** 2 / curvature)

    return last


def _assemble(method: str, depths: Sequence[int], log_sums: Sequence[float], mode: str,
              epsilon: Optional[float] = None, floor: Optional[float] = None,
              notes: Sequence[str] = ()) -> PressureEstimate:
    if len(depths) < 3:
        raise PressureError(f'{method} pressure needs at least three depths (got {len(depths)})')

    depths = tuple(int(k) for k in depths)
    log_sums = np.asarray(log_sums, dtype=float)
    with np.errstate(invalid='ignore'):
        sequence = tuple(float(v) for v in log_sums / np.asarray(depths, dtype=float))
        value = extrapolate(depths, log_sums, mode)
        previous = extrapolate(depths[:-1], log_sums[:-1], mode)
        tail = abs(value - previous) if np.isfinite(value) and np.isfinite(previous) else float('inf')

    floor_applied = floor is not None and not value >= floor
    if floor_applied:
        value = floor

    diagnostics = PressureDiagnostics(depths, sequence, mode, float(tail), floor, floor_applied, tuple(notes))
    return PressureEstimate(float(value), method, depths[-1], epsilon, diagnostics)

# endregion


def default_anchor(fmap: RationalMap, max_period: int = 3) -> complex:
    """
    :return: the first point of the first repelling finite cycle of period
        <= max_period, in period then lexicographic order
    """
    for n in range(1, max_period + 1):
        for orbit in find_periodic_points(fmap, n):
            z = orbit.points[0]
            if not is_infinity(z) and abs(orbit.multiplier) > 1 + G_REPELLING_TOL:
                return complex(z)

    raise PressureError(f'no repelling cycle of period <= {max_period} to anchor a preimage tree')


def omega_seeds(fmap: RationalMap, omega_points: Sequence[complex], depth: int = G_OMEGA_SEED_DEPTH,
                budget: int = G_NODE_BUDGET) -> np.ndarray:
    """
    :return: every node of the depth-`depth` preimage trees of the finite
        points of Omega, the points themselves included
    """
    omega_points = np.atleast_1d(np.asarray(omega_points, dtype=complex))
    omega_points = omega_points[~is_infinity(omega_points)]
    while depth > 1 and fmap.degree ** depth > budget:
        depth -= 1

    nodes = [omega_points]
    for w in omega_points:
        try:
            nodes.extend(fmap.preimage_tree(w, depth, budget).levels[1:])
        except (BudgetExceededError, DegenerateFiberError) as e:
            log(f'WARNING: no preimage seeds at {w:.6g}: {e}')

    seeds = np.concatenate(nodes) if nodes else np.array([], dtype=complex)
    return seeds[~is_infinity(seeds)]


def partition_sum(fmap: RationalMap, potential: Potential, candidates: np.ndarray, n: int, epsilon: float,
                  constraint: Optional[Constraint] = None, orbits: Optional[np.ndarray] = None) -> PartitionSum:
    """
    Greedy (n, eps)-separated selection in descending e^(S_n phi) order

    :param fmap: rational map
    :param potential: potential
    :param candidates: finite cloud of start points
    :param n: orbit length
    :param epsilon: separation in the Bowen metric d_n
    :param constraint: segment class (all when omitted)
    :param orbits: precomputed (m, n) forward orbits of the candidates
    :return: log of the sum over the selected set; -inf with a warning when no
        candidate satisfies the constraint
    """
    candidates = np.atleast_1d(np.asarray(candidates, dtype=complex))
    if orbits is None:
        orbits = fmap.orbit(candidates, n)

    orbits = np.asarray(orbits, dtype=complex).reshape(len(candidates), n)
    if constraint is not None:
        keep = np.flatnonzero(constraint.admits(orbits))
    else:
        keep = np.arange(len(candidates))

    if len(keep) == 0:
        log(f'WARNING: no candidate of length {n} satisfies {constraint}; partition sum is 0')
        return PartitionSum(float('-inf'), 0, ())

    values = np.asarray(potential.evaluate(orbits[keep].reshape(-1)), dtype=float).reshape(len(keep), n)
    sums = np.sum(values, axis=1)
    order = keep[np.argsort(-sums, kind='stable')]
    sums_of = dict(zip(keep.tolist(), sums.tolist()))

    # d_n >= |difference of first points|, so only chosen orbits starting within eps can veto
    first = orbits[:, 0]
    finite = np.flatnonzero(np.isfinite(first))
    starts = cKDTree(as_xy(first[finite])) if len(finite) else None
    is_chosen = np.zeros(len(candidates), dtype=bool)
    selected = []
    for i in order:
        if starts is not None and np.isfinite(first[i]):
            near = finite[starts.query_ball_point([first[i].real, first[i].imag], epsilon)]
            near = near[is_chosen[near]]
        else:
            near = np.array(selected, dtype=int)

        if len(near) and np.min(np.max(np.abs(orbits[near] - orbits[i]), axis=1)) < epsilon:
            continue

        is_chosen[i] = True
        selected.append(int(i))

    log_value = float(logsumexp([sums_of[i] for i in selected]))
    return PartitionSum(log_value, len(selected), tuple(selected))


# region Oracles

class PressureOracle(ABC):
    """
    Pressure estimator with its potential-independent geometry built once
    """

    method: str = ''

    def __init__(self, fmap: RationalMap, mode: str = 'last'):
        if mode not in EXTRAPOLATION_MODES:
            raise PressureError(f'unknown extrapolation mode {mode!r}')

        self.map = fmap
        self.mode = mode
        self.notes: List[str] = []

    @abstractmethod
    def estimate(self, potential: Potential, floor: Optional[float] = None) -> PressureEstimate:
        """
        :param potential: potential on J
        :param floor: lower bound applied to the extrapolated value
        :return: the estimate with its finite-n sequence
        """


class TreeOracle(PressureOracle):
    """
    (1/n) log sum over f^-n(w) of e^(S_n phi)
    """

    method = 'tree'

    def __init__(self, fmap: RationalMap, n: int, anchor: Optional[complex] = None, mode: str = 'last',
                 budget: int = G_NODE_BUDGET):
        super().__init__(fmap, mode)
        if n < 3:
            raise PressureError(f'tree depth must be >= 3 (got {n})')

        anchor = default_anchor(fmap) if anchor is None else complex(anchor)
        critical = fmap.critical_points()
        values = np.asarray(fmap.evaluate(critical[~is_infinity(critical)]))
        if len(values) and np.min(np.abs(values - anchor)) < G_CRITICAL_VALUE_TOL:
            anchor = self.__perturbed(anchor, 'critical value')

        try:
            self.tree = fmap.preimage_tree(anchor, n, budget)
        except DegenerateFiberError as ex:
            anchor = self.__perturbed(anchor, str(ex))
            self.tree = fmap.preimage_tree(anchor, n, budget)

        self.anchor = anchor
        self.n = n

    def __perturbed(self, anchor: complex, reason: str) -> complex:
        note = f'anchor {anchor} perturbed by {G_ANCHOR_SHIFT:g} ({reason})'
        log(note)
        self.notes.append(note)
        return anchor + G_ANCHOR_SHIFT

    def level_sums(self, potential: Potential) -> List[np.ndarray]:
        """
        :return: S_k phi at every node of level k, for k = 1..n
        """
        d = self.tree.degree
        sums = np.zeros(1)
        result = []
        for level in range(1, self.n + 1):
            values = np.asarray(potential.evaluate(self.tree.levels[level]), dtype=float)
            sums = values + np.repeat(sums, d)
            result.append(sums)

        return result

    def estimate(self, potential: Potential, floor: Optional[float] = None) -> PressureEstimate:
        logs = [logsumexp(sums) for sums in self.level_sums(potential)]
        return _assemble(self.method, range(1, self.n + 1), logs, self.mode, floor=floor, notes=self.notes)


class PeriodicOracle(PressureOracle):
    """
    (1/k) log sum over non-attracting finite solutions of f^k(z) = z of
    e^(S_k phi), on the four depths ending at n
    """

    method = 'periodic'

    def __init__(self, fmap: RationalMap, n: int, mode: str = 'last', cache=None):
        super().__init__(fmap, mode)
        if n < 3:
            raise PressureError(f'periodic depth must be >= 3 (got {n})')

        self.n = n
        self.depths = tuple(range(max(1, n - 3), n + 1))
        self.cache = cache
        self.__points: Dict[int, np.ndarray] = {}

    def points(self, k: int) -> np.ndarray:
        if k not in self.__points:
            fixed = fixed_points_of_iterate(self.map, k, cache=self.cache)
            if fixed.dropped:
                self.notes.append(f'period {k}: {fixed.dropped} unresolved roots left out of the sum')

            self.__points[k] = fixed.points[np.abs(fixed.multipliers) >= 1 - G_ATTRACTING_TOL]

        return self.__points[k]

    def estimate(self, potential: Potential, floor: Optional[float] = None) -> PressureEstimate:
        logs = []
        for k in self.depths:
            points = self.points(k)
            if len(points) == 0:
                logs.append(float('-inf'))
                continue

            logs.append(logsumexp(birkhoff_sums(self.map, potential, points, k)))

        return _assemble(self.method, self.depths, logs, self.mode, floor=floor, notes=self.notes)


class UlamOracle(PressureOracle):
    """
    Log of the leading eigenvalue of the weighted transfer operator
    discretized on the square cells occupied by a Julia sample

    Entry (i, j) averages e^(phi(y)) over sample points x of cell i and their
    preimages y lying in cell j. The eigenvalue comes from power iteration on
    M + sI with s half the mean row sum.
    """

    method = 'ulam'

    def __init__(self, fmap: RationalMap, sample_points: np.ndarray, resolution: int = 256, iterations: int = 300):
        super().__init__(fmap, 'last')
        if iterations < G_ULAM_WINDOW:
            raise PressureError(f'Ulam power iteration needs at least {G_ULAM_WINDOW} iterations')

        points = np.asarray(sample_points, dtype=complex)
        points = points[~is_infinity(points)]
        if len(points) == 0:
            raise PressureError('empty Julia sample')

        self.iterations = iterations
        self.__origin = complex(points.real.min(), points.imag.min())
        span = max(np.ptp(points.real), np.ptp(points.imag))
        self.__size = span / resolution if span > 0 else 1.0
        self.__resolution = resolution

        keys = self.__keys(points)
        self.cells, source = np.unique(keys, return_inverse=True)
        counts = np.bincount(source, minlength=len(self.cells))

        roots, degenerate = fmap.solve_fibers(points)
        rows = np.repeat(source, fmap.degree)
        preimages = roots.reshape(-1)
        valid = np.repeat(~degenerate, fmap.degree) & ~is_infinity(preimages)
        target_keys = self.__keys(np.where(valid, preimages, self.__origin))
        position = np.clip(np.searchsorted(self.cells, target_keys), 0, len(self.cells) - 1)
        valid &= self.cells[position] == target_keys

        dropped = 1 - float(np.mean(valid))
        if dropped > 0:
            self.notes.append(f'{100 * dropped:.2f}% of preimages fell outside the occupied cells')

        self.rows = rows[valid]
        self.cols = position[valid]
        self.preimages = preimages[valid]
        self.scale = 1.0 / counts[self.rows]

    def __keys(self, z: np.ndarray) -> np.ndarray:
        side = self.__resolution + 1
        ix = np.clip(np.floor((z.real - self.__origin.real) / self.__size), 0, side - 1).astype(np.int64)
        iy = np.clip(np.floor((z.imag - self.__origin.imag) / self.__size), 0, side - 1).astype(np.int64)
        return ix * side + iy

    def operator(self, potential: Potential) -> sparse.csr_matrix:
        weights = np.exp(np.asarray(potential.evaluate(self.preimages), dtype=float)) * self.scale
        size = len(self.cells)
        return sparse.csr_matrix((weights, (self.rows, self.cols)), shape=(size, size))

    def estimate(self, potential: Potential, floor: Optional[float] = None) -> PressureEstimate:
        M = self.operator(potential)
        size = M.shape[0]
        shift = 0.5 * float(M.sum()) / size
        g = np.full(size, 1.0 / size)
        logs = []
        with np.errstate(divide='ignore'):
            for _ in range(self.iterations):
                h = M @ g + shift * g
                norm = float(np.sum(h))
                logs.append(float(np.log(norm - shift)) if norm > shift else float('-inf'))
                g = h / norm

        window = np.asarray(logs[-G_ULAM_WINDOW:])
        amplitude = float(np.ptp(window)) if np.all(np.isfinite(window)) else float('inf')
        notes = list(self.notes)
        if amplitude > G_ULAM_TOL:
            note = f'power iteration did not settle: oscillation amplitude {amplitude:.3g}'
            log(f'WARNING: {note}')
            notes.append(note)

        value = logs[-1]
        floor_applied = floor is not None and not value >= floor
        if floor_applied:
            value = floor

        diagnostics = PressureDiagnostics(tuple(range(1, self.iterations + 1)), tuple(logs), 'last', amplitude,
                                          floor, floor_applied, tuple(notes))
        return PressureEstimate(float(value), self.method, self.iterations, None, diagnostics)


class SeparatedOracle(PressureOracle):
    """
    (1/k) log Lambda(D, phi, eps, k) for k = 1..n with preimage-tree leaves
    of depth k as candidates. A B(eta) constraint also draws candidates from
    the preimage trees of Omega, whose orbits linger in the plateau.
    """

    method = 'separated'

    def __init__(self, fmap: RationalMap, n: int, epsilon: float, constraint: Optional[Constraint] = None,
                 anchor: Optional[complex] = None, mode: str = 'last', budget: int = G_NODE_BUDGET):
        super().__init__(fmap, mode)
        if n < 3:
            raise PressureError(f'separated depth must be >= 3 (got {n})')

        self.n = n
        self.epsilon = epsilon
        self.constraint = constraint or Constraint()
        self.tree: PreimageTree = TreeOracle(fmap, n, anchor, mode, budget).tree
        self.seeds = np.array([], dtype=complex)
        if self.constraint.kind in ('bad', 'B'):
            self.seeds = omega_seeds(fmap, self.constraint.omega_points, budget=budget)
            self.notes.append(f'{len(self.seeds)} preimages of Omega added to the candidates')

    def partition_sums(self, potential: Potential) -> List[PartitionSum]:
        sums = []
        for k in range(1, self.n + 1):
            orbits = self.tree.orbits(k)
            if len(self.seeds):
                orbits = np.concatenate([orbits, self.map.orbit(self.seeds, k)])

            sums.append(partition_sum(self.map, potential, orbits[:, 0], k, self.epsilon, self.constraint, orbits))

        return sums

    def estimate(self, potential: Potential, floor: Optional[float] = None) -> PressureEstimate:
        logs = [s.log_value for s in self.partition_sums(potential)]
        notes = list(self.notes) + [f'constraint {self.constraint}; greedy selection is a lower witness']
        return _assemble(self.method, range(1, self.n + 1), logs, self.mode, self.epsilon, floor, notes)


def make_oracle(fmap: RationalMap, config: OracleConfig, sample_points: Optional[np.ndarray] = None,
                constraint: Optional[Constraint] = None, cache=None) -> PressureOracle:
    """
    :return: the oracle named by config.oracle
    """
    if config.oracle == 'tree':
        return TreeOracle(fmap, config.n, config.anchor, config.extrapolation)

    if config.oracle == 'periodic':
        return PeriodicOracle(fmap, config.periodic_n, config.extrapolation, cache)

    if config.oracle == 'ulam':
        if sample_points is None:
            anchor = config.anchor if config.anchor is not None else default_anchor(fmap)
            sample_points = sample_inverse_iteration(fmap, anchor, config.sample_count, seed=config.seed).points

        return UlamOracle(fmap, sample_points, config.ulam_resolution, config.ulam_iterations)

    if config.oracle == 'separated':
        return SeparatedOracle(fmap, config.n, config.epsilon, constraint, config.anchor, config.extrapolation)

    raise PressureError(f'unknown oracle {config.oracle!r}')

# endregion


def _floor(config: OracleConfig, omega_set: Optional[OmegaSet], potential: Potential) -> Optional[float]:
    if config.floor and omega_set:
        return a_omega(omega_set, potential)

    return None


def estimate_pressure(fmap: RationalMap, potential: Potential, config: OracleConfig,
                      omega_set: Optional[OmegaSet] = None, sample_points: Optional[np.ndarray] = None,
                      constraint: Optional[Constraint] = None, cache=None) -> PressureEstimate:
    oracle = make_oracle(fmap, config, sample_points, constraint, cache)
    return oracle.estimate(potential, _floor(config, omega_set, potential))


def pressure_separated(fmap: RationalMap, potential: Potential, n_max: int, epsilon: float,
                       constraint: Optional[Constraint] = None, anchor: Optional[complex] = None,
                       mode: str = 'last') -> PressureEstimate:
    return SeparatedOracle(fmap, n_max, epsilon, constraint, anchor, mode).estimate(potential)


def pressure_tree(fmap: RationalMap, potential: Potential, anchor: Optional[complex], n: int,
                  mode: str = 'last') -> PressureEstimate:
    """
    :raises BudgetExceededError: d^n exceeds the node budget
    """
    return TreeOracle(fmap, n, anchor, mode).estimate(potential)


def pressure_periodic(fmap: RationalMap, potential: Potential, n: int, mode: str = 'last',
                      cache=None) -> PressureEstimate:
    return PeriodicOracle(fmap, n, mode, cache).estimate(potential)


def pressure_ulam(fmap: RationalMap, potential: Potential, sample_points: np.ndarray, resolution: int = 256,
                  iterations: int = 300) -> PressureEstimate:
    return UlamOracle(fmap, sample_points, resolution, iterations).estimate(potential)


def a_omega_vs_pressure(fmap: RationalMap, potential: Potential, omega_set: OmegaSet, config: OracleConfig,
                        sample_points: Optional[np.ndarray] = None) -> GapReport:
    """
    Gap iff A(Omega, phi) < P - margin, with margin the estimate's tail width

    :raises NotParabolicError: Omega is empty
    """
    A = a_omega(omega_set, potential)
    estimate = make_oracle(fmap, config, sample_points).estimate(potential)
    margin = estimate.diagnostics.tail_width
    return GapReport(A, estimate.value, bool(A < estimate.value - margin), margin, estimate)


def pressure_curve(fmap: RationalMap, t_values: Sequence[float], config: OracleConfig,
                   oracles: Sequence[str] = ('tree', 'periodic'), sample_points: Optional[np.ndarray] = None,
                   omega_set: Optional[OmegaSet] = None, cache=None) -> List[CurveRow]:
    """
    P(phi_t) for every t by each enabled oracle; failures are recorded per
    cell and the curve is still emitted
    """
    t_values = [float(t) for t in t_values]
    if t_values != sorted(t_values):
        raise PressureError('t values must be sorted')

    built: Dict[str, Optional[PressureOracle]] = {}
    errors: Dict[str, str] = {}
    for name in oracles:
        try:
            built[name] = make_oracle(fmap, config._replace(oracle=name), sample_points, cache=cache)
        except ParabolicError as ex:
            built[name] = None
            errors[name] = f'{name}: {ex}'

    rows = []
    for t in t_values:
        potential = GeometricPotential(fmap, t)
        floor = _floor(config, omega_set, potential)
        values = {}
        cell_errors = [errors[name] for name in oracles if name in errors]
        tail = float('nan')
        for name, oracle in built.items():
            if oracle is None:
                values[name] = float('nan')
                continue

            try:
                estimate = oracle.estimate(potential, floor)
            except ParabolicError as ex:
                values[name] = float('nan')
                cell_errors.append(f'{name}: {ex}')
                continue

            values[name] = estimate.value
            if name == oracles[0]:
                tail = estimate.diagnostics.tail_width

        rows.append(CurveRow(t, values.get('tree', float('nan')), values.get('periodic', float('nan')),
                             values.get('ulam', float('nan')), config.n, tail, tuple(cell_errors)))

    return rows


# region Bowen root

def _power(t, c, h, beta):
    return c * np.clip(h - t, 1e-12, None) ** beta


def bowen_root(fmap: RationalMap, config: OracleConfig, tol: Optional[float] = None, mode: Optional[str] = None,
               omega_set: Optional[OmegaSet] = None, sample_points: Optional[np.ndarray] = None) -> BowenRoot:
    """
    Zero of t -> P(phi_t)

    The threshold root inf{t : P(t) < tol} is bracketed in steps of
    config.bracket_step and bisected; powerfit then fits P = c (h - t)^beta on
    the samples with P >= tol and reports h, keeping the threshold root as a
    lower witness.

    :raises PressureError: P(phi_0) <= 0 or no bracket below config.bracket_max
    """
    tol = config.bowen_tol if tol is None else tol
    mode = config.bowen_mode if mode is None else mode
    oracle = make_oracle(fmap, config, sample_points)
    samples: Dict[float, float] = {}

    def pressure(t: float) -> float:
        if t not in samples:
            potential = GeometricPotential(fmap, t)
            samples[t] = oracle.estimate(potential, _floor(config, omega_set, potential)).value

        return samples[t]

    if not pressure(0.0) > 0:
        raise PressureError(f'P(phi_0) = {pressure(0.0):.6g} is not positive')

    lo, hi = 0.0, None
    t = 0.0
    while t < config.bracket_max:
        t = min(t + config.bracket_step, config.bracket_max)
        if pressure(t) < tol:
            hi = t
            break

        lo = t

    if hi is None:
        raise PressureError(f'no t <= {config.bracket_max:g} with P(phi_t) < {tol:g}')

    for _ in range(config.bisections):
        mid = (lo + hi) / 2
        if pressure(mid) < tol:
            hi = mid
        else:
            lo = mid

    threshold = (lo + hi) / 2
    notes = []
    fit = None
    h = threshold
    if mode == 'powerfit':
        for t in np.linspace(0.0, lo, 8):
            pressure(float(t))

        ts = np.array(sorted(t for t, p in samples.items() if p >= tol))
        ps = np.array([samples[t] for t in ts])
        if len(ts) >= 3:
            try:
                params, _ = curve_fit(_power, ts, ps, p0=(ps[0] / max(threshold, 1e-3), threshold + tol, 1.0),
                                      bounds=([0.0, ts[-1], 0.2], [np.inf, config.bracket_max, 5.0]))
                fit = tuple(float(v) for v in params)
                h = fit[1]
            except (RuntimeError, ValueError) as ex:
                notes.append(f'power fit failed ({ex}); threshold root reported')
        else:
            notes.append('fewer than three samples above tol; threshold root reported')

    ordered = tuple((float(t), float(samples[t])) for t in sorted(samples))
    return BowenRoot(float(h), float(threshold), mode, tol, ordered, fit, tuple(notes))

# endregion


# region Equilibrium states

def equilibrium_approx(fmap: RationalMap, potential: Potential, n: int, source: str = 'tree',
                       anchor: Optional[complex] = None, cache=None) -> WeightedPointMeasure:
    """
    Atoms at depth-n tree leaves (or period-n points) weighted by e^(S_n phi)
    """
    if source == 'tree':
        oracle = TreeOracle(fmap, max(n, 3), anchor)
        sums = oracle.level_sums(potential)[n - 1]
        return WeightedPointMeasure.from_log_weights(oracle.tree.levels[n], sums)

    if source == 'periodic':
        points = PeriodicOracle(fmap, max(n, 3), cache=cache).points(n)
        if len(points) == 0:
            raise PressureError(f'no non-attracting point of period dividing {n}')

        return WeightedPointMeasure.from_log_weights(points, birkhoff_sums(fmap, potential, points, n))

    raise PressureError(f'unknown measure source {source!r}')


def equilibrium_diagnostics(fmap: RationalMap, potential: Potential, measure: WeightedPointMeasure,
                            omega_set: OmegaSet, beta: float, pressure: float) -> EquilibriumReport:
    """
    :param pressure: pressure estimate of the potential
    :return: entropy P - integral, mass of the open ball B(Omega, 2 beta) and
        the Lyapunov exponent sum w log|f'|
    """
    notes = []
    if not measure.is_normalized:
        notes.append('measure weights do not sum to one')

    integral = float(np.sum(measure.weights * np.asarray(potential.evaluate(measure.points), dtype=float)))
    if omega_set:
        dist = np.min(np.abs(measure.points[:, None] - omega_set.points[None, :]), axis=1)
        omega_mass = float(np.sum(measure.weights[dist < 2 * beta]))
    else:
        omega_mass = 0.0
        notes.append('Omega is empty; omega mass reported as 0')

    with np.errstate(divide='ignore'):
        lyapunov = float(np.sum(measure.weights * np.log(np.abs(np.asarray(fmap.derivative(measure.points))))))

    return EquilibriumReport(pressure - integral, integral, omega_mass, lyapunov, float(pressure), tuple(notes))


def hyperbolicity_check(fmap: RationalMap, potential: Potential, estimate: PressureEstimate,
                        n_max: int = 4) -> HyperbolicityReport:
    """
    Compare sup (1/n) S_n phi over non-attracting cycles of period <= n_max
    with the pressure estimate
    """
    best, period = float('-inf'), 0
    for n in range(1, n_max + 1):
        try:
            orbits = find_periodic_points(fmap, n)
        except BudgetExceededError:
            break

        for orbit in orbits:
            if is_infinity(orbit.points[0]) or abs(orbit.multiplier) < 1 - G_ATTRACTING_TOL:
                continue

            average = cycle_average(orbit, potential)
            if average > best:
                best, period = average, n

    return HyperbolicityReport(best, period, estimate.value, estimate.diagnostics.tail_width)

# endregion
