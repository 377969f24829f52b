"""
Milnor Metric

A conformal density equal to a constant plateau M on B(Omega, alpha) and to
the quasi-hyperbolic surrogate 1/dist(z, P_N(f)) elsewhere, where P_N(f) is a
truncation of the postcritical set. The constant M follows the two-pass
protocol: the expansion factor r(alpha) is measured first, then M is set from
the preimages of Omega.
"""

from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..dynamics.julia import mesh_estimate
from ..dynamics.model import OmegaSet
from ..dynamics.periodic import NotParabolicError
from ..dynamics.rational import RationalMap, is_infinity, lex_order
from ..errors import ParabolicError
from ..util import mklog

__all__ = [
    'MetricError',
    'SingularDensityError',
    'MilnorMetric',
    'ExpansionReport',
    'CalibrationReport',
    'postcritical_truncation',
    'density',
    'choose_M',
    'derivative_norm',
    'verify_expansion',
    'local_distance',
    'calibrate',
]

G_TRUNCATION = 50
G_DEDUP_TOL = 1e-10
G_ALPHA_LADDER = (0.2, 0.1, 0.05, 0.02, 0.01)
G_VIOLATION_TOL = 1e-6
G_SINGULAR = 1e-300
G_M_MARGIN = 1.0
G_QUADRATURE_NODES = 32

log = mklog('metric')


class MetricError(ParabolicError):
    """
    Metric construction or verification failed
    """


class SingularDensityError(MetricError):
    """
    The surrogate density blows up at a postcritical point outside the plateau
    """


class MilnorMetric(NamedTuple):
    """
    Piecewise conformal density psi_alpha
    """

    alpha: float
    M: float
    postcritical: np.ndarray
    omega_points: np.ndarray
    r_alpha: float = float('nan')
    density_mode: str = 'surrogate-quasihyperbolic'

    def __str__(self) -> str:
        return f'MilnorMetric(alpha={self.alpha:g}, M={self.M:.6g}, r={self.r_alpha:.6g}, |P_N|={len(self.postcritical)})'

    def surrogate(self, z) -> np.ndarray:
        """
        :return: 1/dist(z, P_N) ignoring the plateau
        :raises SingularDensityError: z sits on a truncation point
        """
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self.postcritical) == 0:
            return np.ones(len(z))

        dist = np.min(np.abs(z[:, None] - self.postcritical[None, :]), axis=1)
        if np.any(dist < G_SINGULAR):
            raise SingularDensityError(f'density is singular at {z[np.argmax(dist < G_SINGULAR)]}')

        return 1.0 / dist

    def in_plateau(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if len(self.omega_points) == 0:
            return np.zeros(len(z), dtype=bool)

        return np.min(np.abs(z[:, None] - self.omega_points[None, :]), axis=1) < self.alpha

    def density(self, z):
        """
        :return: M on B(Omega, alpha), the surrogate elsewhere
        """
        flat = np.atleast_1d(np.asarray(z, dtype=complex))
        plateau = self.in_plateau(flat)
        values = np.full(len(flat), self.M, dtype=float)
        if np.any(~plateau):
            values[~plateau] = self.surrogate(flat[~plateau])

        return float(values[0]) if np.ndim(z) == 0 else values

    def derivative_norm(self, fmap: RationalMap, z):
        """
        :return: psi(f z) |f'(z)| / psi(z)
        """
        flat = np.atleast_1d(np.asarray(z, dtype=complex))
        norm = (np.asarray(self.density(fmap.evaluate(flat))) * np.abs(np.atleast_1d(fmap.derivative(flat)))
                / np.asarray(self.density(flat)))
        return float(norm[0]) if np.ndim(z) == 0 else norm

    def local_distance(self, x: complex, y: complex) -> float:
        """
        :return: |x - y| psi((x + y)/2), the small-scale approximation of d_alpha
        :raises MetricError: |x - y| exceeds alpha
        """
        gap = abs(x - y)
        if gap > self.alpha:
            raise MetricError(f'local distance requested at separation {gap:.3g} > alpha = {self.alpha:g}')

        if gap == 0:
            return 0.0

        return gap * float(self.density((x + y) / 2))

    def path_length(self, x, y, nodes: int = G_QUADRATURE_NODES) -> np.ndarray:
        """
        psi-length of the straight segments [x, y], midpoint rule
        """
        x = np.atleast_1d(np.asarray(x, dtype=complex))
        y = np.atleast_1d(np.asarray(y, dtype=complex))
        s = (np.arange(nodes) + 0.5) / nodes
        path = x[:, None] + (y - x)[:, None] * s[None, :]
        psi = np.asarray(self.density(path.reshape(-1))).reshape(path.shape)
        return np.abs(y - x) * psi.mean(axis=1)


class ExpansionReport(NamedTuple):
    r_min_on_K: float
    global_min: float
    violations: Tuple[complex, ...]
    mesh: float
    k_count: int

    @property
    def passed(self) -> bool:
        return self.r_min_on_K > 1 and not self.violations


class CalibrationReport(NamedTuple):
    metric: MilnorMetric
    expansion: Optional[ExpansionReport]
    alphas_tried: Tuple[float, ...]
    M_flagged: bool
    notes: Tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.expansion is not None and self.expansion.passed


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    kept = []
    for z in points[lex_order(points)]:
        if all(abs(z - k) >= tol for k in kept):
            kept.append(z)

    return np.array(kept, dtype=complex)


def postcritical_truncation(fmap: RationalMap, N: int = G_TRUNCATION,
                            omega_points: Sequence[complex] = ()) -> np.ndarray:
    """
    :param fmap: rational map
    :param N: forward steps per critical point (>= 1)
    :param omega_points: points of Omega to add
    :return: union of f(c), ..., f^N(c) over critical c, plus Omega,
        deduplicated at 1e-10, finite chart only, lexicographically ordered
    """
    if N < 1:
        raise ValueError(f'truncation length must be >= 1 (got {N})')

    omega_points = np.asarray(omega_points, dtype=complex)
    if len(omega_points) == 0:
        log('WARNING: Omega is empty; the Milnor metric is meant for parabolic maps')

    critical = np.unique(fmap.critical_points())
    orbits = fmap.orbit(np.asarray(fmap.evaluate(critical)), N).reshape(-1)
    points = np.concatenate([orbits, omega_points])
    points = points[~is_infinity(points)]
    return _dedup(points, G_DEDUP_TOL)


def density(metric: MilnorMetric, z):
    return metric.density(z)


def derivative_norm(metric: MilnorMetric, fmap: RationalMap, z):
    return metric.derivative_norm(fmap, z)


def local_distance(metric: MilnorMetric, x: complex, y: complex) -> float:
    return metric.local_distance(x, y)


def _omega_preimages(fmap: RationalMap, omega_points: np.ndarray) -> np.ndarray:
    extra = []
    for w in omega_points:
        for z in fmap.preimages(w):
            if np.min(np.abs(omega_points - z)) > 1e-6:
                extra.append(z)

    return np.array(extra, dtype=complex)


def choose_M(fmap: RationalMap, alpha: float, omega_points: Sequence[complex], r_alpha: float,
             postcritical: np.ndarray) -> Tuple[float, bool]:
    """
    M = max{ r rho(z) / |f'(z)| : z in f^-1(Omega) minus Omega } + 1

    :return: (M, flagged); flagged when f^-1(Omega) = Omega and M falls back to 1 + margin
    :raises NotParabolicError: Omega is empty
    """
    omega_points = np.asarray(omega_points, dtype=complex)
    if len(omega_points) == 0:
        raise NotParabolicError('not parabolic: no plateau constant without Omega')

    extra = _omega_preimages(fmap, omega_points)
    if len(extra) == 0:
        return 1.0 + G_M_MARGIN, True

    surrogate = MilnorMetric(alpha, 1.0, postcritical, omega_points).surrogate(extra)
    ratio = r_alpha * surrogate / np.abs(fmap.derivative(extra))
    return float(np.max(ratio)) + 1.0, False


def verify_expansion(metric: MilnorMetric, fmap: RationalMap, julia_points: np.ndarray,
                     alpha: Optional[float] = None, violation_tol: float = G_VIOLATION_TOL) -> ExpansionReport:
    """
    :param metric: calibrated metric
    :param fmap: rational map
    :param julia_points: cloud covering J at mesh <= alpha/4
    :param alpha: K(alpha) scale (defaults to the metric's alpha)
    :param violation_tol: norms below 1 - violation_tol count as violations
    :return: min norm on K(alpha) and f^-1 K(alpha), global min, violations
    :raises MetricError: the sample is too sparse
    """
    alpha = metric.alpha if alpha is None else alpha
    points = np.asarray(julia_points, dtype=complex)
    points = points[~is_infinity(points)]
    mesh = mesh_estimate(points)
    if mesh > alpha / 4:
        raise MetricError(f'sample mesh {mesh:.3g} exceeds alpha/4 = {alpha / 4:.3g}')

    norms = np.asarray(metric.derivative_norm(fmap, points))
    images = np.asarray(fmap.evaluate(points))
    far = ~MilnorMetric(alpha, 1.0, metric.postcritical, metric.omega_points).in_plateau(points)
    far_image = ~MilnorMetric(alpha, 1.0, metric.postcritical, metric.omega_points).in_plateau(images)
    on_k = far & far_image

    r_min = float(np.min(norms[on_k])) if np.any(on_k) else float('nan')
    violations = tuple(complex(z) for z in points[norms < 1 - violation_tol])
    return ExpansionReport(r_min, float(np.min(norms)), violations, mesh, int(np.sum(on_k)))


def calibrate(fmap: RationalMap, omega_set: OmegaSet, julia_points: np.ndarray, N: int = G_TRUNCATION,
              ladder: Sequence[float] = G_ALPHA_LADDER) -> CalibrationReport:
    """
    Two-pass calibration over the alpha ladder (largest alpha first)

    Pass one measures r(alpha) as the minimal surrogate derivative norm on
    K(alpha) and f^-1 K(alpha); pass two sets M from that r. The first alpha
    whose metric expands on K with no violations wins; otherwise the smallest
    alpha tried is returned, flagged by `passed`.
    """
    omega_points = omega_set.points
    postcritical = postcritical_truncation(fmap, N, omega_points)
    notes = []
    if not omega_set:
        notes.append('not parabolic: plateau constant fixed at M = 1')
        metric = MilnorMetric(ladder[0], 1.0, postcritical, omega_points)
        try:
            report = verify_expansion(metric, fmap, julia_points)
        except MetricError as ex:
            notes.append(str(ex))
            report = None

        if report is not None:
            metric = metric._replace(r_alpha=report.r_min_on_K)

        return CalibrationReport(metric, report, (ladder[0],), False, tuple(notes))

    points = np.asarray(julia_points, dtype=complex)
    tried = []
    best = None
    for alpha in ladder:
        tried.append(alpha)
        unit = MilnorMetric(alpha, 1.0, postcritical, omega_points)
        try:
            first = verify_expansion(unit, fmap, points, alpha)
        except MetricError as ex:
            notes.append(f'alpha={alpha:g}: {ex}')
            continue

        r_alpha = first.r_min_on_K
        M, flagged = choose_M(fmap, alpha, omega_points, r_alpha, postcritical)
        metric = MilnorMetric(alpha, M, postcritical, omega_points, r_alpha)
        report = verify_expansion(metric, fmap, points, alpha)
        best = CalibrationReport(metric, report, tuple(tried), flagged, tuple(notes))
        if report.passed:
            return best

        notes.append(f'alpha={alpha:g}: r_min_on_K={report.r_min_on_K:.6g}, {len(report.violations)} violations')

    if best is None:
        raise MetricError('no alpha on the ladder admits the sample mesh; ' + '; '.join(notes))

    return best._replace(notes=tuple(notes))
