"""
Periodic Points

Locates periodic points of a rational map, classifies them by multiplier,
assembles the set of rationally indifferent cycles and reduces the map to an
iterate whose parabolic points are fixed with multiplier one.

Fixed points of f^n are the roots of X_n(z) - zY_n(z), where (X_n, Y_n) is the
homogeneous n-fold composition. Its coefficients are never expanded: the
Aberth-Ehrlich iteration only needs values and first derivatives, which the
homogeneous recursion supplies.
"""

import warnings
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import optimize, sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..errors import ParabolicError
from ..util import mklog
from .model import Classification, PeriodicOrbit, OmegaSet, FixedPointSet, PreconditionReport
from .rational import RationalMap, RootSolverError, BudgetExceededError, INFINITY, is_infinity, lex_order

__all__ = [
    'PeriodicError',
    'NotParabolicError',
    'fixed_points_of_iterate',
    'find_periodic_points',
    'classify',
    'classify_multiplier',
    'omega',
    'check_parabolic_preconditions',
    'a_omega',
    'reduce_to_fixed',
    'cycle_average',
]

G_ROOT_DEGREE_BUDGET = 1025
G_ROOT_TOL = 1e-14
G_RESIDUAL_TOL = 1e-9
G_SETTLED_TOL = 1e-12
G_CLUSTER_TOL = 1e-3
G_MULTIPLE_TOL = 1e-4
G_SEED_JITTER = 1e-8
G_GOLDEN = 0.6180339887498949
G_POLISH_STEPS = 8
G_PERIOD_TOL = 1e-8
G_MATCH_TOL = 1e-6
G_UNITY_TOL = 1e-8
G_Q_MAX = 12
G_OMEGA_SCOPE = 6
G_CLEARANCE = 0.05
G_MAX_ABERTH_STEPS = 500

log = mklog('periodic')


class PeriodicError(ParabolicError):
    """
    Periodic point computation failed
    """


class NotParabolicError(PeriodicError):
    """
    An operation that needs rationally indifferent cycles got none
    """


# region Homogeneous iterate

def _homogeneous(fmap: RationalMap, n: int, z: np.ndarray, scales: Optional[List[np.ndarray]] = None):
    """
    Values of (X_n, Y_n, X_n', Y_n') at z

    Each step is divided by a common positive scale per point, which leaves the
    ratios N/N' and f^n = X/Y untouched. Passing `scales` back reuses them so
    the values stay an exact polynomial multiple across calls.
    """
    p = np.concatenate([fmap.numerator, np.zeros(fmap.degree + 1 - len(fmap.numerator))])
    q = np.concatenate([fmap.denominator, np.zeros(fmap.degree + 1 - len(fmap.denominator))])
    d = fmap.degree

    x, y = z.copy(), np.ones_like(z)
    dx, dy = np.ones_like(z), np.zeros_like(z)
    used = []
    for step in range(n):
        x_pow = [np.ones_like(z)]
        y_pow = [np.ones_like(z)]
        for _ in range(d):
            x_pow.append(x_pow[-1] * x)
            y_pow.append(y_pow[-1] * y)

        nx, ny, ndx, ndy = (np.zeros_like(z) for _ in range(4))
        for j in range(d + 1):
            term = x_pow[j] * y_pow[d - j]
            dterm = np.zeros_like(z)
            if j > 0:
                dterm += j * x_pow[j - 1] * y_pow[d - j] * dx

            if j < d:
                dterm += (d - j) * x_pow[j] * y_pow[d - j - 1] * dy

            nx += p[j] * term
            ny += q[j] * term
            ndx += p[j] * dterm
            ndy += q[j] * dterm

        scale = scales[step] if scales is not None else np.maximum(np.abs(nx), np.abs(ny))
        scale = np.where(scale > 0, scale, 1.0)
        used.append(scale)
        x, y, dx, dy = nx / scale, ny / scale, ndx / scale, ndy / scale

    return x, y, dx, dy, used


def _fixed_point_equation(fmap: RationalMap, n: int, z: np.ndarray, scales=None):
    x, y, dx, dy, used = _homogeneous(fmap, n, z, scales)
    return x - z * y, dx - y - z * dy, used


def _inverted(fmap: RationalMap) -> RationalMap:
    """
    :return: g(w) = 1/f(1/w), which moves infinity to zero
    """
    d = fmap.degree
    p = np.concatenate([fmap.numerator, np.zeros(d + 1 - len(fmap.numerator))])
    q = np.concatenate([fmap.denominator, np.zeros(d + 1 - len(fmap.denominator))])
    return RationalMap(q[::-1], p[::-1], validate=False)


def _infinity_multiplier(fmap: RationalMap, n: int) -> complex:
    g = _inverted(fmap)
    orbit = g.orbit(np.array([0j]), n)[0]
    if np.any(is_infinity(orbit)):
        raise PeriodicError(f'orbit of infinity passes through 0 within {n} steps')

    return complex(np.prod(g.derivative(orbit)))

# endregion


def _equation_degree(fmap: RationalMap, n: int) -> Tuple[int, bool]:
    """
    :return: number of finite roots of f^n(z) = z counted with multiplicity,
        and whether infinity is fixed by f^n
    """
    has_infinity = bool(is_infinity(fmap.iterate_point(INFINITY, n)))
    degree = fmap.degree ** n + 1
    if has_infinity:
        if abs(_infinity_multiplier(fmap, n) - 1.0) < G_UNITY_TOL:
            raise PeriodicError('infinity is a parabolic fixed point; conjugate the map so that J lies in C')

        degree -= 1

    return degree, has_infinity


def _circle(fmap: RationalMap, count: int, radius: Optional[float] = None) -> np.ndarray:
    if radius is None:
        coeff_scale = max(np.max(np.abs(fmap.numerator)), np.max(np.abs(fmap.denominator)))
        radius = 1.5 * (1.0 + coeff_scale)

    angles = 2 * np.pi * (np.arange(count) + 0.25) / count
    return radius * np.exp(1j * angles)


def _seeds(fmap: RationalMap, n: int, degree: int) -> np.ndarray:
    """
    Starting points for the period-n solve

    Leaves of the depth-n preimage tree of the most repelling fixed point lie
    on J with the same distribution as the periodic points, so each root
    starts next to its final position. A circle pads the remaining seeds.
    """
    if n == 1:
        return _circle(fmap, degree)

    try:
        first = _aberth(fmap, 1, _circle(fmap, _equation_degree(fmap, 1)[0]))
        with np.errstate(all='ignore'):
            stretch = np.abs(np.asarray(fmap.derivative(first), dtype=complex))

        anchor = complex(first[np.argmax(np.where(np.isfinite(stretch), stretch, -1.0))])
        leaves = fmap.preimage_tree(anchor, n).leaves
    except ParabolicError as ex:
        log(f'no preimage seeds for period {n} ({ex}); starting from a circle')
        return _circle(fmap, degree)

    leaves = leaves[np.isfinite(leaves)][:degree]
    # separates coincident leaves
    jitter = G_SEED_JITTER * (1 + np.abs(leaves)) * np.exp(2j * np.pi * G_GOLDEN * np.arange(len(leaves)))
    seeds = leaves + jitter
    if len(seeds) < degree:
        radius = 1.1 * (1 + np.max(np.abs(seeds), initial=0.0))
        seeds = np.concatenate([seeds, _circle(fmap, degree - len(seeds), radius)])

    return seeds


def _aberth(fmap: RationalMap, n: int, z: np.ndarray) -> np.ndarray:
    z = np.array(z, dtype=complex)
    converged = np.zeros(len(z), dtype=bool)
    max_steps = max(G_MAX_ABERTH_STEPS, len(z))
    for step in range(max_steps):
        x, y, dx, dy, _ = _homogeneous(fmap, n, z)
        value = x - z * y
        slope = dx - y - z * dy
        with np.errstate(all='ignore'):
            residual = np.abs(x / y - z)
            ratio = value / slope
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            repulsion = np.sum(1.0 / diff, axis=1)
            offset = ratio / (1.0 - ratio * repulsion)

        offset = np.where(converged | (value == 0), 0.0, offset)
        if not np.all(np.isfinite(offset)):
            raise RootSolverError(f'Aberth iteration diverged for the period-{n} equation at step {step}')

        moving = np.flatnonzero(~converged)
        z = z - offset
        converged |= np.abs(offset) < G_ROOT_TOL * (1.0 + np.abs(z))
        if np.all(converged):
            break

        # what is left sits in clusters around multiple roots and already solves the equation
        if step >= 10 and np.all(residual[moving] < G_SETTLED_TOL):
            tree = cKDTree(np.column_stack([z.real, z.imag]))
            nearest, _ = tree.query(np.column_stack([z[moving].real, z[moving].imag]), k=2)
            if np.all(nearest[:, 1] < G_CLUSTER_TOL):
                break
    else:
        log(f'WARNING: Aberth iteration for period {n} stopped after {max_steps} steps '
            f'with {np.count_nonzero(~converged)} roots unsettled')

    return z


def _multipliers(fmap: RationalMap, n: int, z: np.ndarray) -> np.ndarray:
    x, y, dx, dy, _ = _homogeneous(fmap, n, z)
    with np.errstate(all='ignore'):
        return (dx * y - x * dy) / (y * y)


def _clusters(z: np.ndarray, multipliers: np.ndarray, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Merges approximations of one multiple root: points closer than `radius`
    whose multipliers are both within G_MULTIPLE_TOL of one
    """
    near_unity = np.abs(multipliers - 1.0) < G_MULTIPLE_TOL
    tree = cKDTree(np.column_stack([z.real, z.imag]))
    pairs = tree.query_pairs(radius, output_type='ndarray')
    pairs = pairs[near_unity[pairs[:, 0]] & near_unity[pairs[:, 1]]]
    graph = sparse.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(z), len(z)))
    count, labels = connected_components(graph, directed=False)
    centers = np.array([np.mean(z[labels == c]) for c in range(count)], dtype=complex)
    multiplicity = np.bincount(labels, minlength=count)
    return centers, multiplicity


def _polish(fmap: RationalMap, n: int, z: np.ndarray) -> np.ndarray:
    z = np.array(z, dtype=complex)
    for _ in range(G_POLISH_STEPS):
        value, slope, _ = _fixed_point_equation(fmap, n, z)
        with np.errstate(all='ignore'):
            step = value / slope

        step = np.where(np.isfinite(step) & (np.abs(step) < G_CLUSTER_TOL), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= G_ROOT_TOL * (1.0 + np.abs(z))):
            break

    return z


def _refine_multiple(fmap: RationalMap, n: int, z0: complex, radius: float) -> complex:
    # a multiple root of N is a root of N', which is better conditioned
    _, _, scales = _fixed_point_equation(fmap, n, np.array([z0]))

    def slope(z):
        return complex(_fixed_point_equation(fmap, n, np.array([z]), scales)[1][0])

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', RuntimeWarning)
        try:
            refined = complex(optimize.newton(slope, z0, x1=z0 + 1e-7 * (1 + abs(z0)), tol=1e-15, maxiter=50,
                                              disp=False))
        except (ArithmeticError, ValueError, TypeError):
            return z0

    if np.isfinite(refined) and abs(refined - z0) < radius:
        return refined

    return z0


def fixed_points_of_iterate(fmap: RationalMap, n: int, budget: int = G_ROOT_DEGREE_BUDGET,
                            cluster_tol: float = G_CLUSTER_TOL, cache=None) -> FixedPointSet:
    """
    Distinct finite fixed points of f^n

    Every returned point satisfies |f^n(z) - z| < G_RESIDUAL_TOL (1 + |z|),
    relaxed only by the rounding growth of multipliers beyond 1e6. Roots that
    fail the check after polishing are dropped and counted in `dropped`.

    :param fmap: rational map
    :param n: iterate (>= 1)
    :param budget: root-solver degree budget for d^n + 1
    :param cluster_tol: radius within which near-unity roots are merged into one multiple root
    :param cache: optional SqliteOrbitCache; only complete sets are stored
    :return: fixed points with multiplicities and multipliers (f^n)'(z)
    :raises BudgetExceededError: d^n + 1 exceeds the budget
    :raises RootSolverError: root solve failed
    """
    if n < 1:
        raise ValueError(f'period must be >= 1 (got {n})')

    if fmap.degree ** n + 1 > budget:
        raise BudgetExceededError(f'{fmap.degree}^{n} + 1 exceeds the root-solver degree budget {budget}')

    if cache is not None:
        cached = cache.get(fmap.fingerprint(), n)
        if cached is not None:
            return cached

    degree, has_infinity = _equation_degree(fmap, n)
    roots = _aberth(fmap, n, _seeds(fmap, n, degree))
    centers, multiplicity = _clusters(roots, _multipliers(fmap, n, roots), cluster_tol)

    simple = np.flatnonzero(multiplicity == 1)
    centers[simple] = _polish(fmap, n, centers[simple])
    for i in np.flatnonzero(multiplicity > 1):
        centers[i] = _refine_multiple(fmap, n, centers[i], cluster_tol)

    # a multiple root of f^n(z) = z has multiplier exactly one
    multipliers = np.where(multiplicity > 1, 1.0 + 0j, _multipliers(fmap, n, centers))
    with np.errstate(all='ignore'):
        residual = np.abs(np.asarray(fmap.iterate_point(centers, n), dtype=complex) - centers)
        allowed = G_RESIDUAL_TOL * (1.0 + np.abs(centers)) * np.maximum(1.0, 1e-6 * np.abs(multipliers))

    solved = residual < allowed
    dropped = int(np.count_nonzero(~solved))
    if dropped:
        log(f'WARNING: dropped {dropped} of {len(centers)} period-{n} roots with |f^n(z) - z| above tolerance')
        centers, multiplicity, multipliers = centers[solved], multiplicity[solved], multipliers[solved]

    order = lex_order(centers)
    result = FixedPointSet(n, centers[order], multiplicity[order], multipliers[order], has_infinity, dropped)
    if cache is not None and not dropped:
        cache.put(fmap.fingerprint(), n, result)

    return result


# region Classification

def classify_multiplier(multiplier: complex, q_max: int = G_Q_MAX, tol: float = G_UNITY_TOL) -> Classification:
    """
    Tests run in a fixed order: superattracting, attracting, repelling,
    parabolic(p/q) with the smallest q <= q_max, irrationally-indifferent
    """
    modulus = abs(multiplier)
    if modulus < tol:
        return Classification('superattracting')

    if modulus < 1 - tol:
        return Classification('attracting')

    if modulus > 1 + tol:
        return Classification('repelling')

    turn = (np.angle(multiplier) / (2 * np.pi)) % 1.0
    for q in range(1, q_max + 1):
        p = int(round(turn * q))
        if abs(turn - p / q) <= tol:
            return Classification('parabolic', p % q, q)

    return Classification('irrationally-indifferent')


def classify(orbit: Union[PeriodicOrbit, complex], q_max: int = G_Q_MAX, tol: float = G_UNITY_TOL) -> Classification:
    """
    :param orbit: periodic orbit (or a bare multiplier)
    :param q_max: largest denominator tried for parabolic(p/q)
    :param tol: root-of-unity tolerance
    :return: stability classification
    """
    multiplier = orbit.multiplier if isinstance(orbit, PeriodicOrbit) else orbit
    return classify_multiplier(complex(multiplier), q_max, tol)

# endregion


def _divisors(n: int) -> List[int]:
    return [m for m in range(1, n) if n % m == 0]


def find_periodic_points(fmap: RationalMap, n: int, q_max: int = G_Q_MAX, tol: float = G_UNITY_TOL,
                         budget: int = G_ROOT_DEGREE_BUDGET, cache=None) -> List[PeriodicOrbit]:
    """
    :param fmap: rational map
    :param n: exact period
    :param q_max: largest denominator for parabolic classification
    :param tol: root-of-unity tolerance
    :param budget: root-solver degree budget
    :param cache: optional SqliteOrbitCache
    :return: cycles of exact period n, each starting at its lexicographically
        smallest point, ordered by that point
    """
    fixed = fixed_points_of_iterate(fmap, n, budget, cache=cache)
    points = fixed.points
    multiplicity = dict(zip(range(len(points)), fixed.multiplicities))

    keep = np.ones(len(points), dtype=bool)
    for m in _divisors(n):
        moved = np.asarray(fmap.iterate_point(points, m))
        keep &= ~(np.abs(moved - points) < G_PERIOD_TOL * (1 + np.abs(points)))

    candidates = np.flatnonzero(keep)
    orbits = []
    if len(candidates):
        tree = cKDTree(np.column_stack([points[candidates].real, points[candidates].imag]))
        assigned = np.zeros(len(points), dtype=bool)
        for i in candidates:
            if assigned[i]:
                continue

            cycle = [points[i]]
            multiple = multiplicity[i] > 1
            assigned[i] = True
            current = points[i]
            for _ in range(n - 1):
                current = fmap.evaluate(current)
                dist, j = tree.query([current.real, current.imag])
                j = candidates[j]
                if dist < G_MATCH_TOL * (1 + abs(current)):
                    current = points[j]
                    assigned[j] = True
                    multiple |= multiplicity[j] > 1
                else:
                    log(f'cycle point {current} of period {n} has no solver match')

                cycle.append(current)

            if multiple:
                multiplier = 1.0 + 0j
            else:
                multiplier = complex(np.prod(fmap.derivative(np.array(cycle))))

            orbits.append(PeriodicOrbit(tuple(complex(z) for z in cycle), n, multiplier,
                                        classify_multiplier(multiplier, q_max, tol)))

    if n == 1 and fixed.has_infinity:
        multiplier = fmap.derivative_at_infinity()
        orbits.append(PeriodicOrbit((INFINITY,), 1, multiplier, classify_multiplier(multiplier, q_max, tol)))

    return orbits


def omega(fmap: RationalMap, n_max: int = G_OMEGA_SCOPE, q_max: int = G_Q_MAX, tol: float = G_UNITY_TOL,
          budget: int = G_ROOT_DEGREE_BUDGET, cache=None) -> OmegaSet:
    """
    :param fmap: rational map
    :param n_max: largest period searched
    :return: all parabolic cycles of period <= n_max (empty means "not
        parabolic within scope")
    """
    found = []
    for n in range(1, n_max + 1):
        for orbit in find_periodic_points(fmap, n, q_max, tol, budget, cache):
            if orbit.classification.is_parabolic and not is_infinity(orbit.points[0]):
                found.append(orbit)

    result = OmegaSet(found, n_max)
    if not result:
        log(f'no rationally indifferent cycle of period <= {n_max}')

    return result


def check_parabolic_preconditions(fmap: RationalMap, julia_points: np.ndarray, omega_set: Optional[OmegaSet] = None,
                                  clearance: float = G_CLEARANCE, n_max: int = G_OMEGA_SCOPE) -> PreconditionReport:
    """
    :param fmap: rational map
    :param julia_points: nonempty point cloud approximating J
    :param omega_set: precomputed Omega (computed when omitted)
    :param clearance: smallest admissible distance from a critical point to J
    :return: report with the critical clearance and the Omega flag
    """
    julia_points = np.asarray(julia_points, dtype=complex)
    if len(julia_points) == 0:
        raise ValueError('empty Julia sample')

    critical = fmap.critical_points()
    critical = critical[~is_infinity(critical)]
    notes = []
    if len(critical):
        tree = cKDTree(np.column_stack([julia_points.real, julia_points.imag]))
        dist, _ = tree.query(np.column_stack([critical.real, critical.imag]))
        distance = float(np.min(dist))
    else:
        distance = float('inf')

    clearance_ok = distance >= clearance
    if not clearance_ok:
        notes.append(f'critical point within {distance:.3g} of the Julia sample')

    if omega_set is None:
        omega_set = omega(fmap, n_max)

    if not omega_set:
        notes.append('not parabolic: ' + omega_set.status)

    return PreconditionReport(distance, clearance_ok, bool(omega_set), tuple(notes))


def cycle_average(orbit: PeriodicOrbit, potential) -> float:
    """
    :return: (1/n) sum of the potential over the cycle points
    """
    values = np.asarray(potential.evaluate(np.array(orbit.points, dtype=complex)), dtype=float)
    return float(np.sum(values) / orbit.period)


def a_omega(omega_set: OmegaSet, potential) -> float:
    """
    Maximal average of the potential along a rationally indifferent cycle

    :raises NotParabolicError: Omega is empty
    """
    if not omega_set:
        raise NotParabolicError(omega_set.status)

    return max(cycle_average(orbit, potential) for orbit in omega_set.orbits)


def reduce_to_fixed(fmap: RationalMap, omega_set: OmegaSet, budget: int = 4096) -> Tuple[int, RationalMap]:
    """
    :return: (k, f^k) with k the lcm of period * q over Omega, so every point of
        Omega is fixed by f^k with multiplier one
    :raises BudgetExceededError: d^k exceeds the composition budget
    """
    k = 1
    for orbit in omega_set.orbits:
        k = int(np.lcm(k, orbit.period * max(orbit.classification.q, 1)))

    return k, fmap.iterate(k, budget)
