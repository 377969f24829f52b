"""
Julia Set Sampling

Point-cloud approximations of J(f): random backward orbits (all rational
maps), escape-time boundary extraction (polynomials only), neighbourhood masks
around Omega, mesh and invariance diagnostics and box-counting dimension.
"""

from typing import Optional, Sequence

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from ..errors import ParabolicError
from ..util import mklog
from .model import JuliaSample, BoxDimension, OmegaSet
from .rational import RationalMap, is_infinity

__all__ = [
    'JuliaError',
    'sample_inverse_iteration',
    'sample_escape_boundary',
    'thin_near',
    'in_julia_proxy',
    'mesh_estimate',
    'invariance_defect',
    'box_counting_dimension',
    'ball_mask',
    'as_xy',
]

G_BURN_IN = 100
G_PERTURBATION = 1e-9
G_PETAL_RADIUS = 1e-4
G_WINDOW = 1e6
G_N_CHECK = 200
G_PRECISION_HORIZON = 1e12
G_MIN_BOX_POINTS = 10_000

log = mklog('julia')


class JuliaError(ParabolicError):
    """
    Sampling or dimension estimation failed
    """


def as_xy(points: np.ndarray) -> np.ndarray:
    """
    :return: (N, 2) real array of (re, im) rows
    """
    points = np.asarray(points, dtype=complex).reshape(-1)
    return np.column_stack([points.real, points.imag])


def _points_of(sample) -> np.ndarray:
    if isinstance(sample, JuliaSample):
        return np.asarray(sample.points, dtype=complex)

    return np.asarray(sample, dtype=complex).reshape(-1)


def sample_inverse_iteration(fmap: RationalMap, z0: complex, count: int, burn_in: int = G_BURN_IN,
                             seed: int = 0, walkers: int = 1) -> JuliaSample:
    """
    Random backward orbits with a uniformly random branch at each step

    All walkers start at z0 and step in lockstep; each records its current point
    before stepping, once past burn-in. Points are merged walker by walker.

    :param fmap: rational map
    :param z0: start point (not exceptional)
    :param count: number of points (>= 1)
    :param burn_in: discarded leading steps per walker
    :param seed: seed of the branch choices
    :param walkers: number of independent backward orbits
    :return: the sample, deterministic under fixed arguments
    :raises JuliaError: z0 is exceptional
    """
    if count < 1:
        raise JuliaError(f'sample count must be >= 1 (got {count})')

    fiber, degenerate = fmap.solve_fibers(np.array([z0], dtype=complex))
    if not degenerate[0] and np.all(np.abs(fiber[0] - z0) < 1e-12 * (1 + abs(z0))):
        raise JuliaError(f'{z0} is exceptional (its only preimage is itself)')

    rng = np.random.default_rng(seed)
    steps = -(-count // walkers)
    current = np.full(walkers, z0, dtype=complex)
    orbits = np.empty((walkers, steps), dtype=complex)
    perturbations = 0
    rows = np.arange(walkers)

    for step in range(burn_in + steps):
        if step >= burn_in:
            orbits[:, step - burn_in] = current

        roots, degenerate = fmap.solve_fibers(current)
        while np.any(degenerate):
            if np.any(is_infinity(current[degenerate])):
                raise JuliaError('backward orbit reached infinity with a degenerate fiber')

            perturbations += int(np.sum(degenerate))
            current = np.where(degenerate, current + G_PERTURBATION, current)
            roots, degenerate = fmap.solve_fibers(current)

        branches = rng.integers(fmap.degree, size=walkers)
        current = roots[rows, branches]

    if perturbations:
        log(f'{perturbations} degenerate fibers re-branched after a {G_PERTURBATION} perturbation')

    points = orbits.reshape(-1)[:count]
    return JuliaSample(points, 'inverse-iteration', seed, count, orbits, perturbations)


def sample_escape_boundary(fmap: RationalMap, resolution: int = 512, max_iter: int = G_N_CHECK) -> JuliaSample:
    """
    Boundary of the filled Julia set on a square grid, for polynomial maps

    :param fmap: polynomial map
    :param resolution: grid cells per side
    :param max_iter: escape iterations
    :return: centers of non-escaping cells with an escaping neighbour
    :raises JuliaError: the map is not a polynomial
    """
    if not fmap.is_polynomial:
        raise JuliaError('escape-time boundary extraction needs a polynomial map')

    p = fmap.numerator * fmap.denominator[0] ** -1
    radius = 1.0 + float(np.max(np.abs(p[:-1] / p[-1])))
    escape = 2.0 * radius + 2.0
    axis = np.linspace(-radius, radius, resolution)
    grid = axis[None, :] + 1j * axis[:, None]

    z = grid.copy()
    escaped = np.zeros(grid.shape, dtype=bool)
    with np.errstate(all='ignore'):
        for _ in range(max_iter):
            z = np.where(escaped, z, np.asarray(fmap.evaluate(z.reshape(-1))).reshape(grid.shape))
            escaped |= ~np.isfinite(z) | (np.abs(z) > escape)

    filled = ~escaped
    boundary = np.zeros_like(filled)
    boundary[1:, :] |= filled[1:, :] & escaped[:-1, :]
    boundary[:-1, :] |= filled[:-1, :] & escaped[1:, :]
    boundary[:, 1:] |= filled[:, 1:] & escaped[:, :-1]
    boundary[:, :-1] |= filled[:, :-1] & escaped[:, 1:]

    points = grid[boundary]
    return JuliaSample(points, 'escape-boundary', 0, len(points))


def thin_near(sample: JuliaSample, centers: np.ndarray, radius: float = G_PETAL_RADIUS) -> JuliaSample:
    """
    Remove sample points lingering within `radius` of the given centers (petal thinning)
    """
    mask = ball_mask(sample.points, centers, radius)
    return sample._replace(points=sample.points[~mask], count=int(np.sum(~mask)))


def in_julia_proxy(fmap: RationalMap, z: np.ndarray, attracting: Sequence[complex] = (),
                   parabolic: Sequence[complex] = (), window: float = G_WINDOW, n_check: int = G_N_CHECK,
                   marker_radius: float = 1e-3, horizon: float = G_PRECISION_HORIZON) -> np.ndarray:
    """
    Necessary condition for membership in J

    A point fails when its forward orbit leaves |z| <= window, falls within
    marker_radius of an attracting cycle point, or ends closing in on a
    parabolic point. Each orbit is followed for n_check steps or until
    |(f^k)'| passes `horizon`, beyond which double precision orbits carry no
    information.

    :return: boolean array, True where the proxy holds
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex)).copy()
    alive = np.ones(len(z), dtype=bool)
    active = np.ones(len(z), dtype=bool)
    growth = np.zeros(len(z))
    attracting = np.asarray(attracting, dtype=complex)
    parabolic = np.asarray(parabolic, dtype=complex)
    last_gap = np.full(len(z), np.inf)
    closing = np.zeros(len(z), dtype=int)

    for _ in range(n_check):
        idx = np.flatnonzero(active & alive)
        if len(idx) == 0:
            break

        current = z[idx]
        outside = is_infinity(current) | (np.abs(current) > window)
        alive[idx[outside]] = False
        idx, current = idx[~outside], current[~outside]

        if len(attracting):
            near = np.min(np.abs(current[:, None] - attracting[None, :]), axis=1) < marker_radius
            alive[idx[near]] = False
            idx, current = idx[~near], current[~near]

        if len(parabolic):
            gap = np.min(np.abs(current[:, None] - parabolic[None, :]), axis=1)
            closing[idx] = np.where(gap < last_gap[idx], closing[idx] + 1, 0)
            last_gap[idx] = gap

        with np.errstate(all='ignore'):
            growth[idx] += np.log(np.abs(fmap.derivative(current)) + 1e-300)

        active[idx[growth[idx] > np.log(horizon)]] = False
        z[idx] = fmap.evaluate(current)

    if len(parabolic):
        alive &= ~((closing >= 20) & (last_gap < 0.1))

    return alive


def mesh_estimate(sample, quantile: float = 0.99) -> float:
    """
    :param sample: JuliaSample or point array
    :param quantile: quantile of the nearest-neighbour distances (1.0 is the maximum spacing)
    :return: nearest-neighbour spacing of the cloud
    """
    xy = as_xy(_points_of(sample))
    if len(xy) < 2:
        return float('inf')

    dist, _ = cKDTree(xy).query(xy, k=2)
    return float(np.quantile(dist[:, 1], quantile))


def invariance_defect(fmap: RationalMap, sample, window: Optional[float] = None) -> float:
    """
    Hausdorff distance between the forward image of the cloud and the cloud,
    both trimmed to the cloud's bounding radius (or `window`)
    """
    points = _points_of(sample)
    points = points[~is_infinity(points)]
    window = window if window is not None else float(np.max(np.abs(points)))
    images = np.asarray(fmap.evaluate(points))
    images = images[~is_infinity(images) & (np.abs(images) <= window)]
    if len(images) == 0:
        return float('inf')

    to_cloud, _ = cKDTree(as_xy(points)).query(as_xy(images))
    to_images, _ = cKDTree(as_xy(images)).query(as_xy(points))
    return float(max(np.max(to_cloud), np.max(to_images)))


def box_counting_dimension(sample, scales: Optional[Sequence[float]] = None,
                           min_points: int = G_MIN_BOX_POINTS) -> BoxDimension:
    """
    Least-squares slope of log N(delta) against log(1/delta)

    :param sample: JuliaSample or point array (>= min_points points)
    :param scales: box sizes; defaults to diam * 2^-i for i = 3..9
    :return: dimension with fit diagnostics; a degenerate fit reports dimension 0
    :raises JuliaError: too few points, or scales not spanning a decade
    """
    points = _points_of(sample)
    points = points[~is_infinity(points)]
    if len(points) < min_points:
        raise JuliaError(f'box counting needs >= {min_points} points (got {len(points)})')

    xy = as_xy(points)
    lower = xy.min(axis=0)
    diam = float(np.max(xy.max(axis=0) - lower))
    if scales is None:
        if diam == 0:
            return BoxDimension(0.0, 0.0, 0.0, 0.0, (), (), True)

        scales = [diam * 2.0 ** -i for i in range(3, 10)]

    scales = np.asarray(sorted(scales, reverse=True), dtype=float)
    if len(scales) < 4 or scales[0] / scales[-1] < 10:
        raise JuliaError('box counting needs >= 4 scales spanning a decade')

    counts = []
    for delta in scales:
        cells = np.floor((xy - lower) / delta).astype(np.int64)
        counts.append(len(np.unique(cells, axis=0)))

    counts = np.asarray(counts)
    if np.all(counts == counts[0]):
        return BoxDimension(0.0, float(np.log(counts[0])), 0.0, 0.0, tuple(scales), tuple(int(c) for c in counts), True)

    fit = stats.linregress(np.log(1.0 / scales), np.log(counts))
    return BoxDimension(float(fit.slope), float(fit.intercept), float(fit.rvalue), float(fit.stderr),
                        tuple(float(s) for s in scales), tuple(int(c) for c in counts), False)


def ball_mask(points, centers, radius: float, metric: str = 'euclidean', milnor=None) -> np.ndarray:
    """
    Membership in the union of open balls B(w, radius)

    :param points: point array
    :param centers: OmegaSet or point array
    :param radius: ball radius (> 0); strict inequality
    :param metric: 'euclidean' or 'milnor' (uses milnor.local_distance)
    :param milnor: MilnorMetric, required for the milnor variant
    :return: boolean array
    """
    if radius <= 0:
        raise ValueError(f'radius must be positive (got {radius})')

    points = np.atleast_1d(np.asarray(points, dtype=complex))
    centers = centers.points if isinstance(centers, OmegaSet) else np.atleast_1d(np.asarray(centers, dtype=complex))
    if len(centers) == 0 or len(points) == 0:
        return np.zeros(len(points), dtype=bool)

    dist, nearest = cKDTree(as_xy(centers)).query(as_xy(points))
    if metric == 'euclidean':
        return dist < radius

    if metric != 'milnor' or milnor is None:
        raise ValueError(f'unsupported ball metric {metric!r}')

    inside = np.zeros(len(points), dtype=bool)
    local = dist <= milnor.alpha
    for i in np.flatnonzero(local):
        inside[i] = milnor.local_distance(points[i], centers[nearest[i]]) < radius

    return inside
