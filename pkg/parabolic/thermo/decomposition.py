"""
Orbit Decompositions

The one-sided lambda-decomposition of orbit segments into a good prefix
(every suffix average of lambda at least eta) and a bad suffix (average below
eta), with lambda the indicator of E(alpha) = J minus the closed ball
B(Omega, 2 alpha), and the collection D(alpha) of segments ending in E(alpha).
"""

from __future__ import annotations

from typing import Iterator, List, NamedTuple, Optional, Sequence

import numpy as np

from ..dynamics.model import JuliaSample
from ..dynamics.rational import RationalMap
from .metric import MilnorMetric

__all__ = [
    'OrbitSegment',
    'DecompositionParams',
    'Decomposition',
    'distance_mode',
    'lambda_indicator',
    'lambda_pattern',
    'good_pattern',
    'bad_pattern',
    'split_pattern',
    'split_pattern_exhaustive',
    'segment_pattern',
    'in_good',
    'in_bad',
    'decompose',
    'in_D_alpha',
    'backward_windows',
    'harvest_segments',
    'random_segments',
]

G_STEP_TOL = 1e-10
G_SUM_TOL = 1e-12


class OrbitSegment(NamedTuple):
    """
    Orbit segment (x, n) with its cached points x, f(x), ..., f^(n-1)(x)
    """

    start: complex
    length: int
    points: np.ndarray

    @classmethod
    def forward(cls, fmap: RationalMap, z: complex, n: int) -> OrbitSegment:
        if n < 1:
            raise ValueError(f'segment length must be >= 1 (got {n})')

        return cls(complex(z), n, fmap.orbit(np.asarray(z, dtype=complex), n))

    @classmethod
    def from_points(cls, points: Sequence[complex]) -> OrbitSegment:
        """
        Segment from a cached orbit, e.g. a reversed window of a backward orbit
        """
        points = np.asarray(points, dtype=complex)
        if len(points) < 1:
            raise ValueError('empty segment')

        return cls(complex(points[0]), len(points), points)

    @property
    def end(self) -> complex:
        return complex(self.points[-1])

    def step_defect(self, fmap: RationalMap) -> float:
        """
        :return: max |f(p_k) - p_(k+1)| over the cached points
        """
        if self.length < 2:
            return 0.0

        return float(np.max(np.abs(np.asarray(fmap.evaluate(self.points[:-1])) - self.points[1:])))

    def is_consistent(self, fmap: RationalMap, tol: float = G_STEP_TOL) -> bool:
        return self.step_defect(fmap) < tol * (1 + float(np.max(np.abs(self.points))))


class DecompositionParams(NamedTuple):
    """
    alpha, eta and Omega of a decomposition; distances to Omega are measured
    in `metric` when one is given and in the Euclidean plane otherwise
    """

    alpha: float
    eta: float
    omega_points: np.ndarray
    metric: Optional[MilnorMetric] = None

    @property
    def distance(self) -> str:
        return distance_mode(self.metric)

    def validate(self):
        assert self.alpha > 0, f'alpha must be positive ({self.alpha})'
        assert 0 < self.eta <= 1, f'eta must lie in (0, 1] ({self.eta})'


class Decomposition(NamedTuple):
    g: int
    s: int
    pattern: np.ndarray

    def __str__(self) -> str:
        return f'({self.g}, {self.s}) ' + ''.join(str(int(v)) for v in self.pattern)


def distance_mode(metric: Optional[MilnorMetric]) -> str:
    return 'euclidean' if metric is None else 'milnor'


def lambda_pattern(points, omega_points, alpha: float, metric: Optional[MilnorMetric] = None) -> np.ndarray:
    """
    :param metric: when given, dist(z, Omega) is the psi-length of the straight
        segment from z to its nearest point of Omega
    :return: lambda at every point: 1 iff dist(z, Omega) > 2 alpha
    """
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    omega_points = np.atleast_1d(np.asarray(omega_points, dtype=complex))
    if len(omega_points) == 0:
        return np.ones(len(points), dtype=int)

    gaps = np.abs(points[:, None] - omega_points[None, :])
    if metric is None:
        dist = np.min(gaps, axis=1)
    else:
        dist = metric.path_length(points, omega_points[np.argmin(gaps, axis=1)])

    return (dist > 2 * alpha).astype(int)


def lambda_indicator(z: complex, omega_points, alpha: float, metric: Optional[MilnorMetric] = None) -> int:
    return int(lambda_pattern(np.array([z]), omega_points, alpha, metric)[0])


# region Pattern level

def _suffix_sums(pattern: np.ndarray) -> np.ndarray:
    # entry k - 1 holds the sum of the last k values
    return np.cumsum(np.asarray(pattern, dtype=float)[::-1])


def good_pattern(pattern: Sequence[int], eta: float) -> bool:
    """
    :return: True iff (1/k) sum of the last k values >= eta for 1 <= k <= n
    """
    sums = _suffix_sums(pattern)
    k = np.arange(1, len(sums) + 1)
    return bool(np.all(sums >= eta * k - G_SUM_TOL))


def bad_pattern(pattern: Sequence[int], eta: float) -> bool:
    """
    :return: True iff the full average is strictly below eta
    """
    n = len(pattern)
    return bool(np.sum(pattern) < eta * n - G_SUM_TOL)


def split_pattern(pattern: Sequence[int], eta: float) -> Decomposition:
    """
    :return: (g, s) with s the largest suffix length whose average is below eta
        (0 when there is none); the prefix is then automatically good
    """
    pattern = np.asarray(pattern, dtype=int)
    sums = _suffix_sums(pattern)
    k = np.arange(1, len(sums) + 1)
    bad = np.flatnonzero(sums < eta * k - G_SUM_TOL)
    s = int(bad[-1] + 1) if len(bad) else 0
    return Decomposition(len(pattern) - s, s, pattern)


def split_pattern_exhaustive(pattern: Sequence[int], eta: float) -> Decomposition:
    """
    Reference scan over all n + 1 split points, largest suffix first
    """
    pattern = np.asarray(pattern, dtype=int)
    n = len(pattern)
    for s in range(n, -1, -1):
        suffix_ok = s == 0 or bad_pattern(pattern[n - s:], eta)
        prefix_ok = s == n or good_pattern(pattern[:n - s], eta)
        if suffix_ok and prefix_ok:
            return Decomposition(n - s, s, pattern)

    raise AssertionError(f'no valid split for pattern {pattern.tolist()}')

# endregion


def segment_pattern(segment: OrbitSegment, params: DecompositionParams) -> np.ndarray:
    return lambda_pattern(segment.points, params.omega_points, params.alpha, params.metric)


def in_good(segment: OrbitSegment, params: DecompositionParams) -> bool:
    return good_pattern(segment_pattern(segment, params), params.eta)


def in_bad(segment: OrbitSegment, params: DecompositionParams) -> bool:
    return bad_pattern(segment_pattern(segment, params), params.eta)


def decompose(segment: OrbitSegment, params: DecompositionParams) -> Decomposition:
    """
    :return: the split (g, s), g + s = n, of the segment
    """
    return split_pattern(segment_pattern(segment, params), params.eta)


def in_D_alpha(segment: OrbitSegment, omega_points, alpha: float, metric: Optional[MilnorMetric] = None) -> bool:
    """
    :return: True iff the last point of the segment lies in E(alpha)
    """
    return lambda_indicator(segment.end, omega_points, alpha, metric) == 1


def backward_windows(sample: JuliaSample, length: int, stride: int = 1) -> Iterator[OrbitSegment]:
    """
    Forward segments read off the backward orbits of an inverse-iteration
    sample, walker by walker, sliding by `stride`
    """
    if sample.orbits is None:
        raise ValueError(f'{sample.method} samples carry no orbits')

    walkers, steps = sample.orbits.shape
    for w in range(walkers):
        row = sample.orbits[w]
        for j in range(0, steps - length + 1, stride):
            yield OrbitSegment.from_points(row[j:j + length][::-1])


def harvest_segments(sample: JuliaSample, params: DecompositionParams, length: int, count: int,
                     stride: int = 1, require_end_in_e: bool = False) -> List[OrbitSegment]:
    """
    :return: up to `count` segments of G(eta), in deterministic window order
    """
    found = []
    for segment in backward_windows(sample, length, stride):
        if not in_good(segment, params):
            continue

        if require_end_in_e and not in_D_alpha(segment, params.omega_points, params.alpha, params.metric):
            continue

        found.append(segment)
        if len(found) >= count:
            break

    return found


def random_segments(sample: JuliaSample, lengths: Sequence[int], count: int, seed: int = 0,
                    params: Optional[DecompositionParams] = None) -> List[OrbitSegment]:
    """
    :param sample: inverse-iteration sample with orbits
    :param lengths: admissible lengths, drawn uniformly
    :param count: number of segments
    :param seed: seed of the window choices
    :param params: when given, only segments ending in E(alpha) are kept
    :return: random windows of the sample's backward orbits
    """
    if sample.orbits is None:
        raise ValueError(f'{sample.method} samples carry no orbits')

    rng = np.random.default_rng(seed)
    walkers, steps = sample.orbits.shape
    lengths = [n for n in lengths if n <= steps]
    if not lengths:
        raise ValueError(f'no admissible length fits the sample orbits ({steps} steps)')

    found = []
    attempts = 0
    while len(found) < count and attempts < 1000 * count:
        attempts += 1
        n = int(lengths[rng.integers(len(lengths))])
        w = int(rng.integers(walkers))
        j = int(rng.integers(steps - n + 1))
        segment = OrbitSegment.from_points(sample.orbits[w, j:j + n][::-1])
        if params is not None and not in_D_alpha(segment, params.omega_points, params.alpha, params.metric):
            continue

        found.append(segment)

    return found
