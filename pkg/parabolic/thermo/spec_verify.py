"""
Specification and Bowen Property Witnesses

Empirical realization of the gluing construction behind specification on
D(alpha): a transition time N_eps certified on a net of J, backward pruned
tree searches that glue orbit segments with a uniform gap, forward shadowing
checks, contraction profiles along good segments and Birkhoff-sum variation
against the Hölder-to-Bowen bound.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from ..dynamics.julia import as_xy, mesh_estimate
from ..dynamics.rational import RationalMap, BudgetExceededError, DegenerateFiberError, is_infinity, lex_order
from ..errors import ParabolicError
from ..util import mklog
from .decomposition import OrbitSegment, DecompositionParams, in_D_alpha, harvest_segments
from .potential import Potential, HolderData

__all__ = [
    'SpecificationError',
    'GluingError',
    'TransitionTime',
    'GluingResult',
    'ContractionProfile',
    'BowenVariation',
    'BowenUniformity',
    'farthest_point_net',
    'estimate_transition_time',
    'glue',
    'verify_shadowing',
    'pullback_partner',
    'contraction_profile',
    'bowen_variation',
    'bowen_uniformity',
]

G_NET_SIZE = 48
G_N_MAX = 16
G_NODE_BUDGET = 2 ** 20
G_CLOSURE_TOL = 1e-6
G_PARTNER_RADIUS = 0.5  # partner offsets are drawn inside this fraction of eps
G_BOUND_SLACK = 1e-9

log = mklog('spec')


class SpecificationError(ParabolicError):
    """
    A specification or Bowen property witness could not be produced
    """


class GluingError(SpecificationError):
    """
    No node of a gluing tree shadows its segment; `nearest_miss` is the
    smallest distance reached at the level where the search died
    """

    def __init__(self, msg: str, nearest_miss: float, link: int):
        super().__init__(msg)
        self.nearest_miss = nearest_miss
        self.link = link


class TransitionTime(NamedTuple):
    """
    Smallest N such that the depth-N preimage tree of every net point meets
    every eps-ball around a net point
    """

    N: int
    epsilon: float
    net: np.ndarray
    certificate: np.ndarray
    passed: bool
    mesh: float


class GluingResult(NamedTuple):
    y: complex
    transition_time: int
    distances: Tuple[float, ...]
    branch_codes: Tuple[str, ...]
    links: Tuple[complex, ...]

    def offsets_for(self, segments: Sequence[OrbitSegment]) -> List[int]:
        offsets, total = [], 0
        for segment in segments:
            offsets.append(total)
            total += segment.length + self.transition_time

        return offsets


class ContractionProfile(NamedTuple):
    distances: Tuple[float, ...]
    bounds: Tuple[float, ...]
    violations: Tuple[int, ...]
    r: float
    eta: float

    @property
    def passed(self) -> bool:
        return not self.violations


class BowenVariation(NamedTuple):
    sup_variation: float
    bound: float
    trials: int
    skipped: int

    @property
    def passed(self) -> bool:
        return self.sup_variation <= self.bound


class BowenUniformity(NamedTuple):
    lengths: Tuple[int, ...]
    sup_variations: Tuple[float, ...]
    V: float
    bound: float

    @property
    def bounded(self) -> bool:
        return self.V <= self.bound


# region Transition time

def farthest_point_net(points: np.ndarray, size: int = G_NET_SIZE) -> np.ndarray:
    """
    Deterministic farthest-point subset, starting from the lexicographically
    smallest point
    """
    points = np.asarray(points, dtype=complex)
    points = points[~is_infinity(points)]
    if len(points) == 0:
        raise SpecificationError('empty sample')

    chosen = [int(lex_order(points)[0])]
    gap = np.abs(points - points[chosen[0]])
    while len(chosen) < min(size, len(points)):
        nxt = int(np.argmax(gap))
        if gap[nxt] == 0:
            break

        chosen.append(nxt)
        gap = np.minimum(gap, np.abs(points - points[nxt]))

    return points[chosen]


def estimate_transition_time(fmap: RationalMap, epsilon: float, julia_points: np.ndarray,
                             n_max: int = G_N_MAX, net_size: int = G_NET_SIZE,
                             budget: int = G_NODE_BUDGET) -> TransitionTime:
    """
    :param fmap: rational map
    :param epsilon: ball radius
    :param julia_points: cloud covering J at mesh <= eps/4
    :param n_max: largest N searched
    :param net_size: number of net points
    :param budget: leaf budget per tree
    :return: the smallest certified N (at least 1), or n_max with passed=False
    """
    mesh = mesh_estimate(julia_points)
    if mesh > epsilon / 4:
        log(f'WARNING: sample mesh {mesh:.3g} exceeds eps/4 = {epsilon / 4:.3g}')

    net = farthest_point_net(julia_points, net_size)
    levels = [np.array([w], dtype=complex) for w in net]
    certificate = np.full((len(net), len(net)), np.inf)
    for N in range(1, n_max + 1):
        if fmap.degree ** N > budget:
            log(f'tree budget {budget} reached at N={N}')
            break

        for i, leaves in enumerate(levels):
            leaves = fmap.preimages_batch(leaves).reshape(-1)
            levels[i] = leaves
            dist, _ = cKDTree(as_xy(leaves)).query(as_xy(net))
            certificate[i] = dist

        if np.all(certificate < epsilon):
            return TransitionTime(N, epsilon, net, certificate.copy(), True, mesh)

    log(f'WARNING: no transition time up to {n_max} at eps={epsilon:g}')
    return TransitionTime(n_max, epsilon, net, certificate, False, mesh)

# endregion


# region Gluing

def _link_search(fmap: RationalMap, anchor: complex, targets: np.ndarray, tau: int, epsilon: float,
                 budget: int, link: int) -> Tuple[complex, float, str]:
    """
    Backward search of depth len(targets) + tau from the anchor; the last
    len(targets) levels must stay eps-close to the targets in forward order
    """
    d = fmap.degree
    n = len(targets)
    depth = n + tau
    if d ** tau > budget:
        raise BudgetExceededError(f'{d}^{tau} unconstrained nodes exceed the node budget {budget}')

    nodes = np.array([anchor], dtype=complex)
    history = [(nodes, None, None)]
    for level in range(1, depth + 1):
        children = fmap.preimages_batch(nodes).reshape(-1)
        parents = np.repeat(np.arange(len(nodes)), d)
        digits = np.tile(np.arange(d), len(nodes))
        j = depth - level
        if j < n:
            dist = np.abs(children - targets[j])
            keep = dist < epsilon
            if not np.any(keep):
                raise GluingError(
                    f'link {link}: no node within eps={epsilon:g} of segment point {j}', float(np.min(dist)), link)

            children, parents, digits = children[keep], parents[keep], digits[keep]

        if len(children) > budget:
            raise BudgetExceededError(f'{len(children)} surviving nodes exceed the node budget {budget}')

        history.append((children, parents, digits))
        nodes = children

    index = 0
    code = []
    orbit = []
    for level in range(depth, 0, -1):
        values, parents, digits = history[level]
        orbit.append(values[index])
        code.append(str(digits[index]))
        index = parents[index]

    orbit = np.array(orbit[:n], dtype=complex)
    distance = float(np.max(np.abs(orbit - targets)))
    return complex(orbit[0]), distance, ''.join(code)


def glue(fmap: RationalMap, segments: Sequence[OrbitSegment], epsilon: float, transition_time: int,
         params: Optional[DecompositionParams] = None, budget: int = G_NODE_BUDGET) -> GluingResult:
    """
    Glue orbit segments with the uniform gap tau = transition_time

    Working backwards from y_k = x_k, each link searches the preimage tree of
    the current y for a node whose first n_i forward points eps-shadow segment
    i, and whose image under f^(n_i + tau) is that y.

    :param fmap: rational map
    :param segments: segments in D(alpha)
    :param epsilon: shadowing scale
    :param transition_time: tau, normally N_eps
    :param params: when given, every segment is checked to end in E(alpha)
    :param budget: node budget per tree level
    :return: gluing point with per-segment shadowing distances
    :raises GluingError: some link has no shadowing node
    """
    if not segments:
        raise SpecificationError('nothing to glue')

    if params is not None:
        for i, segment in enumerate(segments):
            if not in_D_alpha(segment, params.omega_points, params.alpha, params.metric):
                raise SpecificationError(f'segment {i} does not end in E(alpha)')

    last = segments[-1]
    y = last.start
    links = [y]
    distances = [0.0]
    codes = ['']
    for i in range(len(segments) - 2, -1, -1):
        y, distance, code = _link_search(fmap, y, segments[i].points, transition_time, epsilon, budget, i)
        links.insert(0, y)
        distances.insert(0, distance)
        codes.insert(0, code)

    return GluingResult(links[0], transition_time, tuple(distances), tuple(codes), tuple(links))


def verify_shadowing(fmap: RationalMap, result: GluingResult, segments: Sequence[OrbitSegment],
                     epsilon: float, closure_tol: float = G_CLOSURE_TOL) -> bool:
    """
    Certify a gluing by forward iteration, link by link

    Link i starts at result.links[i] (result.y for the first link); its first
    n_i points must stay within eps of segment i and its image under
    f^(n_i + tau) must close onto the next link.

    The glued orbit is not re-run from y over the offsets sum_(j < i) (n_j + tau):
    expansion on J amplifies the rounding of y far past eps within a few
    segments, so each offset is checked from the stored link instead. Closure
    of every link onto the next chains these checks into the statement about y.

    :return: False when a link strays from its segment or fails to close
    """
    if len(result.links) != len(segments):
        return False

    starts = [result.y] + list(result.links[1:])
    for i, segment in enumerate(segments):
        orbit = fmap.orbit(np.asarray(starts[i], dtype=complex), segment.length)
        if not np.all(np.abs(orbit - segment.points) < epsilon):
            return False

        if i + 1 < len(segments):
            landing = fmap.iterate_point(starts[i], segment.length + result.transition_time)
            if not abs(landing - starts[i + 1]) < closure_tol * (1 + abs(starts[i + 1])):
                return False

    return True

# endregion


# region Contraction and Bowen property

def pullback_partner(fmap: RationalMap, points: np.ndarray, endpoint: complex) -> np.ndarray:
    """
    Pull `endpoint` back along the branches followed by `points`

    :param points: forward orbit p_0, ..., p_m
    :param endpoint: perturbation of f(p_m)
    :return: partner orbit q_0, ..., q_m with f(q_m) = endpoint and each q_j
        the preimage of q_(j+1) nearest to p_j
    """
    partner = np.empty(len(points), dtype=complex)
    current = endpoint
    for j in range(len(points) - 1, -1, -1):
        fiber = fmap.preimages(current)
        current = fiber[np.argmin(np.abs(fiber - points[j]))]
        partner[j] = current

    return partner


def _distance(metric, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if metric is None:
        return np.abs(x - y)

    return np.array([metric.local_distance(a, b) for a, b in zip(x, y)])


def contraction_profile(fmap: RationalMap, segment: OrbitSegment, epsilon: float, r: float, eta: float,
                        metric=None, partner: Optional[complex] = None, angle: float = 0.0) -> ContractionProfile:
    """
    Distances d(f^l x, f^l y) for 0 <= l <= n against r^(-eta (n - l)) eps

    :param fmap: rational map
    :param segment: good segment (x, n)
    :param epsilon: Bowen ball radius
    :param r: expansion factor of the metric
    :param eta: goodness threshold of the segment
    :param metric: MilnorMetric for local distances (Euclidean when None)
    :param partner: y in B_n(x, eps), followed forward; when omitted it is
        pulled back from f^n x plus an eps/2 offset in direction `angle`
    :return: per-l distances, bounds and violating indices
    """
    n = segment.length
    tail = complex(fmap.evaluate(segment.points[-1]))
    reference = np.append(segment.points, tail)
    if partner is None:
        scale = 0.5 * epsilon
        if metric is not None:
            scale /= float(metric.density(tail))

        endpoint = tail + scale * np.exp(1j * angle)
        orbit = np.append(pullback_partner(fmap, segment.points, endpoint), endpoint)
    else:
        orbit = fmap.orbit(np.asarray(partner, dtype=complex), n + 1)

    distances = _distance(metric, reference, orbit)
    ell = np.arange(n + 1)
    bounds = r ** (-eta * (n - ell)) * epsilon
    violations = tuple(int(i) for i in np.flatnonzero(distances > bounds * (1 + G_BOUND_SLACK)))
    return ContractionProfile(tuple(float(v) for v in distances), tuple(float(b) for b in bounds), violations, r, eta)


def bowen_bound(holder: HolderData, epsilon: float, r: float, eta: float) -> float:
    """
    :return: K eps^a / (1 - r^(-eta a))
    """
    return holder.K * epsilon ** holder.exponent / (1 - r ** (-eta * holder.exponent))


def bowen_variation(fmap: RationalMap, potential: Potential, segments: Sequence[OrbitSegment], epsilon: float,
                    trials: int, r: float, eta: float, holder: Optional[HolderData] = None,
                    seed: int = 0) -> BowenVariation:
    """
    Maximal |S_n phi(x) - S_n phi(y)| over pulled-back partners y in B_n(x, eps)

    Partners come from perturbing the last segment point by at most eps/2 and
    pulling back along the segment's own branches. Partners that leave the
    Bowen ball, or hit a degenerate fiber, are skipped and counted.

    :raises SpecificationError: no Hölder data declared
    """
    holder = holder or potential.holder
    if holder is None:
        raise SpecificationError(f'potential {potential} has no declared Hölder data')

    rng = np.random.default_rng(seed)
    sup = 0.0
    skipped = 0
    for segment in segments:
        base = float(np.sum(potential.evaluate(segment.points)))
        for _ in range(trials):
            offset = G_PARTNER_RADIUS * epsilon * rng.random() * np.exp(2j * np.pi * rng.random())
            try:
                partner = np.append(pullback_partner(fmap, segment.points[:-1], segment.end + offset),
                                    segment.end + offset)
            except DegenerateFiberError:
                skipped += 1
                continue

            if not np.all(np.abs(partner - segment.points) < epsilon):
                skipped += 1
                continue

            sup = max(sup, abs(base - float(np.sum(potential.evaluate(partner)))))

    return BowenVariation(sup, bowen_bound(holder, epsilon, r, eta), trials * len(segments), skipped)


def bowen_uniformity(fmap: RationalMap, potential: Potential, sample, params: DecompositionParams,
                     epsilon: float, r: float, lengths: Sequence[int] = (5, 10, 20, 40), count: int = 20,
                     trials: int = 10, holder: Optional[HolderData] = None, seed: int = 0) -> BowenUniformity:
    """
    Sup variation per segment length; V is their maximum
    """
    sups = []
    bound = float('nan')
    for n in lengths:
        segments = harvest_segments(sample, params, n, count, stride=max(1, n // 2))
        if not segments:
            log(f'no good segment of length {n}')
            sups.append(0.0)
            continue

        result = bowen_variation(fmap, potential, segments, epsilon, trials, r, params.eta, holder, seed)
        sups.append(result.sup_variation)
        bound = result.bound

    return BowenUniformity(tuple(lengths), tuple(sups), float(max(sups)), bound)

# endregion
