"""
Dynamics Model

Contains the domain types shared by the rational map, periodic point and
Julia set modules.
"""

from typing import NamedTuple, List, Tuple, Optional

import numpy as np

__all__ = [
    'PreimageTree',
    'Classification',
    'PeriodicOrbit',
    'OmegaSet',
    'FixedPointSet',
    'PreconditionReport',
    'JuliaSample',
    'BoxDimension',
]


class PreimageTree(NamedTuple):
    """
    Full fiber tree of f^n anchored at `root`

    Level k holds d^k nodes; node i of level k maps onto node i // d of level
    k - 1, and the base-d digits of i are its branch code.
    """

    root: complex
    depth: int
    degree: int
    levels: List[np.ndarray]

    @property
    def leaves(self) -> np.ndarray:
        return self.levels[self.depth]

    def parent_index(self, level: int, i: int) -> int:
        assert 1 <= level <= self.depth, f'no parent above level {level}'
        return i // self.degree

    def branch_code(self, i: int, level: Optional[int] = None) -> str:
        """
        :param i: node index within the level
        :param level: tree level (defaults to the leaves)
        :return: digit string over {0..d-1}, most significant digit first
        """
        level = self.depth if level is None else level
        digits = []
        for _ in range(level):
            i, digit = divmod(i, self.degree)
            digits.append(str(digit))

        return ''.join(reversed(digits))

    def orbits(self, level: Optional[int] = None) -> np.ndarray:
        """
        :param level: tree level whose nodes start the orbits (defaults to the leaves)
        :return: (d^level, level) array; column k holds f^k of each node
        """
        level = self.depth if level is None else level
        index = np.arange(self.degree ** level)
        columns = []
        for k in range(level):
            columns.append(self.levels[level - k][index // self.degree ** k])

        return np.stack(columns, axis=1)


class Classification(NamedTuple):
    """
    Stability class of a cycle; p/q only meaningful for 'parabolic'
    """

    kind: str
    p: int = 0
    q: int = 0

    def __str__(self) -> str:
        if self.kind == 'parabolic':
            return f'parabolic({self.p}/{self.q})'

        return self.kind

    @property
    def is_parabolic(self) -> bool:
        return self.kind == 'parabolic'


class PeriodicOrbit(NamedTuple):
    """
    A cycle of exact period n, rotated so that points[0] is its
    lexicographically smallest point
    """

    points: Tuple[complex, ...]
    period: int
    multiplier: complex
    classification: Classification

    def __len__(self) -> int:
        return self.period

    def __str__(self) -> str:
        return f'period {self.period} cycle at {self.points[0]:.6g} ({self.classification})'


class OmegaSet(NamedTuple):
    """
    The rationally indifferent cycles found among periods 1..scope
    """

    orbits: List[PeriodicOrbit]
    scope: int

    def __bool__(self) -> bool:
        return bool(self.orbits)

    @property
    def points(self) -> np.ndarray:
        return np.array([z for orbit in self.orbits for z in orbit.points], dtype=complex)

    @property
    def status(self) -> str:
        return 'parabolic' if self.orbits else f'not parabolic within scope {self.scope}'


class FixedPointSet(NamedTuple):
    """
    Distinct finite solutions of f^n(z) = z with their root multiplicities and
    multipliers (f^n)'(z); `dropped` counts solver roots that failed the residual
    check
    """

    n: int
    points: np.ndarray
    multiplicities: np.ndarray
    multipliers: np.ndarray
    has_infinity: bool
    dropped: int = 0

    def __len__(self) -> int:
        return len(self.points)


class PreconditionReport(NamedTuple):
    critical_clearance: float
    clearance_ok: bool
    omega_nonempty: bool
    notes: Tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.clearance_ok and self.omega_nonempty


class JuliaSample(NamedTuple):
    """
    Point-cloud approximation of J(f)

    For inverse iteration `orbits` keeps every walker's backward orbit: row w
    satisfies f(orbits[w, k + 1]) = orbits[w, k].
    """

    points: np.ndarray
    method: str
    seed: int
    count: int
    orbits: Optional[np.ndarray] = None
    perturbations: int = 0

    def __len__(self) -> int:
        return len(self.points)


class BoxDimension(NamedTuple):
    dimension: float
    intercept: float
    r_value: float
    stderr: float
    scales: Tuple[float, ...]
    counts: Tuple[int, ...]
    degenerate: bool
