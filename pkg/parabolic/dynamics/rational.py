"""
Rational Maps of the Riemann Sphere

Exact-degree rational map arithmetic: evaluation in both charts of the sphere,
derivatives, critical points, preimage fibers and preimage trees. Polynomial
roots come from companion matrix eigenvalues followed by Newton polishing.
"""

from __future__ import annotations

import hashlib
from typing import Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from ..errors import ParabolicError
from .model import PreimageTree

__all__ = [
    'INFINITY',
    'is_infinity',
    'RationalMap',
    'RationalMapError',
    'RootSolverError',
    'DegenerateFiberError',
    'BudgetExceededError',
    'poly_roots',
    'lex_order',
]

INFINITY = complex(np.inf, 0.0)

G_FIBER_TOL = 1e-9
G_POLISH_TOL = 1e-12
G_COPRIME_TOL = 1e-8
G_DEGENERATE_TOL = 1e-12
G_NODE_BUDGET = 2 ** 20
G_DEGREE_BUDGET = 4096
G_CHART_RADIUS = 1.0  # |z| above this is evaluated in the chart w = 1/z
G_NEWTON_STEPS = 6

Points = Union[complex, np.ndarray]


class RationalMapError(ParabolicError):
    """
    Invalid map data, or a derivative requested at a pole
    """


class RootSolverError(ParabolicError):
    """
    A polynomial root solve did not converge to the required residual
    """


class DegenerateFiberError(ParabolicError):
    """
    The fiber equation P(z) - wQ(z) = 0 dropped degree, so one preimage sits
    at infinity; the caller decides how to perturb w
    """

    def __init__(self, msg: str, w: complex):
        super().__init__(msg)
        self.w = w


class BudgetExceededError(ParabolicError):
    """
    A node or degree budget would be exceeded
    """


def is_infinity(z: Points) -> Union[bool, np.ndarray]:
    """
    :param z: point(s) on the sphere
    :return: True where z is the point at infinity (any non-finite value)
    """
    return ~np.isfinite(z)


def lex_order(points: np.ndarray) -> np.ndarray:
    """
    :param points: 1-d array of complex points, infinity allowed
    :return: indices sorting the points by (re, im) with infinity last
    """
    points = np.asarray(points, dtype=complex)
    inf = is_infinity(points)
    re = np.where(inf, np.inf, np.round(points.real, 12))
    im = np.where(inf, np.inf, points.imag)
    return np.lexsort((im, re))


def _trim(coeffs: np.ndarray, rel_tol: float = 0.0) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    scale = np.max(np.abs(coeffs)) if len(coeffs) else 0.0
    end = len(coeffs)
    while end > 0 and abs(coeffs[end - 1]) <= rel_tol * scale:
        end -= 1

    return coeffs[:end]


def _degree(coeffs: np.ndarray) -> int:
    return len(coeffs) - 1


def poly_roots(coeffs: Sequence[complex], tol: float = G_POLISH_TOL) -> np.ndarray:
    """
    Roots of a polynomial, polished by Newton iteration

    :param coeffs: ascending coefficients
    :param tol: relative polish target for each root
    :return: the roots with multiplicity
    :raises RootSolverError: a polished root is not finite
    """
    coeffs = _trim(coeffs, 1e-14)
    if _degree(coeffs) < 1:
        return np.empty(0, dtype=complex)

    roots = np.roots(coeffs[::-1]).astype(complex)
    deriv = npoly.polyder(coeffs)
    for _ in range(50):
        value = npoly.polyval(roots, coeffs)
        slope = npoly.polyval(roots, deriv)
        safe = np.abs(slope) > 0
        step = np.zeros_like(roots)
        step[safe] = value[safe] / slope[safe]
        # a Newton step that increases the residual is rejected
        trial = roots - step
        better = np.abs(npoly.polyval(trial, coeffs)) <= np.abs(value)
        roots = np.where(better, trial, roots)
        if np.all(~better | (np.abs(step) <= tol * (1.0 + np.abs(roots)))):
            break

    if not np.all(np.isfinite(roots)):
        raise RootSolverError(f'root solve failed for polynomial {coeffs.tolist()}')

    return roots


class RationalMap:
    """
    Rational map f = P/Q of degree d = max(deg P, deg Q) >= 2

    Coefficients are stored in ascending degree and normalized so that the
    larger-degree polynomial is monic (the numerator when both degrees agree).
    Instances are immutable.
    """

    def __init__(self, numerator: Sequence[complex], denominator: Sequence[complex], validate: bool = True):
        p = _trim(numerator)
        q = _trim(denominator)
        if len(q) == 0:
            raise RationalMapError('denominator is the zero polynomial')

        if len(p) == 0:
            raise RationalMapError('numerator is the zero polynomial')

        degree = max(_degree(p), _degree(q))
        if degree < 2:
            raise RationalMapError(f'degree {degree} map (degree >= 2 required)')

        lead = p[-1] if _degree(p) >= _degree(q) else q[-1]
        p = p / lead
        q = q / lead

        self.__p = p
        self.__q = q
        self.__degree = degree
        self.__p_pad = np.concatenate([p, np.zeros(degree + 1 - len(p), dtype=complex)])
        self.__q_pad = np.concatenate([q, np.zeros(degree + 1 - len(q), dtype=complex)])
        self.__dp = npoly.polyder(p) if len(p) > 1 else np.zeros(1, dtype=complex)
        self.__dq = npoly.polyder(q) if len(q) > 1 else np.zeros(1, dtype=complex)

        if validate:
            self.__check_coprime()

    @property
    def numerator(self) -> np.ndarray:
        return self.__p.copy()

    @property
    def denominator(self) -> np.ndarray:
        return self.__q.copy()

    @property
    def degree(self) -> int:
        return self.__degree

    @property
    def is_polynomial(self) -> bool:
        return len(self.__q) == 1

    def __str__(self) -> str:
        return f'RationalMap(degree={self.degree}, P={self.__p.tolist()}, Q={self.__q.tolist()})'

    def __repr__(self) -> str:
        return str(self)

    def as_dict(self) -> dict:
        return {
            'numerator': [[c.real, c.imag] for c in self.__p],
            'denominator': [[c.real, c.imag] for c in self.__q],
        }

    def fingerprint(self) -> str:
        """
        :return: SHA-256 hex digest of the normalized coefficients
        """
        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.__p).tobytes())
        digest.update(b'/')
        digest.update(np.ascontiguousarray(self.__q).tobytes())
        return digest.hexdigest()

    # region Evaluation

    def evaluate(self, z: Points) -> Points:
        """
        :param z: point(s) on the sphere
        :return: f(z); values near infinity are computed in the chart w = 1/z
        """
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)

        far = is_infinity(z) | (np.abs(z) > G_CHART_RADIUS)
        out = np.empty_like(z)
        out[~far] = self.__chart_z(z[~far])
        out[far] = self.__chart_w(z[far])
        return complex(out[0]) if scalar else out

    __call__ = evaluate

    def evaluate_chart(self, z: Points, chart: str) -> Points:
        """
        Evaluate in an explicitly chosen chart of the source

        :param z: finite nonzero point(s)
        :param chart: 'z' for P(z)/Q(z) or 'w' for P*(1/z)/Q*(1/z)
        :return: f(z)
        """
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        if chart == 'z':
            out = self.__chart_z(z)
        elif chart == 'w':
            out = self.__chart_w(z)
        else:
            raise ValueError(f'unknown chart {chart!r}')

        return complex(out[0]) if scalar else out

    def orbit(self, z: Points, n: int) -> np.ndarray:
        """
        :param z: start point(s)
        :param n: orbit length
        :return: array of shape z.shape + (n,) holding z, f(z), ..., f^(n-1)(z)
        """
        z = np.asarray(z, dtype=complex)
        points = np.empty(z.shape + (n,), dtype=complex)
        current = z
        for k in range(n):
            points[..., k] = current
            current = np.asarray(self.evaluate(current), dtype=complex)

        return points

    def iterate_point(self, z: Points, n: int) -> Points:
        """
        :return: f^n(z)
        """
        for _ in range(n):
            z = self.evaluate(z)

        return z

    def __chart_z(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(all='ignore'):
            return self.__quotient(npoly.polyval(z, self.__p), npoly.polyval(z, self.__q))

    def __chart_w(self, z: np.ndarray) -> np.ndarray:
        with np.errstate(all='ignore'):
            w = np.where(is_infinity(z), 0.0, 1.0 / np.where(is_infinity(z), 1.0, z))
            return self.__quotient(npoly.polyval(w, self.__p_pad[::-1]), npoly.polyval(w, self.__q_pad[::-1]))

    @staticmethod
    def __quotient(num: np.ndarray, den: np.ndarray) -> np.ndarray:
        with np.errstate(all='ignore'):
            out = np.where(den == 0, INFINITY, num / np.where(den == 0, 1.0, den))

        return np.where(is_infinity(out), INFINITY, out)

    # endregion

    # region Derivatives

    def derivative(self, z: Points) -> Points:
        """
        :param z: finite point(s)
        :return: f'(z) = (P'Q - PQ')/Q^2
        :raises RationalMapError: z is infinity or a pole
        """
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        if np.any(is_infinity(z)):
            raise RationalMapError('derivative at infinity requested in the finite chart')

        q = npoly.polyval(z, self.__q)
        if np.any(q == 0):
            raise RationalMapError(f'derivative has a pole at {z[q == 0][0]}')

        p = npoly.polyval(z, self.__p)
        out = (npoly.polyval(z, self.__dp) * q - p * npoly.polyval(z, self.__dq)) / (q * q)
        return complex(out[0]) if scalar else out

    def second_derivative(self, z: Points) -> Points:
        """
        :param z: finite point(s)
        :return: f''(z) = (N'Q - 2NQ')/Q^3 with N = P'Q - PQ'
        """
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        if np.any(is_infinity(z)):
            raise RationalMapError('second derivative at infinity requested in the finite chart')

        q = npoly.polyval(z, self.__q)
        if np.any(q == 0):
            raise RationalMapError(f'second derivative has a pole at {z[q == 0][0]}')

        n = self.critical_numerator()
        out = (npoly.polyval(z, npoly.polyder(n)) * q - 2 * npoly.polyval(z, n) * npoly.polyval(z, self.__dq)) / q ** 3
        return complex(out[0]) if scalar else out

    def derivative_at_infinity(self) -> complex:
        """
        Derivative at infinity in the chart w = 1/z of the source

        When f fixes infinity the target chart is 1/z too, which makes the result
        the multiplier of the fixed point at infinity.
        """
        d = self.degree
        p, q = self.__p_pad, self.__q_pad
        if q[d] == 0:
            return complex(q[d - 1] / p[d])

        return complex((p[d - 1] * q[d] - p[d] * q[d - 1]) / q[d] ** 2)

    def critical_numerator(self) -> np.ndarray:
        """
        :return: ascending coefficients of N = P'Q - PQ'
        """
        n = npoly.polysub(npoly.polymul(self.__dp, self.__q), npoly.polymul(self.__p, self.__dq))
        return _trim(n, 1e-14)

    def critical_points(self) -> np.ndarray:
        """
        :return: the 2d - 2 critical points with multiplicity, lexicographically
            ordered, with infinity last when the degree bookkeeping demands it
        :raises RootSolverError: root solve failed
        """
        n = self.critical_numerator()
        finite = poly_roots(n)
        at_infinity = 2 * self.degree - 2 - len(finite)
        points = np.concatenate([finite, np.full(at_infinity, INFINITY)])
        return points[lex_order(points)]

    # endregion

    # region Preimages

    def fiber_coefficients(self, w: np.ndarray) -> np.ndarray:
        """
        :param w: 1-d array of targets (infinity allowed)
        :return: (len(w), d + 1) ascending coefficients of P - wQ (Q for w = infinity)
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        inf = is_infinity(w)
        finite_w = np.where(inf, 0.0, w)
        coeffs = self.__p_pad[None, :] - finite_w[:, None] * self.__q_pad[None, :]
        coeffs[inf] = self.__q_pad
        return coeffs

    def is_degenerate_fiber(self, w: Points) -> Union[bool, np.ndarray]:
        """
        :return: True where P - wQ drops degree (some preimage of w is infinity)
        """
        w_arr = np.atleast_1d(np.asarray(w, dtype=complex))
        coeffs = self.fiber_coefficients(w_arr)
        scale = np.max(np.abs(coeffs), axis=1)
        degenerate = np.abs(coeffs[:, -1]) <= G_DEGENERATE_TOL * scale
        return bool(degenerate[0]) if np.ndim(w) == 0 else degenerate

    def solve_fibers(self, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Solve many fibers at once, without raising

        :param w: 1-d array of targets
        :return: ((len(w), d) preimages ordered per row, degenerate row mask);
            degenerate rows hold NaN
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        d = self.degree
        coeffs = self.fiber_coefficients(w)
        degenerate = self.is_degenerate_fiber(w)

        lead = np.where(degenerate, 1.0, coeffs[:, -1])
        monic = coeffs[:, :-1] / lead[:, None]
        companion = np.zeros((len(w), d, d), dtype=complex)
        companion[:, 1:, :-1] = np.eye(d - 1)
        companion[:, :, -1] = -monic
        roots = np.linalg.eigvals(companion)

        roots = self.__polish_fibers(coeffs, roots)
        roots[degenerate] = np.nan

        inf = is_infinity(roots)
        re = np.where(inf, np.inf, np.round(roots.real, 12))
        order = np.lexsort((np.where(inf, np.inf, roots.imag), re), axis=-1)
        return np.take_along_axis(roots, order, axis=-1), degenerate

    def preimages_batch(self, w: np.ndarray, tol: float = G_FIBER_TOL) -> np.ndarray:
        """
        :param w: 1-d array of targets
        :param tol: fiber tolerance, relative to 1 + |w|
        :return: (len(w), d) preimages, each row lexicographically ordered
        :raises DegenerateFiberError: some target has a preimage at infinity
        :raises RootSolverError: a preimage misses its target by more than tol
        """
        w = np.atleast_1d(np.asarray(w, dtype=complex))
        roots, degenerate = self.solve_fibers(w)
        if np.any(degenerate):
            bad = complex(w[np.argmax(degenerate)])
            raise DegenerateFiberError(f'fiber of {bad} has a preimage at infinity', bad)

        finite = ~is_infinity(w)
        if np.any(finite):
            images = self.evaluate(roots[finite])
            residual = np.abs(images - w[finite, None]) / (1.0 + np.abs(w[finite, None]))
            if not np.all(residual < tol):
                worst = np.unravel_index(np.nanargmax(residual), residual.shape)
                raise RootSolverError(
                    f'preimage {roots[finite][worst]} of {w[finite][worst[0]]} misses by {residual[worst]:.3g}')

        return roots

    def preimages(self, w: complex, tol: float = G_FIBER_TOL) -> np.ndarray:
        """
        :param w: target point
        :param tol: fiber tolerance
        :return: the d preimages of w with multiplicity, ordered by (re, im)
        """
        return self.preimages_batch(np.array([w], dtype=complex), tol)[0]

    def preimage_tree(self, w: complex, n: int, budget: int = G_NODE_BUDGET,
                      tol: float = G_FIBER_TOL) -> PreimageTree:
        """
        :param w: anchor
        :param n: depth (>= 1)
        :param budget: maximal number of leaves
        :param tol: fiber tolerance
        :return: full fiber tree of f^n anchored at w
        :raises BudgetExceededError: d^n exceeds the budget
        """
        if n < 1:
            raise ValueError(f'tree depth must be >= 1 (got {n})')

        if self.degree ** n > budget:
            raise BudgetExceededError(f'{self.degree}^{n} leaves exceed the node budget {budget}')

        levels = [np.array([w], dtype=complex)]
        for _ in range(n):
            levels.append(self.preimages_batch(levels[-1], tol).reshape(-1))

        return PreimageTree(complex(w), n, self.degree, levels)

    def __polish_fibers(self, coeffs: np.ndarray, roots: np.ndarray) -> np.ndarray:
        deriv = coeffs[:, 1:] * np.arange(1, coeffs.shape[1])[None, :]
        for _ in range(G_NEWTON_STEPS):
            value = _horner(coeffs, roots)
            slope = _horner(deriv, roots)
            with np.errstate(all='ignore'):
                trial = roots - value / slope

            ok = np.isfinite(trial) & (np.abs(_horner(coeffs, trial)) <= np.abs(value))
            roots = np.where(ok, trial, roots)

        return roots

    # endregion

    def iterate(self, k: int, budget: int = G_DEGREE_BUDGET) -> RationalMap:
        """
        :param k: number of compositions (>= 1)
        :param budget: maximal degree of the composed map
        :return: f^k as a rational map of degree d^k
        :raises BudgetExceededError: d^k exceeds the degree budget
        """
        if k < 1:
            raise ValueError(f'iterate count must be >= 1 (got {k})')

        if self.degree ** k > budget:
            raise BudgetExceededError(f'{self.degree}^{k} exceeds the composition degree budget {budget}')

        if k == 1:
            return self

        x, y = self.__p_pad.copy(), self.__q_pad.copy()
        for _ in range(k - 1):
            x, y = self.__compose_homogeneous(x, y)

        return RationalMap(x, y, validate=False)

    def __compose_homogeneous(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        d = self.degree
        new_x = np.zeros(1, dtype=complex)
        new_y = np.zeros(1, dtype=complex)
        for j in range(d + 1):
            term = npoly.polymul(npoly.polypow(x, j), npoly.polypow(y, d - j))
            new_x = npoly.polyadd(new_x, self.__p_pad[j] * term)
            new_y = npoly.polyadd(new_y, self.__q_pad[j] * term)

        return new_x, new_y

    def __check_coprime(self):
        p_roots = poly_roots(self.__p)
        q_roots = poly_roots(self.__q)
        if len(p_roots) and len(q_roots):
            gap = np.min(np.abs(p_roots[:, None] - q_roots[None, :]))
            if gap < G_COPRIME_TOL:
                raise RationalMapError(f'numerator and denominator share a root (distance {gap:.3g})')


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """
    :param coeffs: (N, m) ascending coefficients, one polynomial per row
    :param z: (N, k) evaluation points per row
    :return: (N, k) values
    """
    out = np.zeros_like(z)
    for j in range(coeffs.shape[1] - 1, -1, -1):
        out = out * z + coeffs[:, j, None]

    return out
