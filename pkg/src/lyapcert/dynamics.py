"""Self-maps of tori and intervals with exact, hand-coded Jacobians.

Every built-in system carries an analytic derivative; nothing here is
finite-differenced.  Systems are immutable after construction and all
operations are pure functions, so instances can be shared freely across
worker threads or processes.

Points are vectors of length ``d`` with ``d in {1, 2}`` for the full
toolkit; ``d = 3`` is accepted for orbit-based estimation only (the
graph modules reject it).  Coordinates on periodic axes are always
reduced into ``[low, high)``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnsupportedSystemError

# |det Df| at double precision is dominated by rounding noise below this
# for the dimensions we support.
DEFAULT_CRITICAL_TOL = 1e-12

_TWO_PI = 2.0 * math.pi


def _mod_unit(t: float) -> float:
    # Python's % can return the modulus itself for tiny negative inputs
    # (e.g. -1e-18 % 1.0 == 1.0); fold that back to 0.
    r = t % 1.0
    return r if r < 1.0 else 0.0


# Inverse branches work on the closed lift interval [0, 1]: returning 1.0
# (the wrap point) keeps composed inverse iterations contracting instead
# of limit-cycling across the seam; callers reduce mod 1 at the end.


@dataclass(frozen=True)
class Box:
    """Axis-aligned domain.  Periodic axes wrap into ``[low, high)``."""

    lows: tuple
    highs: tuple
    periodic: tuple

    @staticmethod
    def torus(dim: int) -> "Box":
        return Box((0.0,) * dim, (1.0,) * dim, (True,) * dim)

    @staticmethod
    def interval(low: float, high: float) -> "Box":
        if not high > low:
            raise ValueError(f"empty interval [{low}, {high}]")
        return Box((float(low),), (float(high),), (False,))

    @staticmethod
    def product(a: "Box", b: "Box") -> "Box":
        return Box(a.lows + b.lows, a.highs + b.highs, a.periodic + b.periodic)

    @property
    def dim(self) -> int:
        return len(self.lows)

    def widths(self) -> tuple:
        return tuple(h - l for l, h in zip(self.lows, self.highs))

    def reduce(self, x: tuple) -> tuple:
        out = []
        for xi, lo, hi, per in zip(x, self.lows, self.highs, self.periodic):
            if per:
                w = hi - lo
                r = (xi - lo) % w
                if r >= w:
                    r = 0.0
                xi = lo + r
            out.append(xi)
        return tuple(out)

    def contains(self, x: tuple, atol: float = 1e-9) -> bool:
        for xi, lo, hi, per in zip(x, self.lows, self.highs, self.periodic):
            if per:
                continue
            if xi < lo - atol or xi > hi + atol:
                return False
        return True

    def grid(self, per_axis: int) -> list:
        """Uniform lexicographic grid, ``per_axis`` points per axis.

        Each axis is subdivided into ``per_axis`` equal cells and the low
        edge of every cell is taken, so periodic axes are sampled without
        duplicating the wrap point.
        """
        axes = []
        for lo, hi in zip(self.lows, self.highs):
            step = (hi - lo) / per_axis
            axes.append([lo + i * step for i in range(per_axis)])
        pts = [()]
        for axis in axes:
            pts = [p + (a,) for p in pts for a in axis]
        return pts


class MapSystem:
    """A self-map of a compact domain with an evaluable Jacobian.

    Subclasses implement the raw kernels ``apply_raw`` and
    ``jacobian_raw`` on plain tuples; those are the hot path used by the
    cocycle iteration.  The array-based methods below add validation and
    numpy conversion.
    """

    kind: str = "abstract"

    def __init__(self, dim: int, domain: Box):
        self.dim = dim
        self.domain = domain

    # raw kernels -----------------------------------------------------

    def apply_raw(self, x: tuple) -> tuple:
        raise NotImplementedError

    def jacobian_raw(self, x: tuple) -> tuple:
        """Jacobian at ``x`` as a tuple of row tuples."""
        raise NotImplementedError

    # public API ------------------------------------------------------

    def _as_point(self, x) -> tuple:
        pt = tuple(float(c) for c in np.atleast_1d(np.asarray(x, dtype=float)))
        if len(pt) != self.dim:
            raise DimensionMismatch(
                f"point of length {len(pt)} fed to {self.kind} system of dimension {self.dim}"
            )
        return self.domain.reduce(pt)

    def evaluate(self, x) -> np.ndarray:
        """Image of ``x``, with periodic coordinates reduced."""
        return np.array(self.apply_raw(self._as_point(x)))

    def derivative(self, x) -> np.ndarray:
        """Jacobian matrix at ``x`` (shape ``(d, d)``); entries always finite."""
        jac = np.array(self.jacobian_raw(self._as_point(x)))
        if not np.all(np.isfinite(jac)):
            raise ValueError(f"Jacobian of {self.kind} is not finite at {x!r}")
        return jac

    def jacobian_determinant(self, x) -> float:
        j = self.jacobian_raw(self._as_point(x))
        return _det(j)

    def is_critical(self, x, tol: float = DEFAULT_CRITICAL_TOL) -> bool:
        """Whether ``|det Df_x|`` falls at or below ``tol``."""
        if not tol > 0:
            raise ValueError("tol must be positive")
        return abs(self.jacobian_determinant(x)) <= tol

    def orbit(self, x, n: int) -> np.ndarray:
        """First ``n`` points of the forward orbit, starting at ``x``."""
        if n < 1:
            raise ValueError("orbit length must be at least 1")
        pt = self._as_point(x)
        out = np.empty((n, self.dim))
        out[0] = pt
        for i in range(1, n):
            pt = self.apply_raw(pt)
            out[i] = pt
        return out

    def spec(self) -> dict:
        """JSON-serializable description of this system."""
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim}>"


def _det(j: tuple) -> float:
    d = len(j)
    if d == 1:
        return j[0][0]
    if d == 2:
        return j[0][0] * j[1][1] - j[0][1] * j[1][0]
    return float(np.linalg.det(np.array(j)))


class DoublingMap(MapSystem):
    """Angle doubling on the circle: ``x -> 2x mod 1``."""

    kind = "doubling"

    def __init__(self):
        super().__init__(1, Box.torus(1))

    def apply_raw(self, x):
        return (_mod_unit(2.0 * x[0]),)

    def jacobian_raw(self, x):
        return ((2.0,),)

    # inverse-branch interface used by periodic-orbit enumeration
    branch_count = 2

    def inverse_branch(self, y: float, branch: int) -> float:
        return (y + branch) / 2.0

    def expansion_floor(self) -> float:
        return 2.0

    def spec(self):
        return {"kind": "doubling"}


class PerturbedDoubling(MapSystem):
    """Doubling with a sinusoidal perturbation.

    ``x -> 2x + eps * sin(2 pi x)  (mod 1)`` with derivative
    ``2 + 2 pi eps cos(2 pi x)``.  Requires ``eps < 1/(2 pi)`` so the map
    stays uniformly expanding and both inverse branches are defined.
    """

    kind = "perturbed_doubling"

    def __init__(self, epsilon: float):
        eps = float(epsilon)
        if eps < 0 or eps >= 1.0 / _TWO_PI:
            raise ValueError(
                f"epsilon must lie in [0, 1/(2 pi)) to keep the map expanding, got {eps}"
            )
        super().__init__(1, Box.torus(1))
        self.epsilon = eps

    def apply_raw(self, x):
        return (_mod_unit(2.0 * x[0] + self.epsilon * math.sin(_TWO_PI * x[0])),)

    def jacobian_raw(self, x):
        return ((2.0 + _TWO_PI * self.epsilon * math.cos(_TWO_PI * x[0]),),)

    def _lift_value(self, x: float) -> float:
        # monotone lift to [0, 2], no reduction
        return 2.0 * x + self.epsilon * math.sin(_TWO_PI * x)

    branch_count = 2

    def inverse_branch(self, y: float, branch: int) -> float:
        """Solve ``2x + eps sin(2 pi x) = y + branch`` for ``x in [0, 1]``.

        Newton iteration with a bisection fallback on the bracket
        ``[(t - eps)/2, (t + eps)/2]``; converges to residual 1e-14.
        """
        t = y + branch
        lo = max(0.0, (t - self.epsilon) / 2.0)
        hi = min(1.0, (t + self.epsilon) / 2.0)
        x = 0.5 * (lo + hi)
        for _ in range(80):
            f = self._lift_value(x) - t
            if abs(f) < 1e-14:
                break
            if f > 0:
                hi = x
            else:
                lo = x
            step = f / (2.0 + _TWO_PI * self.epsilon * math.cos(_TWO_PI * x))
            x_new = x - step
            if not (lo <= x_new <= hi):
                x_new = 0.5 * (lo + hi)
            x = x_new
        return x

    def expansion_floor(self) -> float:
        return 2.0 - _TWO_PI * self.epsilon

    def spec(self):
        return {"kind": "perturbed_doubling", "epsilon": self.epsilon}


class ToralEndomorphism(MapSystem):
    """Linear map ``x -> A x mod 1`` for an integer matrix ``A``.

    The Jacobian is constant and equals ``A``.  Dimensions 1 to 3 are
    accepted; graph-based modules only handle 1 and 2.
    """

    kind = "toral_endomorphism"

    def __init__(self, matrix):
        arr = np.asarray(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("matrix must be square")
        if arr.shape[0] > 3:
            raise DimensionMismatch("toral endomorphisms are supported up to dimension 3")
        if not np.allclose(arr, np.round(arr)):
            raise ValueError("matrix entries must be integers")
        d = arr.shape[0]
        super().__init__(d, Box.torus(d))
        self.matrix_int = np.round(arr).astype(np.int64)
        self._rows = tuple(tuple(float(v) for v in row) for row in self.matrix_int)

    def apply_raw(self, x):
        rows = self._rows
        d = self.dim
        if d == 1:
            return (_mod_unit(rows[0][0] * x[0]),)
        if d == 2:
            return (
                _mod_unit(rows[0][0] * x[0] + rows[0][1] * x[1]),
                _mod_unit(rows[1][0] * x[0] + rows[1][1] * x[1]),
            )
        return tuple(
            _mod_unit(sum(rows[i][k] * x[k] for k in range(d))) for i in range(d)
        )

    def jacobian_raw(self, x):
        return self._rows

    def eigen_data(self):
        """Eigenvalues and unit eigenvectors, sorted by descending ``|lambda|``.

        Raises ``UnsupportedSystemError`` when the spectrum is not real.
        """
        vals, vecs = np.linalg.eig(self.matrix_int.astype(float))
        if np.max(np.abs(vals.imag)) > 1e-12:
            raise UnsupportedSystemError("matrix has non-real eigenvalues")
        vals = vals.real
        vecs = vecs.real
        order = np.argsort(-np.abs(vals))
        vals = vals[order]
        vecs = vecs[:, order]
        units = []
        for i in range(len(vals)):
            v = vecs[:, i]
            v = v / np.linalg.norm(v)
            nz = np.flatnonzero(np.abs(v) > 1e-14)[0]
            if v[nz] < 0:
                v = -v
            units.append(v)
        return vals, units

    @property
    def branch_count(self):
        if self.dim != 1:
            raise UnsupportedSystemError("inverse branches only for 1-d systems")
        a = int(self.matrix_int[0, 0])
        if a < 2:
            raise UnsupportedSystemError("1-d linear map must have slope >= 2 for branches")
        return a

    def inverse_branch(self, y: float, branch: int) -> float:
        return (y + branch) / float(self.matrix_int[0, 0])

    def expansion_floor(self) -> float:
        if self.dim != 1:
            raise UnsupportedSystemError("expansion floor only for 1-d systems")
        return abs(float(self.matrix_int[0, 0]))

    def spec(self):
        return {"kind": "toral_endomorphism", "matrix": self.matrix_int.tolist()}


class ProductMap(MapSystem):
    """Product of two one-dimensional systems acting on the product domain."""

    kind = "product_map"

    def __init__(self, first: MapSystem, second: MapSystem):
        if first.dim != 1 or second.dim != 1:
            raise DimensionMismatch("product factors must be one-dimensional")
        super().__init__(2, Box.product(first.domain, second.domain))
        self.first = first
        self.second = second

    def apply_raw(self, x):
        return (
            self.first.apply_raw((x[0],))[0],
            self.second.apply_raw((x[1],))[0],
        )

    def jacobian_raw(self, x):
        j1 = self.first.jacobian_raw((x[0],))[0][0]
        j2 = self.second.jacobian_raw((x[1],))[0][0]
        return ((j1, 0.0), (0.0, j2))

    def spec(self):
        return {"kind": "product_map", "factors": [self.first.spec(), self.second.spec()]}


class PolynomialMap(MapSystem):
    """One-dimensional polynomial map with an explicit domain.

    Coefficients are ascending (``coeffs[k]`` multiplies ``x**k``) and the
    derivative is obtained by differentiating the coefficient list, so
    critical points are exact zeros of the derivative polynomial.  The
    domain is either the circle (values reduced mod 1) or a declared
    compact interval, in which case no reduction is applied.
    """

    kind = "custom_polynomial"

    def __init__(self, coefficients, domain="torus"):
        coeffs = [float(c) for c in coefficients]
        if not coeffs:
            raise ValueError("need at least one coefficient")
        if domain == "torus":
            box = Box.torus(1)
        else:
            lo, hi = domain
            box = Box.interval(lo, hi)
        super().__init__(1, box)
        self.coefficients = tuple(coeffs)
        self.derivative_coefficients = tuple(
            k * c for k, c in enumerate(coeffs) if k >= 1
        ) or (0.0,)

    @staticmethod
    def _horner(coeffs: tuple, x: float) -> float:
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    def apply_raw(self, x):
        val = self._horner(self.coefficients, x[0])
        if self.domain.periodic[0]:
            val = _mod_unit(val)
        return (val,)

    def jacobian_raw(self, x):
        return ((self._horner(self.derivative_coefficients, x[0]),),)

    def spec(self):
        dom = "torus" if self.domain.periodic[0] else [self.domain.lows[0], self.domain.highs[0]]
        return {
            "kind": "custom_polynomial",
            "coefficients": list(self.coefficients),
            "domain": dom,
        }


def make_system(spec: dict) -> MapSystem:
    """Build a system from its JSON description (inverse of ``MapSystem.spec``)."""
    kind = spec.get("kind")
    if kind == "doubling":
        return DoublingMap()
    if kind == "perturbed_doubling":
        return PerturbedDoubling(spec["epsilon"])
    if kind == "toral_endomorphism":
        return ToralEndomorphism(spec["matrix"])
    if kind == "product_map":
        f1, f2 = spec["factors"]
        return ProductMap(make_system(f1), make_system(f2))
    if kind == "custom_polynomial":
        dom = spec.get("domain", "torus")
        if isinstance(dom, (list, tuple)):
            dom = (float(dom[0]), float(dom[1]))
        return PolynomialMap(spec["coefficients"], dom)
    raise ValueError(f"unknown map kind {kind!r}")


def finite_difference_jacobian(sys: MapSystem, x, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``sys.evaluate``.

    Differences along periodic axes are wrapped to the shortest
    representative so the estimate is valid near the wrap point.  Meant
    for validating the analytic Jacobians, not for production use.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    d = sys.dim
    out = np.empty((d, d))
    widths = sys.domain.widths()
    for k in range(d):
        e = np.zeros(d)
        e[k] = step
        hi = sys.evaluate(x + e)
        lo = sys.evaluate(x - e)
        diff = hi - lo
        for i in range(d):
            if sys.domain.periodic[i]:
                w = widths[i]
                diff[i] = (diff[i] + 0.5 * w) % w - 0.5 * w
        out[:, k] = diff / (2.0 * step)
    return out
