"""Lifted dynamics on the bundle of unit tangent directions.

A point of the lifted system is a pair (base point, unit direction).
One step maps the base point forward and pushes the direction through
the Jacobian, renormalizing to unit length.  The log of the stretch
factor picked up at each step is the observable whose Birkhoff averages
are Lyapunov exponents; summing it along an orbit telescopes to the
growth rate of the full derivative product, and ``direct_growth_rate``
recomputes that product independently as a cross-check.
"""

import math

import numpy as np

from .dynamics import MapSystem
from .errors import CriticalPointEncountered, DimensionMismatch

# Guard on the stretched norm before dividing.  Hitting it means the
# invariant set effectively contains a critical point and the lift is
# undefined there.
EPS_CRITICAL = 1e-12

# direct_growth_rate renormalizes its running vector only at these
# magnitudes, keeping it genuinely independent of the per-step
# normalization used everywhere else.
_RENORM_HIGH = 1e100
_RENORM_LOW = 1e-100


class SphereBundlePoint:
    """A base point together with a unit tangent direction."""

    __slots__ = ("base", "direction")

    def __init__(self, base, direction):
        self.base = np.atleast_1d(np.asarray(base, dtype=float)).copy()
        v = np.atleast_1d(np.asarray(direction, dtype=float)).copy()
        if v.shape != self.base.shape:
            raise DimensionMismatch(
                f"direction of length {v.size} does not match base of length {self.base.size}"
            )
        nrm = float(np.linalg.norm(v))
        if nrm <= EPS_CRITICAL:
            raise ValueError("direction must be a nonzero vector")
        if abs(nrm - 1.0) > 1e-12:
            v = v / nrm
        # an already-unit direction is stored bit-for-bit, so replaying
        # an orbit from a recorded point reproduces it exactly
        self.direction = v

    @property
    def dim(self) -> int:
        return self.base.size

    def as_tuples(self):
        return tuple(float(c) for c in self.base), tuple(float(c) for c in self.direction)

    def __repr__(self):
        return f"SphereBundlePoint(base={self.base.tolist()}, direction={self.direction.tolist()})"


class LiftedOrbitRecord:
    """The first ``n`` lifted orbit points and their per-step log stretches."""

    __slots__ = ("points", "phi_values")

    def __init__(self, points, phi_values):
        self.points = points
        self.phi_values = np.asarray(phi_values, dtype=float)

    def __len__(self):
        return len(self.points)

    def csv_header(self):
        d = self.points[0].dim
        cols = ["step"]
        cols += [f"x{i}" for i in range(d)]
        cols += [f"v{i}" for i in range(d)]
        cols.append("phi")
        return cols

    def csv_rows(self):
        rows = []
        for i, p in enumerate(self.points):
            rows.append(
                [i]
                + [float(c) for c in p.base]
                + [float(c) for c in p.direction]
                + [float(self.phi_values[i])]
            )
        return rows


def _step_raw(sys: MapSystem, x: tuple, v: tuple, step_index=None):
    """One cocycle step on raw tuples: returns (x_next, v_next, phi)."""
    jac = sys.jacobian_raw(x)
    d = len(x)
    if d == 1:
        w0 = jac[0][0] * v[0]
        nrm = abs(w0)
        if nrm <= EPS_CRITICAL:
            raise CriticalPointEncountered(
                f"derivative norm {nrm:.3e} at or below guard {EPS_CRITICAL:.0e}",
                point=x,
                step=step_index,
            )
        return sys.apply_raw(x), (w0 / nrm,), math.log(nrm)
    if d == 2:
        (a, b), (c, e) = jac
        w0 = a * v[0] + b * v[1]
        w1 = c * v[0] + e * v[1]
        nrm = math.hypot(w0, w1)
        if nrm <= EPS_CRITICAL:
            raise CriticalPointEncountered(
                f"derivative norm {nrm:.3e} at or below guard {EPS_CRITICAL:.0e}",
                point=x,
                step=step_index,
            )
        return sys.apply_raw(x), (w0 / nrm, w1 / nrm), math.log(nrm)
    w = tuple(sum(jac[i][k] * v[k] for k in range(d)) for i in range(d))
    nrm = math.sqrt(sum(c * c for c in w))
    if nrm <= EPS_CRITICAL:
        raise CriticalPointEncountered(
            f"derivative norm {nrm:.3e} at or below guard {EPS_CRITICAL:.0e}",
            point=x,
            step=step_index,
        )
    return sys.apply_raw(x), tuple(c / nrm for c in w), math.log(nrm)


def _as_bundle_tuples(sys: MapSystem, p: SphereBundlePoint):
    if p.dim != sys.dim:
        raise DimensionMismatch(
            f"bundle point of dimension {p.dim} fed to system of dimension {sys.dim}"
        )
    x, v = p.as_tuples()
    return sys.domain.reduce(x), v


def lift_step(sys: MapSystem, p: SphereBundlePoint) -> SphereBundlePoint:
    """One step of the lifted dynamics: push the direction through the Jacobian."""
    x, v = _as_bundle_tuples(sys, p)
    x2, v2, _ = _step_raw(sys, x, v)
    return SphereBundlePoint(x2, v2)


def log_stretch(sys: MapSystem, p: SphereBundlePoint) -> float:
    """Log of the derivative's stretch factor along the unit direction, in nats."""
    x, v = _as_bundle_tuples(sys, p)
    _, _, phi = _step_raw(sys, x, v)
    return phi


def birkhoff_average(sys: MapSystem, p: SphereBundlePoint, n: int, return_record: bool = False):
    """Time average of the log stretch over the first ``n`` lifted steps.

    With ``return_record=True`` also returns the visited points and the
    individual log stretches exactly as produced during iteration.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x, v = _as_bundle_tuples(sys, p)
    phis = []
    points = [] if return_record else None
    for i in range(n):
        if return_record:
            points.append(SphereBundlePoint(x, v))
        x, v, phi = _step_raw(sys, x, v, step_index=i)
        phis.append(phi)
    avg = math.fsum(phis) / n
    if return_record:
        return avg, LiftedOrbitRecord(points, phis)
    return avg


def direct_growth_rate(sys: MapSystem, p: SphereBundlePoint, n: int) -> float:
    """Growth rate computed from the accumulated derivative product.

    The tangent vector is multiplied through the Jacobians without
    per-step normalization; it is rescaled only when its norm leaves
    ``[1e-100, 1e100]``.  Exists to cross-check the telescoped sum from
    ``birkhoff_average`` by an independent route.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    x, v = _as_bundle_tuples(sys, p)
    d = len(x)
    w = list(v)
    log_acc = 0.0
    prev_nrm = 1.0
    for i in range(n):
        jac = sys.jacobian_raw(x)
        if d == 1:
            w = [jac[0][0] * w[0]]
            nrm = abs(w[0])
        elif d == 2:
            (a, b), (c, e) = jac
            w = [a * w[0] + b * w[1], c * w[0] + e * w[1]]
            nrm = math.hypot(w[0], w[1])
        else:
            w = [sum(jac[r][k] * w[k] for k in range(d)) for r in range(d)]
            nrm = math.sqrt(sum(c * c for c in w))
        if nrm <= EPS_CRITICAL * prev_nrm:
            raise CriticalPointEncountered(
                "derivative product collapsed below the critical guard",
                point=x,
                step=i,
            )
        if nrm > _RENORM_HIGH or nrm < _RENORM_LOW:
            log_acc += math.log(nrm)
            w = [c / nrm for c in w]
            prev_nrm = 1.0
        else:
            prev_nrm = nrm
        x = sys.apply_raw(x)
    final = math.sqrt(sum(c * c for c in w)) if d > 2 else (
        abs(w[0]) if d == 1 else math.hypot(w[0], w[1])
    )
    return (log_acc + math.log(final)) / n


def lyapunov_spectrum(sys: MapSystem, x, n: int) -> np.ndarray:
    """Estimate all ``d`` Lyapunov exponents along one orbit, ascending.

    Iterates an orthonormal frame, re-orthonormalizing by QR at every
    step, and averages the log diagonal stretches.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    pt = sys._as_point(x)
    d = sys.dim
    q = np.eye(d)
    sums = np.zeros(d)
    for i in range(n):
        m = np.asarray(sys.jacobian_raw(pt))
        z = m @ q
        q, r = np.linalg.qr(z)
        diag = np.abs(np.diag(r))
        if np.any(diag <= EPS_CRITICAL):
            raise CriticalPointEncountered(
                "frame collapsed during spectrum estimation", point=pt, step=i
            )
        sums += np.log(diag)
        pt = sys.apply_raw(pt)
    return np.sort(sums / n)
