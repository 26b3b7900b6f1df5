"""Sampling-based certificates of uniform expansion.

Uniform expansion is checked in its two-constant form: rate lambda and
onset time N, with the growth (1/n) log |Df^n v| required to clear
lambda for every sampled point, direction, and n in [N, N_max].  A run
either returns a certificate carrying the worst observed margin or the
first violating triple in deterministic grid order.

Certificates are evidence, not proof: they quantify expansion on a
finite grid and a finite time horizon, both of which are disclosed in
the result.  The fibred variant restricts directions to a declared
derivative-invariant subbundle after checking its invariance and the
angle separating it from its complement.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import MapSystem, ToralEndomorphism
from .ergodic_opt import (
    ExtremalEstimates,
    build_restricted_graph,
    max_mean_cycle,
    min_mean_cycle,
)
from .errors import (
    CriticalPointEncountered,
    DegenerateBasisError,
    DimensionUnsupported,
    SplittingInvalidError,
    UnsupportedSystemError,
)
from .sphere_bundle import _step_raw

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class GridSpec:
    """Evaluation grid: uniform base points per axis plus a direction set.

    For two-dimensional linear systems the unit eigenvectors are
    appended after the uniform directions; the contracting direction is
    the worst case and a uniform angle grid alone cannot witness it in
    finite time.
    """

    base_count: int = 128
    direction_count: int = 16

    def __post_init__(self):
        if self.base_count < 1 or self.direction_count < 1:
            raise ValueError("grid counts must be positive")


@dataclass(frozen=True)
class ExpansionCertificate:
    """Constants (lambda, N) plus the observed margins backing them up.

    ``margin`` is the minimum over all tested (point, direction, n) of
    the time-n growth rate minus lambda; nonnegative for a valid
    certificate.  ``small_time_floor`` is the minimum of
    |Df^n v| / e^(lambda n) over n < N, from which the single-constant
    form of the expansion bound is recovered.
    """

    lam: float
    big_n: int
    n_max: int
    grid: dict
    margin: float
    small_time_floor: float
    evidence_only: bool = True
    restricted_to: str = "full"
    per_point_margins: tuple = None

    def equivalent_constant(self) -> float:
        """Prefactor for the single-constant expansion inequality."""
        return math.exp(-self.lam * self.big_n) * self.small_time_floor

    def to_json_dict(self) -> dict:
        out = {
            "outcome": "certificate",
            "lambda": self.lam,
            "big_n": self.big_n,
            "n_max": self.n_max,
            "grid": dict(self.grid),
            "margin": self.margin,
            "small_time_floor": self.small_time_floor,
            "equivalent_constant": self.equivalent_constant(),
            "evidence_only": self.evidence_only,
            "restricted_to": self.restricted_to,
            "tag": "estimate",
        }
        if self.per_point_margins is not None:
            out["per_point_margins"] = [
                {"base": list(b), "direction": list(v), "margin": m}
                for b, v, m in self.per_point_margins
            ]
        return out


@dataclass(frozen=True)
class Counterexample:
    """A sampled triple violating the tested expansion rate."""

    point: tuple
    direction: tuple
    time: int
    observed: float
    lam: float

    def to_json_dict(self) -> dict:
        return {
            "outcome": "counterexample",
            "base": list(self.point),
            "direction": list(self.direction),
            "time": self.time,
            "observed": self.observed,
            "lambda": self.lam,
            "tag": "exact",
        }


class Splitting:
    """A declared decomposition of the tangent space into two subbundles.

    Bases are supplied per base point by evaluator callables returning
    orthonormal column matrices; invariance under the derivative and the
    angle separating the two subbundles are checked, never assumed.
    """

    def __init__(self, basis1, basis2, dims, angle_bound: float = 1e-3, label: str = "custom"):
        self.basis1 = basis1
        self.basis2 = basis2
        self.dims = tuple(int(k) for k in dims)
        if self.dims[0] < 1 or self.dims[1] < 1:
            raise ValueError("both subbundles must have positive dimension")
        self.angle_bound = float(angle_bound)
        if not self.angle_bound > 0:
            raise ValueError("declared angle bound must be positive")
        self.label = label

    @staticmethod
    def constant(b1, b2, angle_bound: float = 1e-3, label: str = "constant") -> "Splitting":
        m1 = np.atleast_2d(np.asarray(b1, dtype=float))
        m2 = np.atleast_2d(np.asarray(b2, dtype=float))
        if m1.shape[0] == 1 and m1.shape[1] > 1:
            m1 = m1.T
        if m2.shape[0] == 1 and m2.shape[1] > 1:
            m2 = m2.T
        m1 = m1 / np.linalg.norm(m1, axis=0, keepdims=True)
        m2 = m2 / np.linalg.norm(m2, axis=0, keepdims=True)
        return Splitting(
            lambda x: m1, lambda x: m2, (m1.shape[1], m2.shape[1]),
            angle_bound=angle_bound, label=label,
        )

    @staticmethod
    def from_eigenvectors(sys: ToralEndomorphism, expanding_first: bool = True) -> "Splitting":
        """Eigendirection splitting of a 2-d linear system.

        ``expanding_first=True`` puts the largest-modulus eigendirection
        in the first subbundle ("unstable"), otherwise the smallest
        ("stable").
        """
        if not isinstance(sys, ToralEndomorphism) or sys.dim != 2:
            raise UnsupportedSystemError("eigenvector splittings need a 2-d linear system")
        vals, units = sys.eigen_data()
        if abs(abs(vals[0]) - abs(vals[1])) < 1e-12:
            raise UnsupportedSystemError("eigenvalues have equal modulus; no splitting")
        u_big, u_small = units[0], units[1]
        if expanding_first:
            first, second = u_big, u_small
            label = "unstable"
        else:
            first, second = u_small, u_big
            label = "stable"
        gap = abs(float(np.dot(first, second)))
        angle = math.acos(min(1.0, gap))
        return Splitting.constant(
            first, second, angle_bound=min(angle / 2, 0.5) if angle > 0 else 1e-6,
            label=label,
        )

    @staticmethod
    def coordinate_axis(axis: int) -> "Splitting":
        """Axis splitting for 2-d product systems: E1 = span(e_axis)."""
        if axis not in (0, 1):
            raise ValueError("axis must be 0 or 1")
        e = np.eye(2)
        return Splitting.constant(
            e[:, axis], e[:, 1 - axis], angle_bound=1.0, label=f"axis{axis}"
        )

    def rotated(self, angle: float) -> "Splitting":
        """Same splitting with both bases rotated in the plane (2-d only)."""
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        b1 = self.basis1
        b2 = self.basis2
        return Splitting(
            lambda x: rot @ np.atleast_2d(b1(x)),
            lambda x: rot @ np.atleast_2d(b2(x)),
            self.dims,
            angle_bound=self.angle_bound,
            label=f"{self.label}+rot",
        )


@dataclass(frozen=True)
class SplittingReport:
    max_invariance_defect: float
    min_principal_angle: float
    ok: bool
    tol_angle: float
    declared_angle_bound: float
    samples: int

    def to_json_dict(self):
        return {
            "max_invariance_defect": self.max_invariance_defect,
            "min_principal_angle": self.min_principal_angle,
            "ok": self.ok,
            "tol_angle": self.tol_angle,
            "declared_angle_bound": self.declared_angle_bound,
            "samples": self.samples,
        }


def _orthonormalize(mat: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(mat)
    if np.min(np.abs(np.diag(r))) <= 1e-12:
        raise CriticalPointEncountered("derivative collapsed a subbundle basis")
    return q


def _principal_angles(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    sv = np.linalg.svd(q1.T @ q2, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))


def check_splitting(
    sys: MapSystem,
    sp: Splitting,
    samples: int = 64,
    tol_angle: float = 1e-8,
) -> SplittingReport:
    """Measure invariance defect and subbundle separation on a sample grid.

    For each sampled base point the principal angles between
    Df E^i and E^i at the image quantify the invariance defect; the
    smallest principal angle between E^1 and E^2 is the separation.
    Fails when the defect exceeds ``tol_angle`` or the separation drops
    below the splitting's declared bound.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    per_axis = max(1, int(round(samples ** (1.0 / sys.dim))))
    pts = sys.domain.grid(per_axis)
    worst_defect = 0.0
    min_sep = math.pi / 2
    for x in pts:
        b1 = np.atleast_2d(np.asarray(sp.basis1(x), dtype=float))
        b2 = np.atleast_2d(np.asarray(sp.basis2(x), dtype=float))
        if b1.shape[0] != sys.dim:
            b1 = b1.T
        if b2.shape[0] != sys.dim:
            b2 = b2.T
        for b, k in ((b1, sp.dims[0]), (b2, sp.dims[1])):
            if b.shape[1] != k:
                raise DegenerateBasisError("basis has the wrong number of columns")
            gram = b.T @ b
            if np.max(np.abs(gram - np.eye(k))) > 1e-10:
                raise DegenerateBasisError("subbundle basis is not orthonormal")
        m = np.asarray(sys.jacobian_raw(sys.domain.reduce(x)))
        fx = sys.apply_raw(sys.domain.reduce(x))
        t1 = np.atleast_2d(np.asarray(sp.basis1(fx), dtype=float))
        t2 = np.atleast_2d(np.asarray(sp.basis2(fx), dtype=float))
        if t1.shape[0] != sys.dim:
            t1 = t1.T
        if t2.shape[0] != sys.dim:
            t2 = t2.T
        for b, t in ((b1, t1), (b2, t2)):
            img = _orthonormalize(m @ b)
            defect = float(np.max(_principal_angles(img, t)))
            if defect > worst_defect:
                worst_defect = defect
        sep = float(np.min(_principal_angles(b1, b2)))
        if sep < min_sep:
            min_sep = sep
    ok = worst_defect <= tol_angle and min_sep >= sp.angle_bound
    return SplittingReport(
        max_invariance_defect=worst_defect,
        min_principal_angle=min_sep,
        ok=ok,
        tol_angle=tol_angle,
        declared_angle_bound=sp.angle_bound,
        samples=len(pts),
    )


def _grid_directions(sys: MapSystem, count: int):
    """Deterministic direction set: signs (d=1) or uniform angles plus,
    for 2-d linear systems with a real spectrum, the unit eigenvectors."""
    if sys.dim == 1:
        return [(1.0,), (-1.0,)]
    dirs = []
    for j in range(count):
        theta = j * _TWO_PI / count
        dirs.append((math.cos(theta), math.sin(theta)))
    if isinstance(sys, ToralEndomorphism) and sys.dim == 2:
        try:
            _, units = sys.eigen_data()
        except UnsupportedSystemError:
            units = []
        for u in units:
            dirs.append((float(u[0]), float(u[1])))
    return dirs


def _evaluate_grid(sys, lam, big_n, n_max, base_points, directions, retain_margins, restricted_to):
    """Shared certificate loop over an explicit (point, direction) grid."""
    margin = math.inf
    floor_small = math.inf
    per_point = [] if retain_margins else None
    for x0 in base_points:
        x0 = sys.domain.reduce(tuple(float(c) for c in x0))
        for v0 in directions:
            x = x0
            v = tuple(float(c) for c in v0)
            nrm = math.sqrt(sum(c * c for c in v))
            v = tuple(c / nrm for c in v)
            acc = 0.0
            point_margin = math.inf
            for n in range(1, n_max + 1):
                x, v, phi = _step_raw(sys, x, v)
                acc += phi
                if n < big_n:
                    ratio = math.exp(acc - lam * n)
                    if ratio < floor_small:
                        floor_small = ratio
                    continue
                value = acc / n
                gap = value - lam
                if gap < point_margin:
                    point_margin = gap
                if value < lam:
                    return Counterexample(
                        point=x0, direction=v0, time=n, observed=value, lam=lam
                    ), None
            if point_margin < margin:
                margin = point_margin
            if retain_margins:
                per_point.append((x0, v0, point_margin))
    if floor_small is math.inf:
        floor_small = 1.0
    grid_meta = {
        "base_points": len(base_points),
        "directions": len(directions),
    }
    cert = ExpansionCertificate(
        lam=lam,
        big_n=big_n,
        n_max=n_max,
        grid=grid_meta,
        margin=margin,
        small_time_floor=floor_small,
        restricted_to=restricted_to,
        per_point_margins=tuple(per_point) if retain_margins else None,
    )
    return None, cert


def certify_uniform_expansion(
    sys: MapSystem,
    lam: float,
    big_n: int,
    n_max: int = None,
    grid: GridSpec = None,
    retain_margins: bool = False,
):
    """Test (lambda, N)-expansion over all tangent directions.

    Evaluates the time-n growth rate for every grid (point, direction)
    and every n in [N, N_max]; returns a certificate with the minimum
    margin, or the first violating triple in deterministic grid order
    (base points lexicographic, then direction index, then n).
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    if big_n < 1:
        raise ValueError("N must be at least 1")
    if n_max is None:
        n_max = 10 * big_n
    if n_max < big_n:
        raise ValueError("N_max must be at least N")
    if grid is None:
        grid = GridSpec()
    base_points = sys.domain.grid(grid.base_count)
    directions = _grid_directions(sys, grid.direction_count)
    counter, cert = _evaluate_grid(
        sys, lam, big_n, n_max, base_points, directions, retain_margins, "full"
    )
    return counter if counter is not None else cert


@dataclass(frozen=True)
class FibredCertification:
    """Outcome of a subbundle-restricted certification run."""

    outcome: object  # ExpansionCertificate | Counterexample
    splitting_report: SplittingReport
    restricted_extremal: ExtremalEstimates = None

    @property
    def is_certificate(self) -> bool:
        return isinstance(self.outcome, ExpansionCertificate)

    def to_json_dict(self):
        out = {
            "result": self.outcome.to_json_dict(),
            "splitting": self.splitting_report.to_json_dict(),
        }
        if self.restricted_extremal is not None:
            out["restricted_extremal"] = self.restricted_extremal.to_json_dict()
        return out


def certify_fibred_expansion(
    sys: MapSystem,
    sp: Splitting,
    lam: float,
    big_n: int,
    n_max: int = None,
    grid: GridSpec = None,
    retain_margins: bool = False,
    check_samples: int = 64,
    tol_angle: float = 1e-8,
    restricted_resolution: int = 32,
    restricted_samples: int = 2,
    seed: int = 0,
    include_restricted_estimate: bool = True,
) -> FibredCertification:
    """Certify expansion with directions drawn from the first subbundle only.

    The splitting is validated first (invariance defect and angle
    separation); a failed check raises ``SplittingInvalidError``.  The
    restricted extremal exponent estimates from the sign-graph over the
    subbundle are reported alongside the certificate or counterexample.
    """
    report = check_splitting(sys, sp, samples=check_samples, tol_angle=tol_angle)
    if not report.ok:
        raise SplittingInvalidError(
            f"splitting failed validation: defect {report.max_invariance_defect:.3e}, "
            f"separation {report.min_principal_angle:.3e}"
        )
    if sp.dims[0] != 1 and sp.dims[0] != sys.dim:
        raise DimensionUnsupported("restricted certification handles line subbundles")
    if grid is None:
        grid = GridSpec()
    if n_max is None:
        n_max = 10 * big_n
    base_points = sys.domain.grid(grid.base_count)

    def field_at(x):
        b = np.atleast_2d(np.asarray(sp.basis1(x), dtype=float))
        if b.shape[0] != sys.dim:
            b = b.T
        return b[:, 0]

    if sp.dims[0] == 1:
        # direction grid per base point: the two unit vectors of the line
        counter = None
        cert = None
        margin = math.inf
        floor_small = math.inf
        per_point = [] if retain_margins else None
        for x0 in base_points:
            x0r = sys.domain.reduce(tuple(float(c) for c in x0))
            u = field_at(x0r)
            u = u / np.linalg.norm(u)
            for sgn in (1.0, -1.0):
                v0 = tuple(float(sgn * c) for c in u)
                x = x0r
                v = v0
                acc = 0.0
                point_margin = math.inf
                for n in range(1, n_max + 1):
                    x, v, phi = _step_raw(sys, x, v)
                    acc += phi
                    if n < big_n:
                        ratio = math.exp(acc - lam * n)
                        if ratio < floor_small:
                            floor_small = ratio
                        continue
                    value = acc / n
                    gap = value - lam
                    if gap < point_margin:
                        point_margin = gap
                    if value < lam:
                        counter = Counterexample(
                            point=x0r, direction=v0, time=n, observed=value, lam=lam
                        )
                        break
                if counter is not None:
                    break
                if point_margin < margin:
                    margin = point_margin
                if retain_margins:
                    per_point.append((x0r, v0, point_margin))
            if counter is not None:
                break
        if counter is None:
            if floor_small is math.inf:
                floor_small = 1.0
            cert = ExpansionCertificate(
                lam=lam,
                big_n=big_n,
                n_max=n_max,
                grid={"base_points": len(base_points), "directions": 2},
                margin=margin,
                small_time_floor=floor_small,
                restricted_to=sp.label,
                per_point_margins=tuple(per_point) if retain_margins else None,
            )
        outcome = counter if counter is not None else cert
    else:
        # trivial complement: the subbundle is the whole tangent space
        outcome = certify_uniform_expansion(
            sys, lam, big_n, n_max=n_max, grid=grid, retain_margins=retain_margins
        )

    restricted = None
    if include_restricted_estimate and sp.dims[0] == 1:
        rg = build_restricted_graph(
            sys, field_at, restricted_resolution, restricted_samples, seed=seed
        )
        lo = min_mean_cycle(rg)
        hi = max_mean_cycle(rg)
        restricted = ExtremalEstimates(
            min_estimate=lo.value,
            max_estimate=hi.value,
            min_cycle=lo.cycle,
            max_cycle=hi.cycle,
            base_resolution=restricted_resolution,
            direction_resolution=2,
            samples_per_cell=restricted_samples,
            seed=int(seed),
            phi_oscillation=rg.phi_oscillation(),
            node_count=rg.node_count,
            edge_count=rg.edge_count,
        )
    return FibredCertification(
        outcome=outcome, splitting_report=report, restricted_extremal=restricted
    )
