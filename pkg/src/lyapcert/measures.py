"""Finitely supported probability measures from orbits.

Empirical measures put mass 1/n on each of the first n orbit points.
Atoms that coincide within a per-coordinate tolerance are merged; for
orbit-built measures the merge tracks integer visit counts, so weights
come out as exact ratios count/n and projecting to the base reproduces
the base-orbit measure atom for atom, with bit-identical weights.
"""

import math

import numpy as np

from .errors import DimensionMismatch
from .sphere_bundle import LiftedOrbitRecord, SphereBundlePoint

# Makes periodic-orbit measures canonical without merging distinct atoms
# at double precision.
ATOM_MERGE_TOL = 1e-12

SPACE_SPHERE = "sphere"
SPACE_BASE = "base"


def _cluster(coords: np.ndarray, masses, integer_masses: bool):
    """Merge rows of ``coords`` that agree within ``ATOM_MERGE_TOL`` per coordinate.

    Rows are visited in lexicographic order and compared against the
    representative (first row) of the current cluster, which keeps the
    result deterministic and independent of input order.
    """
    coords = np.asarray(coords, dtype=float)
    n = coords.shape[0]
    order = np.lexsort(tuple(coords[:, k] for k in range(coords.shape[1] - 1, -1, -1)))
    reps = []
    merged = []
    rep_row = None
    acc = None
    for idx in order:
        row = coords[idx]
        if rep_row is not None and np.max(np.abs(row - rep_row)) <= ATOM_MERGE_TOL:
            acc.append(masses[idx])
            continue
        if rep_row is not None:
            reps.append(rep_row)
            merged.append(acc)
        rep_row = row
        acc = [masses[idx]]
    if rep_row is not None:
        reps.append(rep_row)
        merged.append(acc)
    if integer_masses:
        totals = [sum(group) for group in merged]
    else:
        totals = [math.fsum(group) for group in merged]
    return np.array(reps), totals


class EmpiricalMeasure:
    """Atoms with nonnegative weights summing to 1.

    ``space`` tags whether atoms live on the direction bundle (rows are
    base coordinates followed by direction coordinates) or on the base.
    Orbit-built measures carry integer visit counts alongside the float
    weights; operations preserve them where exactness matters.
    """

    def __init__(self, space, dim, atoms, weights, counts=None, denominator=None):
        self.space = space
        self.dim = int(dim)
        self.atoms = np.asarray(atoms, dtype=float)
        if self.atoms.ndim != 2:
            raise ValueError("atoms must be a 2-d array")
        self.weights = np.asarray(weights, dtype=float)
        if len(self.weights) != self.atoms.shape[0]:
            raise ValueError("atoms and weights must have equal length")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        total = math.fsum(self.weights.tolist())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        self.counts = None if counts is None else [int(c) for c in counts]
        self.denominator = None if denominator is None else int(denominator)

    def __len__(self):
        return self.atoms.shape[0]

    @property
    def atom_width(self) -> int:
        return self.atoms.shape[1]

    @classmethod
    def from_lifted_orbit(cls, record: LiftedOrbitRecord) -> "EmpiricalMeasure":
        """Uniform measure on the points of a lifted orbit record."""
        if len(record) == 0:
            raise ValueError("record must be nonempty")
        d = record.points[0].dim
        rows = np.array(
            [np.concatenate([p.base, p.direction]) for p in record.points]
        )
        n = rows.shape[0]
        reps, totals = _cluster(rows, [1] * n, integer_masses=True)
        weights = np.array([c / n for c in totals])
        return cls(SPACE_SPHERE, d, reps, weights, counts=totals, denominator=n)

    @classmethod
    def from_base_orbit(cls, points) -> "EmpiricalMeasure":
        """Uniform measure on a base orbit (array of shape ``(n, d)``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[0]
        reps, totals = _cluster(pts, [1] * n, integer_masses=True)
        weights = np.array([c / n for c in totals])
        return cls(SPACE_BASE, pts.shape[1], reps, weights, counts=totals, denominator=n)

    def location(self, i: int):
        """Atom ``i`` as a SphereBundlePoint (sphere space) or coordinate array."""
        row = self.atoms[i]
        if self.space == SPACE_SPHERE:
            return SphereBundlePoint(row[: self.dim], row[self.dim :])
        return row.copy()

    def project_to_base(self) -> "EmpiricalMeasure":
        """Pushforward to the base: drop directions and merge shared base points.

        Total mass is preserved; measures carrying integer counts keep
        exact weights through the merge.
        """
        if self.space != SPACE_SPHERE:
            raise ValueError("measure already lives on the base")
        base_rows = self.atoms[:, : self.dim]
        if self.counts is not None:
            reps, totals = _cluster(base_rows, self.counts, integer_masses=True)
            weights = np.array([c / self.denominator for c in totals])
            return EmpiricalMeasure(
                SPACE_BASE, self.dim, reps, weights,
                counts=totals, denominator=self.denominator,
            )
        reps, totals = _cluster(base_rows, list(self.weights), integer_masses=False)
        return EmpiricalMeasure(SPACE_BASE, self.dim, reps, np.array(totals))

    def integrate(self, g) -> float:
        """Weighted sum of ``g`` over the atoms.

        ``g`` receives a SphereBundlePoint for sphere-space measures and
        a coordinate array for base-space measures.
        """
        vals = [g(self.location(i)) for i in range(len(self))]
        return float(np.dot(self.weights, np.asarray(vals, dtype=float)))

    def integrate_rows(self, fn) -> float:
        """Vectorized integral: ``fn`` maps the (N, k) atom matrix to N values."""
        return float(np.dot(self.weights, fn(self.atoms)))

    def to_json_dict(self) -> dict:
        return {
            "space": self.space,
            "dim": self.dim,
            "atoms": self.atoms.tolist(),
            "weights": self.weights.tolist(),
        }

    def csv_header(self):
        if self.space == SPACE_SPHERE:
            cols = [f"x{i}" for i in range(self.dim)] + [f"v{i}" for i in range(self.dim)]
        else:
            cols = [f"x{i}" for i in range(self.dim)]
        return cols + ["weight"]

    def csv_rows(self):
        return [
            [float(c) for c in self.atoms[i]] + [float(self.weights[i])]
            for i in range(len(self))
        ]


def trig_dictionary(space: str, dim: int, degree: int):
    """Fixed dictionary of trigonometric test functions up to ``degree``.

    Returns a list of (name, fn) pairs where ``fn`` maps an (N, k) atom
    matrix to N values.  Base modes are Fourier modes in the base
    coordinates; sphere-space dictionaries add direction modes (the
    direction sign for d=1, circular harmonics of the direction angle
    for d=2) and all base-times-direction products.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")

    base_modes = [("1", None)]
    if dim == 1:
        freqs = [(k,) for k in range(1, degree + 1)]
    elif dim == 2:
        freqs = []
        for k1 in range(-degree, degree + 1):
            for k2 in range(-degree, degree + 1):
                if k1 > 0 or (k1 == 0 and k2 > 0):
                    freqs.append((k1, k2))
    else:
        raise DimensionMismatch("trig dictionaries support dimensions 1 and 2")

    def _base_phase(kvec):
        def phase(rows):
            acc = np.zeros(rows.shape[0])
            for axis, k in enumerate(kvec):
                if k:
                    acc += k * rows[:, axis]
            return 2.0 * math.pi * acc
        return phase

    for kvec in freqs:
        phase = _base_phase(kvec)
        base_modes.append((f"cos{kvec}", (lambda p: (lambda rows: np.cos(p(rows))))(phase)))
        base_modes.append((f"sin{kvec}", (lambda p: (lambda rows: np.sin(p(rows))))(phase)))

    if space == SPACE_BASE:
        return [(name, fn) for name, fn in base_modes if fn is not None]

    dir_modes = [("1", None)]
    if dim == 1:
        dir_modes.append(("v", lambda rows: rows[:, 1]))
    else:
        def _angle(rows):
            return np.arctan2(rows[:, 3], rows[:, 2])

        for j in range(1, degree + 1):
            dir_modes.append(
                (f"cos{j}t", (lambda jj: (lambda rows: np.cos(jj * _angle(rows))))(j))
            )
            dir_modes.append(
                (f"sin{j}t", (lambda jj: (lambda rows: np.sin(jj * _angle(rows))))(j))
            )

    out = []
    for bname, bfn in base_modes:
        for dname, dfn in dir_modes:
            if bfn is None and dfn is None:
                continue
            if dfn is None:
                out.append((bname, bfn))
            elif bfn is None:
                out.append((dname, dfn))
            else:
                out.append(
                    (f"{bname}*{dname}",
                     (lambda bf, df: (lambda rows: bf(rows) * df(rows)))(bfn, dfn))
                )
    return out


def weak_star_distance(mu1: EmpiricalMeasure, mu2: EmpiricalMeasure, degree: int) -> float:
    """Dictionary-based weak-* discrepancy between two measures.

    Maximum over the trig dictionary of the absolute difference of
    integrals, normalized by the dictionary size.  Zero for identical
    measures and symmetric by construction.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if mu1.space != mu2.space or mu1.dim != mu2.dim:
        raise DimensionMismatch("measures live on different spaces")
    dictionary = trig_dictionary(mu1.space, mu1.dim, degree)
    worst = 0.0
    for _, fn in dictionary:
        diff = abs(mu1.integrate_rows(fn) - mu2.integrate_rows(fn))
        if diff > worst:
            worst = diff
    return worst / len(dictionary)
