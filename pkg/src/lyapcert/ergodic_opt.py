"""Extremal Lyapunov exponents by ergodic optimization on a transition graph.

The bundle of unit directions is partitioned into cells (base cells
times direction cells), the lifted dynamics are sampled once per cell
with a deterministic low-discrepancy pattern, and each sampled step
becomes a weighted edge.  The minimum (maximum) mean-weight cycle of
the resulting graph is the discrete stand-in for the invariant measure
minimizing (maximizing) the average log stretch.  Estimates are
sampling-based, not rigorous enclosures; every result carries its
resolution metadata and seed.

Edges keep the min and the max of all merged sample weights; min-cycle
search uses the per-edge minima and max-cycle search the maxima, so the
two estimates err outward at fixed sampling.
"""

import math
from dataclasses import dataclass, field
from itertools import product as iter_product
from math import gcd

import numpy as np

from .dynamics import MapSystem, ToralEndomorphism
from .errors import (
    AcyclicGraphError,
    CriticalPointEncountered,
    DimensionUnsupported,
    UnsupportedSystemError,
)
from .sphere_bundle import _step_raw

_TWO_PI = 2.0 * math.pi

# Kronecker sequences driving the intra-cell sample offsets: golden
# rotation for one-dimensional offsets, the 2-d generalization for base
# offsets in the plane.
_ALPHA_1 = 0.6180339887498949
_ALPHA_2 = (0.7548776662466927, 0.5698402909980532)


def _seed_shift(seed: int, salt: int) -> float:
    h = (int(seed) * 2654435761 + salt * 2246822519) % (2**32)
    return h / 2.0**32


def sample_offsets(count: int, dim: int, seed: int, salt: int) -> np.ndarray:
    """Intra-cell sample fractions in (0, 1): cell center first, then a
    seeded Kronecker sequence."""
    alphas = (_ALPHA_1,) if dim == 1 else _ALPHA_2
    out = np.empty((count, dim))
    out[0] = 0.5
    for j in range(1, count):
        for a in range(dim):
            out[j, a] = (0.5 + j * alphas[a] + _seed_shift(seed, salt + a)) % 1.0
    return out


@dataclass(frozen=True)
class SpherePartition:
    """Cells covering the direction bundle exactly once.

    ``base_resolution`` cells per base axis; directions are the two
    signs for d=1 and ``direction_resolution`` uniform angle arcs for
    d=2.  Cell index is lexicographic: base cell index times the number
    of direction cells plus the direction cell index.
    """

    base_resolution: int
    direction_resolution: int

    def __post_init__(self):
        if self.base_resolution < 1:
            raise ValueError("base_resolution must be at least 1")
        if self.direction_resolution < 1:
            raise ValueError("direction_resolution must be at least 1")

    def base_cell_count(self, dim: int) -> int:
        return self.base_resolution ** dim

    def node_count(self, dim: int) -> int:
        return self.base_cell_count(dim) * self.direction_resolution

    def validate_for(self, sys: MapSystem):
        if sys.dim > 2:
            raise DimensionUnsupported(
                "graph discretization supports dimensions 1 and 2 only"
            )
        if sys.dim == 1 and self.direction_resolution != 2:
            raise ValueError("one-dimensional systems use the two-point direction set")
        if sys.dim == 2 and self.direction_resolution < 2:
            raise ValueError("need at least 2 direction arcs in dimension 2")


class TransitionGraph:
    """Weighted directed graph over partition cells.

    Parallel sampled edges between the same pair of cells are merged,
    keeping the min and max sampled weight and the sample count.
    """

    def __init__(self, node_count, src, dst, w_min, w_max, count, meta=None):
        self.node_count = int(node_count)
        self.src = np.asarray(src, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.w_min = np.asarray(w_min, dtype=float)
        self.w_max = np.asarray(w_max, dtype=float)
        self.count = np.asarray(count, dtype=np.int64)
        self.meta = dict(meta or {})
        if not (np.all(np.isfinite(self.w_min)) and np.all(np.isfinite(self.w_max))):
            raise ValueError("edge weights must be finite")

    @property
    def edge_count(self) -> int:
        return len(self.src)

    @classmethod
    def from_edges(cls, node_count: int, edges, meta=None) -> "TransitionGraph":
        """Build from (src, dst, weight) triples, merging parallel edges."""
        acc = {}
        for s, t, w in edges:
            key = (int(s), int(t))
            w = float(w)
            if key in acc:
                rec = acc[key]
                if w < rec[0]:
                    rec[0] = w
                if w > rec[1]:
                    rec[1] = w
                rec[2] += 1
            else:
                acc[key] = [w, w, 1]
        keys = sorted(acc)
        return cls(
            node_count,
            [k[0] for k in keys],
            [k[1] for k in keys],
            [acc[k][0] for k in keys],
            [acc[k][1] for k in keys],
            [acc[k][2] for k in keys],
            meta=meta,
        )

    def out_degrees(self) -> np.ndarray:
        deg = np.zeros(self.node_count, dtype=np.int64)
        np.add.at(deg, self.src, 1)
        return deg

    def phi_oscillation(self) -> float:
        """Largest within-edge spread of sampled weights (0 on constant maps)."""
        if self.edge_count == 0:
            return 0.0
        return float(np.max(self.w_max - self.w_min))

    def csv_header(self):
        return ["src", "dst", "w_min", "w_max", "samples"]

    def csv_rows(self):
        return [
            [int(self.src[i]), int(self.dst[i]), float(self.w_min[i]),
             float(self.w_max[i]), int(self.count[i])]
            for i in range(self.edge_count)
        ]


def build_transition_graph(
    sys: MapSystem,
    part: SpherePartition,
    samples_per_cell: int,
    seed: int = 0,
) -> TransitionGraph:
    """Sample the lifted dynamics once per cell and record the induced edges.

    Each cell contributes ``samples_per_cell`` (point, direction) pairs:
    the cell center plus seeded low-discrepancy offsets.  Every sample
    yields one edge into the cell containing its image, weighted by the
    sampled log stretch.
    """
    part.validate_for(sys)
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be at least 1")
    d = sys.dim
    res = part.base_resolution
    ndir = part.direction_resolution
    lows = sys.domain.lows
    widths = sys.domain.widths()
    steps = tuple(w / res for w in widths)

    base_off = sample_offsets(samples_per_cell, d, seed, salt=1)
    dir_off = sample_offsets(samples_per_cell, 1, seed, salt=101)[:, 0]

    acc = {}

    def record(src, dst, w):
        key = (src, dst)
        rec = acc.get(key)
        if rec is None:
            acc[key] = [w, w, 1]
        else:
            if w < rec[0]:
                rec[0] = w
            if w > rec[1]:
                rec[1] = w
            rec[2] += 1

    if d == 1:
        for cell in range(res):
            for dirc in range(2):
                v = (1.0,) if dirc == 0 else (-1.0,)
                node = cell * 2 + dirc
                for j in range(samples_per_cell):
                    x = (lows[0] + (cell + base_off[j, 0]) * steps[0],)
                    try:
                        x2, v2, phi = _step_raw(sys, x, v)
                    except CriticalPointEncountered as exc:
                        exc.cell = node
                        raise
                    c2 = int((x2[0] - lows[0]) / steps[0])
                    if c2 >= res:
                        c2 = res - 1
                    elif c2 < 0:
                        c2 = 0
                    node2 = c2 * 2 + (0 if v2[0] > 0 else 1)
                    record(node, node2, phi)
    else:
        arc_width = _TWO_PI / ndir
        for c0 in range(res):
            for c1 in range(res):
                base_cell = c0 * res + c1
                for dirc in range(ndir):
                    node = base_cell * ndir + dirc
                    for j in range(samples_per_cell):
                        x = (
                            lows[0] + (c0 + base_off[j, 0]) * steps[0],
                            lows[1] + (c1 + base_off[j, 1]) * steps[1],
                        )
                        theta = (dirc + dir_off[j]) * arc_width
                        v = (math.cos(theta), math.sin(theta))
                        try:
                            x2, v2, phi = _step_raw(sys, x, v)
                        except CriticalPointEncountered as exc:
                            exc.cell = node
                            raise
                        i0 = int((x2[0] - lows[0]) / steps[0])
                        i1 = int((x2[1] - lows[1]) / steps[1])
                        i0 = min(max(i0, 0), res - 1)
                        i1 = min(max(i1, 0), res - 1)
                        theta2 = math.atan2(v2[1], v2[0]) % _TWO_PI
                        a2 = int(theta2 / arc_width)
                        if a2 >= ndir:
                            a2 = ndir - 1
                        node2 = (i0 * res + i1) * ndir + a2
                        record(node, node2, phi)

    keys = sorted(acc)
    meta = {
        "base_resolution": res,
        "direction_resolution": ndir,
        "samples_per_cell": samples_per_cell,
        "seed": int(seed),
        "dim": d,
    }
    return TransitionGraph(
        part.node_count(d),
        [k[0] for k in keys],
        [k[1] for k in keys],
        [acc[k][0] for k in keys],
        [acc[k][1] for k in keys],
        [acc[k][2] for k in keys],
        meta=meta,
    )


def build_restricted_graph(
    sys: MapSystem,
    direction_field,
    base_resolution: int,
    samples_per_cell: int = 4,
    seed: int = 0,
) -> TransitionGraph:
    """Transition graph with directions restricted to a one-dimensional
    invariant line field.

    ``direction_field`` maps a base point (coordinate tuple) to a unit
    vector spanning the line there; nodes are base cells times the two
    signs of that vector.
    """
    if sys.dim > 2:
        raise DimensionUnsupported("restricted graphs support dimensions 1 and 2 only")
    if samples_per_cell < 1:
        raise ValueError("samples_per_cell must be at least 1")
    d = sys.dim
    res = base_resolution
    lows = sys.domain.lows
    widths = sys.domain.widths()
    steps = tuple(w / res for w in widths)
    base_off = sample_offsets(samples_per_cell, d, seed, salt=1)

    base_cells = res ** d
    acc = {}

    def record(src, dst, w):
        rec = acc.get((src, dst))
        if rec is None:
            acc[(src, dst)] = [w, w, 1]
        else:
            if w < rec[0]:
                rec[0] = w
            if w > rec[1]:
                rec[1] = w
            rec[2] += 1

    for flat in range(base_cells):
        # row-major flat index: the first axis is the most significant
        cells = []
        rem = flat
        for _ in range(d):
            cells.append(rem % res)
            rem //= res
        cells.reverse()
        for j in range(samples_per_cell):
            x = tuple(
                lows[a] + (cells[a] + base_off[j, a]) * steps[a] for a in range(d)
            )
            u = np.asarray(direction_field(x), dtype=float)
            u = u / np.linalg.norm(u)
            for sign_idx, sgn in enumerate((1.0, -1.0)):
                v = tuple(sgn * c for c in u)
                node = flat * 2 + sign_idx
                try:
                    x2, v2, phi = _step_raw(sys, x, v)
                except CriticalPointEncountered as exc:
                    exc.cell = node
                    raise
                cell2 = 0
                for a in range(d):
                    i = int((x2[a] - lows[a]) / steps[a])
                    i = min(max(i, 0), res - 1)
                    cell2 = cell2 * res + i
                u2 = np.asarray(direction_field(x2), dtype=float)
                u2 = u2 / np.linalg.norm(u2)
                dot = float(np.dot(np.asarray(v2), u2))
                node2 = cell2 * 2 + (0 if dot >= 0 else 1)
                record(node, node2, phi)

    keys = sorted(acc)
    meta = {
        "base_resolution": res,
        "direction_resolution": 2,
        "samples_per_cell": samples_per_cell,
        "seed": int(seed),
        "dim": d,
        "restricted": True,
    }
    return TransitionGraph(
        base_cells * 2,
        [k[0] for k in keys],
        [k[1] for k in keys],
        [acc[k][0] for k in keys],
        [acc[k][1] for k in keys],
        [acc[k][2] for k in keys],
        meta=meta,
    )


# --- minimum mean cycle ------------------------------------------------


@dataclass(frozen=True)
class ExtremalCycleResult:
    """A witnessing simple cycle and its mean weight."""

    value: float
    cycle: tuple
    kind: str  # "min" or "max"
    meta: dict = field(default_factory=dict)


def _strongly_connected_components(n: int, adj):
    """Iterative Tarjan; components returned with sorted node lists."""
    index = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack[v] = True
            advanced = False
            neighbors = adj[v]
            i = pi
            while i < len(neighbors):
                w = neighbors[i]
                i += 1
                if index[w] == -1:
                    work[-1] = (v, i)
                    work.append((w, 0))
                    advanced = True
                    break
                if onstack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comps


def _karp_walk(n_local, eu, ev, ew):
    """Karp's recurrence on one strongly connected component.

    Returns the minimizing node's n-edge walk (local indices, length
    n+1) whose cycles attain the minimum cycle mean, or None when the
    component carries no usable walk.
    """
    inf = np.inf
    d = np.full((n_local + 1, n_local), inf)
    d[0, 0] = 0.0
    for k in range(1, n_local + 1):
        dk = np.full(n_local, inf)
        cand = d[k - 1][eu] + ew
        np.minimum.at(dk, ev, cand)
        d[k] = dk
    dn = d[n_local]
    valid = np.isfinite(dn)
    if not np.any(valid):
        return None
    with np.errstate(invalid="ignore"):
        num = dn[None, :] - d[:n_local, :]
        den = (n_local - np.arange(n_local)).astype(float)[:, None]
        ratios = np.where(np.isfinite(d[:n_local, :]), num / den, -inf)
    colmax = ratios.max(axis=0)
    colmax = np.where(valid, colmax, inf)
    v_star = int(np.argmin(colmax))
    walk = [v_star]
    cur = v_star
    for k in range(n_local, 0, -1):
        target = d[k, cur]
        mask = ev == cur
        us = eu[mask]
        cands = d[k - 1][us] + ew[mask]
        hits = us[cands == target]
        u = int(hits.min())
        walk.append(u)
        cur = u
    walk.reverse()
    return walk


def _cycles_in_walk(walk):
    cycles = []
    walk = list(walk)
    while True:
        seen = {}
        hit = None
        for i, node in enumerate(walk):
            if node in seen:
                hit = (seen[node], i)
                break
            seen[node] = i
        if hit is None:
            return cycles
        i, j = hit
        cycles.append(walk[i:j])
        walk = walk[:i] + walk[j:]


def _canonical_rotation(cycle):
    k = cycle.index(min(cycle))
    return tuple(cycle[k:] + cycle[:k])


def _extremal_cycle(graph: TransitionGraph, maximize: bool) -> ExtremalCycleResult:
    n = graph.node_count
    weights = (-graph.w_max) if maximize else graph.w_min
    src = graph.src
    dst = graph.dst

    wlookup = {(int(s), int(t)): float(w) for s, t, w in zip(src, dst, weights)}

    adj = [[] for _ in range(n)]
    for s, t in zip(src, dst):
        adj[int(s)].append(int(t))
    for lst in adj:
        lst.sort()

    comps = _strongly_connected_components(n, adj)
    cid = np.empty(n, dtype=np.int64)
    for i, comp in enumerate(comps):
        for v in comp:
            cid[v] = i

    candidates = []

    def add_candidate(cycle_nodes):
        seq = _canonical_rotation(list(cycle_nodes))
        ln = len(seq)
        ws = [wlookup[(seq[i], seq[(i + 1) % ln])] for i in range(ln)]
        mean = math.fsum(ws) / ln
        candidates.append((mean, ln, seq))

    for s, t in zip(src, dst):
        if s == t:
            add_candidate([int(s)])

    same = cid[src] == cid[dst]
    inner = np.flatnonzero(same)
    if len(inner):
        groups = {}
        for ei in inner:
            groups.setdefault(int(cid[src[ei]]), []).append(int(ei))
        for comp_id, eids in sorted(groups.items()):
            comp = comps[comp_id]
            if len(comp) < 2:
                continue  # self-loops already collected
            local = {v: i for i, v in enumerate(comp)}
            eu = np.array([local[int(src[e])] for e in eids], dtype=np.int64)
            ev = np.array([local[int(dst[e])] for e in eids], dtype=np.int64)
            ew = weights[eids]
            walk = _karp_walk(len(comp), eu, ev, ew)
            if walk is None:
                continue
            for cyc in _cycles_in_walk([comp[i] for i in walk]):
                add_candidate(cyc)

    if not candidates:
        raise AcyclicGraphError("transition graph has no directed cycle")

    best = min(candidates)
    mean, _, seq = best
    value = -mean if maximize else mean
    return ExtremalCycleResult(
        value=value,
        cycle=seq,
        kind="max" if maximize else "min",
        meta=dict(graph.meta),
    )


def min_mean_cycle(graph: TransitionGraph) -> ExtremalCycleResult:
    """Minimum mean-weight simple cycle (per-edge minima as weights).

    Karp's recurrence per strongly connected component, minimum across
    components; ties broken by shortest cycle, then lexicographically
    smallest node sequence.  Memory is O(n^2) per component.
    """
    return _extremal_cycle(graph, maximize=False)


def max_mean_cycle(graph: TransitionGraph) -> ExtremalCycleResult:
    """Maximum mean-weight simple cycle (per-edge maxima, negated search)."""
    return _extremal_cycle(graph, maximize=True)


@dataclass(frozen=True)
class ExtremalEstimates:
    """Extremal cycle means of the sampled lifted dynamics.

    Non-rigorous sampling estimates; ``phi_oscillation`` is the largest
    within-edge weight spread and bounds the sampling slack observed on
    this run.
    """

    min_estimate: float
    max_estimate: float
    min_cycle: tuple
    max_cycle: tuple
    base_resolution: int
    direction_resolution: int
    samples_per_cell: int
    seed: int
    phi_oscillation: float
    node_count: int
    edge_count: int

    def to_json_dict(self) -> dict:
        return {
            "min_estimate": self.min_estimate,
            "max_estimate": self.max_estimate,
            "min_cycle": list(self.min_cycle),
            "max_cycle": list(self.max_cycle),
            "base_resolution": self.base_resolution,
            "direction_resolution": self.direction_resolution,
            "samples_per_cell": self.samples_per_cell,
            "seed": self.seed,
            "phi_oscillation": self.phi_oscillation,
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "tag": "estimate",
        }


def estimate_extremal_exponents(
    sys: MapSystem,
    part: SpherePartition,
    samples_per_cell: int,
    seed: int = 0,
    graph: TransitionGraph = None,
) -> ExtremalEstimates:
    """Build the transition graph and search both extremal cycles."""
    if graph is None:
        graph = build_transition_graph(sys, part, samples_per_cell, seed=seed)
    lo = min_mean_cycle(graph)
    hi = max_mean_cycle(graph)
    return ExtremalEstimates(
        min_estimate=lo.value,
        max_estimate=hi.value,
        min_cycle=lo.cycle,
        max_cycle=hi.cycle,
        base_resolution=part.base_resolution,
        direction_resolution=part.direction_resolution,
        samples_per_cell=samples_per_cell,
        seed=int(seed),
        phi_oscillation=graph.phi_oscillation(),
        node_count=graph.node_count,
        edge_count=graph.edge_count,
    )


# --- periodic orbits ----------------------------------------------------


@dataclass(frozen=True)
class PeriodicOrbit:
    points: np.ndarray  # (period, d)
    period: int
    exponents: tuple  # ascending

    def to_json_dict(self):
        return {
            "points": self.points.tolist(),
            "period": self.period,
            "exponents": list(self.exponents),
        }


def periodic_orbits(sys: MapSystem, max_period: int):
    """All periodic orbits up to ``max_period`` for supported systems.

    One-dimensional uniformly expanding maps are handled by iterating
    composed inverse branches to convergence (tolerance 1e-13); 2-d
    integer linear maps by exact enumeration of the rational fixed
    points of each power.  Used as an independent check on the graph
    estimates.
    """
    if max_period < 1 or max_period > 16:
        raise ValueError("max_period must lie in [1, 16]")
    if sys.dim == 1 and hasattr(sys, "inverse_branch"):
        return _orbits_expanding_1d(sys, max_period)
    if isinstance(sys, ToralEndomorphism) and sys.dim == 2:
        return _orbits_linear_2d(sys, max_period)
    raise UnsupportedSystemError(
        "periodic orbit enumeration handles 1-d expanding maps and 2-d linear maps"
    )


def _circle_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


def _orbits_expanding_1d(sys, max_period):
    floor = sys.expansion_floor()
    if floor <= 1.0:
        raise UnsupportedSystemError("map is not uniformly expanding")
    branches = sys.branch_count

    points = []
    for period in range(1, max_period + 1):
        for itinerary in iter_product(range(branches), repeat=period):
            # contraction on the closed lift interval [0, 1]; the seam
            # itinerary converges to 1.0, the same circle point as 0
            z = 0.5
            for _ in range(300):
                z_new = z
                for b in reversed(itinerary):
                    z_new = sys.inverse_branch(z_new, b)
                if abs(z_new - z) <= 1e-13:
                    z = z_new
                    break
                z = z_new
            points.append(z % 1.0)

    points.sort()
    unique = []
    for p in points:
        if unique and _circle_dist(p, unique[-1]) <= 1e-9:
            continue
        unique.append(p)
    if len(unique) > 1 and _circle_dist(unique[0], unique[-1]) <= 1e-9:
        unique.pop()

    def nearest(y):
        best = min(unique, key=lambda q: _circle_dist(q, y))
        if _circle_dist(best, y) > 1e-7:
            raise RuntimeError("periodic point set not closed under the map")
        return best

    orbits = []
    visited = set()
    for p in unique:
        if p in visited:
            continue
        cycle = [p]
        visited.add(p)
        y = sys.apply_raw((p,))[0]
        q = nearest(y)
        while q != p:
            cycle.append(q)
            visited.add(q)
            y = sys.apply_raw((q,))[0]
            q = nearest(y)
        logs = [math.log(abs(sys.jacobian_raw((c,))[0][0])) for c in cycle]
        exponent = math.fsum(logs) / len(cycle)
        orbits.append(
            PeriodicOrbit(
                points=np.array([[c] for c in cycle]),
                period=len(cycle),
                exponents=(exponent,),
            )
        )
    orbits.sort(key=lambda o: float(o.points[0, 0]))
    return orbits


def _orbits_linear_2d(sys: ToralEndomorphism, max_period):
    a = sys.matrix_int
    eigvals = np.linalg.eigvals(a.astype(float))
    mags = np.abs(eigvals)
    if np.any(mags < 1e-12):
        raise UnsupportedSystemError("linear map is singular")
    exponents = tuple(sorted(math.log(m) for m in mags))

    seen = set()
    orbits = []

    def reduce_frac(n0, n1, q):
        g = gcd(gcd(abs(n0), abs(n1)), q)
        return (n0 // g, n1 // g, q // g)

    for period in range(1, max_period + 1):
        mp = np.linalg.matrix_power(a, period) - np.eye(2, dtype=np.int64)
        m00, m01 = int(mp[0, 0]), int(mp[0, 1])
        m10, m11 = int(mp[1, 0]), int(mp[1, 1])
        det = m00 * m11 - m01 * m10
        if det == 0:
            continue
        corners = [
            (0, 0),
            (m00, m10),
            (m01, m11),
            (m00 + m01, m10 + m11),
        ]
        k0_lo = min(c[0] for c in corners)
        k0_hi = max(c[0] for c in corners)
        k1_lo = min(c[1] for c in corners)
        k1_hi = max(c[1] for c in corners)
        q = abs(det)
        for k0 in range(k0_lo, k0_hi + 1):
            for k1 in range(k1_lo, k1_hi + 1):
                # x = adj(M) k / det with adj = [[m11, -m01], [-m10, m00]]
                n0 = m11 * k0 - m01 * k1
                n1 = -m10 * k0 + m00 * k1
                if det < 0:
                    n0, n1 = -n0, -n1
                if not (0 <= n0 < q and 0 <= n1 < q):
                    continue
                key = reduce_frac(n0, n1, q)
                if key in seen:
                    continue
                # follow the exact rational orbit
                cycle = []
                cur = (n0, n1, q)
                while True:
                    cycle.append(cur)
                    seen.add(reduce_frac(*cur))
                    c0, c1, den = cur
                    nxt0 = (int(a[0, 0]) * c0 + int(a[0, 1]) * c1) % den
                    nxt1 = (int(a[1, 0]) * c0 + int(a[1, 1]) * c1) % den
                    cur = (nxt0, nxt1, den)
                    if cur == cycle[0]:
                        break
                pts = np.array([[c0 / den, c1 / den] for c0, c1, den in cycle])
                orbits.append(
                    PeriodicOrbit(points=pts, period=len(cycle), exponents=exponents)
                )
    orbits.sort(key=lambda o: (o.period, float(o.points[0, 0]), float(o.points[0, 1])))
    return orbits
