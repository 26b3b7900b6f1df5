import math

import numpy as np
import pytest

import lyapcert as lc
from conftest import (
    CAT_TOP_EXPONENT,
    all_simple_cycle_means,
    cat_map,
    random_edge_list,
)

LOG2 = math.log(2.0)
LOG3 = math.log(3.0)


def test_partition_validation():
    with pytest.raises(ValueError):
        lc.SpherePartition(0, 2)
    part = lc.SpherePartition(8, 3)
    with pytest.raises(ValueError):
        part.validate_for(lc.DoublingMap())
    with pytest.raises(lc.DimensionUnsupported):
        lc.SpherePartition(4, 2).validate_for(lc.ToralEndomorphism([[2, 0, 0], [0, 3, 0], [0, 0, 5]]))


def test_doubling_graph_structure():
    g = lc.build_transition_graph(lc.DoublingMap(), lc.SpherePartition(8, 2), 1)
    assert g.node_count == 16
    assert np.all(np.abs(g.w_min - LOG2) < 1e-15)
    assert np.all(np.abs(g.w_max - LOG2) < 1e-15)
    assert np.all(g.out_degrees() >= 1)
    # positive derivative: the sign component never flips
    assert np.all((g.src % 2) == (g.dst % 2))


def test_cat_graph_weight_bounds():
    # oracle: singular values of the matrix bound |Av| for unit v
    g = lc.build_transition_graph(cat_map(), lc.SpherePartition(16, 32), 4)
    assert g.node_count == 16 * 16 * 32
    assert g.w_min.min() >= -(CAT_TOP_EXPONENT + 1e-9)
    assert g.w_max.max() <= CAT_TOP_EXPONENT + 1e-9


def test_product_graph_weight_bounds():
    prod = lc.ProductMap(lc.DoublingMap(), lc.ToralEndomorphism([[3]]))
    g = lc.build_transition_graph(prod, lc.SpherePartition(8, 16), 2)
    assert g.w_min.min() >= LOG2 - 1e-12
    assert g.w_max.max() <= LOG3 + 1e-12


def test_graph_requires_samples():
    with pytest.raises(ValueError):
        lc.build_transition_graph(lc.DoublingMap(), lc.SpherePartition(8, 2), 0)


def test_graph_critical_point_reports_cell():
    # derivative 2x - 1/4 vanishes exactly at the first cell center
    poly = lc.PolynomialMap([0.1, -0.25, 1.0], (0.0, 1.0))
    with pytest.raises(lc.CriticalPointEncountered) as err:
        lc.build_transition_graph(poly, lc.SpherePartition(4, 2), 1)
    assert err.value.cell is not None


def test_min_mean_cycle_prefers_light_self_loop():
    g = lc.TransitionGraph.from_edges(
        2, [(0, 0, LOG2), (1, 1, LOG3), (0, 1, 10.0), (1, 0, 10.0)]
    )
    lo = lc.min_mean_cycle(g)
    assert lo.value == pytest.approx(LOG2, abs=1e-15)
    assert lo.cycle == (0,)
    # with the heavy cross edges present the max cycle is the 2-cycle
    hi = lc.max_mean_cycle(g)
    assert hi.value == pytest.approx(10.0, abs=1e-15)
    assert hi.cycle == (0, 1)


def test_max_mean_cycle_two_self_loops():
    g = lc.TransitionGraph.from_edges(2, [(0, 0, LOG2), (1, 1, LOG3)])
    hi = lc.max_mean_cycle(g)
    assert hi.value == pytest.approx(LOG3, abs=1e-15)
    assert hi.cycle == (1,)
    lo = lc.min_mean_cycle(g)
    assert lo.value == pytest.approx(LOG2, abs=1e-15)
    assert lo.cycle == (0,)


def test_two_cycle_mean():
    g = lc.TransitionGraph.from_edges(2, [(0, 1, 0.2), (1, 0, 0.4)])
    lo = lc.min_mean_cycle(g)
    assert lo.value == pytest.approx(0.3, abs=1e-12)
    assert len(lo.cycle) == 2


def test_acyclic_graph_raises():
    g = lc.TransitionGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    with pytest.raises(lc.AcyclicGraphError):
        lc.min_mean_cycle(g)


def test_random_graphs_match_enumeration():
    rng = np.random.RandomState(424242)
    cyclic = 0
    for _ in range(150):
        n, edges = random_edge_list(rng)
        g = lc.TransitionGraph.from_edges(n, edges)
        means = all_simple_cycle_means(n, edges)
        if not means:
            with pytest.raises(lc.AcyclicGraphError):
                lc.min_mean_cycle(g)
            continue
        cyclic += 1
        lo = lc.min_mean_cycle(g)
        hi = lc.max_mean_cycle(g)
        assert abs(lo.value - min(means)) <= 1e-12
        assert abs(hi.value - max(means)) <= 1e-12
        # lower/upper bound property against every simple cycle
        assert all(lo.value <= m + 1e-12 for m in means)
        assert all(hi.value >= m - 1e-12 for m in means)
    assert cyclic > 50


def test_cycle_mean_consistency():
    rng = np.random.RandomState(31)
    for _ in range(40):
        n, edges = random_edge_list(rng)
        g = lc.TransitionGraph.from_edges(n, edges)
        lookup_min = {(int(s), int(t)): float(w) for s, t, w in zip(g.src, g.dst, g.w_min)}
        try:
            lo = lc.min_mean_cycle(g)
        except lc.AcyclicGraphError:
            continue
        cyc = lo.cycle
        ws = [lookup_min[(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))]
        assert abs(math.fsum(ws) / len(ws) - lo.value) <= 1e-12
        # witness is simple
        assert len(set(cyc)) == len(cyc)


def test_doubling_tiebreak_is_canonical():
    # all cycle means tie at log 2; the canonical witness is the
    # smallest-index self-loop
    g = lc.build_transition_graph(lc.DoublingMap(), lc.SpherePartition(8, 2), 1)
    lo = lc.min_mean_cycle(g)
    self_loops = sorted(int(s) for s, t in zip(g.src, g.dst) if s == t)
    assert len(lo.cycle) == 1
    assert lo.cycle[0] == self_loops[0]


def test_estimates_doubling_exact():
    for res in (8, 32, 64, 257):
        est = lc.estimate_extremal_exponents(lc.DoublingMap(), lc.SpherePartition(res, 2), 2)
        assert est.min_estimate == pytest.approx(LOG2, abs=1e-12)
        assert est.max_estimate == pytest.approx(LOG2, abs=1e-12)
        assert est.phi_oscillation == 0.0


def test_min_leq_max_always():
    for sys_ in (lc.DoublingMap(), lc.PerturbedDoubling(0.05)):
        est = lc.estimate_extremal_exponents(sys_, lc.SpherePartition(64, 2), 4)
        assert est.min_estimate <= est.max_estimate
    # equality only when the sampled log stretch is constant
    est = lc.estimate_extremal_exponents(lc.PerturbedDoubling(0.05), lc.SpherePartition(64, 2), 4)
    assert est.min_estimate < est.max_estimate


def test_perturbed_extremal_vs_periodic_oracle():
    pd = lc.PerturbedDoubling(0.05)
    orbits = lc.periodic_orbits(pd, 8)
    oracle_min = min(o.exponents[0] for o in orbits)
    est = lc.estimate_extremal_exponents(pd, lc.SpherePartition(256, 2), 4)
    assert abs(est.min_estimate - oracle_min) < 5e-3
    # discrete minimum principle with the reported slack
    for o in orbits:
        assert o.exponents[0] >= est.min_estimate - est.phi_oscillation


def test_monotone_refinement():
    pd = lc.PerturbedDoubling(0.05)
    oracle_min = min(o.exponents[0] for o in lc.periodic_orbits(pd, 8))
    gaps = []
    for res in (64, 128, 256):
        est = lc.estimate_extremal_exponents(pd, lc.SpherePartition(res, 2), 4)
        gaps.append(abs(est.min_estimate - oracle_min))
    assert gaps[0] >= gaps[1] >= gaps[2]


def test_cat_extremal_brackets_eigen_rates():
    # oracle: +-log((3+sqrt5)/2) from the eigenvalues
    est = lc.estimate_extremal_exponents(cat_map(), lc.SpherePartition(16, 64), 4)
    assert est.min_estimate <= -0.95
    assert est.max_estimate >= 0.95
    assert abs(est.min_estimate + CAT_TOP_EXPONENT) < 0.05
    assert abs(est.max_estimate - CAT_TOP_EXPONENT) < 0.05


def test_same_seed_reproducible_different_seed_not_identical():
    pd = lc.PerturbedDoubling(0.05)
    part = lc.SpherePartition(64, 2)
    g1 = lc.build_transition_graph(pd, part, 4, seed=7)
    g2 = lc.build_transition_graph(pd, part, 4, seed=7)
    assert np.array_equal(g1.w_min, g2.w_min) and np.array_equal(g1.src, g2.src)
    g3 = lc.build_transition_graph(pd, part, 4, seed=8)
    assert not (np.array_equal(g1.w_min, g3.w_min) and np.array_equal(g1.src, g3.src))


def test_graph_csv_format():
    g = lc.build_transition_graph(lc.DoublingMap(), lc.SpherePartition(4, 2), 2)
    assert g.csv_header() == ["src", "dst", "w_min", "w_max", "samples"]
    rows = g.csv_rows()
    assert len(rows) == g.edge_count
    assert all(len(r) == 5 for r in rows)


def test_periodic_orbits_doubling():
    orbits = lc.periodic_orbits(lc.DoublingMap(), 3)
    points = sorted(float(p[0]) for o in orbits for p in o.points)
    expected = sorted([0.0, 1 / 3, 2 / 3] + [k / 7 for k in range(1, 7)])
    assert points == pytest.approx(expected, abs=1e-11)
    for o in orbits:
        assert o.exponents[0] == pytest.approx(LOG2, abs=1e-12)


def test_periodic_orbits_perturbed_fixed_point():
    orbits = lc.periodic_orbits(lc.PerturbedDoubling(0.05), 1)
    assert len(orbits) == 1
    assert orbits[0].points[0, 0] == pytest.approx(0.0, abs=1e-12)
    assert orbits[0].exponents[0] == pytest.approx(math.log(2 + 0.1 * math.pi), abs=1e-12)


def test_periodic_orbits_cat():
    orbits = lc.periodic_orbits(cat_map(), 2)
    fixed = [o for o in orbits if o.period == 1]
    assert len(fixed) == 1
    assert np.array_equal(fixed[0].points, np.zeros((1, 2)))
    assert fixed[0].exponents == pytest.approx(
        (-CAT_TOP_EXPONENT, CAT_TOP_EXPONENT), abs=1e-12
    )
    # det(A^2 - I) = -5: five period-<=2 points in total
    assert sum(o.period for o in orbits) == 5


def test_periodic_orbits_unsupported():
    with pytest.raises(lc.UnsupportedSystemError):
        lc.periodic_orbits(lc.PolynomialMap([0.0, 1.0, 1.0], "torus"), 3)
    with pytest.raises(ValueError):
        lc.periodic_orbits(lc.DoublingMap(), 17)


def test_restricted_graph_on_unstable_line():
    cat = cat_map()
    _, units = cat.eigen_data()
    g = lc.build_restricted_graph(cat, lambda x: units[0], 16, 2)
    lo = lc.min_mean_cycle(g)
    hi = lc.max_mean_cycle(g)
    assert lo.value == pytest.approx(CAT_TOP_EXPONENT, abs=1e-12)
    assert hi.value == pytest.approx(CAT_TOP_EXPONENT, abs=1e-12)
