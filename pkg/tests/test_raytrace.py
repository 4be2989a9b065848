import json
import math

import numpy as np
import pytest

from conormal_lab.errors import NotHyperbolic, SingularDerivative, TangentialIncidence
from conormal_lab.potential import ConormalPotential1D
from conormal_lab.raytrace import (CallableMetric, Elliptic, FlatMetric, Glancing, HamiltonianSpec, Hyperbolic,
                                   PhasePoint, PowerProfile, RayConfig, ZeroProfile, branch_gbb,
                                   classify_boundary_point, cross_interface_caratheodory, crossing_xi_jump,
                                   eval_hamilton_field, eval_p, get_demo, integrate_bicharacteristic,
                                   remark36_derivative, remark36_family, reverse_closure, tangency_exact,
                                   trace_gbb_tree)


def flat_power(alpha, energy=1.0):
    return HamiltonianSpec(2, PowerProfile(ConormalPotential1D(alpha)), energy)


def free(dim=2, energy=1.0):
    return HamiltonianSpec(dim, ZeroProfile(), energy)


def test_eval_p_examples():
    assert eval_p(free(), PhasePoint(0.3, 0.0, 0.8, 0.6)) == pytest.approx(0.0, abs=1e-15)
    assert eval_p(free(energy=0.0), PhasePoint(0.0, 0.0, 0.0, 0.0)) == 0.0
    spec = get_demo("glancing").spec
    s = 0.7
    assert eval_p(spec, PhasePoint(s**4, 2 * s, 2 * s**3, 1.0)) == pytest.approx(0.0, abs=1e-14)


def test_hamilton_field_examples():
    spec = get_demo("glancing").spec
    s = 0.7
    f = eval_hamilton_field(spec, PhasePoint(s**4, 2 * s, 2 * s**3, 1.0))
    np.testing.assert_allclose(f, [4 * s**3, 2, 6 * s**2, 0], rtol=1e-13)
    np.testing.assert_allclose(eval_hamilton_field(free(), PhasePoint(0.1, 0.2, 0.3, 0.4)), [0.6, 0.8, 0, 0])
    spec2 = HamiltonianSpec(2, PowerProfile(ConormalPotential1D(2.0, 0.5, 1.5)))
    assert eval_hamilton_field(spec2, PhasePoint(0.3, 0.0, 0.5, 0.0))[2] == pytest.approx(-0.6, rel=1e-14)
    with pytest.raises(SingularDerivative):
        eval_hamilton_field(flat_power(0.5), PhasePoint(0.0, 0.0, 0.6, 0.8))


def test_callable_metric_differences():
    k = lambda x, y: np.array([[1 + x * y[0] ** 2]])  # noqa: E731
    m = CallableMetric(1, k)
    assert m.dk_dx(0.3, [0.5])[0, 0] == pytest.approx(0.25, rel=1e-9)
    assert m.dk_dy(0.3, [0.5])[0, 0, 0] == pytest.approx(0.3, rel=1e-9)


def test_classification():
    spec = free()
    assert classify_boundary_point(spec, [0.0], [0.6]) == Hyperbolic(pytest.approx(0.8), pytest.approx(-0.64))
    assert isinstance(classify_boundary_point(spec, [0.0], [1.0]), Glancing)
    assert isinstance(classify_boundary_point(spec, [0.0], [1.5]), Elliptic)
    assert classify_boundary_point(spec, [0.0], [1.5]).ptilde == pytest.approx(1.25)


def test_free_motion():
    seg = integrate_bicharacteristic(free(), PhasePoint(-1.0, 0.0, 1.0, 0.0), (0.0, 0.4))
    assert seg.status == "completed"
    np.testing.assert_allclose(seg.end.to_array(), [-0.2, 0, 1, 0], atol=1e-13)


def test_turning_point_in_power_region():
    spec = flat_power(0.5)
    seg = integrate_bicharacteristic(spec, PhasePoint(0.0, 0.0, 0.6, 0.8), (0.0, 2.0))
    assert seg.status == "hit_interface"
    assert seg.z[:, 0].max() == pytest.approx(0.1296, abs=1e-5)
    # exact return time: 2 * int_0^0.36 u / sqrt(0.36 - u) du = 0.576
    assert seg.s[-1] == pytest.approx(0.576, abs=1e-9)


def test_caratheodory_crossing():
    spec = flat_power(0.5)
    pt = PhasePoint(0.0, 0.3, 0.6, 0.8)
    out, ds = cross_interface_caratheodory(spec, pt, +1)
    xp = spec.x_patch
    assert out.x == xp
    assert out.eta == pt.eta
    assert out.xi**2 == pytest.approx(0.36 - xp**0.5, abs=1e-8)
    assert abs(eval_p(spec, out)) <= 1e-8
    assert ds > 0
    with pytest.raises(TangentialIncidence):
        cross_interface_caratheodory(spec, PhasePoint(0.0, 0.0, 1e-5, 1.0), +1)
    with pytest.raises(ValueError):
        cross_interface_caratheodory(spec, pt, -1)


def test_start_on_singular_set():
    with pytest.raises(SingularDerivative):
        integrate_bicharacteristic(flat_power(0.5), PhasePoint(0.0, 0.0, 0.0, 1.0), (0.0, 1.0))


def test_segments_keep_sign():
    d = get_demo("transverse")
    tree = trace_gbb_tree(d.spec, d.seed, d.s_max, max_depth=2)
    for n in tree.nodes:
        x = n.segment.z[1:-1, 0]
        assert np.all(x > 0) or np.all(x < 0)


def test_branch_gbb():
    spec = free()
    kids = branch_gbb(spec, PhasePoint(0.0, 0.2, 0.8, 0.6), 1.0, alpha=0.5)
    assert [k[1] for k in kids] == ["transmitted", "reflected"]
    assert [k[0].xi for k in kids] == [pytest.approx(0.8), pytest.approx(-0.8)]
    assert [k[2] for k in kids] == [1.0, 1.5]
    for pt, _, _ in kids:
        assert pt.y == (0.2,) and pt.eta == (0.6,)
    # second reflection accumulates
    kids2 = branch_gbb(spec, kids[1][0], kids[1][2], alpha=0.5)
    assert kids2[1][2] == 2.0
    with pytest.raises(NotHyperbolic):
        branch_gbb(spec, PhasePoint(0.0, 0.0, 0.0, 1.0), 0.0, alpha=0.5)


def test_tree_free_single_segment():
    tree = trace_gbb_tree(free(), PhasePoint(-1.0, 0.0, 0.6, 0.8), 3.0)
    assert len(tree.nodes) == 1 and tree.nodes[0].status == "completed"


def test_tree_transverse_structure():
    d = get_demo("transverse")
    tree = trace_gbb_tree(d.spec, d.seed, d.s_max, max_depth=2)
    root = tree.nodes[0]
    kids = tree.children(root.id)
    assert sorted(k.branch_kind for k in kids) == ["reflected", "transmitted"]
    trans = next(k for k in kids if k.branch_kind == "transmitted")
    refl = next(k for k in kids if k.branch_kind == "reflected")
    assert trans.status == "hit_interface"
    assert refl.status == "completed"
    assert len(tree.children(trans.id)) == 2
    assert tree.children(refl.id) == []
    assert max(n.depth for n in tree.nodes) == 2


def test_tree_depth_and_strength_cap():
    d = get_demo("transverse")
    assert len(trace_gbb_tree(d.spec, d.seed, d.s_max, max_depth=0).nodes) == 1
    capped = trace_gbb_tree(d.spec, d.seed, d.s_max, max_depth=3, strength_cap=0.0)
    assert all(n.branch_kind != "reflected" for n in capped.nodes)


def test_tree_rejects_off_shell_seed():
    d = get_demo("transverse")
    with pytest.raises(ValueError):
        trace_gbb_tree(d.spec, PhasePoint(-0.2, 0.0, 0.6, 0.9), 1.0)


def test_glancing_demo_nonunique():
    d = get_demo("glancing")
    tree = trace_gbb_tree(d.spec, d.seed, d.s_max)
    assert len(tree.nodes) == 1
    assert tree.nodes[0].status == "glancing_nonunique"
    fam = tree.meta["nonunique_families"][0]["members"]
    assert {m["branch_kind"] for m in fam} == {"stuck", "detaching"}
    for m in fam:
        for row in m["samples"]:
            assert abs(eval_p(d.spec, row[1:])) < 1e-12


def test_glancing_arrival_low_alpha():
    # a ray grazing x = 0 from the left in a power region with alpha <= 2 is not continued
    spec = HamiltonianSpec(2, PowerProfile(ConormalPotential1D(1.5)), metric=get_demo("tangency").spec.metric)
    seg = integrate_bicharacteristic(spec, PhasePoint(-1.0, 0.0, 1.0, 1.0), (0.0, 2.0))
    assert seg.status == "glancing_nonunique"


def test_tangency_demo():
    d = get_demo("tangency")
    tree = trace_gbb_tree(d.spec, d.seed, d.s_max)
    assert len(tree.nodes) == 1
    seg = tree.nodes[0].segment
    assert seg.status == "completed"
    assert len(seg.glancing_passages) == 1
    np.testing.assert_allclose(seg.z, tangency_exact(seg.s), atol=1e-9)


def test_remark36_family():
    np.testing.assert_array_equal(remark36_family(0.0, 1.0).to_array(), [1, 2, 2, 1])
    spec = get_demo("glancing").spec
    for s0 in (math.inf, 0.0, 0.4):
        for s in np.linspace(-1, 2, 31):
            if s == s0:
                continue
            pt = remark36_family(s0, s)
            assert eval_p(spec, pt) == pytest.approx(0.0, abs=1e-12)
            np.testing.assert_allclose(remark36_derivative(s0, s), eval_hamilton_field(spec, pt), atol=1e-10)


def test_detaching_branch_tracks_family():
    spec = get_demo("glancing").spec
    seg = integrate_bicharacteristic(spec, remark36_family(0.0, 0.01), (0.01, 1.0))
    exact = np.array([remark36_family(0.0, s).to_array() for s in seg.s])
    assert np.max(np.abs(seg.z - exact)) <= 1e-8


def test_uniqueness_lipschitz_regime():
    # alpha = 3: perturbations grow at most like L * delta over unit time
    d = get_demo("tangency")
    delta = 1e-7
    a = integrate_bicharacteristic(d.spec, d.seed, (0.0, 1.0))
    p = PhasePoint(d.seed.x, d.seed.y[0] + delta, d.seed.xi, d.seed.eta)
    b = integrate_bicharacteristic(d.spec, p, (0.0, 1.0))
    assert np.max(np.abs(a.end.to_array() - b.end.to_array())) < 10 * delta


def test_diagnostics():
    d = get_demo("transverse")
    tree = trace_gbb_tree(d.spec, d.seed, d.s_max, max_depth=2)
    for n in tree.nodes:
        if n.branch_kind == "transmitted":
            assert crossing_xi_jump(tree, n) < 1e-6
        if n.status == "completed":
            assert reverse_closure(d.spec, n.segment) < 1e-6
    with pytest.raises(ValueError):
        crossing_xi_jump(tree, tree.nodes[0])


def test_json_schema():
    d = get_demo("transverse")
    tree = trace_gbb_tree(d.spec, d.seed, d.s_max, max_depth=2)
    doc = json.loads(tree.to_json())
    assert doc["columns"] == ["s", "x", "y", "xi", "eta"]
    ids = {n["id"] for n in doc["nodes"]}
    for n in doc["nodes"]:
        assert set(n) >= {"id", "parent", "branch_kind", "strength", "status", "samples"}
        assert n["parent"] is None or n["parent"] in ids
        assert all(len(row) == 5 for row in n["samples"])


def test_tree_never_aborts():
    # a seed grazing the band makes one branch fail; the tree still comes back
    spec = flat_power(0.5)
    cfg = RayConfig(max_step=0.05)
    tree = trace_gbb_tree(spec, PhasePoint(-0.2, 0.0, math.sqrt(1 - 0.999**2), 0.999), 1.0, cfg=cfg)
    assert len(tree.nodes) >= 1
    assert all(n.status in ("completed", "hit_interface", "glancing_nonunique", "step_underflow")
               for n in tree.nodes)
