import pytest

from inkfab.bench import (
    gen_555_like,
    gen_differential_pair,
    gen_flipflop_chain,
    gen_random_logic,
    scenario_kinds,
)
from inkfab.kinds import builtin_kinds
from inkfab.model import validate_netlist

KINDS = builtin_kinds()


def test_random_logic_counts():
    sc = gen_random_logic(200, 5, seed=1)
    assert len(sc.netlist.instances) == 200
    assert len(sc.netlist.nets) == 200
    endpoints = sum(len(eps) - 1 for _, eps in sc.netlist.nets)
    assert endpoints == 1000  # fanout receivers
    report = validate_netlist(sc.netlist, KINDS)
    assert report.ok


def test_random_logic_structural_fanout():
    sc = gen_random_logic(100, 3, seed=9)
    for _nid, eps in sc.netlist.nets:
        assert eps[0][1] == "out"
        assert len(eps) == 4
        receivers = [e[0] for e in eps[1:]]
        assert len(set(receivers)) == 3
        assert eps[0][0] not in receivers  # no self-loops


def test_random_logic_minimal():
    sc = gen_random_logic(2, 1, seed=0)
    assert len(sc.netlist.nets) == 2
    for _nid, eps in sc.netlist.nets:
        assert len(eps) == 2


def test_random_logic_determinism_and_seed_sensitivity():
    a = gen_random_logic(64, 4, seed=5)
    b = gen_random_logic(64, 4, seed=5)
    c = gen_random_logic(64, 4, seed=6)
    assert a.netlist == b.netlist
    assert a.netlist != c.netlist


def test_random_logic_preconditions():
    with pytest.raises(ValueError):
        gen_random_logic(1, 1)
    with pytest.raises(ValueError):
        gen_random_logic(10, 10)
    with pytest.raises(ValueError):
        gen_random_logic(10, 0)


def test_random_logic_region_scaling():
    sc = gen_random_logic(100, 5, avg_spacing_nm=10_000, seed=2)
    w, h = sc.spec.deposition_area
    # surplus 1.25 -> 12x12 lattice of 10 um pitch
    assert w == h == 120_000
    assert sc.spec.component_density_target == pytest.approx(0.01)


def test_flipflop_counts_and_chaining():
    one = gen_flipflop_chain(1)
    assert len(one.netlist.instances) == 12
    two = gen_flipflop_chain(2)
    assert len(two.netlist.instances) == 24
    nets = dict(two.netlist.nets)
    # Q of stage 1 feeds the stage-2 input gate pair
    q1 = nets["q1"]
    assert ("s2_tg1n", "s") in q1 and ("s2_tg1p", "s") in q1
    assert validate_netlist(two.netlist, KINDS).ok
    # shared single clock net across stages
    assert len(nets["clk"]) == 16


def test_flipflop_validates_any_stages():
    for stages in (1, 3, 5):
        sc = gen_flipflop_chain(stages)
        assert validate_netlist(sc.netlist, KINDS).ok
        assert len(sc.netlist.instances) == 12 * stages


def test_differential_pair_shape():
    sc = gen_differential_pair()
    assert len(sc.netlist.instances) == 5
    assert len(sc.netlist.nets) == 5
    assert validate_netlist(sc.netlist, KINDS).ok
    assert sc.netlist == gen_differential_pair().netlist


def test_555_like_shape():
    sc = gen_555_like()
    kinds_used = {k for _, k in sc.netlist.instances}
    assert len(kinds_used) >= 2
    assert "nw_res" in kinds_used
    assert 25 <= len(sc.netlist.instances) <= 35
    report = validate_netlist(sc.netlist, KINDS)
    assert report.ok, [i.message for i in report.issues if i.severity == "error"]
    assert sc.netlist == gen_555_like().netlist


def test_scenario_kinds_cover_mix():
    sc = gen_555_like()
    kinds = scenario_kinds(sc)
    assert set(kinds) == {k for k, _ in sc.kind_mix}
