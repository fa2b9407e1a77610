import math

import pytest

from inkfab import rng
from inkfab.assign import (
    AssignParams,
    ExhaustiveLimitError,
    assign,
    assign_exhaustive,
)
from inkfab.model import Netlist
from inkfab.vision import ObservedComponent, ObservedField


def _field(entries, region=(1_000_000, 1_000_000)):
    obs = tuple(
        ObservedComponent(
            obs_id=oid,
            phys_id=oid.replace("o", "p"),
            kind_id=kind,
            center_est=(x, y),
            orientation_est=0.0,
            classified_defective=defective,
        )
        for oid, kind, x, y, defective in entries
    )
    return ObservedField(region=region, observations=obs, missed=())


def _netlist(instances, nets=()):
    return Netlist(
        instances=tuple(instances),
        nets=tuple((nid, tuple(eps)) for nid, eps in nets),
    )


def test_single_instance_no_nets():
    nl = _netlist([("r1", "res")])
    field = _field([("o0", "res", 100, 100, False)])
    result = assign(nl, field)
    assert result.mapping == {"r1": "o0"}
    assert result.cost == 0.0
    assert result.unassigned_logical == ()
    assert result.unused_physical == ()


def test_defective_component_never_mapped():
    nl = _netlist([("r1", "res")])
    field = _field([("o0", "res", 100, 100, True)])
    result = assign(nl, field)
    assert result.mapping == {}
    assert result.unassigned_logical == ("r1",)
    assert result.unused_physical == ("o0",)


def test_missing_kind_goes_unassigned_not_error():
    nl = _netlist([("t1", "mos"), ("r1", "res")])
    field = _field([("o0", "res", 0, 0, False)])
    result = assign(nl, field)
    assert result.mapping == {"r1": "o0"}
    assert result.unassigned_logical == ("t1",)


def test_two_instance_oracle_case():
    # a-b wired; candidates at 0, 10um, 100um: optimal uses the close pair
    nl = _netlist(
        [("A", "res"), ("B", "res")],
        [("n1", [("A", "a"), ("B", "a")])],
    )
    field = _field(
        [
            ("o0", "res", 0, 0, False),
            ("o1", "res", 10_000, 0, False),
            ("o2", "res", 100_000, 0, False),
        ]
    )
    heur = assign(nl, field)
    exact = assign_exhaustive(nl, field)
    assert exact.mapping == {"A": "o0", "B": "o1"}
    assert exact.cost == pytest.approx(10_000.0)
    assert heur.mapping == exact.mapping
    assert heur.cost == pytest.approx(exact.cost)


def test_exhaustive_empty():
    result = assign_exhaustive(_netlist([]), _field([]))
    assert result.mapping == {}
    assert result.cost == 0.0


def test_exhaustive_minimality_on_square():
    # 4 identical instances in a ring net; any optimal assignment beats
    # every enumerated permutation
    from itertools import permutations

    nl = _netlist(
        [("a", "m"), ("b", "m"), ("c", "m"), ("d", "m")],
        [
            ("n1", [("a", "p"), ("b", "p")]),
            ("n2", [("b", "p"), ("c", "p")]),
            ("n3", [("c", "p"), ("d", "p")]),
            ("n4", [("d", "p"), ("a", "p")]),
        ],
    )
    pts = [(0, 0), (0, 10_000), (10_000, 0), (10_000, 10_000)]
    field = _field([(f"o{i}", "m", x, y, False) for i, (x, y) in enumerate(pts)])
    exact = assign_exhaustive(nl, field)

    def cost_of(perm):
        pos = {inst: pts[perm[i]] for i, inst in enumerate("abcd")}
        total = 0.0
        for x, y in (("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")):
            total += math.dist(pos[x], pos[y])
        return total

    best = min(cost_of(p) for p in permutations(range(4)))
    assert exact.cost == pytest.approx(best)


def test_exhaustive_refuses_big_instances():
    nl = _netlist([(f"i{k}", "m") for k in range(9)])
    with pytest.raises(ExhaustiveLimitError, match="8"):
        assign_exhaustive(nl, _field([]))


def test_translation_invariance():
    nl = _netlist(
        [("A", "m"), ("B", "m"), ("C", "m")],
        [("n1", [("A", "p"), ("B", "p")]), ("n2", [("B", "p"), ("C", "p")])],
    )
    entries = [
        ("o0", "m", 5_000, 7_000, False),
        ("o1", "m", 22_000, 9_000, False),
        ("o2", "m", 14_000, 30_000, False),
        ("o3", "m", 40_000, 40_000, False),
    ]
    base = assign(nl, _field(entries))
    shifted = assign(
        nl,
        _field([(o, k, x + 123_456, y + 54_321, d) for o, k, x, y, d in entries]),
    )
    assert base.mapping == shifted.mapping
    assert base.cost == pytest.approx(shifted.cost)


def _random_instance(gen: rng.Xoshiro256StarStar):
    # solvable by construction: per-kind component supply covers demand
    n_logical = 2 + gen.randbelow(7)           # 2..8
    kinds = ["ka", "kb"]
    instances = [(f"i{k}", kinds[gen.randbelow(2)]) for k in range(n_logical)]
    nets = []
    for k in range(1, n_logical):
        other = gen.randbelow(k)
        nets.append((f"n{k}", [(f"i{k}", "p"), (f"i{other}", "p")]))
    demand = {"ka": 0, "kb": 0}
    for _, kind in instances:
        demand[kind] += 1
    obs_kinds = ["ka"] * demand["ka"] + ["kb"] * demand["kb"]
    obs_kinds += [kinds[gen.randbelow(2)] for _ in range(gen.randbelow(4))]
    entries = []
    for j, kind in enumerate(obs_kinds):
        entries.append(
            (f"o{j}", kind, gen.randbelow(50_000), gen.randbelow(50_000), False)
        )
    return _netlist(instances, nets), _field(entries)


def test_heuristic_within_bound_of_exhaustive_sample():
    # smaller copy of the acceptance criterion, kept fast for the unit suite
    gen = rng.Xoshiro256StarStar(2024)
    for _ in range(100):
        nl, field = _random_instance(gen)
        heur = assign(nl, field)
        exact = assign_exhaustive(nl, field)
        kinds = dict(nl.instances)
        obs_kinds = {o.obs_id: o.kind_id for o in field.observations}
        # structural invariants
        assert len(set(heur.mapping.values())) == len(heur.mapping)
        for inst, oid in heur.mapping.items():
            assert kinds[inst] == obs_kinds[oid]
        assert len(heur.mapping) == len(exact.mapping)
        if exact.cost > 0:
            assert heur.cost <= 1.5 * exact.cost + 1e-6
        else:
            assert heur.cost <= 1e-6


def test_overlap_involved_avoided_when_alternative_exists():
    nl = _netlist([("A", "m")])
    base = _field([("o0", "m", 0, 0, False), ("o1", "m", 1_000, 0, False)])
    field = ObservedField(
        region=base.region,
        observations=base.observations,
        missed=(),
        overlaps=(("o0", "o9"),),
    )
    result = assign(nl, field)
    # o0 is overlap-involved; the clean o1 wins even though o0 is nearer
    assert result.mapping == {"A": "o1"}
