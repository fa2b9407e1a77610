import math

import pytest

from inkfab.deposition import (
    DepositionError,
    deposit,
    detect_overlaps,
    detect_overlaps_components,
    inject_defects,
    PlacedComponent,
    Substrate,
)
from inkfab.geometry import rect_corners, rects_intersect
from inkfab.kinds import builtin_kinds
from inkfab.model import ProcessSpec
from dataclasses import replace

KINDS = builtin_kinds()
MIX = [(KINDS["nw_logic8"], 1.0)]


def _spec(**kw):
    return replace(ProcessSpec(), **kw)


def test_poisson_expected_count():
    # density 0.01/um^2 over 100x100 um -> lambda = 100
    spec = _spec(deposition_area=(100_000, 100_000))
    counts = [
        len(deposit(spec, MIX, "poisson", seed).components) for seed in range(30)
    ]
    mean = sum(counts) / len(counts)
    assert abs(mean - 100.0) < 3 * math.sqrt(100.0 / len(counts)) + 1


def test_lattice_zero_noise_hits_targets():
    spec = _spec(
        deposition_area=(100_000, 100_000), position_sigma=0.0, orientation_sigma=0.0
    )
    sub = deposit(spec, MIX, "lattice", seed=7)
    assert len(sub.components) == 100
    for comp in sub.components:
        assert comp.center == comp.target[:2]
        assert comp.orientation == 0.0
    xs = sorted({c.center[0] for c in sub.components})
    assert xs == list(range(5000, 100_000, 10_000))


def test_determinism_bit_identical():
    spec = _spec(deposition_area=(200_000, 150_000))
    a = deposit(spec, MIX, "lattice", seed=123)
    b = deposit(spec, MIX, "lattice", seed=123)
    assert a == b
    c = deposit(spec, MIX, "poisson", seed=123)
    d = deposit(spec, MIX, "poisson", seed=123)
    assert c == d
    assert a != c


def test_noise_moments_match_clamped_sigma():
    # clamping at +-3 sigma shrinks the std by a known factor (~0.99750)
    spec = _spec(deposition_area=(400_000, 400_000), position_sigma=500.0,
                 orientation_sigma=5.0)
    dx, dth = [], []
    for seed in range(100):
        sub = deposit(spec, MIX, "lattice", seed)
        for comp in sub.components:
            if comp.clamped:
                continue
            dx.append(comp.center[0] - comp.target[0])
            t = comp.orientation if comp.orientation <= 180 else comp.orientation - 360
            dth.append(t - comp.target[2])
    n = len(dx)
    sx = math.sqrt(sum(d * d for d in dx) / n)
    st = math.sqrt(sum(d * d for d in dth) / n)
    clamp_factor = 0.99750
    assert abs(sx - clamp_factor * 500.0) < 0.10 * 500.0
    assert abs(st - clamp_factor * 5.0) < 0.10 * 5.0


def test_noise_never_exceeds_three_sigma():
    spec = _spec(deposition_area=(400_000, 400_000), position_sigma=600.0,
                 orientation_sigma=6.0)
    for seed in (1, 2, 3):
        sub = deposit(spec, MIX, "lattice", seed)
        for comp in sub.components:
            if comp.clamped:
                continue
            assert abs(comp.center[0] - comp.target[0]) <= 3 * 600 + 1
            assert abs(comp.center[1] - comp.target[1]) <= 3 * 600 + 1


def test_defect_rate_edge_cases():
    spec = _spec(deposition_area=(100_000, 100_000))
    sub = deposit(spec, MIX, "lattice", seed=1)
    none = inject_defects(sub, 0.0, seed=2)
    assert not any(c.defective for c in none.components)
    every = inject_defects(sub, 1.0, seed=2)
    assert all(c.defective for c in every.components)


def test_defect_counts_binomial():
    # n=10000, p=0.05 over 100 seeds: mean within 3 standard errors of 500
    spec = _spec(deposition_area=(1_000_000, 1_000_000))
    sub = deposit(spec, MIX, "lattice", seed=3)
    n = len(sub.components)
    assert n == 10_000
    counts = [
        sum(c.defective for c in inject_defects(sub, 0.05, seed).components)
        for seed in range(100)
    ]
    mean = sum(counts) / len(counts)
    sigma = math.sqrt(n * 0.05 * 0.95)
    assert abs(mean - 500.0) < 3 * sigma / math.sqrt(len(counts))


def _component(pid, x, y, theta=0.0, kind="nw_logic8"):
    return PlacedComponent(phys_id=pid, kind_id=kind, center=(x, y), orientation=theta)


def test_overlap_trivial_cases():
    same = [_component("a", 5000, 5000), _component("b", 5000, 5000)]
    assert detect_overlaps_components(same, KINDS) == (("a", "b"),)
    apart = [_component("a", 5000, 5000), _component("b", 15_000, 5000)]
    assert detect_overlaps_components(apart, KINDS) == ()


def _brute_force_pairs(components, kinds):
    out = set()
    for i in range(len(components)):
        for j in range(i + 1, len(components)):
            a, b = components[i], components[j]
            ca = rect_corners(*a.center, *kinds[a.kind_id].body, a.orientation)
            cb = rect_corners(*b.center, *kinds[b.kind_id].body, b.orientation)
            if rects_intersect(ca, cb):
                pair = (a.phys_id, b.phys_id)
                out.add(pair if pair[0] < pair[1] else (pair[1], pair[0]))
    return tuple(sorted(out))


def test_overlaps_match_brute_force_oracle():
    # dense poisson field with rotations: spatial index vs O(n^2) oracle
    spec = _spec(deposition_area=(200_000, 200_000), component_density_target=0.025)
    sub = deposit(spec, MIX, "poisson", seed=11)
    assert len(sub.components) > 500
    assert detect_overlaps(sub, KINDS) == _brute_force_pairs(sub.components, KINDS)
    assert sub.overlaps == _brute_force_pairs(sub.components, KINDS)


def test_overlaps_permutation_invariant():
    spec = _spec(deposition_area=(150_000, 150_000), component_density_target=0.02)
    sub = deposit(spec, MIX, "poisson", seed=5)
    shuffled = list(sub.components)[::-1]
    assert detect_overlaps_components(shuffled, KINDS) == detect_overlaps(sub, KINDS)


def test_preconditions():
    spec = _spec(deposition_area=(5_000, 5_000))  # density*area = 0.25
    with pytest.raises(DepositionError, match="density"):
        deposit(spec, MIX, "poisson", seed=1)
    with pytest.raises(DepositionError, match="mix"):
        deposit(_spec(), [], "poisson", seed=1)
    with pytest.raises(DepositionError, match="sum"):
        deposit(_spec(), [(KINDS["nw_res"], 0.5)], "poisson", seed=1)
    with pytest.raises(DepositionError, match="policy"):
        deposit(_spec(), MIX, "diagonal", seed=1)


def test_kind_mix_fractions():
    spec = _spec(deposition_area=(1_000_000, 1_000_000))
    mix = [(KINDS["nw_nmos"], 0.5), (KINDS["nw_pmos"], 0.3), (KINDS["nw_res"], 0.2)]
    sub = deposit(spec, mix, "lattice", seed=21)
    n = len(sub.components)
    frac_n = sum(c.kind_id == "nw_nmos" for c in sub.components) / n
    frac_p = sum(c.kind_id == "nw_pmos" for c in sub.components) / n
    assert abs(frac_n - 0.5) < 0.02
    assert abs(frac_p - 0.3) < 0.02
