import pytest
from dataclasses import replace

from inkfab.deposition import deposit, inject_defects
from inkfab.kinds import builtin_kinds
from inkfab.model import ProcessSpec
from inkfab.vision import VisionConfigError, observe

KINDS = builtin_kinds()
MIX = [(KINDS["nw_logic8"], 1.0)]


def _substrate(seed=1, defect_rate=0.0, **spec_kw):
    spec = replace(ProcessSpec(), deposition_area=(200_000, 200_000), **spec_kw)
    sub = deposit(spec, MIX, "lattice", seed)
    if defect_rate:
        sub = inject_defects(sub, defect_rate, seed + 1)
    return sub, spec


def test_noiseless_identity():
    sub, spec = _substrate()
    spec = replace(spec, vision_position_error_max=0, vision_orientation_error_max=0.0)
    field = observe(sub, spec, KINDS, defect_classification_accuracy=1.0, seed=3)
    assert len(field.observations) == len(sub.components)
    for obs, comp in zip(field.observations, sub.components):
        assert obs.center_est == comp.center
        assert obs.orientation_est == comp.orientation
        assert obs.classified_defective == comp.defective
        assert obs.phys_id == comp.phys_id


def test_error_bounds_are_hard():
    sub, spec = _substrate()
    truth = {c.phys_id: c for c in sub.components}
    for seed in range(20):
        field = observe(sub, spec, KINDS, seed=seed)
        for obs in field.observations:
            comp = truth[obs.phys_id]
            assert abs(obs.center_est[0] - comp.center[0]) <= 65
            assert abs(obs.center_est[1] - comp.center[1]) <= 65
            dt = abs(obs.orientation_est - comp.orientation) % 360.0
            assert min(dt, 360.0 - dt) <= 15.0 + 1e-9


def test_miss_partition():
    sub, spec = _substrate()
    spec = replace(spec, vision_miss_rate=0.3)
    field = observe(sub, spec, KINDS, seed=9)
    seen = [o.phys_id for o in field.observations]
    assert set(seen) | set(field.missed) == {c.phys_id for c in sub.components}
    assert not set(seen) & set(field.missed)
    # observation order follows substrate order
    order = [c.phys_id for c in sub.components if c.phys_id in set(seen)]
    assert seen == order
    n = len(sub.components)
    assert 0.15 * n < len(field.missed) < 0.45 * n


def test_zero_miss_sees_everything():
    sub, spec = _substrate()
    field = observe(sub, spec, KINDS, seed=4)
    assert len(field.observations) == len(sub.components)
    assert field.missed == ()


def test_defect_classification_accuracy_one_is_exact():
    sub, spec = _substrate(defect_rate=0.2)
    field = observe(sub, spec, KINDS, defect_classification_accuracy=1.0, seed=5)
    truth = {c.phys_id: c.defective for c in sub.components}
    for obs in field.observations:
        assert obs.classified_defective == truth[obs.phys_id]


def test_defect_classification_accuracy_zero_inverts():
    sub, spec = _substrate(defect_rate=0.2)
    field = observe(sub, spec, KINDS, defect_classification_accuracy=0.0, seed=5)
    truth = {c.phys_id: c.defective for c in sub.components}
    for obs in field.observations:
        assert obs.classified_defective != truth[obs.phys_id]


def test_precondition_names_offending_kind():
    sub, spec = _substrate()
    bad = replace(spec, vision_position_error_max=100)  # > 0.5 * 130
    with pytest.raises(VisionConfigError, match="nw_logic8"):
        observe(sub, bad, KINDS, seed=1)


def test_determinism():
    sub, spec = _substrate()
    a = observe(sub, spec, KINDS, seed=6)
    b = observe(sub, spec, KINDS, seed=6)
    assert a == b
    c = observe(sub, spec, KINDS, seed=7)
    assert a != c
