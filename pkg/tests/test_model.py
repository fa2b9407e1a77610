import pytest

from inkfab.kinds import builtin_kinds
from inkfab.model import (
    Netlist,
    ProcessSpec,
    SpecError,
    load_process_spec,
    serialize_process_spec,
    validate_netlist,
)

KINDS = builtin_kinds()


def test_empty_document_gives_defaults():
    spec = load_process_spec("")
    assert spec.print_rate == 1.0          # mm/s
    assert spec.contact_wire_width == 150
    assert spec.interconnect_wire_width_max == 1000
    assert spec.insulator_kappa == 3.9
    assert spec.component_density_target == 0.01


def test_kappa_above_limit_rejected():
    with pytest.raises(SpecError, match="insulator_kappa"):
        load_process_spec("insulator_kappa=4.5")


def test_pitch_above_contact_width_rejected():
    with pytest.raises(SpecError, match="grid_pitch"):
        load_process_spec("grid_pitch=200\ncontact_wire_width=150")


def test_parse_errors_carry_line_numbers():
    with pytest.raises(SpecError, match="line 2"):
        load_process_spec("print_rate=1.0\nnot a pair\n")
    with pytest.raises(SpecError, match="line 1.*unknown"):
        load_process_spec("bogus_key=3")
    with pytest.raises(SpecError, match="line 3.*duplicate"):
        load_process_spec("print_rate=1.0\n# comment\nprint_rate=2.0")


def test_roundtrip_identity():
    spec = load_process_spec(
        "component_density_target=0.02\n"
        "deposition_area=320000x240000\n"
        "position_sigma=123.456\n"
        "min_wire_spacing=200\n"
        "short_rate=0.0002\n"
    )
    again = load_process_spec(serialize_process_spec(spec))
    assert again == spec


def test_roundtrip_defaults():
    spec = ProcessSpec()
    assert load_process_spec(serialize_process_spec(spec)) == spec


def _netlist(instances, nets, groups=()):
    return Netlist(
        instances=tuple(instances),
        nets=tuple((nid, tuple(eps)) for nid, eps in nets),
        redundancy_groups=tuple(tuple(g) for g in groups),
    )


def test_empty_netlist_is_valid():
    report = validate_netlist(_netlist([], []), KINDS)
    assert report.ok
    assert report.issues == ()


def test_missing_instance_reference():
    nl = _netlist(
        [("a", "nw_res")],
        [("n1", [("a", "a"), ("X9", "b")])],
    )
    report = validate_netlist(nl, KINDS)
    assert not report.ok
    errs = [i for i in report.issues if i.severity == "error"]
    assert len(errs) == 1
    assert "X9" in errs[0].message


def test_all_problem_classes_reported():
    nl = _netlist(
        [("a", "nw_res"), ("a", "nw_res"), ("b", "mystery")],
        [
            ("n1", [("a", "a")]),                       # single endpoint
            ("n2", [("a", "nopin"), ("b", "whatever")]),  # dangling pin + unknown kind member
        ],
        groups=[["a", "ghost"]],
    )
    report = validate_netlist(nl, KINDS)
    assert not report.ok
    messages = " | ".join(i.message for i in report.issues)
    assert "duplicate instance id a" in messages
    assert "unknown kind mystery" in messages
    assert "1 endpoint" in messages
    assert "missing pin a.nopin" in messages
    assert "ghost" in messages


def test_validation_order_insensitive():
    nl1 = _netlist(
        [("a", "nw_res"), ("b", "nw_res")],
        [("n1", [("a", "a"), ("b", "a")]), ("n2", [("a", "b"), ("c", "a")])],
    )
    nl2 = _netlist(
        [("b", "nw_res"), ("a", "nw_res")],
        [("n2", [("c", "a"), ("a", "b")]), ("n1", [("b", "a"), ("a", "a")])],
    )
    r1 = validate_netlist(nl1, KINDS)
    r2 = validate_netlist(nl2, KINDS)
    assert r1.ok == r2.ok
    assert sorted((i.severity, i.message) for i in r1.issues) == sorted(
        (i.severity, i.message) for i in r2.issues
    )


def test_shared_pin_warns_but_stays_ok():
    nl = _netlist(
        [("a", "nw_res"), ("b", "nw_res"), ("c", "nw_res")],
        [
            ("n1", [("a", "a"), ("b", "a")]),
            ("n2", [("a", "a"), ("c", "a")]),  # a.a reused
        ],
    )
    report = validate_netlist(nl, KINDS)
    assert report.ok
    assert any(i.severity == "warning" for i in report.issues)
