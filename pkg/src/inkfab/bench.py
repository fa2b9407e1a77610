"""Deterministic generators for benchmark netlists and pipeline scenarios.

Each generator returns a BenchScenario bundling the netlist, the process
spec (with scenario overrides applied), the ink mix, per-stage seeds, and
the metric thresholds the run is expected to meet.

Templates are schematic-shaped netlists: they route and meter like the
real circuit but are not electrically verified designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from . import rng
from .kinds import builtin_kinds
from .model import ComponentKind, Netlist, ProcessSpec


@dataclass(frozen=True)
class BenchScenario:
    name: str
    netlist: Netlist
    spec: ProcessSpec
    kind_mix: tuple[tuple[str, float], ...]   # (kind_id, fraction)
    policy: str
    seeds: dict[str, int]
    thresholds: dict[str, float]


def _seeds(seed: int) -> dict[str, int]:
    return {
        "deposit": rng.mix64(seed ^ 1),
        "defect": rng.mix64(seed ^ 2),
        "vision": rng.mix64(seed ^ 3),
        "shorts": rng.mix64(seed ^ 4),
    }


def _lattice_spec(n_sites_side: int, spacing_nm: int, **overrides) -> ProcessSpec:
    density = (1000.0 / spacing_nm) ** 2  # components per um^2
    side = n_sites_side * spacing_nm
    spec = replace(
        ProcessSpec(),
        component_density_target=density,
        deposition_area=(side, side),
        **overrides,
    )
    spec.validate()
    return spec


# --- random logic ------------------------------------------------------------


N_INPUT_PINS = 8  # matches the nw_logic8 kind

# input pin preference by the driver's direction relative to the receiver:
# westward drivers take west-side pins, eastward take east-side, vertical
# take central pins first
_PIN_PREFS = {
    "west": list(range(N_INPUT_PINS)),
    "east": list(range(N_INPUT_PINS - 1, -1, -1)),
    "vertical": [3, 4, 2, 5, 1, 6, 0, 7],
}


def gen_random_logic(
    n_components: int,
    fanout: int,
    avg_spacing_nm: int = 10_000,
    seed: int = 0,
    surplus: float = 1.25,
) -> BenchScenario:
    """Synthetic logic fabric: n driver cells, each fanning out to its
    nearest lattice neighbors.

    Receivers are the fan-out nearest instances on the generator's
    reference lattice (ties shuffled by seed), so the average connection
    spans one component spacing; each connection lands on a distinct
    receiver input pin chosen to face the driver.  The deposition region
    carries a component surplus so defective or badly placed parts can be
    left unconnected.
    """
    if n_components < 2:
        raise ValueError("need at least 2 components")
    if fanout < 1:
        raise ValueError("fanout must be >= 1")
    if fanout >= n_components:
        raise ValueError("fanout must be smaller than the component count")

    side = math.ceil(math.sqrt(n_components))
    coords = [(k % side, k // side) for k in range(n_components)]
    gen = rng.Xoshiro256StarStar(rng.mix64(seed ^ 0xBEEF))
    tie_rank = list(range(n_components))
    gen.shuffle(tie_rank)

    # neighbor candidates per instance, nearest lattice distance first
    max_ring = 3
    offsets = sorted(
        (
            (dx * dx + dy * dy, dx, dy)
            for dx in range(-max_ring, max_ring + 1)
            for dy in range(-max_ring, max_ring + 1)
            if (dx, dy) != (0, 0)
        ),
    )

    free_pins: list[list[int]] = [list(range(N_INPUT_PINS)) for _ in range(n_components)]
    instances = tuple((f"t{k:05d}", "nw_logic8") for k in range(n_components))
    nets = []
    for k in range(n_components):
        x, y = coords[k]
        candidates = []
        for d2, dx, dy in offsets:
            nx, ny = x + dx, y + dy
            if not (0 <= nx < side and 0 <= ny < side):
                continue
            j = ny * side + nx
            if j >= n_components:
                continue
            candidates.append((d2, tie_rank[j], j, dx, dy))
        candidates.sort()

        endpoints = [(f"t{k:05d}", "out")]
        taken = 0
        for _d2, _tie, j, dx, dy in candidates:
            if taken == fanout:
                break
            if not free_pins[j]:
                continue
            if abs(dx) >= abs(dy):
                prefs = _PIN_PREFS["east"] if dx > 0 else _PIN_PREFS["west"]
            else:
                prefs = _PIN_PREFS["vertical"]
            pin = next(p for p in prefs if p in free_pins[j])
            free_pins[j].remove(pin)
            endpoints.append((f"t{j:05d}", f"in{pin}"))
            taken += 1
        if taken < fanout:
            raise ValueError(
                f"instance t{k:05d} could not reach {fanout} receivers; "
                "increase ring radius or pin count"
            )
        nets.append((f"n{k:05d}", tuple(endpoints)))

    phys_side = math.ceil(math.sqrt(n_components * surplus))
    spec = _lattice_spec(
        phys_side,
        avg_spacing_nm,
        grid_pitch=150,
        interconnect_wire_width_max=150,
        defect_rate=0.02,
    )
    thresholds = {"min_routed_fraction": 0.5}
    if n_components >= 10_000:
        thresholds["max_print_time_s"] = 600.0

    return BenchScenario(
        name=f"random_logic_{n_components}",
        netlist=Netlist(instances=instances, nets=tuple(nets)),
        spec=spec,
        kind_mix=(("nw_logic8", 1.0),),
        policy="lattice",
        seeds=_seeds(seed),
        thresholds=thresholds,
    )


# --- flip-flop chain ----------------------------------------------------------

# 12-transistor master-slave D flip-flop built from transmission gates and
# inverters (both clock phases tied to the shared clk net):
#
#   d -(tg1)- m1 -[inv1]- m2 -(tg2)- s1 -[inv2]- q
#              \_(tgf1 feedback)_/    \_(tgf2 feedback from q)_/
#
# instances per stage: tg1n/p, inv1n/p, tgf1n/p, tg2n/p, inv2n/p, tgf2n/p

_DFF_CELLS = ("tg1", "inv1", "tgf1", "tg2", "inv2", "tgf2")


def gen_flipflop_chain(stages: int, seed: int = 0) -> BenchScenario:
    """Chain of 12-transistor D flip-flops; Q of stage i drives D of i+1."""
    if stages < 1:
        raise ValueError("need at least 1 stage")

    instances = []
    nets: dict[str, list[tuple[str, str]]] = {"clk": [], "vdd": [], "gnd": []}

    def inst(stage, cell, pol):
        return f"s{stage}_{cell}{pol}"

    for i in range(1, stages + 1):
        for cell in _DFF_CELLS:
            instances.append((inst(i, cell, "n"), "nw_nmos"))
            instances.append((inst(i, cell, "p"), "nw_pmos"))

        d_net = f"d{i - 1}" if i == 1 else f"q{i - 1}"
        nets.setdefault(d_net, []).extend(
            [(inst(i, "tg1", "n"), "s"), (inst(i, "tg1", "p"), "s")]
        )
        nets[f"m1_{i}"] = [
            (inst(i, "tg1", "n"), "d"), (inst(i, "tg1", "p"), "d"),
            (inst(i, "inv1", "n"), "g"), (inst(i, "inv1", "p"), "g"),
            (inst(i, "tgf1", "n"), "d"), (inst(i, "tgf1", "p"), "d"),
        ]
        nets[f"m2_{i}"] = [
            (inst(i, "inv1", "n"), "d"), (inst(i, "inv1", "p"), "d"),
            (inst(i, "tg2", "n"), "s"), (inst(i, "tg2", "p"), "s"),
            (inst(i, "tgf1", "n"), "s"), (inst(i, "tgf1", "p"), "s"),
        ]
        nets[f"s1_{i}"] = [
            (inst(i, "tg2", "n"), "d"), (inst(i, "tg2", "p"), "d"),
            (inst(i, "inv2", "n"), "g"), (inst(i, "inv2", "p"), "g"),
            (inst(i, "tgf2", "n"), "d"), (inst(i, "tgf2", "p"), "d"),
        ]
        nets[f"q{i}"] = [
            (inst(i, "inv2", "n"), "d"), (inst(i, "inv2", "p"), "d"),
            (inst(i, "tgf2", "n"), "s"), (inst(i, "tgf2", "p"), "s"),
        ]
        for cell in ("tg1", "tgf1", "tg2", "tgf2"):
            nets["clk"].extend([(inst(i, cell, "n"), "g"), (inst(i, cell, "p"), "g")])
        nets["vdd"].extend([(inst(i, "inv1", "p"), "s"), (inst(i, "inv2", "p"), "s")])
        nets["gnd"].extend([(inst(i, "inv1", "n"), "s"), (inst(i, "inv2", "n"), "s")])

    n = len(instances)
    phys_side = math.ceil(math.sqrt(n * 1.4))
    spec = _lattice_spec(phys_side, 10_000, interconnect_wire_width_max=150)
    return BenchScenario(
        name=f"flipflop_chain_{stages}",
        netlist=Netlist(
            instances=tuple(instances),
            nets=tuple((nid, tuple(eps)) for nid, eps in sorted(nets.items())),
        ),
        spec=spec,
        kind_mix=(("nw_nmos", 0.5), ("nw_pmos", 0.5)),
        policy="lattice",
        seeds=_seeds(seed),
        thresholds={
            "min_routed_components": float(n),
            "min_max_frequency_hz": 100e6,
            "max_footprint_mm2": 0.05,
        },
    )


# --- differential pair ----------------------------------------------------------

def gen_differential_pair(seed: int = 0) -> BenchScenario:
    """Two-transistor differential pair with resistor loads and tail resistor."""
    instances = (
        ("m1", "nw_nmos"),
        ("m2", "nw_nmos"),
        ("r_load1", "nw_res"),
        ("r_load2", "nw_res"),
        ("r_tail", "nw_res"),
    )
    nets = (
        ("inp", (("m1", "g"), ("m2", "g"))),
        ("out_n", (("m2", "d"), ("r_load2", "a"))),
        ("out_p", (("m1", "d"), ("r_load1", "a"))),
        ("tail", (("m1", "s"), ("m2", "s"), ("r_tail", "a"))),
        ("vdd", (("r_load1", "b"), ("r_load2", "b"))),
    )
    spec = _lattice_spec(3, 10_000, interconnect_wire_width_max=150)
    return BenchScenario(
        name="differential_pair",
        netlist=Netlist(instances=instances, nets=nets),
        spec=spec,
        kind_mix=(("nw_nmos", 0.5), ("nw_res", 0.5)),
        policy="lattice",
        seeds=_seeds(seed),
        thresholds={
            "min_routed_components": 5.0,
            "min_max_frequency_hz": 100e6,
            "max_footprint_mm2": 0.05,
        },
    )


# --- timer-style mixed benchmark -------------------------------------------------

def gen_555_like(seed: int = 0) -> BenchScenario:
    """Timer-style mixed analog/digital benchmark (30 instances).

    Blocks: three-resistor supply divider, two comparator stages (each a
    differential pair with loads and tail), a four-transistor latch with
    two pull resistors, a two-inverter output stage, a discharge
    transistor, a two-transistor reset gate, and two bias resistors.
    """
    instances = []
    nets: dict[str, list[tuple[str, str]]] = {}

    def add(inst_id, kind):
        instances.append((inst_id, kind))

    def wire(net, inst_id, pin):
        nets.setdefault(net, []).append((inst_id, pin))

    # supply divider: vcc - div_a - div_b - gnd
    for r, top, bottom in (
        ("r_div1", "vcc", "div_a"),
        ("r_div2", "div_a", "div_b"),
        ("r_div3", "div_b", "gnd"),
    ):
        add(r, "nw_res")
        wire(top, r, "a")
        wire(bottom, r, "b")

    # comparators: inputs against the divider taps
    for c, ref, inp, out in (
        ("c1", "div_a", "thresh", "set_n"),
        ("c2", "div_b", "trig", "reset_n"),
    ):
        add(f"{c}_m1", "nw_nmos")
        add(f"{c}_m2", "nw_nmos")
        add(f"{c}_r1", "nw_res")
        add(f"{c}_r2", "nw_res")
        add(f"{c}_rt", "nw_res")
        wire(inp, f"{c}_m1", "g")
        wire(ref, f"{c}_m2", "g")
        wire(out, f"{c}_m1", "d")
        wire(out, f"{c}_r1", "a")
        wire(f"{c}_outb", f"{c}_m2", "d")
        wire(f"{c}_outb", f"{c}_r2", "a")
        wire("vcc", f"{c}_r1", "b")
        wire("vcc", f"{c}_r2", "b")
        wire(f"{c}_tail", f"{c}_m1", "s")
        wire(f"{c}_tail", f"{c}_m2", "s")
        wire(f"{c}_tail", f"{c}_rt", "a")
        wire("gnd", f"{c}_rt", "b")

    # cross-coupled latch with resistor pulls
    for t, gate, drain in (
        ("l1n", "q", "qb"), ("l1p", "q", "qb"),
        ("l2n", "qb", "q"), ("l2p", "qb", "q"),
    ):
        add(t, "nw_nmos" if t.endswith("n") else "nw_pmos")
        wire(gate, t, "g")
        wire(drain, t, "d")
    wire("set_n", "l1n", "s")
    wire("set_n", "l1p", "s")
    wire("reset_n", "l2n", "s")
    wire("reset_n", "l2p", "s")
    add("l_pull1", "nw_res")
    add("l_pull2", "nw_res")
    wire("q", "l_pull1", "a")
    wire("vcc", "l_pull1", "b")
    wire("qb", "l_pull2", "a")
    wire("vcc", "l_pull2", "b")

    # output stage: two inverters q -> out
    add("o1n", "nw_nmos")
    add("o1p", "nw_pmos")
    add("o2n", "nw_nmos")
    add("o2p", "nw_pmos")
    for t in ("o1n", "o1p"):
        wire("q", t, "g")
        wire("out_int", t, "d")
    for t in ("o2n", "o2p"):
        wire("out_int", t, "g")
        wire("out", t, "d")
    wire("gnd", "o1n", "s")
    wire("gnd", "o2n", "s")
    wire("vcc", "o1p", "s")
    wire("vcc", "o2p", "s")

    # discharge transistor and reset gate
    add("dis", "nw_nmos")
    wire("qb", "dis", "g")
    wire("thresh", "dis", "d")
    wire("gnd", "dis", "s")
    add("rst_n", "nw_nmos")
    add("rst_p", "nw_pmos")
    wire("reset", "rst_n", "g")
    wire("reset", "rst_p", "g")
    wire("q", "rst_n", "s")
    wire("q", "rst_p", "s")
    wire("gnd", "rst_n", "d")
    wire("vcc", "rst_p", "d")

    # bias resistors give the external inputs a second endpoint
    add("r_bias1", "nw_res")
    wire("trig", "r_bias1", "a")
    wire("vcc", "r_bias1", "b")
    add("r_bias2", "nw_res")
    wire("reset", "r_bias2", "a")
    wire("vcc", "r_bias2", "b")
    add("out_load", "nw_res")
    wire("out", "out_load", "a")
    wire("gnd", "out_load", "b")

    n = len(instances)
    phys_side = math.ceil(math.sqrt(n * 1.4))
    spec = _lattice_spec(phys_side, 10_000, interconnect_wire_width_max=150)
    return BenchScenario(
        name="timer_555_like",
        netlist=Netlist(
            instances=tuple(instances),
            nets=tuple((nid, tuple(eps)) for nid, eps in sorted(nets.items())),
        ),
        spec=spec,
        kind_mix=(("nw_nmos", 0.35), ("nw_pmos", 0.25), ("nw_res", 0.4)),
        policy="lattice",
        seeds=_seeds(seed),
        thresholds={"min_routed_components": float(n)},
    )


def scenario_kinds(scenario: BenchScenario) -> dict[str, ComponentKind]:
    catalog = builtin_kinds()
    return {kid: catalog[kid] for kid, _ in scenario.kind_mix}
