"""Builtin component kind catalog.

Component bodies are nanowire-shaped (long, thin rectangles) with surface
contact pins along the long edges.  Pin pitch is 600 nm so that wires
landing on neighboring pins clear the 1x-width spacing rule even at the
coarsest routing pitch (150 nm) and the worst orientation error.

Netlist JSON references kinds by id; these are the ids it may use.
"""

from __future__ import annotations

from .model import ComponentKind, ElectricalParams, Pin

_CONTACT_AREA = 150 * 150  # nm^2, one contact pad

NMOS_180 = ElectricalParams(
    supply_voltage=1.5,
    oxide_thickness=3.0,
    gate_length=130.0,
    threshold_voltage=0.3,
    i_dsat=0.94,
    i_off=3.0,
    c_junction=0.65,
    silicide_sheet_res=4.0,
)

PMOS_180 = ElectricalParams(
    supply_voltage=1.5,
    oxide_thickness=3.0,
    gate_length=150.0,
    threshold_voltage=-0.24,
    i_dsat=0.42,
    i_off=3.0,
    c_junction=0.95,
    silicide_sheet_res=4.0,
)


def _logic_cell() -> ComponentKind:
    """Generic fan-in cell for synthetic logic benches.

    All contacts sit on one long edge (like a top-contacted nanowire): the
    output pad at the center, eight input pads fanning out to both sides.
    Electrically modeled as an nMOS driver.
    """
    xs = (-2400, -1800, -1200, -600, 600, 1200, 1800, 2400)
    ins = tuple(Pin(f"in{k}", (x, 150), _CONTACT_AREA) for k, x in enumerate(xs))
    return ComponentKind(
        kind_id="nw_logic8",
        body=(5400, 300),
        pins=ins + (Pin("out", (0, 150), _CONTACT_AREA),),
        critical_dimension=130,
        electrical=NMOS_180,
    )


def _mosfet(kind_id: str, params: ElectricalParams) -> ComponentKind:
    return ComponentKind(
        kind_id=kind_id,
        body=(1500, 300),
        pins=(
            Pin("s", (-600, 150), _CONTACT_AREA),
            Pin("g", (0, 150), _CONTACT_AREA),
            Pin("d", (600, 150), _CONTACT_AREA),
        ),
        critical_dimension=130,
        electrical=params,
    )


def _resistor() -> ComponentKind:
    return ComponentKind(
        kind_id="nw_res",
        body=(2000, 200),
        pins=(
            Pin("a", (-900, 100), _CONTACT_AREA),
            Pin("b", (900, 100), _CONTACT_AREA),
        ),
        critical_dimension=130,
        resistance_ohm=10_000.0,
    )


def builtin_kinds() -> dict[str, ComponentKind]:
    catalog = {}
    for kind in (_logic_cell(), _mosfet("nw_nmos", NMOS_180), _mosfet("nw_pmos", PMOS_180), _resistor()):
        kind.validate()
        catalog[kind.kind_id] = kind
    return catalog
