"""Core domain types: process rules, component kinds, netlists, validation.

Canonical units throughout the package: lengths in integer nanometers,
angles in degrees, time in seconds, resistance in ohms, capacitance in
farads.  The only exceptions are fields whose customary units are baked
into their names (conductivity in (ohm*cm)^-1, contact resistivity in
uOhm*cm^2, print rate in mm/s, density in um^-2).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Optional


class SpecError(ValueError):
    """Raised for process-spec parse errors and invariant violations."""


@dataclass(frozen=True)
class ProcessSpec:
    """All design rules and physical constants governing a fabrication run."""

    component_density_target: float = 0.01       # components per um^2
    deposition_area: tuple[int, int] = (100_000, 100_000)  # (w, h) nm
    position_sigma: float = 2000.0 / 3.0         # nm; 3*sigma = 2 um bound
    orientation_sigma: float = 20.0 / 3.0        # deg; 3*sigma = 20 deg bound
    defect_rate: float = 0.0
    vision_position_error_max: int = 65          # nm = 0.5 * 130 nm gate
    vision_orientation_error_max: float = 15.0   # deg
    vision_miss_rate: float = 0.0
    contact_wire_width: int = 150                # nm
    interconnect_wire_width_max: int = 1000      # nm
    min_wire_spacing: Optional[int] = None       # nm; None = 1x own width rule
    grid_pitch: int = 50                         # nm
    conductivity: float = 1e5                    # (ohm*cm)^-1
    contact_resistivity: float = 1.0             # uOhm*cm^2
    insulator_kappa: float = 3.9
    print_rate: float = 1.0                      # mm/s
    short_rate: float = 1e-4                     # probability per wire
    max_process_temp: float = 200.0              # degC; recorded, not simulated

    def validate(self) -> None:
        w, h = self.deposition_area
        strictly_positive = [
            ("component_density_target", self.component_density_target),
            ("deposition_area width", w),
            ("deposition_area height", h),
            ("contact_wire_width", self.contact_wire_width),
            ("interconnect_wire_width_max", self.interconnect_wire_width_max),
            ("grid_pitch", self.grid_pitch),
            ("conductivity", self.conductivity),
            ("contact_resistivity", self.contact_resistivity),
            ("insulator_kappa", self.insulator_kappa),
            ("print_rate", self.print_rate),
        ]
        for name, value in strictly_positive:
            if value <= 0:
                raise SpecError(f"{name} must be > 0, got {value}")
        # noise amplitudes and error bounds may be zero (noise-free runs)
        for name, value in [
            ("position_sigma", self.position_sigma),
            ("orientation_sigma", self.orientation_sigma),
            ("vision_position_error_max", self.vision_position_error_max),
            ("vision_orientation_error_max", self.vision_orientation_error_max),
        ]:
            if value < 0:
                raise SpecError(f"{name} must be >= 0, got {value}")
        if self.min_wire_spacing is not None and self.min_wire_spacing <= 0:
            raise SpecError(f"min_wire_spacing must be > 0, got {self.min_wire_spacing}")
        for name, p in [
            ("defect_rate", self.defect_rate),
            ("vision_miss_rate", self.vision_miss_rate),
            ("short_rate", self.short_rate),
        ]:
            if not 0.0 <= p <= 1.0:
                raise SpecError(f"{name} must be in [0, 1], got {p}")
        if self.insulator_kappa > 3.9:
            raise SpecError(
                f"insulator_kappa must be <= 3.9, got {self.insulator_kappa}"
            )
        if self.contact_wire_width > self.interconnect_wire_width_max:
            raise SpecError(
                "contact_wire_width must be <= interconnect_wire_width_max "
                f"({self.contact_wire_width} > {self.interconnect_wire_width_max})"
            )
        if self.grid_pitch > self.contact_wire_width:
            raise SpecError(
                "grid_pitch must be <= contact_wire_width "
                f"({self.grid_pitch} > {self.contact_wire_width})"
            )

    def spacing_for(self, width_nm: int) -> int:
        """Required clearance contributed by a wire of the given width."""
        return self.min_wire_spacing if self.min_wire_spacing is not None else width_nm


@dataclass(frozen=True)
class ElectricalParams:
    """Transistor parameters of a 180-nm-class device."""

    supply_voltage: float = 1.5        # V
    oxide_thickness: float = 3.0       # nm
    gate_length: float = 130.0         # nm
    threshold_voltage: float = 0.3     # V
    i_dsat: float = 0.94               # mA/um
    i_off: float = 3.0                 # nA/um
    c_junction: float = 0.65           # fF/um^2
    silicide_sheet_res: float = 4.0    # ohm/sq

    def validate(self) -> None:
        if not 1.3 <= self.supply_voltage <= 1.5:
            raise SpecError(
                f"supply_voltage must be in [1.3, 1.5] V, got {self.supply_voltage}"
            )
        if self.gate_length <= 0:
            raise SpecError(f"gate_length must be > 0, got {self.gate_length}")
        if self.i_dsat <= 0:
            raise SpecError(f"i_dsat must be > 0, got {self.i_dsat}")


@dataclass(frozen=True)
class Pin:
    pin_id: str
    offset: tuple[int, int]   # nm from body center, unrotated pose
    contact_area: int         # nm^2


@dataclass(frozen=True)
class ComponentKind:
    kind_id: str
    body: tuple[int, int]                        # (w, h) nm
    pins: tuple[Pin, ...]
    critical_dimension: int                      # nm
    electrical: Optional[ElectricalParams] = None
    resistance_ohm: Optional[float] = None       # resistors carry this instead

    def validate(self) -> None:
        w, h = self.body
        if w <= 0 or h <= 0:
            raise SpecError(f"kind {self.kind_id}: body dimensions must be > 0")
        if self.critical_dimension > min(w, h) or self.critical_dimension <= 0:
            raise SpecError(
                f"kind {self.kind_id}: critical_dimension must be in (0, min(body))"
            )
        seen = set()
        for pin in self.pins:
            if pin.pin_id in seen:
                raise SpecError(f"kind {self.kind_id}: duplicate pin {pin.pin_id}")
            seen.add(pin.pin_id)
            ox, oy = pin.offset
            if abs(ox) > w / 2 or abs(oy) > h / 2:
                raise SpecError(
                    f"kind {self.kind_id}: pin {pin.pin_id} offset outside body"
                )
            if pin.contact_area <= 0:
                raise SpecError(
                    f"kind {self.kind_id}: pin {pin.pin_id} contact area must be > 0"
                )
        if self.electrical is not None:
            self.electrical.validate()

    def pin(self, pin_id: str) -> Pin:
        for p in self.pins:
            if p.pin_id == pin_id:
                return p
        raise KeyError(f"kind {self.kind_id} has no pin {pin_id}")


@dataclass(frozen=True)
class Netlist:
    """Logical circuit: instances by kind, nets as pin groups."""

    instances: tuple[tuple[str, str], ...]                     # (instance_id, kind_id)
    nets: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]  # (net_id, ((inst, pin), ...))
    redundancy_groups: tuple[tuple[str, ...], ...] = ()

    @property
    def instance_kinds(self) -> dict[str, str]:
        return dict(self.instances)


@dataclass(frozen=True)
class Issue:
    severity: str   # "error" | "warning"
    message: str
    locus: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    issues: tuple[Issue, ...]


def validate_netlist(netlist: Netlist, kinds: dict[str, ComponentKind]) -> ValidationReport:
    """Structural netlist check. Problems are reported, never raised."""
    issues: list[Issue] = []

    seen_instances: dict[str, str] = {}
    for inst_id, kind_id in netlist.instances:
        if inst_id in seen_instances:
            issues.append(Issue("error", f"duplicate instance id {inst_id}", inst_id))
            continue
        seen_instances[inst_id] = kind_id
        if kind_id not in kinds:
            issues.append(
                Issue("error", f"instance {inst_id} references unknown kind {kind_id}", inst_id)
            )

    seen_nets: set[str] = set()
    pin_uses: dict[tuple[str, str], list[str]] = {}
    for net_id, endpoints in netlist.nets:
        if net_id in seen_nets:
            issues.append(Issue("error", f"duplicate net id {net_id}", net_id))
        seen_nets.add(net_id)
        if len(endpoints) < 2:
            issues.append(
                Issue("error", f"net {net_id} has {len(endpoints)} endpoint(s), needs >= 2", net_id)
            )
        for inst_id, pin_id in endpoints:
            if inst_id not in seen_instances:
                issues.append(
                    Issue("error", f"net {net_id} references missing instance {inst_id}", net_id)
                )
                continue
            kind = kinds.get(seen_instances[inst_id])
            if kind is not None:
                try:
                    kind.pin(pin_id)
                except KeyError:
                    issues.append(
                        Issue(
                            "error",
                            f"net {net_id} references missing pin {inst_id}.{pin_id}",
                            net_id,
                        )
                    )
            pin_uses.setdefault((inst_id, pin_id), []).append(net_id)

    for (inst_id, pin_id), users in sorted(pin_uses.items()):
        if len(users) > 1:
            issues.append(
                Issue(
                    "warning",
                    f"pin {inst_id}.{pin_id} appears in {len(users)} nets "
                    f"({', '.join(sorted(users))}); nets are electrically merged",
                    inst_id,
                )
            )

    for group in netlist.redundancy_groups:
        for inst_id in group:
            if inst_id not in seen_instances:
                issues.append(
                    Issue("error", f"redundancy group references missing instance {inst_id}", inst_id)
                )

    issues.sort(key=lambda i: (i.severity, i.locus, i.message))
    ok = not any(i.severity == "error" for i in issues)
    return ValidationReport(ok=ok, issues=tuple(issues))


# --- process spec text format: key=value lines, '#' comments ---------------

_INT_FIELDS = {
    "vision_position_error_max",
    "contact_wire_width",
    "interconnect_wire_width_max",
    "min_wire_spacing",
    "grid_pitch",
}


def load_process_spec(text: str) -> ProcessSpec:
    """Parse the key=value spec document; missing keys keep defaults."""
    valid = {f.name for f in fields(ProcessSpec)}
    overrides: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in valid:
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        if key in overrides:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key == "deposition_area":
                w, _, h = value.partition("x")
                overrides[key] = (int(w), int(h))
            elif key in _INT_FIELDS:
                overrides[key] = int(value)
            else:
                overrides[key] = float(value)
        except ValueError as exc:
            raise SpecError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    spec = replace(ProcessSpec(), **overrides)
    spec.validate()
    return spec


def serialize_process_spec(spec: ProcessSpec) -> str:
    lines = []
    for f in fields(ProcessSpec):
        value = getattr(spec, f.name)
        if value is None:
            continue
        if f.name == "deposition_area":
            lines.append(f"deposition_area={value[0]}x{value[1]}")
        elif f.name in _INT_FIELDS:
            lines.append(f"{f.name}={int(value)}")
        else:
            lines.append(f"{f.name}={value!r}")
    return "\n".join(lines) + "\n"
