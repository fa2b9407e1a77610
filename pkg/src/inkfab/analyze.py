"""Fabrication metrics for routed layouts.

Physics conventions: wires have square cross-section (thickness = width);
the inter-wire insulator thickness equals the wire width, which makes the
per-length wire capacitance eps0 * kappa independent of width.  Delay is a
single-stage CV/I driver model plus a lumped RC term; it is an estimator,
not timing signoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .deposition import Substrate
from .model import ComponentKind, Netlist, ProcessSpec
from .route.engine import Path, RoutedLayout
from .vision import ObservedField

EPS0_F_PER_M = 8.854e-12
_TAG_SHORTS = 0x53484F52


class AnalysisError(ValueError):
    pass


class UnsupportedNetError(AnalysisError):
    pass


# --- wire and contact physics ----------------------------------------------


def print_time(layout: RoutedLayout, spec: ProcessSpec) -> float:
    """Seconds to print every wire at the spec print rate (no travel overhead)."""
    if spec.print_rate <= 0:
        raise AnalysisError("print_rate must be > 0")
    return (layout.total_wire_length / 1e6) / spec.print_rate


def wire_resistance(path: Path, spec: ProcessSpec) -> float:
    """Series resistance of one printed wire, summed per constant-width segment."""
    if spec.conductivity <= 0:
        raise AnalysisError("conductivity must be > 0")
    total = 0.0
    pts = path.points
    for i, width in enumerate(path.widths):
        if width <= 0:
            raise AnalysisError(f"zero-width segment in net {path.net_id}")
        (x0, y0), (x1, y1) = pts[i], pts[i + 1]
        length_nm = abs(x1 - x0) + abs(y1 - y0)
        # R = rho * L / (w * w); rho in ohm*cm, lengths converted from nm
        total += length_nm / (spec.conductivity * width * width * 1e-7)
    return total


def contact_resistance(contact_area_nm2: float, spec: ProcessSpec) -> float:
    """Ohms for one wire-to-component junction of the given pad area."""
    if contact_area_nm2 <= 0:
        raise AnalysisError("contact area must be > 0")
    # rho_c in uOhm*cm^2 -> ohm*cm^2 is 1e-6; area nm^2 -> cm^2 is 1e-14
    return spec.contact_resistivity * 1e8 / contact_area_nm2


def wire_capacitance_per_m(spec: ProcessSpec) -> float:
    """F/m of printed wire against neighbors through the insulator.

    c' = eps0 * kappa * width / t_ins with t_ins = width.
    """
    return EPS0_F_PER_M * spec.insulator_kappa


def diffusion_time_ratio(d1_nm: float, d2_nm: float) -> float:
    """How many times longer impurity diffusion takes over d2 than d1."""
    if d1_nm <= 0 or d2_nm <= 0:
        raise AnalysisError("distances must be > 0")
    return (d2_nm / d1_nm) ** 2


# --- delay and frequency ----------------------------------------------------


def _net_paths(layout: RoutedLayout, net_id: str) -> list[Path]:
    return [p for p in layout.paths if p.net_id == net_id]


def net_delay(
    net_id: str,
    layout: RoutedLayout,
    netlist: Netlist,
    kinds: dict[str, ComponentKind],
    spec: ProcessSpec,
) -> float:
    """Single-stage delay estimate: C_total*Vdd/I_drive + R_path*C_wire.

    The driver is the net's first endpoint; remaining endpoints are
    receivers.  Receivers without transistor parameters contribute no
    junction capacitance.
    """
    endpoints = None
    for nid, eps in netlist.nets:
        if nid == net_id:
            endpoints = eps
            break
    if endpoints is None:
        raise AnalysisError(f"net {net_id} not in netlist")
    paths = _net_paths(layout, net_id)
    if not paths:
        raise AnalysisError(f"net {net_id} is not routed")

    kind_of = netlist.instance_kinds
    driver_inst, driver_pin = endpoints[0]
    driver_kind = kinds[kind_of[driver_inst]]
    if driver_kind.electrical is None:
        raise UnsupportedNetError(
            f"net {net_id}: driver {driver_inst} has no transistor parameters"
        )
    el = driver_kind.electrical

    wire_len_m = sum(p.length_nm for p in paths) * 1e-9
    c_wire = wire_capacitance_per_m(spec) * wire_len_m

    c_receivers = 0.0
    r_c_receiver_worst = 0.0
    for inst, pin_id in endpoints[1:]:
        kind = kinds[kind_of[inst]]
        pin = kind.pin(pin_id)
        r_c_receiver_worst = max(r_c_receiver_worst, contact_resistance(pin.contact_area, spec))
        if kind.electrical is not None:
            area_um2 = pin.contact_area / 1e6
            c_receivers += kind.electrical.c_junction * 1e-15 * area_um2

    c_total = c_wire + c_receivers
    driver_width_um = min(driver_kind.body) / 1000.0
    i_drive = el.i_dsat * 1e-3 * driver_width_um  # mA/um * um -> A
    r_path = (
        sum(wire_resistance(p, spec) for p in paths)
        + contact_resistance(driver_kind.pin(driver_pin).contact_area, spec)
        + r_c_receiver_worst
    )
    return c_total * el.supply_voltage / i_drive + r_path * c_wire


def max_frequency(
    layout: RoutedLayout,
    netlist: Netlist,
    kinds: dict[str, ComponentKind],
    spec: ProcessSpec,
) -> float:
    """1 / (2 * worst net delay) over routed nets with transistor drivers."""
    worst = 0.0
    analyzable = 0
    routed = {p.net_id for p in layout.paths}
    for net_id, _eps in netlist.nets:
        if net_id not in routed:
            continue
        try:
            d = net_delay(net_id, layout, netlist, kinds, spec)
        except UnsupportedNetError:
            continue
        analyzable += 1
        worst = max(worst, d)
    if analyzable == 0:
        raise AnalysisError("no routed net has transistor parameters to analyze")
    return 1.0 / (2.0 * worst)


# --- stochastic short yield --------------------------------------------------


@dataclass(frozen=True)
class YieldEstimate:
    clean_probability: float
    ci_low: float
    ci_high: float
    trials: int


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054):
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (max(center - half, 0.0), min(center + half, 1.0))


def redundant_nets(netlist: Netlist | None) -> set[str]:
    """Nets whose member instances all belong to a redundancy group."""
    if netlist is None:
        return set()
    covered = {i for group in netlist.redundancy_groups for i in group}
    out = set()
    for net_id, endpoints in netlist.nets:
        members = {inst for inst, _ in endpoints}
        if members and members <= covered:
            out.add(net_id)
    return out


def simulate_shorts(
    layout: RoutedLayout,
    spec: ProcessSpec,
    trials: int,
    seed: int,
    netlist: Netlist | None = None,
) -> YieldEstimate:
    """Monte Carlo short yield: each printed wire shorts independently with
    probability short_rate; a trial fails when any shorted wire belongs to a
    non-redundant net.  Deterministic per seed."""
    if trials < 1:
        raise AnalysisError("trials must be >= 1")
    n_wires = len(layout.paths)
    rate = spec.short_rate
    if n_wires == 0 or rate == 0.0:
        return YieldEstimate(1.0, *wilson_interval(trials, trials), trials)

    protected = redundant_nets(netlist)
    critical = np.array(
        [i for i, p in enumerate(layout.paths) if p.net_id not in protected],
        dtype=np.uint64,
    )
    if len(critical) == 0:
        return YieldEstimate(1.0, *wilson_interval(trials, trials), trials)

    stream = rng.substream_seed(seed, _TAG_SHORTS)
    clean = 0
    chunk = max(1, min(trials, 4_000_000 // max(len(critical), 1)))
    w = np.uint64(n_wires)
    for t0 in range(0, trials, chunk):
        t1 = min(t0 + chunk, trials)
        t_idx = np.arange(t0, t1, dtype=np.uint64)
        # wire i of trial t draws stream slot t*n_wires + i
        slots = t_idx[:, None] * w + critical[None, :]
        u = rng.stream_unit(stream, slots.ravel()).reshape(len(t_idx), len(critical))
        failed = (u < rate).any(axis=1)
        clean += int((~failed).sum())
    low, high = wilson_interval(clean, trials)
    return YieldEstimate(clean / trials, low, high, trials)


# --- layout fingerprints ------------------------------------------------------


@dataclass(frozen=True)
class FingerprintConfig:
    position_bucket_nm: int = 100
    orientation_bucket_deg: float = 5.0
    n_bits: int = 256  # multiple of 64


@dataclass(frozen=True)
class Fingerprint:
    bits: bytes  # n_bits / 8 bytes, big-endian lanes

    def __len__(self):
        return len(self.bits) * 8


def layout_fingerprint(
    source: Substrate | ObservedField | RoutedLayout,
    config: FingerprintConfig | None = None,
    field: ObservedField | None = None,
) -> Fingerprint:
    """Hash quantized component poses into a fixed-length bit vector.

    Substrates use true poses; observed fields use estimated poses; routed
    layouts use the estimated poses of the components they actually employ
    (supply the observed field they were built from).
    """
    config = config or FingerprintConfig()
    if config.n_bits % 64 != 0 or config.n_bits <= 0:
        raise AnalysisError("n_bits must be a positive multiple of 64")

    if isinstance(source, Substrate):
        poses = [(c.center[0], c.center[1], c.orientation) for c in source.components]
    elif isinstance(source, ObservedField):
        poses = [
            (o.center_est[0], o.center_est[1], o.orientation_est)
            for o in source.observations
        ]
    elif isinstance(source, RoutedLayout):
        if field is None:
            raise AnalysisError("layout fingerprints need the observed field")
        used = set(source.assignment.mapping.values())
        poses = [
            (o.center_est[0], o.center_est[1], o.orientation_est)
            for o in field.observations
            if o.obs_id in used
        ]
    else:
        raise AnalysisError(f"cannot fingerprint {type(source).__name__}")
    if not poses:
        raise AnalysisError("cannot fingerprint an empty layout")

    values = []
    for x, y, theta in poses:
        bx = x // config.position_bucket_nm
        by = y // config.position_bucket_nm
        bt = int(theta // config.orientation_bucket_deg)
        v = rng.mix64(rng.mix64(rng.mix64(0xF1B0 ^ bx) + by) + bt)
        values.append(v)
    values.sort()

    lanes = [rng.mix64(0xC0FFEE + i) for i in range(config.n_bits // 64)]
    for j, v in enumerate(values):
        k = j % len(lanes)
        lanes[k] = rng.mix64((lanes[k] + v) & rng.MASK64)
    # one avalanche round so late elements reach every lane
    acc = 0
    for k in range(len(lanes)):
        acc = rng.mix64(acc ^ lanes[k])
        lanes[k] = acc
    return Fingerprint(b"".join(v.to_bytes(8, "big") for v in lanes))


def fingerprint_distance(a: Fingerprint, b: Fingerprint) -> int:
    if len(a.bits) != len(b.bits):
        raise AnalysisError("fingerprints have different lengths")
    return sum(bin(x ^ y).count("1") for x, y in zip(a.bits, b.bits))


# --- aggregated report --------------------------------------------------------


class IntegrityError(AnalysisError):
    pass


@dataclass(frozen=True)
class FabricationReport:
    components_total: int
    components_assigned: int
    components_routed: int
    routed_fraction: float
    total_wire_length_nm: int
    print_time_s: float
    worst_net_delay_s: float
    max_frequency_hz: float
    expected_shorts: float
    yield_estimate: YieldEstimate
    footprint_mm2: float
    bridge_count: int
    failed_net_count: int
    spec_echo: dict = field(compare=False, default_factory=dict)

    def metrics(self) -> dict:
        """Flat metric dict used by threshold checking and JSON export."""
        return {
            "components_total": self.components_total,
            "components_assigned": self.components_assigned,
            "components_routed": self.components_routed,
            "routed_fraction": self.routed_fraction,
            "total_wire_length_nm": self.total_wire_length_nm,
            "print_time_s": self.print_time_s,
            "worst_net_delay_s": self.worst_net_delay_s,
            "max_frequency_hz": self.max_frequency_hz,
            "expected_shorts": self.expected_shorts,
            "yield": self.yield_estimate.clean_probability,
            "yield_ci_low": self.yield_estimate.ci_low,
            "yield_ci_high": self.yield_estimate.ci_high,
            "footprint_mm2": self.footprint_mm2,
            "bridge_count": self.bridge_count,
            "failed_net_count": self.failed_net_count,
        }


def report(
    netlist: Netlist,
    field_: ObservedField,
    assignment,
    layout: RoutedLayout,
    kinds: dict[str, ComponentKind],
    spec: ProcessSpec,
    seed: int,
    yield_trials: int = 1000,
) -> FabricationReport:
    """Aggregate every metric for one pipeline run."""
    if layout.assignment is not assignment and getattr(
        layout.assignment, "mapping", None
    ) != assignment.mapping:
        raise IntegrityError("layout was not produced from this assignment")

    routed_nets = {p.net_id for p in layout.paths}
    failed = set(layout.failed_nets)
    nets_of: dict[str, list[str]] = {}
    for net_id, endpoints in netlist.nets:
        for inst, _pin in endpoints:
            nets_of.setdefault(inst, []).append(net_id)

    routed_count = 0
    for inst in assignment.mapping:
        incident = nets_of.get(inst, [])
        if all(n in routed_nets for n in incident) and not any(
            n in failed for n in incident
        ):
            routed_count += 1

    total = len(field_.observations)
    worst = 0.0
    freq = 0.0
    try:
        freq = max_frequency(layout, netlist, kinds, spec)
        worst = 1.0 / (2.0 * freq)
    except AnalysisError:
        pass

    y = simulate_shorts(layout, spec, yield_trials, seed, netlist)
    from .model import serialize_process_spec

    return FabricationReport(
        components_total=total,
        components_assigned=len(assignment.mapping),
        components_routed=routed_count,
        routed_fraction=(routed_count / total) if total else 0.0,
        total_wire_length_nm=layout.total_wire_length,
        print_time_s=print_time(layout, spec),
        worst_net_delay_s=worst,
        max_frequency_hz=freq,
        expected_shorts=len(layout.paths) * spec.short_rate,
        yield_estimate=y,
        footprint_mm2=layout.footprint,
        bridge_count=layout.bridge_count,
        failed_net_count=len(layout.failed_nets),
        spec_echo={"process_spec": serialize_process_spec(spec)},
    )
