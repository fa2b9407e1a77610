"""Artifact file formats.

All artifacts are JSON with fixed key order and compact separators; floats
serialize with Python's shortest round-trip repr, so re-running a pipeline
with the same inputs produces byte-identical files, and staged runs see
exactly what the one-shot run computed.
"""

from __future__ import annotations

import json
from pathlib import Path as FsPath

from .assign import Assignment
from .deposition import PlacedComponent, Substrate
from .model import Netlist
from .route.engine import Path, RoutedLayout
from .vision import ObservedComponent, ObservedField


def dump_json(obj, path: FsPath | str, indent: int | None = None) -> None:
    text = json.dumps(obj, separators=(",", ":") if indent is None else None, indent=indent)
    FsPath(path).write_text(text + "\n", encoding="utf-8")


def load_json(path: FsPath | str):
    return json.loads(FsPath(path).read_text(encoding="utf-8"))


# --- netlist ------------------------------------------------------------------


def netlist_to_dict(netlist: Netlist) -> dict:
    return {
        "instances": [{"id": i, "kind": k} for i, k in netlist.instances],
        "nets": [
            {"id": nid, "pins": [[inst, pin] for inst, pin in eps]}
            for nid, eps in netlist.nets
        ],
        "redundancy_groups": [list(g) for g in netlist.redundancy_groups],
    }


def netlist_from_dict(data: dict) -> Netlist:
    return Netlist(
        instances=tuple((e["id"], e["kind"]) for e in data["instances"]),
        nets=tuple(
            (n["id"], tuple((inst, pin) for inst, pin in n["pins"]))
            for n in data["nets"]
        ),
        redundancy_groups=tuple(
            tuple(g) for g in data.get("redundancy_groups", [])
        ),
    )


# --- substrate ------------------------------------------------------------------


def substrate_to_dict(sub: Substrate) -> dict:
    return {
        "region": list(sub.region),
        "seed": sub.seed,
        "components": [
            {
                "phys_id": c.phys_id,
                "kind": c.kind_id,
                "x_nm": c.center[0],
                "y_nm": c.center[1],
                "theta_deg": c.orientation,
                "defective": c.defective,
            }
            for c in sub.components
        ],
        "overlaps": [list(p) for p in sub.overlaps],
    }


def substrate_from_dict(data: dict) -> Substrate:
    return Substrate(
        region=tuple(data["region"]),
        seed=data["seed"],
        components=tuple(
            PlacedComponent(
                phys_id=c["phys_id"],
                kind_id=c["kind"],
                center=(c["x_nm"], c["y_nm"]),
                orientation=c["theta_deg"],
                defective=c["defective"],
            )
            for c in data["components"]
        ),
        overlaps=tuple(tuple(p) for p in data["overlaps"]),
    )


# --- observed field ---------------------------------------------------------------


def field_to_dict(field: ObservedField, keep_truth: bool = False) -> dict:
    out = {
        "region": list(field.region),
        "observations": [
            {
                "obs_id": o.obs_id,
                **({"phys_id": o.phys_id} if keep_truth else {}),
                "kind": o.kind_id,
                "x_nm": o.center_est[0],
                "y_nm": o.center_est[1],
                "theta_deg": o.orientation_est,
                "classified_defective": o.classified_defective,
            }
            for o in field.observations
        ],
        "overlaps": [list(p) for p in field.overlaps],
    }
    if keep_truth:
        out["missed"] = list(field.missed)
    return out


def field_from_dict(data: dict) -> ObservedField:
    return ObservedField(
        region=tuple(data["region"]),
        observations=tuple(
            ObservedComponent(
                obs_id=o["obs_id"],
                phys_id=o.get("phys_id", ""),
                kind_id=o["kind"],
                center_est=(o["x_nm"], o["y_nm"]),
                orientation_est=o["theta_deg"],
                classified_defective=o["classified_defective"],
            )
            for o in data["observations"]
        ),
        missed=tuple(data.get("missed", [])),
        overlaps=tuple(tuple(p) for p in data.get("overlaps", [])),
    )


# --- assignment --------------------------------------------------------------------


def assignment_to_dict(a: Assignment) -> dict:
    return {
        "mapping": dict(sorted(a.mapping.items())),
        "unassigned_logical": list(a.unassigned_logical),
        "unused_physical": list(a.unused_physical),
        "cost_nm": a.cost,
    }


def assignment_from_dict(data: dict) -> Assignment:
    return Assignment(
        mapping=dict(data["mapping"]),
        unassigned_logical=tuple(data["unassigned_logical"]),
        unused_physical=tuple(data["unused_physical"]),
        cost=data["cost_nm"],
    )


# --- routed layout -----------------------------------------------------------------


def layout_to_dict(layout: RoutedLayout) -> dict:
    nets: dict[str, list] = {}
    for p in layout.paths:
        nets.setdefault(p.net_id, []).append(
            {
                "points": [list(pt) for pt in p.points],
                "widths_nm": list(p.widths),
                "bridges": [[x, y, net] for x, y, net in p.bridges],
                "length_nm": p.length_nm,
            }
        )
    return {
        "assignment": assignment_to_dict(layout.assignment)
        if layout.assignment is not None
        else None,
        "nets": [{"id": nid, "paths": paths} for nid, paths in sorted(nets.items())],
        "failed_nets": list(layout.failed_nets),
        "terminals": {
            nid: [list(c) for c in cells]
            for nid, cells in sorted(layout.net_terminals.items())
        },
        "total_wire_length_nm": layout.total_wire_length,
        "bridge_count": layout.bridge_count,
        "footprint_mm2": layout.footprint,
    }


def layout_from_dict(data: dict) -> RoutedLayout:
    paths = []
    for net in data["nets"]:
        for p in net["paths"]:
            paths.append(
                Path(
                    net_id=net["id"],
                    points=tuple(tuple(pt) for pt in p["points"]),
                    widths=tuple(p["widths_nm"]),
                    bridges=tuple((b[0], b[1], b[2]) for b in p["bridges"]),
                    length_nm=p["length_nm"],
                )
            )
    return RoutedLayout(
        assignment=assignment_from_dict(data["assignment"])
        if data.get("assignment")
        else None,
        paths=tuple(paths),
        failed_nets=tuple(data["failed_nets"]),
        total_wire_length=data["total_wire_length_nm"],
        bridge_count=data["bridge_count"],
        footprint=data["footprint_mm2"],
        net_terminals={
            nid: tuple(tuple(c) for c in cells)
            for nid, cells in data["terminals"].items()
        },
        grid=None,
    )


# --- report ---------------------------------------------------------------------


def report_to_dict(rep) -> dict:
    out = dict(rep.metrics())
    out["yield_trials"] = rep.yield_estimate.trials
    out["spec_echo"] = rep.spec_echo
    return out
