"""Command-line pipeline driver.

Commands mirror the pipeline stages and can run end-to-end or one stage at
a time through JSON artifact files:

    inkfab bench --scenario diffpair --out run/
    inkfab run --manifest run/manifest.json
    inkfab check --report run/report.json --thresholds run/thresholds.json

Every stochastic stage takes an explicit seed; there is no ambient
randomness anywhere, so re-running a manifest reproduces every artifact
byte for byte.  Exit codes: 0 = success/thresholds met, 1 = thresholds
failed, 2 = error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path as FsPath

from . import bench as bench_mod
from . import io_formats as iof
from .analyze import report as make_report
from .assign import assign
from .deposition import deposit, inject_defects
from .kinds import builtin_kinds
from .model import (
    Netlist,
    ProcessSpec,
    load_process_spec,
    serialize_process_spec,
    validate_netlist,
)
from .render import render_svg
from .route import build_routing_grid, route_all
from .vision import observe

SEED_STAGES = ("deposit", "defect", "vision", "shorts")


class StageError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class RunManifest:
    spec_path: FsPath
    netlist_path: FsPath
    seeds: dict[str, int]
    out_dir: FsPath
    policy: str = "lattice"
    keep_truth: bool = False
    kind_mix: dict[str, float] | None = None
    defect_classification_accuracy: float = 1.0
    thresholds_path: FsPath | None = None

    @classmethod
    def load(cls, path: FsPath) -> "RunManifest":
        base = path.parent
        data = json.loads(path.read_text(encoding="utf-8"))
        seeds = data.get("seeds", {})
        missing = [s for s in SEED_STAGES if s not in seeds]
        if missing:
            raise StageError(
                "manifest", f"missing seed(s) for stage(s): {', '.join(missing)}"
            )
        return cls(
            spec_path=base / data["spec"],
            netlist_path=base / data["netlist"],
            seeds={s: int(seeds[s]) for s in SEED_STAGES},
            out_dir=base / data.get("out", "."),
            policy=data.get("policy", "lattice"),
            keep_truth=bool(data.get("keep_truth", False)),
            kind_mix=data.get("kind_mix"),
            defect_classification_accuracy=float(
                data.get("defect_classification_accuracy", 1.0)
            ),
            thresholds_path=(base / data["thresholds"]) if data.get("thresholds") else None,
        )


def _load_spec(path: FsPath) -> ProcessSpec:
    try:
        return load_process_spec(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise StageError("spec", str(exc)) from exc
    except ValueError as exc:
        raise StageError("spec", str(exc)) from exc


def _load_netlist(path: FsPath) -> Netlist:
    try:
        return iof.netlist_from_dict(iof.load_json(path))
    except FileNotFoundError as exc:
        raise StageError("netlist", str(exc)) from exc
    except (KeyError, ValueError, TypeError) as exc:
        raise StageError("netlist", f"bad netlist document: {exc}") from exc


def _mix_for(netlist: Netlist, kind_mix: dict[str, float] | None):
    kinds = builtin_kinds()
    if kind_mix:
        try:
            return [(kinds[k], f) for k, f in sorted(kind_mix.items())], kinds
        except KeyError as exc:
            raise StageError("deposit", f"unknown kind in mix: {exc}") from exc
    counts: dict[str, int] = {}
    for _inst, kind_id in netlist.instances:
        if kind_id not in kinds:
            raise StageError("netlist", f"unknown kind {kind_id}")
        counts[kind_id] = counts.get(kind_id, 0) + 1
    total = sum(counts.values())
    if total == 0:
        raise StageError("deposit", "empty netlist and no explicit kind mix")
    return [(kinds[k], c / total) for k, c in sorted(counts.items())], kinds


def cmd_run(manifest: RunManifest) -> int:
    spec = _load_spec(manifest.spec_path)
    netlist = _load_netlist(manifest.netlist_path)
    mix, kinds = _mix_for(netlist, manifest.kind_mix)

    validation = validate_netlist(netlist, kinds)
    if not validation.ok:
        first = next(i for i in validation.issues if i.severity == "error")
        raise StageError("netlist", f"invalid netlist: {first.message}")

    out = manifest.out_dir
    out.mkdir(parents=True, exist_ok=True)

    try:
        substrate = deposit(spec, mix, manifest.policy, manifest.seeds["deposit"])
        substrate = inject_defects(substrate, spec.defect_rate, manifest.seeds["defect"])
    except ValueError as exc:
        raise StageError("deposit", str(exc)) from exc
    iof.dump_json(iof.substrate_to_dict(substrate), out / "substrate.json")

    try:
        field = observe(
            substrate,
            spec,
            kinds,
            manifest.defect_classification_accuracy,
            manifest.seeds["vision"],
        )
    except ValueError as exc:
        raise StageError("vision", str(exc)) from exc
    iof.dump_json(iof.field_to_dict(field, manifest.keep_truth), out / "observed.json")

    assignment = assign(netlist, field)
    iof.dump_json(iof.assignment_to_dict(assignment), out / "assignment.json")

    try:
        grid = build_routing_grid(field, kinds, spec)
    except ValueError as exc:
        raise StageError("route", str(exc)) from exc
    layout = route_all(grid, netlist, assignment, spec, field=field, kinds=kinds)
    iof.dump_json(iof.layout_to_dict(layout), out / "layout.json")

    rep = make_report(
        netlist, field, assignment, layout, kinds, spec, manifest.seeds["shorts"]
    )
    iof.dump_json(iof.report_to_dict(rep), out / "report.json", indent=2)

    svg = render_svg(iof.layout_to_dict(layout), iof.field_to_dict(field, False))
    (out / "layout.svg").write_text(svg, encoding="utf-8")

    if manifest.thresholds_path is not None:
        thresholds = iof.load_json(manifest.thresholds_path)
        ok = _check_metrics(rep.metrics(), thresholds, quiet=False)
        return 0 if ok else 1
    return 0


# --- threshold checking ----------------------------------------------------------


def _check_metrics(metrics: dict, thresholds: dict, quiet: bool = True) -> bool:
    all_ok = True
    rows = []
    for key in sorted(thresholds):
        value = thresholds[key]
        if key.startswith("min_"):
            metric = key[4:]
            direction = ">="
        elif key.startswith("max_"):
            metric = key[4:]
            direction = "<="
        else:
            raise StageError("check", f"threshold key must start with min_/max_: {key}")
        metric = _ALIASES.get(metric, metric)
        if metric not in metrics:
            raise StageError("check", f"unknown metric {metric!r} in threshold {key}")
        actual = metrics[metric]
        ok = actual >= value if direction == ">=" else actual <= value
        all_ok &= ok
        rows.append((key, actual, value, ok))
    for key, actual, value, ok in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {key:<32} actual={actual:.6g} limit={value:.6g}")
    return all_ok


_ALIASES = {
    "print_time_s": "print_time_s",
    "max_frequency_hz": "max_frequency_hz",
    "routed_components": "components_routed",
}


def cmd_check(report_path: FsPath, thresholds_path: FsPath) -> int:
    metrics = iof.load_json(report_path)
    thresholds = iof.load_json(thresholds_path)
    if not isinstance(thresholds, dict):
        raise StageError("check", "thresholds document must be a JSON object")
    ok = _check_metrics(metrics, thresholds, quiet=False)
    return 0 if ok else 1


# --- argument parsing --------------------------------------------------------------


def _add_seed_args(p: argparse.ArgumentParser, stages=SEED_STAGES):
    for stage in stages:
        p.add_argument(f"--seed-{stage}", type=int, default=None)


def _seeds_from_args(args, stages=SEED_STAGES) -> dict[str, int]:
    seeds = {}
    for stage in stages:
        v = getattr(args, f"seed_{stage}")
        if v is None:
            raise StageError("manifest", f"missing --seed-{stage} (seeds are mandatory)")
        seeds[stage] = v
    return seeds


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="inkfab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="full pipeline: deposit, observe, assign, route, report, render")
    runp.add_argument("--manifest", type=FsPath, default=None)
    runp.add_argument("--spec", type=FsPath, default=None)
    runp.add_argument("--netlist", type=FsPath, default=None)
    runp.add_argument("--out", type=FsPath, default=FsPath("."))
    runp.add_argument("--policy", choices=("lattice", "poisson"), default="lattice")
    runp.add_argument("--keep-truth", action="store_true")
    runp.add_argument("--thresholds", type=FsPath, default=None)
    _add_seed_args(runp)

    dep = sub.add_parser("deposit", help="deposit components and inject defects")
    dep.add_argument("--spec", type=FsPath, required=True)
    dep.add_argument("--netlist", type=FsPath, required=True)
    dep.add_argument("--policy", choices=("lattice", "poisson"), default="lattice")
    dep.add_argument("--out", type=FsPath, required=True)
    _add_seed_args(dep, ("deposit", "defect"))

    obs = sub.add_parser("observe", help="simulate the vision stage")
    obs.add_argument("--spec", type=FsPath, required=True)
    obs.add_argument("--substrate", type=FsPath, required=True)
    obs.add_argument("--out", type=FsPath, required=True)
    obs.add_argument("--keep-truth", action="store_true")
    obs.add_argument("--accuracy", type=float, default=1.0)
    _add_seed_args(obs, ("vision",))

    asg = sub.add_parser("assign", help="map the netlist onto observed components")
    asg.add_argument("--netlist", type=FsPath, required=True)
    asg.add_argument("--observed", type=FsPath, required=True)
    asg.add_argument("--out", type=FsPath, required=True)

    rt = sub.add_parser("route", help="route all nets")
    rt.add_argument("--spec", type=FsPath, required=True)
    rt.add_argument("--netlist", type=FsPath, required=True)
    rt.add_argument("--observed", type=FsPath, required=True)
    rt.add_argument("--assignment", type=FsPath, required=True)
    rt.add_argument("--out", type=FsPath, required=True)

    rep = sub.add_parser("report", help="compute fabrication metrics")
    rep.add_argument("--spec", type=FsPath, required=True)
    rep.add_argument("--netlist", type=FsPath, required=True)
    rep.add_argument("--observed", type=FsPath, required=True)
    rep.add_argument("--assignment", type=FsPath, required=True)
    rep.add_argument("--layout", type=FsPath, required=True)
    rep.add_argument("--out", type=FsPath, required=True)
    _add_seed_args(rep, ("shorts",))

    chk = sub.add_parser("check", help="gate a report against thresholds")
    chk.add_argument("--report", type=FsPath, required=True)
    chk.add_argument("--thresholds", type=FsPath, required=True)

    ren = sub.add_parser("render", help="render a layout to SVG")
    ren.add_argument("--layout", type=FsPath, required=True)
    ren.add_argument("--observed", type=FsPath, default=None)
    ren.add_argument("--scale", type=float, default=100.0, help="nm per pixel")
    ren.add_argument("--out", type=FsPath, required=True)

    ben = sub.add_parser("bench", help="emit a benchmark scenario")
    ben.add_argument(
        "--scenario",
        choices=("random_logic", "flipflop", "diffpair", "timer555"),
        required=True,
    )
    ben.add_argument("--n", type=int, default=1000)
    ben.add_argument("--fanout", type=int, default=5)
    ben.add_argument("--spacing", type=int, default=10_000)
    ben.add_argument("--stages", type=int, default=2)
    ben.add_argument("--seed", type=int, default=0)
    ben.add_argument("--out", type=FsPath, required=True)
    return p


def _cmd_bench(args) -> int:
    if args.scenario == "random_logic":
        sc = bench_mod.gen_random_logic(args.n, args.fanout, args.spacing, args.seed)
    elif args.scenario == "flipflop":
        sc = bench_mod.gen_flipflop_chain(args.stages, args.seed)
    elif args.scenario == "diffpair":
        sc = bench_mod.gen_differential_pair(args.seed)
    else:
        sc = bench_mod.gen_555_like(args.seed)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    iof.dump_json(iof.netlist_to_dict(sc.netlist), out / "netlist.json")
    (out / "spec.txt").write_text(serialize_process_spec(sc.spec), encoding="utf-8")
    iof.dump_json(sc.thresholds, out / "thresholds.json", indent=2)
    manifest = {
        "scenario": sc.name,
        "spec": "spec.txt",
        "netlist": "netlist.json",
        "seeds": sc.seeds,
        "out": ".",
        "policy": sc.policy,
        "kind_mix": {k: f for k, f in sc.kind_mix},
        "thresholds": "thresholds.json",
    }
    iof.dump_json(manifest, out / "manifest.json", indent=2)
    print(f"wrote scenario {sc.name} to {out}")
    return 0


def _dispatch(args) -> int:
    if args.command == "run":
        if args.manifest is not None:
            manifest = RunManifest.load(args.manifest)
        else:
            if args.spec is None or args.netlist is None:
                raise StageError("manifest", "run needs --manifest or --spec/--netlist")
            manifest = RunManifest(
                spec_path=args.spec,
                netlist_path=args.netlist,
                seeds=_seeds_from_args(args),
                out_dir=args.out,
                policy=args.policy,
                keep_truth=args.keep_truth,
                thresholds_path=args.thresholds,
            )
        return cmd_run(manifest)

    if args.command == "deposit":
        spec = _load_spec(args.spec)
        netlist = _load_netlist(args.netlist)
        mix, _kinds = _mix_for(netlist, None)
        seeds = _seeds_from_args(args, ("deposit", "defect"))
        try:
            sub_ = deposit(spec, mix, args.policy, seeds["deposit"])
            sub_ = inject_defects(sub_, spec.defect_rate, seeds["defect"])
        except ValueError as exc:
            raise StageError("deposit", str(exc)) from exc
        iof.dump_json(iof.substrate_to_dict(sub_), args.out)
        return 0

    if args.command == "observe":
        spec = _load_spec(args.spec)
        sub_ = iof.substrate_from_dict(iof.load_json(args.substrate))
        seeds = _seeds_from_args(args, ("vision",))
        try:
            field = observe(sub_, spec, builtin_kinds(), args.accuracy, seeds["vision"])
        except ValueError as exc:
            raise StageError("vision", str(exc)) from exc
        iof.dump_json(iof.field_to_dict(field, args.keep_truth), args.out)
        return 0

    if args.command == "assign":
        netlist = _load_netlist(args.netlist)
        field = iof.field_from_dict(iof.load_json(args.observed))
        assignment = assign(netlist, field)
        iof.dump_json(iof.assignment_to_dict(assignment), args.out)
        return 0

    if args.command == "route":
        spec = _load_spec(args.spec)
        netlist = _load_netlist(args.netlist)
        field = iof.field_from_dict(iof.load_json(args.observed))
        assignment = iof.assignment_from_dict(iof.load_json(args.assignment))
        kinds = builtin_kinds()
        try:
            grid = build_routing_grid(field, kinds, spec)
        except ValueError as exc:
            raise StageError("route", str(exc)) from exc
        layout = route_all(grid, netlist, assignment, spec, field=field, kinds=kinds)
        iof.dump_json(iof.layout_to_dict(layout), args.out)
        return 0

    if args.command == "report":
        spec = _load_spec(args.spec)
        netlist = _load_netlist(args.netlist)
        field = iof.field_from_dict(iof.load_json(args.observed))
        assignment = iof.assignment_from_dict(iof.load_json(args.assignment))
        layout = iof.layout_from_dict(iof.load_json(args.layout))
        seeds = _seeds_from_args(args, ("shorts",))
        rep = make_report(
            netlist, field, assignment, layout, builtin_kinds(), spec, seeds["shorts"]
        )
        iof.dump_json(iof.report_to_dict(rep), args.out, indent=2)
        return 0

    if args.command == "check":
        return cmd_check(args.report, args.thresholds)

    if args.command == "render":
        try:
            layout_data = iof.load_json(args.layout)
        except (json.JSONDecodeError, FileNotFoundError) as exc:
            raise StageError("render", f"invalid layout: {exc}") from exc
        field_data = iof.load_json(args.observed) if args.observed else None
        try:
            svg = render_svg(layout_data, field_data, args.scale)
        except (KeyError, ValueError, TypeError) as exc:
            raise StageError("render", f"invalid layout: {exc}") from exc
        args.out.write_text(svg, encoding="utf-8")
        return 0

    if args.command == "bench":
        return _cmd_bench(args)

    raise StageError("cli", f"unknown command {args.command}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"[io] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
