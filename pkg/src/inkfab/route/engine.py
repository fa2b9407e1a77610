"""Print-path planning over the routing grid.

Multi-terminal nets are routed as sequential two-point connections to the
growing tree (nearest terminal first).  Each connection is an A* search
with the Manhattan heuristic, unit step cost, and a penalty to cross an
occupied cell as an insulated bridge.  Nets are routed in ascending
spanning-length order; failures trigger rip-up-and-reroute rounds that
remove the most conflicting committed nets along the failed net's best
relaxed corridor.

Wire widths follow the contact rule: contact width within 1 um of one of
the net's own pins, interconnect width elsewhere.  Clearance between
distinct nets is kept by halo masks stamped when a net finishes; a net
therefore never blocks itself while growing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .._kernels import kernel
from ..geometry import spanning_length
from ..model import Netlist, ProcessSpec
from .grid import RoutingGrid

FREE = -1


@dataclass(frozen=True)
class RouteParams:
    bridge_penalty: int = 20
    ripup_rounds: int = 3
    ripup_k: int = 5
    window_margin: int = 16          # cells; grows x4 per retry
    max_margin: int = 768
    full_window_limit: int = 512     # grids at or below this route windowless
    relax_mask_cost: int = 10
    relax_occ_cost: int = 50
    thin_zone_nm: int = 1000         # contact-width zone around pins


@dataclass(frozen=True)
class Path:
    net_id: str
    points: tuple[tuple[int, int], ...]   # polyline vertices, nm
    widths: tuple[int, ...]               # nm, one per vertex-to-vertex segment
    bridges: tuple[tuple[int, int, str], ...]  # (x_nm, y_nm, crossed net id)
    length_nm: int


@dataclass(frozen=True)
class RoutedLayout:
    assignment: object
    paths: tuple[Path, ...]
    failed_nets: tuple[str, ...]
    total_wire_length: int                # nm
    bridge_count: int
    footprint: float                      # mm^2
    net_terminals: dict[str, tuple[tuple[int, int], ...]]  # net -> pin cells
    grid: RoutingGrid | None = None


class RouteFailure(Exception):
    def __init__(self, net_id: str, reason: str, terminal=None):
        super().__init__(f"net {net_id}: {reason}")
        self.net_id = net_id
        self.reason = reason
        self.terminal = terminal  # the cell that could not be served


def clearance_radii(spec: ProcessSpec) -> tuple[int, int, int]:
    """(thin-thin, thin-thick, thick-thick) halo radii in cells.

    Required center distance between wires a and b is
    (w_a + w_b)/2 + max(spacing_a, spacing_b); spacing defaults to the
    wire's own width (1x rule).
    """
    p = spec.grid_pitch
    wt = spec.contact_wire_width
    wk = spec.interconnect_wire_width_max
    st = spec.spacing_for(wt)
    sk = spec.spacing_for(wk)
    # refusing cells at Chebyshev <= r keeps centerlines at >= (r+1)*pitch,
    # so the smallest adequate radius is ceil(sep/pitch) - 1
    r_tt = max(math.ceil((wt + st) / p) - 1, 0)
    r_tk = max(math.ceil(((wt + wk) / 2 + max(st, sk)) / p) - 1, 0)
    r_kk = max(math.ceil((wk + sk) / p) - 1, 0)
    return (r_tt, r_tk, r_kk)


class Router:
    """Mutable routing state over one grid. Single-threaded by design."""

    def __init__(self, grid: RoutingGrid, spec: ProcessSpec, params: RouteParams | None = None):
        self.grid = grid
        self.spec = spec
        self.params = params or RouteParams()
        nx, ny = grid.dims
        self.occ = np.full((ny, nx), FREE, dtype=np.int32)
        self.mask_thin = np.zeros((ny, nx), dtype=np.uint16)
        self.mask_thick = np.zeros((ny, nx), dtype=np.uint16)
        self.guard_thin = np.zeros((ny, nx), dtype=np.uint8)
        self.guard_thick = np.zeros((ny, nx), dtype=np.uint8)
        self.radii = clearance_radii(spec)
        self.r_max = max(self.radii)
        # body proximity map: equal-length paths prefer to keep this
        # standoff from components so pin pockets stay open
        self.prox = _dilate(grid.blocked, self.radii[0] + 2)
        self.thin_r2 = (self.params.thin_zone_nm / grid.pitch) ** 2
        self.net_index: dict[str, int] = {}
        self.net_ids: list[str] = []
        # per committed net: (edge cell lists, claimed cells, terminals, bridges)
        self.committed: dict[str, dict] = {}
        self.guarded: set[str] = set()

    def _index_for(self, net_id: str) -> int:
        if net_id not in self.net_index:
            self.net_index[net_id] = len(self.net_ids)
            self.net_ids.append(net_id)
        return self.net_index[net_id]

    def _window(self, cells, margin: int) -> tuple[int, int, int, int]:
        nx, ny = self.grid.dims
        if max(nx, ny) <= self.params.full_window_limit:
            return (0, 0, nx, ny)
        xs = [c[0] for c in cells]
        ys = [c[1] for c in cells]
        return (
            max(min(xs) - margin, 0),
            max(min(ys) - margin, 0),
            min(max(xs) + margin + 1, nx),
            min(max(ys) + margin + 1, ny),
        )

    def add_terminal_guards(self, terminals_by_net: dict[str, list[tuple[int, int]]]) -> None:
        """Pre-stamp pin landing cells so earlier wires keep clear of later
        terminals.  Each net discounts its own stamps while probing."""
        for net_id in sorted(terminals_by_net):
            if net_id in self.guarded:
                continue
            cells = sorted(set(terminals_by_net[net_id]), key=lambda c: (c[1], c[0]))
            kernel.stamp_guards(
                self.mask_thin, self.mask_thick, self.guard_thin, self.guard_thick,
                cells, self.radii[0], self.radii[1],
            )
            self.guarded.add(net_id)

    def _terminal_ok(self, cell, net_idx, own_terms) -> str | None:
        x, y = cell
        if self.grid.blocked[y, x]:
            return "terminal blocked by a component body"
        o = self.occ[y, x]
        if o != FREE and o != net_idx:
            return f"terminal occupied by net {self.net_ids[o]}"
        # terminals are pins, so the probe tier is always thin
        r = self.radii[0]
        own = sum(1 for tx, ty in own_terms if abs(x - tx) <= r and abs(y - ty) <= r)
        if self.mask_thin[y, x] != own:
            return "terminal inside another net's clearance zone"
        return None

    def route_net(self, terminals: list[tuple[int, int]], net_id: str) -> list[Path]:
        """Route one net through its terminal cells; commits on success.

        Raises RouteFailure (leaving state unchanged) when any terminal
        cannot be reached.
        """
        if len(set(terminals)) < 2:
            terminals = list(dict.fromkeys(terminals))
            if len(terminals) < 2:
                raise RouteFailure(net_id, "net needs >= 2 distinct terminal cells")
        net_idx = self._index_for(net_id)
        terms = sorted(set(terminals), key=lambda c: (c[1], c[0]))
        self.add_terminal_guards({net_id: terms})
        for cell in terms:
            why = self._terminal_ok(cell, net_idx, terms)
            if why:
                raise RouteFailure(net_id, f"{why} at {cell}", terminal=cell)

        term_x = np.array([c[0] for c in terms], dtype=np.int64)
        term_y = np.array([c[1] for c in terms], dtype=np.int64)

        tree = [terms[0]]
        remaining = list(terms[1:])
        edges: list[list[tuple[int, int]]] = []
        edge_bridges: list[list[tuple[int, int, int]]] = []
        edge_insulated: list[list[bool]] = []
        claimed_all: list[tuple[int, int]] = []

        self.occ[terms[0][1], terms[0][0]] = net_idx
        claimed_all.append(terms[0])
        try:
            while remaining:
                # nearest terminal to the current tree (Manhattan)
                best = None
                for t in remaining:
                    d = min(abs(t[0] - c[0]) + abs(t[1] - c[1]) for c in tree)
                    cand = (d, t[1], t[0])
                    if best is None or cand < best:
                        best = cand
                target = (best[2], best[1])
                remaining.remove(target)

                result = self._search_edge(net_idx, tree, target, term_x, term_y)
                if result is None:
                    raise RouteFailure(
                        net_id, f"no path to terminal {target}", terminal=target
                    )
                cells, _cost, bridges, insulated = result
                claimed = kernel.commit_occ(self.occ, net_idx, cells)
                claimed_all.extend(claimed)
                tree.extend(claimed)
                edges.append(cells)
                edge_bridges.append(bridges)
                edge_insulated.append(insulated)
        except RouteFailure:
            kernel.clear_occ(self.occ, net_idx, claimed_all)
            raise

        # halos stamp only when the net is complete, so a net never blocks
        # its own tree growth; insulated jump cells stamp nothing (the
        # bridge pad isolates them)
        stamp_cells = _dedupe_stampable(edges, edge_insulated)
        tiers = self._cell_tiers(stamp_cells, term_x, term_y)
        kernel.stamp_net(
            self.mask_thin, self.mask_thick, stamp_cells, tiers, *self.radii, +1
        )
        paths = self._make_paths(net_id, edges, edge_bridges, term_x, term_y)
        self.committed[net_id] = {
            "edges": edges,
            "claimed": claimed_all,
            "terminals": terms,
            "paths": paths,
            "stamp_cells": stamp_cells,
            "stamp_tiers": tiers,
        }
        return paths

    def _search_edge(self, net_idx, tree, target, term_x, term_y, relax=(0, 0)):
        margin = self.params.window_margin
        while True:
            window = self._window(tree + [target], margin)
            result = kernel.astar(
                self.grid.blocked,
                self.occ,
                self.mask_thin,
                self.mask_thick,
                self.guard_thin,
                self.guard_thick,
                self.prox,
                net_idx,
                tree,
                target,
                term_x,
                term_y,
                self.thin_r2,
                self.radii[0],
                self.radii[1],
                self.r_max,
                self.params.bridge_penalty,
                window,
                relax[0],
                relax[1],
            )
            if result is not None:
                return result
            nx, ny = self.grid.dims
            covers = window == (0, 0, nx, ny)
            if covers or margin >= self.params.max_margin:
                return None
            margin = min(margin * 4, self.params.max_margin)

    def _cell_tiers(self, cells, term_x, term_y):
        if not cells:
            return []
        xs = np.fromiter((c[0] for c in cells), dtype=np.int64, count=len(cells))
        ys = np.fromiter((c[1] for c in cells), dtype=np.int64, count=len(cells))
        d2 = (
            (xs[:, None] - term_x[None, :]) ** 2
            + (ys[:, None] - term_y[None, :]) ** 2
        ).min(axis=1)
        return (d2 <= self.thin_r2).astype(np.int64).tolist()

    def _make_paths(self, net_id, edges, edge_bridges, term_x, term_y):
        pitch = self.grid.pitch
        paths = []
        wt = self.spec.contact_wire_width
        wk = self.spec.interconnect_wire_width_max
        for cells, bridges in zip(edges, edge_bridges):
            tiers = self._cell_tiers(cells, term_x, term_y)
            pts = [self.grid.cell_center_nm(cells[0])]
            widths = []
            # compress to vertices; split segments where the width tier flips
            for i in range(1, len(cells)):
                # contact width if either end of the step touches a pin zone
                seg_w = wt if (tiers[i - 1] or tiers[i]) else wk
                p = self.grid.cell_center_nm(cells[i])
                if (
                    len(pts) >= 2
                    and widths
                    and widths[-1] == seg_w
                    and _collinear(pts[-2], pts[-1], p)
                ):
                    pts[-1] = p
                else:
                    pts.append(p)
                    widths.append(seg_w)
            length = (len(cells) - 1) * pitch
            paths.append(
                Path(
                    net_id=net_id,
                    points=tuple(pts),
                    widths=tuple(widths),
                    bridges=tuple(
                        (x * pitch + pitch // 2, y * pitch + pitch // 2, self.net_ids[n])
                        for x, y, n in bridges
                    ),
                    length_nm=length,
                )
            )
        return paths

    def rip_up(self, net_id: str) -> None:
        state = self.committed.pop(net_id)
        net_idx = self.net_index[net_id]
        kernel.stamp_net(
            self.mask_thin,
            self.mask_thick,
            state["stamp_cells"],
            state["stamp_tiers"],
            *self.radii,
            -1,
        )
        kernel.clear_occ(self.occ, net_idx, state["claimed"])

    def conflict_nets(
        self,
        terminals: list[tuple[int, int]],
        net_id: str,
        focus_terminal: tuple[int, int] | None = None,
    ) -> list[str]:
        """Victim candidates for rip-up, most critical first.

        Nets whose wires sit right next to the terminal that failed come
        first (they can seal a pin in, and a corridor count alone would
        rank them too low), followed by the nets touched along the failed
        net's best relaxed corridor, by touch count.
        """
        net_idx = self._index_for(net_id)
        terms = sorted(set(terminals), key=lambda c: (c[1], c[0]))
        term_x = np.array([c[0] for c in terms], dtype=np.int64)
        term_y = np.array([c[1] for c in terms], dtype=np.int64)
        ny, nx = self.occ.shape
        r = self.r_max

        def nets_near(cells, radius):
            found: dict[str, int] = {}
            for x, y in cells:
                ya, yb = max(y - radius, 0), min(y + radius + 1, ny)
                xa, xb = max(x - radius, 0), min(x + radius + 1, nx)
                window = self.occ[ya:yb, xa:xb]
                for o in np.unique(window):
                    if o != FREE and o != net_idx:
                        other = self.net_ids[o]
                        found[other] = found.get(other, 0) + 1
            return found

        focus = [focus_terminal] if focus_terminal is not None else terms
        blockers = nets_near(focus, 3 * r + 2)
        ranked_blockers = [n for n, _ in sorted(blockers.items(), key=lambda kv: (-kv[1], kv[0]))]

        tree = [terms[0]]
        counts: dict[str, int] = {}
        for target in terms[1:]:
            result = self._search_edge(
                net_idx, tree, target, term_x, term_y,
                relax=(self.params.relax_mask_cost, self.params.relax_occ_cost),
            )
            if result is None:
                continue
            cells, _cost, _bridges, _ins = result
            tree.extend(cells)
            for other, c in nets_near(cells, r).items():
                counts[other] = counts.get(other, 0) + c
        ranked = ranked_blockers + [
            net
            for net, _ in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
            if net not in blockers
        ]
        return ranked


def _dilate(blocked: np.ndarray, r: int) -> np.ndarray:
    """Chebyshev dilation by r cells (separable sliding maximum)."""
    out = blocked.astype(np.uint8, copy=True)
    for axis in (0, 1):
        acc = out.copy()
        for shift in range(1, r + 1):
            rolled = np.zeros_like(out)
            if axis == 0:
                rolled[shift:, :] = out[:-shift, :]
                acc |= rolled
                rolled = np.zeros_like(out)
                rolled[:-shift, :] = out[shift:, :]
                acc |= rolled
            else:
                rolled[:, shift:] = out[:, :-shift]
                acc |= rolled
                rolled = np.zeros_like(out)
                rolled[:, :-shift] = out[:, shift:]
                acc |= rolled
        out = acc
    return out


def _collinear(a, b, c):
    return (b[0] - a[0]) * (c[1] - b[1]) == (b[1] - a[1]) * (c[0] - b[0])


def _dedupe_stampable(edges, edge_insulated):
    """Unique path cells that should stamp halos.

    A cell is insulated only if every pass through it was part of a jump.
    """
    status: dict[tuple[int, int], bool] = {}
    order: list[tuple[int, int]] = []
    for cells, flags in zip(edges, edge_insulated):
        for c, ins in zip(cells, flags):
            if c not in status:
                status[c] = ins
                order.append(c)
            else:
                status[c] = status[c] and ins
    return [c for c in order if not status[c]]


def net_terminal_cells(
    netlist: Netlist,
    assignment,
    grid: RoutingGrid,
) -> tuple[dict[str, list[tuple[int, int]]], dict[str, str]]:
    """Terminal cells per net, plus per-net failure reasons found up front."""
    terminals: dict[str, list[tuple[int, int]]] = {}
    failures: dict[str, str] = {}
    for net_id, endpoints in netlist.nets:
        cells = []
        why = None
        for inst_id, pin_id in endpoints:
            obs_id = assignment.mapping.get(inst_id)
            if obs_id is None:
                why = f"instance {inst_id} unassigned"
                break
            if obs_id in grid.pin_conflicts:
                why = f"component {obs_id} has conflicting pin landings"
                break
            cell = grid.pin_cells.get((obs_id, pin_id))
            if cell is None:
                why = f"no landing cell for {obs_id}.{pin_id}"
                break
            cells.append(cell)
        if why:
            failures[net_id] = why
        else:
            terminals[net_id] = cells
    return terminals, failures


def route_all(
    grid: RoutingGrid,
    netlist: Netlist,
    assignment,
    spec: ProcessSpec,
    params: RouteParams | None = None,
    field=None,
    kinds=None,
) -> RoutedLayout:
    """Route every net; rip-up-and-reroute repairs first-pass failures."""
    params = params or RouteParams()
    router = Router(grid, spec, params)

    terminals, failures = net_terminal_cells(netlist, assignment, grid)

    def span(net_id):
        pts = [grid.cell_center_nm(c) for c in terminals[net_id]]
        return spanning_length(pts)

    order = sorted(terminals, key=lambda n: (span(n), n))
    failed: dict[str, str] = dict(failures)
    fail_terminal: dict[str, tuple[int, int] | None] = {}

    router.add_terminal_guards({n: terminals[n] for n in order})

    for net_id in order:
        try:
            router.route_net(terminals[net_id], net_id)
        except RouteFailure as exc:
            failed[net_id] = exc.reason
            fail_terminal[net_id] = exc.terminal

    retryable = [n for n in order if n in failed]
    for round_no in range(1, params.ripup_rounds + 1):
        if not retryable:
            break
        still_failed = []
        for net_id in retryable:
            # progressively more aggressive: interlocked failures (e.g. a
            # cross-coupled pair evicting each other) need a wider sweep
            victims = router.conflict_nets(
                terminals[net_id], net_id, fail_terminal.get(net_id)
            )[: params.ripup_k * round_no]
            for victim in victims:
                router.rip_up(victim)
            try:
                router.route_net(terminals[net_id], net_id)
                failed.pop(net_id, None)
            except RouteFailure as exc:
                failed[net_id] = exc.reason
                fail_terminal[net_id] = exc.terminal
                still_failed.append(net_id)
            for victim in victims:
                if victim in router.committed:
                    continue
                try:
                    router.route_net(terminals[victim], victim)
                    failed.pop(victim, None)
                except RouteFailure as exc:
                    failed[victim] = exc.reason
                    fail_terminal[victim] = exc.terminal
                    if victim not in still_failed:
                        still_failed.append(victim)
        retryable = still_failed

    paths: list[Path] = []
    for net_id in order:
        if net_id in router.committed:
            paths.extend(router.committed[net_id]["paths"])

    total = sum(p.length_nm for p in paths)
    bridge_count = sum(len(p.bridges) for p in paths)
    layout = RoutedLayout(
        assignment=assignment,
        paths=tuple(paths),
        failed_nets=tuple(sorted(failed)),
        total_wire_length=total,
        bridge_count=bridge_count,
        footprint=_footprint_mm2(paths, assignment, field, kinds),
        net_terminals={
            n: tuple(terminals[n]) for n in order if n in router.committed
        },
        grid=grid,
    )
    return layout


def _footprint_mm2(paths, assignment, field, kinds) -> float:
    """Bounding-box area of the laid-out circuit: wires plus the bodies of
    the components actually used."""
    from ..geometry import rect_corners

    xs: list[float] = []
    ys: list[float] = []
    for p in paths:
        for x, y in p.points:
            xs.append(x)
            ys.append(y)
    if field is not None and kinds is not None and assignment is not None:
        used = set(assignment.mapping.values())
        for obs in field.observations:
            if obs.obs_id not in used:
                continue
            bw, bh = kinds[obs.kind_id].body
            for cx, cy in rect_corners(*obs.center_est, bw, bh, obs.orientation_est):
                xs.append(cx)
                ys.append(cy)
    if not xs:
        return 0.0
    w = (max(xs) - min(xs)) / 1e6
    h = (max(ys) - min(ys)) / 1e6
    return w * h
