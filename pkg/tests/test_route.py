from collections import deque
from dataclasses import replace

import numpy as np
import pytest

from inkfab import rng
from inkfab.assign import Assignment
from inkfab.kinds import builtin_kinds
from inkfab.model import Netlist, ProcessSpec
from inkfab.route import (
    RoutedLayout,
    RouteParams,
    Router,
    build_routing_grid,
    check_design_rules,
    route_all,
)
from inkfab.route.engine import RouteFailure
from inkfab.route.grid import GridBuildError, RoutingGrid, snap_to_cell
from inkfab.vision import ObservedComponent, ObservedField

KINDS = builtin_kinds()

# toy spec: uniform 150 nm wires on a 150 nm grid -> clearance radius 2 cells
TOY = replace(
    ProcessSpec(),
    grid_pitch=150,
    contact_wire_width=150,
    interconnect_wire_width_max=150,
)


def _bare_grid(nx, ny, blocked_cells=(), pitch=150):
    blocked = np.zeros((ny, nx), dtype=np.uint8)
    for x, y in blocked_cells:
        blocked[y, x] = 1
    return RoutingGrid(
        pitch=pitch,
        dims=(nx, ny),
        blocked=blocked,
        pin_cells={},
        pin_conflicts=frozenset(),
        region=(nx * pitch, ny * pitch),
    )


def bfs_dist(blocked, start, goal):
    """Independent shortest-path oracle (unit-cost BFS, 4-connected)."""
    ny, nx = blocked.shape
    if blocked[start[1], start[0]] or blocked[goal[1], goal[0]]:
        return None
    dist = {start: 0}
    q = deque([start])
    while q:
        x, y = q.popleft()
        if (x, y) == goal:
            return dist[(x, y)]
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            n = (x + dx, y + dy)
            if 0 <= n[0] < nx and 0 <= n[1] < ny and not blocked[n[1], n[0]] and n not in dist:
                dist[n] = dist[(x, y)] + 1
                q.append(n)
    return None


def _route_len_cells(paths):
    return sum(p.length_nm for p in paths) // paths[0].net_id.__class__ if False else sum(
        p.length_nm for p in paths
    )


def test_straight_line_on_empty_grid():
    grid = _bare_grid(120, 10)
    router = Router(grid, TOY)
    paths = router.route_net([(0, 0), (100, 0)], "n1")
    assert len(paths) == 1
    assert paths[0].length_nm == 100 * 150
    assert paths[0].points[0] == grid.cell_center_nm((0, 0))
    assert paths[0].points[-1] == grid.cell_center_nm((100, 0))
    assert paths[0].bridges == ()


def test_wall_with_gap_matches_bfs():
    nx = ny = 32
    wall = [(16, y) for y in range(ny) if y != 20]
    grid = _bare_grid(nx, ny, wall)
    router = Router(grid, TOY)
    paths = router.route_net([(2, 3), (29, 3)], "n1")
    oracle = bfs_dist(grid.blocked, (2, 3), (29, 3))
    assert sum(p.length_nm for p in paths) // 150 == oracle


def test_random_grids_match_bfs_oracle():
    gen = rng.Xoshiro256StarStar(77)
    for trial in range(120):
        nx = 8 + gen.randbelow(57)
        ny = 8 + gen.randbelow(57)
        blocked = [
            (gen.randbelow(nx), gen.randbelow(ny))
            for _ in range((nx * ny) // (3 + gen.randbelow(4)))
        ]
        grid = _bare_grid(nx, ny, blocked)
        a = (gen.randbelow(nx), gen.randbelow(ny))
        b = (gen.randbelow(nx), gen.randbelow(ny))
        if a == b or grid.blocked[a[1], a[0]] or grid.blocked[b[1], b[0]]:
            continue
        router = Router(grid, TOY)
        oracle = bfs_dist(grid.blocked, a, b)
        try:
            paths = router.route_net([a, b], f"t{trial}")
            got = sum(p.length_nm for p in paths) // 150
        except RouteFailure:
            got = None
        assert got == oracle, f"trial {trial}: {got} != {oracle}"


def test_bridge_beats_long_detour():
    # foreign wire spans the grid row; crossing costs the bridge penalty,
    # detouring around the far end costs more
    grid = _bare_grid(60, 24)
    router = Router(grid, TOY)
    router.route_net([(0, 10), (44, 10)], "blockerX")
    paths = router.route_net([(20, 5), (20, 15)], "crosser")
    total_bridges = sum(len(p.bridges) for p in paths)
    assert total_bridges == 1
    # 10 steps of wire plus nothing extra: the jump itself covers the gap
    assert sum(p.length_nm for p in paths) == 10 * 150
    bx, by, crossed = paths[0].bridges[0]
    assert crossed == "blockerX"
    assert (bx // 150, by // 150) == (20, 10)


def test_short_wire_detour_beats_bridge():
    # foreign wire ends nearby: detour (~24 steps) < bridge (10 + 20)
    grid = _bare_grid(60, 24)
    router = Router(grid, TOY)
    router.route_net([(0, 10), (24, 10)], "blockerX")
    paths = router.route_net([(20, 5), (20, 15)], "crosser")
    assert sum(len(p.bridges) for p in paths) == 0
    assert sum(p.length_nm for p in paths) // 150 < 30


def test_two_nets_one_gap_second_fails():
    # vertical wall with a single gap; the first net claims it, the second
    # cannot cross anywhere else
    nx = ny = 11
    wall = [(5, y) for y in range(ny) if y != 5]
    grid = _bare_grid(nx, ny, wall)
    router = Router(grid, TOY)
    first = router.route_net([(0, 5), (10, 5)], "a")
    assert len(first) == 1
    with pytest.raises(RouteFailure):
        router.route_net([(0, 1), (10, 1)], "b")


def test_blocked_terminal_fails_with_name():
    grid = _bare_grid(10, 10, [(5, 5)])
    router = Router(grid, TOY)
    with pytest.raises(RouteFailure, match=r"\(5, 5\)"):
        router.route_net([(0, 0), (5, 5)], "n1")


def test_monotonicity_blocking_never_shortens():
    gen = rng.Xoshiro256StarStar(31)
    for trial in range(40):
        nx = ny = 24
        base = [(gen.randbelow(nx), gen.randbelow(ny)) for _ in range(40)]
        extra = base + [(gen.randbelow(nx), gen.randbelow(ny)) for _ in range(30)]
        a, b = (1, 1), (22, 22)
        g1 = _bare_grid(nx, ny, [c for c in base if c not in (a, b)])
        g2 = _bare_grid(nx, ny, [c for c in extra if c not in (a, b)])
        r1, r2 = Router(g1, TOY), Router(g2, TOY)
        try:
            len1 = sum(p.length_nm for p in r1.route_net([a, b], "n"))
        except RouteFailure:
            continue
        try:
            len2 = sum(p.length_nm for p in r2.route_net([a, b], "n"))
        except RouteFailure:
            continue
        assert len2 >= len1


def test_multi_terminal_connectivity():
    gen = rng.Xoshiro256StarStar(55)
    for trial in range(20):
        nx = ny = 40
        blocked = [(gen.randbelow(nx), gen.randbelow(ny)) for _ in range(150)]
        terms = []
        while len(terms) < 5:
            c = (gen.randbelow(nx), gen.randbelow(ny))
            if c not in blocked and c not in terms:
                terms.append(c)
        grid = _bare_grid(nx, ny, blocked)
        router = Router(grid, TOY)
        try:
            paths = router.route_net(terms, "n")
        except RouteFailure:
            continue
        cells = set()
        for p in paths:
            pts = [(x // 150, y // 150) for x, y in p.points]
            for i in range(len(pts) - 1):
                (x0, y0), (x1, y1) = pts[i], pts[i + 1]
                steps = max(abs(x1 - x0), abs(y1 - y0))
                sx = (x1 > x0) - (x1 < x0)
                sy = (y1 > y0) - (y1 < y0)
                for s in range(steps + 1):
                    cells.add((x0 + sx * s, y0 + sy * s))
        assert set(terms) <= cells
        # 4-connected flood fill from one terminal covers everything
        seen = {terms[0]}
        q = deque([terms[0]])
        while q:
            x, y = q.popleft()
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                n = (x + dx, y + dy)
                if n in cells and n not in seen:
                    seen.add(n)
                    q.append(n)
        assert seen == cells


def test_determinism():
    gen = rng.Xoshiro256StarStar(99)
    blocked = [(gen.randbelow(48), gen.randbelow(48)) for _ in range(300)]

    def run():
        grid = _bare_grid(48, 48, blocked)
        router = Router(grid, TOY)
        out = []
        for i, terms in enumerate([((1, 1), (45, 40)), ((40, 2), (3, 44)), ((10, 30), (44, 22))]):
            try:
                paths = router.route_net(list(terms), f"n{i}")
                out.append(tuple(p.points for p in paths))
            except RouteFailure as exc:
                out.append(str(exc))
        return out

    assert run() == run()


# --- grid construction ------------------------------------------------------


def _field_with(components):
    obs = tuple(
        ObservedComponent(
            obs_id=f"o{i}",
            phys_id=f"p{i}",
            kind_id=kind,
            center_est=(x, y),
            orientation_est=theta,
            classified_defective=False,
        )
        for i, (kind, x, y, theta) in enumerate(components)
    )
    return ObservedField(region=(60_000, 60_000), observations=obs, missed=())


def test_empty_field_no_blocked_cells():
    grid = build_routing_grid(_field_with([]), KINDS, TOY)
    assert grid.blocked.sum() == 0
    assert grid.dims == (400, 400)


def test_grid_too_coarse_rejected():
    field = ObservedField(region=(150, 150), observations=(), missed=())
    with pytest.raises(GridBuildError):
        build_routing_grid(field, KINDS, TOY)


def test_pin_landing_identity_rotation():
    # resistor pins at +-900 nm from center along x, +100 y
    field = _field_with([("nw_res", 30_000, 30_000, 0.0)])
    grid = build_routing_grid(field, KINDS, TOY)
    a = grid.pin_cells[("o0", "a")]
    b = grid.pin_cells[("o0", "b")]
    assert a == (snap_to_cell(29_100, 150, 400), snap_to_cell(30_100, 150, 400))
    assert b == (snap_to_cell(30_900, 150, 400), snap_to_cell(30_100, 150, 400))
    assert not grid.blocked[a[1], a[0]]
    assert not grid.blocked[b[1], b[0]]
    # body cells around the center are blocked
    cx, cy = 30_000 // 150, 30_000 // 150
    assert grid.blocked[cy, cx]


def test_pin_landing_90_degrees():
    # rotation by 90: offset (d, 0) lands at (0, d) relative to center
    field = _field_with([("nw_res", 30_000, 30_000, 90.0)])
    grid = build_routing_grid(field, KINDS, TOY)
    b = grid.pin_cells[("o0", "b")]  # offset (+900, +100) -> (-100, +900)
    assert b == (snap_to_cell(29_900, 150, 400), snap_to_cell(30_900, 150, 400))


def test_pin_conflict_detection():
    # a pathological kind whose pins collide once snapped: use a tiny pitch
    # spec where two resistor pins cannot collide, then force collision by
    # shrinking the pitch relationship -- here we fake it with orientation
    # that maps both pins onto the same cell: impossible for nw_res, so
    # instead place two pins of the same component by a tiny body.
    from inkfab.model import ComponentKind, Pin

    tight = ComponentKind(
        kind_id="tiny",
        body=(400, 200),
        pins=(Pin("p", (-50, 0), 100), Pin("q", (50, 0), 100)),
        critical_dimension=150,
    )
    kinds = dict(KINDS)
    kinds["tiny"] = tight
    # centered mid-cell so both pins snap into the same 150 nm cell
    field = _field_with([("tiny", 30_075, 30_075, 0.0)])
    grid = build_routing_grid(field, kinds, TOY)
    assert "o0" in grid.pin_conflicts


# --- route_all + design rules ----------------------------------------------


def _empty_assignment():
    return Assignment(mapping={}, unassigned_logical=(), unused_physical=(), cost=0.0)


def test_route_all_empty_netlist():
    grid = build_routing_grid(_field_with([]), KINDS, TOY)
    netlist = Netlist(instances=(), nets=())
    layout = route_all(grid, netlist, _empty_assignment(), TOY)
    assert layout.paths == ()
    assert layout.failed_nets == ()
    assert layout.total_wire_length == 0
    assert check_design_rules(layout, TOY) == []


def test_route_all_disjoint_pairs_and_drc():
    # 10 two-pin nets between resistors on a coarse lattice: all route,
    # lengths match the BFS oracle per net, and the result is DRC-clean
    comps = []
    for i in range(10):
        x = 6_000 + (i % 5) * 11_000
        y = 8_000 + (i // 5) * 30_000
        comps.append(("nw_res", x, y, 0.0))
        comps.append(("nw_res", x, y + 9_000, 0.0))
    field = _field_with(comps)
    grid = build_routing_grid(field, KINDS, TOY)

    instances = tuple((f"r{i}", "nw_res") for i in range(20))
    nets = tuple(
        (f"n{i}", ((f"r{2 * i}", "b"), (f"r{2 * i + 1}", "b"))) for i in range(10)
    )
    netlist = Netlist(instances=instances, nets=nets)
    mapping = {f"r{i}": f"o{i}" for i in range(20)}
    assignment = Assignment(
        mapping=mapping, unassigned_logical=(), unused_physical=(), cost=0.0
    )
    layout = route_all(grid, netlist, assignment, TOY, field=field, kinds=KINDS)
    assert layout.failed_nets == ()
    assert len({p.net_id for p in layout.paths}) == 10
    assert check_design_rules(layout, TOY) == []
    assert layout.total_wire_length > 0


def test_drc_flags_handmade_violations():
    from inkfab.route.engine import Path

    grid = _bare_grid(100, 100, [(50, 50)])
    # two parallel wires one cell apart (150 nm < required 300 nm)
    mk = lambda nid, y: Path(
        net_id=nid,
        points=((150 * 10 + 75, 150 * y + 75), (150 * 40 + 75, 150 * y + 75)),
        widths=(150,),
        bridges=(),
        length_nm=30 * 150,
    )
    layout = RoutedLayout(
        assignment=_empty_assignment(),
        paths=(mk("a", 20), mk("b", 21)),
        failed_nets=(),
        total_wire_length=2 * 30 * 150,
        bridge_count=0,
        footprint=0.0,
        net_terminals={},
        grid=grid,
    )
    violations = check_design_rules(layout, TOY, grid)
    assert any(v.rule == "spacing" for v in violations)

    # path through the blocked cell
    bad = Path(
        net_id="c",
        points=((150 * 48 + 75, 150 * 50 + 75), (150 * 52 + 75, 150 * 50 + 75)),
        widths=(150,),
        bridges=(),
        length_nm=4 * 150,
    )
    layout2 = RoutedLayout(
        assignment=_empty_assignment(),
        paths=(bad,),
        failed_nets=(),
        total_wire_length=4 * 150,
        bridge_count=0,
        footprint=0.0,
        net_terminals={},
        grid=grid,
    )
    violations2 = check_design_rules(layout2, TOY, grid)
    assert any(v.rule == "blocked" for v in violations2)


def test_drc_clean_after_bridges():
    grid = _bare_grid(60, 24)
    router = Router(grid, TOY)
    p1 = router.route_net([(0, 10), (44, 10)], "x")
    p2 = router.route_net([(20, 5), (20, 15)], "y")
    layout = RoutedLayout(
        assignment=_empty_assignment(),
        paths=tuple(p1 + p2),
        failed_nets=(),
        total_wire_length=sum(p.length_nm for p in p1 + p2),
        bridge_count=sum(len(p.bridges) for p in p1 + p2),
        footprint=0.0,
        net_terminals={"x": ((0, 10), (44, 10)), "y": ((20, 5), (20, 15))},
        grid=grid,
    )
    assert check_design_rules(layout, TOY, grid) == []
