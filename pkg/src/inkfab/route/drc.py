"""Design-rule checking for routed layouts.

Checks three rule families:

* width profile — contact-width wire within the pin zone, interconnect
  width elsewhere, both within their maxima;
* spacing — centerline distance between wires of distinct nets must be at
  least (w_a + w_b)/2 + max(spacing_a, spacing_b), except inside the
  insulated pad of a registered bridge;
* blocked cells — wires may not run through component bodies.

``route_all`` output must come back violation-free; hand-built layouts
are checked the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..model import ProcessSpec
from .engine import RoutedLayout, clearance_radii
from .grid import RoutingGrid


@dataclass(frozen=True)
class Violation:
    rule: str      # "width" | "spacing" | "blocked"
    net_id: str
    where: tuple[int, int]    # nm
    detail: str


def _segment_cells(points, pitch):
    """Expand a vertex polyline back into its grid cells with segment index."""
    cells = []
    for i in range(len(points) - 1):
        (x0, y0), (x1, y1) = points[i], points[i + 1]
        steps = max(abs(x1 - x0), abs(y1 - y0)) // pitch
        sx = (x1 > x0) - (x1 < x0)
        sy = (y1 > y0) - (y1 < y0)
        start = 0 if i == 0 else 1
        for s in range(start, int(steps) + 1):
            cells.append(((x0 + sx * s * pitch) // pitch, (y0 + sy * s * pitch) // pitch, i))
    return cells


def check_design_rules(
    layout: RoutedLayout,
    spec: ProcessSpec,
    grid: RoutingGrid | None = None,
) -> list[Violation]:
    grid = grid or layout.grid
    pitch = grid.pitch if grid is not None else spec.grid_pitch
    violations: list[Violation] = []

    wt = spec.contact_wire_width
    wk = spec.interconnect_wire_width_max
    thin_r2_nm = 1000.0 * 1000.0  # pin zone radius squared, nm^2

    # terminal pin centers per net, for the width-zone rule
    pin_centers: dict[str, list[tuple[int, int]]] = {}
    if grid is not None:
        for net_id, cells in layout.net_terminals.items():
            pin_centers[net_id] = [grid.cell_center_nm(c) for c in cells]

    def in_pin_zone(net_id, x, y):
        for px, py in pin_centers.get(net_id, ()):
            if (x - px) ** 2 + (y - py) ** 2 <= thin_r2_nm:
                return True
        return False

    # --- expand to cells and check widths ------------------------------------
    per_cell: dict[tuple[int, int], list[tuple[str, int]]] = {}
    cell_width: dict[tuple[str, int, int], int] = {}
    width_flagged = set()
    for pi, path in enumerate(layout.paths):
        for x, y, seg in _segment_cells(path.points, pitch):
            per_cell.setdefault((x, y), []).append((path.net_id, pi))
            w = path.widths[seg] if path.widths else wt
            key = (path.net_id, x, y)
            cell_width[key] = max(cell_width.get(key, 0), w)
            where = (x * pitch + pitch // 2, y * pitch + pitch // 2)
            if w > wk and (path.net_id, x, y, "k") not in width_flagged:
                width_flagged.add((path.net_id, x, y, "k"))
                violations.append(
                    Violation("width", path.net_id, where,
                              f"width {w} exceeds interconnect limit {wk}")
                )
            if (
                pin_centers
                and w > wt
                and in_pin_zone(path.net_id, *where)
                and (path.net_id, x, y, "t") not in width_flagged
            ):
                width_flagged.add((path.net_id, x, y, "t"))
                violations.append(
                    Violation("width", path.net_id, where,
                              f"width {w} exceeds contact limit {wt} near a pin")
                )

    # --- blocked cells ------------------------------------------------------
    if grid is not None:
        for (x, y), users in sorted(per_cell.items()):
            if 0 <= x < grid.dims[0] and 0 <= y < grid.dims[1] and grid.blocked[y, x]:
                for net_id, _pi in sorted(set(users)):
                    violations.append(
                        Violation("blocked", net_id,
                                  (x * pitch + pitch // 2, y * pitch + pitch // 2),
                                  "wire crosses a component body cell")
                    )

    # --- spacing --------------------------------------------------------------
    r_max = max(clearance_radii(spec)) if grid is not None else 1
    pad_r = 2 * r_max  # insulated pad radius around a registered bridge, cells

    bridge_cells: list[tuple[int, int]] = []
    for path in layout.paths:
        for bx, by, _net in path.bridges:
            bridge_cells.append((bx // pitch, by // pitch))

    def near_bridge(ax, ay, bx, by):
        for cx, cy in bridge_cells:
            if max(abs(ax - cx), abs(ay - cy)) <= pad_r and max(
                abs(bx - cx), abs(by - cy)
            ) <= pad_r:
                return True
        return False

    cells_by_net: dict[str, list[tuple[int, int]]] = {}
    for (x, y), users in per_cell.items():
        for net_id, _pi in users:
            cells_by_net.setdefault(net_id, []).append((x, y))

    # bucket by r_max-sized tiles and compare neighboring tiles
    tile = max(r_max, 1)
    tiles: dict[tuple[int, int], list[tuple[int, int, str]]] = {}
    for net_id, cells in cells_by_net.items():
        for x, y in set(cells):
            tiles.setdefault((x // tile, y // tile), []).append((x, y, net_id))

    reported = set()
    for (txl, tyl), members in sorted(tiles.items()):
        neighborhood = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                neighborhood.extend(tiles.get((txl + dx, tyl + dy), ()))
        for ax, ay, na in members:
            wa = cell_width[(na, ax, ay)]
            sa = spec.spacing_for(wa)
            for bx, by, nb in neighborhood:
                if nb <= na:
                    continue
                wb = cell_width[(nb, bx, by)]
                required = (wa + wb) / 2 + max(sa, spec.spacing_for(wb))
                dist = math.hypot(ax - bx, ay - by) * pitch
                if dist < required and not near_bridge(ax, ay, bx, by):
                    key = (na, nb, ax, ay, bx, by)
                    if key not in reported:
                        reported.add(key)
                        violations.append(
                            Violation(
                                "spacing", na,
                                (ax * pitch + pitch // 2, ay * pitch + pitch // 2),
                                f"{dist:.0f} nm to net {nb} < required {required:.0f} nm",
                            )
                        )

    violations.sort(key=lambda v: (v.rule, v.net_id, v.where))
    return violations
