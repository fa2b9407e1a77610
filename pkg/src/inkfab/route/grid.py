"""Uniform routing grid over the observed field.

Cells covered by a component body are blocked except pin landing cells.
Pin landings come from the estimated pose: pin offsets rotated by the
estimated orientation, translated by the estimated center, snapped to the
nearest cell center (ties toward the lower cell index, x then y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import ComponentKind, ProcessSpec
from ..vision import ObservedField


class GridBuildError(ValueError):
    pass


@dataclass
class RoutingGrid:
    pitch: int
    dims: tuple[int, int]                      # (nx, ny)
    blocked: np.ndarray                        # uint8 [ny, nx]
    pin_cells: dict[tuple[str, str], tuple[int, int]]  # (obs_id, pin_id) -> cell
    pin_conflicts: frozenset[str]              # obs ids with colliding pins
    region: tuple[int, int]

    def cell_center_nm(self, cell: tuple[int, int]) -> tuple[int, int]:
        x, y = cell
        return (x * self.pitch + self.pitch // 2, y * self.pitch + self.pitch // 2)


def snap_to_cell(value_nm: float, pitch: int, n_cells: int) -> int:
    """Nearest cell-center index (centers at (i+0.5)*pitch).

    The containing cell's center is always nearest; the only tie is a value
    exactly on a cell boundary, which goes to the lower cell.
    """
    i = math.floor(value_nm / pitch)
    if value_nm == i * pitch and i > 0:
        i -= 1
    return min(max(i, 0), n_cells - 1)


def build_routing_grid(
    field: ObservedField,
    kinds: dict[str, ComponentKind],
    spec: ProcessSpec,
) -> RoutingGrid:
    pitch = spec.grid_pitch
    w, h = field.region
    nx = (w + pitch - 1) // pitch
    ny = (h + pitch - 1) // pitch
    if nx < 2 or ny < 2:
        raise GridBuildError(
            f"region {w}x{h} nm divides into {nx}x{ny} cells at pitch {pitch}; need >= 2x2"
        )

    blocked = np.zeros((ny, nx), dtype=np.uint8)
    pin_cells: dict[tuple[str, str], tuple[int, int]] = {}
    conflicts: set[str] = set()

    half = pitch / 2.0
    for obs in field.observations:
        kind = kinds[obs.kind_id]
        bw, bh = kind.body
        cx, cy = obs.center_est
        theta = math.radians(obs.orientation_est)
        cos_t, sin_t = math.cos(theta), math.sin(theta)

        # cells whose centers fall inside the oriented body rectangle
        reach = math.hypot(bw, bh) / 2.0
        ix0 = max(int((cx - reach) // pitch), 0)
        ix1 = min(int((cx + reach) // pitch) + 1, nx - 1)
        iy0 = max(int((cy - reach) // pitch), 0)
        iy1 = min(int((cy + reach) // pitch) + 1, ny - 1)
        if ix0 <= ix1 and iy0 <= iy1:
            xs = np.arange(ix0, ix1 + 1) * pitch + half - cx
            ys = np.arange(iy0, iy1 + 1) * pitch + half - cy
            gx, gy = np.meshgrid(xs, ys)
            # rotate cell centers into the body frame
            u = gx * cos_t + gy * sin_t
            v = -gx * sin_t + gy * cos_t
            inside = (np.abs(u) <= bw / 2.0) & (np.abs(v) <= bh / 2.0)
            blocked[iy0 : iy1 + 1, ix0 : ix1 + 1] |= inside.astype(np.uint8)

        seen_cells: dict[tuple[int, int], str] = {}
        for pin in kind.pins:
            ox, oy = pin.offset
            px = cx + ox * cos_t - oy * sin_t
            py = cy + ox * sin_t + oy * cos_t
            cell = (snap_to_cell(px, pitch, nx), snap_to_cell(py, pitch, ny))
            if cell in seen_cells:
                conflicts.add(obs.obs_id)
            seen_cells[cell] = pin.pin_id
            pin_cells[(obs.obs_id, pin.pin_id)] = cell

    for cell in pin_cells.values():
        blocked[cell[1], cell[0]] = 0

    return RoutingGrid(
        pitch=pitch,
        dims=(int(nx), int(ny)),
        blocked=blocked,
        pin_cells=pin_cells,
        pin_conflicts=frozenset(conflicts),
        region=(w, h),
    )
