"""Stochastic component deposition onto a substrate region.

Two deposition policies:

* ``lattice`` — components aimed at square-lattice targets at pitch
  1/sqrt(density), with clamped Gaussian position/orientation noise.
  Noise is clipped at +-3 sigma (clamped, not re-sampled) so milestone
  variance bounds are hard bounds.
* ``poisson`` — component count ~ Poisson(density * area), positions
  uniform in the region, orientations uniform in [0, 360).

All per-component randomness comes from counter-based substreams of the
run seed, so results are independent of generation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import rng
from .geometry import rect_corners, rects_intersect
from .model import ComponentKind, ProcessSpec

_TAG_LATTICE = 0x4C415454   # stage tags for substream derivation
_TAG_POISSON = 0x504F4953
_TAG_DEFECT = 0x44454643

_SLOTS = 8  # stream slots per component: x(2), y(2), theta(2), kind(1), spare(1)


@dataclass(frozen=True)
class PlacedComponent:
    phys_id: str
    kind_id: str
    center: tuple[int, int]          # nm
    orientation: float               # deg in [0, 360)
    defective: bool = False
    target: Optional[tuple[int, int, float]] = None  # intended pose (lattice policy)
    clamped: bool = False            # true if clipped to the region boundary


@dataclass(frozen=True)
class Substrate:
    region: tuple[int, int]          # (w, h) nm
    components: tuple[PlacedComponent, ...]
    seed: int
    overlaps: tuple[tuple[str, str], ...]


class DepositionError(ValueError):
    pass


def _pick_kinds(units: np.ndarray, kind_mix: list[tuple[ComponentKind, float]]) -> list[ComponentKind]:
    bounds = np.cumsum([f for _, f in kind_mix])
    bounds[-1] = 1.0 + 1e-12  # guard the top edge against float dust
    idx = np.searchsorted(bounds, units, side="right")
    return [kind_mix[min(i, len(kind_mix) - 1)][0] for i in idx]


def deposit(
    spec: ProcessSpec,
    kind_mix: list[tuple[ComponentKind, float]],
    layout_policy: str,
    seed: int,
) -> Substrate:
    if not kind_mix:
        raise DepositionError("kind mix is empty")
    total = sum(f for _, f in kind_mix)
    if abs(total - 1.0) > 1e-9:
        raise DepositionError(f"kind mix fractions sum to {total}, expected 1")
    w, h = spec.deposition_area
    if w <= 0 or h <= 0:
        raise DepositionError("deposition region has zero area")
    area_um2 = (w / 1000.0) * (h / 1000.0)
    expected = spec.component_density_target * area_um2
    if expected < 1.0:
        raise DepositionError(
            f"density * area = {expected:.3g} (< 1 expected component)"
        )

    if layout_policy == "lattice":
        components = _deposit_lattice(spec, kind_mix, seed, w, h)
    elif layout_policy == "poisson":
        components = _deposit_poisson(spec, kind_mix, seed, w, h, expected)
    else:
        raise DepositionError(f"unknown layout policy {layout_policy!r}")

    kinds = {k.kind_id: k for k, _ in kind_mix}
    overlaps = detect_overlaps_components(components, kinds)
    return Substrate(region=(w, h), components=tuple(components), seed=seed, overlaps=overlaps)


def _deposit_lattice(spec, kind_mix, seed, w, h):
    pitch = int(round(1000.0 / math.sqrt(spec.component_density_target)))
    nx = w // pitch
    ny = h // pitch
    if nx < 1 or ny < 1:
        raise DepositionError("region smaller than one lattice pitch")
    off_x = (w - (nx - 1) * pitch) // 2
    off_y = (h - (ny - 1) * pitch) // 2
    n = int(nx * ny)

    stream = rng.substream_seed(seed, _TAG_LATTICE)
    gx = rng.gaussian_stream(stream, n, _SLOTS, 0)
    gy = rng.gaussian_stream(stream, n, _SLOTS, 2)
    gt = rng.gaussian_stream(stream, n, _SLOTS, 4)
    np.clip(gx, -3.0, 3.0, out=gx)
    np.clip(gy, -3.0, 3.0, out=gy)
    np.clip(gt, -3.0, 3.0, out=gt)
    ku = rng.stream_unit(stream, np.arange(n, dtype=np.uint64) * np.uint64(_SLOTS) + np.uint64(6))
    kinds = _pick_kinds(ku, kind_mix)

    components = []
    i = 0
    for iy in range(ny):
        for ix in range(nx):
            tx = off_x + ix * pitch
            ty = off_y + iy * pitch
            x = tx + int(round(gx[i] * spec.position_sigma))
            y = ty + int(round(gy[i] * spec.position_sigma))
            theta = (gt[i] * spec.orientation_sigma) % 360.0
            cx = min(max(x, 0), w - 1)
            cy = min(max(y, 0), h - 1)
            components.append(
                PlacedComponent(
                    phys_id=f"p{i:06d}",
                    kind_id=kinds[i].kind_id,
                    center=(cx, cy),
                    orientation=theta,
                    target=(tx, ty, 0.0),
                    clamped=(cx != x or cy != y),
                )
            )
            i += 1
    return components


def _deposit_poisson(spec, kind_mix, seed, w, h, expected):
    counter = rng.Xoshiro256StarStar(rng.substream_seed(seed, _TAG_POISSON))
    n = rng.poisson(expected, counter)
    stream = rng.substream_seed(seed, _TAG_POISSON ^ 0xFF)
    base = np.arange(n, dtype=np.uint64) * np.uint64(_SLOTS)
    ux = rng.stream_unit(stream, base)
    uy = rng.stream_unit(stream, base + np.uint64(1))
    ut = rng.stream_unit(stream, base + np.uint64(2))
    ku = rng.stream_unit(stream, base + np.uint64(3))
    kinds = _pick_kinds(ku, kind_mix)
    components = []
    for i in range(n):
        components.append(
            PlacedComponent(
                phys_id=f"p{i:06d}",
                kind_id=kinds[i].kind_id,
                center=(int(ux[i] * w), int(uy[i] * h)),
                orientation=ut[i] * 360.0,
            )
        )
    return components


def inject_defects(substrate: Substrate, rate: float, seed: int) -> Substrate:
    """Flag each component defective independently with the given probability."""
    if not 0.0 <= rate <= 1.0:
        raise DepositionError(f"defect rate must be in [0, 1], got {rate}")
    stream = rng.substream_seed(seed, _TAG_DEFECT)
    u = rng.stream_unit(stream, np.arange(len(substrate.components), dtype=np.uint64))
    flagged = tuple(
        replace(comp, defective=bool(u[i] < rate))
        for i, comp in enumerate(substrate.components)
    )
    return replace(substrate, components=flagged)


def detect_overlaps_components(
    components, kinds: dict[str, ComponentKind]
) -> tuple[tuple[str, str], ...]:
    """All pairs of oriented body rectangles that intersect.

    Bucket grid cuts candidate pairs to near-neighbors; the exact test is
    a separating-axis check on the oriented corners.
    """
    if not components:
        return ()
    diag = max(math.hypot(*kinds[c.kind_id].body) for c in components)
    bucket = max(int(diag) + 1, 1)

    corners = {}
    grid: dict[tuple[int, int], list[int]] = {}
    for i, c in enumerate(components):
        bw, bh = kinds[c.kind_id].body
        corners[i] = rect_corners(c.center[0], c.center[1], bw, bh, c.orientation)
        key = (c.center[0] // bucket, c.center[1] // bucket)
        grid.setdefault(key, []).append(i)

    pairs = set()
    for (bx, by), members in grid.items():
        neighborhood = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                neighborhood.extend(grid.get((bx + dx, by + dy), ()))
        for i in members:
            for j in neighborhood:
                if j <= i:
                    continue
                if rects_intersect(corners[i], corners[j]):
                    a, b = components[i].phys_id, components[j].phys_id
                    pairs.add((a, b) if a < b else (b, a))
    return tuple(sorted(pairs))


def detect_overlaps(substrate: Substrate, kinds: dict[str, ComponentKind]):
    return detect_overlaps_components(substrate.components, kinds)
