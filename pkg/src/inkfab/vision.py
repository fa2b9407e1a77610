"""Simulated recognition stage: a noisy, possibly incomplete view of a substrate.

Observation errors are hard-bounded (uniform within +-bound, never beyond),
which turns the recognition accuracy milestone into a testable invariant
instead of a statistical statement.  No phantom detections are produced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .deposition import Substrate
from .model import ComponentKind, ProcessSpec

_TAG_VISION = 0x56495349
_SLOTS = 8  # miss, ex, ey, etheta, classify, 3 spare


class VisionConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ObservedComponent:
    obs_id: str
    phys_id: str                  # ground-truth link; test/debug only
    kind_id: str
    center_est: tuple[int, int]   # nm
    orientation_est: float        # deg in [0, 360)
    classified_defective: bool


@dataclass(frozen=True)
class ObservedField:
    region: tuple[int, int]
    observations: tuple[ObservedComponent, ...]
    missed: tuple[str, ...] = ()  # phys_ids; test/debug only
    overlaps: tuple[tuple[str, str], ...] = ()  # obs_id pairs seen touching

    def by_id(self) -> dict[str, ObservedComponent]:
        return {o.obs_id: o for o in self.observations}


def observe(
    substrate: Substrate,
    spec: ProcessSpec,
    kinds: dict[str, ComponentKind],
    defect_classification_accuracy: float = 1.0,
    seed: int = 0,
) -> ObservedField:
    e = spec.vision_position_error_max
    for kind_id in sorted({c.kind_id for c in substrate.components}):
        cd = kinds[kind_id].critical_dimension
        if e > 0.5 * cd:
            raise VisionConfigError(
                f"vision_position_error_max {e} nm exceeds half the critical "
                f"dimension of kind {kind_id} ({0.5 * cd:.1f} nm)"
            )

    n = len(substrate.components)
    stream = rng.substream_seed(seed, _TAG_VISION)
    base = np.arange(n, dtype=np.uint64) * np.uint64(_SLOTS)
    u_miss = rng.stream_unit(stream, base)
    u_ex = rng.stream_unit(stream, base + np.uint64(1))
    u_ey = rng.stream_unit(stream, base + np.uint64(2))
    u_et = rng.stream_unit(stream, base + np.uint64(3))
    u_cls = rng.stream_unit(stream, base + np.uint64(4))

    emax_t = spec.vision_orientation_error_max
    observations = []
    missed = []
    for i, comp in enumerate(substrate.components):
        if u_miss[i] < spec.vision_miss_rate:
            missed.append(comp.phys_id)
            continue
        ex = int(round((2.0 * u_ex[i] - 1.0) * e))
        ey = int(round((2.0 * u_ey[i] - 1.0) * e))
        et = (2.0 * u_et[i] - 1.0) * emax_t
        correct = u_cls[i] < defect_classification_accuracy
        observations.append(
            ObservedComponent(
                obs_id=f"o{len(observations):06d}",
                phys_id=comp.phys_id,
                kind_id=comp.kind_id,
                center_est=(comp.center[0] + ex, comp.center[1] + ey),
                orientation_est=(comp.orientation + et) % 360.0,
                classified_defective=comp.defective if correct else not comp.defective,
            )
        )

    # the recognizer also reports which detected components touch each other
    phys_to_obs = {o.phys_id: o.obs_id for o in observations}
    overlaps = tuple(
        sorted(
            (phys_to_obs[a], phys_to_obs[b]) if phys_to_obs[a] < phys_to_obs[b]
            else (phys_to_obs[b], phys_to_obs[a])
            for a, b in substrate.overlaps
            if a in phys_to_obs and b in phys_to_obs
        )
    )
    return ObservedField(
        region=substrate.region,
        observations=tuple(observations),
        missed=tuple(missed),
        overlaps=overlaps,
    )
