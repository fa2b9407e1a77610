"""Map logical netlist instances onto observed physical components.

Objective: minimize the sum over nets of the Euclidean spanning length of
assigned member positions, plus a penalty for using components involved in
an overlap.  Classified-defective components are never used; overlap-
involved components are used only when no clean alternative of the kind
remains.

Algorithm (deterministic, no randomness):

1. Greedy seeding.  Small netlists grow an anchored embedding: the
   instance with the most already-placed co-net members goes next, to the
   best eligible free component near its anchors.  Large netlists first
   estimate global coordinates for every instance from graph distances to
   landmark instances (double-BFS corner detection), which pins down the
   global shape of the circuit and avoids fold defects, then match
   instances to components in raster order under each of the eight square
   symmetries, keeping the cheapest.  Candidates are always scored by the
   exact cost increment, not just distance.
2. Local refinement.  Sweeps of single-instance improvement moves
   (relocate to a free component, or swap with another instance of the
   same kind), accepting the best strictly-improving candidate per
   instance.  Small problems sweep every instance against every candidate;
   large problems only revisit high-stress instances against nearby
   candidates.

Ties everywhere break on lexicographic (distance, id) order, so the result
is platform-independent.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .geometry import spanning_length
from .model import Netlist
from .vision import ObservedField


@dataclass(frozen=True)
class AssignParams:
    overlap_penalty_nm: float = 10_000.0
    refine_rounds: int = 8
    refine_radius_factor: float = 3.0   # search radius in units of typical spacing
    full_refine_limit: int = 64         # sweep everything at or below this size
    stress_factor: float = 1.5          # targeted mode revisits stress > factor*typical
    landmark_min_size: int = 200        # global-coordinate seeding above this size
    candidate_pool: int = 8             # free candidates scored per placement


@dataclass(frozen=True)
class Assignment:
    mapping: dict[str, str]             # instance_id -> obs_id (injective)
    unassigned_logical: tuple[str, ...]
    unused_physical: tuple[str, ...]
    cost: float                         # nm


class ExhaustiveLimitError(ValueError):
    pass


# --- shared cost model ------------------------------------------------------


class _Problem:
    """Index structures shared by the heuristic and the exhaustive oracle."""

    def __init__(self, netlist: Netlist, field: ObservedField, params: AssignParams):
        self.params = params
        self.instances = sorted(netlist.instances)  # (inst_id, kind_id)
        self.kind_of = dict(netlist.instances)
        self.obs = list(field.observations)
        self.obs_index = {o.obs_id: i for i, o in enumerate(self.obs)}
        self.pos = [o.center_est for o in self.obs]
        self.overlap_involved: set[int] = set()

        self.nets = [(nid, tuple(eps)) for nid, eps in netlist.nets]
        self.nets_of: dict[str, list[int]] = {}
        for ni, (_, endpoints) in enumerate(self.nets):
            for inst_id, _pin in endpoints:
                self.nets_of.setdefault(inst_id, []).append(ni)
        self.net_members = [
            sorted({inst for inst, _ in endpoints}) for _, endpoints in self.nets
        ]

        self.eligible_by_kind: dict[str, list[int]] = {}
        for i, o in enumerate(self.obs):
            if o.classified_defective:
                continue
            self.eligible_by_kind.setdefault(o.kind_id, []).append(i)

    def set_overlaps(self, overlap_obs_ids: set[str]):
        self.overlap_involved = {
            self.obs_index[oid] for oid in overlap_obs_ids if oid in self.obs_index
        }

    def net_length(self, ni: int, mapping: dict[str, int]) -> float:
        pts = [self.pos[mapping[m]] for m in self.net_members[ni] if m in mapping]
        return spanning_length(pts)

    def total_cost(self, mapping: dict[str, int]) -> float:
        cost = sum(self.net_length(ni, mapping) for ni in range(len(self.nets)))
        cost += self.params.overlap_penalty_nm * sum(
            1 for oi in mapping.values() if oi in self.overlap_involved
        )
        return cost


def _overlap_obs_ids(field: ObservedField) -> set[str]:
    """Observed ids of components the vision stage reported as touching."""
    out = set()
    for a, b in field.overlaps:
        out.add(a)
        out.add(b)
    return out


# --- spatial bucket index for nearest-free queries --------------------------


class _FreeIndex:
    def __init__(self, positions, indices, bucket_nm: int):
        self.bucket = max(bucket_nm, 1)
        self.pos = positions
        self.cells: dict[tuple[int, int], set[int]] = {}
        self.free = set()
        for i in indices:
            self.add(i)

    def _key(self, i):
        x, y = self.pos[i]
        return (x // self.bucket, y // self.bucket)

    def add(self, i):
        self.free.add(i)
        self.cells.setdefault(self._key(i), set()).add(i)

    def remove(self, i):
        self.free.discard(i)
        self.cells[self._key(i)].discard(i)

    def nearest(self, x: float, y: float, exclude: set[int] | None = None):
        """Exact nearest free index to (x, y); ties break on index order."""
        pool = self.nearest_pool(x, y, 1, exclude)
        return pool[0] if pool else None

    def nearest_pool(self, x: float, y: float, k: int, exclude: set[int] | None = None):
        """The k nearest free indices to (x, y), exact, sorted (dist, idx)."""
        if not self.free:
            return []
        bx = int(x // self.bucket)
        by = int(y // self.bucket)
        found: list[tuple[float, int]] = []
        r = 0
        max_r = 2 + max(len(self.cells), 1)
        while r <= max_r:
            ring_min = (r - 1) * self.bucket if r > 0 else 0.0
            if len(found) >= k and ring_min > max(found)[0]:
                break
            for cx, cy in _ring(bx, by, r):
                members = self.cells.get((cx, cy))
                if not members:
                    continue
                for i in members:
                    if exclude and i in exclude:
                        continue
                    px, py = self.pos[i]
                    found.append((math.hypot(px - x, py - y), i))
            if len(found) >= k:
                found.sort()
                found = found[: max(k, 1) + 8]
            r += 1
        found.sort()
        return found[:k]


def _ring(bx, by, r):
    if r == 0:
        yield (bx, by)
        return
    for dx in range(-r, r + 1):
        yield (bx + dx, by - r)
        yield (bx + dx, by + r)
    for dy in range(-r + 1, r):
        yield (bx - r, by + dy)
        yield (bx + r, by + dy)


# --- greedy seeding ---------------------------------------------------------


def _typical_spacing(field: ObservedField) -> float:
    n = max(len(field.observations), 1)
    w, h = field.region
    return math.sqrt((w * h) / n)


def _greedy(problem: _Problem, field: ObservedField) -> dict[str, int]:
    spacing = _typical_spacing(field)
    bucket = max(int(spacing), 1)

    clean: dict[str, _FreeIndex] = {}
    dirty: dict[str, _FreeIndex] = {}
    for kind_id, indices in problem.eligible_by_kind.items():
        clean_idx = [i for i in indices if i not in problem.overlap_involved]
        dirty_idx = [i for i in indices if i in problem.overlap_involved]
        clean[kind_id] = _FreeIndex(problem.pos, clean_idx, bucket)
        dirty[kind_id] = _FreeIndex(problem.pos, dirty_idx, bucket)

    def take_nearest(kind_id, x, y):
        hit = clean[kind_id].nearest(x, y) if kind_id in clean else None
        if hit is None and kind_id in dirty:
            hit = dirty[kind_id].nearest(x, y)
            if hit is not None:
                dirty[kind_id].remove(hit[1])
                return hit[1]
            return None
        if hit is not None:
            clean[kind_id].remove(hit[1])
            return hit[1]
        return None

    if problem.pos:
        cx = sum(p[0] for p in problem.pos) / len(problem.pos)
        cy = sum(p[1] for p in problem.pos) / len(problem.pos)
    else:
        cx = cy = 0.0

    mapping: dict[str, int] = {}
    unplaced = {inst_id for inst_id, _ in problem.instances}
    # anchors count per unplaced instance: placed co-net members
    anchor_count = {inst_id: 0 for inst_id in unplaced}
    co_members: dict[str, set[str]] = {inst_id: set() for inst_id in unplaced}
    for members in problem.net_members:
        for m in members:
            if m in co_members:
                co_members[m].update(x for x in members if x != m)

    heap = []  # (-anchors, degree_rank, inst_id); stale entries skipped on pop
    degree = {
        inst_id: -len(co_members[inst_id]) for inst_id in unplaced
    }
    for inst_id in unplaced:
        heapq.heappush(heap, (0, degree[inst_id], inst_id))

    def push(inst_id):
        heapq.heappush(heap, (-anchor_count[inst_id], degree[inst_id], inst_id))

    while unplaced:
        while heap:
            neg_anchors, _deg, inst_id = heapq.heappop(heap)
            if inst_id in unplaced and -neg_anchors == anchor_count[inst_id]:
                break
        else:
            break
        kind_id = problem.kind_of[inst_id]
        anchors = [mapping[m] for m in co_members[inst_id] if m in mapping]
        if anchors:
            tx = sum(problem.pos[a][0] for a in anchors) / len(anchors)
            ty = sum(problem.pos[a][1] for a in anchors) / len(anchors)
        else:
            tx, ty = cx, cy
        oi = take_nearest(kind_id, tx, ty)
        unplaced.discard(inst_id)
        if oi is None:
            continue  # no eligible component of this kind remains
        mapping[inst_id] = oi
        for m in co_members[inst_id]:
            if m in unplaced:
                anchor_count[m] += 1
                push(m)
    return mapping


# --- global-coordinate seeding for large lattice-like netlists ---------------


def _bfs_dist(adj: dict[str, list[str]], start: str) -> dict[str, int]:
    dist = {start: 0}
    frontier = [start]
    while frontier:
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def _landmark_coords(problem: _Problem) -> dict[str, tuple[float, float]] | None:
    """Approximate 2D coordinates for every instance from graph distances.

    Works like a compass on lattice-like connectivity: BFS from the
    lexicographically first instance finds an extremal instance (a corner),
    a second BFS finds the opposite corner, and a third pair spans the
    other diagonal.  Differences of the four distance fields give
    diagonal axes, rotated 45 degrees back into lattice axes.  Returns
    None when the graph is disconnected or degenerate.
    """
    adj: dict[str, list[str]] = {i: [] for i, _ in problem.instances}
    for members in problem.net_members:
        for a in members:
            for b in members:
                if a != b:
                    adj[a].append(b)
    for v in adj:
        adj[v] = sorted(set(adj[v]))

    first = problem.instances[0][0]
    d0 = _bfs_dist(adj, first)
    if len(d0) != len(problem.instances):
        return None

    def farthest(dist):
        return max(dist.items(), key=lambda kv: (kv[1], kv[0]))[0]

    v1 = farthest(d0)
    d1 = _bfs_dist(adj, v1)
    v2 = farthest(d1)
    d2 = _bfs_dist(adj, v2)
    # third corner: far from both ends of the first diagonal
    v3 = max(adj, key=lambda v: (min(d1[v], d2[v]), v))
    d3 = _bfs_dist(adj, v3)
    v4 = farthest(d3)
    d4 = _bfs_dist(adj, v4)

    coords = {}
    for v in adj:
        u = d1[v] - d2[v]
        w = d3[v] - d4[v]
        coords[v] = ((u + w) / 2.0, (u - w) / 2.0)
    span_x = max(c[0] for c in coords.values()) - min(c[0] for c in coords.values())
    span_y = max(c[1] for c in coords.values()) - min(c[1] for c in coords.values())
    if span_x <= 0 or span_y <= 0:
        return None
    return coords


_SYMMETRIES = (
    lambda x, y: (x, y),
    lambda x, y: (-x, y),
    lambda x, y: (x, -y),
    lambda x, y: (-x, -y),
    lambda x, y: (y, x),
    lambda x, y: (-y, x),
    lambda x, y: (y, -x),
    lambda x, y: (-y, -x),
)


def _greedy_global(problem: _Problem, field: ObservedField,
                   coords: dict[str, tuple[float, float]]) -> dict[str, int] | None:
    """Match instances to components in raster order of global coordinates.

    Tries all eight square symmetries of the coordinate frame and keeps
    the assignment with the lowest exact cost (ties break on the symmetry
    index).  Within a symmetry, each instance takes the candidate free
    component minimizing the exact cost increment of its nets.
    """
    params = problem.params
    if not problem.pos:
        return None
    fx0 = min(p[0] for p in problem.pos)
    fx1 = max(p[0] for p in problem.pos)
    fy0 = min(p[1] for p in problem.pos)
    fy1 = max(p[1] for p in problem.pos)
    spacing = _typical_spacing(field)
    bucket = max(int(spacing), 1)

    best = None  # (cost, sym_index, mapping)
    for si, sym in enumerate(_SYMMETRIES):
        pts = {v: sym(x, y) for v, (x, y) in coords.items()}
        cx0 = min(p[0] for p in pts.values())
        cx1 = max(p[0] for p in pts.values())
        cy0 = min(p[1] for p in pts.values())
        cy1 = max(p[1] for p in pts.values())
        sx = (fx1 - fx0) / max(cx1 - cx0, 1e-9)
        sy = (fy1 - fy0) / max(cy1 - cy0, 1e-9)
        target = {
            v: (fx0 + (x - cx0) * sx, fy0 + (y - cy0) * sy)
            for v, (x, y) in pts.items()
        }

        free: dict[str, _FreeIndex] = {}
        dirty: dict[str, _FreeIndex] = {}
        for kind_id, indices in problem.eligible_by_kind.items():
            clean_idx = [i for i in indices if i not in problem.overlap_involved]
            dirty_idx = [i for i in indices if i in problem.overlap_involved]
            free[kind_id] = _FreeIndex(problem.pos, clean_idx, bucket)
            dirty[kind_id] = _FreeIndex(problem.pos, dirty_idx, bucket)

        mapping: dict[str, int] = {}
        order = sorted(coords, key=lambda v: (target[v][1], target[v][0], v))
        ok = True
        for inst_id in order:
            kind_id = problem.kind_of[inst_id]
            tx, ty = target[inst_id]
            pool = free[kind_id].nearest_pool(tx, ty, params.candidate_pool)
            if not pool:
                pool = dirty[kind_id].nearest_pool(tx, ty, params.candidate_pool)
                src_index = dirty[kind_id]
            else:
                src_index = free[kind_id]
            if not pool:
                mapping.pop(inst_id, None)
                continue
            # exact incremental cost of each candidate over this
            # instance's nets (anchored members only)
            nets = problem.nets_of.get(inst_id, ())
            best_cand = None
            for dist, oi in pool:
                mapping[inst_id] = oi
                delta = sum(problem.net_length(ni, mapping) for ni in nets)
                del mapping[inst_id]
                cand = (delta, dist, oi)
                if best_cand is None or cand < best_cand:
                    best_cand = cand
            oi = best_cand[2]
            src_index.remove(oi)
            mapping[inst_id] = oi
        if not ok:
            continue
        cost = problem.total_cost(mapping)
        if best is None or (cost, si) < (best[0], best[1]):
            best = (cost, si, mapping)
    return best[2] if best else None


# --- local refinement -------------------------------------------------------


def _refine(problem: _Problem, mapping: dict[str, int], field: ObservedField) -> dict[str, int]:
    params = problem.params
    spacing = _typical_spacing(field)
    inst_ids = [i for i, _ in problem.instances if i in mapping]
    if not inst_ids:
        return mapping

    used = set(mapping.values())
    free_by_kind: dict[str, list[int]] = {
        k: [i for i in idxs if i not in used]
        for k, idxs in problem.eligible_by_kind.items()
    }
    obs_of_kind_assigned: dict[str, list[str]] = {}
    for inst_id in inst_ids:
        obs_of_kind_assigned.setdefault(problem.kind_of[inst_id], []).append(inst_id)

    def nets_cost(net_ids, m):
        c = sum(problem.net_length(ni, m) for ni in net_ids)
        return c

    def penalty(oi):
        return params.overlap_penalty_nm if oi in problem.overlap_involved else 0.0

    def ideal_point(inst_id):
        pts = []
        for ni in problem.nets_of.get(inst_id, ()):
            for m in problem.net_members[ni]:
                if m != inst_id and m in mapping:
                    pts.append(problem.pos[mapping[m]])
        if not pts:
            return problem.pos[mapping[inst_id]]
        return (
            sum(p[0] for p in pts) / len(pts),
            sum(p[1] for p in pts) / len(pts),
        )

    def stress(inst_id):
        ix, iy = problem.pos[mapping[inst_id]]
        tx, ty = ideal_point(inst_id)
        return math.hypot(ix - tx, iy - ty)

    full = len(inst_ids) <= params.full_refine_limit
    radius = params.refine_radius_factor * spacing

    for _round in range(params.refine_rounds):
        improved = False
        if full:
            worklist = list(inst_ids)
        else:
            threshold = params.stress_factor * spacing
            scored = [(stress(i), i) for i in inst_ids]
            worklist = [i for s, i in sorted(scored, reverse=True) if s > threshold]
        for inst_id in worklist:
            kind_id = problem.kind_of[inst_id]
            cur = mapping[inst_id]
            tx, ty = ideal_point(inst_id)
            my_nets = problem.nets_of.get(inst_id, ())

            candidates: list[tuple[float, int, str | None]] = []
            for oi in free_by_kind.get(kind_id, ()):
                px, py = problem.pos[oi]
                if full or math.hypot(px - tx, py - ty) <= radius:
                    candidates.append((math.hypot(px - tx, py - ty), oi, None))
            for other in obs_of_kind_assigned.get(kind_id, ()):
                if other == inst_id:
                    continue
                oi = mapping[other]
                px, py = problem.pos[oi]
                if full or math.hypot(px - tx, py - ty) <= radius:
                    candidates.append((math.hypot(px - tx, py - ty), oi, other))
            candidates.sort(key=lambda c: (c[0], c[1]))

            base_nets = set(my_nets)
            best_delta = -1e-9
            best = None
            for _d, oi, other in candidates:
                if other is None:
                    before = nets_cost(base_nets, mapping) + penalty(cur)
                    mapping[inst_id] = oi
                    after = nets_cost(base_nets, mapping) + penalty(oi)
                    mapping[inst_id] = cur
                    delta = after - before
                else:
                    affected = base_nets | set(problem.nets_of.get(other, ()))
                    before = nets_cost(affected, mapping)
                    mapping[inst_id], mapping[other] = mapping[other], mapping[inst_id]
                    after = nets_cost(affected, mapping)
                    mapping[inst_id], mapping[other] = mapping[other], mapping[inst_id]
                    delta = after - before
                if delta < best_delta:
                    best_delta = delta
                    best = (oi, other)
            if best is not None:
                oi, other = best
                if other is None:
                    free_by_kind[kind_id].remove(oi)
                    free_by_kind[kind_id].append(cur)
                    free_by_kind[kind_id].sort()
                    mapping[inst_id] = oi
                else:
                    mapping[inst_id], mapping[other] = mapping[other], mapping[inst_id]
                improved = True
        if not improved:
            break

    if full:
        _canonicalize_ties(problem, mapping, inst_ids)
    return mapping


def _canonicalize_ties(problem: _Problem, mapping: dict[str, int], inst_ids) -> None:
    """Resolve exact cost ties toward the lexicographic (instance, obs) order.

    Swapping two same-kind instances at zero cost delta is accepted when it
    strictly lowers the mapping's canonical key, so symmetric layouts come
    out the same as the exhaustive oracle.  Each accepted swap decreases a
    finite well-order, so the loop terminates.
    """
    changed = True
    while changed:
        changed = False
        for a in inst_ids:
            for b in inst_ids:
                if b <= a or problem.kind_of[a] != problem.kind_of[b]:
                    continue
                if mapping[a] <= mapping[b]:
                    continue
                affected = set(problem.nets_of.get(a, ())) | set(problem.nets_of.get(b, ()))
                before = sum(problem.net_length(ni, mapping) for ni in affected)
                mapping[a], mapping[b] = mapping[b], mapping[a]
                after = sum(problem.net_length(ni, mapping) for ni in affected)
                if abs(after - before) < 1e-9:
                    changed = True
                else:
                    mapping[a], mapping[b] = mapping[b], mapping[a]


# --- public operations ------------------------------------------------------


def assign(
    netlist: Netlist,
    field: ObservedField,
    params: AssignParams | None = None,
) -> Assignment:
    """Greedy-with-refinement heuristic assignment (deterministic)."""
    params = params or AssignParams()
    problem = _Problem(netlist, field, params)
    problem.set_overlaps(_overlap_obs_ids(field))
    mapping = None
    if len(problem.instances) >= params.landmark_min_size:
        coords = _landmark_coords(problem)
        if coords is not None:
            mapping = _greedy_global(problem, field, coords)
    if mapping is None:
        mapping = _greedy(problem, field)
    mapping = _refine(problem, mapping, field)
    return _package(problem, field, mapping)


def assign_exhaustive(
    netlist: Netlist,
    field: ObservedField,
    params: AssignParams | None = None,
    max_nodes: int = 2_000_000,
) -> Assignment:
    """Globally cost-minimal assignment by enumeration.

    Refuses more than 8 logical instances; ties break on the lexicographic
    (instance_id, obs_id) sequence, i.e. the first minimum found when
    candidates are explored in sorted order.
    """
    params = params or AssignParams()
    if len(netlist.instances) > 8:
        raise ExhaustiveLimitError(
            f"assign_exhaustive is limited to 8 logical instances, "
            f"got {len(netlist.instances)}"
        )
    problem = _Problem(netlist, field, params)
    problem.set_overlaps(_overlap_obs_ids(field))

    # skip branches are only allowed for kinds with more demand than supply
    demand: dict[str, int] = {}
    for _, kind_id in problem.instances:
        demand[kind_id] = demand.get(kind_id, 0) + 1
    supply = {k: len(v) for k, v in problem.eligible_by_kind.items()}
    may_skip = {
        k for k in demand if demand[k] > supply.get(k, 0)
    }
    max_assignable = {
        k: min(demand[k], supply.get(k, 0)) for k in demand
    }

    best: list = [math.inf, None]
    used: set[int] = set()
    mapping: dict[str, int] = {}
    assigned_per_kind = {k: 0 for k in demand}
    remaining_per_kind = dict(demand)
    nodes = [0]

    insts = problem.instances

    def recurse(i: int):
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise ExhaustiveLimitError(
                f"assign_exhaustive search exceeded {max_nodes} nodes"
            )
        if i == len(insts):
            # keep only maximal assignments
            for k in demand:
                if assigned_per_kind[k] < max_assignable[k]:
                    return
            cost = problem.total_cost(mapping)
            if cost < best[0] - 1e-12:
                best[0] = cost
                best[1] = dict(mapping)
            return
        inst_id, kind_id = insts[i]
        remaining_per_kind[kind_id] -= 1
        for oi in problem.eligible_by_kind.get(kind_id, ()):
            if oi in used:
                continue
            used.add(oi)
            mapping[inst_id] = oi
            assigned_per_kind[kind_id] += 1
            recurse(i + 1)
            assigned_per_kind[kind_id] -= 1
            del mapping[inst_id]
            used.discard(oi)
        if kind_id in may_skip or supply.get(kind_id, 0) == 0:
            # leaving this instance unassigned can still be maximal
            if assigned_per_kind[kind_id] + remaining_per_kind[kind_id] >= max_assignable[kind_id]:
                recurse(i + 1)
        remaining_per_kind[kind_id] += 1

    recurse(0)
    return _package(problem, field, best[1] or {})


def _package(problem: _Problem, field: ObservedField, mapping: dict[str, int]) -> Assignment:
    cost = problem.total_cost(mapping)
    obs_ids = {inst: field.observations[oi].obs_id for inst, oi in mapping.items()}
    assigned_obs = set(obs_ids.values())
    unassigned = tuple(sorted(i for i, _ in problem.instances if i not in mapping))
    unused = tuple(sorted(o.obs_id for o in field.observations if o.obs_id not in assigned_obs))
    return Assignment(
        mapping=dict(sorted(obs_ids.items())),
        unassigned_logical=unassigned,
        unused_physical=unused,
        cost=cost,
    )
