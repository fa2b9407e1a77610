"""Pure-Python routing kernel.

Semantics reference for the compiled kernel in ``_router_cy.pyx``; both
must produce bit-identical results.  The kernel operates on shared numpy
grids:

* ``blocked``   uint8  — component bodies (minus pin landing cells)
* ``occ``       int32  — net index occupying each cell, -1 if free
* ``mask_thin``/``mask_thick`` uint16 — clearance halo counters; a probe
  of the given width tier may only enter cells whose count is fully
  explained by the net's own terminal guards
* ``guard_thin``/``guard_thick`` uint8 — pin guard counters; bridge jumps
  may never fly through a foreign pin's guard zone
* ``prox``      uint8  — 1 near a component body; used as a cost tie-break

Search costs are scaled: a step costs COST_SCALE and proximity to a body
adds 1, so paths are exactly length-optimal and, among equal-length
paths, prefer to keep clear of components (leaving pin pockets open for
later nets).  Crossing a foreign wire is a straight "jump" over its cells
at bridge_penalty * COST_SCALE per crossed cell; jumped free cells must
stay within r_max cells of a crossed cell (the insulated pad covers them).

Heap ordering is (f, (h << 26) | local_index), identical in both kernels,
so routed paths are platform-independent.
"""

from __future__ import annotations

import heapq

FREE = -1
COST_SCALE = 1 << 27


def _thin(x, y, term_x, term_y, thin_r2):
    for i in range(len(term_x)):
        dx = x - term_x[i]
        dy = y - term_y[i]
        if dx * dx + dy * dy <= thin_r2:
            return True
    return False


def _own_guard(x, y, term_x, term_y, r):
    """Count of this net's own terminal guard stamps covering (x, y)."""
    n = 0
    for i in range(len(term_x)):
        if abs(x - term_x[i]) <= r and abs(y - term_y[i]) <= r:
            n += 1
    return n


def astar(
    blocked,
    occ,
    mask_thin,
    mask_thick,
    guard_thin,
    guard_thick,
    prox,
    net,
    sources,          # list[(x, y)] tree cells, g = 0
    target,           # (x, y)
    term_x,
    term_y,           # all terminal cells of this net (thin-zone centers)
    thin_r2,          # squared thin-zone radius in cells
    r_tt,
    r_tk,             # guard radii: thin and thick probe tiers
    r_max,            # widest clearance radius in cells
    bridge_penalty,
    window,           # (x0, y0, x1, y1) half-open
    relax_mask=0,
    relax_occ=0,
):
    """Search one edge. Returns (cells, cost, bridges, insulated) or None.

    cells run source -> target; bridges are (x, y, crossed_net) tuples;
    insulated flags cells that ride a bridge pad.  In relaxed mode
    (relax_* > 0) masked/occupied cells are passable at a surcharge and no
    jumps are made; used to find rip-up corridors.
    """
    x0, y0, x1, y1 = window
    ww = x1 - x0
    tx, ty = target
    if not (x0 <= tx < x1 and y0 <= ty < y1):
        return None
    relaxed = relax_mask > 0 or relax_occ > 0
    l_max = 6 * r_max + 6  # long enough to clear a few parallel wires

    g = {}
    parent = {}
    closed = set()
    heap = []

    def idx(x, y):
        return (y - y0) * ww + (x - x0)

    def h(x, y):
        return abs(x - tx) + abs(y - ty)

    def probe_ok(x, y):
        # strict-mode passability: free of bodies, foreign wires, and any
        # clearance halo not accounted for by this net's own terminals
        if blocked[y, x]:
            return False
        o = occ[y, x]
        if o != FREE and o != net:
            return False
        if _thin(x, y, term_x, term_y, thin_r2):
            return mask_thin[y, x] == _own_guard(x, y, term_x, term_y, r_tt)
        return mask_thick[y, x] == _own_guard(x, y, term_x, term_y, r_tk)

    target_idx = idx(tx, ty)
    if not relaxed and not probe_ok(tx, ty):
        return None
    if relaxed and blocked[ty, tx]:
        return None

    for sx, sy in sources:
        if not (x0 <= sx < x1 and y0 <= sy < y1):
            continue
        i = idx(sx, sy)
        if i not in g or g[i] > 0:
            g[i] = 0
            parent[i] = -1
            h0 = h(sx, sy)
            heapq.heappush(heap, (h0 * COST_SCALE, (h0 << 26) | i))
    if not heap:
        return None

    while heap:
        f_here, tie = heapq.heappop(heap)
        ci = tie & ((1 << 26) - 1)
        if ci in closed:
            continue
        cx = ci % ww + x0
        cy = ci // ww + y0
        if f_here - h(cx, cy) * COST_SCALE > g.get(ci, 1 << 62):
            continue
        closed.add(ci)
        if ci == target_idx:
            return _reconstruct(parent, ci, ww, x0, y0, occ, net, g[ci])
        gc = g[ci]

        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            nx = cx + dx
            ny = cy + dy
            ng = None
            if not (x0 <= nx < x1 and y0 <= ny < y1):
                continue
            if relaxed:
                if blocked[ny, nx]:
                    continue
                step = COST_SCALE
                o = occ[ny, nx]
                if o != FREE and o != net:
                    step += relax_occ * COST_SCALE
                if _thin(nx, ny, term_x, term_y, thin_r2):
                    masked = mask_thin[ny, nx] > _own_guard(nx, ny, term_x, term_y, r_tt)
                else:
                    masked = mask_thick[ny, nx] > _own_guard(nx, ny, term_x, term_y, r_tk)
                if masked:
                    step += relax_mask * COST_SCALE
                ng = gc + step + (1 if prox[ny, nx] else 0)
            elif probe_ok(nx, ny):
                ng = gc + COST_SCALE + (1 if prox[ny, nx] else 0)
            elif not blocked[ny, nx]:
                # blocked by a wire or its halo: try a straight bridge jump
                jump = _scan_jump(
                    blocked, occ, mask_thin, mask_thick, guard_thin, guard_thick,
                    net, cx, cy, dx, dy, l_max, r_tt, r_tk, r_max,
                    term_x, term_y, thin_r2, window,
                )
                if jump is None:
                    continue
                k, n_cross = jump
                nx = cx + dx * k
                ny = cy + dy * k
                ng = gc + (k + bridge_penalty * n_cross) * COST_SCALE
                ng += 1 if prox[ny, nx] else 0

            if ng is None:
                continue
            ni = idx(nx, ny)
            if ni in closed or ng >= g.get(ni, 1 << 62):
                continue
            g[ni] = ng
            parent[ni] = ci
            hn = h(nx, ny)
            heapq.heappush(heap, (ng + hn * COST_SCALE, (hn << 26) | ni))
    return None


def _scan_jump(blocked, occ, mask_thin, mask_thick, guard_thin, guard_thick,
               net, x, y, dx, dy, l_max, r_tt, r_tk, r_max,
               term_x, term_y, thin_r2, window):
    """Find the nearest valid landing for a straight jump from (x, y).

    Returns (k, crossings) where k is the jump length in cells, or None.
    Every jumped free cell must lie within r_max of a crossed cell, and the
    jump may never enter a foreign pin's guard zone: the insulated pad
    excuses wire-to-wire proximity, not covering someone's contact area.
    """
    x0, y0, x1, y1 = window
    cross_pos = []
    free_pos = []
    for k in range(1, l_max + 1):
        cx = x + dx * k
        cy = y + dy * k
        if not (x0 <= cx < x1 and y0 <= cy < y1):
            return None
        if blocked[cy, cx]:
            return None
        o = occ[cy, cx]
        if o == net:
            return None
        if o != FREE:
            cross_pos.append(k)
            continue
        # free cells may not sit in a foreign pin's guard zone (crossed
        # wires are exempt: they already settled their own pin clearances)
        if _thin(cx, cy, term_x, term_y, thin_r2):
            if guard_thin[cy, cx] != _own_guard(cx, cy, term_x, term_y, r_tt):
                return None
        else:
            if guard_thick[cy, cx] != _own_guard(cx, cy, term_x, term_y, r_tk):
                return None
        if _thin(cx, cy, term_x, term_y, thin_r2):
            clean = mask_thin[cy, cx] == _own_guard(cx, cy, term_x, term_y, r_tt)
        else:
            clean = mask_thick[cy, cx] == _own_guard(cx, cy, term_x, term_y, r_tk)
        if clean and cross_pos:
            # candidate landing: every jumped free cell must sit under the
            # insulated pad of some crossed cell
            ok = True
            for p in free_pos:
                if not any(abs(p - j) <= r_max for j in cross_pos):
                    ok = False
                    break
            if ok:
                return (k, len(cross_pos))
        free_pos.append(k)
    return None


def _reconstruct(parent, ci, ww, x0, y0, occ, net, cost):
    # walk parents back to a source; expand jumps into their straight cells;
    # cells strictly inside a jump are insulated (they ride the bridge pad)
    rev = []
    while ci != -1:
        rev.append(ci)
        ci = parent[ci]
    rev.reverse()
    cells = []
    insulated = []
    bridges = []
    for n, ci in enumerate(rev):
        x = ci % ww + x0
        y = ci // ww + y0
        if n == 0:
            cells.append((x, y))
            insulated.append(False)
            continue
        px, py = cells[-1]
        steps = max(abs(x - px), abs(y - py))
        sx = (x > px) - (x < px)
        sy = (y > py) - (y < py)
        for s in range(1, steps + 1):
            cx = px + sx * s
            cy = py + sy * s
            cells.append((cx, cy))
            insulated.append(steps > 1 and s < steps)
            o = occ[cy, cx]
            if o != FREE and o != net:
                bridges.append((cx, cy, int(o)))
    return cells, cost, bridges, insulated


def commit_occ(occ, net, cells):
    """Claim free path cells; foreign (bridge) cells stay with their owner."""
    claimed = []
    for x, y in cells:
        if occ[y, x] == FREE:
            occ[y, x] = net
            claimed.append((x, y))
    return claimed


def clear_occ(occ, net, cells):
    for x, y in cells:
        if occ[y, x] == net:
            occ[y, x] = FREE


def stamp_net(mask_thin, mask_thick, cells, tiers, r_tt, r_tk, r_kk, delta):
    """Add (or remove, delta=-1) the clearance halos of a finished net.

    tiers[i] is 1 when cells[i] carries contact-width wire.  Halos are
    Chebyshev squares: thin cells stamp mask_thin at r_tt and mask_thick
    at r_tk; thick cells stamp r_tk and r_kk respectively.
    """
    ny, nx = mask_thin.shape
    for (x, y), thin in zip(cells, tiers):
        r1 = r_tt if thin else r_tk
        r2 = r_tk if thin else r_kk
        for r, m in ((r1, mask_thin), (r2, mask_thick)):
            ya = max(y - r, 0)
            yb = min(y + r + 1, ny)
            xa = max(x - r, 0)
            xb = min(x + r + 1, nx)
            if delta > 0:
                m[ya:yb, xa:xb] += 1
            else:
                m[ya:yb, xa:xb] -= 1


def stamp_guards(mask_thin, mask_thick, guard_thin, guard_thick, cells, r_tt, r_tk):
    """Pre-stamp terminal pin cells so wires keep clear of future landings.

    Guards count both in the clearance masks (normal probes) and in the
    dedicated guard grids (so bridge jumps cannot fly over foreign pins).
    """
    ny, nx = mask_thin.shape
    for x, y in cells:
        for r, m in (
            (r_tt, mask_thin),
            (r_tk, mask_thick),
            (r_tt, guard_thin),
            (r_tk, guard_thick),
        ):
            ya = max(y - r, 0)
            yb = min(y + r + 1, ny)
            xa = max(x - r, 0)
            xb = min(x + r + 1, nx)
            m[ya:yb, xa:xb] += 1


KERNEL_NAME = "python"
