# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled routing kernel.

Port of ``_router_py`` with identical semantics and tie-breaking; the two
kernels must produce bit-identical paths.  See the Python twin for the
algorithm documentation.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef int FREE = -1

ctypedef cnp.uint8_t u8
ctypedef cnp.uint16_t u16
ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64

cdef i64 COST_SCALE = <i64>1 << 27
cdef i64 IDX_MASK = (<i64>1 << 26) - 1


cdef inline i64 _manh(long x, long y, long tx, long ty) nogil:
    cdef long dx = x - tx
    cdef long dy = y - ty
    if dx < 0:
        dx = -dx
    if dy < 0:
        dy = -dy
    return dx + dy


cdef inline bint _thin(long x, long y, i64[:] term_x, i64[:] term_y, double thin_r2) nogil:
    cdef Py_ssize_t i
    cdef double dx, dy
    for i in range(term_x.shape[0]):
        dx = x - term_x[i]
        dy = y - term_y[i]
        if dx * dx + dy * dy <= thin_r2:
            return True
    return False


cdef inline int _own_guard(long x, long y, i64[:] term_x, i64[:] term_y, int r) nogil:
    cdef Py_ssize_t i
    cdef int n = 0
    cdef long dx, dy
    for i in range(term_x.shape[0]):
        dx = x - term_x[i]
        if dx < 0:
            dx = -dx
        dy = y - term_y[i]
        if dy < 0:
            dy = -dy
        if dx <= r and dy <= r:
            n += 1
    return n


cdef inline bint _probe_ok(u8[:, :] blocked, i32[:, :] occ, u16[:, :] mask_thin,
                           u16[:, :] mask_thick, int net,
                           i64[:] term_x, i64[:] term_y, double thin_r2,
                           int r_tt, int r_tk, long x, long y) nogil:
    cdef int o
    if blocked[y, x]:
        return False
    o = occ[y, x]
    if o != FREE and o != net:
        return False
    if _thin(x, y, term_x, term_y, thin_r2):
        return mask_thin[y, x] == <u16>_own_guard(x, y, term_x, term_y, r_tt)
    return mask_thick[y, x] == <u16>_own_guard(x, y, term_x, term_y, r_tk)


cdef long _scan_jump(u8[:, :] blocked, i32[:, :] occ, u16[:, :] mask_thin,
                     u16[:, :] mask_thick, u8[:, :] guard_thin, u8[:, :] guard_thick,
                     int net,
                     long x, long y, long dx, long dy, int l_max,
                     int r_tt, int r_tk, int r_max,
                     i64[:] term_x, i64[:] term_y, double thin_r2,
                     long x0, long y0, long x1, long y1,
                     int* n_cross_out) nogil:
    """Nearest valid straight jump landing, or 0 when none exists.

    The jump may never enter a foreign pin's guard zone: insulation
    excuses wire-to-wire proximity, not covering a contact area."""
    cdef long cross_pos[512]
    cdef long free_pos[512]
    cdef int n_cross = 0, n_free = 0
    cdef long k, cx, cy, p
    cdef int o, j, i
    cdef bint clean, ok, covered
    for k in range(1, l_max + 1):
        cx = x + dx * k
        cy = y + dy * k
        if cx < x0 or cx >= x1 or cy < y0 or cy >= y1:
            return 0
        if blocked[cy, cx]:
            return 0
        o = occ[cy, cx]
        if o == net:
            return 0
        if o != FREE:
            if n_cross < 512:
                cross_pos[n_cross] = k
                n_cross += 1
            continue
        # free cells may not sit in a foreign pin's guard zone (crossed
        # wires are exempt: they already settled their own pin clearances)
        if _thin(cx, cy, term_x, term_y, thin_r2):
            if guard_thin[cy, cx] != <u8>_own_guard(cx, cy, term_x, term_y, r_tt):
                return 0
        else:
            if guard_thick[cy, cx] != <u8>_own_guard(cx, cy, term_x, term_y, r_tk):
                return 0
        if _thin(cx, cy, term_x, term_y, thin_r2):
            clean = mask_thin[cy, cx] == <u16>_own_guard(cx, cy, term_x, term_y, r_tt)
        else:
            clean = mask_thick[cy, cx] == <u16>_own_guard(cx, cy, term_x, term_y, r_tk)
        if clean and n_cross > 0:
            ok = True
            for j in range(n_free):
                p = free_pos[j]
                covered = False
                for i in range(n_cross):
                    if p - cross_pos[i] <= r_max and cross_pos[i] - p <= r_max:
                        covered = True
                        break
                if not covered:
                    ok = False
                    break
            if ok:
                n_cross_out[0] = n_cross
                return k
        if n_free < 512:
            free_pos[n_free] = k
            n_free += 1
    return 0


def astar(
    cnp.ndarray[u8, ndim=2] blocked_arr,
    cnp.ndarray[i32, ndim=2] occ_arr,
    cnp.ndarray[u16, ndim=2] mask_thin_arr,
    cnp.ndarray[u16, ndim=2] mask_thick_arr,
    cnp.ndarray[u8, ndim=2] guard_thin_arr,
    cnp.ndarray[u8, ndim=2] guard_thick_arr,
    cnp.ndarray[u8, ndim=2] prox_arr,
    int net,
    sources,
    target,
    term_x_arr,
    term_y_arr,
    double thin_r2,
    int r_tt,
    int r_tk,
    int r_max,
    int bridge_penalty,
    window,
    int relax_mask=0,
    int relax_occ=0,
):
    cdef u8[:, :] blocked = blocked_arr
    cdef i32[:, :] occ = occ_arr
    cdef u16[:, :] mask_thin = mask_thin_arr
    cdef u16[:, :] mask_thick = mask_thick_arr
    cdef u8[:, :] guard_thin = guard_thin_arr
    cdef u8[:, :] guard_thick = guard_thick_arr
    cdef u8[:, :] prox = prox_arr
    cdef cnp.ndarray tx_c = np.ascontiguousarray(term_x_arr, dtype=np.int64)
    cdef cnp.ndarray ty_c = np.ascontiguousarray(term_y_arr, dtype=np.int64)
    cdef i64[:] term_x = tx_c
    cdef i64[:] term_y = ty_c

    cdef long x0 = window[0], y0 = window[1], x1 = window[2], y1 = window[3]
    cdef long ww = x1 - x0, wh = y1 - y0
    cdef long tx = target[0], ty = target[1]
    if not (x0 <= tx < x1 and y0 <= ty < y1):
        return None
    cdef bint relaxed = relax_mask > 0 or relax_occ > 0
    cdef int l_max = 6 * r_max + 6  # long enough to clear a few parallel wires

    cdef cnp.ndarray[i64, ndim=1] g_arr = np.full(ww * wh, <i64>1 << 62, dtype=np.int64)
    cdef cnp.ndarray[i32, ndim=1] parent_arr = np.full(ww * wh, -1, dtype=np.int32)
    cdef cnp.ndarray[u8, ndim=1] closed_arr = np.zeros(ww * wh, dtype=np.uint8)
    cdef i64[:] g = g_arr
    cdef i32[:] parent = parent_arr
    cdef u8[:] closed = closed_arr

    cdef i64 target_idx = (ty - y0) * ww + (tx - x0)
    if not relaxed and not _probe_ok(blocked, occ, mask_thin, mask_thick, net,
                                     term_x, term_y, thin_r2, r_tt, r_tk, tx, ty):
        return None
    if relaxed and blocked[ty, tx]:
        return None

    cdef Py_ssize_t cap = 8192
    cdef Py_ssize_t size = 0
    heap_keys = np.empty(cap, dtype=np.int64)
    heap_ties = np.empty(cap, dtype=np.int64)
    cdef i64[:] hk = heap_keys
    cdef i64[:] hi = heap_ties

    cdef long sx, sy, cx, cy, nx, ny, k
    cdef i64 ci, ni, key, h0, f_here, gc, ng, hn, tk, ti
    cdef Py_ssize_t pos, parent_pos, l, r, smallest
    cdef int d, o, n_cross, push
    cdef i64 step_scaled
    cdef bint masked, found = False
    cdef long DX[4]
    cdef long DY[4]
    DX[0] = 1; DY[0] = 0
    DX[1] = -1; DY[1] = 0
    DX[2] = 0; DY[2] = 1
    DX[3] = 0; DY[3] = -1

    # seed the heap with the tree cells (multi-source, g = 0)
    for sxy in sources:
        sx = sxy[0]
        sy = sxy[1]
        if not (x0 <= sx < x1 and y0 <= sy < y1):
            continue
        ci = (sy - y0) * ww + (sx - x0)
        if g[ci] > 0:
            g[ci] = 0
            parent[ci] = -1
            h0 = _manh(sx, sy, tx, ty)
            if size == cap:
                cap *= 2
                nk = np.empty(cap, dtype=np.int64)
                nk[:size] = heap_keys[:size]
                heap_keys = nk
                hk = heap_keys
                nix = np.empty(cap, dtype=np.int64)
                nix[:size] = heap_ties[:size]
                heap_ties = nix
                hi = heap_ties
            hk[size] = h0 * COST_SCALE
            hi[size] = (h0 << 26) | ci
            pos = size
            size += 1
            while pos > 0:
                parent_pos = (pos - 1) >> 1
                if hk[pos] < hk[parent_pos] or (hk[pos] == hk[parent_pos] and hi[pos] < hi[parent_pos]):
                    tk = hk[pos]; hk[pos] = hk[parent_pos]; hk[parent_pos] = tk
                    ti = hi[pos]; hi[pos] = hi[parent_pos]; hi[parent_pos] = ti
                    pos = parent_pos
                else:
                    break
    if size == 0:
        return None

    while size > 0:
        key = hk[0]
        ci = hi[0] & IDX_MASK
        # pop root
        size -= 1
        hk[0] = hk[size]
        hi[0] = hi[size]
        pos = 0
        while True:
            l = 2 * pos + 1
            r = 2 * pos + 2
            smallest = pos
            if l < size and (hk[l] < hk[smallest] or (hk[l] == hk[smallest] and hi[l] < hi[smallest])):
                smallest = l
            if r < size and (hk[r] < hk[smallest] or (hk[r] == hk[smallest] and hi[r] < hi[smallest])):
                smallest = r
            if smallest == pos:
                break
            tk = hk[pos]; hk[pos] = hk[smallest]; hk[smallest] = tk
            ti = hi[pos]; hi[pos] = hi[smallest]; hi[smallest] = ti
            pos = smallest

        if closed[ci]:
            continue
        cx = ci % ww + x0
        cy = ci // ww + y0
        if key - _manh(cx, cy, tx, ty) * COST_SCALE > g[ci]:
            continue
        closed[ci] = 1
        if ci == target_idx:
            found = True
            break
        gc = g[ci]

        for d in range(4):
            nx = cx + DX[d]
            ny = cy + DY[d]
            push = 0
            if nx < x0 or nx >= x1 or ny < y0 or ny >= y1:
                continue
            if relaxed:
                if blocked[ny, nx]:
                    continue
                step_scaled = COST_SCALE
                o = occ[ny, nx]
                if o != FREE and o != net:
                    step_scaled += relax_occ * COST_SCALE
                if _thin(nx, ny, term_x, term_y, thin_r2):
                    masked = mask_thin[ny, nx] > <u16>_own_guard(nx, ny, term_x, term_y, r_tt)
                else:
                    masked = mask_thick[ny, nx] > <u16>_own_guard(nx, ny, term_x, term_y, r_tk)
                if masked:
                    step_scaled += relax_mask * COST_SCALE
                ng = gc + step_scaled + (1 if prox[ny, nx] else 0)
                push = 1
            elif _probe_ok(blocked, occ, mask_thin, mask_thick, net,
                           term_x, term_y, thin_r2, r_tt, r_tk, nx, ny):
                ng = gc + COST_SCALE + (1 if prox[ny, nx] else 0)
                push = 1
            elif not blocked[ny, nx]:
                n_cross = 0
                k = _scan_jump(blocked, occ, mask_thin, mask_thick,
                               guard_thin, guard_thick, net,
                               cx, cy, DX[d], DY[d], l_max, r_tt, r_tk, r_max,
                               term_x, term_y, thin_r2, x0, y0, x1, y1, &n_cross)
                if k > 0:
                    nx = cx + DX[d] * k
                    ny = cy + DY[d] * k
                    ng = gc + (k + <i64>bridge_penalty * n_cross) * COST_SCALE
                    ng += 1 if prox[ny, nx] else 0
                    push = 1

            if not push:
                continue
            ni = (ny - y0) * ww + (nx - x0)
            if closed[ni] or ng >= g[ni]:
                continue
            g[ni] = ng
            parent[ni] = <i32>ci
            hn = _manh(nx, ny, tx, ty)
            if size == cap:
                cap *= 2
                nk = np.empty(cap, dtype=np.int64)
                nk[:size] = heap_keys[:size]
                heap_keys = nk
                hk = heap_keys
                nix = np.empty(cap, dtype=np.int64)
                nix[:size] = heap_ties[:size]
                heap_ties = nix
                hi = heap_ties
            hk[size] = ng + hn * COST_SCALE
            hi[size] = (hn << 26) | ni
            pos = size
            size += 1
            while pos > 0:
                parent_pos = (pos - 1) >> 1
                if hk[pos] < hk[parent_pos] or (hk[pos] == hk[parent_pos] and hi[pos] < hi[parent_pos]):
                    tk = hk[pos]; hk[pos] = hk[parent_pos]; hk[parent_pos] = tk
                    ti = hi[pos]; hi[pos] = hi[parent_pos]; hi[parent_pos] = ti
                    pos = parent_pos
                else:
                    break

    if not found:
        return None

    # reconstruct, expanding jumps into their straight cells; cells strictly
    # inside a jump are insulated (they ride the bridge pad)
    rev = []
    ci = target_idx
    while ci != -1:
        rev.append(ci)
        ci = parent[ci]
    rev.reverse()
    cells = []
    insulated = []
    bridges = []
    cdef long px, py, steps, stx, sty, s, bx, by
    cdef Py_ssize_t n
    for n in range(len(rev)):
        ci = rev[n]
        cx = ci % ww + x0
        cy = ci // ww + y0
        if n == 0:
            cells.append((int(cx), int(cy)))
            insulated.append(False)
            continue
        prev = cells[len(cells) - 1]
        px = prev[0]
        py = prev[1]
        steps = max(abs(cx - px), abs(cy - py))
        stx = (cx > px) - (cx < px)
        sty = (cy > py) - (cy < py)
        for s in range(1, steps + 1):
            bx = px + stx * s
            by = py + sty * s
            cells.append((int(bx), int(by)))
            insulated.append(steps > 1 and s < steps)
            o = occ[by, bx]
            if o != FREE and o != net:
                bridges.append((int(bx), int(by), int(o)))
    return cells, int(g[target_idx]), bridges, insulated


def commit_occ(cnp.ndarray[i32, ndim=2] occ_arr, int net, cells):
    cdef i32[:, :] occ = occ_arr
    claimed = []
    cdef long x, y
    for xy in cells:
        x = xy[0]
        y = xy[1]
        if occ[y, x] == FREE:
            occ[y, x] = net
            claimed.append((int(x), int(y)))
    return claimed


def clear_occ(cnp.ndarray[i32, ndim=2] occ_arr, int net, cells):
    cdef i32[:, :] occ = occ_arr
    cdef long x, y
    for xy in cells:
        x = xy[0]
        y = xy[1]
        if occ[y, x] == net:
            occ[y, x] = FREE


cdef void _stamp_square(u16[:, :] m, long x, long y, int r, int delta) noexcept nogil:
    cdef long ny = m.shape[0]
    cdef long nx = m.shape[1]
    cdef long ya = y - r, yb = y + r + 1, xa = x - r, xb = x + r + 1, yy, xx
    if ya < 0: ya = 0
    if yb > ny: yb = ny
    if xa < 0: xa = 0
    if xb > nx: xb = nx
    for yy in range(ya, yb):
        for xx in range(xa, xb):
            m[yy, xx] = <u16>(m[yy, xx] + delta)


def stamp_net(cnp.ndarray[u16, ndim=2] mask_thin_arr, cnp.ndarray[u16, ndim=2] mask_thick_arr,
              cells, tiers, int r_tt, int r_tk, int r_kk, int delta):
    cdef u16[:, :] mt = mask_thin_arr
    cdef u16[:, :] mk = mask_thick_arr
    cdef long x, y
    cdef int thin
    for xy, thin in zip(cells, tiers):
        x = xy[0]
        y = xy[1]
        _stamp_square(mt, x, y, r_tt if thin else r_tk, delta)
        _stamp_square(mk, x, y, r_tk if thin else r_kk, delta)


cdef void _stamp_square_u8(u8[:, :] m, long x, long y, int r) noexcept nogil:
    cdef long ny = m.shape[0]
    cdef long nx = m.shape[1]
    cdef long ya = y - r, yb = y + r + 1, xa = x - r, xb = x + r + 1, yy, xx
    if ya < 0: ya = 0
    if yb > ny: yb = ny
    if xa < 0: xa = 0
    if xb > nx: xb = nx
    for yy in range(ya, yb):
        for xx in range(xa, xb):
            m[yy, xx] = <u8>(m[yy, xx] + 1)


def stamp_guards(cnp.ndarray[u16, ndim=2] mask_thin_arr, cnp.ndarray[u16, ndim=2] mask_thick_arr,
                 cnp.ndarray[u8, ndim=2] guard_thin_arr, cnp.ndarray[u8, ndim=2] guard_thick_arr,
                 cells, int r_tt, int r_tk):
    cdef u16[:, :] mt = mask_thin_arr
    cdef u16[:, :] mk = mask_thick_arr
    cdef u8[:, :] gt = guard_thin_arr
    cdef u8[:, :] gk = guard_thick_arr
    cdef long x, y
    for xy in cells:
        x = xy[0]
        y = xy[1]
        _stamp_square(mt, x, y, r_tt, 1)
        _stamp_square(mk, x, y, r_tk, 1)
        _stamp_square_u8(gt, x, y, r_tt)
        _stamp_square_u8(gk, x, y, r_tk)


KERNEL_NAME = "compiled"
