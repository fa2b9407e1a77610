"""2D geometry helpers: pose rotation, oriented-rectangle overlap, spanning length."""

from __future__ import annotations

import math

import numpy as np


def rotate(offset: tuple[float, float], theta_deg: float) -> tuple[float, float]:
    """Rotate an offset counterclockwise; 90 deg maps (x, y) -> (-y, x)."""
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    x, y = offset
    return (x * c - y * s, x * s + y * c)


def rect_corners(cx: float, cy: float, w: float, h: float, theta_deg: float) -> list[tuple[float, float]]:
    half = [(-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)]
    return [(cx + rx, cy + ry) for rx, ry in (rotate(p, theta_deg) for p in half)]


def rects_intersect(a: list[tuple[float, float]], b: list[tuple[float, float]]) -> bool:
    """Separating-axis test for two convex quads; touching counts as overlap."""
    for quad_a, quad_b in ((a, b), (b, a)):
        for i in range(4):
            ex = quad_a[(i + 1) % 4][0] - quad_a[i][0]
            ey = quad_a[(i + 1) % 4][1] - quad_a[i][1]
            # outward normal of the edge
            nx, ny = -ey, ex
            amin = min(nx * px + ny * py for px, py in quad_a)
            amax = max(nx * px + ny * py for px, py in quad_a)
            bmin = min(nx * px + ny * py for px, py in quad_b)
            bmax = max(nx * px + ny * py for px, py in quad_b)
            if amax < bmin or bmax < amin:
                return False
    return True


def spanning_length(points: list[tuple[float, float]]) -> float:
    """Euclidean minimum-spanning-tree length over the points (Prim).

    Plain loops beat numpy for the tiny point sets nets have; large sets
    fall back to the vectorized form.
    """
    n = len(points)
    if n < 2:
        return 0.0
    if n <= 64:
        dist = [math.hypot(p[0] - points[0][0], p[1] - points[0][1]) for p in points]
        dist[0] = -1.0  # in tree
        total = 0.0
        for _ in range(n - 1):
            best = math.inf
            nxt = -1
            for i, d in enumerate(dist):
                if 0.0 <= d < best:
                    best = d
                    nxt = i
            total += best
            dist[nxt] = -1.0
            px, py = points[nxt]
            for i, p in enumerate(points):
                if dist[i] >= 0.0:
                    d = math.hypot(p[0] - px, p[1] - py)
                    if d < dist[i]:
                        dist[i] = d
        return total
    pts = np.asarray(points, dtype=np.float64)
    in_tree = np.zeros(n, dtype=bool)
    dist = np.full(n, np.inf)
    in_tree[0] = True
    d = np.hypot(pts[:, 0] - pts[0, 0], pts[:, 1] - pts[0, 1])
    dist = np.minimum(dist, d)
    dist[0] = np.inf
    total = 0.0
    for _ in range(n - 1):
        nxt = int(np.argmin(np.where(in_tree, np.inf, dist)))
        total += dist[nxt]
        in_tree[nxt] = True
        d = np.hypot(pts[:, 0] - pts[nxt, 0], pts[:, 1] - pts[nxt, 1])
        np.minimum(dist, d, out=dist)
        dist[in_tree] = np.inf
    return float(total)


def bbox_of(points: list[tuple[float, float]]) -> tuple[float, float, float, float]:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return (min(xs), min(ys), max(xs), max(ys))
