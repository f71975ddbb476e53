"""Pure-Python hot kernels.

Loaded when the compiled ``fastron._core`` extension is unavailable, or when
``FASTRON_BACKEND=python`` is set. Every function and class here has a twin
with the same signature in ``_core.pyx``; the two must agree bit-for-bit on
collision verdicts and perceptron traces (kernel sums may differ in the last
few ulps because numpy reduces in a different order).
"""

import math

import numpy as np
from scipy.spatial.distance import cdist

NAME = "python"

GJK_MAX_ITER = 64
GJK_TOL = 1e-10


def _support(verts, dx, dy):
    best = verts[0]
    best_dot = best[0] * dx + best[1] * dy
    for p in verts:
        d = p[0] * dx + p[1] * dy
        if d > best_dot:
            best_dot = d
            best = p
    return best


def _closest_on_segment(ax, ay, bx, by):
    # closest point to the origin on segment a-b, and its parameter
    ex = bx - ax
    ey = by - ay
    ee = ex * ex + ey * ey
    if ee == 0.0:
        return ax, ay, 0.0
    t = -(ax * ex + ay * ey) / ee
    if t <= 0.0:
        return ax, ay, 0.0
    if t >= 1.0:
        return bx, by, 1.0
    return ax + t * ex, ay + t * ey, t


def _reduce_segment(simplex):
    (ax, ay), (bx, by) = simplex
    vx, vy, t = _closest_on_segment(ax, ay, bx, by)
    if t == 0.0:
        return [simplex[0]], vx, vy
    if t == 1.0:
        return [simplex[1]], vx, vy
    return simplex, vx, vy


def gjk_intersect(a, b):
    """Boolean GJK on two convex vertex sequences of ``(x, y)`` pairs.

    Touching counts as intersecting. Returns ``True`` if the iteration cap is
    hit, which errs on the side of reporting a collision.
    """
    if isinstance(a, np.ndarray):
        a = [tuple(p) for p in a.reshape(-1, 2).tolist()]
    if isinstance(b, np.ndarray):
        b = [tuple(p) for p in b.reshape(-1, 2).tolist()]
    return _gjk(a, b)


def _gjk(a, b):
    a0 = a[0]
    b0 = b[0]
    vx = a0[0] - b0[0]
    vy = a0[1] - b0[1]
    simplex = []
    for _ in range(GJK_MAX_ITER):
        pa = _support(a, -vx, -vy)
        pb = _support(b, vx, vy)
        wx = pa[0] - pb[0]
        wy = pa[1] - pb[1]
        vw = vx * wx + vy * wy
        if vw > 0.0:
            return False
        vv = vx * vx + vy * vy
        if vv - vw <= GJK_TOL:
            return True
        simplex.append((wx, wy))
        n = len(simplex)
        if n == 1:
            vx, vy = wx, wy
        elif n == 2:
            simplex, vx, vy = _reduce_segment(simplex)
        else:
            (ax, ay), (bx, by), (cx, cy) = simplex
            area = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if area != 0.0:
                d1 = (bx - ax) * (-ay) - (by - ay) * (-ax)
                d2 = (cx - bx) * (-by) - (cy - by) * (-bx)
                d3 = (ax - cx) * (-cy) - (ay - cy) * (-cx)
                if area > 0.0:
                    if d1 >= 0.0 and d2 >= 0.0 and d3 >= 0.0:
                        return True
                elif d1 <= 0.0 and d2 <= 0.0 and d3 <= 0.0:
                    return True
            best = None
            for edge in ((simplex[0], simplex[2]), (simplex[1], simplex[2]),
                         (simplex[0], simplex[1])):
                reduced, ex, ey = _reduce_segment(list(edge))
                dd = ex * ex + ey * ey
                if best is None or dd < best[0]:
                    best = (dd, reduced, ex, ey)
            _, simplex, vx, vy = best
    return True


def link_rectangles(lengths, half_width, base_x, base_y, q):
    """Corner lists of every link rectangle, in chain order."""
    rects = []
    phi = 0.0
    sx = base_x
    sy = base_y
    for k in range(len(lengths)):
        phi += q[k]
        c = math.cos(phi)
        s = math.sin(phi)
        ex = sx + lengths[k] * c
        ey = sy + lengths[k] * s
        hx = -s * half_width
        hy = c * half_width
        rects.append(((sx - hx, sy - hy), (ex - hx, ey - hy),
                      (ex + hx, ey + hy), (sx + hx, sy + hy)))
        sx = ex
        sy = ey
    return rects


class ArmScene:
    """A planar arm and a fixed set of convex obstacles, queried by configuration."""

    def __init__(self, lengths, half_width, base, obstacles):
        self.lengths = [float(v) for v in lengths]
        self.half_width = float(half_width)
        self.base_x = float(base[0])
        self.base_y = float(base[1])
        self.obstacles = [[(float(x), float(y)) for x, y in np.asarray(o).tolist()]
                          for o in obstacles]

    def collides(self, q):
        if len(q) != len(self.lengths):
            raise ValueError(f"expected {len(self.lengths)} joint angles, got {len(q)}")
        if not self.obstacles:
            return False
        if isinstance(q, np.ndarray):
            q = q.tolist()
        for rect in link_rectangles(self.lengths, self.half_width,
                                    self.base_x, self.base_y, q):
            for obs in self.obstacles:
                if _gjk(rect, obs):
                    return True
        return False

    def label_many(self, configs):
        configs = np.asarray(configs, dtype=np.float64)
        out = np.empty(len(configs), dtype=np.int8)
        for i, q in enumerate(configs.tolist()):
            out[i] = 1 if self.collides(q) else -1
        return out


class KernelSum:
    """Gaussian kernel expansion ``sum_i alpha_i exp(-gamma |x_i - q|^2)``."""

    def __init__(self, points, alpha, gamma):
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        self.alpha = np.ascontiguousarray(alpha, dtype=np.float64)
        self.gamma = float(gamma)

    def value(self, q):
        if self.alpha.size == 0:
            return 0.0
        d = self.points - q
        return float(self.alpha @ np.exp(-self.gamma * np.einsum("ij,ij->i", d, d)))

    def values(self, configs, chunk=4096):
        configs = np.asarray(configs, dtype=np.float64)
        out = np.zeros(len(configs))
        if self.alpha.size == 0:
            return out
        for lo in range(0, len(configs), chunk):
            d2 = cdist(configs[lo:lo + chunk], self.points, "sqeuclidean")
            out[lo:lo + chunk] = np.exp(-self.gamma * d2) @ self.alpha
        return out


def remove_redundant(alpha, F, G, y):
    """Zero redundant weights in place, largest leave-one-out margin first."""
    removed = 0
    while True:
        sup = np.flatnonzero(alpha)
        if sup.size == 0:
            return removed
        m = y[sup] * (F[sup] - alpha[sup])
        k = int(np.argmax(m))
        if not m[k] > 0.0:
            return removed
        j = sup[k]
        F -= G[j] * alpha[j]
        alpha[j] = 0.0
        removed += 1


def perceptron_update(alpha, F, G, y, r_plus, max_updates):
    """Run the model-update loop in place.

    Returns ``(converged, iterations, removed)`` where ``iterations`` counts
    weight corrections applied.
    """
    iterations = 0
    removed = 0
    for _ in range(max_updates):
        removed += remove_redundant(alpha, F, G, y)
        margins = y * F
        j = int(np.argmin(margins))
        if margins[j] > 0.0:
            return True, iterations, removed
        r = r_plus if y[j] > 0 else 1.0
        delta = r * y[j] - F[j]
        alpha[j] += delta
        F += G[j] * delta
        iterations += 1
    return bool(np.all(y * F > 0.0)), iterations, removed
