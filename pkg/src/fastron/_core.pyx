# cython: language_level=3
"""Compiled hot kernels for the collision oracle and the kernel perceptron.

Mirrors ``_pycore`` operation for operation; see that module for the
reference semantics.
"""

from libc.math cimport cos, exp, sin

import numpy as np

NAME = "compiled"

GJK_MAX_ITER = 64
GJK_TOL = 1e-10

cdef int _MAX_ITER = 64
cdef double _TOL = 1e-10
cdef int _EDGE_A[3]
cdef int _EDGE_B[3]
_EDGE_A[:] = [0, 1, 0]
_EDGE_B[:] = [2, 2, 1]


cdef inline int _support(const double* v, Py_ssize_t n, double dx, double dy) noexcept nogil:
    cdef Py_ssize_t i
    cdef int best = 0
    cdef double best_dot = v[0] * dx + v[1] * dy
    cdef double d
    for i in range(n):
        d = v[2 * i] * dx + v[2 * i + 1] * dy
        if d > best_dot:
            best_dot = d
            best = <int>i
    return best


cdef inline int _closest_on_segment(double ax, double ay, double bx, double by,
                                    double* vx, double* vy) noexcept nogil:
    # 0: only a kept, 1: only b kept, 2: both kept
    cdef double ex = bx - ax
    cdef double ey = by - ay
    cdef double ee = ex * ex + ey * ey
    cdef double t
    if ee == 0.0:
        vx[0] = ax
        vy[0] = ay
        return 0
    t = -(ax * ex + ay * ey) / ee
    if t <= 0.0:
        vx[0] = ax
        vy[0] = ay
        return 0
    if t >= 1.0:
        vx[0] = bx
        vy[0] = by
        return 1
    vx[0] = ax + t * ex
    vy[0] = ay + t * ey
    return 2


cdef bint _gjk(const double* a, Py_ssize_t na, const double* b, Py_ssize_t nb) noexcept nogil:
    cdef double sx[3]
    cdef double sy[3]
    cdef double px, py, qx, qy
    cdef int n = 0
    cdef int it, ia, ib, e, code, best_code, best_a, best_b
    cdef double vx = a[0] - b[0]
    cdef double vy = a[1] - b[1]
    cdef double wx, wy, vw, vv, area, d1, d2, d3, ex, ey, dd
    cdef double best_dd, best_x, best_y
    cdef double ax, ay, bx, by, cx, cy
    for it in range(_MAX_ITER):
        ia = _support(a, na, -vx, -vy)
        ib = _support(b, nb, vx, vy)
        wx = a[2 * ia] - b[2 * ib]
        wy = a[2 * ia + 1] - b[2 * ib + 1]
        vw = vx * wx + vy * wy
        if vw > 0.0:
            return False
        vv = vx * vx + vy * vy
        if vv - vw <= _TOL:
            return True
        sx[n] = wx
        sy[n] = wy
        n += 1
        if n == 1:
            vx = wx
            vy = wy
        elif n == 2:
            code = _closest_on_segment(sx[0], sy[0], sx[1], sy[1], &vx, &vy)
            if code == 0:
                n = 1
            elif code == 1:
                sx[0] = sx[1]
                sy[0] = sy[1]
                n = 1
        else:
            ax = sx[0]
            ay = sy[0]
            bx = sx[1]
            by = sy[1]
            cx = sx[2]
            cy = sy[2]
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
            best_dd = -1.0
            best_code = 0
            best_a = 0
            best_b = 0
            best_x = 0.0
            best_y = 0.0
            for e in range(3):
                code = _closest_on_segment(sx[_EDGE_A[e]], sy[_EDGE_A[e]],
                                           sx[_EDGE_B[e]], sy[_EDGE_B[e]], &ex, &ey)
                dd = ex * ex + ey * ey
                if best_dd < 0.0 or dd < best_dd:
                    best_dd = dd
                    best_code = code
                    best_a = _EDGE_A[e]
                    best_b = _EDGE_B[e]
                    best_x = ex
                    best_y = ey
            px = sx[best_a]
            py = sy[best_a]
            qx = sx[best_b]
            qy = sy[best_b]
            if best_code == 0:
                sx[0] = px
                sy[0] = py
                n = 1
            elif best_code == 1:
                sx[0] = qx
                sy[0] = qy
                n = 1
            else:
                sx[0] = px
                sy[0] = py
                sx[1] = qx
                sy[1] = qy
                n = 2
            vx = best_x
            vy = best_y
    return True


def gjk_intersect(a, b):
    """Boolean GJK on two convex vertex arrays of shape ``(n, 2)``."""
    cdef const double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    return bool(_gjk(&av[0, 0], av.shape[0], &bv[0, 0], bv.shape[0]))


def link_rectangles(lengths, double half_width, double base_x, double base_y, q):
    cdef Py_ssize_t k
    cdef double phi = 0.0, c, s, ex, ey, hx, hy
    cdef double sx = base_x
    cdef double sy = base_y
    rects = []
    for k in range(len(lengths)):
        phi += q[k]
        c = cos(phi)
        s = sin(phi)
        ex = sx + lengths[k] * c
        ey = sy + lengths[k] * s
        hx = -s * half_width
        hy = c * half_width
        rects.append(((sx - hx, sy - hy), (ex - hx, ey - hy),
                      (ex + hx, ey + hy), (sx + hx, sy + hy)))
        sx = ex
        sy = ey
    return rects


cdef class ArmScene:
    """A planar arm and a fixed set of convex obstacles, queried by configuration."""

    cdef double[::1] _lengths
    cdef double _half_width
    cdef double _base_x
    cdef double _base_y
    cdef double[:, ::1] _xy
    cdef Py_ssize_t[::1] _offsets
    cdef Py_ssize_t _n_obs
    cdef Py_ssize_t _dof

    def __init__(self, lengths, double half_width, base, obstacles):
        self._lengths = np.ascontiguousarray(lengths, dtype=np.float64).copy()
        self._dof = self._lengths.shape[0]
        self._half_width = half_width
        self._base_x = float(base[0])
        self._base_y = float(base[1])
        obstacles = [np.ascontiguousarray(o, dtype=np.float64).reshape(-1, 2)
                     for o in obstacles]
        self._n_obs = len(obstacles)
        offsets = np.zeros(self._n_obs + 1, dtype=np.intp)
        for i, o in enumerate(obstacles):
            offsets[i + 1] = offsets[i] + o.shape[0]
        self._offsets = offsets
        if obstacles:
            self._xy = np.ascontiguousarray(np.concatenate(obstacles, axis=0))
        else:
            self._xy = np.zeros((1, 2))

    cdef bint _collides(self, const double* q) noexcept nogil:
        cdef double rect[8]
        cdef double phi = 0.0, c, s, ex, ey, hx, hy
        cdef double sx = self._base_x
        cdef double sy = self._base_y
        cdef Py_ssize_t k, o, lo
        if self._n_obs == 0:
            return False
        for k in range(self._dof):
            phi += q[k]
            c = cos(phi)
            s = sin(phi)
            ex = sx + self._lengths[k] * c
            ey = sy + self._lengths[k] * s
            hx = -s * self._half_width
            hy = c * self._half_width
            rect[0] = sx - hx
            rect[1] = sy - hy
            rect[2] = ex - hx
            rect[3] = ey - hy
            rect[4] = ex + hx
            rect[5] = ey + hy
            rect[6] = sx + hx
            rect[7] = sy + hy
            for o in range(self._n_obs):
                lo = self._offsets[o]
                if _gjk(rect, 4, &self._xy[lo, 0], self._offsets[o + 1] - lo):
                    return True
            sx = ex
            sy = ey
        return False

    def collides(self, const double[::1] q):
        if q.shape[0] != self._dof:
            raise ValueError(f"expected {self._dof} joint angles, got {q.shape[0]}")
        return bool(self._collides(&q[0]))

    def label_many(self, configs):
        cdef const double[:, ::1] qs = np.ascontiguousarray(configs, dtype=np.float64)
        cdef Py_ssize_t i, m = qs.shape[0]
        out = np.empty(m, dtype=np.int8)
        cdef signed char[::1] ov = out
        if m and qs.shape[1] != self._dof:
            raise ValueError(f"expected {self._dof} joint angles, got {qs.shape[1]}")
        with nogil:
            for i in range(m):
                ov[i] = 1 if self._collides(&qs[i, 0]) else -1
        return out


cdef class KernelSum:
    """Gaussian kernel expansion ``sum_i alpha_i exp(-gamma |x_i - q|^2)``."""

    cdef double[:, ::1] _points
    cdef double[::1] _alpha
    cdef double _gamma
    cdef Py_ssize_t _n
    cdef Py_ssize_t _dof

    def __init__(self, points, alpha, double gamma):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        self._alpha = np.ascontiguousarray(alpha, dtype=np.float64).copy()
        self._n = self._alpha.shape[0]
        if self._n == 0:
            pts = np.zeros((1, max(pts.shape[1] if pts.ndim == 2 else 1, 1)))
        self._points = pts.copy()
        self._dof = self._points.shape[1]
        self._gamma = gamma

    @property
    def points(self):
        return np.asarray(self._points)[:self._n]

    @property
    def alpha(self):
        return np.asarray(self._alpha)

    @property
    def gamma(self):
        return self._gamma

    cdef double _value(self, const double* q) noexcept nogil:
        cdef Py_ssize_t i, k
        cdef double acc = 0.0, d2, t
        for i in range(self._n):
            d2 = 0.0
            for k in range(self._dof):
                t = self._points[i, k] - q[k]
                d2 = d2 + t * t
            acc = acc + self._alpha[i] * exp(-self._gamma * d2)
        return acc

    def value(self, const double[::1] q):
        return self._value(&q[0])

    def values(self, configs):
        cdef const double[:, ::1] qs = np.ascontiguousarray(configs, dtype=np.float64)
        cdef Py_ssize_t i, m = qs.shape[0]
        out = np.zeros(m)
        cdef double[::1] ov = out
        with nogil:
            for i in range(m):
                ov[i] = self._value(&qs[i, 0])
        return out


cdef Py_ssize_t _remove_redundant(double[::1] alpha, double[::1] F,
                                  const double[:, ::1] G,
                                  const signed char[::1] y) noexcept nogil:
    cdef Py_ssize_t n = alpha.shape[0], i, j, removed = 0
    cdef double m, best, aj
    while True:
        j = -1
        best = 0.0
        for i in range(n):
            if alpha[i] != 0.0:
                m = y[i] * (F[i] - alpha[i])
                if j < 0 or m > best:
                    best = m
                    j = i
        if j < 0 or not best > 0.0:
            return removed
        aj = alpha[j]
        for i in range(n):
            F[i] = F[i] - G[j, i] * aj
        alpha[j] = 0.0
        removed += 1


def remove_redundant(double[::1] alpha, double[::1] F, const double[:, ::1] G,
                     const signed char[::1] y):
    """Zero redundant weights in place, largest leave-one-out margin first."""
    return int(_remove_redundant(alpha, F, G, y))


def perceptron_update(double[::1] alpha, double[::1] F, const double[:, ::1] G,
                      const signed char[::1] y, double r_plus, long max_updates):
    """Run the model-update loop in place; returns ``(converged, iterations, removed)``."""
    cdef Py_ssize_t n = alpha.shape[0], i, j
    cdef long it, iterations = 0
    cdef Py_ssize_t removed = 0
    cdef double m, best, r, delta
    cdef bint converged = False
    with nogil:
        for it in range(max_updates):
            removed += _remove_redundant(alpha, F, G, y)
            j = 0
            best = y[0] * F[0]
            for i in range(1, n):
                m = y[i] * F[i]
                if m < best:
                    best = m
                    j = i
            if best > 0.0:
                converged = True
                break
            r = r_plus if y[j] > 0 else 1.0
            delta = r * y[j] - F[j]
            alpha[j] += delta
            for i in range(n):
                F[i] += G[j, i] * delta
            iterations += 1
        if not converged:
            converged = True
            for i in range(n):
                if not y[i] * F[i] > 0.0:
                    converged = False
                    break
    return bool(converged), int(iterations), int(removed)
