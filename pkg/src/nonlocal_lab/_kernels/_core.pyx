# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled pairwise kernel sums.

Each row is accumulated by a single thread with compensated summation, so
the per-row results do not depend on the number of OpenMP threads.
"""
import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport atan2, exp, fabs, floor, log, pow, sqrt

cnp.import_array()

cdef enum:
    METRIC_TORUS = 0
    METRIC_SPHERE = 1
    METRIC_MATRIX = 2


cdef inline double _torus_dist2(const double[:, ::1] x, const double[::1] lengths,
                                Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    # squared distance; coordinates are expected in [0, L) so |dx| < L
    cdef Py_ssize_t k
    cdef double acc = 0.0, t, L
    for k in range(x.shape[1]):
        L = lengths[k]
        t = fabs(x[i, k] - x[j, k])
        if t >= L:
            t = t - L * floor(t / L)
        if t > L - t:
            t = L - t
        acc += t * t
    return acc


cdef inline double _sphere_dist(const double[:, ::1] x, double radius,
                                Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double ax = x[i, 0], ay = x[i, 1], az = x[i, 2]
    cdef double bx = x[j, 0], by = x[j, 1], bz = x[j, 2]
    cdef double cx = ay * bz - az * by
    cdef double cy = az * bx - ax * bz
    cdef double cz = ax * by - ay * bx
    return radius * atan2(sqrt(cx * cx + cy * cy + cz * cz), ax * bx + ay * by + az * bz)


cdef inline double _dist(int metric, const double[:, ::1] x, const double[::1] lengths,
                         double radius, const double[:, ::1] dmat,
                         Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    if metric == METRIC_TORUS:
        return sqrt(_torus_dist2(x, lengths, i, j))
    elif metric == METRIC_SPHERE:
        return _sphere_dist(x, radius, i, j)
    return dmat[i, j]


cdef void _row(int metric, const double[:, ::1] x, const double[::1] lengths,
               double radius, const double[:, ::1] dmat,
               const double[::1] f, const double[::1] w,
               Py_ssize_t i, double p, double coef, double expo,
               double support, double cutoff, bint upper,
               double* out_sum, long long* out_excluded) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t j, j0 = 0
    cdef double s = 0.0, comp = 0.0, y, t, d, df, term
    cdef long long excluded = 0
    cdef double cut2 = cutoff * cutoff
    cdef double sup2 = support * support
    cdef double half_expo = -0.5 * expo
    if upper:
        j0 = i + 1
    for j in range(j0, n):
        if j == i:
            continue
        if metric == METRIC_TORUS:
            # work with squared distances to skip the sqrt
            d = _torus_dist2(x, lengths, i, j)
            if d < cut2:
                excluded += 1
                continue
            if d >= sup2:
                continue
        else:
            d = _dist(metric, x, lengths, radius, dmat, i, j)
            if d < cutoff:
                excluded += 1
                continue
            if d >= support:
                continue
            d = d * d
        df = fabs(f[i] - f[j])
        if df == 0.0:
            continue
        if p == 1.0:
            term = df
        elif p == 2.0:
            term = df * df
        else:
            term = pow(df, p)
        term = w[j] * term * coef * exp(half_expo * log(d))
        # Kahan step
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
    out_sum[0] = s
    out_excluded[0] = excluded


def pair_row_sums(int metric,
                  const double[:, ::1] coords,
                  const double[::1] lengths,
                  double radius,
                  const double[:, ::1] dmat,
                  const double[::1] values,
                  const double[::1] weights,
                  const long long[::1] rows,
                  double p, double coef, double expo,
                  double support, double cutoff,
                  bint upper=False, int nthreads=1):
    """Return ``(sums, excluded)`` for the requested rows.

    ``sums[k] = sum_j w_j |f_i - f_j|^p coef d_ij^-expo`` over admitted
    ``j != i`` with ``cutoff <= d_ij < support`` and ``i = rows[k]``.
    """
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t k
    sums = np.zeros(m, dtype=np.float64)
    excluded = np.zeros(m, dtype=np.int64)
    cdef double[::1] sv = sums
    cdef long long[::1] ev = excluded
    if nthreads < 1:
        nthreads = 1
    for k in prange(m, nogil=True, schedule="dynamic", chunksize=16,
                    num_threads=nthreads):
        _row(metric, coords, lengths, radius, dmat, values, weights,
             rows[k], p, coef, expo, support, cutoff, upper,
             &sv[k], &ev[k])
    return sums, excluded


def distance_rows(int metric,
                  const double[:, ::1] coords,
                  const double[::1] lengths,
                  double radius,
                  const long long[::1] rows,
                  Py_ssize_t n):
    """Dense block of analytic geodesic distances for ``rows`` x ``range(n)``."""
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t a, j
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef double[:, ::1] empty = np.zeros((1, 1))
    with nogil:
        for a in range(m):
            for j in range(n):
                ov[a, j] = _dist(metric, coords, lengths, radius, empty, rows[a], j)
    return out
