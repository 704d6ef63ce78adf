"""Pure numpy implementation of the pairwise kernel sums.

Mirrors the compiled core row by row. Rounding differs slightly from the
compiled path (pairwise instead of compensated summation) but the result for
a given input is independent of ``nthreads``.
"""
import numpy as np

METRIC_TORUS = 0
METRIC_SPHERE = 1
METRIC_MATRIX = 2

_CHUNK_ELEMS = 1 << 21


def distance_rows(metric, coords, lengths, radius, rows, n):
    rows = np.asarray(rows, dtype=np.int64)
    if metric == METRIC_TORUS:
        diff = np.abs(coords[rows, None, :] - coords[None, :n, :])
        diff = diff - lengths * np.floor(diff / lengths)
        diff = np.minimum(diff, lengths - diff)
        return np.sqrt(np.sum(diff * diff, axis=-1))
    if metric == METRIC_SPHERE:
        a = coords[rows]
        b = coords[:n]
        cross = np.cross(a[:, None, :], b[None, :, :])
        dot = a @ b.T
        return radius * np.arctan2(np.linalg.norm(cross, axis=-1), dot)
    raise ValueError(f"unknown analytic metric code {metric}")


def pair_row_sums(metric, coords, lengths, radius, dmat, values, weights, rows,
                  p, coef, expo, support, cutoff, upper=False, nthreads=1):
    del nthreads  # numpy path is single threaded
    rows = np.asarray(rows, dtype=np.int64)
    n = values.shape[0]
    m = rows.shape[0]
    sums = np.zeros(m, dtype=np.float64)
    excluded = np.zeros(m, dtype=np.int64)
    chunk = max(1, _CHUNK_ELEMS // max(n, 1))
    idx = np.arange(n)
    for start in range(0, m, chunk):
        r = rows[start:start + chunk]
        if metric == METRIC_MATRIX:
            d = dmat[r]
        else:
            d = distance_rows(metric, coords, lengths, radius, r, n)
        valid = idx[None, :] != r[:, None]
        if upper:
            valid &= idx[None, :] > r[:, None]
        near = valid & (d < cutoff)
        excluded[start:start + chunk] = near.sum(axis=1)
        df = np.abs(values[r][:, None] - values[None, :])
        keep = valid & ~near & (d < support) & (df != 0.0)
        dk = np.where(keep, d, 1.0)
        if p == 1.0:
            g = df
        elif p == 2.0:
            g = df * df
        else:
            g = df ** p
        terms = np.where(keep, weights[None, :] * g * coef * dk ** (-expo), 0.0)
        sums[start:start + chunk] = terms.sum(axis=1)
    return sums, excluded
