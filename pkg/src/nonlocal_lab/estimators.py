"""Nonlocal double-integral functionals on a sampling.

All functionals share one pair loop: for each outer point i the admitted
partners j (``j != i`` and ``cutoff <= d_ij < support``) contribute
``w_j |f_i - f_j|^p coef d_ij^-expo``. Rows are summed independently and
reduced with ``math.fsum`` so results do not depend on the worker count.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import default_threads, get_backend
from .fields import RegionSpec, ScalarField, reference_variation
from .manifold import ManifoldSampling
from .mollifiers import Mollifier, ball_volume, k_constant, sphere_area

CORRECTIONS = ("None", "NearField")


@dataclass(frozen=True)
class DiagonalPolicy:
    """Pairs closer than ``cutoff_factor * h`` are dropped; ``NearField`` adds
    back their analytic first-order contribution."""

    cutoff_factor: float = 1.5
    correction: str = "NearField"

    def __post_init__(self):
        if not self.cutoff_factor >= 1.0:
            raise ValueError(f"cutoff_factor must be >= 1, got {self.cutoff_factor}")
        if self.correction not in CORRECTIONS:
            raise ValueError(f"correction must be one of {CORRECTIONS}, got {self.correction!r}")

    def cutoff(self, sampling: ManifoldSampling) -> float:
        return self.cutoff_factor * sampling.h


NO_CORRECTION = DiagonalPolicy(correction="None")


@dataclass(frozen=True)
class FunctionalValue:
    value: float
    excluded_pair_fraction: float
    correction_added: float

    def as_dict(self):
        return {"value": self.value, "excluded_pair_fraction": self.excluded_pair_fraction,
                "correction_added": self.correction_added}


# ---------------------------------------------------------------------------
# pair loop
# ---------------------------------------------------------------------------


def _rows_from_subset(sampling, subset) -> np.ndarray:
    if subset is None:
        return np.arange(sampling.size, dtype=np.int64)
    subset = np.asarray(subset)
    if subset.dtype == bool:
        if subset.shape != (sampling.size,):
            raise ValueError("subset mask does not match the sampling")
        return np.flatnonzero(subset).astype(np.int64)
    return np.unique(subset.astype(np.int64))


def pair_row_sums(sampling: ManifoldSampling, values, rows, p, coef, expo, support, cutoff,
                  *, upper=False, threads=None, backend=None):
    """Unweighted row sums and excluded-pair counts for power kernels."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    if values.shape != (sampling.size,):
        raise ValueError("field values do not match the sampling")
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    threads = default_threads() if threads is None else max(1, int(threads))
    core = get_backend(backend)
    return core.pair_row_sums(*sampling.kernel_args(), values,
                              np.ascontiguousarray(sampling.weights, dtype=np.float64), rows,
                              float(p), float(coef), float(expo), float(support), float(cutoff),
                              bool(upper), threads)


def _profile_row_sums(sampling, values, rows, p, kernel: Mollifier, cutoff):
    """Numpy path for kernels given by an arbitrary radial profile."""
    n = sampling.size
    sums = np.zeros(len(rows))
    excluded = np.zeros(len(rows), dtype=np.int64)
    chunk = max(1, (1 << 20) // n)
    idx = np.arange(n)
    for a in range(0, len(rows), chunk):
        r = rows[a:a + chunk]
        d = sampling.distances_from(r)
        off = idx[None, :] != r[:, None]
        near = off & (d < cutoff)
        excluded[a:a + chunk] = near.sum(axis=1)
        keep = off & ~near & (d < kernel.support_bound)
        dk = np.where(keep, d, 1.0)
        df = np.abs(values[r][:, None] - values[None, :]) ** p
        terms = np.where(keep, sampling.weights[None, :] * df * kernel(dk) / dk ** p, 0.0)
        sums[a:a + chunk] = terms.sum(axis=1)
    return sums, excluded


def kernel_double_sum(sampling, values, p, coef, expo, support=math.inf, cutoff=None,
                      *, upper=False, threads=None, backend=None) -> float:
    """sum_{i != j admitted} w_i w_j |f_i - f_j|^p coef d^-expo, optionally as
    twice the upper triangle."""
    if cutoff is None:
        cutoff = DiagonalPolicy().cutoff(sampling)
    rows = np.arange(sampling.size, dtype=np.int64)
    sums, _ = pair_row_sums(sampling, values, rows, p, coef, expo, support, cutoff,
                            upper=upper, threads=threads, backend=backend)
    total = math.fsum(sampling.weights * sums)
    return 2.0 * total if upper else total


def _check_finite(x, what):
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite term in {what}; a kernel was evaluated at distance 0")


def _point_contributions(sampling, field: ScalarField, kernel: Mollifier, p, rows, policy,
                         threads, backend):
    """Per-row contributions w_i * inner sum, the near-field terms and the excluded count."""
    if kernel.n != sampling.dim:
        raise ValueError(f"kernel dimension {kernel.n} does not match manifold dimension {sampling.dim}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    cutoff = policy.cutoff(sampling)
    if kernel.power is not None:
        sums, excl = pair_row_sums(sampling, field.values, rows, p, kernel.coef, kernel.power + p,
                                   kernel.support_bound, cutoff, threads=threads, backend=backend)
    else:
        sums, excl = _profile_row_sums(sampling, field.values, rows, p, kernel, cutoff)
    contrib = sampling.weights[rows] * sums
    corr = np.zeros(len(rows))
    if policy.correction == "NearField":
        if field.analytic_grad_norm is None:
            raise ValueError("NearField correction needs a field with an analytic gradient")
        n = sampling.dim
        near_mass = kernel.mass(0.0, cutoff)
        corr = (field.analytic_grad_norm[rows] ** p * k_constant(p, n) * sphere_area(n)
                * near_mass * sampling.weights[rows])
    _check_finite(contrib, "mu_sigma_p")
    return contrib, corr, int(excl.sum())


def _fraction(excluded, rows, sampling):
    total = len(rows) * (sampling.size - 1)
    return excluded / total if total else 0.0


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------


def mu_sigma_p(sampling: ManifoldSampling, field: ScalarField, kernel: Mollifier, p: float,
               subset=None, policy: DiagonalPolicy = DiagonalPolicy(), *, threads=None,
               backend=None) -> FunctionalValue:
    """The localized energy of ``subset`` (boolean mask or indices; None is the whole manifold)."""
    rows = _rows_from_subset(sampling, subset)
    contrib, corr, excl = _point_contributions(sampling, field, kernel, p, rows, policy,
                                               threads, backend)
    c = math.fsum(corr)
    return FunctionalValue(math.fsum(np.concatenate([contrib, corr])), _fraction(excl, rows, sampling), c)


def pairing_value(sampling: ManifoldSampling, field: ScalarField, kernel: Mollifier, p: float,
                  test_field=None, policy: DiagonalPolicy = DiagonalPolicy(), *, threads=None,
                  backend=None) -> FunctionalValue:
    """Integral of a test function against the localized energy measure.

    ``test_field=None`` pairs with the constant 1, i.e. the total energy.
    """
    rows = np.arange(sampling.size, dtype=np.int64)
    contrib, corr, excl = _point_contributions(sampling, field, kernel, p, rows, policy,
                                               threads, backend)
    if test_field is not None:
        phi = test_field.values if isinstance(test_field, ScalarField) else np.asarray(test_field, float)
        if phi.shape != (sampling.size,):
            raise ValueError("test function is not sampled on the same sampling")
        contrib = phi * contrib
        corr = phi * corr
    return FunctionalValue(math.fsum(np.concatenate([contrib, corr])),
                           _fraction(excl, rows, sampling), math.fsum(corr))


def weak_star_pairing(sampling: ManifoldSampling, field: ScalarField, kernel: Mollifier, p: float,
                      test_field, policy: DiagonalPolicy = DiagonalPolicy(), *, threads=None,
                      backend=None) -> float:
    return pairing_value(sampling, field, kernel, p, test_field, policy,
                         threads=threads, backend=backend).value


def _boundary_layer(sampling, region_or_field, s, p, cutoff):
    """Pairs straddling a locally flat boundary within ``cutoff``:
    |B^{n-1}| P(E) cutoff^{1-sp} / (1 - sp)."""
    a = 1.0 - s * p
    if a <= 0:
        raise ValueError("boundary-layer correction needs s * p < 1")
    per = reference_variation(region_or_field, sampling.spec)
    return ball_volume(sampling.dim - 1) * per * cutoff ** a / a


def fractional_seminorm_pth(sampling: ManifoldSampling, field: ScalarField, s: float, p: float,
                            policy: DiagonalPolicy = DiagonalPolicy(), *, support: float = math.inf,
                            upper: bool = True, threads=None, backend=None) -> FunctionalValue:
    """Double sum of |f_i - f_j|^p / d^{n + s p}, i.e. the p-th power of the seminorm.

    ``support`` truncates the pair distance. ``upper`` evaluates twice the
    upper triangle, which halves the work; ``upper=False`` sums the full square.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    n = sampling.dim
    cutoff = policy.cutoff(sampling)
    rows = np.arange(sampling.size, dtype=np.int64)
    sums, excl = pair_row_sums(sampling, field.values, rows, p, 1.0, n + s * p, support, cutoff,
                               upper=upper, threads=threads, backend=backend)
    contrib = sampling.weights * sums
    _check_finite(contrib, "fractional_seminorm_pth")
    corr_total = 0.0
    corr = np.zeros(0)
    if policy.correction == "NearField":
        sigma_p = (1.0 - s) * p
        reach = min(cutoff, support)
        if field.is_indicator:
            if 0 < np.count_nonzero(field.values) < sampling.size:
                corr_total = 2.0 * _boundary_layer(sampling, field.source, s, p, reach)
                corr = np.array([corr_total])
        elif field.analytic_grad_norm is None:
            raise ValueError("NearField correction needs an analytic gradient or an indicator field")
        else:
            corr = (field.analytic_grad_norm ** p * k_constant(p, n) * sphere_area(n)
                    * reach ** sigma_p / sigma_p * sampling.weights)
            corr_total = math.fsum(corr)
    body = math.fsum(contrib)
    if upper:
        body *= 2.0
    value = math.fsum([body, *corr]) if len(corr) else body
    excluded = int(excl.sum()) * (2 if upper else 1)
    return FunctionalValue(value, _fraction(excluded, rows, sampling), corr_total)


def s_perimeter(sampling: ManifoldSampling, region: RegionSpec, s: float,
                policy: DiagonalPolicy = DiagonalPolicy(), *, threads=None,
                backend=None) -> FunctionalValue:
    """sum over i in E, j outside E of w_i w_j d^{-(n+s)}.

    With ``NearField`` the straddling pairs below the cutoff are restored by the
    flat-boundary layer term built from the region's exact perimeter.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    mask = region.contains(sampling)
    rows = np.flatnonzero(mask).astype(np.int64)
    cutoff = policy.cutoff(sampling)
    sums, excl = pair_row_sums(sampling, mask.astype(float), rows, 1.0, 1.0, sampling.dim + s,
                               math.inf, cutoff, threads=threads, backend=backend)
    contrib = sampling.weights[rows] * sums
    _check_finite(contrib, "s_perimeter")
    body = math.fsum(contrib)
    corr = 0.0
    if policy.correction == "NearField" and 0 < len(rows) < sampling.size:
        corr = _boundary_layer(sampling, region, s, 1.0, cutoff)
    value = math.fsum([body, corr])
    return FunctionalValue(value, _fraction(int(excl.sum()), rows, sampling), corr)
