"""Parameter sweeps toward the local limit, extrapolation and reference comparison."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import (
    DiagonalPolicy,
    FunctionalValue,
    fractional_seminorm_pth,
    pairing_value,
    s_perimeter,
)
from .fields import FieldSpec, RegionSpec, gradient_p_energy, reference_variation, sample_scalar_field
from .manifold import ManifoldSpec, build_manifold
from .mollifiers import ball_volume, k_constant, make_family, sphere_area

FUNCTIONAL_KINDS = ("MuSweep", "SeminormSweep", "SPerimeterSweep")
DEFAULT_S_GRID = (0.80, 0.90, 0.95, 0.99)
DEFAULT_SIGMA_GRID = (0.2, 0.1, 0.05, 0.025)
UNDER_RESOLVED_FACTOR = 3.0


@dataclass(frozen=True)
class FunctionalSpec:
    kind: str
    p: float = 1.0
    family: str | None = None
    family_params: dict = field(default_factory=dict)
    region: RegionSpec | None = None

    def __post_init__(self):
        if self.kind not in FUNCTIONAL_KINDS:
            raise ValueError(f"functional kind must be one of {FUNCTIONAL_KINDS}, got {self.kind!r}")
        if not self.p >= 1:
            raise ValueError(f"p must satisfy p >= 1, got {self.p}")
        if self.kind == "MuSweep" and self.family is None:
            raise ValueError("MuSweep needs a mollifier family")
        if self.kind == "SPerimeterSweep":
            if self.region is None:
                raise ValueError("SPerimeterSweep needs a region")
            if self.p != 1:
                raise ValueError("SPerimeterSweep is defined for p = 1 only")

    @property
    def uses_s_grid(self) -> bool:
        return self.kind != "MuSweep"


@dataclass(frozen=True)
class ExperimentConfig:
    manifold: ManifoldSpec
    field: FieldSpec
    functional: FunctionalSpec
    grid: tuple = ()
    policy: DiagonalPolicy = DiagonalPolicy()
    test_field: FieldSpec | None = None
    seed: int = 0
    tolerance: float = 0.05

    def __post_init__(self):
        grid = tuple(float(g) for g in (self.grid or (DEFAULT_S_GRID if self.functional.uses_s_grid
                                                       else DEFAULT_SIGMA_GRID)))
        object.__setattr__(self, "grid", grid)
        if len(grid) < 3:
            raise ValueError("grid needs at least 3 entries")
        if any(not 0.0 < g < 1.0 for g in grid):
            bound = "s < 1" if self.functional.uses_s_grid else "sigma < 1"
            raise ValueError(f"grid entries must lie in (0, 1): {bound} and > 0")
        steps = np.diff(grid)
        if self.functional.uses_s_grid and not np.all(steps > 0):
            raise ValueError("s grid must be strictly increasing")
        if not self.functional.uses_s_grid and not np.all(steps < 0):
            raise ValueError("sigma grid must be strictly decreasing")
        if self.test_field is not None and self.functional.kind != "MuSweep":
            raise ValueError("test_field pairs only with MuSweep")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")

    def gaps(self) -> list:
        return [1.0 - g for g in self.grid] if self.functional.uses_s_grid else list(self.grid)


@dataclass(frozen=True)
class LimitEstimate:
    value: float
    uncertainty: float
    model: str


@dataclass(frozen=True)
class Verdict:
    passed: bool
    rel_error: float
    tolerance: float


@dataclass
class ConvergenceReport:
    config: ExperimentConfig
    grid: list
    gaps: list
    values: list  # FunctionalValue per grid point
    scaled: list
    limit: LimitEstimate
    reference: float | None
    reference_note: str
    verdict: Verdict | None
    under_resolved: list
    backend: str

    @property
    def passed(self) -> bool:
        return self.verdict is None or self.verdict.passed


def extrapolate_limit(points) -> LimitEstimate:
    """Fit value = L + a * gap over the three smallest gaps.

    Uncertainty is the standard error of L (zero for an exact fit). A
    rank-deficient fit falls back to the smallest-gap value.
    """
    pts = sorted((float(g), float(v)) for g, v in points)
    if len(pts) < 3:
        raise ValueError("extrapolation needs at least 3 points")
    if any(g <= 0 for g, _ in pts):
        raise ValueError("gaps must be positive")
    g = np.array([p[0] for p in pts[:3]])
    v = np.array([p[1] for p in pts[:3]])
    if np.ptp(g) <= 1e-14 * max(g.max(), 1e-300) or len(set(g.tolist())) < 2:
        unc = abs(pts[0][1] - pts[1][1])
        return LimitEstimate(pts[0][1], unc, "smallest-gap value (degenerate fit)")
    A = np.column_stack([np.ones(3), g])
    coef, *_ = np.linalg.lstsq(A, v, rcond=None)
    resid = v - A @ coef
    ssr = float(resid @ resid)
    cov00 = float(np.linalg.inv(A.T @ A)[0, 0])
    unc = math.sqrt(ssr * cov00)  # one residual degree of freedom
    return LimitEstimate(float(coef[0]), unc, "least squares value = L + a*gap, three smallest gaps")


def compare_reference(estimate: LimitEstimate, reference: float, tol_rel: float) -> Verdict:
    if not math.isfinite(reference):
        raise ValueError("reference must be finite")
    err = abs(estimate.value - reference)
    scale = max(abs(reference), 1e-12)
    return Verdict(bool(err <= tol_rel * scale), err / scale, tol_rel)


def _reference(config: ExperimentConfig, sampling, fld, phi):
    fs = config.functional
    n = sampling.dim
    p = fs.p
    if fs.kind == "SPerimeterSweep":
        per = reference_variation(fs.region, config.manifold)
        return ball_volume(n - 1) * per, "|B^{n-1}| P(E), exact boundary measure"
    if fld.is_indicator:
        if p != 1:
            return None, "indicator is not in W^{1,p} for p > 1; values diverge"
        var = reference_variation(config.field, config.manifold)
        note = "exact perimeter of the region"
    else:
        var = gradient_p_energy(sampling, fld, p, weight=phi)
        note = "quadrature of the analytic |grad f|^p" + (" against the test function" if phi else "")
    if fs.kind == "MuSweep":
        if fld.is_indicator and phi is not None:
            return None, "no pairing reference for indicator fields"
        return k_constant(p, n) * var, "K_{p,n} x " + note
    if p == 1:
        return 2.0 * ball_volume(n - 1) * var, "2 |B^{n-1}| x " + note
    return sphere_area(n) * k_constant(p, n) / p * var, "|S^{n-1}| K_{p,n} / p x " + note


def _evaluate(config, sampling, fld, phi, g, threads, backend) -> FunctionalValue:
    fs = config.functional
    if fs.kind == "SeminormSweep":
        return fractional_seminorm_pth(sampling, fld, g, fs.p, config.policy,
                                       threads=threads, backend=backend)
    if fs.kind == "SPerimeterSweep":
        return s_perimeter(sampling, fs.region, g, config.policy, threads=threads, backend=backend)
    kernel = make_family(fs.family, sampling.dim, **fs.family_params)(g)
    return pairing_value(sampling, fld, kernel, fs.p, phi, config.policy,
                         threads=threads, backend=backend)


def run_sweep(config: ExperimentConfig, *, threads=None, backend=None) -> ConvergenceReport:
    from ._kernels import BACKEND

    sampling = build_manifold(config.manifold)
    fld = sample_scalar_field(sampling, config.field)
    phi = sample_scalar_field(sampling, config.test_field) if config.test_field else None
    fs = config.functional
    if fs.kind == "SPerimeterSweep":
        fs.region.check(config.manifold)

    values, under = [], []
    for k, g in enumerate(config.grid):
        try:
            fv = _evaluate(config, sampling, fld, phi, g, threads, backend)
        except ValueError as exc:
            name = "s" if fs.uses_s_grid else "sigma"
            raise ValueError(f"grid point {k} ({name} = {g}): {exc}") from exc
        if not math.isfinite(fv.value):
            raise ValueError(f"grid point {k} ({g}) produced a non-finite value")
        values.append(fv)
        if fs.kind == "MuSweep":
            radius = make_family(fs.family, sampling.dim, **fs.family_params).support_radius(g)
            if radius < UNDER_RESOLVED_FACTOR * sampling.h:
                under.append(k)

    gaps = config.gaps()
    scaled = [(gap * v.value if fs.uses_s_grid else v.value) for gap, v in zip(gaps, values)]
    limit = extrapolate_limit(list(zip(gaps, scaled)))
    reference, note = _reference(config, sampling, fld, phi)
    verdict = None if reference is None else compare_reference(limit, reference, config.tolerance)
    return ConvergenceReport(config, list(config.grid), gaps, values, scaled, limit, reference, note,
                             verdict, under, backend or BACKEND)
