"""Scalar fields on samplings and their local reference quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .manifold import ManifoldSampling, ManifoldSpec, build_manifold

FIELD_KINDS = ("TorusTrig", "SphereCoord", "Constant", "Indicator")
REGION_KINDS = ("Arc", "Box", "Cap")
REFINED_POINTS = 1 << 20  # quadrature size for analytic gradient energies


@dataclass(frozen=True)
class RegionSpec:
    """Arc: ``start`` angle and arc ``length``; Box: ``lower``/``upper`` corners;
    Cap: ``center`` (ambient vector) and geodesic ``radius``."""

    kind: str
    start: float = 0.0
    length: float | None = None
    lower: tuple | None = None
    upper: tuple | None = None
    center: tuple | None = None
    radius: float | None = None

    def __post_init__(self):
        if self.kind not in REGION_KINDS:
            raise ValueError(f"region kind must be one of {REGION_KINDS}, got {self.kind!r}")
        if self.kind == "Arc" and self.length is None:
            raise ValueError("Arc needs a length")
        if self.kind == "Box":
            if self.lower is None or self.upper is None or len(self.lower) != len(self.upper):
                raise ValueError("Box needs lower and upper corners of equal dimension")
            object.__setattr__(self, "lower", tuple(float(x) for x in self.lower))
            object.__setattr__(self, "upper", tuple(float(x) for x in self.upper))
        if self.kind == "Cap":
            if self.center is None or self.radius is None:
                raise ValueError("Cap needs a center and a radius")
            c = np.asarray(self.center, dtype=float)
            if c.shape != (3,) or not np.linalg.norm(c) > 0:
                raise ValueError("Cap center must be a nonzero 3-vector")
            object.__setattr__(self, "center", tuple(c / np.linalg.norm(c)))

    def check(self, manifold: ManifoldSpec):
        if self.kind == "Arc":
            if manifold.kind != "Circle":
                raise ValueError("Arc regions live on a Circle")
            if not 0 < self.length < 2 * math.pi * manifold.radius:
                raise ValueError("arc length must lie in (0, 2 pi r)")
        elif self.kind == "Box":
            if manifold.kind != "FlatTorus":
                raise ValueError("Box regions live on a FlatTorus")
            if len(self.lower) != manifold.dimension:
                raise ValueError("Box dimension does not match the torus")
            for lo, hi, L in zip(self.lower, self.upper, manifold.lengths):
                if not 0 < hi - lo < L:
                    raise ValueError("box side lengths must lie in (0, torus side)")
        else:
            if manifold.kind != "Sphere2":
                raise ValueError("Cap regions live on a Sphere2")
            if not 0 < self.radius < math.pi * manifold.radius:
                raise ValueError("cap radius must lie in (0, pi r)")

    def contains(self, sampling: ManifoldSampling) -> np.ndarray:
        """Boolean membership of each sample point."""
        spec = sampling.spec
        self.check(spec)
        if self.kind == "Arc":
            rel = np.mod(sampling.points - self.start, 2 * math.pi)
            return rel < self.length / spec.radius
        if self.kind == "Box":
            inside = np.ones(sampling.size, dtype=bool)
            for d, (lo, hi, L) in enumerate(zip(self.lower, self.upper, spec.lengths)):
                rel = np.mod(sampling.points[:, d] - lo, L)
                inside &= rel < hi - lo
            return inside
        u = sampling.coords
        c = np.asarray(self.center)
        ang = np.arctan2(np.linalg.norm(np.cross(u, c), axis=1), u @ c)
        return spec.radius * ang < self.radius


@dataclass(frozen=True)
class FieldSpec:
    """Field description.

    TorusTrig: ``terms`` is a list of ``(coef, "sin"|"cos", freq)`` with integer
    frequencies; the argument is ``2 pi sum_d freq_d x_d / L_d``.
    SphereCoord: ``coefficients`` a, the field is the restriction of ``a . x``.
    Constant: ``value``. Indicator: ``region``.
    """

    kind: str
    terms: tuple = ()
    coefficients: tuple | None = None
    value: float = 0.0
    region: RegionSpec | None = None

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"field kind must be one of {FIELD_KINDS}, got {self.kind!r}")
        if self.kind == "TorusTrig":
            terms = []
            for coef, fn, freq in self.terms:
                if fn not in ("sin", "cos"):
                    raise ValueError(f"trig term must be sin or cos, got {fn!r}")
                freq = tuple(freq) if np.ndim(freq) else (freq,)
                if any(float(k) != int(k) for k in freq):
                    raise ValueError("TorusTrig frequencies must be integers")
                terms.append((float(coef), fn, tuple(int(k) for k in freq)))
            if not terms:
                raise ValueError("TorusTrig needs at least one term")
            object.__setattr__(self, "terms", tuple(terms))
        if self.kind == "SphereCoord":
            if self.coefficients is None or len(self.coefficients) != 3:
                raise ValueError("SphereCoord needs three coefficients")
            object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        if self.kind == "Indicator" and self.region is None:
            raise ValueError("Indicator needs a region")


@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    analytic_grad_norm: np.ndarray | None
    source: FieldSpec
    mask: np.ndarray | None = field(default=None, repr=False)  # indicator membership
    scale: float = 1.0  # values = scale * (field described by source)

    def __post_init__(self):
        if self.analytic_grad_norm is not None and len(self.analytic_grad_norm) != len(self.values):
            raise ValueError("gradient samples do not match the values")

    @property
    def is_indicator(self) -> bool:
        return self.source.kind == "Indicator"

    def scaled(self, c: float) -> "ScalarField":
        g = None if self.analytic_grad_norm is None else abs(c) * self.analytic_grad_norm
        return ScalarField(c * self.values, g, self.source, None, c * self.scale)


def sample_scalar_field(sampling: ManifoldSampling, spec: FieldSpec) -> ScalarField:
    mkind = sampling.spec.kind
    n = sampling.size
    if spec.kind == "Constant":
        return ScalarField(np.full(n, float(spec.value)), np.zeros(n), spec)

    if spec.kind == "TorusTrig":
        if mkind == "FlatTorus":
            x = sampling.points
            lengths = np.asarray(sampling.spec.lengths)
        elif mkind == "Circle":
            x = (sampling.spec.radius * sampling.points)[:, None]
            lengths = np.array([2 * math.pi * sampling.spec.radius])
        else:
            raise ValueError(f"TorusTrig fields need a FlatTorus or Circle, got {mkind}")
        vals = np.zeros(n)
        grad = np.zeros((n, x.shape[1]))
        for coef, fn, freq in spec.terms:
            if len(freq) != x.shape[1]:
                raise ValueError(f"frequency vector {freq} does not match dimension {x.shape[1]}")
            k = 2 * math.pi * np.asarray(freq, dtype=float) / lengths
            arg = x @ k
            if fn == "sin":
                vals += coef * np.sin(arg)
                grad += coef * np.cos(arg)[:, None] * k
            else:
                vals += coef * np.cos(arg)
                grad -= coef * np.sin(arg)[:, None] * k
        return ScalarField(vals, np.linalg.norm(grad, axis=1), spec)

    if spec.kind == "SphereCoord":
        if mkind not in ("Sphere2", "TriMesh"):
            raise ValueError(f"SphereCoord fields need a Sphere2 or TriMesh, got {mkind}")
        a = np.asarray(spec.coefficients)
        vals = sampling.embedding @ a
        nu = sampling.normals
        tangential = a[None, :] - (nu @ a)[:, None] * nu
        return ScalarField(vals, np.linalg.norm(tangential, axis=1), spec)

    mask = spec.region.contains(sampling)
    return ScalarField(mask.astype(float), None, spec, mask)


def _refined(spec: ManifoldSpec) -> ManifoldSpec | None:
    if spec.kind == "TriMesh":
        return None
    if spec.kind == "FlatTorus":
        per_axis = int(math.ceil(REFINED_POINTS ** (1.0 / spec.dimension)))
        res = max(spec.resolution, spec.resolution * math.ceil(per_axis / spec.resolution))
    else:
        res = max(spec.resolution, REFINED_POINTS)
    if res == spec.resolution:
        return None
    return ManifoldSpec(spec.kind, spec.dimension, spec.lengths, spec.radius, None, res)


def gradient_p_energy(sampling: ManifoldSampling, field: ScalarField, p: float,
                      weight=None, *, refine: bool = True) -> float:
    """Integral of |grad f|^p, optionally against a test function ``weight``.

    On analytic manifolds the closed-form gradient is integrated on a refined
    copy of the sampling (about 2^20 points), since |grad f|^p is usually only
    Lipschitz. ``weight`` may be a ScalarField (resampled there too) or an
    array on ``sampling``, which forces the plain quadrature; so does
    ``refine=False`` and any mesh.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if field.analytic_grad_norm is None:
        raise ValueError("field has no analytic gradient; use reference_variation for indicators")
    fine = _refined(sampling.spec) if refine and not isinstance(weight, np.ndarray) else None
    if fine is not None:
        fs = build_manifold(fine)
        g = sample_scalar_field(fs, field.source).analytic_grad_norm ** p * abs(field.scale) ** p
        if weight is not None:
            g = g * (weight.scale * sample_scalar_field(fs, weight.source).values)
        return math.fsum(fs.weights * g)
    g = field.analytic_grad_norm ** p
    if weight is not None:
        g = g * (weight.values if isinstance(weight, ScalarField) else np.asarray(weight, dtype=float))
    return math.fsum(sampling.weights * g)


def reference_variation(spec, manifold: ManifoldSpec) -> float:
    """Exact boundary measure of a region (or of an indicator's region)."""
    if isinstance(spec, FieldSpec):
        if spec.kind == "Constant":
            return 0.0
        if spec.kind != "Indicator":
            raise ValueError("reference_variation covers indicators and constants; "
                             "use gradient_p_energy with p = 1 for smooth fields")
        spec = spec.region
    spec.check(manifold)
    if spec.kind == "Arc":
        return 2.0
    if spec.kind == "Box":
        sides = [hi - lo for lo, hi in zip(spec.lower, spec.upper)]
        if len(sides) == 1:
            return 2.0
        return math.fsum(2.0 * math.prod(sides[:d] + sides[d + 1:]) for d in range(len(sides)))
    r = manifold.radius
    return 2.0 * math.pi * r * math.sin(spec.radius / r)
