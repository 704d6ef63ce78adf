"""Radial mollifier families, their axiom audit, and dimensional constants."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------


def sphere_area(n: int) -> float:
    """(n-1)-dimensional measure of the unit sphere in R^n (2 for n = 1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(k: int) -> float:
    """Lebesgue measure of the k-dimensional unit ball; |B^0| = 1."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return math.pi ** (k / 2.0) / math.gamma(k / 2.0 + 1.0)


def k_constant_closed_form(p: float, n: int) -> float:
    """Gamma-function expression for the sphere moment constant.

    Only a cross-check; :func:`k_constant` is computed by quadrature.
    """
    return math.exp(
        special.gammaln((p + 1) / 2) + special.gammaln(n / 2)
        - 0.5 * math.log(math.pi) - special.gammaln((n + p) / 2)
    )


def k_constant(p: float, n: int) -> float:
    """Average of |e.u|^p over the unit sphere of R^n.

    Reduced to the polar angle: for n >= 2 the sphere integral equals
    |S^{n-2}| * int_0^pi |cos t|^p sin^{n-2} t dt.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return 1.0
    # symmetric about pi/2; integrate one half with the cos-singularity split off
    half, _ = integrate.quad(
        lambda t: math.cos(t) ** p * math.sin(t) ** (n - 2),
        0.0, math.pi / 2, epsabs=0.0, epsrel=1e-13, limit=200,
    )
    return sphere_area(n - 1) * 2.0 * half / sphere_area(n)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Mollifier:
    """A single radial kernel rho on (0, inf) for ambient dimension n.

    When ``power`` is set the kernel is ``coef * r**(-power)`` on ``(0, support)``
    and zero beyond, which lets the compiled core evaluate it directly.
    Otherwise ``profile`` (a vectorized callable) defines it.
    ``mass_exponent`` is the exponent a with rho(r) r^{n-1} ~ r^{a-1} near 0.
    """

    kind: str
    n: int
    support: float
    coef: float = 1.0
    power: float | None = None
    profile: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    mass_exponent: float | None = None
    params: dict = field(default_factory=dict, compare=False)
    closed: bool = False  # support includes r == support

    @property
    def support_bound(self) -> float:
        """Strict upper bound on admitted radii (``d < support_bound``)."""
        return math.nextafter(self.support, math.inf) if self.closed else self.support

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r > 0) & (r < self.support_bound)
        if self.power is not None:
            with np.errstate(divide="ignore"):
                vals = self.coef * np.where(inside, r, 1.0) ** (-self.power)
        else:
            vals = self.coef * self.profile(np.where(inside, r, 0.0))
        out = np.where(inside, vals, 0.0)
        return out if out.ndim else float(out)

    @property
    def radial_exponent(self) -> float:
        """a such that rho(r) r^{n-1} behaves like r^{a-1} at the origin."""
        if self.mass_exponent is not None:
            return self.mass_exponent
        if self.power is not None:
            return self.n - self.power
        return float(self.n)

    def mass(self, a: float = 0.0, b: float = math.inf) -> float:
        """int_a^b rho(r) r^{n-1} dr, in closed form when available."""
        b = min(b, self.support)
        if b <= a:
            return 0.0
        if self.power is not None:
            e = self.radial_exponent
            if e <= 0:
                raise ValueError("kernel mass diverges at the origin")
            return self.coef * (b ** e - a ** e) / e
        return self.quad_mass(a, b)

    def quad_mass(self, a: float = 0.0, b: float = math.inf) -> float:
        """Adaptive-quadrature mass, independent of the closed form."""
        b = min(b, self.support)
        if b <= a:
            return 0.0
        alpha = self.radial_exponent
        if a == 0.0:
            # substitute u = r^alpha so the origin singularity disappears:
            # int_0^b g(r) r^(alpha-1) dr = (1/alpha) int_0^(b^alpha) g(u^(1/alpha)) du
            def regular(u):
                if self.power is not None:
                    return self.coef
                r = u ** (1.0 / alpha)
                return float(self(max(r, 1e-300))) * r ** (self.n - alpha)

            pts = [self.support ** alpha] if self.closed and self.support <= b else None
            val, _ = integrate.quad(regular, 0.0, b ** alpha, epsabs=0.0, epsrel=1e-12,
                                    limit=200, points=pts)
            return val / alpha
        val, _ = integrate.quad(lambda r: float(self(r)) * r ** (self.n - 1), a, b,
                                epsabs=0.0, epsrel=1e-12, limit=200)
        return val

    def scaled(self, factor: float) -> "Mollifier":
        """Same shape, multiplied by ``factor`` (used to build defective kernels)."""
        prof = self.profile
        return Mollifier(self.kind + "*", self.n, self.support, self.coef * factor, self.power,
                         prof, self.mass_exponent, dict(self.params, scale=factor), self.closed)


def make_s_kernel(n: int, p: float, s: float) -> Mollifier:
    """Kernel (sigma p / |S^{n-1}|) r^{-(n - sigma p)} on (0, 1) with sigma = 1 - s."""
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sigma = 1.0 - s
    return Mollifier("SPower", n, 1.0, coef=sigma * p / sphere_area(n), power=n - sigma * p,
                     mass_exponent=sigma * p, params={"p": p, "s": s, "sigma": sigma})


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------

BUMP_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "indicator": lambda t: np.where((t > 0) & (t <= 1), 1.0, 0.0),
    "linear": lambda t: np.clip(1.0 - t, 0.0, None) * (t > 0),
    "quadratic": lambda t: np.clip(1.0 - t * t, 0.0, None) * (t > 0),
    "cosine": lambda t: np.where((t > 0) & (t <= 1), 0.5 * (1.0 + np.cos(np.pi * np.clip(t, 0, 1))), 0.0),
}


@dataclass(frozen=True)
class MollifierFamily:
    """sigma -> Mollifier for sigma in (0, 1)."""

    kind: str
    n: int
    params: dict

    def __call__(self, sigma: float) -> Mollifier:
        if not 0.0 < sigma < 1.0:
            raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
        n = self.n
        H = sphere_area(n)
        if self.kind == "SPowerFamily":
            return make_s_kernel(n, self.params["p"], 1.0 - sigma)
        if self.kind == "TruncPowerFamily":
            gamma = self.params.get("rate", 1.0) * sigma ** self.params.get("power", 1.0)
            return Mollifier("TruncPower", n, 1.0, coef=gamma / H, power=n - gamma,
                             mass_exponent=gamma, params={"sigma": sigma, "exponent": gamma})
        if self.kind == "BumpFamily":
            name = self.params.get("profile", "indicator")
            phi = BUMP_PROFILES[name]
            norm = self.params["_profile_mass"]  # int_0^1 phi(t) t^{n-1} dt
            c = 1.0 / (H * norm)
            if name == "indicator":
                # constant on (0, sigma]; expressed as a power kernel with exponent 0
                return Mollifier("Bump", n, sigma, coef=c / sigma ** n, power=0.0,
                                 params={"sigma": sigma, "profile": name}, closed=True)
            return Mollifier("Bump", n, sigma, coef=c / sigma ** n,
                             profile=lambda r, _s=sigma: phi(r / _s),
                             params={"sigma": sigma, "profile": name})
        raise ValueError(f"unknown family kind {self.kind!r}")

    def support_radius(self, sigma: float) -> float:
        return sigma if self.kind == "BumpFamily" else 1.0


def make_family(kind: str, n: int, **params) -> MollifierFamily:
    """Build a mollifier family.

    kinds: ``SPowerFamily`` (p), ``TruncPowerFamily`` (rate, power: the exponent
    profile sigma -> rate * sigma**power), ``BumpFamily`` (profile name or a
    callable nonincreasing profile on (0, 1]).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if kind == "SPowerFamily":
        p = float(params.get("p", 1.0))
        if p < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        return MollifierFamily(kind, n, {"p": p})
    if kind == "TruncPowerFamily":
        rate = float(params.get("rate", 1.0))
        power = float(params.get("power", 1.0))
        if rate <= 0 or power <= 0:
            raise ValueError("TruncPowerFamily needs rate > 0 and power > 0")
        return MollifierFamily(kind, n, {"rate": rate, "power": power})
    if kind == "BumpFamily":
        profile = params.get("profile", "indicator")
        if callable(profile):
            BUMP_PROFILES.setdefault(getattr(profile, "__name__", "custom"), profile)
            profile = getattr(profile, "__name__", "custom")
        if profile not in BUMP_PROFILES:
            raise ValueError(f"unknown bump profile {profile!r}")
        phi = BUMP_PROFILES[profile]
        t = np.linspace(1e-9, 1.0, 4001)
        vals = phi(t)
        if np.any(np.diff(vals) > 1e-12) or np.any(vals < 0):
            raise ValueError(f"bump profile {profile!r} is not nonnegative and nonincreasing")
        mass, _ = integrate.quad(lambda u: float(phi(np.array(u))) * u ** (n - 1), 0.0, 1.0,
                                 epsabs=0.0, epsrel=1e-13, limit=200, points=[1.0])
        if mass <= 0:
            raise ValueError(f"bump profile {profile!r} has zero mass")
        return MollifierFamily(kind, n, {"profile": profile, "_profile_mass": mass})
    raise ValueError(f"unknown family kind {kind!r}")


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------

DEFAULT_SIGMA_GRID = (0.5, 0.1, 1e-2, 1e-4, 1e-6, 1e-8)
DEFAULT_DELTA_GRID = (0.05, 0.1, 0.25, 0.5)


@dataclass
class AxiomResult:
    name: str
    passed: bool
    measured: dict


@dataclass
class AxiomReport:
    family: str
    sigma_grid: list
    delta_grid: list
    axioms: list

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.axioms)

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "sigma_grid": list(self.sigma_grid),
            "delta_grid": list(self.delta_grid),
            "passed": self.passed,
            "axioms": [{"name": a.name, "passed": a.passed, "measured": a.measured} for a in self.axioms],
        }


def audit_family(family, sigma_grid: Sequence[float] = DEFAULT_SIGMA_GRID,
                 delta_grid: Sequence[float] = DEFAULT_DELTA_GRID,
                 n: int | None = None,
                 mass_tol: float = 1e-8, tail_tol: float = 1e-3,
                 sup_ratio: float = 1e-6) -> AxiomReport:
    """Check monotonicity, fixed mass, vanishing tails and local uniform decay.

    ``family`` is a :class:`MollifierFamily` or any callable sigma -> Mollifier
    (``n`` must then be given). Failures are reported, never raised.
    Compact sets are taken as [delta, 1/delta] for each delta; for nonincreasing
    kernels the supremum there is rho(delta).
    """
    sigma_grid = [float(s) for s in sigma_grid]
    delta_grid = [float(d) for d in delta_grid]
    if not sigma_grid or not delta_grid:
        raise ValueError("audit grids must be nonempty")
    if n is None:
        n = family.n
    H = sphere_area(n)
    kernels = [family(s) for s in sigma_grid]
    name = getattr(family, "kind", getattr(family, "__name__", "custom"))

    # monotone nonincrease on a log grid
    r = np.logspace(-9, 1.5, 2000)
    worst = 0.0
    for k in kernels:
        v = np.asarray(k(r))
        rise = np.max(np.diff(v) / np.maximum(np.abs(v[:-1]), 1e-300), initial=0.0)
        worst = max(worst, rise)
    mono = AxiomResult("monotone", bool(worst <= 1e-12), {"max_relative_increase": float(worst)})

    masses = [k.quad_mass(0.0, math.inf) * H for k in kernels]
    dev = max(abs(m - 1.0) for m in masses)
    mass = AxiomResult("fixed_mass", bool(dev <= mass_tol),
                       {"mass_times_sphere_area": masses, "expected": 1.0, "max_deviation": dev})

    tails = {}
    tail_ok = True
    for d in delta_grid:
        t = [k.quad_mass(d, math.inf) * H for k in kernels]
        tails[str(d)] = t
        nonincreasing = all(b <= a * (1 + 1e-9) + 1e-15 for a, b in zip(t, t[1:]))
        tail_ok &= nonincreasing and t[-1] < tail_tol
    tail = AxiomResult("tail_vanishes", bool(tail_ok), {"tail_mass_times_sphere_area": tails,
                                                        "threshold": tail_tol})

    sups = {}
    sup_ok = True
    for d in delta_grid:
        # sup over [d, 1/d]; sampled in case the kernel is not monotone.
        # Compactly supported bumps grow before vanishing, so compare against the grid maximum.
        rr = np.geomspace(d, 1.0 / d, 200) if d < 1 else np.array([d])
        s = [float(np.max(k(rr))) for k in kernels]
        sups[str(d)] = s
        sup_ok &= s[-1] <= sup_ratio * max(s)
    sup = AxiomResult("local_uniform_decay", bool(sup_ok), {"sup_on_compacts": sups,
                                                             "ratio_threshold": sup_ratio})
    return AxiomReport(name, sigma_grid, delta_grid, [mono, mass, tail, sup])
