"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and by ``python3 tests/test_acceptance.py``.
"""
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from nonlocal_lab import (
    DiagonalPolicy,
    ExperimentConfig,
    FieldSpec,
    FunctionalSpec,
    ManifoldSpec,
    RegionSpec,
    audit_family,
    ball_volume,
    build_manifold,
    extrapolate_limit,
    fractional_seminorm_pth,
    k_constant,
    make_family,
    mu_sigma_p,
    run_sweep,
    s_perimeter,
    sample_scalar_field,
    sphere_area,
)
from nonlocal_lab.mesh import icosphere, write_off

RESULTS = {}
SIN1 = FieldSpec("TorusTrig", terms=((1.0, "sin", (1,)),))
S_GRID = (0.80, 0.90, 0.95, 0.99)


def record(name, passed, detail):
    RESULTS[name] = (bool(passed), detail)
    assert passed, f"{name}: {detail}"


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_seminorm_p1_torus1():
    cfg = ExperimentConfig(ManifoldSpec("FlatTorus", dimension=1, resolution=4096), SIN1,
                           FunctionalSpec("SeminormSweep", p=1.0), grid=S_GRID)
    t = time.perf_counter()
    rep = run_sweep(cfg, threads=1)
    sec = time.perf_counter() - t
    err = _rel(rep.limit.value, 8.0)
    record("1", err <= 0.02 and sec < 30,
           f"limit {rep.limit.value:.6f} vs 8, rel err {err:.2e} (tol 2e-2), {sec:.1f}s single-threaded (< 30s)")


def test_criterion_2_seminorm_p2_torus2():
    cfg = ExperimentConfig(ManifoldSpec("FlatTorus", dimension=2, resolution=128),
                           FieldSpec("TorusTrig", terms=((1.0, "sin", (1, 0)),)),
                           FunctionalSpec("SeminormSweep", p=2.0), grid=S_GRID)
    t = time.perf_counter()
    rep = run_sweep(cfg)
    sec = time.perf_counter() - t
    err = _rel(rep.limit.value, math.pi ** 3)
    record("2", err <= 0.03 and sec < 120,
           f"limit {rep.limit.value:.5f} vs pi^3 = {math.pi ** 3:.5f}, rel err {err:.2e} (tol 3e-2), {sec:.1f}s (< 120s)")


def test_criterion_3_bump_mu_sweep():
    cfg = ExperimentConfig(ManifoldSpec("FlatTorus", dimension=1, resolution=4096), SIN1,
                           FunctionalSpec("MuSweep", p=1.0, family="BumpFamily",
                                          family_params={"profile": "indicator"}),
                           grid=(0.2, 0.1, 0.05, 0.025))
    rep = run_sweep(cfg)
    err = _rel(rep.limit.value, 4.0)
    record("3", err <= 0.02, f"limit {rep.limit.value:.6f} vs K_11 |Df| = 4, rel err {err:.2e} (tol 2e-2)")


def test_criterion_4a_arc_perimeter():
    cfg = ExperimentConfig(ManifoldSpec("Circle", radius=1.0, resolution=4096), FieldSpec("Constant"),
                           FunctionalSpec("SPerimeterSweep", region=RegionSpec("Arc", start=0.0, length=math.pi)),
                           grid=S_GRID)
    rep = run_sweep(cfg)
    err = _rel(rep.limit.value, 2.0)
    record("4a", err <= 0.05, f"arc: limit {rep.limit.value:.6f} vs 2, rel err {err:.2e} (tol 5e-2)")


def test_criterion_4b_cap_perimeter():
    cfg = ExperimentConfig(ManifoldSpec("Sphere2", radius=1.0, resolution=2000), FieldSpec("Constant"),
                           FunctionalSpec("SPerimeterSweep",
                                          region=RegionSpec("Cap", center=(0.0, 0.0, 1.0), radius=math.pi / 3)),
                           grid=S_GRID)
    rep = run_sweep(cfg)
    target = math.pi * math.sqrt(3)  # stated target
    err = _rel(rep.limit.value, target)
    record("4b", err <= 0.10,
           f"cap: limit {rep.limit.value:.5f} vs stated pi*sqrt(3) = {target:.5f}, rel err {err:.2e} (tol 1e-1); "
           f"|B^1| P(cap) = 2 pi sqrt(3) = {rep.reference:.5f}, rel err {_rel(rep.limit.value, rep.reference):.2e}")


def test_criterion_5_weak_star_pairing():
    phi = FieldSpec("TorusTrig", terms=((0.5, "cos", (0,)), (0.5, "cos", (2,))))  # cos^2(2 pi x)
    cfg = ExperimentConfig(ManifoldSpec("FlatTorus", dimension=1, resolution=4096), SIN1,
                           FunctionalSpec("MuSweep", p=1.0, family="SPowerFamily", family_params={"p": 1.0}),
                           test_field=phi)
    rep = run_sweep(cfg)
    err = _rel(rep.limit.value, 8 / 3)
    record("5", err <= 0.05, f"pairing limit {rep.limit.value:.6f} vs 8/3, rel err {err:.2e} (tol 5e-2)")


def test_criterion_6_constant_identities():
    e1 = max(abs(k_constant(2.0, n) - 1.0 / n) for n in range(1, 6))
    e2 = max(abs(sphere_area(n) * k_constant(1.0, n) - 2 * ball_volume(n - 1)) for n in range(1, 6))
    e3 = max(abs(sphere_area(n) - n * ball_volume(n)) for n in range(1, 6))
    record("6", e1 <= 1e-10 and e2 <= 1e-10 and e3 <= 1e-12,
           f"max |K_2n - 1/n| = {e1:.1e}, max |H K_1n - 2|B^(n-1)|| = {e2:.1e}, max |H - n|B^n|| = {e3:.1e}")


def test_criterion_7_axiom_audit():
    fams = [("SPowerFamily", n, {"p": p}) for n, p in ((1, 1.0), (2, 1.0), (2, 2.0), (3, 2.0))]
    fams += [("BumpFamily", n, {"profile": pr}) for n in (1, 2, 3)
             for pr in ("indicator", "linear", "quadratic", "cosine")]
    failed = [f"{k}(n={n},{p})" for k, n, p in fams if not audit_family(make_family(k, n, **p)).passed]
    base = make_family("SPowerFamily", 1, p=1.0)
    bad = audit_family(lambda s: base(s).scaled(2.0), n=1)
    mass = next(a for a in bad.axioms if a.name == "fixed_mass")
    measured = mass.measured["mass_times_sphere_area"]
    ok = not failed and not mass.passed and np.allclose(measured, 2.0, rtol=1e-10)
    record("7", ok, f"{len(fams) - len(failed)}/{len(fams)} families pass; unnormalized kernel fixed_mass "
                    f"{'FAIL' if not mass.passed else 'pass'} with measured mass*H = {measured[0]:.12g}")


def test_criterion_8_property_suite():
    checks = {}
    s1 = build_manifold(ManifoldSpec("FlatTorus", dimension=1, resolution=512))
    f = sample_scalar_field(s1, SIN1)
    k = make_family("SPowerFamily", 1, p=1.0)(0.1)
    rng = np.random.default_rng(7)
    lab = rng.integers(0, 3, s1.size)
    e1, e2 = lab == 0, lab == 1
    m1, m2, m12 = (mu_sigma_p(s1, f, k, 1.0, e).value for e in (e1, e2, e1 | e2))
    mall = mu_sigma_p(s1, f, k, 1.0).value
    checks["additivity"] = abs(m1 + m2 - m12) <= 1e-12 * m12
    checks["monotonicity"] = m1 <= m12 <= mall and m2 <= m12
    checks["homogeneity"] = all(
        math.isclose(fractional_seminorm_pth(s1, f.scaled(c), 0.7, p).value,
                     abs(c) ** p * fractional_seminorm_pth(s1, f, 0.7, p).value, rel_tol=1e-12)
        for c in (-3.0, 0.5, 2.0) for p in (1.0, 2.0, 1.5))
    circ = build_manifold(ManifoldSpec("Circle", resolution=1024))
    arc = RegionSpec("Arc", start=0.0, length=math.pi)
    ind = sample_scalar_field(circ, FieldSpec("Indicator", region=arc))
    checks["indicator identity"] = all(
        abs(fractional_seminorm_pth(circ, ind, s, 1.0).value - 2 * s_perimeter(circ, arc, s).value)
        <= 1e-12 * fractional_seminorm_pth(circ, ind, s, 1.0).value for s in (0.5, 0.9, 0.99))
    ref = fractional_seminorm_pth(s1, f, 0.9, 1.0, threads=1)
    checks["thread determinism"] = all(fractional_seminorm_pth(s1, f, 0.9, 1.0, threads=t) == ref
                                       for t in (2, 4, 8))
    est = extrapolate_limit([(g, 7 + 3 * g) for g in (0.2, 0.1, 0.05)])
    checks["extrapolation exact"] = abs(est.value - 7) <= 1e-12 and est.uncertainty <= 1e-12
    circle = ManifoldSpec("Circle")  # default resolution
    ind_rep = run_sweep(ExperimentConfig(circle, FieldSpec("Indicator", region=arc),
                                         FunctionalSpec("SeminormSweep", p=1.0), grid=S_GRID))
    growth = ind_rep.values[-1].value / ind_rep.values[0].value
    sm_rep = run_sweep(ExperimentConfig(ManifoldSpec("FlatTorus", dimension=1), SIN1,
                                        FunctionalSpec("SeminormSweep", p=1.0), grid=S_GRID))
    drift = abs(sm_rep.scaled[-1] - sm_rep.scaled[0]) / abs(sm_rep.scaled[-1])
    checks["divergence contrast"] = growth >= 2 and drift <= 0.20
    failed = [k for k, v in checks.items() if not v]
    record("8", not failed, f"{len(checks) - len(failed)}/{len(checks)} properties hold"
                            f"{' (failed: ' + ', '.join(failed) + ')' if failed else ''}; "
                            f"indicator growth {growth:.2f} (>= 2), smooth scaled drift {drift:.3f} (<= 0.20)")


def test_criterion_9_icosphere_trend():
    ref = 4 * math.pi ** 2  # 2 |B^1| * integral of sin(theta) over the unit sphere
    limits, bounded = {}, True
    with tempfile.TemporaryDirectory() as tmp:
        for level in (3, 4):
            v, fc = icosphere(level)
            path = Path(tmp) / f"ico{level}.off"
            write_off(path, v, fc)
            rep = run_sweep(ExperimentConfig(ManifoldSpec("TriMesh", mesh_path=str(path)),
                                             FieldSpec("SphereCoord", coefficients=(0.0, 0.0, 1.0)),
                                             FunctionalSpec("SeminormSweep", p=1.0), grid=S_GRID))
            limits[level] = rep.limit.value
            bounded &= all(math.isfinite(x) and 0.5 * ref <= x <= 2 * ref for x in rep.scaled)
    e3, e4 = abs(limits[3] - ref), abs(limits[4] - ref)
    record("9", bounded and e4 <= 0.75 * e3,
           f"error vs 4 pi^2: level 3 {e3 / ref:.2e}, level 4 {e4 / ref:.2e} "
           f"({100 * (1 - e4 / e3):.0f}% closer, need >= 25%), scaled values bounded: {bounded}")


def summary_lines():
    return [f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail}" for name, (ok, detail) in RESULTS.items()]


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                pass
    print("\n".join(summary_lines()))
