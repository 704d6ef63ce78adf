import math

import pytest

from nonlocal_lab import (
    DiagonalPolicy,
    ExperimentConfig,
    FieldSpec,
    FunctionalSpec,
    LimitEstimate,
    ManifoldSpec,
    RegionSpec,
    compare_reference,
    extrapolate_limit,
    run_sweep,
)

SIN1 = FieldSpec("TorusTrig", terms=((1.0, "sin", (1,)),))
T1 = ManifoldSpec("FlatTorus", dimension=1, resolution=1024)


def test_extrapolate_affine_is_exact():
    est = extrapolate_limit([(g, 7 + 3 * g) for g in (0.2, 0.1, 0.05)])
    assert abs(est.value - 7) <= 1e-12
    assert est.uncertainty <= 1e-12


def test_extrapolate_constant():
    est = extrapolate_limit([(g, 5.0) for g in (0.4, 0.2, 0.1, 0.05)])
    assert est.value == pytest.approx(5.0, abs=1e-14)
    assert est.uncertainty == pytest.approx(0.0, abs=1e-14)


def test_extrapolate_quadratic_model_error():
    # hand least squares of g^2 on {0.05, 0.1, 0.2}: intercept -1/80
    est = extrapolate_limit([(g, 7 + 3 * g + g * g) for g in (0.2, 0.1, 0.05)])
    assert est.value == pytest.approx(7 - 0.0125, abs=1e-12)
    assert est.uncertainty > 0


@pytest.mark.xfail(strict=True, reason="linear fit leaves a model error of 0.0125 on these gaps")
def test_extrapolate_quadratic_within_hundredth():
    est = extrapolate_limit([(g, 7 + 3 * g + g * g) for g in (0.2, 0.1, 0.05)])
    assert abs(est.value - 7) <= 0.01


def test_extrapolate_uses_three_smallest_gaps():
    pts = [(0.8, 100.0), (0.2, 7.6), (0.1, 7.3), (0.05, 7.15)]
    assert extrapolate_limit(pts).value == pytest.approx(7.0, abs=1e-12)


def test_extrapolate_degenerate_fallback():
    est = extrapolate_limit([(0.1, 3.0), (0.1, 3.5), (0.1, 4.0)])
    assert "degenerate" in est.model
    assert est.uncertainty >= 0
    with pytest.raises(ValueError):
        extrapolate_limit([(0.1, 1.0), (0.05, 1.0)])
    with pytest.raises(ValueError):
        extrapolate_limit([(0.1, 1.0), (0.0, 1.0), (0.2, 1.0)])


def test_compare_reference_examples():
    assert compare_reference(LimitEstimate(7.05, 0.1, ""), 7.0, 0.02).passed
    assert not compare_reference(LimitEstimate(7.05, 0.1, ""), 7.0, 0.005).passed
    assert compare_reference(LimitEstimate(math.pi ** 3 * 1.01, 0, ""), math.pi ** 3, 0.03).passed
    assert compare_reference(LimitEstimate(0.0, 0, ""), 0.0, 1e-9).passed
    v = compare_reference(LimitEstimate(7.05, 0.1, ""), 7.0, 0.02)
    assert v.rel_error == pytest.approx(0.05 / 7)
    with pytest.raises(ValueError):
        compare_reference(LimitEstimate(1.0, 0, ""), math.inf, 0.1)


def test_constant_field_sweep():
    cfg = ExperimentConfig(T1, FieldSpec("Constant", value=1.0), FunctionalSpec("SeminormSweep", p=1.0))
    rep = run_sweep(cfg)
    assert all(v.value == 0.0 for v in rep.values)
    assert rep.limit.value == 0.0 and rep.reference == 0.0
    assert rep.verdict.passed and rep.passed


def test_report_shapes_and_determinism():
    cfg = ExperimentConfig(T1, SIN1, FunctionalSpec("SeminormSweep", p=2.0), grid=(0.6, 0.7, 0.8))
    a, b = run_sweep(cfg), run_sweep(cfg, threads=3)
    assert len(a.values) == len(a.scaled) == len(a.gaps) == len(a.grid) == 3
    assert a.gaps == pytest.approx([0.4, 0.3, 0.2])
    assert a.values == b.values and a.scaled == b.scaled and a.limit == b.limit
    for g, v, sc in zip(a.gaps, a.values, a.scaled):
        assert sc == g * v.value


def test_smooth_seminorm_scaled_values_monotone():
    cfg = ExperimentConfig(T1, SIN1, FunctionalSpec("SeminormSweep", p=1.0))
    rep = run_sweep(cfg)
    sc = rep.scaled
    # increase toward the limit as the gap shrinks, within a 5% band
    assert all(b >= a * 0.95 for a, b in zip(sc, sc[1:]))


def test_mu_sweep_bump_limit():
    cfg = ExperimentConfig(T1, SIN1, FunctionalSpec("MuSweep", p=1.0, family="BumpFamily",
                                                    family_params={"profile": "indicator"}), tolerance=0.02)
    rep = run_sweep(cfg)
    assert rep.reference == pytest.approx(4.0, rel=1e-9)
    assert rep.verdict.passed
    assert rep.grid == [0.2, 0.1, 0.05, 0.025]
    assert rep.under_resolved == []


def test_under_resolved_flag():
    coarse = ManifoldSpec("FlatTorus", dimension=1, resolution=64)
    cfg = ExperimentConfig(coarse, SIN1, FunctionalSpec("MuSweep", p=1.0, family="BumpFamily"))
    rep = run_sweep(cfg)
    # h = 1/64; support sigma < 3h for sigma = 0.025
    assert rep.under_resolved == [3]


def test_indicator_p2_has_no_reference():
    circ = ManifoldSpec("Circle", resolution=256)
    ind = FieldSpec("Indicator", region=RegionSpec("Arc", start=0.0, length=math.pi))
    cfg = ExperimentConfig(circ, ind, FunctionalSpec("SeminormSweep", p=2.0), grid=(0.1, 0.2, 0.3),
                           policy=DiagonalPolicy(correction="None"))
    rep = run_sweep(cfg)
    assert rep.reference is None and rep.verdict is None


@pytest.mark.parametrize("kw,msg", [
    (dict(grid=(0.8, 0.9)), "at least 3"),
    (dict(grid=(0.8, 0.9, 1.0)), "s < 1"),
    (dict(grid=(0.9, 0.8, 0.7)), "increasing"),
    (dict(grid=(0.8, 0.9, 0.9)), "increasing"),
    (dict(tolerance=0.0), "tolerance"),
    (dict(test_field=SIN1), "test_field"),
])
def test_config_invariants(kw, msg):
    with pytest.raises(ValueError, match=msg):
        ExperimentConfig(T1, SIN1, FunctionalSpec("SeminormSweep", p=1.0), **kw)


def test_sigma_grid_must_decrease():
    with pytest.raises(ValueError, match="decreasing"):
        ExperimentConfig(T1, SIN1, FunctionalSpec("MuSweep", family="BumpFamily"), grid=(0.1, 0.2, 0.3))


def test_functional_spec_validation():
    with pytest.raises(ValueError, match="p >= 1"):
        FunctionalSpec("SeminormSweep", p=0.5)
    with pytest.raises(ValueError):
        FunctionalSpec("MuSweep")
    with pytest.raises(ValueError):
        FunctionalSpec("SPerimeterSweep")


def test_incompatible_components_named():
    cfg = ExperimentConfig(ManifoldSpec("Sphere2", resolution=100), SIN1, FunctionalSpec("SeminormSweep"))
    with pytest.raises(ValueError, match="TorusTrig"):
        run_sweep(cfg)
    circ = ManifoldSpec("Circle", resolution=64)
    ind = FieldSpec("Indicator", region=RegionSpec("Arc", length=1.0))
    cfg = ExperimentConfig(circ, ind, FunctionalSpec("MuSweep", family="SPowerFamily"))
    with pytest.raises(ValueError, match="grid point 0"):
        run_sweep(cfg)


def test_cap_perimeter_sweep_reaches_boundary_length_limit():
    cfg = ExperimentConfig(ManifoldSpec("Sphere2", resolution=2000), FieldSpec("Constant"),
                           FunctionalSpec("SPerimeterSweep",
                                          region=RegionSpec("Cap", center=(0, 0, 1), radius=math.pi / 3)),
                           tolerance=0.1)
    rep = run_sweep(cfg)
    # |B^1| * boundary length 2 pi sin(pi/3)
    assert rep.reference == pytest.approx(2 * math.pi * math.sqrt(3), rel=1e-14)
    assert rep.verdict.passed
