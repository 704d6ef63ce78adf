import math

import pytest

from nonlocal_lab import FieldSpec, ManifoldSpec, RegionSpec, build_manifold, sample_scalar_field

SIN1 = FieldSpec("TorusTrig", terms=((1.0, "sin", (1,)),))


@pytest.fixture(scope="session")
def torus1_512():
    return build_manifold(ManifoldSpec("FlatTorus", dimension=1, resolution=512))


@pytest.fixture(scope="session")
def sin_field_512(torus1_512):
    return sample_scalar_field(torus1_512, SIN1)


@pytest.fixture(scope="session")
def circle_1024():
    return build_manifold(ManifoldSpec("Circle", radius=1.0, resolution=1024))


@pytest.fixture(scope="session")
def half_arc():
    return RegionSpec("Arc", start=0.0, length=math.pi)


@pytest.fixture(scope="session")
def sphere_400():
    return build_manifold(ManifoldSpec("Sphere2", resolution=400))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
