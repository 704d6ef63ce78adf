"""Nonlocal energies on compact manifolds and their local limits."""
from ._kernels import BACKEND
from .config import ConfigError, config_to_dict, parse_audit_config, parse_config
from .convergence import (
    ConvergenceReport,
    ExperimentConfig,
    FunctionalSpec,
    LimitEstimate,
    Verdict,
    compare_reference,
    extrapolate_limit,
    run_sweep,
)
from .estimators import (
    DiagonalPolicy,
    FunctionalValue,
    fractional_seminorm_pth,
    mu_sigma_p,
    pairing_value,
    s_perimeter,
    weak_star_pairing,
)
from .fields import (
    FieldSpec,
    RegionSpec,
    ScalarField,
    gradient_p_energy,
    reference_variation,
    sample_scalar_field,
)
from .manifold import ManifoldSampling, ManifoldSpec, build_manifold, geodesic_distance, total_volume
from .mesh import MeshError
from .mollifiers import (
    Mollifier,
    MollifierFamily,
    audit_family,
    ball_volume,
    k_constant,
    make_family,
    make_s_kernel,
    sphere_area,
)

__version__ = "0.1.0"
