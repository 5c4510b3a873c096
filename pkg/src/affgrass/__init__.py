"""Random walks of the affine group on affine Grassmannians."""

__version__ = "0.1.0"

from .drift import DriftReport, drift_verify
from .estimators import DriftVerifier, LimitLawEstimator, LyapunovEstimator, RecurrenceClassifier
from .exceptions import (
    BadDegree,
    BlockStructureViolated,
    DegenerateSubspace,
    ParseError,
    RankDeficient,
    RecipeFailure,
    SingularInput,
    ValidationError,
)
from .grassmannian import (
    AffineSubspace,
    PluckerPoint,
    act,
    dist_origin,
    plucker_embed,
    proj_distance,
    u_delta,
)
from .group import AffineMap, MeasureSpec, WordSampler, embed_gl, is_symmetric, proximality_certificate
from .limit_laws import (
    block_exponents,
    lil_diagnostic,
    lyapunov_spectrum,
    opposition_involution,
    sigma_and_phi,
    spectrum_crosscheck,
)
from .linalg import cartan_vector, exterior_power, qr_step
from .scenario import ScenarioConfig, load_scenario, run_experiment
from .walks import backward_coupling, cesaro_mass, classify, ratio_series, run_forward
