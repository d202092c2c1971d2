"""dirkit: directional distributions and recursive Bayesian filters.

Manifolds covered: the unit circle, the hypertorus, the real and complex
unit hyperspheres, and planar rigid-body motions SE(2).
"""

from .core import (
    NonConvergenceError,
    UndefinedMeanError,
    angular_distance,
    bessel_ratio,
    integrate_box,
    integrate_periodic,
    inverse_bessel_ratio,
    kummer_1f1_elementary,
    wrap,
)
from .circular import (
    CircularDistribution,
    CircularMixture,
    CircularUniform,
    CustomCircular,
    GeneralizedVonMises,
    PiecewiseConstant,
    VonMises,
    WrappedCauchy,
    WrappedDiracMixture,
    WrappedExponential,
    WrappedLaplace,
    WrappedNormal,
    convolve,
    convolve_numerical,
    fit_vm_from_moment,
    fit_vm_to_samples,
    fit_wn_from_moment,
    fit_wn_to_samples,
    multiply,
)
from .fourier import FourierDensity
from .hypertorus import (
    CustomHypertoroidal,
    HypertoroidalFourier,
    HypertoroidalMixture,
    HypertoroidalUniform,
    HypertoroidalWD,
    HypertoroidalWN,
    ToroidalVMMatrix,
    ToroidalVMSine,
    convolve_hwn,
    multiply_hwn,
    multiply_tvm_matrix,
)
from .hypersphere import (
    Bingham,
    HypersphericalUniform,
    SphericalDiracMixture,
    VonMisesFisher,
    Watson,
    integrate_sphere,
    vmf_convolve,
    vmf_multiply,
)
from .complexsphere import (
    ComplexACG,
    ComplexBingham,
    ComplexWatson,
    ComplexWatsonMixture,
    DegenerateEigenvaluesError,
    cb_log_norm,
)
from .se2 import (
    Gaussian2D,
    SE2Bingham,
    SE2PartiallyWrappedDirac,
    SE2PartiallyWrappedNormal,
)
from .filters import (
    CircularParticleFilter,
    FourierFilter,
    GridFilter,
    HypertoroidalFourierFilter,
    HypertoroidalParticleFilter,
    PWCFilter,
    ToroidalWNFilter,
    VMFFilter,
    VMFilter,
    WNFilter,
    additive_gaussian_likelihood,
    pwc_transition_matrix,
)
from . import serialization

__version__ = "0.1.0"
