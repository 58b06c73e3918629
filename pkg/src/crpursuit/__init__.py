"""Online revenue maximization under a hard inventory constraint.

Library layout:

    revenue    admissible concave revenue curves and input sequences
    offline    water-filling offline optimum, prefix optima, structural checks
    online     CR-Pursuit online algorithm, ratio parameters, adaptive variant
    adversary  critical/random/worst-case generators and the stopping adversary
    harness    the ``crp`` experiment CLI

The hot numeric kernels live in ``crpursuit._kernels`` with a compiled
(Cython) and a pure-Python backend selected at import time.
"""

from ._kernels import BACKEND_NAME as kernel_backend
from .adversary import (
    CriticalSequenceSpec,
    CRPursuitAlgorithm,
    GreedyAlgorithm,
    OnlineAlgorithm,
    StopperReport,
    ThresholdAlgorithm,
    critical_sequence,
    empirical_phi,
    make_baseline,
    phi_curve,
    random_sequence,
    stopper,
    worst_case_search,
)
from .offline import (
    OfflineSolution,
    PrefixOptima,
    PrefixSolver,
    increment_bounds_check,
    interchange_check,
    prefix_solve,
    solve,
    verify_kkt,
)
from .online import (
    AdaptivePursuitState,
    RatioConstants,
    PursuitState,
    adaptive_pursuit_step,
    c_constant,
    elasticity_c_of_pi,
    new_adaptive_state,
    pursuit_step,
    ratio_elasticity,
    ratio_general,
    ratio_one_way,
    run_adaptive,
    run_pursuit,
)
from .revenue import (
    InputSequence,
    LinearElasticityRevenue,
    LinearRevenue,
    PowerElasticityRevenue,
    RevenueFunction,
    UserConcaveRevenue,
    load_sequence,
    save_sequence,
)

__version__ = "0.1.0"
