"""Differentially private bandit simulation and adaptive-data inference.

The library has five layers:

* ``core``       tableaux, reward models, interaction drivers, run records
* ``privacy``    Laplace sampling and epsilon-DP continual-sum counters
* ``stochastic`` UCB and private UCB policies
* ``linear``     ridge UCB (OFUL-style) and its reward-private variant
* ``stats``      bias reports, z-tests, max-information p-value corrections

plus ``harness``/``cli`` for configured, seeded, CSV-emitting experiments.
"""

from .core import (
    BanditTableau,
    Policy,
    ProtocolViolation,
    RewardModel,
    RoundRobinPolicy,
    RunRecord,
    UniformRandomPolicy,
    generate_tableau,
    interact_online,
    interact_tableau,
    pseudo_regret_contextual,
    pseudo_regret_stochastic,
    regret_curve_stochastic,
)
from .linear import (
    ArmRegressionState,
    LinUcbConfig,
    LinUcbPolicy,
    confidence_width,
    linpriv_index,
    linpriv_policy,
    oful_policy,
    prediction_bias,
    private_estimate,
    ridge_estimate,
)
from .privacy import (
    BudgetAccountant,
    TreeCounter,
    VectorTreeCounter,
    laplace_inv_cdf,
    noise_bound,
    vector_noise_bound,
)
from .stats import (
    BiasReport,
    MaxInfoParams,
    TestResult,
    adaptive_t_statistic,
    adaptive_t_test,
    corrected_test,
    estimate_bias,
    hoeffding_width,
    ks_uniform_distance,
    max_info_bound,
    most_pulled_arm,
    pvalue_correction,
    z_test_coefficient,
)
from .stochastic import (
    PrivUcbPolicy,
    UcbPolicy,
    privucb_index,
    privucb_policy,
    ucb_index,
    ucb_policy,
)

__version__ = "0.1.0"
