"""Bias mitigation toolkit for the Adult income classification task.

Pre-processing (quantile repair), in-processing (adversarial debiasing)
and post-processing (calibrated equalized odds) stages, individually and
fused, around a small fully connected network, with group fairness
metrics and a seeded experiment harness.
"""

from .adversarial import AdvConfig, AdversaryParams, adversarial_train, project
from .backends import backend_name
from .data import (
    Dataset,
    Normalizer,
    Splits,
    apply_normalizer,
    fit_normalizer,
    load_adult,
    split,
)
from .metrics import (
    GroupRates,
    MetricsReport,
    ber_protected,
    fairness_report,
    group_rates,
)
from .nn import (
    AdamState,
    MlpParams,
    TrainConfig,
    adam_step,
    forward,
    init_params,
    loss_and_grad,
    predict_proba,
    train_baseline,
)
from .pipeline import (
    ALL_PLANS,
    MitigationPlan,
    RunSettings,
    emit_report,
    plan_from_name,
    run_experiment,
    run_once,
)
from .posteq import CalEqAdjustment, apply_caleq, fit_caleq, generalized_cost
from .repair import QuantileFn, RepairMap, apply_repair, fit_repair, quantile

__version__ = "0.1.0"
