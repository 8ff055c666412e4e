"""Frechet-mean estimation of randomly shifted curves.

Synthetic data under the shifted curves model, low-pass Fourier smoothing,
Procrustean shift estimation on the zero-sum set, van Trees lower bounds and
a Monte Carlo harness.
"""

__version__ = "0.1.0"

from ._jit import backend_name
from .bounds import (
    BoundInputs,
    fisher_info,
    sup_derivative,
    van_trees_shift_bound,
    van_trees_sim_bound,
)
from .harness import (
    ErrorRecord,
    ExperimentConfig,
    emit_boxplot_svg,
    emit_csv,
    run_experiment,
    summarize,
)
from .model import (
    Dataset,
    DesignGrid,
    FourierTemplate,
    ShiftDensitySpec,
    ShiftVector,
    eval_template,
    l2_distance_sq,
    paper_template,
    shift_template,
)
from .registration import (
    OptimizerOptions,
    RegistrationResult,
    criterion_D,
    criterion_M,
    estimate_shifts,
    grad_M,
    pattern_error,
    prop41_gap,
    shift_error,
)
from .smoothing import SmoothedCurves, bias_B, dft_coeffs, smoothed_eval, variance_V
from .synth import (
    NonstationarySpec,
    ProcessRealization,
    StationaryCovSpec,
    generate_dataset,
    sample_nonstationary_process,
    sample_shifts,
    sample_stationary_process,
    simulate,
)
