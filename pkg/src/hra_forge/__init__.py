"""Human error probability estimation with network-backed PSF screening.

The package combines three layers: a closed-form probability algebra over
performance shaping factors, a small replicated feedforward network that
learns the HEP surface from observations, and a response-surface screening
loop that drops factors whose terms never survive backward elimination.
"""
from .ann import (
    PLATEAU_WINDOW,
    EnsembleMember,
    MetricReport,
    Topology,
    TrainedPredictor,
    TrainingConfig,
    WeightSet,
    default_topology,
    forward,
    forward_batch,
    init_weights,
    load_predictor,
    load_training_config,
    metrics,
    parse_training_config,
    save_predictor,
    train_one,
    train_replicated,
)
from .dataset import (
    DesignRow,
    Instance,
    ObservationSet,
    bundled_case_study,
    bundled_refit_comparison,
    bundled_reference_fit,
    bundled_table2,
    bundled_table4,
    load_design,
    load_observations,
    normalize_observations,
    save_design,
    save_observations,
)
from .errors import (
    HraForgeError,
    InputError,
    NumericalError,
    PipelineAbortedError,
    RankDeficientError,
    TrainingDivergedError,
    UnknownLevelError,
)
from .pipeline import (
    ComparisonReport,
    ComparisonRow,
    IterationRecord,
    PipelineConfig,
    PipelineResult,
    REASON_CONVERGED,
    REASON_MAX_ITERATIONS,
    REASON_MIN_PSFS,
    compare_before_after,
    comparison_csv_text,
    run,
    save_result,
    summary_csv_text,
)
from .psf import (
    FAILURE_CERTAIN,
    PSF_ORDER,
    ErrorTally,
    Mode,
    MultiplierRow,
    MultiplierTable,
    Probability,
    PsfId,
    PsfVector,
    bundled_multiplier_tables,
    composite_hep,
    format_multiplier_config,
    load_multiplier_config,
    lookup_multiplier,
    nominal_hep,
    normalize,
    parse_multiplier_config,
    resolve_levels,
    total_psf_impact,
)
from .rsm import (
    AnovaRow,
    AnovaTable,
    DEFAULT_AXIAL,
    EliminationStep,
    FactorCoding,
    FitResult,
    ModelSpec,
    ModelTerm,
    PredictionResult,
    ScreeningReport,
    anova,
    anova_csv_text,
    backward_eliminate,
    evaluate_design,
    fit,
    full_quadratic,
    generate_ccd,
    infer_coding,
    intercept,
    interaction,
    main_effect,
    model_matrix,
    parse_model_spec,
    parse_term,
    predict_response,
    quadratic,
    screen_psfs,
    screening_text,
    uniform_coding,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
