"""Software twin of a knitted capacitive gesture touchpad.

Circuit-level simulation of the fabric sensor, parametric gesture
synthesis, the gain-processing pipeline, and the sequence classifiers
trained on top, with evaluation and serving utilities.
"""

from .mesh import (
    CORNERS,
    CornerId,
    GainFrame,
    MeshConfig,
    MeshSolveError,
    TouchPoint,
    assemble_admittance,
    effective_resistance,
    simulate_trajectory,
    solve_corner_gains,
)
from .pipeline import (
    FilterSpec,
    GainSeries,
    PipelineError,
    RawWindow,
    preprocess,
    subtract_baseline,
    wavelet_filter,
    window_gain,
)
from .resistance import (
    ConductivityMatrix,
    PairwiseResistance,
    WashDryRecord,
    conductivity_matrix,
    pairwise_from_mesh,
    percent_delta_r,
)
from .gestures import (
    CLASS_LABELS,
    GestureClass,
    GesturePath,
    LabeledSample,
    SubjectProfile,
    all_classes,
    default_profiles,
    path_for_class,
    sample_trajectory,
    synth_dataset,
)
from .evaluate import (
    ConfusionMatrix,
    EvaluationError,
    FoldPlan,
    Metrics,
    compute_metrics,
    evaluate_holdout,
    evaluate_worn,
    oversample_balance,
    run_loso_cv,
)

__version__ = "0.1.0"
