"""Forecasting time series with multiple seasonal cycles using randomized
single-hidden-layer feedforward networks over a pattern representation."""

from .encoding import (
    CodingVars,
    PatternPair,
    TrainingSet,
    build_training_set,
    decode,
    encode_x,
    encode_y,
)
from .evaluation import (
    ErrorRecord,
    MetricsSummary,
    WilcoxonResult,
    percentage_errors,
    summarize,
    wilcoxon_signed_rank,
)
from .pipeline import (
    ExperimentConfig,
    ExperimentReport,
    run_day,
    run_experiment,
    seasonal_naive,
    write_report_bundle,
)
from .randnn import (
    METHODS,
    HiddenLayer,
    HyperParams,
    RandFnnModel,
    fit,
    gen_ddm,
    gen_ralpham,
    gen_ram,
    gen_standard,
    hidden_output,
    make_layer,
    model_from_json,
    model_to_json,
    predict,
)
from .timeseries import (
    SeasonalSequence,
    SynthSpec,
    TimeSeries,
    exclude_days,
    load_csv,
    load_exclusions,
    split_seasonal,
    synth_generate,
    write_csv,
)
from .tuning import Grid, TuneResult, cross_validate, default_grid, grid_search, kfold_split

__version__ = "0.1.0"
