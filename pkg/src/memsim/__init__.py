"""Memristor sweep simulation, flux-charge analysis, and benchmarking."""

__version__ = "0.1.0"

from .analysis import (
    BranchSegmentation,
    ClassificationReport,
    FluxChargeTrace,
    FqLoopArea,
    IVHysteresis,
    MatchResult,
    MemristanceProfile,
    RoleResult,
    Tolerances,
    branch_roles,
    classify,
    fq_loop_area,
    integrate_flux_charge,
    iv_hysteresis,
    memristance,
    memristance_matching,
    prefix_offsets,
    segment_branches,
    shoelace_area,
)
from .bench import (
    BenchReport,
    bench_family,
    endurance_run,
    read_disturb,
    retention_run,
    roff_ron,
)
from .defaults import (
    ReadSpec,
    SweepSpec,
    build_model,
    default_params,
    default_read,
    default_sweep,
    expected_ratio_log10,
    family_names,
    resolve_family,
)
from .errors import (
    ConfigError,
    InstabilityError,
    MemsimError,
    SegmentationError,
    TraceParseError,
)
from .gates import (
    GateRecipe,
    TruthTable,
    evaluate_gate,
    load_recipe,
    shipped_recipes,
    truth_table,
)
from .io import (
    RunConfig,
    export_fq,
    export_plot_data,
    export_report,
    export_trace,
    import_trace,
    load_config,
    make_report_document,
)
from .models import FAMILIES, make_model, model_current, model_state_rate
from .sweep import (
    IVTrace,
    Waveform,
    half_sweep,
    hold,
    make_initialization,
    make_sweep,
    simulate,
)

__all__ = [
    "BenchReport",
    "BranchSegmentation",
    "ClassificationReport",
    "ConfigError",
    "FAMILIES",
    "FluxChargeTrace",
    "FqLoopArea",
    "GateRecipe",
    "IVHysteresis",
    "IVTrace",
    "InstabilityError",
    "MatchResult",
    "MemristanceProfile",
    "MemsimError",
    "ReadSpec",
    "RoleResult",
    "RunConfig",
    "SegmentationError",
    "SweepSpec",
    "Tolerances",
    "TraceParseError",
    "TruthTable",
    "Waveform",
    "__version__",
    "bench_family",
    "branch_roles",
    "build_model",
    "classify",
    "default_params",
    "default_read",
    "default_sweep",
    "endurance_run",
    "evaluate_gate",
    "expected_ratio_log10",
    "export_fq",
    "export_plot_data",
    "export_report",
    "export_trace",
    "family_names",
    "fq_loop_area",
    "half_sweep",
    "hold",
    "import_trace",
    "integrate_flux_charge",
    "iv_hysteresis",
    "load_config",
    "load_recipe",
    "make_initialization",
    "make_model",
    "make_report_document",
    "make_sweep",
    "memristance",
    "memristance_matching",
    "model_current",
    "model_state_rate",
    "prefix_offsets",
    "read_disturb",
    "resolve_family",
    "retention_run",
    "roff_ron",
    "segment_branches",
    "shipped_recipes",
    "shoelace_area",
    "simulate",
    "truth_table",
]
