"""Pointer chasing under a per-layer attention cache budget.

Finite-precision engine, upper-bound constructions, cache controllers,
closed-form bounds, exhaustive verifiers and seeded experiment sweeps.
"""
from .bounds import (
    BoundsReport,
    adaptive_prob,
    bounds_report,
    bounds_table,
    depth_cache_curves,
    oblivious_prob_bound,
    separation_ratio,
)
from .constructions import (
    LayerProgram,
    LookupLayer,
    build_serial_program,
    pd_schedule,
    simulate_windowed_pd,
)
from .controllers import (
    ChainTrackingController,
    FixedController,
    OracleController,
    RandomController,
    StageGame,
    make_controller,
    run_stage_game,
)
from .errors import (
    CacheChaseError,
    CacheOverflow,
    CorruptState,
    InsufficientSamples,
    InvalidParameter,
    InvalidTarget,
    InvalidValue,
    LocalityViolation,
)
from .experiments import (
    ExperimentRecord,
    emit_records,
    run_random_cache_sweep,
    run_serial_sweep,
    run_windowed_sweep,
)
from .qengine import (
    CacheTrace,
    ModelConfig,
    decode_pointer,
    encode_token,
    forward,
    hard_match_attend,
    quantize,
)
from .rng import SplitMix64, derive_seed
from .task import (
    Permutation,
    chain,
    cycles,
    good_chain,
    random_permutation,
    windows,
)
from .verify import (
    VerificationReport,
    build_adversarial_swap,
    count_reachable_states,
    estimate_star,
    exact_joint_success,
    verify_reachability,
    verify_trace_equivalence,
)

__version__ = "0.1.0"
