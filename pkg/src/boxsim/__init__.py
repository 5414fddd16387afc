"""boxsim: hidden-signaling box models with memory, end to end.

Builds the non-signaling behaviors of the two-party binary scenario,
the deterministic hidden-signaling strategies that reproduce them, the
memory kernels that bias those strategies on past signals, and the
learning + signaling protocols that turn such a bias into a transmitted
bit (and into a faster-than-light margin for suitable geometry).
"""

from .behavior import (
    Behavior,
    FACET_SIGNS,
    Marginal,
    all_deterministic_vertices,
    all_pr_boxes,
    behavior_from_json,
    behavior_to_json,
    chsh_value,
    correlators,
    deterministic_vertex,
    is_nonsignaling,
    marginal,
    mix,
    near_vertex,
    pr_box,
)
from .boxworld import (
    NAMED_STRATEGIES,
    Strategy,
    feasibility_search,
    induced_behavior,
    induced_counts,
    input_signaling_strategy,
    output_signaling_strategy,
    reproduces_exactly,
    strategy_from_json,
    strategy_to_json,
    xor_signaling_strategy,
)
from .errors import (
    BoxsimError,
    ConfigurationError,
    DegenerateBiasError,
    FineTunedBehaviorError,
    GeometryError,
    InsufficientDataError,
    InvalidBehaviorError,
    InvalidMixtureError,
    RangeError,
    SignalingBehaviorError,
    StructureError,
)
from .harness import (
    AlternatingPair,
    RandomBits,
    RoundRecord,
    Scripted,
    Transcript,
    empirical_behavior,
    run,
    transcript_from_jsonl,
    transcript_to_jsonl,
)
from .memory import (
    MemoryKernel,
    biased_kernel,
    has_memory_dependence,
    kernel_from_json,
    kernel_to_json,
    memoryless_kernel,
)
from .protocol import (
    DecodeResult,
    GEstimate,
    MemoryDetection,
    SignalingConfig,
    SuperluminalParams,
    bit_error_rate,
    choose_N,
    decision_interval,
    decision_threshold,
    decode,
    decode_count,
    detect_memory,
    encode_cell,
    decode_cell,
    encode_run,
    hoeffding_band,
    make_config,
    marginalized_bias,
    memoryless_reference,
    sample_G,
    steering_kernel,
    superluminal_margin,
)
from .sigfun import (
    AND_PARTITION,
    CONSTANT_PARTITION,
    FULL_PARTITION,
    INPUT_PARTITION,
    OUTPUT_PARTITION,
    Partition,
    XOR_PARTITION,
    coarse_grainings,
    enumerate_partitions,
    from_function,
)

__version__ = "0.1.0"
