"""Interactive 3D sonification guidance: mapping, synthesis, virtual
agents, session statistics, and a streaming service."""

__version__ = "0.1.0"

from .scene import (
    Vec3,
    Displacement,
    displacement,
    GuidanceMode,
    GroupOrder,
    SkullProxy,
    RingSpec,
    TargetLayout,
    generate_layout,
    target_path,
    ProbeSample,
    Trial,
    Session,
)
from .mapping import (
    SoniParams,
    MappingConfig,
    CrossingEvents,
    map_displacement,
    detect_crossings,
)
from .synth import (
    SynthConfig,
    SynthState,
    init_state,
    render_block,
    trigger_event,
    render_trajectory,
    write_wav,
)
from .agents import AgentPolicy, Episode, decode, run_episode, synthesize_session
from .analysis import (
    DecadeMetrics,
    decade_metrics,
    path_length,
    precision,
    iqr_filter,
    anova_oneway,
    manova_oneway,
    posthoc_pairwise,
    bonferroni,
    report,
    ReportOptions,
)
