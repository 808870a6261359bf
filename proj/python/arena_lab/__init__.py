"""Python bindings for the arena-lab simulator core."""

from ._core import (  # noqa: F401
    ACTION_COUNT,
    PROTOCOL_VERSION,
    AgentError,
    ConfigError,
    Episode,
    EpisodeError,
    ProcgenError,
    Session,
    __version__,
    action_names,
    canonical,
    evaluate,
    exhaustive_count,
    expand_template,
    rank_sum_test,
    validate,
    verify_replay,
)
