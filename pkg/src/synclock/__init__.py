"""Exhaustive may/must-convergence analysis of send/receive processes and
their compositional translations into processes over binary locks."""

from .analysis import (
    ExplorationLimits,
    StateSpaceExceeded,
    Trace,
    blocking_type,
    classify_lock,
    classify_sync,
    fail_witness,
    success_witness,
    translation_blocking_type,
)
from .calculi import (
    BlockingType,
    ConvergenceClass,
    LockConfig,
    LockProcess,
    LockState,
    SyncProcess,
    Translation,
    parse_lock,
    parse_lock_config,
    parse_sync,
    render_lock,
    render_sync,
)
from .search import CorpusSpec, SearchParams, enumerate_corpus, refute, run_search
from .translation import apply_translation, builtin, builtin_translations, check_translation, standardize

__version__ = "0.1.0"

__all__ = [
    "ExplorationLimits",
    "StateSpaceExceeded",
    "Trace",
    "blocking_type",
    "classify_lock",
    "classify_sync",
    "fail_witness",
    "success_witness",
    "translation_blocking_type",
    "BlockingType",
    "ConvergenceClass",
    "LockConfig",
    "LockProcess",
    "LockState",
    "SyncProcess",
    "Translation",
    "parse_lock",
    "parse_lock_config",
    "parse_sync",
    "render_lock",
    "render_sync",
    "CorpusSpec",
    "SearchParams",
    "enumerate_corpus",
    "refute",
    "run_search",
    "apply_translation",
    "builtin",
    "builtin_translations",
    "check_translation",
    "standardize",
]
