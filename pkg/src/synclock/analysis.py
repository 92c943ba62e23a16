"""Convergence classification, witness traces and blocking types.

Both calculi strictly decrease the number of prefix symbols on every step, so
the reachable states form a finite DAG and a memoized depth-first traversal
decides both verdict bits exactly.
"""

from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .calculi import (
    ConvergenceClass,
    BlockingType,
    LockConfig,
    LockOp,
    LockProcess,
    LockState,
    SyncProcess,
    Translation,
    canonical_tuple,
)
from .semantics import (
    SoloOutcome,
    _has_success,
    _lock_steps,
    _sync_steps,
    put_blocks,
    run_solo,
)

DEFAULT_MAX_STATES = 10_000_000

# recursion depth is bounded by the symbol count of the start state
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))


class StateSpaceExceeded(RuntimeError):
    def __init__(self, limit: int, subject: str | None = None):
        self.limit = limit
        self.subject = subject
        msg = f"more than {limit} reachable states"
        if subject:
            msg += f" while exploring {subject}"
        super().__init__(msg)


@dataclass(frozen=True)
class ExplorationLimits:
    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be positive")


@dataclass
class Trace:
    """An execution: ``origin`` followed by ``(state, redex description)`` pairs."""

    origin: SyncProcess | LockState
    steps: list = field(default_factory=list)

    @property
    def final(self):
        return self.steps[-1][0] if self.steps else self.origin

    def __len__(self) -> int:
        return len(self.steps)

    def lines(self) -> list[str]:
        out = [f"  {self.origin}"]
        out += [f"  --[{desc}]--> {state}" for state, desc in self.steps]
        return out

    def to_dict(self) -> dict:
        return {
            "origin": str(self.origin),
            "steps": [{"redex": desc, "state": str(state)} for state, desc in self.steps],
        }


# -- classification ---------------------------------------------------------


class SyncExplorer:
    """Memo table of verdicts for SYNCSIMPLE states (raw canonical tuples)."""

    def __init__(self, limits: ExplorationLimits | None = None):
        self.limits = limits or ExplorationLimits()
        self.memo: dict[tuple, tuple[bool, bool]] = {}

    def verdict(self, subs: tuple) -> tuple[bool, bool]:
        memo = self.memo
        hit = memo.get(subs)
        if hit is not None:
            return hit
        if _has_success(subs):
            result = (True, True)
        else:
            may = False
            must = True
            any_step = False
            for _, _, nxt in _sync_steps(subs):
                any_step = True
                m, u = self.verdict(nxt)
                may = may or m
                must = must and u
            result = (may, must and may) if any_step else (False, False)
        if len(memo) >= self.limits.max_states:
            raise StateSpaceExceeded(self.limits.max_states)
        memo[subs] = result
        return result

    def classify(self, p: SyncProcess) -> ConvergenceClass:
        return ConvergenceClass(*self.verdict(canonical_tuple(p.subprocesses)))


class LockExplorer:
    """Memo table of verdicts for LOCKSIMPLE states under one configuration.

    Verdicts depend only on the state, so one explorer may be reused across
    many start states, e.g. all images of a corpus under one translation.
    """

    def __init__(self, cfg: LockConfig, limits: ExplorationLimits | None = None):
        self.cfg = cfg
        self.blocks = put_blocks(cfg)
        self.limits = limits or ExplorationLimits()
        self.memo: dict[tuple, tuple[bool, bool]] = {}

    def verdict(self, subs: tuple, store: tuple) -> tuple[bool, bool]:
        key = (subs, store)
        memo = self.memo
        hit = memo.get(key)
        if hit is not None:
            return hit
        if _has_success(subs):
            result = (True, True)
        else:
            may = False
            must = True
            any_step = False
            for _, nsubs, nstore in _lock_steps(subs, store, self.blocks):
                any_step = True
                m, u = self.verdict(nsubs, nstore)
                may = may or m
                must = must and u
            result = (may, must and may) if any_step else (False, False)
        if len(memo) >= self.limits.max_states:
            raise StateSpaceExceeded(self.limits.max_states)
        memo[key] = result
        return result

    def classify(self, p: LockProcess, store=None) -> ConvergenceClass:
        store = self.cfg.initial_store if store is None else tuple(store)
        return ConvergenceClass(*self.verdict(canonical_tuple(p.subprocesses), store))


def classify_sync(p: SyncProcess, limits: ExplorationLimits | None = None) -> ConvergenceClass:
    return SyncExplorer(limits).classify(p)


def classify_lock(
    s: LockState | LockProcess,
    cfg: LockConfig,
    limits: ExplorationLimits | None = None,
) -> ConvergenceClass:
    """Classify a state; a bare process starts from ``cfg.initial_store``."""
    if isinstance(s, LockProcess):
        s = LockState(s, cfg.initial_store)
    if len(s.store) != cfg.k:
        raise ValueError(f"store length {len(s.store)} does not match k={cfg.k}")
    return LockExplorer(cfg, limits).classify(s.process, s.store)


# -- witnesses --------------------------------------------------------------


def _successor_fn(start, cfg: LockConfig | None):
    """Return ``(origin, raw_start, step, wrap)`` for breadth-first search."""
    if isinstance(start, SyncProcess):
        def step(raw):
            for i, j, nxt in _sync_steps(raw):
                yield f"{raw[i]} with {raw[j]}", nxt

        raw = canonical_tuple(start.subprocesses)
        return SyncProcess(raw), raw, step, SyncProcess
    if cfg is None:
        raise TypeError("lock witnesses need a LockConfig")
    if isinstance(start, LockProcess):
        start = LockState(start, cfg.initial_store)
    blocks = put_blocks(cfg)

    def step(raw):
        subs, store = raw
        for i, nsubs, nstore in _lock_steps(subs, store, blocks):
            yield f"{subs[i].prefix[0]} in {subs[i]}", (nsubs, nstore)

    def wrap(raw):
        return LockState(LockProcess(raw[0]), raw[1])

    raw = (canonical_tuple(start.process.subprocesses), tuple(start.store))
    return wrap(raw), raw, step, wrap


def _bfs(start, cfg, limits, goal) -> Trace | None:
    limits = limits or ExplorationLimits()
    origin, raw, step, wrap = _successor_fn(start, cfg)
    subs_of = (lambda r: r) if isinstance(origin, SyncProcess) else (lambda r: r[0])
    parent: dict = {raw: None}
    queue = deque([raw])
    while queue:
        cur = queue.popleft()
        succ = list(step(cur))
        if goal(subs_of(cur), succ):
            path = []
            while parent[cur] is not None:
                prev, desc = parent[cur]
                path.append((wrap(cur), desc))
                cur = prev
            return Trace(origin, path[::-1])
        for desc, nxt in succ:
            if nxt not in parent:
                if len(parent) >= limits.max_states:
                    raise StateSpaceExceeded(limits.max_states)
                parent[nxt] = (cur, desc)
                queue.append(nxt)
    return None


def success_witness(start, cfg: LockConfig | None = None, limits: ExplorationLimits | None = None):
    """Shortest execution reaching a successful state, or None."""
    return _bfs(start, cfg, limits, lambda subs, succ: _has_success(subs))


def fail_witness(start, cfg: LockConfig | None = None, limits: ExplorationLimits | None = None):
    """Shortest execution ending in a stuck, unsuccessful state, or None."""
    return _bfs(start, cfg, limits, lambda subs, succ: not succ and not _has_success(subs))


# -- blocking types ---------------------------------------------------------


def blocking_type(seq: Sequence[LockOp], cfg: LockConfig) -> BlockingType:
    run = run_solo(tuple(seq), cfg)
    if run.outcome is SoloOutcome.COMPLETED:
        return BlockingType.no_block()
    i = run.blocked_op.index
    if any(op.index == i for op in seq[: run.consumed]):
        return BlockingType.double(i)
    return BlockingType.single(i)


def translation_blocking_type(t: Translation) -> tuple[BlockingType, BlockingType]:
    return blocking_type(t.bang, t.config), blocking_type(t.quest, t.config)
