"""One-step reduction for both calculi and solo execution of a lock subprocess.

The public functions take and return the dataclasses of :mod:`synclock.calculi`.
The underscore-prefixed helpers work on raw ``(subprocesses, store)`` tuples;
the explorers in :mod:`synclock.analysis` run on those to avoid wrapper
allocation in the inner loop.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

from .calculi import (
    Annotation,
    CellState,
    LockConfig,
    LockOp,
    LockProcess,
    LockState,
    LockSubprocess,
    OpKind,
    Store,
    SyncProcess,
    SyncSymbol,
    Terminator,
    canonical_tuple,
)

EMPTY = CellState.EMPTY
FULL = CellState.FULL


def is_successful(p: SyncProcess | LockProcess) -> bool:
    return _has_success(p.subprocesses)


def _has_success(subs) -> bool:
    for sub in subs:
        if not sub.prefix and sub.terminator is Terminator.SUCCESS:
            return True
    return False


# -- SYNCSIMPLE -------------------------------------------------------------


def _sync_steps(subs):
    """Yield ``(i, j, successor_subs)`` for each send ``i`` paired with receive ``j``."""
    senders = [i for i, s in enumerate(subs) if s.prefix and s.prefix[0] is SyncSymbol.SEND]
    if not senders:
        return
    receivers = [i for i, s in enumerate(subs) if s.prefix and s.prefix[0] is SyncSymbol.RECEIVE]
    seen = set()
    for i in senders:
        for j in receivers:
            # equal subprocesses give equal successors
            pair = (subs[i], subs[j])
            if pair in seen:
                continue
            seen.add(pair)
            rest = [s for n, s in enumerate(subs) if n != i and n != j]
            rest.append(subs[i]._replace(prefix=subs[i].prefix[1:]))
            rest.append(subs[j]._replace(prefix=subs[j].prefix[1:]))
            yield i, j, canonical_tuple(rest)


def sync_successors(p: SyncProcess) -> set[SyncProcess]:
    return {SyncProcess(nxt) for _, _, nxt in _sync_steps(p.subprocesses)}


# -- LOCKSIMPLE -------------------------------------------------------------


def put_blocks(cfg: LockConfig) -> tuple[bool, ...]:
    """Per index: True when Put is the blocking operator, False when Take is."""
    return tuple(a is Annotation.BLOCKING for a in cfg.pattern)


def fire(op: LockOp, store: Store, blocks: Sequence[bool]) -> Store | None:
    """Store after executing ``op``, or None if ``op`` has to wait."""
    i = op.index - 1
    cell = store[i]
    if op.kind is OpKind.PUT:
        if cell is FULL:
            if blocks[i]:
                return None
            return store
        return store[:i] + (FULL,) + store[i + 1:]
    if cell is EMPTY:
        if not blocks[i]:
            return None
        return store
    return store[:i] + (EMPTY,) + store[i + 1:]


def _lock_steps(subs, store, blocks) -> Iterator[tuple[int, tuple, Store]]:
    """Yield ``(i, successor_subs, successor_store)`` for each enabled head op."""
    prev = None
    for i, sub in enumerate(subs):
        if not sub.prefix or sub == prev:
            continue
        prev = sub
        nstore = fire(sub.prefix[0], store, blocks)
        if nstore is None:
            continue
        rest = list(subs)
        rest[i] = LockSubprocess(sub.prefix[1:], sub.terminator)
        yield i, canonical_tuple(rest), nstore


def lock_successors(s: LockState, cfg: LockConfig) -> set[LockState]:
    if len(s.store) != cfg.k:
        raise ValueError(f"store length {len(s.store)} does not match k={cfg.k}")
    blocks = put_blocks(cfg)
    return {
        LockState(LockProcess(nsubs), nstore)
        for _, nsubs, nstore in _lock_steps(s.process.subprocesses, s.store, blocks)
    }


# -- solo runs --------------------------------------------------------------


class SoloOutcome(enum.Enum):
    COMPLETED = "completed"
    BLOCKED = "blocked"


@dataclass(frozen=True)
class SoloRun:
    consumed: int
    outcome: SoloOutcome
    final_store: Store
    blocked_op: LockOp | None = None

    @property
    def position(self) -> int | None:
        return self.consumed if self.outcome is SoloOutcome.BLOCKED else None


def run_ops(ops: Sequence[LockOp], store: Store, blocks: Sequence[bool]) -> tuple[int, Store]:
    """Execute ``ops`` alone; return how many fired and the resulting store."""
    n = 0
    for op in ops:
        nxt = fire(op, store, blocks)
        if nxt is None:
            break
        store = nxt
        n += 1
    return n, store


def run_solo(sub: LockSubprocess | Sequence[LockOp], cfg: LockConfig) -> SoloRun:
    """Deterministic execution of one subprocess from the initial store."""
    ops = sub.prefix if isinstance(sub, LockSubprocess) else tuple(sub)
    n, store = run_ops(ops, cfg.initial_store, put_blocks(cfg))
    if n == len(ops):
        return SoloRun(n, SoloOutcome.COMPLETED, store)
    return SoloRun(n, SoloOutcome.BLOCKED, store, ops[n])
