"""Compositional translations from SYNCSIMPLE into LOCKSIMPLE.

A translation is fixed by the op strings substituted for ``!`` and ``?``.
:func:`check_translation` tests convergence equivalence on a finite corpus;
the ``filter_*`` functions are cheap necessary conditions for correctness.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .analysis import (
    ExplorationLimits,
    LockExplorer,
    StateSpaceExceeded,
    SyncExplorer,
    Trace,
    fail_witness,
    success_witness,
    translation_blocking_type,
)
from .calculi import (
    Annotation,
    BlockingKind,
    ConvergenceClass,
    LockConfig,
    LockOp,
    LockProcess,
    LockSubprocess,
    OpKind,
    SyncProcess,
    SyncSymbol,
    Translation,
    canonical_tuple,
    count_ops,
    parse_lock_config,
    parse_op_string,
    put,
    take,
)
from .semantics import _lock_steps, put_blocks


class WrongArity(ValueError):
    pass


class Status(enum.Enum):
    SURVIVES = "survives"
    REFUTED = "refuted"


@dataclass(frozen=True)
class Counterexample:
    source: SyncProcess
    source_class: ConvergenceClass
    image: LockProcess
    image_class: ConvergenceClass
    witness: Trace | None = None

    def to_dict(self) -> dict:
        return {
            "source": str(self.source),
            "source_class": _class_dict(self.source_class),
            "image": str(self.image),
            "image_class": _class_dict(self.image_class),
            "witness": self.witness.to_dict() if self.witness else None,
        }


def _class_dict(c: ConvergenceClass) -> dict:
    return {"may": c.may_convergent, "must": c.must_convergent}


@dataclass(frozen=True)
class Verdict:
    status: Status
    counterexample: Counterexample | None = None

    @property
    def survives(self) -> bool:
        return self.status is Status.SURVIVES


SURVIVES = Verdict(Status.SURVIVES)


def make_translation(bang: str, quest: str, store: str, pattern: str | None = None) -> Translation:
    cfg = parse_lock_config(store, pattern)
    return Translation(parse_op_string(bang, cfg.k), parse_op_string(quest, cfg.k), cfg)


def _image_subs(bang, quest, p: SyncProcess) -> tuple:
    out = []
    for sub in p.subprocesses:
        ops: list[LockOp] = []
        for sym in sub.prefix:
            ops.extend(bang if sym is SyncSymbol.SEND else quest)
        out.append(LockSubprocess(tuple(ops), sub.terminator))
    return canonical_tuple(out)


def apply_translation(t: Translation, p: SyncProcess) -> LockProcess:
    return LockProcess(_image_subs(t.bang, t.quest, p))


def _witness_for(
    t: Translation, image: LockProcess, src: ConvergenceClass, img: ConvergenceClass, limits
) -> Trace | None:
    """A trace of the image showing the first verdict bit on which the two sides disagree."""
    if src.may_convergent != img.may_convergent:
        if img.may_convergent:
            return success_witness(image, t.config, limits)
        return fail_witness(image, t.config, limits)
    if img.must_convergent:
        return None
    return fail_witness(image, t.config, limits)


class Checker:
    """Reusable corpus checker for one translation.

    ``sync_explorer`` may be shared across translations; source verdicts do not
    depend on the candidate.
    """

    def __init__(
        self,
        t: Translation,
        limits: ExplorationLimits | None = None,
        sync_explorer: SyncExplorer | None = None,
        witnesses: bool = True,
    ):
        self.t = t
        self.limits = limits or ExplorationLimits()
        self.sync = sync_explorer or SyncExplorer(self.limits)
        self.lock = LockExplorer(t.config, self.limits)
        self.witnesses = witnesses

    def check_one(self, p: SyncProcess) -> Counterexample | None:
        subs = canonical_tuple(p.subprocesses)
        src = self.sync.verdict(subs)
        image = _image_subs(self.t.bang, self.t.quest, p)
        try:
            img = self.lock.verdict(image, self.t.config.initial_store)
        except StateSpaceExceeded as exc:
            raise StateSpaceExceeded(exc.limit, f"image of {p}") from None
        if src == img:
            return None
        src_c, img_c = ConvergenceClass(*src), ConvergenceClass(*img)
        img_p = LockProcess(image)
        witness = _witness_for(self.t, img_p, src_c, img_c, self.limits) if self.witnesses else None
        return Counterexample(SyncProcess(subs), src_c, img_p, img_c, witness)

    def check(self, corpus: Iterable[SyncProcess]) -> Verdict:
        for p in corpus:
            cex = self.check_one(p)
            if cex is not None:
                return Verdict(Status.REFUTED, cex)
        return SURVIVES


def check_translation(
    t: Translation,
    corpus: Sequence[SyncProcess],
    limits: ExplorationLimits | None = None,
    witnesses: bool = True,
) -> Verdict:
    """First corpus process whose class differs from its image's, in corpus order.

    SURVIVES only means that no counterexample exists in ``corpus``.
    """
    if not corpus:
        raise ValueError("corpus must be nonempty")
    return Checker(t, limits, witnesses=witnesses).check(corpus)


# -- necessary conditions ---------------------------------------------------


def filter_count(t: Translation) -> bool:
    """No index has more Puts than Takes over both images together."""
    for i in range(1, t.config.k + 1):
        p, tk = put(i), take(i)
        puts = count_ops(t.bang, p) + count_ops(t.quest, p)
        takes = count_ops(t.bang, tk) + count_ops(t.quest, tk)
        if puts > takes:
            return False
    return True


def filter_blocking(t: Translation) -> bool:
    """Both images must get stuck when run alone from the initial store."""
    return all(bt.kind is not BlockingKind.NO_BLOCK for bt in translation_blocking_type(t))


def _starts_or_doubles_put(seq: Sequence[LockOp]) -> bool:
    if seq and seq[0].kind is OpKind.PUT:
        return True
    last = None
    for op in seq:
        if op.kind is OpKind.PUT and last is OpKind.PUT:
            return True
        last = op.kind
    return False


def filter_k1(t: Translation) -> bool:
    """With one lock, each image starts with P1 or contains P1 P1 with no T1 between."""
    if t.config.k != 1:
        raise WrongArity(f"filter_k1 needs k=1, got k={t.config.k}")
    return _starts_or_doubles_put(t.bang) and _starts_or_doubles_put(t.quest)


def filter_full_execution(t: Translation) -> bool:
    """Some interleaving of the two images, from the initial store, consumes every op."""
    blocks = put_blocks(t.config)
    start = (canonical_tuple([LockSubprocess(t.bang), LockSubprocess(t.quest)]), t.config.initial_store)
    seen = {start}
    stack = [start]
    while stack:
        subs, store = stack.pop()
        if not subs:
            return True
        for _, nsubs, nstore in _lock_steps(subs, store, blocks):
            key = (nsubs, nstore)
            if key not in seen:
                seen.add(key)
                stack.append(key)
    return False


# -- blocking-pattern standardization ---------------------------------------


def _flip_op(op: LockOp, flip: Sequence[bool]) -> LockOp:
    if not flip[op.index - 1]:
        return op
    return op._replace(kind=OpKind.TAKE if op.kind is OpKind.PUT else OpKind.PUT)


def flip_indices(
    cfg: LockConfig, p: LockProcess, indices: Iterable[int]
) -> tuple[LockConfig, LockProcess]:
    """Swap Put/Take, flip the initial cell and the annotation at each 1-based index."""
    flip = [False] * cfg.k
    for j in indices:
        flip[j - 1] = True
    pattern = tuple(
        (Annotation.BLOCKING if a is Annotation.NONBLOCKING else Annotation.NONBLOCKING) if f else a
        for a, f in zip(cfg.pattern, flip)
    )
    store = tuple(c.flipped() if f else c for c, f in zip(cfg.initial_store, flip))
    subs = [
        LockSubprocess(tuple(_flip_op(op, flip) for op in sub.prefix), sub.terminator)
        for sub in p.subprocesses
    ]
    return LockConfig(cfg.k, pattern, store), LockProcess(canonical_tuple(subs))


def standardize(cfg: LockConfig, p: LockProcess) -> tuple[LockConfig, LockProcess]:
    """Rewrite into the all-Put-blocking language with an adjusted initial store."""
    return flip_indices(
        cfg, p, [j for j, a in enumerate(cfg.pattern, 1) if a is Annotation.NONBLOCKING]
    )


# -- known encodings --------------------------------------------------------

BUILTIN_NAMES = ("thm-2.9", "len-8")


def builtin_translations() -> dict[str, Translation]:
    return {
        "thm-2.9": make_translation("P1 T3 P2 T1", "P3 T2", "eff"),
        "len-8": make_translation("P2 P1 T3 P1 T1 T2", "P3 T1", "eef"),
    }


def builtin(name: str) -> Translation:
    try:
        return builtin_translations()[name]
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}") from None
