"""Terms of the two calculi, their canonical forms and their text syntax.

Processes are multisets of subprocesses.  A multiset is stored as a tuple
sorted by :func:`subprocess_key`, with bare ``0`` subprocesses removed, so
that equality and hashing of canonical values are plain tuple operations.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Tuple, Union


class SyntaxError(ValueError):  # noqa: A001 - shadows the builtin on purpose
    """Malformed process, store or pattern text."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class IndexOutOfRange(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class SyncSymbol(enum.IntEnum):
    SEND = 0
    RECEIVE = 1

    def __str__(self) -> str:
        return "!" if self is SyncSymbol.SEND else "?"


class Terminator(enum.IntEnum):
    NIL = 0
    SUCCESS = 1

    def __str__(self) -> str:
        return "0" if self is Terminator.NIL else "*"


class OpKind(enum.IntEnum):
    PUT = 0
    TAKE = 1


class CellState(enum.IntEnum):
    EMPTY = 0
    FULL = 1

    def __str__(self) -> str:
        return "e" if self is CellState.EMPTY else "f"

    def flipped(self) -> CellState:
        return CellState.FULL if self is CellState.EMPTY else CellState.EMPTY


class Annotation(str, enum.Enum):
    """Per-index blocking annotation of the Put operator."""

    BLOCKING = "b"
    NONBLOCKING = "n"

    def __str__(self) -> str:
        return self.value


class LockOp(NamedTuple):
    """``P_i`` or ``T_i``; tuple order gives P_1 < T_1 < P_2 < T_2 < ..."""

    index: int
    kind: OpKind

    def __str__(self) -> str:
        return f"{'P' if self.kind is OpKind.PUT else 'T'}{self.index}"


def put(i: int) -> LockOp:
    return LockOp(i, OpKind.PUT)


def take(i: int) -> LockOp:
    return LockOp(i, OpKind.TAKE)


class SyncSubprocess(NamedTuple):
    prefix: Tuple[SyncSymbol, ...]
    terminator: Terminator = Terminator.NIL

    def __str__(self) -> str:
        return "".join(map(str, self.prefix)) + str(self.terminator)


class LockSubprocess(NamedTuple):
    prefix: Tuple[LockOp, ...]
    terminator: Terminator = Terminator.NIL

    def __str__(self) -> str:
        body = " ".join(map(str, self.prefix))
        return f"{body} {self.terminator}" if body else str(self.terminator)


Subprocess = Union[SyncSubprocess, LockSubprocess]
Store = Tuple[CellState, ...]
BlockingPattern = Tuple[Annotation, ...]

SUCCESS_SYNC = SyncSubprocess((), Terminator.SUCCESS)
SUCCESS_LOCK = LockSubprocess((), Terminator.SUCCESS)


# terminators sort after every prefix symbol, Nil before Success
_TERM_KEY = {
    SyncSubprocess: (2, 3),
    LockSubprocess: ((1 << 30, 0), (1 << 30, 1)),
}


def subprocess_key(sub: Subprocess):
    """Lexicographic over the symbols followed by the terminator.

    Symbol order is ``! < ? < 0 < *`` and ``P1 < T1 < P2 < ... < 0 < *``.
    """
    return sub.prefix + (_TERM_KEY[type(sub)][sub.terminator],)


def _is_unit(sub: Subprocess) -> bool:
    return not sub.prefix and sub.terminator is Terminator.NIL


def canonical_tuple(subs: Iterable[Subprocess]) -> tuple:
    return tuple(sorted((s for s in subs if not _is_unit(s)), key=subprocess_key))


@dataclass(frozen=True)
class SyncProcess:
    subprocesses: Tuple[SyncSubprocess, ...] = ()

    def __str__(self) -> str:
        return render_sync(self)

    def __len__(self) -> int:
        return len(self.subprocesses)

    def __or__(self, other: SyncProcess) -> SyncProcess:
        return canonicalize_sync(SyncProcess(self.subprocesses + other.subprocesses))


@dataclass(frozen=True)
class LockProcess:
    subprocesses: Tuple[LockSubprocess, ...] = ()

    def __str__(self) -> str:
        return render_lock(self)

    def __len__(self) -> int:
        return len(self.subprocesses)

    def __or__(self, other: LockProcess) -> LockProcess:
        return LockProcess(canonical_tuple(self.subprocesses + other.subprocesses))


@dataclass(frozen=True)
class LockConfig:
    k: int
    pattern: BlockingPattern
    initial_store: Store

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if len(self.pattern) != self.k or len(self.initial_store) != self.k:
            raise LengthMismatch(
                f"pattern and store must both have length {self.k}"
            )

    @classmethod
    def standard(cls, store: Sequence[CellState]) -> LockConfig:
        """All-Put-blocking configuration over ``store``."""
        store = tuple(CellState(c) for c in store)
        return cls(len(store), (Annotation.BLOCKING,) * len(store), store)

    @property
    def is_standard(self) -> bool:
        return all(a is Annotation.BLOCKING for a in self.pattern)

    def __str__(self) -> str:
        return f"store={render_store(self.initial_store)} pattern={render_pattern(self.pattern)}"


@dataclass(frozen=True)
class LockState:
    process: LockProcess
    store: Store

    def __str__(self) -> str:
        return f"({render_lock(self.process)}, {render_store(self.store)})"


@dataclass(frozen=True)
class Translation:
    """A compositional translation, identified with the pair of images of ``!`` and ``?``."""

    bang: Tuple[LockOp, ...]
    quest: Tuple[LockOp, ...]
    config: LockConfig

    def __post_init__(self):
        for op in self.bang + self.quest:
            if not 1 <= op.index <= self.config.k:
                raise IndexOutOfRange(f"{op} exceeds k={self.config.k}")

    @property
    def length(self) -> int:
        return len(self.bang) + len(self.quest)

    def __str__(self) -> str:
        return (
            f"(!) -> {render_ops(self.bang) or 'eps'}, (?) -> {render_ops(self.quest) or 'eps'}, "
            f"{self.config}"
        )


@dataclass(frozen=True)
class ConvergenceClass:
    may_convergent: bool
    must_convergent: bool

    def __post_init__(self):
        if self.must_convergent and not self.may_convergent:
            raise ValueError("must-convergence implies may-convergence")

    @property
    def may_divergent(self) -> bool:
        return not self.must_convergent

    @property
    def must_divergent(self) -> bool:
        return not self.may_convergent

    def __str__(self) -> str:
        return f"may={str(self.may_convergent).lower()} must={str(self.must_convergent).lower()}"


class BlockingKind(enum.Enum):
    NO_BLOCK = "none"
    SINGLE = "single"
    DOUBLE = "double"


@dataclass(frozen=True)
class BlockingType:
    kind: BlockingKind
    index: int | None = None

    @classmethod
    def no_block(cls) -> BlockingType:
        return cls(BlockingKind.NO_BLOCK)

    @classmethod
    def single(cls, i: int) -> BlockingType:
        return cls(BlockingKind.SINGLE, i)

    @classmethod
    def double(cls, i: int) -> BlockingType:
        return cls(BlockingKind.DOUBLE, i)

    def __str__(self) -> str:
        if self.kind is BlockingKind.NO_BLOCK:
            return "none"
        if self.kind is BlockingKind.SINGLE:
            return f"P{self.index}"
        return f"P{self.index}P{self.index}"


# -- canonical forms --------------------------------------------------------


def canonicalize_sync(p: SyncProcess) -> SyncProcess:
    return SyncProcess(canonical_tuple(p.subprocesses))


def canonicalize_lock(s: LockState) -> LockState:
    return LockState(LockProcess(canonical_tuple(s.process.subprocesses)), s.store)


def total_symbols(p: SyncProcess | LockProcess) -> int:
    return sum(len(sub.prefix) for sub in p.subprocesses)


def count_ops(seq: Sequence[LockOp], op: LockOp) -> int:
    return sum(1 for x in seq if x == op)


# -- parsing ----------------------------------------------------------------

_WS = re.compile(r"\s*")


def _split_subs(text: str):
    """Yield (offset, chunk) pairs for the ``|``-separated parts of ``text``."""
    start = 0
    for i, ch in enumerate(text + "|"):
        if ch == "|":
            yield start, text[start:i]
            start = i + 1


def _parse_terminator(chunk: str, pos: int, offset: int) -> tuple[Terminator, int]:
    """Read an optional terminator at ``pos``; return it and the position after."""
    if pos < len(chunk) and chunk[pos] in "0*":
        term = Terminator.NIL if chunk[pos] == "0" else Terminator.SUCCESS
        pos += 1
    else:
        term = Terminator.NIL
    while pos < len(chunk) and chunk[pos].isspace():
        pos += 1
    if pos < len(chunk):
        raise SyntaxError(f"unexpected {chunk[pos]!r}", offset + pos)
    return term, pos


def parse_sync(text: str) -> SyncProcess:
    """Parse e.g. ``"?!0 | !!* | ?0"``; ``*`` is success, a missing terminator means 0."""
    subs = []
    for offset, chunk in _split_subs(text):
        prefix = []
        pos = 0
        while pos < len(chunk):
            ch = chunk[pos]
            if ch.isspace():
                pos += 1
            elif ch == "!":
                prefix.append(SyncSymbol.SEND)
                pos += 1
            elif ch == "?":
                prefix.append(SyncSymbol.RECEIVE)
                pos += 1
            else:
                break
        if not prefix and not chunk[pos:].strip():
            raise SyntaxError("empty subprocess", offset + pos)
        term, _ = _parse_terminator(chunk, pos, offset)
        subs.append(SyncSubprocess(tuple(prefix), term))
    return canonicalize_sync(SyncProcess(tuple(subs)))


_LOCK_OP = re.compile(r"\s*([PpTt])\s*(\d+)")


def parse_ops(text: str, k: int | None = None, offset: int = 0) -> tuple[tuple[LockOp, ...], int]:
    """Parse a run of lock ops; return the ops and the position where parsing stopped."""
    ops = []
    pos = 0
    while True:
        m = _LOCK_OP.match(text, pos)
        if not m:
            break
        i = int(m.group(2))
        if i < 1:
            raise SyntaxError("lock indices start at 1", offset + m.start(2))
        if k is not None and i > k:
            raise IndexOutOfRange(f"op {m.group(1).upper()}{i} exceeds k={k}")
        ops.append(LockOp(i, OpKind.PUT if m.group(1) in "Pp" else OpKind.TAKE))
        pos = m.end()
    return tuple(ops), pos


def parse_op_string(text: str, k: int | None = None) -> tuple[LockOp, ...]:
    """Parse a bare op string such as ``"P1 T3 P2 T1"``; empty text or ``eps`` is the empty string."""
    if text.strip().lower() in ("", "eps", "ε"):
        return ()
    ops, pos = parse_ops(text, k)
    rest = text[pos:]
    if rest.strip():
        raise SyntaxError(f"unexpected {rest.strip()[0]!r}", pos + len(rest) - len(rest.lstrip()))
    return ops


def parse_lock(text: str, k: int) -> LockProcess:
    """Parse e.g. ``"P2 | T2 *"``; op letters are case-insensitive."""
    subs = []
    for offset, chunk in _split_subs(text):
        ops, pos = parse_ops(chunk, k, offset)
        if not ops and not chunk[pos:].strip():
            raise SyntaxError("empty subprocess", offset + pos)
        while pos < len(chunk) and chunk[pos].isspace():
            pos += 1
        term, _ = _parse_terminator(chunk, pos, offset)
        subs.append(LockSubprocess(ops, term))
    return LockProcess(canonical_tuple(subs))


def parse_store(text: str) -> Store:
    text = text.strip()
    if not text:
        raise SyntaxError("empty store")
    cells = []
    for pos, ch in enumerate(text):
        if ch in "eE":
            cells.append(CellState.EMPTY)
        elif ch in "fF":
            cells.append(CellState.FULL)
        else:
            raise SyntaxError(f"unexpected {ch!r} in store", pos)
    return tuple(cells)


def parse_pattern(text: str) -> BlockingPattern:
    text = text.strip()
    if not text:
        raise SyntaxError("empty pattern")
    out = []
    for pos, ch in enumerate(text):
        if ch not in "bBnN":
            raise SyntaxError(f"unexpected {ch!r} in pattern", pos)
        out.append(Annotation(ch.lower()))
    return tuple(out)


def parse_lock_config(store_text: str, pattern_text: str | None = None) -> LockConfig:
    store = parse_store(store_text)
    if pattern_text is None:
        pattern = (Annotation.BLOCKING,) * len(store)
    else:
        pattern = parse_pattern(pattern_text)
        if len(pattern) != len(store):
            raise LengthMismatch(
                f"pattern has length {len(pattern)} but store has length {len(store)}"
            )
    return LockConfig(len(store), pattern, store)


# -- rendering --------------------------------------------------------------


def render_sync(p: SyncProcess) -> str:
    subs = canonical_tuple(p.subprocesses)
    return " | ".join(map(str, subs)) if subs else "0"


def render_lock(p: LockProcess) -> str:
    subs = canonical_tuple(p.subprocesses)
    return " | ".join(map(str, subs)) if subs else "0"


def render_ops(ops: Iterable[LockOp]) -> str:
    return " ".join(map(str, ops))


def render_store(store: Store) -> str:
    return "".join(map(str, store))


def render_pattern(pattern: BlockingPattern) -> str:
    return "".join(map(str, pattern))
