"""Exhaustive refutation of candidate translations.

Candidates are enumerated in a fixed order so every ``(bang, quest)`` pair
has a stable ordinal.  Work units are ``(ordinal, store)`` pairs; each one is
refuted by a cheap necessary-condition filter, by a corpus counterexample, or
survives.  Progress can be appended to a line-delimited JSON checkpoint and
resumed after an interruption.
"""

from __future__ import annotations

import itertools
import json
import logging
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

from .analysis import ExplorationLimits, StateSpaceExceeded, SyncExplorer
from .calculi import (
    Annotation,
    CellState,
    LockConfig,
    LockOp,
    OpKind,
    Store,
    SyncProcess,
    SyncSubprocess,
    SyncSymbol,
    Terminator,
    Translation,
    canonical_tuple,
    parse_op_string,
    parse_store,
    parse_sync,
    render_ops,
    render_pattern,
    render_store,
    render_sync,
    total_symbols,
)
from .translation import (
    Checker,
    filter_blocking,
    filter_count,
    filter_full_execution,
    filter_k1,
)

log = logging.getLogger(__name__)

CHECKPOINT_SCHEMA = "synclock.checkpoint/1"
SURVIVOR_NOTE = "survived corpus - not proved correct"

SEED_CORPUS_TEXT = (
    "!*", "?*", "!* | ?*", "!!* | ??*", "!!0 | ??*", "!!* | ??0", "!0 | ?*", "!* | ?0",
)

FILTERS = ("k1", "count", "blocking", "full_execution")

_FILTER_FNS = {
    "k1": filter_k1,
    "count": filter_count,
    "blocking": filter_blocking,
    "full_execution": filter_full_execution,
}


def seed_corpus() -> list[SyncProcess]:
    return [parse_sync(text) for text in SEED_CORPUS_TEXT]


# -- corpus -----------------------------------------------------------------


@dataclass(frozen=True)
class CorpusSpec:
    max_subprocesses: int = 3
    max_prefix_len: int = 3
    replicated_max: int = 6
    include_flat_up_to: int = 5

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.max_subprocesses < 1:
            raise ValueError("max_subprocesses must be positive")


_SEND = SyncSubprocess((SyncSymbol.SEND,), Terminator.NIL)
_SEND_OK = SyncSubprocess((SyncSymbol.SEND,), Terminator.SUCCESS)
_RECV = SyncSubprocess((SyncSymbol.RECEIVE,), Terminator.NIL)
_RECV_OK = SyncSubprocess((SyncSymbol.RECEIVE,), Terminator.SUCCESS)
FLAT_ATOMS = (_SEND, _RECV, _SEND_OK, _RECV_OK)


def _multisets(items: Sequence, max_size: int) -> Iterator[SyncProcess]:
    for size in range(max_size + 1):
        for combo in itertools.combinations_with_replacement(items, size):
            yield SyncProcess(canonical_tuple(combo))


def _sort_key(p: SyncProcess):
    return (total_symbols(p), render_sync(p))


def flat_processes(n: int) -> list[SyncProcess]:
    """All parallel compositions of at most ``n`` atoms from ``!0, ?0, !*, ?*``."""
    return sorted(set(_multisets(FLAT_ATOMS, n)), key=_sort_key)


def _subprocesses(max_prefix_len: int) -> list[SyncSubprocess]:
    subs = []
    for n in range(max_prefix_len + 1):
        for prefix in itertools.product(SyncSymbol, repeat=n):
            for term in Terminator:
                if n or term is Terminator.SUCCESS:
                    subs.append(SyncSubprocess(prefix, term))
    return subs


def _replicated(n_max: int) -> Iterator[SyncProcess]:
    for n in range(1, n_max + 1):
        for many, one in ((_SEND_OK, _RECV), (_SEND_OK, _RECV_OK), (_RECV_OK, _SEND), (_RECV_OK, _SEND_OK)):
            yield SyncProcess(canonical_tuple((many,) * n + (one,)))


def enumerate_corpus(spec: CorpusSpec | None = None) -> list[SyncProcess]:
    """Seed processes first, then everything else ordered by (size, text)."""
    spec = spec or CorpusSpec()
    seeds = seed_corpus()
    rest = set(_multisets(_subprocesses(spec.max_prefix_len), spec.max_subprocesses))
    rest.update(_replicated(spec.replicated_max))
    rest.update(_multisets(FLAT_ATOMS, spec.include_flat_up_to))
    rest.difference_update(seeds)
    return seeds + sorted(rest, key=_sort_key)


# -- candidates -------------------------------------------------------------


def op_alphabet(k: int) -> tuple[LockOp, ...]:
    return tuple(LockOp(i, kind) for i in range(1, k + 1) for kind in OpKind)


def count_candidates(k: int, max_total_length: int) -> int:
    return sum((n + 1) * (2 * k) ** n for n in range(max_total_length + 1))


def enumerate_candidates(k: int, max_total_length: int) -> Iterator[tuple[int, tuple, tuple]]:
    """Yield ``(ordinal, bang, quest)`` by total length, then |bang|, then lexicographically."""
    alphabet = op_alphabet(k)
    ordinal = 0
    for n in range(max_total_length + 1):
        for a in range(n + 1):
            for bang in itertools.product(alphabet, repeat=a):
                for quest in itertools.product(alphabet, repeat=n - a):
                    yield ordinal, bang, quest
                    ordinal += 1


def candidate_at(k: int, ordinal: int) -> tuple[tuple, tuple]:
    """Inverse of the enumeration order: the pair with the given ordinal."""
    if ordinal < 0:
        raise IndexError(ordinal)
    alphabet = op_alphabet(k)
    base = 2 * k
    n = 0
    while ordinal >= (n + 1) * base**n:
        ordinal -= (n + 1) * base**n
        n += 1
    a, idx = divmod(ordinal, base**n)
    digits = []
    for _ in range(n):
        idx, d = divmod(idx, base)
        digits.append(alphabet[d])
    digits.reverse()
    return tuple(digits[:a]), tuple(digits[a:])


# -- refutation -------------------------------------------------------------


@dataclass(frozen=True)
class Outcome:
    """``tag`` is one of ``filter``, ``corpus``, ``survived``, ``exceeded``."""

    tag: str
    filter: str | None = None
    counterexample: object = None  # Counterexample when produced in-process
    source: str | None = None

    @property
    def label(self) -> str:
        return f"filter:{self.filter}" if self.tag == "filter" else self.tag


SURVIVED = Outcome("survived")


def enabled_filters(prune, k: int) -> list[str]:
    return [f for f in FILTERS if f in prune and (f != "k1" or k == 1)]


class Refuter:
    """Holds a corpus together with its precomputed source verdicts."""

    def __init__(self, corpus: Sequence[SyncProcess], limits: ExplorationLimits | None = None):
        self.limits = limits or ExplorationLimits()
        self.corpus = list(corpus)
        self.sync = SyncExplorer(self.limits)
        for p in self.corpus:
            self.sync.classify(p)

    def refute(self, candidate: Translation, prune=FILTERS, witnesses: bool = False) -> Outcome:
        for name in enabled_filters(prune, candidate.config.k):
            if not _FILTER_FNS[name](candidate):
                return Outcome("filter", name)
        checker = Checker(candidate, self.limits, self.sync, witnesses=witnesses)
        try:
            for p in self.corpus:
                cex = checker.check_one(p)
                if cex is not None:
                    return Outcome("corpus", counterexample=cex, source=str(cex.source))
        except StateSpaceExceeded as exc:
            return Outcome("exceeded", source=exc.subject)
        return SURVIVED


def refute(
    candidate: Translation,
    corpus: Sequence[SyncProcess],
    prune=FILTERS,
    limits: ExplorationLimits | None = None,
) -> Outcome:
    return Refuter(corpus, limits).refute(candidate, prune, witnesses=True)


# -- search driver ----------------------------------------------------------


def all_stores(k: int) -> list[Store]:
    return [tuple(c) for c in itertools.product(CellState, repeat=k)]


@dataclass
class SearchParams:
    k: int
    max_total_length: int
    stores: list | None = None  # None means all 2^k stores
    pattern: tuple | None = None  # None means all-b
    corpus: CorpusSpec = field(default_factory=CorpusSpec)
    prune: frozenset = frozenset(FILTERS)
    limits: ExplorationLimits = field(default_factory=ExplorationLimits)
    checkpoint_path: str | None = None
    jobs: int = 1
    details: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.max_total_length < 0:
            raise ValueError("max_total_length must be nonnegative")
        if self.stores is None:
            self.stores = all_stores(self.k)
        self.stores = [tuple(CellState(c) for c in s) for s in self.stores]
        if self.pattern is None:
            self.pattern = (Annotation.BLOCKING,) * self.k
        for s in self.stores:
            if len(s) != self.k:
                raise ValueError(f"store {render_store(s)} does not have length {self.k}")
        unknown = set(self.prune) - set(FILTERS)
        if unknown:
            raise ValueError(f"unknown filters: {sorted(unknown)}")
        self.prune = frozenset(self.prune)

    def echo(self) -> dict:
        """Parameters that determine the result (not how it is computed)."""
        return {
            "k": self.k,
            "max_total_length": self.max_total_length,
            "stores": [render_store(s) for s in self.stores],
            "pattern": render_pattern(self.pattern),
            "corpus": asdict(self.corpus),
            "prune": [f for f in FILTERS if f in self.prune],
            "max_states": self.limits.max_states,
        }


@dataclass
class SearchReport:
    params: dict
    candidates: int = 0
    candidates_total: int = 0
    refuted_by_filter: dict = field(default_factory=dict)
    refuted_by_corpus: int = 0
    counterexample_sources: dict = field(default_factory=dict)
    corpus_refutations: list = field(default_factory=list)
    survivors: list = field(default_factory=list)
    exceeded: list = field(default_factory=list)
    corpus_size: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def comparable(self) -> dict:
        d = self.to_dict()
        d.pop("wall_time")
        return d

    def consistent(self) -> bool:
        return self.candidates_total == (
            sum(self.refuted_by_filter.values())
            + self.refuted_by_corpus
            + len(self.survivors)
            + len(self.exceeded)
        )


def _record(ordinal, bang, quest, store, outcome: Outcome) -> dict:
    rec = {
        "ordinal": ordinal,
        "bang": render_ops(bang),
        "quest": render_ops(quest),
        "store": render_store(store),
        "outcome": outcome.label,
    }
    if outcome.source is not None:
        rec["cex"] = outcome.source
    return rec


# one Refuter per worker process, built by the pool initializer
_worker: dict = {}


def _init_worker(corpus_texts, params_state):
    corpus = [parse_sync(t) for t in corpus_texts]
    _worker["params"] = params_state
    _worker["refuter"] = Refuter(corpus, params_state["limits"])


def _run_range(start: int, stop: int) -> list[dict]:
    p = _worker["params"]
    refuter: Refuter = _worker["refuter"]
    k, stores, pattern, prune = p["k"], p["stores"], p["pattern"], p["prune"]
    out = []
    nstores = len(stores)
    ordinal = None
    for flat in range(start, stop):
        o, si = divmod(flat, nstores)
        if o != ordinal:
            ordinal = o
            bang, quest = candidate_at(k, o)
        store = stores[si]
        t = Translation(bang, quest, LockConfig(k, pattern, store))
        out.append(_record(o, bang, quest, store, refuter.refute(t, prune)))
    return out


def _read_checkpoint(path: str, echo: dict) -> list[dict]:
    """Completed records from ``path``; a torn final line is dropped."""
    if not os.path.exists(path):
        return []
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    if not lines or not lines[0]:
        return []
    header = json.loads(lines[0])
    if header.get("schema") != CHECKPOINT_SCHEMA or header.get("params") != echo:
        raise ValueError(f"checkpoint {path} was written for different search parameters")
    for line in lines[1:]:
        if not line:
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError:
            break
    return records


def _rewrite_checkpoint(path: str, echo: dict, records: list[dict]) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"schema": CHECKPOINT_SCHEMA, "params": echo}) + "\n")
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    os.replace(tmp, path)


def _validate_prefix(records: list[dict], k: int, stores: list) -> None:
    n = len(stores)
    for flat, rec in enumerate(records):
        o, si = divmod(flat, n)
        if rec["ordinal"] != o or rec["store"] != render_store(stores[si]):
            raise ValueError(f"checkpoint record {flat} is out of order")


def assemble_report(params: SearchParams, records: list[dict], corpus_size: int) -> SearchReport:
    report = SearchReport(params=params.echo(), corpus_size=corpus_size)
    report.candidates = count_candidates(params.k, params.max_total_length)
    filters = Counter()
    sources = Counter()
    for rec in records:
        report.candidates_total += 1
        tag = rec["outcome"]
        if tag.startswith("filter:"):
            filters[tag.split(":", 1)[1]] += 1
        elif tag == "corpus":
            report.refuted_by_corpus += 1
            sources[rec["cex"]] += 1
            if params.details:
                report.corpus_refutations.append(
                    {k: rec[k] for k in ("ordinal", "bang", "quest", "store", "cex")}
                )
        elif tag == "survived":
            report.survivors.append(
                {k: rec[k] for k in ("ordinal", "bang", "quest", "store")} | {"note": SURVIVOR_NOTE}
            )
        elif tag == "exceeded":
            report.exceeded.append({k: rec.get(k) for k in ("ordinal", "bang", "quest", "store", "cex")})
        else:
            raise ValueError(f"unknown outcome {tag!r}")
    report.refuted_by_filter = {f: filters[f] for f in enabled_filters(params.prune, params.k)}
    report.counterexample_sources = dict(sorted(sources.items(), key=lambda kv: (-kv[1], kv[0])))
    return report


def run_search(params: SearchParams, chunk_size: int = 2048, stop_after: int | None = None) -> SearchReport:
    """Refute every (candidate, store) pair.

    ``stop_after`` interrupts after that many newly processed pairs; it exists
    to exercise checkpoint resumption.
    """
    t0 = time.perf_counter()
    corpus = enumerate_corpus(params.corpus)
    echo = params.echo()
    total = count_candidates(params.k, params.max_total_length) * len(params.stores)

    records: list[dict] = []
    if params.checkpoint_path:
        records = _read_checkpoint(params.checkpoint_path, echo)
        _validate_prefix(records, params.k, params.stores)
        # rewrite drops any torn trailing line before appending
        _rewrite_checkpoint(params.checkpoint_path, echo, records)
        if records:
            log.info("resuming at pair %d of %d", len(records), total)

    state = {
        "k": params.k,
        "stores": params.stores,
        "pattern": params.pattern,
        "prune": params.prune,
        "limits": params.limits,
    }
    start = len(records)
    stop = total if stop_after is None else min(total, start + stop_after)
    ranges = [(a, min(a + chunk_size, stop)) for a in range(start, stop, chunk_size)]

    ckpt = open(params.checkpoint_path, "a", encoding="utf-8") if params.checkpoint_path else None
    try:
        if params.jobs > 1 and len(ranges) > 1:
            corpus_texts = [str(p) for p in corpus]
            with ProcessPoolExecutor(
                params.jobs, initializer=_init_worker, initargs=(corpus_texts, state)
            ) as pool:
                results = pool.map(_run_range, *zip(*ranges))
                for chunk in results:
                    _consume(chunk, records, ckpt)
        else:
            _worker["params"] = state
            _worker["refuter"] = Refuter(corpus, params.limits)
            for a, b in ranges:
                _consume(_run_range(a, b), records, ckpt)
    finally:
        if ckpt:
            ckpt.close()

    report = assemble_report(params, records, len(corpus))
    report.wall_time = time.perf_counter() - t0
    return report


def _consume(chunk: list[dict], records: list[dict], ckpt) -> None:
    records.extend(chunk)
    if ckpt:
        for rec in chunk:
            ckpt.write(json.dumps(rec) + "\n")
        ckpt.flush()


def translation_from_record(rec: dict, k: int, pattern=None) -> Translation:
    store = parse_store(rec["store"])
    pattern = pattern or (Annotation.BLOCKING,) * k
    return Translation(
        parse_op_string(rec["bang"], k), parse_op_string(rec["quest"], k), LockConfig(k, pattern, store)
    )
