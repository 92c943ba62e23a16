"""Command-line front end.

Exit codes: 0 for a negative/expected result, 1 for a finding (counterexample,
survivor, or a standardization mismatch), 2 for operational errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .analysis import (
    ExplorationLimits,
    StateSpaceExceeded,
    classify_lock,
    classify_sync,
    fail_witness,
    success_witness,
    translation_blocking_type,
)
from .calculi import (
    LockConfig,
    LockState,
    Translation,
    parse_lock,
    parse_lock_config,
    parse_op_string,
    parse_sync,
    render_ops,
    render_pattern,
    render_store,
    total_symbols,
)
from .search import (
    FILTERS,
    CorpusSpec,
    SearchParams,
    enumerate_corpus,
    run_search,
)
from .translation import (
    BUILTIN_NAMES,
    apply_translation,
    builtin,
    check_translation,
    filter_blocking,
    filter_count,
    filter_full_execution,
    filter_k1,
    standardize,
)

REPORT_SCHEMA = "synclock.report/1"

EXIT_OK, EXIT_FINDING, EXIT_ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


def _class_dict(c) -> dict:
    return {"may": c.may_convergent, "must": c.must_convergent}


def _emit(args, command: str, params: dict, t0: float, **fields) -> None:
    doc = {
        "schema": REPORT_SCHEMA,
        "command": command,
        "params": params,
        "verdicts": fields.pop("verdicts", []),
        "counterexamples": fields.pop("counterexamples", []),
        "survivors": fields.pop("survivors", []),
        "counts": fields.pop("counts", {}),
    }
    doc.update(fields)
    doc["wall_time_ms"] = round((time.perf_counter() - t0) * 1000, 3)
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _limits(args) -> ExplorationLimits:
    return ExplorationLimits(args.max_states)


def _corpus_spec(args) -> CorpusSpec:
    return CorpusSpec(args.max_subprocesses, args.max_prefix_len, args.replicated_max, args.flat_up_to)


def _config(args) -> LockConfig:
    if args.store is None:
        raise UsageError("--store is required")
    return parse_lock_config(args.store, args.pattern)


def _translation(args) -> Translation:
    if args.builtin:
        if args.bang is not None or args.quest is not None:
            raise UsageError("--builtin cannot be combined with --bang/--quest")
        return builtin(args.builtin)
    if args.bang is None or args.quest is None:
        raise UsageError("give --builtin or both --bang and --quest")
    cfg = _config(args)
    return Translation(parse_op_string(args.bang, cfg.k), parse_op_string(args.quest, cfg.k), cfg)


def _translation_params(t: Translation) -> dict:
    return {
        "bang": render_ops(t.bang),
        "quest": render_ops(t.quest),
        "store": render_store(t.config.initial_store),
        "pattern": render_pattern(t.config.pattern),
        "length": t.length,
    }


def _print_trace(label: str, trace) -> None:
    if trace is None:
        print(f"{label}: none")
        return
    print(f"{label} ({len(trace)} steps):")
    for line in trace.lines():
        print(line)


# -- commands ---------------------------------------------------------------


def cmd_classify(args) -> int:
    t0 = time.perf_counter()
    limits = _limits(args)
    if args.calculus == "sync":
        start = parse_sync(args.process)
        cfg = None
        verdict = classify_sync(start, limits)
    else:
        cfg = _config(args)
        start = LockState(parse_lock(args.process, cfg.k), cfg.initial_store)
        verdict = classify_lock(start, cfg, limits)
    ok = success_witness(start, cfg, limits) if args.trace else None
    bad = fail_witness(start, cfg, limits) if args.trace else None
    if args.json:
        extra = {}
        if args.trace:
            extra["success_witness"] = ok.to_dict() if ok else None
            extra["fail_witness"] = bad.to_dict() if bad else None
        _emit(
            args,
            "classify",
            {"calculus": args.calculus, "process": args.process, "store": args.store, "pattern": args.pattern},
            t0,
            verdicts=[{"subject": str(start), **_class_dict(verdict)}],
            **extra,
        )
    else:
        print(f"{start}: {verdict}")
        if args.trace:
            _print_trace("success witness", ok)
            _print_trace("fail witness", bad)
    return EXIT_OK


def cmd_trace(args) -> int:
    args.trace = True
    return cmd_classify(args)


def cmd_translate(args) -> int:
    t0 = time.perf_counter()
    t = _translation(args)
    p = parse_sync(args.process)
    image = apply_translation(t, p)
    if args.json:
        _emit(args, "translate", _translation_params(t) | {"process": str(p)}, t0,
              image=str(image), counts={"source_symbols": total_symbols(p), "image_symbols": total_symbols(image)})
    else:
        print(image)
    return EXIT_OK


def cmd_check(args) -> int:
    t0 = time.perf_counter()
    t = _translation(args)
    corpus = enumerate_corpus(_corpus_spec(args))
    verdict = check_translation(t, corpus, _limits(args))
    params = _translation_params(t) | {"corpus_size": len(corpus)}
    cex = verdict.counterexample
    if args.json:
        _emit(
            args, "check", params, t0,
            verdicts=[{"translation": str(t), "status": verdict.status.value}],
            counterexamples=[cex.to_dict()] if cex else [],
        )
    else:
        print(t)
        if verdict.survives:
            print(f"survives: no counterexample in corpus of {len(corpus)} processes (not a proof of correctness)")
        else:
            print(f"refuted by {cex.source}")
            print(f"  source {cex.source}: {cex.source_class}")
            print(f"  image  {cex.image}: {cex.image_class}")
            _print_trace("witness", cex.witness)
    return EXIT_OK if verdict.survives else EXIT_FINDING


def _parse_stores(text: str, k: int) -> list | None:
    if text == "all":
        return None
    stores = [parse_lock_config(s).initial_store for s in text.split(",") if s.strip()]
    for s in stores:
        if len(s) != k:
            raise UsageError(f"store {render_store(s)} does not have length {k}")
    return stores


def cmd_search(args) -> int:
    if args.no_prune:
        prune = frozenset()
    elif args.prune is not None:
        prune = frozenset(f.strip() for f in args.prune.split(",") if f.strip())
    else:
        prune = frozenset(FILTERS)
    params = SearchParams(
        k=args.k,
        max_total_length=args.max_len,
        stores=_parse_stores(args.stores, args.k),
        pattern=parse_lock_config("e" * args.k, args.pattern).pattern if args.pattern else None,
        corpus=_corpus_spec(args),
        prune=prune,
        limits=_limits(args),
        checkpoint_path=args.checkpoint,
        jobs=args.jobs,
        details=args.details,
    )
    report = run_search(params)
    if report.exceeded:
        log.error("%d pairs exceeded the state limit", len(report.exceeded))
    if args.json:
        doc = {
            "schema": REPORT_SCHEMA,
            "command": "search",
            "params": report.params,
            "verdicts": [],
            "counterexamples": report.corpus_refutations,
            "survivors": report.survivors,
            "counts": {
                "candidates": report.candidates,
                "candidates_total": report.candidates_total,
                "refuted_by_filter": report.refuted_by_filter,
                "refuted_by_corpus": report.refuted_by_corpus,
                "survivors": len(report.survivors),
                "exceeded": len(report.exceeded),
                "corpus_size": report.corpus_size,
            },
            "counterexample_sources": report.counterexample_sources,
            "exceeded": report.exceeded,
            "wall_time_ms": round(report.wall_time * 1000, 3),
        }
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        print(
            f"k={params.k} max-len={params.max_total_length} stores="
            f"{','.join(render_store(s) for s in params.stores)} corpus={report.corpus_size} processes"
        )
        print(f"candidate-store pairs: {report.candidates_total} ({report.candidates} candidates)")
        for name, n in report.refuted_by_filter.items():
            print(f"  refuted by filter {name}: {n}")
        print(f"  refuted by corpus: {report.refuted_by_corpus}")
        for src, n in list(report.counterexample_sources.items())[:10]:
            print(f"    {n:8d}  {src}")
        print(f"  survivors: {len(report.survivors)}")
        for s in report.survivors:
            print(f"    #{s['ordinal']} ({s['bang'] or 'eps'}, {s['quest'] or 'eps'}) store {s['store']}: {s['note']}")
        if report.exceeded:
            print(f"  state limit exceeded: {len(report.exceeded)}")
        print(f"wall time: {report.wall_time:.2f}s")
    if report.exceeded:
        return EXIT_ERROR
    return EXIT_FINDING if report.survivors else EXIT_OK


def cmd_blocking_type(args) -> int:
    t0 = time.perf_counter()
    t = _translation(args)
    w1, w2 = translation_blocking_type(t)
    filters = {
        "count": filter_count(t),
        "blocking": filter_blocking(t),
        "full_execution": filter_full_execution(t),
    }
    if t.config.k == 1:
        filters["k1"] = filter_k1(t)
    if args.json:
        _emit(args, "blocking-type", _translation_params(t), t0,
              verdicts=[{"bang": str(w1), "quest": str(w2), "filters": filters}])
    else:
        print(f"blocking type: ({w1}, {w2})")
        for name, ok in filters.items():
            print(f"  filter {name}: {'pass' if ok else 'fail'}")
    return EXIT_OK


def cmd_standardize(args) -> int:
    t0 = time.perf_counter()
    cfg = parse_lock_config(args.store, args.pattern)
    p = parse_lock(args.process, cfg.k)
    cfg2, p2 = standardize(cfg, p)
    before = after = None
    if args.verify:
        before = classify_lock(p, cfg, _limits(args))
        after = classify_lock(p2, cfg2, _limits(args))
    mismatch = args.verify and before != after
    if args.json:
        verdicts = []
        if args.verify:
            verdicts = [{"subject": "original", **_class_dict(before)}, {"subject": "standardized", **_class_dict(after)}]
        _emit(args, "standardize", {"store": args.store, "pattern": args.pattern, "process": args.process}, t0,
              verdicts=verdicts, store=render_store(cfg2.initial_store), pattern=render_pattern(cfg2.pattern),
              process=str(p2))
    else:
        print(f"pattern {render_pattern(cfg2.pattern)}  store {render_store(cfg2.initial_store)}")
        print(p2)
        if args.verify:
            print(f"original: {before}")
            print(f"standardized: {after}")
            print("MISMATCH: standardization changed the classification" if mismatch else "classifications agree")
    return EXIT_FINDING if mismatch else EXIT_OK


def cmd_corpus(args) -> int:
    t0 = time.perf_counter()
    corpus = enumerate_corpus(_corpus_spec(args))
    if args.json:
        _emit(args, "corpus", {"corpus": vars(_corpus_spec(args))}, t0,
              processes=[str(p) for p in corpus], counts={"processes": len(corpus)})
    elif args.count:
        print(len(corpus))
    else:
        for p in corpus:
            print(p)
    return EXIT_OK


# -- argument parsing -------------------------------------------------------

log = logging.getLogger("synclock")


def _add_limits(p):
    p.add_argument("--max-states", type=int, default=10_000_000, help="state budget per exploration")


def _add_corpus(p):
    d = CorpusSpec()
    p.add_argument("--max-subprocesses", type=int, default=d.max_subprocesses)
    p.add_argument("--max-prefix-len", type=int, default=d.max_prefix_len)
    p.add_argument("--replicated-max", type=int, default=d.replicated_max)
    p.add_argument("--flat-up-to", type=int, default=d.include_flat_up_to)


def _add_translation(p):
    p.add_argument("--builtin", choices=BUILTIN_NAMES)
    p.add_argument("--bang", help="op string for !, e.g. 'P1 T3 P2 T1' ('' for empty)")
    p.add_argument("--quest", help="op string for ?")
    p.add_argument("--store", help="initial store over {e,f}, e.g. eff")
    p.add_argument("--pattern", help="blocking pattern over {b,n}; default all b")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synclock",
        description="May/must-convergence workbench for send/receive processes and their lock translations.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, text in (("classify", cmd_classify, "classify a process"),
                           ("trace", cmd_trace, "print success and fail witnesses")):
        p = sub.add_parser(name, help=text)
        p.add_argument("calculus", choices=("sync", "lock"))
        p.add_argument("process")
        p.add_argument("--store")
        p.add_argument("--pattern")
        p.add_argument("--trace", action="store_true")
        p.add_argument("--json", action="store_true")
        _add_limits(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("translate", help="apply a translation to a process")
    _add_translation(p)
    p.add_argument("process")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("check", help="check a translation against a corpus")
    _add_translation(p)
    _add_corpus(p)
    _add_limits(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="refute all candidate translations up to a length")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--max-len", type=int, required=True)
    p.add_argument("--stores", default="all", help="'all' or comma-separated stores, e.g. e,f")
    p.add_argument("--pattern")
    p.add_argument("--prune", help=f"comma-separated subset of {','.join(FILTERS)}")
    p.add_argument("--no-prune", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--checkpoint")
    p.add_argument("--details", action="store_true", help="list every corpus refutation in the report")
    p.add_argument("--json", action="store_true")
    _add_corpus(p)
    _add_limits(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("blocking-type", help="blocking type and filter results of a translation")
    _add_translation(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_blocking_type)

    p = sub.add_parser("standardize", help="rewrite into the all-Put-blocking language")
    p.add_argument("--pattern", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--process", required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_limits(p)
    p.set_defaults(func=cmd_standardize)

    p = sub.add_parser("corpus", help="list the process corpus")
    _add_corpus(p)
    p.add_argument("--count", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, KeyError, StateSpaceExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
