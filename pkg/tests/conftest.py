import os
import sys

import pytest
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from synclock.calculi import (  # noqa: E402
    LockOp,
    LockProcess,
    LockSubprocess,
    OpKind,
    SyncProcess,
    SyncSubprocess,
    SyncSymbol,
    Terminator,
)

ACCEPTANCE_LINES: list[str] = []


def to_oracle_sync(p: SyncProcess) -> tuple:
    return tuple(sorted(str(s) for s in p.subprocesses))


def to_oracle_lock(p: LockProcess) -> tuple:
    return tuple(sorted((tuple(map(str, s.prefix)), str(s.terminator)) for s in p.subprocesses))


terminators = st.sampled_from(list(Terminator))

sync_subprocesses = st.builds(
    SyncSubprocess,
    st.lists(st.sampled_from(list(SyncSymbol)), max_size=3).map(tuple),
    terminators,
)

sync_processes = st.lists(sync_subprocesses, max_size=4).map(lambda subs: SyncProcess(tuple(subs)))


def lock_ops(k: int):
    return st.builds(LockOp, st.integers(1, k), st.sampled_from(list(OpKind)))


def lock_processes(k: int, max_subs: int = 3, max_ops: int = 3):
    sub = st.builds(LockSubprocess, st.lists(lock_ops(k), max_size=max_ops).map(tuple), terminators)
    return st.lists(sub, max_size=max_subs).map(lambda subs: LockProcess(tuple(subs)))


@pytest.fixture(scope="session")
def default_corpus():
    from synclock.search import enumerate_corpus

    return enumerate_corpus()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
