import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lrmimo.mimo import draw_channel  # noqa: E402

_CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def channel_qr():
    """(channel, q, r) for a seeded Rayleigh draw; call with (n_t, seed)."""

    def make(n_t, seed):
        ch = draw_channel(n_t, n_t, np.random.default_rng(seed))
        q, r = ch.qr
        return ch, q, r

    return make


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the test body sets ``.detail`` and the outcome is read after the call."""

    class Record:
        detail = ""

    rec = Record()
    yield rec
    failed = getattr(request.node, "rep_call", None)
    ok = failed is not None and failed.passed
    _CRITERIA.append((request.node.name, ok, rec.detail))


@pytest.hookimpl(hookwrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
