from collections import OrderedDict

import pytest

_RESULTS = OrderedDict()


class Recorder:
    def __call__(self, criterion: int, part: str, passed: bool, detail: str = ""):
        _RESULTS.setdefault(criterion, []).append((part, bool(passed), detail))
        return passed


@pytest.fixture(scope="session")
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_RESULTS):
        parts = _RESULTS[crit]
        ok = all(p for _, p, _ in parts)
        detail = "; ".join(f"{name}: {'ok' if p else 'FAIL'} {d}".rstrip() for name, p, d in parts)
        tr.write_line(f"criterion {crit:2d} {'PASS' if ok else 'FAIL'} | {detail}")
