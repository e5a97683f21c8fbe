from __future__ import annotations

import pytest

_VERDICTS: dict[int, str] = {}


@pytest.fixture
def verdict(request):
    """Record one pass/fail line per acceptance criterion, then assert it."""
    seen = []

    def record(num: int, ok: bool, detail: str):
        line = f"criterion {num:2d}  {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS[num] = line
        seen.append(num)
        print(line)
        assert ok, line

    yield record
    num = getattr(request.function, "criterion", None)
    if num is not None and num not in seen:
        _VERDICTS[num] = f"criterion {num:2d}  FAIL  raised before reaching a verdict"


def criterion(num: int):
    def mark(fn):
        fn.criterion = num
        return fn
    return mark


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_VERDICTS):
        terminalreporter.write_line(_VERDICTS[num])
