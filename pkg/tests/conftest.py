from __future__ import annotations

from collections import OrderedDict

ACCEPTANCE: "OrderedDict[str, list]" = OrderedDict()


def record(criterion: str, part: str, ok: bool, detail: str = "") -> bool:
    """Store one sub-check of an acceptance criterion and echo it."""
    ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} {criterion} / {part} {detail}".rstrip())
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, parts in ACCEPTANCE.items():
        ok = all(ok for _, ok, _ in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {criterion}")
        for part, pok, detail in parts:
            tr.write_line(f"    {'ok  ' if pok else 'fail'} {part} {detail}".rstrip())
