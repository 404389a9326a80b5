import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# one line per acceptance criterion, filled in by test_acceptance.py
CRITERIA = {}


def record(criterion, part, ok, detail=""):
    CRITERIA.setdefault(criterion, []).append((part, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(CRITERIA):
        parts = CRITERIA[c]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}={'ok' if good else 'FAIL'} {info}".strip() for name, good, info in parts)
        terminalreporter.write_line(f"criterion {c}: {'PASS' if ok else 'FAIL'}  {detail}")
