"""Collects one status line per acceptance criterion for the terminal summary."""

LINES = {}


def record(number, ok, detail, soft=False):
    status = "PASS" if ok else ("FLAG" if soft else "FAIL")
    LINES[number] = f"criterion {number:2d}: {status}  {detail}"
    print(LINES[number])
    return ok
