"""Collects one verdict line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(number: int, title: str, checks: dict[str, bool], detail: str) -> bool:
    ok = all(checks.values())
    failed = [name for name, good in checks.items() if not good]
    verdict = "PASS" if ok else "FAIL (" + ", ".join(failed) + ")"
    line = f"criterion {number:2d} [{title}]: {verdict}; {detail}"
    LINES.append(line)
    print(line, flush=True)
    return ok
