"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

from collections import OrderedDict

ACCEPTANCE = OrderedDict()


def record(criterion: int, title: str, part: str, passed: bool, detail: str = "") -> None:
    entry = ACCEPTANCE.setdefault(criterion, {"title": title, "parts": []})
    entry["parts"].append((part, passed, detail))


def acceptance_lines() -> list[str]:
    lines = []
    for n, entry in sorted(ACCEPTANCE.items()):
        ok = all(p for _, p, _ in entry["parts"])
        parts = "; ".join(f"{name}: {'ok' if p else 'FAIL'}{' (' + d + ')' if d else ''}"
                          for name, p, d in entry["parts"])
        lines.append(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {entry['title']} | {parts}")
    return lines


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in acceptance_lines():
        terminalreporter.write_line(line)
