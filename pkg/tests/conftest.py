import pytest

ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


@pytest.fixture
def record(request):
    """Store a criterion's verdict line for the terminal summary."""
    lines = request.config.stash[ACCEPTANCE]

    def _record(number: int, title: str, checks: list[tuple[str, bool, str]]) -> bool:
        ok = all(c[1] for c in checks)
        failed = "; ".join(f"{name}: {detail}" for name, good, detail in checks if not good)
        lines[number] = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{failed}]" if failed else "")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[ACCEPTANCE]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])
