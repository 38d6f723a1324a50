import pytest

_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion."""
    store = request.config.stash[_KEY]

    def record(label: str, ok: bool, info: str):
        store[label] = (ok, info)
        print(f"[{'PASS' if ok else 'FAIL'}] {label}: {info}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_KEY, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(store, key=lambda s: int(s.split()[0].rstrip("."))):
        ok, info = store[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({info})")
