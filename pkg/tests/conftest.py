import pytest

# Filled by the acceptance suite: (number, title, passed, detail).
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Usage: ``acceptance(n, title)`` then ``acceptance.detail = "..."``. The
    line is marked FAIL unless the test body finishes without raising.
    """
    record = {}

    def start(number, title):
        record.update(number=number, title=title, detail="")
        return record

    yield start
    if record:
        rep = getattr(request.node, "rep_call", None)
        passed = rep is not None and rep.passed
        line = (record["number"], record["title"], passed, record["detail"])
        ACCEPTANCE_LINES.append(line)
        print(f"\n{_format(line)}")


def _format(line):
    number, title, passed, detail = line
    text = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}: {title}"
    return text + (f" [{detail}]" if detail else "")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(_format(line))
