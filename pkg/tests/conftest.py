import pytest


def pytest_terminal_summary(terminalreporter):
    # Acceptance criteria print one line each; repeat them at the end.
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture
def arithmetic_text():
    return """
individual 0;
concept N;
op Succ(N);
def 0 ::= ∅;
def Succ(N) ::= {N, {N}};
def N ::= {0} ∪ Succ(N);
"""
