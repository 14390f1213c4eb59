import pytest

from mlterm.corpus import Corpus, Sentence

_acceptance_lines = []


def record_acceptance(line: str) -> None:
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture
def toy_domain():
    return Corpus([Sentence.from_words("a b a c".split())], "domain")


@pytest.fixture
def toy_background():
    return Corpus([Sentence.from_words("b b c d".split())], "background")


@pytest.fixture
def toy_table(toy_domain, toy_background):
    from mlterm.termhood import TermhoodTable

    return TermhoodTable.from_corpora(toy_domain, toy_background)
