from __future__ import annotations

import pytest

from llmke.data import mini_fixture_dir
from llmke.entity_mapping import WikidataSearch
from llmke.http import LookupStore


@pytest.fixture(scope="session")
def mini():
    return mini_fixture_dir()


class FakeSearch(WikidataSearch):
    """Candidate search served from an in-memory table."""

    def __init__(self, table: dict[str, list[dict]]):
        super().__init__(LookupStore(None))
        self.table = table
        self.calls: list[str] = []

    def _fetch(self, label):
        self.calls.append(label)
        return [dict(rank=i, aliases=[], **c) for i, c in enumerate(self.table.get(label, []))]


class ScriptedProvider:
    """Chat provider that answers from a callable; records every request."""

    name = "live"

    def __init__(self, answer):
        self.answer = answer
        self.requests = []

    def send(self, req):
        self.requests.append(req)
        return self.answer(req) if callable(self.answer) else self.answer


# criterion number -> (status, title, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"AC{n} {status:<4} {title}" + (f" ({detail})" if detail else ""))
