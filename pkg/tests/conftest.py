import json
from pathlib import Path

import pytest

from counterarg.corpus import parse_argument_record
from counterarg.synthetic import argument_records

FIXTURES = Path(__file__).parent / "fixtures"

_criteria: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome for the end-of-run summary."""

    def record(name: str, ok: bool, detail: str = "") -> bool:
        _criteria.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _criteria:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())


def synthetic_arguments(n: int, seed: int):
    return [parse_argument_record(json.dumps(r)) for r in argument_records(n, seed=seed)]
