from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
CORPUS = Path(__file__).resolve().parent / "corpus"
SAMPLES = ROOT / "samples"

_criteria: dict[int, tuple[str, list[str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion checked by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    n, title = marker.args
    entry = _criteria.setdefault(n, (title, []))
    if rep.failed or (rep.when == "call" and rep.outcome != "passed"):
        entry[1].append(rep.outcome)
    elif rep.when == "call":
        entry[1].append("passed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, outcomes = _criteria[n]
        ok = outcomes and all(o == "passed" for o in outcomes)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}")


@pytest.fixture
def ofdm_paths():
    return SAMPLES / "ofdm" / "ofdm_rx.wdl", SAMPLES / "ofdm" / "board.bsp"
