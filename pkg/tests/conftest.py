import shutil
import sys
from pathlib import Path

import pytest

from iotforge.project import CORPORA, corpus_path, load_project

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    n, title = marker
    entry = _criteria.setdefault(n, {"title": title, "ok": True})
    if report.failed or (report.when == "call" and report.skipped):
        entry["ok"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        entry = _criteria[n]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {entry['title']}")


@pytest.fixture(scope="session")
def projects():
    out = {}
    for name in CORPORA:
        project, diags = load_project(corpus_path(name))
        assert project is not None, [d.render() for d in diags]
        out[name] = project
    return out


@pytest.fixture
def copy_corpus(tmp_path):
    """Copy a bundled case study into a writable directory."""
    def copy(name):
        dest = tmp_path / name
        shutil.copytree(corpus_path(name), dest, ignore=shutil.ignore_patterns("__pycache__"))
        return dest

    return copy
