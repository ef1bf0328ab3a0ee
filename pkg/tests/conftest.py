from __future__ import annotations

from pathlib import Path

import pytest

import termforge as tf

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
COPD_DIR = FIXTURES / "readv3-copd-sample"
READV2_DIR = FIXTURES / "readv2-resp-sample"
ICD10_DIR = FIXTURES / "icd10-injury-sample"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def _build_db(tmp_path_factory, kind: str, source: Path, label: str) -> Path:
    tmp = tmp_path_factory.mktemp(label)
    db = tmp / f"{label}.sqlite"
    adapter = tf.resolve_adapter(kind)
    handle = tf.open_store(
        tf.StoreConfig(type="sqlite", dbname=str(db)), tf.StoreMode.READ_WRITE
    )
    with handle:
        tf.build_concept_tables(handle, adapter, tf.SourceBundle.from_dir(adapter, source))
    return db


@pytest.fixture(scope="session")
def copd_db(tmp_path_factory) -> Path:
    return _build_db(tmp_path_factory, tf.READ_V3, COPD_DIR, "copd")


@pytest.fixture(scope="session")
def readv2_db(tmp_path_factory) -> Path:
    return _build_db(tmp_path_factory, tf.READ_V2, READV2_DIR, "readv2")


@pytest.fixture(scope="session")
def icd10_db(tmp_path_factory) -> Path:
    return _build_db(tmp_path_factory, tf.ICD10, ICD10_DIR, "icd10")


@pytest.fixture
def copd(copd_db):
    """Fresh read-only handle over the built COPD sample, plus its adapter."""
    handle = tf.open_store(tf.StoreConfig(type="sqlite", dbname=str(copd_db)))
    yield handle, tf.resolve_adapter(tf.READ_V3)
    handle.close()


@pytest.fixture
def readv2(readv2_db):
    handle = tf.open_store(tf.StoreConfig(type="sqlite", dbname=str(readv2_db)))
    yield handle, tf.resolve_adapter(tf.READ_V2)
    handle.close()


@pytest.fixture
def icd10(icd10_db):
    handle = tf.open_store(tf.StoreConfig(type="sqlite", dbname=str(icd10_db)))
    yield handle, tf.resolve_adapter(tf.ICD10)
    handle.close()


@pytest.fixture
def registry_snapshot():
    """Save and restore the adapter registry around tests that register kinds."""
    from termforge import model

    saved = dict(model._REGISTRY)
    yield
    model._REGISTRY.clear()
    model._REGISTRY.update(saved)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion."""
    rows = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance.py::" in rep.nodeid and rep.when == "call":
                rows.append((rep.nodeid.split("::")[-1], rep.outcome == "passed"))
    for rep in terminalreporter.stats.get("error", []):
        if "test_acceptance.py::" in rep.nodeid:
            rows.append((rep.nodeid.split("::")[-1], False))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in sorted(set(rows)):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
