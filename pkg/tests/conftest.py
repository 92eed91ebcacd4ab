import json

import pytest

from linpot import ScenarioTables, reference_scenario
from linpot.cli import main as cli_main


@pytest.fixture(scope="session")
def ref_tables():
    """Reference scenario tables: m=1, f=cos t, a0=d=d0=1, b0=2, T=1.8."""
    return ScenarioTables(reference_scenario())


@pytest.fixture(scope="session")
def zero_drive_tables():
    return ScenarioTables(reference_scenario(drive="constant:0.0"))


@pytest.fixture(scope="session")
def verify_run(tmp_path_factory):
    """One full CLI verification run shared by the CLI and acceptance tests."""
    out = tmp_path_factory.mktemp("verify")
    code = cli_main(["verify", "--out", str(out)])
    report = json.loads((out / "verify_report.json").read_text())
    return code, report, out


def check_value(report, name):
    for c in report["checks"]:
        if c["name"] == name:
            return c
    raise AssertionError(f"check {name!r} missing from the report")
