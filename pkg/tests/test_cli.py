"""
test_cli module
===============

Tests for ``oscillation_lab.cli``.

Covers:
- Building instance documents from the catalog
- Each subcommand's output file and exit code
- Exit codes for input errors, flagged resolution and invariant violations
- Byte-identical outputs for any number of jobs
- Run configuration files, the run ledger and the archive
"""

import json
import math

import pytest
from freezegun import freeze_time

from oscillation_lab import cli
from oscillation_lab.db import RunLedger
from oscillation_lab.descriptors import dump_instance, load_instance
from oscillation_lab.errors import InvariantViolation
from oscillation_lab.metric_core import MatrixSpace
from oscillation_lab.oscillation import DIVERGING, OMEGA_SET, STABILIZED
from oscillation_lab.ucset import DEFECT


@pytest.fixture
def comb_file():
    assert cli.main(["catalog", "build", "comb", "--param", "M=4", "--out", "comb.json"]) == cli.EXIT_OK
    return "comb.json"


def test_catalog_list():
    assert cli.main(["catalog", "list", "--out", "catalog.json"]) == cli.EXIT_OK
    with open("catalog.json", encoding="utf-8") as f:
        listing = json.load(f)
    assert [entry["name"] for entry in listing] == sorted(entry["name"] for entry in listing)
    assert {"name": "comb", "defaults": {"M": 8}} in listing


def test_catalog_build(comb_file):
    inst = load_instance(comb_file)
    assert inst.name == "comb"
    assert inst.parameters["M"] == 4
    assert len(inst.space) == 4**3 + 1 + 4 * 4**2


def test_catalog_build_with_transform():
    args = ["catalog", "build", "cross", "--param", "T=4", "--param", "pitch=1/2", "--transform", "f"]
    assert cli.main(args) == cli.EXIT_OK
    inst = load_instance("cross_transformed.json")
    assert isinstance(inst.space, MatrixSpace)
    assert len(inst.space) == 45


def test_oscillation_profile(comb_file):
    args = ["oscillation", "--space", comb_file, "--subset", "axis", "--depth", "3", "--out", "axis.csv"]
    assert cli.main(args) == cli.EXIT_OK
    with open("axis.csv", encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == "kind,n,value"
    rows = [line.split(",") for line in lines[1:4]]
    assert [row[:2] for row in rows] == [[OMEGA_SET, "1"], [OMEGA_SET, "2"], [OMEGA_SET, "3"]]
    assert all(float(row[2]) == 1.0 for row in rows)
    assert lines[4] == f"# verdict_{OMEGA_SET}={STABILIZED}"


@pytest.fixture
def instance_files(comb_file, bumps12):
    dump_instance(bumps12, "bumps.json")
    assert cli.main(["catalog", "build", "isolated_ladder", "--param", "K=50", "--out", "ladder.json"]) == cli.EXIT_OK
    return {"comb": comb_file, "bumps": "bumps.json", "ladder": "ladder.json"}


@pytest.mark.parametrize(
    "command,args",
    [
        ("oscillation", ["--space", "comb", "--subset", "column_2", "--kind", "Omega", "--kind", "Omega_star",
                         "--depth", "6"]),
        ("hausdorff", ["--space", "comb", "--set-sequence", "columns", "--subset", "axis"]),
        ("uc-scan", ["--space", "ladder", "--subset", "A", "--function", "zero", "--delta", "0.5",
                     "--separation", "1.0", "--depth", "10"]),
        ("converge", ["--space", "comb", "--sequence", "perturbed", "--subset", "axis", "--eps", "1/2"]),
        ("converge", ["--space", "bumps"]),
    ],
    ids=["oscillation", "wijsman", "uc-scan", "converge-sequence", "converge-product-net"],
)
def test_outputs_do_not_depend_on_jobs(instance_files, command, args):
    args = [instance_files.get(arg, arg) for arg in args]
    outputs = []
    for jobs in ("1", "4", "8"):
        out = f"out_{jobs}"
        assert cli.main([command, *args, "--jobs", jobs, "--out", out]) == cli.EXIT_OK
        with open(out, "rb") as f:
            outputs.append(f.read())
    assert outputs[0] == outputs[1] == outputs[2]


def test_hausdorff_prints_json(comb_file, capsys):
    args = ["hausdorff", "--space", comb_file, "--subset", "axis", "--subset", "column_1", "--eps", "2"]
    assert cli.main(args) == cli.EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert (payload["A"], payload["B"]) == ("axis", "column_1")
    assert abs(payload["hausdorff"] - math.sqrt(2)) <= 1e-12
    assert abs(payload["functional_gap"] - payload["hausdorff"]) <= 1e-12
    assert payload["mutual_containment"] is True


def test_converge_sequence(comb_file):
    args = ["converge", "--space", comb_file, "--sequence", "perturbed", "--subset", "axis", "--eps", "1/2",
            "--out", "perturbed.csv"]
    assert cli.main(args) == cli.EXIT_OK
    with open("perturbed.csv", encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == "check,index,value,detail"
    assert lines[1].startswith("strong,")
    assert lines[2].startswith("very_strong,")
    assert "# delta_depth=2" in lines


def test_converge_product_net(bumps12):
    dump_instance(bumps12, "bumps.json")
    assert cli.main(["converge", "--space", "bumps.json", "--out", "net.csv"]) == cli.EXIT_OK
    with open("net.csv", encoding="utf-8") as f:
        text = f.read()
    assert text.startswith("check,index,value,detail\nrow,1,true,")
    assert "# rows_ok=true\n# diagonal_fails=true\n# resolving_K=1025\n" in text
    assert "diagonal,1/16,unresolved," in text


def test_uc_scan_on_the_ladder():
    assert cli.main(["catalog", "build", "isolated_ladder", "--param", "K=50", "--out", "ladder.json"]) == cli.EXIT_OK
    args = ["uc-scan", "--space", "ladder.json", "--subset", "A", "--function", "zero", "--delta", "0.5",
            "--separation", "1.0", "--depth", "10"]
    assert cli.main(args) == cli.EXIT_OK
    with open("uc_scan.json", encoding="utf-8") as f:
        payload = json.load(f)
    assert payload["scan"]["verdict"] == DEFECT
    assert payload["pair"] is not None
    assert payload["witness_verdict"] == DIVERGING
    assert payload["consistent"] is True
    assert [p["function"] for p in payload["profiles"]] == ["zero"]


def test_flagged_resolution_exits_3_after_writing(real_line50):
    dump_instance(real_line50, "line.json")
    args = ["uc-scan", "--space", "line.json", "--subset", "A", "--delta", "0.09", "--depth", "4", "--out", "scan.json"]
    assert cli.main(args) == cli.EXIT_RESOLUTION
    with open("scan.json", encoding="utf-8") as f:
        payload = json.load(f)
    assert payload["scan"]["flags"] == ["delta_below_resolution"]


@pytest.mark.parametrize(
    "args",
    [
        ["oscillation", "--subset", "axis"],
        ["oscillation", "--space", "comb.json", "--subset", "spine"],
        ["oscillation", "--space", "missing.json", "--subset", "axis"],
        ["oscillation", "--space", "comb.json", "--kind", "omega"],
        ["oscillation", "--space", "comb.json", "--subset", "axis", "--depth", "0"],
        ["oscillation", "--space", "comb.json", "--subset", "axis", "--kind", "sigma"],
        ["hausdorff", "--space", "comb.json", "--subset", "axis"],
        ["converge", "--space", "comb.json", "--sequence", "tents"],
        ["converge", "--space", "comb.json", "--sequence", "perturbed", "--eps", "half"],
        ["catalog", "build", "comb", "--param", "M=2"],
        ["catalog", "build", "comb", "--param", "M"],
        ["catalog", "build"],
    ],
    ids=[
        "no-space",
        "unknown-subset",
        "missing-file",
        "omega-needs-point",
        "depth",
        "kind",
        "one-subset",
        "unknown-sequence",
        "eps",
        "builder-range",
        "param-syntax",
        "no-name",
    ],
)
def test_input_errors_exit_2(comb_file, args):
    assert cli.main(args) == cli.EXIT_INPUT


def test_invariant_violation_exits_4(comb_file, monkeypatch):
    def broken(*args, **kwargs):
        raise InvariantViolation("Omega_2 > Omega_1")

    monkeypatch.setattr(cli, "Omega_profile", broken)
    args = ["oscillation", "--space", comb_file, "--subset", "axis", "--ledger", "runs.db"]
    assert cli.main(args) == cli.EXIT_INVARIANT
    ledger = RunLedger("runs.db")
    row = ledger.conn.execute("SELECT verdict, exit_code, output_path FROM runs").fetchone()
    ledger.close()
    assert row == ("invariant_violation", 4, None)


def test_config_file_with_flag_override(comb_file):
    with open("run.json", "w", encoding="utf-8") as f:
        json.dump({"space": comb_file, "subsets": ["axis"], "depth": 5, "out": "from_config.csv"}, f)
    assert cli.main(["oscillation", "--config", "run.json", "--depth", "2"]) == cli.EXIT_OK
    with open("from_config.csv", encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert len([line for line in lines if line.startswith(OMEGA_SET)]) == 2


def test_malformed_config_file_exits_2(comb_file):
    with open("run.json", "w", encoding="utf-8") as f:
        f.write('{"space": "comb.json", "width": 3}')
    assert cli.main(["oscillation", "--config", "run.json"]) == cli.EXIT_INPUT


def test_ledger_keeps_the_first_run(comb_file):
    args = ["oscillation", "--space", comb_file, "--subset", "axis", "--depth", "2", "--ledger", "runs.db"]
    with freeze_time("2025-01-01 10:00:00"):
        assert cli.main(args) == cli.EXIT_OK
    with freeze_time("2025-01-02 11:30:00"):
        assert cli.main(args) == cli.EXIT_OK
    ledger = RunLedger("runs.db")
    rows = ledger.conn.execute("SELECT command, verdict, exit_code, output_path, first_seen, last_seen FROM runs").fetchall()
    ledger.close()
    assert rows == [
        (
            "oscillation",
            f"verdict_{OMEGA_SET}={STABILIZED}",
            0,
            "profile.csv",
            "2025-01-01T10:00:00Z",
            "2025-01-02T11:30:00Z",
        )
    ]


def test_archive_copies_the_output(comb_file, tmp_path):
    args = ["oscillation", "--space", comb_file, "--subset", "axis", "--depth", "2", "--out", "axis.csv",
            "--archive", "archive"]
    with freeze_time("2025-03-04 05:06:07"):
        assert cli.main(args) == cli.EXIT_OK
    stamped = tmp_path / "archive" / "oscillation" / "20250304T050607Z" / "axis.csv"
    latest = tmp_path / "archive" / "oscillation" / "latest" / "axis.csv"
    assert stamped.read_bytes() == (tmp_path / "axis.csv").read_bytes()
    assert latest.read_bytes() == stamped.read_bytes()
