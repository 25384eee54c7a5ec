import csv
import json

import pytest
from flask.testing import FlaskCliRunner

from panelmendel import app
from panelmendel.engine.fixtures import handcrafted
from panelmendel.formats import pedigree_to_dict

BROKEN = {"familyId": "broken", "counseleeId": "a",
          "members": [{"id": "a", "sex": "female", "age": 40, "cancers": [{"cancer": "lung", "age": 30}]}]}


@pytest.fixture
def runner() -> FlaskCliRunner:
    return app.test_cli_runner(mix_stderr=False)


@pytest.fixture
def pedigrees(tmp_path):
    path = tmp_path / "families.jsonl"
    path.write_text("".join(json.dumps(pedigree_to_dict(pedigree)) + "\n" for pedigree in handcrafted()[:3]))
    return path


def test_predict(runner: FlaskCliRunner, pedigrees, tmp_path) -> None:
    out = tmp_path / "report.json"
    result = runner.invoke(args=["predict", "--pedigree", str(pedigrees), "--t0", "5", "--out", str(out)])
    assert result.exit_code == 0
    records = json.loads(out.read_text())
    assert [record["familyId"] for record in records] == ["solo", "trio", "maternal-breast"]
    for record in records:
        assert sum(entry["probability"] for entry in record["genotypePosterior"]) == pytest.approx(1.0)
        assert list(record["futureRisk"]["breast"]) == ["5"]


def test_predict_stdout(runner: FlaskCliRunner, pedigrees) -> None:
    result = runner.invoke(args=["predict", "--pedigree", str(pedigrees), "--risk", "net", "-M", "1"])
    assert result.exit_code == 0
    records = json.loads(result.stdout)
    assert len(records[0]["genotypePosterior"]) == 5
    assert records[0]["riskKind"] == "net"


def test_predict_failed_family(runner: FlaskCliRunner, pedigrees, tmp_path) -> None:
    """
    A failing family is reported in place and the batch exits with 1
    """
    with pedigrees.open("a") as output:
        output.write(json.dumps(BROKEN) + "\n")
    out = tmp_path / "report.json"
    result = runner.invoke(args=["predict", "--pedigree", str(pedigrees), "--out", str(out)])
    assert result.exit_code == 1
    records = json.loads(out.read_text())
    assert len(records) == 4
    assert records[3]["familyId"] == "broken" and records[3]["error"] == "InputError"
    assert "genotypePosterior" in records[0]


@pytest.mark.parametrize("args", [["-M", "-1"], ["--t0", "-3"], ["--params", "missing.json"]])
def test_predict_bad_arguments(runner: FlaskCliRunner, pedigrees, args) -> None:
    result = runner.invoke(args=["predict", "--pedigree", str(pedigrees)] + args)
    assert result.exit_code == 1


def test_simulate_reproducible(runner: FlaskCliRunner, tmp_path) -> None:
    for name in ("first", "second"):
        result = runner.invoke(args=["simulate", "-n", "4", "--template", "nuclear", "--seed", "11",
                                     "--out", str(tmp_path / name)])
        assert result.exit_code == 0
    for file_name in ("cohort.jsonl", "labels.csv", "manifest.json"):
        assert (tmp_path / "first" / file_name).read_bytes() == (tmp_path / "second" / file_name).read_bytes()
    with (tmp_path / "first" / "labels.csv").open() as labels:
        assert len(list(csv.DictReader(labels))) == 4 * 3


def test_simulate_manifest(runner: FlaskCliRunner, tmp_path) -> None:
    result = runner.invoke(args=["simulate", "-n", "1", "--template", "large", "--prs", "20/0.1/0.8-1.2",
                                 "--out", str(tmp_path)])
    assert result.exit_code == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["members"] == 113
    assert manifest["prs"] == "20/0.1/0.8-1.2"
    assert manifest["families"] == 1
    assert manifest["genes"] == ["BRCA1", "BRCA2", "MLH1"]


@pytest.mark.parametrize("args", [["-n", "0"], ["-n", "2", "--prs", "20/0.1"]])
def test_simulate_bad_arguments(runner: FlaskCliRunner, tmp_path, args) -> None:
    result = runner.invoke(args=["simulate", "--out", str(tmp_path)] + args)
    assert result.exit_code == 1


@pytest.fixture
def cohort(runner: FlaskCliRunner, tmp_path):
    directory = tmp_path / "cohort"
    result = runner.invoke(args=["simulate", "-n", "12", "--template", "nuclear", "--seed", "3",
                                 "--out", str(directory)])
    assert result.exit_code == 0
    return directory


def test_validate(runner: FlaskCliRunner, cohort, tmp_path) -> None:
    prefix = tmp_path / "metrics"
    result = runner.invoke(args=["validate", "--cohort", str(cohort), "--replicates", "2", "--out", str(prefix)])
    assert result.exit_code == 0
    doc = json.loads((tmp_path / "metrics.json").read_text())
    assert doc["replicates"] == 2
    labels = {row["label"] for row in doc["metrics"]}
    assert labels == {"BRCA1", "BRCA2", "MLH1", "BRCA", "MMR", "Any"}
    assert {row["metric"] for row in doc["metrics"]} == {"auc", "eOverO", "mse"}
    assert all(row["n"] == 12 for row in doc["metrics"])
    assert (tmp_path / "metrics.csv").read_text().startswith("label,metric,point,ciLow,ciHigh,n,nCases\n")


def test_validate_orphan_labels(runner: FlaskCliRunner, cohort, tmp_path) -> None:
    with (cohort / "labels.csv").open("a") as labels:
        labels.write("ghost,BRCA1,0\n")
    result = runner.invoke(args=["validate", "--cohort", str(cohort), "--replicates", "2",
                                 "--out", str(tmp_path / "metrics")])
    assert result.exit_code == 1
    assert not (tmp_path / "metrics.json").exists()


def test_validate_one_replicate(runner: FlaskCliRunner, cohort, tmp_path) -> None:
    result = runner.invoke(args=["validate", "--cohort", str(cohort), "--replicates", "1",
                                 "--out", str(tmp_path / "metrics")])
    assert result.exit_code == 1


def test_bench(runner: FlaskCliRunner) -> None:
    """
    The unpared space of 11 genes exceeds the transmission cap and is reported, not raised
    """
    result = runner.invoke(args=["bench", "--genes", "11", "-M", "2", "--template", "trio", "--repeat", "1"])
    assert result.exit_code == 0
    rows = list(csv.DictReader(result.stdout.splitlines()))
    assert [(row["M"], row["spaceSize"], row["unparedSize"]) for row in rows] == [("2", "67", "2048"),
                                                                                  ("11", "2048", "2048")]
    assert rows[0]["error"] == "" and float(rows[0]["seconds"]) > 0
    assert rows[0]["maxDeviation"] == ""
    assert rows[1]["error"].startswith("CapacityError")


def test_bench_small(runner: FlaskCliRunner, tmp_path) -> None:
    out = tmp_path / "bench.csv"
    result = runner.invoke(args=["bench", "--genes", "3", "-M", "1", "--template", "nuclear", "--repeat", "1",
                                 "--out", str(out)])
    assert result.exit_code == 0
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert [row["M"] for row in rows] == ["1", "3"]
    assert float(rows[1]["maxDeviation"]) == 0.0
    assert 0 <= float(rows[0]["maxDeviation"]) < 0.5


@pytest.mark.parametrize("args", [["--genes", "0"], ["--template", "village"], ["--repeat", "0"]])
def test_bench_bad_arguments(runner: FlaskCliRunner, args) -> None:
    assert runner.invoke(args=["bench"] + args).exit_code == 1


def test_collapse_check(runner: FlaskCliRunner) -> None:
    result = runner.invoke(args=["collapse-check", "--genes", "BRCA1,BRCA2", "--fixtures", "8"])
    assert result.exit_code == 0
    (report,) = json.loads(result.stdout)
    assert report["kind"] == "genes" and report["excluded"] == ["MLH1"]
    assert report["status"] == "ok"
    assert len(report["fixtures"]) == 8
    assert report["maxDiscrepancy"] <= 1e-10


def test_collapse_check_arguments(runner: FlaskCliRunner) -> None:
    assert runner.invoke(args=["collapse-check"]).exit_code == 1
    assert runner.invoke(args=["collapse-check", "--cancers", "lung"]).exit_code == 1
