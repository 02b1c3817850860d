import math

from fastapi.testclient import TestClient
import numpy as np
import pytest

from gpp.errors import PolicyFormatError
from gpp.solver import EpochRecord, RunReport
from results_server import ReportStore, ResultTools, create_app
from results_server.data_store import CSV_COLUMNS


@pytest.fixture
def report(lq1d, lq1d_config, zero_policy):
    records = [EpochRecord(epoch=1, wall_seconds=0.25, cost=1.5, cost_se=0.01, l2_error=0.2, l2_relative=0.1),
               EpochRecord(epoch=2, wall_seconds=0.5, cost=1.0 / 3.0, cost_se=0.02)]
    return RunReport(config=lq1d_config, records=records, policy=zero_policy(lq1d, lq1d_config))


def test_report_csv_layout(store, report):
    path = store.save_report("lq_seed11", report)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    rows = [line for line in lines[1:] if not line.startswith("#")]
    assert len(rows) == 2
    assert rows[1].endswith(",")  # missing L2 error is an empty field
    assert "#cost=%.17g" % (1.0 / 3.0) in lines
    assert "#status=ok" in lines


def test_load_report_round_trip(store, report):
    store.save_report("lq_seed11", report)
    loaded = store.load_report("lq_seed11")
    assert loaded["summary"]["M"] == 400 and loaded["summary"]["seed"] == 11
    assert loaded["summary"]["cost"] == 1.0 / 3.0
    assert [e["epoch"] for e in loaded["epochs"]] == [1, 2]
    assert loaded["epochs"][0]["l2_error"] == 0.2
    assert loaded["epochs"][1]["l2_error"] is None
    assert loaded["has_policy"] is False
    assert store.load_report("missing") is None


def test_policy_round_trip(store, report):
    path = store.save_policy("lq_seed11", report.policy)
    restored = ReportStore.load_policy(path)
    x = np.linspace(-1, 1, 5)[:, None]
    for n in range(report.policy.N):
        np.testing.assert_array_equal(restored.control(n, x), report.policy.control(n, x))
    assert math.isinf(restored[0].clip_bound)


def test_load_policy_errors(tmp_path):
    with pytest.raises(PolicyFormatError):
        ReportStore.load_policy(tmp_path / "none.policy.json")
    bad = tmp_path / "bad.policy.json"
    bad.write_text("[")
    with pytest.raises(PolicyFormatError):
        ReportStore.load_policy(bad)


def test_list_runs(store, report):
    store.save_report("a", report)
    store.save_report("b", report)
    runs = store.list_runs()
    assert [r["run_id"] for r in runs] == ["a", "b"]
    assert runs[0]["problem"] == "lq100"


def test_tools_report_failures(store):
    tools = ResultTools(store)
    assert tools.list_problems()["total_problems"] == 6
    missing = tools.problem_details("heston")
    assert not missing["success"] and missing["error_type"] == "not_found"
    bad = tools.oracle("lq100", "nope", ["1"])
    assert not bad["success"] and bad["error_type"] == "bad_request"
    assert tools.run_summary("absent")["error_type"] == "not_found"


@pytest.fixture
def client(store, report):
    store.save_report("lq_seed11", report)
    store.save_policy("lq_seed11", report.policy)
    return TestClient(create_app(store))


def test_root_lists_tools(client):
    body = client.get("/").json()
    assert body["status"] == "running"
    assert {t["name"] for t in body["tools"]} >= {"problems.list", "oracle.query", "runs.get"}


def test_problem_endpoints(client):
    assert client.get("/problems").json()["total_problems"] == 6
    detail = client.get("/problems/meanvar").json()["problem"]
    assert detail["defaults"]["T"] == 0.2
    assert client.get("/problems/heston").status_code == 404


def test_oracle_endpoint(client):
    response = client.get("/oracle/lq100/p_t", params={"args": ["1.0"]})
    assert response.status_code == 200
    assert response.json()["result"]["value"] == pytest.approx(1.0)
    assert client.get("/oracle/lq100/bogus", params={"args": ["1.0"]}).status_code == 422
    assert client.get("/oracle/sine/u").status_code == 422
    assert client.get("/oracle/heston/v").status_code == 404


def test_run_endpoints(client):
    runs = client.get("/runs").json()
    assert runs["total_runs"] == 1
    run = client.get("/runs/lq_seed11").json()
    assert run["has_policy"] is True
    assert len(run["epochs"]) == 2
    assert client.get("/runs/absent").status_code == 404
