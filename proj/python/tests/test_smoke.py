import os
from pathlib import Path

import pytest

import ngcp

DATA = Path(os.environ.get("NGCP_DATA_DIR", Path(__file__).resolve().parents[2] / "data"))


def scenario(name):
    return str(DATA / "scenarios" / f"{name}.scn")


def test_compose_reference_catalog():
    out = ngcp.compose(str(DATA / "catalog" / "reference.cat"))
    sizes = {name: len(sfs) for name, sfs in out["blocks"].items()}
    assert sizes == {"AF": 4, "CM": 5, "MM": 4, "SAM": 4, "FM": 3, "CGHF": 3}
    assert out["interfaces"] == 9
    assert out["decision"] == "Accept"


def test_validate():
    catalog = str(DATA / "catalog" / "reference.cat")
    assert ngcp.validate(str(DATA / "blueprints" / "embb.bp"), catalog) == []
    violations = ngcp.validate(str(DATA / "blueprints" / "mobility-no-mm.bp"), catalog)
    assert "mobility policy without MM" in violations


def test_run_is_deterministic_and_consistent():
    a = ngcp.run(scenario("handover-mbb"))
    b = ngcp.run(scenario("handover-mbb"))
    assert a["trace"] == b["trace"]
    assert ngcp.trace_check(a["trace"]) == []
    assert a["metrics"]["flow.embb.flow-embb-1.lost"] == "0"
    assert ngcp.replay(a["trace"])["trace"] == a["trace"]


def test_fabric_option_keeps_digests():
    base = ngcp.run(scenario("paging"))
    relay = ngcp.run(scenario("paging"), fabric="Relay")
    assert base["digests"] == relay["digests"]
    with pytest.raises(ValueError):
        ngcp.run(scenario("paging"), fabric="Carrier pigeon")


def test_compare_fabrics():
    rows = ngcp.compare_fabrics(scenario("attach-redirect"))
    assert [r["model"] for r in rows] == ["FullMesh", "Relay", "Dispatcher", "PubSub"]
    assert len({r["digest"] for r in rows}) == 1


def test_errors_are_raised_as_ngcp_error():
    with pytest.raises(ngcp.Error, match="ScenarioError"):
        ngcp.run(scenario("bad-capacity"))
    with pytest.raises(ngcp.Error):
        ngcp.run(scenario("does-not-exist"))
