"""Command-line interface: exit codes, outputs, and file handling."""

from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from convscope import assemble, parse_snapshot, serialize_document, serialize_snapshot
from convscope.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def snapshot_file(tmp_path, small_snapshot):
    path = tmp_path / "small.json"
    path.write_text(serialize_snapshot(small_snapshot))
    return path


class TestIngest:
    def test_prints_id(self, runner, snapshot_file):
        result = runner.invoke(main, ["ingest", str(snapshot_file)])
        assert result.exit_code == 0
        assert result.output.strip() == "test-small"

    def test_missing_file_exits_1(self, runner, tmp_path):
        result = runner.invoke(main, ["ingest", str(tmp_path / "nope.json")])
        assert result.exit_code == 1
        assert "error:" in result.output

    def test_invalid_snapshot_exits_1(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"version": 1}')
        result = runner.invoke(main, ["ingest", str(bad)])
        assert result.exit_code == 1


class TestLayout:
    def test_writes_document_to_file(self, runner, snapshot_file, tmp_path, small_snapshot):
        out = tmp_path / "doc.json"
        result = runner.invoke(main, ["layout", str(snapshot_file), "--out", str(out)])
        assert result.exit_code == 0
        assert out.read_bytes() == serialize_document(assemble(small_snapshot))

    def test_stdout_document_parses(self, runner, snapshot_file):
        result = runner.invoke(main, ["layout", str(snapshot_file)])
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["schema"] == "layout.v1"

    def test_class_selection_flows_through(self, runner, snapshot_file):
        result = runner.invoke(
            main,
            ["layout", str(snapshot_file), "--classes", "0,1", "--quantile", "0.5",
             "--facet", "matrix"],
        )
        assert result.exit_code == 0
        doc = json.loads(result.output)
        assert doc["facetState"] == {"facet": "matrix", "classes": [0, 1], "quantile": 0.5}

    def test_unknown_facet_rejected_by_click(self, runner, snapshot_file):
        result = runner.invoke(main, ["layout", str(snapshot_file), "--facet", "sound"])
        assert result.exit_code != 0

    def test_bad_class_index_exits_1(self, runner, snapshot_file):
        result = runner.invoke(main, ["layout", str(snapshot_file), "--classes", "9"])
        assert result.exit_code == 1


class TestGenFixture:
    def test_emits_valid_snapshot(self, runner, tmp_path):
        out = tmp_path / "fx.json"
        result = runner.invoke(main, ["gen-fixture", "--seed", "3", "--out", str(out)])
        assert result.exit_code == 0
        snap = parse_snapshot(out.read_text())
        assert snap.id == "fixture-3"
        assert len(snap.display_layers) >= 2

    def test_dead_relu_variant(self, runner, tmp_path):
        out = tmp_path / "dead.json"
        result = runner.invoke(main, ["gen-fixture", "--dead-relu", "--out", str(out)])
        assert result.exit_code == 0
        snap = parse_snapshot(out.read_text())
        assert snap.id == "dead-relu-0"

    def test_deterministic_per_seed(self, runner, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert runner.invoke(main, ["gen-fixture", "--seed", "2", "--out", str(a)]).exit_code == 0
        assert runner.invoke(main, ["gen-fixture", "--seed", "2", "--out", str(b)]).exit_code == 0
        assert a.read_bytes() == b.read_bytes()


class TestPipelines:
    def test_generate_then_layout(self, runner, tmp_path):
        fx = tmp_path / "fx.json"
        assert runner.invoke(main, ["gen-fixture", "--seed", "1", "--out", str(fx)]).exit_code == 0
        out = tmp_path / "doc.json"
        result = runner.invoke(main, ["layout", str(fx), "--out", str(out)])
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["snapshot"] == "fixture-1"
        assert len(doc["columns"]) == len(doc["gaps"]) + 1
