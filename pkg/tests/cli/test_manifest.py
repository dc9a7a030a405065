"""Tests for run outputs and manifests."""

import json

import polars as pl
import pytest

from chemostat_qsd import __version__
from chemostat_qsd.cli.manifest import RunManifest, find_manifests, sha256_file
from chemostat_qsd.cli.outputs import RunOutputs
from chemostat_qsd.common.errors import ConfigurationError


@pytest.fixture
def outputs(tmp_path):
    return RunOutputs(tmp_path / "runs" / "flow")


def manifest_for(outputs, checks=None):
    return RunManifest.for_outputs(
        subcommand="flow",
        config={"seed": 1},
        run_dir=outputs.run_dir,
        files=outputs.files,
        started_at="2024-01-01T00:00:00Z",
        wall_clock_seconds=0.5,
        checks=checks,
    )


class TestRunOutputs:
    """Test the output writers."""

    def test_write_csv(self, outputs):
        """Test that rows land in a tidy CSV."""
        rows = [{"t": 0.0, "s": 1.0}, {"t": 1.0, "s": 0.5}]
        path = outputs.write_csv("table.csv", rows)

        frame = pl.read_csv(path)
        assert frame.columns == ["t", "s"]
        assert frame["s"].to_list() == [1.0, 0.5]
        assert outputs.files == [path]

    def test_write_empty_csv(self, outputs):
        """Test that an empty table still produces a file."""
        path = outputs.write_csv("empty.csv", [])

        assert path.exists()

    def test_write_json_is_sorted(self, outputs):
        """Test that JSON reports have sorted keys."""
        path = outputs.write_json("summary.json", {"b": 1, "a": 2})

        assert path.read_text() == '{\n  "a": 2,\n  "b": 1\n}\n'

    def test_track_deduplicates(self, outputs):
        """Test that rewriting a file records it once."""
        outputs.write_json("summary.json", {})
        outputs.write_json("summary.json", {"a": 1})

        assert len(outputs.files) == 1


class TestRunManifest:
    """Test manifest creation, persistence and verification."""

    def test_for_outputs_checksums(self, outputs):
        """Test that every output is recorded with its checksum."""
        path = outputs.write_csv("table.csv", [{"t": 0.0}])

        manifest = manifest_for(outputs)

        assert manifest.outputs == {"table.csv": sha256_file(path)}
        assert manifest.tool_version == __version__

    def test_passed(self, outputs):
        """Test the aggregate status of the recorded checks."""
        assert manifest_for(outputs).passed is None
        assert manifest_for(outputs, [{"passed": True}]).passed is True
        checks = [{"passed": True}, {"passed": False}]
        assert manifest_for(outputs, checks).passed is False

    def test_write_and_read(self, outputs):
        """Test that a written manifest reads back unchanged."""
        outputs.write_json("summary.json", {"a": 1})
        manifest = manifest_for(outputs, [{"check": "c", "passed": True}])

        path = manifest.write(outputs.run_dir)

        assert path.name == "manifest.json"
        assert json.loads(path.read_text())["passed"] is True
        assert RunManifest.read(path) == manifest
        assert not list(outputs.run_dir.glob(".manifest.*"))

    def test_verify_detects_changes(self, outputs):
        """Test that edited and deleted outputs are reported."""
        kept = outputs.write_json("kept.json", {"a": 1})
        edited = outputs.write_json("edited.json", {"a": 1})
        removed = outputs.write_json("removed.json", {"a": 1})
        manifest = manifest_for(outputs)
        assert manifest.verify(outputs.run_dir) == []

        edited.write_text("{}\n")
        removed.unlink()

        assert sorted(manifest.verify(outputs.run_dir)) == [
            "edited.json",
            "removed.json",
        ]
        assert kept.exists()

    def test_read_invalid_json(self, tmp_path):
        """Test that a corrupt manifest is a configuration error."""
        path = tmp_path / "manifest.json"
        path.write_text("{not json")

        with pytest.raises(ConfigurationError, match="invalid manifest"):
            RunManifest.read(path)

    def test_from_dict_missing_fields(self):
        """Test that a manifest without required fields is rejected."""
        with pytest.raises(ConfigurationError, match="malformed manifest"):
            RunManifest.from_dict({"subcommand": "flow"})

    def test_find_manifests(self, tmp_path):
        """Test that manifests are found recursively in a stable order."""
        for name in ("b", "a"):
            run = RunOutputs(tmp_path / name)
            manifest_for(run).write(run.run_dir)

        found = find_manifests(tmp_path)

        assert [path.parent.name for path in found] == ["a", "b"]
