"""Unit tests for the check base classes."""

import json

from chemostat_qsd.validation.base import BaseCheck, CheckReport, CheckResult


class MockCheck(BaseCheck):
    """Mock check for testing."""

    def _check(self, observed, expected):
        return observed == expected, {"test_metric": 42}


class TestCheckResult:
    """Test CheckResult class."""

    def test_check_result_creation(self):
        """Test creating a check result."""
        result = CheckResult(
            check_name="Test Check",
            passed=True,
            metrics={"z_score": 0.5},
            duration_seconds=1.5,
        )

        assert result.check_name == "Test Check"
        assert result.passed is True
        assert result.metrics["z_score"] == 0.5
        assert result.error_message is None

    def test_check_result_to_dict(self):
        """Test converting a result to the manifest layout."""
        result = CheckResult("Test Check", True, {"z_score": 0.5}, 1.5)

        data = result.to_dict()
        assert data["check"] == "Test Check"
        assert data["passed"] is True
        assert data["metrics"]["z_score"] == 0.5
        assert data["duration"] == 1.5
        assert data["error"] is None

    def test_check_result_from_dict_inverts_to_dict(self):
        """Test that a manifest entry reads back into the same result."""
        result = CheckResult("Test Check", False, {"n": 3}, 0.25, "boom")

        assert CheckResult.from_dict(result.to_dict()) == result


class TestCheckReport:
    """Test CheckReport class."""

    def test_overall_passed_and_duration(self):
        """Test the aggregate status and duration."""
        report = CheckReport(
            "run",
            [
                CheckResult("Check 1", True, {"metric": 1}, 1.0),
                CheckResult("Check 2", False, {"metric": 2}, 2.0),
            ],
        )

        assert report.overall_passed is False
        assert report.total_duration == 3.0
        assert report.timestamp.endswith("Z")

    def test_empty_report_passes(self):
        """Test that a report with no results counts as passed."""
        assert CheckReport("run", []).overall_passed is True

    def test_to_dict_carries_context(self):
        """Test that context entries land in the run header."""
        report = CheckReport(
            "run", [CheckResult("Check 1", True, {}, 1.0)], context={"seed": 7}
        )

        data = report.to_dict()
        assert data["run"]["title"] == "run"
        assert data["run"]["seed"] == 7
        assert data["run"]["duration_seconds"] == 1.0
        assert data["overall_passed"] is True
        assert len(data["results"]) == 1

    def test_to_json(self, tmp_path):
        """Test saving a report as JSON."""
        report = CheckReport("run", [CheckResult("Check 1", True, {"metric": 1}, 1.0)])
        path = tmp_path / "report.json"

        report.to_json(path)

        loaded = json.loads(path.read_text())
        assert loaded["overall_passed"] is True
        assert loaded["results"][0]["check"] == "Check 1"

    def test_to_markdown(self, tmp_path):
        """Test saving a report as markdown."""
        report = CheckReport(
            "Chemostat checks",
            [
                CheckResult("Check 1", True, {"p_hat": 0.95, "n": 100}, 1.0),
                CheckResult("Check 2", False, {}, 0.5, error_message="Test error"),
            ],
        )
        path = tmp_path / "report.md"

        report.to_markdown(path)

        content = path.read_text()
        assert "# Chemostat checks" in content
        assert "FAILED" in content
        assert "| Check 1 | Pass |" in content
        assert "| Check 2 | Fail |" in content
        assert "p_hat: 0.95" in content
        assert "Test error" in content


class TestBaseCheck:
    """Test BaseCheck class."""

    def test_initialization(self):
        """Test check initialization."""
        check = MockCheck("Test Check", param1="value1")

        assert check.name == "Test Check"
        assert check.config["param1"] == "value1"

    def test_check_success(self):
        """Test a successful check."""
        result = MockCheck("Test Check").check("a", "a")

        assert result.check_name == "Test Check"
        assert result.passed is True
        assert result.metrics["test_metric"] == 42
        assert result.duration_seconds >= 0
        assert result.error_message is None

    def test_check_failure(self):
        """Test a failing comparison."""
        assert MockCheck("Test Check").check("a", "b").passed is False

    def test_check_exception_becomes_failed_result(self):
        """Test that an exception inside the comparison fails the check."""

        class ErrorCheck(BaseCheck):
            def _check(self, observed, expected):
                raise ValueError("Test error")

        result = ErrorCheck("Error Check").check(1, 2)

        assert result.passed is False
        assert result.error_message == "Test error"
        assert result.metrics == {}
