"""Base classes for Monte Carlo cross-checks."""

import json
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from loguru import logger


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass
class CheckResult:
    """Result from a single check."""

    check_name: str
    passed: bool
    metrics: dict[str, Any]
    duration_seconds: float
    error_message: str | None = None

    def to_dict(self) -> dict:
        return {
            "check": self.check_name,
            "passed": self.passed,
            "metrics": self.metrics,
            "duration": self.duration_seconds,
            "error": self.error_message,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CheckResult":
        return cls(
            check_name=data["check"],
            passed=bool(data["passed"]),
            metrics=data.get("metrics", {}),
            duration_seconds=float(data.get("duration", 0.0)),
            error_message=data.get("error"),
        )


@dataclass
class CheckReport:
    """All check results of one run."""

    title: str
    results: list[CheckResult]
    context: dict[str, Any] = field(default_factory=dict)
    timestamp: str = field(default_factory=utc_timestamp)

    @property
    def overall_passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def total_duration(self) -> float:
        return sum(result.duration_seconds for result in self.results)

    def to_dict(self) -> dict:
        return {
            "run": {
                "title": self.title,
                "timestamp": self.timestamp,
                "duration_seconds": self.total_duration,
                **self.context,
            },
            "results": [r.to_dict() for r in self.results],
            "overall_passed": self.overall_passed,
        }

    def to_json(self, filepath: Path) -> None:
        with open(filepath, "w") as f:
            json.dump(self.to_dict(), f, indent=2, default=str)

    def to_markdown(self, filepath: Path) -> None:
        with open(filepath, "w") as f:
            f.write(f"# {self.title}\n\n")
            f.write(f"**Generated**: {self.timestamp}\n\n")
            f.write("## Summary\n\n")
            f.write(f"- **Status**: {'PASSED' if self.overall_passed else 'FAILED'}\n")
            f.write(f"- **Checks**: {len(self.results)}\n")
            f.write(f"- **Duration**: {self.total_duration:.2f} seconds\n\n")

            f.write("## Results\n\n")
            f.write("| Check | Status | Duration | Key Metrics |\n")
            f.write("|-------|--------|----------|-------------|\n")
            for result in self.results:
                status = "Pass" if result.passed else "Fail"
                if result.error_message:
                    key_metrics = [f"Error: {result.error_message}"]
                else:
                    key_metrics = [
                        f"{k}: {v:.4g}" if isinstance(v, float) else f"{k}: {v}"
                        for k, v in list(result.metrics.items())[:3]
                    ]
                f.write(
                    f"| {result.check_name} | {status} | "
                    f"{result.duration_seconds:.2f}s | {'<br>'.join(key_metrics)} |\n"
                )

            f.write("\n## Detailed Metrics\n\n")
            for result in self.results:
                f.write(f"### {result.check_name}\n\n")
                if result.error_message:
                    f.write(f"**Error**: {result.error_message}\n\n")
                else:
                    f.write("```json\n")
                    f.write(json.dumps(result.metrics, indent=2, default=str))
                    f.write("\n```\n\n")


class BaseCheck(ABC):
    """Base class for all checks."""

    def __init__(self, name: str, **config):
        self.name = name
        self.config = config

    @abstractmethod
    def _check(self, observed: Any, expected: Any) -> tuple[bool, dict]:
        """Implement the comparison.

        Returns:
            Tuple of (passed, metrics)
        """

    def check(self, observed: Any, expected: Any) -> CheckResult:
        """Run the check with timing; exceptions become a failed result."""
        start_time = time.perf_counter()
        try:
            passed, metrics = self._check(observed, expected)
            return CheckResult(
                check_name=self.name,
                passed=bool(passed),
                metrics=metrics,
                duration_seconds=time.perf_counter() - start_time,
            )
        except Exception as e:
            logger.exception(f"Check {self.name} raised")
            return CheckResult(
                check_name=self.name,
                passed=False,
                metrics={},
                duration_seconds=time.perf_counter() - start_time,
                error_message=str(e),
            )
