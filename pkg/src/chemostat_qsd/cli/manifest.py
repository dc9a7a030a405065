"""Run manifests: config echo, tool version, timing and output checksums.

A manifest is written once per run, at the end, by writing a temporary
file, fsyncing it and renaming it over ``manifest.json``.
"""

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from loguru import logger

from .. import __version__
from ..common.errors import ConfigurationError

MANIFEST_NAME = "manifest.json"


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


@dataclass
class RunManifest:
    """Metadata of one subcommand run."""

    subcommand: str
    config: dict[str, Any]
    started_at: str  # ISO format, UTC
    wall_clock_seconds: float
    outputs: dict[str, str]  # path relative to the run directory -> sha256
    checks: list[dict[str, Any]] = field(default_factory=list)  # CheckResult.to_dict
    tool_version: str = __version__

    @property
    def passed(self) -> bool | None:
        """False if any check failed; None when nothing was checked."""
        if not self.checks:
            return None
        return all(check["passed"] for check in self.checks)

    @classmethod
    def for_outputs(
        cls,
        subcommand: str,
        config: dict[str, Any],
        run_dir: Path,
        files: list[Path],
        started_at: str,
        wall_clock_seconds: float,
        checks: list[dict[str, Any]] | None = None,
    ) -> "RunManifest":
        outputs = {
            str(path.relative_to(run_dir)): sha256_file(path) for path in sorted(files)
        }
        return cls(
            subcommand=subcommand,
            config=config,
            started_at=started_at,
            wall_clock_seconds=wall_clock_seconds,
            outputs=outputs,
            checks=checks or [],
        )

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunManifest":
        known = {k: v for k, v in data.items() if k != "passed"}
        try:
            return cls(**known)
        except TypeError as e:
            raise ConfigurationError(f"malformed manifest: {e}") from None

    def write(self, run_dir: Path) -> Path:
        """Atomically write ``manifest.json`` into run_dir."""
        run_dir.mkdir(parents=True, exist_ok=True)
        target = run_dir / MANIFEST_NAME
        fd, tmp_name = tempfile.mkstemp(prefix=".manifest.", dir=run_dir)
        try:
            with os.fdopen(fd, "w") as f:
                json.dump(self.to_dict(), f, indent=2, sort_keys=True, default=str)
                f.write("\n")
                f.flush()
                os.fsync(f.fileno())
            os.replace(tmp_name, target)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
        logger.info(f"Wrote manifest {target} ({len(self.outputs)} outputs)")
        return target

    @classmethod
    def read(cls, path: Path) -> "RunManifest":
        with open(path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"invalid manifest {path}: {e}") from None
        return cls.from_dict(data)

    def verify(self, run_dir: Path) -> list[str]:
        """Outputs whose current checksum differs from the recorded one."""
        return [
            name
            for name, digest in self.outputs.items()
            if not (run_dir / name).exists() or sha256_file(run_dir / name) != digest
        ]


def find_manifests(root: Path) -> list[Path]:
    """Every manifest.json below root, in a stable order."""
    return sorted(Path(root).rglob(MANIFEST_NAME))
