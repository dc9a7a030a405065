"""Output files of a run: tidy CSV tables and JSON reports."""

import json
from pathlib import Path
from typing import Any

import polars as pl
from loguru import logger


class RunOutputs:
    """Writes the files of one run directory and remembers them for the manifest."""

    def __init__(self, run_dir: Path):
        self.run_dir = Path(run_dir)
        self.run_dir.mkdir(parents=True, exist_ok=True)
        self.files: list[Path] = []

    def track(self, path: Path) -> Path:
        if path not in self.files:
            self.files.append(path)
        return path

    def write_csv(self, name: str, rows: list[dict[str, Any]]) -> Path:
        """Write rows as CSV; all rows share the keys of the first one."""
        path = self.run_dir / name
        frame = pl.DataFrame(rows) if rows else pl.DataFrame()
        frame.write_csv(path)
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return self.track(path)

    def write_json(self, name: str, payload: Any) -> Path:
        path = self.run_dir / name
        with open(path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        logger.info(f"Wrote {path}")
        return self.track(path)
