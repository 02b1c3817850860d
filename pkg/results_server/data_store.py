"""
Report Store
Handles storage and retrieval of run reports (CSV) and fitted policies (JSON)
"""
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from gpp.errors import PolicyFormatError
from gpp.problem import PolicySequence
from gpp.solver import RunReport

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["epoch", "wall_seconds", "cost", "cost_se", "l2_error"]
FLOAT_FORMAT = "%.17g"


def _format_value(value) -> str:
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


class ReportStore:
    """File-backed store: <root>/<run_id>.csv and <root>/<run_id>.policy.json"""

    def __init__(self, root: str = "./data/runs"):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        logger.info(f"ReportStore initialized: root={self.root}")

    def report_path(self, run_id: str) -> Path:
        return self.root / f"{run_id}.csv"

    def policy_path(self, run_id: str) -> Path:
        return self.root / f"{run_id}.policy.json"

    def save_report(self, run_id: str, report: RunReport, path: Optional[Path] = None) -> Path:
        """
        Write one row per recorded epoch followed by '#key=value' summary lines.

        Floats carry 17 significant digits; a missing L2 error is an empty field.
        """
        path = Path(path) if path is not None else self.report_path(run_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(
            [{"epoch": r.epoch, "wall_seconds": r.wall_seconds, "cost": r.cost, "cost_se": r.cost_se,
              "l2_error": np.nan if r.l2_error is None else r.l2_error} for r in report.records],
            columns=CSV_COLUMNS,
        )
        summary = {"run_id": run_id, **report.summary(), "M": report.config.M, "N": report.config.N,
                   "K": report.config.K, "hidden_size": report.config.hidden_size}
        if report.config.case_id is not None:
            summary["case_id"] = report.config.case_id

        with open(path, "w", newline="") as f:
            frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, na_rep="")
            for key, value in summary.items():
                f.write(f"#{key}={_format_value(value)}\n")

        logger.info(f"Saved report: {path.name}")
        return path

    def save_policy(self, run_id: str, policy: PolicySequence, path: Optional[Path] = None) -> Path:
        path = Path(path) if path is not None else self.policy_path(run_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            json.dump(policy.to_dict(), f)
        logger.info(f"Saved policy: {path.name}")
        return path

    @staticmethod
    def load_policy(path) -> PolicySequence:
        path = Path(path)
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise PolicyFormatError(f"policy file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise PolicyFormatError(f"policy file {path} is not valid JSON: {e}") from e
        return PolicySequence.from_dict(data)

    @staticmethod
    def read_summary(path) -> Dict:
        summary = {}
        with open(path, "r") as f:
            for line in f:
                if line.startswith("#") and "=" in line:
                    key, value = line[1:].rstrip("\n").split("=", 1)
                    summary[key] = _parse_value(value)
        return summary

    def load_report(self, run_id: str) -> Optional[Dict]:
        path = self.report_path(run_id)
        if not path.exists():
            logger.warning(f"Report not found: {run_id}")
            return None
        frame = pd.read_csv(path, comment="#")
        epochs = json.loads(frame.to_json(orient="records", double_precision=15))
        return {"run_id": run_id, "summary": self.read_summary(path), "epochs": epochs,
                "has_policy": self.policy_path(run_id).exists()}

    def list_runs(self) -> List[Dict]:
        runs = []
        for path in sorted(self.root.glob("*.csv")):
            runs.append({"run_id": path.stem, **self.read_summary(path)})
        logger.info(f"Listed {len(runs)} runs")
        return runs
