"""
Suite results and their CSV / JSON files.

CSV columns are fixed and rows are sorted by (class, scheme, sample) before
writing, so two runs with the same seed produce identical files apart from
the wall_time_ms column.
"""

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)

CSV_COLUMNS = ("class", "scheme", "sample", "size", "loss", "bound_ok", "stable_ok",
               "vc", "graph", "pseudo", "littlestone", "wall_time_ms")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


@dataclass
class RunRow:
    """
    One (class, scheme, sample) result.

    Attributes:
        loss: Exact rational (or certified interval) as a string
        stable_ok: None when stability was not checked
        passed: Whether every assertion of the row held
        witness: Details of the first failed assertion
    """
    class_name: str
    scheme: str
    sample: int
    size: Optional[int] = None
    loss: str = ""
    bound_ok: Optional[bool] = None
    stable_ok: Optional[bool] = None
    dims: Dict[str, Optional[int]] = field(default_factory=dict)
    wall_time_ms: float = 0.0
    passed: bool = True
    witness: Optional[Dict[str, Any]] = None

    def sort_key(self) -> Tuple[str, str, int]:
        return self.class_name, self.scheme, self.sample

    def to_csv_row(self) -> Dict[str, str]:
        row = {
            "class": self.class_name,
            "scheme": self.scheme,
            "sample": str(self.sample),
            "size": _cell(self.size),
            "loss": self.loss,
            "bound_ok": _cell(self.bound_ok),
            "stable_ok": _cell(self.stable_ok),
            "wall_time_ms": f"{self.wall_time_ms:.3f}",
        }
        for key in ("vc", "graph", "pseudo", "littlestone"):
            row[key] = _cell(self.dims.get(key))
        return row

    def to_dict(self) -> Dict[str, Any]:
        data = {k: v for k, v in self.to_csv_row().items()}
        data["passed"] = self.passed
        if self.witness is not None:
            data["witness"] = self.witness
        return data


@dataclass
class RunReport:
    """All rows of one suite run."""
    suite: str
    seed: int
    rows: List[RunRow] = field(default_factory=list)

    def sorted_rows(self) -> List[RunRow]:
        return sorted(self.rows, key=RunRow.sort_key)

    @property
    def failures(self) -> List[RunRow]:
        return [r for r in self.sorted_rows() if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failures

    def first_failure(self) -> Optional[RunRow]:
        failures = self.failures
        return failures[0] if failures else None

    def summary(self) -> Dict[str, Any]:
        first = self.first_failure()
        return {
            "suite": self.suite,
            "seed": self.seed,
            "rows": len(self.rows),
            "failures": len(self.failures),
            "passed": self.passed,
            "first_failure": None if first is None else first.to_dict(),
        }

    def write(self, out_dir) -> Tuple[Path, Path]:
        """
        Write <suite>.csv and <suite>.json under out_dir.

        Returns:
            (csv path, json path)
        """
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.suite}.csv"
        json_path = out / f"{self.suite}.json"
        rows = self.sorted_rows()
        with open(csv_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS, lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow(row.to_csv_row())
        payload = dict(self.summary())
        payload["results"] = [row.to_dict() for row in rows]
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        logger.info("wrote %s and %s (%d rows)", csv_path, json_path, len(rows))
        return csv_path, json_path
