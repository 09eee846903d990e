"""
Report records for clustering runs, comparisons and benchmarks.

Reports are written as JSON (field names match the schemas under schemas/)
and, on request, as a styled Excel workbook:
- header row filled light grey, columns 15 wide
- identical / deterministic flags shaded green when True and red when False
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from openpyxl.styles import Font, PatternFill
from openpyxl.utils import get_column_letter
from sklearn.metrics import adjusted_rand_score

from hca_errors import DataIoError
from hca_types import ClusterLabeling, singleton_noise
from oracle_dbscan import AgreementReport

log = logging.getLogger(__name__)

HEADER_FILL = PatternFill(start_color="D3D3D3", end_color="D3D3D3", fill_type="solid")
TRUE_FILL = PatternFill(start_color="C6EFCE", end_color="C6EFCE", fill_type="solid")
FALSE_FILL = PatternFill(start_color="FFC7CE", end_color="FFC7CE", fill_type="solid")
COLUMN_WIDTH = 15


@dataclass
class RunReport:
    algorithm: str
    policy: Optional[str]
    epsilon: float
    minpts: Optional[int]
    n: int
    d: int
    cluster_count: int
    noise_count: int
    wall_time_ms: float
    occupied_cells: Optional[int] = None
    merge_tests: Optional[int] = None

    def __post_init__(self):
        if self.wall_time_ms < 0:
            raise ValueError(f"wall_time_ms must be >= 0 (got {self.wall_time_ms})")


@dataclass
class ComparisonReport:
    runs: List[RunReport]
    agreement: AgreementReport
    ppi_percent: float
    # None unless the baseline ran with MINPTS = 1
    refines: Optional[bool] = None


@dataclass
class BenchResult:
    algorithm: str
    n: int
    median_ms: Optional[float]
    samples_ms: List[float] = field(default_factory=list)
    skipped: bool = False
    cluster_count: Optional[int] = None
    merge_tests: Optional[int] = None


@dataclass
class GrowthEntry:
    algorithm: str
    from_n: int
    to_n: int
    ratio: Optional[float]
    exponent: Optional[float]


@dataclass
class BenchReport:
    generator: str
    epsilon: float
    policy: str
    repeat: int
    sizes: List[int]
    results: List[BenchResult]
    growth: List[GrowthEntry]
    deterministic: bool


def ppi_percent(base_ms, new_ms) -> float:
    """Percentage performance improvement of new over base: 100 * (base - new) / base."""
    if base_ms <= 0:
        return 0.0
    return 100.0 * (base_ms - new_ms) / base_ms


def growth_entries(results: List[BenchResult]) -> List[GrowthEntry]:
    """Runtime ratio and empirical exponent between consecutive measured sizes of each algorithm."""
    entries = []
    by_algorithm: Dict[str, List[BenchResult]] = {}
    for result in results:
        if not result.skipped:
            by_algorithm.setdefault(result.algorithm, []).append(result)
    for algorithm, rows in by_algorithm.items():
        rows = sorted(rows, key=lambda r: r.n)
        for before, after in zip(rows, rows[1:]):
            ratio = exponent = None
            if before.median_ms and before.median_ms > 0:
                ratio = after.median_ms / before.median_ms
                if ratio > 0 and after.n != before.n:
                    exponent = math.log(ratio) / math.log(after.n / before.n)
            entries.append(GrowthEntry(algorithm, before.n, after.n, ratio, exponent))
    return entries


def to_dict(report) -> dict:
    """Plain JSON types only: tuples become lists, exactly as they are written to disk."""
    return json.loads(json.dumps(asdict(report)))


def write_json(report, path):
    payload = to_dict(report)
    try:
        folder = os.path.dirname(os.path.abspath(path))
        os.makedirs(folder, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
    except OSError as e:
        raise DataIoError(f"cannot write {path}: {e}")
    log.info("Report saved to %s", path)
    return payload


def _style_sheet(worksheet, frame: pd.DataFrame, flag_columns=()):
    header_font = Font(bold=True)
    for col_num, column_name in enumerate(frame.columns, 1):
        column_letter = get_column_letter(col_num)
        worksheet.column_dimensions[column_letter].width = COLUMN_WIDTH
        cell = worksheet.cell(row=1, column=col_num)
        cell.fill = HEADER_FILL
        cell.font = header_font
        if column_name in flag_columns:
            for row_num, value in enumerate(frame[column_name].tolist(), 2):
                worksheet.cell(row=row_num, column=col_num).fill = TRUE_FILL if value else FALSE_FILL


def _save_workbook(path, sheets):
    try:
        folder = os.path.dirname(os.path.abspath(path))
        os.makedirs(folder, exist_ok=True)
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            for sheet_name, frame, flag_columns in sheets:
                frame.to_excel(writer, sheet_name=sheet_name, index=False)
                _style_sheet(writer.sheets[sheet_name], frame, flag_columns)
    except OSError as e:
        raise DataIoError(f"cannot write {path}: {e}")
    log.info("Workbook saved to %s", path)


def adjusted_rand(a: ClusterLabeling, b: ClusterLabeling) -> float:
    return float(adjusted_rand_score(singleton_noise(a.labels), singleton_noise(b.labels)))


def write_comparison_workbook(report: ComparisonReport, path, labelings=None):
    """
    Export a ComparisonReport to Excel: a Runs sheet and an Agreement sheet.

    Args:
        report (ComparisonReport): the comparison to export
        path (str): .xlsx file to write
        labelings (tuple, optional): the two ClusterLabelings; adds the adjusted rand index
    """
    runs = pd.DataFrame([asdict(run) for run in report.runs])
    agreement = report.agreement
    summary = {
        "rand_index": [agreement.rand_index],
        "identical": [agreement.identical],
        "mismatched_pairs": [agreement.mismatched_pairs],
        "clusters_a": [agreement.cluster_counts[0]],
        "clusters_b": [agreement.cluster_counts[1]],
        "ppi_percent": [report.ppi_percent],
        "refines": [report.refines],
    }
    if labelings is not None:
        summary["adjusted_rand_index"] = [adjusted_rand(*labelings)]
    _save_workbook(path, [
        ("Runs", runs, ()),
        ("Agreement", pd.DataFrame(summary), ("identical",)),
    ])


def write_bench_workbook(report: BenchReport, path):
    results = pd.DataFrame([
        {**asdict(r), "samples_ms": ", ".join(f"{s:.3f}" for s in r.samples_ms)} for r in report.results
    ])
    growth = pd.DataFrame([asdict(g) for g in report.growth],
                          columns=["algorithm", "from_n", "to_n", "ratio", "exponent"])
    summary = pd.DataFrame([{
        "generator": report.generator,
        "epsilon": report.epsilon,
        "policy": report.policy,
        "repeat": report.repeat,
        "sizes": ",".join(str(n) for n in report.sizes),
        "deterministic": report.deterministic,
    }])
    _save_workbook(path, [
        ("Summary", summary, ("deterministic",)),
        ("Timings", results, ()),
        ("Growth", growth, ()),
    ])


def median_ms(samples) -> Optional[float]:
    if not samples:
        return None
    return float(np.median(samples))
