"""Scoring predictions against references, with optional execution."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from oqleval.corpus.dataset import Instance
from oqleval.errors import MetricError
from oqleval.execution.executor import ExecutionStatus, Executor
from oqleval.metrics.elements import ex, ex_soft
from oqleval.metrics.scores import chrf, em, oqs
from oqleval.utils.file_utils import atomic_write_text

logger = logging.getLogger(__name__)

FLAG_MISSING_PREDICTION = "missing-prediction"
FLAG_REFERENCE_UNPARSED = "reference-unparsed"
FLAG_REFERENCE_FAILED = "reference-failed"

REPORT_COLUMNS = ("id", "chrf", "kvs", "trees", "oqs", "em", "status", "ex", "ex_soft")
REPORT_FILE = "report.tsv"
SUMMARY_FILE = "summary.txt"


@dataclass(frozen=True)
class EvalRow:
    """Metrics of one instance; execution fields are None when not executed."""

    id: str
    chrf: float
    kvs: float
    trees: float
    oqs: float
    em: bool
    status: Optional[str] = None
    ex: Optional[bool] = None
    ex_soft: Optional[float] = None
    flags: Tuple[str, ...] = ()


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else 0.0


@dataclass(frozen=True)
class EvalReport:
    rows: Tuple[EvalRow, ...]
    executed: bool = False

    def _percent(self, values: Sequence[float]) -> float:
        return 100.0 * _mean(values)

    @property
    def chrf(self) -> float:
        return self._percent([r.chrf for r in self.rows])

    @property
    def kvs(self) -> float:
        return self._percent([r.kvs for r in self.rows])

    @property
    def trees(self) -> float:
        return self._percent([r.trees for r in self.rows])

    @property
    def oqs(self) -> float:
        return self._percent([r.oqs for r in self.rows])

    @property
    def em(self) -> float:
        return self._percent([1.0 if r.em else 0.0 for r in self.rows])

    @property
    def errors(self) -> int:
        rejected = ExecutionStatus.SYNTAX_ERROR.value
        return sum(1 for r in self.rows if r.status == rejected)

    @property
    def ex(self) -> float:
        """EX over rows whose reference executed."""
        return self._percent(
            [1.0 if r.ex else 0.0 for r in self.rows if r.ex is not None]
        )

    @property
    def ex_soft(self) -> float:
        return self._percent([r.ex_soft for r in self.rows if r.ex_soft is not None])

    def count_flag(self, flag: str) -> int:
        return sum(1 for r in self.rows if flag in r.flags)

    def summary(self) -> Dict[str, float]:
        values: Dict[str, float] = {
            "chrf": self.chrf,
            "kvs": self.kvs,
            "trees": self.trees,
            "oqs": self.oqs,
            "em": self.em,
        }
        if self.executed:
            values["errors"] = float(self.errors)
            values["ex"] = self.ex
            values["ex_soft"] = self.ex_soft
        return values


def _score_row(
    instance: Instance, hypothesis: Optional[str], executor: Optional[Executor]
) -> EvalRow:
    flags: List[str] = []
    if hypothesis is None:
        flags.append(FLAG_MISSING_PREDICTION)
        hypothesis = ""

    try:
        breakdown = oqs(hypothesis, instance.query)
        chrf_value = breakdown.chrf.value
        kvs_value = breakdown.kvs.value
        trees_value = breakdown.trees.value
        oqs_value = breakdown.oqs.value
        flags.extend(breakdown.flags)
    except MetricError as e:
        logger.warning(f"Instance {instance.id}: {e}")
        flags.append(FLAG_REFERENCE_UNPARSED)
        chrf_value = chrf(hypothesis, instance.query).value
        kvs_value = trees_value = 0.0
        oqs_value = chrf_value / 3.0

    row = EvalRow(
        id=instance.id,
        chrf=chrf_value,
        kvs=kvs_value,
        trees=trees_value,
        oqs=oqs_value,
        em=em(hypothesis, instance.query),
        flags=tuple(flags),
    )
    if executor is None:
        return row

    generated = executor.execute(hypothesis)
    reference = executor.execute(instance.query)
    if not reference.ok:
        logger.warning(
            f"Instance {instance.id}: reference execution failed "
            f"({reference.status.value}): {reference.error_message[:200]}"
        )
        return replace(
            row,
            status=generated.status.value,
            flags=row.flags + (FLAG_REFERENCE_FAILED,),
        )

    assert reference.elements is not None
    if generated.ok:
        assert generated.elements is not None
        exact = ex(generated.elements, reference.elements)
        soft = ex_soft(generated.elements, reference.elements).value
    else:
        exact, soft = False, 0.0
    return replace(row, status=generated.status.value, ex=exact, ex_soft=soft)


def run_eval(
    instances: Sequence[Instance],
    predictions: Mapping[str, str],
    executor: Optional[Executor] = None,
    jobs: int = 1,
) -> EvalReport:
    """
    Score predictions for the given instances.

    Missing predictions are scored as the empty string and flagged. With an
    executor, both queries are run; instances whose reference fails are left
    out of EX and EX_soft.
    """
    def score(instance: Instance) -> EvalRow:
        return _score_row(instance, predictions.get(instance.id), executor)

    if jobs <= 1:
        rows = [score(i) for i in instances]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(score, instances))

    report = EvalReport(rows=tuple(rows), executed=executor is not None)
    missing = report.count_flag(FLAG_MISSING_PREDICTION)
    if missing:
        logger.warning(f"{missing} instances had no prediction")
    failed = report.count_flag(FLAG_REFERENCE_FAILED)
    if failed:
        logger.warning(f"{failed} references failed to execute and were left out of EX")
    logger.info(f"Evaluated {len(rows)} instances")
    return report


def _cell(value: Optional[float]) -> str:
    return "-" if value is None else f"{value:.4f}"


def render_report_tsv(report: EvalReport) -> str:
    """One row per instance, metric values as fractions."""
    lines = ["\t".join(REPORT_COLUMNS)]
    for row in report.rows:
        exact = None if row.ex is None else float(row.ex)
        lines.append(
            "\t".join(
                [
                    row.id,
                    _cell(row.chrf),
                    _cell(row.kvs),
                    _cell(row.trees),
                    _cell(row.oqs),
                    "1" if row.em else "0",
                    row.status or "-",
                    "-" if exact is None else str(int(exact)),
                    _cell(row.ex_soft),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def render_report_table(report: EvalReport) -> str:
    """Aggregate table: chrF, KVS, TreeS, OQS, EM, #Errors, EX, EX_soft."""
    headers = ["chrF", "KVS", "TreeS", "OQS", "EM"]
    values = [
        f"{report.chrf:.1f}",
        f"{report.kvs:.1f}",
        f"{report.trees:.1f}",
        f"{report.oqs:.1f}",
        f"{report.em:.1f}",
    ]
    if report.executed:
        headers += ["#Errors", "EX", "EX_soft"]
        values += [f"{report.errors}", f"{report.ex:.1f}", f"{report.ex_soft:.1f}"]

    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    lines = [
        "  ".join(h.rjust(w) for h, w in zip(headers, widths)),
        "  ".join(v.rjust(w) for v, w in zip(values, widths)),
        "",
        f"Instances: {len(report.rows)}",
        f"Missing predictions: {report.count_flag(FLAG_MISSING_PREDICTION)}",
    ]
    if report.executed:
        lines.append(
            f"Reference execution failures: {report.count_flag(FLAG_REFERENCE_FAILED)}"
        )
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, out_dir: Union[str, Path]) -> Tuple[Path, Path]:
    """Write `report.tsv` and `summary.txt` into the output directory."""
    out = Path(out_dir)
    tsv = atomic_write_text(out / REPORT_FILE, render_report_tsv(report))
    summary = atomic_write_text(out / SUMMARY_FILE, render_report_table(report))
    return tsv, summary
