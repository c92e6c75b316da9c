"""Per-scenario benchmark runs and their reports."""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

from tqdm.auto import tqdm

from ocrkit.errors import EmptyBenchmark, InputError
from ocrkit.eval.metrics import Whitespace, one_minus_edit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EvalCase:
    id: str
    scenario: str
    prediction: str
    ground_truth: str


@dataclass(frozen=True)
class EvalReport:
    scenarios: Dict[str, float]
    """Mean score per scenario, keyed in scenario name order."""
    overall: float
    """Mean of the scenario means."""
    count: int
    scenario_counts: Dict[str, int] = field(default_factory=dict)


def run_benchmark(
    cases: Sequence[EvalCase],
    whitespace: Whitespace = Whitespace.Keep,
    progress: bool = False,
) -> EvalReport:
    if not cases:
        raise EmptyBenchmark("A benchmark needs at least one case")

    scores: Dict[str, List[float]] = {}
    for case in tqdm(cases, desc="Scoring", unit="case", disable=not progress):
        score = one_minus_edit(case.prediction, case.ground_truth, whitespace)
        scores.setdefault(case.scenario, []).append(score)

    # fsum keeps the means independent of case order
    means = {s: math.fsum(v) / len(v) for s, v in sorted(scores.items())}
    overall = math.fsum(means.values()) / len(means)
    return EvalReport(
        scenarios=means,
        overall=overall,
        count=len(cases),
        scenario_counts={s: len(scores[s]) for s in means},
    )


def load_benchmark(path: Union[str, Path]) -> List[EvalCase]:
    """Reads a JSONL file with one {id, scenario, gt, prediction_path}
    record per line. Prediction paths are relative to the file; a record
    may give its prediction inline as `prediction` instead."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"Benchmark file {path} does not exist")

    cases = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            if "prediction" in record:
                prediction = record["prediction"]
            else:
                pred_path = path.parent / record["prediction_path"]
                prediction = pred_path.read_text(encoding="utf-8")
            cases.append(
                EvalCase(
                    id=str(record["id"]),
                    scenario=str(record["scenario"]),
                    prediction=prediction,
                    ground_truth=record["gt"],
                )
            )
        except (ValueError, KeyError, OSError) as e:
            raise InputError(f"{path}:{lineno}: unreadable benchmark record: {e}") from e
    logger.info("Loaded %d cases from %s", len(cases), path)
    return cases


def report_to_dict(report: EvalReport) -> Dict[str, Any]:
    return {
        "version": "1",
        "overall": round(report.overall, 4) + 0.0,
        "cases": report.count,
        "scenarios": [
            {
                "scenario": s,
                "cases": report.scenario_counts.get(s, 0),
                "score": round(m, 4) + 0.0,
            }
            for s, m in report.scenarios.items()
        ],
    }


def format_report(report: EvalReport) -> str:
    """Plain-text table of scenario means and the overall score."""
    width = max([len("scenario"), len("overall")] + [len(s) for s in report.scenarios])
    rows = [f"{'scenario':<{width}}  {'cases':>5}  {'1-edit':>6}"]
    for s, m in report.scenarios.items():
        rows.append(f"{s:<{width}}  {report.scenario_counts.get(s, 0):>5}  {m:>6.4f}")
    rows.append(f"{'overall':<{width}}  {report.count:>5}  {report.overall:>6.4f}")
    return "\n".join(rows)
