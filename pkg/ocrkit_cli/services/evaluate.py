"""Service to score predictions against a benchmark file."""

import json
from pathlib import Path
from typing import Optional, Union

from ocrkit.eval import EvalReport, Whitespace, load_benchmark, report_to_dict, run_benchmark
from ocrkit_cli import utils


def evaluate(
    benchmark_path: Union[str, Path],
    whitespace: Whitespace = Whitespace.Keep,
    report_path: Optional[Union[str, Path]] = None,
) -> EvalReport:
    """Runs the benchmark and optionally writes its JSON report."""
    benchmark_path = utils.check_input(benchmark_path)
    report = run_benchmark(load_benchmark(benchmark_path), whitespace, progress=utils.interactive())
    if report_path is not None:
        report_path = Path(report_path)
        report_path.parent.mkdir(parents=True, exist_ok=True)
        report_path.write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")
    return report
