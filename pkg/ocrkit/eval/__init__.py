from ocrkit.eval.benchmark import (
    EvalCase,
    EvalReport,
    format_report,
    load_benchmark,
    report_to_dict,
    run_benchmark,
)
from ocrkit.eval.metrics import Whitespace, levenshtein, normalize, one_minus_edit
