import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ocrkit.errors import EmptyBenchmark, InputError
from ocrkit.eval import (
    EvalCase,
    Whitespace,
    format_report,
    levenshtein,
    load_benchmark,
    normalize,
    one_minus_edit,
    report_to_dict,
    run_benchmark,
)

short_text = st.text(alphabet="abc ", max_size=7)


def _reference(a, b):
    """Plain recursive edit distance."""
    if not a or not b:
        return len(a) + len(b)
    return min(
        _reference(a[1:], b) + 1,
        _reference(a, b[1:]) + 1,
        _reference(a[1:], b[1:]) + (a[0] != b[0]),
    )


@given(short_text, short_text)
def test_levenshtein_matches_reference(a, b):
    assert levenshtein(a, b) == _reference(a, b)


@given(st.text(), st.text())
def test_levenshtein_is_symmetric(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)


def test_levenshtein_known_values():
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("", "abc") == 3
    assert levenshtein("日本語", "日本") == 1


def test_one_minus_edit():
    assert one_minus_edit("kitten", "sitting") == pytest.approx(1 - 3 / 7)
    assert one_minus_edit("", "") == 1.0
    assert one_minus_edit("abc", "") == 0.0
    assert one_minus_edit("same", "same") == 1.0


@given(st.text(), st.text())
def test_one_minus_edit_bounds(a, b):
    assert 0.0 <= one_minus_edit(a, b) <= 1.0


def test_whitespace_modes():
    assert normalize(" a \n\tb ") == " a \n\tb "
    assert normalize(" a \n\tb ", Whitespace.Collapse) == "a b"
    assert one_minus_edit("a  b", "a b") < 1.0
    assert one_minus_edit("a  b", "a b", Whitespace.Collapse) == 1.0


def test_run_benchmark_averages_scenario_means():
    cases = [
        EvalCase("1", "print", "abcd", "abcd"),
        EvalCase("2", "print", "abcd", "abce"),
        EvalCase("3", "print", "abcd", "wxyz"),
        EvalCase("4", "hand", "ab", "ab"),
    ]
    report = run_benchmark(cases)
    assert list(report.scenarios) == ["hand", "print"]
    assert report.scenarios["print"] == pytest.approx(1.75 / 3)
    assert report.scenarios["hand"] == 1.0
    assert report.overall == pytest.approx((1.0 + 1.75 / 3) / 2)
    assert report.count == 4
    assert report.scenario_counts == {"hand": 1, "print": 3}


def test_run_benchmark_ignores_case_order():
    cases = [EvalCase(str(k), "s", "a" * k, "a" * 5) for k in range(6)]
    assert run_benchmark(cases) == run_benchmark(list(reversed(cases)))


def test_run_benchmark_without_cases():
    with pytest.raises(EmptyBenchmark):
        run_benchmark([])


def test_report_formats():
    report = run_benchmark([EvalCase("1", "table", "kitten", "sitting")])
    data = report_to_dict(report)
    assert data == {
        "version": "1",
        "overall": 0.5714,
        "cases": 1,
        "scenarios": [{"scenario": "table", "cases": 1, "score": 0.5714}],
    }
    assert format_report(report).splitlines() == [
        "scenario  cases  1-edit",
        "table         1  0.5714",
        "overall       1  0.5714",
    ]


def _write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


def test_load_benchmark(tmp_path):
    (tmp_path / "preds").mkdir()
    (tmp_path / "preds" / "a.md").write_text("# Title\n", encoding="utf-8")
    path = _write_jsonl(
        tmp_path / "bench.jsonl",
        [
            {"id": "a", "scenario": "report", "gt": "# Title\n", "prediction_path": "preds/a.md"},
            {"id": 2, "scenario": "slide", "gt": "x", "prediction": "y"},
        ],
    )
    cases = load_benchmark(path)
    assert cases == [
        EvalCase("a", "report", "# Title\n", "# Title\n"),
        EvalCase("2", "slide", "y", "x"),
    ]


@pytest.mark.parametrize(
    "record",
    [
        {"id": "a", "scenario": "report", "gt": "x"},
        {"id": "a", "scenario": "report", "gt": "x", "prediction_path": "missing.md"},
        {"scenario": "report", "gt": "x", "prediction": "x"},
    ],
)
def test_load_benchmark_bad_record(tmp_path, record):
    path = _write_jsonl(tmp_path / "bench.jsonl", [{"id": "ok", "scenario": "s", "gt": "", "prediction": ""}, record])
    with pytest.raises(InputError) as e:
        load_benchmark(path)
    assert "bench.jsonl:2" in str(e.value)


def test_load_benchmark_bad_json(tmp_path):
    path = tmp_path / "bench.jsonl"
    path.write_text("{not json\n", encoding="utf-8")
    with pytest.raises(InputError) as e:
        load_benchmark(path)
    assert "bench.jsonl:1" in str(e.value)


def test_load_benchmark_missing_file(tmp_path):
    with pytest.raises(InputError):
        load_benchmark(tmp_path / "nope.jsonl")
