import dataclasses
import json

import pytest

from egraphkit import bench
from egraphkit.bench import CASES, SUITES, format_table, result_hash, run_case, run_once, select


def test_select():
    assert [c.name for c in select("all")] == [c.name for c in CASES]
    assert [c.name for c in select("egraph")] == list(SUITES["egraph"])
    picked = select("prop_logic_demorgan,egraph,prop_logic_demorgan")
    assert [c.name for c in picked] == ["prop_logic_demorgan", *SUITES["egraph"]]
    with pytest.raises(ValueError, match="unknown bench suite"):
        select("nope")


@pytest.mark.parametrize("case", CASES, ids=lambda c: c.name)
def test_goldens(case):
    result = run_once(case)[0]
    assert result_hash(result) == case.golden, result


def test_known_results():
    by_name = {c.name: c for c in CASES}
    assert run_once(by_name["egraph_constructor"])[0] == "classes=10 nodes=10"
    assert run_once(by_name["basic_maths_simpl1"])[0] == "(* a b)"


def test_result_record_schema():
    r = run_case(CASES[0], reps=3)
    d = r.to_dict()
    assert list(d) == ["case", "median_ns", "reps", "stop_reason", "nodes", "classes", "result"]
    assert d["reps"] == 3 and d["median_ns"] > 0 and r.ok
    json.dumps(d)


def test_wrong_golden_is_flagged():
    bad = dataclasses.replace(CASES[0], golden="0" * 16)
    assert not run_case(bad, reps=1).ok
    table = format_table([run_case(bad, reps=1)])
    assert table.splitlines()[0].split("\t")[-1] == "status"
    assert table.splitlines()[1].endswith("\tFAILED")


def test_reps_must_be_positive():
    with pytest.raises(ValueError):
        run_case(CASES[0], reps=0)


def test_figure_is_written(tmp_path):
    from egraphkit.plotting import plot_bench

    results = bench.run_bench("egraph", reps=1)
    path = tmp_path / "bench.png"
    plot_bench(results, path)
    assert path.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
