import json
from fractions import Fraction

import pytest

import keanemix


def test_search_pins_the_first_two_stages():
    stages = keanemix.search_stages(2)
    assert stages == [("13", "3"), ("112", "22")]


def test_return_table_exact_values():
    stages = keanemix.search_stages(2)
    t = json.loads(keanemix.return_table_json(stages, 2))
    assert t["b"][1][1] == "17"
    assert t["b"][2][1] == "1997"
    assert t["b"][2][2] == "105"
    assert t["c"][0] == "2004"
    assert t["d"][0] == "211682"


def test_conditions_pass_on_searched_parameters():
    stages = keanemix.search_stages(2)
    rep = keanemix.check_conditions(stages, 2)
    assert rep["all_ok"]
    assert Fraction(rep["units_ratio"]) > Fraction(1, 2)


def test_built_iet_is_exact_and_invertible():
    T = keanemix.build_iet([("13", "3")], 1)
    assert T.lengths == ["1/21", "25/42", "11/42", "2/21"]
    assert T.word == [4, 2, 1, 3]
    x = "3/17"
    assert T.apply_inverse(T.apply(x)) == x
    assert sum(Fraction(l) for l in T.lengths) == 1


def test_mixing_window_on_a_half_rotation():
    T = keanemix.Iet(["1/2", "1/2"], [2, 1])
    J = [("0", "1/2")]
    w = keanemix.mixing_window(T, J, J, 1, 10)
    assert w["miss_count"] == 5
    assert [n for n, h in zip(w["ns"], w["hits"]) if h] == [2, 4, 6, 8, 10]


def test_first_window_prefix_certifies_at_depth_three():
    stages = keanemix.search_stages(3)
    rep = json.loads(keanemix.first_window_json(stages, 0, 3, n_hi=4000))
    assert rep["window"]["window"] == [2004, 4000]
    assert rep["window"]["miss_count"] == 0


def test_obstruction_report_at_depth_three():
    stages = keanemix.search_stages(3)
    rep = json.loads(keanemix.obstruction_json(stages, 3))
    assert rep["min_r"] == "105"
    assert rep["verdict"] is True


def test_domain_errors_surface_as_python_exceptions():
    with pytest.raises(keanemix.DomainError):
        keanemix.Iet(["1/2", "0"], [2, 1])
