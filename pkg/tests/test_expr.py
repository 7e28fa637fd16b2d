import numpy as np
import pytest

from abplab.expr import ExprError, evaluate, field_from_expr, mask_from_expr
from abplab.mmspace import build_model_space


def test_arithmetic_and_power_forms():
    env = {"x1": np.array([1.0, 2.0])}
    np.testing.assert_allclose(evaluate("2*x1^2 - 1", env), [1, 7])
    np.testing.assert_allclose(evaluate("2*x1**2 - 1", env), [1, 7])
    np.testing.assert_allclose(evaluate("-(x1 + 1) / 2", env), [-1, -1.5])
    np.testing.assert_allclose(evaluate("max(x1, 1.5) + min(x1, 0) + abs(-x1)", env), [2.5, 4])
    np.testing.assert_allclose(evaluate("exp(0) + sqrt(4) + log(1) + sin(0) + cos(0)", env), 4)


def test_predicates():
    env = {"x1": np.array([0.1, 0.5, 0.9])}
    assert evaluate("x1 > 0.2 and x1 < 0.8", env).tolist() == [False, True, False]
    assert evaluate("0.2 < x1 < 0.8", env).tolist() == [False, True, False]
    assert evaluate("not (x1 < 0.2) or x1 == 0.1", env).tolist() == [True, True, True]


@pytest.mark.parametrize("text", ["__import__('os')", "x1.real", "[1, 2]", "y + 1", "x1 @ x1", "f(x1)",
                                  "lambda: 1", "1 +", "'a'"])
def test_rejects_everything_else(text):
    with pytest.raises(ExprError):
        evaluate(text, {"x1": np.ones(2)})


def test_space_variables():
    c = build_model_space({"model": "circle", "n": 8})
    np.testing.assert_allclose(field_from_expr(c, "theta"), np.arange(8) * np.pi / 4)
    assert mask_from_expr(c, "id < 3").sum() == 3
    s = build_model_space({"model": "sphere2_grid", "n_lat": 4, "n_lon": 6})
    np.testing.assert_allclose(field_from_expr(s, "cos(theta)"), s.coords[:, 2], atol=1e-15)
    np.testing.assert_allclose(field_from_expr(s, "r"), 1.0)
    assert field_from_expr(s, "phi").max() < 2 * np.pi
    g = build_model_space({"model": "interval", "a": 0, "b": 1, "n": 5})
    np.testing.assert_allclose(field_from_expr(g, "3"), 3.0)
    assert field_from_expr(g, "pi").shape == (5,)
