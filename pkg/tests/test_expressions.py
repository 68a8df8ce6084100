"""The penalty expression grammar."""

import math

import numpy as np
import pytest

from levyfluct import SpecError, compile_expression


def test_polynomials_and_arithmetic():
    f = compile_expression("2*y**2 - y/2 + 1")
    assert f(3.0) == pytest.approx(2 * 9 - 1.5 + 1)
    arr = f(np.array([0.0, 1.0]))
    assert np.allclose(arr, [1.0, 2.5])


def test_exp_abs_max_min():
    f = compile_expression("exp(-abs(y)) + max(y, 0) - min(y, 0)")
    assert f(-2.0) == pytest.approx(math.exp(-2) + 0.0 + 2.0)
    assert f(1.5) == pytest.approx(math.exp(-1.5) + 1.5)


def test_indicator():
    f = compile_expression("indicator(y < 0) * (-y)")
    assert f(-3.0) == 3.0
    assert f(2.0) == 0.0
    with pytest.raises(SpecError):
        compile_expression("indicator(y)")
    with pytest.raises(SpecError):
        compile_expression("indicator(0 < y < 1)")


def test_scale_symbol_binding():
    w = lambda y: 2.0 * np.maximum(np.asarray(y, dtype=float), 0.0)
    f = compile_expression("W(y)", w=w)
    assert f(1.5) == 3.0
    with pytest.raises(SpecError):
        compile_expression("W(y)")        # not bound


def test_rejections():
    for bad in ["__import__('os')", "y.real", "lambda z: z", "[1,2]",
                "unknown(y)", "z + 1", "'str'", "y @ y"]:
        with pytest.raises(SpecError):
            compile_expression(bad)
