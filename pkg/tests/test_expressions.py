import numpy as np
import pytest

from carreau_film.errors import ConfigError
from carreau_film.expressions import Expression


@pytest.mark.parametrize(
    "src, expected",
    [
        ("1 + 2 * x", lambda x, y: 1 + 2 * x),
        ("-(x - y) ** 2", lambda x, y: -((x - y) ** 2)),
        ("sin(pi * x) * cos(y) + exp(-x)", lambda x, y: np.sin(np.pi * x) * np.cos(y) + np.exp(-x)),
        ("abs(x - 0.5) / e", lambda x, y: np.abs(x - 0.5) / np.e),
        ("min(x, y, 0.3)", lambda x, y: np.minimum(np.minimum(x, y), 0.3)),
        ("max(x, y)", lambda x, y: np.maximum(x, y)),
        ("+x", lambda x, y: x),
    ],
)
def test_evaluates(src, expected):
    x, y = np.meshgrid(np.linspace(0, 1, 5), np.linspace(0, 2, 4), indexing="ij")
    np.testing.assert_allclose(Expression(src)(x, y), expected(x, y), rtol=1e-15)


def test_constant_broadcasts():
    out = Expression("2.5")(np.zeros((3, 2)), np.zeros((3, 2)))
    assert out.shape == (3, 2) and np.all(out == 2.5)


@pytest.mark.parametrize(
    "src",
    [
        "__import__('os')",
        "x.real",
        "z + 1",
        "sqrt(x)",
        "x if y else 0",
        "x < y",
        "'a'",
        "True",
        "sin(x, y)",
        "max(x)",
        "min(x, key=y)",
        "x // 2",
        "[x]",
        "lambda: 1",
        "1 +",
    ],
)
def test_rejects(src):
    with pytest.raises(ConfigError) as info:
        Expression(src, "gap")
    assert info.value.field == "gap"


def test_rejects_non_string():
    with pytest.raises(ConfigError):
        Expression(3.0)
