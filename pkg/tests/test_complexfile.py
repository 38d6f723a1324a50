import numpy as np
import pytest

from qtorsion import exact, hodge as hg
from qtorsion.complexfile import format_complex, parse_complex, read_complex
from qtorsion.errors import ValidationError

TEXT = """
complex 2   # top degree
dims 1 2 1
d 0
1
-1/2
d 1
1 2
gram 1
2 0
0 1
star 1
0 1
1 0
"""


def test_parse_exact_entries():
    c, star = parse_complex(TEXT)
    assert c.dims == (1, 2, 1)
    assert c.exact_d[0][1, 0] == exact.sp.Rational(-1, 2)
    np.testing.assert_array_equal(c.gram[0], np.eye(1))
    assert star.maps[1] is not None and star.maps[0] is None
    assert hg.kernel_dims(c) == (0, 0, 0)


def test_round_trip(tmp_path):
    c, star = parse_complex(TEXT)
    p = tmp_path / "c.txt"
    p.write_text(format_complex(c, star))
    c2, star2 = read_complex(p)
    assert format_complex(c2, star2) == format_complex(c, star)
    assert exact.torsion_square(c2) == exact.torsion_square(c)


def test_float_complex_formats():
    c = hg.FiniteHodgeComplex.build([np.array([[2.0], [0.5]])])
    c2, _ = parse_complex(format_complex(c))
    np.testing.assert_array_equal(c2.d[0], c.d[0])


@pytest.mark.parametrize(
    "text",
    [
        "",
        "dims 1 1\n",
        "complex 1\ndims 1\n",
        "complex 1\ndims 1 1\nd 0\n1 2\n",
        "complex 1\ndims 1 1\nd 0\n",
        "complex 1\ndims 1 1\nd 3\n1\n",
        "complex 1\ndims 1 1\nd 0\n1\nd 0\n1\n",
        "complex 1\ndims 1 1\nd 0\nx\n",
        "complex 1\ndims 1 1\nfoo 0\n1\n",
        "complex 2\ndims 1 1 1\nd 0\n1\nd 1\n1\n",
        "complex 1\ndims 1 1\ngram 0\n-1\n",
    ],
)
def test_malformed(text):
    with pytest.raises(ValidationError):
        parse_complex(text)
