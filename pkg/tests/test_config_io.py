import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gapforge import config as C
from gapforge import io
from gapforge.errors import ConfigError

SCHEMA = {
    "dims": C.Key(C.p_int_list, [2]),
    "diams": C.Key(C.p_float_list, [1.0]),
    "flag": C.Key(C.p_bool, False),
    "C": C.Key(C.p_auto_float, "auto"),
    "name": C.Key(C.p_str, "x"),
    "lam": C.Key(C.p_opt_float, None),
}


def test_value_parsers():
    assert C.p_int_list("2..5,7") == [2, 3, 4, 5, 7]
    assert C.p_float_list("linspace:0,1,3") == [0.0, 0.5, 1.0]
    assert C.p_float_list("logspace:1,100,3") == pytest.approx([1, 10, 100])
    assert C.p_bool("Yes") and not C.p_bool("off")
    assert C.p_auto_float("auto") == "auto" and C.p_auto_float("2") == 2.0
    with pytest.raises(ValueError):
        C.p_int_list("5..2")
    with pytest.raises(ValueError):
        C.p_choice("a", "b")("c")


def test_file_overrides_and_flags():
    text = "# sweep\ndims = 2..3\nflag = true   # trailing comment\n\n"
    v = C.resolve(SCHEMA, text, "f.cfg", {"diams": "0.5,1", "name": None})
    assert v["dims"] == [2, 3] and v["flag"] is True and v["diams"] == [0.5, 1.0] and v["name"] == "x"


@pytest.mark.parametrize("text,line,msg", [
    ("dims = 2\nbogus = 1\n", 2, "unknown key"),
    ("dims = 2\n\ndims = 3\n", 3, "duplicate"),
    ("flag = maybe\n", 1, "bad value"),
    ("just words\n", 1, "key = value"),
])
def test_config_errors_carry_line_numbers(text, line, msg):
    with pytest.raises(ConfigError) as ei:
        C.parse_text(text, SCHEMA, "exp.cfg")
    assert ei.value.line == line
    assert msg in str(ei.value) and "exp.cfg" in str(ei.value)


@given(st.lists(st.integers(1, 50), min_size=1, max_size=5),
       st.lists(st.floats(1e-3, 1e3, allow_nan=False), min_size=1, max_size=5), st.booleans(),
       st.one_of(st.just("auto"), st.floats(0.1, 10)), st.one_of(st.none(), st.floats(0.1, 10)))
def test_render_round_trips(dims, diams, flag, c, lam):
    v = {"dims": dims, "diams": diams, "flag": flag, "C": c, "name": "run", "lam": lam}
    assert C.resolve(SCHEMA, C.render(v)) == v


def test_literals():
    dom = C.parse_domain("ball:0,0;0.5", "poincare-disk")
    assert dom.chart == "poincare-disk" and dom.dim == 2
    assert C.parse_domain("polygon:0,0;1,0;0,1").contains(np.array([[0.2, 0.2]]))[0]
    assert C.parse_factor("sphere-chart:2").K == 2.0
    assert C.parse_weight("const:3") == 3.0
    assert C.parse_weight("poincare")(np.zeros((1, 2)))[0] == pytest.approx(4.0)
    assert C.parse_profile("quadratic:1.5,0.2") == {"sigma": 1.5, "C": 0.2}
    for bad in ("ball:0,0", "hexagon:1", "poincare:3"):
        with pytest.raises(ValueError):
            (C.parse_factor if bad.startswith("poincare") else C.parse_domain)(bad)
    assert C.literal(C.parse_profile)(" const:1 ") == "const:1"


def test_json_handles_special_values(tmp_path):
    obj = {"a": float("inf"), "b": np.float64("nan"), "c": np.arange(3), "d": mpmath.mpf("1e-400000"),
           "e": (np.bool_(True), None)}
    p = io.write_json(tmp_path / "r.json", obj)
    back = json.loads(p.read_text())
    assert back["a"] == "inf" and back["b"] == "nan" and back["c"] == [0, 1, 2]
    assert back["d"].endswith("e-400000") and back["e"] == [True, None]


def test_csv_quoting(tmp_path):
    p = io.write_csv(tmp_path / "t.csv", ["name", "x"], [["a,b", 0.1], ['say "hi"', None]])
    rows = io.read_csv(p)
    assert rows[0] == {"name": "a,b", "x": "0.1"} and rows[1]["name"] == 'say "hi"' and rows[1]["x"] == ""


def test_gnuplot_pair(tmp_path):
    dat, plt = io.write_gnuplot(tmp_path / "g", ["x", "y"], [[(0, 1), (1, math.nan)], [(0, 2)]],
                                blocks=["A", "B"], title="t")
    text = dat.read_text()
    assert "# block A" in text and "NaN" in text
    script = plt.read_text()
    assert "index 1" in script and script.startswith('set title "t"')
