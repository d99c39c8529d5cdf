import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skindepth.constants import C
from skindepth.errors import DomainError, NotFoundError, ParseError
from skindepth.materials import (
    ChiTable,
    MaterialParams,
    ResponsePoint,
    available_presets,
    from_dimensionless,
    load_chi_table,
    load_material_config,
    penetration_depth,
    preset,
    resolve_material,
    separation_to_d,
    to_dimensionless,
)


def test_presets_match_published_parameters():
    gold = preset("gold")
    assert gold.omega_p == 1.37e16
    assert gold.gamma == 3e-3
    # v_F = 1.4e8 cm/s
    assert gold.v_f_over_c * C == pytest.approx(1.4e6, rel=1e-12)
    assert gold.v_f_over_c == pytest.approx(4.67e-3, rel=5e-3)
    assert preset("gold-force-fit").gamma == 4e-3
    k = preset("potassium")
    assert k.gamma == 1e-3
    assert k.v_f_over_c * C == pytest.approx(0.85e6, rel=1e-12)
    assert k.omega_p == gold.omega_p


def test_unknown_preset_lists_names():
    with pytest.raises(NotFoundError) as exc:
        preset("silver")
    for name in available_presets():
        assert name in str(exc.value)


def test_penetration_depth():
    assert penetration_depth(preset("gold")) == pytest.approx(21.88, abs=0.01)
    m = MaterialParams(omega_p=C / 1.0, gamma=0.0, v_f_over_c=1e-3)
    assert penetration_depth(m) == pytest.approx(1e9, rel=1e-12)
    g = preset("gold")
    assert penetration_depth(g.replace(omega_p=2 * g.omega_p)) == pytest.approx(
        penetration_depth(g) / 2, rel=1e-15)


def test_to_dimensionless_examples():
    g = preset("gold")
    p = to_dimensionless(g, 1.37e16, 0.0)
    assert (p.Omega, p.Q, p.axis) == (1.0, 0.0, "real")
    p = to_dimensionless(g, 0.0, 1.0 / g.delta_m)
    assert p.Q == pytest.approx(1.0, rel=1e-15)
    # hand arithmetic: c * 4.57e4 / 1.37e16 = 1.00004e-3
    p = to_dimensionless(g, 1.37e13, 4.57e4)
    assert p.Omega == pytest.approx(1e-3, rel=1e-12)
    assert p.Q == pytest.approx(299792458 * 4.57e4 / 1.37e16, rel=1e-12)
    assert p.Q == pytest.approx(1e-3, rel=1e-4)
    with pytest.raises(DomainError):
        to_dimensionless(g, -1.0, 0.0)


@given(st.floats(0, 1e18), st.floats(0, 1e12))
def test_round_trip(omega, q):
    g = preset("gold")
    w, k = from_dimensionless(g, to_dimensionless(g, omega, q))
    assert w == pytest.approx(omega, rel=1e-12, abs=1e-300)
    assert k == pytest.approx(q, rel=1e-12, abs=1e-300)


def test_separation_to_d():
    g = preset("gold")
    assert separation_to_d(g, penetration_depth(g)) == pytest.approx(1.0)


@pytest.mark.parametrize("kwargs", [
    dict(omega_p=0.0, gamma=0.1, v_f_over_c=1e-3),
    dict(omega_p=1e16, gamma=1.0, v_f_over_c=1e-3),
    dict(omega_p=1e16, gamma=-1e-3, v_f_over_c=1e-3),
    dict(omega_p=1e16, gamma=1e-3, v_f_over_c=1.0),
    dict(omega_p=math.inf, gamma=1e-3, v_f_over_c=1e-3),
])
def test_material_invariants(kwargs):
    with pytest.raises(DomainError):
        MaterialParams(**kwargs)


def test_response_point_flags():
    assert ResponsePoint(1.0, 0.5, "real").propagating
    assert ResponsePoint(1.0, 2.0, "real").evanescent
    assert ResponsePoint(1.0, 0.5, "imaginary").evanescent
    with pytest.raises(DomainError):
        ResponsePoint(-1.0, 0.0)
    with pytest.raises(DomainError):
        ResponsePoint(1.0, 0.0, "complex")


def test_chi_table_examples():
    t = load_chi_table(b"omega_dimensionless,chi\n1e-3,5.0\n1e-1,1.0\n")
    assert t(1e-2) == pytest.approx(3.0, rel=1e-14)
    assert t(1e-5) == 5.0
    assert t(10.0) == 1.0
    empty = load_chi_table(b"omega_dimensionless,chi\n")
    assert len(empty) == 0
    assert empty(0.3) == 0.0


@given(st.lists(st.floats(0, 10), min_size=2, max_size=8))
def test_chi_table_exact_at_nodes(values):
    omega = np.logspace(-4, 0, len(values))
    t = ChiTable(omega, np.array(values))
    np.testing.assert_array_equal(t(omega), values)


def test_chi_table_comments_and_stream():
    text = "# gold interband\nomega_dimensionless,chi\n\n1e-3,2.0  # low\n1e-1,1.0\n"
    t = load_chi_table(io.StringIO(text))
    assert t(1e-3) == 2.0


@pytest.mark.parametrize("text,line", [
    ("omega_dimensionless,chi\n1e-2,1\n1e-3,1\n", 3),
    ("omega_dimensionless,chi\n-1e-2,1\n", 2),
    ("omega_dimensionless,chi\n1e-2,abc\n", 2),
    ("omega_dimensionless,chi\n1e-2\n", 2),
    ("omega_dimensionless,chi\n1e-2,-1\n", 2),
    ("freq,chi\n", 1),
])
def test_chi_table_parse_errors(text, line):
    with pytest.raises(ParseError) as exc:
        load_chi_table(text)
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_complex_table_is_real_axis():
    t = load_chi_table("omega_dimensionless,chi_re,chi_im\n1e-2,1.0,0.5\n1e-1,2.0,0.1\n")
    assert t.axis == "real"
    m = MaterialParams(1e16, 1e-3, 1e-3, chi_ib=t)
    assert m.chi(1e-2, "real") == pytest.approx(1.0 + 0.5j)
    with pytest.raises(DomainError):
        m.chi(1e-2, "imaginary")


def test_material_config(tmp_path):
    (tmp_path / "chi.csv").write_text("omega_dimensionless,chi\n1e-3,1.0\n1e-1,0.5\n")
    cfg = tmp_path / "metal.cfg"
    cfg.write_text("# test metal\nname = testium\nomega_p_rad_s = 1e16\ngamma = 2e-3\n"
                   "v_f_cm_s = 1e8\nchi_table = chi.csv\n")
    m = load_material_config(cfg)
    assert m.name == "testium"
    assert m.gamma == 2e-3
    assert m.v_f_over_c == pytest.approx(1e6 / C)
    assert m.chi(1e-3) == 1.0
    assert resolve_material(str(cfg)).name == "testium"
    assert resolve_material("gold").name == "gold"
    with pytest.raises(NotFoundError):
        resolve_material(str(tmp_path / "missing.cfg"))


def test_material_config_errors(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("omega_p_rad_s = 1e16\ngamma = 2e-3\n")
    with pytest.raises(ParseError, match="v_f_cm_s"):
        load_material_config(cfg)
    cfg.write_text("omega_p_rad_s = 1e16\ngamma = fast\nv_f_cm_s = 1e8\n")
    with pytest.raises(ParseError) as exc:
        load_material_config(cfg)
    assert exc.value.line == 2
