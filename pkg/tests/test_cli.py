import csv
import json
import math

import numpy as np
import pytest

from slitvlc import cli, link
from slitvlc.errors import QuadratureError
from slitvlc.sweep import preset

SMALL_LINK = """\
[sweep]
kind = m_sweep
metrics = P_over_Pmax SIR SIR0 SIR_enh

[params]
a_nm = 25
d_mm = 2.5
h_mm = 1000
b_over_d = 1
D_over_d = 2
f_THz = 600

[axes]
M = values 10 100 1000
"""


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_pattern_preset_table(tmp_path):
    out = tmp_path / "fig2a.csv"
    assert run("pattern", "--preset", "fig2a", "--out", out) == 0
    header, rows = read_csv(out)
    assert header[:3] == ["phi_rad", "k0L", "M"] and header[-1] == "sentinel_reason"
    assert len(rows) == 3 * 4001
    g = np.array([float(r[header.index("G_scaled")]) for r in rows])
    assert g.max() == 4004001.0
    assert json.loads((tmp_path / "fig2a.csv.meta.json").read_text())["name"] == "fig2a"


def test_single_slit_flag(tmp_path):
    out = tmp_path / "one.csv"
    assert run("pattern", "--preset", "fig2a", "--slits", "1", "--out", out) == 0
    header, rows = read_csv(out)
    assert {r[header.index("G_scaled")] for r in rows} == {"1.0"}


def test_csv_floats_round_trip(tmp_path):
    cfg = tmp_path / "link.ini"
    cfg.write_text(SMALL_LINK)
    out = tmp_path / "link.csv"
    assert run("link", "--config", cfg, "--out", out) == 0
    header, rows = read_csv(out)
    assert header == ["M", "P_over_Pmax", "SIR", "SIR0", "SIR_enh", "sentinel_reason"]
    assert [r[0] for r in rows] == ["10", "100", "1000"]
    direct = cli.run_sweep(cli.parse_config(SMALL_LINK).spec)
    for text_row, row in zip(rows, direct.rows):
        assert [float(x) for x in text_row[1:-1]] == row[1:-1]


def test_malformed_config_lists_every_problem(tmp_path, caplog):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(SMALL_LINK.replace("a_nm = 25", "a_nm = banana\ncolour = red")
                   .replace("M = values 10 100 1000", "M = linear 1 10"))
    out = tmp_path / "never.csv"
    assert run("link", "--config", cfg, "--out", out) == 2
    assert not out.exists()
    text = caplog.text
    assert "a_nm" in text and "colour" in text and "axis M" in text
    assert "missing parameter 'a_nm'" not in text


def test_unknown_section_rejected(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(SMALL_LINK + "\n[extras]\nfoo = 1\n")
    assert run("link", "--config", cfg) == 2


def test_missing_config_file(tmp_path):
    assert run("link", "--config", tmp_path / "absent.ini") == 2


def test_wrong_command_for_kind(tmp_path):
    assert run("map", "--preset", "fig3", "--out", tmp_path / "x.csv") == 2


def test_infinite_interferer_distance(tmp_path):
    out = tmp_path / "inf.csv"
    assert run("link", "--preset", "fig3", "--override", "D_over_d=inf",
               "--override", "axes.M=values 100 1000", "--out", out) == 0
    header, rows = read_csv(out)
    for r in rows:
        assert r[header.index("SIR_enh")] == "inf"
        assert r[-1] == "infinite_sir"


def test_json_output(tmp_path):
    out = tmp_path / "inf.json"
    assert run("link", "--preset", "fig3", "--override", "D_over_d=inf",
               "--override", "axes.M=values 100 1000", "--format", "json", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert doc["columns"][-1] == "sentinel_reason"
    assert doc["metadata"]["name"] == "fig3"
    assert all(row[doc["columns"].index("SIR")] == "inf" for row in doc["rows"])
    assert all(isinstance(row[1], int) for row in doc["rows"])


def test_map_ordering_and_symmetry(tmp_path):
    out = tmp_path / "map.csv"
    assert run("map", "--preset", "fig5_small", "--override", "axes.beta_deg=linear -40 40 5",
               "--override", "axes.l_over_d=linear -2 2 9", "--out", out) == 0
    header, rows = read_csv(out)
    assert header[:2] == ["beta_rad", "l_over_d"]
    beta = [float(r[0]) for r in rows]
    ell = [float(r[1]) for r in rows]
    assert beta == sorted(beta)
    assert ell[:9] == sorted(ell[:9])
    assert math.isclose(beta[0], math.radians(-40), rel_tol=1e-15)
    k = header.index("P_over_Pmax")
    row0 = [float(r[k]) for r in rows if float(r[0]) == 0.0]
    assert len(row0) == 9
    assert np.allclose(row0, row0[::-1], rtol=1e-9, atol=0)


def test_reruns_are_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert run("link", "--preset", "fig3", "--override", "axes.M=log 1 20000 6", "--out", p) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_nonconvergence_exit_code(tmp_path, monkeypatch):
    def stuck(*args, **kwargs):
        raise QuadratureError("stuck", estimate=0.0, error=1.0)

    monkeypatch.setattr(link, "received_power", stuck)
    out = tmp_path / "nc.csv"
    assert run("link", "--preset", "fig3", "--override", "axes.M=values 10 20", "--out", out) == 3
    _, rows = read_csv(out)
    assert all(r[-1] == "nonconvergence" for r in rows)


@pytest.mark.parametrize("name", sorted(cli.PRESETS))
def test_preset_dump_round_trip(tmp_path, name):
    out = tmp_path / f"{name}.ini"
    assert run("preset-dump", "--preset", name, "--out", out) == 0
    cfg = cli.parse_config(out.read_text())
    assert cfg.spec == preset(name)
    assert cfg.format == "csv" and cfg.out is None


def test_analyze_capacity_and_lobes(capsys):
    assert run("analyze", "--preset", "fig3", "--override", "f_THz=600") == 0
    text = capsys.readouterr().out
    assert "slit capacity N" in text and "50000" in text
    assert "20013" in text
    assert "n/a" in text  # M is swept in this preset


def test_analyze_at_500_nm_gives_20000_lobes():
    rows = dict((label, value) for label, value, _ in cli.analyze(
        {"a_nm": 25.0, "d_mm": 2.5, "f_THz": 299792458.0 / 500e-9 / 1e12}))
    assert rows["V (floor(4d/lambda))"] == 20000


def test_analyze_minimum_slits():
    rows = dict((label, value) for label, value, _ in cli.analyze(
        {"a_nm": 10.0, "f_THz": 600.0, "k0L": math.pi, "M": 1000, "h_mm": 0.4 * 1000 * 499.65e-6}))
    wavelength = rows["wavelength"]
    L = wavelength / 2 * 1e-9
    d = 1000 * L
    h = 400 * d
    rows = dict((label, value) for label, value, _ in cli.analyze(
        {"a_nm": 10.0, "f_THz": 600.0, "k0L": math.pi, "M": 1000, "h_mm": h * 1e3}))
    assert rows["minimum M for h"] == 400


def test_analyze_saturated_beam(capsys):
    assert run("analyze", "--override", "a_nm=10", "--override", "f_THz=600",
               "--override", "k0L=0.5", "--override", "M=1", "--format", "json") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["main-lobe width 2theta"] == "main lobe fills half-space"


def test_analyze_needs_inputs():
    assert run("analyze", "--override", "a_nm=10") == 2
