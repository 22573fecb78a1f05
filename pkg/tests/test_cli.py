import csv
import json

import numpy as np
import pytest

from kerrchord import cli


def _run(tmp_path, *argv):
    return cli.main(list(argv) + ["--out", str(tmp_path / "run")])


def _manifest(tmp_path):
    return json.loads((tmp_path / "run.json").read_text())


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_wigner_exact(tmp_path):
    assert _run(tmp_path, "wigner", "--t", "0", "--res", "65", "--window", "-8:8") == 0
    rows = _rows(tmp_path / "run.csv")
    assert rows[0] == ["p", "q", "re", "im"]
    data = np.array(rows[1:], float)
    k = np.argmax(data[:, 2])
    assert data[k, :2] == pytest.approx([3.0, 4.0])
    assert data[k, 2] == pytest.approx(1 / np.pi, abs=1e-8)
    m = _manifest(tmp_path)
    for key in ("hbar", "fock_n", "grid", "mode", "wall_time_s", "version", "color_scale", "tail_tol"):
        assert key in m
    assert m["fock_n"] == 52
    assert (tmp_path / "run.ppm").exists()


def test_wigner_twa_no_image(tmp_path):
    assert _run(tmp_path, "wigner", "--mode", "twa", "--t", "0.071", "--res", "33", "--no-image") == 0
    assert not (tmp_path / "run.ppm").exists()
    assert _manifest(tmp_path)["mode"] == "twa"


def test_ppm_orientation(tmp_path):
    # peak at p = 3, q = 4: right of centre horizontally, above centre vertically
    assert _run(tmp_path, "wigner", "--t", "0", "--res", "17", "--window", "-8:8") == 0
    raw = (tmp_path / "run.ppm").read_bytes()
    header, body = raw.split(b"\n", 3)[:3], raw.split(b"\n", 3)[3]
    assert header == [b"P6", b"17 17", b"255"]
    img = np.frombuffer(body, np.uint8).reshape(17, 17, 3).astype(int)
    # signed map: strongest red has the smallest green/blue
    row, col = np.unravel_index(np.argmin(img[:, :, 1]), (17, 17))
    assert (row, col) == (4, 11)


def test_heatmap_rgb_layout():
    v = np.zeros((3, 2))
    v[2, 1] = 1.0                       # max a, max b
    rgb = cli.heatmap_rgb(v, "magnitude")
    assert rgb.shape == (2, 3, 3)
    assert np.all(rgb[0, 2] == 0.0)     # top-right is dark


def test_chord_slice_and_abs(tmp_path):
    assert _run(tmp_path, "chord", "--t", "0", "--slice", "xi_p=0", "--window", "-3:3", "--res", "13") == 0
    rows = _rows(tmp_path / "run.csv")
    assert rows[0] == ["xi_q", "re", "im", "abs", "arg"]
    data = np.array(rows[1:], float)
    assert np.allclose(data[:, 3], np.exp(-data[:, 0] ** 2 / 4) / (2 * np.pi), atol=1e-10)
    assert _run(tmp_path, "chord", "--t", "0", "--quantity", "abs", "--res", "21") == 0


def test_chord_tca_manifest(tmp_path):
    assert _run(tmp_path, "chord", "--mode", "tca", "--t", "0.071", "--res", "9", "--no-image") == 0
    m = _manifest(tmp_path)
    assert m["validity_radius"] == pytest.approx(np.pi / (4 * 0.071 * 5))
    assert m["boundary_mass"] < 1e-8


def test_csv_precision(tmp_path):
    assert _run(tmp_path, "chord", "--t", "0.013", "--slice", "xi_p=0.3", "--res", "5") == 0
    line = (tmp_path / "run.csv").read_text().splitlines()[2]
    assert max(len(f.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) for f in line.split(",")) >= 15


def test_blindspots(tmp_path):
    assert _run(tmp_path, "blindspots", "--t", "0.071", "--res", "96") == 0
    m = _manifest(tmp_path)
    assert m["xi_m"] == pytest.approx(2.212389192668868)
    assert m["summary"]["inside"]["count"] > 0
    assert "fraction" in m["summary"]["inside"]
    rows = _rows(tmp_path / "run.csv")
    assert rows[0] == ["mode", "xi_p", "xi_q", "distance", "residual", "classification"]
    assert {r[0] for r in rows[1:]} == {"exact", "tca"}
    assert _rows(tmp_path / "run_nodal.csv")[0] == ["mode", "part", "line", "xi_p", "xi_q"]


def test_moments(tmp_path):
    assert _run(tmp_path, "moments", "--t-max", "0.07", "--dt", "0.01") == 0
    rows = _rows(tmp_path / "run.csv")
    head = rows[0]
    assert head[:3] == ["t", "q1_quantum", "q1_twa"] and head[-1] == "ehrenfest_marker"
    data = np.array(rows[1:], float)
    assert data[0, 1] == pytest.approx(4.0) and data[0, 2] == pytest.approx(4.0)
    marked = data[data[:, -1] == 1]
    assert len(marked) == 1 and marked[0, 0] == pytest.approx(0.0628, abs=1e-4)
    assert _manifest(tmp_path)["ehrenfest_time"] == pytest.approx(2 * np.pi / 100)


def test_correlate(tmp_path):
    assert _run(tmp_path, "correlate", "--t", "0.013", "--res", "7") == 0
    data = np.array(_rows(tmp_path / "run.csv")[1:], float)
    mid = data[3]
    assert mid[0] == 0 and list(mid[1:]) == [1.0, 0.0, 1.0, 0.0]
    assert _run(tmp_path, "correlate", "--modes", "exact", "--res", "5") == 0
    assert np.all(np.isnan(np.array(_rows(tmp_path / "run.csv")[1:], float)[:, 3]))


def test_spiral(tmp_path):
    assert _run(tmp_path, "spiral", "--t-range", "0.05:0.06", "--dt", "0.01", "--res", "96") == 0
    rows = _rows(tmp_path / "run.csv")
    assert rows[0][:6] == ["t", "xi_m_formula", "xi_m_geometric", "nearest_zero_dist",
                           "nearest_quantum_only_dist", "farthest_classical_matched_dist"]
    data = np.array(rows[1:], float)
    assert np.allclose(data[:, 1], np.pi / (4 * data[:, 0] * 5))


def test_config_file_and_override(tmp_path):
    ini = tmp_path / "k.ini"
    ini.write_text("[core]\nalpha_q = 2\nalpha_p = 0\n[cli.chord]\nres = 7\nslice = xi_p=0\n")
    assert _run(tmp_path, "chord", "--config", str(ini)) == 0
    m = _manifest(tmp_path)
    assert m["alpha_q"] == 2.0 and m["settings"]["res"] == 7 and m["config"] == str(ini)
    assert _run(tmp_path, "chord", "--config", str(ini), "--res", "9", "--alpha-q", "1") == 0
    m = _manifest(tmp_path)
    assert m["alpha_q"] == 1.0 and m["settings"]["res"] == 9


def test_determinism(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    for d in (a, b):
        assert _run(d, "blindspots", "--t", "0.013", "--res", "64", "--modes", "exact") == 0
    assert (a / "run.csv").read_bytes() == (b / "run.csv").read_bytes()


@pytest.mark.parametrize("argv", [
    ["wigner", "--mode", "bogus"],
    ["wigner", "--hbar", "-1"],
    ["wigner", "--window", "3:1"],
    ["chord", "--slice", "xi_q=1"],
    ["blindspots", "--t", "0"],
    ["moments", "--dt", "0"],
    ["nonsense"],
])
def test_usage_errors(tmp_path, argv):
    assert _run(tmp_path, *argv) == cli.EXIT_USAGE


def test_bad_config_is_usage_error(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[cli.wigner]\nres = many\n")
    assert _run(tmp_path, "wigner", "--config", str(ini)) == cli.EXIT_USAGE
    assert _run(tmp_path, "wigner", "--config", str(tmp_path / "missing.ini")) == cli.EXIT_USAGE


def test_numerical_error_exit_code(tmp_path):
    # about 1250 mean quanta do not fit the 1024-state Fock cap
    assert _run(tmp_path, "wigner", "--alpha-q", "50", "--res", "5") == cli.EXIT_NUMERIC


def test_dotted_stems_keep_time(tmp_path):
    for t in ("0", "0.013"):
        assert cli.main(["chord", "--t", t, "--slice", "xi_p=0", "--res", "5",
                         "--out", str(tmp_path / f"c_t{t}")]) == 0
    assert {p.name for p in tmp_path.iterdir()} == {"c_t0.csv", "c_t0.json", "c_t0.013.csv", "c_t0.013.json"}
