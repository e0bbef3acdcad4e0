import shutil
import subprocess

import numpy as np
import pytest

from topsimp import PersistenceDiagram, io
from topsimp.cli import (EXIT_NON_MANIFOLD, EXIT_OK, EXIT_PARSE,
                         NON_MANIFOLD_MSG, RunConfig, main, run)
from topsimp.errors import ParseError

from instances import two_gaussians


def bumps(size=33):
    """Two-bump test image as non-negative integers."""
    return np.rint(two_gaussians(size) + 10).astype(int)


def write_pgm_text(path, rows, maxval=255):
    r, c = len(rows), len(rows[0])
    body = "\n".join(" ".join(map(str, row)) for row in rows)
    path.write_text(f"P2\n# comment\n{c} {r}\n{maxval}\n{body}\n")
    return path


def read_stats(path):
    return dict(ln.split("=", 1) for ln in path.read_text().splitlines())


TETRA_OFF = """OFF
4 4 0
0 0 0
1 0 0
0 1 0
0 0 1
3 0 1 2
3 0 1 3
3 0 2 3
3 1 2 3
"""


# ---------------------------------------------------------------- PGM
def test_p2_and_p5_agree(tmp_path):
    img = np.array([[0, 5, 255], [7, 8, 9]])
    io.write_pgm(tmp_path / "a.pgm", img, 255, binary=True)
    io.write_pgm(tmp_path / "b.pgm", img, 255, binary=False)
    a, ma = io.parse_pgm(tmp_path / "a.pgm")
    b, mb = io.parse_pgm(tmp_path / "b.pgm")
    assert ma == mb == 255
    assert np.array_equal(a, img) and np.array_equal(b, img)


def test_sixteen_bit_round_trip(tmp_path):
    img = np.array([[0, 1000], [65535, 300]])
    io.write_pgm(tmp_path / "w.pgm", img, 65535)
    back, maxval = io.parse_pgm(tmp_path / "w.pgm")
    assert maxval == 65535 and np.array_equal(back, img)


def test_pgm_header_comments(tmp_path):
    p = write_pgm_text(tmp_path / "c.pgm", [[1, 2], [3, 4]], 10)
    img, maxval = io.parse_pgm(p)
    assert maxval == 10 and img.tolist() == [[1, 2], [3, 4]]


@pytest.mark.parametrize("data", [
    b"P3\n1 1\n255\n0\n",          # wrong magic
    b"P2\n2 2\n255\n1 2 3\n",      # truncated
    b"P5\n2 2\n255\n\x00\x01",     # truncated binary
    b"P2\n1 1\n10\n11\n",          # above maxval
    b"P2\n0 1\n255\n",             # empty image
    b"P2\n1 1\n70000\n1\n",        # maxval too large
    b"P2\n1\n",                    # short header
])
def test_malformed_pgm(data):
    with pytest.raises(ParseError):
        io.parse_pgm(data)


def test_quantize():
    q, scale, offset, err = io.quantize([0.0, 3.0, 10.0], 10)
    assert q.tolist() == [0, 3, 10] and scale == 1 and offset == 0 and err == 0
    q, scale, offset, err = io.quantize([-1.0, 1.0], 2)
    # range [-1, 2] spread over 0..2
    assert offset == -1 and scale == 1.5 and q.tolist() == [0, 1]
    assert err <= scale / 2


# ---------------------------------------------------------------- OFF
def test_off_fourth_column_and_sidecar(tmp_path):
    lines = TETRA_OFF.splitlines()
    for i, v in zip(range(2, 6), ("0.5", "1", "2", "3")):
        lines[i] += " " + v
    with_col = "\n".join(lines) + "\n"
    nv, tris, coords, s = io.parse_off(with_col.encode())
    assert nv == 4 and tris.shape == (4, 3) and coords.shape == (4, 3)
    assert s.tolist() == [0.5, 1, 2, 3]
    side = tmp_path / "v.txt"
    side.write_text("0.5\n1\n2\n3\n")
    _, _, _, s2 = io.parse_off(TETRA_OFF.encode(), side)
    assert np.array_equal(s, s2)
    assert io.parse_off(TETRA_OFF.encode())[3] is None


@pytest.mark.parametrize("text", [
    "OF\n1 0 0\n0 0 0\n",
    "OFF\n4 1 0\n0 0 0\n",
    "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n4 0 1 2 0\n",
    "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n",
    "OFF\n3 1 0\n0 0 0\n1 0 x\n0 1 0\n3 0 1 2\n",
])
def test_malformed_off(text):
    with pytest.raises(ParseError):
        io.parse_off(text.encode())


def test_off_sidecar_length_mismatch():
    with pytest.raises(ParseError):
        io.parse_off(TETRA_OFF.encode(), [1.0, 2.0])


# ---------------------------------------------------------------- values
def test_value_formatting_round_trips():
    for x in (0.1, 1 / 3, 1e300, -2.5, 7.0):
        assert float(io.format_value(x)) == x
    assert io.format_value(np.inf) == "inf"


def test_values_tsv_round_trip(tmp_path):
    grid = np.array([[0.25, 1 / 3], [2.0, -1.5]])
    io.emit_values_tsv(tmp_path / "g.tsv", grid)
    assert np.array_equal(io.parse_values_tsv(tmp_path / "g.tsv"), grid)


def test_values_tsv_must_be_rectangular():
    with pytest.raises(ParseError):
        io.parse_values_tsv(b"1\t2\n3\n")


def test_diagram_file(tmp_path):
    d = PersistenceDiagram(np.array([0, 1]), np.array([0.0, 2.0]),
                           np.array([1.0, np.inf]))
    io.emit_diagram(tmp_path / "d.tsv", d)
    assert PersistenceDiagram.from_tsv((tmp_path / "d.tsv").read_text()) == d


# ---------------------------------------------------------------- CLI
def test_single_pixel_round_trips(tmp_path):
    src = tmp_path / "one.pgm"
    io.write_pgm(src, np.array([[42]]), 255)
    out = tmp_path / "res"
    assert main(["--input", str(src), "--delta", "5", "--out", str(out)]) == EXIT_OK
    assert (tmp_path / "res.pgm").read_bytes() == src.read_bytes()


def test_two_bumps_lose_the_noise(tmp_path):
    src = tmp_path / "g.pgm"
    io.write_pgm(src, bumps(), 255)
    out = tmp_path / "g"
    rc = main(["--input", str(src), "--delta", "15", "--emit",
               "field,diagram,critical,stats,gradient-pairs", "--out", str(out),
               "--no-timings"])
    assert rc == EXIT_OK
    st = read_stats(tmp_path / "g.stats.txt")
    assert st["critical_2"] == "3"           # two bumps and the cap
    assert st["virtual_cells"] == "1"
    assert float(st["max_abs_change"]) <= 15
    assert not any(k.startswith("time_") for k in st)
    d = PersistenceDiagram.from_tsv((tmp_path / "g.diagram.tsv").read_text())
    off = d.off_diagonal()
    assert np.all(off.deaths - off.births > 30)
    crit = (tmp_path / "g.critical.tsv").read_text().splitlines()
    assert crit[0] == "cell\tdim\tvalue" and len(crit) == int(st["critical"])  # header, no cap
    assert (tmp_path / "g.gradient.txt").exists()
    img, _ = io.parse_pgm(tmp_path / "g.pgm")
    assert np.max(np.abs(img - bumps())) <= 15


def test_smaller_bump_disappears(tmp_path):
    # the smaller bump rises 70 above its saddle
    src = tmp_path / "b.pgm"
    io.write_pgm(src, np.rint(two_gaussians(64, noise=0) + 10).astype(int), 255)
    maxima = []
    for delta in ("30", "40"):
        out = tmp_path / f"b{delta}"
        assert main(["--input", str(src), "--delta", delta, "--emit",
                     "critical", "--out", str(out)]) == EXIT_OK
        rows = (tmp_path / f"b{delta}.critical.tsv").read_text().splitlines()
        maxima.append(sum(r.split("\t")[1] == "2" for r in rows[1:]))
    assert maxima == [2, 1]


def test_single_pixel_diagram(tmp_path):
    src = tmp_path / "one.pgm"
    src.write_text("P2\n1 1\n255\n42\n")
    out = tmp_path / "one"
    assert main(["--input", str(src), "--emit", "diagram",
                 "--out", str(out)]) == EXIT_OK
    assert (tmp_path / "one.diagram.tsv").read_text() == \
        "dim\tbirth\tdeath\n0\t42.0\tinf\n2\tinf\tinf\n"


def test_modes_and_relative_delta(tmp_path):
    src = tmp_path / "g.tsv"
    io.emit_values_tsv(src, two_gaussians(9))
    outs = {}
    for mode in ("min", "max", "mean", "smooth"):
        out = tmp_path / mode
        assert main(["--input", str(src), "--delta", "0.1", "--delta-relative",
                     "--mode", mode, "--out", str(out)]) == EXIT_OK
        outs[mode] = io.parse_values_tsv(tmp_path / f"{mode}.tsv")
    assert np.all(outs["min"] <= outs["mean"]) and np.all(outs["mean"] <= outs["max"])
    budget = 0.1 * np.ptp(two_gaussians(9))
    for g in outs.values():
        assert np.max(np.abs(g - two_gaussians(9))) <= budget + 1e-9


def test_off_input(tmp_path):
    src = tmp_path / "t.off"
    src.write_text(TETRA_OFF)
    vals = tmp_path / "t.txt"
    vals.write_text("0\n3\n1\n2\n")
    out = tmp_path / "t"
    assert main(["--input", str(src), "--values", str(vals), "--delta", "10",
                 "--emit", "field,stats", "--out", str(out)]) == EXIT_OK
    got = io.parse_values(tmp_path / "t.tsv")
    assert got.size == 4
    assert read_stats(tmp_path / "t.stats.txt")["critical"] == "2"


def test_off_without_values_is_a_parse_error(tmp_path, capsys):
    src = tmp_path / "t.off"
    src.write_text(TETRA_OFF)
    assert main(["--input", str(src)]) == EXIT_PARSE
    assert "parse error" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["--input", str(tmp_path / "nope.pgm")]) == EXIT_PARSE


def test_non_manifold_exit(tmp_path, capsys):
    src = tmp_path / "fan.off"
    src.write_text("OFF\n5 3 0\n0 0 0 0\n1 0 0 1\n0 1 0 2\n0 0 1 3\n1 1 1 4\n"
                   "3 0 1 2\n3 0 1 3\n3 0 1 4\n")
    assert main(["--input", str(src)]) == EXIT_NON_MANIFOLD
    assert "may not exist on a non-manifold 2-dimensional cell complex" in \
        capsys.readouterr().err


def test_bowtie_exit(tmp_path, capsys):
    src = tmp_path / "bow.off"
    src.write_text("OFF\n5 2 0\n0 0 0 0\n1 0 0 1\n0 1 0 2\n-1 0 0 3\n0 -1 0 4\n"
                   "3 0 1 2\n3 0 3 4\n")
    assert main(["--input", str(src)]) == EXIT_NON_MANIFOLD
    assert NON_MANIFOLD_MSG in capsys.readouterr().err


def test_bad_arguments():
    with pytest.raises(SystemExit):
        main(["--input", "x.pgm", "--delta", "-1"])
    with pytest.raises(SystemExit):
        main(["--input", "x.pgm", "--emit", "nonsense"])
    with pytest.raises(SystemExit):
        main(["--input", "x.unknown"])


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig("x", sweeps=-1)
    with pytest.raises(ValueError):
        RunConfig("x", delta=float("nan"))


def test_output_is_deterministic(tmp_path):
    src = tmp_path / "g.pgm"
    io.write_pgm(src, bumps(17), 255)
    files = []
    for k in range(2):
        out = tmp_path / f"r{k}"
        cfg = RunConfig(str(src), "pgm", 8.0, mode="smooth", sweeps=5,
                        emit=("field", "diagram", "critical", "gradient-pairs",
                              "stats"),
                        output_prefix=str(out), timings=False)
        assert run(cfg) == EXIT_OK
        files.append(sorted(tmp_path.glob(f"r{k}.*")))
    for a, b in zip(*files):
        assert a.read_bytes() == b.read_bytes()


@pytest.mark.skipif(shutil.which("simplify") is None,
                    reason="console script not installed")
def test_console_script(tmp_path):
    src = tmp_path / "one.pgm"
    io.write_pgm(src, np.array([[1, 2], [3, 4]]), 255)
    proc = subprocess.run(["simplify", "--input", str(src), "--out",
                           str(tmp_path / "o")], capture_output=True)
    assert proc.returncode == 0
    assert (tmp_path / "o.pgm").exists()
