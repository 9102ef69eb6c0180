import math

import pytest

from mlsorth.cli import main


@pytest.fixture
def files(tmp_path):
    g = [-1, 0, 1]
    (tmp_path / "grid9.txt").write_text("".join(f"{a} {b}\n" for b in g for a in g))
    (tmp_path / "circle6.txt").write_text("".join(
        f"{math.cos(k * math.pi / 3):.17g} {math.sin(k * math.pi / 3):.17g}\n" for k in range(6)))
    (tmp_path / "two.txt").write_text("0 0\n1 0\n")
    (tmp_path / "empty.txt").write_text("# no points\n")
    return tmp_path


def test_basis_grid(files, capsys):
    assert main(["basis", "--points", str(files / "grid9.txt")]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].count(",") == 8


def test_basis_circle_rejects_x2_squared(files, capsys):
    assert main(["basis", "--points", str(files / "circle6.txt")]) == 0
    assert "rejected: x2^2" in capsys.readouterr().out


def test_basis_out_writes_two_files(files):
    out = files / "b.txt"
    assert main(["basis", "--points", str(files / "grid9.txt"), "--out", str(out)]) == 0
    assert out.exists() and (files / "b_R.csv").read_text().startswith("# frame")


def test_empty_file_is_degenerate(files, capsys):
    assert main(["basis", "--points", str(files / "empty.txt")]) == 3
    assert "empty point set" in capsys.readouterr().err


def test_missing_file_is_io_error(files):
    assert main(["basis", "--points", str(files / "nope.txt")]) == 2


def test_usage_errors(files):
    with pytest.raises(SystemExit) as exc:
        main(["basis"])
    assert exc.value.code == 1
    assert main(["stencil", "--points", str(files / "grid9.txt"), "--beta", "1,0,0"]) == 1


def _weights(text):
    return [float(l.split(",")[-1]) for l in text.splitlines() if l[0].isdigit()]


def test_stencil_derivative_zero_sum(files, capsys):
    assert main(["stencil", "--points", str(files / "grid9.txt"), "--x0", "0,0",
                 "--beta", "1,0"]) == 0
    w = _weights(capsys.readouterr().out)
    assert len(w) == 9 and abs(sum(w)) < 1e-10


def test_stencil_interpolation_sums_to_one(files, capsys):
    assert main(["stencil", "--points", str(files / "grid9.txt"), "--beta", "0,0"]) == 0
    assert sum(_weights(capsys.readouterr().out)) == pytest.approx(1.0, abs=1e-10)


def test_stencil_incomplete_warning(files, capsys):
    assert main(["stencil", "--points", str(files / "two.txt"), "--beta", "1,0"]) == 0
    assert "linear combinations" in capsys.readouterr().err


def test_outputs_byte_identical(files):
    a, b = files / "a.csv", files / "b.csv"
    for p in (a, b):
        main(["stencil", "--points", str(files / "circle6.txt"), "--beta", "1,1", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_estimate_with_values(files, capsys):
    (files / "vals.txt").write_text("".join(f"{x * x}\n" for y in (-1, 0, 1) for x in (-1, 0, 1)))
    assert main(["estimate", "--points", str(files / "grid9.txt"), "--beta", "2,0",
                 "--values", str(files / "vals.txt")]) == 0
    assert float(capsys.readouterr().out.split()[0]) == pytest.approx(2.0)


def test_study_conv_low_statistics(tmp_path, capsys):
    rc = main(["study", "conv", "--dim", "2", "--function", "f1", "--beta", "1,0",
               "--seed", "7", "--trials", "1", "--n-points", "8,16", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "LOW-STATISTICS" in out
    assert (tmp_path / "summary.csv").read_text().splitlines()[0].endswith("LOW-STATISTICS")
    rates = [float(v) for v in (tmp_path / "summary.csv").read_text().splitlines()[2].split(",")[2:4]]
    assert all(abs(r - 4.0) < 0.15 for r in rates)


def test_study_conv_bad_combination():
    assert main(["study", "conv", "--dim", "3", "--beta", "1,0"]) == 1


def test_study_detail(tmp_path, capsys):
    assert main(["study", "detail", "--seed", "7", "--out", str(tmp_path / "d.csv")]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 2 + 15
    assert (tmp_path / "d.csv").read_text().startswith("# seed=7")
