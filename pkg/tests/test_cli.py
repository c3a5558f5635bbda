import csv
import json

import pytest

from slrf.cli import fmt, main, sphere_error_series
from slrf.fd import init_metric
from slrf.oracles import sphere_lattice


def rows(path):
    with path.open() as fh:
        return list(csv.reader(fh))


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main(["run", *args, "--out", str(out)])
    return code, out


def test_max_steps_zero_emits_initial_snapshot(tmp_path):
    code, out = run(tmp_path, "--preset", "sphere", "--method", "slrf-v2", "--n", "20", "--max-steps", "0")
    assert code == 0
    snap = rows(out / "snapshots.csv")
    assert snap[0] == ["t", "i", "s", "L_x", "L_y", "R"]
    assert len(snap) == 1 + 21 and {r[0] for r in snap[1:]} == {"0"}
    assert snap[-1][4] == ""  # no segment beyond the south pole
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["termination"] == "max_steps"
    assert manifest["config"]["method"] == "slrf-v2"


def test_manifest_inventory_matches_files(tmp_path):
    code, out = run(tmp_path, "--preset", "sphere", "--n", "20", "--t-end", "0.05", "--snapshot-dt", "0.01")
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["files"]) == {"snapshots.csv", "diagnostics.csv", "embeddings.csv", "sphere_error.csv"}
    for name, count in manifest["files"].items():
        assert len(rows(out / name)) - 1 == count
    assert rows(out / "diagnostics.csv")[0] == ["step", "t", "dt", "max_R", "min_L_y", "regridded"]
    assert rows(out / "embeddings.csv")[0] == ["t", "i", "x", "y", "source"]
    err = rows(out / "sphere_error.csv")[1:]
    assert [r[0] for r in err] == [fmt(x) for x in (0.0, 0.01, 0.02, 0.03, 0.04, 0.05)]


def test_fd_run_columns(tmp_path):
    code, out = run(tmp_path, "--preset", "single-dumbbell", "--method", "fd", "--n", "41", "--max-steps", "5")
    assert code == 0
    assert rows(out / "snapshots.csv")[0] == ["t", "i", "rho", "h", "m"]
    assert rows(out / "embeddings.csv")[1][-1] == "fd"
    assert not (out / "sphere_error.csv").exists()


def test_runs_are_byte_identical(tmp_path):
    args = ("--preset", "double-dumbbell", "--n", "40", "--max-steps", "300", "--snapshot-every", "50")
    _, a = run(tmp_path, *args, name="a")
    _, b = run(tmp_path, *args, name="b")
    for name in ("snapshots.csv", "diagnostics.csv", "embeddings.csv", "manifest.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("c3 = 0.766\nc5 = -0.091\nN = 20\nmax_steps = 3\n")
    code, out = run(tmp_path, "--config", str(cfg), "--max-steps", "1")
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["max_steps"] == 1 and manifest["config"]["N"] == 20
    assert manifest["steps"] == 1


@pytest.mark.parametrize(
    "args",
    [
        ("--preset", "sphere", "--n", "7"),
        ("--preset", "sphere", "--method", "euler"),
        ("--preset", "torus"),
        ("--c3", "0.1"),
        ("--preset", "sphere", "--bogus", "1"),
        ("--preset", "sphere", "--n", "ten"),
    ],
)
def test_config_errors_exit_1(tmp_path, args):
    with pytest.raises(SystemExit) as info:
        code, _ = run(tmp_path, *args)
        raise SystemExit(code)
    assert info.value.code == 1


def test_missing_config_file_is_io_error(tmp_path):
    code, _ = run(tmp_path, "--preset", "sphere", "--config", str(tmp_path / "nope.cfg"))
    assert code == 3


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = main(["run", "--preset", "sphere", "--n", "20", "--max-steps", "1", "--out", str(blocker / "sub")])
    assert code == 3


def test_numerical_failure_exit_2_keeps_outputs(tmp_path):
    code, out = run(tmp_path, "--preset", "sphere", "--method", "slrf-v2", "--n", "20",
                    "--courant-factor", "5", "--max-steps", "200")
    assert code == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["termination"] == "failure" and manifest["message"]
    assert manifest["files"]["snapshots.csv"] > 0


def test_sphere_error_series_exact_data():
    lat = sphere_lattice(40)
    (t, e), = sphere_error_series([lat])
    assert t == 0 and abs(e) <= 1e-10
    g = init_metric(0, 0, 101)
    g.m *= 0.6
    g.t = 0.2
    (t, e), = sphere_error_series([g])
    assert e == pytest.approx(0.0, abs=1e-14)


def test_sphere_error_command(capsys):
    assert main(["sphere-error", "--preset", "sphere", "--n", "20", "--t-end", "0.02",
                 "--snapshot-dt", "0.01"]) == 0
    lines = capsys.readouterr().out.split()
    assert len(lines) == 3 and abs(float(lines[0].split(",")[1])) <= 1e-10


def test_compare_self_and_refined(tmp_path, capsys):
    _, a = run(tmp_path, "--preset", "sphere", "--n", "20", "--t-end", "0.02", "--snapshot-dt", "0.01", name="a")
    _, b = run(tmp_path, "--preset", "sphere", "--n", "40", "--t-end", "0.02", "--snapshot-dt", "0.01", name="b")
    capsys.readouterr()
    assert main(["compare", str(a), str(a)]) == 0
    out = capsys.readouterr().out
    assert "max" in out and "0.000e+00" in out
    assert main(["compare", str(a), str(b), "--refined", str(b), str(b)]) == 0
    assert "decreasing" in capsys.readouterr().out


def test_compare_without_overlap_fails(tmp_path):
    _, a = run(tmp_path, "--preset", "sphere", "--n", "20", "--t-end", "0.02", "--snapshot-dt", "0.01", name="a")
    _, b = run(tmp_path, "--preset", "sphere", "--n", "20", "--t-end", "0.025", "--snapshot-dt", "0.015", name="b")
    # only t = 0 is shared; drop it from one run to leave no overlap
    emb = b / "embeddings.csv"
    lines = emb.read_text().splitlines()
    emb.write_text("\n".join([lines[0]] + [ln for ln in lines[1:] if not ln.startswith("0,")]) + "\n")
    assert main(["compare", str(a), str(b)]) == 1
    assert main(["compare", str(a), str(tmp_path / "missing")]) == 3


def test_oracle_command(capsys):
    assert main(["oracle"]) == 0
    out = capsys.readouterr().out
    assert "ratio" in out and "semicircle" in out
