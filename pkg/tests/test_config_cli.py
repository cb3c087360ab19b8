"""Strict config parsing, the CLI surface, and run reproducibility."""

from __future__ import annotations

import hashlib
import json
import shutil

import numpy as np
import pytest

from chaoswalk.cli import main
from chaoswalk.coins import sample_cue
from chaoswalk.config import ConfigError, load_config, parse_config
from chaoswalk.linalg import save_cmatrix
from chaoswalk.runner import thread_count

WALK_TEXT = """\
# smallest useful walk
experiment.kind = walk
coin.type = cue
coin.m = 4
coin.seed = 11
lattice.n = 5
run.t_max = 8
outputs.dir = out
"""


def write_config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ----------------------------------------------------------------- parsing


def test_parse_fills_defaults():
    cfg = parse_config(WALK_TEXT)
    assert cfg.kind == "walk"
    assert cfg["coin.tau"] == 1.0
    assert cfg["run.sample_every"] == 1
    assert cfg["initial.site"] == 0
    assert cfg["outputs.formats"] == ("csv",)
    assert cfg["run.snapshot_every"] is None
    assert cfg.text == WALK_TEXT


def test_parse_skips_comments_and_blanks():
    cfg = parse_config("\n# note\n" + WALK_TEXT + "\n\n")
    assert cfg.kind == "walk"


@pytest.mark.parametrize(
    "mutation,fragment",
    [
        ("walk.speed = 3", "unknown key"),
        ("coin.m = 4", "duplicate key"),
        ("run.sample_every = 0", "run.sample_every"),
        ("run.snapshot_every = 0", "run.snapshot_every"),
        ("coin.g = 0.4", "coin.g is only for"),
        ("outputs.formats = hdf", "unknown output format"),
        ("no_equals_here", "expected 'key = value'"),
    ],
)
def test_parse_rejects_bad_lines(mutation, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(WALK_TEXT + mutation + "\n")


@pytest.mark.parametrize(
    "old,new,fragment",
    [
        ("experiment.kind = walk", "experiment.kind = dance", "unknown experiment.kind"),
        ("coin.m = 4", "coin.m = four", "expected an integer"),
        ("coin.m = 4", "coin.m = 7", "even"),
        ("lattice.n = 5", "lattice.n = 1", "lattice.n"),
    ],
)
def test_parse_rejects_bad_values(old, new, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(WALK_TEXT.replace(old, new))


def test_parse_requires_keys():
    text = WALK_TEXT.replace("run.t_max = 8\n", "")
    with pytest.raises(ConfigError, match="run.t_max"):
        parse_config(text)
    with pytest.raises(ConfigError, match="experiment.kind"):
        parse_config("coin.m = 4\n")


def test_coin_type_cross_rules():
    base = "experiment.kind = walk\ncoin.m = 4\nlattice.n = 5\nrun.t_max = 4\noutputs.dir = o\n"
    with pytest.raises(ConfigError, match="coin.g"):
        parse_config(base + "coin.type = harper\n")
    with pytest.raises(ConfigError, match="coin.seed"):
        parse_config(base + "coin.type = cue\n")
    with pytest.raises(ConfigError, match="coin.path"):
        parse_config(base + "coin.type = custom\n")
    with pytest.raises(ConfigError, match="coin.seed is only"):
        parse_config(base + "coin.type = harper\ncoin.g = 0.4\ncoin.seed = 3\n")
    with pytest.raises(ConfigError, match="must be harper, cue or custom"):
        parse_config(base + "coin.type = dice\n")


def test_spectra_window_ordering():
    text = (
        "experiment.kind = spectra\ncoin.type = cue\ncoin.m = 4\ncoin.seed = 1\n"
        "lattice.n = 5\nrun.t_max = 10\noutputs.dir = o\n"
        "spectra.window_start = 8\nspectra.window_end = 4\n"
    )
    with pytest.raises(ConfigError, match="window_start"):
        parse_config(text)


def test_td_sweep_rules():
    base = "experiment.kind = td_sweep\noutputs.dir = o\ntd.m_values = 4,6\n"
    assert parse_config(base + "coin.type = cue\n").kind == "td_sweep"
    with pytest.raises(ConfigError, match="td_sweep needs coin.type = cue"):
        parse_config(base + "coin.type = harper\n")
    with pytest.raises(ConfigError, match="even"):
        parse_config("experiment.kind = td_sweep\noutputs.dir = o\ncoin.type = cue\ntd.m_values = 4,5\n")


def test_figure_name_checked():
    with pytest.raises(ConfigError, match="unknown figure.name"):
        parse_config("experiment.kind = figure\noutputs.dir = o\nfigure.name = fig99\n")


def test_load_config_reads_file(tmp_path):
    path = write_config(tmp_path, WALK_TEXT)
    assert load_config(path).kind == "walk"


# -------------------------------------------------------------- CLI basics


def test_validate_subcommand(tmp_path, capsys):
    path = write_config(tmp_path, WALK_TEXT)
    assert main(["validate", str(path)]) == 0
    assert "ok: experiment.kind = walk" in capsys.readouterr().out
    bad = write_config(tmp_path, WALK_TEXT + "walk.speed = 3\n", "bad.cfg")
    assert main(["validate", str(bad)]) == 1


def test_usage_errors_exit_one(tmp_path):
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_run_writes_artifacts_and_manifest(tmp_path):
    path = write_config(tmp_path, WALK_TEXT)
    out = tmp_path / "out_a"
    assert main(["run", str(path), "--out", str(out)]) == 0
    assert (out / "p_nt.csv").exists()
    assert (out / "variance.csv").exists()

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["format"] == "chaoswalk-manifest-1"
    assert manifest["kind"] == "walk"
    assert manifest["config"] == WALK_TEXT
    assert manifest["seeds"] == [11]
    listed = {entry["path"] for entry in manifest["outputs"]}
    assert "manifest.json" not in listed
    for entry in manifest["outputs"]:
        digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
        assert digest == entry["sha256"]

    header = (out / "p_nt.csv").read_text().splitlines()[0]
    assert header == "t,n_centered,p"


def test_run_refuses_collision_then_force(tmp_path):
    path = write_config(tmp_path, WALK_TEXT)
    out = tmp_path / "out_b"
    assert main(["run", str(path), "--out", str(out)]) == 0
    before = (out / "p_nt.csv").read_bytes()
    assert main(["run", str(path), "--out", str(out)]) == 1
    assert main(["run", str(path), "--out", str(out), "--force"]) == 0
    assert (out / "p_nt.csv").read_bytes() == before


def test_runs_are_byte_identical(tmp_path):
    path = write_config(tmp_path, WALK_TEXT)
    out1, out2 = tmp_path / "one", tmp_path / "two"
    assert main(["run", str(path), "--out", str(out1)]) == 0
    assert main(["run", str(path), "--out", str(out2)]) == 0
    for name in ("p_nt.csv", "variance.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_density_matrix_outputs(tmp_path):
    text = WALK_TEXT + "outputs.formats = csv,cmx\n"
    path = write_config(tmp_path, text)
    out = tmp_path / "dens"
    assert main(["run", str(path), "--out", str(out)]) == 0
    from chaoswalk.linalg import load_cmatrix

    rho_c = load_cmatrix(out / "rho_coin_final.cmx")
    rho_w = load_cmatrix(out / "rho_walker_final.cmx")
    assert rho_c.shape == (4, 4) and rho_w.shape == (5, 5)
    assert abs(np.trace(rho_c) - 1.0) <= 1e-12


# ----------------------------------------------------------------- compare


def test_compare_accepts_identical_runs(tmp_path, capsys):
    path = write_config(tmp_path, WALK_TEXT)
    out1, out2 = tmp_path / "ca", tmp_path / "cb"
    main(["run", str(path), "--out", str(out1)])
    main(["run", str(path), "--out", str(out2)])
    capsys.readouterr()
    assert main(["compare", str(out1), str(out2)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is True
    assert all(entry["identical_bytes"] for entry in report["series"])


def test_compare_flags_tolerance_breach(tmp_path, capsys):
    path = write_config(tmp_path, WALK_TEXT)
    out1 = tmp_path / "ref"
    main(["run", str(path), "--out", str(out1)])
    out2 = tmp_path / "tampered"
    shutil.copytree(out1, out2)
    rows = (out2 / "p_nt.csv").read_text().splitlines()
    tampered = [rows[0]]
    for row in rows[1:]:
        t, label, _ = row.split(",")
        if t == "0":  # move the initial delta one site over, keeping the sum
            row = f"{t},{label},{1.0 if label == '1' else 0.0}"
        tampered.append(row)
    (out2 / "p_nt.csv").write_text("\n".join(tampered) + "\n")
    capsys.readouterr()
    assert main(["compare", str(out1), str(out2), "--tolerance", "0.01"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["pass"] is False


def test_compare_missing_directory(tmp_path):
    assert main(["compare", str(tmp_path / "nope"), str(tmp_path / "nada")]) == 1


# ------------------------------------------------------- other subcommands


def test_portrait_subcommand(tmp_path):
    out = tmp_path / "phase"
    assert (
        main(
            ["portrait", "--g", "0.4", "--orbits", "2", "--steps", "50", "--out", str(out)]
        )
        == 0
    )
    rows = (out / "portrait.csv").read_text().splitlines()
    assert rows[0] == "orbit_id,step,q,p"
    assert len(rows) == 1 + 2 * 51


def test_figure_preset_tree(tmp_path):
    out = tmp_path / "fig2a"
    assert main(["figure", "fig2a", "--out", str(out)]) == 0
    for name in (
        "g001/p_nt.csv",
        "g040/p_nt.csv",
        "gaussian_t40.csv",
        "binomial_t40.csv",
        "manifest.json",
    ):
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["extras"]["figure"] == "fig2a"


def test_figure_rejects_unknown_name(tmp_path):
    assert main(["figure", "fig99", "--out", str(tmp_path / "x")]) == 1


# ------------------------------------------------- checkpoints and resume


def test_resume_splices_byte_identically(tmp_path):
    text = WALK_TEXT.replace("run.t_max = 8", "run.t_max = 1200") + "run.sample_every = 100\n"
    path = write_config(tmp_path, text)
    full = tmp_path / "full"
    assert main(["run", str(path), "--out", str(full)]) == 0
    assert (full / "checkpoints" / "state_t0000500.sec").exists()

    part = tmp_path / "part"
    (part / "checkpoints").mkdir(parents=True)
    for suffix in (".sec", ".json"):
        shutil.copy(
            full / "checkpoints" / f"state_t0000500{suffix}",
            part / "checkpoints" / f"state_t0000500{suffix}",
        )
    assert main(["run", str(path), "--out", str(part), "--resume"]) == 0
    for name in ("p_nt.csv", "variance.csv", "checkpoints/state_t0001000.sec"):
        assert (part / name).read_bytes() == (full / name).read_bytes(), name


# --------------------------------------------------------- failure guards


def test_norm_drift_maps_to_numeric_exit_code(tmp_path):
    drifting = (1.0 + 3e-9) * sample_cue(4, 5).matrix  # passes the load gate
    coin_path = tmp_path / "drifting.cmx"
    save_cmatrix(coin_path, drifting)
    text = (
        "experiment.kind = walk\ncoin.type = custom\ncoin.m = 4\n"
        f"coin.path = {coin_path}\nlattice.n = 5\nrun.t_max = 2000\n"
        "run.sample_every = 500\noutputs.dir = out\n"
    )
    path = write_config(tmp_path, text)
    assert main(["run", str(path), "--out", str(tmp_path / "boom")]) == 3


# -------------------------------------------------------------- threading


def test_thread_count_env(monkeypatch):
    monkeypatch.delenv("CHAOSWALK_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("CHAOSWALK_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("CHAOSWALK_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("CHAOSWALK_THREADS", "many")
    with pytest.raises(ConfigError):
        thread_count()


def test_sweep_outputs_do_not_depend_on_threads(tmp_path, monkeypatch):
    text = (
        "experiment.kind = td_sweep\ncoin.type = cue\ntd.m_values = 4,6\n"
        "td.seeds_per_m = 2\noutputs.dir = out\n"
    )
    path = write_config(tmp_path, text)
    monkeypatch.setenv("CHAOSWALK_THREADS", "1")
    assert main(["run", str(path), "--out", str(tmp_path / "serial")]) == 0
    monkeypatch.setenv("CHAOSWALK_THREADS", "4")
    assert main(["run", str(path), "--out", str(tmp_path / "pooled")]) == 0
    for name in ("td.csv", "td_summary.csv"):
        a = (tmp_path / "serial" / name).read_bytes()
        b = (tmp_path / "pooled" / name).read_bytes()
        assert a == b
    rows = (tmp_path / "serial" / "td.csv").read_text().splitlines()
    assert rows[0] == "m,seed,t_d"
    assert len(rows) == 5
