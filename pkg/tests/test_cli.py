import json
import subprocess
import sys

import pytest

from anttenna.cli import main

TRIANGLE = {"nodes": ["A", "B", "C"],
            "edges": [{"from": "A", "to": "B", "weight": 1},
                      {"from": "B", "to": "C", "weight": 1},
                      {"from": "A", "to": "C", "weight": 3}],
            "source": "A", "sink": "C"}

TOY_SPACE = """\
[axes]
a = 0, 1, 2
b = 10, 20, 30
c = -1, 0.5, 3

[objective]
kind = target

[targets]
a = 1
b = 30
c = -1

[aco]
n_ants = 20
iterations = 50
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(path, text):
    path.write_text(text)
    return str(path)


# -- simulate -----------------------------------------------------------------

def test_simulate_default_torus(capsys):
    code, out, _ = run(capsys, "simulate", "--geometry", "torus", "--major-radius", "0.02",
                       "--wire-radius", "0.001", "--segments", "64", "--freq", "2.4e9")
    assert code == 0
    doc = json.loads(out)
    assert all(isinstance(doc["z_in"][k], float) for k in ("re", "im"))
    assert doc["vswr"] >= 1
    assert doc["lobe"]["angular_width_3db"] > 0


def test_simulate_negative_freq(capsys):
    code, _, err = run(capsys, "simulate", "--freq", "-1")
    assert code == 2 and "freq" in err


def test_simulate_too_few_segments(capsys):
    code, _, err = run(capsys, "simulate", "--segments", "4", "--freq", "2.4e9")
    assert code == 2 and "num_segments" in err


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "simulate", "--freq", "1e9", "--bogus")
    assert code == 2 and "usage" in err


def test_simulate_power_and_dipole(capsys):
    code, out, _ = run(capsys, "simulate", "--geometry", "dipole", "--length", "0.5",
                       "--wire-radius", "0.001", "--segments", "41", "--freq", "300e6",
                       "--power", "0.25")
    assert code == 0
    doc = json.loads(out)
    assert doc["geometry"]["kind"] == "dipole"
    assert doc["input_power"] == pytest.approx(0.25, rel=1e-9)


def test_simulate_plane_wave(capsys):
    code, out, _ = run(capsys, "simulate", "--freq", "2.4e9", "--excitation", "plane-wave",
                       "--direction", "0,0,-1", "--polarization", "0,1,0")
    assert code == 0
    doc = json.loads(out)
    assert doc["z_in"] is None and doc["radiated_power"] > 0


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = write(tmp_path / "run.ini", "[geometry]\nmajor_radius = 0.03\nnum_segments = 32\n")
    _, out, _ = run(capsys, "simulate", "--config", cfg, "--freq", "2.4e9")
    doc = json.loads(out)
    assert doc["geometry"]["major_radius"] == 0.03 and doc["geometry"]["num_segments"] == 32
    _, out, _ = run(capsys, "simulate", "--config", cfg, "--segments", "40", "--freq", "2.4e9")
    doc = json.loads(out)
    assert doc["geometry"]["major_radius"] == 0.03 and doc["geometry"]["num_segments"] == 40


def test_bad_config_value_has_line(tmp_path, capsys):
    cfg = write(tmp_path / "run.ini", "[geometry]\n\nmajor_radius = big\n")
    code, _, err = run(capsys, "simulate", "--config", cfg, "--freq", "2.4e9")
    assert code == 2
    assert "run.ini:3" in err and "major_radius" in err


# -- sweep --------------------------------------------------------------------

def test_sweep_defaults(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["rows"] == 50
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 51


def test_sweep_two_points(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "--points", "2", "--report-freqs", "24e9",
                     "--out", str(tmp_path))
    assert code == 0
    assert len((tmp_path / "sweep.csv").read_text().splitlines()) == 3
    for name in ("sweep.json", "sweep_s11.svg", "sweep_vswr.svg", "sweep_radiated_power.svg"):
        assert (tmp_path / name).exists()


def test_sweep_requires_out(capsys):
    code, _, err = run(capsys, "sweep", "--points", "2")
    assert code == 2 and "out" in err


def test_sweep_unwritable_out(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    target = blocker / "results"
    code, _, err = run(capsys, "sweep", "--points", "2", "--out", str(target))
    assert code == 1 and str(target) in err


# -- pattern ------------------------------------------------------------------

def test_pattern_default_torus(tmp_path, capsys):
    code, out, _ = run(capsys, "pattern", "--freq", "4.5e9", "--out", str(tmp_path))
    assert code == 0
    doc = json.loads((tmp_path / "lobes.json").read_text())
    assert json.loads(out) == doc
    stats = doc["lobe_stats"]
    assert all(stats[k] is not None for k in ("main_lobe_magnitude", "main_lobe_direction",
                                              "angular_width_3db", "side_lobe_level"))
    lines = (tmp_path / "pattern.csv").read_text().splitlines()
    assert len(lines) == 1 + 181 * 180
    assert 'viewBox="0 0 800 500"' in (tmp_path / "pattern_cut.svg").read_text()


def test_pattern_cut_passthrough(tmp_path, capsys):
    code, out, _ = run(capsys, "pattern", "--freq", "4.5e9", "--cut", "phi=0",
                       "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["cut"] == {"axis": "phi", "angle_deg": 0.0}


def test_pattern_bad_cut(tmp_path, capsys):
    code, _, err = run(capsys, "pattern", "--freq", "4.5e9", "--cut", "psi=3",
                       "--out", str(tmp_path))
    assert code == 2 and "cut" in err


def test_pattern_zero_drive(tmp_path, capsys):
    code, _, err = run(capsys, "pattern", "--freq", "4.5e9", "--voltage", "0",
                       "--out", str(tmp_path))
    assert code == 1 and "degenerate" in err


# -- optimize -----------------------------------------------------------------

def test_optimize_toy_matches_enumeration(tmp_path, capsys):
    space = write(tmp_path / "space.ini", TOY_SPACE)
    code, out, _ = run(capsys, "optimize", "--space", space, "--seed", "42",
                       "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["best_assignment"] == {"a": 1, "b": 30, "c": -1}
    assert doc["best_cost"] == 1.0
    assert len((tmp_path / "history.csv").read_text().splitlines()) == 51


def test_optimize_seed_reproducible(tmp_path, capsys):
    space = write(tmp_path / "space.ini", TOY_SPACE)
    for d in ("r1", "r2"):
        assert run(capsys, "optimize", "--space", space, "--seed", "42", "--iterations", "10",
                   "--out", str(tmp_path / d))[0] == 0
    for name in ("best.json", "history.csv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()


def test_optimize_single_candidate(tmp_path, capsys):
    space = write(tmp_path / "one.ini",
                  "[axes]\nnum_segments = 16\n\n[objective]\nkind = s11\nfreqs = 2.4e9\n")
    code, out, _ = run(capsys, "optimize", "--space", space, "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["iterations"] == 1
    assert len((tmp_path / "history.csv").read_text().splitlines()) == 2


def test_optimize_torus_geometry_axes(tmp_path, capsys):
    space = write(tmp_path / "geo.ini",
                  "[geometry]\nnum_segments = 16\n\n[axes]\nmajor_radius = 0.015, 0.02\n"
                  "\n[objective]\nkind = gain\nfreq = 2.4e9\n")
    code, out, _ = run(capsys, "optimize", "--space", space, "--ants", "2",
                       "--iterations", "2", "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["best_assignment"]["major_radius"] in (0.015, 0.02)


@pytest.mark.parametrize("text,needle", [
    ("[axes]\na = 1, two\n[objective]\nkind = target\n[targets]\na = 1\n", ":2: [axes] a"),
    ("[axes]\nnum_segments = 16\n[objective]\nkind = nonsense\n", ":4: [objective] kind"),
    ("[objective]\nkind = target\n", "[axes]"),
    ("[axes]\na = 1\n[objective]\nkind = target\n[targets]\nb = 2\n", ":6: [targets] b"),
    ("[axes]\nwobble = 1, 2\n", "wobble"),
    ("[axes\na = 1\n", "space.ini"),
])
def test_optimize_malformed_space(tmp_path, capsys, text, needle):
    space = write(tmp_path / "space.ini", text)
    code, _, err = run(capsys, "optimize", "--space", space, "--out", str(tmp_path))
    assert code == 2
    assert needle in err


# -- aco-demo -----------------------------------------------------------------

def test_aco_demo_triangle(tmp_path, capsys):
    graph = write(tmp_path / "g.json", json.dumps(TRIANGLE))
    code, out, _ = run(capsys, "aco-demo", "--graph", graph, "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["path"] == ["A", "B", "C"] and doc["length"] == 2.0
    assert doc["iterations_to_converge"] >= 1
    assert json.loads((tmp_path / "path.json").read_text()) == doc


def test_aco_demo_two_nodes(tmp_path, capsys):
    graph = write(tmp_path / "g.json", json.dumps(
        {"nodes": ["s", "t"], "edges": [{"from": "s", "to": "t", "weight": 0.5}],
         "source": "s", "sink": "t"}))
    code, out, _ = run(capsys, "aco-demo", "--graph", graph)
    assert code == 0 and json.loads(out)["path"] == ["s", "t"]


def test_aco_demo_disconnected(tmp_path, capsys):
    doc = dict(TRIANGLE, edges=[{"from": "A", "to": "B", "weight": 1}])
    graph = write(tmp_path / "g.json", json.dumps(doc))
    code, _, err = run(capsys, "aco-demo", "--graph", graph)
    assert code == 1 and "reach" in err.lower()


def test_aco_demo_bad_json(tmp_path, capsys):
    graph = write(tmp_path / "g.json", "{\n  nodes: [\n")
    code, _, err = run(capsys, "aco-demo", "--graph", graph)
    assert code == 2 and "g.json:2" in err


# -- determinism and environment --------------------------------------------

@pytest.mark.parametrize("argv,files", [
    (["simulate", "--freq", "2.4e9"], ["simulate.json"]),
    (["sweep", "--points", "3", "--report-freqs", "2.4e9"],
     ["sweep.csv", "sweep.json", "sweep_s11.svg", "sweep_vswr.svg",
      "sweep_radiated_power.svg"]),
    (["pattern", "--freq", "4.5e9", "--theta-step", "2", "--phi-step", "4"],
     ["pattern.csv", "lobes.json", "pattern_cut.svg"]),
])
def test_byte_identical_reruns(tmp_path, capsys, argv, files):
    for d in ("a", "b"):
        assert run(capsys, *argv, "--seed", "7", "--out", str(tmp_path / d))[0] == 0
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("threads", ["1", "3", "0"])
def test_thread_env_does_not_change_results(tmp_path, capsys, monkeypatch, threads):
    monkeypatch.setenv("ANTTENNA_THREADS", threads)
    space = write(tmp_path / "space.ini", TOY_SPACE)
    run(capsys, "optimize", "--space", space, "--seed", "5", "--iterations", "8",
        "--out", str(tmp_path))
    monkeypatch.delenv("ANTTENNA_THREADS")
    run(capsys, "optimize", "--space", space, "--seed", "5", "--iterations", "8",
        "--out", str(tmp_path / "ref"))
    assert (tmp_path / "history.csv").read_bytes() == (tmp_path / "ref" / "history.csv").read_bytes()


def test_bad_thread_env(monkeypatch):
    from anttenna.aco import worker_count

    monkeypatch.setenv("ANTTENNA_THREADS", "2")
    assert worker_count() == 2
    monkeypatch.setenv("ANTTENNA_THREADS", "lots")
    with pytest.raises(ValueError):
        worker_count()


def test_module_entry_point(tmp_path):
    graph = write(tmp_path / "g.json", json.dumps(TRIANGLE))
    proc = subprocess.run([sys.executable, "-m", "anttenna", "aco-demo", "--graph", graph,
                           "--seed", "3"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["length"] == 2.0


def test_optimize_uses_config_file_for_missing_sections(tmp_path, capsys):
    run_ini = write(tmp_path / "run.ini", "[geometry]\nnum_segments = 16\n\n[aco]\nn_ants = 2\n"
                                          "iterations = 3\n")
    space = write(tmp_path / "space.ini",
                  "[axes]\nmajor_radius = 0.015, 0.02\n\n[objective]\nkind = s11\n")
    code, out, _ = run(capsys, "optimize", "--config", run_ini, "--space", space,
                       "--out", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert doc["iterations"] == 3 and doc["evaluations"] <= 2
