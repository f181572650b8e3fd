import json
import subprocess
import sys

import numpy as np
import pytest

from metalens import export
from metalens.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main


def write_config(tmp_path, data, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def small_config(tmp_path, **extra):
    data = {"targets": {"grid": {"n": 3, "extent": [-0.6, 0.6]}},
            "output": {"dir": str(tmp_path / "out"), "phase_resolution": 16}, "seed": 0}
    data.update(extra)
    return write_config(tmp_path, data)


def test_solve_writes_all_files(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["solve", str(cfg)]) == EXIT_OK
    out = tmp_path / "out"
    for name in ("weights.csv", "convergence.csv", "cells.svg", "phase.csv"):
        assert (out / name).is_file()
    data = export.read_weights_csv(out / "weights.csv")
    assert len(data["b"]) == 9 and abs(data["b"].sum()) < 1e-12


def test_single_target_exits_zero(tmp_path, capsys):
    cfg = write_config(tmp_path, {"targets": {"points": [[0.1, 0.2]]},
                                  "output": {"dir": str(tmp_path / "o"), "formats": ["weights"]}})
    assert main(["solve", str(cfg)]) == EXIT_OK
    assert "converged" in capsys.readouterr().out


@pytest.mark.parametrize("data, word", [
    ({"scene": {"alpha": 2, "beta": 1}, "targets": {"points": [[0, 0]]}}, "beta"),
    ({"targets": {"points": [[0, 0]]}, "extra": 1}, "extra"),
    ({"targets": {"points": [[3.0, 0.0], [0.0, 0.0]]}}, "[0]"),
    ({}, "targets"),
])
def test_invalid_inputs_exit_one(tmp_path, capsys, data, word):
    assert main(["solve", str(write_config(tmp_path, data))]) == EXIT_CONFIG
    assert word in capsys.readouterr().err


def test_malformed_json_exits_one(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{")
    assert main(["solve", str(p)]) == EXIT_CONFIG
    assert "x.json:1:2" in capsys.readouterr().err


def test_non_convergence_exits_two(tmp_path):
    cfg = small_config(tmp_path, solver={"max_iters": 1, "target_error": 1e-15})
    assert main(["solve", str(cfg)]) == EXIT_SOLVER


def test_flags_override_config(tmp_path):
    cfg = small_config(tmp_path)
    out = tmp_path / "flag"
    code = main(["solve", str(cfg), "--engine", "grid", "--resolution", "512",
                 "--target-error", "1e-3", "--out-dir", str(out)])
    assert code == EXIT_OK and (out / "weights.csv").is_file()
    assert not (tmp_path / "out").exists()


def test_gaussian_command(tmp_path):
    assert main(["gaussian", "2", "--out-dir", str(tmp_path)]) == EXIT_OK
    assert export.read_weights_csv(tmp_path / "weights.csv")["g"].sum() == pytest.approx(1.0)
    assert main(["gaussian", "0", "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_byte_identical_reruns(tmp_path):
    cfg = small_config(tmp_path)
    main(["solve", str(cfg), "--out-dir", str(tmp_path / "a")])
    main(["solve", str(cfg), "--out-dir", str(tmp_path / "b")])
    for name in ("weights.csv", "convergence.csv", "cells.svg", "phase.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_trace_and_export_phase(tmp_path, capsys):
    cfg = small_config(tmp_path, trace={"samples": 20000, "snell_points": 50})
    assert main(["solve", str(cfg)]) == EXIT_OK
    weights = tmp_path / "out" / "weights.csv"
    assert main(["trace", str(cfg), str(weights)]) == EXIT_OK
    assert "consistent" in capsys.readouterr().out
    lines = (tmp_path / "out" / "trace.csv").read_text().splitlines()
    assert lines[1] == "index,fraction,expected" and len(lines) == 11
    (tmp_path / "out" / "phase.csv").unlink()
    assert main(["export-phase", str(cfg), str(weights)]) == EXIT_OK
    vals, meta = export.read_phase_csv(tmp_path / "out" / "phase.csv")
    assert vals.shape == (16, 16)


def test_trace_rejects_mismatched_weights(tmp_path):
    cfg = small_config(tmp_path)
    w = tmp_path / "w.csv"
    export.write_weights_csv(w, np.zeros((2, 2)) + [[0, 0], [1, 0]], [0.5, 0.5], [0, 0])
    assert main(["trace", str(cfg), str(w)]) == EXIT_CONFIG


def test_shapes_requires_matching_config(tmp_path):
    cfg = small_config(tmp_path)
    assert main(["shapes", "letter_h", str(cfg)]) == EXIT_CONFIG


def test_shapes_from_config_block(tmp_path):
    cfg = write_config(tmp_path, {"targets": {"shapes": {"four_disks": {"points_per_disk": 3}}},
                                  "output": {"dir": str(tmp_path / "o"), "phase_resolution": 8}})
    assert main(["shapes", "four_disks", str(cfg)]) == EXIT_OK
    assert (tmp_path / "o" / "phase.csv").is_file()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "metalens", "gaussian", "1", "--out-dir", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and (tmp_path / "cells.svg").is_file()
