import json

import numpy as np
import pytest

from groupcs.cli import main
from groupcs.model import save_instance
from groupcs.sensing import gen_gaussian, save_matrix

FIG_INSTANCE = """4 4 1 4
1 2
1 2 3
2 4
3 4
4 1 2 9
"""


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "fig.inst"
    path.write_text(FIG_INSTANCE)
    return str(path)


@pytest.mark.parametrize("solver", ["dp", "benders", "brute"])
def test_project_prints_optimum(instance_file, capsys, solver):
    rc = main(["project", "--instance", instance_file, "--solver", solver])
    out = capsys.readouterr().out
    assert rc == 0
    assert "value   11.0" in out
    assert "groups  4" in out


def test_project_json(instance_file, capsys):
    rc = main(["project", "--instance", instance_file, "--json"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["value"] == 11.0
    assert payload["groups"] == [4]
    assert sorted(payload["support"]) == [3, 4]


def test_project_requires_weights(tmp_path, capsys):
    path = tmp_path / "nw.inst"
    path.write_text("2 1 1 2\n1 2\n")
    rc = main(["project", "--instance", str(path)])
    assert rc == 1
    assert "weight" in capsys.readouterr().err


def test_project_missing_file_is_error(capsys):
    rc = main(["project", "--instance", "/nonexistent/file"])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["project"])  # missing --instance
    assert exc.value.code == 2


def test_recover_generated_instance(capsys):
    rc = main([
        "recover", "--N", "100", "--G", "3", "--m", "80",
        "--matrix", "gaussian", "--seed", "5", "--json",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["recovered"] is True
    assert payload["rel_error"] < 1e-5


def test_recover_from_files(tmp_path, capsys):
    model_file = tmp_path / "blocks.inst"
    from groupcs.bench import gen_block_model

    model = gen_block_model(100, "half", 3)
    save_instance(model_file, model)
    rng = np.random.default_rng(2)
    a = gen_gaussian(70, 100, rng)
    support = sorted(model.groups[0] | model.groups[10] | model.groups[30])
    x = np.zeros(100)
    x[support] = rng.standard_normal(len(support))
    mat_file, sig_file = tmp_path / "a.bin", tmp_path / "x.txt"
    save_matrix(mat_file, a)
    np.savetxt(sig_file, x)
    rc = main([
        "recover", "--model", str(model_file),
        "--matrix-file", str(mat_file), "--signal-file", str(sig_file),
        "--json",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["rel_error"] < 1e-5


def test_sweep_writes_outputs(tmp_path, capsys):
    out = tmp_path / "results"
    rc = main([
        "sweep", "--N", "100", "--G", "3",
        "--series", "model-iht:gaussian",
        "--trials", "4", "--m-step", "20", "--max-m", "80",
        "--seed", "3", "--workers", "1", "--no-timing",
        "--out-dir", str(out), "--json",
    ])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["series"][0]["algorithm"] == "model-iht"
    assert (out / "sweep.csv").exists()
    assert (out / "plotdata").is_dir()


def test_selftest_passes(capsys):
    rc = main(["selftest"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "selftest: PASS" in out
    assert "head/tail gate at (0.95, 1.05): True" in out
    assert "head/tail gate at (0.50, 1.05): False" in out
