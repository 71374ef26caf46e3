import csv
import json

import pytest

import minperturb as mp
from minperturb.cli import main


def write_config(tmp_path, name="cfg.json", **overrides):
    cfg = {
        "seed": 0,
        "out_dir": str(tmp_path / "out"),
        "model": {"kind": "affine-multiclass",
                  "W": [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5]],
                  "b": [0.2, -0.1, 0.0]},
        "dataset": {"name": "grid-multiclass", "size": 30, "seed": 5},
        "attacks": [
            {"label": "df", "method": "df"},
            {"label": "sdf", "method": "sdf", "m": "inf", "n": 1},
        ],
        "oracle": False,
    }
    cfg.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path, cfg


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --- train -------------------------------------------------------------------

def test_cli_train_writes_model_and_is_deterministic(tmp_path, capsys):
    out = tmp_path / "model.json"
    argv = ["train", "--dataset", "two-gaussians", "--layers", "2,8,2",
            "--seed", "7", "--epochs", "50", "--size", "80", "--out", str(out)]
    assert main(argv) == 0
    printed = capsys.readouterr().out
    assert "final training accuracy" in printed
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_cli_train_missing_layers_is_usage_error(tmp_path):
    assert main(["train", "--dataset", "two-gaussians"]) == 1


def test_cli_train_model_loads(tmp_path):
    out = tmp_path / "model.json"
    main(["train", "--dataset", "two-gaussians", "--layers", "2,8,2",
          "--seed", "7", "--epochs", "50", "--size", "80", "--out", str(out)])
    clf = mp.load_model(out)
    assert clf.kind == "mlp"
    assert clf.num_classes == 2


# --- attack ------------------------------------------------------------------

def test_cli_attack_row_counts_and_report(tmp_path):
    path, cfg = write_config(tmp_path)
    assert main(["attack", "--config", str(path)]) == 0
    rows = read_rows(tmp_path / "out" / "results.csv")
    assert rows[0] == ["sample_id", "attack", "success", "l2", "linf", "grads", "iters"]
    assert len(rows) == 1 + 2 * 30  # two attacks, thirty samples
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert set(report["attacks"]) == {"df", "sdf"}
    assert report["version"] == mp.__version__
    assert len(report["rows"]) == 60


def test_cli_attack_duplicate_labels_rejected(tmp_path):
    path, _ = write_config(tmp_path, attacks=[
        {"label": "df", "method": "df"}, {"label": "df", "method": "sdf"}])
    assert main(["attack", "--config", str(path)]) == 1


def test_cli_attack_missing_config_file(tmp_path):
    assert main(["attack", "--config", str(tmp_path / "nope.json")]) == 1


def test_cli_attack_oracle_gap_column(tmp_path):
    path, _ = write_config(tmp_path, oracle=True)
    assert main(["attack", "--config", str(path)]) == 0
    rows = read_rows(tmp_path / "out" / "results.csv")
    header = rows[0]
    assert header[-2:] == ["oracle_norm", "oracle_gap"]
    gap_col = header.index("oracle_gap")
    gaps = [abs(float(r[gap_col])) for r in rows[1:]]
    assert max(gaps) <= 1e-10  # affine model: every attack is exact


def test_cli_attack_byte_identical_reruns(tmp_path):
    path, _ = write_config(tmp_path)
    assert main(["attack", "--config", str(path)]) == 0
    first = (tmp_path / "out" / "results.csv").read_bytes()
    assert main(["attack", "--config", str(path)]) == 0
    assert (tmp_path / "out" / "results.csv").read_bytes() == first


def test_cli_attack_thread_pool_does_not_change_bytes(tmp_path, monkeypatch):
    path, _ = write_config(tmp_path)
    monkeypatch.setenv("MINPERTURB_THREADS", "1")
    main(["attack", "--config", str(path)])
    one = (tmp_path / "out" / "results.csv").read_bytes()
    monkeypatch.setenv("MINPERTURB_THREADS", "4")
    main(["attack", "--config", str(path)])
    four = (tmp_path / "out" / "results.csv").read_bytes()
    assert one == four


def test_report_config_echo_reproduces_run(tmp_path):
    path, _ = write_config(tmp_path)
    main(["attack", "--config", str(path)])
    out_dir = tmp_path / "out"
    first = (out_dir / "results.csv").read_bytes()
    echo = json.loads((out_dir / "report.json").read_text())["config"]
    echo["out_dir"] = str(tmp_path / "out2")
    echo_path = tmp_path / "echo.json"
    echo_path.write_text(json.dumps(echo))
    assert main(["attack", "--config", str(echo_path)]) == 0
    assert (tmp_path / "out2" / "results.csv").read_bytes() == first


# --- diagnose ------------------------------------------------------------------

def test_cli_diagnose_outputs(tmp_path):
    path, _ = write_config(
        tmp_path,
        diagnostics={"cosine": True,
                     "gamma": {"start": 0.2, "stop": 1.0, "step": 0.01},
                     "curvature": True})
    assert main(["diagnose", "--config", str(path)]) == 0
    out = tmp_path / "out"

    gamma_rows = read_rows(out / "gamma_curve.csv")[1:]
    per_attack = {}
    for label, g, frac in gamma_rows:
        per_attack.setdefault(label, []).append((float(g), float(frac)))
    assert all(len(v) == 81 for v in per_attack.values())

    cos_rows = read_rows(out / "cosine_hist.csv")[1:]
    results = read_rows(out / "results.csv")[1:]
    successes = sum(int(r[2]) for r in results)
    assert len(cos_rows) == successes

    curv_rows = read_rows(out / "curvature.csv")[1:]
    assert len(curv_rows) == 30


def test_cli_diagnose_empty_dataset_fails(tmp_path):
    path, _ = write_config(tmp_path, dataset={"name": "grid-multiclass",
                                              "size": 0, "seed": 5})
    assert main(["diagnose", "--config", str(path)]) == 1


# --- at-train -----------------------------------------------------------------

@pytest.fixture()
def trained_model_path(tmp_path):
    out = tmp_path / "base.json"
    main(["train", "--dataset", "two-gaussians", "--layers", "2,8,2",
          "--seed", "5", "--epochs", "30", "--size", "60", "--out", str(out)])
    return out


def test_cli_at_train_rejects_zero_cap(tmp_path, trained_model_path):
    cfg = {
        "out_dir": str(tmp_path / "at"),
        "model": {"path": str(trained_model_path)},
        "dataset": {"name": "two-gaussians", "size": 60, "seed": 21},
        "at": {"norm_cap": 0.0, "epochs": 1, "lr": 0.1},
    }
    path = tmp_path / "at.json"
    path.write_text(json.dumps(cfg))
    assert main(["at-train", "--config", str(path)]) == 1


def test_cli_at_train_zero_epochs_keeps_model(tmp_path, trained_model_path):
    cfg = {
        "out_dir": str(tmp_path / "at"),
        "model": {"path": str(trained_model_path)},
        "dataset": {"name": "two-gaussians", "size": 60, "seed": 21},
        "at": {"norm_cap": 1.0, "epochs": 0, "lr": 0.1},
    }
    path = tmp_path / "at.json"
    path.write_text(json.dumps(cfg))
    assert main(["at-train", "--config", str(path)]) == 0
    base = json.loads(trained_model_path.read_text())
    tuned = json.loads((tmp_path / "at" / "model_at.json").read_text())
    assert base == tuned
    summary = json.loads((tmp_path / "at" / "at_summary.json").read_text())
    assert summary["post_median_l2"] == pytest.approx(summary["pre_median_l2"])


# --- oracle -------------------------------------------------------------------

def test_cli_oracle_writes_per_sample_rows(tmp_path):
    path, _ = write_config(tmp_path)
    assert main(["oracle", "--config", str(path)]) == 0
    rows = read_rows(tmp_path / "out" / "oracle.csv")
    assert rows[0] == ["sample_id", "norm", "method", "certified_gap"]
    assert len(rows) == 1 + 30
    assert all(r[2] == "closed-form" for r in rows[1:])


def test_unknown_subcommand_fails():
    assert main(["frobnicate"]) == 1
