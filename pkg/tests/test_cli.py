import os
import subprocess
import sys

import pytest

from attclx.cli import build_parser, main
from attclx.io import fixture_path

from conftest import DATA_DIR

FIXTURE = fixture_path("stand_in_daily.csv")
DESK = ["--set", "train.epochs=2", "--set", "net.d_model=8", "--set", "net.hidden=8", "--set", "net.layers=1",
        "--set", "train.heads=2", "--set", "gbt.n_rounds=5", "--set", "train.lookback=10"]


def golden(name):
    with open(os.path.join(DATA_DIR, "cli", name)) as fh:
        return fh.read()


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_adf_golden(capsys):
    assert call(capsys, "adf", FIXTURE) == (0, golden("adf_close.txt"), "")
    assert call(capsys, "adf", FIXTURE, "--diff", "1")[1] == golden("adf_diff.txt")


def test_diff_pvalue_in_scientific_notation(capsys):
    out = call(capsys, "adf", FIXTURE, "--diff", "1")[1]
    p = dict(line.split("=") for line in out.splitlines())["p_value"]
    assert "e-" in p and float(p) < 1e-20


def test_pacf_golden(capsys, tmp_path):
    assert call(capsys, "pacf", FIXTURE, "--lags", "5")[1] == golden("pacf5.csv")
    out = tmp_path / "acf.csv"
    assert call(capsys, "acf", FIXTURE, "--lags", "3", "--out", str(out))[0] == 0
    assert out.read_text().splitlines()[:2] == ["lag,acf", "0,1.0"]


def test_arima_fit_and_forecast(capsys, tmp_path):
    code, out, _ = call(capsys, "arima", "fit", FIXTURE, "--out", str(tmp_path / "f.csv"))
    assert code == 0
    assert [l.split("=")[0] for l in out.splitlines()] == ["p", "d", "intercept", "a1", "a2", "residual_variance"]
    assert (tmp_path / "f.csv").read_text().startswith("date,close,fitted,residual\n")
    code, out, _ = call(capsys, "arima", "forecast", FIXTURE, "--horizon", "3")
    assert out.splitlines()[0] == "step,forecast" and len(out.splitlines()) == 4


def test_train_predict_evaluate(capsys, tmp_path):
    ckpt, pred = tmp_path / "m.npz", tmp_path / "p.csv"
    code, out, err = call(capsys, "train", FIXTURE, "--variant", "bilstm_xgb", "--seed", "3",
                          "--checkpoint", str(ckpt), *DESK)
    assert code == 0 and out.splitlines()[0] == "epoch,loss" and len(out.splitlines()) == 3
    assert "started" in err
    assert call(capsys, "predict", FIXTURE, "--checkpoint", str(ckpt), "--test-only", "--out", str(pred))[0] == 0
    assert pred.read_text().startswith("date,truth,prediction\n")
    code, out, _ = call(capsys, "evaluate", "--pred", str(pred), "--truth", str(pred))
    metrics = dict(line.split("=") for line in out.splitlines())
    assert float(metrics["mae"]) == float(metrics["rmse"]) == float(metrics["mape"]) == 0.0
    assert float(metrics["r2_standard"]) == 1.0
    code, out, _ = call(capsys, "evaluate", "--pred", str(pred), "--truth", str(pred), "--truth-column", "truth")
    assert float(dict(l.split("=") for l in out.splitlines())["mae"]) > 0


def test_ablate_table_is_reproducible(capsys):
    code, first, err = call(capsys, "ablate", FIXTURE, "--seed", "7", *DESK)
    assert code == 0 and "finished" in err
    _, second, _ = call(capsys, "ablate", FIXTURE, "--seed", "7", *DESK)
    assert first == second
    rows = first.splitlines()
    assert rows[0] == "variant,MAE,RMSE,MAPE,R2"
    assert len(rows) == 9 and all(len(r.split(",")) == 5 for r in rows)


def test_gen(capsys, tmp_path):
    out = tmp_path / "g.csv"
    assert call(capsys, "gen", "--kind", "ar2", "--n", "80", "--seed", "2", "--out", str(out))[0] == 0
    assert len(out.read_text().splitlines()) == 81
    code, text, _ = call(capsys, "gen", "--kind", "ar2", "--n", "80", "--seed", "2")
    assert text == out.read_text()


def test_data_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("trade_date,open,high,low,vol,amount\n")
    code, _, err = call(capsys, "adf", str(bad))
    assert code == 1 and err.count("\n") == 1 and "MissingColumn" in err
    code, _, err = call(capsys, "gen", "--kind", "ar2", "--n", "10")
    assert code == 1


@pytest.mark.parametrize("argv", [["adf"], ["adf", FIXTURE, "--bogus"], ["frobnicate"], ["acf", FIXTURE]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2


def test_help_lists_every_flag(capsys):
    parser = build_parser()
    subparsers = next(a for a in parser._actions if a.dest == "command").choices
    for name, sub in subparsers.items():
        with pytest.raises(SystemExit) as info:
            main([name, "--help"])
        assert info.value.code == 0
        text = capsys.readouterr().out
        for action in sub._actions:
            for flag in action.option_strings:
                assert flag in text, (name, flag)


def test_entry_point_exit_codes():
    run = lambda *a: subprocess.run([sys.executable, "-m", "attclx.cli", *a], capture_output=True, text=True)
    assert run("adf", FIXTURE).returncode == 0
    assert run("adf", "missing.csv").returncode == 1
    assert run("adf").returncode == 2
