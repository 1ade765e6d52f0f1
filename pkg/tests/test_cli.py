import json

import numpy as np
import pytest

from repaugment import cli, store


def run_cli(*argv):
    return cli.main(list(argv))


@pytest.fixture()
def synth_file(tmp_path):
    path = tmp_path / "data.repa"
    code = run_cli("synth", "--dim", "8", "--counts", "40,20,20,10",
                   "--sep", "5", "--seed", "1", "--out", str(path))
    assert code == 0
    return path


class TestSynth:
    def test_writes_valid_file_with_count(self, tmp_path, capsys):
        out = tmp_path / "d.repa"
        code = run_cli("synth", "--dim", "16", "--counts", "100,41,24,9",
                       "--sep", "6", "--seed", "1", "--out", str(out))
        assert code == 0
        ds = store.load_store(out)
        assert len(ds) == 174 and ds.dim == 16

    def test_icbhi_ratios(self, tmp_path):
        out = tmp_path / "d.repa"
        code = run_cli("synth", "--dim", "4", "--icbhi-ratios", "--total",
                       "1000", "--seed", "0", "--out", str(out))
        assert code == 0
        counts = store.load_store(out).class_counts()
        for count, exact in zip(counts, (572.9, 235.5, 139.7, 51.9)):
            assert abs(count - exact) <= 1.0

    def test_missing_out_usage_error(self, tmp_path):
        code = run_cli("synth", "--dim", "4", "--counts", "1,1,1,1")
        assert code == 2

    def test_icbhi_without_total_usage_error(self, tmp_path):
        code = run_cli("synth", "--dim", "4", "--icbhi-ratios",
                       "--out", str(tmp_path / "x.repa"))
        assert code == 2


class TestImportCsv:
    def test_round_trip(self, tmp_path):
        csv_path = tmp_path / "in.csv"
        csv_path.write_text("normal,train,1.0,2.0\nwheeze,test,0.5,0.5\n")
        out = tmp_path / "out.repa"
        assert run_cli("import-csv", "--in", str(csv_path), "--dim", "2",
                       "--out", str(out)) == 0
        ds = store.load_store(out)
        assert list(ds.labels) == [0, 2]

    def test_bad_csv_data_error(self, tmp_path):
        csv_path = tmp_path / "in.csv"
        csv_path.write_text("mystery,train,1.0\n")
        assert run_cli("import-csv", "--in", str(csv_path), "--dim", "1",
                       "--out", str(tmp_path / "o.repa")) == 3


class TestTrain:
    def test_multi_seed_json_output(self, synth_file, tmp_path, capsys):
        out = tmp_path / "run.json"
        code = run_cli("train", "--in", str(synth_file),
                       "--preset", "transformer", "--aug", "repaug",
                       "--epochs", "3",
                       "--seeds", "0,1,2,3,4", "--out", str(out))
        assert code == 0
        doc = json.loads(out.read_text())
        assert len(doc["runs"]) == 5
        assert {"sp", "se", "score"} <= set(doc["aggregate"])
        assert "Score (%)" in capsys.readouterr().out

    def test_cnn_preset_echoed(self, synth_file, tmp_path):
        out = tmp_path / "run.json"
        code = run_cli("train", "--in", str(synth_file), "--preset", "cnn",
                       "--epochs", "2", "--seeds", "0", "--out", str(out))
        assert code == 0
        config = json.loads(out.read_text())["config"]
        assert config["lr"] == 1e-3 and config["batch_size"] == 64
        # epochs overridden for test speed; preset default is 400
        assert json.loads(out.read_text())["preset"] == "cnn"

    def test_aug_modes_both_complete(self, synth_file, tmp_path, capsys):
        for mode in ("none", "repaug"):
            code = run_cli("train", "--in", str(synth_file), "--aug", mode,
                           "--epochs", "2", "--seeds", "0")
            assert code == 0
            assert "per-class accuracy" in capsys.readouterr().out

    def test_corrupt_input_data_error(self, tmp_path):
        bad = tmp_path / "bad.repa"
        bad.write_bytes(b"not a repa file at all")
        assert run_cli("train", "--in", str(bad), "--seeds", "0") == 3

    def test_unknown_flag_usage_error(self, synth_file):
        assert run_cli("train", "--in", str(synth_file), "--frobnicate") == 2


class TestEval:
    def test_matches_training_report(self, synth_file, tmp_path, capsys):
        out = tmp_path / "run.json"
        run_cli("train", "--in", str(synth_file), "--epochs", "3",
                "--seeds", "7", "--out", str(out))
        capsys.readouterr()
        assert run_cli("eval", "--params", str(out), "--in",
                       str(synth_file)) == 0
        printed = capsys.readouterr().out
        report = json.loads(out.read_text())["runs"][0]["report"]
        assert f"{100 * report['score']:.2f}" in printed

    def test_deterministic_stdout(self, synth_file, tmp_path, capsys):
        out = tmp_path / "run.json"
        run_cli("train", "--in", str(synth_file), "--epochs", "3",
                "--seeds", "7", "--out", str(out))
        capsys.readouterr()
        run_cli("eval", "--params", str(out), "--in", str(synth_file))
        first = capsys.readouterr().out
        run_cli("eval", "--params", str(out), "--in", str(synth_file))
        assert capsys.readouterr().out == first

    def test_dim_mismatch_exit_3(self, synth_file, tmp_path):
        out = tmp_path / "run.json"
        run_cli("train", "--in", str(synth_file), "--epochs", "2",
                "--seeds", "0", "--out", str(out))
        other = tmp_path / "other.repa"
        run_cli("synth", "--dim", "5", "--counts", "4,2,2,2", "--sep", "1",
                "--out", str(other))
        assert run_cli("eval", "--params", str(out), "--in", str(other)) == 3

    def test_empty_test_split_exit_3(self, synth_file, tmp_path):
        out = tmp_path / "run.json"
        run_cli("train", "--in", str(synth_file), "--epochs", "2",
                "--seeds", "0", "--out", str(out))
        train_only = tmp_path / "train_only.repa"
        run_cli("synth", "--dim", "8", "--counts", "4,2,2,2", "--sep", "1",
                "--train-frac", "1.0", "--out", str(train_only))
        assert run_cli("eval", "--params", str(out),
                       "--in", str(train_only)) == 3


class TestGradCheck:
    def test_passes(self, capsys):
        assert run_cli("grad-check", "--dim", "8", "--batch", "4") == 0
        assert "PASS" in capsys.readouterr().out

    def test_impossible_tolerance_exit_4(self, capsys):
        assert run_cli("grad-check", "--dim", "8", "--batch", "4",
                       "--tolerance", "1e-18") == 4
        assert "FAIL" in capsys.readouterr().out


class TestHelp:
    @pytest.mark.parametrize("command", ["synth", "import-csv", "train",
                                         "eval", "grad-check"])
    def test_help_exits_zero(self, command, capsys):
        code = run_cli(command, "--help")
        assert code == 0
        assert "--" in capsys.readouterr().out

    def test_train_help_lists_defaults(self, capsys):
        run_cli("train", "--help")
        text = capsys.readouterr().out
        for token in ("5e-5", "batch 8", "50 epochs", "1e-3", "288"):
            assert token in text
