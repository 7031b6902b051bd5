"""CLI behavior: validation, subcommands, exit codes, reproducibility."""

import json

import pytest

from translab import cli, io
from translab.generative import TranslationGraph
from translab.impossibility import make_worst_case


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestParseAndValidate:
    def test_minimal_bound_config(self, tmp_path):
        instance = tmp_path / "i.json"
        io.save_instance(make_worst_case(0.5), instance)
        config = cli.parse_and_validate(["bound", "--instance", str(instance)])
        assert config.mode == "bound"
        assert config.epsilon == 0.0

    def test_negative_epsilon_names_the_field(self, tmp_path):
        instance = tmp_path / "i.json"
        io.save_instance(make_worst_case(0.5), instance)
        with pytest.raises(cli.ValidationFailure) as exc:
            cli.parse_and_validate(
                ["bound", "--instance", str(instance), "--epsilon", "-0.1"]
            )
        assert any("epsilon" in v for v in exc.value.violations)

    def test_unsorted_n_list_names_the_field(self, tmp_path):
        with pytest.raises(cli.ValidationFailure) as exc:
            cli.parse_and_validate(
                ["sweep", "--n-list", "64,32", "--out", str(tmp_path)]
            )
        assert any("n_list" in v for v in exc.value.violations)

    def test_all_violations_are_collected(self, tmp_path):
        with pytest.raises(cli.ValidationFailure) as exc:
            cli.parse_and_validate(
                ["sweep", "--n-list", "64,32", "--trials", "2", "--out", str(tmp_path)]
            )
        fields = " ".join(exc.value.violations)
        assert "n_list" in fields and "trials" in fields

    def test_missing_file_is_a_violation(self):
        with pytest.raises(cli.ValidationFailure) as exc:
            cli.parse_and_validate(["bound", "--instance", "/nonexistent.json"])
        assert any("instance" in v for v in exc.value.violations)


class TestBoundAndBrute:
    def test_bound_on_worst_case_instance(self, tmp_path, capsys):
        instance = tmp_path / "worst08.json"
        io.save_instance(make_worst_case(0.8), instance)
        code, out, _ = run_cli(
            ["bound", "--instance", str(instance), "--epsilon", "0"], capsys
        )
        assert code == 0
        assert "bound_sum=0.8" in out

    def test_brute_verifies_and_writes_reports(self, tmp_path, capsys):
        instance = tmp_path / "worst.json"
        io.save_instance(make_worst_case(0.6), instance)
        out_dir = tmp_path / "out"
        code, out, _ = run_cli(
            [
                "brute", "--instance", str(instance), "--epsilon", "0",
                "--z-size", "2", "--out", str(out_dir),
            ],
            capsys,
        )
        assert code == 0
        assert "holds=true" in out
        report = json.loads((out_dir / "brute_report.json").read_text())
        assert report["report"]["holds"] is True
        assert (out_dir / "brute_report.csv").exists()

    def test_invalid_flag_exits_2(self, tmp_path, capsys):
        instance = tmp_path / "i.json"
        io.save_instance(make_worst_case(0.5), instance)
        code, _, err = run_cli(
            ["bound", "--instance", str(instance), "--epsilon", "-1"], capsys
        )
        assert code == 2
        assert "epsilon" in err

    def test_many_to_many_bound_and_brute(self, tmp_path, capsys):
        import numpy as np

        from translab.impossibility import random_many_to_many_instance

        instance = random_many_to_many_instance(np.random.default_rng(12))
        path = tmp_path / "mm.json"
        io.save_instance(instance, path)
        code, out, _ = run_cli(["bound", "--instance", str(path)], capsys)
        assert code == 0
        assert "bound_max=" in out and "bound_avg=" in out
        code, out, _ = run_cli(
            ["brute", "--instance", str(path), "--z-size", "3", "--objective", "max"],
            capsys,
        )
        assert code == 0
        assert "holds=true" in out


class TestDemoWorstCase:
    def test_delta_08(self, capsys):
        code, out, _ = run_cli(
            ["demo-worst-case", "--delta", "0.8", "--epsilon", "0"], capsys
        )
        assert code == 0
        assert "bound_sum=0.8" in out

    def test_delta_zero(self, capsys):
        code, out, _ = run_cli(
            ["demo-worst-case", "--delta", "0", "--epsilon", "0"], capsys
        )
        assert code == 0
        assert "bound_sum=0" in out


class TestPipeline:
    def _write_graph(self, path, n=40):
        graph = TranslationGraph(
            ("L0", "L1", "L2"), (("L0", "L1", n), ("L1", "L2", n))
        )
        io.save_graph(graph, path)

    def test_generate_train_eval(self, tmp_path, capsys):
        graph_path = tmp_path / "graph.json"
        self._write_graph(graph_path)
        out = tmp_path / "run"
        code, _, _ = run_cli(
            [
                "generate", "--graph", str(graph_path), "--out", str(out),
                "--dim", "2", "--seed", "5",
            ],
            capsys,
        )
        assert code == 0
        code, _, _ = run_cli(
            [
                "train", "--graph", str(graph_path), "--corpus-dir", str(out),
                "--out", str(out), "--seed", "5",
            ],
            capsys,
        )
        assert code == 0
        code, out_text, _ = run_cli(
            [
                "eval", "--graph", str(graph_path),
                "--codecs", str(out / "codecs.json"),
                "--encoders", str(out / "encoders.json"),
                "--out", str(out), "--samples", "2000", "--seed", "5",
            ],
            capsys,
        )
        assert code == 0
        assert "holds=true" in out_text
        summary = json.loads((out / "eval_summary.json").read_text())
        assert summary["holds_false"] == 0
        assert summary["seed"] == 5

    def test_eval_on_disconnected_graph_exits_2(self, tmp_path, capsys):
        graph = TranslationGraph(("L0", "L1", "L2"), (("L0", "L1", 10),))
        graph_path = tmp_path / "graph.json"
        io.save_graph(graph, graph_path)
        out = tmp_path / "run"
        run_cli(
            ["generate", "--graph", str(graph_path), "--out", str(out), "--dim", "2"],
            capsys,
        )
        run_cli(
            ["train", "--graph", str(graph_path), "--corpus-dir", str(out),
             "--out", str(out)],
            capsys,
        )
        code, _, err = run_cli(
            [
                "eval", "--graph", str(graph_path),
                "--codecs", str(out / "codecs.json"),
                "--encoders", str(out / "encoders.json"),
                "--out", str(out),
            ],
            capsys,
        )
        assert code == 2
        assert "connected" in err

    def test_repeated_runs_are_byte_identical(self, tmp_path, capsys):
        graph_path = tmp_path / "graph.json"
        self._write_graph(graph_path)
        outputs = []
        for name in ("a", "b"):
            out = tmp_path / name
            run_cli(
                ["generate", "--graph", str(graph_path), "--out", str(out),
                 "--dim", "2", "--sigma", "0.05", "--nuisance-dim", "1",
                 "--seed", "11"],
                capsys,
            )
            run_cli(
                ["train", "--graph", str(graph_path), "--corpus-dir", str(out),
                 "--out", str(out), "--seed", "11"],
                capsys,
            )
            run_cli(
                ["eval", "--graph", str(graph_path),
                 "--codecs", str(out / "codecs.json"),
                 "--encoders", str(out / "encoders.json"),
                 "--out", str(out), "--samples", "2000", "--seed", "11"],
                capsys,
            )
            outputs.append(out)
        for filename in ("edge_losses.csv", "pair_eval.csv"):
            a = (outputs[0] / filename).read_bytes()
            b = (outputs[1] / filename).read_bytes()
            assert a == b


class TestSweepCommand:
    def test_small_sweep_writes_slope(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        code, out_text, _ = run_cli(
            [
                "sweep", "--n-list", "16,32,64", "--trials", "5",
                "--dim", "1", "--nuisance-dim", "1", "--sigma", "0.1",
                "--seed", "3", "--out", str(out),
            ],
            capsys,
        )
        assert code == 0
        assert "slope=" in out_text
        summary = json.loads((out / "sweep_summary.json").read_text())
        assert summary["degenerate"] is False
        assert (out / "sweep.csv").exists()
