"""End-to-end tests of the command-line interface."""

import json

import numpy as np
import pytest

from emcl.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_PARSE, EXIT_SHAPE, main
from emcl.io import read_embeddings, read_state, write_embeddings


def write_batch(path, rows=8, cols=6, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((rows, cols)) * scale
    write_embeddings(path, matrix)
    return read_embeddings(path)  # values as quantized on disk


def output_bytes(directory, skip=("manifest.json",)):
    return {
        p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.name not in skip
    }


class TestRunEmcl:
    def test_basic_run_writes_outputs_and_manifest(self, tmp_path):
        x = write_batch(tmp_path / "in.emb")
        out = tmp_path / "out"
        code = main(
            ["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3", "--iters", "4",
             "--seed", "1", "--output-dir", str(out)]
        )
        assert code == EXIT_OK
        blended = read_embeddings(out / "output.emb")
        recon = read_embeddings(out / "reconstruction.emb")
        assert blended.shape == x.shape and recon.shape == x.shape
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "run-emcl"
        assert manifest["row_split"] == {"video_rows": [0, 4], "text_rows": [4, 8]}
        assert set(manifest["outputs"]) == {"output.emb", "reconstruction.emb", "state.json"}
        assert len(manifest["inputs"]) == 1

    def test_paper_defaults_applied_when_config_omits_them(self, tmp_path):
        write_batch(tmp_path / "in.emb", rows=70, cols=40)
        (tmp_path / "cfg.json").write_text(json.dumps({"command": "run-emcl", "input": str(tmp_path / "in.emb")}))
        out = tmp_path / "out"
        assert main(["run-emcl", "--config", str(tmp_path / "cfg.json"), "--output-dir", str(out)]) == EXIT_OK
        emcl_cfg = json.loads((out / "manifest.json").read_text())["resolved_config"]["emcl"]
        assert (emcl_cfg["k"], emcl_cfg["iters"], emcl_cfg["sigma"], emcl_cfg["alpha"]) == (32, 9, 1.0, 0.9)

    def test_beta_zero_output_equals_input(self, tmp_path):
        x = write_batch(tmp_path / "in.emb")
        out = tmp_path / "out"
        code = main(
            ["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "2", "--beta", "0",
             "--output-dir", str(out)]
        )
        assert code == EXIT_OK
        np.testing.assert_array_equal(read_embeddings(out / "output.emb"), x)

    def test_repeat_run_is_byte_identical(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        args = ["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3", "--seed", "7"]
        assert main(args + ["--output-dir", str(tmp_path / "o1")]) == EXIT_OK
        assert main(args + ["--output-dir", str(tmp_path / "o2")]) == EXIT_OK
        assert output_bytes(tmp_path / "o1") == output_bytes(tmp_path / "o2")

    def test_rerun_from_manifest_reproduces_outputs(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        out1 = tmp_path / "o1"
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3",
                     "--output-dir", str(out1)]) == EXIT_OK
        out2 = tmp_path / "o2"
        assert main(["run-emcl", "--config", str(out1 / "manifest.json"),
                     "--output-dir", str(out2)]) == EXIT_OK
        assert output_bytes(out1) == output_bytes(out2)

    def test_frozen_run_keeps_state(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        out1 = tmp_path / "o1"
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3",
                     "--frozen", "--output-dir", str(out1)]) == EXIT_OK
        state = read_state(out1 / "state.json")
        assert state.frozen
        write_batch(tmp_path / "in2.emb", rows=10, seed=9)
        out2 = tmp_path / "o2"
        assert main(["run-emcl", "--input", str(tmp_path / "in2.emb"), "--k", "3",
                     "--state", str(out1 / "state.json"), "--output-dir", str(out2)]) == EXIT_OK
        np.testing.assert_array_equal(read_state(out2 / "state.json").m, state.m)

    def test_state_flows_between_batches_when_not_frozen(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        out = tmp_path / "o"
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3",
                     "--output-dir", str(out)]) == EXIT_OK
        first = read_state(out / "state.json")
        out2 = tmp_path / "o2"
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3",
                     "--state", str(out / "state.json"), "--output-dir", str(out2)]) == EXIT_OK
        second = read_state(out2 / "state.json")
        assert not np.array_equal(first.m, second.m)

    def test_missing_input_is_parse_error(self, tmp_path):
        assert main(["run-emcl", "--input", str(tmp_path / "nope.emb")]) == EXIT_PARSE

    def test_state_dimension_mismatch_is_shape_error(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        out = tmp_path / "o"
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "3",
                     "--output-dir", str(out)]) == EXIT_OK
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--k", "5",
                     "--state", str(out / "state.json"), "--output-dir", str(tmp_path / "o2")]) == EXIT_SHAPE

    def test_malformed_embedding_file_is_parse_error(self, tmp_path):
        (tmp_path / "bad.emb").write_text("EMB1 2 2\n1 2\n")
        assert main(["run-emcl", "--input", str(tmp_path / "bad.emb")]) == EXIT_PARSE

    def test_unknown_config_key_rejected(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        (tmp_path / "cfg.json").write_text(
            json.dumps({"command": "run-emcl", "input": str(tmp_path / "in.emb"), "tpyo": 1})
        )
        assert main(["run-emcl", "--config", str(tmp_path / "cfg.json")]) == EXIT_PARSE

    def test_invalid_sigma_is_parse_error(self, tmp_path):
        write_batch(tmp_path / "in.emb")
        assert main(["run-emcl", "--input", str(tmp_path / "in.emb"), "--sigma", "0"]) == EXIT_PARSE


class TestSynthExperiment:
    def test_writes_trace_coordinates_and_manifest(self, tmp_path):
        out = tmp_path / "out"
        code = main(["synth-experiment", "--k", "3", "--iters", "5", "--seed", "0",
                     "--output-dir", str(out)])
        assert code == EXIT_OK
        trace_lines = (out / "trace.csv").read_text().splitlines()
        assert trace_lines[0].startswith("iteration,intra_class_variance")
        assert len(trace_lines) == 7  # header + iterations 0..5
        coords = (out / "coordinates.csv").read_text().splitlines()
        assert coords[0].startswith("stage,row,modality,label")
        stages = {line.split(",")[0] for line in coords[1:]}
        assert stages == {"input", "output"}

    def test_pca_baseline_written_when_requested(self, tmp_path):
        (tmp_path / "cfg.json").write_text(json.dumps({
            "command": "synth-experiment",
            "synthetic": {"per_class": 5, "seed": 1},
            "emcl": {"k": 3, "iters": 3},
            "pca_baseline": True,
        }))
        out = tmp_path / "out"
        assert main(["synth-experiment", "--config", str(tmp_path / "cfg.json"),
                     "--output-dir", str(out)]) == EXIT_OK
        lines = (out / "pca_baseline.csv").read_text().splitlines()
        assert lines[0] == "k,intra_class_variance,inter_class_variance,numerical_rank"
        assert lines[1].startswith("3,")

    def test_zero_iteration_trace(self, tmp_path):
        (tmp_path / "cfg.json").write_text(json.dumps({
            "command": "synth-experiment",
            "synthetic": {"per_class": 4},
            "emcl": {"k": 3},
            "iterations": 0,
        }))
        out = tmp_path / "out"
        assert main(["synth-experiment", "--config", str(tmp_path / "cfg.json"),
                     "--output-dir", str(out)]) == EXIT_OK
        assert len((out / "trace.csv").read_text().splitlines()) == 2

    def test_zero_noise_spec_starts_with_zero_intra_variance(self, tmp_path):
        (tmp_path / "cfg.json").write_text(json.dumps({
            "command": "synth-experiment",
            "synthetic": {"per_class": 4, "signal_sigma": 0.0, "noise_sigma": 0.0, "modality_offset": 0.0},
            "emcl": {"k": 3, "iters": 2},
        }))
        out = tmp_path / "out"
        assert main(["synth-experiment", "--config", str(tmp_path / "cfg.json"),
                     "--output-dir", str(out)]) == EXIT_OK
        first_record = (out / "trace.csv").read_text().splitlines()[1].split(",")
        assert float(first_record[1]) == 0.0  # intra-class variance of the raw input

    def test_deterministic_and_rerunnable_from_manifest(self, tmp_path):
        args = ["synth-experiment", "--k", "3", "--seed", "5"]
        assert main(args + ["--output-dir", str(tmp_path / "o1")]) == EXIT_OK
        assert main(args + ["--output-dir", str(tmp_path / "o2")]) == EXIT_OK
        assert output_bytes(tmp_path / "o1") == output_bytes(tmp_path / "o2")
        assert main(["synth-experiment", "--config", str(tmp_path / "o1" / "manifest.json"),
                     "--output-dir", str(tmp_path / "o3")]) == EXIT_OK
        assert output_bytes(tmp_path / "o1") == output_bytes(tmp_path / "o3")


class TestEvalRetrieval:
    @staticmethod
    def setup_pair(tmp_path, n=6, d=16, seed=3):
        rng = np.random.default_rng(seed)
        videos = rng.standard_normal((n, d))
        texts = videos + 0.05 * rng.standard_normal((n, d))
        write_embeddings(tmp_path / "texts.emb", texts)
        write_embeddings(tmp_path / "videos.emb", videos)
        (tmp_path / "gt.txt").write_text("".join(f"{i}\n" for i in range(n)))
        return tmp_path / "texts.emb", tmp_path / "videos.emb", tmp_path / "gt.txt"

    def test_identity_pairs_score_perfectly(self, tmp_path):
        texts, videos, gt = self.setup_pair(tmp_path)
        out = tmp_path / "out"
        code = main(["eval-retrieval", "--texts", str(texts), "--videos", str(videos),
                     "--ground-truth", str(gt), "--output-dir", str(out)])
        assert code == EXIT_OK
        lines = (out / "retrieval_report.csv").read_text().splitlines()
        assert len(lines) == 3  # header + both directions
        for line in lines[1:]:
            cells = line.split(",")
            assert cells[0] == "raw"
            assert float(cells[3]) == 100.0  # R@1
            assert float(cells[7]) == 1.0    # median rank

    def test_crafted_ranks_reported_exactly(self, tmp_path):
        # texts expressed in an orthonormal video basis, so cosine rows are the
        # crafted scores up to a positive per-row scale; ranks are 1, 2, 3, 4
        scores = np.array(
            [
                [0.9, 0.1, 0.1, 0.1],
                [0.8, 0.7, 0.1, 0.1],
                [0.8, 0.7, 0.6, 0.1],
                [0.8, 0.7, 0.6, 0.5],
            ]
        )
        write_embeddings(tmp_path / "texts.emb", scores)
        write_embeddings(tmp_path / "videos.emb", np.eye(4))
        (tmp_path / "gt.txt").write_text("0\n1\n2\n3\n")
        out = tmp_path / "out"
        code = main(["eval-retrieval", "--texts", str(tmp_path / "texts.emb"),
                     "--videos", str(tmp_path / "videos.emb"),
                     "--ground-truth", str(tmp_path / "gt.txt"), "--output-dir", str(out)])
        assert code == EXIT_OK
        header, t2v = (out / "retrieval_report.csv").read_text().splitlines()[:2]
        cells = dict(zip(header.split(","), t2v.split(",")))
        assert cells["direction"] == "text_to_video"
        assert float(cells["r_at_1"]) == 25.0
        assert float(cells["r_at_5"]) == 100.0
        assert float(cells["median_rank"]) == 2.5

    def test_emcl_variant_adds_rows(self, tmp_path):
        texts, videos, gt = self.setup_pair(tmp_path)
        out = tmp_path / "out"
        code = main(["eval-retrieval", "--texts", str(texts), "--videos", str(videos),
                     "--ground-truth", str(gt), "--emcl", "--k", "3", "--iters", "4",
                     "--output-dir", str(out)])
        assert code == EXIT_OK
        lines = (out / "retrieval_report.csv").read_text().splitlines()
        variants = {line.split(",")[0] for line in lines[1:]}
        assert variants == {"raw", "emcl"}
        assert len(lines) == 5

    def test_inverted_softmax_only_changes_ranking_numbers(self, tmp_path):
        texts, videos, gt = self.setup_pair(tmp_path, seed=8)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        base = ["eval-retrieval", "--texts", str(texts), "--videos", str(videos), "--ground-truth", str(gt)]
        assert main(base + ["--output-dir", str(out1)]) == EXIT_OK
        assert main(base + ["--inverted-softmax", "--output-dir", str(out2)]) == EXIT_OK
        plain = (out1 / "retrieval_report.csv").read_text().splitlines()
        inverted = (out2 / "retrieval_report.csv").read_text().splitlines()
        assert plain[0] == inverted[0]
        assert len(plain) == len(inverted)
        # info_nce column is rank-independent and must be identical
        for a, b in zip(plain[1:], inverted[1:]):
            assert a.split(",")[8] == b.split(",")[8]

    def test_mapping_errors_reported_per_row(self, tmp_path):
        texts, videos, _ = self.setup_pair(tmp_path)
        (tmp_path / "gt.txt").write_text("0\n1\n2\n3\n4\n99\n")
        assert main(["eval-retrieval", "--texts", str(texts), "--videos", str(videos),
                     "--ground-truth", str(tmp_path / "gt.txt")]) == EXIT_PARSE

    def test_dimension_mismatch_is_shape_error(self, tmp_path):
        write_embeddings(tmp_path / "texts.emb", np.ones((3, 4)))
        write_embeddings(tmp_path / "videos.emb", np.ones((3, 5)))
        (tmp_path / "gt.txt").write_text("0\n1\n2\n")
        assert main(["eval-retrieval", "--texts", str(tmp_path / "texts.emb"),
                     "--videos", str(tmp_path / "videos.emb"),
                     "--ground-truth", str(tmp_path / "gt.txt")]) == EXIT_SHAPE

    def test_zero_norm_row_is_numerical_error(self, tmp_path):
        write_embeddings(tmp_path / "texts.emb", np.array([[0.0, 0.0], [1.0, 1.0]]))
        write_embeddings(tmp_path / "videos.emb", np.ones((2, 2)))
        (tmp_path / "gt.txt").write_text("0\n1\n")
        assert main(["eval-retrieval", "--texts", str(tmp_path / "texts.emb"),
                     "--videos", str(tmp_path / "videos.emb"),
                     "--ground-truth", str(tmp_path / "gt.txt")]) == EXIT_NUMERICAL


class TestGmmCheck:
    def test_trace_written_and_monotone(self, tmp_path):
        rng = np.random.default_rng(4)
        data = np.concatenate([rng.normal(-4, 0.5, (60, 1)), rng.normal(4, 0.5, (60, 1))])
        write_embeddings(tmp_path / "data.emb", data)
        out = tmp_path / "out"
        code = main(["gmm-check", "--input", str(tmp_path / "data.emb"), "--k", "2",
                     "--iters", "25", "--seed", "0", "--output-dir", str(out)])
        assert code == EXIT_OK
        lines = (out / "likelihood_trace.csv").read_text().splitlines()
        assert lines[0] == "iteration,log_likelihood"
        values = [float(line.split(",")[1]) for line in lines[1:]]
        assert len(values) == 25
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))

    def test_rerun_from_manifest(self, tmp_path):
        write_batch(tmp_path / "data.emb", rows=30, cols=2, seed=11)
        out1 = tmp_path / "o1"
        assert main(["gmm-check", "--input", str(tmp_path / "data.emb"), "--k", "3",
                     "--iters", "10", "--output-dir", str(out1)]) == EXIT_OK
        out2 = tmp_path / "o2"
        assert main(["gmm-check", "--config", str(out1 / "manifest.json"),
                     "--output-dir", str(out2)]) == EXIT_OK
        assert output_bytes(out1) == output_bytes(out2)

    def test_config_for_wrong_command_rejected(self, tmp_path):
        write_batch(tmp_path / "data.emb")
        (tmp_path / "cfg.json").write_text(json.dumps({"command": "run-emcl", "input": str(tmp_path / "data.emb")}))
        assert main(["gmm-check", "--config", str(tmp_path / "cfg.json")]) == EXIT_PARSE
