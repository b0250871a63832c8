"""Command-line entry point and run configuration handling.

Each subcommand resolves a JSON run configuration (file values overridden by
flags, defaults filled from the library), validates every referenced path up
front, runs a pipeline of pure stages, and writes its outputs plus a
``manifest.json`` that echoes the resolved configuration together with input
and output digests.  Passing a previous manifest as ``--config`` re-runs it:
the embedded resolved configuration is used as-is, so outputs reproduce
byte-for-byte.

Exit codes: 0 success, 2 parse/validation failure, 3 shape mismatch,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io as _io
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .contrastive import cosine_similarity, info_nce, inverted_softmax
from .core import (
    EmclConfig,
    apply_residual,
    cold_start_state,
    emcl_iterate,
)
from .errors import NumericalError, ParseError, ShapeError
from .gmm import gmm_fit
from .io import (
    read_embeddings,
    read_ground_truth,
    read_state,
    sha256_file,
    write_embeddings,
    write_json,
    write_state,
    atomic_write_text,
)
from .retrieval import (
    REPORT_KS,
    TEXT_TO_VIDEO,
    VIDEO_TO_TEXT,
    compute_report,
    rank_matrix,
)
from .synthetic import (
    LabeledBatch,
    SyntheticSpec,
    generate,
    numerical_rank,
    pca_project,
    run_iteration_study,
    _variance_diagnostics,
)

logger = logging.getLogger("emcl")

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SHAPE = 3
EXIT_NUMERICAL = 4

SCHEMA_VERSION = 1

COMMANDS = ("run-emcl", "synth-experiment", "eval-retrieval", "gmm-check")

_EMCL_DEFAULTS = {f.name: f.default for f in dataclasses.fields(EmclConfig)}
_SYNTH_DEFAULTS = {f.name: f.default for f in dataclasses.fields(SyntheticSpec)}

# top-level keys accepted per command, besides schema_version/command/output_dir
_ALLOWED_KEYS = {
    "run-emcl": {"input", "state", "frozen", "video_rows", "binary", "emcl"},
    "synth-experiment": {"synthetic", "emcl", "iterations", "pca_baseline"},
    "eval-retrieval": {
        "text_embeddings",
        "video_embeddings",
        "ground_truth",
        "emcl_rerank",
        "state",
        "emcl",
        "inverted_softmax",
        "inv_temperature",
        "temperature",
        "report_k",
    },
    "gmm-check": {"input", "k", "iters", "seed"},
}


def _fail_parse(message: str) -> None:
    raise ParseError(message)


def _load_config_file(path: str, command: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except FileNotFoundError:
        _fail_parse(f"config file not found: {path}")
    except OSError as exc:
        _fail_parse(f"{path}: cannot read ({exc})")
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        _fail_parse(f"{path}: invalid JSON ({exc})")
    if not isinstance(doc, dict):
        _fail_parse(f"{path}: config must be a JSON object")
    if "resolved_config" in doc:  # a manifest: re-run its embedded configuration
        doc = doc["resolved_config"]
        if not isinstance(doc, dict):
            _fail_parse(f"{path}: manifest resolved_config must be a JSON object")
    if doc.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        _fail_parse(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    declared = doc.get("command", command)
    if declared != command:
        _fail_parse(f"{path}: config is for command {declared!r}, not {command!r}")
    allowed = _ALLOWED_KEYS[command] | {"schema_version", "command", "output_dir"}
    unknown = set(doc) - allowed
    if unknown:
        _fail_parse(f"{path}: unknown config fields {sorted(unknown)}")
    return doc


def _merge_section(doc: dict, key: str, defaults: dict, overrides: dict, label: str) -> dict:
    section = dict(defaults)
    raw = doc.get(key, {})
    if not isinstance(raw, dict):
        _fail_parse(f"config section {key!r} must be a JSON object")
    unknown = set(raw) - set(defaults)
    if unknown:
        _fail_parse(f"unknown {label} fields {sorted(unknown)}")
    section.update(raw)
    section.update({k: v for k, v in overrides.items() if v is not None})
    return section


def _build_emcl_config(section: dict) -> EmclConfig:
    try:
        return EmclConfig(**section)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"invalid routing parameters: {exc}") from None


def _build_synth_spec(section: dict) -> SyntheticSpec:
    try:
        return SyntheticSpec(**section)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"invalid synthetic parameters: {exc}") from None


def _require_paths(*paths: str | None) -> None:
    missing = [p for p in paths if p is not None and not os.path.exists(p)]
    if missing:
        _fail_parse("input path(s) not found: " + ", ".join(missing))


def _abspath(value):
    return None if value is None else os.path.abspath(value)


def _emcl_flag_overrides(args) -> dict:
    return {
        "k": args.k,
        "iters": args.iters,
        "sigma": args.sigma,
        "alpha": args.alpha,
        "beta": args.beta,
        "seed": args.seed,
    }


def _write_manifest(output_dir, command, resolved, inputs, outputs, row_split, started):
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "library_version": __version__,
        "command": command,
        "resolved_config": resolved,
        "inputs": {path: sha256_file(path) for path in inputs},
        "outputs": {name: sha256_file(os.path.join(output_dir, name)) for name in outputs},
        "row_split": row_split,
        "timings": {"wall_seconds": time.perf_counter() - started},
    }
    path = os.path.join(output_dir, "manifest.json")
    write_json(path, manifest)
    return manifest


def _write_csv(path, header, rows) -> None:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    atomic_write_text(path, buffer.getvalue())


def _fmt(value) -> str:
    """Shortest exact decimal form of a float, for CSV cells."""
    return repr(float(value))


# ----------------------------------------------------------------------
# run-emcl
# ----------------------------------------------------------------------

def resolve_run_emcl(args) -> dict:
    doc = _load_config_file(args.config, "run-emcl") if args.config else {}
    emcl = _merge_section(doc, "emcl", _EMCL_DEFAULTS, _emcl_flag_overrides(args), "routing")
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "command": "run-emcl",
        "input": _abspath(args.input if args.input is not None else doc.get("input")),
        "state": _abspath(args.state if args.state is not None else doc.get("state")),
        "frozen": args.frozen if args.frozen is not None else doc.get("frozen"),
        "video_rows": doc.get("video_rows"),
        "binary": bool(doc.get("binary", False)),
        "emcl": emcl,
        "output_dir": _abspath(args.output_dir or doc.get("output_dir") or "emcl_out"),
    }
    if cfg["input"] is None:
        _fail_parse("run-emcl needs an input embedding file (--input or config 'input')")
    _build_emcl_config(emcl)
    _require_paths(cfg["input"], cfg["state"])
    return cfg


def cmd_run_emcl(cfg: dict) -> dict:
    started = time.perf_counter()
    config = _build_emcl_config(cfg["emcl"])
    x = read_embeddings(cfg["input"])
    rows = x.shape[0]

    if cfg["state"] is not None:
        state = read_state(cfg["state"])
    else:
        state = cold_start_state(config.k, rows, config.seed, config.alpha)
        logger.info("no state file given, cold-starting from seed %d", config.seed)
    if cfg["frozen"] is not None:
        state = dataclasses.replace(state, frozen=bool(cfg["frozen"]))

    video_rows = cfg["video_rows"] if cfg["video_rows"] is not None else rows // 2
    if not 0 <= video_rows <= rows:
        raise ShapeError(f"video_rows={video_rows} outside [0, {rows}]")

    reconstructed, bases, _, new_state = emcl_iterate(x, state, config)
    blended = apply_residual(x, reconstructed, config.beta)

    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    write_embeddings(os.path.join(out, "output.emb"), blended, binary=cfg["binary"])
    write_embeddings(os.path.join(out, "reconstruction.emb"), reconstructed, binary=cfg["binary"])
    write_state(os.path.join(out, "state.json"), new_state)

    row_split = {"video_rows": [0, video_rows], "text_rows": [video_rows, rows]}
    inputs = [cfg["input"]] + ([cfg["state"]] if cfg["state"] else [])
    manifest = _write_manifest(
        out, "run-emcl", cfg, inputs, ["output.emb", "reconstruction.emb", "state.json"], row_split, started
    )
    print(f"run-emcl: {rows}x{x.shape[1]} -> rank<={config.k} reconstruction in {out}")
    return manifest


# ----------------------------------------------------------------------
# synth-experiment
# ----------------------------------------------------------------------

def resolve_synth_experiment(args) -> dict:
    doc = _load_config_file(args.config, "synth-experiment") if args.config else {}
    emcl = _merge_section(doc, "emcl", _EMCL_DEFAULTS, _emcl_flag_overrides(args), "routing")
    synth_overrides = {"seed": args.seed}
    synthetic = _merge_section(doc, "synthetic", _SYNTH_DEFAULTS, synth_overrides, "synthetic")
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "command": "synth-experiment",
        "synthetic": synthetic,
        "emcl": emcl,
        "iterations": doc.get("iterations"),
        "pca_baseline": bool(doc.get("pca_baseline", False)),
        "output_dir": _abspath(args.output_dir or doc.get("output_dir") or "emcl_out"),
    }
    _build_emcl_config(emcl)
    _build_synth_spec(synthetic)
    if cfg["iterations"] is not None and (not isinstance(cfg["iterations"], int) or cfg["iterations"] < 0):
        _fail_parse(f"iterations must be a nonnegative integer, got {cfg['iterations']!r}")
    return cfg


def cmd_synth_experiment(cfg: dict) -> dict:
    started = time.perf_counter()
    spec = _build_synth_spec(cfg["synthetic"])
    config = _build_emcl_config(cfg["emcl"])
    steps = cfg["iterations"] if cfg["iterations"] is not None else config.iters

    batch = generate(spec)
    trace = run_iteration_study(batch, config, steps)

    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    _write_csv(
        os.path.join(out, "trace.csv"),
        ["iteration", "intra_class_variance", "inter_class_variance", "numerical_rank", "basis_change"],
        [
            [t, _fmt(trace.intra[t]), _fmt(trace.inter[t]), int(trace.numerical_rank[t]),
             "" if np.isnan(trace.basis_change[t]) else _fmt(trace.basis_change[t])]
            for t in range(len(trace))
        ],
    )

    coord_rows = []
    for stage, feats in _coordinate_stages(batch, config, steps):
        for i in range(feats.shape[0]):
            coord_rows.append(
                [stage, i, int(batch.modality[i]), int(batch.labels[i])] + [_fmt(v) for v in feats[i]]
            )
    _write_csv(
        os.path.join(out, "coordinates.csv"),
        ["stage", "row", "modality", "label"] + [f"x{d}" for d in range(batch.features.shape[1])],
        coord_rows,
    )

    outputs = ["trace.csv", "coordinates.csv"]
    if cfg["pca_baseline"]:
        recon = pca_project(batch, config.k)
        intra, inter = _variance_diagnostics(recon, batch.labels)
        _write_csv(
            os.path.join(out, "pca_baseline.csv"),
            ["k", "intra_class_variance", "inter_class_variance", "numerical_rank"],
            [[config.k, _fmt(intra), _fmt(inter), numerical_rank(recon)]],
        )
        outputs.append("pca_baseline.csv")

    half = batch.features.shape[0] // 2
    row_split = {"video_rows": [0, half], "text_rows": [half, batch.features.shape[0]]}
    manifest = _write_manifest(out, "synth-experiment", cfg, [], outputs, row_split, started)

    def ratio(t):
        return trace.inter[t] / trace.intra[t] if trace.intra[t] > 0 else float("nan")

    print(
        f"synth-experiment: intra {trace.intra[0]:.4f} -> {trace.intra[-1]:.4f}, "
        f"inter/intra {ratio(0):.3f} -> {ratio(-1):.3f}, "
        f"rank {trace.numerical_rank[0]} -> {trace.numerical_rank[-1]} ({out})"
    )
    return manifest


def _coordinate_stages(batch: LabeledBatch, config: EmclConfig, steps: int):
    yield "input", batch.features
    if steps >= 1:
        run_config = config if steps == config.iters else dataclasses.replace(config, iters=steps)
        state = cold_start_state(config.k, batch.features.shape[0], config.seed, config.alpha)
        reconstructed, _, _, _ = emcl_iterate(batch.features, state, run_config)
        yield "output", reconstructed


# ----------------------------------------------------------------------
# eval-retrieval
# ----------------------------------------------------------------------

def resolve_eval_retrieval(args) -> dict:
    doc = _load_config_file(args.config, "eval-retrieval") if args.config else {}
    emcl = _merge_section(doc, "emcl", _EMCL_DEFAULTS, _emcl_flag_overrides(args), "routing")
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "command": "eval-retrieval",
        "text_embeddings": _abspath(args.texts if args.texts is not None else doc.get("text_embeddings")),
        "video_embeddings": _abspath(args.videos if args.videos is not None else doc.get("video_embeddings")),
        "ground_truth": _abspath(
            args.ground_truth if args.ground_truth is not None else doc.get("ground_truth")
        ),
        "emcl_rerank": args.emcl if args.emcl is not None else bool(doc.get("emcl_rerank", False)),
        "state": _abspath(args.state if args.state is not None else doc.get("state")),
        "emcl": emcl,
        "inverted_softmax": (
            args.inverted_softmax if args.inverted_softmax is not None else bool(doc.get("inverted_softmax", False))
        ),
        "inv_temperature": (
            args.inv_temperature if args.inv_temperature is not None else float(doc.get("inv_temperature", 100.0))
        ),
        "temperature": float(doc.get("temperature", 0.01)),
        "report_k": doc.get("report_k", list(REPORT_KS)),
        "output_dir": _abspath(args.output_dir or doc.get("output_dir") or "emcl_out"),
    }
    for key in ("text_embeddings", "video_embeddings", "ground_truth"):
        if cfg[key] is None:
            _fail_parse(f"eval-retrieval needs {key!r} (flag or config)")
    if not cfg["inv_temperature"] > 0:
        _fail_parse(f"inv_temperature must be > 0, got {cfg['inv_temperature']}")
    if not cfg["temperature"] > 0:
        _fail_parse(f"temperature must be > 0, got {cfg['temperature']}")
    bad_k = [k for k in cfg["report_k"] if k not in REPORT_KS]
    if bad_k:
        _fail_parse(f"report_k values must be among {REPORT_KS}, got {bad_k}")
    _build_emcl_config(emcl)
    _require_paths(cfg["text_embeddings"], cfg["video_embeddings"], cfg["ground_truth"], cfg["state"])
    return cfg


def _inverse_permutation(mapping: np.ndarray, path: str) -> np.ndarray:
    n = mapping.shape[0]
    counts = np.bincount(mapping, minlength=n)
    if np.any(counts != 1):
        dupes = np.flatnonzero(counts > 1)
        raise ParseError(
            f"{path}: mapping must pair every query with a distinct candidate "
            f"(candidates hit more than once: {dupes.tolist()})"
        )
    inverse = np.empty(n, dtype=np.int64)
    inverse[mapping] = np.arange(n)
    return inverse


def _evaluate_variant(texts, videos, gt, inverse_gt, use_inverted, inv_temperature, temperature):
    sim = cosine_similarity(texts, videos)
    loss = info_nce(sim[:, gt], temperature) if sim.shape[0] == sim.shape[1] else None
    results = []
    for direction, matrix, truth in (
        (TEXT_TO_VIDEO, sim, gt),
        (VIDEO_TO_TEXT, sim.T, inverse_gt),
    ):
        ranked = inverted_softmax(matrix, inv_temperature) if use_inverted else matrix
        report = compute_report(rank_matrix(ranked, truth), direction)
        results.append((report, loss))
    return results


def cmd_eval_retrieval(cfg: dict) -> dict:
    started = time.perf_counter()
    config = _build_emcl_config(cfg["emcl"])
    texts = read_embeddings(cfg["text_embeddings"])
    videos = read_embeddings(cfg["video_embeddings"])
    if texts.shape[0] != videos.shape[0]:
        raise ShapeError(
            f"paired evaluation needs equally many texts and videos, got {texts.shape[0]} vs {videos.shape[0]}"
        )
    gt = read_ground_truth(cfg["ground_truth"], texts.shape[0], videos.shape[0])
    inverse_gt = _inverse_permutation(gt, cfg["ground_truth"])

    variants = [("raw", texts, videos)]
    row_split = None
    if cfg["emcl_rerank"]:
        stacked = np.vstack([videos, texts])  # videos first, texts below
        if cfg["state"] is not None:
            state = dataclasses.replace(read_state(cfg["state"]), frozen=True)
        else:
            state = dataclasses.replace(
                cold_start_state(config.k, stacked.shape[0], config.seed, config.alpha), frozen=True
            )
        reconstructed, _, _, _ = emcl_iterate(stacked, state, config)
        blended = apply_residual(stacked, reconstructed, config.beta)
        variants.append(("emcl", blended[videos.shape[0] :], blended[: videos.shape[0]]))
        row_split = {"video_rows": [0, videos.shape[0]], "text_rows": [videos.shape[0], stacked.shape[0]]}

    rows = []
    printed = []
    for name, t_feats, v_feats in variants:
        for report, loss in _evaluate_variant(
            t_feats, v_feats, gt, inverse_gt, cfg["inverted_softmax"], cfg["inv_temperature"], cfg["temperature"]
        ):
            rows.append(
                [
                    name,
                    report.direction,
                    cfg["inverted_softmax"],
                    _fmt(report.r_at[1]),
                    _fmt(report.r_at[5]),
                    _fmt(report.r_at[10]),
                    _fmt(report.r_at[50]),
                    _fmt(report.median_rank),
                    "" if loss is None else _fmt(loss),
                    texts.shape[0],
                ]
            )
            printed.append((name, report, loss))

    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    _write_csv(
        os.path.join(out, "retrieval_report.csv"),
        ["variant", "direction", "inverted_softmax", "r_at_1", "r_at_5", "r_at_10", "r_at_50",
         "median_rank", "info_nce", "num_queries"],
        rows,
    )

    ks = [k for k in REPORT_KS if k in cfg["report_k"]]
    header = f"{'variant':<8} {'direction':<15}" + "".join(f" {'R@' + str(k):>7}" for k in ks) + f" {'MdR':>7}"
    print(header)
    for name, report, _ in printed:
        cells = "".join(f" {report.r_at[k]:>7.1f}" for k in ks)
        print(f"{name:<8} {report.direction:<15}{cells} {report.median_rank:>7.1f}")

    inputs = [cfg["text_embeddings"], cfg["video_embeddings"], cfg["ground_truth"]]
    if cfg["state"]:
        inputs.append(cfg["state"])
    return _write_manifest(out, "eval-retrieval", cfg, inputs, ["retrieval_report.csv"], row_split, started)


# ----------------------------------------------------------------------
# gmm-check
# ----------------------------------------------------------------------

def resolve_gmm_check(args) -> dict:
    doc = _load_config_file(args.config, "gmm-check") if args.config else {}
    cfg = {
        "schema_version": SCHEMA_VERSION,
        "command": "gmm-check",
        "input": _abspath(args.input if args.input is not None else doc.get("input")),
        "k": args.k if args.k is not None else int(doc.get("k", 2)),
        "iters": args.iters if args.iters is not None else int(doc.get("iters", 50)),
        "seed": args.seed if args.seed is not None else int(doc.get("seed", 0)),
        "output_dir": _abspath(args.output_dir or doc.get("output_dir") or "emcl_out"),
    }
    if cfg["input"] is None:
        _fail_parse("gmm-check needs an input embedding file (--input or config 'input')")
    if cfg["k"] < 1 or cfg["iters"] < 1:
        _fail_parse(f"k and iters must be >= 1, got k={cfg['k']}, iters={cfg['iters']}")
    _require_paths(cfg["input"])
    return cfg


def cmd_gmm_check(cfg: dict) -> dict:
    started = time.perf_counter()
    data = read_embeddings(cfg["input"])
    params, trace = gmm_fit(data, cfg["k"], cfg["iters"], cfg["seed"])

    out = cfg["output_dir"]
    os.makedirs(out, exist_ok=True)
    _write_csv(
        os.path.join(out, "likelihood_trace.csv"),
        ["iteration", "log_likelihood"],
        [[t + 1, _fmt(trace[t])] for t in range(trace.shape[0])],
    )
    print(
        f"gmm-check: k={cfg['k']}, {cfg['iters']} iterations, "
        f"log-likelihood {trace[0]:.4f} -> {trace[-1]:.4f}, "
        f"monotone={bool(np.all(np.diff(trace) >= -1e-9))}"
    )
    logger.info("fitted means:\n%s", params.means)
    return _write_manifest(out, "gmm-check", cfg, [cfg["input"]], ["likelihood_trace.csv"], None, started)


# ----------------------------------------------------------------------
# argument parsing and dispatch
# ----------------------------------------------------------------------

def _add_shared_flags(sub, include_emcl=True):
    sub.add_argument("--config", help="JSON run configuration (or a previous manifest to re-run)")
    sub.add_argument("--seed", type=int, default=None, help="override the random seed")
    sub.add_argument("--output-dir", default=None, help="directory for outputs (default: emcl_out)")
    if include_emcl:
        sub.add_argument("--k", type=int, default=None, help="number of subspaces")
        sub.add_argument("--iters", type=int, default=None, help="number of routing iterations")
        sub.add_argument("--sigma", type=float, default=None, help="kernel spread")
        sub.add_argument("--alpha", type=float, default=None, help="initial-value momentum")
        sub.add_argument("--beta", type=float, default=None, help="residual blend scale")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emcl",
        description="Expectation-maximization subspace routing over paired cross-modal embeddings.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run-emcl", help="reconstruct a stacked embedding batch in a rank-K subspace")
    _add_shared_flags(run_p)
    run_p.add_argument("--input", help="stacked embedding file (video rows, then text rows)")
    run_p.add_argument("--state", help="state JSON carrying the cross-batch initial value")
    run_p.add_argument("--frozen", action="store_true", default=None,
                       help="inference mode: do not update the initial-value state")

    synth_p = sub.add_parser("synth-experiment", help="generate synthetic clusters and trace the iterations")
    _add_shared_flags(synth_p)

    eval_p = sub.add_parser("eval-retrieval", help="rank candidates and report Recall@K / median rank")
    _add_shared_flags(eval_p)
    eval_p.add_argument("--texts", help="text embedding file")
    eval_p.add_argument("--videos", help="video embedding file")
    eval_p.add_argument("--ground-truth", help="query-to-candidate mapping, one index per line")
    eval_p.add_argument("--state", help="state JSON used when reranking")
    eval_p.add_argument("--emcl", action=argparse.BooleanOptionalAction, default=None,
                        help="also evaluate features passed through the routing reconstruction")
    eval_p.add_argument("--inverted-softmax", action=argparse.BooleanOptionalAction, default=None,
                        help="re-rank with the inverted softmax before computing metrics")
    eval_p.add_argument("--inv-temperature", type=float, default=None,
                        help="inverted softmax temperature (default 100)")

    gmm_p = sub.add_parser("gmm-check", help="fit the reference Gaussian mixture and dump its likelihood trace")
    _add_shared_flags(gmm_p, include_emcl=False)
    gmm_p.add_argument("--input", help="embedding file holding the data matrix")
    gmm_p.add_argument("--k", type=int, default=None, help="number of mixture components")
    gmm_p.add_argument("--iters", type=int, default=None, help="number of EM iterations")

    return parser


_RESOLVERS = {
    "run-emcl": (resolve_run_emcl, cmd_run_emcl),
    "synth-experiment": (resolve_synth_experiment, cmd_synth_experiment),
    "eval-retrieval": (resolve_eval_retrieval, cmd_eval_retrieval),
    "gmm-check": (resolve_gmm_check, cmd_gmm_check),
}


def _setup_logging() -> None:
    level_name = os.environ.get("EMCL_LOG", "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(name)s %(levelname)s %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    resolve, run = _RESOLVERS[args.command]
    try:
        cfg = resolve(args)
        run(cfg)
    except ParseError as exc:
        print(f"emcl: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ShapeError as exc:
        print(f"emcl: shape error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except NumericalError as exc:
        print(f"emcl: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
