"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or convergence error.  Every
subcommand with any randomized behavior requires an explicit ``--seed``;
the purely deterministic transforms (``sobi``, ``clean``, ``features``,
``predict``) take none.
"""

import argparse
import json
import os
import sys

from .bench import format_report, run_benchmark, save_report_json
from .bss import Recording, flag_artifact_components, remove_components, sobi
from .errors import SobikitError
from .features import Band, DEFAULT_BANDS, extract_features
from .io import (
    load_trialset,
    read_features,
    read_recording,
    write_features,
    write_matrix_csv,
    write_recording,
    save_trialset,
)
from .pipeline import PipelineConfig, run_pipeline
from .svm import LabeledDataset, load_model, save_model, svm_predict, svm_train
from .synth import make_dataset


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _lags_arg(text):
    lags = []
    try:
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if ".." in part:
                a, b = part.split("..", 1)
                lags.extend(range(int(a), int(b) + 1))
            else:
                lags.append(int(part))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad lag spec {text!r}: {exc}") from exc
    if not lags:
        raise argparse.ArgumentTypeError(f"bad lag spec {text!r}: no lags")
    return tuple(lags)


def _bands_arg(text):
    bands = []
    try:
        for part in text.split(","):
            name, _, span = part.strip().partition(":")
            low, _, high = span.partition("-")
            bands.append(Band(float(low), float(high), name))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"bad band spec {text!r} (expected name:low-high,...): {exc}"
        ) from exc
    return tuple(bands)


def _cmd_gen(args):
    ts = make_dataset(
        args.trials,
        channels=args.channels,
        fs=args.fs,
        seed=args.seed,
        erd_depth=args.erd_depth,
    )
    save_trialset(ts, args.out)
    rec = ts.recording
    print(
        f"wrote {args.out}: {rec.n_channels} channels x {rec.n_samples} samples, "
        f"{len(ts.trials)} trials, fs={rec.sample_rate:g}"
    )
    return 0


def _cmd_sobi(args):
    rec, _ = read_recording(args.input)
    res = sobi(rec, lags=args.lags, method=args.method)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.input))[0]
    paths = {}
    for name, matrix in (
        ("sources", res.sources),
        ("mixing", res.mixing_estimate),
        ("unmixing", res.unmixing),
    ):
        path = os.path.join(args.out_dir, f"{stem}_{name}_{args.method}.csv")
        write_matrix_csv(matrix, path)
        paths[name] = path
    result = {
        "format_version": 1,
        "method": res.method,
        "elapsed_seconds": res.elapsed_seconds,
        "score": res.diagnostics.score,
        "iterations": res.diagnostics.iterations,
        "converged": res.diagnostics.converged,
        "warnings": res.diagnostics.warnings,
        "component_scales": res.component_scales.tolist(),
        "retained_rank": int(res.whitener.retained_rank),
        "files": {k: os.path.basename(v) for k, v in paths.items()},
    }
    result_path = os.path.join(args.out_dir, f"{stem}_sobi_{args.method}.json")
    with open(result_path, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    print(
        f"{res.method}: {res.sources.shape[0]} components in "
        f"{res.elapsed_seconds:.6f} s (score {res.diagnostics.score:.3e}); "
        f"wrote {result_path}"
    )
    return 0


def _cmd_clean(args):
    rec, _ = read_recording(args.input)
    res = sobi(rec, lags=args.lags, method=args.method)
    flagged = flag_artifact_components(res)
    cleaned = remove_components(res, flagged)
    write_recording(cleaned, args.out)
    print(
        f"removed components {flagged or '[]'}; wrote {args.out} "
        f"({cleaned.n_channels} channels x {cleaned.n_samples} samples)"
    )
    return 0


def _cmd_features(args):
    ts = load_trialset(args.input)
    rec = ts.recording
    vectors = []
    for trial in ts.trials:
        epoch = Recording(
            rec.data[:, trial.start_sample : trial.end_sample],
            rec.sample_rate,
            rec.channel_names,
        )
        vectors.append(extract_features(epoch, args.bands))
    write_features(vectors, ts.labels_signed, args.out)
    print(
        f"wrote {args.out}: {len(vectors)} vectors x {len(vectors[0])} features "
        f"({len(args.bands)} bands + energy on {rec.n_channels} channels)"
    )
    return 0


def _cmd_train(args):
    vectors, labels = read_features(args.features)
    model = svm_train(
        LabeledDataset(vectors, labels),
        c=args.c,
        kernel=args.kernel,
        tol=args.tol,
        max_passes=args.max_passes,
        seed=args.seed,
        gamma=args.gamma,
    )
    save_model(model, args.out)
    hits = sum(
        1 for i in range(len(labels)) if svm_predict(model, vectors[i])[0] == labels[i]
    )
    print(
        f"trained {model.kernel} svm on {len(labels)} vectors "
        f"({model.alphas.size} support vectors, training accuracy "
        f"{hits / len(labels):.3f}); wrote {args.out}"
    )
    return 0


def _cmd_predict(args):
    model = load_model(args.model)
    vectors, labels = read_features(args.features)
    rows = [svm_predict(model, v) for v in vectors]
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("index,predicted_label,decision_value\n")
        for i, (label, decision) in enumerate(rows):
            fh.write(f"{i},{label},{decision:.9g}\n")
    message = f"wrote {args.out}: {len(rows)} predictions"
    if all(l in (-1, 1) for l in labels):
        acc = sum(1 for (p, _), t in zip(rows, labels) if p == t) / len(rows)
        message += f" (accuracy against file labels: {acc:.3f})"
    print(message)
    return 0


def _cmd_pipeline(args):
    if args.config:
        config = PipelineConfig.from_json(args.config)
        overrides = {"seed": args.seed}
        if args.method is not None:
            overrides["method"] = args.method
        if args.lags is not None:
            overrides["lags"] = args.lags
        if args.folds is not None:
            overrides["folds"] = args.folds
        base = config.to_dict()
        base.pop("bands", None)
        base.pop("artifact_criteria", None)
        base.update(overrides)
        config = PipelineConfig(
            bands=config.bands, artifact_criteria=config.artifact_criteria, **base
        )
    else:
        config = PipelineConfig(
            method=args.method or "schur",
            lags=args.lags or tuple(range(1, 11)),
            folds=args.folds or 5,
            seed=args.seed,
        )
    report = run_pipeline(
        config, args.input, out_dir=args.out_dir, figures=not args.no_figures
    )
    for rep in report.methods:
        print(
            f"{rep.method}: accuracy {rep.accuracy:.3f} "
            f"(folds: {', '.join(f'{a:.2f}' for a in rep.fold_accuracies)}); "
            f"removed components {rep.flagged_components}"
        )
    print(f"wrote {len(report.written_paths)} files to {args.out_dir}")
    return 0


def _cmd_bench(args):
    report = run_benchmark(
        n_datasets=args.datasets,
        channels=args.channels,
        samples=args.samples,
        lags=args.lags,
        repetitions=args.repetitions,
        seed=args.seed,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    table = format_report(report)
    json_path = os.path.join(args.out_dir, "benchmark.json")
    txt_path = os.path.join(args.out_dir, "benchmark.txt")
    save_report_json(report, json_path)
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write(table + "\n")
    print(table)
    written = [json_path, txt_path]
    if not args.no_figures:
        from .plots import bench_figure

        png_path = os.path.join(args.out_dir, "benchmark.png")
        bench_figure(report, png_path)
        written.append(png_path)
    print(f"\nwrote {', '.join(written)}")
    return 0


def build_parser():
    parser = _Parser(
        prog="sobikit",
        description=(
            "Second-order blind identification toolkit: separation, artifact "
            "removal, band-power features, SVM classification, benchmarks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[], help="write a synthetic trial set")
    p.add_argument("--trials", type=int, required=True, help="trials per class")
    p.add_argument("--channels", type=int, default=8)
    p.add_argument("--fs", type=float, default=250.0)
    p.add_argument("--erd-depth", type=float, default=0.7)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output recording CSV path")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("sobi", help="separate a recording into sources")
    p.add_argument("input", help="recording CSV (needs its .meta.json sidecar)")
    p.add_argument("--method", choices=("jacobi", "schur"), required=True)
    p.add_argument("--lags", type=_lags_arg, default=tuple(range(1, 11)),
                   help="e.g. 1..10 or 1,2,5")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=_cmd_sobi)

    p = sub.add_parser("clean", help="remove artifact components")
    p.add_argument("input")
    p.add_argument("--method", choices=("jacobi", "schur"), default="schur")
    p.add_argument("--lags", type=_lags_arg, default=tuple(range(1, 11)))
    p.add_argument("--out", required=True, help="cleaned recording CSV path")
    p.set_defaults(func=_cmd_clean)

    p = sub.add_parser("features", help="per-trial band-power features")
    p.add_argument("input", help="trial-set recording CSV")
    p.add_argument("--bands", type=_bands_arg,
                   default=DEFAULT_BANDS, help="e.g. mu:8-12,beta:13-30")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("train", help="train the SVM on a feature table")
    p.add_argument("--features", required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--kernel", choices=("linear", "rbf"), default="linear")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-passes", type=int, default=50)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("predict", help="classify a feature table")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--out", required=True, help="predictions CSV path")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("pipeline", help="full separate/clean/classify run")
    p.add_argument("input", help="trial-set recording CSV")
    p.add_argument("--config", help="pipeline config JSON")
    p.add_argument("--method", choices=("jacobi", "schur", "both"))
    p.add_argument("--lags", type=_lags_arg)
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_pipeline)

    p = sub.add_parser("bench", help="time both separation backends")
    p.add_argument("--datasets", type=int, default=5)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--samples", type=int, default=30000)
    p.add_argument("--lags", type=_lags_arg, default=tuple(range(1, 11)))
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SobikitError as exc:
        sys.stderr.write(f"sobikit: error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"sobikit: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
