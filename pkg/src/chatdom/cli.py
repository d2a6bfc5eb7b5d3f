"""Dominance analysis of group chat transcripts from the command line.

Subcommands follow the analysis order: ``stats``, ``extract``, ``kappa``,
``reconcile``, ``fit``, ``score``, ``report``.

Exit codes::

    0  success
    1  unexpected internal error
    2  command-line usage error
    3  input error (missing file, malformed transcript/annotation/model)
    4  configuration error (lexicon, options, config file)
    5  modeling error (single-class response, rank deficiency, unresolved labels, column mismatch)

Options may also come from a JSON file given with ``--config``; keys are the
long option names (dashes or underscores). Flags on the command line win.
``CHATDOM_OUTPUT_DIR`` overrides the output directory unless ``--output-dir``
is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import warnings
from pathlib import Path

from chatdom import report as rpt
from chatdom.annotations import (
    MANUAL_COLUMNS,
    Annotations,
    apply_resolutions,
    load_annotations,
    load_resolutions,
    reliability_by_column,
    write_annotations,
)
from chatdom.corpus import corpus_stats, read_transcripts
from chatdom.dominance import dominance_shares, evaluate_scoring, score_comments
from chatdom.errors import (
    ChatdomError,
    ColumnMismatchError,
    ConfigurationError,
    InputError,
    ModelingError,
)
from chatdom.features import AUTOMATIC_COLUMNS, FEATURE_FIELDS, LexiconConfig, aggregate_participant, extract_transcript
from chatdom.glm import DesignMatrix, FitOptions, LogitModel, RankedModel, compare_models, fit
from chatdom.published import PUBLISHED, published_model

log = logging.getLogger("chatdom")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_INPUT, EXIT_CONFIG, EXIT_MODEL = 0, 1, 2, 3, 4, 5
ENV_OUTPUT_DIR = "CHATDOM_OUTPUT_DIR"
FORMATS = ("csv", "json", "svg", "png")

MODEL_SETS = {
    "model1": AUTOMATIC_COLUMNS,
    "model2": MANUAL_COLUMNS,
    "model3": MANUAL_COLUMNS + AUTOMATIC_COLUMNS,
}


# ---------------------------------------------------------------------------
# shared loading


def _lexicon(args) -> LexiconConfig:
    return LexiconConfig.load(args.lexicon) if args.lexicon else LexiconConfig()


def _transcripts(args):
    if not args.transcripts:
        raise ConfigurationError("no transcript files given")
    return read_transcripts(args.transcripts)


def _read_annotations(path, transcripts=None) -> Annotations:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return load_annotations(fh, transcripts)
    except FileNotFoundError:
        raise InputError(f"annotation file not found: {path}") from None
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def _read_labels(path, transcripts) -> dict:
    """Flat label file: group_id, seq, ed."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except FileNotFoundError:
        raise InputError(f"label file not found: {path}") from None
    with fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"group_id", "seq", "ed"} <= set(reader.fieldnames):
            raise InputError(f"{path}: label file needs columns group_id, seq, ed")
        labels = {}
        for row in reader:
            try:
                key, v = (row["group_id"], int(row["seq"])), int(row["ed"])
            except (TypeError, ValueError):
                raise InputError(f"{path}: line {reader.line_num}: bad seq or ed value") from None
            if v not in (0, 1):
                raise InputError(f"{path}: line {reader.line_num}: ed must be 0 or 1")
            labels[key] = v
    keys = {c.key for t in transcripts for c in t.comments}
    unknown = set(labels) - keys
    missing = keys - set(labels)
    if unknown or missing:
        raise InputError(f"{path}: {len(unknown)} unknown and {len(missing)} missing comment key(s)")
    return labels


def _consensus(args, transcripts):
    """Final ED labels and (optionally) annotations from --annotations or --labels."""
    if getattr(args, "annotations", None):
        ann = _read_annotations(args.annotations, transcripts)
        return ann.final_labels(fallback_to_coder_a=args.fallback_coder_a), ann
    if getattr(args, "labels", None):
        return _read_labels(args.labels, transcripts), None
    return None, None


def _rows(transcripts, cfg, ann: Annotations | None):
    keys, rows = [], []
    for t in transcripts:
        for c, f in zip(t.comments, extract_transcript(t, cfg)):
            row = f.predictors()
            if ann is not None:
                row.update(ann.codes[c.key].predictors())
            keys.append(c.key)
            rows.append(row)
    return keys, rows


def _formats(args) -> set[str]:
    fm = args.formats
    if isinstance(fm, str):
        fm = [f.strip() for f in fm.split(",") if f.strip()]
    bad = set(fm) - set(FORMATS)
    if bad:
        raise ConfigurationError(f"unknown output format(s): {', '.join(sorted(bad))}")
    return set(fm)


def _output_dir(args) -> Path:
    if args.output_dir is not None:
        return Path(args.output_dir)
    if os.environ.get(ENV_OUTPUT_DIR):
        return Path(os.environ[ENV_OUTPUT_DIR])
    return Path(args.config_output_dir or ".")


def _write_all(outdir: Path, files: dict[str, str | bytes]) -> None:
    """Write every output at once, after all computation has succeeded."""
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"output directory {outdir} is not writable: {exc}") from None
    for name, content in files.items():
        path = outdir / name
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
        log.info("wrote %s", path)


def _dominance_files(report, fm: set[str], stem: str = "dominance") -> dict:
    files = {}
    if "json" in fm:
        files[f"{stem}.json"] = rpt.to_json(report.to_dict())
    if "csv" in fm:
        files[f"{stem}.csv"] = rpt.to_csv(
            ["group_id", "participant_id", "comment_count", "ed_count", "group_ed_total", "share", "threshold",
             "dominant"],
            [[p.group_id, p.participant_id, p.comment_count, p.ed_count, p.group_ed_total, p.share,
              report.threshold, p.dominant] for p in report.participants],
        )
    for img in ("svg", "png"):
        if img in fm:
            files[f"{stem}.{img}"] = rpt.figure_bytes(rpt.share_figure(report), img)
    return files


# ---------------------------------------------------------------------------
# commands


def cmd_stats(args) -> dict:
    stats = corpus_stats(_transcripts(args))
    fm = _formats(args)
    files = {}
    if "json" in fm:
        files["corpus_stats.json"] = rpt.to_json(stats.to_dict())
    if "csv" in fm:
        files["corpus_stats.csv"] = rpt.to_csv(*rpt.corpus_stats_rows(stats))
    if not stats.comments.sd_defined:
        log.warning("only one group: standard deviations are undefined and reported as 0")
    return files


def cmd_extract(args) -> dict:
    cfg = _lexicon(args)
    transcripts = _transcripts(args)
    feats = [extract_transcript(t, cfg) for t in transcripts]
    rows, agg_rows = [], []
    for t, fs in zip(transcripts, feats):
        for c, f in zip(t.comments, fs):
            rows.append([c.group_id, c.seq, c.participant_id, *(getattr(f, k) for k in FEATURE_FIELDS)])
        for a in aggregate_participant(t, fs):
            agg_rows.append([a.group_id, a.participant_id, a.comment_count,
                             *(getattr(a.sums, k) for k in FEATURE_FIELDS)])
    return {
        "features.csv": rpt.to_csv(["group_id", "seq", "participant_id", *FEATURE_FIELDS], rows),
        "participants.csv": rpt.to_csv(
            ["group_id", "participant_id", "comment_count", *(f"{k}_sum" for k in FEATURE_FIELDS)], agg_rows),
    }


def cmd_kappa(args) -> dict:
    if not args.annotations:
        raise ConfigurationError("kappa needs --annotations")
    ann = _read_annotations(args.annotations)
    if not {"ed_a", "ed_b"} <= set(ann.columns):
        raise InputError(f"{args.annotations}: reliability needs two coder columns (ed_a and ed_b)")
    if not len(ann):
        raise InputError(f"{args.annotations}: no annotated items")
    reports = reliability_by_column(ann)
    return {"reliability.json": rpt.to_json({"columns": [r.to_dict() for r in reports]})}


def cmd_reconcile(args) -> dict:
    if not args.annotations:
        raise ConfigurationError("reconcile needs --annotations")
    ann = _read_annotations(args.annotations)
    labels = list(ann.labels.values())
    if args.resolutions:
        try:
            with open(args.resolutions, encoding="utf-8", newline="") as fh:
                resolutions = load_resolutions(fh)
        except FileNotFoundError:
            raise InputError(f"resolutions file not found: {args.resolutions}") from None
    else:
        resolutions = {}
    pending = [l for l in labels if l.unresolved]
    if pending and not args.resolutions:
        log.warning("%d disagreement(s) need consensus values; fill in disagreements.csv and rerun "
                    "with --resolutions disagreements.csv", len(pending))
        return {"disagreements.csv": rpt.to_csv(
            ["group_id", "seq", "ed_a", "ed_b", "resolved"],
            [[l.key[0], l.key[1], l.coder_a, l.coder_b, None] for l in pending])}
    resolved = apply_resolutions(labels, resolutions)
    out = Annotations(ann.codes, {l.key: l for l in resolved}, ann.missing_counts, ann.extra_coder_columns,
                      ann.columns)
    buf = io.StringIO(newline="")
    write_annotations(out, buf)
    return {
        "annotations_reconciled.csv": buf.getvalue(),
        "ed_final.csv": rpt.to_csv(["group_id", "seq", "ed"], [[l.key[0], l.key[1], l.final] for l in resolved]),
    }


def cmd_fit(args) -> dict:
    cfg = _lexicon(args)
    transcripts = _transcripts(args)
    labels, ann = _consensus(args, transcripts)
    if labels is None:
        raise ConfigurationError("fit needs ED labels: pass --annotations (or --labels for Model 1 only)")
    keys, rows = _rows(transcripts, cfg, ann)
    y = [labels[k] for k in keys]
    names = ["model1"] if ann is None else ["model1", "model2", "model3"]
    if ann is None:
        log.warning("no annotations: fitting Model 1 only; Models 2 and 3 need manual codes")
    options = FitOptions(tol=args.tol, max_iter=args.max_iter, beta_bound=args.beta_bound, ridge=args.ridge)
    models: dict[str, LogitModel] = {}
    for name in names:
        design = DesignMatrix.from_rows(rows, MODEL_SETS[name], y)
        try:
            models[name] = fit(design, options)
        except ModelingError as exc:
            exc.args = (f"{name}: {exc}",)
            raise
        if not models[name].converged:
            log.warning("%s did not converge: %s", name, models[name].message)

    files = {f"{name}.json": rpt.to_json(m.to_dict()) for name, m in models.items()}
    coef_rows = [row for name, m in models.items() for row in rpt.coefficient_rows(name, m)]
    files["coefficients.csv"] = rpt.to_csv(rpt.COEFFICIENT_HEADER, coef_rows)
    files["model_tables.txt"] = "\n".join(rpt.format_model_table(n, m) for n, m in models.items())
    if len(models) > 1:
        ranking = compare_models(models)
    else:
        (name, m), = models.items()
        ranking = [RankedModel(name, m.aic, 0.0, m.n_params, m.residual_deviance)]
    comp_rows = [[r.name, r.n_params, r.residual_deviance, r.aic, r.delta_aic, models[r.name].converged]
                 for r in ranking]
    comp_header = ["model", "n_params", "residual_deviance", "aic", "delta_aic", "converged"]
    files["model_comparison.csv"] = rpt.to_csv(comp_header, comp_rows)
    files["model_comparison.json"] = rpt.to_json([dict(zip(comp_header, r)) for r in comp_rows])
    return files


def _load_model(spec: str) -> LogitModel:
    if spec.startswith("published:"):
        name = spec.split(":", 1)[1]
        if name not in PUBLISHED:
            raise ConfigurationError(f"unknown published model {name!r}; choose from {', '.join(PUBLISHED)}")
        return published_model(name)
    return LogitModel.load(spec)


def cmd_score(args) -> dict:
    if not args.model:
        raise ConfigurationError("score needs --model (a model JSON path or published:model1|model2|model3)")
    model = _load_model(args.model)
    cfg = _lexicon(args)
    transcripts = _transcripts(args)
    reference, ann = _consensus(args, transcripts)
    needs_manual = set(model.predictors) & set(MANUAL_COLUMNS)
    if needs_manual and ann is None:
        raise ModelingError("model uses manually coded columns (" + ", ".join(sorted(needs_manual)) +
                            "); pass --annotations")
    keys, rows = _rows(transcripts, cfg, ann)
    available = set(rows[0]) if rows else set()
    missing = [c for c in model.predictors if c not in available]
    if missing:
        raise ColumnMismatchError(missing, [])
    rows = [{c: r[c] for c in model.predictors} for r in rows]
    scores = score_comments(model, rows, keys, args.threshold)
    predicted = {s.key: s.predicted_ed for s in scores}
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = dominance_shares(predicted, transcripts, sd=args.sd)
    for w in caught:
        log.warning("%s", w.message)
    if len(report.empty_groups) == len(transcripts):
        log.warning("no comment was predicted as ED; every group is empty")

    fm = _formats(args)
    files = {}
    pid = {c.key: c.participant_id for t in transcripts for c in t.comments}
    if "csv" in fm:
        files["scores.csv"] = rpt.to_csv(
            ["group_id", "seq", "participant_id", "probability", "predicted_ed"],
            [[s.key[0], s.key[1], pid[s.key], s.probability, s.predicted_ed] for s in scores])
    if "json" in fm:
        files["scores.json"] = rpt.to_json({
            "decision_threshold": args.threshold,
            "model_columns": list(model.columns),
            "scores": [{"group_id": s.key[0], "seq": s.key[1], "participant_id": pid[s.key],
                        "probability": s.probability, "predicted_ed": s.predicted_ed} for s in scores],
        })
    files.update(_dominance_files(report, fm))
    if reference is not None:
        ev = evaluate_scoring(scores, reference)
        files["evaluation.json"] = rpt.to_json(ev.to_dict())
    return files


def cmd_report(args) -> dict:
    transcripts = _transcripts(args)
    labels, _ = _consensus(args, transcripts)
    if labels is None:
        raise ConfigurationError("report needs consensus ED labels: pass --annotations or --labels")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = dominance_shares(labels, transcripts, sd=args.sd)
    for w in caught:
        log.warning("%s", w.message)
    files = _dominance_files(report, _formats(args))
    log.info("%d of %d participants above threshold %.4f", len(report.dominant), len(report.participants),
             report.threshold)
    return files


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults (flags override)")
    common.add_argument("--output-dir", default=None, help=f"output directory (env {ENV_OUTPUT_DIR}; default .)")
    common.add_argument("--formats", default="csv,json,svg", help="comma-separated subset of csv,json,svg,png")
    common.add_argument("-v", "--verbose", action="store_true")
    common.set_defaults(config_output_dir=None)

    tr = argparse.ArgumentParser(add_help=False)
    tr.add_argument("transcripts", nargs="*", help="transcript CSV/TSV files")
    tr.add_argument("--lexicon", help="lexicon JSON (choice_terms, time_terms, self_terms, min_allcaps_len)")

    lab = argparse.ArgumentParser(add_help=False)
    lab.add_argument("--annotations", help="annotation CSV keyed by group_id, seq")
    lab.add_argument("--labels", help="flat consensus label CSV (group_id, seq, ed)")
    lab.add_argument("--fallback-coder-a", action="store_true",
                     help="use coder A's label where a disagreement is unresolved")

    parser = argparse.ArgumentParser(prog="chatdom", description=__doc__.split("\n\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter,
                                     epilog="exit codes: 0 ok, 1 internal, 2 usage, 3 input, 4 configuration, 5 modeling")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common, tr], help="per-group and corpus descriptive statistics")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("extract", parents=[common, tr], help="per-comment indicators and participant sums")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("kappa", parents=[common], help="inter-coder reliability of annotations")
    p.add_argument("--annotations")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("reconcile", parents=[common], help="apply consensus values to coder disagreements")
    p.add_argument("--annotations")
    p.add_argument("--resolutions", help="CSV of group_id, seq, resolved")
    p.set_defaults(func=cmd_reconcile)

    p = sub.add_parser("fit", parents=[common, tr, lab], help="fit Models 1-3 and compare by AIC")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--beta-bound", type=float, default=30.0)
    p.add_argument("--ridge", type=float, default=0.0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", parents=[common, tr, lab], help="score comments with a model; dominance report")
    p.add_argument("--model", help="model JSON, or published:model1|model2|model3")
    p.add_argument("--threshold", type=float, default=0.5, help="decision threshold in (0, 1]")
    p.add_argument("--sd", choices=("population", "sample"), default="population")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("report", parents=[common, tr, lab], help="dominance report from consensus ED labels")
    p.add_argument("--sd", choices=("population", "sample"), default="population")
    p.set_defaults(func=cmd_report)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        data = json.loads(Path(known.config).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {known.config}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{known.config}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{known.config}: config must be a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = subparsers.choices.get(known.command)
    if sp is None:
        return
    dests = {a.dest for a in sp._actions}
    defaults = {}
    for k, v in data.items():
        dest = k.replace("-", "_")
        if dest == "output_dir":
            defaults["config_output_dir"] = v
        elif dest in dests and dest not in ("config", "help"):
            defaults[dest] = v
        else:
            raise ConfigurationError(f"{known.config}: unknown option {k!r} for {known.command}")
    sp.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except ConfigurationError as exc:
        print(f"chatdom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="chatdom: %(levelname)s: %(message)s", stream=sys.stderr, force=True)
    try:
        files = args.func(args)
        _write_all(_output_dir(args), files)
    except ConfigurationError as exc:
        print(f"chatdom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"chatdom: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ModelingError as exc:
        print(f"chatdom: modeling error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ChatdomError as exc:
        print(f"chatdom: error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ValueError, KeyError) as exc:
        print(f"chatdom: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
