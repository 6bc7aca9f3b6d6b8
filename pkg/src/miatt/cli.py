"""Command-line front end.

    miatt generate --pattern best --n 8 --m 64 --samples 100 --seed 1 -o data.jsonl
    miatt assess -i data.jsonl -o assess.json --csv assess.csv
    miatt eval-laf | eval-ternary | eval-att | compare-eval -i data.jsonl -o report.json
    miatt loss-compare -i data.jsonl --loss ce --method both -o loss.json
    miatt gradcheck --loss dice --points 1000 -o grad.json

Exit codes: 0 success, 1 I/O error, 2 config error, 3 schema error,
4 domain error. Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .assess import classify_quality, quality_score
from .core import ConfigError, EvalConfig, MiattError
from .dataset import DatasetRecord, SchemaError, dumps, format_dataset, read_dataset
from .generate import GenSpec, Pattern, generate_dataset
from .laf import aggregate_dataset, evaluate_sample
from .losses import (
    Ordering,
    Region,
    _ORDER_BY_REGION,
    categorical_method_scores,
    composite_loss,
    method_gradchecks,
    vector_method_scores,
)
from .ternary import (
    MissingAtt,
    att_score,
    compare_sample,
    relation_report,
    synthesize_ternary,
    ternary_dataset_score,
    ternary_verdicts,
)

EXIT_IO, EXIT_CONFIG, EXIT_SCHEMA, EXIT_DOMAIN = 1, 2, 3, 4

_OVERRIDES = [
    ("delta", "delta", float),
    ("delta-lo", "delta_lo", float),
    ("delta-hi", "delta_hi", float),
    ("tau-lo", "tau_lo", float),
    ("tau-hi", "tau_hi", float),
    ("alpha", "alpha", float),
    ("gamma-q", "gamma_q", float),
    ("lambda", "lambda", float),
    ("gamma-k", "gamma_k", float),
    ("eps-clamp", "eps_clamp", float),
    ("seed", "seed", int),
]


def resolve_config(config_path: Optional[str], overrides: dict) -> EvalConfig:
    data = {}
    if config_path:
        try:
            data = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return EvalConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


# ------------------------------------------------------------ commands


def _cmd_assess(records, config, args):
    rows = []
    for r in records:
        rep = quality_score(r.miatts, config)
        rows.append({"id": r.id, **rep.to_row()})
    mean_pr = float(np.mean([row["mean_pr"] for row in rows]))
    mean_div = float(np.mean([row["diversity"] for row in rows]))
    summary = {
        "n_samples": len(rows),
        "mean_pr": mean_pr,
        "mean_redundancy": float(np.mean([row["redundancy"] for row in rows])),
        "mean_diversity": mean_div,
        "mean_q_score": float(np.mean([row["q_score"] for row in rows])),
        "quality_class": classify_quality(mean_pr, mean_div).value,
    }
    return rows, summary


def _cmd_eval_laf(records, config, args):
    scores = [evaluate_sample(r.prediction, r.miatts, config, r.exclusive_groups) for r in records]
    rows = [{"id": r.id, **s.to_row()} for r, s in zip(records, scores)]
    return rows, aggregate_dataset(scores).summary()


def _cmd_eval_ternary(records, config, args):
    rows = []
    for r in records:
        v = ternary_verdicts(r.prediction, r.miatts, config)
        t = synthesize_ternary(v)
        rows.append({"id": r.id, "verdicts": v, "t_dagger": t, "score": t})
    scores = [row["score"] for row in rows]
    summary = {
        "n_samples": len(rows),
        "mean_score": ternary_dataset_score(scores),
        "decided": sum(1 for s in scores if s != 0.5),
        "unknown": sum(1 for s in scores if s == 0.5),
    }
    return rows, summary


def _require_att(r: DatasetRecord):
    if r.att is None:
        raise MissingAtt(f"record {r.id!r} carries no att")
    return r.att


def _cmd_eval_att(records, config, args):
    rows = [{"id": r.id, "score": att_score(r.prediction, _require_att(r), config)} for r in records]
    return rows, {"n_samples": len(rows), "mean_score": float(np.mean([row["score"] for row in rows]))}


def _cmd_compare(records, config, args):
    cmp = [compare_sample(r.prediction, r.miatts, _require_att(r), config, r.exclusive_groups) for r in records]
    rows = [{"id": r.id, "laf_score": c.laf_score, "t_dagger": c.t_dagger, "att_score": c.att_score} for r, c in zip(records, cmp)]
    return rows, relation_report(cmp).summary()


def _cmd_loss_compare(records, config, args):
    want_a = args.method in ("A", "both")
    want_b = args.method in ("B", "both")
    rows = []
    region_totals = {r.value: 0 for r in Region}
    for r in records:
        row = {"id": r.id}
        if args.loss == "categorical-ce":
            cs = categorical_method_scores(r.prediction, r.miatts.targets, config.eps_clamp)
            s_a, s_b = cs.s_a, cs.s_b
            grad_diff = float(np.max(np.abs(cs.grad_a - cs.grad_b)))
            ordering = Ordering.EQUAL.value
        else:
            vs = vector_method_scores(args.loss, r.prediction, r.miatts.targets, config.eps_clamp)
            s_a, s_b = vs["s_a"], vs["s_b"]
            grad_diff = float(np.max(np.abs(vs["grad_a"] - vs["grad_b"])))
            for k, n in vs["region_counts"].items():
                region_totals[k] += n
            row["region_counts"] = vs["region_counts"]
            verdicts = {o.value: 0 for o in Ordering}
            for reg in vs["regions"]:
                verdicts[_ORDER_BY_REGION[reg].value] += 1
            row["verdict_counts"] = verdicts
            ordering = None
        if want_a:
            row["s_a"] = s_a
        if want_b:
            row["s_b"] = s_b
        if want_a and want_b:
            row["residue"] = abs(s_a - s_b)
            row["max_abs_grad_diff"] = grad_diff
        if ordering is not None:
            row["ordering_verdict"] = ordering
        if args.lam is not None and args.loss == "dice":
            row["composite_loss"] = composite_loss(s_a, s_b, args.lam)
        rows.append(row)

    summary = {"n_samples": len(rows), "loss": args.loss, "method": args.method}
    for key in ("s_a", "s_b", "composite_loss"):
        if rows and key in rows[0]:
            summary[f"mean_{key}"] = float(np.mean([row[key] for row in rows]))
    if want_a and want_b:
        summary["max_residue"] = float(max(row["residue"] for row in rows))
        summary["max_abs_grad_diff"] = float(max(row["max_abs_grad_diff"] for row in rows))
    if args.loss != "categorical-ce":
        summary["region_counts"] = region_totals
    return rows, summary


def _cmd_gradcheck(records, config, args):
    rng = np.random.default_rng(config.seed)
    losses = ["dice", "ce"] if args.loss == "both" else [args.loss]
    rows = []
    for loss in losses:
        for i in range(args.points):
            n = int(rng.integers(2, 17))
            pred = float(rng.uniform(0.05, 0.95))
            targets = rng.random(n)
            for method, rep in method_gradchecks(loss, pred, targets, args.h).items():
                rows.append({"loss": loss, "point": i, "method": method, "pred": pred, **rep.to_row()})
    worst = max(row["rel_error"] for row in rows)
    summary = {"n_checks": len(rows), "h": args.h, "max_rel_error": worst, "tolerance": args.tol, "passed": bool(worst <= args.tol)}
    return rows, summary


_COMMANDS = {
    "assess": _cmd_assess,
    "eval-laf": _cmd_eval_laf,
    "eval-ternary": _cmd_eval_ternary,
    "eval-att": _cmd_eval_att,
    "compare-eval": _cmd_compare,
    "loss-compare": _cmd_loss_compare,
    "gradcheck": _cmd_gradcheck,
}


# --------------------------------------------------------------- output


def _flat(v):
    if isinstance(v, dict):
        return ";".join(f"{k}={_flat(x)}" for k, x in v.items())
    if isinstance(v, (list, tuple)):
        return ";".join(_flat(x) for x in v)
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.writer(buf, lineterminator="\n")
        header = list(rows[0])
        writer.writerow(header)
        for row in rows:
            writer.writerow([_flat(row.get(k, "")) for k in header])
    return buf.getvalue()


def format_report(command: str, config: EvalConfig, rows, summary) -> str:
    lines = ["{"]
    lines.append(f'  "command": {dumps(command)},')
    lines.append(f'  "tool_version": {dumps(__version__)},')
    lines.append(f'  "seed": {dumps(config.seed)},')
    lines.append(f'  "config": {dumps(config.to_dict())},')
    if rows:
        lines.append('  "rows": [')
        lines.append(",\n".join("    " + dumps(r) for r in rows))
        lines.append("  ],")
    else:
        lines.append('  "rows": [],')
    lines.append(f'  "summary": {dumps(summary)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _write(text: str, path: Optional[str]) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------- parser


def _add_common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
    p.add_argument("-c", "--config", help="JSON config file")
    if needs_input:
        p.add_argument("-i", "--input", required=True, help="dataset (JSON lines)")
    p.add_argument("-o", "--output", help="report path (default: stdout)")
    p.add_argument("--csv", help="also write per-sample rows as CSV")
    p.add_argument("--summary-csv", help="also write the summary as key,value CSV")
    for flag, key, typ in _OVERRIDES:
        p.add_argument(f"--{flag}", dest=f"cfg_{key}", type=typ, default=None, metavar=typ.__name__.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="miatt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("-c", "--config", help="JSON config file (only seed is used)")
    g.add_argument("-o", "--output", help="dataset path (default: stdout)")
    g.add_argument("--seed", dest="cfg_seed", type=int, default=None)
    g.add_argument("--pattern", default="custom", help="no-coverage|low-diversity|high-diversity|custom (aliases worst, best)")
    g.add_argument("--n", type=int, default=4, help="targets per sample")
    g.add_argument("--m", type=int, default=16, help="elements per target")
    g.add_argument("--samples", type=int, default=1)
    g.add_argument("--coverage", type=float, default=None, help="default 1/n for high-diversity, else 0.5")
    g.add_argument("--noise", type=float, default=0.0)
    g.add_argument("--overlap", type=float, default=None)
    g.add_argument("--soft", action="store_true", help="draw a soft ATT instead of a binary one")
    g.add_argument("--pred-flip", type=float, default=0.1, help="fraction of wrong-side prediction elements")
    g.add_argument("--group-size", type=int, default=None, help="emit consecutive exclusive groups of this size")

    for name in ("assess", "eval-laf", "eval-ternary", "eval-att", "compare-eval"):
        _add_common(sub.add_parser(name))

    lc = sub.add_parser("loss-compare", help="Method A vs B for Dice / CE")
    _add_common(lc)
    lc.add_argument("--loss", choices=["dice", "ce", "categorical-ce"], default="dice")
    lc.add_argument("--method", choices=["A", "B", "both"], default="both")
    lc.add_argument("--mix", dest="lam", type=float, default=None, help="composite-loss weight in [0, 1] (Dice only)")

    gc = sub.add_parser("gradcheck", help="analytic vs finite-difference gradients at seeded points")
    _add_common(gc, needs_input=False)
    gc.add_argument("--loss", choices=["dice", "ce", "both"], default="both")
    gc.add_argument("--points", type=int, default=1000)
    gc.add_argument("--h", type=float, default=1e-5)
    gc.add_argument("--tol", type=float, default=1e-6)
    return parser


def _overrides(args) -> dict:
    return {key: getattr(args, f"cfg_{key}", None) for _, key, _ in _OVERRIDES}


def _run_generate(args) -> None:
    config = resolve_config(args.config, _overrides(args))
    pattern = Pattern.parse(args.pattern)
    coverage = args.coverage
    if coverage is None:
        coverage = 1.0 / args.n if pattern is Pattern.HIGH_DIVERSITY else 0.5
    try:
        spec = GenSpec(m=args.m, n=args.n, coverage=coverage, noise=args.noise, pattern=pattern, overlap=args.overlap, seed=config.seed)
    except ValueError as exc:
        raise ConfigError(f"generator settings: {exc}") from exc
    samples = generate_dataset(spec, args.samples, binary=not args.soft, pred_flip=args.pred_flip, group_size=args.group_size)
    _write(format_dataset(DatasetRecord.from_generated(s) for s in samples), args.output)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            try:
                _run_generate(args)
            except ValueError as exc:
                if isinstance(exc, MiattError):
                    raise
                raise ConfigError(str(exc)) from exc
            return 0
        config = resolve_config(args.config, _overrides(args))
        records = read_dataset(args.input) if getattr(args, "input", None) else []
        if args.command != "gradcheck" and not records:
            raise SchemaError("dataset holds no records")
        rows, summary = _COMMANDS[args.command](records, config, args)
        _write(format_report(args.command, config, rows, summary), args.output)
        if args.csv:
            _write(rows_to_csv(rows), args.csv)
        if args.summary_csv:
            _write(rows_to_csv([{"key": k, "value": v} for k, v in summary.items()]), args.summary_csv)
        return 0
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except SchemaError as exc:
        return _fail(EXIT_SCHEMA, exc, line=exc.line)
    except MiattError as exc:
        return _fail(EXIT_DOMAIN, exc)
    except OSError as exc:
        return _fail(EXIT_IO, exc)


def _fail(code: int, exc: Exception, **extra) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    err.update({k: v for k, v in extra.items() if v is not None})
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv: Optional[Sequence[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
