"""Command-line entry point.

Exit codes: 0 success, 1 oracle validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import __version__
from .amdahl import MemoryBasis, Metric
from .cost import COST_FUNCTIONS
from .errors import ConfigError, DomainError, ScaleError, SeqlenRangeError
from .hardware import Dataflow, HardwareConfig, get_hardware
from .memory import Precision, weight_footprint
from .models import FAMILIES, MatMulOp, Role, builtin_models, family_models, get_model
from .report import (
    DEFAULT_SEQLENS,
    FORMATS,
    amdahl_curves,
    analyze_block,
    compare_dataflows,
    emit,
    json_document,
    memory_dominance_violations,
    render_csv,
    render_markdown,
    sweep,
)

OUTPUT_DIR_ENV = "MATMULFREE_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _hardware(args) -> HardwareConfig:
    hw = get_hardware(args.hw)
    if getattr(args, "dataflow", None):
        hw = hw.with_dataflow(args.dataflow)
    return hw


def _render(args, headers, rows, kind: str, payload, hardware=None, metric=None) -> str:
    if args.format == "csv":
        return render_csv(headers, rows)
    if args.format == "json":
        return json_document(kind, payload, hardware=hardware, metric=metric, timestamp=args.timestamp)
    return render_markdown(headers, rows)


def cmd_models(args) -> str:
    models = builtin_models()
    headers = ["name", "d", "h", "d_ff", "head_dim", "seqlen_min", "seqlen_max", "note"]
    rows = [
        [m.name, m.d, m.h, m.d_ff, m.head_dim, m.seqlen_min, m.seqlen_max,
         "WARNING: d not divisible by h" if m.head_dim_warning else ""]
        for m in models
    ]
    payload = [{**m.to_dict(), "head_dim": m.head_dim, "head_dim_warning": m.head_dim_warning} for m in models]
    return _render(args, headers, rows, "models", payload)


def cmd_simulate(args) -> str:
    model = get_model(args.model)
    hw = _hardware(args)
    seqlens = args.seqlen or [2048]
    reports = [analyze_block(model, l, hw, args.memory_basis, args.layers) for l in seqlens]
    text = emit(reports, args.format, timestamp=args.timestamp, metric=args.metric)
    if args.format == "markdown":
        head = "\n".join(
            f"- {r.model.name} @ {r.seqlen}: MatMul-free {args.metric} fraction = {r.fraction(args.metric):.4f}"
            for r in reports
        )
        text = f"# simulate ({args.metric})\n\n{head}\n\n{text}"
    return text


def _sweep_models(args):
    models = [get_model(s) for s in args.model or []]
    for family in args.family or []:
        models.extend(family_models(family))
    if not models:
        raise UsageError("sweep needs at least one --model or --family")
    return models


def cmd_sweep(args) -> str:
    models = _sweep_models(args)
    hw = _hardware(args)
    seqlens = args.seqlen or list(DEFAULT_SEQLENS)
    grid = sweep(models, seqlens, hw, args.metric, args.memory_basis)
    if args.metric == Metric.MEMORY.value and args.memory_basis == MemoryBasis.SRAM.value:
        memory_dominance_violations(models, seqlens, hw)
    return emit(grid, args.format, timestamp=args.timestamp)


def cmd_amdahl(args) -> str:
    if args.s_max < 1:
        raise UsageError(f"--s-max must be >= 1, got {args.s_max}")
    model = get_model(args.model)
    hw = _hardware(args)
    rep = analyze_block(model, args.seqlen, hw, args.memory_basis)
    return emit(amdahl_curves(rep, args.metric, args.s_max), args.format, timestamp=args.timestamp)


def cmd_dataflows(args) -> str:
    hw = get_hardware(args.hw)
    if args.shape:
        m, k, n = args.shape
        op = MatMulOp(Role.Q_PROJ, m, k, n)
        rows_data = [(df, COST_FUNCTIONS[df](op, hw.with_dataflow(df)).compute_cycles, 0) for df in Dataflow]
        subject = f"shape m={m} k={k} n={n}"
    else:
        model = get_model(args.model)
        rows_data = [(r.dataflow, r.cycles_projection, r.cycles_attention) for r in compare_dataflows(model, args.seqlen, hw)]
        subject = f"{model.name} @ {args.seqlen}"
    best = min(p + a for _, p, a in rows_data)
    headers = ["dataflow", "projection_cycles", "attention_cycles", "total_cycles", "best"]
    rows = [[df.value, p, a, p + a, "yes" if p + a == best else ""] for df, p, a in rows_data]
    payload = {
        "subject": subject,
        "rows": [dict(zip(headers, r)) for r in rows],
        "best": [df.value for df, p, a in rows_data if p + a == best],
    }
    text = _render(args, headers, rows, "dataflow_comparison", payload, hardware=hw)
    if args.format == "markdown":
        text = f"## Dataflow comparison: {subject} on {hw.name} ({hw.rows}x{hw.cols})\n\n{text}"
        text += f"\nbest: {', '.join(payload['best'])}\n"
    return text


def cmd_validate(args) -> tuple:
    from .refsim import validate

    rep = validate(args.max_mk, args.max_n, args.max_array)
    lines = [
        f"shapes checked: {rep.checked}",
        f"mismatches: {len(rep.mismatches)}",
    ]
    lines.extend(f"  {m}" for m in rep.mismatches[:10])
    lines.append("PASS" if rep.ok else "FAIL")
    return "\n".join(lines) + "\n", 0 if rep.ok else 1


def cmd_footprint(args) -> str:
    models = [get_model(s) for s in args.model] if args.model else builtin_models()
    precisions = [Precision(p) for p in args.precision] if args.precision else list(Precision)
    headers = ["model", "precision", "bits", "bytes_per_block"]
    if args.layers:
        headers.append(f"bytes_{args.layers}_layers")
    rows = []
    for model in models:
        for p in precisions:
            per_block = weight_footprint(model, p)
            row = [model.name, p.value, p.bits, per_block]
            if args.layers:
                row.append(per_block * args.layers)
            rows.append(row)
    payload = [dict(zip(headers, r)) for r in rows]
    return _render(args, headers, rows, "weight_footprint", payload)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matmulfree",
        description="Estimate how much of a decoder block becomes MatMul-free under 1-bit projections.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_opts(p):
        p.add_argument("--format", choices=FORMATS, default="markdown")
        p.add_argument("--out", help=f"write here instead of stdout (relative paths go under ${OUTPUT_DIR_ENV})")
        p.add_argument("--no-timestamp", dest="timestamp", action="store_false",
                       help="omit the generation time from JSON output")

    def hw_opts(p, dataflow=True):
        p.add_argument("--hw", default="cloud", help="cloud, edge, or a hardware config file")
        if dataflow:
            p.add_argument("--dataflow", type=str.upper, choices=[d.value for d in Dataflow])

    def metric_opts(p):
        p.add_argument("--metric", choices=[m.value for m in Metric], default=Metric.COMPUTE.value)
        p.add_argument("--memory-basis", choices=[b.value for b in MemoryBasis], default=MemoryBasis.SRAM.value,
                       help="count SRAM accesses in elements (default) or DRAM traffic in bytes")

    p = sub.add_parser("models", help="list built-in models")
    output_opts(p)
    p.set_defaults(func=cmd_models)

    p = sub.add_parser("simulate", help="per-op costs and MatMul-free fractions for one model")
    p.add_argument("--model", required=True)
    p.add_argument("--seqlen", type=_positive, action="append")
    p.add_argument("--layers", type=_positive, default=1, help="scale absolute totals to a whole model")
    hw_opts(p)
    metric_opts(p)
    output_opts(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="fraction grid over models x sequence lengths")
    p.add_argument("--model", action="append")
    p.add_argument("--family", action="append", choices=FAMILIES)
    p.add_argument("--seqlen", type=_positive, action="append")
    hw_opts(p)
    metric_opts(p)
    output_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("amdahl", help="speedup curves for improving projections vs attention")
    p.add_argument("--model", required=True)
    p.add_argument("--seqlen", type=_positive, default=2048)
    p.add_argument("--s-max", type=int, default=100)
    hw_opts(p)
    metric_opts(p)
    output_opts(p)
    p.set_defaults(func=cmd_amdahl)

    p = sub.add_parser("dataflows", help="compare OS, WS and IS block cycles")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--model")
    target.add_argument("--shape", type=_positive, nargs=3, metavar=("M", "K", "N"))
    p.add_argument("--seqlen", type=_positive, default=2048)
    hw_opts(p, dataflow=False)
    output_opts(p)
    p.set_defaults(func=cmd_dataflows)

    p = sub.add_parser("validate", help="check closed-form cycles against the cycle-level simulator")
    p.add_argument("--max-mk", type=_positive, default=8)
    p.add_argument("--max-n", type=_positive, default=4)
    p.add_argument("--max-array", type=_positive, default=4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate, format="markdown", timestamp=False)

    p = sub.add_parser("footprint", help="projection weight bytes per precision")
    p.add_argument("--model", action="append")
    p.add_argument("--precision", action="append", choices=[x.value for x in Precision])
    p.add_argument("--layers", type=_positive)
    output_opts(p)
    p.set_defaults(func=cmd_footprint)
    return parser


def _write(text: str, out: Optional[str]) -> None:
    if not out:
        sys.stdout.write(text)
        return
    path = Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not path.is_absolute():
        path = Path(base) / path
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except (UsageError, ConfigError, SeqlenRangeError, DomainError, ScaleError) as exc:
        parser.exit(2, f"{parser.prog}: error: {exc}\n")
    text, code = result if isinstance(result, tuple) else (result, 0)
    _write(text, args.out)
    return code


def run() -> None:
    sys.exit(main())
