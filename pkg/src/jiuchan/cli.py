"""Batch driver: parse, resolve, lower, analyze, emit.

Artifacts go to stdout, diagnostics to stderr (one per line, in
``file:line:col: severity: message`` form). Exit codes: 0 success, 1
diagnostics, 2 verification violations. When several output modes are
requested the most specific wins: --dump-icfg, then --verify, then
--per-point, then the exit entanglement graph.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .analysis import Analyzer, AnalysisResult, Assumptions
from .errors import Diagnostic, JiuchanError
from .frontend import _Parser, load_program, tokenize
from .gates import DEFAULT_LIBRARY
from .graphs import build_cfg, build_icfg, icfg_to_dot
from .lower import LoweringOptions, build_condition
from .oracle import verify_analysis


@dataclass
class RunConfig:
    input_path: str
    entry: str | None = None
    format: str = "dot"
    per_point: bool = False
    assumptions: list[str] = field(default_factory=list)
    max_unroll: int = 16
    verify: bool = False
    dump_icfg: bool = False


def parse_assumptions(items: list[str]) -> Assumptions:
    """``--assume a=1`` fixes variable a; ``--assume a==1=0`` forces an atom."""
    assumptions = Assumptions()
    for item in items:
        if "=" not in item:
            raise JiuchanError(f"bad assumption '{item}': expected name=value")
        left, right = item.rsplit("=", 1)
        left = left.strip()
        right = right.strip()
        if right not in ("0", "1") and not left.isidentifier():
            raise JiuchanError(f"bad assumption '{item}': value must be 0 or 1")
        if left.isidentifier():
            try:
                assumptions.var_values[left] = int(right)
            except ValueError:
                raise JiuchanError(f"bad assumption '{item}': integer value required") from None
            continue
        value = right == "1"
        parser = _Parser(tokenize(left), "<assume>", DEFAULT_LIBRARY)
        cond = build_condition(parser.parse_expr())
        if len(cond.literals) != 1:
            raise JiuchanError(f"assumption '{left}' is not a single condition atom")
        ((atom, polarity),) = cond.literals
        assumptions.atom_truth[atom.canon] = polarity if value else not polarity
    return assumptions


def emit_graph(result: AnalysisResult, fmt: str, context_op: str) -> str:
    """Byte-stable rendering of the exit entanglement graph."""
    st = result.exit_state
    node_names = sorted(q.display(context_op) for q in st.graph.nodes)
    edges = [
        (a.display(context_op), b.display(context_op), label)
        for a, b, label in st.graph.edge_list()
    ]
    edges.sort(key=lambda e: (min(e[0], e[1]), max(e[0], e[1]), e[2]))
    if fmt == "dot":
        if not node_names and not edges:
            return "graph entanglement { }\n"
        lines = ["graph entanglement {"]
        for name in node_names:
            lines.append(f'  "{name}";')
        for a, b, label in edges:
            lo, hi = sorted((a, b))
            lines.append(f'  "{lo}" -- "{hi}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"
    doc = {
        "qubits": [
            {"name": q.display(context_op), "state": str(s)}
            for q, s in sorted(st.states.items(), key=lambda kv: kv[0].display(context_op))
        ],
        "edges": [{"a": a, "b": b, "line": label} for a, b, label in edges],
        "components": [
            [q.display(context_op) for q in comp] for comp in st.graph.components()
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def emit_points(result: AnalysisResult) -> str:
    docs = [{"point": str(pp), **snap} for pp, snap in result.points]
    return json.dumps(docs, indent=2) + "\n"


def _print_diagnostics(diags, path: str) -> None:
    for d in diags:
        if isinstance(d, Diagnostic):
            d = Diagnostic(d.severity, d.message, d.line, d.col, path)
        print(str(d), file=sys.stderr)


def run(cfg: RunConfig) -> int:
    try:
        with open(cfg.input_path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"{cfg.input_path}:0:0: error: {excid(exc)}", file=sys.stderr)
        return 1

    opts = LoweringOptions(max_unroll=cfg.max_unroll)
    try:
        assumptions = parse_assumptions(cfg.assumptions)
        resolved = load_program(text, cfg.input_path, entry=cfg.entry)
        _print_diagnostics(resolved.warnings, cfg.input_path)
        analyzer = Analyzer(resolved, opts, assumptions)
    except JiuchanError as exc:
        _print_diagnostics([exc.to_diagnostic(cfg.input_path)], cfg.input_path)
        return 1

    if cfg.dump_icfg:
        cfgs = {name: build_cfg(op) for name, op in analyzer.lowered.items()}
        sys.stdout.write(icfg_to_dot(build_icfg(cfgs, analyzer.call_graph)))
        return 0

    try:
        result = analyzer.run_entry(record_points=cfg.per_point)
    except JiuchanError as exc:
        _print_diagnostics([exc.to_diagnostic(cfg.input_path)], cfg.input_path)
        return 1
    _print_diagnostics(result.warnings, cfg.input_path)

    if cfg.verify:
        try:
            report = verify_analysis(resolved, opts)
        except JiuchanError as exc:
            _print_diagnostics([exc.to_diagnostic(cfg.input_path)], cfg.input_path)
            return 1
        sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
        return 2 if report.violations else 0

    if cfg.per_point:
        sys.stdout.write(emit_points(result))
        return 0

    sys.stdout.write(emit_graph(result, cfg.format, resolved.entry))
    return 0


def excid(exc: OSError) -> str:
    return getattr(exc, "strerror", None) or str(exc)


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jiuchan", description="Static entanglement analyzer for a Q# subset")
    sub = parser.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", help="analyze one .qs file")
    an.add_argument("input", help="path to the .qs source file")
    an.add_argument("--entry", default=None, help="entry operation (overrides @EntryPoint)")
    an.add_argument("--format", choices=["dot", "json"], default="dot")
    an.add_argument("--per-point", action="store_true", help="emit per-program-point snapshots as JSON")
    an.add_argument(
        "--assume",
        action="append",
        default=[],
        metavar="ATOM=0|1",
        help="fix a condition atom (or an integer variable, e.g. a=1); repeatable",
    )
    an.add_argument("--max-unroll", type=int, default=16)
    an.add_argument("--verify", action="store_true", help="check the result against the state-vector oracle")
    an.add_argument("--dump-icfg", action="store_true", help="emit the interprocedural CFG in DOT")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_arg_parser().parse_args(argv)
    cfg = RunConfig(
        input_path=args.input,
        entry=args.entry,
        format=args.format,
        per_point=args.per_point,
        assumptions=args.assume,
        max_unroll=args.max_unroll,
        verify=args.verify,
        dump_icfg=args.dump_icfg,
    )
    if cfg.max_unroll < 1:
        print("error: --max-unroll must be at least 1", file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
