"""Control-flow and call graphs over lowered operations.

Lowered bodies are straight-line (branches were linearized into conditioned
lines), so each CFG is a chain enter -> line_0 -> ... -> line_k -> exit.
The call graph records one edge per call-site line; the ICFG stitches the
CFGs along call edges and yields the reverse-topological order the summary
driver needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import RecursionDetectedError
from .gates import DEFAULT_LIBRARY, GateLibrary
from .ir import LoweredOperation, OperationLine


@dataclass(frozen=True)
class ProgramPoint:
    """The point immediately before or after one line."""

    kind: str  # "before" | "after"
    label: str

    def __str__(self) -> str:
        return f"{self.kind}:{self.label}"


@dataclass
class Cfg:
    op: str
    nodes: list[str]  # enter marker, line labels, exit marker
    _succ: dict[str, str | None] = field(default_factory=dict)
    _pred: dict[str, str | None] = field(default_factory=dict)

    @property
    def enter(self) -> str:
        return self.nodes[0]

    @property
    def exit(self) -> str:
        return self.nodes[-1]

    def succ(self, node: str) -> str | None:
        return self._succ[node]

    def pred(self, node: str) -> str | None:
        return self._pred[node]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(a, b) for a, b in self._succ.items() if b is not None]


def build_cfg(op: LoweredOperation) -> Cfg:
    nodes = [op.enter_marker] + [ln.label for ln in op.lines] + [op.exit_marker]
    cfg = Cfg(op=op.name, nodes=nodes)
    for a, b in zip(nodes, nodes[1:]):
        cfg._succ[a] = b
        cfg._pred[b] = a
    cfg._succ[nodes[-1]] = None
    cfg._pred[nodes[0]] = None
    return cfg


@dataclass(frozen=True)
class CallEdge:
    line_label: str
    line_uid: int
    caller: str
    callee: str


@dataclass
class CallGraph:
    nodes: list[str]
    edges: list[CallEdge]

    def callees(self, caller: str, line_label: str | None = None) -> set[str]:
        return {
            e.callee
            for e in self.edges
            if e.caller == caller and (line_label is None or e.line_label == line_label)
        }

    def caller(self, op: str) -> set[tuple[str, str]]:
        """Call sites (caller op, line label) that may call ``op``."""
        return {(e.caller, e.line_label) for e in self.edges if e.callee == op}

    def reverse_topological(self) -> list[str]:
        """Callees before callers; raises RecursionDetectedError on cycles."""
        out: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            out[e.caller].add(e.callee)
        order: list[str] = []
        state: dict[str, int] = {}

        def visit(n: str, trail: list[str]) -> None:
            mark = state.get(n, 0)
            if mark == 1:
                cycle = " -> ".join(trail + [n])
                raise RecursionDetectedError(f"recursive call chain: {cycle}")
            if mark == 2:
                return
            state[n] = 1
            for m in sorted(out[n]):
                visit(m, trail + [n])
            state[n] = 2
            order.append(n)

        for n in self.nodes:
            visit(n, [])
        return order


def call_lines(op: LoweredOperation, library: GateLibrary = DEFAULT_LIBRARY) -> list[OperationLine]:
    return [ln for ln in op.lines if not library.is_fundamental(ln.op_name)]


def build_call_graph(
    ops: dict[str, LoweredOperation], library: GateLibrary = DEFAULT_LIBRARY
) -> CallGraph:
    edges = [
        CallEdge(line_label=ln.label, line_uid=ln.uid, caller=name, callee=ln.op_name)
        for name, op in ops.items()
        for ln in call_lines(op, library)
    ]
    cg = CallGraph(nodes=list(ops), edges=edges)
    cg.reverse_topological()  # reject recursion eagerly
    return cg


@dataclass(frozen=True)
class IcfgNode:
    op: str
    node: str  # CFG node name within the operation


@dataclass(frozen=True)
class IcfgEdge:
    src: IcfgNode
    dst: IcfgNode
    kind: str  # "flow" | "call" | "return"


@dataclass
class Icfg:
    cfgs: dict[str, Cfg]
    call_graph: CallGraph
    edges: list[IcfgEdge]

    @property
    def nodes(self) -> list[IcfgNode]:
        return [IcfgNode(op, n) for op, cfg in self.cfgs.items() for n in cfg.nodes]

    def analysis_order(self) -> list[str]:
        return self.call_graph.reverse_topological()


def build_icfg(cfgs: dict[str, Cfg], cg: CallGraph) -> Icfg:
    edges: list[IcfgEdge] = []
    for op, cfg in cfgs.items():
        for a, b in cfg.edges:
            edges.append(IcfgEdge(IcfgNode(op, a), IcfgNode(op, b), "flow"))
    for e in cg.edges:
        callee_cfg = cfgs[e.callee]
        caller_cfg = cfgs[e.caller]
        call_node = IcfgNode(e.caller, e.line_label)
        edges.append(IcfgEdge(call_node, IcfgNode(e.callee, callee_cfg.enter), "call"))
        ret = caller_cfg.succ(e.line_label)
        edges.append(IcfgEdge(IcfgNode(e.callee, callee_cfg.exit), IcfgNode(e.caller, ret), "return"))
    return Icfg(cfgs=cfgs, call_graph=cg, edges=edges)


def icfg_to_dot(icfg: Icfg) -> str:
    """Deterministic DOT rendering; call/return edges dashed."""
    lines = ["digraph icfg {"]
    for op in sorted(icfg.cfgs):
        cfg = icfg.cfgs[op]
        for n in cfg.nodes:
            lines.append(f'  "{op}:{n}";')
    styled = {"flow": "", "call": ' [style=dashed, label="call"]', "return": ' [style=dashed, label="return"]'}
    edge_keys = sorted(
        icfg.edges, key=lambda e: (e.src.op, e.src.node, e.dst.op, e.dst.node, e.kind)
    )
    for e in edge_keys:
        lines.append(f'  "{e.src.op}:{e.src.node}" -> "{e.dst.op}:{e.dst.node}"{styled[e.kind]};')
    lines.append("}")
    return "\n".join(lines) + "\n"
