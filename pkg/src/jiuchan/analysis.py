"""Stack-based entanglement dataflow over operation lines.

Per qubit the engine tracks a three-valued abstract state (Zero, One, Q),
and for every Q-state qubit a stack of the operation lines that acted on it.
A line whose inverse sits on top of its target's stack, with an identical
control relationship, realizes uncomputation: the pair cancels, the stack
shrinks, and the associated entanglement edge disappears. Everything else
pushes. Entanglement edges run from Q-state control qubits to the target of
the generating line; connected components of the resulting graph
over-approximate the entangled partitions at each program point.

Interprocedural analysis precomputes a summary per callee (all qubit inputs
presumed Q-state with boundary-marked stacks) and replays the summary's
surviving lines at each call site under the call's functor, condition, and
extra controls, so repeated calls skip the work the callee already canceled
internally.

Control-relationship equality is decided with magnitude-version counters:
every executed magnitude gate bumps its target's counter, and an exact
cancellation restores the counter, so a control qubit "is in the same
magnitude state" exactly when its counter is unchanged since the push.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import (
    AliasConflictError,
    ArityMismatchError,
    Diagnostic,
    LoweringError,
)
from .frontend import ResolvedProgram
from .gates import DEFAULT_LIBRARY, GateLibrary
from .graphs import ProgramPoint, build_call_graph
from .ir import (
    CondAtom,
    Condition,
    Functor,
    GateParam,
    LineIdAllocator,
    LoweredOperation,
    OperationLine,
    QubitRef,
)
from .lower import ALLOC_OP, LoweringOptions, call_profile, lower_operation, lower_program


class QubitState(enum.Enum):
    ZERO = "Zero"
    ONE = "One"
    Q = "Q"

    def __str__(self) -> str:
        return self.value


# --- assumptions ------------------------------------------------------------


@dataclass
class Assumptions:
    """Fixed truth for condition atoms; anything unassigned stays Unknown."""

    var_values: dict[str, int] = field(default_factory=dict)
    atom_truth: dict[str, bool] = field(default_factory=dict)

    def atom_value(self, atom: CondAtom) -> bool | None:
        if atom.canon in self.atom_truth:
            return self.atom_truth[atom.canon]
        return atom.evaluate(self.var_values)


def condition_value(cond: Condition, assumptions: Assumptions | None) -> bool | None:
    """Three-valued truth of a conjunction under the given assumptions."""
    if cond.contradictory:
        return False
    if not cond.literals:
        return True
    assumptions = assumptions or Assumptions()
    all_true = True
    for atom, polarity in cond.literals:
        v = assumptions.atom_value(atom)
        if v is None:
            all_true = False
        elif v != polarity:
            return False
    return True if all_true else None


# --- analysis state ---------------------------------------------------------


@dataclass(eq=False)
class StackEntry:
    """One stack record; shared by identity between the target's stack and
    every Q-state control's stack, so a cancellation removes it everywhere."""

    kind: str  # "op" | "origin" | "boundary"
    line: OperationLine | None = None
    origin_state: QubitState | None = None
    control_versions: dict[QubitRef, int] = field(default_factory=dict)
    target_version_before: int = 0


@dataclass
class OpStack:
    owner: QubitRef
    entries: list[StackEntry]

    @property
    def bottom(self) -> StackEntry:
        return self.entries[0]

    def top_op(self) -> StackEntry | None:
        if self.entries and self.entries[-1].kind == "op":
            return self.entries[-1]
        return None

    def op_entries(self) -> list[StackEntry]:
        return [e for e in self.entries if e.kind == "op"]

    def copy(self) -> "OpStack":
        return OpStack(self.owner, list(self.entries))


class EntanglementGraph:
    """Undirected multigraph: Q-state qubits, edges labeled by generating line."""

    def __init__(self):
        self.nodes: set[QubitRef] = set()
        self.edges: dict[int, list[tuple[QubitRef, QubitRef]]] = {}
        self.labels: dict[int, str] = {}
        self._synth = -1

    def copy(self) -> "EntanglementGraph":
        g = EntanglementGraph()
        g.nodes = set(self.nodes)
        g.edges = {uid: list(pairs) for uid, pairs in self.edges.items()}
        g.labels = dict(self.labels)
        g._synth = self._synth
        return g

    def add_node(self, q: QubitRef) -> None:
        self.nodes.add(q)

    def add_edges(self, uid: int, label: str, pairs: list[tuple[QubitRef, QubitRef]]) -> None:
        self.edges[uid] = list(pairs)
        self.labels[uid] = label

    def remove_uid(self, uid: int) -> None:
        self.edges.pop(uid, None)
        self.labels.pop(uid, None)

    def neighbors(self, q: QubitRef) -> set[QubitRef]:
        out: set[QubitRef] = set()
        for pairs in self.edges.values():
            for a, b in pairs:
                if a == q:
                    out.add(b)
                elif b == q:
                    out.add(a)
        return out

    def remove_node(self, q: QubitRef) -> None:
        """Delete a node, passing its concatenation relation to its neighbors."""
        if q not in self.nodes:
            return
        former = sorted(self.neighbors(q))
        for uid in list(self.edges):
            pairs = [p for p in self.edges[uid] if q not in p]
            if pairs:
                self.edges[uid] = pairs
            else:
                self.remove_uid(uid)
        for i, a in enumerate(former):
            for b in former[i + 1 :]:
                self.add_edges(self._synth, f"via({q})", [(a, b)])
                self._synth -= 1
        self.nodes.discard(q)

    def edge_list(self) -> list[tuple[QubitRef, QubitRef, str]]:
        out = []
        for uid, pairs in self.edges.items():
            for a, b in pairs:
                lo, hi = sorted((a, b))
                out.append((lo, hi, self.labels[uid]))
        return sorted(out)

    def components(self) -> list[list[QubitRef]]:
        adjacency: dict[QubitRef, set[QubitRef]] = {n: set() for n in self.nodes}
        for pairs in self.edges.values():
            for a, b in pairs:
                adjacency[a].add(b)
                adjacency[b].add(a)
        seen: set[QubitRef] = set()
        comps: list[list[QubitRef]] = []
        for node in sorted(self.nodes):
            if node in seen:
                continue
            comp, frontier = [], [node]
            while frontier:
                n = frontier.pop()
                if n in seen:
                    continue
                seen.add(n)
                comp.append(n)
                frontier.extend(adjacency[n] - seen)
            comps.append(sorted(comp))
        return sorted(comps)


@dataclass
class AnalysisState:
    """(State, Stack, Entangle) plus the graph and magnitude-version counters."""

    states: dict[QubitRef, QubitState] = field(default_factory=dict)
    stacks: dict[QubitRef, OpStack] = field(default_factory=dict)
    versions: dict[QubitRef, int] = field(default_factory=dict)
    entangle: set[int] = field(default_factory=set)
    graph: EntanglementGraph = field(default_factory=EntanglementGraph)

    def state(self, q: QubitRef) -> QubitState:
        try:
            return self.states[q]
        except KeyError:
            raise LoweringError(f"qubit {q} used before allocation") from None

    def version(self, q: QubitRef) -> int:
        return self.versions.get(q, 0)

    def copy(self) -> "AnalysisState":
        return AnalysisState(
            states=dict(self.states),
            stacks={q: s.copy() for q, s in self.stacks.items()},
            versions=dict(self.versions),
            entangle=set(self.entangle),
            graph=self.graph.copy(),
        )


def make_summary_entry_state(formals: tuple[QubitRef, ...]) -> AnalysisState:
    """All-Q entry: every formal gets a boundary-marked stack and a graph node."""
    st = AnalysisState()
    for f in formals:
        st.states[f] = QubitState.Q
        st.stacks[f] = OpStack(f, [StackEntry(kind="boundary")])
        st.graph.add_node(f)
    return st


# --- spec-level checks ------------------------------------------------------


def check_executed(line: OperationLine, st: AnalysisState, assumptions: Assumptions | None = None) -> bool:
    """False when the condition is False/contradictory or a quantum control
    is in Zero-state; such a line has no effect at all."""
    if condition_value(line.condition, assumptions) is False:
        return False
    return all(st.state(c) != QubitState.ZERO for c in line.qcontrol)


def check_fundamental(line: OperationLine, library: GateLibrary = DEFAULT_LIBRARY) -> bool:
    return library.is_fundamental(line.op_name)


def check_inverse(a: OperationLine, b: OperationLine, library: GateLibrary = DEFAULT_LIBRARY) -> bool:
    """Are the two operations mutually inverse?

    Conservative: same gate with self-inverse semantics (H, X, and CNOT via
    identical controls), exact phase negation for the rotation family, or an
    Adjoint-functor pairing. No equivalence reasoning across gate names.
    """
    if a.op_name != b.op_name:
        return False
    if not library.is_fundamental(a.op_name):
        return False
    info = library.info(a.op_name)
    family = info.inverse_family
    if family == "self":
        return a.params == b.params
    if family == "adjoint":
        return a.functor.adjoint != b.functor.adjoint and a.params == b.params
    if family == "phase":
        ea = a.params[0].negated() if a.functor.adjoint else a.params[0]
        eb = b.params[0].negated() if b.functor.adjoint else b.params[0]
        if ea.is_exact and eb.is_exact:
            total = ea.pi_multiple + eb.pi_multiple
            if info.phase_period is not None:
                return total % info.phase_period == 0
            return total == 0
        if not ea.is_exact and not eb.is_exact:
            return ea.raw == -eb.raw
        return False
    return False


def check_controlled(entry: StackEntry, line: OperationLine, st: AnalysisState) -> bool:
    """Same control relationship: equal quantum control sets, canonically equal
    classical conditions, and every control qubit still in the magnitude state
    captured when the entry was pushed (non-magnitude gates on controls do not
    bump versions, so they do not break the relationship)."""
    a = entry.line
    if a is None:
        return False
    if frozenset(a.qcontrol) != frozenset(line.qcontrol):
        return False
    if a.condition.literals != line.condition.literals or a.condition.contradictory != line.condition.contradictory:
        return False
    return all(st.version(c) == entry.control_versions.get(c, 0) for c in line.qcontrol)


# --- results ----------------------------------------------------------------


@dataclass
class NetLines:
    """Lines surviving a run, in order: every processed line except pairs that
    canceled exactly. Replaying these through the engine reproduces the run."""

    order: dict[int, OperationLine] = field(default_factory=dict)

    def record(self, line: OperationLine) -> None:
        self.order[line.uid] = line

    def remove(self, uid: int) -> None:
        self.order.pop(uid, None)

    def lines(self) -> tuple[OperationLine, ...]:
        return tuple(self.order.values())


@dataclass
class AnalysisResult:
    op: str
    entry_state: AnalysisState
    exit_state: AnalysisState | None = None
    points: list[tuple[ProgramPoint, dict]] = field(default_factory=list)
    warnings: list[Diagnostic] = field(default_factory=list)
    net: NetLines = field(default_factory=NetLines)

    def snapshot_at(self, kind: str, label: str) -> dict | None:
        for pp, snap in self.points:
            if pp.kind == kind and pp.label == label:
                return snap
        return None


@dataclass
class OperationSummary:
    """Callee analyzed with all-Q inputs; reusable at every call site."""

    op: str
    formals: tuple[QubitRef, ...]
    exit_state: AnalysisState
    net_lines: tuple[OperationLine, ...]
    warnings: list[Diagnostic] = field(default_factory=list)

    def stack_lines(self, formal: QubitRef) -> list[OperationLine]:
        stack = self.exit_state.stacks.get(formal)
        if stack is None:
            return []
        return [e.line for e in stack.op_entries()]

    def edge_pairs(self) -> set[tuple[QubitRef, QubitRef]]:
        return {(a, b) for a, b, _ in self.exit_state.graph.edge_list()}


def wrap_lines(
    lines: tuple[OperationLine, ...],
    functor: Functor,
    condition: Condition,
    qcontrol: tuple[QubitRef, ...],
) -> tuple[OperationLine, ...]:
    """Adjust callee lines for the call site's functor and control.

    Adjoint reverses the order and adjoints each line (allocation lines keep
    their leading position); Controlled conjoins the extra control qubits; the
    call's classical condition is conjoined onto every line.
    """
    seq = list(lines)
    if functor.adjoint:
        allocs = [ln for ln in seq if ln.op_name == ALLOC_OP]
        rest = [ln for ln in seq if ln.op_name != ALLOC_OP]
        seq = allocs + [ln.replace(functor=ln.functor.with_adjoint()) for ln in reversed(rest)]
    out = []
    for ln in seq:
        ctrl = ln.qcontrol + tuple(c for c in qcontrol if c not in ln.qcontrol)
        cond = ln.condition.conjoin(condition)
        new_functor = Functor(adjoint=ln.functor.adjoint, controlled=bool(ctrl))
        if ln.op_name == ALLOC_OP:
            out.append(ln.replace(condition=cond))
        else:
            out.append(ln.replace(condition=cond, qcontrol=ctrl, functor=new_functor))
    return tuple(out)


# --- engine -----------------------------------------------------------------


class Analyzer:
    """Intra- and interprocedural driver over one resolved program."""

    def __init__(
        self,
        resolved: ResolvedProgram,
        opts: LoweringOptions | None = None,
        assumptions: Assumptions | None = None,
        library: GateLibrary = DEFAULT_LIBRARY,
    ):
        self.resolved = resolved
        self.opts = opts or LoweringOptions()
        self.assumptions = assumptions or Assumptions()
        self.library = library
        self.lowered = lower_program(resolved, self.opts, library)
        self.call_graph = build_call_graph(self.lowered, library)  # rejects recursion
        self.alloc = LineIdAllocator(next_uid=max(
            (ln.uid for op in self.lowered.values() for ln in op.lines), default=0
        ) + 1)
        self.summaries: dict[tuple, OperationSummary] = {}

    # -- queries

    def is_magnitude(self, op_name: str) -> bool:
        """Library gates by classification; user operations when any lowered
        line of theirs is magnitude."""
        if self.library.is_fundamental(op_name):
            return self.library.is_magnitude(op_name)
        body = self.lowered[op_name]
        return any(
            ln.op_name != ALLOC_OP and self.is_magnitude(ln.op_name) for ln in body.lines
        )

    # -- transfer pieces (exposed for direct testing)

    def transition_state(self, q: QubitRef, line: OperationLine, st: AnalysisState) -> QubitState:
        """Predict the post-state of ``q`` (the line's target) without mutating."""
        s = st.state(q)
        if s == QubitState.Q:
            stack = st.stacks[q]
            top = stack.top_op()
            if (
                top is not None
                and len(stack.op_entries()) == 1
                and stack.bottom.kind == "origin"
                and check_inverse(top.line, line, self.library)
                and check_controlled(top, line, st)
            ):
                return stack.bottom.origin_state
            return QubitState.Q
        info = self.library.info(line.op_name)
        if info.classical_action == "superpose":
            return QubitState.Q
        if info.classical_action == "flip":
            if any(st.state(c) == QubitState.Q for c in line.qcontrol):
                return QubitState.Q
            if condition_value(line.condition, self.assumptions) is True:
                return QubitState.ONE if s == QubitState.ZERO else QubitState.ZERO
            return s
        return s

    def transfer_stack(self, line: OperationLine, st: AnalysisState) -> StackEntry | None:
        """Apply the stack transfer for a Q-state target.

        Returns the killed entry on cancellation (popped from the target stack
        and removed from every control stack holding it), else pushes a shared
        entry onto the target's and every Q-state control's stack. Magnitude
        versions bump on push and are restored on cancellation.
        """
        target = line.single_target
        stack = st.stacks[target]
        top = stack.top_op()
        info = self.library.info(line.op_name)
        if top is not None and check_inverse(top.line, line, self.library) and check_controlled(top, line, st):
            stack.entries.pop()
            for c in top.line.qcontrol:
                cstack = st.stacks.get(c)
                if cstack is not None:
                    cstack.entries = [e for e in cstack.entries if e is not top]
            st.versions[target] = top.target_version_before
            if not stack.op_entries() and stack.bottom.kind == "origin":
                st.states[target] = stack.bottom.origin_state
                del st.stacks[target]
            return top
        entry = StackEntry(
            kind="op",
            line=line,
            control_versions={c: st.version(c) for c in line.qcontrol},
            target_version_before=st.version(target),
        )
        stack.entries.append(entry)
        for c in line.qcontrol:
            if st.state(c) == QubitState.Q:
                st.stacks[c].entries.append(entry)
        if info.magnitude:
            st.versions[target] = st.version(target) + 1
        return None

    def transfer_entangle(
        self, line: OperationLine, st: AnalysisState, killed: StackEntry | None
    ) -> None:
        """Apply the entangle transfer after the stack transfer."""
        target = line.single_target
        if killed is not None:
            if killed.line.uid in st.entangle:
                st.entangle.discard(killed.line.uid)
                st.graph.remove_uid(killed.line.uid)
            if st.states.get(target) != QubitState.Q:
                st.graph.remove_node(target)
            return
        q_controls = [c for c in line.qcontrol if st.state(c) == QubitState.Q]
        if q_controls:
            st.entangle.add(line.uid)
            st.graph.add_edges(line.uid, line.label, [(c, target) for c in q_controls])

    # -- per-line step

    def step(
        self,
        line: OperationLine,
        st: AnalysisState,
        net: NetLines,
        warnings: list[Diagnostic],
    ) -> None:
        if not check_executed(line, st, self.assumptions):
            net.record(line)
            return
        if not check_fundamental(line, self.library):
            self.apply_summary(line, st, net, warnings)
            return
        if line.op_name == ALLOC_OP:
            for q in line.target:
                st.states[q] = QubitState.ZERO
                st.versions[q] = 0
            net.record(line)
            return
        self._step_gate(line, st, net, warnings)

    def _step_gate(
        self,
        line: OperationLine,
        st: AnalysisState,
        net: NetLines,
        warnings: list[Diagnostic],
    ) -> None:
        info = self.library.info(line.op_name)
        target = line.single_target
        tstate = st.state(target)

        if info.classical_action == "none" and tstate != QubitState.Q:
            # Diagonal gate on a classical target: identity on |0>, and on |1>
            # a pure phase that kicks back onto the controls. Re-target the
            # phase at the first superposed control so its effect is tracked.
            if tstate == QubitState.ZERO:
                net.record(line)
                return
            q_controls = [c for c in line.qcontrol if st.state(c) == QubitState.Q]
            if not q_controls:
                net.record(line)
                return
            line_q = line.replace(target=(q_controls[0],), qcontrol=tuple(q_controls[1:]))
            killed = self.transfer_stack(line_q, st)
            self.transfer_entangle(line_q, st, killed)
            if killed is not None:
                net.remove(killed.line.uid)
            else:
                net.record(line)
            return

        if tstate != QubitState.Q:
            new = self.transition_state(target, line, st)
            if new == QubitState.Q:
                st.stacks[target] = OpStack(
                    target, [StackEntry(kind="origin", origin_state=tstate)]
                )
                st.states[target] = QubitState.Q
                st.graph.add_node(target)
                killed = self.transfer_stack(line, st)
                self.transfer_entangle(line, st, killed)
            else:
                if new == tstate and info.classical_action == "flip":
                    cv = condition_value(line.condition, self.assumptions)
                    if cv is None:
                        warnings.append(
                            Diagnostic(
                                "warning",
                                f"{line.op_name} on {target} under an unknown condition keeps "
                                f"state {tstate}; the flipped branch is not tracked",
                                line.src_line,
                                line.src_col,
                            )
                        )
                st.states[target] = new
                if info.magnitude:
                    st.versions[target] = st.version(target) + 1
            net.record(line)
            return

        killed = self.transfer_stack(line, st)
        self.transfer_entangle(line, st, killed)
        if killed is not None:
            net.remove(killed.line.uid)
        else:
            net.record(line)

    # -- interprocedural

    def _call_profile(self, line: OperationLine) -> tuple[dict[str, int], tuple[GateParam, ...]]:
        return call_profile(self.resolved.decls[line.op_name], line), line.params

    def summarize_operation(
        self, name: str, array_lengths: dict[str, int] | None = None, classical: tuple[GateParam, ...] = ()
    ) -> OperationSummary:
        """Summary of a callee under the all-Q input presumption (memoized)."""
        decl = self.resolved.decls[name]
        if array_lengths is None:
            lengths, _ = self._default_profile(name)
        else:
            lengths = dict(array_lengths)
        key = (name, tuple(sorted(lengths.items())), classical)
        if key in self.summaries:
            return self.summaries[key]
        classical_names = [p.name for p in decl.params if p.kind.base not in ("Qubit", "QubitArray")]
        if len(classical) != len(classical_names):
            raise ArityMismatchError(
                f"'{name}' takes {len(classical_names)} classical argument(s), got {len(classical)}"
            )
        env = {n: p.as_float() for n, p in zip(classical_names, classical)}
        lowered = self.lowered.get(name)
        if lowered is None or classical or lengths != self._default_profile(name)[0]:
            lowered = lower_operation(
                decl,
                self.resolved,
                self.opts,
                self.alloc,
                classical_env=env,
                array_lengths=lengths,
                library=self.library,
            )
        entry = make_summary_entry_state(lowered.formals)
        result = self.analyze_operation(lowered, entry)
        summary = OperationSummary(
            op=name,
            formals=lowered.formals,
            exit_state=result.exit_state,
            net_lines=result.net.lines(),
            warnings=result.warnings,
        )
        self.summaries[key] = summary
        return summary

    def _default_profile(self, name: str) -> tuple[dict[str, int], tuple]:
        from .lower import infer_array_lengths

        return infer_array_lengths(self.resolved.decls[name]), ()

    def apply_summary(
        self,
        line: OperationLine,
        st: AnalysisState,
        net: NetLines,
        warnings: list[Diagnostic],
    ) -> None:
        """Merge a callee summary into the caller state at a call line.

        Binds formals to actuals, then replays the callee's surviving lines in
        order through the ordinary transfer machinery: each replayed line is
        checked against the actual's current stack top (the bottom-up stack
        merge), re-evaluating state transitions as it goes, and the summary
        graph's structure re-emerges over actual qubits.
        """
        lengths, classical = self._call_profile(line)
        summary = self.summarize_operation(line.op_name, lengths, classical)
        self.replay_call(line, summary.formals, summary.net_lines, st, net, warnings)

    def replay_call(
        self,
        line: OperationLine,
        formals: tuple[QubitRef, ...],
        lines: tuple[OperationLine, ...],
        st: AnalysisState,
        net: NetLines,
        warnings: list[Diagnostic],
    ) -> None:
        """Wrap, alias-bind, and step callee lines into the caller state."""
        actuals = line.target
        if len(actuals) != len(formals):
            raise ArityMismatchError(
                f"call to '{line.op_name}' passes {len(actuals)} qubit(s), "
                f"expected {len(formals)}",
                line.src_line,
                line.src_col,
            )
        if len(set(actuals)) != len(actuals):
            raise AliasConflictError(
                f"call to '{line.op_name}' binds one qubit to two formals",
                line.src_line,
                line.src_col,
            )
        if set(actuals) & set(line.qcontrol):
            raise AliasConflictError(
                f"control qubit also passed as argument to '{line.op_name}'",
                line.src_line,
                line.src_col,
            )
        wrapped = wrap_lines(lines, line.functor, line.condition, line.qcontrol)
        alias = dict(zip(formals, actuals))
        suffix = line.label[1:] if line.label.startswith("L") else line.label

        def subst(q: QubitRef) -> QubitRef:
            # Callee locals get a per-call-site instance namespace; the call
            # label is stable across replays, so names are deterministic.
            if q in alias:
                return alias[q]
            return QubitRef(f"{q.owner}@{line.label}", q.base, q.index)

        for inner in wrapped:
            inst = inner.replace(
                uid=self.alloc.fresh(),
                label=f"L{suffix}.{inner.label[1:] if inner.label.startswith('L') else inner.label}",
                qcontrol=tuple(subst(c) for c in inner.qcontrol),
                target=tuple(subst(t) for t in inner.target),
            )
            self.step(inst, st, net, warnings)

    # -- drivers

    def analyze_operation(
        self,
        op: LoweredOperation,
        entry_state: AnalysisState,
        record_points: bool = False,
    ) -> AnalysisResult:
        """Walk the operation's lines in order, snapshotting each program point."""
        st = entry_state.copy()
        result = AnalysisResult(op=op.name, entry_state=entry_state)
        for line in op.lines:
            if record_points:
                result.points.append((ProgramPoint("before", line.label), snapshot(st, op.name)))
            self.step(line, st, result.net, result.warnings)
            if record_points:
                result.points.append((ProgramPoint("after", line.label), snapshot(st, op.name)))
        result.exit_state = st
        return result

    def run_entry(self, record_points: bool = False) -> AnalysisResult:
        """Analyze the entry operation; qubit formals, if any, enter all-Q."""
        entry_op = self.lowered[self.resolved.entry]
        if entry_op.formals:
            entry_state = make_summary_entry_state(entry_op.formals)
        else:
            entry_state = AnalysisState()
        return self.analyze_operation(entry_op, entry_state, record_points)


def snapshot(st: AnalysisState, context_op: str) -> dict:
    """Display-form snapshot of one program point."""
    states = {q.display(context_op): str(s) for q, s in sorted(st.states.items())}
    stacks = {
        q.display(context_op): [e.line.label for e in stack.op_entries()]
        for q, stack in sorted(st.stacks.items())
    }
    edges = [
        {"a": a.display(context_op), "b": b.display(context_op), "line": label}
        for a, b, label in st.graph.edge_list()
    ]
    return {"states": states, "stacks": stacks, "edges": edges}


def analyze_program(
    resolved: ResolvedProgram,
    opts: LoweringOptions | None = None,
    assumptions: Assumptions | None = None,
    record_points: bool = False,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> tuple[Analyzer, AnalysisResult]:
    """Pipeline convenience: build the engine and analyze the entry operation."""
    analyzer = Analyzer(resolved, opts, assumptions, library)
    return analyzer, analyzer.run_entry(record_points)
