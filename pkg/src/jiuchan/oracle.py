"""Dense state-vector oracle for the analysis's separability claims.

The simulator executes fully inlined operation lines with exact gate
matrices, then checks separability of bipartitions through reduced-state
purity: for a pure global state, a cut (A, B) is separable exactly when the
reduced density matrix of either side is pure. ``verify_analysis`` enumerates
every assignment of the program's condition atoms, simulates, and asserts
that any two qubits the analysis places in different connected components
(classical-state qubits counting as singletons) are actually separable.

Qubit ordering convention: qubit 0 is the most significant bit of the
amplitude index, so after ``amps.reshape([2] * n)`` axis ``i`` is qubit ``i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyPartitionError,
    JiuchanError,
    TooManyQubitsError,
    UnsupportedGateError,
)
from .frontend import ResolvedProgram
from .gates import DEFAULT_LIBRARY, GateLibrary
from .ir import Condition, LineIdAllocator, OperationLine, QubitRef
from .lower import ALLOC_OP, LoweringOptions, call_profile, lower_operation, lower_program

MAX_SIM_QUBITS = 12
MAX_CONDITION_ATOMS = 8
PURITY_TOL = 1e-9

_SQ2 = 1.0 / math.sqrt(2.0)
_FIXED_GATES = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
}


@dataclass
class StateVector:
    n: int
    amps: np.ndarray

    def norm_ok(self, tol: float = PURITY_TOL) -> bool:
        return abs(np.vdot(self.amps, self.amps).real - 1.0) < tol


def gate_matrix(line: OperationLine) -> np.ndarray:
    """2x2 matrix for a fundamental line, Adjoint applied."""
    name = line.op_name
    if name in _FIXED_GATES:
        mat = _FIXED_GATES[name]
    elif name == "R1":
        theta = line.params[0].as_float()
        mat = np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)
    elif name == "Rz":
        theta = line.params[0].as_float()
        mat = np.array(
            [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex
        )
    else:
        raise UnsupportedGateError(f"no concrete semantics for gate '{name}'")
    if line.functor.adjoint:
        mat = mat.conj().T
    return mat


def _condition_holds(cond: Condition, assign: dict[str, bool]) -> bool:
    if cond.contradictory:
        return False
    for atom, polarity in cond.literals:
        if atom.canon not in assign:
            raise JiuchanError(f"condition atom '{atom.canon}' not covered by the assignment")
        if assign[atom.canon] != polarity:
            return False
    return True


def _apply_controlled(state: np.ndarray, n: int, mat: np.ndarray, target: int, controls: list[int]) -> None:
    """Apply a single-qubit matrix on ``target`` in the all-controls-one
    subspace, in place."""
    psi = state.reshape([2] * n)
    idx: list = [slice(None)] * n
    for c in controls:
        idx[c] = 1
    sub = psi[tuple(idx)]
    t = target - sum(1 for c in controls if c < target)
    moved = np.moveaxis(sub, t, -1)
    moved[...] = moved @ mat.T


def simulate(
    lines: list[OperationLine],
    qubits: list[QubitRef],
    assign: dict[str, bool],
) -> StateVector:
    """Exact concrete semantics of a flat line list on |0...0>.

    Lines whose condition is false under ``assign`` are skipped; quantum
    controls become controlled unitaries; Adjoint conjugate-transposes.
    """
    n = len(qubits)
    if n > MAX_SIM_QUBITS:
        raise TooManyQubitsError(f"{n} qubits exceeds the {MAX_SIM_QUBITS}-qubit simulator cap")
    index = {q: i for i, q in enumerate(qubits)}
    state = np.zeros(2**n, dtype=complex)
    state[0] = 1.0
    for line in lines:
        if line.op_name == ALLOC_OP:
            continue
        if not _condition_holds(line.condition, assign):
            continue
        mat = gate_matrix(line)
        target = index[line.single_target]
        controls = [index[c] for c in line.qcontrol]
        _apply_controlled(state, n, mat, target, controls)
    sv = StateVector(n=n, amps=state)
    if not sv.norm_ok():
        raise JiuchanError("state vector normalization drifted")
    return sv


def adjoint_reversed(lines: list[OperationLine], alloc: LineIdAllocator | None = None) -> list[OperationLine]:
    """The inverse sequence: reversed order, each line adjointed."""
    alloc = alloc or LineIdAllocator(next_uid=10**9)
    out = []
    for ln in reversed(lines):
        if ln.op_name == ALLOC_OP:
            continue
        out.append(ln.replace(uid=alloc.fresh(), functor=ln.functor.with_adjoint()))
    return out


# --- separability -----------------------------------------------------------


def reduced_density(sv: StateVector, keep: list[int]) -> np.ndarray:
    """Density matrix of the ``keep`` qubits after tracing out the rest."""
    n = sv.n
    rest = [i for i in range(n) if i not in keep]
    psi = sv.amps.reshape([2] * n)
    mat = np.transpose(psi, axes=list(keep) + rest).reshape(2 ** len(keep), 2 ** len(rest))
    return mat @ mat.conj().T


def reduced_purity(sv: StateVector, part: list[int]) -> float:
    """tr(rho_A^2) for the reduced state of the given qubit indices."""
    if not part or len(part) >= sv.n:
        raise EmptyPartitionError("partition sides must both be nonempty")
    keep = sorted(part)
    if len(keep) > sv.n - len(keep):
        keep = [i for i in range(sv.n) if i not in set(keep)]
    rho = reduced_density(sv, keep)
    return float(np.vdot(rho, rho).real)


def is_separable_partition(sv: StateVector, partition: tuple[list[int], list[int]]) -> bool:
    """Pure global state: (A, B) separable iff the reduced state of A is pure."""
    a, b = partition
    if not a or not b:
        raise EmptyPartitionError("partition sides must both be nonempty")
    if set(a) & set(b) or set(a) | set(b) != set(range(sv.n)):
        raise EmptyPartitionError("partition must split the full qubit set")
    return reduced_purity(sv, list(a)) >= 1.0 - PURITY_TOL


def pair_entangled(sv: StateVector, a: int, b: int, tol: float = PURITY_TOL) -> bool:
    """Exact two-qubit entanglement test on the reduced pair state (PPT)."""
    rho = reduced_density(sv, sorted([a, b])).reshape(2, 2, 2, 2)
    # Partial transpose on the second qubit of the pair.
    pt = np.transpose(rho, (0, 3, 2, 1)).reshape(4, 4)
    eigs = np.linalg.eigvalsh(pt)
    return bool(eigs.min() < -tol)


# --- full-program flattening (independent of summaries) ----------------------


@dataclass
class FlatProgram:
    lines: list[OperationLine]
    qubits: list[QubitRef]
    atoms: list[str]


def flatten_program(
    resolved: ResolvedProgram,
    opts: LoweringOptions | None = None,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> FlatProgram:
    """Inline every call site recursively into one flat gate-line list.

    This is plain macro expansion over the lowered bodies (no stacks, no
    summaries), so it is an independent route to the program's concrete
    semantics. Callee locals are renamed per call site.
    """
    from .analysis import wrap_lines  # pure line rewriting shared with the engine

    opts = opts or LoweringOptions()
    lowered = lower_program(resolved, opts, library)
    alloc = LineIdAllocator(
        next_uid=max((ln.uid for op in lowered.values() for ln in op.lines), default=0) + 1
    )
    entry = lowered[resolved.entry]
    out: list[OperationLine] = []
    qubits: list[QubitRef] = list(entry.formals)

    def expand(lines, alias: dict[QubitRef, QubitRef], instance: str, entry_level: bool) -> None:
        for ln in lines:
            subbed = ln.replace(
                uid=alloc.fresh(),
                label=(f"{instance}{ln.label[1:] if ln.label.startswith('L') else ln.label}"),
                qcontrol=tuple(_subst(c, alias, instance) for c in ln.qcontrol),
                target=tuple(_subst(t, alias, instance) for t in ln.target),
            )
            if library.is_fundamental(subbed.op_name):
                if subbed.op_name == ALLOC_OP:
                    qubits.extend(subbed.target)
                out.append(subbed)
                continue
            decl = resolved.decls[subbed.op_name]
            lengths = call_profile(decl, subbed)
            classical_names = [
                p.name for p in decl.params if p.kind.base not in ("Qubit", "QubitArray")
            ]
            env = {n: p.as_float() for n, p in zip(classical_names, subbed.params)}
            callee = lower_operation(
                decl,
                resolved,
                opts,
                alloc,
                classical_env=env,
                array_lengths=lengths,
                library=library,
            )
            wrapped = wrap_lines(callee.lines, subbed.functor, subbed.condition, subbed.qcontrol)
            inner_alias = dict(zip(callee.formals, subbed.target))
            expand(wrapped, inner_alias, f"{subbed.label}.", False)

    def _subst(q: QubitRef, alias: dict[QubitRef, QubitRef], instance: str) -> QubitRef:
        if q in alias:
            return alias[q]
        if instance:
            return QubitRef(f"{q.owner}@{instance.rstrip('.')}", q.base, q.index)
        return q

    expand(entry.lines, {}, "", True)
    # Relabel to match the analyzer's display convention ("L6.1").
    out = [ln.replace(label=f"L{ln.label}" if not ln.label.startswith("L") else ln.label) for ln in out]
    atoms = sorted({atom.canon for ln in out for atom in ln.condition.atoms()})
    return FlatProgram(lines=out, qubits=qubits, atoms=atoms)


# --- verification -----------------------------------------------------------


@dataclass
class VerifyReport:
    assignments_checked: int
    violations: list[dict] = field(default_factory=list)
    never_entangled_edges: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "assignments_checked": self.assignments_checked,
            "violations": self.violations,
            "never_entangled_edges": self.never_entangled_edges,
        }


def verify_analysis(
    resolved: ResolvedProgram,
    opts: LoweringOptions | None = None,
    *,
    components_override: list[list[str]] | None = None,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> VerifyReport:
    """Check the analysis's separability claims against exhaustive simulation.

    For every assignment of the program's condition atoms: simulate the flat
    program; take the entanglement components the analysis reports under that
    assignment (non-Q qubits are singletons); assert each (component,
    complement) cut is separable. ``components_override`` pins a fixed
    component partition instead (used by negative controls); any qubit not
    mentioned is its own singleton.

    Also reports, informationally, analysis edges whose endpoints were never
    pairwise entangled under any assignment: those are guaranteed false
    positives, which soundness permits.
    """
    from .analysis import Analyzer, Assumptions, QubitState

    opts = opts or LoweringOptions()
    flat = flatten_program(resolved, opts, library)
    if len(flat.atoms) > MAX_CONDITION_ATOMS:
        raise JiuchanError(
            f"{len(flat.atoms)} condition atoms exceed the enumeration cap of {MAX_CONDITION_ATOMS}"
        )
    entry_name = resolved.entry
    names = {q: q.display(entry_name) for q in flat.qubits}
    index = {names[q]: i for i, q in enumerate(flat.qubits)}
    report = VerifyReport(assignments_checked=0)
    edge_seen: dict[tuple[str, str], set[str]] = {}
    edge_entangled: dict[tuple[str, str], bool] = {}

    for values in itertools.product([False, True], repeat=len(flat.atoms)):
        assign = dict(zip(flat.atoms, values))
        sv = simulate(flat.lines, flat.qubits, assign)
        report.assignments_checked += 1

        if components_override is not None:
            comps = [sorted(c) for c in components_override]
        else:
            analyzer = Analyzer(resolved, opts, Assumptions(atom_truth=assign), library)
            result = analyzer.run_entry()
            exit_state = result.exit_state
            comps = [
                [q.display(entry_name) for q in comp]
                for comp in exit_state.graph.components()
            ]
            for a, b, label in exit_state.graph.edge_list():
                key = (names.get(a, str(a)), names.get(b, str(b)))
                edge_seen.setdefault(key, set()).add(label)
                if key[0] in index and key[1] in index:
                    hit = pair_entangled(sv, index[key[0]], index[key[1]])
                    edge_entangled[key] = edge_entangled.get(key, False) or hit

        in_comp = {name for comp in comps for name in comp}
        all_comps = comps + [[names[q]] for q in flat.qubits if names[q] not in in_comp]
        assignment_desc = {atom: bool(v) for atom, v in assign.items()}
        for comp in all_comps:
            part = [index[name] for name in comp if name in index]
            if not part or len(part) >= len(flat.qubits):
                continue
            purity = reduced_purity(sv, part)
            if purity < 1.0 - PURITY_TOL:
                report.violations.append(
                    {
                        "assignment": assignment_desc,
                        "component": sorted(comp),
                        "purity": purity,
                    }
                )

    for key, labels in sorted(edge_seen.items()):
        if not edge_entangled.get(key, False):
            for label in sorted(labels):
                report.never_entangled_edges.append({"a": key[0], "b": key[1], "line": label})
    return report
