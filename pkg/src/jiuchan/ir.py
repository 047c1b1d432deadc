"""Operation-line IR.

Every statement of the supported subset lowers to a flat list of 4-tuples
``(Functor, Operation, Control, Target)``. Control carries both the classical
condition (a conjunction of canonical atoms) and the quantum control set;
gate parameters are kept as exact rational multiples of pi whenever the
source expression folds, so inverse detection never relies on float
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


# --- functor ----------------------------------------------------------------


@dataclass(frozen=True)
class Functor:
    adjoint: bool = False
    controlled: bool = False

    def compose(self, other: "Functor") -> "Functor":
        # Adjoint is an involution on its axis; Controlled accumulates.
        return Functor(self.adjoint ^ other.adjoint, self.controlled | other.controlled)

    def with_adjoint(self) -> "Functor":
        return Functor(not self.adjoint, self.controlled)

    def __str__(self) -> str:
        if self.adjoint and self.controlled:
            return "AdjointControlled"
        if self.adjoint:
            return "Adjoint"
        if self.controlled:
            return "Controlled"
        return "None"


FUNCTOR_NONE = Functor()
FUNCTOR_ADJOINT = Functor(adjoint=True)
FUNCTOR_CONTROLLED = Functor(controlled=True)
FUNCTOR_ADJOINT_CONTROLLED = Functor(adjoint=True, controlled=True)


# --- gate parameters --------------------------------------------------------


@dataclass(frozen=True)
class GateParam:
    """Either an exact rational multiple of pi or an opaque float.

    Exact values compare by rational equality; opaque floats by bitwise
    equality. ``negated`` is exact in both representations.
    """

    pi_multiple: Fraction | None = None
    raw: float | None = None

    def __post_init__(self):
        if (self.pi_multiple is None) == (self.raw is None):
            raise ValueError("GateParam needs exactly one of pi_multiple, raw")

    @property
    def is_exact(self) -> bool:
        return self.pi_multiple is not None

    def negated(self) -> "GateParam":
        if self.is_exact:
            return GateParam(pi_multiple=-self.pi_multiple)
        return GateParam(raw=-self.raw)

    def as_float(self) -> float:
        import math

        if self.is_exact:
            return float(self.pi_multiple) * math.pi
        return self.raw

    def __str__(self) -> str:
        if self.is_exact:
            q = self.pi_multiple
            if q == 0:
                return "0"
            if q == 1:
                return "pi"
            if q.denominator == 1:
                return f"{q.numerator}*pi"
            if q.numerator == 1:
                return f"pi/{q.denominator}"
            if q.numerator == -1:
                return f"-pi/{q.denominator}"
            return f"{q.numerator}*pi/{q.denominator}"
        return repr(self.raw)


def exact_param(numerator: int | Fraction, denominator: int = 1) -> GateParam:
    return GateParam(pi_multiple=Fraction(numerator, denominator))


# --- conditions -------------------------------------------------------------


@dataclass(frozen=True)
class CondAtom:
    """A classical boolean atom in canonical textual form.

    Equality of atoms is equality of canonical text: sides are constant
    folded, whitespace dropped, and operands of commutative comparators
    sorted, so ``a==1`` and ``1 == a`` are the same atom.
    """

    canon: str
    var: str | None = None  # single variable mentioned, when there is one
    cmp: str | None = None  # comparator, for evaluable atoms
    const: int | None = None  # folded constant side

    def evaluate(self, env: dict[str, int]) -> bool | None:
        """Truth under a partial assignment of integer variables; None if open."""
        if self.var is None or self.cmp is None or self.var not in env:
            return None
        v = env[self.var]
        return {
            "==": v == self.const,
            "!=": v != self.const,
            "<": v < self.const,
            "<=": v <= self.const,
            ">": v > self.const,
            ">=": v >= self.const,
        }[self.cmp]

    def __str__(self) -> str:
        return self.canon


@dataclass(frozen=True)
class Condition:
    """Conjunction of polarized atoms; the empty conjunction is True."""

    literals: frozenset[tuple[CondAtom, bool]] = frozenset()
    contradictory: bool = False

    @staticmethod
    def true() -> "Condition":
        return Condition()

    @staticmethod
    def false() -> "Condition":
        return Condition(contradictory=True)

    def conjoin(self, other: "Condition") -> "Condition":
        if self.contradictory or other.contradictory:
            return Condition.false()
        lits = self.literals | other.literals
        atoms = {}
        for atom, pol in lits:
            if atoms.setdefault(atom, pol) != pol:
                return Condition.false()
        return Condition(literals=lits)

    def atoms(self) -> set[CondAtom]:
        return {atom for atom, _ in self.literals}

    def is_true(self) -> bool:
        return not self.contradictory and not self.literals

    def __str__(self) -> str:
        if self.contradictory:
            return "false"
        if not self.literals:
            return ""
        parts = sorted(f"{'' if pol else '!'}{atom.canon}" for atom, pol in self.literals)
        return " & ".join(parts)


# --- qubits and lines -------------------------------------------------------


@dataclass(frozen=True, order=True)
class QubitRef:
    owner: str
    base: str
    index: int | None = None

    def display(self, context_op: str | None = None) -> str:
        name = self.base if self.index is None else f"{self.base}[{self.index}]"
        if context_op is not None and self.owner != context_op:
            return f"{self.owner}/{name}"
        return name

    def __str__(self) -> str:
        return self.base if self.index is None else f"{self.base}[{self.index}]"


@dataclass(frozen=True)
class OperationLine:
    uid: int
    label: str  # display id: "L5" intraprocedurally, "L6.1" for replayed callee lines
    functor: Functor
    op_name: str
    params: tuple[GateParam, ...]
    condition: Condition
    qcontrol: tuple[QubitRef, ...]
    target: tuple[QubitRef, ...]
    src_line: int = 0
    src_col: int = 0

    @property
    def single_target(self) -> QubitRef:
        return self.target[0]

    def replace(self, **kw) -> "OperationLine":
        from dataclasses import replace as _replace

        return _replace(self, **kw)


@dataclass
class LoweredOperation:
    """Straight-line lowered body bracketed by enter/exit markers."""

    name: str
    formals: tuple[QubitRef, ...]
    lines: tuple[OperationLine, ...]
    classical_params: tuple[str, ...] = ()
    enter_marker: str = ""
    exit_marker: str = ""

    def __post_init__(self):
        if not self.enter_marker:
            self.enter_marker = f"enter_{self.name}"
        if not self.exit_marker:
            self.exit_marker = f"exit_{self.name}"


@dataclass
class LineIdAllocator:
    """Deterministic uid source; identical lowering orders give identical ids."""

    next_uid: int = 0

    def fresh(self) -> int:
        uid = self.next_uid
        self.next_uid += 1
        return uid


def format_line(line: OperationLine, context_op: str | None = None) -> str:
    """Debug dump: ``#<id> [<functor>] <op>(<params>) ctrl=(<conds>;<qubits>) tgt=<qubit>``."""
    params = ", ".join(str(p) for p in line.params)
    conds = str(line.condition)
    ctrls = ",".join(q.display(context_op) for q in line.qcontrol)
    tgt = ",".join(q.display(context_op) for q in line.target)
    return f"#{line.label} [{line.functor}] {line.op_name}({params}) ctrl=({conds};{ctrls}) tgt={tgt}"
