"""AST node types for the supported Q# subset.

Expressions keep enough structure for constant folding and canonical
rendering of conditions; statements map one-to-one onto the six lowerable
forms plus a catch-all for parsed-but-ignored classical statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Expr:
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class IntLit(Expr):
    value: int = 0


@dataclass(frozen=True)
class DoubleLit(Expr):
    value: float = 0.0


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool = False


@dataclass(frozen=True)
class PiCall(Expr):
    """The intrinsic ``PI()``."""


@dataclass(frozen=True)
class Name(Expr):
    ident: str = ""


@dataclass(frozen=True)
class Index(Expr):
    base: Expr = None
    index: Expr = None


@dataclass(frozen=True)
class Unary(Expr):
    op: str = "-"  # "-" or "not"
    operand: Expr = None


@dataclass(frozen=True)
class Binary(Expr):
    op: str = "+"  # + - * / and or
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class Compare(Expr):
    op: str = "=="  # == != < <= > >=
    left: Expr = None
    right: Expr = None


@dataclass(frozen=True)
class TupleExpr(Expr):
    items: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class ArrayExpr(Expr):
    items: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class RangeExpr(Expr):
    start: Expr = None
    stop: Expr = None
    step: Expr | None = None


@dataclass(frozen=True)
class CallExpr(Expr):
    """A call in expression position; only intrinsic constants survive folding."""

    name: str = ""
    args: tuple[Expr, ...] = ()


# --- statements -------------------------------------------------------------


@dataclass
class Statement:
    line: int = 0
    col: int = 0


@dataclass
class CallStmt(Statement):
    name: str = ""
    args: tuple[Expr, ...] = ()
    is_adjoint: bool = False
    controls: Expr | None = None  # argument peeled by a Controlled prefix


@dataclass
class UseStmt(Statement):
    binder: str = ""
    size: Expr | None = None  # None for a single qubit


@dataclass
class IfStmt(Statement):
    condition: Expr = None
    then_body: list[Statement] = field(default_factory=list)
    else_body: list[Statement] = field(default_factory=list)


@dataclass
class ForStmt(Statement):
    var: str = ""
    iterable: Expr = None
    body: list[Statement] = field(default_factory=list)


@dataclass
class WithinStmt(Statement):
    within_body: list[Statement] = field(default_factory=list)
    apply_body: list[Statement] = field(default_factory=list)


@dataclass
class RepeatStmt(Statement):
    body: list[Statement] = field(default_factory=list)
    condition: Expr = None
    fixup: list[Statement] = field(default_factory=list)


@dataclass
class IgnoredStmt(Statement):
    """A parsed classical statement outside the analysis (let, while, ...)."""

    kind: str = ""


# --- declarations -----------------------------------------------------------


@dataclass(frozen=True)
class ParamKind:
    base: str  # "Qubit" | "QubitArray" | "Int" | "Double" | "Bool"
    length: int | None = None  # static length for QubitArray, when declared


@dataclass
class Param:
    name: str
    kind: ParamKind
    line: int = 0
    col: int = 0


@dataclass
class OperationDecl:
    name: str
    params: list[Param]
    characteristics: set[str]  # subset of {"Adj", "Ctl"}
    body: list[Statement]
    is_entry: bool = False
    line: int = 0
    col: int = 0


@dataclass
class SourceProgram:
    path: str
    text: str
    namespace: str = ""


def count_statements(body: list[Statement]) -> int:
    """Number of supported statements at one nesting level."""
    return sum(1 for st in body if not isinstance(st, IgnoredStmt))
