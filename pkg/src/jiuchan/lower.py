"""Lowering from the resolved AST to the flat operation-line IR.

Each supported statement maps to a fixed line template: calls become a single
line, allocation one line per ``use``, for-loops unroll statically, if-branches
conjoin their (canonicalized) condition onto the lowered branch bodies,
conjugation appends the reversed adjoint of its within-block, and repeat
unrolls to the configured bound. Numeric constants fold along the way;
gate angles keep an exact rational-pi representation whenever possible so
inverse pairs can be recognized without float tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ast_nodes import (
    ArrayExpr,
    Binary,
    BoolLit,
    CallExpr,
    CallStmt,
    Compare,
    DoubleLit,
    Expr,
    ForStmt,
    IfStmt,
    IgnoredStmt,
    Index,
    IntLit,
    Name,
    OperationDecl,
    PiCall,
    RangeExpr,
    RepeatStmt,
    Statement,
    TupleExpr,
    Unary,
    UseStmt,
    WithinStmt,
)
from .errors import (
    LoweringError,
    NonStaticIterableError,
    UnknownQubitError,
    UnrollBoundExceededError,
)
from .frontend import OperationInfo, ResolvedProgram
from .gates import DEFAULT_LIBRARY, GateLibrary
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

ALLOC_OP = "Alloc"


@dataclass
class LoweringOptions:
    max_unroll: int = 16


# --- constant folding -------------------------------------------------------


class _NotStatic(Exception):
    pass


@dataclass(frozen=True)
class _Linear:
    """Exact value of the form coef*pi + const, both rational."""

    coef: Fraction
    const: Fraction


def _fold_linear(e: Expr, env: dict) -> _Linear:
    if isinstance(e, IntLit):
        return _Linear(Fraction(0), Fraction(e.value))
    if isinstance(e, DoubleLit):
        return _Linear(Fraction(0), Fraction(e.value))
    if isinstance(e, PiCall):
        return _Linear(Fraction(1), Fraction(0))
    if isinstance(e, Name):
        v = env.get(e.ident)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise _NotStatic(e.ident)
        return _Linear(Fraction(0), Fraction(v))
    if isinstance(e, Unary) and e.op == "-":
        inner = _fold_linear(e.operand, env)
        return _Linear(-inner.coef, -inner.const)
    if isinstance(e, Binary):
        left = _fold_linear(e.left, env)
        right = _fold_linear(e.right, env)
        if e.op == "+":
            return _Linear(left.coef + right.coef, left.const + right.const)
        if e.op == "-":
            return _Linear(left.coef - right.coef, left.const - right.const)
        if e.op == "*":
            if left.coef != 0 and right.coef != 0:
                raise _NotStatic("pi*pi")
            if right.coef == 0:
                return _Linear(left.coef * right.const, left.const * right.const)
            return _Linear(right.coef * left.const, right.const * left.const)
        if e.op == "/":
            if right.coef != 0:
                raise _NotStatic("division by pi term")
            if right.const == 0:
                raise ZeroDivisionError("division by zero in gate parameter")
            return _Linear(left.coef / right.const, left.const / right.const)
    raise _NotStatic(type(e).__name__)


def _fold_float(e: Expr, env: dict) -> float:
    if isinstance(e, IntLit):
        return float(e.value)
    if isinstance(e, DoubleLit):
        return e.value
    if isinstance(e, PiCall):
        return math.pi
    if isinstance(e, Name):
        v = env.get(e.ident)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise _NotStatic(e.ident)
        return float(v)
    if isinstance(e, Unary) and e.op == "-":
        return -_fold_float(e.operand, env)
    if isinstance(e, Binary):
        left, right = _fold_float(e.left, env), _fold_float(e.right, env)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            if right == 0.0:
                raise ZeroDivisionError("division by zero in gate parameter")
            return left / right
    raise _NotStatic(type(e).__name__)


def fold_param(e: Expr, env: dict | None = None) -> GateParam:
    """Fold a gate-parameter expression.

    Exact rational-pi form when the expression is a pure multiple of PI()
    (including zero); opaque float otherwise. Exact values negate exactly,
    which is what inverse detection relies on.
    """
    env = env or {}
    try:
        lin = _fold_linear(e, env)
        if lin.const == 0:
            return GateParam(pi_multiple=lin.coef)
        if lin.coef == 0:
            return GateParam(raw=float(lin.const))
    except _NotStatic:
        pass
    try:
        return GateParam(raw=_fold_float(e, env))
    except _NotStatic as exc:
        raise LoweringError(
            f"gate parameter does not fold to a constant ({exc})", e.line, e.col
        ) from None


def fold_int(e: Expr, env: dict | None = None) -> int | None:
    """Fold to an integer constant, or None when the expression is open."""
    try:
        lin = _fold_linear(e, env or {})
    except (_NotStatic, ZeroDivisionError):
        return None
    if lin.coef != 0 or lin.const.denominator != 1:
        return None
    return int(lin.const)


# --- condition canonicalization ----------------------------------------------


_FLIP = {">": "<", ">=": "<="}


def _canon_side(e: Expr, env: dict) -> str:
    v = fold_int(e, env)
    if v is not None:
        return str(v)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Unary):
        op = "!" if e.op == "not" else "-"
        return f"{op}{_canon_side(e.operand, env)}"
    if isinstance(e, (Binary, Compare)):
        return f"({_canon_side(e.left, env)}{e.op}{_canon_side(e.right, env)})"
    if isinstance(e, Index):
        return f"{_canon_side(e.base, env)}[{_canon_side(e.index, env)}]"
    raise LoweringError(f"unsupported condition expression {type(e).__name__}", e.line, e.col)


def _atom_from_compare(e: Compare, env: dict) -> tuple[CondAtom, bool] | bool:
    """One canonical literal for a comparison, or a constant truth value."""
    lv, rv = fold_int(e.left, env), fold_int(e.right, env)
    if lv is not None and rv is not None:
        result = {
            "==": lv == rv,
            "!=": lv != rv,
            "<": lv < rv,
            "<=": lv <= rv,
            ">": lv > rv,
            ">=": lv >= rv,
        }[e.op]
        return result
    op, left, right = e.op, e.left, e.right
    polarity = True
    if op == "!=":
        op, polarity = "==", False
    if op in _FLIP:
        op = _FLIP[op]
        left, right = right, left
    ls, rs = _canon_side(left, env), _canon_side(right, env)
    if op == "==":
        # Commutative: order operands deterministically, variables first.
        ls, rs = sorted((ls, rs), key=lambda s: (s.lstrip("-").isdigit(), s))
    canon = f"{ls}{op}{rs}"
    var = cmp = const = None
    simple_left, simple_right = fold_int(left, env), fold_int(right, env)
    if isinstance(left, Name) and simple_right is not None:
        var, cmp, const = left.ident, op, simple_right
    elif isinstance(right, Name) and simple_left is not None:
        var, const = right.ident, simple_left
        cmp = {"<": ">", "<=": ">="}.get(op, op)
    return CondAtom(canon=canon, var=var, cmp=cmp, const=const), polarity


def build_condition(e: Expr, env: dict | None = None) -> Condition:
    """Canonicalize a classical boolean expression into a conjunction of atoms."""
    env = env or {}
    if isinstance(e, BoolLit):
        return Condition.true() if e.value else Condition.false()
    if isinstance(e, Compare):
        lit = _atom_from_compare(e, env)
        if isinstance(lit, bool):
            return Condition.true() if lit else Condition.false()
        atom, pol = lit
        return Condition(literals=frozenset({(atom, pol)}))
    if isinstance(e, Binary) and e.op == "and":
        return build_condition(e.left, env).conjoin(build_condition(e.right, env))
    if isinstance(e, Unary) and e.op == "not":
        return negate_condition(build_condition(e.operand, env))
    if isinstance(e, Name):
        atom = CondAtom(canon=e.ident, var=e.ident, cmp="!=", const=0)
        return Condition(literals=frozenset({(atom, True)}))
    # Disjunctions and anything else become a single opaque atom; equal
    # canonical text still compares equal between lines.
    canon = _canon_side(e, env)
    return Condition(literals=frozenset({(CondAtom(canon=canon), True)}))


def negate_condition(cond: Condition) -> Condition:
    if cond.contradictory:
        return Condition.true()
    if not cond.literals:
        return Condition.false()
    if len(cond.literals) == 1:
        ((atom, pol),) = cond.literals
        return Condition(literals=frozenset({(atom, not pol)}))
    # The negation of a conjunction is not a conjunction; fold it into one
    # opaque atom over the canonical text.
    canon = "&".join(sorted(f"{'' if pol else '!'}{a.canon}" for a, pol in cond.literals))
    return Condition(literals=frozenset({(CondAtom(canon=canon), False)}))


# --- lowering ---------------------------------------------------------------


@dataclass
class LoweringContext:
    op_name: str
    info: OperationInfo
    resolved: ResolvedProgram
    library: GateLibrary
    opts: LoweringOptions
    alloc: LineIdAllocator
    condition: Condition = field(default_factory=Condition.true)
    env: dict = field(default_factory=dict)

    def nested(self, condition: Condition | None = None, env: dict | None = None):
        return LoweringContext(
            op_name=self.op_name,
            info=self.info,
            resolved=self.resolved,
            library=self.library,
            opts=self.opts,
            alloc=self.alloc,
            condition=self.condition if condition is None else condition,
            env=self.env if env is None else env,
        )


def _qubit_ref(e: Expr, ctx: LoweringContext) -> QubitRef:
    if isinstance(e, Name):
        bound = ctx.env.get(e.ident)
        if isinstance(bound, QubitRef):
            return bound
        binding = ctx.info.qubits.get(e.ident)
        if binding is None or binding.is_array:
            raise UnknownQubitError(f"'{e.ident}' is not a qubit", e.line, e.col)
        return QubitRef(ctx.op_name, e.ident, None)
    if isinstance(e, Index) and isinstance(e.base, Name):
        binding = ctx.info.qubits.get(e.base.ident)
        if binding is None or not binding.is_array:
            raise UnknownQubitError(f"'{e.base.ident}' is not a qubit array", e.line, e.col)
        idx = fold_int(e.index, ctx.env)
        if idx is None:
            raise LoweringError(
                f"index into '{e.base.ident}' does not fold to a constant", e.line, e.col
            )
        if idx < 0 or (binding.length is not None and idx >= binding.length):
            raise UnknownQubitError(f"index {idx} out of bounds for '{e.base.ident}'", e.line, e.col)
        return QubitRef(ctx.op_name, e.base.ident, idx)
    raise UnknownQubitError("expected a qubit reference", e.line, e.col)


def _qubit_list(e: Expr, ctx: LoweringContext) -> list[QubitRef]:
    if isinstance(e, ArrayExpr):
        return [_qubit_ref(item, ctx) for item in e.items]
    if isinstance(e, Name):
        binding = ctx.info.qubits.get(e.ident)
        if binding is not None and binding.is_array:
            if binding.length is None:
                raise LoweringError(f"length of '{e.ident}' unknown", e.line, e.col)
            return [QubitRef(ctx.op_name, e.ident, i) for i in range(binding.length)]
    return [_qubit_ref(e, ctx)]


def _make_line(
    ctx: LoweringContext,
    functor: Functor,
    op_name: str,
    params: tuple[GateParam, ...],
    qcontrol: tuple[QubitRef, ...],
    target: tuple[QubitRef, ...],
    st: Statement,
) -> OperationLine:
    seen: set[QubitRef] = set()
    for q in qcontrol:
        if q in seen:
            raise LoweringError(f"duplicate control qubit {q}", st.line, st.col)
        seen.add(q)
    for t in target:
        if t in seen:
            raise LoweringError(f"target {t} also appears in controls", st.line, st.col)
    return OperationLine(
        uid=ctx.alloc.fresh(),
        label="",
        functor=functor,
        op_name=op_name,
        params=params,
        condition=ctx.condition,
        qcontrol=qcontrol,
        target=target,
        src_line=st.line,
        src_col=st.col,
    )


def lower_statement(st: Statement, ctx: LoweringContext) -> list[OperationLine]:
    """Lower one statement to its operation-line sequence."""
    if isinstance(st, IgnoredStmt):
        return []
    if isinstance(st, UseStmt):
        return _lower_use(st, ctx)
    if isinstance(st, CallStmt):
        return _lower_call(st, ctx)
    if isinstance(st, IfStmt):
        return _lower_if(st, ctx)
    if isinstance(st, ForStmt):
        return _lower_for(st, ctx)
    if isinstance(st, WithinStmt):
        return _lower_within(st, ctx)
    if isinstance(st, RepeatStmt):
        return _lower_repeat(st, ctx)
    raise LoweringError(f"cannot lower {type(st).__name__}", st.line, st.col)


def _lower_use(st: UseStmt, ctx: LoweringContext) -> list[OperationLine]:
    binding = ctx.info.qubits[st.binder]
    if binding.is_array:
        refs = tuple(QubitRef(ctx.op_name, st.binder, i) for i in range(binding.length))
    else:
        refs = (QubitRef(ctx.op_name, st.binder, None),)
    return [_make_line(ctx, Functor(), ALLOC_OP, (), (), refs, st)]


def _lower_call(st: CallStmt, ctx: LoweringContext) -> list[OperationLine]:
    name = st.name
    functor = Functor(adjoint=st.is_adjoint, controlled=st.controls is not None)
    qcontrol: list[QubitRef] = []
    if st.controls is not None:
        if isinstance(st.controls, ArrayExpr):
            qcontrol = [_qubit_ref(item, ctx) for item in st.controls.items]
        else:
            qcontrol = [_qubit_ref(st.controls, ctx)]

    if name in ctx.resolved.decls:
        callee = ctx.resolved.decls[name]
        params: list[GateParam] = []
        targets: list[QubitRef] = []
        for arg, p in zip(st.args, callee.params):
            if p.kind.base == "Qubit":
                targets.append(_qubit_ref(arg, ctx))
            elif p.kind.base == "QubitArray":
                targets.extend(_qubit_list(arg, ctx))
            else:
                params.append(fold_param(arg, ctx.env))
        return [_make_line(ctx, functor, name, tuple(params), tuple(qcontrol), tuple(targets), st)]

    gate = ctx.library.info(name)
    implicit = 0
    if name in ctx.library.aliases:
        alias = ctx.library.aliases[name]
        implicit = alias.implicit_controls
        name = alias.gate
    params = tuple(fold_param(a, ctx.env) for a in st.args[: gate.params])
    qubit_args = [_qubit_ref(a, ctx) for a in st.args[gate.params :]]
    qcontrol.extend(qubit_args[:implicit])
    targets = qubit_args[implicit:]
    if implicit and not qcontrol:
        raise LoweringError(f"'{st.name}' needs a control qubit", st.line, st.col)
    if qcontrol and not functor.controlled:
        functor = Functor(adjoint=functor.adjoint, controlled=True)
    return [_make_line(ctx, functor, name, params, tuple(qcontrol), tuple(targets), st)]


def _lower_if(st: IfStmt, ctx: LoweringContext) -> list[OperationLine]:
    cond = build_condition(st.condition, ctx.env)
    if cond.is_true():
        return _lower_body(st.then_body, ctx)
    if cond.contradictory:
        return _lower_body(st.else_body, ctx)
    lines = _lower_body(st.then_body, ctx.nested(condition=ctx.condition.conjoin(cond)))
    if st.else_body:
        neg = negate_condition(cond)
        lines += _lower_body(st.else_body, ctx.nested(condition=ctx.condition.conjoin(neg)))
    return lines


def _lower_for(st: ForStmt, ctx: LoweringContext) -> list[OperationLine]:
    values: list[object]
    it = st.iterable
    if isinstance(it, RangeExpr):
        start = fold_int(it.start, ctx.env)
        stop = fold_int(it.stop, ctx.env)
        step = 1 if it.step is None else fold_int(it.step, ctx.env)
        if start is None or stop is None or step is None:
            raise NonStaticIterableError("range bounds must be static", st.line, st.col)
        if step == 0:
            raise NonStaticIterableError("range step must be nonzero", st.line, st.col)
        values = list(range(start, stop + (1 if step > 0 else -1), step))
    elif isinstance(it, (Name, ArrayExpr)):
        try:
            values = list(_qubit_list(it, ctx))
        except (LoweringError, UnknownQubitError):
            raise NonStaticIterableError(
                "for-loop iterable must be a static range or qubit array", st.line, st.col
            ) from None
    else:
        raise NonStaticIterableError("unsupported for-loop iterable", st.line, st.col)
    if len(values) > ctx.opts.max_unroll:
        raise UnrollBoundExceededError(
            f"loop of {len(values)} iterations exceeds max unroll {ctx.opts.max_unroll}",
            st.line,
            st.col,
        )
    lines: list[OperationLine] = []
    for v in values:
        env = dict(ctx.env)
        env[st.var] = v
        lines += _lower_body(st.body, ctx.nested(env=env))
    return lines


def _lower_within(st: WithinStmt, ctx: LoweringContext) -> list[OperationLine]:
    within_lines = _lower_body(st.within_body, ctx)
    apply_lines = _lower_body(st.apply_body, ctx)
    undo = [ln.replace(uid=ctx.alloc.fresh(), functor=ln.functor.with_adjoint()) for ln in reversed(within_lines)]
    return within_lines + apply_lines + undo


def _lower_repeat(st: RepeatStmt, ctx: LoweringContext) -> list[OperationLine]:
    cond = build_condition(st.condition, ctx.env)
    lines = _lower_body(st.body, ctx)
    not_cond = negate_condition(cond)
    nested = ctx.nested(condition=ctx.condition.conjoin(not_cond))
    for _ in range(ctx.opts.max_unroll):
        lines += _lower_body(st.fixup, nested)
        lines += _lower_body(st.body, nested)
    return lines


def _lower_body(body: list[Statement], ctx: LoweringContext) -> list[OperationLine]:
    lines: list[OperationLine] = []
    for st in body:
        lines += lower_statement(st, ctx)
    return lines


# --- whole operations -------------------------------------------------------


def infer_array_lengths(decl: OperationDecl, declared_only: bool = False) -> dict[str, int]:
    """Static lengths for unsized array parameters, inferred from body indexing."""
    lengths: dict[str, int] = {}
    for p in decl.params:
        if p.kind.base != "QubitArray":
            continue
        if p.kind.length is not None:
            lengths[p.name] = p.kind.length
        elif not declared_only:
            max_idx = _max_static_index(decl.body, p.name)
            if max_idx is None:
                raise LoweringError(
                    f"cannot determine length of array parameter '{p.name}'", p.line, p.col
                )
            lengths[p.name] = max_idx + 1
    return lengths


def _max_static_index(body: list[Statement], name: str) -> int | None:
    best: int | None = None

    def visit_expr(e: Expr) -> None:
        nonlocal best
        if isinstance(e, Index) and isinstance(e.base, Name) and e.base.ident == name:
            v = fold_int(e.index)
            if v is not None:
                best = v if best is None else max(best, v)
        for f in ("base", "index", "left", "right", "operand", "start", "stop", "step", "controls"):
            sub = getattr(e, f, None)
            if isinstance(sub, Expr):
                visit_expr(sub)
        for f in ("items", "args"):
            for sub in getattr(e, f, ()) or ():
                if isinstance(sub, Expr):
                    visit_expr(sub)

    def visit_body(stmts: list[Statement]) -> None:
        for st in stmts:
            for f in ("args",):
                for sub in getattr(st, f, ()) or ():
                    visit_expr(sub)
            for f in ("condition", "iterable", "size", "controls"):
                sub = getattr(st, f, None)
                if isinstance(sub, Expr):
                    visit_expr(sub)
            for f in ("body", "then_body", "else_body", "within_body", "apply_body", "fixup"):
                sub = getattr(st, f, None)
                if isinstance(sub, list):
                    visit_body(sub)

    visit_body(body)
    return best


def operation_formals(
    decl: OperationDecl, array_lengths: dict[str, int] | None = None
) -> tuple[QubitRef, ...]:
    lengths = dict(array_lengths or {})
    formals: list[QubitRef] = []
    for p in decl.params:
        if p.kind.base == "Qubit":
            formals.append(QubitRef(decl.name, p.name, None))
        elif p.kind.base == "QubitArray":
            n = lengths.get(p.name, p.kind.length)
            if n is None:
                raise LoweringError(f"length of array parameter '{p.name}' unknown", p.line, p.col)
            formals.extend(QubitRef(decl.name, p.name, i) for i in range(n))
    return tuple(formals)


def lower_operation(
    decl: OperationDecl,
    resolved: ResolvedProgram,
    opts: LoweringOptions | None = None,
    alloc: LineIdAllocator | None = None,
    *,
    classical_env: dict | None = None,
    array_lengths: dict[str, int] | None = None,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> LoweredOperation:
    """Lower one operation body to a straight-line list of operation lines."""
    opts = opts or LoweringOptions()
    alloc = alloc or LineIdAllocator()
    lengths = dict(array_lengths) if array_lengths else infer_array_lengths(decl)
    info = resolved.infos[decl.name]
    # Array lengths fixed for this lowering override the resolver's view.
    patched = OperationInfo(
        decl=decl,
        qubits={
            name: (
                type(b)(b.name, b.is_array, lengths.get(name, b.length), b.origin)
                if b.origin == "param"
                else b
            )
            for name, b in info.qubits.items()
        },
        classical_params=info.classical_params,
        param_order=info.param_order,
    )
    ctx = LoweringContext(
        op_name=decl.name,
        info=patched,
        resolved=resolved,
        library=library,
        opts=opts,
        alloc=alloc,
        env=dict(classical_env or {}),
    )
    lines = _lower_body(decl.body, ctx)
    lines = [ln.replace(label=f"L{i}") for i, ln in enumerate(lines)]
    return LoweredOperation(
        name=decl.name,
        formals=operation_formals(decl, lengths),
        lines=tuple(lines),
        classical_params=tuple(info.classical_params),
    )


def lower_program(
    resolved: ResolvedProgram,
    opts: LoweringOptions | None = None,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> dict[str, LoweredOperation]:
    """Lower every declared operation with inferred array lengths."""
    opts = opts or LoweringOptions()
    alloc = LineIdAllocator()
    return {
        name: lower_operation(decl, resolved, opts, alloc, library=library)
        for name, decl in resolved.decls.items()
    }


def call_profile(decl: OperationDecl, line: OperationLine):
    """Array-parameter lengths implied by a call line's flattened qubit args.

    At most one unsized array parameter is supported; its length absorbs
    whatever the fixed parameters leave over.
    """
    from .errors import ArityMismatchError

    scalars = sum(1 for p in decl.params if p.kind.base == "Qubit")
    sized = {
        p.name: p.kind.length
        for p in decl.params
        if p.kind.base == "QubitArray" and p.kind.length is not None
    }
    unsized = [p.name for p in decl.params if p.kind.base == "QubitArray" and p.kind.length is None]
    fixed = scalars + sum(sized.values())
    lengths = dict(sized)
    if len(unsized) > 1:
        raise ArityMismatchError(
            f"'{decl.name}' has more than one unsized array parameter", line.src_line, line.src_col
        )
    if unsized:
        remaining = len(line.target) - fixed
        if remaining < 1:
            raise ArityMismatchError(
                f"call to '{decl.name}' passes too few qubits", line.src_line, line.src_col
            )
        lengths[unsized[0]] = remaining
    elif len(line.target) != fixed:
        raise ArityMismatchError(
            f"call to '{decl.name}' passes {len(line.target)} qubit(s), expected {fixed}",
            line.src_line,
            line.src_col,
        )
    return lengths
