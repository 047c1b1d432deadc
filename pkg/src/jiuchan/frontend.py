"""Frontend for the supported Q# subset: lexer, recursive-descent parser,
and reference resolution.

Grammar coverage is intentionally narrow: exactly the statement forms the
lowering understands (calls with Adjoint/Controlled prefixes, qubit
allocation, for, if, conjugation, repeat), plus ``open`` directives,
attributes, and constant arithmetic. Classical-only statements (let, set,
while, ...) parse loosely and are dropped with a warning; measurement is a
hard error because the analysis has no sound rule for it. Python-style
``if cond:`` blocks with indentation are accepted as an alternate surface
syntax for ``if (cond) { ... }``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

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
    Param,
    ParamKind,
    PiCall,
    RangeExpr,
    RepeatStmt,
    SourceProgram,
    Statement,
    TupleExpr,
    Unary,
    UseStmt,
    WithinStmt,
)
from .errors import (
    Diagnostic,
    DuplicateEntryPointError,
    MissingEntryPointError,
    ParseError,
    ResolutionError,
    UnknownOperationError,
    UnknownQubitError,
    UnsupportedStatementError,
)
from .gates import DEFAULT_LIBRARY, GateLibrary

_IGNORED_KEYWORDS = ("let", "mutable", "set", "return", "while", "fail")
_CLASSICAL_TYPES = ("Int", "Double", "Bool")


# --- lexer ------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "int" | "double" | "punct" | "eof"
    text: str
    line: int
    col: int


_PUNCT2 = ("==", "!=", "<=", ">=", "..", "&&", "||")
_PUNCT1 = set("(){}[];:,.=<>+-*/@!")


def tokenize(text: str, path: str = "<source>") -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            is_double = False
            if j < n and text[j] == "." and not text.startswith("..", j):
                is_double = True
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    is_double = True
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            word = text[i:j]
            tokens.append(Token("double" if is_double else "int", word, line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if text[i : i + 2] in _PUNCT2:
            tokens.append(Token("punct", text[i : i + 2], line, col))
            i += 2
            col += 2
            continue
        if c in _PUNCT1:
            tokens.append(Token("punct", c, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# --- parser -----------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[Token], path: str, library: GateLibrary):
        self.tokens = tokens
        self.pos = 0
        self.path = path
        self.library = library
        self.warnings: list[Diagnostic] = []

    # token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.peek()
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col)
        return self.next()

    def expect_ident(self) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"expected identifier, found {t.text!r}", t.line, t.col)
        return self.next()

    def warn(self, message: str, tok: Token) -> None:
        self.warnings.append(Diagnostic("warning", message, tok.line, tok.col, self.path))

    def end_of_statement(self) -> None:
        # A semicolon is required unless the statement is flush against '}'.
        if self.accept(";"):
            return
        if self.at("}"):
            return
        t = self.peek()
        raise ParseError(f"expected ';', found {t.text!r}", t.line, t.col)

    # program structure

    def parse_program(self) -> tuple[str, list[OperationDecl]]:
        self.expect("namespace")
        namespace = self.parse_dotted_name()
        self.expect("{")
        decls: list[OperationDecl] = []
        while not self.at("}"):
            t = self.peek()
            if t.kind == "eof":
                raise ParseError("unexpected end of file inside namespace", t.line, t.col)
            if self.accept("open"):
                self.parse_dotted_name()
                self.expect(";")
                continue
            decls.append(self.parse_operation())
        self.expect("}")
        t = self.peek()
        if t.kind != "eof":
            raise ParseError("exactly one namespace per file", t.line, t.col)
        return namespace, decls

    def parse_dotted_name(self) -> str:
        parts = [self.expect_ident().text]
        while self.accept("."):
            parts.append(self.expect_ident().text)
        return ".".join(parts)

    def parse_operation(self) -> OperationDecl:
        is_entry = False
        while self.at("@"):
            at_tok = self.next()
            attr = self.expect_ident().text
            self.expect("(")
            self.expect(")")
            if attr == "EntryPoint":
                is_entry = True
            else:
                self.warn(f"attribute @{attr}() ignored", at_tok)
        t = self.peek()
        if t.text == "function":
            raise ParseError("functions are not supported in this subset", t.line, t.col)
        self.expect("operation")
        name_tok = self.expect_ident()
        if self.at("<"):
            raise ParseError("generic operations are not supported in this subset", t.line, t.col)
        self.expect("(")
        params: list[Param] = []
        while not self.at(")"):
            if params:
                self.expect(",")
            p_tok = self.expect_ident()
            self.expect(":")
            params.append(Param(p_tok.text, self.parse_type(), p_tok.line, p_tok.col))
        self.expect(")")
        self.expect(":")
        ret_tok = self.expect_ident()
        if ret_tok.text != "Unit":
            raise ParseError("operations must return Unit in this subset", ret_tok.line, ret_tok.col)
        characteristics: set[str] = set()
        if self.accept("is"):
            characteristics.add(self.expect_ident().text)
            while self.accept("+"):
                characteristics.add(self.expect_ident().text)
        body = self.parse_block()
        return OperationDecl(
            name=name_tok.text,
            params=params,
            characteristics=characteristics,
            body=body,
            is_entry=is_entry,
            line=name_tok.line,
            col=name_tok.col,
        )

    def parse_type(self) -> ParamKind:
        t = self.expect_ident()
        if t.text == "Qubit":
            if self.accept("["):
                length = None
                if not self.at("]"):
                    size_tok = self.peek()
                    if size_tok.kind != "int":
                        raise ParseError(
                            "array parameter length must be an integer literal",
                            size_tok.line,
                            size_tok.col,
                        )
                    length = int(self.next().text)
                self.expect("]")
                return ParamKind("QubitArray", length)
            return ParamKind("Qubit")
        if t.text in _CLASSICAL_TYPES:
            return ParamKind(t.text)
        raise ParseError(f"unsupported parameter type {t.text!r}", t.line, t.col)

    # statements

    def parse_block(self) -> list[Statement]:
        self.expect("{")
        body: list[Statement] = []
        while not self.at("}"):
            t = self.peek()
            if t.kind == "eof":
                raise ParseError("unexpected end of file inside block", t.line, t.col)
            st = self.parse_statement()
            if st is not None:
                body.append(st)
        self.expect("}")
        return body

    def parse_statement(self) -> Statement | None:
        t = self.peek()
        if t.text == "use":
            return self.parse_use()
        if t.text == "if":
            return self.parse_if()
        if t.text == "for":
            return self.parse_for()
        if t.text == "within":
            return self.parse_within()
        if t.text == "repeat":
            return self.parse_repeat()
        if t.text in _IGNORED_KEYWORDS:
            return self.parse_ignored()
        if t.kind == "ident" or t.text in ("Adjoint", "Controlled"):
            return self.parse_call()
        raise ParseError(f"unexpected token {t.text!r}", t.line, t.col)

    def parse_use(self) -> UseStmt:
        t = self.expect("use")
        binder = self.expect_ident().text
        self.expect("=")
        kw = self.expect_ident()
        if kw.text != "Qubit":
            raise ParseError("expected Qubit allocation", kw.line, kw.col)
        size: Expr | None = None
        if self.accept("("):
            self.expect(")")
        else:
            self.expect("[")
            size = self.parse_expr()
            self.expect("]")
        self.end_of_statement()
        return UseStmt(line=t.line, col=t.col, binder=binder, size=size)

    def parse_if(self) -> IfStmt:
        t = self.expect("if")
        condition = self.parse_expr()
        then_body = self.parse_if_body(t)
        else_body: list[Statement] = []
        if self.at("else"):
            e = self.next()
            if self.accept(":"):
                else_body = self.parse_indented_body(e)
            else:
                else_body = self.parse_block()
        return IfStmt(line=t.line, col=t.col, condition=condition, then_body=then_body, else_body=else_body)

    def parse_if_body(self, if_tok: Token) -> list[Statement]:
        if self.accept(":"):
            return self.parse_indented_body(if_tok)
        return self.parse_block()

    def parse_indented_body(self, head: Token) -> list[Statement]:
        # Python-style block: statements strictly more indented than the head
        # keyword, on later lines, up to the first dedent or '}'.
        body: list[Statement] = []
        while True:
            t = self.peek()
            if t.kind == "eof" or t.text == "}" or t.text == "else":
                break
            if t.line <= head.line or t.col <= head.col:
                break
            st = self.parse_statement()
            if st is not None:
                body.append(st)
        if not body:
            raise ParseError("empty indented block", head.line, head.col)
        return body

    def parse_for(self) -> ForStmt:
        t = self.expect("for")
        had_paren = self.accept("(")
        var = self.expect_ident().text
        self.expect("in")
        iterable = self.parse_expr()
        if had_paren:
            self.expect(")")
        body = self.parse_block()
        return ForStmt(line=t.line, col=t.col, var=var, iterable=iterable, body=body)

    def parse_within(self) -> WithinStmt:
        t = self.expect("within")
        within_body = self.parse_block()
        self.expect("apply")
        apply_body = self.parse_block()
        return WithinStmt(line=t.line, col=t.col, within_body=within_body, apply_body=apply_body)

    def parse_repeat(self) -> RepeatStmt:
        t = self.expect("repeat")
        body = self.parse_block()
        self.expect("until")
        condition = self.parse_expr()
        fixup: list[Statement] = []
        if self.at("fixup"):
            self.next()
            fixup = self.parse_block()
        else:
            self.end_of_statement()
        return RepeatStmt(line=t.line, col=t.col, body=body, condition=condition, fixup=fixup)

    def parse_ignored(self) -> IgnoredStmt:
        head = self.next()
        kind = head.text
        # Classical statement: scan it off while refusing measurements.
        depth = 0
        while True:
            t = self.peek()
            if t.kind == "eof":
                raise ParseError("unterminated statement", head.line, head.col)
            if t.kind == "ident" and t.text in self.library.forbidden and self.peek(1).text == "(":
                raise UnsupportedStatementError(
                    f"measurement ({t.text}) is not supported by the analysis",
                    t.line,
                    t.col,
                )
            if depth == 0 and t.text == ";":
                self.next()
                break
            if depth == 0 and kind == "while" and t.text == "{":
                self.skip_balanced_block()
                break
            if t.text in "([{":
                depth += 1
            elif t.text in ")]}":
                if depth == 0:
                    raise ParseError(f"unexpected {t.text!r}", t.line, t.col)
                depth -= 1
            self.next()
        self.warn(f"'{kind}' statement ignored by the analysis", head)
        return IgnoredStmt(line=head.line, col=head.col, kind=kind)

    def skip_balanced_block(self) -> None:
        self.expect("{")
        depth = 1
        while depth:
            t = self.next()
            if t.kind == "eof":
                raise ParseError("unterminated block", t.line, t.col)
            if t.text == "{":
                depth += 1
            elif t.text == "}":
                depth -= 1

    def parse_call(self) -> CallStmt:
        t = self.peek()
        is_adjoint = False
        controlled = 0
        while self.peek().text in ("Adjoint", "Controlled"):
            word = self.next().text
            if word == "Adjoint":
                is_adjoint = not is_adjoint
            else:
                controlled += 1
        if controlled > 1:
            raise ParseError("nested Controlled functors are not supported", t.line, t.col)
        name = self.parse_dotted_name().rsplit(".", 1)[-1]
        if name in self.library.forbidden:
            raise UnsupportedStatementError(
                f"measurement ({name}) is not supported by the analysis", t.line, t.col
            )
        self.expect("(")
        args: list[Expr] = []
        while not self.at(")"):
            if args:
                self.expect(",")
            args.append(self.parse_expr())
        self.expect(")")
        self.end_of_statement()
        controls: Expr | None = None
        if controlled:
            if not args:
                raise ParseError("Controlled call needs a control argument", t.line, t.col)
            controls = args[0]
            rest = args[1:]
            if len(rest) == 1 and isinstance(rest[0], TupleExpr):
                rest = list(rest[0].items)
            args = rest
        return CallStmt(
            line=t.line,
            col=t.col,
            name=name,
            args=tuple(args),
            is_adjoint=is_adjoint,
            controls=controls,
        )

    # expressions

    def parse_expr(self) -> Expr:
        e = self.parse_or()
        if self.at(".."):
            t = self.next()
            second = self.parse_or()
            if self.accept(".."):
                third = self.parse_or()
                return RangeExpr(line=t.line, col=t.col, start=e, stop=third, step=second)
            return RangeExpr(line=t.line, col=t.col, start=e, stop=second, step=None)
        return e

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.peek().text in ("or", "||"):
            t = self.next()
            e = Binary(line=t.line, col=t.col, op="or", left=e, right=self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_not()
        while self.peek().text in ("and", "&&"):
            t = self.next()
            e = Binary(line=t.line, col=t.col, op="and", left=e, right=self.parse_not())
        return e

    def parse_not(self) -> Expr:
        if self.peek().text in ("not", "!"):
            t = self.next()
            return Unary(line=t.line, col=t.col, op="not", operand=self.parse_not())
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        if self.peek().text in ("==", "!=", "<", "<=", ">", ">="):
            t = self.next()
            return Compare(line=t.line, col=t.col, op=t.text, left=e, right=self.parse_add())
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.peek().text in ("+", "-"):
            t = self.next()
            e = Binary(line=t.line, col=t.col, op=t.text, left=e, right=self.parse_mul())
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.peek().text in ("*", "/"):
            t = self.next()
            e = Binary(line=t.line, col=t.col, op=t.text, left=e, right=self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        if self.at("-"):
            t = self.next()
            return Unary(line=t.line, col=t.col, op="-", operand=self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_atom()
        while self.at("["):
            t = self.next()
            idx = self.parse_expr()
            self.expect("]")
            e = Index(line=t.line, col=t.col, base=e, index=idx)
        return e

    def parse_atom(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(line=t.line, col=t.col, value=int(t.text))
        if t.kind == "double":
            self.next()
            return DoubleLit(line=t.line, col=t.col, value=float(t.text))
        if t.text in ("true", "false"):
            self.next()
            return BoolLit(line=t.line, col=t.col, value=t.text == "true")
        if t.text == "(":
            self.next()
            items = [self.parse_expr()]
            while self.accept(","):
                items.append(self.parse_expr())
            self.expect(")")
            if len(items) == 1:
                return items[0]
            return TupleExpr(line=t.line, col=t.col, items=tuple(items))
        if t.text == "[":
            self.next()
            items: list[Expr] = []
            while not self.at("]"):
                if items:
                    self.expect(",")
                items.append(self.parse_expr())
            self.expect("]")
            return ArrayExpr(line=t.line, col=t.col, items=tuple(items))
        if t.kind == "ident":
            name = self.parse_dotted_name().rsplit(".", 1)[-1]
            if self.at("("):
                if name in self.library.forbidden:
                    raise UnsupportedStatementError(
                        f"measurement ({name}) is not supported by the analysis", t.line, t.col
                    )
                self.next()
                args: list[Expr] = []
                while not self.at(")"):
                    if args:
                        self.expect(",")
                    args.append(self.parse_expr())
                self.expect(")")
                if name == "PI" and not args:
                    return PiCall(line=t.line, col=t.col)
                return CallExpr(line=t.line, col=t.col, name=name, args=tuple(args))
            return Name(line=t.line, col=t.col, ident=name)
        raise ParseError(f"unexpected token {t.text!r} in expression", t.line, t.col)


def parse_program(src: SourceProgram, library: GateLibrary = DEFAULT_LIBRARY):
    """Parse source text into operation declarations.

    Returns ``(decls, warnings)``; raises ParseError or
    UnsupportedStatementError with line/column info on bad input.
    """
    parser = _Parser(tokenize(src.text, src.path), src.path, library)
    namespace, decls = parser.parse_program()
    src.namespace = namespace
    return decls, parser.warnings


# --- pretty printer ---------------------------------------------------------


def print_program(decls: list[OperationDecl], namespace: str = "Main") -> str:
    """Render declarations back to canonical surface syntax (brace-form ifs)."""
    out: list[str] = [f"namespace {namespace} {{"]
    for decl in decls:
        out.append("")
        if decl.is_entry:
            out.append("    @EntryPoint()")
        params = ", ".join(f"{p.name} : {_print_type(p.kind)}" for p in decl.params)
        chars = ""
        if decl.characteristics:
            chars = " is " + "+".join(sorted(decl.characteristics))
        out.append(f"    operation {decl.name}({params}) : Unit{chars} {{")
        _print_body(decl.body, out, 8)
        out.append("    }")
    out.append("}")
    return "\n".join(out) + "\n"


def _print_type(kind: ParamKind) -> str:
    if kind.base == "Qubit":
        return "Qubit"
    if kind.base == "QubitArray":
        return f"Qubit[{kind.length}]" if kind.length is not None else "Qubit[]"
    return kind.base


def _print_body(body: list[Statement], out: list[str], indent: int) -> None:
    pad = " " * indent
    for st in body:
        if isinstance(st, IgnoredStmt):
            continue
        if isinstance(st, UseStmt):
            size = f"[{print_expr(st.size)}]" if st.size is not None else "()"
            out.append(f"{pad}use {st.binder} = Qubit{size};")
        elif isinstance(st, CallStmt):
            prefix = ""
            if st.is_adjoint:
                prefix += "Adjoint "
            args = [print_expr(a) for a in st.args]
            if st.controls is not None:
                prefix += "Controlled "
                inner = f"({', '.join(args)})" if len(args) != 1 else args[0]
                out.append(f"{pad}{prefix}{st.name}({print_expr(st.controls)}, {inner});")
            else:
                out.append(f"{pad}{prefix}{st.name}({', '.join(args)});")
        elif isinstance(st, IfStmt):
            out.append(f"{pad}if ({print_expr(st.condition)}) {{")
            _print_body(st.then_body, out, indent + 4)
            if st.else_body:
                out.append(f"{pad}}} else {{")
                _print_body(st.else_body, out, indent + 4)
            out.append(f"{pad}}}")
        elif isinstance(st, ForStmt):
            out.append(f"{pad}for {st.var} in {print_expr(st.iterable)} {{")
            _print_body(st.body, out, indent + 4)
            out.append(f"{pad}}}")
        elif isinstance(st, WithinStmt):
            out.append(f"{pad}within {{")
            _print_body(st.within_body, out, indent + 4)
            out.append(f"{pad}}} apply {{")
            _print_body(st.apply_body, out, indent + 4)
            out.append(f"{pad}}}")
        elif isinstance(st, RepeatStmt):
            out.append(f"{pad}repeat {{")
            _print_body(st.body, out, indent + 4)
            if st.fixup:
                out.append(f"{pad}}} until {print_expr(st.condition)} fixup {{")
                _print_body(st.fixup, out, indent + 4)
                out.append(f"{pad}}}")
            else:
                out.append(f"{pad}}} until {print_expr(st.condition)};")
        else:
            raise TypeError(f"unprintable statement {type(st).__name__}")


def print_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, DoubleLit):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, PiCall):
        return "PI()"
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, Index):
        return f"{print_expr(e.base)}[{print_expr(e.index)}]"
    if isinstance(e, Unary):
        op = "not " if e.op == "not" else "-"
        return f"{op}({print_expr(e.operand)})"
    if isinstance(e, (Binary, Compare)):
        return f"({print_expr(e.left)} {e.op} {print_expr(e.right)})"
    if isinstance(e, TupleExpr):
        return "(" + ", ".join(print_expr(x) for x in e.items) + ")"
    if isinstance(e, ArrayExpr):
        return "[" + ", ".join(print_expr(x) for x in e.items) + "]"
    if isinstance(e, RangeExpr):
        if e.step is not None:
            return f"{print_expr(e.start)}..{print_expr(e.step)}..{print_expr(e.stop)}"
        return f"{print_expr(e.start)}..{print_expr(e.stop)}"
    if isinstance(e, CallExpr):
        return f"{e.name}(" + ", ".join(print_expr(x) for x in e.args) + ")"
    raise TypeError(f"unprintable expression {type(e).__name__}")


# --- resolver ---------------------------------------------------------------


@dataclass
class QubitBinding:
    name: str
    is_array: bool
    length: int | None  # static length where known
    origin: str  # "param" | "use" | "loop"


@dataclass
class OperationInfo:
    decl: OperationDecl
    qubits: dict[str, QubitBinding] = field(default_factory=dict)
    classical_params: dict[str, str] = field(default_factory=dict)
    param_order: list[str] = field(default_factory=list)


@dataclass
class ResolvedProgram:
    source: SourceProgram
    decls: dict[str, OperationDecl]
    infos: dict[str, OperationInfo]
    entry: str
    order: list[str]
    warnings: list[Diagnostic] = field(default_factory=list)


class _Resolver:
    def __init__(self, decls: list[OperationDecl], library: GateLibrary):
        self.decls = {d.name: d for d in decls}
        self.library = library
        if len(self.decls) != len(decls):
            seen: set[str] = set()
            for d in decls:
                if d.name in seen:
                    raise ResolutionError(
                        f"operation '{d.name}' declared more than once", d.line, d.col
                    )
                seen.add(d.name)

    def run(self, src: SourceProgram, entry_override: str | None) -> ResolvedProgram:
        infos: dict[str, OperationInfo] = {}
        for decl in self.decls.values():
            infos[decl.name] = self.resolve_operation(decl)
        entry = self.pick_entry(entry_override)
        return ResolvedProgram(
            source=src,
            decls=self.decls,
            infos=infos,
            entry=entry,
            order=list(self.decls),
        )

    def pick_entry(self, override: str | None) -> str:
        if override is not None:
            if override not in self.decls:
                raise UnknownOperationError(f"entry operation '{override}' not declared")
            return override
        entries = [d for d in self.decls.values() if d.is_entry]
        if not entries:
            raise MissingEntryPointError("no @EntryPoint() operation found")
        if len(entries) > 1:
            second = entries[1]
            raise DuplicateEntryPointError(
                "more than one @EntryPoint() operation", second.line, second.col
            )
        return entries[0].name

    def resolve_operation(self, decl: OperationDecl) -> OperationInfo:
        info = OperationInfo(decl=decl)
        seen: set[str] = set()
        for p in decl.params:
            if p.name in seen:
                raise ResolutionError(
                    f"duplicate parameter '{p.name}' in '{decl.name}'", p.line, p.col
                )
            seen.add(p.name)
            info.param_order.append(p.name)
            if p.kind.base == "Qubit":
                info.qubits[p.name] = QubitBinding(p.name, False, 1, "param")
            elif p.kind.base == "QubitArray":
                info.qubits[p.name] = QubitBinding(p.name, True, p.kind.length, "param")
            else:
                info.classical_params[p.name] = p.kind.base
        self.resolve_body(decl.body, info, top_level=True, int_vars=set())
        return info

    def resolve_body(
        self,
        body: list[Statement],
        info: OperationInfo,
        top_level: bool,
        int_vars: set[str],
    ) -> None:
        for st in body:
            if isinstance(st, UseStmt):
                if not top_level:
                    raise ResolutionError(
                        "qubit allocation is only supported at operation body top level",
                        st.line,
                        st.col,
                    )
                if st.binder in info.qubits or st.binder in info.classical_params:
                    raise ResolutionError(f"'{st.binder}' already bound", st.line, st.col)
                length = None
                is_array = st.size is not None
                if is_array:
                    length = _fold_static_int(st.size)
                    if length is None or length < 1:
                        raise ResolutionError(
                            "allocation size must be a positive compile-time integer constant",
                            st.line,
                            st.col,
                        )
                info.qubits[st.binder] = QubitBinding(st.binder, is_array, length or 1, "use")
            elif isinstance(st, CallStmt):
                self.resolve_call(st, info, int_vars)
            elif isinstance(st, IfStmt):
                self.resolve_condition(st.condition, info, int_vars, st)
                self.resolve_body(st.then_body, info, False, int_vars)
                self.resolve_body(st.else_body, info, False, int_vars)
            elif isinstance(st, ForStmt):
                loop_kind = self.resolve_iterable(st.iterable, info, int_vars, st)
                shadowed = st.var in info.qubits
                if loop_kind == "qubit":
                    info.qubits[st.var] = QubitBinding(st.var, False, 1, "loop")
                    self.resolve_body(st.body, info, False, int_vars)
                    if not shadowed:
                        del info.qubits[st.var]
                else:
                    self.resolve_body(st.body, info, False, int_vars | {st.var})
            elif isinstance(st, WithinStmt):
                self.resolve_body(st.within_body, info, False, int_vars)
                self.resolve_body(st.apply_body, info, False, int_vars)
            elif isinstance(st, RepeatStmt):
                self.resolve_body(st.body, info, False, int_vars)
                self.resolve_condition(st.condition, info, int_vars, st)
                self.resolve_body(st.fixup, info, False, int_vars)
            elif isinstance(st, IgnoredStmt):
                continue
            else:
                raise ResolutionError(f"unsupported statement {type(st).__name__}", st.line, st.col)

    def resolve_iterable(
        self, e: Expr, info: OperationInfo, int_vars: set[str], st: Statement
    ) -> str:
        if isinstance(e, RangeExpr):
            return "int"
        if isinstance(e, Name) and e.ident in info.qubits and info.qubits[e.ident].is_array:
            return "qubit"
        if isinstance(e, ArrayExpr):
            for item in e.items:
                self.resolve_qubit_ref(item, info, int_vars)
            return "qubit"
        raise ResolutionError("for-loop iterable must be a range or a qubit array", st.line, st.col)

    def resolve_call(self, st: CallStmt, info: OperationInfo, int_vars: set[str]) -> None:
        name = st.name
        if name in self.decls:
            callee = self.decls[name]
            if len(st.args) != len(callee.params):
                raise ResolutionError(
                    f"'{name}' expects {len(callee.params)} argument(s), got {len(st.args)}",
                    st.line,
                    st.col,
                )
            for arg, param in zip(st.args, callee.params):
                if param.kind.base == "Qubit":
                    self.resolve_qubit_ref(arg, info, int_vars)
                elif param.kind.base == "QubitArray":
                    self.resolve_qubit_array_arg(arg, info, int_vars)
                # classical arguments are folded at lowering time
        elif self.library.is_fundamental(name):
            gate = self.library.info(name)
            implicit = self.library.aliases[name].implicit_controls if name in self.library.aliases else 0
            n_classical = gate.params
            n_qubits = gate.qubits + implicit
            if len(st.args) != n_classical + n_qubits:
                raise ResolutionError(
                    f"gate '{name}' expects {n_classical + n_qubits} argument(s), got {len(st.args)}",
                    st.line,
                    st.col,
                )
            for arg in st.args[n_classical:]:
                self.resolve_qubit_ref(arg, info, int_vars)
        else:
            raise UnknownOperationError(f"unknown operation '{name}'", st.line, st.col)
        if st.controls is not None:
            for ref in _control_items(st.controls):
                self.resolve_qubit_ref(ref, info, int_vars)

    def resolve_qubit_array_arg(self, e: Expr, info: OperationInfo, int_vars: set[str]) -> None:
        if isinstance(e, Name):
            binding = info.qubits.get(e.ident)
            if binding is None or not binding.is_array:
                raise UnknownQubitError(f"'{e.ident}' is not a qubit array", e.line, e.col)
            return
        if isinstance(e, ArrayExpr):
            for item in e.items:
                self.resolve_qubit_ref(item, info, int_vars)
            return
        raise UnknownQubitError("expected a qubit array argument", e.line, e.col)

    def resolve_qubit_ref(self, e: Expr, info: OperationInfo, int_vars: set[str]) -> None:
        if isinstance(e, Name):
            binding = info.qubits.get(e.ident)
            if binding is None:
                raise UnknownQubitError(f"unknown qubit '{e.ident}'", e.line, e.col)
            if binding.is_array:
                raise UnknownQubitError(
                    f"'{e.ident}' is an array; index it to name a qubit", e.line, e.col
                )
            return
        if isinstance(e, Index) and isinstance(e.base, Name):
            binding = info.qubits.get(e.base.ident)
            if binding is None:
                raise UnknownQubitError(f"unknown qubit '{e.base.ident}'", e.line, e.col)
            if not binding.is_array:
                raise UnknownQubitError(f"'{e.base.ident}' is not an array", e.line, e.col)
            idx = _fold_static_int(e.index)
            if idx is not None:
                if idx < 0 or (binding.length is not None and idx >= binding.length):
                    raise UnknownQubitError(
                        f"index {idx} out of bounds for '{e.base.ident}'", e.line, e.col
                    )
            else:
                self.check_index_vars(e.index, info, int_vars)
            return
        raise UnknownQubitError("expected a qubit reference", e.line, e.col)

    def check_index_vars(self, e: Expr, info: OperationInfo, int_vars: set[str]) -> None:
        if isinstance(e, Name):
            if e.ident not in int_vars and info.classical_params.get(e.ident) != "Int":
                raise UnknownQubitError(f"index uses unknown variable '{e.ident}'", e.line, e.col)
        elif isinstance(e, Unary):
            self.check_index_vars(e.operand, info, int_vars)
        elif isinstance(e, (Binary, Compare)):
            self.check_index_vars(e.left, info, int_vars)
            self.check_index_vars(e.right, info, int_vars)
        elif isinstance(e, (IntLit,)):
            return
        else:
            raise UnknownQubitError("unsupported index expression", e.line, e.col)

    def resolve_condition(
        self, e: Expr, info: OperationInfo, int_vars: set[str], st: Statement
    ) -> None:
        for name in _expr_names(e):
            if (
                name not in int_vars
                and name not in info.classical_params
                and name not in info.qubits
            ):
                raise ResolutionError(f"unknown variable '{name}' in condition", st.line, st.col)


def _control_items(e: Expr) -> list[Expr]:
    if isinstance(e, ArrayExpr):
        return list(e.items)
    return [e]


def _expr_names(e: Expr) -> set[str]:
    if isinstance(e, Name):
        return {e.ident}
    if isinstance(e, Unary):
        return _expr_names(e.operand)
    if isinstance(e, (Binary, Compare)):
        return _expr_names(e.left) | _expr_names(e.right)
    if isinstance(e, Index):
        return _expr_names(e.base) | _expr_names(e.index)
    if isinstance(e, (TupleExpr, ArrayExpr)):
        out: set[str] = set()
        for item in e.items:
            out |= _expr_names(item)
        return out
    return set()


def _fold_static_int(e: Expr) -> int | None:
    """Fold an expression of integer literals, or None if it is not static."""
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Unary) and e.op == "-":
        v = _fold_static_int(e.operand)
        return None if v is None else -v
    if isinstance(e, Binary):
        left, right = _fold_static_int(e.left), _fold_static_int(e.right)
        if left is None or right is None:
            return None
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if e.op == "/":
            return None if right == 0 else left // right
    return None


def resolve_references(
    decls: list[OperationDecl],
    src: SourceProgram | None = None,
    *,
    entry: str | None = None,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> ResolvedProgram:
    """Bind every qubit and call reference; identify the entry point.

    Raises UnknownQubitError / UnknownOperationError / MissingEntryPointError /
    DuplicateEntryPointError on failure. After success every reference in the
    AST is bound.
    """
    if src is None:
        src = SourceProgram(path="<memory>", text="", namespace="")
    return _Resolver(decls, library).run(src, entry)


def load_program(
    text: str,
    path: str = "<source>",
    *,
    entry: str | None = None,
    library: GateLibrary = DEFAULT_LIBRARY,
) -> ResolvedProgram:
    """Parse and resolve in one step."""
    src = SourceProgram(path=path, text=text)
    decls, warnings = parse_program(src, library)
    resolved = resolve_references(decls, src, entry=entry, library=library)
    resolved.warnings = warnings
    return resolved
