"""Concrete syntax for concept units.

Grammar sketch:

    file    := (annotation annotation unit | const_attr)*
    unit    := ("instance" | "class") NAME "{" section* "}"
    section := ("private" | "protected" | "public") ":" member*
    member  := "friend" NAME ";" | attr | operation | statement
    attr    := ["const"] TYPE NAME ("," NAME)* ["=" literal] ";"

Explicit units carry @level(..) and @domain(..) annotations. Top-level
const attributes outside any unit collect into one synthetic public
unit named Globals. A const attribute without an initializer is bound
to the symbol spelled like its own name.

``parse`` never returns partial results; malformed input raises
ParseFailure carrying ParseError diagnostics, and units that parse but
break their level discipline are rejected the same way. Comments
(``/* ... */``) are discarded, so canonical fixtures carry none.
``print_canonical`` emits the single layout the fixtures are stored
in; parsing its output reproduces the input units.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import ir
from .ir import (
    ActionStmt,
    AssignStmt,
    Attribute,
    BinExpr,
    BlockStmt,
    BoolExpr,
    CallExpr,
    CallStmt,
    ConceptUnit,
    Expr,
    FieldExpr,
    IfStmt,
    IntExpr,
    Level,
    ListExpr,
    Literal,
    LocalDecl,
    NameExpr,
    NotExpr,
    NullExpr,
    Operation,
    Param,
    ReturnStmt,
    SetupStmt,
    Stmt,
    UnitKind,
    Visibility,
    WhileStmt,
)


@dataclass(frozen=True)
class SourceText:
    text: str
    origin: str = "<memory>"


@dataclass(frozen=True)
class ParseError:
    line: int
    column: int
    expected: str
    found: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: expected {self.expected}, found {self.found}"


class ParseFailure(Exception):
    """Parsing or discipline checking failed; carries the diagnostics."""

    def __init__(self, errors: Sequence[ParseError], origin: str = "<memory>"):
        self.errors = list(errors)
        self.origin = origin
        super().__init__("; ".join(f"{origin}:{e}" for e in self.errors))


# ---------------------------------------------------------------------------
# Lexer

@dataclass(frozen=True)
class _Token:
    kind: str  # "ident", "int", "eof", or the punctuation lexeme itself
    text: str
    line: int
    column: int


_PUNCT2 = ("++", "==", "!=", "<=", ">=")
_PUNCT1 = frozenset("{}()[],;:.=!<>+-@")


def _is_ident_start(ch: str) -> bool:
    return "a" <= ch <= "z" or "A" <= ch <= "Z" or ch == "_"


def _is_ident_char(ch: str) -> bool:
    return _is_ident_start(ch) or "0" <= ch <= "9"


def _lex(src: SourceText) -> list[_Token]:
    text = src.text
    tokens: list[_Token] = []
    i = 0
    line = 1
    column = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            column = 1
            continue
        if ch in " \t\r":
            i += 1
            column += 1
            continue
        if ch == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise ParseFailure(
                    [ParseError(line, column, "closing */", "end of input")], src.origin
                )
            skipped = text[i : end + 2]
            newlines = skipped.count("\n")
            if newlines:
                line += newlines
                column = len(skipped) - skipped.rfind("\n")
            else:
                column += len(skipped)
            i = end + 2
            continue
        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(text[j]):
                j += 1
            tokens.append(_Token("ident", text[i:j], line, column))
            column += j - i
            i = j
            continue
        if "0" <= ch <= "9":
            j = i
            while j < n and "0" <= text[j] <= "9":
                j += 1
            tokens.append(_Token("int", text[i:j], line, column))
            column += j - i
            i = j
            continue
        two = text[i : i + 2]
        if two in _PUNCT2:
            tokens.append(_Token(two, two, line, column))
            i += 2
            column += 2
            continue
        if ch in _PUNCT1:
            tokens.append(_Token(ch, ch, line, column))
            i += 1
            column += 1
            continue
        raise ParseFailure([ParseError(line, column, "a token", repr(ch))], src.origin)
    tokens.append(_Token("eof", "", line, column))
    return tokens


# ---------------------------------------------------------------------------
# Parser

_MAX_DEPTH = 200
_COMPARE_OPS = ("==", "!=", "<", ">", "<=", ">=")
_LEVEL_NAMES = {lv.value for lv in ir.LEVELS}


class _Parser:
    def __init__(self, tokens: list[_Token], origin: str):
        self.tokens = tokens
        self.pos = 0
        self.origin = origin
        self.depth = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def at(self, kind: str, ahead: int = 0) -> bool:
        return self.peek(ahead).kind == kind

    def at_word(self, word: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok.kind == "ident" and tok.text == word

    def take(self) -> _Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def fail(self, expected: str, tok: _Token | None = None) -> None:
        tok = tok or self.peek()
        found = tok.text if tok.kind != "eof" else "end of input"
        raise ParseFailure([ParseError(tok.line, tok.column, expected, found)], self.origin)

    def expect(self, kind: str, expected: str | None = None) -> _Token:
        if not self.at(kind):
            self.fail(expected or f"'{kind}'")
        return self.take()

    def ident(self, what: str = "an identifier") -> str:
        if not self.at("ident"):
            self.fail(what)
        return self.take().text

    def _enter(self) -> None:
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            self.fail("shallower nesting")

    def _leave(self) -> None:
        self.depth -= 1

    # -- file level

    def parse_file(self) -> tuple[ConceptUnit, ...]:
        units: list[ConceptUnit] = []
        shared: list[Attribute] = []
        pending: dict[str, str] = {}
        while not self.at("eof"):
            if self.at("@"):
                self.take()
                key_tok = self.peek()
                key = self.ident("'level' or 'domain'")
                if key not in ("level", "domain"):
                    self.fail("'level' or 'domain'", key_tok)
                self.expect("(")
                value_tok = self.peek()
                value = self.ident("an annotation value")
                if key == "level" and value not in _LEVEL_NAMES:
                    self.fail("one of I, E1, E2, E3", value_tok)
                self.expect(")")
                pending[key] = value
            elif self.at_word("const"):
                if pending:
                    self.fail("'instance' or 'class' after annotations")
                shared.extend(self.parse_attr(Visibility.PUBLIC))
            elif self.at_word("instance") or self.at_word("class"):
                units.append(self.parse_unit(pending))
                pending = {}
            else:
                self.fail("'instance', 'class', an annotation, or a shared constant")
        if pending:
            self.fail("'instance' or 'class' after annotations")
        if shared:
            units.append(
                ConceptUnit(
                    name=ir.GLOBALS_UNIT,
                    kind=UnitKind.CLASS,
                    level=Level.E2,
                    domain="numbers",
                    attributes=tuple(shared),
                )
            )
        return tuple(units)

    def parse_unit(self, pending: dict[str, str]) -> ConceptUnit:
        head = self.take()
        if "level" not in pending:
            self.fail("a preceding @level annotation", head)
        if "domain" not in pending:
            self.fail("a preceding @domain annotation", head)
        name = self.ident("a unit name")
        self.expect("{")
        attrs: list[Attribute] = []
        ops: list[Operation] = []
        friends: list[str] = []
        bare_body: list[Stmt] = []
        bare_vis: Visibility | None = None
        while not self.at("}"):
            if self.at("eof"):
                self.fail("'}'")
            if not (self._at_section_header()):
                self.fail("'private:', 'protected:', or 'public:'")
            vis = Visibility(self.take().text)
            self.take()  # the colon
            while not self.at("}") and not self._at_section_header():
                if self.at("eof"):
                    self.fail("'}'")
                if self.at_word("friend"):
                    self.take()
                    friends.append(self.ident("a friend unit name"))
                    self.expect(";")
                elif self._at_attribute():
                    attrs.extend(self.parse_attr(vis))
                elif self._at_operation():
                    ops.append(self.parse_operation(vis))
                else:
                    bare_body.append(self.parse_stmt())
                    if bare_vis is None:
                        bare_vis = vis
        self.take()  # closing brace
        if bare_body:
            ops.append(
                Operation(
                    name=ir.IMPLICIT_OP,
                    params=(),
                    returns=None,
                    visibility=bare_vis or Visibility.PRIVATE,
                    body=tuple(bare_body),
                    implicit=True,
                )
            )
        return ConceptUnit(
            name=name,
            kind=UnitKind.INSTANCE if head.text == "instance" else UnitKind.CLASS,
            level=Level(pending["level"]),
            domain=pending["domain"],
            attributes=tuple(attrs),
            operations=tuple(ops),
            friends=tuple(friends),
        )

    def _at_section_header(self) -> bool:
        return (
            self.peek().kind == "ident"
            and self.peek().text in ("private", "protected", "public")
            and self.at(":", 1)
        )

    def _at_attribute(self) -> bool:
        if self.at_word("const"):
            return True
        return (
            self.at("ident")
            and self.at("ident", 1)
            and (self.at(";", 2) or self.at(",", 2) or self.at("=", 2))
        )

    def _at_operation(self) -> bool:
        if self.at_word("void") and self.at("ident", 1) and self.at("(", 2):
            return True
        return self.at("ident") and self.at("ident", 1) and self.at("(", 2)

    # -- members

    def parse_attr(self, vis: Visibility) -> list[Attribute]:
        is_const = False
        if self.at_word("const"):
            self.take()
            is_const = True
        type_ref = self.ident("a type name")
        names = [self.ident("an attribute name")]
        while self.at(","):
            self.take()
            names.append(self.ident("an attribute name"))
        literal: Literal | None = None
        if self.at("="):
            eq = self.peek()
            if not is_const:
                self.fail("';' (an initializer requires const)", eq)
            if len(names) > 1:
                self.fail("';' (one initializer per declaration)", eq)
            self.take()
            literal = self.parse_literal()
        self.expect(";")
        out = []
        for nm in names:
            bound = literal if literal is not None else (Literal(nm) if is_const else None)
            out.append(Attribute(nm, type_ref, vis, bound))
        return out

    def parse_literal(self) -> Literal:
        if self.at("int"):
            return Literal(int(self.take().text))
        if self.at("["):
            self.take()
            symbols = []
            if not self.at("]"):
                symbols.append(self.ident("a symbol"))
                while self.at(","):
                    self.take()
                    symbols.append(self.ident("a symbol"))
            self.expect("]")
            return Literal(tuple(symbols))
        if self.at("ident"):
            return Literal(self.take().text)
        self.fail("a literal")
        raise AssertionError("unreachable")

    def parse_operation(self, vis: Visibility) -> Operation:
        if self.at_word("void"):
            self.take()
            returns = None
        else:
            returns = self.ident("a return type")
        name = self.ident("an operation name")
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                ptype = self.ident("a parameter type")
                pname = self.ident("a parameter name")
                params.append(Param(pname, ptype))
                if self.at(","):
                    self.take()
                    continue
                break
        self.expect(")")
        body = self.parse_block()
        return Operation(name, tuple(params), returns, vis, body)

    # -- statements

    def parse_block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        self._enter()
        try:
            out: list[Stmt] = []
            while not self.at("}"):
                if self.at("eof"):
                    self.fail("'}'")
                out.append(self.parse_stmt())
            self.take()
            return tuple(out)
        finally:
            self._leave()

    def parse_stmt(self) -> Stmt:
        self._enter()
        try:
            return self._parse_stmt_inner()
        finally:
            self._leave()

    def _parse_stmt_inner(self) -> Stmt:
        if self.at_word("while") and self.at("(", 1):
            self.take()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            return WhileStmt(cond, self.parse_block())
        if self.at_word("if") and self.at("(", 1):
            self.take()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_block()
            orelse: tuple[Stmt, ...] = ()
            if self.at_word("else"):
                self.take()
                orelse = self.parse_block() if self.at("{") else (self.parse_stmt(),)
            return IfStmt(cond, then, orelse)
        if self.at_word("return"):
            self.take()
            if self.at(";"):
                self.take()
                return ReturnStmt(None)
            value = self.parse_expr()
            self.expect(";")
            return ReturnStmt(value)
        if self.at("ident") and self.at("ident", 1) and self.at(";", 2):
            type_ref = self.take().text
            name = self.take().text
            self.take()
            return LocalDecl(name, type_ref)
        if self.at("ident") and self.at("++", 1):
            name = self.take().text
            self.take()
            self.expect(";")
            return AssignStmt(NameExpr(name), BinExpr("+", NameExpr(name), IntExpr(1)))
        if (
            self.at("ident")
            and self.peek().text in ir.SETUP_PREDICATES
            and self.at("(", 1)
        ):
            pred = self.take().text
            self.take()
            args: list[str] = []
            if not self.at(")"):
                args.append(self.ident("an entity name"))
                while self.at(","):
                    self.take()
                    args.append(self.ident("an entity name"))
            self.expect(")")
            self.expect(";")
            return SetupStmt(pred, tuple(args))
        if self.at("ident") and self.at("(", 1) and self._block_follows_call():
            label = self.take().text
            self.take()
            block_args: list[str] = []
            if not self.at(")"):
                block_args.append(self.ident("a name"))
                while self.at(","):
                    self.take()
                    block_args.append(self.ident("a name"))
            self.expect(")")
            return BlockStmt(label, tuple(block_args), self.parse_block())
        start = self.peek()
        expr = self.parse_expr()
        if self.at("="):
            if not isinstance(expr, (NameExpr, FieldExpr)):
                self.fail("a name or field on the left of '='", start)
            self.take()
            value = self.parse_expr()
            self.expect(";")
            return AssignStmt(expr, value)
        self.expect(";", "'=' or ';'")
        if isinstance(expr, CallExpr):
            if expr.op in ir.PRIMITIVE_VERBS:
                if expr.recv is None:
                    self.fail("a receiver for a primitive action", start)
                return ActionStmt(expr.op, expr.recv, expr.args)
            if expr.recv is None:
                return CallStmt(None, expr.op, expr.args)
            if isinstance(expr.recv, NameExpr):
                return CallStmt(expr.recv.name, expr.op, expr.args)
            self.fail("a unit or self receiver for an operation call", start)
        self.fail("a statement", start)
        raise AssertionError("unreachable")

    def _block_follows_call(self) -> bool:
        # Scan past the balanced argument list; a '{' after it marks a
        # labeled block rather than a call statement.
        k = self.pos + 1
        depth = 0
        while k < len(self.tokens):
            kind = self.tokens[k].kind
            if kind == "(":
                depth += 1
            elif kind == ")":
                depth -= 1
                if depth == 0:
                    return k + 1 < len(self.tokens) and self.tokens[k + 1].kind == "{"
            elif kind == "eof":
                return False
            k += 1
        return False

    # -- expressions

    def parse_expr(self) -> Expr:
        self._enter()
        try:
            left = self.parse_addsub()
            if self.peek().kind in _COMPARE_OPS:
                op = self.take().kind
                right = self.parse_addsub()
                return BinExpr(op, left, right)
            return left
        finally:
            self._leave()

    def parse_addsub(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            right = self.parse_unary()
            left = BinExpr(op, left, right)
        return left

    def parse_unary(self) -> Expr:
        bangs = 0
        while self.at("!"):
            self.take()
            bangs += 1
        expr = self.parse_postfix()
        for _ in range(bangs):
            expr = NotExpr(expr)
        return expr

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self.at("."):
            self.take()
            name = self.ident("a member name")
            if self.at("("):
                expr = CallExpr(expr, name, self.parse_args())
            else:
                expr = FieldExpr(expr, name)
        return expr

    def parse_args(self) -> tuple[Expr, ...]:
        self.expect("(")
        args: list[Expr] = []
        if not self.at(")"):
            args.append(self.parse_expr())
            while self.at(","):
                self.take()
                args.append(self.parse_expr())
        self.expect(")")
        return tuple(args)

    def parse_primary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            return IntExpr(int(tok.text))
        if tok.kind == "ident":
            if tok.text == "NULL":
                self.take()
                return NullExpr()
            if tok.text == "TRUE":
                self.take()
                return BoolExpr(True)
            if tok.text == "FALSE":
                self.take()
                return BoolExpr(False)
            self.take()
            if self.at("("):
                return CallExpr(None, tok.text, self.parse_args())
            return NameExpr(tok.text)
        if tok.kind == "(":
            self.take()
            expr = self.parse_expr()
            self.expect(")")
            return expr
        if tok.kind == "[":
            self.take()
            names: list[str] = []
            if not self.at("]"):
                names.append(self.ident("a symbol"))
                while self.at(","):
                    self.take()
                    names.append(self.ident("a symbol"))
            self.expect("]")
            return ListExpr(tuple(names))
        self.fail("an expression")
        raise AssertionError("unreachable")


def parse(src: SourceText | str) -> tuple[ConceptUnit, ...]:
    """Parse source text into validated concept units.

    Raises ParseFailure on syntax errors and on units that violate
    their declared level discipline.
    """
    if isinstance(src, str):
        src = SourceText(src)
    tokens = _lex(src)
    units = _Parser(tokens, src.origin).parse_file()
    problems = [diag for unit in units for diag in ir.validate(unit)]
    if problems:
        raise ParseFailure(
            [ParseError(1, 1, "a unit meeting its level discipline", str(d)) for d in problems],
            src.origin,
        )
    return units


# ---------------------------------------------------------------------------
# Canonical printer

_INDENT = "    "


def _literal_text(lit: Literal) -> str:
    if lit.is_symbols:
        return "[" + ", ".join(lit.value) + "]"
    return str(lit.value)


def _attr_line(attr: Attribute, depth: int) -> str:
    pad = _INDENT * depth
    decl = f"{attr.type_ref} {attr.name}"
    if attr.is_const:
        assert attr.const is not None
        if attr.const.is_symbol and attr.const.value == attr.name:
            return f"{pad}const {decl};"
        return f"{pad}const {decl} = {_literal_text(attr.const)};"
    return f"{pad}{decl};"


def _expr_prec(expr: Expr) -> int:
    if isinstance(expr, BinExpr):
        return 1 if expr.op in _COMPARE_OPS else 2
    if isinstance(expr, NotExpr):
        return 3
    return 4


def _expr_text(expr: Expr, min_prec: int = 0) -> str:
    if isinstance(expr, IntExpr):
        body = str(expr.value)
    elif isinstance(expr, BoolExpr):
        body = "TRUE" if expr.value else "FALSE"
    elif isinstance(expr, NullExpr):
        body = "NULL"
    elif isinstance(expr, NameExpr):
        body = expr.name
    elif isinstance(expr, ListExpr):
        body = "[" + ", ".join(expr.names) + "]"
    elif isinstance(expr, FieldExpr):
        body = f"{_expr_text(expr.recv, 4)}.{expr.name}"
    elif isinstance(expr, CallExpr):
        args = ", ".join(_expr_text(a) for a in expr.args)
        if expr.recv is None:
            body = f"{expr.op}({args})"
        else:
            body = f"{_expr_text(expr.recv, 4)}.{expr.op}({args})"
    elif isinstance(expr, NotExpr):
        body = f"!{_expr_text(expr.operand, 3)}"
    elif isinstance(expr, BinExpr):
        prec = _expr_prec(expr)
        left = _expr_text(expr.left, prec)
        right = _expr_text(expr.right, prec + 1)
        body = f"{left} {expr.op} {right}"
    else:
        raise TypeError(f"unknown expression {expr!r}")
    if _expr_prec(expr) < min_prec:
        return f"({body})"
    return body


def _is_increment(stmt: AssignStmt) -> bool:
    return (
        isinstance(stmt.target, NameExpr)
        and isinstance(stmt.value, BinExpr)
        and stmt.value.op == "+"
        and stmt.value.left == NameExpr(stmt.target.name)
        and stmt.value.right == IntExpr(1)
    )


def _stmt_lines(stmt: Stmt, depth: int) -> list[str]:
    pad = _INDENT * depth
    if isinstance(stmt, SetupStmt):
        return [f"{pad}{stmt.pred}({', '.join(stmt.args)});"]
    if isinstance(stmt, ActionStmt):
        args = ", ".join(_expr_text(a) for a in stmt.args)
        return [f"{pad}{_expr_text(stmt.recv, 4)}.{stmt.verb}({args});"]
    if isinstance(stmt, AssignStmt):
        if _is_increment(stmt):
            assert isinstance(stmt.target, NameExpr)
            return [f"{pad}{stmt.target.name}++;"]
        return [f"{pad}{_expr_text(stmt.target)} = {_expr_text(stmt.value)};"]
    if isinstance(stmt, LocalDecl):
        return [f"{pad}{stmt.type_ref} {stmt.name};"]
    if isinstance(stmt, WhileStmt):
        lines = [f"{pad}while ({_expr_text(stmt.cond)}) {{"]
        for inner in stmt.body:
            lines.extend(_stmt_lines(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, IfStmt):
        lines = [f"{pad}if ({_expr_text(stmt.cond)}) {{"]
        for inner in stmt.then:
            lines.extend(_stmt_lines(inner, depth + 1))
        if stmt.orelse:
            lines.append(f"{pad}}} else {{")
            for inner in stmt.orelse:
                lines.extend(_stmt_lines(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, CallStmt):
        args = ", ".join(_expr_text(a) for a in stmt.args)
        recv = f"{stmt.recv}." if stmt.recv is not None else ""
        return [f"{pad}{recv}{stmt.op}({args});"]
    if isinstance(stmt, ReturnStmt):
        if stmt.value is None:
            return [f"{pad}return;"]
        return [f"{pad}return {_expr_text(stmt.value)};"]
    if isinstance(stmt, BlockStmt):
        lines = [f"{pad}{stmt.label}({', '.join(stmt.args)}) {{"]
        for inner in stmt.body:
            lines.extend(_stmt_lines(inner, depth + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"unknown statement {stmt!r}")


def _operation_lines(op: Operation, depth: int) -> list[str]:
    pad = _INDENT * depth
    ret = op.returns if op.returns is not None else "void"
    params = ", ".join(f"{p.type_ref} {p.name}" for p in op.params)
    lines = [f"{pad}{ret} {op.name}({params}) {{"]
    for stmt in op.body:
        lines.extend(_stmt_lines(stmt, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _unit_lines(unit: ConceptUnit) -> list[str]:
    if unit.name == ir.GLOBALS_UNIT:
        return [_attr_line(a, 0) for a in unit.attributes]
    lines = [
        f"@level({unit.level.value})",
        f"@domain({unit.domain})",
        f"{unit.kind.value} {unit.name} {{",
    ]
    friends = list(unit.friends)
    for vis in (Visibility.PRIVATE, Visibility.PROTECTED, Visibility.PUBLIC):
        attrs = [a for a in unit.attributes if a.visibility is vis]
        named = [o for o in unit.operations if o.visibility is vis and not o.implicit]
        bare = [o for o in unit.operations if o.visibility is vis and o.implicit]
        if not (attrs or named or bare):
            continue
        lines.append(f"{_INDENT}{vis.value}:")
        for friend in friends:
            lines.append(f"{_INDENT * 2}friend {friend};")
        friends = []
        for attr in attrs:
            lines.append(_attr_line(attr, 2))
        for op in named:
            lines.extend(_operation_lines(op, 2))
        for op in bare:
            for stmt in op.body:
                lines.extend(_stmt_lines(stmt, 2))
    if friends:
        lines.append(f"{_INDENT}public:")
        for friend in friends:
            lines.append(f"{_INDENT * 2}friend {friend};")
    lines.append("}")
    return lines


def print_canonical(units: Sequence[ConceptUnit]) -> SourceText:
    """Render units in the one fixed layout used by the fixtures."""
    lines: list[str] = []
    for i, unit in enumerate(units):
        if i:
            lines.append("")
        lines.extend(_unit_lines(unit))
    text = "\n".join(lines)
    if text:
        text += "\n"
    return SourceText(text)


# ---------------------------------------------------------------------------
# Fixtures

FIXTURE_NAMES = (
    "counting_apples_i",
    "counting_apples_e1",
    "globals",
    "counting_e2",
    "counting_e3",
    "fetch_objects",
    "bus_seats",
    "conservation",
)


def fixtures_dir() -> Path:
    return Path(__file__).resolve().parent / "fixtures"


def fixture_source(name: str) -> SourceText:
    stem = name[:-3] if name.endswith(".rr") else name
    path = fixtures_dir() / f"{stem}.rr"
    if not path.is_file():
        raise KeyError(name)
    return SourceText(path.read_text(encoding="utf-8"), str(path))


def load_fixture(name: str) -> tuple[ConceptUnit, ...]:
    return parse(fixture_source(name))
