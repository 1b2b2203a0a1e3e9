"""Terms, types, concrete syntax, and capture-avoiding substitution.

Grammar (lowest precedence first)::

    term   ::= \\x:T. term | let x = term in term | if term then term else term
             | eq (';' term)?
    eq     ::= pre ('==' pre)?
    pre    ::= up[R] pre | dn[R] pre | as[R] pre | up[R]^[R] pre | dn[R]^[R] pre
             | check pre | fix pre | {R} pre | app
    app    ::= atom atom*
    atom   ::= x | "str" | int | () | true | false | [term] | (term)

A prefix operator whose operand is a binder form (lambda, let, if) takes the
whole binder, so ``{E} \\g:T. M`` guards the abstraction.  ``as[R] M`` is sugar
for ``dn[0] (up[R] M)`` and ``M ; N`` for ``let _ = M in N``.

A source file is a sequence of ``role NAME = ROLE`` and ``def name = term``
declarations followed by an optional main term; ``//`` starts a comment.
A declaration ends before the next token that starts in column 1, so its
continuation lines must be indented; the main term runs to the end of the
file.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Union

from .roles import (BOT, DN, UP, RoleError, RoleExpr, RoleModifier, RoleParser,
                    print_role)


class ParseError(Exception):
    def __init__(self, message, line=None, col=None):
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(where + message)
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

BASE_NAMES = ("Unit", "Int", "Str", "Bool")


@dataclass(frozen=True)
class Base:
    name: str


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class GuardT:
    role: RoleExpr
    body: "Type"


@dataclass(frozen=True)
class Comp:
    effect: RoleExpr
    body: "Type"


Type = Union[Base, Arrow, GuardT, Comp]

UNIT_T = Base("Unit")
INT_T = Base("Int")
STR_T = Base("Str")
BOOL_T = Base("Bool")


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnitVal:
    """The literal ``()``."""

    def __repr__(self):
        return "UnitVal()"


UNIT = UnitVal()


@dataclass(frozen=True, eq=False)
class BaseVal:
    value: object  # str, int, bool, or UNIT

    # bool is an int subclass; keep True and 1 apart
    def __eq__(self, other):
        return (isinstance(other, BaseVal) and type(self.value) is type(other.value)
                and self.value == other.value)

    def __hash__(self):
        return hash((type(self.value).__name__, self.value))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Abs:
    var: str
    annot: Type
    body: "Term"


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"


@dataclass(frozen=True)
class Fix:
    body: "Term"


@dataclass(frozen=True)
class Guard:
    role: RoleExpr
    body: "Term"


@dataclass(frozen=True)
class Check:
    body: "Term"


@dataclass(frozen=True)
class Unit:
    """The computation block ``[M]``."""
    body: "Term"


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Mod:
    mod: RoleModifier
    body: "Term"


@dataclass(frozen=True)
class If:
    cond: "Term"
    then: "Term"
    else_: "Term"


@dataclass(frozen=True)
class StrEq:
    left: "Term"
    right: "Term"


Term = Union[BaseVal, Var, Abs, App, Fix, Guard, Check, Unit, Let, Mod, If, StrEq]

VALUE_FORMS = (BaseVal, Var, Abs, Guard, Unit)


def is_value(t: Term) -> bool:
    return isinstance(t, VALUE_FORMS)


def base_eq(a: BaseVal, b: BaseVal) -> bool:
    return type(a.value) is type(b.value) and a.value == b.value


def up(role, body, check=None):
    return Mod(RoleModifier(UP, role, check), body)


def dn(role, body, check=None):
    return Mod(RoleModifier(DN, role, check), body)


def as_role(role, body):
    return dn(BOT, up(role, body))


def seq(first, second, var="_"):
    return Let(var, first, second)


# ---------------------------------------------------------------------------
# Free variables, substitution, alpha-equivalence
# ---------------------------------------------------------------------------

def children(t: Term) -> list[Term]:
    match t:
        case Abs(_, _, b) | Fix(b) | Guard(_, b) | Check(b) | Unit(b) | Mod(_, b):
            return [b]
        case App(f, a):
            return [f, a]
        case Let(_, m, n):
            return [m, n]
        case If(c, a, b):
            return [c, a, b]
        case StrEq(a, b):
            return [a, b]
    return []


def free_vars(t: Term) -> frozenset[str]:
    match t:
        case Var(x):
            return frozenset((x,))
        case Abs(x, _, b):
            return free_vars(b) - {x}
        case Let(x, m, n):
            return free_vars(m) | (free_vars(n) - {x})
    out = frozenset()
    for c in children(t):
        out |= free_vars(c)
    return out


def all_names(t: Term) -> set[str]:
    out = set()
    match t:
        case Var(x) | Abs(x, _, _) | Let(x, _, _):
            out.add(x)
    for c in children(t):
        out |= all_names(c)
    return out


def fresh_name(base: str, avoid) -> str:
    stem = base.rstrip("0123456789") or "x"
    for i in itertools.count(1):
        cand = f"{stem}{i}"
        if cand not in avoid:
            return cand


def subst(body: Term, x: str, replacement: Term) -> Term:
    """Capture-avoiding ``body[replacement/x]``."""
    fv = free_vars(replacement)
    return _subst(body, x, replacement, fv)


def _subst(t: Term, x: str, n: Term, fv: frozenset[str]) -> Term:
    match t:
        case Var(y):
            return n if y == x else t
        case BaseVal():
            return t
        case Abs(y, ty, b):
            if y == x or x not in free_vars(b):
                return t
            if y in fv:
                z = fresh_name(y, fv | free_vars(b) | {x})
                b = _subst(b, y, Var(z), frozenset((z,)))
                y = z
            return Abs(y, ty, _subst(b, x, n, fv))
        case Let(y, m, b):
            m = _subst(m, x, n, fv)
            if y == x or x not in free_vars(b):
                return Let(y, m, b)
            if y in fv:
                z = fresh_name(y, fv | free_vars(b) | {x})
                b = _subst(b, y, Var(z), frozenset((z,)))
                y = z
            return Let(y, m, _subst(b, x, n, fv))
        case App(f, a):
            return App(_subst(f, x, n, fv), _subst(a, x, n, fv))
        case Fix(b):
            return Fix(_subst(b, x, n, fv))
        case Guard(r, b):
            return Guard(r, _subst(b, x, n, fv))
        case Check(b):
            return Check(_subst(b, x, n, fv))
        case Unit(b):
            return Unit(_subst(b, x, n, fv))
        case Mod(m, b):
            return Mod(m, _subst(b, x, n, fv))
        case If(c, a, b):
            return If(_subst(c, x, n, fv), _subst(a, x, n, fv), _subst(b, x, n, fv))
        case StrEq(a, b):
            return StrEq(_subst(a, x, n, fv), _subst(b, x, n, fv))
    raise TypeError(f"not a term: {t!r}")


def alpha_eq(t1: Term, t2: Term, role_eq=None, type_eq=None) -> bool:
    """Alpha-equivalence; roles and types compare with ``==`` unless overridden."""
    role_eq = role_eq or (lambda a, b: a == b)
    type_eq = type_eq or (lambda a, b: a == b)

    def mod_eq(m1, m2):
        if m1.direction != m2.direction or not role_eq(m1.role, m2.role):
            return False
        if (m1.check is None) != (m2.check is None):
            return False
        return m1.check is None or role_eq(m1.check, m2.check)

    def go(a, b, env1, env2, depth):
        match a, b:
            case Var(x), Var(y):
                return env1.get(x, x) == env2.get(y, y)
            case BaseVal(), BaseVal():
                return base_eq(a, b)
            case Abs(x, s, m), Abs(y, u, n):
                k = f"#{depth}"
                return type_eq(s, u) and go(m, n, {**env1, x: k}, {**env2, y: k}, depth + 1)
            case Let(x, m1, n1), Let(y, m2, n2):
                k = f"#{depth}"
                return (go(m1, m2, env1, env2, depth)
                        and go(n1, n2, {**env1, x: k}, {**env2, y: k}, depth + 1))
            case Guard(r1, m), Guard(r2, n):
                return role_eq(r1, r2) and go(m, n, env1, env2, depth)
            case Mod(m1, m), Mod(m2, n):
                return mod_eq(m1, m2) and go(m, n, env1, env2, depth)
        if type(a) is not type(b):
            return False
        ca, cb = children(a), children(b)
        return len(ca) == len(cb) and all(
            go(x, y, env1, env2, depth) for x, y in zip(ca, cb))

    return go(t1, t2, {}, {}, 0)


def term_size(t: Term) -> int:
    return 1 + sum(term_size(c) for c in children(t))


# ---------------------------------------------------------------------------
# Sublanguage
# ---------------------------------------------------------------------------

def is_sublanguage(t: Term) -> bool:
    """Does ``t`` lie in the fragment where values and terms are disjoint?

    Values: base, variable, ``\\x. M`` (M a sublanguage term), ``{R} v``.
    Terms: ``[v]``, ``v v``, ``fix v``, ``check v``, ``let x = M in N``,
    ``mod M``.  Effect-free ``==`` on values counts as a value; ``if`` is not
    part of the fragment.
    """
    return _sub_term(t)


def _sub_value(v: Term) -> bool:
    match v:
        case BaseVal() | Var():
            return True
        case Abs(_, _, b):
            return _sub_term(b)
        case Guard(_, b):
            return _sub_value(b)
        case StrEq(a, b):
            return _sub_value(a) and _sub_value(b)
    return False


def _sub_term(t: Term) -> bool:
    match t:
        case Unit(v) | Fix(v) | Check(v):
            return _sub_value(v)
        case App(f, a):
            return _sub_value(f) and _sub_value(a)
        case Let(_, m, n):
            return _sub_term(m) and _sub_term(n)
        case Mod(_, m):
            return _sub_term(m)
    return False


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

KEYWORDS = {"let", "in", "if", "then", "else", "check", "fix", "up", "dn", "as",
            "true", "false", "def", "role", "amp"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<int>-?[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>->|==|\(\)|[\\.:;=\[\]{}()^!&|])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Token]:
    out = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            out.append(Token(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    return out


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class Parser:
    def __init__(self, src: str, role_aliases: dict[str, RoleExpr] | None = None):
        self.toks = tokenize(src)
        self.pos = 0
        self.limit = len(self.toks)
        self.role_aliases = dict(role_aliases or {})

    # -- token helpers
    def peek(self, k=0) -> Token | None:
        i = self.pos + k
        return self.toks[i] if i < self.limit else None

    def at(self, text, k=0) -> bool:
        tok = self.peek(k)
        return tok is not None and tok.text == text and tok.kind in ("op", "id")

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        if tok is None:
            last = self.toks[-1] if self.toks else None
            if last is None:
                raise ParseError(msg + " (at end of input)", 1, 1)
            raise ParseError(msg + " (at end of input)", last.line, last.col + len(last.text))
        raise ParseError(msg + f" near {tok.text!r}", tok.line, tok.col)

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            self.error("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.next()

    def ident(self, what="identifier") -> str:
        tok = self.peek()
        if tok is None or tok.kind != "id" or tok.text in KEYWORDS:
            self.error(f"expected {what}")
        self.pos += 1
        return tok.text

    # -- roles
    def role(self, close: str) -> RoleExpr:
        start = self.pos
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                self.error(f"unterminated role, expected {close!r}")
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                depth -= 1
            elif tok.text == close and depth == 0:
                break
            self.pos += 1
        texts = []
        for tok in self.toks[start:self.pos]:
            texts.append("(" if tok.text == "()" else tok.text)
            if tok.text == "()":
                texts.append(")")
        if not texts:
            self.error("empty role")
        rp = RoleParser(texts, self.role_aliases)
        try:
            r = rp.parse()
            if rp.peek() is not None:
                raise RoleError(f"trailing {rp.peek()!r} in role")
        except RoleError as e:
            tok = self.toks[start]
            raise ParseError(str(e), tok.line, tok.col) from None
        self.expect(close)
        return r

    def bracket_role(self) -> RoleExpr:
        self.expect("[")
        return self.role("]")

    # -- types
    def type_(self) -> Type:
        t = self.type_prefix()
        if self.at("->"):
            self.next()
            return Arrow(t, self.type_())
        return t

    def type_prefix(self) -> Type:
        if self.at("{"):
            self.next()
            r = self.role("}")
            return GuardT(r, self.type_prefix())
        if self.at("["):
            self.next()
            r = self.role("]")
            return Comp(r, self.type_prefix())
        if self.at("("):
            self.next()
            t = self.type_()
            self.expect(")")
            return t
        tok = self.peek()
        if tok is not None and tok.kind == "id" and tok.text in BASE_NAMES:
            self.next()
            return Base(tok.text)
        if self.at("()"):
            self.next()
            return UNIT_T
        self.error("expected a type")

    # -- terms
    def term(self) -> Term:
        if self.at("\\"):
            self.next()
            x = self.ident("parameter name")
            self.expect(":")
            ty = self.type_()
            self.expect(".")
            return Abs(x, ty, self.term())
        if self.at("let"):
            self.next()
            x = self.ident("bound name")
            self.expect("=")
            m = self.term()
            self.expect("in")
            return Let(x, m, self.term())
        if self.at("if"):
            self.next()
            c = self.term()
            self.expect("then")
            a = self.term()
            self.expect("else")
            return If(c, a, self.term())
        t = self.eq()
        if self.at(";"):
            self.next()
            return seq(t, self.term())
        return t

    def eq(self) -> Term:
        t = self.pre()
        if self.at("=="):
            self.next()
            return StrEq(t, self.pre())
        return t

    def pre_operand(self) -> Term:
        if self.at("\\") or self.at("let") or self.at("if"):
            return self.term()
        return self.pre()

    def modifier(self, direction) -> RoleModifier:
        r = self.bracket_role()
        check = None
        if self.at("^"):
            self.next()
            check = self.bracket_role()
        return RoleModifier(direction, r, check)

    def pre(self) -> Term:
        if self.at("up") or self.at("dn"):
            direction = UP if self.next().text == "up" else DN
            m = self.modifier(direction)
            return Mod(m, self.pre_operand())
        if self.at("as"):
            self.next()
            r = self.bracket_role()
            return as_role(r, self.pre_operand())
        if self.at("check"):
            self.next()
            return Check(self.pre_operand())
        if self.at("fix"):
            self.next()
            return Fix(self.pre_operand())
        if self.at("{"):
            self.next()
            r = self.role("}")
            return Guard(r, self.pre_operand())
        return self.app()

    def starts_atom(self) -> bool:
        tok = self.peek()
        if tok is None:
            return False
        if tok.kind in ("str", "int"):
            return True
        if tok.kind == "id":
            return tok.text not in KEYWORDS or tok.text in ("true", "false")
        return tok.text in ("(", "()", "[")

    def app(self) -> Term:
        if not self.starts_atom():
            self.error("expected a term")
        t = self.atom()
        while self.starts_atom():
            t = App(t, self.atom())
        return t

    def atom(self) -> Term:
        tok = self.next()
        if tok.kind == "str":
            return BaseVal(_unescape(tok.text[1:-1]))
        if tok.kind == "int":
            return BaseVal(int(tok.text))
        if tok.text == "()":
            return BaseVal(UNIT)
        if tok.text == "true":
            return BaseVal(True)
        if tok.text == "false":
            return BaseVal(False)
        if tok.text == "[":
            t = self.term()
            self.expect("]")
            return Unit(t)
        if tok.text == "(":
            t = self.term()
            self.expect(")")
            return t
        if tok.kind == "id":
            return Var(tok.text)
        self.error("expected a term", tok)


def _unescape(s: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), s)


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def freshen(t: Term, taken: set[str] | None = None) -> Term:
    """Rename binders so that all bound names are distinct and differ from free ones."""
    taken = set(free_vars(t)) if taken is None else taken

    def go(t, ren):
        match t:
            case Var(x):
                return Var(ren.get(x, x))
            case Abs(x, ty, b):
                y = x if x not in taken else fresh_name(x, taken)
                taken.add(y)
                return Abs(y, ty, go(b, {**ren, x: y}))
            case Let(x, m, b):
                m = go(m, ren)
                y = x if x not in taken else fresh_name(x, taken)
                taken.add(y)
                return Let(y, m, go(b, {**ren, x: y}))
            case BaseVal():
                return t
            case App(f, a):
                return App(go(f, ren), go(a, ren))
            case Fix(b):
                return Fix(go(b, ren))
            case Guard(r, b):
                return Guard(r, go(b, ren))
            case Check(b):
                return Check(go(b, ren))
            case Unit(b):
                return Unit(go(b, ren))
            case Mod(m, b):
                return Mod(m, go(b, ren))
            case If(c, a, b):
                return If(go(c, ren), go(a, ren), go(b, ren))
            case StrEq(a, b):
                return StrEq(go(a, ren), go(b, ren))
        raise TypeError(f"not a term: {t!r}")

    return go(t, {})


def parse_term(src: str, role_aliases: dict[str, RoleExpr] | None = None) -> Term:
    """Parse a single term; binders come back alpha-freshened."""
    p = Parser(src, role_aliases)
    t = p.term()
    if p.peek() is not None:
        p.error("unexpected trailing input")
    return freshen(t)


def parse_type(src: str, role_aliases: dict[str, RoleExpr] | None = None) -> Type:
    p = Parser(src, role_aliases)
    t = p.type_()
    if p.peek() is not None:
        p.error("unexpected trailing input")
    return t


# ---------------------------------------------------------------------------
# Programs: role aliases, definitions, main term
# ---------------------------------------------------------------------------

@dataclass
class Program:
    roles: dict[str, RoleExpr] = field(default_factory=dict)
    defs: dict[str, Term] = field(default_factory=dict)
    main: Term | None = None

    def resolve(self, name: str) -> Term:
        return self.defs[name]

    def role(self, src: str) -> RoleExpr:
        """Parse a role using this program's aliases."""
        from .roles import parse_role
        return parse_role(src, self.roles)


def parse_program(src: str, extra_defs: dict[str, Term] | None = None) -> Program:
    """Parse a ``.lr`` source file.

    ``def`` bodies are closed by inlining earlier definitions; the main term
    likewise, so every term in the result is closed unless it mentions an
    undefined name.
    """
    p = Parser(src)
    prog = Program()
    defs = dict(extra_defs or {})
    total = len(p.toks)
    while p.pos < total:
        # a declaration ends before the next token in column 1
        p.limit = next((j for j in range(p.pos + 1, total) if p.toks[j].col == 1),
                       total)
        if p.at("role") or p.at("def"):
            kw = p.next().text
            name = p.ident("declaration name")
            p.expect("=")
            if kw == "role":
                prog.roles[name] = _parse_role_decl(p)
                p.role_aliases[name] = prog.roles[name]
            else:
                body = _inline(p.term(), defs)
                defs[name] = body
                prog.defs[name] = body
        elif prog.main is None:
            p.limit = total
            prog.main = freshen(_inline(p.term(), defs))
        else:
            p.error("only one main term is allowed")
        if p.peek() is not None:
            p.error("unexpected trailing input")
    prog.defs = {k: freshen(v) for k, v in prog.defs.items()}
    return prog


def _parse_role_decl(p: Parser) -> RoleExpr:
    # a role declaration ends at the first line break outside parentheses,
    # unless an operator dangles across it
    start = p.pos
    first = p.peek()
    if first is None:
        p.error("expected a role")
    depth = 0
    end = start
    prev_line = first.line
    while end < p.limit:
        tok = p.toks[end]
        if depth == 0 and end > start and tok.line != prev_line \
                and p.toks[end - 1].text not in ("&", "|", "!", "(") \
                and tok.text not in ("&", "|", ")"):
            break
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        prev_line = tok.line
        end += 1
    texts = []
    for tok in p.toks[start:end]:
        texts.extend(["(", ")"] if tok.text == "()" else [tok.text])
    rp = RoleParser(texts, p.role_aliases)
    try:
        r = rp.parse()
        if rp.peek() is not None:
            raise RoleError(f"trailing {rp.peek()!r} in role declaration")
    except RoleError as e:
        raise ParseError(str(e), first.line, first.col) from None
    p.pos = end
    return r


def _inline(t: Term, defs: dict[str, Term]) -> Term:
    for name in sorted(free_vars(t)):
        if name in defs:
            t = subst(t, name, defs[name])
    return t


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

def print_type(t: Type, prec: int = 0) -> str:
    match t:
        case Base(name):
            return name
        case Arrow(a, b):
            s = f"{print_type(a, 1)} -> {print_type(b, 0)}"
            return f"({s})" if prec > 0 else s
        case GuardT(r, b):
            return f"{{{print_role(r)}}} {print_type(b, 1)}"
        case Comp(r, b):
            return f"[{print_role(r)}] {print_type(b, 1)}"
    raise TypeError(f"not a type: {t!r}")


def print_base(v: BaseVal) -> str:
    x = v.value
    if x is UNIT or isinstance(x, UnitVal):
        return "()"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    return f'"{_escape(x)}"'


# levels: 0 term, 1 eq, 2 prefix, 3 app, 4 atom

def _level(t: Term) -> int:
    match t:
        case Abs() | If():
            return 0
        case Let():
            return 0
        case StrEq():
            return 1
        case Fix() | Guard() | Check() | Mod():
            return 2
        case App():
            return 3
    return 4


def _is_as(t: Term) -> bool:
    match t:
        case Mod(RoleModifier(direction="dn", role=r, check=None),
                 Mod(RoleModifier(direction="up", check=None), _)):
            return r == BOT
    return False


def print_term(t: Term) -> str:
    """Canonical concrete syntax; ``parse_term(print_term(t))`` is alpha-equal to ``t``."""
    return _pt(t, 0)


def _wrap(t: Term, need: int) -> str:
    s = _pt(t, need)
    return f"({s})" if _level(t) < need else s


def _pt(t: Term, need: int) -> str:
    match t:
        case BaseVal():
            return print_base(t)
        case Var(x):
            return x
        case Unit(b):
            return f"[{_pt(b, 0)}]"
        case Abs(x, ty, b):
            return f"\\{x}:{print_type(ty)}. {_pt(b, 0)}"
        case Let(x, m, b) if x.startswith("_") and x not in free_vars(b):
            return f"{_wrap(m, 1)} ; {_pt(b, 0)}"
        case Let(x, m, b):
            return f"let {x} = {_pt(m, 0)} in {_pt(b, 0)}"
        case If(c, a, b):
            return f"if {_pt(c, 0)} then {_pt(a, 0)} else {_pt(b, 0)}"
        case StrEq(a, b):
            return f"{_wrap(a, 2)} == {_wrap(b, 2)}"
        case App(f, a):
            return f"{_wrap(f, 3)} {_wrap(a, 4)}"
        case Fix(b):
            return f"fix {_wrap(b, 2)}"
        case Check(b):
            return f"check {_wrap(b, 2)}"
        case Guard(r, b):
            return f"{{{print_role(r)}}} {_wrap(b, 2)}"
        case Mod(m, b):
            if _is_as(t):
                return f"as[{print_role(b.mod.role)}] {_wrap(b.body, 2)}"
            s = f"{m.direction}[{print_role(m.role)}]"
            if m.check is not None:
                s += f"^[{print_role(m.check)}]"
            return f"{s} {_wrap(b, 2)}"
    raise TypeError(f"not a term: {t!r}")
