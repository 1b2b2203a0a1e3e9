"""Role expressions over a free boolean lattice extended with ``amp``.

A role denotes a set of permissions.  Equivalence and dominance are decided
by truth tables: every role is compiled to a boolean function over its
generators (atoms plus residual ``amp`` literals), represented as a Python
integer whose bit ``i`` is the function's value on valuation ``i``.

``amp`` is pushed inward through join and meet (after moving the argument to
negation normal form).  What remains is ``amp`` applied to a literal; each such
application becomes a fresh generator ``g`` constrained by ``lit <= g``, which
is the pointwise form of the two absorption laws.  ``amp(0) = 0`` and
``amp(1) = 1``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Union


class RoleError(Exception):
    """Malformed role text or a role outside the analysed universe."""


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Meet:
    l: "RoleExpr"
    r: "RoleExpr"


@dataclass(frozen=True)
class Join:
    l: "RoleExpr"
    r: "RoleExpr"


@dataclass(frozen=True)
class Neg:
    r: "RoleExpr"


@dataclass(frozen=True)
class Amp:
    r: "RoleExpr"


RoleExpr = Union[Bottom, Top, Atom, Meet, Join, Neg, Amp]

BOT = Bottom()
TOP = Top()


def meet_all(roles: Iterable[RoleExpr]) -> RoleExpr:
    out = None
    for r in roles:
        out = r if out is None else Meet(out, r)
    return TOP if out is None else out


def join_all(roles: Iterable[RoleExpr]) -> RoleExpr:
    out = None
    for r in roles:
        out = r if out is None else Join(out, r)
    return BOT if out is None else out


# ---------------------------------------------------------------------------
# Role modifiers
# ---------------------------------------------------------------------------

UP = "up"
DN = "dn"


@dataclass(frozen=True)
class RoleModifier:
    """``up[role]`` or ``dn[role]``, optionally carrying a check annotation."""

    direction: str
    role: RoleExpr
    check: RoleExpr | None = None

    def __post_init__(self):
        if self.direction not in (UP, DN):
            raise ValueError(f"bad modifier direction {self.direction!r}")

    @property
    def checked(self) -> bool:
        return self.check is not None

    def with_check(self, check: RoleExpr | None) -> "RoleModifier":
        return RoleModifier(self.direction, self.role, check)


def apply_modifier(m: RoleModifier, r: RoleExpr) -> RoleExpr:
    """Return the context role ``m[r]``; annotations are ignored."""
    if m.direction == UP:
        return Join(m.role, r)
    return Meet(m.role, r)


def rminus(b: RoleExpr, a: RoleExpr) -> RoleExpr:
    """``b \\ a``, i.e. ``b & !a``."""
    return Meet(b, Neg(a))


# ---------------------------------------------------------------------------
# Universe and compilation to truth tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RoleUniverse:
    """Finite carrier for the decision procedure.

    ``amp_generators`` lists the literals ``psi`` (atoms, negated atoms, or
    nested ``amp`` generators) for which ``amp(psi)`` is a generator.
    """

    atoms: tuple[str, ...] = ()
    amp_generators: tuple[RoleExpr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "amp_generators", tuple(self.amp_generators))
        if len(set(self.atoms)) != len(self.atoms):
            raise RoleError("duplicate atom in universe")
        if len(set(self.amp_generators)) != len(self.amp_generators):
            raise RoleError("duplicate amp generator in universe")

    @property
    def size(self) -> int:
        return len(self.atoms) + len(self.amp_generators)

    @classmethod
    def of(cls, *roles: RoleExpr) -> "RoleUniverse":
        """Smallest universe covering ``roles``."""
        atoms: list[str] = []
        amps: list[RoleExpr] = []
        for r in roles:
            for g in _generators(r):
                if isinstance(g, Atom):
                    if g.name not in atoms:
                        atoms.append(g.name)
                elif g.r not in amps:
                    amps.append(g.r)
        return cls(tuple(sorted(atoms)), tuple(amps))

    def union(self, other: "RoleUniverse") -> "RoleUniverse":
        atoms = list(self.atoms) + [a for a in other.atoms if a not in self.atoms]
        amps = list(self.amp_generators) + [
            a for a in other.amp_generators if a not in self.amp_generators]
        return RoleUniverse(tuple(atoms), tuple(amps))

    def generators(self) -> list[RoleExpr]:
        return [Atom(a) for a in self.atoms] + [Amp(p) for p in self.amp_generators]


def _nnf(r: RoleExpr, neg: bool = False) -> RoleExpr:
    """Negation normal form; ``amp`` arguments are normalised recursively."""
    match r:
        case Bottom():
            return TOP if neg else BOT
        case Top():
            return BOT if neg else TOP
        case Atom():
            return Neg(r) if neg else r
        case Neg(x):
            return _nnf(x, not neg)
        case Meet(a, b):
            a, b = _nnf(a, neg), _nnf(b, neg)
            return Join(a, b) if neg else Meet(a, b)
        case Join(a, b):
            a, b = _nnf(a, neg), _nnf(b, neg)
            return Meet(a, b) if neg else Join(a, b)
        case Amp(x):
            g = _push_amp(_nnf(x))
            return _negate_nnf(g) if neg else g
    raise TypeError(f"not a role: {r!r}")


def _negate_nnf(r: RoleExpr) -> RoleExpr:
    # complement of a term already in NNF, keeping it in NNF
    match r:
        case Bottom():
            return TOP
        case Top():
            return BOT
        case Neg(x):
            return x
        case Meet(a, b):
            return Join(_negate_nnf(a), _negate_nnf(b))
        case Join(a, b):
            return Meet(_negate_nnf(a), _negate_nnf(b))
    return Neg(r)


def _push_amp(r: RoleExpr) -> RoleExpr:
    """Apply ``amp`` to an NNF role, distributing over join and meet."""
    match r:
        case Bottom() | Top():
            return r
        case Meet(a, b):
            return Meet(_push_amp(a), _push_amp(b))
        case Join(a, b):
            return Join(_push_amp(a), _push_amp(b))
    # r is a literal: Atom, Amp generator, or Neg of one
    return Amp(r)


@lru_cache(maxsize=65536)
def normalize(r: RoleExpr) -> RoleExpr:
    """NNF with every ``amp`` applied to a literal."""
    return _nnf(r)


def _generators(r: RoleExpr) -> list[RoleExpr]:
    """Generators (``Atom`` or residual ``Amp(lit)``) of ``r`` in first-seen order."""
    out: list[RoleExpr] = []

    def walk(x):
        match x:
            case Atom():
                if x not in out:
                    out.append(x)
            case Amp(lit):
                walk(lit)
                if x not in out:
                    out.append(x)
            case Neg(y):
                walk(y)
            case Meet(a, b) | Join(a, b):
                walk(a)
                walk(b)

    walk(normalize(r))
    return out


class _Table:
    """Bit patterns for each generator over all valuations of ``gens``."""

    def __init__(self, gens: tuple[RoleExpr, ...]):
        self.gens = gens
        self.index = {g: i for i, g in enumerate(gens)}
        n = len(gens)
        self.rows = 1 << n
        self.full = (1 << self.rows) - 1
        self.pattern = []
        for i in range(n):
            bits = 0
            for row in range(self.rows):
                if row >> i & 1:
                    bits |= 1 << row
            self.pattern.append(bits)
        valid = self.full
        for g in gens:
            if isinstance(g, Amp):
                lit = self.eval(g.r)
                valid &= ~lit | self.pattern[self.index[g]]
        self.valid = valid & self.full

    def eval(self, r: RoleExpr) -> int:
        match r:
            case Bottom():
                return 0
            case Top():
                return self.full
            case Atom() | Amp():
                return self.pattern[self.index[r]]
            case Neg(x):
                return ~self.eval(x) & self.full
            case Meet(a, b):
                return self.eval(a) & self.eval(b)
            case Join(a, b):
                return self.eval(a) | self.eval(b)
        raise TypeError(f"not a normalised role: {r!r}")


@lru_cache(maxsize=4096)
def _table(gens: tuple[RoleExpr, ...]) -> _Table:
    return _Table(gens)


def _closure(gens: list[RoleExpr]) -> tuple[RoleExpr, ...]:
    # an amp generator's literal may mention generators absent from gens
    out: list[RoleExpr] = []
    for g in gens:
        for h in _generators(g.r) if isinstance(g, Amp) else []:
            if h not in out:
                out.append(h)
        if g not in out:
            out.append(g)
    return tuple(sorted(out, key=_gen_key))


def _gen_key(g: RoleExpr):
    return (_depth(g), print_role(g))


def _depth(g: RoleExpr) -> int:
    match g:
        case Amp(x):
            return 1 + _depth(x)
        case Neg(x):
            return _depth(x)
    return 0


def _check_universe(gens: list[RoleExpr], u: RoleUniverse | None):
    if u is None:
        return
    allowed = set(u.generators())
    for g in gens:
        if g not in allowed:
            raise RoleError(f"role mentions {print_role(g)}, outside the universe")


def truth_tables(roles: list[RoleExpr], u: RoleUniverse | None = None):
    """Compile ``roles`` over a shared generator set.

    Returns ``(table, [bits...])``; only bits inside ``table.valid`` matter.
    """
    gens: list[RoleExpr] = []
    for r in roles:
        for g in _generators(r):
            if g not in gens:
                gens.append(g)
    _check_universe(gens, u)
    if u is not None:
        for g in u.generators():
            g = normalize(g)
            if g not in gens:
                gens.append(g)
    table = _table(_closure(gens))
    return table, [table.eval(normalize(r)) for r in roles]


@lru_cache(maxsize=262144)
def _equiv(r1: RoleExpr, r2: RoleExpr) -> bool:
    table, (a, b) = truth_tables([r1, r2])
    return (a ^ b) & table.valid == 0


@lru_cache(maxsize=262144)
def _dominates(r1: RoleExpr, r2: RoleExpr) -> bool:
    table, (a, b) = truth_tables([r1, r2])
    return b & ~a & table.valid == 0


def equiv(r1: RoleExpr, r2: RoleExpr, u: RoleUniverse | None = None) -> bool:
    """Decide ``r1 == r2`` in the free boolean algebra with ``amp``."""
    if u is not None:
        _check_universe(_generators(r1) + _generators(r2), u)
    return _equiv(r1, r2)


def dominates(r1: RoleExpr, r2: RoleExpr, u: RoleUniverse | None = None) -> bool:
    """Decide ``r1 >= r2``: ``r1`` has at least the permissions of ``r2``."""
    if u is not None:
        _check_universe(_generators(r1) + _generators(r2), u)
    return _dominates(r1, r2)


# ---------------------------------------------------------------------------
# Enumeration of role classes
# ---------------------------------------------------------------------------

MAX_ENUM_GENERATORS = 3


def enumerate_roles(u: RoleUniverse, limit: int | None = None) -> list[RoleExpr]:
    """One canonical representative per equivalence class of roles over ``u``.

    Classes correspond to boolean functions on the valuations allowed by the
    ``amp`` constraints, so there are ``2 ** valid_rows`` of them.
    """
    if u.size > MAX_ENUM_GENERATORS:
        raise RoleError(
            f"universe has {u.size} generators; at most {MAX_ENUM_GENERATORS} "
            "can be enumerated")
    gens = [normalize(g) for g in u.generators()]
    table = _table(_closure(gens))
    if len(table.gens) != len(gens):
        raise RoleError("amp generator mentions a literal outside the universe")
    rows = [i for i in range(table.rows) if table.valid >> i & 1]
    out = []
    for k in range(1 << len(rows)):
        if limit is not None and len(out) >= limit:
            break
        bits = 0
        for j, row in enumerate(rows):
            if k >> j & 1:
                bits |= 1 << row
        out.append(_dnf(table, bits))
    return out


# ---------------------------------------------------------------------------
# Canonical DNF
# ---------------------------------------------------------------------------

def _prime_implicants(n: int, ones: set[int], dont: set[int]):
    """Quine-McCluskey; implicants are ``(value, mask)`` with mask bits free."""
    current = {(m, 0) for m in ones | dont}
    primes = set()
    while current:
        merged = set()
        used = set()
        items = sorted(current)
        for (v1, m1), (v2, m2) in itertools.combinations(items, 2):
            if m1 != m2:
                continue
            diff = v1 ^ v2
            if diff and diff & (diff - 1) == 0:
                merged.add((v1 & ~diff, m1 | diff))
                used.add((v1, m1))
                used.add((v2, m2))
        primes |= current - used
        current = merged
    return primes


def _covers(imp, row) -> bool:
    value, mask = imp
    return row & ~mask == value & ~mask


def _dnf(table: _Table, bits: int) -> RoleExpr:
    valid = table.valid
    ones = {i for i in range(table.rows) if valid >> i & 1 and bits >> i & 1}
    if not ones:
        return BOT
    dont = {i for i in range(table.rows) if not valid >> i & 1}
    if len(ones) + len(dont) == table.rows:
        return TOP
    n = len(table.gens)
    primes = sorted(_prime_implicants(n, ones, dont),
                    key=lambda p: (bin(p[1]).count("1") * -1, p))
    # greedy cover; essential implicants first
    chosen = []
    remaining = set(ones)
    for row in sorted(ones):
        covering = [p for p in primes if _covers(p, row)]
        if len(covering) == 1 and covering[0] not in chosen:
            chosen.append(covering[0])
    for p in chosen:
        remaining -= {r for r in remaining if _covers(p, r)}
    while remaining:
        best = max(primes, key=lambda p: (sum(_covers(p, r) for r in remaining),
                                          bin(p[1]).count("1")))
        chosen.append(best)
        remaining -= {r for r in remaining if _covers(best, r)}
    terms = []
    for value, mask in chosen:
        lits = []
        for i, g in enumerate(table.gens):
            if mask >> i & 1:
                continue
            lits.append(g if value >> i & 1 else Neg(g))
        lits.sort(key=lambda x: (_lit_name(x), isinstance(x, Neg)))
        terms.append(meet_all(lits))
    terms.sort(key=print_role)
    return join_all(terms)


def _lit_name(x: RoleExpr) -> str:
    return print_role(x.r if isinstance(x, Neg) else x)


def canonical(r: RoleExpr, u: RoleUniverse | None = None) -> RoleExpr:
    """Deterministic DNF representative of ``r``'s equivalence class."""
    table, (bits,) = truth_tables([r], u)
    return _dnf(table, bits)


def canonical_str(r: RoleExpr, u: RoleUniverse | None = None) -> str:
    return print_role(canonical(r, u))


# ---------------------------------------------------------------------------
# Concrete syntax
# ---------------------------------------------------------------------------

# precedence: | (1) < & (2) < ! (3)

def print_role(r: RoleExpr, prec: int = 0) -> str:
    match r:
        case Bottom():
            return "0"
        case Top():
            return "1"
        case Atom(name):
            return name
        case Amp(x):
            return f"amp({print_role(x)})"
        case Neg(x):
            return "!" + print_role(x, 3)
        case Meet(a, b):
            s = f"{print_role(a, 2)} & {print_role(b, 3)}"
            return f"({s})" if prec > 2 else s
        case Join(a, b):
            s = f"{print_role(a, 1)} | {print_role(b, 2)}"
            return f"({s})" if prec > 1 else s
    raise TypeError(f"not a role: {r!r}")


_ROLE_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[01!&|()]))")


class RoleParser:
    """Recursive-descent parser over a token list shared with the term lexer."""

    def __init__(self, tokens, aliases: dict[str, RoleExpr] | None = None):
        self.tokens = tokens
        self.pos = 0
        self.aliases = aliases or {}

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise RoleError("unexpected end of role")
        self.pos += 1
        return tok

    def expect(self, text):
        tok = self.next()
        if tok != text:
            raise RoleError(f"expected {text!r} in role, got {tok!r}")

    def parse(self) -> RoleExpr:
        r = self.meet()
        while self.peek() == "|":
            self.next()
            r = Join(r, self.meet())
        return r

    def meet(self) -> RoleExpr:
        r = self.unary()
        while self.peek() == "&":
            self.next()
            r = Meet(r, self.unary())
        return r

    def unary(self) -> RoleExpr:
        tok = self.next()
        if tok == "!":
            return Neg(self.unary())
        if tok == "(":
            r = self.parse()
            self.expect(")")
            return r
        if tok == "0":
            return BOT
        if tok == "1":
            return TOP
        if tok == "amp":
            self.expect("(")
            r = self.parse()
            self.expect(")")
            return Amp(r)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", tok):
            return self.aliases.get(tok, Atom(tok))
        raise RoleError(f"unexpected {tok!r} in role")


def tokenize_role(src: str) -> list[str]:
    out = []
    pos = 0
    src = src.rstrip()
    while pos < len(src):
        m = _ROLE_TOKEN.match(src, pos)
        if not m:
            raise RoleError(f"bad character {src[pos]!r} in role at offset {pos}")
        out.append(m.group("id") or m.group("op"))
        pos = m.end()
    return out


def parse_role(src: str, aliases: dict[str, RoleExpr] | None = None) -> RoleExpr:
    """Parse ``0``, ``1``, atoms, ``!r``, ``r & s``, ``r | s``, ``amp(r)``."""
    p = RoleParser(tokenize_role(src), aliases)
    r = p.parse()
    if p.peek() is not None:
        raise RoleError(f"trailing {p.peek()!r} in role")
    return r
