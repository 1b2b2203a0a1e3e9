"""Subtyping and type synthesis for the sufficient and necessary systems.

Both systems share their rules and differ in two places: the direction of
role comparison in subtyping, and the side condition on ``dn`` modifiers
(present only in the sufficient system).  Synthesis is syntax directed;
subsumption is applied only where a rule needs it: at application
arguments, at ``fix``, and when joining the branches of ``if``.

The amp-extended system threads a guard context ``C`` through synthesis:
guards raise it, and every upward modifier must be justified by it.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

from .roles import (BOT, UP, Amp, Join, Meet, RoleExpr, RoleModifier,
                    RoleUniverse, apply_modifier, canonical_str, dominates, equiv,
                    print_role, rminus)
from .syntax import (UNIT, Abs, App, Arrow, Base, BaseVal, BOOL_T, Check, Comp,
                     Fix, Guard, GuardT, If, INT_T, Let, Mod, STR_T, StrEq, Term,
                     Type, UNIT_T, Unit, Var, print_term)


class SystemId(enum.Enum):
    SUFFICIENT = "sufficient"
    NECESSARY = "necessary"

    @classmethod
    def parse(cls, s: str) -> "SystemId":
        s = s.lower()
        for sys in cls:
            if sys.value.startswith(s) or {"alpha": "sufficient",
                                           "beta": "necessary"}.get(s) == sys.value:
                return sys
        raise ValueError(f"unknown system {s!r}")


SUFFICIENT = SystemId.SUFFICIENT
NECESSARY = SystemId.NECESSARY


class TypeError_(Exception):
    """A typing rule could not be applied.

    ``rule`` names the rule (``t-chk``, ``t-mod-dn``, ...); ``roles`` holds the
    roles that were compared when the failure is a role comparison.
    """

    def __init__(self, rule: str, message: str, term: Term | None = None,
                 roles: tuple[RoleExpr, ...] = ()):
        self.rule = rule
        self.message = message
        self.term = term
        self.roles = roles
        where = f" in {print_term(term)}" if term is not None else ""
        super().__init__(f"{rule}: {message}{where}")


@dataclass(frozen=True)
class TypeReport:
    type: Type
    system: SystemId
    amp_mode: bool = False
    guard_context: RoleExpr = BOT
    subsumption: bool = False

    @property
    def effect(self) -> RoleExpr | None:
        return self.type.effect if isinstance(self.type, Comp) else None


# ---------------------------------------------------------------------------
# Subtyping and friends
# ---------------------------------------------------------------------------

def _role_le(sys: SystemId, a: RoleExpr, b: RoleExpr) -> bool:
    # is a below b in the order used by subtyping
    return dominates(b, a) if sys is SUFFICIENT else dominates(a, b)


def subtype(sys: SystemId, t1: Type, t2: Type, u: RoleUniverse | None = None) -> bool:
    """``t1 <= t2`` in system ``sys``."""
    match t1, t2:
        case Base(a), Base(b):
            return a == b
        case Arrow(d1, c1), Arrow(d2, c2):
            return subtype(sys, d2, d1, u) and subtype(sys, c1, c2, u)
        case GuardT(a, s1), GuardT(b, s2):
            return subtype(sys, s1, s2, u) and _role_le(sys, a, b)
        case Comp(a, s1), Comp(b, s2):
            return subtype(sys, s1, s2, u) and _role_le(sys, a, b)
    return False


def type_equiv(t1: Type, t2: Type) -> bool:
    """Structural equality with roles compared up to equivalence."""
    match t1, t2:
        case Base(a), Base(b):
            return a == b
        case Arrow(d1, c1), Arrow(d2, c2):
            return type_equiv(d1, d2) and type_equiv(c1, c2)
        case (GuardT(a, s1), GuardT(b, s2)) | (Comp(a, s1), Comp(b, s2)):
            return equiv(a, b) and type_equiv(s1, s2)
    return False


def dominates_type(r: RoleExpr, t: Type, u: RoleUniverse | None = None) -> bool:
    if isinstance(t, Comp):
        return dominates(r, t.effect, u)
    return True


def compatible(t1: Type, t2: Type) -> bool:
    if isinstance(t1, Comp) and isinstance(t2, Comp):
        return type_equiv(t1.body, t2.body)
    return type_equiv(t1, t2)


def _bound(sys: SystemId, t1: Type, t2: Type, upper: bool) -> Type | None:
    join_roles = (sys is SUFFICIENT) == upper
    combine = Join if join_roles else Meet
    match t1, t2:
        case Base(a), Base(b):
            return t1 if a == b else None
        case Arrow(d1, c1), Arrow(d2, c2):
            d = _bound(sys, d1, d2, not upper)
            c = _bound(sys, c1, c2, upper)
            return None if d is None or c is None else Arrow(d, c)
        case GuardT(a, s1), GuardT(b, s2):
            s = _bound(sys, s1, s2, upper)
            return None if s is None else GuardT(_combine(combine, a, b), s)
        case Comp(a, s1), Comp(b, s2):
            s = _bound(sys, s1, s2, upper)
            return None if s is None else Comp(_combine(combine, a, b), s)
    return None


def _combine(op, a, b):
    if equiv(a, b):
        return a
    return op(a, b)


def lub(sys: SystemId, t1: Type, t2: Type) -> Type | None:
    """Least upper bound in ``sys``'s subtype order, or None."""
    return _bound(sys, t1, t2, True)


def glb(sys: SystemId, t1: Type, t2: Type) -> Type | None:
    return _bound(sys, t1, t2, False)


def base_type(v: BaseVal) -> Base:
    if v.value is UNIT:
        return UNIT_T
    if isinstance(v.value, bool):
        return BOOL_T
    if isinstance(v.value, int):
        return INT_T
    if isinstance(v.value, str):
        return STR_T
    raise TypeError(f"unknown literal {v.value!r}")


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

MOD_RULES = ("split", "star")


class _Synth:
    def __init__(self, sys: SystemId, u, amp: bool, mod_rule: str):
        if mod_rule not in MOD_RULES:
            raise ValueError(f"mod_rule must be one of {MOD_RULES}")
        if mod_rule == "star" and sys is not SUFFICIENT:
            raise ValueError("the t-mod-* rule belongs to the sufficient system")
        self.sys = sys
        self.u = u
        self.amp = amp
        self.mod_rule = mod_rule
        self.subsumed = False

    def le(self, t1, t2) -> bool:
        ok = subtype(self.sys, t1, t2, self.u)
        if ok and not type_equiv(t1, t2):
            self.subsumed = True
        return ok

    def syn(self, ctx: Mapping[str, Type], c: RoleExpr, t: Term) -> Type:
        match t:
            case BaseVal():
                return base_type(t)
            case Var(x):
                if x not in ctx:
                    raise TypeError_("t-var", f"unbound variable {x}", t)
                return ctx[x]
            case Abs(x, annot, body):
                inner = dict(ctx)
                inner[x] = annot
                return Arrow(annot, self.syn(inner, c, body))
            case App(f, a):
                ft = self.syn(ctx, c, f)
                if not isinstance(ft, Arrow):
                    raise TypeError_("t-app", f"applying a value of type {print_type_canonical(ft)}", t)
                at = self.syn(ctx, c, a)
                if not self.le(at, ft.dom):
                    raise TypeError_(
                        "t-app", f"argument type {print_type_canonical(at)} is not a subtype of "
                        f"{print_type_canonical(ft.dom)}", t, _roles_of(at, ft.dom))
                return ft.cod
            case Fix(body):
                ft = self.syn(ctx, c, body)
                if not isinstance(ft, Arrow):
                    raise TypeError_("t-fix", f"fix of type {print_type_canonical(ft)}", t)
                # fix M : S when M : T -> S and S <= T (subsume M to S -> S)
                if not self.le(ft.cod, ft.dom):
                    raise TypeError_(
                        "t-fix", f"result type {print_type_canonical(ft.cod)} is not a subtype of "
                        f"{print_type_canonical(ft.dom)}", t, _roles_of(ft.cod, ft.dom))
                return ft.cod
            case Guard(role, body):
                inner_c = Join(c, role) if self.amp else c
                return GuardT(role, self.syn(ctx, inner_c, body))
            case Check(body):
                bt = self.syn(ctx, c, body)
                if not isinstance(bt, GuardT):
                    raise TypeError_("t-chk", f"check of type {print_type_canonical(bt)}", t)
                return Comp(bt.role, bt.body)
            case Unit(body):
                return Comp(BOT, self.syn(ctx, c, body))
            case Let(x, m, n):
                mt = self.syn(ctx, c, m)
                if not isinstance(mt, Comp):
                    raise TypeError_("t-bind", f"binding a value of type {print_type_canonical(mt)}", t)
                inner = dict(ctx)
                inner[x] = mt.body
                nt = self.syn(inner, c, n)
                if not isinstance(nt, Comp):
                    raise TypeError_("t-bind", f"body has type {print_type_canonical(nt)}, "
                                     "not a computation", t)
                return Comp(_combine(Join, mt.effect, nt.effect), nt.body)
            case Mod(m, body):
                return self.modifier(ctx, c, t, m, body)
            case If(cond, x, y):
                ct = self.syn(ctx, c, cond)
                if ct != BOOL_T:
                    raise TypeError_("t-if", f"condition has type {print_type_canonical(ct)}", t)
                xt = self.syn(ctx, c, x)
                yt = self.syn(ctx, c, y)
                joined = lub(self.sys, xt, yt)
                if joined is None:
                    raise TypeError_("t-if", f"branches have incompatible types "
                                     f"{print_type_canonical(xt)} and {print_type_canonical(yt)}", t)
                if not (type_equiv(joined, xt) and type_equiv(joined, yt)):
                    self.subsumed = True
                return joined
            case StrEq(a, b):
                at = self.syn(ctx, c, a)
                bt = self.syn(ctx, c, b)
                if not isinstance(at, Base) or at != bt:
                    raise TypeError_("t-eq", f"comparing {print_type_canonical(at)} with "
                                     f"{print_type_canonical(bt)}", t)
                return BOOL_T
        raise TypeError(f"not a term: {t!r}")

    def modifier(self, ctx, c, t, m: RoleModifier, body) -> Type:
        a = m.role
        name = "t-mod-*" if self.mod_rule == "star" else f"t-mod-{m.direction}"
        if self.amp and m.direction == UP:
            if m.checked:
                authority = Join(c, m.check)
                name_amp = "t-mod-up-checked"
            else:
                authority = c
                name_amp = "t-mod-up′"
            if not dominates(authority, Amp(a), self.u):
                raise TypeError_(
                    name_amp, f"guard context {canonical_str(authority)} does not "
                    f"dominate {print_role(Amp(a))}", t, (authority, Amp(a)))
        bt = self.syn(ctx, c, body)
        if not isinstance(bt, Comp):
            raise TypeError_(name, f"modified term has type {print_type_canonical(bt)}, "
                             "not a computation", t)
        b = bt.effect
        if self.mod_rule == "star":
            # least C with m[C] >= B
            cand = rminus(b, a) if m.direction == UP else b
            if not dominates(apply_modifier(m, cand), b, self.u):
                raise TypeError_(name, f"{print_role(a)} does not dominate "
                                 f"{print_role(b)}", t, (a, b))
            return Comp(cand, bt.body)
        if m.direction == UP:
            return Comp(rminus(b, a), bt.body)
        if self.sys is SUFFICIENT and not dominates(a, b, self.u):
            rule = "t-mod-dn-checked" if m.checked and self.amp else "t-mod-dn"
            raise TypeError_(rule, f"{print_role(a)} does not dominate "
                             f"{print_role(b)}", t, (a, b))
        return bt


def _roles_of(t1: Type, t2: Type) -> tuple:
    if type(t1) is type(t2) and isinstance(t1, (Comp, GuardT)):
        r1 = t1.effect if isinstance(t1, Comp) else t1.role
        r2 = t2.effect if isinstance(t2, Comp) else t2.role
        return (r1, r2)
    return ()


def synthesize(sys: SystemId, ctx: Mapping[str, Type] | None, t: Term,
               u: RoleUniverse | None = None, mod_rule: str = "split") -> Type:
    """Principal type of ``t`` under ``ctx``; raises ``TypeError_``."""
    return _Synth(sys, u, False, mod_rule).syn(dict(ctx or {}), BOT, t)


def synthesize_amp(ctx: Mapping[str, Type] | None, guard_context: RoleExpr, t: Term,
                   sys: SystemId = SUFFICIENT, u: RoleUniverse | None = None) -> Type:
    """Synthesis in the amp-extended system, starting from guard context ``C``."""
    return _Synth(sys, u, True, "split").syn(dict(ctx or {}), guard_context, t)


def type_report(sys: SystemId, t: Term, ctx=None, amp: bool = False,
                guard_context: RoleExpr = BOT, u=None, mod_rule="split") -> TypeReport:
    s = _Synth(sys, u, amp, mod_rule)
    ty = s.syn(dict(ctx or {}), guard_context, t)
    return TypeReport(ty, sys, amp, guard_context if amp else BOT, s.subsumed)


def print_type_canonical(t: Type) -> str:
    """Print a type with every role in canonical DNF."""
    match t:
        case Base(name):
            return name
        case Arrow(d, c):
            ds = print_type_canonical(d)
            if isinstance(d, Arrow):
                ds = f"({ds})"
            return f"{ds} -> {print_type_canonical(c)}"
        case GuardT(r, b):
            return f"{{{canonical_str(r)}}} {_atomic(b)}"
        case Comp(r, b):
            return f"[{canonical_str(r)}] {_atomic(b)}"
    raise TypeError(f"not a type: {t!r}")


def _atomic(t: Type) -> str:
    s = print_type_canonical(t)
    return f"({s})" if isinstance(t, Arrow) else s
