"""Small-step, call-by-name evaluation under a context role.

``step`` is a function: for a closed term and a context role exactly one of
``Reduced``, ``AtValue``, ``RoleFailure``, ``AmpFailure`` or ``Stuck`` applies.
The context role is consulted only when discharging a guard, so raising it
never disables a reduction.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Union

from .roles import BOT, UP, Amp, Join, RoleExpr, apply_modifier, dominates, print_role
from .syntax import (Abs, App, BaseVal, Check, Fix, Guard, If, Let, Mod, StrEq,
                     Term, Unit, Var, is_value, print_term, subst)

DEFAULT_FUEL = 10_000


def default_fuel() -> int:
    return int(os.environ.get("LRBAC_FUEL", DEFAULT_FUEL))


@dataclass(frozen=True)
class EvalConfig:
    context_role: RoleExpr
    fuel: int = DEFAULT_FUEL
    amp_mode: bool = False

    def __post_init__(self):
        if self.fuel < 0:
            raise ValueError("fuel must be non-negative")


# -- single-step results ----------------------------------------------------

@dataclass(frozen=True)
class Reduced:
    next: Term


@dataclass(frozen=True)
class AtValue:
    pass


@dataclass(frozen=True)
class RoleFailure:
    """A guard demanded ``needed`` but the context role at the site was ``had``."""
    needed: RoleExpr
    had: RoleExpr
    site: Term


@dataclass(frozen=True)
class AmpFailure:
    site: Term


@dataclass(frozen=True)
class Stuck:
    reason: str
    site: Term


StepResult = Union[Reduced, AtValue, RoleFailure, AmpFailure, Stuck]


# -- outcomes ----------------------------------------------------------------

@dataclass
class Outcome:
    """Result of driving ``step`` to completion.

    ``kind`` is one of ``value``, ``role_error``, ``amp_error``, ``stuck``,
    ``fuel_exhausted``; ``term`` is the value or the last term reached.
    """

    kind: str
    term: Term
    steps: int
    failure: StepResult | None = None
    trace: list[Term] | None = None

    @property
    def ok(self) -> bool:
        return self.kind == "value"

    def __str__(self):
        match self.failure:
            case RoleFailure(needed, had, _):
                return f"role error: needed {print_role(needed)}, had {print_role(had)}"
            case AmpFailure(site):
                return f"amp error at {print_term(site)}"
            case Stuck(reason, _):
                return f"stuck: {reason}"
        if self.kind == "fuel_exhausted":
            return f"fuel exhausted after {self.steps} steps"
        return print_term(self.term)


VALUE = "value"
ROLE_ERROR = "role_error"
AMP_ERROR = "amp_error"
STUCK = "stuck"
FUEL_EXHAUSTED = "fuel_exhausted"


# ---------------------------------------------------------------------------
# Marking and role-modification errors
# ---------------------------------------------------------------------------

def mark(a: RoleExpr, t: Term) -> Term:
    """Annotate every role modifier in ``t`` with ``a`` (joined onto any existing check)."""
    match t:
        case Mod(m, body):
            check = a if m.check is None else Join(a, m.check)
            return Mod(m.with_check(check), mark(a, body))
        case BaseVal() | Var():
            return t
        case Abs(x, ty, b):
            return Abs(x, ty, mark(a, b))
        case Let(x, m, b):
            return Let(x, mark(a, m), mark(a, b))
        case App(f, x):
            return App(mark(a, f), mark(a, x))
        case Fix(b):
            return Fix(mark(a, b))
        case Guard(r, b):
            return Guard(r, mark(a, b))
        case Check(b):
            return Check(mark(a, b))
        case Unit(b):
            return Unit(mark(a, b))
        case If(c, x, y):
            return If(mark(a, c), mark(a, x), mark(a, y))
        case StrEq(x, y):
            return StrEq(mark(a, x), mark(a, y))
    raise TypeError(f"not a term: {t!r}")


def amp_error_site(t: Term) -> Term | None:
    """The first unjustified upward modifier in evaluation position, if any.

    An unchecked modifier counts as one checked with ``0``, so it is an error
    unless its role is equivalent to ``0`` (a modifier that changes nothing).
    """
    match t:
        case Mod(m, body):
            if m.direction == UP:
                check = BOT if m.check is None else m.check
                if not dominates(check, Amp(m.role)):
                    return t
            return amp_error_site(body)
        case App(f, _):
            return amp_error_site(f)
        case Let(_, m, _):
            return amp_error_site(m)
        case Check(b) | Fix(b):
            return amp_error_site(b)
        case If(c, _, _):
            return amp_error_site(c)
        case StrEq(a, b):
            return amp_error_site(a) or amp_error_site(b)
    return None


def amp_error(t: Term) -> bool:
    return amp_error_site(t) is not None


# ---------------------------------------------------------------------------
# Reduction
# ---------------------------------------------------------------------------

def step(cfg: EvalConfig | RoleExpr, t: Term) -> StepResult:
    """One reduction of ``t`` under the context role in ``cfg``."""
    if not isinstance(cfg, EvalConfig):
        cfg = EvalConfig(cfg)
    if cfg.amp_mode:
        site = amp_error_site(t)
        if site is not None:
            return AmpFailure(site)
    return _step(cfg.context_role, t, cfg.amp_mode)


def _congruence(res: StepResult, rebuild) -> StepResult:
    if isinstance(res, Reduced):
        return Reduced(rebuild(res.next))
    return res


def _step(r: RoleExpr, t: Term, amp: bool) -> StepResult:
    if is_value(t):
        return AtValue()
    match t:
        case App(f, a):
            if isinstance(f, Abs):
                return Reduced(subst(f.body, f.var, a))
            if is_value(f):
                return Stuck("application of a non-function", t)
            return _congruence(_step(r, f, amp), lambda f2: App(f2, a))
        case Fix(b):
            if isinstance(b, Abs):
                return Reduced(subst(b.body, b.var, t))
            if is_value(b):
                return Stuck("fix of a non-function", t)
            return _congruence(_step(r, b, amp), Fix)
        case Check(b):
            if isinstance(b, Guard):
                if dominates(r, b.role):
                    return Reduced(Unit(mark(b.role, b.body) if amp else b.body))
                return RoleFailure(b.role, r, t)
            if is_value(b):
                return Stuck("check of a non-guard", t)
            return _congruence(_step(r, b, amp), Check)
        case Let(x, m, n):
            if isinstance(m, Unit):
                return Reduced(subst(n, x, m.body))
            if is_value(m):
                return Stuck("let of a non-computation", t)
            return _congruence(_step(r, m, amp), lambda m2: Let(x, m2, n))
        case Mod(mod, b):
            if is_value(b):
                return Reduced(b)
            return _congruence(_step(apply_modifier(mod, r), b, amp),
                               lambda b2: Mod(mod, b2))
        case If(c, x, y):
            if isinstance(c, BaseVal) and isinstance(c.value, bool):
                return Reduced(x if c.value else y)
            if is_value(c):
                return Stuck("if on a non-boolean", t)
            return _congruence(_step(r, c, amp), lambda c2: If(c2, x, y))
        case StrEq(a, b):
            if not is_value(a):
                return _congruence(_step(r, a, amp), lambda a2: StrEq(a2, b))
            if not is_value(b):
                return _congruence(_step(r, b, amp), lambda b2: StrEq(a, b2))
            if isinstance(a, BaseVal) and isinstance(b, BaseVal):
                return Reduced(BaseVal(a == b))
            return Stuck("== on non-base values", t)
    raise TypeError(f"not a term: {t!r}")


def evaluate(cfg: EvalConfig | RoleExpr, t: Term, trace: bool = False) -> Outcome:
    """Iterate ``step`` until a value, an error, or the fuel runs out."""
    if not isinstance(cfg, EvalConfig):
        cfg = EvalConfig(cfg)
    seen = [t] if trace else None
    for n in range(cfg.fuel + 1):
        res = step(cfg, t)
        match res:
            case Reduced(nxt):
                if n == cfg.fuel:
                    break
                t = nxt
                if seen is not None:
                    seen.append(t)
            case AtValue():
                return Outcome(VALUE, t, n, None, seen)
            case RoleFailure():
                return Outcome(ROLE_ERROR, t, n, res, seen)
            case AmpFailure():
                return Outcome(AMP_ERROR, t, n, res, seen)
            case Stuck():
                return Outcome(STUCK, t, n, res, seen)
    return Outcome(FUEL_EXHAUSTED, t, cfg.fuel, None, seen)


def format_trace(role: RoleExpr, terms: list[Term]) -> list[str]:
    """One ``<role> |- t -> t'`` line per step."""
    rs = print_role(role)
    return [f"⟨{rs}⟩ ⊢ {print_term(a)} → {print_term(b)}"
            for a, b in zip(terms, terms[1:])]
