"""Executable versions of the metatheory.

Each ``check_*`` function takes a closed term and returns a ``Verdict``.
Ground truth comes from running the evaluator under every role class of a
small universe, so the checks are exact for that universe.  ``gen_typed_term``
supplies well-typed random terms; ``run_suite`` ties everything together and
produces a JSON-ready summary.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .evaluator import (AMP_ERROR, FUEL_EXHAUSTED, ROLE_ERROR, STUCK, VALUE,
                        DEFAULT_FUEL, EvalConfig, Reduced, amp_error, evaluate,
                        step)
from .roles import (BOT, DN, TOP, UP, Amp, Atom, Join, Meet, Neg, RoleExpr,
                    RoleModifier, RoleUniverse, dominates, enumerate_roles,
                    print_role)
from .syntax import (UNIT, Abs, App, Arrow, Base, BaseVal, Check, Comp, Fix, Guard,
                     GuardT, If, Let, Mod, StrEq, Term, Type, Unit, Var,
                     print_term)
from .typecheck import (NECESSARY, SUFFICIENT, SystemId, TypeError_, _Synth,
                        compatible, dominates_type, subtype, synthesize,
                        synthesize_amp)

DEFAULT_UNIVERSE = RoleUniverse(("A", "B"))
AMP_UNIVERSE = RoleUniverse(("A", "B"), (Atom("A"),))


@dataclass
class Verdict:
    name: str
    ok: bool
    detail: str = ""
    role: RoleExpr | None = None
    term: Term | None = None
    flagged: bool = False  # passed, but only with a witness chosen by hand

    def __bool__(self):
        return self.ok

    def to_json(self) -> dict:
        out = {"check": self.name, "ok": self.ok, "detail": self.detail}
        if self.role is not None:
            out["role"] = print_role(self.role)
        if self.term is not None:
            out["term"] = print_term(self.term)
        if self.flagged:
            out["flagged"] = True
        return out


class PreconditionError(Exception):
    """The term does not meet a harness precondition (usually: ill-typed)."""


# ---------------------------------------------------------------------------
# Safe sets
# ---------------------------------------------------------------------------

@dataclass
class SafeSetReport:
    term: Term
    universe: RoleUniverse
    classification: dict

    def roles_with(self, kind: str) -> list[RoleExpr]:
        return [r for r, k in self.classification.items() if k == kind]

    def upward_closed(self) -> bool:
        safe = self.roles_with(VALUE)
        return all(r in safe for s in safe for r in self.classification
                   if dominates(r, s))


def safe_set(t: Term, u: RoleUniverse = DEFAULT_UNIVERSE,
             fuel: int = DEFAULT_FUEL, amp_mode: bool = False) -> SafeSetReport:
    out = {}
    for r in enumerate_roles(u):
        out[r] = evaluate(EvalConfig(r, fuel, amp_mode), t).kind
    return SafeSetReport(t, u, out)


# ---------------------------------------------------------------------------
# Term generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermGenConfig:
    seed: int = 0
    max_depth: int = 4
    universe: RoleUniverse = DEFAULT_UNIVERSE
    target_system: SystemId = SUFFICIENT
    branch_free: bool = False
    amp: bool = False
    allow_fix: bool = True
    divergent: bool = False  # allow fix terms that never terminate


_BASES = ("Unit", "Int", "Str", "Bool")
_RETRIES = 20


class _Gen:
    def __init__(self, cfg: TermGenConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.sys = cfg.target_system
        self.counter = 0
        self.atoms = list(cfg.universe.atoms) or ["A"]
        self.synth = _Synth(self.sys, None, cfg.amp, "split")

    # -- helpers
    def fresh(self, base="x") -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def type_of(self, ctx, c, t) -> Type:
        return self.synth.syn(ctx, c, t)

    def role(self) -> RoleExpr:
        rng = self.rng
        a = Atom(rng.choice(self.atoms))
        b = Atom(rng.choice(self.atoms))
        return rng.choice([BOT, TOP, a, a, b, Neg(a), Meet(a, b), Join(a, b)])

    def up_role(self) -> RoleExpr:
        # in amp mode only raise roles whose amp is in the universe
        if self.cfg.amp:
            gens = [g for g in self.cfg.universe.amp_generators]
            return self.rng.choice([BOT] + gens + gens)
        return self.role()

    def guard_role(self) -> RoleExpr:
        if self.cfg.amp and self.rng.random() < 0.4 and self.cfg.universe.amp_generators:
            return Amp(self.rng.choice(self.cfg.universe.amp_generators))
        return self.role()

    def weaken(self, r: RoleExpr) -> RoleExpr:
        # a role that makes the annotation a supertype
        if self.rng.random() < 0.5:
            return r
        return Join(r, self.role()) if self.sys is SUFFICIENT else Meet(r, self.role())

    def vars_of(self, ctx, pred) -> list[str]:
        return [x for x, ty in ctx.items() if pred(ty)]

    # -- values
    def literal(self, base: str) -> BaseVal:
        rng = self.rng
        match base:
            case "Unit":
                return BaseVal(UNIT)
            case "Int":
                return BaseVal(rng.randint(0, 9))
            case "Str":
                return BaseVal(rng.choice(["a", "b", "file1"]))
            case "Bool":
                return BaseVal(rng.random() < 0.5)
        raise ValueError(base)

    def value(self, ctx, base: str) -> Term:
        vs = self.vars_of(ctx, lambda ty: ty == Base(base))
        if vs and self.rng.random() < 0.5:
            return Var(self.rng.choice(vs))
        return self.literal(base)

    def guard_val(self, ctx, c, d, base) -> Term:
        vs = self.vars_of(ctx, lambda ty: isinstance(ty, GuardT) and ty.body == Base(base))
        if vs and self.rng.random() < 0.5:
            return Var(self.rng.choice(vs))
        return Guard(self.guard_role(), self.value(ctx, base))

    def bool_term(self, ctx) -> Term:
        r = self.rng.random()
        if r < 0.5:
            return StrEq(self.value(ctx, "Str"), self.value(ctx, "Str"))
        return self.value(ctx, "Bool")

    def closed_value(self, d: int) -> Term:
        """A closed value of any shape."""
        k = self.rng.choice(["base", "abs", "guard", "unit"])
        base = self.rng.choice(_BASES)
        if k == "base" or d <= 0:
            return self.literal(base)
        if k == "abs":
            x = self.fresh()
            return Abs(x, Base(base), self.comp({x: Base(base)}, BOT, d - 1, base))
        if k == "guard":
            return Guard(self.role(), self.closed_value(d - 1))
        return Unit(self.comp({}, BOT, d - 1, base) if self.rng.random() < 0.5
                    else self.literal(base))

    # -- computations: terms of type [E] base
    def comp(self, ctx, c, d, body: str) -> Term:
        rng = self.rng
        cvars = self.vars_of(ctx, lambda ty: isinstance(ty, Comp) and ty.body == Base(body))
        if d <= 0:
            opts = ["unit", "check"] + (["var"] if cvars else [])
            kind = rng.choice(opts)
        else:
            weights = {"unit": 1, "check": 4, "mod": 4,
                       "guarded": 3 if self.cfg.amp else 2, "let": 2,
                       "app": 2, "var": 1 if cvars else 0,
                       "if": 0 if self.cfg.branch_free else 1,
                       "fix": 0.3 if self.cfg.allow_fix else 0}
            kinds = list(weights)
            kind = rng.choices(kinds, [weights[k] for k in kinds])[0]
        match kind:
            case "unit":
                return Unit(self.value(ctx, body))
            case "var":
                return Var(rng.choice(cvars))
            case "check":
                return Check(self.guard_val(ctx, c, d - 1, body))
            case "let":
                b1 = rng.choice(_BASES)
                m = self.comp(ctx, c, d - 1, b1)
                x = self.fresh()
                inner = dict(ctx)
                inner[x] = Base(b1)
                return Let(x, m, self.comp(inner, c, d - 1, body))
            case "mod":
                return self.modifier(ctx, c, d, body)
            case "guarded":
                # let y = check ({G} M) in y
                g = self.guard_role()
                inner_c = Join(c, g) if self.cfg.amp else c
                m = self.comp(ctx, inner_c, d - 1, body)
                y = self.fresh("y")
                return Let(y, Check(Guard(g, m)), Var(y))
            case "app":
                return self.app(ctx, c, d, body)
            case "if":
                return If(self.bool_term(ctx), self.comp(ctx, c, d - 1, body),
                          self.comp(ctx, c, d - 1, body))
            case "fix":
                return self.fix(ctx, c, d, body)
        raise AssertionError(kind)

    def modifier(self, ctx, c, d, body) -> Term:
        inner = self.comp(ctx, c, d - 1, body)
        if self.rng.random() < 0.5:
            r = self.up_role()
            check = None
            if self.cfg.amp and not dominates(c, Amp(r)):
                check = Amp(r)
            return Mod(RoleModifier(UP, r, check), inner)
        r = self.role()
        if self.sys is SUFFICIENT:
            eff = self.type_of(ctx, c, inner).effect
            if not dominates(r, eff):
                r = Join(r, eff)
        return Mod(RoleModifier(DN, r), inner)

    def app(self, ctx, c, d, body) -> Term:
        rng = self.rng
        kind = rng.choice(["base", "guard", "comp", "comp"])
        rb = rng.choice(_BASES)
        if kind == "base":
            arg = self.value(ctx, rb)
            annot = Base(rb)
        elif kind == "guard":
            arg = self.guard_val(ctx, c, d - 1, rb)
            ty = self.type_of(ctx, c, arg)
            annot = GuardT(self.weaken(ty.role), ty.body)
        else:
            arg = self.comp(ctx, c, d - 1, rb)
            ty = self.type_of(ctx, c, arg)
            annot = Comp(self.weaken(ty.effect), ty.body)
        x = self.fresh()
        inner = dict(ctx)
        inner[x] = annot
        return App(Abs(x, annot, self.comp(inner, c, d - 1, body)), arg)

    def fix(self, ctx, c, d, body) -> Term:
        x = self.fresh("r")
        if self.cfg.divergent and self.rng.random() < 0.5:
            e = self.role()
            y = self.fresh("y")
            # fix (\x:[e]T. let y = x in [y]) never reaches a value
            return Fix(Abs(x, Comp(e, Base(body)), Let(y, Var(x), Unit(Var(y)))))
        m = self.comp(ctx, c, d - 1, body)
        eff = self.type_of(ctx, c, m).effect
        annot = Comp(self.weaken(eff), Base(body))
        return Fix(Abs(x, annot, m))

    def top(self) -> Term:
        if self.cfg.max_depth <= 0:
            return self.closed_value(0)
        return self.comp({}, BOT, self.cfg.max_depth, self.rng.choice(_BASES))


def _accepts(cfg: TermGenConfig, t: Term) -> bool:
    try:
        if cfg.amp:
            synthesize_amp({}, BOT, t, cfg.target_system)
        else:
            synthesize(cfg.target_system, {}, t)
    except TypeError_:
        return False
    return True


def gen_typed_term(cfg: TermGenConfig) -> Term:
    """A closed term accepted by the target system; deterministic per seed."""
    g = _Gen(cfg)
    for _ in range(_RETRIES):
        t = g.top()
        if _accepts(cfg, t):
            return t
    return Unit(BaseVal(UNIT))


def gen_closed_value(seed: int, depth: int = 3, universe=DEFAULT_UNIVERSE) -> Term:
    g = _Gen(TermGenConfig(seed=seed, universe=universe))
    return g.closed_value(depth)


def gen_role(rng: random.Random, atoms=("A", "B"), depth: int = 3,
             amp: bool = False) -> RoleExpr:
    """Random role expression, used by the algebra property suites."""
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice([BOT, TOP] + [Atom(a) for a in atoms] * 3)
    k = rng.choice(["meet", "join", "neg"] + (["amp"] if amp else []))
    if k == "neg":
        return Neg(gen_role(rng, atoms, depth - 1, amp))
    if k == "amp":
        return Amp(gen_role(rng, atoms, depth - 1, amp))
    a = gen_role(rng, atoms, depth - 1, amp)
    b = gen_role(rng, atoms, depth - 1, amp)
    return Meet(a, b) if k == "meet" else Join(a, b)


def gen_type(rng: random.Random, depth: int = 3, atoms=("A", "B")) -> Type:
    if depth <= 0 or rng.random() < 0.3:
        return Base(rng.choice(_BASES))
    k = rng.choice(["arrow", "guard", "comp"])
    if k == "arrow":
        return Arrow(gen_type(rng, depth - 1, atoms), gen_type(rng, depth - 1, atoms))
    r = gen_role(rng, atoms, 2)
    body = gen_type(rng, depth - 1, atoms)
    return GuardT(r, body) if k == "guard" else Comp(r, body)


# ---------------------------------------------------------------------------
# Theorem harnesses
# ---------------------------------------------------------------------------

def _typed(sys: SystemId, t: Term) -> Type:
    try:
        return synthesize(sys, {}, t)
    except TypeError_ as e:
        raise PreconditionError(f"term is not typable in the {sys.value} system: {e}") \
            from None


def check_sufficiency(t: Term, u: RoleUniverse = DEFAULT_UNIVERSE,
                      fuel: int = DEFAULT_FUEL) -> Verdict:
    """Roles dominating the sufficient type never hit a role error or get stuck."""
    ty = _typed(SUFFICIENT, t)
    for r in enumerate_roles(u):
        if not dominates_type(r, ty):
            continue
        kind = evaluate(EvalConfig(r, fuel), t).kind
        if kind not in (VALUE, FUEL_EXHAUSTED):
            return Verdict("sufficiency", False, f"evaluation ended in {kind}", r, t)
    return Verdict("sufficiency", True)


def check_necessity(t: Term, u: RoleUniverse = DEFAULT_UNIVERSE,
                    fuel: int = DEFAULT_FUEL) -> Verdict:
    """Roles not dominating the necessary type diverge or hit a role error."""
    ty = _typed(NECESSARY, t)
    for r in enumerate_roles(u):
        if dominates_type(r, ty):
            continue
        kind = evaluate(EvalConfig(r, fuel), t).kind
        if kind not in (ROLE_ERROR, FUEL_EXHAUSTED):
            return Verdict("necessity", False, f"evaluation ended in {kind}", r, t)
    return Verdict("necessity", True)


def preservation_witness(sys: SystemId, before: Type, after: Type, r: RoleExpr):
    """A type for the reduct meeting the preservation statement, or None.

    For the necessary system the reduct's principal type may need subsumption
    to become compatible with ``before``; the least change that does so is
    used, which is also the witness most likely to satisfy the dominance
    implication.
    """
    if sys is SUFFICIENT:
        return after if subtype(SUFFICIENT, after, before) else None
    candidates = []
    if compatible(after, before):
        candidates.append(after)
    if isinstance(after, Comp) and isinstance(before, Comp) \
            and subtype(NECESSARY, after.body, before.body):
        candidates.append(Comp(after.effect, before.body))
    if subtype(NECESSARY, after, before):
        candidates.append(before)
    for w in candidates:
        if not dominates_type(r, w) or dominates_type(r, before):
            return w
    return None


def check_preservation(sys: SystemId, t: Term, r: RoleExpr,
                       fuel: int = DEFAULT_FUEL) -> Verdict:
    """Typing is preserved along the trace of ``t`` under ``r``."""
    ty = _typed(sys, t)
    cur = t
    flagged = False
    for _ in range(fuel):
        res = step(EvalConfig(r), cur)
        if not isinstance(res, Reduced):
            return Verdict("preservation", True, flagged=flagged)
        try:
            nty = synthesize(sys, {}, res.next)
        except TypeError_ as e:
            return Verdict("preservation", False, f"reduct is ill-typed: {e}", r, res.next)
        w = preservation_witness(sys, ty, nty, r)
        if w is None:
            return Verdict("preservation", False, "needs manual witness", r, res.next)
        flagged = flagged or w != nty
        cur, ty = res.next, nty
    return Verdict("preservation", True, "fuel exhausted", flagged=flagged)


def check_progress(sys: SystemId, t: Term, r: RoleExpr,
                   fuel: int = DEFAULT_FUEL) -> Verdict:
    """Well-typed terms never get stuck; in the sufficient system a dominating
    role also rules out role errors."""
    ty = _typed(sys, t)
    out = evaluate(EvalConfig(r, fuel), t)
    if out.kind == STUCK:
        return Verdict("progress", False, str(out), r, out.term)
    if sys is SUFFICIENT and dominates_type(r, ty) and out.kind == ROLE_ERROR:
        return Verdict("progress", False, "role error under a dominating role", r, out.term)
    return Verdict("progress", True)


def check_monotonicity(t: Term, u: RoleUniverse = DEFAULT_UNIVERSE,
                       fuel: int = DEFAULT_FUEL) -> Verdict:
    """A reduction possible under B is possible, with the same result, under A >= B."""
    roles = enumerate_roles(u)
    for b in roles:
        trace = evaluate(EvalConfig(b, fuel), t, trace=True).trace
        above = [a for a in roles if a != b and dominates(a, b)]
        for cur, nxt in zip(trace, trace[1:]):
            for a in above:
                res = step(EvalConfig(a), cur)
                if res != Reduced(nxt):
                    return Verdict("monotonicity", False,
                                   f"reduces under {print_role(b)} but not the same way",
                                   a, cur)
    if not safe_set(t, u, fuel).upward_closed():
        return Verdict("monotonicity", False, "safe set is not upward closed", None, t)
    return Verdict("monotonicity", True)


def check_amp_safety(t: Term, u: RoleUniverse = AMP_UNIVERSE,
                     fuel: int = DEFAULT_FUEL, sys: SystemId = SUFFICIENT,
                     roles: list | None = None) -> Verdict:
    """Terms typed in the amp-extended system never raise a role-modification error.

    ``roles`` replaces the enumeration of ``u`` when the term mentions more
    atoms than can be enumerated.
    """
    try:
        synthesize_amp({}, BOT, t, sys)
    except TypeError_ as e:
        raise PreconditionError(f"term is not typable with amp: {e}") from None
    for r in enumerate_roles(u) if roles is None else roles:
        out = evaluate(EvalConfig(r, fuel, amp_mode=True), t, trace=True)
        bad = next((s for s in out.trace if amp_error(s)), None)
        if out.kind == AMP_ERROR or bad is not None:
            return Verdict("amp_safety", False, "role modification error", r,
                           bad if bad is not None else out.term)
    return Verdict("amp_safety", True)


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

@dataclass
class CheckTally:
    passed: int = 0
    failed: int = 0
    flagged: int = 0
    counterexamples: list = field(default_factory=list)

    def add(self, v: Verdict, seed: int):
        if v.ok:
            self.passed += 1
            self.flagged += v.flagged
        else:
            self.failed += 1
            if len(self.counterexamples) < 5:
                self.counterexamples.append({**v.to_json(), "seed": seed})

    def to_json(self):
        return {"passed": self.passed, "failed": self.failed, "flagged": self.flagged,
                "counterexamples": self.counterexamples}


def run_suite(n: int = 100, seed: int = 0, depth: int = 4, fuel: int = DEFAULT_FUEL,
              universe: RoleUniverse = DEFAULT_UNIVERSE, n_mono: int | None = None,
              n_amp: int | None = None) -> dict:
    """Run every harness over generated terms and return a summary dict."""
    tallies = {k: CheckTally() for k in ("sufficiency", "necessity", "preservation",
                                         "progress", "monotonicity", "amp_safety")}
    roles = enumerate_roles(universe)
    n_mono = n if n_mono is None else n_mono
    n_amp = n if n_amp is None else n_amp
    for i in range(n):
        s = seed + i
        for sys, name in ((SUFFICIENT, "sufficiency"), (NECESSARY, "necessity")):
            t = gen_typed_term(TermGenConfig(s, depth, universe, sys))
            v = check_sufficiency(t, universe, fuel) if sys is SUFFICIENT \
                else check_necessity(t, universe, fuel)
            tallies[name].add(v, s)
        rng = random.Random(s)
        sys = rng.choice([SUFFICIENT, NECESSARY])
        t = gen_typed_term(TermGenConfig(s, depth, universe, sys))
        r = rng.choice(roles)
        tallies["preservation"].add(check_preservation(sys, t, r, fuel), s)
        tallies["progress"].add(check_progress(sys, t, r, fuel), s)
        if i < n_mono:
            tallies["monotonicity"].add(check_monotonicity(t, universe, fuel), s)
    for i in range(n_amp):
        s = seed + i
        t = gen_typed_term(TermGenConfig(s, depth, AMP_UNIVERSE, SUFFICIENT, amp=True))
        tallies["amp_safety"].add(check_amp_safety(t, AMP_UNIVERSE, fuel), s)
    failed = sum(t.failed for t in tallies.values())
    return {"status": "ok" if failed == 0 else "harness_failure",
            "seed": seed, "terms": n, "depth": depth, "fuel": fuel,
            "universe": list(universe.atoms),
            "checks": {k: v.to_json() for k, v in tallies.items()}}
