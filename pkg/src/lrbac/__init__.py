"""Role-based access control as a typed lambda calculus.

Modules:

- ``roles``: role expressions, equivalence and dominance, canonical forms
- ``syntax``: terms, types, parser, printer, substitution
- ``evaluator``: small-step evaluation under a context role
- ``typecheck``: the sufficient and necessary type systems, amp extension
- ``oracle``: property harnesses over generated terms
- ``cli``: the ``lrbac`` command
"""
from .roles import (BOT, TOP, Amp, Atom, Bottom, Join, Meet, Neg, RoleError,
                    RoleModifier, RoleUniverse, Top, apply_modifier, canonical,
                    canonical_str, dominates, enumerate_roles, equiv, parse_role,
                    print_role, rminus)
from .syntax import (Abs, App, Arrow, Base, BaseVal, Check, Comp, Fix, Guard,
                     GuardT, If, Let, Mod, ParseError, Program, StrEq, Unit, Var,
                     alpha_eq, free_vars, is_sublanguage, is_value, parse_program,
                     parse_term, parse_type, print_term, print_type, subst)
from .evaluator import EvalConfig, Outcome, amp_error, evaluate, mark, step
from .typecheck import (NECESSARY, SUFFICIENT, SystemId, TypeError_, compatible,
                        dominates_type, subtype, synthesize, synthesize_amp)

__all__ = [
    "BOT", "TOP", "Amp", "Atom", "Bottom", "Join", "Meet", "Neg", "RoleError",
    "RoleModifier", "RoleUniverse", "Top", "apply_modifier", "canonical",
    "canonical_str", "dominates", "enumerate_roles", "equiv", "parse_role",
    "print_role", "rminus", "Abs", "App", "Arrow", "Base", "BaseVal", "Check", "Comp",
    "Fix", "Guard", "GuardT", "If", "Let", "Mod", "ParseError", "Program", "StrEq",
    "Unit", "Var", "alpha_eq", "free_vars", "is_sublanguage", "is_value",
    "parse_program", "parse_term", "parse_type", "print_term", "print_type", "subst",
    "EvalConfig", "Outcome", "amp_error", "evaluate", "mark", "step", "NECESSARY",
    "SUFFICIENT", "SystemId", "TypeError_", "compatible", "dominates_type", "subtype",
    "synthesize", "synthesize_amp",
]

__version__ = "0.1.0"
