"""``lrbac`` command line.

Exit codes: 0 for an affirmative answer, 1 for a negative one (ill-typed,
role error, not provable, ...), 2 for usage and parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .evaluator import (FUEL_EXHAUSTED, STUCK, VALUE, AmpFailure, EvalConfig, RoleFailure, default_fuel, evaluate,
                        format_trace)
from .roles import RoleError, canonical_str, dominates, equiv, parse_role, print_role
from .syntax import (Arrow, Comp, ParseError, Program, is_sublanguage, parse_program,
                     parse_type, print_term)
from .typecheck import (SystemId, TypeError_, print_type_canonical,
                        subtype, type_report)

OK = 0
NEGATIVE = 1
USAGE = 2

STATUS_EXIT = {
    "ok": OK,
    "type_error": NEGATIVE,
    "role_error": NEGATIVE,
    "amp_error": NEGATIVE,
    "stuck": NEGATIVE,
    "fuel_exhausted": NEGATIVE,
    "refuted": NEGATIVE,
    "harness_failure": NEGATIVE,
    "parse_error": USAGE,
    "usage_error": USAGE,
}


class UsageError(Exception):
    pass


def corpus_path(name: str) -> Path:
    """Path of a file shipped in the example corpus."""
    return Path(str(resources.files("lrbac") / "corpus" / name))


def corpus_files() -> list[str]:
    return sorted(p.name for p in Path(str(resources.files("lrbac") / "corpus")).glob("*.lr"))


def read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    # fall back to the packaged corpus, so `examples/filesystem.lr` works anywhere
    q = corpus_path(p.name)
    if q.exists():
        return q.read_text(encoding="utf-8")
    raise UsageError(f"no such file: {path}")


def load(args) -> tuple[Program, object]:
    prog = parse_program(read_source(args.file))
    if args.define:
        if args.define not in prog.defs:
            raise UsageError(f"no definition named {args.define!r}")
        return prog, prog.defs[args.define]
    if prog.main is None:
        raise UsageError("file has no main term; pick a definition with --def")
    return prog, prog.main


def result_effect(ty):
    # effect of the type, or of the final result of a function type
    while isinstance(ty, Arrow):
        ty = ty.cod
    return ty.effect if isinstance(ty, Comp) else None


def envelope(status, type=None, effect=None, detail=None, trace=None, value=None):
    return {"status": status, "type": type, "effect": effect, "detail": detail,
            "trace": trace, "value": value}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_check(args):
    prog, term = load(args)
    sys_id = SystemId.parse(args.system)
    try:
        rep = type_report(sys_id, term, amp=args.amp)
    except TypeError_ as e:
        detail = {"rule": e.rule, "message": e.message,
                  "location": print_term(e.term) if e.term is not None else None}
        if len(e.roles) == 2:
            detail["needed_role"] = canonical_str(e.roles[1])
            detail["context_role"] = canonical_str(e.roles[0])
        return envelope("type_error", detail=detail), f"type error [{e.rule}]: {e.message}"
    ty_s = print_type_canonical(rep.type)
    eff = result_effect(rep.type)
    eff_s = canonical_str(eff) if eff is not None else None
    if args.type:
        want = parse_type(args.type, prog.roles)
        if not subtype(sys_id, rep.type, want):
            msg = (f"{print_type_canonical(want)} is not derivable; "
                   f"synthesized {ty_s}")
            return (envelope("type_error", ty_s, eff_s,
                             {"rule": "t-sub", "message": msg, "location": None}),
                    f"type error [t-sub]: {msg}")
    text = f"type: {ty_s}" + (f"\neffect: {eff_s}" if eff_s is not None else "")
    return envelope("ok", ty_s, eff_s), text


def _run(args, want_trace: bool):
    prog, term = load(args)
    if args.role is None:
        raise UsageError(f"{args.command} needs --role")
    role = prog.role(args.role)
    fuel = args.fuel if args.fuel is not None else default_fuel()
    out = evaluate(EvalConfig(role, fuel, args.amp), term, trace=want_trace)
    lines = format_trace(role, out.trace) if want_trace else []
    printed = [print_term(t) for t in out.trace] if want_trace else None
    detail = None
    match out.failure:
        case RoleFailure(needed, had, site):
            detail = {"rule": "err-chk", "needed_role": print_role(needed),
                      "context_role": print_role(had), "location": print_term(site)}
        case AmpFailure(site):
            detail = {"rule": "amp-err", "location": print_term(site)}
    if out.kind == VALUE:
        status, value = "ok", print_term(out.term)
    else:
        status, value = out.kind, None
        if out.kind == STUCK:
            detail = {"message": out.failure.reason, "location": print_term(out.failure.site)}
        elif out.kind == FUEL_EXHAUSTED:
            detail = {"message": str(out), "location": print_term(out.term)}
    lines.append(value if value is not None else str(out))
    env = envelope(status, detail=detail, trace=printed, value=value)
    return env, "\n".join(lines)


def cmd_eval(args):
    return _run(args, want_trace=False)


def cmd_trace(args):
    return _run(args, want_trace=True)


_RELATIONS = (">=", "<=", "==")


def cmd_prove(args):
    aliases = {}
    if args.file:
        aliases = parse_program(read_source(args.file)).roles
    claim = args.claim
    for op in _RELATIONS:
        if op in claim:
            lhs, rhs = claim.split(op, 1)
            break
    else:
        raise UsageError(f"claim must contain one of {', '.join(_RELATIONS)}")
    a = parse_role(lhs, aliases)
    b = parse_role(rhs, aliases)
    if op == ">=":
        ok = dominates(a, b)
    elif op == "<=":
        ok = dominates(b, a)
    else:
        ok = equiv(a, b)
    verdict = "true" if ok else "false"
    return envelope("ok" if ok else "refuted", value=verdict), verdict


def cmd_sublang(args):
    _, term = load(args)
    ok = is_sublanguage(term)
    verdict = "true" if ok else "false"
    return envelope("ok" if ok else "refuted", value=verdict), verdict


def cmd_oracle(args):
    from .oracle import run_suite
    fuel = args.fuel if args.fuel is not None else default_fuel()
    summary = run_suite(n=args.terms, seed=args.seed, depth=args.depth, fuel=fuel)
    lines = []
    for name, tally in summary["checks"].items():
        lines.append(f"{name:<14} passed {tally['passed']:>5}  failed {tally['failed']:>3}"
                     f"  flagged {tally['flagged']:>3}")
        for cx in tally["counterexamples"]:
            lines.append(f"    seed {cx['seed']}: {cx.get('role', '')} {cx.get('term', '')}"
                         f" ({cx['detail']})")
    status = summary["status"]
    env = envelope(status, detail=summary)
    return env, "\n".join(lines)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lrbac", description="Role-based access control calculus toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, needs_file=True):
        if needs_file:
            sp.add_argument("file", help="source file, corpus name, or - for stdin")
            sp.add_argument("--def", dest="define", metavar="NAME",
                            help="use a definition instead of the main term")
        sp.add_argument("--json", action="store_true", help="print a JSON envelope")

    sp = sub.add_parser("check", help="synthesize a type")
    common(sp)
    sp.add_argument("--system", default="sufficient",
                    help="sufficient (default) or necessary")
    sp.add_argument("--amp", action="store_true", help="use the amp-extended system")
    sp.add_argument("--type", help="also check that this type is derivable")

    for name, help_ in (("eval", "evaluate to a value or error"),
                        ("trace", "print every reduction step")):
        sp = sub.add_parser(name, help=help_)
        common(sp)
        sp.add_argument("--role", help="context role")
        sp.add_argument("--fuel", type=int, help="step budget (default $LRBAC_FUEL or 10000)")
        sp.add_argument("--amp", action="store_true", help="mark checked guards, detect amp errors")

    sp = sub.add_parser("prove", help='decide "R1 >= R2", "R1 <= R2" or "R1 == R2"')
    sp.add_argument("claim")
    sp.add_argument("file", nargs="?", help="take role aliases from this file")
    common(sp, needs_file=False)

    sp = sub.add_parser("sublang", help="is the term in the restricted sublanguage")
    common(sp)

    sp = sub.add_parser("oracle", help="run the property harnesses")
    common(sp, needs_file=False)
    sp.add_argument("--terms", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--fuel", type=int)
    return p


COMMANDS = {"check": cmd_check, "eval": cmd_eval, "trace": cmd_trace,
            "prove": cmd_prove, "sublang": cmd_sublang, "oracle": cmd_oracle}


def run_cli(argv: list[str]) -> tuple[int, str]:
    """Run a command; return the exit code and the text that would be printed."""
    as_json = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "fuel", None) is not None and args.fuel < 0:
            raise UsageError("--fuel must be non-negative")
        env, text = COMMANDS[args.command](args)
    except (ParseError, RoleError) as e:
        env, text = envelope("parse_error", detail={"message": str(e)}), f"parse error: {e}"
    except (UsageError, ValueError) as e:
        env, text = envelope("usage_error", detail={"message": str(e)}), f"usage error: {e}"
    code = STATUS_EXIT[env["status"]]
    return code, json.dumps(env, ensure_ascii=False) if as_json else text


def main(argv: list[str] | None = None) -> int:
    code, text = run_cli(sys.argv[1:] if argv is None else argv)
    stream = sys.stdout if code != USAGE else sys.stderr
    if text:
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
