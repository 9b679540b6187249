"""Command-line entry point ``pbcalc``."""
from __future__ import annotations

import argparse
import re
import sys
from fractions import Fraction
from pathlib import Path

from . import structfile
from .approx import approximate, weak_negation
from .evaluator import eval_ap_prefix, eval_la_prefix, evaluate, explain_failure
from .grammar import parse_formula, print_formula
from .la import branch_approx, decode_almost, fmt_branch, parse_branch, search_uniform_index, \
    verify_uniform_index
from .signature import check_structure_conformance, parse_signature
from .syntax import INF, Embed, SyntaxErrorPB
from . import workbench as wb

_VAR = re.compile(r"^([A-Za-z_][A-Za-z_]*?)(\d*)$")


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _formula(path, sig=None):
    return parse_formula(_read(path), sig)


def _pb(path, sig=None):
    phi = _formula(path, sig)
    if isinstance(phi, Embed):
        return phi.pb
    return phi


def _p_value(text: str):
    if text in ("inf", "oo"):
        return INF
    return int(text)


def _assignment(items) -> dict:
    env = {}
    for item in items or []:
        lhs, eq, rhs = item.partition("=")
        m = _VAR.match(lhs.strip())
        if not eq or not m:
            raise SyntaxErrorPB(f"bad assignment {item!r}; expected name=c1,c2,...")
        name, digits = m.groups()
        key = (name, int(digits)) if digits else (name, None)
        env[key] = tuple(Fraction(c) for c in rhs.replace(",", " ").split())
    return env


def _load_dir(path) -> list:
    files = sorted(Path(path).glob("*.struct"))
    if not files:
        raise ValueError(f"no .struct files in {path}")
    return [structfile.load(f) for f in files]


# ---------------------------------------------------------------------------
# commands


def cmd_parse(a):
    print(print_formula(_formula(a.formula)))


def cmd_approx(a):
    print(print_formula(approximate(_pb(a.formula), a.n)))


def cmd_neg(a):
    print(print_formula(weak_negation(_pb(a.formula), a.n)))


def cmd_branch_approx(a):
    phi = _formula(a.formula)
    h = parse_branch(_read(a.branch))
    print(print_formula(branch_approx(phi, h, a.n)))


def cmd_decode_almost(a):
    print(decode_almost(_pb(a.sigma), _pb(a.theta), a.n, a.m).render())


def cmd_search_uniform(a):
    family = _load_dir(a.structures)
    sigma, theta = _pb(a.sigma), _pb(a.theta)
    res = search_uniform_index(sigma, theta, a.n, family, a.m_max)
    print(res.render())
    if res.found:
        bad = verify_uniform_index(sigma, theta, a.n, res.m, family)
        print(f"re-verification at m = {res.m}: {len(bad)} counterexamples")
        for name, wit in bad:
            print(f"  {name}: " + "; ".join(wit))
    return 0 if res.found else 1


def cmd_eval(a):
    E = structfile.load(a.structure)
    phi = _formula(a.formula, E.signature)
    env = _assignment(a.assign)
    if isinstance(phi, Embed):
        phi = phi.pb
    ok = evaluate(E, phi, env)
    print("true" if ok else "false")
    if not ok:
        for line in explain_failure(E, phi, env):
            print(f"  {line}")
    return 0 if ok else 1


def cmd_ap(a):
    E = structfile.load(a.structure)
    phi = _formula(a.formula, E.signature)
    env = _assignment(a.assign)
    if a.branch:
        verdict = eval_la_prefix(E, phi, parse_branch(_read(a.branch)), env, a.N)
    else:
        verdict = eval_ap_prefix(E, phi.pb if isinstance(phi, Embed) else phi, env, a.N)
    print(verdict)
    return 0 if verdict.holds else 1


def cmd_check_structure(a):
    E = structfile.load(a.structure)
    rep = check_structure_conformance(parse_signature(_read(a.signature)), E)
    print(rep.render())
    return 0 if rep.ok else 1


def _emit(out: Path, files: dict):
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        path = out / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
        print(path)


def _theory_files(theory) -> dict:
    return {f"theory_{i}.pb": print_formula(ax) for i, ax in enumerate(theory, 1)}


def cmd_example(a):
    out = Path(a.emit)
    files: dict = {}
    if a.name == "reflexivity":
        phi = wb.build_reflexivity_sentence()
        files["sentence.pb"] = print_formula(phi)
        files["branch.br"] = fmt_branch(wb.reflexivity_branch(phi))
        files["line5.struct"] = structfile.dumps(wb.reflexivity_structure())
    elif a.name == "ulam":
        theory, sigma, theta, sentence = wb.build_ulam(a.k)
        files.update(_theory_files(theory))
        files.update({"sigma.pb": print_formula(sigma), "theta.pb": print_formula(theta),
                      "sentence.pb": print_formula(sentence)})
        for E in wb.ulam_family():
            files[f"structures/{E.name}.struct"] = structfile.dumps(E)
    elif a.name == "behrends":
        theory, sigma, theta, sentence = wb.build_behrends(a.k, a.p, a.q)
        files.update(_theory_files(theory))
        files.update({"sigma.pb": print_formula(sigma), "theta.pb": print_formula(theta),
                      "sentence.pb": print_formula(sentence)})
        E = wb.behrends_structure(a.p, a.q)
        files[f"{E.name}.struct"] = structfile.dumps(E)
    else:
        kf = wb.build_krivine_formulas(a.K, a.n, a.eps)
        files.update({"base.pb": print_formula(kf.base), "theta.pb": print_formula(kf.theta),
                      "sentence.pb": print_formula(kf.sentence)})
        for p in (1, 2, INF):
            E = wb.unit_basis_structure(4, p)
            files[f"{E.name}.struct"] = structfile.dumps(E)
    _emit(out, files)


def _vectors(text, dim):
    if not text:
        return wb.unit_vectors(dim)
    return [tuple(Fraction(c) for c in v.replace(",", " ").split()) for v in text.split(";")]


def cmd_krivine_search(a):
    E = structfile.load(a.structure)
    query = wb.KrivineQuery(_vectors(a.vectors, E.dim), a.n, [_p_value(p) for p in a.p.split(",")],
                            Fraction(a.eps), a.depth)
    res = wb.krivine_search(E, query)
    print(res.render())
    return 0 if res.best is not None else 1


def cmd_estimate_w(a):
    p = _p_value(a.p)
    if a.structures:
        family = [structfile.load(f) for f in a.structures]
    else:
        family = [wb.grid_structure(a.n, p, Fraction(1, 2), 1, limit=25)]
    if a.analytic:
        print(f"analytic fallback w = {wb.analytic_w(a.eps, a.constant)} "
              f"(ceil({a.constant}/eps), heuristic, not a proof)")
    res = wb.estimate_w(a.n, p, Fraction(a.eps), family, a.w_max, a.depth)
    print(res.render())
    return 0 if res.w is not None else 1


def cmd_suite(a):
    from .suite import run_all
    rep = run_all(a.seed, Fraction(a.scale))
    print(rep.render(timings=not a.no_timings))
    return 0 if rep.ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pbcalc", description="approximation calculus workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        return sp

    sp = add("parse", cmd_parse, "parse a formula file and re-print it")
    sp.add_argument("formula")
    for name, fn, h in (("approx", cmd_approx, "n-approximation of a formula"),
                        ("neg", cmd_neg, "weak approximate negation")):
        sp = add(name, fn, h)
        sp.add_argument("--n", type=int, required=True)
        sp.add_argument("formula")
    sp = add("branch-approx", cmd_branch_approx, "level-n formula along a branch")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--branch", required=True)
    sp.add_argument("formula")
    sp = add("decode-almost", cmd_decode_almost, "almost version of sigma => theta")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("sigma")
    sp.add_argument("theta")
    sp = add("search-uniform", cmd_search_uniform, "least uniform index over a structure directory")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m-max", type=int, required=True)
    sp.add_argument("sigma")
    sp.add_argument("theta")
    sp.add_argument("structures")
    sp = add("eval", cmd_eval, "evaluate a finitary formula on a structure")
    sp.add_argument("structure")
    sp.add_argument("formula")
    sp.add_argument("--assign", action="append", metavar="x1=c1,c2")
    sp = add("ap", cmd_ap, "approximate truth up to level N")
    sp.add_argument("--N", type=int, default=8)
    sp.add_argument("--branch")
    sp.add_argument("structure")
    sp.add_argument("formula")
    sp.add_argument("--assign", action="append", metavar="x1=c1,c2")
    sp = add("check-structure", cmd_check_structure, "check bounds and moduli of a signature")
    sp.add_argument("structure")
    sp.add_argument("signature")
    sp = add("example", cmd_example, "write example formulas and structures")
    sp.add_argument("name", choices=["reflexivity", "ulam", "behrends", "krivine"])
    sp.add_argument("--emit", required=True)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--q", type=int, default=2)
    sp.add_argument("--K", default="1")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--eps", default="1/2")
    sp = add("krivine-search", cmd_krivine_search, "block-basis search for l_p copies")
    sp.add_argument("structure")
    sp.add_argument("--vectors", help="';'-separated vectors; default: the unit vectors")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--eps", default="1/2")
    sp.add_argument("--depth", type=int, default=25)
    sp.add_argument("--p", default="1,2,inf", help="comma-separated candidates")
    sp = add("estimate-w", cmd_estimate_w, "empirical index w(n, p, eps)")
    sp.add_argument("structures", nargs="*")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--p", default="2")
    sp.add_argument("--eps", default="1")
    sp.add_argument("--w-max", type=int, default=32)
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--analytic", action="store_true", help="also print the ceil(c/eps) fallback")
    sp.add_argument("--constant", default="2")
    sp = add("suite", cmd_suite, "run the property battery")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--scale", default="1", help="corpus size multiplier (a rational)")
    sp.add_argument("--no-timings", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args) or 0
    except BrokenPipeError:
        return 0
    except (OSError, ValueError, ArithmeticError) as e:
        print(f"pbcalc: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
