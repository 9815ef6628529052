"""Command-line entry point ``spectral-tree-lab``.

Exit codes: 0 success, 2 invalid input, 3 numerical certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .dyck_codes import (BUILTIN_CODES, Meander, PrefixCode, bound_exact_code, bound_kl, bound_trivial,
                         code_deltas,
                         compress, decompose, profile)
from .errors import CertificationError, MalformedCodeError, ValidationError
from .experiments import (DEFAULT_TAIL_L, ExperimentConfig, _to_csv, bound_report, convergence_rows,
                          run_bound_report, size_distribution_rows, survey_rows)
from .mh_walks import builtin_code
from .sampling import Overflow, SeededRng, sample_bienayme, sample_conditioned_bienayme, sample_uniform_tree
from .spectra import DEFAULT_TOL, top_eigenvalues
from .surgery import Thresholds, classify_rewire_pair, is_nice, make_nice, rewire
from .tree_core import (LabeledTree, format_edge_list, format_prufer, parse_edge_list, parse_prufer,
                        prufer_encode, read_tree)

EXIT_OK, EXIT_INVALID, EXIT_CERTIFICATION = 0, 2, 3

_GLOBAL_DEFAULTS = {"seed": 1, "workers": 1, "format": None, "out": None}


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed (default 1)")
    g.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="worker processes (default 1)")
    g.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS,
                   help="output format (default depends on the command)")
    g.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    return p


def _load_tree(source: str) -> LabeledTree:
    """Edge-list or Prüfer file, '-' for stdin."""
    if source != "-":
        if not Path(source).is_file():
            raise ValidationError(f"no such tree file: {source}")
        return read_tree(source)
    text = sys.stdin.read()
    stripped = text.strip()
    if "," in stripped and "\n" not in stripped:
        return parse_prufer(stripped)
    return parse_edge_list(text)


def _load_code(spec: str) -> PrefixCode:
    if spec in BUILTIN_CODES:
        return PrefixCode.builtin(spec)
    path = Path(spec)
    if not path.is_file():
        raise ValidationError(f"{spec!r} is neither a built-in code {sorted(BUILTIN_CODES)} nor a file")
    words = [line.split("#", 1)[0].strip() for line in path.read_text().splitlines()]
    return PrefixCode([w for w in words if w], name=path.stem)


def _parse_overrides(items) -> dict:
    fields = Thresholds.__dataclass_fields__
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or key not in fields:
            raise ValidationError(f"threshold override must be KEY=VALUE with KEY in {sorted(fields)}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ValidationError(f"threshold {key} needs a number, got {value!r}") from None
    return out


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _rows_out(args, rows: list[dict], default: str = "csv") -> None:
    fmt = args.format or default
    _emit(args, _to_csv(rows) if fmt == "csv" else json.dumps(rows, indent=2) + "\n")


def _json_out(args, obj) -> None:
    _emit(args, json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if hasattr(x, "item"):
        return x.item()
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


# commands

def cmd_sample(args) -> None:
    rng = SeededRng(args.seed)
    if args.model != "bienayme" and args.n is None:
        raise ValidationError(f"--n is required for the {args.model} model")
    trees = []
    for i in range(args.count):
        stream = rng.stream(args.n or 0, i)
        if args.model == "uniform":
            trees.append(sample_uniform_tree(args.n, stream))
        elif args.model == "conditioned":
            trees.append(sample_conditioned_bienayme(args.n, stream).to_labeled_tree())
        else:
            res = sample_bienayme(args.lam, stream, args.node_cap)
            if isinstance(res, Overflow):
                raise ValidationError(f"draw {i} exceeded the node cap {args.node_cap}")
            trees.append(res.to_labeled_tree())
    if args.format == "json":
        _json_out(args, [{"n": t.n, "edges": t.edges(), "prufer": list(prufer_encode(t)) if t.n >= 2 else None}
                         for t in trees])
    elif args.tree_format == "prufer":
        _emit(args, "".join(format_prufer(t) + "\n" for t in trees))
    else:
        _emit(args, "\n".join(format_edge_list(t) for t in trees))


def cmd_spectrum(args) -> None:
    tree = _load_tree(args.tree)
    res = top_eigenvalues(tree, min(args.k, tree.n), args.tol, method=args.method)
    rows = [{"index": i + 1, "eigenvalue": v, "error_bound": b}
            for i, (v, b) in enumerate(zip(res.eigenvalues, res.error_bounds))]
    if (args.format or "csv") == "json":
        _json_out(args, {"n": tree.n, "max_degree": tree.max_degree, "tol": args.tol,
                         "eigenvalues": rows, "diagnostics": res.diagnostics})
    else:
        _rows_out(args, rows)


def _parse_path(text: str) -> Meander:
    """Heights ('0121210', '0,1,2,1,0') or steps ('1100', 'UUDD')."""
    text = text.strip()
    if text and (set(text) <= set("UD") or (text[0] == "1" and set(text) <= set("01"))):
        return Meander.from_steps(text)
    return Meander.parse(text)


def cmd_decompose(args) -> None:
    code = _load_code(args.code)
    path = _parse_path(args.path)
    parts = decompose(code, path)
    comp = compress(parts)
    prof = profile(parts)
    out = {
        "path": str(path), "code": [str(w) for w in code.words],
        "parts": [{"positions": list(p), "word": b, "word_text": str(code.words[b])} for p, b in parts.parts],
        "profile": list(prof.t), "two_k": prof.two_k,
        "pi_prime": [list(p) for p in comp.primes],
        "compressed": [{"positions": list(h), "word": b} for h, b in comp.parts],
        "blocks": {str(b): list(v) for b, v in comp.blocks.items()},
    }
    if args.tree:
        tree = _load_tree(args.tree)
        deltas = code_deltas(tree, code)
        out["word_deltas"] = list(deltas)
        out["max_degree"] = tree.max_degree
        exact = bound_exact_code(code, prof, deltas)
        kl = bound_kl(code, prof, tree.max_degree, deltas)
        out["bound_exact_code"] = exact.exact if exact.exact is not None else exact.value
        out["bound_kl"] = kl.value
        trivial = bound_trivial(prof.k, tree.max_degree)
        out["bound_trivial"] = {"catalan_form": trivial.catalan_form, "crude": trivial.crude}
    _json_out(args, out)


def cmd_bounds(args) -> None:
    tree = _load_tree(args.tree)
    rep = bound_report(tree, args.code, args.kappa, args.preset, args.tol, args.require_typical)
    _json_out(args, rep)


def cmd_rewire(args) -> None:
    tree = _load_tree(args.tree)
    new = rewire(tree, args.v, args.w)
    before = top_eigenvalues(tree, 1, args.tol).lambda1
    after = top_eigenvalues(new, 1, args.tol).lambda1
    if args.format == "json":
        out = {"v": args.v, "w": args.w, "lambda_before": before, "lambda_after": after, "edges": new.edges()}
        if tree.n >= 3:
            th = Thresholds.from_n(tree.n, **_parse_overrides(args.threshold))
            pair = classify_rewire_pair(tree, args.v, args.w, args.tol, th, before)
            out.update({"status": pair.status, "safety_conditions": list(pair.conditions)})
        _json_out(args, out)
    else:
        _emit(args, f"# lambda1 before {before!r} after {after!r}\n" + format_edge_list(new))


def cmd_make_nice(args) -> None:
    tree = _load_tree(args.tree)
    th = Thresholds.from_n(tree.n, **_parse_overrides(args.threshold))
    res = make_nice(tree, args.tol, th, debug=args.debug)
    if args.log:
        Path(args.log).write_text(_to_csv(res.log_rows()) or "step,v,w,lambda1,leaves\n")
    if args.format == "json":
        _json_out(args, {"steps": res.log_rows(), "lambda_initial": res.lambda_initial,
                         "lambda_final": res.lambda_final, "report": res.report.as_dict(),
                         "edges": res.tree.edges()})
    else:
        _emit(args, f"# lambda1 before {res.lambda_initial!r} after {res.lambda_final!r} "
                    f"steps {len(res.steps)}\n" + format_edge_list(res.tree))


def cmd_check(args) -> None:
    tree = _load_tree(args.tree)
    th = Thresholds.from_n(tree.n, **_parse_overrides(args.threshold))
    _json_out(args, is_nice(tree, th).as_dict())


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(n_grid=tuple(args.n_grid), reps=args.reps, beta=args.beta, seed=args.seed,
                            workers=args.workers, tail_L=args.tail_L, tol=args.tol)


def cmd_experiment(args) -> None:
    if args.experiment == "convergence":
        _rows_out(args, convergence_rows(_config(args)))
    elif args.experiment == "typicality":
        _rows_out(args, survey_rows(_config(args)))
    elif args.experiment == "sizes":
        _rows_out(args, size_distribution_rows(args.n_max, args.reps, args.seed, args.workers))
    else:
        tree = _load_tree(args.tree) if args.tree else None
        if tree is None and args.n is None:
            raise ValidationError("bound-report needs --n or --tree")
        builtin_code(args.code)  # fail on a bad code name before sampling
        text = run_bound_report(n=args.n, tree=tree, code=args.code, kappa=args.kappa, seed=args.seed,
                                retry_cap=args.retry_cap, require_typical=args.require_typical,
                                preset=args.preset, tol=args.tol)
        _emit(args, text + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="spectral-tree-lab", parents=[common],
                                     description="Random trees, their top eigenvalues and walk-count bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", parents=[common], help="sample random labeled trees")
    p.add_argument("--n", type=int, help="tree size (uniform and conditioned models)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--model", choices=("uniform", "bienayme", "conditioned"), default="uniform",
                   help="uniform labeled tree, Poisson branching tree, or one conditioned on size n")
    p.add_argument("--lam", type=float, default=1.0, help="offspring mean of the bienayme model")
    p.add_argument("--node-cap", type=int, default=10**7)
    p.add_argument("--tree-format", choices=("edges", "prufer"), default="edges")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("spectrum", parents=[common], help="certified top eigenvalues of a tree")
    p.add_argument("tree", help="edge-list or Prüfer file, '-' for stdin")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--method", choices=("auto", "lanczos", "bisection"), default="auto")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("decompose", parents=[common], help="decompose a Dyck path under a prefix code")
    p.add_argument("path", help="heights, e.g. 0121210 or 0,1,2,1,0")
    p.add_argument("--code", default="cstar",
                   help=f"built-in code {sorted(BUILTIN_CODES)} or a file with one word per line")
    p.add_argument("--tree", help="tree file; adds per-word path counts and profile bounds")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bounds", parents=[common], help="lambda_1 against the degree-based bounds")
    p.add_argument("tree")
    p.add_argument("--code", default="analysis50")
    p.add_argument("--kappa", type=float)
    p.add_argument("--preset", choices=("degree", "cluster"), default="degree")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--require-typical", action="store_true",
                   help="refuse non-typical trees and evaluate the typed bound after make_nice")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("rewire", parents=[common], help="rewire v's edges onto w")
    p.add_argument("tree")
    p.add_argument("v", type=int)
    p.add_argument("w", type=int)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--threshold", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("make-nice", parents=[common], help="rewire a typical tree until it is nice")
    p.add_argument("tree")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--threshold", action="append", metavar="KEY=VALUE",
                   help="override a threshold, e.g. kappa=3 (repeatable)")
    p.add_argument("--log", help="CSV file for the step log")
    p.add_argument("--debug", action="store_true", help="re-check typicality after every step")
    p.set_defaults(func=cmd_make_nice)

    p = sub.add_parser("check", parents=[common], help="typicality and niceness conditions of a tree")
    p.add_argument("tree")
    p.add_argument("--threshold", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("experiment", parents=[common], help="seeded Monte Carlo experiments")
    exp = p.add_subparsers(dest="experiment", required=True)
    for name, help_ in (("convergence", "lambda_1 and lambda_k(n) against degree statistics"),
                        ("typicality", "frequencies of the typicality conditions")):
        q = exp.add_parser(name, parents=[common], help=help_)
        q.add_argument("--n-grid", type=int, nargs="+", default=[300, 3000, 30000])
        q.add_argument("--reps", type=int, default=200)
        q.add_argument("--beta", type=float, default=0.3)
        q.add_argument("--tail-L", dest="tail_L", type=float, default=DEFAULT_TAIL_L)
        q.add_argument("--tol", type=float, default=DEFAULT_TOL)
    q = exp.add_parser("sizes", parents=[common], help="total-progeny distribution of Poisson(1) trees")
    q.add_argument("--n-max", type=int, default=60)
    q.add_argument("--reps", type=int, default=10**6)
    q = exp.add_parser("bound-report", parents=[common], help="bound report for a sampled or given tree")
    q.add_argument("--n", type=int)
    q.add_argument("--tree")
    q.add_argument("--code", default="analysis50")
    q.add_argument("--kappa", type=float)
    q.add_argument("--preset", choices=("degree", "cluster"), default="degree")
    q.add_argument("--retry-cap", type=int, default=20)
    q.add_argument("--tol", type=float, default=DEFAULT_TOL)
    q.add_argument("--require-typical", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in _GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        args.func(args)
    except MalformedCodeError as exc:
        print(f"error: {exc} (uncovered path: {exc.witness})", file=sys.stderr)
        return EXIT_INVALID
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CertificationError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
