"""Command line entry point: ``rsparam <subcommand> ...``.

Output is JSON on stdout (or ``--out``), with sorted keys, so identical
inputs give byte-identical output.  Exit codes: 0 success, 1 a requested
check failed, 2 a parse or configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path

from .algebra import LinComb
from .renorm import (Character, CharacterError, Renormalization, delta_plus_audit,
                     degree_preserving_suite, hopf_suite, is_degree_preserving, make_R_ell,
                     preparation_suite, random_character)
from .rules import (GenerationError, SpecError, generate_basis, resolve_spec,
                    subcriticality_check)
from .trees import TreeError, parse_plus, parse_tree

DEFAULT_SEED = 42
DEFAULT_SPEC = "pam"


class ConfigError(ValueError):
    pass


# -- helpers -----------------------------------------------------------------
def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(args, obj) -> None:
    text = obj if isinstance(obj, str) else _dumps(obj)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _spec(args):
    try:
        return resolve_spec(args.spec)
    except FileNotFoundError as exc:
        raise ConfigError(f"spec not found: {args.spec}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid spec {args.spec}: {exc}") from exc


def _load_preparation(args, spec, basis):
    """R_ell from --R (a character list, or {"character": [...], "with_ext": bool})."""
    with_ext = not getattr(args, "no_ext", False)
    path = getattr(args, "R", None)
    if path is None:
        return None
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"preparation file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"preparation file is not JSON: {exc}") from exc
    if isinstance(obj, dict):
        with_ext = bool(obj.get("with_ext", with_ext))
        obj = obj.get("character", [])
    ell = Character.from_json_obj(obj, spec.d)
    ell.validate(basis)
    return make_R_ell(ell, spec.alpha, spec.beta, spec.extract_bare_noise, with_ext)


def _preparation_or_random(args, spec, basis, rng):
    R = _load_preparation(args, spec, basis)
    if R is None:
        ell = random_character(basis, rng)
        R = make_R_ell(ell, spec.alpha, spec.beta, spec.extract_bare_noise,
                       not getattr(args, "no_ext", False))
        R.character = ell
    return R


def _trees_arg(args, spec, basis):
    if getattr(args, "tree", None):
        return [parse_tree(args.tree, spec.d)]
    return list(basis.trees)


# -- subcommands --------------------------------------------------------------
def cmd_gen(args) -> int:
    spec = _spec(args)
    basis = generate_basis(spec)
    out = basis.to_dict()
    out["diagnostics"] = subcriticality_check(basis)
    _emit(args, out)
    return 0


def cmd_coproduct(args) -> int:
    spec = _spec(args)
    t = parse_tree(args.tree, spec.d)
    _emit(args, spec.hopf().coaction(t).to_json_obj())
    return 0


def cmd_coproduct_plus(args) -> int:
    spec = _spec(args)
    p = parse_plus(args.tree, spec.d)
    _emit(args, spec.hopf().coproduct_plus(p).to_json_obj())
    return 0


def cmd_antipode(args) -> int:
    spec = _spec(args)
    p = parse_plus(args.tree, spec.d)
    _emit(args, spec.hopf().antipode(p).to_json_obj())
    return 0


def cmd_renormalize(args) -> int:
    spec = _spec(args)
    basis = generate_basis(spec)
    R = _preparation_or_random(args, spec, basis, random.Random(args.seed))
    ren = Renormalization(R, spec.hopf())
    rows = []
    for t in _trees_arg(args, spec, basis):
        rows.append({"tree": t.key, "degree": str(spec.deg(t)),
                     "R": R(t).to_json_obj(), "M_R": ren.M(t).to_json_obj(),
                     "delta_R": ren.delta(t).to_json_obj()})
    out = {"spec": spec.name, "preparation": R.name, "trees": rows}
    if getattr(R, "character", None) is not None:
        out["character"] = R.character.to_json_obj()
    _emit(args, out)
    return 0


def cmd_check(args) -> int:
    spec = _spec(args)
    basis = generate_basis(spec)
    rng = random.Random(args.seed)
    suite = args.suite
    if suite == "hopf":
        report = hopf_suite(basis)
    elif suite == "prep":
        runs = []
        given = _load_preparation(args, spec, basis)
        for k in range(1 if given else args.characters):
            if given:
                R, ell = given, None
            else:
                ell = random_character(basis, rng)
                R = make_R_ell(ell, spec.alpha, spec.beta, spec.extract_bare_noise, not args.no_ext)
            res = preparation_suite(basis, R, check_neumann=not args.skip_neumann)
            res["character"] = ell.to_json_obj() if ell is not None else None
            runs.append(res)
        report = {"runs": runs, "ok": all(r["ok"] for r in runs)}
    elif suite == "degpres":
        R = _preparation_or_random(args, spec, basis, rng)
        report = degree_preserving_suite(basis, R)
        report["is_degree_preserving"] = is_degree_preserving(R, basis)
    elif suite == "tower":
        R = _preparation_or_random(args, spec, basis, rng)
        report = delta_plus_audit(basis, R)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown suite {suite}")
    report = {"suite": suite, "spec": spec.name, "basis_size": len(basis.trees), "report": report,
              "ok": report["ok"]}
    if not report["ok"]:
        report["error"] = f"suite {suite} failed"
    _emit(args, report)
    return 0 if report["ok"] else 1


def cmd_model(args) -> int:
    from .lab.checks import LabConfig, build_models, dumps_report, lab_report
    from .lab.brackets import BracketMap
    spec = _spec(args)
    if spec.d != 1:
        raise ConfigError("the model lab works in dimension d = 1")
    basis = generate_basis(spec)
    R = _preparation_or_random(args, spec, basis, random.Random(args.seed))
    if args.J < 4 or args.scaling_J < 4:
        raise ConfigError("grid level J must be at least 4")
    cfg = LabConfig(J=args.J, scaling_J=args.scaling_J, seed=args.seed)
    report = lab_report(spec, basis, R, cfg, scaling=not args.no_scaling)
    if getattr(R, "character", None) is not None:
        report["character"] = R.character.to_json_obj()
    if not report["pass"]:
        report["error"] = "model checks failed"
    text = dumps_report(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.dump:
        grid, lp, model, rm = build_models(spec, R, cfg.J, cfg.seed)
        brackets = BracketMap(rm, lp)
        fields = {"noise": model.noise}
        for i, t in enumerate(basis.negative_trees()):
            fields[f"bracket_R_{i}"] = brackets(t)
        dump_fields(Path(args.dump), grid, fields,
                    {f"bracket_R_{i}": t.key for i, t in enumerate(basis.negative_trees())})
    return 0 if report["pass"] else 1


def dump_fields(directory: Path, grid, fields: dict, labels: dict | None = None) -> None:
    """Flat little-endian float64 files with a JSON sidecar of grid metadata."""
    import numpy as np
    directory.mkdir(parents=True, exist_ok=True)
    index = {}
    for name, values in fields.items():
        np.asarray(values, dtype="<f8").tofile(directory / f"{name}.f64")
        index[name] = {"file": f"{name}.f64", "label": (labels or {}).get(name, name)}
    sidecar = {"grid": grid.metadata(), "dtype": "<f8", "fields": index}
    (directory / "fields.json").write_text(_dumps(sidecar), encoding="utf-8")


def cmd_explain(args) -> int:
    spec = _spec(args)
    basis = generate_basis(spec)
    if args.tree:
        t = parse_tree(args.tree, spec.d)
        _emit(args, {"tree": t.key, "degree": str(spec.deg(t)), "formal_degree": str(t.formal_degree),
                     "noises": t.noises, "conforms": spec.conforms(t), "in_basis": t in set(basis.trees)})
        return 0
    diag = subcriticality_check(basis)
    rows = [{"tree": t.key, "degree": str(spec.deg(t)), "noises": t.noises,
             "negative": spec.deg(t) < 0} for t in basis.trees]
    _emit(args, {"spec": spec.to_dict(), "degrees": diag["dimensions"],
                 "noise_profile": {str(k): v for k, v in diag["noise_profile"].items()},
                 "noise_cutoff_binding": diag["noise_cutoff_binding"], "trees": rows})
    return 0


# -- parser -------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rsparam", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tree: bool = False, prep: bool = False):
        sp.add_argument("--spec", default=DEFAULT_SPEC, help="shipped name (kpz, pam, phi4) or JSON path")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        if tree:
            sp.add_argument("--tree", help="tree expression, e.g. 'Xi I_(0)[Xi]'")
        if prep:
            sp.add_argument("--R", help="character JSON defining R_ell (random if omitted)")
            sp.add_argument("--no-ext", action="store_true",
                            help="contract without the extended decoration (not degree preserving)")

    common(sub.add_parser("gen", help="generate the basis of T and T+"))
    for name, helptext in (("coproduct", "coaction Delta of a tree"),
                           ("coproduct-plus", "coproduct Delta+ of a plus tree"),
                           ("antipode", "antipode S+ of a plus tree")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--tree", required=True)
    common(sub.add_parser("renormalize", help="R, M_R and delta_R on trees"), tree=True, prep=True)
    sp = sub.add_parser("check", help="run an exact algebraic suite")
    common(sp, prep=True)
    sp.add_argument("--suite", required=True, choices=["hopf", "prep", "degpres", "tower"])
    sp.add_argument("--characters", type=int, default=25, help="random characters for --suite prep")
    sp.add_argument("--skip-neumann", action="store_true")
    sp = sub.add_parser("model", help="numerical model lab report")
    common(sp, prep=True)
    sp.add_argument("--J", type=int, default=12)
    sp.add_argument("--scaling-J", type=int, default=15)
    sp.add_argument("--no-scaling", action="store_true")
    sp.add_argument("--report", help="write the JSON report here")
    sp.add_argument("--dump", help="directory for raw field dumps")
    common(sub.add_parser("explain", help="degree and noise tables"), tree=True)
    return p


COMMANDS = {
    "gen": cmd_gen, "coproduct": cmd_coproduct, "coproduct-plus": cmd_coproduct_plus,
    "antipode": cmd_antipode, "renormalize": cmd_renormalize, "check": cmd_check,
    "model": cmd_model, "explain": cmd_explain,
}


def _apply_threads() -> None:
    raw = os.environ.get("RS_THREADS")
    if raw is None:
        return
    if not raw.isdigit() or int(raw) < 1:
        raise ConfigError("RS_THREADS must be a positive integer")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, raw)


def _fail(code: int, message: str, **extra) -> int:
    sys.stdout.write(_dumps({"error": message, **extra}))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        _apply_threads()
        return COMMANDS[args.command](args)
    except TreeError as exc:
        return _fail(2, str(exc), position=getattr(exc, "pos", None))
    except (ConfigError, SpecError, CharacterError, GenerationError) as exc:
        return _fail(2, str(exc))


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["main", "build_parser", "dump_fields", "LinComb", "Fraction"]
