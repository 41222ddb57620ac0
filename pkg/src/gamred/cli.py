"""Command-line front end: ``gamred <subcommand> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .acyclic import dump_trees
from .coloring import (
    intersection_color,
    list_color_intersection,
    parse_lists,
    parse_partition_matroid,
)
from .errors import GenerationFailed, InvariantViolation
from .flow import coloring_number, dump_flow
from .generate import GenParams, gen_random
from .instance import normalize, parse_instance, rank, serialize_instance
from .reduce import PartitionReduction, debug_checks_enabled, run_pipeline
from .verify import DEFAULT_BUDGET, DEFAULT_SAMPLES, verify_weak_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _load_instance(path: str):
    try:
        return parse_instance(_read(path))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def _emit(data) -> None:
    sys.stdout.write(json.dumps(data, indent=2) + "\n")


def _header(args) -> dict:
    return {"version": __version__, "seed": args.seed}


def _verify_mode(args) -> str:
    if args.exhaustive:
        return "exhaustive"
    if args.samples is not None:
        return "sampled"
    return "auto"


# ---------------------------------------------------------------------------
# subcommands


def _reduce_one(job):
    path, opts, index = job
    inst = _load_instance(path)
    work, _ = normalize(inst)
    check = False if opts["fast"] else (opts["verify"] or debug_checks_enabled())
    res = run_pipeline(work, check_flow=check)
    suffix = "" if index is None else f".{index}"
    if opts["emit_flow"]:
        Path(opts["emit_flow"] + suffix).write_text(dump_flow(res.flow))
    if opts["emit_trees"]:
        Path(opts["emit_trees"] + suffix).write_text(dump_trees(res.decomposition))
    out = {"instance": path, **opts["header"], **res.reduction.to_json()}
    ok = True
    if opts["verify"]:
        rep = verify_weak_map(
            inst,
            res.reduction,
            mode=opts["mode"],
            samples=opts["samples"],
            seed=opts["seed"],
            budget=opts["budget"],
        )
        out["verification"] = rep.to_dict()
        ok = rep.ok
    return out, ok


def cmd_reduce(args) -> int:
    opts = {
        "fast": args.fast,
        "verify": args.verify,
        "emit_flow": args.emit_flow,
        "emit_trees": args.emit_trees,
        "mode": _verify_mode(args),
        "samples": args.samples or DEFAULT_SAMPLES,
        "seed": args.seed,
        "budget": args.budget,
        "header": _header(args),
    }
    many = len(args.instances) > 1
    jobs = [(p, opts, i if many else None) for i, p in enumerate(args.instances)]
    if args.jobs > 1 and many:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_reduce_one, jobs))
    else:
        results = [_reduce_one(j) for j in jobs]
    outs = [r[0] for r in results]
    _emit(outs if many else outs[0])
    return EXIT_OK if all(r[1] for r in results) else EXIT_FAIL


def cmd_verify(args) -> int:
    inst = _load_instance(args.instance)
    try:
        pr = PartitionReduction.from_json(json.loads(_read(args.partition)))
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"{args.partition}: bad partition file ({e})") from None
    rep = verify_weak_map(
        inst,
        pr,
        mode=_verify_mode(args),
        samples=args.samples or DEFAULT_SAMPLES,
        seed=args.seed,
        budget=args.budget,
    )
    _emit({**rep.to_dict(), **_header(args)})
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_color_number(args) -> int:
    inst = _load_instance(args.instance)
    try:
        k = coloring_number(inst)
    except ValueError as e:
        raise InputError(str(e)) from None
    _emit({**_header(args), "k": k, "rank": rank(inst), "sources": len(inst.sources)})
    return EXIT_OK


def _load_m2(path):
    try:
        return parse_partition_matroid(_read(path))
    except ValueError as e:
        raise InputError(f"{path}: {e}") from None


def cmd_intersect(args) -> int:
    inst = _load_instance(args.instance)
    out = intersection_color(inst, _load_m2(args.m2))
    _emit({**_header(args), **out.to_json()})
    return EXIT_OK


def cmd_list_color(args) -> int:
    inst = _load_instance(args.instance)
    m2 = _load_m2(args.m2)
    try:
        lists = parse_lists(json.loads(_read(args.lists)))
    except (ValueError, AttributeError) as e:
        raise InputError(f"{args.lists}: bad list file ({e})") from None
    out = list_color_intersection(inst, m2, lists)
    _emit({**_header(args), **out.to_json()})
    return EXIT_OK


def cmd_gen(args) -> int:
    p = GenParams(
        n_vertices=args.n_vertices,
        n_edges=args.n_edges,
        n_sources=args.n_sources,
        n_sinks=args.n_sinks,
        layers=args.layers,
        seed=args.seed,
    )
    inst = gen_random(p, raw=args.raw)
    text = f"# gamred {__version__} gen seed={args.seed}\n" + serialize_instance(inst)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_verify_flags(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true", help="check every transversal")
    g.add_argument("--samples", type=int, help="check N random transversals")
    p.add_argument(
        "--budget",
        type=int,
        default=DEFAULT_BUDGET,
        help="largest transversal count checked exhaustively in auto mode",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gamred", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gamred {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", parents=[common], help="partition reduction of instances")
    p.add_argument("instances", nargs="+")
    p.add_argument("--verify", action="store_true", help="verify the result; exit 1 on failure")
    p.add_argument("--fast", action="store_true", help="skip per-step tree-flow checks")
    p.add_argument("--emit-flow", metavar="FILE")
    p.add_argument("--emit-trees", metavar="FILE")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for many files")
    _add_verify_flags(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", parents=[common], help="check a partition against an instance")
    p.add_argument("instance")
    p.add_argument("partition")
    _add_verify_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("color-number", parents=[common], help="coloring number of an instance")
    p.add_argument("instance")
    p.set_defaults(func=cmd_color_number)

    p = sub.add_parser("intersect", parents=[common], help="color gammoid x partition matroid")
    p.add_argument("instance")
    p.add_argument("m2")
    p.set_defaults(func=cmd_intersect)

    p = sub.add_parser("list-color", parents=[common], help="list-color the intersection")
    p.add_argument("instance")
    p.add_argument("m2")
    p.add_argument("lists")
    p.set_defaults(func=cmd_list_color)

    p = sub.add_parser("gen", parents=[common], help="generate a random layered instance")
    p.add_argument("--n-vertices", type=int, required=True)
    p.add_argument("--n-edges", type=int, required=True)
    p.add_argument("--n-sources", type=int, required=True)
    p.add_argument("--n-sinks", type=int, required=True)
    p.add_argument("--layers", type=int, default=3)
    p.add_argument("--raw", action="store_true", help="skip normalization")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as e:
        print(f"gamred: internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except (InputError, ValueError, GenerationFailed) as e:
        print(f"gamred: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
