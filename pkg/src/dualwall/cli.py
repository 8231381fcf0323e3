"""Command-line front end.

Exit status is 0 on success, 2 for invalid arguments or inputs, and 1 for
failures while running (I/O errors, instances too large to solve).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import io
from .bqm import Kind, stats
from .errors import DualwallError, TooLarge
from .kernels import Technique, build_kernel, decode_permutation, Infeasible
from .ppp import AUTO, EncodedProblem, PPPInstance, compose
from .reductions import (
    bipartite_matching_to_ppp,
    complete_graph,
    matching_to_ppp,
    qap_to_ppp,
    random_bipartite,
    random_graph,
    random_qap,
    random_regular_graph,
    random_tsp,
    subgraph_iso_to_ppp,
    tsp_graph_to_ppp,
    tsp_to_ppp,
)
from .solvers import SAParams, Solution, brute_force, permutation_oracle, simulated_annealing

PROBLEMS = ("qap", "tsp", "tsp-graph", "subiso", "matching", "bimatching")


class UsageError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (tuple, list, frozenset, set)):
        return ",".join(str(v) for v in sorted(x))
    return str(x)


def _int_or_auto(text: str):
    if text.lower() == AUTO:
        return AUTO
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _write(path: Optional[str], data: bytes | str) -> None:
    if isinstance(data, str):
        data = data.encode()
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    with open(path, "wb") as fh:
        fh.write(data)


def _say(args, line: str) -> None:
    """Report to stdout unless stdout carries the payload."""
    stream = sys.stderr if getattr(args, "out", None) in (None, "-") else sys.stdout
    print(line, file=stream)


def _stats_lines(model) -> list[str]:
    s = stats(model)
    return [
        f"vars {s.num_vars}",
        f"linear_count {s.linear_term_count}",
        f"linear_coeffs {_fmt(s.linear_coeff_set)}",
        f"quad_count {s.quadratic_term_count}",
        f"quad_coeffs {_fmt(s.quadratic_coeff_set)}",
        f"diameter {s.diameter}",
        f"offset {_fmt(s.offset)}",
    ]


# --------------------------------------------------------------------------
# commands


def cmd_kernel(args) -> int:
    m = args.m if args.m is not None else args.n
    handle = build_kernel(args.technique, m, args.n, args.kind)
    meta = {"technique": handle.technique.value, "m": m, "n": args.n, "optimal": _fmt(handle.optimal_value)}
    if args.out is not None or not args.stats:
        _write(args.out, io.export_model(handle.model, handle.layout, args.format, meta))
    if args.stats:
        lines = _stats_lines(handle.model) + [f"optimum {_fmt(handle.optimal_value)}"]
        out = sys.stderr if args.out == "-" else sys.stdout
        print("\n".join(lines), file=out)
    return 0


def _load_problem(problem: str, text: str, big) -> tuple[PPPInstance, int]:
    if problem == "qap":
        return qap_to_ppp(*io.read_qap(text)), 0
    if problem == "tsp":
        return tsp_to_ppp(io.read_matrix(text)), 0
    if problem == "tsp-graph":
        return tsp_graph_to_ppp(io.read_graph(text), big)
    if problem == "subiso":
        return subgraph_iso_to_ppp(*io.read_graph_pair(text)), 0
    if problem == "matching":
        return matching_to_ppp(io.read_graph(text)), 0
    m, n, edges = io.read_bipartite(text)
    return bipartite_matching_to_ppp(m, n, edges), 0


def cmd_reduce(args) -> int:
    inst, shift = _load_problem(args.problem, _read(args.input).decode(), args.big)
    _write(args.out, io.ppp_to_json(inst))
    line = f"potentials {inst.num_potentials}, interactions {inst.num_interactions}"
    if args.problem == "tsp-graph":
        line += f", shift {shift}"
    _say(args, line)
    return 0


def _problem_meta(enc: EncodedProblem) -> dict:
    return {
        "technique": enc.kernel.technique.value,
        "m": enc.kernel.m,
        "n": enc.kernel.n,
        "optimal": _fmt(enc.kernel.optimal_value),
        "lambda": enc.lam,
        "target": enc.target.value,
        "c": enc.c,
        "d": _fmt(enc.d),
    }


def cmd_compose(args) -> int:
    inst = io.ppp_from_json(_read(args.ppp))
    enc = compose(inst, args.technique, args.kind, args.lam)
    _write(args.out, io.export_model(enc.model, enc.kernel.layout, args.format, _problem_meta(enc)))
    _say(args, f"lambda {enc.lam}, vars {enc.model.num_vars}, quad_count {enc.model.num_quadratic}")
    return 0


def _decorate(sol: Solution, meta: dict, kind: Kind) -> Solution:
    """Attach feasibility and the decoded placement when the model came from a kernel."""
    if "technique" not in meta:
        return sol
    handle = build_kernel(meta["technique"], int(meta["m"]), int(meta["n"]), kind)
    decoded = decode_permutation(handle, sol.assignment)
    if isinstance(decoded, Infeasible):
        sol.feasible = False
    else:
        sol.feasible = True
        sol.decoded = decoded
    return sol


def cmd_solve(args) -> int:
    raw = _read(args.model)
    if args.solver == "oracle":
        doc = json.loads(raw)
        if "m" not in doc:
            raise UsageError("the oracle solver needs a PPP instance (JSON with 'm' and 'n')")
        inst = io.ppp_from_json(raw)
        res = permutation_oracle(inst)
        out = {
            "energy": {"num": res.value, "den": 1},
            "assignment": [],
            "feasible": True,
            "permutation": list(res.argmin),
            "solver": "oracle",
            "seed": None,
            "count": res.count,
        }
        _write(args.out, json.dumps(out, separators=(",", ":")) + "\n")
        return 0
    model, layout, meta = io.import_model(raw)
    if args.solver == "brute":
        res = brute_force(model, cap=args.cap)
        sol = Solution(res.minimizers[0], res.minimum, meta={"solver": "brute", "seed": None})
        _say(args, f"minimum {_fmt(res.minimum)}, minimizers {res.count}" + (" (capped)" if res.overflow else ""))
    else:
        params = SAParams(seed=args.seed, sweeps=args.sweeps, restarts=args.restarts, threads=args.threads)
        sol = simulated_annealing(model, params)
    sol = _decorate(sol, meta, model.kind)
    _write(args.out, io.solution_to_json(sol))
    return 0


def cmd_stats(args) -> int:
    model, _, _ = io.import_model(_read(args.model))
    print("\n".join(_stats_lines(model)))
    return 0


def cmd_verify(args) -> int:
    from .solvers import verify_kernel

    m = args.m if args.m is not None else args.n
    rep = verify_kernel(args.technique, m, args.n, args.kind, cap=args.cap)
    print(rep.summary())
    print(f"optimal {_fmt(rep.optimal_value)}, expected minimizers {rep.expected_minimizers}")
    for key, (pred, meas) in sorted(rep.table_diff.items()):
        tag = " (documented erratum)" if key in rep.errata else ""
        print(f"table {key}: published {_fmt(pred)}, measured {_fmt(meas)}{tag}")
    return 0 if rep.ok else 1


def _generate(args) -> tuple[PPPInstance, str]:
    p, seed = args.problem, args.seed
    need = {"qap": "nodes", "tsp": "nodes", "tsp-graph": "nodes", "matching": "nodes", "bimatching": "nodes"}
    if p in need and args.nodes is None:
        raise UsageError(f"--nodes is required to generate a {p} instance")
    if p == "qap":
        return qap_to_ppp(*random_qap(args.nodes, seed)), f"dense QAP n={args.nodes}"
    if p == "tsp":
        return tsp_to_ppp(random_tsp(args.nodes, seed)), f"dense TSP n={args.nodes}"
    if p == "tsp-graph":
        if args.edges is None:
            raise UsageError("--edges is required to generate a tsp-graph instance")
        g = random_graph(args.nodes, args.edges, seed)
        return tsp_graph_to_ppp(g, args.big)[0], f"graph TSP {args.nodes} nodes, {args.edges} edges"
    if p == "subiso":
        if None in (args.guest_nodes, args.guest_degree, args.nodes, args.degree):
            raise UsageError("subiso needs --guest-nodes, --guest-degree, --nodes and --degree")
        guest = random_regular_graph(args.guest_degree, args.guest_nodes, seed)
        host = random_regular_graph(args.degree, args.nodes, seed + 1)
        return subgraph_iso_to_ppp(guest, host), "sub-graph isomorphism"
    if p == "matching":
        g = complete_graph(args.nodes, seed) if args.edges is None else random_graph(args.nodes, args.edges, seed)
        return matching_to_ppp(g), f"matching {args.nodes} nodes"
    left = args.left if args.left is not None else args.nodes
    return bipartite_matching_to_ppp(left, args.nodes, random_bipartite(left, args.nodes, seed)), "bipartite matching"


def cmd_counts(args) -> int:
    if args.input is not None:
        inst, _ = _load_problem(args.problem, _read(args.input).decode(), args.big)
    else:
        inst, _ = _generate(args)
    enc = compose(inst, args.technique, args.kind, args.lam)
    total = enc.model.num_quadratic
    kernel = enc.kernel.model.num_quadratic
    print(f"total {total}, kernel {kernel}, interactions {inst.num_interactions}, potentials {inst.num_potentials}")
    return 0


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualwall", description="Permutation kernels and PPP reductions as QUBO/Ising models.")
    sub = parser.add_subparsers(dest="command", required=True)
    techniques = [t.value for t in Technique]
    kinds = [k.value for k in Kind]

    def kernel_args(p, default_kind=None):
        p.add_argument("--technique", required=True, choices=techniques)
        if default_kind is None:
            p.add_argument("--kind", required=True, choices=kinds)
        else:
            p.add_argument("--kind", default=default_kind, choices=kinds)

    p = sub.add_parser("kernel", help="build a permutation kernel")
    kernel_args(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int)
    p.add_argument("--format", choices=[io.JSON, io.QUBO_TEXT], default=io.JSON)
    p.add_argument("--out")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("reduce", help="translate a problem instance into a PPP instance")
    p.add_argument("--problem", required=True, choices=PROBLEMS)
    p.add_argument("--input", required=True)
    p.add_argument("--big", type=_int_or_auto, default=AUTO)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("compose", help="combine a PPP instance with a kernel")
    p.add_argument("--ppp", required=True)
    kernel_args(p)
    p.add_argument("--lambda", dest="lam", type=_int_or_auto, default=AUTO)
    p.add_argument("--format", choices=[io.JSON, io.QUBO_TEXT], default=io.JSON)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("solve", help="minimize a model (brute, sa) or a PPP instance (oracle)")
    p.add_argument("--solver", required=True, choices=["brute", "oracle", "sa"])
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sweeps", type=int, default=1000)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--cap", type=int, default=26)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("stats", help="print model statistics")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", help="brute-force check of a kernel")
    kernel_args(p)
    p.add_argument("-n", type=int, required=True)
    p.add_argument("-m", type=int)
    p.add_argument("--cap", type=int, default=26)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("counts", help="quadratic term counts of a composed problem")
    p.add_argument("--problem", required=True, choices=PROBLEMS)
    kernel_args(p, default_kind=Kind.ISING.value)
    p.add_argument("--input")
    p.add_argument("--nodes", type=int)
    p.add_argument("--edges", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--guest-nodes", type=int)
    p.add_argument("--guest-degree", type=int)
    p.add_argument("--left", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--big", type=_int_or_auto, default=AUTO)
    # counts are structural; a unit weight keeps huge instances inside int64
    p.add_argument("--lambda", dest="lam", type=_int_or_auto, default=1)
    p.set_defaults(func=cmd_counts)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, UsageError) else 1
    except (DualwallError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
