"""Quadratic term counts of composed graph-TSP models as the graph grows, emitted as TSV."""

import argparse

from dualwall import Kind, Technique, compose, tsp_graph_to_ppp
from dualwall.reductions import random_graph


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, nargs="+", default=[20, 40, 80, 160])
    parser.add_argument("--degree", type=float, default=5.8, help="average degree of the generated graphs")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print("nodes\tedges\tinteractions\tone_hot_total\tdual_total\textended_total")
    for n in args.nodes:
        edges = round(args.degree * n / 2)
        inst, _ = tsp_graph_to_ppp(random_graph(n, edges, args.seed))
        totals = [compose(inst, t, Kind.ISING, lam=1).model.num_quadratic
                  for t in (Technique.ONE_HOT, Technique.DUAL_MATRIX, Technique.EXTENDED)]
        print("\t".join(map(str, [n, edges, inst.num_interactions, *totals])))


if __name__ == "__main__":
    main()
