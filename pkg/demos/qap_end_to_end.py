"""Reduce a random QAP to a placement problem, encode it with two kernels and solve it three ways."""

import argparse

from dualwall import AUTO, Kind, Technique, compose, decode_solution, qap_to_ppp
from dualwall.reductions import random_qap
from dualwall.solvers import SAParams, brute_force, eliminate_minimum, permutation_oracle, simulated_annealing


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-n", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--sweeps", type=int, default=2000)
    parser.add_argument("--restarts", type=int, default=20)
    args = parser.parse_args()

    inst = qap_to_ppp(*random_qap(args.n, args.seed))
    oracle = permutation_oracle(inst)
    print(f"QAP n={args.n}: {inst.num_interactions} interactions, optimum {oracle.value} at {list(oracle.argmin)}")

    for technique in (Technique.ONE_HOT, Technique.DUAL_MATRIX):
        enc = compose(inst, technique, Kind.QUBO, AUTO)
        model = enc.model
        if model.num_vars <= 26:
            x = brute_force(model, max_minimizers=1).minimizers[0]
            how = "enumeration"
        else:
            x = eliminate_minimum(model).assignment
            how = "forest elimination"
        exact = decode_solution(enc, x)
        sa = simulated_annealing(model, SAParams(seed=args.seed, sweeps=args.sweeps, restarts=args.restarts))
        heur = decode_solution(enc, sa.assignment)
        print(f"{technique.value}: {model.num_vars} vars, {model.num_quadratic} couplers, lambda {enc.lam}")
        print(f"  exact ({how}): objective {exact.objective} at {list(exact.decoded.values)}")
        if heur.feasible:
            print(f"  annealing: objective {heur.objective} at {list(heur.decoded.values)}")
        else:
            print("  annealing: infeasible sample")


if __name__ == "__main__":
    main()
