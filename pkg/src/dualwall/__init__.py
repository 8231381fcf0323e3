"""Exact QUBO/Ising kernels for permutations and the problems built on them.

The package is organised bottom-up:

* :mod:`dualwall.bqm` - integer-coefficient models, expansion, conversion, statistics
* :mod:`dualwall.encodings` - one-hot, zero-one-hot and domain-wall vectors
* :mod:`dualwall.kernels` - permutation and partial-permutation kernels
* :mod:`dualwall.ppp` - the particle placement problem and kernel composition
* :mod:`dualwall.reductions` - QAP, TSP, sub-graph isomorphism and matchings as PPP
* :mod:`dualwall.solvers` - brute force, permutation oracle, simulated annealing
* :mod:`dualwall.io` - file formats
"""

from .bqm import (
    ExpressionBuilder,
    Forms,
    Kind,
    ModelStats,
    QuadraticModel,
    VariableLayout,
    convert,
    evaluate,
    finalize,
    normalize,
    stats,
)
from .encodings import PHI, Scheme, VectorEncoding, build_vector_model, decode_vector, encode_vector
from .kernels import (
    Infeasible,
    KernelHandle,
    PartialPermutation,
    Technique,
    build_kernel,
    decode_permutation,
    encode_permutation,
    kernel_stats_table,
)
from .ppp import (
    AUTO,
    EncodedProblem,
    PPPInstance,
    Target,
    compose,
    decode_solution,
    default_lambda,
    objective_terms,
    ppp_value,
)
from .reductions import (
    WeightedGraph,
    bipartite_matching_to_ppp,
    density,
    matching_to_ppp,
    qap_to_ppp,
    subgraph_iso_to_ppp,
    tsp_graph_to_ppp,
    tsp_to_ppp,
)
from .solvers import (
    SAParams,
    Solution,
    brute_force,
    eliminate_minimum,
    exact_minimum,
    permutation_oracle,
    simulated_annealing,
    verify_kernel,
)

__version__ = "0.1.0"
