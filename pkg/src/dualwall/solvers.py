"""Exact and heuristic minimization of quadratic models and PPP instances."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Optional

import numba
import numpy as np

from .bqm import Kind, QuadraticModel
from .errors import TooLarge

if TYPE_CHECKING:
    from .kernels import PartialPermutation
    from .ppp import PPPInstance

DEFAULT_CAP = 26
MAX_MINIMIZERS = 10**6
ORACLE_LIMIT = 10**7


@dataclass
class Solution:
    assignment: np.ndarray
    energy: Fraction
    feasible: Optional[bool] = None
    decoded: Optional["PartialPermutation"] = None
    objective: Optional[Fraction] = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "energy": {"num": self.energy.numerator, "den": self.energy.denominator},
            "assignment": [int(v) for v in self.assignment],
            "feasible": self.feasible,
            "permutation": None if self.decoded is None else list(self.decoded.values),
            "solver": self.meta.get("solver"),
            "seed": self.meta.get("seed"),
        }


# --------------------------------------------------------------------------
# brute force


@dataclass
class BruteForceResult:
    minimum: Fraction
    minimizers: np.ndarray  # (count, num_vars) int8, lexicographic
    overflow: bool = False

    @property
    def count(self) -> int:
        return int(self.minimizers.shape[0])


def _value_table(bits: int, kind: Kind) -> np.ndarray:
    """All ``2**bits`` assignments, row ``r`` spelling ``r`` with the first column as MSB."""
    r = np.arange(2**bits, dtype=np.int64)[:, None]
    shifts = np.arange(bits - 1, -1, -1, dtype=np.int64)[None, :]
    v = ((r >> shifts) & 1).astype(np.int8)
    if kind is Kind.ISING:
        v = 2 * v - 1
    return v


def brute_force(
    model: QuadraticModel, cap: int = DEFAULT_CAP, max_minimizers: int = MAX_MINIMIZERS
) -> BruteForceResult:
    """Global minimum and every minimizing assignment, by exhaustive enumeration.

    The variables are split into a high block (enumerated one assignment per
    column) and a low block of up to 16 variables (enumerated per row); each
    block of energies is ``base_low + V_low @ (Q_low_high @ V_high) + c_high``.
    Minimizers are returned in lexicographic order with variable 0 most
    significant and cold < hot.
    """
    n = model.num_vars
    if n > cap:
        raise TooLarge(f"{n} variables exceed the brute-force cap of {cap}")
    if n == 0:
        return BruteForceResult(model.offset, np.zeros((1, 0), dtype=np.int8))
    low = min(n, 16)
    high = n - low
    kind = model.kind
    dense = np.zeros((n, n), dtype=np.int64)
    qr, qc, qv = model.quadratic_arrays
    dense[qr, qc] = qv
    h = model.linear_vector()
    exact_float = model._abs_mass() < 2**50
    dtype = np.float64 if exact_float else np.int64

    lo = slice(high, n)
    hi = slice(0, high)
    v_low = _value_table(low, kind).astype(dtype)
    q_ll = dense[lo, lo].astype(dtype)
    base = ((v_low @ q_ll) * v_low).sum(axis=1) + v_low @ h[lo].astype(dtype)
    q_lh = (dense[hi, lo].T).astype(dtype)  # low x high (pairs i<j have high first)
    q_hh = dense[hi, hi].astype(dtype)
    h_hi = h[hi].astype(dtype)

    best = None
    hits: list[np.ndarray] = []
    total_hits = 0
    overflow = False
    chunk = max(1, 2**22 // 2**low)
    for start in range(0, 2**high, chunk):
        stop = min(2**high, start + chunk)
        codes = np.arange(start, stop, dtype=np.int64)
        if high:
            shifts = np.arange(high - 1, -1, -1, dtype=np.int64)
            v_high = ((codes[:, None] >> shifts[None, :]) & 1).astype(dtype)
            if kind is Kind.ISING:
                v_high = 2 * v_high - 1
            c_high = ((v_high @ q_hh) * v_high).sum(axis=1) + v_high @ h_hi
            energies = base[:, None] + v_low @ (q_lh @ v_high.T) + c_high[None, :]
        else:
            energies = base[:, None]
        block_min = energies.min()
        if best is not None and block_min > best:
            continue
        if best is None or block_min < best:
            best = block_min
            hits, total_hits, overflow = [], 0, False
        lows, highs = np.nonzero(energies == best)
        idx = (codes[highs] << low) + lows
        total_hits += idx.size
        if total_hits > max_minimizers:
            overflow = True
            room = max_minimizers - (total_hits - idx.size)
            idx = idx[: max(room, 0)]
            total_hits = max_minimizers
        hits.append(idx)
    flat = np.sort(np.concatenate(hits)) if hits else np.zeros(0, np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    mins = ((flat[:, None] >> shifts[None, :]) & 1).astype(np.int8)
    if kind is Kind.ISING:
        mins = 2 * mins - 1
    minimum = Fraction(int(round(float(best)))) + model.offset
    # confirm the float path with an exact evaluation
    check = model.energy(mins[0])
    if check != minimum:
        raise ArithmeticError("enumeration disagrees with exact evaluation")
    return BruteForceResult(minimum, mins, overflow)


@dataclass
class EliminationResult:
    minimum: Fraction
    assignment: np.ndarray
    enumerated: int
    eliminated: int


def _free_forest(num_vars: int, adj: list[dict[int, int]]) -> list[int]:
    """Greedy vertex set whose induced subgraph is a forest, low degree first."""
    parent = list(range(num_vars))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    chosen: set[int] = set()
    for v in sorted(range(num_vars), key=lambda u: (len(adj[u]), u)):
        roots = [find(u) for u in adj[v] if u in chosen]
        if len(roots) != len(set(roots)):
            continue
        chosen.add(v)
        for r in roots:
            parent[r] = v
    return sorted(chosen)


def _tree_order(free: list[int], adj: list[dict[int, int]]) -> list[tuple[int, Optional[int]]]:
    """(vertex, parent) pairs with every child listed before its parent."""
    inside = set(free)
    seen: set[int] = set()
    order: list[tuple[int, Optional[int]]] = []
    for root in free:
        if root in seen:
            continue
        seen.add(root)
        stack = [(root, None)]
        visit = []
        while stack:
            v, par = stack.pop()
            visit.append((v, par))
            for u in adj[v]:
                if u in inside and u not in seen:
                    seen.add(u)
                    stack.append((u, v))
        order.extend(reversed(visit))
    return order


def eliminate_minimum(model: QuadraticModel, cap: int = DEFAULT_CAP, chunk: int = 2**14) -> EliminationResult:
    """Exact global minimum for models too wide for :func:`brute_force`.

    A set of variables inducing a forest in the interaction graph is chosen;
    every assignment of the remaining variables is enumerated and the forest
    is minimised exactly by dynamic programming over its trees.  The result
    equals exhaustive enumeration while the enumerated width is only the
    complement of the forest, which must not exceed ``cap``.
    """
    n = model.num_vars
    kind = model.kind
    vals = (0, 1) if kind is Kind.QUBO else (-1, 1)
    qr, qc, qv = model.quadratic_arrays
    adj: list[dict[int, int]] = [dict() for _ in range(n)]
    for i, j, w in zip(qr.tolist(), qc.tolist(), qv.tolist()):
        adj[i][j] = w
        adj[j][i] = w
    free = _free_forest(n, adj)
    fixed = [v for v in range(n) if v not in set(free)]
    if len(fixed) > cap:
        raise TooLarge(f"{len(fixed)} enumerated variables exceed the cap of {cap}")
    if model._abs_mass() >= 2**50:
        raise OverflowError("coefficients too large for exact float enumeration")
    h = model.linear_vector().astype(np.float64)
    dense = np.zeros((n, n))
    dense[qr, qc] = qv
    dense = dense + dense.T
    fx = np.asarray(fixed, dtype=np.int64)
    fr = np.asarray(free, dtype=np.int64)
    pos = {v: k for k, v in enumerate(free)}
    order = [(pos[v], None if p is None else pos[p]) for v, p in _tree_order(free, adj)]
    coupling = [0.0 if p is None else float(adj[free[c]][free[p]]) for c, p in order]
    q_ff = np.triu(dense[np.ix_(fx, fx)], 1)
    q_fr = dense[np.ix_(fx, fr)]

    def block_energy(x_fixed: np.ndarray) -> tuple[np.ndarray, list]:
        base = ((x_fixed @ q_ff) * x_fixed).sum(axis=1) + x_fixed @ h[fx]
        field = h[fr][None, :] + x_fixed @ q_fr
        cost = [[field[:, k] * s for s in vals] for k in range(len(free))]
        total = base
        for (c, p), w in zip(order, coupling):
            if p is None:
                total = total + np.minimum(cost[c][0], cost[c][1])
                continue
            for a, sa in enumerate(vals):
                cost[p][a] = cost[p][a] + np.minimum(cost[c][0] + w * sa * vals[0], cost[c][1] + w * sa * vals[1])
        return total, cost

    width = len(fixed)
    best_value = None
    best_row = None
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    for start in range(0, 2**width, chunk):
        codes = np.arange(start, min(2**width, start + chunk), dtype=np.int64)
        bits = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.float64)
        x_fixed = bits if kind is Kind.QUBO else 2 * bits - 1
        total, _ = block_energy(x_fixed)
        k = int(np.argmin(total))
        if best_value is None or total[k] < best_value:
            best_value, best_row = total[k], x_fixed[k : k + 1]

    # recover the forest assignment for the winning row
    _, cost = block_energy(best_row)
    choice: dict[int, int] = {}
    for (c, p), w in reversed(list(zip(order, coupling))):
        if p is None:
            choice[c] = int(np.argmin([cost[c][0][0], cost[c][1][0]]))
        else:
            sa = vals[choice[p]]
            choice[c] = int(np.argmin([cost[c][t][0] + w * sa * vals[t] for t in (0, 1)]))
    x = np.zeros(n, dtype=np.int8)
    x[fx] = best_row[0].astype(np.int8)
    for k, v in enumerate(free):
        x[v] = vals[choice[k]]
    minimum = model.energy(x)
    if minimum != Fraction(int(round(float(best_value)))) + model.offset:
        raise ArithmeticError("elimination disagrees with exact evaluation")
    return EliminationResult(minimum, x, len(fixed), len(free))


def exact_minimum(model: QuadraticModel, cap: int = DEFAULT_CAP) -> Fraction:
    """Plain enumeration when it fits under ``cap``, forest elimination otherwise."""
    if model.num_vars <= cap:
        return brute_force(model, cap=cap, max_minimizers=1).minimum
    return eliminate_minimum(model, cap=cap).minimum


# --------------------------------------------------------------------------
# permutation oracle


@dataclass
class OracleResult:
    value: int
    argmin: tuple[int, ...]
    count: int


def permutation_oracle(inst: "PPPInstance", limit: int = ORACLE_LIMIT) -> OracleResult:
    """Minimum of ``PPP(pi)`` over all injections, in lexicographic order."""
    m, n = inst.m, inst.n
    total = math.perm(n, m)
    if total > limit:
        raise TooLarge(f"{total} injections exceed the oracle limit of {limit}")
    pot = inst.potential_matrix()
    pairs = inst.interaction_blocks()
    best_val = None
    best_perm: tuple[int, ...] = ()
    count = 0
    it = itertools.permutations(range(n), m)
    chunk = 200_000
    rows = np.arange(m)
    while True:
        block = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(it, chunk)), dtype=np.int64
        ).reshape(-1, m)
        if block.shape[0] == 0:
            break
        vals = pot[rows[None, :], block].sum(axis=1) if m else np.zeros(block.shape[0], np.int64)
        for (i, ip), mat in pairs.items():
            vals = vals + mat[block[:, i], block[:, ip]]
        low = int(vals.min())
        if best_val is None or low < best_val:
            best_val = low
            best_perm = tuple(int(v) for v in block[int(np.argmin(vals))])
            count = int((vals == low).sum())
        elif low == best_val:
            count += int((vals == low).sum())
    return OracleResult(int(best_val), best_perm, count)


# --------------------------------------------------------------------------
# simulated annealing


@dataclass(frozen=True)
class SAParams:
    seed: int = 0
    sweeps: int = 1000
    restarts: int = 1
    t_initial: Optional[float] = None  # None: max |coefficient|
    t_final: Optional[float] = None  # None: 0.1
    ratio: Optional[float] = None  # None: reach t_final on the last sweep
    threads: int = 1

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.ratio is not None and not 0 < self.ratio < 1:
            raise ValueError("cooling ratio must lie in (0, 1)")
        for t in (self.t_initial, self.t_final):
            if t is not None and t <= 0:
                raise ValueError("temperatures must be positive")


@numba.njit(cache=True, nogil=True)
def _anneal(indptr, indices, weights, h, ising, temps, seed, out):
    n = h.shape[0]
    np.random.seed(seed)
    state = np.empty(n, np.int8)
    for i in range(n):
        bit = np.random.randint(0, 2)
        state[i] = (2 * bit - 1) if ising else bit
    energy = 0
    for i in range(n):
        energy += h[i] * state[i]
        for p in range(indptr[i], indptr[i + 1]):
            j = indices[p]
            if j > i:
                energy += weights[p] * state[i] * state[j]
    best = energy
    out[:] = state
    for t in range(temps.shape[0]):
        beta = 1.0 / temps[t]
        for _ in range(n):
            i = np.random.randint(0, n)
            field = h[i]
            for p in range(indptr[i], indptr[i + 1]):
                field += weights[p] * state[indices[p]]
            if ising:
                delta = -2 * state[i] * field
            else:
                delta = (1 - 2 * state[i]) * field
            if delta <= 0 or np.random.random() < np.exp(-delta * beta):
                state[i] = -state[i] if ising else 1 - state[i]
                energy += delta
                if energy < best:
                    best = energy
                    out[:] = state
    return best


def _schedule(model: QuadraticModel, params: SAParams) -> np.ndarray:
    t0 = params.t_initial if params.t_initial is not None else float(max(model.max_abs_coefficient, 1))
    tf = params.t_final if params.t_final is not None else 0.1
    if params.ratio is not None:
        return t0 * params.ratio ** np.arange(params.sweeps)
    if params.sweeps == 1:
        return np.array([t0])
    return t0 * (tf / t0) ** (np.arange(params.sweeps) / (params.sweeps - 1))


def restart_seeds(seed: int, restarts: int) -> list[int]:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(restarts)]


def simulated_annealing(model: QuadraticModel, params: SAParams = SAParams()) -> Solution:
    """Single-flip Metropolis annealing with a geometric temperature schedule.

    Each restart draws its own seed from ``SeedSequence(params.seed)``; the
    reported solution is the lowest energy, ties broken by the
    lexicographically smallest assignment, so results do not depend on
    ``threads``.  ``meta["restart_energies"]`` lists every restart's best.
    """
    n = model.num_vars
    if n < 1:
        raise ValueError("simulated annealing needs at least one variable")
    adj = model.coupling_matrix()
    indptr = adj.indptr.astype(np.int64)
    indices = adj.indices.astype(np.int64)
    weights = adj.data.astype(np.int64)
    h = model.linear_vector()
    ising = model.kind is Kind.ISING
    temps = _schedule(model, params)
    seeds = restart_seeds(params.seed, params.restarts)

    def run(seed):
        out = np.empty(n, np.int8)
        best = _anneal(indptr, indices, weights, h, ising, temps, seed, out)
        return int(best), out

    if params.threads > 1:
        with ThreadPoolExecutor(params.threads) as pool:
            results = list(pool.map(run, seeds))
    else:
        results = [run(s) for s in seeds]
    energies = [e for e, _ in results]
    best_e, best_x = min(results, key=lambda r: (r[0], tuple(r[1].tolist())))
    energy = Fraction(best_e) + model.offset
    return Solution(
        assignment=best_x,
        energy=energy,
        meta={
            "solver": "sa",
            "seed": params.seed,
            "sweeps": params.sweeps,
            "restarts": params.restarts,
            "restart_energies": [Fraction(e) + model.offset for e in energies],
        },
    )


# --------------------------------------------------------------------------
# kernel verification


@dataclass
class KernelReport:
    technique: str
    kind: str
    m: int
    n: int
    minimum: Fraction
    optimal_value: Fraction
    minimizer_count: int
    expected_minimizers: int
    decode_rate: Fraction
    coverage: Fraction
    table_diff: dict
    errata: dict

    @property
    def ok(self) -> bool:
        return (
            self.minimum == self.optimal_value
            and self.minimizer_count == self.expected_minimizers
            and self.decode_rate == 1
            and self.coverage == 1
        )

    def summary(self) -> str:
        return (
            f"minimum {_fmt(self.minimum)}, minimizers {self.minimizer_count}, "
            f"decode {float(self.decode_rate):.0%}, coverage {float(self.coverage):.0%}"
        )


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{float(x):g}"


def expected_minimizers(technique, m: int, n: int) -> int:
    """Injections times the free choices of ``B`` columns no row maps to."""
    from .kernels import Technique

    t = Technique.parse(technique)
    count = math.perm(n, m)
    if t in (Technique.DUAL_MATRIX, Technique.EXTENDED) and m < n:
        count *= m ** (n - m)
    return count


def verify_kernel(technique, m: int, n: int, kind, cap: int = DEFAULT_CAP) -> KernelReport:
    from .kernels import Infeasible, build_kernel, decode_permutation, encode_permutation
    from .tables import kernel_prediction

    handle = build_kernel(technique, m, n, kind)
    result = brute_force(handle.model, cap)
    decoded = [decode_permutation(handle, x) for x in result.minimizers]
    ok = sum(not isinstance(d, Infeasible) for d in decoded)
    perms = list(itertools.permutations(range(n), m))
    encoded = np.array([encode_permutation(handle, p) for p in perms], dtype=np.int8)
    covered = int((handle.model.variable_energies(encoded) + handle.model.offset == handle.optimal_value).sum()) if perms else 0
    s = handle.stats()
    if n >= 3 and m >= 2:
        pred = kernel_prediction(handle.technique, m, n, handle.kind)
        diff, errata = pred.compare(s), dict(pred.errata)
    else:
        diff, errata = {}, {}
    return KernelReport(
        technique=handle.technique.value,
        kind=handle.kind.value,
        m=m,
        n=n,
        minimum=result.minimum,
        optimal_value=handle.optimal_value,
        minimizer_count=result.count,
        expected_minimizers=expected_minimizers(handle.technique, m, n),
        decode_rate=Fraction(ok, len(decoded)),
        coverage=Fraction(covered, len(perms)) if perms else Fraction(1),
        table_diff=diff,
        errata=errata,
    )
