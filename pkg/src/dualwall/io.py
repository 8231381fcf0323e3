"""Serialization of models, PPP instances, solutions and problem inputs.

Model formats
-------------
JSON::

    {"kind": "qubo", "variables": [{"matrix": "A", "row": 0, "col": 1}, ...],
     "linear": [[index, coef], ...], "quadratic": [[i, j, coef], ...],
     "offset": {"num": p, "den": q},
     "guards": [{"matrix": "A", "row": 0, "col": -1, "value": 1}, ...],
     "meta": {...}}

``guards`` and ``meta`` are optional.  QUBO text (qbsolv style)::

    c offset p/q
    c var <index> <matrix> <row> <col>
    c guard <matrix> <row> <col> <value>
    p qubo 0 <num_vars> <num_diagonals> <num_couplers>
    i i w        (ascending)
    i j w        (i < j, lexicographic)
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from .bqm import Kind, QuadraticModel, VariableLayout
from .errors import KindMismatch, ParseError
from .ppp import PPPInstance
from .reductions import WeightedGraph
from .solvers import Solution

JSON = "json"
QUBO_TEXT = "qubo"


def _frac(x: Fraction) -> dict:
    return {"num": x.numerator, "den": x.denominator}


def _layout_or_flat(model: QuadraticModel, layout: Optional[VariableLayout]) -> VariableLayout:
    if layout is None:
        return VariableLayout.flat(model.num_vars)
    if layout.num_vars != model.num_vars:
        raise ValueError(f"layout has {layout.num_vars} labels for {model.num_vars} variables")
    return layout


# --------------------------------------------------------------------------
# models


def model_to_json(model: QuadraticModel, layout: VariableLayout | None = None, meta: dict | None = None) -> str:
    layout = _layout_or_flat(model, layout)
    li, lc = model.linear_arrays
    qr, qc, qv = model.quadratic_arrays
    doc: dict[str, Any] = {
        "kind": model.kind.value,
        "variables": [{"matrix": l.matrix, "row": l.row, "col": l.col} for l in layout.labels],
        "linear": np.stack([li, lc], axis=1).tolist(),
        "quadratic": np.stack([qr, qc, qv], axis=1).tolist(),
        "offset": _frac(model.offset),
    }
    guards = layout.guards
    if guards:
        doc["guards"] = [
            {"matrix": g.matrix, "row": g.row, "col": g.col, "value": v} for g, v in sorted(guards.items())
        ]
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, separators=(",", ":")) + "\n"


def model_to_qubo_text(model: QuadraticModel, layout: VariableLayout | None = None) -> str:
    if model.kind is not Kind.QUBO:
        raise KindMismatch("the QUBO text format only holds QUBO models")
    layout = _layout_or_flat(model, layout)
    off = model.offset
    lines = [f"c offset {off.numerator}/{off.denominator}"]
    lines += [f"c var {i} {l.matrix} {l.row} {l.col}" for i, l in enumerate(layout.labels)]
    lines += [f"c guard {g.matrix} {g.row} {g.col} {v}" for g, v in sorted(layout.guards.items())]
    li, lc = model.linear_arrays
    qr, qc, qv = model.quadratic_arrays
    lines.append(f"p qubo 0 {model.num_vars} {li.size} {qr.size}")
    lines += [f"{i} {i} {c}" for i, c in zip(li.tolist(), lc.tolist())]
    lines += [f"{i} {j} {c}" for i, j, c in zip(qr.tolist(), qc.tolist(), qv.tolist())]
    return "\n".join(lines) + "\n"


def export_model(model: QuadraticModel, layout: VariableLayout | None = None, fmt: str = JSON, meta: dict | None = None) -> bytes:
    if fmt == JSON:
        return model_to_json(model, layout, meta).encode()
    if fmt == QUBO_TEXT:
        return model_to_qubo_text(model, layout).encode()
    raise ValueError(f"unknown model format {fmt!r}")


def _parse_offset(obj) -> Fraction:
    if isinstance(obj, dict):
        return Fraction(int(obj["num"]), int(obj["den"]))
    return Fraction(obj)


def model_from_json(text: str) -> tuple[QuadraticModel, VariableLayout, dict]:
    try:
        doc = json.loads(text)
        kind = Kind.parse(doc["kind"])
        labels = [(v["matrix"], v["row"], v["col"]) for v in doc["variables"]]
        guards = {(g["matrix"], g["row"], g["col"]): g["value"] for g in doc.get("guards", [])}
        lin = np.asarray(doc.get("linear", []), dtype=np.int64).reshape(-1, 2)
        quad = np.asarray(doc.get("quadratic", []), dtype=np.int64).reshape(-1, 3)
        offset = _parse_offset(doc.get("offset", 0))
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(1, f"malformed model document: {exc}") from exc
    layout = VariableLayout(labels, guards)
    if (quad[:, 0] >= quad[:, 1]).any():
        raise ParseError(1, "quadratic entries need i < j")
    model = QuadraticModel.from_arrays(
        kind, layout.num_vars, (lin[:, 0], lin[:, 1]), (quad[:, 0], quad[:, 1], quad[:, 2]), offset
    )
    return model, layout, doc.get("meta", {})


_HEADER = re.compile(r"^p\s+qubo\s+(\S+)\s+(\d+)\s+(\d+)\s+(\d+)\s*$")


def model_from_qubo_text(text: str) -> tuple[QuadraticModel, VariableLayout, dict]:
    offset = Fraction(0)
    labels: dict[int, tuple] = {}
    guards: dict[tuple, int] = {}
    header = None
    diag: list[tuple[int, int]] = []
    coup: list[tuple[int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "c":
            try:
                if len(parts) >= 3 and parts[1] == "offset":
                    offset = Fraction(parts[2])
                elif len(parts) == 6 and parts[1] == "var":
                    labels[int(parts[2])] = (parts[3], int(parts[4]), int(parts[5]))
                elif len(parts) == 6 and parts[1] == "guard":
                    guards[(parts[2], int(parts[3]), int(parts[4]))] = int(parts[5])
            except ValueError as exc:
                raise ParseError(lineno, f"bad comment field: {exc}") from exc
            continue
        if header is None:
            match = _HEADER.match(line)
            if not match:
                raise ParseError(lineno, f"expected 'p qubo 0 <vars> <diagonals> <couplers>', got {line!r}")
            header = tuple(int(g) for g in match.groups()[1:])
            continue
        try:
            i, j, w = (int(t) for t in parts)
        except ValueError:
            raise ParseError(lineno, f"expected 'i j w' with integers, got {line!r}") from None
        n_vars = header[0]
        if not (0 <= i < n_vars and 0 <= j < n_vars):
            raise ParseError(lineno, f"variable index outside [0, {n_vars})")
        if i == j:
            if coup:
                raise ParseError(lineno, "diagonal entries must precede couplers")
            diag.append((i, w))
        elif i < j:
            coup.append((i, j, w))
        else:
            raise ParseError(lineno, "coupler entries need i < j")
    if header is None:
        raise ParseError(1, "missing 'p qubo' header")
    n_vars, n_diag, n_coup = header
    if len(diag) != n_diag or len(coup) != n_coup:
        raise ParseError(
            lineno, f"header announces {n_diag} diagonals and {n_coup} couplers, found {len(diag)} and {len(coup)}"
        )
    if labels:
        if sorted(labels) != list(range(n_vars)):
            raise ParseError(1, "'c var' comments must label every variable exactly once")
        layout = VariableLayout([labels[i] for i in range(n_vars)], guards)
    else:
        layout = VariableLayout.flat(n_vars, guards)
    li = np.array([d[0] for d in diag], dtype=np.int64)
    lc = np.array([d[1] for d in diag], dtype=np.int64)
    q = np.array(coup, dtype=np.int64).reshape(-1, 3)
    model = QuadraticModel.from_arrays(Kind.QUBO, n_vars, (li, lc), (q[:, 0], q[:, 1], q[:, 2]), offset)
    return model, layout, {}


def import_model(data: bytes | str) -> tuple[QuadraticModel, VariableLayout, dict]:
    """Parse either format; returns ``(model, layout, meta)``."""
    text = data.decode() if isinstance(data, bytes) else data
    if text.lstrip().startswith("{"):
        return model_from_json(text)
    return model_from_qubo_text(text)


# --------------------------------------------------------------------------
# PPP instances and solutions


def ppp_to_json(inst: PPPInstance) -> str:
    pk, pv = inst.potential_arrays
    ik, iv = inst.interaction_arrays
    doc = {
        "m": inst.m,
        "n": inst.n,
        "potentials": np.hstack([pk, pv[:, None]]).tolist(),
        "interactions": np.hstack([ik, iv[:, None]]).tolist(),
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def ppp_from_json(text: str | bytes) -> PPPInstance:
    try:
        doc = json.loads(text)
        pot = np.asarray(doc.get("potentials", []), dtype=np.int64).reshape(-1, 3)
        inter = np.asarray(doc.get("interactions", []), dtype=np.int64).reshape(-1, 5)
        m, n = int(doc["m"]), int(doc["n"])
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(1, f"malformed PPP document: {exc}") from exc
    return PPPInstance.from_arrays(m, n, (pot[:, :2], pot[:, 2]), (inter[:, :4], inter[:, 4]))


def solution_to_json(sol: Solution) -> str:
    return json.dumps(sol.to_dict(), separators=(",", ":")) + "\n"


# --------------------------------------------------------------------------
# problem inputs


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _ints(text: str) -> list[int]:
    out = []
    for lineno, line in _lines(text):
        for tok in line.split():
            try:
                out.append(int(tok))
            except ValueError:
                raise ParseError(lineno, f"expected an integer, got {tok!r}") from None
    return out


def _split_square(values: list[int], count: int) -> tuple[int, list[int]]:
    """Size ``n`` and the payload of ``count`` square ``n x n`` matrices, with an optional leading ``n``."""
    total = len(values)
    for lead in (1, 0):
        body = total - lead
        if body <= 0 or body % count:
            continue
        n = int(round((body // count) ** 0.5))
        if n * n * count == body and (not lead or values[0] == n):
            return n, values[lead:]
    raise ParseError(1, f"cannot read {count} square matrices from {total} integers")


def read_qap(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Flow matrix then distance matrix, optionally preceded by ``n``."""
    n, body = _split_square(_ints(text), 2)
    arr = np.asarray(body, dtype=np.int64)
    return arr[: n * n].reshape(n, n), arr[n * n :].reshape(n, n)


def read_matrix(text: str) -> np.ndarray:
    n, body = _split_square(_ints(text), 1)
    return np.asarray(body, dtype=np.int64).reshape(n, n)


def _graph_blocks(text: str) -> list[WeightedGraph]:
    blocks: list[tuple[int, list]] = []
    for lineno, line in _lines(text):
        parts = line.split()
        if parts[0] == "nodes":
            if len(parts) != 2:
                raise ParseError(lineno, "expected 'nodes N'")
            try:
                blocks.append((int(parts[1]), []))
            except ValueError:
                raise ParseError(lineno, f"bad node count {parts[1]!r}") from None
            continue
        if not blocks:
            raise ParseError(lineno, "edge list must start with 'nodes N'")
        try:
            nums = [int(p) for p in parts]
        except ValueError:
            raise ParseError(lineno, f"expected 'u v w', got {line!r}") from None
        if len(nums) not in (2, 3):
            raise ParseError(lineno, f"expected 'u v w', got {line!r}")
        blocks[-1][1].append((lineno, tuple(nums) if len(nums) == 3 else (nums[0], nums[1], 1)))
    graphs = []
    for n, edges in blocks:
        try:
            graphs.append(WeightedGraph(n, tuple(e for _, e in edges)))
        except ValueError as exc:
            raise ParseError(edges[0][0] if edges else 1, str(exc)) from exc
    return graphs


def read_graph(text: str) -> WeightedGraph:
    graphs = _graph_blocks(text)
    if len(graphs) != 1:
        raise ParseError(1, f"expected one graph, found {len(graphs)}")
    return graphs[0]


def read_graph_pair(text: str) -> tuple[WeightedGraph, WeightedGraph]:
    """Guest graph block followed by host graph block."""
    graphs = _graph_blocks(text)
    if len(graphs) != 2:
        raise ParseError(1, f"expected a guest and a host graph, found {len(graphs)}")
    return graphs[0], graphs[1]


def read_bipartite(text: str) -> tuple[int, int, list[tuple[int, int, int]]]:
    it = _lines(text)
    try:
        lineno, head = next(it)
    except StopIteration:
        raise ParseError(1, "empty bipartite input") from None
    try:
        m, n = (int(t) for t in head.split())
    except ValueError:
        raise ParseError(lineno, "expected header 'm n'") from None
    edges = []
    for lineno, line in it:
        try:
            u, v, w = (int(t) for t in line.split())
        except ValueError:
            raise ParseError(lineno, f"expected 'u v w', got {line!r}") from None
        if not (0 <= u < m and 0 <= v < n):
            raise ParseError(lineno, f"edge ({u}, {v}) outside {m} x {n}")
        edges.append((u, v, w))
    return m, n, edges


def write_graph(graph: WeightedGraph) -> str:
    return "".join([f"nodes {graph.num_nodes}\n"] + [f"{u} {v} {w}\n" for u, v, w in graph.edges])
