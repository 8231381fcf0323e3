import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings

from dualwall import io
from dualwall.bqm import Kind, QuadraticModel, VariableLayout
from dualwall.encodings import Scheme, build_vector_model
from dualwall.errors import KindMismatch, ParseError
from dualwall.kernels import Technique, build_kernel
from dualwall.ppp import PPPInstance
from dualwall.reductions import WeightedGraph, random_graph
from dualwall.solvers import Solution

from test_bqm import random_models


class TestModelFormats:
    def test_json_round_trip_one_hot(self):
        model, layout = build_vector_model(Scheme.ONE_HOT, 2, Kind.QUBO)
        back, lay, meta = io.import_model(io.export_model(model, layout, io.JSON))
        assert back == model and lay == layout and meta == {}

    def test_json_layout_and_guards(self):
        h = build_kernel(Technique.DUAL_MATRIX, 3, 3, Kind.ISING)
        data = io.export_model(h.model, h.layout, io.JSON, meta={"technique": "dual-matrix"})
        doc = json.loads(data)
        assert doc["kind"] == "ising" and doc["offset"] == {"num": h.model.offset.numerator, "den": 1}
        assert doc["variables"][0] == {"matrix": "A", "row": 0, "col": 0}
        model, layout, meta = io.import_model(data)
        assert model == h.model and layout == h.layout
        assert meta == {"technique": "dual-matrix"}

    def test_json_is_byte_stable(self):
        h = build_kernel(Technique.EXTENDED, 2, 4, Kind.QUBO)
        assert io.export_model(h.model, h.layout) == io.export_model(h.model, h.layout)
        doc = json.loads(io.export_model(h.model, h.layout))
        assert doc["quadratic"] == sorted(doc["quadratic"])
        assert [e[0] for e in doc["linear"]] == sorted(e[0] for e in doc["linear"])

    def test_qubo_text_one_hot_k2(self):
        model, layout = build_vector_model(Scheme.ONE_HOT, 2, Kind.QUBO)
        text = io.export_model(model, layout, io.QUBO_TEXT).decode()
        lines = text.splitlines()
        assert lines[0] == "c offset 1/1"
        body = [l for l in lines if not l.startswith("c")]
        assert body == ["p qubo 0 2 2 1", "0 0 -1", "1 1 -1", "0 1 2"]
        assert text.endswith("\n") and "\r" not in text

    def test_qubo_text_round_trip(self):
        h = build_kernel(Technique.DUAL_MATRIX, 3, 4, Kind.QUBO)
        model, layout, _ = io.import_model(io.export_model(h.model, h.layout, io.QUBO_TEXT))
        assert model == h.model and layout == h.layout

    def test_qubo_text_rejects_ising(self):
        model, _ = build_vector_model(Scheme.ONE_HOT, 2, Kind.ISING)
        with pytest.raises(KindMismatch):
            io.export_model(model, fmt=io.QUBO_TEXT)

    def test_fractional_offset(self):
        model = QuadraticModel(Kind.QUBO, 2, {0: 1}, {}, Fraction(-7, 2))
        for fmt in (io.JSON, io.QUBO_TEXT):
            back, _, _ = io.import_model(io.export_model(model, fmt=fmt))
            assert back.offset == Fraction(-7, 2)

    @settings(max_examples=40)
    @given(random_models(max_vars=8))
    def test_round_trip_property(self, model):
        formats = [io.JSON] if model.kind is Kind.ISING else [io.JSON, io.QUBO_TEXT]
        for fmt in formats:
            back, layout, _ = io.import_model(io.export_model(model, fmt=fmt))
            assert back == model
            assert layout == VariableLayout.flat(model.num_vars)


class TestParseErrors:
    def test_malformed_header(self):
        with pytest.raises(ParseError) as err:
            io.import_model("p qubo zero\n0 0 1\n")
        assert err.value.line == 1
        assert str(err.value).startswith("line 1:")

    def test_bad_weight_line(self):
        text = "c offset 0/1\np qubo 0 2 1 0\n0 0 x\n"
        with pytest.raises(ParseError) as err:
            io.import_model(text)
        assert err.value.line == 3

    def test_count_mismatch(self):
        with pytest.raises(ParseError):
            io.import_model("p qubo 0 2 2 0\n0 0 1\n")

    def test_index_out_of_range(self):
        with pytest.raises(ParseError) as err:
            io.import_model("p qubo 0 2 1 0\n5 5 1\n")
        assert err.value.line == 2

    def test_coupler_order(self):
        with pytest.raises(ParseError):
            io.import_model("p qubo 0 2 0 1\n1 0 1\n")

    def test_missing_header(self):
        with pytest.raises(ParseError):
            io.import_model("c only comments\n")

    def test_bad_json(self):
        with pytest.raises(ParseError) as err:
            io.import_model('{"kind": "qubo",\n "variables": [}')
        assert err.value.line == 2

    def test_json_missing_field(self):
        with pytest.raises(ParseError):
            io.import_model('{"kind": "qubo"}')


class TestPPPJson:
    def test_round_trip(self):
        inst = PPPInstance(3, 4, {(0, 1): 2, (2, 3): -1}, {(0, 1, 2, 3): 5, (1, 0, 2, 2): -4})
        text = io.ppp_to_json(inst)
        doc = json.loads(text)
        assert doc["m"] == 3 and doc["interactions"][0] == [0, 1, 2, 3, 5]
        assert io.ppp_from_json(text) == inst

    def test_malformed(self):
        with pytest.raises(ParseError):
            io.ppp_from_json('{"n": 3}')

    def test_solution_json(self):
        sol = Solution(np.array([1, 0]), Fraction(3, 2), feasible=True, meta={"solver": "brute", "seed": None})
        doc = json.loads(io.solution_to_json(sol))
        assert doc == {
            "energy": {"num": 3, "den": 2},
            "assignment": [1, 0],
            "feasible": True,
            "permutation": None,
            "solver": "brute",
            "seed": None,
        }


class TestProblemInputs:
    def test_qap_with_and_without_size(self):
        body = "0 1\n0 0\n\n0 3\n2 0\n"
        f, d = io.read_qap(body)
        assert f.tolist() == [[0, 1], [0, 0]] and d.tolist() == [[0, 3], [2, 0]]
        f2, d2 = io.read_qap("2\n" + body)
        assert (f2 == f).all() and (d2 == d).all()

    def test_qap_bad_count(self):
        with pytest.raises(ParseError):
            io.read_qap("1 2 3 4 5\n")

    def test_matrix(self):
        assert io.read_matrix("0 1 2\n1 0 3\n2 3 0\n").shape == (3, 3)

    def test_matrix_bad_token(self):
        with pytest.raises(ParseError) as err:
            io.read_matrix("0 1\n# comment\nx 0\n")
        assert err.value.line == 3

    def test_graph_round_trip(self):
        g = random_graph(8, 12, seed=4)
        assert io.read_graph(io.write_graph(g)) == g

    def test_graph_default_weight_and_comments(self):
        g = io.read_graph("# triangle\nnodes 3\n0 1\n1 2 4\n0 2 # last\n")
        assert g.edges == ((0, 1, 1), (0, 2, 1), (1, 2, 4))

    def test_graph_errors(self):
        with pytest.raises(ParseError) as err:
            io.read_graph("0 1 1\n")
        assert err.value.line == 1
        with pytest.raises(ParseError) as err:
            io.read_graph("nodes 3\n0 1 1\n0 1 a\n")
        assert err.value.line == 3
        with pytest.raises(ParseError):
            io.read_graph("nodes 2\n0 5 1\n")

    def test_graph_pair(self):
        guest, host = io.read_graph_pair("nodes 2\n0 1\nnodes 3\n0 1\n1 2\n")
        assert guest.num_nodes == 2 and host.num_edges == 2
        with pytest.raises(ParseError):
            io.read_graph_pair("nodes 2\n0 1\n")

    def test_bipartite(self):
        m, n, edges = io.read_bipartite("2 3\n0 0 4\n1 2 5\n")
        assert (m, n) == (2, 3) and edges == [(0, 0, 4), (1, 2, 5)]
        with pytest.raises(ParseError) as err:
            io.read_bipartite("2 3\n0 0 4\n2 0 1\n")
        assert err.value.line == 3
        with pytest.raises(ParseError):
            io.read_bipartite("")
