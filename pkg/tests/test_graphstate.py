import math

import numpy as np
import pytest

from crio.graphstate import (
    CrioTopology,
    Graph,
    all_bitstrings,
    amplitude_oracle,
    build_graph_state,
    crio_channel_state,
    crio_graph,
    edge_list_text,
    parse_edge_list,
    phi_state,
    qubit_labels,
    role_names,
    state_from_json_dict,
    state_to_csv,
    state_to_json_dict,
    sign_exponent,
)
from crio.qcore import apply_2q_cz, plus_state

INV_2SQRT2 = 1 / (2 * math.sqrt(2))

# the 3-qubit channel state, sign per basis string (frozen from its defining expansion)
H3_SIGNS = {
    "000": +1, "001": +1, "010": +1, "011": +1,
    "100": +1, "101": -1, "110": -1, "111": +1,
}


class TestGraph:
    def test_rejects_self_loops_and_bad_vertices(self):
        with pytest.raises(ValueError):
            Graph.of(3, [(1, 1)])
        with pytest.raises(ValueError):
            Graph.of(3, [(1, 4)])

    def test_normalizes_edge_orientation(self):
        g = Graph.of(3, [(2, 1), (1, 2), (3, 1)])
        assert g.sorted_edges() == [(1, 2), (1, 3)]


class TestBuildGraphState:
    def test_empty_edges_gives_plus_product(self):
        state = build_graph_state(Graph.of(2, []))
        np.testing.assert_allclose(state.amplitudes, plus_state(("1", "2")).amplitudes, atol=1e-15)

    def test_three_qubit_channel_sign_pattern(self):
        state = build_graph_state(Graph.of(3, [(1, 2), (1, 3)]), labels=("a", "b", "c"))
        for bits, sign in H3_SIGNS.items():
            assert state.amplitude(bits) == pytest.approx(sign * INV_2SQRT2, abs=1e-12), bits

    def test_five_qubit_channel_corner_amplitude(self):
        state = crio_channel_state(CrioTopology(2))
        assert state.amplitude("11111") == pytest.approx(-1 / (4 * math.sqrt(2)), abs=1e-12)

    def test_edge_order_independence(self):
        edges = [(1, 2), (1, 4), (2, 3), (3, 4), (3, 5)]
        labels = tuple("pqrst")
        rng = np.random.default_rng(5)
        ref = None
        for _ in range(4):
            order = list(edges)
            rng.shuffle(order)
            state = plus_state(labels)
            for u, v in order:
                state = apply_2q_cz(state, labels[u - 1], labels[v - 1])
            if ref is None:
                ref = state.amplitudes
            np.testing.assert_allclose(state.amplitudes, ref, atol=1e-15)

    def test_uniform_amplitude_magnitudes(self):
        for n, edges in ((3, [(1, 2), (1, 3)]), (4, [(1, 2), (2, 3), (3, 4), (1, 4)])):
            state = build_graph_state(Graph.of(n, edges))
            np.testing.assert_allclose(np.abs(state.amplitudes), 2 ** (-n / 2), atol=1e-12)


class TestCrioGraph:
    def test_single_system_channel_graph(self):
        g = crio_graph(CrioTopology(1))
        assert g.sorted_edges() == [(1, 2), (1, 3)]

    def test_two_system_full_control(self):
        g = crio_graph(CrioTopology(2))
        assert g.sorted_edges() == [(1, 2), (1, 4), (2, 3), (3, 4), (3, 5)]

    def test_partial_control_drops_edges_in_pairs(self):
        g = crio_graph(CrioTopology(2, frozenset()))
        assert g.sorted_edges() == [(1, 2), (1, 4), (3, 5)]

    def test_edge_count_invariant(self):
        assert len(crio_graph(CrioTopology(1)).edges) == 2
        for n in (2, 3, 4, 5):
            assert len(crio_graph(CrioTopology(n)).edges) == 3 * (n - 1) + 2

    def test_group_out_of_range(self):
        with pytest.raises(ValueError):
            CrioTopology(2, frozenset({5}))

    def test_roles_cover_every_vertex(self):
        topo = CrioTopology(3)
        roles = role_names(topo)
        assert set(roles) == set(range(1, 8))
        assert roles[1] == "controller"


class TestAmplitudeOracle:
    def test_all_zero_string(self):
        for n in (1, 2, 3):
            assert amplitude_oracle(n, "0" * (2 * n + 1)) == pytest.approx(
                1 / (2 ** n * math.sqrt(2)), abs=1e-15
            )

    def test_sign_flip_strings(self):
        assert amplitude_oracle(1, "101") == pytest.approx(-INV_2SQRT2, abs=1e-15)
        assert amplitude_oracle(1, "110") == pytest.approx(-INV_2SQRT2, abs=1e-15)
        assert amplitude_oracle(1, "111") == pytest.approx(+INV_2SQRT2, abs=1e-15)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_circuit_simulation(self, n):
        state = crio_channel_state(CrioTopology(n))
        for i, bits in enumerate(all_bitstrings(2 * n + 1)):
            assert abs(state.amplitudes[i] - amplitude_oracle(n, bits)) <= 1e-12, bits

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            amplitude_oracle(1, "10")

    def test_sign_exponent_is_boolean(self):
        for bits in all_bitstrings(5):
            assert sign_exponent(2, bits) in (0, 1)


class TestPhiState:
    def test_single_pair_is_bell(self):
        state = phi_state(1)
        np.testing.assert_allclose(state.amplitudes, np.array([1, 0, 0, 1]) / math.sqrt(2), atol=1e-15)

    def test_two_pair_expansion(self):
        state = phi_state(2)
        expected = np.zeros(16)
        for bits in ("0000", "0101", "1010", "1111"):
            expected[int(bits, 2)] = 0.5
        np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)

    def test_mismatched_halves_vanish(self):
        state = phi_state(3)
        for i, bits in enumerate(all_bitstrings(6)):
            if bits[:3] != bits[3:]:
                assert state.amplitudes[i] == 0


class TestSerialization:
    def test_edge_list_round_trip(self, tmp_path):
        g = crio_graph(CrioTopology(2))
        text = edge_list_text(g)
        assert text.splitlines()[0] == "n=5"
        assert parse_edge_list(text) == g

    def test_malformed_edge_list(self):
        with pytest.raises(ValueError):
            parse_edge_list("5\n1 2\n")
        with pytest.raises(ValueError):
            parse_edge_list("n=3\n1 2 3\n")

    def test_state_csv_and_json(self):
        state = crio_channel_state(CrioTopology(1))
        csv = state_to_csv(state)
        lines = csv.strip().splitlines()
        assert lines[0] == "index,real,imag"
        assert len(lines) == 9
        idx, re, im = lines[6].split(",")  # |101>
        assert int(idx) == 5
        assert float(re) == pytest.approx(-INV_2SQRT2, abs=1e-12)
        round_trip = state_from_json_dict(state_to_json_dict(state))
        np.testing.assert_allclose(round_trip.amplitudes, state.amplitudes, atol=1e-15)
        assert round_trip.labels == qubit_labels(1)
