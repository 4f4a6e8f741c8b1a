"""Six-step LOCC orchestration of controlled remote rotations.

Participants A_1..A_{2N+1} share the (2N+1)-qubit channel state; each
group (A_k, A_{k+N}) with k in 2..N+1 implements exp(i*beta*sigma_n) on
the unknown state held by A_{k+N}, gated by controller A_1:

  step 1  A_j applies a controlled axis-Pauli from its channel qubit a_j
          onto its target O_j (j = N+2..2N+1)
  step 2  A_3..A_{N+1} apply H to their qubits
  step 3  A_1 measures a_1 in X and broadcasts the bit; on 1 each of
          A_2..A_{N+1} applies sigma_x to its own qubit
  step 4  A_{N+2}..A_{2N+1} measure in X; a 1 outcome triggers sigma_z
          on the partner qubit a_{j-N}
  step 5  A_2..A_{N+1} apply exp(i*beta*sigma_x) locally
  step 6  A_2..A_{N+1} measure in Z; a 1 outcome triggers i*sigma_n on
          the partner target

Branch enumeration forces every measurement outcome combination and
tracks the exact probability of each branch.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .graphstate import (
    CrioTopology,
    amplitude_oracle,
    crio_channel_state,
    qubit_labels,
    target_label,
)
from .qcore import (
    HADAMARD,
    PAULI_X,
    PAULI_Z,
    PauliAxis,
    QuantumState,
    X_AXIS,
    apply_1q,
    apply_controlled_op,
    fidelity_up_to_phase,
    measure,
    measurement_probabilities,
    pauli_axis_matrix,
    product_state,
    purity,
    reduced_density,
    rotation,
    tensor,
)
from .stator import Stator

FIDELITY_TOL = 1e-10


class LocalityError(ValueError):
    """A party attempted an operation on a qubit it does not own."""


@dataclass(frozen=True)
class Party:
    id: str
    owned_qubits: frozenset
    knows_angle: float | None = None
    knows_axis: PauliAxis | None = None


@dataclass(frozen=True)
class ClassicalMessage:
    sender: str
    recipient: str
    step: str
    payload: int  # a single outcome bit; never angles or axes


@dataclass
class BranchRecord:
    outcomes: str
    probability: float
    corrections: tuple
    final_state: QuantumState
    fidelity: float
    transcript: tuple


@dataclass
class ProtocolResult:
    n_systems: int
    permitted: bool
    participating_systems: tuple  # target indices j in channel numbering
    expected_target: QuantumState
    branches: list
    measurement_count: int
    mode: str
    seed: int | None = None

    @property
    def transcript(self) -> tuple:
        return self.branches[0].transcript if self.branches else ()

    def min_fidelity(self) -> float:
        return min(b.fidelity for b in self.branches)

    def total_probability(self) -> float:
        return sum(b.probability for b in self.branches)

    def to_json_dict(self) -> dict:
        return {
            "n_systems": self.n_systems,
            "permitted": self.permitted,
            "participating_systems": list(self.participating_systems),
            "mode": self.mode,
            "seed": self.seed,
            "measurement_count": self.measurement_count,
            "branches": [
                {
                    "outcomes": b.outcomes,
                    "probability": b.probability,
                    "corrections": list(b.corrections),
                    "fidelity": b.fidelity,
                    "transcript": [
                        {"from": m.sender, "to": m.recipient, "step": m.step, "payload": m.payload}
                        for m in b.transcript
                    ],
                }
                for b in self.branches
            ],
        }


def build_parties(
    n_systems: int,
    axes: Sequence[PauliAxis],
    betas: Sequence[float],
) -> dict:
    """Ownership partition plus who knows which secret."""
    parties = {"A1": Party("A1", frozenset({"a1"}))}
    for k in range(2, n_systems + 2):
        parties[f"A{k}"] = Party(f"A{k}", frozenset({f"a{k}"}), knows_angle=float(betas[k - 2]))
    for j in range(n_systems + 2, 2 * n_systems + 2):
        parties[f"A{j}"] = Party(
            f"A{j}",
            frozenset({f"a{j}", target_label(j)}),
            knows_axis=axes[j - (n_systems + 2)],
        )
    return parties


def assert_local(parties: dict, actor: str, labels: Sequence[str]) -> None:
    owned = parties[actor].owned_qubits
    for lab in labels:
        if lab not in owned:
            raise LocalityError(f"party {actor} does not own qubit {lab!r}")


# ----------------------------------------------------------------------
# engine

@dataclass
class _Action:
    kind: str                      # "unitary" or "measure"
    actor: str
    step: str
    qubits: tuple
    apply: Callable | None = None              # unitary: state -> state
    basis: str = "Z"
    messages_to: tuple = ()
    on_one: Callable | None = None             # measure: state -> (state, corrections)


def _validate_inputs(n_systems, axes, betas, targets):
    if n_systems < 1:
        raise ValueError("need at least one remote system")
    if not (len(axes) == len(betas) == len(targets) == n_systems):
        raise ValueError("axes, betas and targets must each have one entry per system")
    vecs = []
    for t in targets:
        v = t.amplitudes if isinstance(t, QuantumState) else np.asarray(t, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise ValueError("target systems are single qubits")
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("target states must be normalized")
        vecs.append(v)
    return vecs


def _participating_ks(n_systems: int, controlled_groups) -> list:
    topo = CrioTopology(n_systems, controlled_groups)
    return [2] + sorted(topo.controlled_groups)


def _prepared_state(n_systems, axes, target_vecs, controlled_groups, parties):
    """Channel state tensor targets, after steps 1 and 2."""
    topo = CrioTopology(n_systems, controlled_groups)
    state = crio_channel_state(topo)
    t_labels = [target_label(j) for j in range(n_systems + 2, 2 * n_systems + 2)]
    state = tensor(state, product_state(t_labels, target_vecs))
    ks = _participating_ks(n_systems, controlled_groups)
    for k in ks:
        j = k + n_systems
        assert_local(parties, f"A{j}", (f"a{j}", target_label(j)))
        state = apply_controlled_op(
            state, f"a{j}", target_label(j), pauli_axis_matrix(axes[j - (n_systems + 2)])
        )
    for k in ks:
        if k >= 3:
            assert_local(parties, f"A{k}", (f"a{k}",))
            state = apply_1q(state, HADAMARD, f"a{k}")
    return state, ks


def _plan_actions(n_systems, axes, betas, ks, parties, permitted) -> list:
    actions = []
    if permitted:
        recipients = tuple(f"A{k}" for k in ks)

        def step3_fix(state, _ks=tuple(ks)):
            corrections = []
            for k in _ks:
                assert_local(parties, f"A{k}", (f"a{k}",))
                state = apply_1q(state, PAULI_X, f"a{k}")
                corrections.append(f"sigma_x a{k}")
            return state, corrections

        actions.append(
            _Action("measure", "A1", "step3", ("a1",), basis="X", messages_to=recipients, on_one=step3_fix)
        )
    for k in ks:
        j = k + n_systems

        def step4_fix(state, _k=k):
            assert_local(parties, f"A{_k}", (f"a{_k}",))
            return apply_1q(state, PAULI_Z, f"a{_k}"), [f"sigma_z a{_k}"]

        actions.append(
            _Action("measure", f"A{j}", "step4", (f"a{j}",), basis="X", messages_to=(f"A{k}",), on_one=step4_fix)
        )
    for k in ks:
        beta = betas[k + n_systems - (n_systems + 2)]

        def step5_rot(state, _k=k, _b=beta):
            assert_local(parties, f"A{_k}", (f"a{_k}",))
            return apply_1q(state, rotation(X_AXIS, _b), f"a{_k}")

        actions.append(_Action("unitary", f"A{k}", "step5", (f"a{k}",), apply=step5_rot))
    for k in ks:
        j = k + n_systems
        axis = axes[j - (n_systems + 2)]

        def step6_fix(state, _j=j, _ax=axis):
            assert_local(parties, f"A{_j}", (target_label(_j),))
            return apply_1q(state, 1j * pauli_axis_matrix(_ax), target_label(_j)), [
                f"i*sigma_n {target_label(_j)}"
            ]

        actions.append(
            _Action("measure", f"A{k}", "step6", (f"a{k}",), basis="Z", messages_to=(f"A{j}",), on_one=step6_fix)
        )
    return actions


def _expected_state(n_systems, axes, betas, target_vecs, ks) -> QuantumState:
    labels, vecs = [], []
    for k in ks:
        j = k + n_systems
        idx = j - (n_systems + 2)
        labels.append(target_label(j))
        vecs.append(rotation(axes[idx], betas[idx]) @ target_vecs[idx])
    # keep channel ordering O_{N+2}..O_{2N+1}
    order = sorted(range(len(labels)), key=lambda i: int(labels[i][1:]))
    return product_state([labels[i] for i in order], [vecs[i] for i in order])


def _branch_fidelity(state: QuantumState, expected: QuantumState) -> float:
    if state.labels == expected.labels:
        return fidelity_up_to_phase(state, expected)
    rho = reduced_density(state, expected.labels)
    val = float(np.real(expected.amplitudes.conj() @ rho @ expected.amplitudes))
    return math.sqrt(min(max(val, 0.0), 1.0))


def _walk(state, actions, idx, prob, outcomes, corrections, transcript, expected, sink, rng):
    """Depth-first expansion over measurement outcomes; rng=None enumerates."""
    while idx < len(actions):
        act = actions[idx]
        if act.kind == "unitary":
            state = act.apply(state)
            idx += 1
            continue
        if rng is None:
            p0, p1 = measurement_probabilities(state, act.qubits[0], act.basis)
            for outcome, p in ((0, p0), (1, p1)):
                if p < 1e-14:
                    continue
                _, post = measure(state, act.qubits[0], act.basis, forced_outcome=outcome, remove=True)
                new_msgs = transcript + tuple(
                    ClassicalMessage(act.actor, r, act.step, outcome) for r in act.messages_to
                )
                new_corr = corrections
                if outcome == 1:
                    post, applied = act.on_one(post)
                    new_corr = corrections + tuple(applied)
                _walk(post, actions, idx + 1, prob * p, outcomes + str(outcome), new_corr, new_msgs, expected, sink, None)
            return
        record, post = measure(state, act.qubits[0], act.basis, rng=rng, remove=True)
        outcome = record.outcome
        transcript = transcript + tuple(
            ClassicalMessage(act.actor, r, act.step, outcome) for r in act.messages_to
        )
        if outcome == 1:
            post, applied = act.on_one(post)
            corrections = corrections + tuple(applied)
        state = post
        prob *= record.probability
        outcomes += str(outcome)
        idx += 1
    sink.append(
        BranchRecord(outcomes, prob, corrections, state, _branch_fidelity(state, expected), transcript)
    )


def run_crio(
    n_systems: int,
    axes: Sequence[PauliAxis],
    betas: Sequence[float],
    targets: Sequence,
    mode: str = "enumerate",
    seed: int | None = None,
    permitted: bool = True,
    controlled_groups=None,
) -> ProtocolResult:
    """Run the full protocol, enumerating every branch or sampling one."""
    target_vecs = _validate_inputs(n_systems, axes, betas, targets)
    if mode not in ("enumerate", "sample"):
        raise ValueError("mode must be 'enumerate' or 'sample'")
    parties = build_parties(n_systems, axes, betas)
    state, ks = _prepared_state(n_systems, axes, target_vecs, controlled_groups, parties)
    actions = _plan_actions(n_systems, axes, betas, ks, parties, permitted)
    expected = _expected_state(n_systems, axes, betas, target_vecs, ks)
    branches: list = []
    rng = np.random.default_rng(seed) if mode == "sample" else None
    _walk(state, actions, 0, 1.0, "", (), (), expected, branches, rng)
    return ProtocolResult(
        n_systems=n_systems,
        permitted=permitted,
        participating_systems=tuple(k + n_systems for k in ks),
        expected_target=expected,
        branches=branches,
        measurement_count=sum(1 for a in actions if a.kind == "measure"),
        mode=mode,
        seed=seed,
    )


def run_tripartite(axis, alpha, target, mode="enumerate", seed=None, permitted=True) -> ProtocolResult:
    """Single remote system: controller, one operator, one holder."""
    return run_crio(1, [axis], [alpha], [target], mode=mode, seed=seed, permitted=permitted)


def run_fivepartite(axes, alpha, beta, targets, mode="enumerate", seed=None, permitted=True) -> ProtocolResult:
    """Two remote systems, including the extra H layer on the third qubit."""
    return run_crio(2, list(axes), [alpha, beta], list(targets), mode=mode, seed=seed, permitted=permitted)


# ----------------------------------------------------------------------
# control denial

@dataclass
class ControlDenialReport:
    n_systems: int
    purity_without_controller: float
    guess_branches: dict          # guess bit -> list[BranchRecord]
    best_guess: int
    best_guess_min_fidelity: float
    control_defeated: bool        # some guess reaches fidelity 1 on every branch


def control_denial_report(n_systems, axes, betas, targets) -> ControlDenialReport:
    """Controller declines: no step-3 measurement, no broadcast.

    Everyone else forges ahead, substituting a guessed bit for the unsent
    broadcast, and we enumerate what they can achieve.  The report also
    carries the purity of the non-controller reduced state after step 2.
    """
    target_vecs = _validate_inputs(n_systems, axes, betas, targets)
    parties = build_parties(n_systems, axes, betas)
    state, ks = _prepared_state(n_systems, axes, target_vecs, None, parties)
    others = [lab for lab in state.labels if lab != "a1"]
    pur = purity(reduced_density(state, others))
    expected = _expected_state(n_systems, axes, betas, target_vecs, ks)
    actions = _plan_actions(n_systems, axes, betas, ks, parties, permitted=False)

    guess_branches = {}
    for guess in (0, 1):
        start = state
        if guess == 1:
            for k in ks:
                start = apply_1q(start, PAULI_X, f"a{k}")
        sink: list = []
        _walk(start, actions, 0, 1.0, "", (), (), expected, sink, None)
        guess_branches[guess] = sink

    worst = {g: min(b.fidelity for b in brs) for g, brs in guess_branches.items()}
    best_guess = max(worst, key=lambda g: worst[g])
    return ControlDenialReport(
        n_systems=n_systems,
        purity_without_controller=pur,
        guess_branches=guess_branches,
        best_guess=best_guess,
        best_guess_min_fidelity=worst[best_guess],
        control_defeated=worst[best_guess] >= 1.0 - 1e-6,
    )


# ----------------------------------------------------------------------
# step-by-step paths for cross-checking against the symbolic stator algebra

def run_checkpoints(
    n_systems,
    axes,
    betas,
    target_vecs,
    outcomes: Sequence[int],
    permitted: bool = True,
    controlled_groups=None,
):
    """Single forced-outcome path, recording the state after each step."""
    target_vecs = _validate_inputs(n_systems, axes, betas, target_vecs)
    parties = build_parties(n_systems, axes, betas)
    topo = CrioTopology(n_systems, controlled_groups)
    state = crio_channel_state(topo)
    t_labels = [target_label(j) for j in range(n_systems + 2, 2 * n_systems + 2)]
    state = tensor(state, product_state(t_labels, target_vecs))
    ks = _participating_ks(n_systems, controlled_groups)
    checkpoints = []
    for k in ks:
        j = k + n_systems
        state = apply_controlled_op(state, f"a{j}", target_label(j), pauli_axis_matrix(axes[j - (n_systems + 2)]))
    checkpoints.append(("step1", state))
    for k in ks:
        if k >= 3:
            state = apply_1q(state, HADAMARD, f"a{k}")
    checkpoints.append(("step2", state))
    actions = _plan_actions(n_systems, axes, betas, ks, parties, permitted)
    it = iter(outcomes)
    last_step = None
    for act in actions:
        if act.kind == "unitary":
            if last_step != act.step and last_step is not None:
                checkpoints.append((last_step, state))
            state = act.apply(state)
            last_step = act.step
            continue
        if last_step is not None and last_step != act.step:
            checkpoints.append((last_step, state))
        outcome = int(next(it))
        _, state = measure(state, act.qubits[0], act.basis, forced_outcome=outcome, remove=True)
        if outcome == 1:
            state, _ = act.on_one(state)
        last_step = act.step
    if last_step is not None:
        checkpoints.append((last_step, state))
    return checkpoints


def step1_stator(n_systems: int, axes: Sequence[PauliAxis]) -> Stator:
    """Symbolic stator after step 1, read off the channel amplitude oracle."""
    if len(axes) != n_systems:
        raise ValueError("one axis per remote system")
    n = 2 * n_systems + 1
    terms = []
    for x in range(2 ** n):
        bits = format(x, f"0{n}b")
        word = tuple(int(bits[j - 1]) for j in range(n_systems + 2, 2 * n_systems + 2))
        terms.append((bits, word, amplitude_oracle(n_systems, bits)))
    return Stator(qubit_labels(n_systems), axes, terms)


def symbolic_checkpoints(n_systems, axes, betas, outcomes: Sequence[int]):
    """Stator transforms mirroring run_checkpoints on a permitted full run."""
    s = step1_stator(n_systems, axes)
    checkpoints = [("step1", s)]
    for k in range(3, n_systems + 2):
        s = s.apply_control_unitary(f"a{k}", HADAMARD)
    checkpoints.append(("step2", s))
    it = iter(outcomes)
    o = int(next(it))
    s = s.project_control("a1", "X", o)
    if o == 1:
        for k in range(2, n_systems + 2):
            s = s.apply_control_unitary(f"a{k}", PAULI_X)
    checkpoints.append(("step3", s))
    for k in range(2, n_systems + 2):
        j = k + n_systems
        o = int(next(it))
        s = s.project_control(f"a{j}", "X", o)
        if o == 1:
            s = s.apply_control_unitary(f"a{k}", PAULI_Z)
    checkpoints.append(("step4", s))
    for k in range(2, n_systems + 2):
        s = s.apply_control_unitary(f"a{k}", rotation(X_AXIS, betas[k - 2]))
    checkpoints.append(("step5", s))
    return checkpoints


# ----------------------------------------------------------------------
# run-configuration files

def run_config_to_dict(n_systems, axes, betas, targets, mode, seed, permitted, controlled_groups) -> dict:
    return {
        "n_systems": n_systems,
        "axes": [[ax.x, ax.y, ax.z] for ax in axes],
        "betas": [float(b) for b in betas],
        "targets": [[[complex(v[0]).real, complex(v[0]).imag], [complex(v[1]).real, complex(v[1]).imag]] for v in targets],
        "mode": mode,
        "seed": seed,
        "permitted": permitted,
        "controlled_groups": sorted(controlled_groups) if controlled_groups is not None else None,
    }


def run_config_from_dict(data: dict) -> dict:
    axes = [PauliAxis(*xyz) for xyz in data["axes"]]
    targets = [np.array([complex(re, im) for re, im in vec]) for vec in data["targets"]]
    groups = data.get("controlled_groups")
    return {
        "n_systems": int(data["n_systems"]),
        "axes": axes,
        "betas": [float(b) for b in data["betas"]],
        "targets": targets,
        "mode": data.get("mode", "enumerate"),
        "seed": data.get("seed"),
        "permitted": bool(data.get("permitted", True)),
        "controlled_groups": frozenset(groups) if groups is not None else None,
    }


def load_run_config(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return run_config_from_dict(json.load(fh))
