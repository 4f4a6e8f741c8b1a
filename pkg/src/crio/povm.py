"""Control-power analysis: what the two operators can do without the controller.

Both non-controller parties of the tripartite channel apply two-outcome
rank-1 POVMs {|beta_j><beta_j|} and {|gamma_k><gamma_k|} to their channel
qubits, trying to cut the controller's qubit free.  Every outcome pair
occurs with probability 1/4; a branch implements a remote rotation only
when its four coefficients satisfy the cross-ratio condition and the
residual target operator is proportional to exp(i*alpha*sigma_n).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np

from .graphstate import CrioTopology, crio_channel_state
from .qcore import (
    IDENTITY_2,
    PauliAxis,
    QuantumState,
    X_AXIS,
    apply_controlled_op,
    pauli_axis_matrix,
    product_state,
    project_qubit,
    tensor,
)
from .stator import Stator, stator_from_state
from .protocol import step1_stator

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-9


def _ket(theta: float, phase: float) -> np.ndarray:
    return np.array([math.cos(theta), np.exp(1j * phase) * math.sin(theta)], dtype=complex)


@dataclass(frozen=True)
class PovmParams:
    """Eight angles for the two rank-1 POVM pairs.

    First party: |beta_j> = cos(theta_j)|0> + e^{i phi_j} sin(theta_j)|1>,
    second party likewise with (lambda_k, omega_k).  Completeness forces
    theta2 = pi/2 - theta1 with phi2 = phi1 +/- pi (mod 2pi), and the same
    for the lambdas/omegas, except that the phase is free at the theta
    endpoints where sin or cos vanishes.
    """

    theta1: float
    theta2: float
    phi1: float
    phi2: float
    lambda1: float
    lambda2: float
    omega1: float
    omega2: float

    def __post_init__(self) -> None:
        for name in ("theta1", "theta2", "lambda1", "lambda2"):
            v = getattr(self, name)
            if v < -1e-12 or v > math.pi / 2 + 1e-12:
                raise ValueError(f"{name} must lie in [0, pi/2]")
        for m, k1, k2 in (("beta", self.beta(1), self.beta(2)), ("gamma", self.gamma(1), self.gamma(2))):
            total = np.outer(k1, k1.conj()) + np.outer(k2, k2.conj())
            if np.max(np.abs(total - IDENTITY_2)) > 1e-10:
                raise ValueError(f"{m} kets do not satisfy POVM completeness within 1e-10")

    def beta(self, j: int) -> np.ndarray:
        if j == 1:
            return _ket(self.theta1, self.phi1)
        if j == 2:
            return _ket(self.theta2, self.phi2)
        raise ValueError("j must be 1 or 2")

    def gamma(self, k: int) -> np.ndarray:
        if k == 1:
            return _ket(self.lambda1, self.omega1)
        if k == 2:
            return _ket(self.lambda2, self.omega2)
        raise ValueError("k must be 1 or 2")

    @staticmethod
    def from_free(theta1: float, phi1: float, lambda1: float, omega1: float) -> "PovmParams":
        """Fill the complementary outcomes so completeness holds exactly."""
        return PovmParams(
            theta1,
            math.pi / 2 - theta1,
            phi1 % TWO_PI,
            (phi1 + math.pi) % TWO_PI,
            lambda1,
            math.pi / 2 - lambda1,
            omega1 % TWO_PI,
            (omega1 + math.pi) % TWO_PI,
        )

    @staticmethod
    def random_valid(rng: np.random.Generator) -> "PovmParams":
        return PovmParams.from_free(
            rng.uniform(0, math.pi / 2),
            rng.uniform(0, TWO_PI),
            rng.uniform(0, math.pi / 2),
            rng.uniform(0, TWO_PI),
        )


def build_povm(params: PovmParams):
    """Rank-1 projectors (M1, M2, N1, N2) onto the four kets."""
    b1, b2 = params.beta(1), params.beta(2)
    g1, g2 = params.gamma(1), params.gamma(2)
    return (
        np.outer(b1, b1.conj()),
        np.outer(b2, b2.conj()),
        np.outer(g1, g1.conj()),
        np.outer(g2, g2.conj()),
    )


@dataclass(frozen=True)
class BranchCoefficients:
    """c_{s,t} = <beta_j|s><gamma_k|t>, the four amplitudes of the measured stator."""

    c00: complex
    c01: complex
    c10: complex
    c11: complex

    def as_tuple(self):
        return (self.c00, self.c01, self.c10, self.c11)


def branch_coefficients(params: PovmParams, j: int, k: int) -> BranchCoefficients:
    beta, gamma = params.beta(j), params.gamma(k)
    b = beta.conj()
    g = gamma.conj()
    return BranchCoefficients(b[0] * g[0], b[0] * g[1], b[1] * g[0], b[1] * g[1])


@dataclass(frozen=True)
class RealizedOperation:
    """Whether a branch frees the controller qubit and which rotations it enacts.

    realizable means the post-measurement state factorizes across the
    controller cut.  alphas lists every rotation angle in [0, 2pi) whose
    exp(i*alpha*sigma_n) is proportional to the residual target operator;
    the pair (alpha, alpha+pi) is always present together since the two
    differ by a global sign.  alphas is empty when the residual operator
    is not proportional to any rotation.
    """

    realizable: bool
    K: complex | None
    alphas: tuple

    def has_alpha(self, alpha: float, tol: float = ANGLE_TOL) -> bool:
        return angle_in_set(alpha, self.alphas, tol)


def angle_in_set(alpha: float, alphas, tol: float = ANGLE_TOL) -> bool:
    a = alpha % TWO_PI
    return any(min(abs(a - b), TWO_PI - abs(a - b)) <= tol for b in alphas)


def _rotation_angles(r0: complex, r1: complex, tol: float = 1e-10) -> tuple:
    """Angles alpha with (r0, r1) proportional to (cos a, i sin a)."""
    m0, m1 = abs(r0), abs(r1)
    if m1 <= tol * max(1.0, m0):
        return (0.0, math.pi)
    if m0 <= tol * max(1.0, m1):
        return (math.pi / 2, 3 * math.pi / 2)
    t = -1j * r1 / r0
    if abs(t.imag) > 1e-9 * max(1.0, abs(t)):
        return ()
    a = math.atan(t.real) % TWO_PI
    return tuple(sorted((a, (a + math.pi) % TWO_PI)))


def separability_check(c: BranchCoefficients, tol: float = 1e-10) -> RealizedOperation:
    """Cross-ratio test c00*c01 == c11*c10, then the realized rotation angles."""
    scale = max(abs(v) for v in c.as_tuple())
    if scale <= tol:
        return RealizedOperation(False, None, ())
    realizable = abs(c.c00 * c.c01 - c.c11 * c.c10) <= tol * max(1.0, scale * scale)
    if not realizable:
        return RealizedOperation(False, None, ())
    if abs(c.c10) > tol * scale:
        K = c.c00 / c.c10
    elif abs(c.c01) > tol * scale:
        K = c.c11 / c.c01
    else:
        K = None
    if max(abs(c.c10), abs(c.c01)) > tol * scale:
        r0, r1 = c.c10, c.c01
    else:
        r0, r1 = c.c00, c.c11
    return RealizedOperation(True, K, _rotation_angles(r0, r1))


# ----------------------------------------------------------------------
# outcome probabilities

def normalized_channel_stator(axis: PauliAxis) -> Stator:
    """The step-1 stator of the tripartite channel, scaled to Tr(S^dag S) = 1."""
    return step1_stator(1, [axis]).normalize()


def outcome_probability(params: PovmParams, j: int, k: int, axis: PauliAxis = X_AXIS) -> float:
    """p(j,k) = Tr[ W^dag (I (x) M_j (x) N_k) W ]; equals 1/4 for any valid POVM.

    This is the a-priori probability for an unknown target state (the
    trace averages the target); sigma_n being traceless kills the cross
    term.  Conditioned on a specific target the branch probability is
    (1/4)(1 + sin(2 theta_j) sin(2 lambda_k) cos(phi_j) cos(omega_k) <sigma_n>),
    which is flat for every target exactly inside the realizable families.
    """
    w = normalized_channel_stator(axis).as_matrix()  # maps target -> (a1,a2,a3) x target
    m_ops = build_povm(params)
    mj, nk = m_ops[j - 1], m_ops[k + 1]
    e_control = np.kron(np.kron(IDENTITY_2, mj), nk)
    e_full = np.kron(e_control, IDENTITY_2)
    return float(np.trace(w.conj().T @ e_full @ w).real)


def _measured_channel_state(axis: PauliAxis, target_vec) -> QuantumState:
    """Tripartite channel tensor the target, after the step-1 coupling."""
    state = crio_channel_state(CrioTopology(1))
    state = tensor(state, product_state(["O3"], [target_vec]))
    return apply_controlled_op(state, "a3", "O3", pauli_axis_matrix(axis))


@dataclass
class PovmBranchSim:
    probability: float
    schmidt_ratio: float       # second/first singular value across the controller cut
    controller_factor: np.ndarray | None
    target_factor: np.ndarray | None

    @property
    def factorized(self) -> bool:
        return self.schmidt_ratio <= 1e-10


def simulate_branch(params: PovmParams, j: int, k: int, axis: PauliAxis, target_vec) -> PovmBranchSim:
    """Project the prepared state onto (|beta_j>, |gamma_k|) and analyze the cut."""
    state = _measured_channel_state(axis, target_vec)
    p_b, state = project_qubit(state, "a2", params.beta(j))
    if state is None:
        return PovmBranchSim(0.0, 0.0, None, None)
    p_c, state = project_qubit(state, "a3", params.gamma(k))
    if state is None:
        return PovmBranchSim(0.0, 0.0, None, None)
    mat = state.reordered(("a1", "O3")).amplitudes.reshape(2, 2)
    u, s, vh = np.linalg.svd(mat)
    ratio = float(s[1] / s[0]) if s[0] > 0 else 0.0
    return PovmBranchSim(
        probability=float(p_b * p_c),
        schmidt_ratio=ratio,
        controller_factor=u[:, 0] if ratio <= 1e-10 else None,
        target_factor=vh[0] if ratio <= 1e-10 else None,
    )


def outcome_probabilities_simulated(params: PovmParams, axis: PauliAxis, target_vec) -> np.ndarray:
    """The four branch probabilities conditioned on a specific target state,
    from statevector projections, ordered (1,1),(1,2),(2,1),(2,2)."""
    return np.array(
        [simulate_branch(params, j, k, axis, target_vec).probability for j in (1, 2) for k in (1, 2)]
    )


def _branch_maps(params: PovmParams, axis: PauliAxis) -> list:
    """4x2 maps target ket -> unnormalized (controller, target) branch state.

    Built by simulating the prepared channel on the two basis targets and
    contracting the measured qubits with the POVM kets; the squared column
    action gives the branch probability for any target state.
    """
    columns = {0: [], 1: []}
    for basis_bit in (0, 1):
        vec = np.zeros(2, dtype=complex)
        vec[basis_bit] = 1.0
        state = _measured_channel_state(axis, vec)
        t = state.tensor_view()  # axes: a1, a2, a3, O3
        for j in (1, 2):
            for k in (1, 2):
                proj = np.tensordot(params.beta(j).conj(), t, axes=([0], [1]))
                proj = np.tensordot(params.gamma(k).conj(), proj, axes=([0], [1]))
                columns[basis_bit].append(proj.reshape(-1))  # (a1, O3) flattened
    return [np.column_stack([columns[0][i], columns[1][i]]) for i in range(4)]


def sample_outcomes(
    params: PovmParams,
    n_samples: int,
    seed: int,
    axis: PauliAxis = X_AXIS,
    target_vec=None,
) -> np.ndarray:
    """Monte-Carlo outcome counts over the four (j,k) pairs.

    With no pinned target a fresh Haar-random target is drawn for every
    shot, matching the unknown-state setting in which the a-priori outcome
    distribution is flat at 1/4.  A pinned target samples its conditional
    distribution instead.
    """
    rng = np.random.default_rng(seed)
    if target_vec is not None:
        probs = outcome_probabilities_simulated(params, axis, target_vec)
        return rng.multinomial(n_samples, probs / probs.sum())
    maps = _branch_maps(params, axis)
    psi = rng.normal(size=(2, n_samples)) + 1j * rng.normal(size=(2, n_samples))
    psi /= np.linalg.norm(psi, axis=0)
    probs = np.stack([np.sum(np.abs(m @ psi) ** 2, axis=0) for m in maps])  # (4, n)
    probs /= probs.sum(axis=0)
    draws = rng.random(n_samples)
    outcome_index = (draws >= np.cumsum(probs, axis=0)).sum(axis=0)
    return np.bincount(outcome_index, minlength=4)


def measured_stator(params: PovmParams, j: int, k: int, axis: PauliAxis) -> Stator:
    """Extract the post-measurement stator on the controller qubit from simulation.

    The projection probability depends on the probe here, so each joint is
    handed over with its pre-normalization weight.
    """
    joints, probes, scales = [], [], []
    for vec in (np.array([1.0, 0.0]), np.array([1.0, 1.0]) / math.sqrt(2), np.array([1.0, 1.0j]) / math.sqrt(2)):
        state = _measured_channel_state(axis, vec)
        p_b, state = project_qubit(state, "a2", params.beta(j))
        p_c, state = project_qubit(state, "a3", params.gamma(k))
        joints.append(state)
        probes.append(product_state(["O3"], [vec]))
        scales.append(math.sqrt(p_b * p_c))
    return stator_from_state(joints, ("a1",), ("O3",), (axis,), probes, joint_scales=scales)


# ----------------------------------------------------------------------
# the two solution families

@dataclass(frozen=True)
class PovmTableRow:
    pair: tuple                      # (j, k)
    params: PovmParams
    K: complex | None
    coefficients: BranchCoefficients
    alphas: tuple


def enumerate_case1(
    theta1: float,
    phi1: float,
    charlie_choice: str = "lambda1_zero",
    omega1: float = 0.0,
    omega2: float = 0.0,
):
    """The endpoint family: one POVM is the computational-basis measurement.

    charlie_choice 'lambda1_zero' puts (lambda1, lambda2) = (0, pi/2);
    'lambda1_half_pi' swaps them.  Realizable rotations are the multiples
    of pi/2, each pair of branches giving {0, pi} or {pi/2, 3pi/2}.
    """
    if charlie_choice == "lambda1_zero":
        lam1, lam2 = 0.0, math.pi / 2
    elif charlie_choice == "lambda1_half_pi":
        lam1, lam2 = math.pi / 2, 0.0
    else:
        raise ValueError("charlie_choice must be 'lambda1_zero' or 'lambda1_half_pi'")
    params = PovmParams(
        theta1, math.pi / 2 - theta1, phi1 % TWO_PI, (phi1 + math.pi) % TWO_PI,
        lam1, lam2, omega1 % TWO_PI, omega2 % TWO_PI,
    )
    rows = []
    for j in (1, 2):
        for k in (1, 2):
            c = branch_coefficients(params, j, k)
            op = separability_check(c)
            rows.append(PovmTableRow((j, k), params, op.K, c, op.alphas))
    return rows


def enumerate_case2(lambda1: float):
    """The interior family: theta = pi/4, phases (0, pi) and (pi/2, 3pi/2).

    Requires lambda1 strictly inside (0, pi/2); the endpoints belong to
    the endpoint family.  Each branch realizes one (alpha, alpha+pi) pair
    determined by lambda1.
    """
    if not (1e-12 < lambda1 < math.pi / 2 - 1e-12):
        raise ValueError("lambda1 must lie strictly inside (0, pi/2)")
    params = PovmParams(
        math.pi / 4, math.pi / 4, 0.0, math.pi,
        lambda1, math.pi / 2 - lambda1, math.pi / 2, 3 * math.pi / 2,
    )
    rows = []
    for j in (1, 2):
        for k in (1, 2):
            c = branch_coefficients(params, j, k)
            op = separability_check(c)
            rows.append(PovmTableRow((j, k), params, op.K, c, op.alphas))
    return rows


def case2_lambda1_for_alpha(alpha: float) -> float:
    """Which lambda1 the second party must request to reach a generic alpha."""
    a = alpha % TWO_PI
    if abs(a % (math.pi / 2)) < 1e-12:
        raise ValueError("multiples of pi/2 are covered by the endpoint family")
    if 0 < a < math.pi / 2:
        return a
    if math.pi / 2 < a < math.pi:
        return math.pi - a
    if math.pi < a < 3 * math.pi / 2:
        return 3 * math.pi / 2 - a
    return a - 3 * math.pi / 2


def success_rate(target_alpha: float, tol: float = ANGLE_TOL) -> float:
    """Best achievable probability of enacting exp(i*alpha*sigma_n) controller-free.

    Constructive: scans the two completeness-respecting families, counts
    the favorable branches (each occurring with probability 1/4), and
    returns the best count / 4.  Comes out 1/2 on multiples of pi/4 and
    1/4 elsewhere.
    """
    candidates = []
    candidates.append(enumerate_case1(math.pi / 4, 0.0, "lambda1_zero"))
    candidates.append(enumerate_case1(math.pi / 4, 0.0, "lambda1_half_pi"))
    candidates.append(enumerate_case2(math.pi / 4))
    try:
        lam1 = case2_lambda1_for_alpha(target_alpha)
        if abs(lam1 - math.pi / 4) > 1e-12:
            candidates.append(enumerate_case2(lam1))
    except ValueError:
        pass
    best = 0.0
    for rows in candidates:
        favorable = sum(1 for row in rows if angle_in_set(target_alpha, row.alphas, tol))
        best = max(best, favorable / 4.0)
    return best


def guess_probability(lambda1: float, tol: float = ANGLE_TOL) -> float:
    """Second party's chance of guessing the rotation angle from its POVM choice.

    One over the number of distinct candidate angles that the family with
    this lambda1 can realize: four at lambda1 in {0, pi/4, pi/2}, eight
    otherwise.
    """
    if lambda1 < -1e-12 or lambda1 > math.pi / 2 + 1e-12:
        raise ValueError("lambda1 must lie in [0, pi/2]")
    lam = float(lambda1)
    candidates = [
        math.pi - lam, TWO_PI - lam, 3 * math.pi / 2 - lam, math.pi / 2 - lam,
        lam, lam + math.pi, lam + 3 * math.pi / 2, lam + math.pi / 2,
    ]
    distinct: list = []
    for a in candidates:
        a = a % TWO_PI
        if not any(min(abs(a - b), TWO_PI - abs(a - b)) <= tol for b in distinct):
            distinct.append(a)
    return 1.0 / len(distinct)


def control_power_report(target_alpha: float) -> dict:
    """Machine-readable summary for one target rotation angle."""
    rate = success_rate(target_alpha)
    witness: dict | None = None
    favorable = []
    families = [
        ("endpoint_lambda1_zero", enumerate_case1(math.pi / 4, 0.0, "lambda1_zero")),
        ("endpoint_lambda1_half_pi", enumerate_case1(math.pi / 4, 0.0, "lambda1_half_pi")),
        ("interior_lambda1_quarter_pi", enumerate_case2(math.pi / 4)),
    ]
    try:
        lam1 = case2_lambda1_for_alpha(target_alpha)
        if abs(lam1 - math.pi / 4) > 1e-12:
            families.append((f"interior_lambda1={lam1:.12g}", enumerate_case2(lam1)))
    except ValueError:
        pass
    for name, rows in families:
        fav = [row.pair for row in rows if angle_in_set(target_alpha, row.alphas)]
        if len(fav) / 4.0 == rate and rate > 0 and witness is None:
            p = rows[0].params
            witness = {
                "family": name,
                "theta1": p.theta1, "theta2": p.theta2, "phi1": p.phi1, "phi2": p.phi2,
                "lambda1": p.lambda1, "lambda2": p.lambda2, "omega1": p.omega1, "omega2": p.omega2,
            }
            favorable = [list(pair) for pair in fav]
    return {
        "target_alpha": target_alpha % TWO_PI,
        "success_rate": rate,
        "witness_params": witness,
        "favorable_branches": favorable,
    }
