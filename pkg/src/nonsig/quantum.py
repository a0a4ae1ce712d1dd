"""Two-qubit quantum behaviors: pure states, projective measurements, Born probabilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .behavior import Behavior, BehaviorError, Correlators, validate

_SAMPLE_CHUNK = 8192

PAULIS = np.array(
    [
        [[0.0, 1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [1.0j, 0.0]],
        [[1.0, 0.0], [0.0, -1.0]],
    ]
)
PAULIS.flags.writeable = False


@dataclass(frozen=True)
class QubitMeasurement:
    """A +-1 projective qubit measurement along a Bloch direction.

    The projectors are P(+-) = (I +- bloch . sigma) / 2.
    """

    bloch: np.ndarray  # (3,), unit norm

    def __post_init__(self):
        v = np.array(self.bloch, dtype=float)
        v.flags.writeable = False
        object.__setattr__(self, "bloch", v)
        if v.shape != (3,):
            raise BehaviorError("bloch vector must have 3 components")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise BehaviorError(f"bloch vector must be unit norm, got |v| = {np.linalg.norm(v)}")

    def projectors(self) -> np.ndarray:
        """Stacked projectors, shape (2, 2, 2); index 0 is the +1 outcome."""
        op = np.einsum("i,ijk->jk", self.bloch, PAULIS)
        eye = np.eye(2)
        return np.stack([(eye + op) / 2.0, (eye - op) / 2.0])


@dataclass(frozen=True)
class QuantumModel:
    """A two-qubit pure state with two projective measurements per party."""

    state: np.ndarray  # (4,) complex, unit norm
    alice: tuple[QubitMeasurement, QubitMeasurement]
    bob: tuple[QubitMeasurement, QubitMeasurement]

    def __post_init__(self):
        psi = np.array(self.state, dtype=complex)
        psi.flags.writeable = False
        object.__setattr__(self, "state", psi)
        object.__setattr__(self, "alice", tuple(self.alice))
        object.__setattr__(self, "bob", tuple(self.bob))
        if psi.shape != (4,):
            raise BehaviorError("state must be a 4-component vector")
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise BehaviorError(f"state must be normalized, got |psi| = {np.linalg.norm(psi)}")


def _born_tables(states: np.ndarray, alice_bloch: np.ndarray, bob_bloch: np.ndarray) -> np.ndarray:
    """Born-rule tables for batched models.

    states: (n, 4) complex; alice_bloch, bob_bloch: (n, 2, 3) unit rows.
    Returns (n, 2, 2, 2, 2) tables indexed [x, y, a, b].
    """
    n = states.shape[0]
    psi = states.reshape(n, 2, 2)  # psi[i, j] over Alice x Bob factors
    signs = np.array([1.0, -1.0])
    eye = np.eye(2)
    op_a = np.einsum("nxc,cij->nxij", alice_bloch, PAULIS)
    op_b = np.einsum("nyc,cij->nyij", bob_bloch, PAULIS)
    proj_a = 0.5 * (eye + signs[None, None, :, None, None] * op_a[:, :, None])  # (n,x,a,2,2)
    proj_b = 0.5 * (eye + signs[None, None, :, None, None] * op_b[:, :, None])  # (n,y,b,2,2)
    probs = np.einsum(
        "nij,nxaik,nkl,nybjl->nxyab", psi.conj(), proj_a, psi, proj_b, optimize=True
    )
    return probs.real


def _pauli_correlators(states: np.ndarray, alice_bloch: np.ndarray, bob_bloch: np.ndarray):
    """Correlators straight from operator expectations, bypassing probabilities."""
    n = states.shape[0]
    psi = states.reshape(n, 2, 2)
    op_a = np.einsum("nxc,cij->nxij", alice_bloch, PAULIS)
    op_b = np.einsum("nyc,cij->nyij", bob_bloch, PAULIS)
    a = np.einsum("nij,nxik,nkj->nx", psi.conj(), op_a, psi).real
    b = np.einsum("nij,nyjl,nil->ny", psi.conj(), op_b, psi).real
    ab = np.einsum("nij,nxik,nyjl,nkl->nxy", psi.conj(), op_a, op_b, psi, optimize=True).real
    return a, b, ab


def _model_arrays(m: QuantumModel):
    states = m.state[None, :]
    ab_a = np.stack([meas.bloch for meas in m.alice])[None]
    ab_b = np.stack([meas.bloch for meas in m.bob])[None]
    return states, ab_a, ab_b


def model_to_behavior(m: QuantumModel) -> Behavior:
    """The 16 Born probabilities of the model; validated to 1e-10."""
    table = _born_tables(*_model_arrays(m))[0]
    return validate(table, tol=1e-10)


def model_correlators(m: QuantumModel) -> Correlators:
    """Correlators via direct operator expectations (independent of the Born table path)."""
    a, b, ab = _pauli_correlators(*_model_arrays(m))
    return Correlators(a=a[0], b=b[0], ab=ab[0])


def bell_model() -> QuantumModel:
    """The canonical CHSH-optimal configuration: maximally entangled state,
    Alice measuring z and x, Bob at +-45 degrees between them."""
    phi_plus = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    z = QubitMeasurement(np.array([0.0, 0.0, 1.0]))
    x = QubitMeasurement(np.array([1.0, 0.0, 0.0]))
    bp = QubitMeasurement(np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0))
    bm = QubitMeasurement(np.array([-1.0, 0.0, 1.0]) / np.sqrt(2.0))
    return QuantumModel(state=phi_plus, alice=(z, x), bob=(bp, bm))


def bell_behavior() -> Behavior:
    """Behavior attaining the Tsirelson bound, correlators (1, 1, 1, -1)/sqrt(2)."""
    return model_to_behavior(bell_model())


def _random_states(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, 4)) + 1.0j * rng.standard_normal((n, 4))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _random_bloch(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal((n, 2, 3))
    return v / np.linalg.norm(v, axis=2, keepdims=True)


def sample_tables(n: int, seed: int) -> np.ndarray:
    """n Born tables from Haar-random pure states and uniform Bloch measurements.

    Deterministic given the seed and independent of chunking internals; the
    RNG stream for chunk c is derived from (seed, c).
    """
    if n < 1:
        raise BehaviorError("sample size must be >= 1")
    out = np.empty((n, 2, 2, 2, 2))
    for chunk, start in enumerate(range(0, n, _SAMPLE_CHUNK)):
        m = min(_SAMPLE_CHUNK, n - start)
        rng = np.random.default_rng([seed, chunk])
        out[start : start + m] = _born_tables(
            _random_states(m, rng), _random_bloch(m, rng), _random_bloch(m, rng)
        )
    return out


def sample(n: int, seed: int) -> list[Behavior]:
    """n random quantum behaviors; see ``sample_tables`` for the distribution."""
    tables = np.clip(sample_tables(n, seed), 0.0, None)
    return [Behavior(t) for t in tables]
