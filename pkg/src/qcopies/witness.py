"""Measurement settings for certifying an n-qubit SC state, the fidelity
decomposition over those settings, and the standard deviation of the
resulting fidelity estimate.

An n-qubit SC state needs n+1 settings: the computational (H/V) basis plus
the n rotated product bases at theta = k*pi/n, k = 1..n, where the rotated
single-qubit basis is |+,theta> = (|H> + e^{i theta}|V>)/sqrt(2) and
|-,theta> = (|H> - e^{i theta}|V>)/sqrt(2).  Per setting only one aggregate
probability enters the fidelity: the mass on the two computational corners
(setting 1) or the mass of outcomes with an even number of '-' results
(rotated settings), so that <M_theta^(x)n> = 2*P_j - 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import DensityMatrix, fidelity_pure, sc_state
from .errors import DimensionMismatchError, QcopiesError

COMPUTATIONAL = "computational"
ROTATED = "rotated"


@lru_cache(maxsize=32)
def parity_weights(n: int) -> np.ndarray:
    """(-1)**popcount(outcome) for every outcome index of an n-qubit setting."""
    idx = np.arange(2**n, dtype=np.uint32)
    pops = np.zeros(2**n, dtype=np.int64)
    for q in range(n):
        pops += (idx >> q) & 1
    w = np.where(pops % 2 == 0, 1.0, -1.0)
    w.flags.writeable = False
    return w


@lru_cache(maxsize=32)
def corner_flags(n: int) -> np.ndarray:
    """Membership flags for the all-H and all-V outcomes."""
    w = np.zeros(2**n)
    w[0] = w[-1] = 1.0
    w.flags.writeable = False
    return w


def rotated_bras(theta: float) -> np.ndarray:
    """2x2 matrix whose rows are <+,theta| and <-,theta|."""
    e = np.exp(-1j * theta)
    return np.array([[1.0, e], [1.0, -e]], dtype=complex) / np.sqrt(2.0)


def basis_probabilities(rho: DensityMatrix, bras_per_qubit) -> np.ndarray:
    """Born probabilities of all 2**n outcomes of a product basis.

    `bras_per_qubit` is a length-n sequence of 2x2 matrices whose rows are
    the measurement bras of each qubit.  The contraction is done qubit by
    qubit on the reshaped density tensor, so no 2**n x 2**n projectors are
    ever materialized.
    """
    n = rho.n_qubits
    if len(bras_per_qubit) != n:
        raise DimensionMismatchError(f"need {n} single-qubit bases, got {len(bras_per_qubit)}")
    t = rho.matrix.reshape((2,) * (2 * n))
    for q, u in enumerate(bras_per_qubit):
        t = np.moveaxis(np.tensordot(u, t, axes=([1], [q])), 0, q)
        t = np.moveaxis(np.tensordot(u.conj(), t, axes=([1], [n + q])), 0, n + q)
    probs = np.einsum("ii->i", t.reshape(2**n, 2**n)).real.copy()
    np.clip(probs, 0.0, None, out=probs)
    return probs


@dataclass(frozen=True)
class MeasurementSetting:
    """One complete projective product basis plus its parity bookkeeping."""

    n: int
    kind: str
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in (COMPUTATIONAL, ROTATED):
            raise QcopiesError(f"unknown setting kind {self.kind!r}")
        if self.kind == ROTATED:
            if self.theta is None:
                raise QcopiesError("rotated setting needs an angle")
            k = self.theta * self.n / np.pi
            if not (abs(k - round(k)) < 1e-9 and 1 <= round(k) <= self.n):
                raise QcopiesError(
                    f"rotated angle must be k*pi/n with k in 1..{self.n}, got {self.theta}"
                )
        elif self.theta is not None:
            raise QcopiesError("computational setting takes no angle")

    @property
    def n_outcomes(self) -> int:
        return 2**self.n

    def outcome_weights(self) -> np.ndarray:
        """Parity coefficients (rotated) or corner membership flags."""
        if self.kind == COMPUTATIONAL:
            return corner_flags(self.n)
        return parity_weights(self.n)

    def outcome_labels(self) -> list[str]:
        """Sign-pattern label of every outcome, e.g. 'HVH' or '+-+'."""
        chars = "HV" if self.kind == COMPUTATIONAL else "+-"
        return [
            "".join(chars[(i >> (self.n - 1 - q)) & 1] for q in range(self.n))
            for i in range(2**self.n)
        ]

    def projector_ket(self, outcome: int) -> np.ndarray:
        """State vector of one outcome; built on demand, never stored."""
        if self.kind == COMPUTATIONAL:
            single = [np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)]
        else:
            b = rotated_bras(self.theta).conj()
            single = [b[0], b[1]]
        ket = np.array([1.0], dtype=complex)
        for q in range(self.n):
            ket = np.kron(ket, single[(outcome >> (self.n - 1 - q)) & 1])
        return ket

    def born_probabilities(self, rho: DensityMatrix) -> np.ndarray:
        if rho.n_qubits != self.n:
            raise DimensionMismatchError(f"state has {rho.n_qubits} qubits, setting {self.n}")
        if self.kind == COMPUTATIONAL:
            probs = np.diag(rho.matrix).real.copy()
            np.clip(probs, 0.0, None, out=probs)
            return probs
        return basis_probabilities(rho, [rotated_bras(self.theta)] * self.n)

    def aggregate_probability(self, probs: np.ndarray) -> float:
        """Corner mass (computational) or even-parity mass (rotated)."""
        w = self.outcome_weights()
        if self.kind == COMPUTATIONAL:
            return float(w @ probs)
        return float((1.0 + w @ probs) / 2.0)


@dataclass(frozen=True)
class WitnessDecomposition:
    """The n+1 settings certifying an n-qubit SC state, computational first."""

    n: int
    settings: tuple[MeasurementSetting, ...]

    def sign(self, j: int) -> int:
        """Coefficient sign of setting j (1-based, j >= 2) in the fidelity sum."""
        if not 2 <= j <= self.n + 1:
            raise QcopiesError(f"setting index must be in [2, {self.n + 1}], got {j}")
        return -1 if j % 2 == 0 else 1

    @property
    def thetas(self) -> list[float]:
        return [s.theta for s in self.settings[1:]]


@dataclass(frozen=True)
class SettingProbabilities:
    """Aggregate probability of each setting, length n+1."""

    n: int
    P: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.P, dtype=float)
        if arr.shape != (self.n + 1,):
            raise DimensionMismatchError(f"expected {self.n + 1} probabilities, got {arr.shape}")
        if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
            raise QcopiesError("setting probabilities must lie in [0, 1]")
        object.__setattr__(self, "P", np.clip(arr, 0.0, 1.0))
        self.P.flags.writeable = False

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "P": self.P.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "SettingProbabilities":
        obj = json.loads(text)
        return cls(n=int(obj["n"]), P=np.asarray(obj["P"], dtype=float))


def build_settings(n: int) -> WitnessDecomposition:
    """Computational setting plus rotated settings at theta = k*pi/n, k = 1..n."""
    if not 1 <= n <= 12:
        raise QcopiesError(f"qubit count must be in [1, 12], got {n}")
    settings = [MeasurementSetting(n, COMPUTATIONAL)]
    settings += [MeasurementSetting(n, ROTATED, k * np.pi / n) for k in range(1, n + 1)]
    return WitnessDecomposition(n=n, settings=tuple(settings))


def setting_probabilities(rho: DensityMatrix, wd: WitnessDecomposition) -> SettingProbabilities:
    """Exact aggregate probabilities P_1..P_{n+1} of a state."""
    if rho.n_qubits != wd.n:
        raise DimensionMismatchError(f"state has {rho.n_qubits} qubits, witness {wd.n}")
    P = [s.aggregate_probability(s.born_probabilities(rho)) for s in wd.settings]
    return SettingProbabilities(n=wd.n, P=np.array(P))


def fidelity_from_probabilities(p: SettingProbabilities) -> float:
    """Fidelity with the pure SC state from the n+1 aggregate probabilities.

    F = P_1/2 + sum_{j=2}^{n+1} (-1)^{j-1} (P_j - 1/2) / n.
    """
    n = p.n
    signs = np.array([(-1) ** (j - 1) for j in range(2, n + 2)], dtype=float)
    return float(p.P[0] / 2.0 + signs @ (p.P[1:] - 0.5) / n)


def delta_f(p: SettingProbabilities, t) -> float:
    """Standard deviation of the fidelity estimate with t_j copies per setting.

    sqrt( P1(1-P1)/(4 t1) + (1/n^2) sum_{j>=2} Pj(1-Pj)/tj ).
    """
    counts = np.asarray(getattr(t, "t", t), dtype=float)
    if counts.shape != p.P.shape:
        raise DimensionMismatchError(f"need {p.P.size} copy counts, got {counts.shape}")
    if np.any(counts <= 0):
        raise QcopiesError("all copy counts must be positive")
    var = p.P * (1.0 - p.P)
    n = p.n
    return float(np.sqrt(var[0] / (4.0 * counts[0]) + np.sum(var[1:] / counts[1:]) / n**2))


def witness_expectation(rho: DensityMatrix, n: int) -> float:
    """<w> = 1/2 - F; negative value certifies genuine entanglement."""
    if rho.n_qubits != n:
        raise DimensionMismatchError(f"state has {rho.n_qubits} qubits, expected {n}")
    return 0.5 - fidelity_pure(rho, sc_state(n))
