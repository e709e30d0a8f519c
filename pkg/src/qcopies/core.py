"""Complex linear algebra substrate: pure states, density matrices, tensor
products, synthetic noise models, fidelity and norms.

Conventions: qubit basis states are |H> = (1,0) and |V> = (0,1); a register
of n qubits lives in dimension 2**n with qubit 0 as the most significant bit
of the computational index.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import DimensionMismatchError, QcopiesError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-9
MAX_QUBITS = 12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (a kron b)[i*p+k, j*q+l] = a[i,j] * b[k,l]."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.array([[1.0]], dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _check_qubit_count(n: int) -> None:
    if not 1 <= int(n) <= MAX_QUBITS:
        raise QcopiesError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


class PureState:
    """Normalized state vector of an n-qubit register."""

    def __init__(self, amplitudes: np.ndarray):
        amps = np.array(amplitudes, dtype=complex).ravel()
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-12:
            raise QcopiesError(f"state vector norm^2 = {norm2!r}, expected 1")
        self.amplitudes = amps
        self.amplitudes.flags.writeable = False
        self.dim = amps.size

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    def __repr__(self):
        return f"PureState(dim={self.dim})"


class DensityMatrix:
    """Hermitian, trace-one, positive-semidefinite matrix of size 2**n."""

    def __init__(self, matrix: np.ndarray, validate: bool = True):
        m = np.array(matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
        if validate:
            herm_dev = float(np.max(np.abs(m - m.conj().T)))
            if herm_dev > HERMITIAN_TOL:
                raise QcopiesError(f"matrix is not Hermitian: max|rho - rho^dag| = {herm_dev:.3e}")
            tr = complex(np.trace(m))
            if abs(tr - 1.0) > TRACE_TOL:
                raise QcopiesError(f"trace = {tr!r}, expected 1")
            lo = float(np.linalg.eigvalsh(m).min())
            if lo < EIGENVALUE_FLOOR:
                raise QcopiesError(f"matrix is not PSD: min eigenvalue = {lo:.3e}")
        self.matrix = m
        self.matrix.flags.writeable = False
        self.dim = m.shape[0]

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def sc_state(n: int) -> PureState:
    """The n-qubit Schrodinger-cat state (|H...H> + |V...V>) / sqrt(2)."""
    _check_qubit_count(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return PureState(amps)


def pure_density(psi: PureState) -> DensityMatrix:
    """Rank-one projector |psi><psi|."""
    return DensityMatrix(np.outer(psi.amplitudes, psi.amplitudes.conj()), validate=False)


def fidelity_pure(rho: DensityMatrix, psi: PureState) -> float:
    """<psi| rho |psi>, clamped to [0, 1]."""
    if rho.dim != psi.dim:
        raise DimensionMismatchError(f"dim mismatch: {rho.dim} vs {psi.dim}")
    val = complex(psi.amplitudes.conj() @ rho.matrix @ psi.amplitudes)
    if abs(val.imag) > 1e-10:
        raise QcopiesError(f"fidelity has imaginary part {val.imag:.3e}")
    return float(min(1.0, max(0.0, val.real)))


def frobenius_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """sqrt(Tr[(a-b)(a-b)^dag])."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dim mismatch: {a.dim} vs {b.dim}")
    return float(np.linalg.norm(a.matrix - b.matrix, "fro"))


def white_noise_mix(target: DensityMatrix, p: float) -> DensityMatrix:
    """p * target + (1-p) * I/d."""
    if not 0.0 <= p <= 1.0:
        raise QcopiesError(f"mixing weight must be in [0, 1], got {p}")
    d = target.dim
    m = p * target.matrix + (1.0 - p) * np.eye(d) / d
    return DensityMatrix(m, validate=False)


def white_noise_weight_for_fidelity(n: int, fidelity: float) -> float:
    """Invert fidelity = p + (1-p)/d for the white-noise mixture weight p."""
    d = 2**n
    if not 1.0 / d <= fidelity <= 1.0:
        raise QcopiesError(f"fidelity {fidelity} outside [{1.0 / d}, 1] for n={n}")
    return (fidelity - 1.0 / d) / (1.0 - 1.0 / d)


def depolarized_sc(n: int, fidelity: float) -> DensityMatrix:
    """White-noise-mixed SC state whose fidelity with the pure SC state is exact."""
    p = white_noise_weight_for_fidelity(n, fidelity)
    return white_noise_mix(pure_density(sc_state(n)), p)


def noisy_sc_state(n: int, fidelity: float, corner_mass: float | None = None) -> DensityMatrix:
    """Synthetic noisy SC state with a prescribed measurement profile.

    With corner_mass=None this is the plain white-noise mixture at the given
    fidelity.  Otherwise the state is a three-component mixture

        a * |SC><SC|  +  b * (|H..H><H..H| + |V..V><V..V|)/2  +  c * I/d

    with weights solved so that the fidelity with the pure SC state equals
    `fidelity` and the population on the two computational corners equals
    `corner_mass`.  The middle component models population that sits on the
    corners without contributing coherence, which is how experimentally
    prepared cat states differ from white-noise mixtures.
    """
    if corner_mass is None:
        return depolarized_sc(n, fidelity)
    d = 2**n
    a = 2.0 * fidelity - corner_mass
    c = (1.0 - corner_mass) / (1.0 - 2.0 / d)
    b = 1.0 - a - c
    if min(a, b, c) < -1e-12:
        raise QcopiesError(
            f"no valid state with fidelity={fidelity}, corner_mass={corner_mass} "
            f"for n={n} (weights a={a:.4f}, b={b:.4f}, c={c:.4f})"
        )
    corners = np.zeros((d, d), dtype=complex)
    corners[0, 0] = corners[-1, -1] = 0.5
    m = a * pure_density(sc_state(n)).matrix + b * corners + c * np.eye(d) / d
    return DensityMatrix(m, validate=False)


def rank_two_sc_state(n: int, fidelity: float) -> DensityMatrix:
    """Rank-two noisy SC state: the lost population sits in one orthogonal
    cat mode (last qubit flipped) instead of spreading as white noise.

    Models a coherent error channel; useful where reconstruction behavior
    depends on the state being low-rank, as experimentally prepared cat
    states are.
    """
    _check_qubit_count(n)
    if n < 2:
        raise QcopiesError("rank-two model needs at least 2 qubits")
    if not 0.0 <= fidelity <= 1.0:
        raise QcopiesError(f"fidelity must be in [0, 1], got {fidelity}")
    d = 2**n
    flipped = np.zeros(d, dtype=complex)
    flipped[1] = flipped[d - 2] = 1.0 / np.sqrt(2.0)
    m = (fidelity * pure_density(sc_state(n)).matrix
         + (1.0 - fidelity) * np.outer(flipped, flipped.conj()))
    return DensityMatrix(m, validate=False)


def _project_to_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection of a real vector onto {x >= 0, sum(x) = 1}."""
    u = np.sort(values)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, values.size + 1)
    rho = int(np.max(np.nonzero(u - css / idx > 0)[0])) + 1
    tau = css[rho - 1] / rho
    return np.maximum(values - tau, 0.0)


def psd_project(m: np.ndarray) -> DensityMatrix:
    """Nearest (Frobenius) trace-one PSD matrix to a Hermitian input.

    Eigendecomposes, projects the eigenvalue vector onto the probability
    simplex and reconstructs in the same eigenbasis.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {m.shape}")
    h = 0.5 * (m + m.conj().T)
    vals, vecs = np.linalg.eigh(h)
    proj = _project_to_simplex(vals)
    out = (vecs * proj) @ vecs.conj().T
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out, validate=False)


def density_to_json(rho: DensityMatrix) -> str:
    """Serialize as {"n": qubits, "re": [[...]], "im": [[...]]}."""
    return json.dumps({
        "n": rho.n_qubits,
        "re": rho.matrix.real.tolist(),
        "im": rho.matrix.imag.tolist(),
    })


def density_from_json(text: str) -> DensityMatrix:
    """Inverse of density_to_json, revalidating all invariants."""
    obj = json.loads(text)
    m = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    rho = DensityMatrix(m)
    if rho.dim != 2 ** int(obj["n"]):
        raise DimensionMismatchError(f"matrix is {rho.dim}x{rho.dim} but n={obj['n']}")
    return rho
