"""Dense complex linear algebra shared by every other module.

Matrices are plain 2-D ``numpy`` arrays of dtype ``complex128``; kets are
column matrices.  Qubit operators follow the big-endian convention: the
first tensor factor is the most significant bit of the row/column index.
"""

from __future__ import annotations

import numpy as np

#: Default comparison tolerance for composed quantities.
TOL = 1e-10

#: Largest row or column count any product is allowed to reach (24 qubits).
MAX_DIM = 1 << 24


class DimensionError(ValueError):
    """Operand shapes are incompatible."""


class DimensionLimitError(DimensionError):
    """A result would exceed :data:`MAX_DIM` rows or columns."""


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a 2-D complex array; 1-D input becomes a column."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of rank {m.ndim}")
    return m


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise DimensionLimitError(f"kron result {rows}x{cols} exceeds {MAX_DIM}")
    return np.kron(a, b)


def kron_all(*ms) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = kron(out, m)
    return out


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a).conj().T


def two_norm(a) -> float:
    """Frobenius norm (the vector 2-norm for kets)."""
    return float(np.linalg.norm(as_matrix(a)))


def _same_shape(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def max_abs_diff(a, b) -> float:
    a, b = _same_shape(a, b)
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def approx_equal(a, b, tol: float = TOL) -> bool:
    return max_abs_diff(a, b) <= tol


def _ratio(a, b):
    """Ratio a/b at the largest-magnitude entry of ``b``; None if b is zero."""
    idx = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[idx]) == 0:
        return None
    return a[idx] / b[idx]


def phase_between(a, b):
    """Unit-modulus λ with a ≈ λ·b, or None when b vanishes or |ratio| is 0."""
    a, b = _same_shape(a, b)
    r = _ratio(a, b)
    if r is None or abs(r) == 0:
        return None
    return r / abs(r)


def equal_up_to_global_phase(a, b, tol: float = TOL) -> bool:
    a, b = _same_shape(a, b)
    if not np.any(np.abs(b) > 0):
        return not np.any(np.abs(a) > tol)
    lam = phase_between(a, b)
    if lam is None:
        return False
    return approx_equal(a, lam * b, tol)


def equal_up_to_sign(a, b, tol: float = TOL) -> bool:
    a, b = _same_shape(a, b)
    if not np.any(np.abs(b) > 0):
        return not np.any(np.abs(a) > tol)
    r = _ratio(a, b)
    if r is None:
        return False
    lam = 1.0 if r.real >= 0 else -1.0
    return approx_equal(a, lam * b, tol)


def compare(a, b, mode: str = "exact", tol: float = TOL) -> bool:
    """Dispatch on ``mode`` in {"exact", "phase", "sign"}."""
    if mode == "exact":
        return approx_equal(a, b, tol)
    if mode == "phase":
        return equal_up_to_global_phase(a, b, tol)
    if mode == "sign":
        return equal_up_to_sign(a, b, tol)
    raise ValueError(f"unknown comparison mode {mode!r}")


def comparison_error(a, b, mode: str = "exact") -> float:
    """Max elementwise residual after the best λ allowed by ``mode``."""
    a, b = _same_shape(a, b)
    if mode == "exact" or not np.any(np.abs(b) > 0):
        return max_abs_diff(a, b)
    r = _ratio(a, b)
    if mode == "phase":
        lam = r / abs(r) if abs(r) > 0 else 1.0
    else:
        lam = 1.0 if r.real >= 0 else -1.0
    return max_abs_diff(a, lam * b)


# Standard constants ---------------------------------------------------------

SQRT1_2 = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = SQRT1_2 * np.array([[1, 1], [1, -1]], dtype=complex)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

_KETS = {
    "0": np.array([[1], [0]], dtype=complex),
    "1": np.array([[0], [1]], dtype=complex),
    "+": SQRT1_2 * np.array([[1], [1]], dtype=complex),
    "-": SQRT1_2 * np.array([[1], [-1]], dtype=complex),
    "i": SQRT1_2 * np.array([[1], [1j]], dtype=complex),
    "j": SQRT1_2 * np.array([[1], [-1j]], dtype=complex),
}


def ket(label: str) -> np.ndarray:
    """Product ket from characters in ``01+-ij`` (``i``/``j`` = ±Y eigenstates)."""
    try:
        return kron_all(*(_KETS[c] for c in label))
    except KeyError as exc:
        raise ValueError(f"unknown basis label {exc.args[0]!r}") from None


def bra(label: str) -> np.ndarray:
    return adjoint(ket(label))


def rz(alpha: float) -> np.ndarray:
    """Z rotation diag(1, e^{iα}) (no symmetric global phase)."""
    return np.diag([1, np.exp(1j * alpha)]).astype(complex)


def rx(alpha: float) -> np.ndarray:
    """X rotation |+⟩⟨+| + e^{iα}|−⟩⟨−|."""
    return H @ rz(alpha) @ H


def green_state(alpha: float) -> np.ndarray:
    """Normalised (|0⟩ + e^{iα}|1⟩)/√2."""
    return SQRT1_2 * np.array([[1], [np.exp(1j * alpha)]], dtype=complex)


def red_state(alpha: float) -> np.ndarray:
    """Normalised (|+⟩ + e^{iα}|−⟩)/√2."""
    return H @ green_state(alpha)


def density(psi) -> np.ndarray:
    psi = as_matrix(psi)
    return psi @ adjoint(psi)


def pauli_string(label: str) -> np.ndarray:
    return kron_all(*(PAULIS[c] for c in label))
