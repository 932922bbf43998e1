"""Brute-force full-Hilbert-space reference dynamics.

Builds the complete 2^N spin-1/2 XXZ Hamiltonian from Kronecker-product spin
operators, evolves one-excitation initial states exactly, and extracts site
probabilities.  This is the ground truth used to validate the N x N
one-excitation reduction; it shares no matrix-element derivation with the
reduced kernel.

The dense construction is capped at ``SIZE_LIMIT`` spins (4096-dimensional
matrices), which is plenty for equivalence checks and keeps every call
runnable in seconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import SizeLimitError
from .geometry import FieldOrientation, NodeList
from .hamiltonian import ZIGZAG_TIME, coupling_matrix

SIZE_LIMIT = 12

_SX = sp.csr_matrix(np.array([[0.0, 0.5], [0.5, 0.0]]))
_SY = sp.csr_matrix(np.array([[0.0, -0.5j], [0.5j, 0.0]]))
_SZ = sp.csr_matrix(np.array([[0.5, 0.0], [0.0, -0.5]]))


def _check_size(n: int) -> None:
    if n > SIZE_LIMIT:
        raise SizeLimitError(
            f"full-space reference is limited to {SIZE_LIMIT} spins, got n={n}"
        )


def _embed(op: sp.spmatrix, site: int, n: int) -> sp.csr_matrix:
    """Spin operator acting on one site of an n-spin register (0-based site)."""
    left = sp.identity(2**site, format="csr")
    right = sp.identity(2 ** (n - site - 1), format="csr")
    return sp.kron(sp.kron(left, op, format="csr"), right, format="csr")


def _site_operators(n: int) -> list[tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]]:
    return [(_embed(_SX, i, n), _embed(_SY, i, n), _embed(_SZ, i, n)) for i in range(n)]


def basis_index(n_spins: int, node: int) -> int:
    """Computational-basis index of the state with only spin ``node`` flipped.

    Spins map to bits most-significant-first, so node 1 is the top bit.
    """
    if not 1 <= node <= n_spins:
        raise IndexError(f"node must lie in 1..{n_spins}, got {node}")
    return 1 << (n_spins - node)


@dataclass(frozen=True)
class FullStateVector:
    """State vector over the full 2^N computational basis (unit norm)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex)
        n = int(amp.shape[0]).bit_length() - 1
        if amp.ndim != 1 or amp.shape[0] != 2**n:
            raise ValueError(f"amplitude vector length must be a power of 2, got {amp.shape}")
        _check_size(n)
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state vector must have unit norm, got {norm}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def n_spins(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1


def single_excitation_state(n_spins: int, node: int) -> FullStateVector:
    """|node>: spin ``node`` flipped against the aligned background."""
    _check_size(n_spins)
    amp = np.zeros(2**n_spins, dtype=complex)
    amp[basis_index(n_spins, node)] = 1.0
    return FullStateVector(amp)


def total_z_operator(n_spins: int) -> np.ndarray:
    """Total I_z, the conserved excitation counter (up to a constant)."""
    _check_size(n_spins)
    acc = sp.csr_matrix((2**n_spins, 2**n_spins), dtype=complex)
    for i in range(n_spins):
        acc = acc + _embed(_SZ, i, n_spins)
    return acc.toarray().real


def full_hamiltonian(
    nodes: NodeList,
    field: FieldOrientation,
    m: int,
    mode: str = ZIGZAG_TIME,
) -> np.ndarray:
    """Dense 2^N x 2^N XXZ Hamiltonian with the M-neighbor window.

    Sums ``d_ij (Ix_i Ix_j + Iy_i Iy_j - 2 Iz_i Iz_j)`` over windowed pairs,
    with the same dimensionless couplings used by the reduced kernel.
    """
    n = len(nodes)
    _check_size(n)
    d = coupling_matrix(nodes, field, m, mode).d
    ops = _site_operators(n)
    acc = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for i in range(n - 1):
        for j in range(i + 1, min(i + m, n - 1) + 1):
            if d[i, j] == 0.0:
                continue
            xi, yi, zi = ops[i]
            xj, yj, zj = ops[j]
            acc = acc + d[i, j] * (xi @ xj + yi @ yj - 2.0 * (zi @ zj))
    h = acc.toarray()
    if h.size and np.abs(h.imag).max() > 1e-14:
        raise AssertionError("XXZ Hamiltonian should be real symmetric")
    return h.real


def full_space_site_traces(
    nodes: NodeList,
    field: FieldOrientation,
    m: int,
    mode: str,
    sites: list[int],
    taus: np.ndarray,
) -> np.ndarray:
    """|<site| exp(-i H tau) |1>|^2 for several sites from one full-space
    diagonalization; shape (len(taus), len(sites))."""
    n_spins = len(nodes)
    h = full_hamiltonian(nodes, field, m, mode)
    evals, evecs = np.linalg.eigh(h)
    row_from = evecs[basis_index(n_spins, 1), :]
    w = np.stack(
        [evecs[basis_index(n_spins, s), :] * row_from for s in sites], axis=1
    )
    phases = np.exp(-1j * np.multiply.outer(np.asarray(taus, dtype=float), evals))
    return np.abs(phases @ w) ** 2


def full_space_trace(
    nodes: NodeList,
    field: FieldOrientation,
    m: int,
    mode: str,
    n: int,
    taus: np.ndarray,
) -> np.ndarray:
    """Probabilities |<n| exp(-i H tau) |1>|^2 from the full-space evolution."""
    return full_space_site_traces(nodes, field, m, mode, [n], taus)[:, 0]


def full_space_probability(
    nodes: NodeList,
    field: FieldOrientation,
    m: int,
    mode: str,
    n: int,
    tau: float,
) -> float:
    """Single transfer probability |<n| exp(-i H tau) |1>|^2 in the full space."""
    return float(full_space_trace(nodes, field, m, mode, n, np.array([tau]))[0])
