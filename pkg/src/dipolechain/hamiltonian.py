"""Dimensionless dipolar couplings and the one-excitation Hamiltonian block.

The pair coupling is ``(3 cos^2 phi - 1) / (2 r^3)`` with ``r`` in units of
the base spacing and ``phi`` the angle between the inter-node vector and the
external field.  Truncating the interaction to index distance ``|i - j| <= M``
("M-neighbor window") yields the family of approximate models studied here;
``M = N - 1`` is the exact all-node model.

Two time conventions are supported.  In ``"zigzag-time"`` the angular factor
stays in the coupling and time is measured in units of ``Delta^3 / (gamma^2
hbar)``.  For collinear chains the factor ``(3 cos^2 chi - 1) / 2`` is the
same for every pair and is absorbed into the time unit instead; that is the
``"alternating-time"`` convention, where couplings reduce to ``1 / r^3`` and
time is measured in units of ``2 Delta^3 / (gamma^2 hbar (3 cos^2 chi - 1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometryError, InvalidWindowError
from .geometry import FieldOrientation, NodeList

ZIGZAG_TIME = "zigzag-time"
ALTERNATING_TIME = "alternating-time"

#: Field angle at which 3 cos^2 chi - 1 = 0: every coupling of a collinear
#: chain vanishes and transfer is completely suppressed.
MAGIC_ANGLE = math.acos(1.0 / math.sqrt(3.0))

# Angular factors this close to zero are rounding residue of the magic
# orientation; snapping them keeps magic-angle couplings exactly zero.
_ANGULAR_SNAP = 1e-14


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric dimensionless couplings with the M-neighbor window applied.

    ``d[i, j]`` is zero on the diagonal and for ``|i - j| > window``.
    """

    d: np.ndarray
    window: int
    mode: str = ZIGZAG_TIME

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        d.setflags(write=False)
        object.__setattr__(self, "d", d)

    @property
    def size(self) -> int:
        return self.d.shape[0]


@dataclass(frozen=True)
class Hamiltonian1Ex:
    """Real symmetric one-excitation block of the windowed XXZ Hamiltonian.

    The excitation-number-independent part of the Ising term contributes the
    same constant to every diagonal element; it only produces a global phase
    and is dropped, as recorded in ``gauge``.
    """

    h: np.ndarray
    gauge: str = "diagonal constant dropped"

    def __post_init__(self):
        h = np.array(self.h, dtype=float)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @property
    def size(self) -> int:
        return self.h.shape[0]


def coupling(r: float, cos_phi: float) -> float:
    """Dimensionless dipolar coupling for one pair: (3 cos^2 phi - 1) / (2 r^3)."""
    if r <= 0.0:
        raise DegenerateGeometryError(f"pair distance must be positive, got r={r}")
    angular = 3.0 * cos_phi * cos_phi - 1.0
    if abs(angular) < _ANGULAR_SNAP:
        angular = 0.0
    return angular / (2.0 * r**3)


def coupling_matrix(
    nodes: NodeList,
    field: FieldOrientation,
    m: int,
    mode: str = ZIGZAG_TIME,
) -> CouplingMatrix:
    """Assemble the windowed coupling matrix for a chain.

    Parameters
    ----------
    nodes : NodeList
    field : FieldOrientation
        Ignored in ``"alternating-time"`` mode except through the caller's
        time unit.
    m : int
        Neighbor window, 1 <= m <= N - 1.
    mode : str
        ``"zigzag-time"`` keeps the angular factor: d = (3 cos^2 phi - 1) /
        (2 r^3).  ``"alternating-time"`` absorbs the common collinear factor
        (3 cos^2 chi - 1) / 2 into the time unit: d = 1 / r^3.

    Returns
    -------
    CouplingMatrix
    """
    n = len(nodes)
    if not 1 <= m <= n - 1:
        raise InvalidWindowError(f"window must satisfy 1 <= M <= {n - 1}, got M={m}")
    if mode not in (ZIGZAG_TIME, ALTERNATING_TIME):
        raise ValueError(f"unknown mode {mode!r}")

    dx = nodes.x[None, :] - nodes.x[:, None]
    dy = nodes.y[None, :] - nodes.y[:, None]
    r = np.hypot(dx, dy)
    off = ~np.eye(n, dtype=bool)
    if np.any(r[off] == 0.0):
        where = np.argwhere((r == 0.0) & off)[0]
        raise DegenerateGeometryError(
            f"nodes {where[0] + 1} and {where[1] + 1} coincide"
        )

    r_safe = np.where(off, r, 1.0)
    if mode == ZIGZAG_TIME:
        cos_phi = (dx * math.cos(field.chi) + dy * math.sin(field.chi)) / r_safe
        angular = 3.0 * cos_phi**2 - 1.0
        angular[np.abs(angular) < _ANGULAR_SNAP] = 0.0
        d = angular / (2.0 * r_safe**3)
    else:
        d = 1.0 / r_safe**3
    d[~off] = 0.0

    idx = np.arange(n)
    d[np.abs(idx[None, :] - idx[:, None]) > m] = 0.0
    return CouplingMatrix(d, window=m, mode=mode)


def one_excitation_hamiltonian(c: CouplingMatrix) -> Hamiltonian1Ex:
    """Reduce the windowed XXZ Hamiltonian to its one-excitation block.

    With |n> the state in which only spin n is flipped, the flip-flop part of
    the interaction hops the excitation with amplitude ``d[m, n] / 2`` and the
    Ising part contributes ``sum_j d[n, j]`` to the diagonal (after dropping
    the n-independent constant).  This reduction is validated against the
    full-space reference in the test suite rather than trusted.
    """
    h = c.d / 2.0
    np.fill_diagonal(h, c.d.sum(axis=1))
    return Hamiltonian1Ex(h)


def write_matrix_csv(a: np.ndarray, path: str | Path) -> None:
    """Dump a full matrix as row-major CSV with 17 significant digits."""
    rows = (",".join(f"{v:.17g}" for v in row) for row in np.asarray(a, dtype=float))
    Path(path).write_text("\n".join(rows) + "\n")
