"""Planar chain geometries and the angles entering the dipolar couplings.

All positions are dimensionless: lengths are measured in units of the base
spacing between consecutive odd-numbered nodes' x-projections, so the
homogeneous chain has unit nearest-neighbor distance.  Node indices are
1-based in every public signature to match the usual sender=1, receiver=N
labelling of a communication line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InvalidAlternationError,
    InvalidChainError,
    InvalidPairError,
)

ZIGZAG = "zigzag"
ALTERNATING = "alternating"
CUSTOM = "custom"


@dataclass(frozen=True)
class NodeList:
    """Ordered spin positions in the chain plane.

    Parameters
    ----------
    positions : (N, 2) array_like
        (x, y) pairs, one row per node, in chain order.
    label : str
        Chain kind tag: ``"zigzag"``, ``"alternating"`` or ``"custom"``.
    """

    positions: np.ndarray
    label: str = CUSTOM

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise InvalidChainError(
                f"positions must be an (N, 2) array with N >= 1, got shape {pos.shape}"
            )
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __len__(self) -> int:
        return self.positions.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.positions[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.positions[:, 1]


@dataclass(frozen=True)
class FieldOrientation:
    """In-plane direction of the external magnetic field.

    ``chi`` is the angle (radians, in [0, pi]) between the field and the
    chain's x axis; the unit direction vector is ``(cos chi, sin chi)``.
    """

    chi: float

    def __post_init__(self):
        chi = float(self.chi)
        if not 0.0 <= chi <= math.pi:
            raise ValueError(f"chi must lie in [0, pi], got {chi}")
        object.__setattr__(self, "chi", chi)

    @property
    def direction(self) -> np.ndarray:
        return np.array([math.cos(self.chi), math.sin(self.chi)])


def zigzag_nodes(n: int, y: float) -> NodeList:
    """Build an N-node zigzag chain.

    Node j (1-based) sits at x = j - 1; odd nodes lie on the axis (y = 0)
    and even nodes are raised to height ``y``.  ``y = 0`` degenerates to the
    homogeneous straight chain.

    Parameters
    ----------
    n : int
        Number of nodes, at least 2.
    y : float
        Transverse rise of the even nodes, >= 0.  The transfer dynamics only
        depends on ``cos^2`` of the bond angles, so a negative rise would be
        mirror-equivalent; it is rejected rather than silently folded.

    Returns
    -------
    NodeList
    """
    if n < 2:
        raise InvalidChainError(f"a chain needs at least 2 nodes, got n={n}")
    y = float(y)
    if y < 0.0:
        raise InvalidChainError(f"zigzag rise must be >= 0, got y={y}")
    pos = np.zeros((n, 2))
    pos[:, 0] = np.arange(n, dtype=float)
    pos[1::2, 1] = y
    return NodeList(pos, label=ZIGZAG)


def alternating_nodes(n: int, alpha: float) -> NodeList:
    """Build an N-node collinear chain with alternating bond lengths.

    Odd nodes sit at x = j - 1; each even node follows its predecessor at
    distance ``alpha``, so bonds alternate between ``alpha`` and
    ``2 - alpha``.  ``alpha = 1`` reproduces the homogeneous chain.

    Parameters
    ----------
    n : int
        Number of nodes, at least 2.
    alpha : float
        Alternation parameter, strictly inside (0, 2) so that positions stay
        strictly increasing.

    Returns
    -------
    NodeList
    """
    if n < 2:
        raise InvalidChainError(f"a chain needs at least 2 nodes, got n={n}")
    alpha = float(alpha)
    if not 0.0 < alpha < 2.0:
        raise InvalidAlternationError(
            f"alternation parameter must lie strictly inside (0, 2), got alpha={alpha}"
        )
    pos = np.zeros((n, 2))
    j = np.arange(n)
    x = j.astype(float)          # odd (0-based even) nodes: x = j - 1 in 1-based terms
    x[1::2] = x[0::2][: (n // 2)] + alpha
    pos[:, 0] = x
    return NodeList(pos, label=ALTERNATING)


def chain_length(nodes: NodeList) -> float:
    """Horizontal span of the chain: x_N - x_1."""
    if len(nodes) == 0:
        raise InvalidChainError("empty node list has no length")
    return float(nodes.x[-1] - nodes.x[0])


def pair_geometry(
    nodes: NodeList, i: int, j: int, field: FieldOrientation
) -> tuple[float, float]:
    """Distance and field angle cosine for the ordered node pair (i, j).

    Parameters
    ----------
    nodes : NodeList
    i, j : int
        1-based node indices, i != j.
    field : FieldOrientation

    Returns
    -------
    (r, cos_phi) : tuple of float
        ``r`` is the inter-node distance and ``cos_phi`` the cosine of the
        angle between the vector from node i to node j and the field
        direction.  Swapping i and j flips the sign of ``cos_phi``.
    """
    n = len(nodes)
    if not (1 <= i <= n) or not (1 <= j <= n):
        raise InvalidPairError(f"node indices must lie in 1..{n}, got ({i}, {j})")
    if i == j:
        raise InvalidPairError(f"pair geometry needs two distinct nodes, got i=j={i}")
    dx = nodes.x[j - 1] - nodes.x[i - 1]
    dy = nodes.y[j - 1] - nodes.y[i - 1]
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise DegenerateGeometryError(f"nodes {i} and {j} coincide")
    cos_phi = (dx * math.cos(field.chi) + dy * math.sin(field.chi)) / r
    return r, min(1.0, max(-1.0, cos_phi))


def read_nodes(path: str | Path, label: str = CUSTOM) -> NodeList:
    """Read a geometry file: one "x y" pair per line, '#' starts a comment."""
    rows = []
    path = Path(path)
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidChainError(
                f"{path}:{lineno}: expected 'x y', got {raw!r}"
            )
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InvalidChainError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise InvalidChainError(f"{path}: no nodes found")
    return NodeList(np.array(rows), label=label)


def write_nodes(nodes: NodeList, path: str | Path) -> None:
    """Write a geometry file readable by :func:`read_nodes` (one node per line)."""
    lines = [f"{x:.17g} {y:.17g}" for x, y in nodes.positions]
    Path(path).write_text("\n".join(lines) + "\n")
