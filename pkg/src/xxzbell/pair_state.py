"""Two-qubit states in the Bloch / correlation-tensor representation.

``rho = 1/4 [I + p.sigma (x) I + I (x) q.sigma + sum_uv T_uv sigma_u (x) sigma_v]``

For states with the symmetries of the XXZ chain, ``p = q = 0`` and
``T = diag(txx, txx, tzz)``, so a state is a point of the ``(txx, tzz)`` plane.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "PAULI",
    "PairState",
    "Region",
    "symmetric_state",
    "classify_region",
    "region_boundaries",
]

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_ID = np.eye(2, dtype=complex)

BOUNDARY_SLACK = 1e-12
PSD_TOL = 1e-10


@dataclass
class PairState:
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q: np.ndarray = field(default_factory=lambda: np.zeros(3))
    T: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float).reshape(3)
        self.q = np.asarray(self.q, dtype=float).reshape(3)
        self.T = np.asarray(self.T, dtype=float).reshape(3, 3)

    def density_matrix(self) -> np.ndarray:
        rho = np.kron(_ID, _ID).astype(complex)
        for u in range(3):
            rho += self.p[u] * np.kron(PAULI[u], _ID)
            rho += self.q[u] * np.kron(_ID, PAULI[u])
            for v in range(3):
                rho += self.T[u, v] * np.kron(PAULI[u], PAULI[v])
        return rho / 4.0

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.density_matrix())[0])

    def is_physical(self, tol: float = PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    @classmethod
    def from_density_matrix(cls, rho: np.ndarray) -> "PairState":
        rho = np.asarray(rho, dtype=complex)
        p = [np.trace(rho @ np.kron(s, _ID)).real for s in PAULI]
        q = [np.trace(rho @ np.kron(_ID, s)).real for s in PAULI]
        T = [[np.trace(rho @ np.kron(a, b)).real for b in PAULI] for a in PAULI]
        return cls(np.array(p), np.array(q), np.array(T))


def symmetric_state(corr) -> PairState:
    """Pair state with zero magnetizations and ``T = diag(txx, txx, tzz)``.

    ``corr`` is anything with ``txx`` and ``tzz`` attributes, usually a
    :class:`~xxzbell.correlations.CorrelationSet`.
    """
    txx, tzz = float(corr.txx), float(corr.tzz)
    if 1.0 + tzz < -PSD_TOL:
        raise DomainError(f"unphysical correlators: 1 + tzz = {1.0 + tzz:.3g} < 0")
    if 1.0 - tzz - 2.0 * abs(txx) < -PSD_TOL:
        raise DomainError(
            f"unphysical correlators: 1 - tzz - 2|txx| = {1.0 - tzz - 2.0 * abs(txx):.3g} < 0"
        )
    return PairState(T=np.diag([txx, txx, tzz]))


class Region(enum.Enum):
    UNPHYSICAL = "unphysical"
    SEPARABLE = "separable"
    ENTANGLED_LOCAL = "entangled_local"
    NONLOCAL = "nonlocal"


def classify_region(txx: float, tzz: float) -> Region:
    """Region of the ``(txx, tzz)`` plane a symmetric pair state falls in.

    Points exactly on a boundary go to the less exotic side: physical over
    unphysical, separable over entangled, local over nonlocal.
    """
    ax, az = abs(txx), abs(tzz)
    if 1.0 - tzz < 2.0 * ax - BOUNDARY_SLACK or 1.0 + tzz < -BOUNDARY_SLACK:
        return Region.UNPHYSICAL
    if (ax >= az and ax > 1.0 / math.sqrt(2.0)) or (ax < az and txx * txx + tzz * tzz > 1.0):
        return Region.NONLOCAL
    if 2.0 * ax > 1.0 + tzz:
        return Region.ENTANGLED_LOCAL
    return Region.SEPARABLE


def region_boundaries(resolution: int = 200) -> dict[str, np.ndarray]:
    """Boundary polylines of the ``(txx, tzz)`` region diagram.

    Returns a mapping from curve name to an ``(n, 2)`` array of ``(txx, tzz)``
    points. Curves:

    ``physical``
        Closed triangle through ``(0, 1)``, ``(1, -1)``, ``(-1, -1)``.
    ``separable_left`` / ``separable_right``
        The lines ``2|txx| = 1 + tzz`` inside the triangle.
    ``nonlocal_left`` / ``nonlocal_right``
        Border of the Bell-violating corners: a piece of ``|txx| = 1/sqrt 2``
        followed by an arc of the unit circle down to ``tzz = -1``.
    """
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    out = {}
    out["physical"] = np.array([(0.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (0.0, 1.0)])
    # 2|txx| = 1 + tzz meets the triangle edge 2|txx| = 1 - tzz at (1/2, 0)
    # and the bottom edge at (0, -1)
    x = np.linspace(0.0, 0.5, resolution)
    out["separable_right"] = np.column_stack([x, 2.0 * x - 1.0])
    out["separable_left"] = np.column_stack([-x, 2.0 * x - 1.0])
    s = 1.0 / math.sqrt(2.0)
    # |txx| = 1/sqrt2 from the triangle edge (tzz = 1 - sqrt2) down to |tzz| = 1/sqrt2,
    # then the circle from angle -pi/4 to -pi/2 (tzz = -1)
    z = np.linspace(1.0 - math.sqrt(2.0), -s, resolution)
    vertical = np.column_stack([np.full_like(z, s), z])
    theta = np.linspace(-math.pi / 4.0, -math.pi / 2.0, resolution)[1:]
    arc = np.column_stack([np.cos(theta), np.sin(theta)])
    right = np.vstack([vertical, arc])
    out["nonlocal_right"] = right
    out["nonlocal_left"] = right * np.array([-1.0, 1.0])
    return out
