"""Concurrence and CHSH-Bell measures of two-qubit states."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError
from .pair_state import PAULI, PairState

__all__ = [
    "MeasurementSettings",
    "chsh_value",
    "bell_measure_horodecki",
    "bell_measure_symmetric",
    "maximize_chsh",
    "concurrence_general",
    "concurrence_symmetric",
]

UNIT_TOL = 1e-12
EIG_CLAMP = 1e-12
SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class MeasurementSettings:
    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if abs(np.linalg.norm(v) - 1.0) > UNIT_TOL:
                raise DomainError(f"{name} is not a unit vector (norm {np.linalg.norm(v)!r})")
            object.__setattr__(self, name, v)


def _chsh_signed(T, a1, a2, b1, b2):
    return a1 @ T @ (b1 + b2) + a2 @ T @ (b1 - b2)


def chsh_value(state: PairState, s: MeasurementSettings) -> float:
    """``|<A1B1> + <A1B2> + <A2B1> - <A2B2>|`` with ``<AiBj> = ai . T . bj``."""
    return float(abs(_chsh_signed(state.T, s.a1, s.a2, s.b1, s.b2)))


def bell_measure_horodecki(state: PairState) -> float:
    """Maximal CHSH value, ``2 sqrt(u + u')`` from the two largest eigenvalues of ``T^T T``."""
    u = np.linalg.eigvalsh(state.T.T @ state.T)
    return float(2.0 * math.sqrt(max(u[-1] + u[-2], 0.0)))


def bell_measure_symmetric(corr) -> float:
    """Maximal CHSH value for ``T = diag(txx, txx, tzz)``."""
    txx, tzz = float(corr.txx), float(corr.tzz)
    return 2.0 * max(math.sqrt(2.0 * txx * txx), math.sqrt(txx * txx + tzz * tzz))


def _unit(theta, phi):
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def _angles(v):
    return math.acos(max(-1.0, min(1.0, v[2]))), math.atan2(v[1], v[0])


def _normalized(v, fallback):
    n = np.linalg.norm(v)
    return v / n if n > 1e-300 else fallback


def _ascend(T, vecs, sweeps=200):
    """Block coordinate ascent: each pair of directions has a closed-form optimum."""
    a1, a2, b1, b2 = vecs
    last = -math.inf
    for _ in range(sweeps):
        a1 = _normalized(T @ (b1 + b2), a1)
        a2 = _normalized(T @ (b1 - b2), a2)
        b1 = _normalized(T.T @ (a1 + a2), b1)
        b2 = _normalized(T.T @ (a1 - a2), b2)
        val = _chsh_signed(T, a1, a2, b1, b2)
        if val - last < 1e-15:
            break
        last = val
    return [a1, a2, b1, b2]


def _polish(T, vecs):
    x0 = np.concatenate([_angles(v) for v in vecs])

    def neg(x):
        a1, a2, b1, b2 = (_unit(x[2 * k], x[2 * k + 1]) for k in range(4))
        return -_chsh_signed(T, a1, a2, b1, b2)

    res = optimize.minimize(neg, x0, method="BFGS", options={"gtol": 1e-12})
    cand = [_unit(res.x[2 * k], res.x[2 * k + 1]) for k in range(4)]
    if _chsh_signed(T, *cand) > _chsh_signed(T, *vecs):
        return cand
    return vecs


def maximize_chsh(
    state: PairState, restarts: int = 20, seed: int = 0
) -> tuple[float, MeasurementSettings]:
    """Numerically maximize the CHSH value over the four measurement directions.

    Each restart draws four directions uniformly on the sphere, runs block
    coordinate ascent and then polishes in spherical angles with BFGS. Runs
    are independent and seeded, so the result depends only on ``seed``.
    """
    if restarts < 1:
        raise DomainError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    T = state.T
    best_val, best = -math.inf, None
    for _ in range(restarts):
        g = rng.normal(size=(4, 3))
        vecs = [v / np.linalg.norm(v) for v in g]
        vecs = _polish(T, _ascend(T, vecs))
        val = abs(_chsh_signed(T, *vecs))
        if val > best_val:
            best_val, best = val, vecs
    best = [v / np.linalg.norm(v) for v in best]
    return float(abs(_chsh_signed(T, *best))), MeasurementSettings(*best)


_YY = np.kron(PAULI[1], PAULI[1])


def _psd_sqrt(rho):
    w, v = np.linalg.eigh(rho)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def concurrence_general(state: PairState) -> float:
    """Wootters concurrence from the spectrum of ``rho rho'``.

    ``rho' = (sy x sy) rho* (sy x sy)``. The square roots of the eigenvalues
    of ``rho rho'`` are taken as the singular values of ``sqrt(rho) sqrt(rho')``,
    which carries the small ones to full absolute precision.
    """
    rho = state.density_matrix()
    flipped = _YY @ rho.conj() @ _YY
    lam = np.sort(np.linalg.eigvals(rho @ flipped).real)[::-1]
    if lam[-1] < -EIG_CLAMP or np.linalg.eigvalsh(rho)[0] < -EIG_CLAMP:
        raise DomainError(f"state is not physical (eigenvalue {min(lam[-1], 0.0):.3g})")
    roots = np.linalg.svd(_psd_sqrt(rho) @ _psd_sqrt(flipped), compute_uv=False)
    roots = np.sort(roots)[::-1]
    return float(max(0.0, roots[0] - roots[1] - roots[2] - roots[3]))


def concurrence_symmetric(corr) -> float:
    """Concurrence of the symmetric state, ``max(0, (2|txx| - (1 + tzz)) / 2)``."""
    return max(0.0, (2.0 * abs(float(corr.txx)) - (1.0 + float(corr.tzz))) / 2.0)
