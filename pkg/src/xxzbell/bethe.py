"""Ground-state energy per site of the infinite XXZ chain.

Three regimes, selected by the anisotropy ``delta``:

* ``delta <= -1``: fully aligned ferromagnet, ``e0 = delta / 4``.
* ``-1 < delta < 1``: ``delta = cos(pi nu)`` and ``e0`` is a contour integral
  along ``Im x = 1/2``.
* ``delta > 1``: the same integral continued to ``nu = i phi`` with
  ``delta = cosh(pi phi)``.

At ``delta = 1`` the closed form ``1/4 - ln 2`` is used.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import AccuracyError, DomainError

__all__ = [
    "Branch",
    "AnisotropyPoint",
    "QuadratureConfig",
    "classify",
    "ground_energy",
    "ground_energy_at",
    "ground_energy_derivative",
    "contour_integral",
]

ISOTROPIC_ENERGY = 0.25 - math.log(2.0)
_SIN_HALF = math.sin(0.5)
_COS_HALF = math.cos(0.5)


class Branch(enum.Enum):
    FERRO = "ferro"
    GAPLESS = "gapless"
    ISOTROPIC = "isotropic"
    ANTIFERRO = "antiferro"


@dataclass(frozen=True)
class AnisotropyPoint:
    delta: float
    branch: Branch
    # nu on GAPLESS, phi on ANTIFERRO, None otherwise
    spectral: float | None = None


@dataclass(frozen=True)
class QuadratureConfig:
    abs_tol: float = 1e-10
    truncation: float = 45.0
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError("abs_tol must be positive")
        if not self.truncation > 0:
            raise DomainError("truncation must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


def classify(delta: float) -> AnisotropyPoint:
    """Map an anisotropy value to its branch and spectral parameter."""
    delta = float(delta)
    if not math.isfinite(delta):
        raise DomainError(f"delta must be finite, got {delta}")
    if delta <= -1.0:
        return AnisotropyPoint(delta, Branch.FERRO)
    if delta < 1.0:
        return AnisotropyPoint(delta, Branch.GAPLESS, math.acos(delta) / math.pi)
    if delta == 1.0:
        return AnisotropyPoint(delta, Branch.ISOTROPIC)
    return AnisotropyPoint(delta, Branch.ANTIFERRO, math.acosh(delta) / math.pi)


def _gapless_integrand(t, nu):
    x = t + 0.5j
    return np.cosh(nu * x) / (np.sinh(x) * np.sinh(nu * x))


def _antiferro_integrand(t, phi):
    # Re[cot(phi x) / sinh(x)] on x = t + i/2, written in real arithmetic.
    # The imaginary part is odd in t and integrates to zero.
    # cosh(phi) - cos(2 phi t) is expanded to avoid cancellation at small phi
    num = math.sin(2.0 * phi * t) * math.sinh(t) * _COS_HALF - math.sinh(phi) * math.cosh(t) * _SIN_HALF
    gap = 2.0 * math.sinh(0.5 * phi) ** 2 + 2.0 * math.sin(phi * t) ** 2
    return num / (gap * (math.sinh(t) ** 2 + _SIN_HALF**2))


def _quad(f, lo, hi, cfg, what, scale=1.0):
    # ``scale`` multiplies the integral in e0; the tolerance applies to e0
    target = cfg.abs_tol / scale
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            f, lo, hi, epsabs=1e-4 * target, epsrel=1e-15, limit=cfg.max_subdivisions
        )
    if not err < target:
        raise AccuracyError(
            f"{what}: quadrature error estimate {err * scale:.3g} above {cfg.abs_tol:.3g}", err * scale
        )
    return val


def _prefactor(point):
    if point.branch is Branch.GAPLESS:
        return math.sin(math.pi * point.spectral) / (2.0 * math.pi)
    return math.sinh(math.pi * point.spectral) / (2.0 * math.pi)


def contour_integral(point: AnisotropyPoint, cfg: QuadratureConfig | None = None) -> complex:
    """Integral of ``coth(nu x) / sinh(x)`` along ``Im x = 1/2``, ``|Re x| <= T``.

    On the antiferromagnetic branch the integrand is ``cot(phi x) / sinh(x)``
    and only the (even) real part is integrated, so the result is real.
    """
    cfg = cfg or QuadratureConfig()
    T = cfg.truncation
    if point.branch is Branch.GAPLESS:
        nu = point.spectral
        scale = 2.0 * _prefactor(point)
        re = _quad(lambda t: _gapless_integrand(t, nu).real, 0.0, T, cfg, "real part", scale)
        im = _quad(lambda t: _gapless_integrand(t, nu).imag, -T, T, cfg, "imaginary part")
        return complex(2.0 * re, im)
    if point.branch is Branch.ANTIFERRO:
        phi = point.spectral
        scale = 2.0 * _prefactor(point)
        re = _quad(lambda t: _antiferro_integrand(t, phi), 0.0, T, cfg, "antiferro", scale)
        return complex(2.0 * re, 0.0)
    raise DomainError(f"no contour integral on branch {point.branch.value}")


def ground_energy(point: AnisotropyPoint, cfg: QuadratureConfig | None = None) -> float:
    """Ground-state energy per site ``e0`` at a classified anisotropy point."""
    cfg = cfg or QuadratureConfig()
    delta = point.delta
    if point.branch is Branch.FERRO:
        return delta / 4.0
    if point.branch is Branch.ISOTROPIC:
        return ISOTROPIC_ENERGY
    val = contour_integral(point, cfg)
    if abs(val.imag) >= cfg.abs_tol:
        raise AccuracyError(f"imaginary residue {val.imag:.3g} at delta={delta}", abs(val.imag))
    return delta / 4.0 + _prefactor(point) * val.real


def ground_energy_at(delta: float, cfg: QuadratureConfig | None = None) -> float:
    return ground_energy(classify(delta), cfg)


_BOUNDARIES = (-1.0, 1.0)


def _branch_interval(delta, side):
    """Open interval of the analytic piece containing ``delta`` (on ``side``)."""
    if delta < -1.0 or (delta == -1.0 and side != "right"):
        return -math.inf, -1.0
    if delta < 1.0 or (delta == 1.0 and side != "right"):
        return -1.0, 1.0
    return 1.0, math.inf


def _richardson(stencil, h0, order_step, tol, max_levels=10):
    """Richardson table over halved steps; ``order_step`` is 2 for central, 1 for one-sided."""
    table = [stencil(h0)]
    h = h0
    best_diff = math.inf
    for level in range(1, max_levels):
        h /= 2.0
        if h < 1e-12:
            break
        row = [stencil(h)]
        for k in range(1, level + 1):
            factor = 2.0 ** (order_step * k) if order_step == 2 else 2.0**k
            row.append((factor * row[k - 1] - table[k - 1]) / (factor - 1.0))
        diff = abs(row[-1] - table[-1])
        best_diff = min(best_diff, diff)
        if diff < tol:
            return row[-1]
        table = row
    raise AccuracyError(f"derivative did not converge (best change {best_diff:.3g})", best_diff)


def ground_energy_derivative(
    delta: float,
    cfg: QuadratureConfig | None = None,
    side: str | None = None,
    h: float = 1e-4,
) -> float:
    """``d e0 / d delta`` by Richardson-extrapolated finite differences.

    Parameters
    ----------
    delta : float
        Anisotropy.
    cfg : QuadratureConfig, optional
        Quadrature settings for each energy evaluation.
    side : {None, "left", "right"}
        Which one-sided limit to take at a branch boundary. ``delta = -1``
        defaults to the ferromagnetic side and ``delta = 1`` to the left.
    h : float
        Initial step; halved until two successive extrapolants agree within
        ``10 * cfg.abs_tol``.
    """
    cfg = cfg or QuadratureConfig()
    classify(delta)
    if side not in (None, "left", "right"):
        raise DomainError(f"side must be None, 'left' or 'right', got {side!r}")
    lo, hi = _branch_interval(delta, side)
    if hi == -1.0:
        return 0.25
    f = lambda x: ground_energy_at(x, cfg)  # noqa: E731
    tol = 10.0 * cfg.abs_tol
    room_left, room_right = delta - lo, hi - delta
    if min(room_left, room_right) >= 10.0 * h:
        return _richardson(lambda s: (f(delta + s) - f(delta - s)) / (2.0 * s), h, 2, tol)
    f0 = f(delta)
    if room_right >= room_left:
        return _richardson(lambda s: (f(delta + s) - f0) / s, h, 1, tol)
    return _richardson(lambda s: (f0 - f(delta - s)) / s, h, 1, tol)
