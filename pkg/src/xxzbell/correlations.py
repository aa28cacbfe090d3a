"""Two-site correlators of the infinite XXZ chain.

Nearest neighbours follow from the energy through the Hellmann-Feynman
relations ``tzz = 4 de0/dDelta`` and ``txx = (4 e0 - Delta tzz) / 2``.
Longer separations come from exact diagonalization of rings, extrapolated in
``1/N**2``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import bethe, ed
from .errors import AccuracyError, DomainError

__all__ = [
    "Source",
    "CorrelationSet",
    "nn_correlations",
    "far_correlations",
    "physicality_violation",
    "RESIDUAL_THRESHOLD",
    "LOW_CONFIDENCE_WINDOW",
]

RESIDUAL_THRESHOLD = 1e-3
# width of the region right of delta = -1 where ring sizes <= 16 miss the
# closing gap and extrapolations are reported as low confidence
LOW_CONFIDENCE_WINDOW = 0.05
PHYSICAL_SLACK = 1e-9


class Source(enum.Enum):
    BETHE = "bethe"
    ED_EXTRAPOLATED = "ed_extrapolated"


def physicality_violation(txx: float, tzz: float) -> float:
    """Largest violation of the eigenvalue inequalities of the symmetric state.

    Zero or negative means physical: ``1 - tzz >= 2|txx|`` and ``1 + tzz >= 0``.
    """
    return max(2.0 * abs(txx) - (1.0 - tzz), -(1.0 + tzz))


@dataclass(frozen=True)
class CorrelationSet:
    r: int
    txx: float  # <sx_i sx_{i+r}> (= <sy_i sy_{i+r}>)
    tzz: float  # <sz_i sz_{i+r}>
    source: Source = Source.BETHE
    residual: float = 0.0
    low_confidence: bool = False
    clamped: bool = False

    def is_physical(self, slack: float = PHYSICAL_SLACK) -> bool:
        return (
            abs(self.txx) <= 1.0 + slack
            and abs(self.tzz) <= 1.0 + slack
            and physicality_violation(self.txx, self.tzz) <= slack
        )


def nn_correlations(
    delta: float, cfg: bethe.QuadratureConfig | None = None, side: str | None = None
) -> CorrelationSet:
    """Nearest-neighbour correlators from the ground-state energy.

    ``side`` selects a one-sided limit at ``delta = +-1`` (see
    :func:`xxzbell.bethe.ground_energy_derivative`).
    """
    cfg = cfg or bethe.QuadratureConfig()
    point = bethe.classify(delta)
    if point.branch is bethe.Branch.FERRO and side != "right":
        return CorrelationSet(1, 0.0, 1.0, Source.BETHE)
    e0 = bethe.ground_energy(point, cfg)
    tzz = 4.0 * bethe.ground_energy_derivative(delta, cfg, side=side)
    txx = 0.5 * (4.0 * e0 - delta * tzz)
    return CorrelationSet(1, txx, tzz, Source.BETHE)


def _project(txx, tzz):
    tzz = min(max(tzz, -1.0), 1.0)
    limit = 0.5 * (1.0 - tzz)
    txx = math.copysign(min(abs(txx), limit), txx)
    return txx, tzz


def far_correlations(
    delta: float,
    r: int,
    ed_cfg: ed.EDConfig | None = None,
    *,
    residual_threshold: float = RESIDUAL_THRESHOLD,
    on_residual: str = "raise",
    results: list[ed.EDResult] | None = None,
    cache: ed.EDCache | None = None,
) -> CorrelationSet:
    """Correlators at separation ``r`` from extrapolated exact diagonalization.

    Parameters
    ----------
    delta : float
        Anisotropy.
    r : int
        Separation, 1 to 3.
    ed_cfg : EDConfig, optional
        Ring sizes and solver settings.
    residual_threshold : float
        Largest acceptable deviation of the ``a + b/N**2`` fit from the data.
        The same bound limits how far an unphysical extrapolation may be
        projected back onto the physical triangle.
    on_residual : {"raise", "flag"}
        Whether a fit residual above the threshold raises
        :class:`AccuracyError` or only marks the result ``low_confidence``.
    results : list of EDResult, optional
        Precomputed diagonalizations at ``delta``; avoids repeating them when
        several separations are needed.
    """
    if r not in (1, 2, 3):
        raise DomainError(f"separation must be 1, 2 or 3, got {r}")
    if on_residual not in ("raise", "flag"):
        raise DomainError(f"on_residual must be 'raise' or 'flag', got {on_residual!r}")
    ed_cfg = ed_cfg or ed.EDConfig()
    if not math.isfinite(delta):
        raise DomainError("delta must be finite")
    if min(ed_cfg.sizes) < 2 * r:
        raise DomainError(f"ring size {min(ed_cfg.sizes)} too small for separation {r}")
    if results is None:
        results = ed.diagonalize(delta, ed_cfg, cache=cache)
    txx, res_x = ed.extrapolate(results, ("txx", r))
    tzz, res_z = ed.extrapolate(results, ("tzz", r))
    residual = max(res_x, res_z)
    low = residual > residual_threshold
    if low and on_residual == "raise":
        raise AccuracyError(
            f"extrapolation residual {residual:.3g} above {residual_threshold:.3g} "
            f"at delta={delta}, r={r}",
            residual,
        )
    low = low or (-1.0 < delta < -1.0 + LOW_CONFIDENCE_WINDOW)
    violation = max(physicality_violation(txx, tzz), abs(txx) - 1.0, abs(tzz) - 1.0)
    clamped = False
    if violation > 0.0:
        if violation > residual_threshold:
            raise AccuracyError(
                f"extrapolated correlators ({txx:.6g}, {tzz:.6g}) unphysical by {violation:.3g}",
                violation,
            )
        txx, tzz = _project(txx, tzz)
        clamped = True
    return CorrelationSet(
        r, txx, tzz, Source.ED_EXTRAPOLATED, residual=residual, low_confidence=low, clamped=clamped
    )
