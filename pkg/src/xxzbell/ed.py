"""Exact diagonalization of finite periodic XXZ rings.

The Hamiltonian is ``H = sum_j [Sx_j Sx_{j+1} + Sy_j Sy_{j+1} + delta Sz_j Sz_{j+1}]``
with ``S = sigma / 2``. Basis states are bit strings, bit ``i`` set meaning
spin ``i`` points up. Total ``S^z`` is conserved, so each sector (fixed number
of up spins) is diagonalized separately.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import AccuracyError, DomainError, MemoryBudgetError

__all__ = [
    "Sector",
    "EDConfig",
    "EDResult",
    "diagonalize",
    "diagonalize_ring",
    "extrapolate",
    "EDCache",
]

DENSE_BELOW = 12


class Sector(enum.Enum):
    AUTO = "auto"
    ZERO_MAGNETIZATION = "zero"
    ALL = "all"


@dataclass(frozen=True)
class EDConfig:
    """Settings for the exact-diagonalization oracle.

    ``max_dim`` is the memory budget: ``2**N`` may not exceed it.
    ``periodic=False`` switches to an open chain (one bond fewer); used for
    the two-site sanity check.
    """

    sizes: tuple[int, ...] = (8, 10, 12, 14, 16)
    which_sector: Sector = Sector.AUTO
    eig_tol: float = 1e-12
    max_dim: int = 2**16
    periodic: bool = True

    def __post_init__(self):
        if not self.sizes:
            raise DomainError("at least one ring size is required")
        for n in self.sizes:
            if int(n) != n or n < 2 or n % 2:
                raise DomainError(f"ring sizes must be even integers >= 2, got {n!r}")
        if not self.eig_tol > 0:
            raise DomainError("eig_tol must be positive")
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "which_sector", Sector(self.which_sector))


@dataclass
class EDResult:
    n: int
    delta: float
    energy_per_site: float
    # rows of (r, txx, tzz) for r = 1 .. n // 2
    correlators: list[tuple[int, float, float]]
    degenerate: bool = False
    sector: int = 0  # number of up spins minus n/2 in the chosen ground state
    tyy: list[float] = field(default_factory=list)
    translation_spread: float = 0.0

    def corr(self, r: int) -> tuple[float, float]:
        """Return ``(txx, tzz)`` at separation ``r``."""
        for rr, txx, tzz in self.correlators:
            if rr == r:
                return txx, tzz
        raise KeyError(f"separation {r} not available for N={self.n}")


def _popcount(x: np.ndarray) -> np.ndarray:
    c = np.zeros_like(x)
    y = x.copy()
    while np.any(y):
        c += y & 1
        y >>= 1
    return c


@functools.lru_cache(maxsize=64)
def _basis(n: int, n_up: int | None) -> np.ndarray:
    allstates = np.arange(2**n, dtype=np.int64)
    if n_up is None:
        return allstates
    return allstates[_popcount(allstates) == n_up]


def _bonds(n: int, periodic: bool) -> list[tuple[int, int]]:
    if periodic:
        if n == 2:
            # both bonds of a two-site ring join the same pair
            return [(0, 1), (1, 0)]
        return [(i, (i + 1) % n) for i in range(n)]
    return [(i, i + 1) for i in range(n - 1)]


def _lookup(states: np.ndarray, targets: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    idx = np.searchsorted(states, targets)
    idx = np.clip(idx, 0, len(states) - 1)
    found = states[idx] == targets
    return idx, found


@functools.lru_cache(maxsize=64)
def _sector_operators(n: int, n_up: int | None, periodic: bool):
    """Hopping part (sparse) and zz diagonal of the Hamiltonian in one sector."""
    states = _basis(n, n_up)
    dim = len(states)
    zz = np.zeros(dim)
    rows, cols = [], []
    for i, j in _bonds(n, periodic):
        si = (states >> i) & 1
        sj = (states >> j) & 1
        zz += 0.25 * (2 * si - 1) * (2 * sj - 1)
        differ = np.nonzero(si != sj)[0]
        flipped = states[differ] ^ ((1 << i) | (1 << j))
        idx, found = _lookup(states, flipped)
        rows.append(idx[found])
        cols.append(differ[found])
    if rows:
        r = np.concatenate(rows)
        c = np.concatenate(cols)
    else:
        r = c = np.zeros(0, dtype=np.int64)
    hop = sp.csr_matrix((np.full(len(r), 0.5), (r, c)), shape=(dim, dim))
    return states, hop, zz


def _start_vector(dim: int) -> np.ndarray:
    # fixed, symmetry-breaking start vector so Lanczos runs are reproducible
    k = np.arange(dim, dtype=float)
    v = 1.0 + 0.5 * np.sin(0.7 * k + 0.3) + 0.25 * np.cos(1.3 * k * k / max(dim, 1))
    return v / np.linalg.norm(v)


def _lowest(n, n_up, delta, periodic, eig_tol, nev=2):
    states, hop, zz = _sector_operators(n, n_up, periodic)
    dim = len(states)
    if dim <= nev + 1 or n < DENSE_BELOW:
        h = hop.toarray() + np.diag(delta * zz)
        w, v = np.linalg.eigh(h)
        return states, w[:nev], v[:, 0]
    h = hop + sp.diags(delta * zz)
    try:
        w, v = eigsh(h, k=nev, which="SA", v0=_start_vector(dim), tol=eig_tol,
                     maxiter=50 * dim)
    except ArpackNoConvergence as exc:
        raise AccuracyError(
            f"Lanczos did not converge for N={n}, delta={delta}", estimate=None
        ) from exc
    order = np.argsort(w)
    return states, w[order], v[:, order[0]]


@functools.lru_cache(maxsize=32)
def _pair_tables(n: int, n_up: int | None):
    """Per separation r: zz signs, flip partners and yy phases for every (i, i+r)."""
    states = _basis(n, n_up)
    tables = []
    for r in range(1, n // 2 + 1):
        per_site = []
        for i in range(n):
            j = (i + r) % n
            si = (states >> i) & 1
            sj = (states >> j) & 1
            zz = ((2 * si - 1) * (2 * sj - 1)).astype(float)
            idx, found = _lookup(states, states ^ ((1 << i) | (1 << j)))
            # sigma^y sigma^y picks up +1 on antiparallel pairs, -1 on parallel
            per_site.append((zz, idx, found, -zz))
        tables.append(per_site)
    return tables


def _correlators(n, n_up, states, psi):
    """Translation-averaged (r, txx, tzz), tyy list and the largest spread over i."""
    rows, tyys = [], []
    spread = 0.0
    prob = psi * psi
    for r, per_site in enumerate(_pair_tables(n, n_up), start=1):
        xs, ys, zs = [], [], []
        for zz, idx, found, yy in per_site:
            amp = np.where(found, psi[idx], 0.0) * psi
            zs.append(float(prob @ zz))
            xs.append(float(amp.sum()))
            ys.append(float(amp @ yy))
        spread = max(spread, np.ptp(xs), np.ptp(zs))
        rows.append((r, float(np.mean(xs)), float(np.mean(zs))))
        tyys.append(float(np.mean(ys)))
    return rows, tyys, spread


def diagonalize_ring(n: int, delta: float, cfg: EDConfig | None = None) -> EDResult:
    """Ground state of a single ring of ``n`` sites."""
    cfg = cfg or EDConfig(sizes=(n,))
    if not math.isfinite(delta):
        raise DomainError("delta must be finite")
    if n < 2 or n % 2:
        raise DomainError(f"ring size must be even and >= 2, got {n}")
    if 2**n > cfg.max_dim:
        raise MemoryBudgetError(f"2**{n} exceeds the memory budget of {cfg.max_dim} states")

    half = n // 2
    tie = max(1e-9, 100 * cfg.eig_tol) * n
    if cfg.which_sector is Sector.ALL:
        n_up = None
        states, w, psi = _lowest(n, None, delta, cfg.periodic, cfg.eig_tol)
        sector = 0
        degenerate = len(w) > 1 and w[1] - w[0] < tie
        e0 = w[0]
    else:
        if cfg.which_sector is Sector.ZERO_MAGNETIZATION:
            candidates = [half]
        else:
            # spin flip maps sector M onto -M, so M >= 0 suffices
            candidates = list(range(half, n + 1))
        found = []
        for n_up in candidates:
            # a second level is only needed where degeneracy inside the sector matters
            nev = 2 if n_up == half else 1
            states, w, psi = _lowest(n, n_up, delta, cfg.periodic, cfg.eig_tol, nev)
            found.append((n_up, states, w, psi))
        e0 = min(f[2][0] for f in found)
        ties = [f for f in found if f[2][0] - e0 < tie]
        # among degenerate sectors prefer the most polarized one (an aligned state)
        n_up, states, w, psi = max(ties, key=lambda f: f[0])
        sector = n_up - half
        e0 = w[0]
        degenerate = (
            len(ties) > 1
            or sector != 0
            or (len(w) > 1 and w[1] - w[0] < tie)
        )
    rows, tyys, spread = _correlators(n, n_up, states, psi)
    return EDResult(
        n=n,
        delta=float(delta),
        energy_per_site=float(e0) / n,
        correlators=rows,
        degenerate=bool(degenerate),
        sector=int(sector),
        tyy=tyys,
        translation_spread=float(spread),
    )


def diagonalize(delta: float, cfg: EDConfig | None = None, cache: "EDCache | None" = None) -> list[EDResult]:
    """Diagonalize every ring size in ``cfg.sizes`` at anisotropy ``delta``."""
    cfg = cfg or EDConfig()
    out = []
    for n in cfg.sizes:
        res = cache.get(n, delta, cfg) if cache is not None else None
        if res is None:
            res = diagonalize_ring(n, delta, cfg)
            if cache is not None:
                cache.put(res, cfg)
        out.append(res)
    return out


Selector = Union[str, tuple, Callable[[EDResult], float]]


def _select(quantity: Selector) -> Callable[[EDResult], float]:
    if callable(quantity):
        return quantity
    if quantity == "energy":
        return lambda res: res.energy_per_site
    name, r = quantity
    if name == "txx":
        return lambda res: res.corr(r)[0]
    if name == "tzz":
        return lambda res: res.corr(r)[1]
    raise ValueError(f"unknown quantity {quantity!r}")


def extrapolate(results: Sequence[EDResult], quantity: Selector) -> tuple[float, float]:
    """Fit ``a + b / N**2`` to a finite-size series.

    Parameters
    ----------
    results : sequence of EDResult
        At least three distinct ring sizes.
    quantity : str, tuple or callable
        ``"energy"``, ``("txx", r)``, ``("tzz", r)`` or a function of an
        :class:`EDResult`.

    Returns
    -------
    value : float
        The intercept ``a`` (the infinite-ring estimate).
    residual : float
        Largest absolute deviation of the data from the fitted curve.
    """
    sizes = np.array([res.n for res in results], dtype=float)
    if len(set(sizes)) < 3:
        raise DomainError("extrapolation needs at least three distinct sizes")
    get = _select(quantity)
    y = np.array([get(res) for res in results], dtype=float)
    design = np.column_stack([np.ones_like(sizes), sizes**-2])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(design @ coef - y)))
    return float(coef[0]), residual


class EDCache:
    """On-disk key/value cache of :class:`EDResult` records.

    One line per record: ``key<TAB>value`` where the key is
    ``N|delta|sector|periodic`` (delta written with ``repr``) and the value is
    ``energy;degenerate;sector;r:txx:tzz,...``.
    """

    def __init__(self, path):
        self.path = path
        self._data: dict[str, str] = {}
        try:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.rstrip("\n")
                    if "\t" in line:
                        k, v = line.split("\t", 1)
                        self._data[k] = v
        except FileNotFoundError:
            pass

    @staticmethod
    def _key(n, delta, cfg):
        return f"{n}|{float(delta)!r}|{cfg.which_sector.value}|{int(cfg.periodic)}"

    def get(self, n, delta, cfg) -> EDResult | None:
        v = self._data.get(self._key(n, delta, cfg))
        if v is None:
            return None
        energy, degenerate, sector, corr = v.split(";")
        rows = []
        for item in corr.split(","):
            r, txx, tzz = item.split(":")
            rows.append((int(r), float(txx), float(tzz)))
        return EDResult(
            n=n,
            delta=float(delta),
            energy_per_site=float(energy),
            correlators=rows,
            degenerate=degenerate == "1",
            sector=int(sector),
            tyy=[txx for _, txx, _ in rows],
        )

    def put(self, res: EDResult, cfg: EDConfig) -> None:
        key = self._key(res.n, res.delta, cfg)
        corr = ",".join(f"{r}:{txx!r}:{tzz!r}" for r, txx, tzz in res.correlators)
        value = f"{res.energy_per_site!r};{int(res.degenerate)};{res.sector};{corr}"
        self._data[key] = value
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(f"{key}\t{value}\n")
