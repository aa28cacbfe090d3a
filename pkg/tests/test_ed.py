import math
from functools import reduce

import numpy as np
import pytest

from xxzbell import ed
from xxzbell.bethe import ground_energy_at
from xxzbell.ed import EDCache, EDConfig, EDResult, Sector, diagonalize, diagonalize_ring, extrapolate
from xxzbell.errors import DomainError, MemoryBudgetError

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
I2 = np.eye(2)


def site_op(op, i, n):
    return reduce(np.kron, [op if k == i else I2 for k in range(n)])


def kron_hamiltonian(n, delta, periodic=True):
    """Dense oracle built from tensor products, independent of the bit tables."""
    bonds = [(i, (i + 1) % n) for i in range(n)] if periodic else [(i, i + 1) for i in range(n - 1)]
    h = np.zeros((2**n, 2**n), dtype=complex)
    for i, j in bonds:
        for op, c in ((SX, 1.0), (SY, 1.0), (SZ, delta)):
            h += c * site_op(op, i, n) @ site_op(op, j, n)
    return h


def test_two_site_singlet():
    cfg = EDConfig(sizes=(2,), periodic=False)
    res = diagonalize_ring(2, 1.0, cfg)
    assert res.energy_per_site * 2 == pytest.approx(-0.75, abs=1e-12)
    txx, tzz = res.corr(1)
    assert txx == pytest.approx(-1.0, abs=1e-12)
    assert tzz == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("n", [4, 6, 8])
@pytest.mark.parametrize("delta", [-0.6, 0.0, 0.7, 1.0, 2.5])
def test_energy_matches_tensor_product_oracle(n, delta):
    e_oracle = np.linalg.eigvalsh(kron_hamiltonian(n, delta))[0] / n
    res = diagonalize_ring(n, delta, EDConfig(sizes=(n,)))
    assert res.energy_per_site == pytest.approx(e_oracle, abs=1e-10)


@pytest.mark.parametrize("delta", [0.3, 1.5])
def test_correlators_match_tensor_product_oracle(delta):
    n = 8
    w, v = np.linalg.eigh(kron_hamiltonian(n, delta))
    assert w[1] - w[0] > 1e-6
    psi = v[:, 0]
    res = diagonalize_ring(n, delta, EDConfig(sizes=(n,)))
    for r in (1, 2, 3, 4):
        cxx = np.real(psi.conj() @ site_op(SX, 0, n) @ site_op(SX, r, n) @ psi) * 4
        czz = np.real(psi.conj() @ site_op(SZ, 0, n) @ site_op(SZ, r, n) @ psi) * 4
        txx, tzz = res.corr(r)
        assert txx == pytest.approx(cxx, abs=1e-9)
        assert tzz == pytest.approx(czz, abs=1e-9)


def test_lanczos_path_matches_dense():
    # n = 12 uses the sparse eigensolver
    cfg = EDConfig(sizes=(12,))
    res = diagonalize_ring(12, 0.4, cfg)
    states, hop, zz = ed._sector_operators(12, 6, True)
    dense = hop.toarray() + np.diag(0.4 * zz)
    assert res.energy_per_site == pytest.approx(np.linalg.eigvalsh(dense)[0] / 12, abs=1e-10)


def test_ferromagnet():
    res = diagonalize_ring(12, -2.0)
    assert res.energy_per_site == pytest.approx(-0.5, abs=1e-12)
    assert res.corr(1) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert res.degenerate
    assert res.sector == 6


def test_isotropic_close_to_infinite_chain():
    res = diagonalize_ring(16, 1.0)
    assert abs(res.energy_per_site - (0.25 - math.log(2))) < 0.01


@pytest.mark.parametrize("delta", [-0.5, 0.3, 1.0, 2.0])
def test_tyy_equals_txx_and_translation_invariant(delta):
    res = diagonalize_ring(10, delta)
    for (r, txx, _), tyy in zip(res.correlators, res.tyy):
        assert tyy == pytest.approx(txx, abs=1e-12)
    assert res.translation_spread < 1e-10


def test_zero_sector_option():
    cfg = EDConfig(sizes=(8,), which_sector=Sector.ZERO_MAGNETIZATION)
    res = diagonalize_ring(8, -2.0, cfg)
    assert res.sector == 0


def test_all_sector_option():
    cfg = EDConfig(sizes=(6,), which_sector=Sector.ALL)
    res = diagonalize_ring(6, 0.5, cfg)
    oracle = np.linalg.eigvalsh(kron_hamiltonian(6, 0.5))[0] / 6
    assert res.energy_per_site == pytest.approx(oracle, abs=1e-10)


def _fake(n, value):
    return EDResult(n=n, delta=0.0, energy_per_site=value, correlators=[(1, value, value)])


def test_extrapolate_exact_model():
    results = [_fake(n, -0.3 + 2.0 / n**2) for n in (8, 10, 12, 14)]
    a, res = extrapolate(results, "energy")
    assert a == pytest.approx(-0.3, abs=1e-13)
    assert res < 1e-13
    a, _ = extrapolate(results, ("txx", 1))
    assert a == pytest.approx(-0.3, abs=1e-13)
    a, _ = extrapolate(results, lambda x: 2 * x.energy_per_site)
    assert a == pytest.approx(-0.6, abs=1e-13)


def test_extrapolate_constant_series():
    a, res = extrapolate([_fake(n, 0.125) for n in (4, 6, 8)], "energy")
    assert a == pytest.approx(0.125, abs=1e-14)
    assert res < 1e-14


def test_extrapolate_needs_three_sizes():
    with pytest.raises(DomainError):
        extrapolate([_fake(8, 0.0), _fake(10, 0.0), _fake(10, 0.0)], "energy")


@pytest.mark.parametrize("delta,tol", [(0.0, 2e-4), (0.5, 2e-4), (-0.5, 5e-4), (1.0, 5e-4)])
def test_extrapolated_energy_gapless(delta, tol):
    a, _ = extrapolate(diagonalize(delta), "energy")
    assert abs(a - ground_energy_at(delta)) < tol


def test_cache_round_trip(tmp_path):
    path = tmp_path / "ed.cache"
    cfg = EDConfig(sizes=(8, 10))
    cache = EDCache(path)
    first = diagonalize(0.25, cfg, cache=cache)
    reloaded = EDCache(path)
    for res in first:
        again = reloaded.get(res.n, 0.25, cfg)
        assert again is not None
        assert again.energy_per_site == res.energy_per_site
        assert again.correlators == res.correlators
        assert again.degenerate == res.degenerate
    assert reloaded.get(12, 0.25, cfg) is None


def test_memory_budget():
    with pytest.raises(MemoryBudgetError):
        diagonalize_ring(18, 0.0, EDConfig(sizes=(18,)))
    with pytest.raises(MemoryBudgetError):
        diagonalize_ring(10, 0.0, EDConfig(sizes=(10,), max_dim=2**8))


@pytest.mark.parametrize("sizes", [(7,), (0,), ()])
def test_config_rejects_bad_sizes(sizes):
    with pytest.raises(DomainError):
        EDConfig(sizes=sizes)


def test_non_finite_delta():
    with pytest.raises(DomainError):
        diagonalize_ring(8, math.nan)


@pytest.mark.parametrize("delta", [0.0, 1.0])
def test_energy_monotone_in_size(delta):
    e = [res.energy_per_site for res in diagonalize(delta)]
    target, _ = extrapolate(diagonalize(delta), "energy")
    gaps = [abs(x - target) for x in e]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    # even rings approach from below
    assert all(x < target for x in e)
