import math

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import zbasis_hamiltonian, zbasis_sector_ground
from splitgap.ed import (
    BasisIndexer,
    EigensolverConfig,
    ParitySector,
    SectorHamiltonian,
    SolverMethod,
    apply_hamiltonian,
    splitting_ed,
    thermal_observables,
)
from splitgap.errors import DenseTooLarge, InvalidParams, NotConverged, TooLarge
from splitgap.model import Coupling, ModelParams

# frozen reference splittings, all-to-all coupling, lambda = 1, alpha = 0.5
FROZEN_DELTA = {8: 0.007121819705966814, 12: 0.00047706563029059623}


class TestBasis:
    @pytest.mark.parametrize("sector", list(ParitySector))
    def test_bijection(self, sector):
        ix = BasisIndexer(8, sector)
        st = ix.states
        assert np.array_equal(ix.index(st), np.arange(ix.dimension))
        assert len(set(st.tolist())) == ix.dimension
        parity = np.bitwise_count(st) & 1
        assert np.all(parity == sector.parity_bit)

    def test_sector_hamiltonian_symmetric(self):
        H = SectorHamiltonian(ModelParams(8, lam=0.7, coupling="power-law"), ParitySector.MINUS).dense()
        assert np.array_equal(H, H.T)

    def test_matvec_matches_dense_and_workers(self):
        p = ModelParams(14, lam=0.4, alpha=0.3, coupling="power-law")
        H = SectorHamiltonian(p, ParitySector.PLUS)
        v = np.random.default_rng(0).standard_normal(H.dimension)
        one = H.matvec(v)
        assert np.array_equal(one, H.matvec(v, workers=3))
        assert np.array_equal(one, apply_hamiltonian(p, 1, v))
        small = SectorHamiltonian(p.with_(L=8), ParitySector.PLUS)
        w = np.arange(small.dimension, dtype=float)
        assert np.allclose(small.matvec(w), small.dense() @ w, atol=1e-12)

    def test_matvec_shape_check(self):
        with pytest.raises(InvalidParams):
            SectorHamiltonian(ModelParams(4), ParitySector.PLUS).matvec(np.zeros(3))


class TestAgainstKroneckerOracle:
    @pytest.mark.parametrize("L", [4, 6, 8, 10])
    @pytest.mark.parametrize("coupling", ["all-to-all", "power-law"])
    def test_sector_energies(self, L, coupling):
        p = ModelParams(L, lam=0.6, alpha=0.4, coupling=coupling)
        Ep, Em = zbasis_sector_ground(p)
        r = splitting_ed(p)
        assert abs(r.E_plus - Ep) < 1e-10
        assert abs(r.E_minus - Em) < 1e-10

    def test_custom_table(self):
        tab = (0.3, 0.2, -0.1, 0.05, -0.1, 0.2)
        p = ModelParams(6, lam=0.8, coupling="custom", table=tab)
        Ep, Em = zbasis_sector_ground(p)
        r = splitting_ed(p, EigensolverConfig(method="dense"))
        assert (r.E_plus, r.E_minus) == pytest.approx((Ep, Em), abs=1e-11)


class TestSplitting:
    @pytest.mark.parametrize("L", [4, 8, 12])
    def test_unperturbed_degeneracy(self, L):
        for c in Coupling:
            if c is Coupling.CUSTOM:
                continue
            r = splitting_ed(ModelParams(L, lam=0.0, coupling=c))
            assert abs(r.delta) < 1e-12
            assert r.E_plus == pytest.approx(-L, abs=1e-12)

    @pytest.mark.parametrize("L", sorted(FROZEN_DELTA))
    def test_frozen_values(self, L):
        r = splitting_ed(ModelParams(L, lam=1.0, alpha=0.5))
        assert r.delta == pytest.approx(FROZEN_DELTA[L], rel=1e-9)
        assert r.err_bound < 1e-11

    def test_dense_equals_lanczos(self):
        p = ModelParams(10, lam=0.3, alpha=0.7, coupling="power-law")
        a = splitting_ed(p)
        b = splitting_ed(p, EigensolverConfig(method=SolverMethod.DENSE))
        assert abs(a.E_plus - b.E_plus) < 1e-10 and abs(a.E_minus - b.E_minus) < 1e-10

    def test_positive_splitting_lambda_positive(self):
        for L in (4, 8, 12):
            assert splitting_ed(ModelParams(L, lam=0.5)).delta > 0

    def test_odd_L_rejected(self):
        with pytest.raises(InvalidParams):
            splitting_ed(ModelParams(7, lam=1.0))

    def test_L_mod4_warning(self):
        assert splitting_ed(ModelParams(6, lam=1.0)).warnings
        assert not splitting_ed(ModelParams(8, lam=1.0)).warnings

    def test_dense_limit(self):
        with pytest.raises(DenseTooLarge):
            splitting_ed(ModelParams(16, lam=1.0), EigensolverConfig(method="dense"))

    def test_not_converged(self):
        with pytest.raises(NotConverged) as info:
            splitting_ed(ModelParams(12, lam=1.0), EigensolverConfig(max_iterations=3))
        assert info.value.estimate is not None

    def test_record_fields(self):
        rec = splitting_ed(ModelParams(8, lam=1.0)).to_record()
        for key in ("E_plus", "E_minus", "delta", "err_bound", "residual_norms", "iterations"):
            assert key in rec

    def test_bad_config(self):
        with pytest.raises(InvalidParams):
            EigensolverConfig(tol=0.0)


class TestThermal:
    def test_against_matrix_exponential(self):
        p = ModelParams(6, lam=0.7, alpha=0.5)
        beta = 1.3
        H = zbasis_hamiltonian(p)
        N = H.shape[0]
        S = np.zeros((N, N))
        S[np.arange(N), np.arange(N) ^ (N - 1)] = 1.0
        rho = expm(-beta * H)
        Z = np.trace(rho)
        s = np.trace(rho @ S) / Z
        t = thermal_observables(p, beta)
        assert t.s_beta == pytest.approx(s, rel=1e-10)
        assert t.deltaF_beta == pytest.approx(math.log((1 + s) / (1 - s)) / beta, rel=1e-9)
        zz = np.diag(np.where(((np.arange(N) >> (p.L - 1)) ^ (np.arange(N) >> (p.L - 2))) & 1, -1.0, 1.0))
        assert t.zz_corr == pytest.approx(np.trace(rho @ zz) / Z, rel=1e-10)

    def test_large_beta_limit(self):
        p = ModelParams(8, lam=1.0, alpha=0.5)
        t = thermal_observables(p, 2000.0)
        assert t.deltaF_beta == pytest.approx(FROZEN_DELTA[8], rel=1e-6)

    def test_limits(self):
        with pytest.raises(TooLarge):
            thermal_observables(ModelParams(14, lam=1.0), 1.0)
        with pytest.raises(InvalidParams):
            thermal_observables(ModelParams(6, lam=1.0), math.inf)
