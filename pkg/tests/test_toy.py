import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from splitgap.errors import DenseTooLarge, InvalidParams, TooLarge, Unsupported
from splitgap.model import ModelParams
from splitgap.toy import (
    OperatorChoice,
    asymptotic_log_delta_toy,
    build_dense_P,
    cos_element_constant,
    dense_oracle_toy,
    domain_wall_counts,
    linearized_log_delta,
    matrix_element_cos,
    p_spectrum,
    secular_eval,
    secular_functions,
    solve_splitting_secular,
    time_domain_delta,
    time_domain_delta_exact,
    transfer_eigen_sum,
)

EX1 = OperatorChoice.sigma_x()
EX2 = OperatorChoice.sigma_xx()
EX3 = OperatorChoice.mixed("1/3")
SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1j], [1j, 0.0]])
SZ = np.diag([1.0, -1.0])


def prm(L, lam=1.0, alpha=0.5):
    return ModelParams(L, lam=lam, alpha=alpha)


def kron_sum_x(L):
    """sum_j sigma^x_j by explicit Kronecker products."""
    P = np.zeros((2**L, 2**L))
    for j in range(L):
        m = np.ones((1, 1))
        for k in range(L):
            m = np.kron(m, SX if k == j else np.eye(2))
        P += m
    return P


def cat_states(L):
    N = 2**L
    out = {}
    for s in (1, -1):
        v = np.zeros(N)
        v[0], v[-1] = 2**-0.5, s * 2**-0.5
        out[s] = v
    return out


def independent_toy_energies(P, L, lam, alpha):
    """Sector ground energies of -L(|psi+><psi+| + |psi-><psi-|) + (lam/L^alpha) P^2.

    Each sector is projected with an explicit isometry onto flip-symmetric or
    flip-antisymmetric combinations and diagonalized in full.
    """
    cats = cat_states(L)
    H = lam / L**alpha * (P @ P) - L * (np.outer(cats[1], cats[1]) + np.outer(cats[-1], cats[-1]))
    N = 2**L
    idx = np.arange(N)
    reps = idx[idx < (idx ^ (N - 1))]
    out = []
    for s in (1.0, -1.0):
        Q = np.zeros((N, reps.size))
        Q[reps, np.arange(reps.size)] = 2**-0.5
        Q[reps ^ (N - 1), np.arange(reps.size)] += s * 2**-0.5
        out.append(float(np.linalg.eigvalsh(Q.T @ H @ Q)[0]))
    return tuple(out)


class TestOperatorChoice:
    def test_mixed_needs_odd_denominator(self):
        with pytest.raises(InvalidParams):
            OperatorChoice.mixed("1/2")
        assert OperatorChoice.mixed(Fraction(2, 6)).gamma == Fraction(1, 3)

    def test_rescaled_norm(self):
        for g in ("1/3", "-3/5", "7"):
            op, _ = OperatorChoice.mixed(g).local_matrix()
            assert np.max(np.abs(np.linalg.eigvalsh(op))) <= 1.0 + 1e-12

    def test_coefficients(self):
        assert OperatorChoice.mixed("1/3").coefficients() == (Fraction(3, 4), Fraction(1, 4))
        assert OperatorChoice.mixed("1/3", rescale=False).coefficients() == (1, Fraction(1, 3))

    @pytest.mark.parametrize(
        "op, span",
        [
            (SZ, 1),  # anticommutes with the symmetry
            (2 * SX, 1),  # norm > 1
            (np.array([[0, 1], [0, 0]]), 1),  # not Hermitian
            (np.kron(SZ, SZ), 2),  # nonzero cat expectation
        ],
    )
    def test_custom_rejections(self, op, span):
        with pytest.raises(InvalidParams):
            OperatorChoice.custom(op, span)

    def test_custom_accepts_y_y(self):
        ch = OperatorChoice.custom(np.kron(SY, SY), 2)
        assert not ch.x_diagonal
        with pytest.raises(Unsupported):
            ch.coefficients()


class TestSpectrum:
    @pytest.mark.parametrize("L", range(2, 13))
    def test_domain_wall_counts_brute_force(self, L):
        brute = {}
        for bits in itertools.product((0, 1), repeat=L):
            d = sum(bits)
            b = sum(bits[j] != bits[(j + 1) % L] for j in range(L))
            brute[(d, b)] = brute.get((d, b), 0) + 1
        assert domain_wall_counts(L) == brute

    @pytest.mark.parametrize("choice", [EX1, EX2, EX3])
    def test_weights_normalized(self, choice):
        _, wp, wm, signed = p_spectrum(choice, 10)
        assert wp.sum() == 1.0 and wm.sum() == 1.0
        assert np.allclose(signed, 0.5 * (wp - wm))

    def test_dense_P_matches_kron(self):
        assert np.allclose(build_dense_P(EX1, 6), kron_sum_x(6))
        P = build_dense_P(EX3, 6)
        assert np.allclose(P, P.conj().T)


class TestSecular:
    def test_lambda_zero(self):
        for ch in (EX1, EX2, EX3):
            for eta in (0.5, 1.0, 3.0):
                assert secular_eval(ch, prm(8, lam=0.0), eta, 1) == pytest.approx(1 - 1 / eta, abs=1e-15)

    def test_dense_resolvent(self):
        L, lam, alpha, eta = 4, 1.0, 0.5, 1.0
        P = kron_sum_x(L)
        A = lam / L**alpha * (P @ P)
        for s, psi in cat_states(L).items():
            ref = 1 - L * psi @ np.linalg.solve(A + L * eta * np.eye(2**L), psi)
            assert secular_eval(EX1, prm(L), eta, s) == pytest.approx(ref, abs=1e-12)

    @pytest.mark.parametrize("choice", [EX1, EX2, EX3, OperatorChoice.custom(np.kron(SY, SY), 2)])
    def test_increasing(self, choice):
        for s in (1, -1):
            vals = [secular_eval(choice, prm(8), e, s) for e in (0.5, 1.0, 2.0)]
            assert vals[0] < vals[1] < vals[2]

    def test_validation(self):
        with pytest.raises(InvalidParams):
            secular_eval(EX1, prm(4), 0.0, 1)
        with pytest.raises(InvalidParams):
            secular_eval(EX1, prm(4), 1.0, 0)

    def test_custom_size_limit(self):
        with pytest.raises(DenseTooLarge):
            secular_eval(OperatorChoice.custom(np.kron(SY, SY), 2), prm(16), 1.0, 1)

    @pytest.mark.parametrize("L", [4, 6, 8, 10, 12])
    def test_f_bound(self, L):
        eta = np.linspace(0.5, 4.0, 351)
        for lam in (0.3, 1.0, 3.0):
            for ch in (EX1, EX2, EX3):
                p = prm(L, lam=lam)
                f = secular_functions(ch, p).f(eta)
                lower = 1 - 1 / eta
                upper = lower + L**-p.alpha * lam / eta**2
                assert np.all(f >= lower - 1e-14)
                assert np.all(f <= upper + 1e-14)

    def test_g_bound_constant(self):
        eta = np.linspace(0.5, 4.0, 351)
        consts = []
        for L in (6, 8, 10, 12):
            c = cos_element_constant(EX1, L)
            consts.append(c)
            for lam in (0.3, 1.0, 3.0):
                p = prm(L, lam=lam)
                g = np.abs(secular_functions(EX1, p).g(eta))
                assert np.all(g <= c * L ** (-p.alpha / 2) * math.sqrt(lam) * eta**-1.5)
        assert max(consts) / min(consts) <= 2.0


class TestSplitting:
    @pytest.mark.parametrize("L", [4, 6, 8, 10])
    def test_ex1_against_independent_dense(self, L):
        Ep, Em = independent_toy_energies(kron_sum_x(L), L, 1.0, 0.5)
        r = solve_splitting_secular(EX1, prm(L))
        assert r.delta == pytest.approx(Em - Ep, rel=1e-8)
        assert r.E_plus == pytest.approx(Ep, rel=1e-12)

    def test_frozen_value(self):
        assert solve_splitting_secular(EX1, prm(8)).delta == pytest.approx(0.25636542902404447, rel=1e-12)

    @pytest.mark.parametrize("choice", [EX2, EX3, OperatorChoice.mixed("-3/5", rescale=False), OperatorChoice.custom(np.kron(SY, SY), 2)])
    def test_other_choices_against_dense_oracle(self, choice):
        for L in (8, 10):
            s, d = solve_splitting_secular(choice, prm(L)), dense_oracle_toy(choice, prm(L))
            if d.delta == 0 or abs(d.delta) < 1e-13:
                assert abs(s.delta) < 1e-13
            else:
                assert s.delta == pytest.approx(d.delta, rel=1e-8)

    def test_dense_oracle_against_independent(self):
        L = 6
        P = np.zeros((2**L, 2**L), dtype=complex)
        for j in range(L):
            ops = [np.eye(2)] * L
            ops[j] = ops[(j + 1) % L] = SY
            m = np.ones((1, 1))
            for o in ops:
                m = np.kron(m, o)
            P += m
        Ep, Em = independent_toy_energies(P, L, 1.0, 0.5)
        d = dense_oracle_toy(OperatorChoice.custom(np.kron(SY, SY), 2), prm(L))
        assert (d.E_plus, d.E_minus) == pytest.approx((Ep, Em), abs=1e-11)

    @pytest.mark.parametrize("L", [5, 7, 9, 11])
    def test_kramers(self, L):
        for ch in (EX1, EX2, OperatorChoice.custom(np.kron(SY, SY), 2)):
            r = solve_splitting_secular(ch, prm(L))
            assert r.delta == 0.0 and r.kramers
            assert abs(dense_oracle_toy(ch, prm(L)).delta) < 1e-13
            assert time_domain_delta(ch, prm(L)) == 0.0

    @pytest.mark.parametrize("L", [5, 7, 9])
    def test_mixed_odd_L_not_protected(self, L):
        # the antiunitary flips sigma^x but not the bond term, so nothing
        # forces a degeneracy; all routes agree on a nonzero splitting
        r = solve_splitting_secular(EX3, prm(L))
        d = dense_oracle_toy(EX3, prm(L))
        assert not r.kramers and not d.kramers
        assert abs(d.delta) > 1e-3
        assert r.delta == pytest.approx(d.delta, rel=1e-8)
        assert time_domain_delta(EX3, prm(L)) == pytest.approx(time_domain_delta_exact(EX3, prm(L)), rel=1e-8)

    @pytest.mark.parametrize("L", [6, 10, 14, 18, 22])
    def test_ex2_zero_off_multiple_of_four(self, L):
        assert solve_splitting_secular(EX2, prm(L)).delta == 0.0

    def test_lambda_zero(self):
        for ch in (EX1, EX2, EX3):
            assert solve_splitting_secular(ch, prm(8, lam=0.0)).delta == 0.0
            d = dense_oracle_toy(ch, prm(8, lam=0.0))
            assert d.E_plus == pytest.approx(-8.0) and d.delta == pytest.approx(0.0, abs=1e-13)

    def test_variational_bound(self):
        for ch in (EX1, EX2, EX3):
            L = 8
            p = prm(L)
            P = build_dense_P(ch, L)
            d = dense_oracle_toy(ch, p)
            for s, psi in cat_states(L).items():
                bound = -L + p.lam / L**p.alpha * float(np.real(psi @ P @ P @ psi))
                assert (d.E_plus if s > 0 else d.E_minus) <= bound + 1e-12

    def test_linearized_estimate(self):
        r = solve_splitting_secular(EX1, prm(12))
        assert r.linearized_delta == pytest.approx(r.delta, rel=1e-2)
        lg, sign = linearized_log_delta(EX1, prm(12))
        assert sign == 1
        assert lg == pytest.approx(math.log(r.linearized_delta), rel=1e-10)

    def test_linearized_large_L_extends_secular(self):
        # the double-precision root difference stops resolving delta; the
        # extended-precision route keeps following the asymptotic trend
        ratios = [linearized_log_delta(EX1, prm(L))[0] / asymptotic_log_delta_toy(EX1, prm(L)) for L in (32, 64, 128)]
        assert all(abs(1 - b) < abs(1 - a) for a, b in zip(ratios, ratios[1:]))

    def test_linearized_exact_zeros(self):
        assert linearized_log_delta(EX2, prm(18)) == (-math.inf, 0)
        assert linearized_log_delta(EX1, prm(9)) == (-math.inf, 0)

    def test_dense_limit(self):
        with pytest.raises(TooLarge):
            dense_oracle_toy(EX1, prm(14))


class TestMatrixElement:
    def test_examples(self):
        assert float(matrix_element_cos(EX1, 4, math.pi / 2)) == pytest.approx(1.0)
        t = np.linspace(0, 3, 7)
        assert np.all(matrix_element_cos(EX2, 6, t) == 0.0)
        assert float(matrix_element_cos(EX3, 12, 0.0)) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("choice", [EX1, EX2, EX3, OperatorChoice.mixed("-3/5"), OperatorChoice.mixed("1/3", rescale=False)])
    @pytest.mark.parametrize("L", [4, 5, 6, 7, 8])
    def test_closed_forms_against_dense(self, choice, L):
        P = build_dense_P(choice, L)
        w, U = np.linalg.eigh(P)
        t = np.linspace(0.0, 4.0, 9)
        ref = [np.real((U @ np.diag(np.cos(w * x)) @ U.conj().T)[-1, 0]) for x in t]
        assert np.allclose(matrix_element_cos(choice, L, t), ref, atol=1e-12)

    def test_transfer_eigenvalues(self):
        from splitgap.toy import _transfer_trace

        t = np.linspace(0.01, 6.0, 200)
        for g in (1 / 3, -3 / 5, 1.0):
            for L in (4, 7, 12):
                assert np.allclose(transfer_eigen_sum(g, t, L), _transfer_trace(g, t, L), atol=1e-10)


class TestTimeDomain:
    def test_exact_laplace_matches_quadrature(self):
        for ch in (EX1, EX3):
            p = prm(8)
            assert time_domain_delta(ch, p) == pytest.approx(time_domain_delta_exact(ch, p), rel=1e-8)

    def test_log_discrepancy_decreases(self):
        disc = []
        for L in (8, 12, 16):
            p = prm(L)
            disc.append(abs(math.log(abs(time_domain_delta(EX1, p))) - math.log(abs(solve_splitting_secular(EX1, p).delta))) / abs(math.log(abs(solve_splitting_secular(EX1, p).delta))))
        assert disc[0] > disc[1] > disc[2]

    def test_monotone_in_lambda(self):
        vals = [abs(time_domain_delta(EX1, prm(8, lam=lam))) for lam in (0.5, 1.0, 2.0)]
        assert vals[0] < vals[1] < vals[2]

    def test_zero_guards(self):
        assert time_domain_delta(EX2, prm(10)) == 0.0
        assert time_domain_delta(EX1, prm(9)) == 0.0
        with pytest.raises(InvalidParams):
            time_domain_delta(EX1, prm(8, lam=0.0))


class TestAsymptotics:
    def test_values(self):
        assert asymptotic_log_delta_toy(EX1, prm(16)) == pytest.approx(-4 * math.pi, rel=1e-14)
        assert asymptotic_log_delta_toy(EX2, prm(16)) == pytest.approx(-8 * math.log(2), rel=1e-14)

    def test_ratio_three_five(self):
        p = prm(16)
        r = asymptotic_log_delta_toy(OperatorChoice.mixed("1/3"), p) / asymptotic_log_delta_toy(OperatorChoice.mixed("1/5"), p)
        assert r == 3 / 5

    def test_rescaled_convention(self):
        p = prm(16)
        a = asymptotic_log_delta_toy(EX3, p, convention="rescaled")
        assert a == pytest.approx(asymptotic_log_delta_toy(EX3, p) * 4 / 3)

    def test_custom_unsupported(self):
        with pytest.raises(Unsupported):
            asymptotic_log_delta_toy(OperatorChoice.custom(np.kron(SY, SY), 2), prm(8))

    def test_secular_ratio_trend(self):
        ratios = [math.log(solve_splitting_secular(EX1, prm(L)).delta) / asymptotic_log_delta_toy(EX1, prm(L)) for L in (8, 12, 16, 20)]
        assert all(r < 1 for r in ratios)
        assert ratios == sorted(ratios)
