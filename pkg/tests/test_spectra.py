import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robin_spectra.enclosure import boundary_point_on_ray, construct_optimality_witness
from robin_spectra.errors import ContourTooClose, SizeError
from robin_spectra.lattice import Potential, build_truncation
from robin_spectra.resolvent import gamma_a, green_entry
from robin_spectra.spectra import (band_distance, birman_schwinger_matrix, bs_norm,
                                   characteristic_polynomial, count_outside_band,
                                   critical_operator_spectrum, eigenvalues_dense, orthopoly_eval,
                                   orthopoly_zeros, rank_one_eigenvalues_exact, refine_in_truncation,
                                   stable_under_doubling, verify_in_truncation)
from robin_spectra.stability import Level, verdict

PHI = (1 + math.sqrt(5)) / 2


class TestDense:
    @pytest.mark.parametrize("a, target", [(2.0, 2.5), (1j * PHI, 1j)])
    def test_coupling_eigenvalue(self, a, target):
        rep = eigenvalues_dense(build_truncation(a, None, 400))
        assert rep.N == 400 and rep.eigenvalues.size == 400
        assert rep.residual <= 1e-8
        out = rep.outside(0.05)
        assert out.size == 1 and abs(out[0] - target) < 1e-6
        assert np.sum(np.abs(rep.eigenvalues - target) < 0.1) == 1

    def test_dirichlet_real(self):
        ev = eigenvalues_dense(build_truncation(0, None, 300)).eigenvalues
        assert np.all(ev.imag == 0) and np.all(np.abs(ev.real) < 2)
        np.testing.assert_allclose(ev.real, 2 * np.cos(np.pi * np.arange(300, 0, -1) / 301), atol=1e-13)

    def test_ordering(self):
        ev = eigenvalues_dense(build_truncation(0.3 + 2j, Potential.from_entries({3: 1 - 1j}), 60)).eigenvalues
        keys = list(zip(ev.real, ev.imag))
        assert keys == sorted(keys)

    def test_size_limit(self):
        with pytest.raises(SizeError):
            eigenvalues_dense(build_truncation(0, None, 4001))

    def test_newton_refinement(self):
        M = build_truncation(2.0, None, 200)
        z, _ = refine_in_truncation(M, 2.6)  # right of every root: monotone Newton
        assert abs(z[0] - 2.5) < 1e-12


class TestCounting:
    def test_examples(self):
        assert count_outside_band(build_truncation(2.0, None, 300), 0.1) == 1
        assert count_outside_band(build_truncation(0.5, None, 300), 0.1) == 0
        V = Potential.from_entries({1: 0.2, 2: 0.1j})
        assert verdict(0, V).level is Level.PURELY_CONTINUOUS
        assert count_outside_band(build_truncation(0, V, 300), 0.05) == 0

    def test_contour_too_close(self):
        with pytest.raises(ContourTooClose):
            count_outside_band(build_truncation(2.0, None, 100), 0.5)

    def test_agrees_with_dense(self, rng):
        for _ in range(50):
            a = complex(*rng.uniform(-2.5, 2.5, 2))
            L = int(rng.integers(1, 6))
            V = Potential.from_entries({int(s): complex(*rng.uniform(-1.5, 1.5, 2))
                                        for s in rng.integers(1, 12, L)})
            M = build_truncation(a, V, 120)
            ev = eigenvalues_dense(M, residuals=False).eigenvalues
            d = band_distance(ev)
            if np.min(np.abs(d - 0.05)) < 1e-4:
                continue  # an eigenvalue sits on the contour
            assert count_outside_band(M, 0.05) == int(np.sum(d > 0.05))


class TestRankOne:
    def test_examples(self):
        assert rank_one_eigenvalues_exact(0, 2j, 1) == pytest.approx([1.5j])
        assert rank_one_eigenvalues_exact(0, 0.5, 1) == []
        w = 1.7 - 0.4j
        assert rank_one_eigenvalues_exact(0, w, 1) == pytest.approx([w + 1 / w])
        assert rank_one_eigenvalues_exact(2.0, 0, 3) == [2.5]

    def test_truncation_oracle(self):
        ev = eigenvalues_dense(build_truncation(0, Potential.point(1, 2j), 400)).outside(0.05)
        assert ev.size == 1 and abs(ev[0] - 1.5j) < 1e-10

    @given(st.complex_numbers(max_magnitude=2), st.complex_numbers(min_magnitude=0.1, max_magnitude=3),
           st.integers(1, 6))
    def test_polynomial_roots_solve_characteristic_equation(self, a, w, n):
        c = characteristic_polynomial(a, w, n)
        P = np.polynomial.Polynomial(c)
        assert abs(P(1.0)) < 1e-12 * (1 + abs(w)) * (1 + abs(a))
        assert abs(P(-1.0)) < 1e-12 * (1 + abs(w)) * (1 + abs(a))
        for z in rank_one_eigenvalues_exact(a, w, n):
            try:
                G = green_entry(a, z, n, n)
            except Exception:
                continue
            assert abs(1 + w * G) < 1e-7

    def test_round_trip_with_truncation(self, rng):
        N = 800
        checked = 0
        for _ in range(30):
            a = complex(*rng.uniform(-1.5, 1.5, 2)) if rng.uniform() < 0.5 else float(rng.uniform(-1.5, 1.5))
            w = complex(*rng.uniform(-2.5, 2.5, 2))
            n = int(rng.integers(1, 6))
            exact = rank_one_eigenvalues_exact(a, w, n)
            V = Potential.point(n, w)
            # finite sections resolve an eigenvalue once |k|^N is negligible
            resolvable = [z for z in exact if abs(z - np.sqrt(z * z - 4 + 0j)) < 2 * 0.97 or
                          abs(z + np.sqrt(z * z - 4 + 0j)) < 2 * 0.97]
            ev = eigenvalues_dense(build_truncation(a, V, N), residuals=False).eigenvalues
            for z in resolvable:
                assert np.min(np.abs(ev - z)) < 1e-5
                checked += 1
            for z in stable_under_doubling(a, V, 400, 0.05):
                assert min(abs(z - e) for e in exact) < 1e-5
        assert checked >= 10

    def test_near_band_eigenvalue_converges_slowly(self):
        # |k| close to 1: the section misses the eigenvalue by far more than 1e-5 at N = 800
        exact = [z for z in rank_one_eigenvalues_exact(0.3, 2 + 1j, 5) if band_distance(z) < 0.01]
        assert exact
        z = exact[0]
        errs = [verify_in_truncation(0.3, Potential.point(5, 2 + 1j), [z], N)[0] for N in (800, 3200)]
        assert errs[1] < errs[0]


class TestBirmanSchwinger:
    def test_rank_one(self):
        z, w = 0.4 + 1.1j, 0.8 - 0.3j
        assert bs_norm(z, 0.3, Potential.point(3, w), 50) == pytest.approx(abs(w) * abs(green_entry(0.3, z, 3, 3)),
                                                                         rel=1e-13)

    def test_bound(self, rng):
        for _ in range(40):
            a = complex(*rng.uniform(-2, 2, 2))
            V = Potential.from_entries({int(s): complex(*rng.uniform(-1, 1, 2)) for s in rng.integers(1, 20, 4)})
            k = 0.9 * rng.uniform(0.1, 1) * np.exp(2j * np.pi * rng.uniform())
            z = k + 1 / k
            if abs(1 - a * k) < 1e-2:
                continue
            assert bs_norm(z, a, V, 40) <= gamma_a(z, a) * V.l1_norm() + 1e-8

    @pytest.mark.parametrize("a", [0.0, 1.0])
    def test_unit_norm_at_witness(self, a):
        z = boundary_point_on_ray(a, 1.0, 0.5 + 1.2j)
        w = construct_optimality_witness(a, 1.0, z)
        V = Potential.point(w.n, w.omega)
        assert bs_norm(z, a, V, 50) == pytest.approx(1.0, abs=1e-8)
        K = birman_schwinger_matrix(z, a, V, 50)
        assert abs(K[0, 0] + 1) < 1e-8


class TestCritical:
    @pytest.mark.parametrize("N", [10, 400, 2000])
    def test_spectrum_range(self, N):
        rep = critical_operator_spectrum(N)
        ev = rep.eigenvalues.real
        assert ev.min() >= -2 - 1e-6 and ev.max() <= 2
        assert rep.residual < 1e-8

    def test_orthopoly(self):
        assert orthopoly_eval(math.sqrt(2), 3)[1] == pytest.approx(0, abs=1e-15)
        for n in range(2, 51):
            zn, zm = orthopoly_zeros(n), orthopoly_zeros(n - 1)
            assert np.all(zn[:-1] < zm) and np.all(zm < zn[1:])
        z = orthopoly_zeros(12)
        p = orthopoly_eval(z, 12)
        assert np.max(np.abs(p[12])) < 1e-9 * np.max(np.abs(p))
