import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from robin_spectra import spectra
from robin_spectra.errors import DomainError, ParamError, SizeError
from robin_spectra.lattice import (CouplingClass, Potential, RobinCoupling, SpectralPoint,
                                   build_truncation, difference_backward, difference_forward,
                                   duality_transform, inverse_joukowski, joukowski)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
off_band = st.builds(complex, finite, finite).filter(lambda z: not (z.imag == 0 and abs(z.real) < 2))


class TestJoukowski:
    @pytest.mark.parametrize("k, z", [
        (0.5, 2.5),
        (0.5j, -1.5j),
        (complex(math.cos(math.pi / 3), math.sin(math.pi / 3)), 1.0),
    ])
    def test_examples(self, k, z):
        assert joukowski(k) == pytest.approx(z, abs=1e-15)

    @pytest.mark.parametrize("k", [0, 1.1, 2j])
    def test_rejects_outside_disk(self, k):
        with pytest.raises(DomainError):
            joukowski(k)

    def test_inverse_examples(self):
        assert inverse_joukowski(2.5).k == pytest.approx(0.5)
        assert inverse_joukowski(2.0).k == 1.0
        assert inverse_joukowski(-2.0).k == -1.0

    def test_inverse_of_imaginary_point(self):
        # the root inside the disk over 1.5i is -0.5i: -0.5i + 1/(-0.5i) = -0.5i + 2i
        p = inverse_joukowski(1.5j)
        assert p.k == pytest.approx(-0.5j, abs=1e-15)
        assert joukowski(p.k) == pytest.approx(1.5j, abs=1e-15)

    def test_band_tie_break(self):
        for x in np.linspace(-2, 2, 41):
            k = inverse_joukowski(x).k
            assert abs(abs(k) - 1) < 1e-15 and k.imag >= 0
            assert joukowski(k) == pytest.approx(x, abs=1e-14)

    @given(off_band)
    def test_round_trip(self, z):
        p = inverse_joukowski(z)
        assert abs(p.k) <= 1 + 1e-12
        assert abs(joukowski(p.k) - z) <= 1e-12 * max(1.0, abs(z))

    @given(off_band)
    def test_conjugation_symmetric(self, z):
        if abs(z.imag) < 1e-9:
            return  # branch cut along the band
        assert inverse_joukowski(z.conjugate()).k == pytest.approx(inverse_joukowski(z).k.conjugate(), abs=1e-14)

    def test_spectral_point_validates(self):
        with pytest.raises(DomainError):
            SpectralPoint(2.0, 0.5)
        with pytest.raises(DomainError):
            SpectralPoint(float("nan"), 0.5)
        assert SpectralPoint.from_k(0.5).z == 2.5


class TestCoupling:
    @pytest.mark.parametrize("a, kind", [
        (0.0, CouplingClass.REAL_UNIT_INTERVAL),
        (0.5, CouplingClass.REAL_UNIT_INTERVAL),
        (-0.5, CouplingClass.REAL_SYMMETRIC),
        (1.0, CouplingClass.SUB_UNIT),
        (0.5j, CouplingClass.SUB_UNIT),
        (2.0, CouplingClass.SUPER_UNIT),
        (1.618j, CouplingClass.SUPER_UNIT),
    ])
    def test_kind(self, a, kind):
        assert RobinCoupling(a).kind is kind

    def test_eigenvalue(self):
        assert RobinCoupling(2).eigenvalue == 2.5
        assert RobinCoupling(1).eigenvalue is None
        phi = (1 + math.sqrt(5)) / 2
        assert RobinCoupling(1j * phi).eigenvalue == pytest.approx(1j)

    def test_rejects_nonfinite(self):
        with pytest.raises(DomainError):
            RobinCoupling(complex("inf"))


class TestDifferences:
    def test_unit_vector(self):
        np.testing.assert_array_equal(difference_backward([1.0]), [-1.0, 1.0])
        np.testing.assert_array_equal(difference_forward([1.0, 0.0]), [-1.0, 0.0])

    def test_form_of_two_site_vector(self):
        # |1 - 0|^2 + |1 - 1|^2 + |0 - 1|^2
        psi = np.array([1.0, 1.0])
        assert np.sum(np.abs(difference_backward(psi)) ** 2) == 2.0
        M = build_truncation(0, None, 4)
        x = np.array([1.0, 1.0, 0.0, 0.0])
        assert 2 * np.vdot(x, x) - M.quadratic_form(x) == 2.0

    @given(st.lists(st.builds(complex, finite, finite), min_size=1, max_size=30))
    def test_laplacian_form(self, vals):
        psi = np.array(vals)
        lhs = np.sum(np.abs(difference_backward(psi)) ** 2)
        x = np.concatenate([psi, [0.0]])
        M = build_truncation(0, None, x.size)
        form = 2 * np.vdot(x, x) - M.quadratic_form(x)
        assert abs(form - lhs) <= 1e-12 * max(1.0, lhs)


class TestTruncation:
    def test_examples(self):
        np.testing.assert_array_equal(build_truncation(0, None, 3).to_dense(),
                                      [[0, 1, 0], [1, 0, 1], [0, 1, 0]])
        np.testing.assert_array_equal(build_truncation(2, None, 2).to_dense(), [[2, 1], [1, 0]])
        np.testing.assert_array_equal(build_truncation(0, Potential.point(1, 2j), 2).to_dense(),
                                      [[2j, 1], [1, 0]])

    def test_size_error(self):
        with pytest.raises(SizeError):
            build_truncation(0, None, 1)

    def test_potential_beyond_section_ignored(self):
        V = Potential.from_entries({2: 0.5, 9: 3.0})
        np.testing.assert_array_equal(build_truncation(0.1, V, 4).diagonal, [0.1, 0.5, 0, 0])


class TestDuality:
    def test_entrywise(self):
        M = build_truncation(0.3, Potential.from_entries({2: 1j}), 6)
        D = duality_transform(M)
        np.testing.assert_array_equal(D.diagonal, M.diagonal)
        U = np.diag((-1.0) ** np.arange(6))
        np.testing.assert_array_equal(D.to_dense(), U @ M.to_dense() @ U.T)
        np.testing.assert_array_equal(duality_transform(D).to_dense(), M.to_dense())

    @pytest.mark.parametrize("a", [0.3, 0.7 + 0.4j, 2.0])
    def test_spectrum_matches_reflected_coupling(self, a):
        N = 50
        ev1 = spectra.eigenvalues_dense(duality_transform(build_truncation(a, None, N))).eigenvalues
        ev2 = -spectra.eigenvalues_dense(build_truncation(-a, None, N)).eigenvalues
        d = np.abs(ev1[:, None] - ev2[None, :])
        assert max(d.min(axis=0).max(), d.min(axis=1).max()) < 1e-10


class TestPotential:
    def test_point_and_norms(self):
        V = Potential.point(3, 0.3 - 0.4j)
        assert V.nnz == 1 and V.support_bound == 3
        assert V.l1_norm() == pytest.approx(0.5)

    def test_json_round_trip(self):
        V = Potential.from_entries({1: 0.5, 4: -1j})
        W = Potential.loads(V.dumps())
        np.testing.assert_array_equal(W.sites, V.sites)
        np.testing.assert_array_equal(W.values, V.values)

    def test_json_schema(self):
        V = Potential.loads('{"entries": [{"n": 2, "re": 1.0, "im": -0.5}]}')
        assert V.dense(3)[1] == 1 - 0.5j

    @pytest.mark.parametrize("text", [
        '{"entries": [{"n": 1, "re": 1}, {"n": 1, "re": 2}]}',
        '{"entries": [{"n": 0, "re": 1}]}',
        '{"entries": [[1, 0.3]]}',
        '{"values": []}',
    ])
    def test_json_rejects(self, text):
        with pytest.raises(ParamError):
            Potential.loads(text)

    def test_from_function_tail(self):
        V = Potential.from_function(lambda n: 1.0 / n ** 4, C=1.0, p=4.0, n_explicit=100)
        assert V.nnz == 100 and not V.is_finite
        assert V.decay.power_tail(4.0, 101) < 1e-6
        assert V.decay.power_tail(1.0, 101) == math.inf
