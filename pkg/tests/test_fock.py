import math

import numpy as np
import pytest
from scipy.linalg import eigh

from qesrabi.fock import (
    FockTruncation,
    SupercriticalCouplingError,
    _ladder_block,
    build_hamiltonian,
    nearest_eigenvalue,
    parity_blocks,
    spectrum,
)
from qesrabi.reduction import QesBranch, TprhParams, closed_form_g, determinant_roots


class TestConstruction:
    @pytest.mark.parametrize("nmax", [1, 0, -3, 2.5])
    def test_bad_nmax(self, nmax):
        with pytest.raises(ValueError):
            FockTruncation(nmax)

    def test_symmetric(self):
        h = build_hamiltonian(TprhParams(0.7, 0.6), FockTruncation(40))
        assert np.max(np.abs(h - h.T)) == 0.0
        assert h.shape == (82, 82)

    def test_block_dims(self):
        even, odd = parity_blocks(TprhParams(0.7, 0.6), FockTruncation(41))
        assert even.shape[0] + odd.shape[0] == 2 * 42


class TestSpectrum:
    def test_zero_coupling(self):
        res = spectrum(TprhParams(1.0, 0.0), FockTruncation(50))
        n = np.arange(51)
        expect = np.sort(np.concatenate([n - 1.0, n + 1.0]))
        np.testing.assert_allclose(res.eigenvalues, expect, atol=1e-12)

    def test_zero_coupling_even_block(self):
        w = 0.37
        even, _ = parity_blocks(TprhParams(w, 0.0), FockTruncation(30))
        n = np.arange(0, 31, 2)
        expect = np.sort(np.concatenate([n - w, n + w]))
        np.testing.assert_allclose(eigh(even, eigvals_only=True), expect, atol=1e-12)

    def test_parity_union_matches_full(self, rng):
        for _ in range(5):
            w, g = rng.uniform(0, 2), rng.uniform(0, 0.9)
            trunc = FockTruncation(80)
            full = eigh(build_hamiltonian(TprhParams(w, g), trunc), eigvals_only=True)
            np.testing.assert_allclose(spectrum(TprhParams(w, g), trunc).eigenvalues, full, atol=1e-10)

    def test_bogoliubov_limit(self):
        g = 0.5
        expect = (math.sqrt(1 - g * g) - 1) / 2
        for sign in (1.0, -1.0):
            lo = eigh(_ladder_block(300, g, sign), eigvals_only=True)[0]
            assert lo == pytest.approx(expect, abs=1e-10)

    def test_zero_omega_mirror(self):
        for g in (0.3, 0.7):
            # truncation edge effects differ; compare the converged low part
            plus = eigh(_ladder_block(300, g, 1.0), eigvals_only=True)[:40]
            minus = eigh(_ladder_block(300, g, -1.0), eigvals_only=True)[:40]
            np.testing.assert_allclose(plus, minus, atol=1e-10)

    def test_variational_monotone(self):
        p = TprhParams(0.9, 0.6)
        lows = [spectrum(p, FockTruncation(n)).eigenvalues[:10] for n in (100, 200, 400)]
        assert np.all(lows[1] <= lows[0] + 1e-12)
        assert np.all(lows[2] <= lows[1] + 1e-12)

    def test_supercritical_guard(self):
        with pytest.raises(SupercriticalCouplingError):
            spectrum(TprhParams(1.0, 1.2), FockTruncation(20))
        res = spectrum(TprhParams(1.0, 1.2), FockTruncation(20), allow_supercritical=True)
        assert res.supercritical and not res.converged

    def test_convergence_gap(self):
        res = spectrum(TprhParams(1.0, 0.4), FockTruncation(200))
        assert res.converged and res.convergence_gap < 1e-10


class TestQesAgreement:
    def test_b1_energy(self):
        res = spectrum(TprhParams(1.0, math.sqrt(15) / 8), FockTruncation(400))
        assert nearest_eigenvalue(res, 1.25)[1] < 1e-6

    def test_b2_energy(self):
        res = spectrum(TprhParams(1.0, 3 * math.sqrt(5) / 8), FockTruncation(600))
        assert nearest_eigenvalue(res, 3 * math.sqrt(19) / 8 - 0.5)[1] < 1e-5

    def test_closed_form_point(self):
        g = closed_form_g(QesBranch("R2", 0), 0.75)[0].g
        energy = -0.5 + 2 * math.sqrt(1 - g * g)
        res = spectrum(TprhParams(0.75, g), FockTruncation(400))
        assert nearest_eigenvalue(res, energy)[1] < 1e-6

    def test_all_branches_moderate_coupling(self):
        for branch in (QesBranch("R2", 0), QesBranch("R2", 1), QesBranch("R3", 2), QesBranch("R3", 3)):
            for w in (0.6, 1.1, 1.9):
                for sol in determinant_roots(branch, w):
                    if not sol.g < 0.9:
                        continue
                    res = spectrum(TprhParams(w, sol.g), FockTruncation(600))
                    assert nearest_eigenvalue(res, sol.energy)[1] < 1e-6, (branch, w, sol.g)
