# coding: utf-8

import math
import unittest
from unittest import mock

import numpy
import scipy.linalg

from skinladder.common.errors import (CapacityError, EXIT_CAPACITY,
                                      NumericalError, SteadyStateError,
                                      UsageError)
from skinladder.common.utils import conjugation_defect
from skinladder.liouville import (LEG_A, Tolerances, build_liouvillian,
                                  diagonalize, gap_scan, jump_sp_matrix,
                                  jump_sp_matrices,
                                  log_linear_fit, restrict_to_leg,
                                  skin_crossover, solve, spectral_range,
                                  steady_profile, steady_profile_scan)
from skinladder.model import LadderConfig, build_heff, build_jump_channels


def lindblad_rhs(cfg, rho):
    h = build_heff(cfg)
    out = -1j * (h.dot(rho) - rho.dot(h.conj().T))
    for L in jump_sp_matrices(cfg):
        out += cfg.gamma * L.dot(rho).dot(L.conj().T)
    return out


class TestBuild(unittest.TestCase):
    def test_jump_matrix(self):
        cfg = LadderConfig(2)
        channels = build_jump_channels(cfg)
        for ch in channels:
            L = jump_sp_matrix(ch)
            self.assertEqual(numpy.linalg.matrix_rank(L), 1)
            self.assertAlmostEqual(numpy.trace(L.conj().T.dot(L)).real, 1.0)
        # channel (1, A) on the first site: (I - 2 e_p e_p^+) a / sqrt(2)
        ch = channels[0]
        expect = ch.a / math.sqrt(2.0)
        expect[ch.p] *= -1.0
        got = jump_sp_matrix(ch).dot(numpy.eye(4)[:, 0])
        self.assertLess(numpy.abs(got - expect).max(), 1e-15)

    def test_closed_system(self):
        cfg = LadderConfig(3, delta=0.2, gamma=0.0)
        w = numpy.linalg.eigvals(build_liouvillian(cfg).entries)
        self.assertLess(numpy.abs(w.real).max(), 1e-12)
        rows = spectral_range(cfg, [3, 4])
        for r in rows:
            self.assertLess(r["max_abs_re"], 1e-12)

    def test_vectorization_convention(self):
        cfg = LadderConfig(2, delta=0.3, gamma=0.5)
        L = build_liouvillian(cfg)
        rng = numpy.random.default_rng(1)
        rho = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        got = L.entries.dot(rho.ravel()).reshape(4, 4)
        self.assertLess(numpy.abs(got - lindblad_rhs(cfg, rho)).max(), 1e-12)

    def test_trace_preservation(self):
        L = build_liouvillian(LadderConfig(3, delta=0.1, gamma=0.5))
        self.assertEqual(L.dim, 36)
        self.assertLess(numpy.abs(L.trace_row().dot(L.entries)).max(), 1e-12)

    def test_capacity(self):
        tol = Tolerances(memory_cap=1000)
        with self.assertRaises(CapacityError) as ctx:
            build_liouvillian(LadderConfig(4), tol)
        self.assertEqual(ctx.exception.exit_code, EXIT_CAPACITY)
        self.assertIn("bytes", str(ctx.exception))


class TestDiagonalize(unittest.TestCase):
    def test_unique_steady_state(self):
        cfg = LadderConfig(3, delta=0.1, gamma=0.5)
        res = diagonalize(build_liouvillian(cfg))
        self.assertEqual(len(res.eigenvalues), 36)
        self.assertLessEqual(res.max_real, 1e-9)
        self.assertLess(conjugation_defect(res.eigenvalues), 1e-8)
        self.assertGreater(res.gap, 0.0)
        rho = res.steady_state
        self.assertLess(numpy.abs(rho - rho.conj().T).max(), 1e-12)
        self.assertAlmostEqual(numpy.trace(rho).real, 1.0, places=12)
        self.assertGreater(numpy.linalg.eigvalsh(rho).min(), -1e-8)
        self.assertAlmostEqual(res.density_A.sum() + res.density_B.sum(), 1.0,
                               places=12)

    def test_rotation_symmetric_densities(self):
        for N in (3, 6):
            res = solve(LadderConfig(N, delta=0.3, gamma=0.5))
            self.assertLess(
                numpy.abs(res.density_A - res.density_B[::-1]).max(), 1e-8)

    def test_decoupled_legs_are_degenerate(self):
        L = build_liouvillian(LadderConfig(4, delta=0.0, gamma=0.5))
        with self.assertRaises(SteadyStateError) as ctx:
            diagonalize(L)
        self.assertEqual(ctx.exception.count, 2)

    def test_single_leg_profile(self):
        cfg = LadderConfig(10, delta=0.0, gamma=0.5)
        res = diagonalize(restrict_to_leg(build_liouvillian(cfg), LEG_A))
        self.assertTrue(numpy.all(res.density_B == 0.0))
        self.assertAlmostEqual(res.density_A.sum(), 1.0, places=10)
        # leg A is pushed towards rung 1
        self.assertGreater(res.density_A[0], res.density_A[-1])
        fit = log_linear_fit(res.density_A)
        self.assertLess(fit["slope"], 0.0)
        self.assertGreater(fit["r_squared"], 0.99)

    def test_restrict_needs_decoupled_legs(self):
        L = build_liouvillian(LadderConfig(3, delta=0.1))
        self.assertRaises(UsageError, restrict_to_leg, L, LEG_A)

    def test_solve_decoupled(self):
        res = solve(LadderConfig(4, delta=0.0, gamma=0.5))
        self.assertEqual(len(res.eigenvalues), 64)
        self.assertGreater(res.gap, 0.0)
        self.assertTrue(numpy.all(res.density_B == 0.0))
        self.assertEqual(list(steady_profile(
            LadderConfig(4, delta=0.0)).density_A), list(res.density_A))

    def test_gap_only(self):
        res = solve(LadderConfig(4, delta=0.5), vectors=False)
        self.assertIsNone(res.steady_state)
        self.assertGreater(res.gap, 0.0)

    def test_residual_message_names_threshold(self):
        real_eig = scipy.linalg.eig

        def noisy_eig(a, right=True):
            w, V = real_eig(a, right=right)
            noise = numpy.random.default_rng(0).standard_normal(V.shape)
            return w, V + 1e-3 * noise

        L = build_liouvillian(LadderConfig(3, delta=0.5, gamma=0.5))
        threshold = 1e-7 * max(numpy.abs(L.entries).max(), 1.0)
        with mock.patch("skinladder.liouville.scipy.linalg.eig",
                        side_effect=noisy_eig):
            with self.assertRaises(NumericalError) as ctx:
                diagonalize(L)
        self.assertIn("exceeds %g" % threshold, str(ctx.exception))


class TestScans(unittest.TestCase):
    def test_gap_scan(self):
        rows, slopes = gap_scan(LadderConfig(3, gamma=0.5), [3, 4, 5],
                                [0.5, 1.0])
        self.assertEqual(len(rows), 6)
        self.assertEqual([(r["N"], r["delta"]) for r in rows],
                         [(3, 0.5), (4, 0.5), (5, 0.5), (3, 1.0), (4, 1.0),
                          (5, 1.0)])
        for r in rows:
            self.assertEqual(r["error"], "")
            self.assertGreater(r["gap"], 0.0)
        self.assertEqual(list(slopes.keys()), [0.5, 1.0])
        self.assertEqual(slopes[0.5]["model"], "powerlaw")

    def test_gap_scan_records_failures(self):
        rows, slopes = gap_scan(LadderConfig(3), [3, 4], [0.5],
                                tol=Tolerances(memory_cap=1000))
        self.assertEqual(len(rows), 2)
        for r in rows:
            self.assertTrue(numpy.isnan(r["gap"]))
            self.assertIn("memory cap", r["error"])
        self.assertIsNone(slopes[0.5])

    def test_spectral_range(self):
        rows = spectral_range(LadderConfig(3, delta=0.01), [3, 4])
        self.assertEqual([r["N"] for r in rows], [3, 4])
        for r in rows:
            self.assertGreater(r["max_abs_re"], 0.0)

    def test_steady_profile_scan(self):
        rows, results = steady_profile_scan(LadderConfig(3), [3, 4],
                                            [0.0, 0.5])
        self.assertEqual(len(results), 4)
        self.assertEqual(len(rows), 2 * (3 + 4 + 3 + 4))
        for N in (3, 4):
            for d in (0.0, 0.5):
                total = sum(r[4] for r in rows if r[0] == N and r[1] == d)
                self.assertAlmostEqual(total, 1.0, places=10)


class TestSkinCrossover(unittest.TestCase):
    def test_pure_exponential(self):
        density = numpy.exp(-0.5 * numpy.arange(1, 21))
        self.assertIsNone(skin_crossover(density))

    def test_exponential_then_plateau(self):
        x = numpy.arange(1, 31)
        density = numpy.where(x <= 10, numpy.exp(-x), numpy.exp(-9.5))
        self.assertEqual(skin_crossover(density), 11)
        self.assertEqual(skin_crossover(density[::-1]), 20)


if __name__ == "__main__":
    unittest.main()
