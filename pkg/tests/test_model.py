# coding: utf-8

import math
import unittest

import numpy

from skinladder.common.errors import UsageError
from skinladder.model import (LEG_A, LEG_B, LadderConfig, build_h0,
                              build_heff, build_jump_channels, flat_index,
                              leg_sites, rotation_permutation, site_of)


class TestLadderConfig(unittest.TestCase):
    def test_invalid(self):
        # Each case as kwargs of an invalid config
        cases = [dict(N=1), dict(N=2.5), dict(N=4, gamma=-0.1),
                 dict(N=4, delta=-1.0), dict(N=4, t=float("nan")),
                 dict(N=4, gamma=float("inf"))]
        for kwargs in cases:
            with self.assertRaises(UsageError):
                LadderConfig(**kwargs)

    def test_defaults_and_replace(self):
        cfg = LadderConfig(10)
        self.assertEqual((cfg.t, cfg.delta, cfg.gamma), (1.0, 0.0, 0.5))
        self.assertEqual(cfg.n_sites, 20)
        self.assertEqual(cfg.n_channels, 18)
        other = cfg.replace(N=20, delta=0.01)
        self.assertEqual((other.N, other.delta, other.gamma), (20, 0.01, 0.5))
        self.assertEqual(cfg, LadderConfig(10))
        self.assertNotEqual(cfg, other)
        self.assertEqual(hash(cfg), hash(LadderConfig(10)))


class TestIndexing(unittest.TestCase):
    def test_flat_index(self):
        # Each case as ((rung, leg), flat)
        cases = [((1, LEG_A), 0), ((1, LEG_B), 1), ((3, LEG_A), 4),
                 ((3, LEG_B), 5), ((10, LEG_B), 19)]
        for args, expect in cases:
            self.assertEqual(flat_index(*args), expect)
            site = site_of(expect)
            self.assertEqual((site.rung, site.leg), args)

    def test_unknown_leg(self):
        self.assertRaises(UsageError, flat_index, 1, "C")

    def test_leg_sites(self):
        cfg = LadderConfig(3)
        self.assertEqual(list(leg_sites(cfg, LEG_A)), [0, 2, 4])
        self.assertEqual(list(leg_sites(cfg, LEG_B)), [1, 3, 5])


class TestOperators(unittest.TestCase):
    def test_channels(self):
        cfg = LadderConfig(3)
        channels = build_jump_channels(cfg)
        self.assertEqual([(c.rung, c.leg) for c in channels],
                         [(1, LEG_A), (1, LEG_B), (2, LEG_A), (2, LEG_B)])
        self.assertEqual([c.p for c in channels], [2, 3, 4, 5])
        s = 1.0 / math.sqrt(2.0)
        a = channels[0].a
        self.assertAlmostEqual(a[0], s)
        self.assertAlmostEqual(a[2], -1j * s)
        self.assertAlmostEqual(channels[1].a[3], 1j * s)
        for c in channels:
            self.assertAlmostEqual(numpy.linalg.norm(c.a), 1.0)
            self.assertEqual(len(c.support), 2)

    def test_h0(self):
        cfg = LadderConfig(4, t=1.0, delta=0.3)
        h = build_h0(cfg)
        self.assertTrue(numpy.allclose(h, h.conj().T))
        self.assertEqual(h[0, 2], 1.0)
        self.assertEqual(h[0, 1], 0.3)
        self.assertEqual(h[0, 3], 0.0)

    def test_heff_matches_dissipator_sum(self):
        for delta in (0.0, 0.01, 1.0):
            cfg = LadderConfig(5, delta=delta, gamma=0.7)
            ref = build_h0(cfg) - 0.5j * cfg.gamma * sum(
                numpy.outer(c.a, c.a.conj()) for c in build_jump_channels(cfg))
            self.assertLess(numpy.abs(build_heff(cfg) - ref).max(), 1e-14)

    def test_heff_hatano_nelson_hoppings(self):
        cfg = LadderConfig(4, gamma=0.4)
        h = build_heff(cfg)
        g = cfg.gamma / 4
        a1, a2 = flat_index(1, LEG_A), flat_index(2, LEG_A)
        b1, b2 = flat_index(1, LEG_B), flat_index(2, LEG_B)
        self.assertAlmostEqual(h[a1, a2], cfg.t + g)
        self.assertAlmostEqual(h[a2, a1], cfg.t - g)
        self.assertAlmostEqual(h[b1, b2], cfg.t - g)
        self.assertAlmostEqual(h[b2, b1], cfg.t + g)
        self.assertAlmostEqual(h[a1, a1], -1j * g)
        self.assertAlmostEqual(h[a2, a2], -2j * g)

    def test_gamma_zero_is_hermitian(self):
        cfg = LadderConfig(4, delta=0.2, gamma=0.0)
        self.assertTrue(numpy.allclose(build_heff(cfg), build_h0(cfg)))

    def test_rotation_symmetry(self):
        cfg = LadderConfig(5, delta=0.3, gamma=0.5)
        P = rotation_permutation(cfg)
        self.assertTrue(numpy.allclose(P.dot(P.T), numpy.eye(cfg.n_sites)))
        for h in (build_h0(cfg), build_heff(cfg)):
            self.assertLess(numpy.abs(P.dot(h).dot(P.T) - h).max(), 1e-14)


if __name__ == "__main__":
    unittest.main()
