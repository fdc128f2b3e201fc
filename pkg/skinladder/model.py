# coding: utf-8
'''Single-particle operators of the measured-feedback two-leg ladder

Sites are flattened rung by rung, leg A before leg B. Documentation uses the
1-based map (j, A) -> 2j-1, (j, B) -> 2j; arrays are 0-based, so internally
(j, A) -> 2j-2 and (j, B) -> 2j-1. Rungs stay 1-based everywhere.

Each bond j of each leg carries one Lindblad operator

    L_{j,v} = exp(i pi n_{j+1,v}) xi^+_{j,v} xi_{j,v}
    xi_{j,A} = (c_{j,A} + i c_{j+1,A}) / sqrt(2)
    xi_{j,B} = (c_{j,B} - i c_{j+1,B}) / sqrt(2)

which is stored as a `JumpChannel`: the creation coefficients `a` of
xi^+ = sum_k a_k c^+_k and the site `p` of the feedback phase. Channels are
ordered rung-major, A before B; that order is also the order in which jumps
fire inside one trajectory step.
'''

from __future__ import division

import math
from collections import OrderedDict, namedtuple

import numpy

from skinladder.common.errors import UsageError

LEG_A = "A"
LEG_B = "B"
LEGS = (LEG_A, LEG_B)

SiteIndex = namedtuple("SiteIndex", ["rung", "leg", "flat"])


class LadderConfig(object):
    '''Physical parameters of the ladder

    Args:
        N (int): number of rungs, at least 2.
        t (float): intrachain hopping.
        delta (float): interchain (rung) hopping.
        gamma (float): dissipation strength, non-negative.
    '''

    def __init__(self, N, t=1.0, delta=0.0, gamma=0.5):
        if int(N) != N or N < 2:
            raise UsageError("Invalid rung count N=%s: need an integer >= 2" % N)
        for name, value in (("t", t), ("delta", delta), ("gamma", gamma)):
            if not math.isfinite(value):
                raise UsageError("Parameter %s must be finite, got '%s'" %
                                 (name, value))
        if gamma < 0:
            raise UsageError("Dissipation gamma must be >= 0, got '%s'" % gamma)
        if delta < 0:
            raise UsageError("Interchain hopping delta must be >= 0, got '%s'"
                             % delta)
        self.N = int(N)
        self.t = float(t)
        self.delta = float(delta)
        self.gamma = float(gamma)

    @property
    def n_sites(self):
        return 2 * self.N

    @property
    def n_channels(self):
        return 2 * (self.N - 1)

    def replace(self, **kwargs):
        values = self.as_dict()
        values.update(kwargs)
        return LadderConfig(**values)

    def as_dict(self):
        return OrderedDict([("N", self.N), ("t", self.t),
                            ("delta", self.delta), ("gamma", self.gamma)])

    def __eq__(self, other):
        return isinstance(other, LadderConfig) and \
            self.as_dict() == other.as_dict()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(tuple(self.as_dict().items()))

    def __repr__(self):
        return "LadderConfig(N=%d, t=%r, delta=%r, gamma=%r)" % (
            self.N, self.t, self.delta, self.gamma)


def flat_index(rung, leg):
    '''0-based flattened index of site (rung, leg), rung 1-based'''
    if leg not in LEGS:
        raise UsageError("Unknown leg '%s'" % leg)
    return 2 * (rung - 1) + (0 if leg == LEG_A else 1)


def site_of(flat):
    '''Inverse of `flat_index`'''
    return SiteIndex(flat // 2 + 1, LEGS[flat % 2], flat)


def leg_sites(cfg, leg):
    '''Flattened indices of one leg in rung order'''
    return numpy.array([flat_index(j, leg) for j in range(1, cfg.N + 1)])


class JumpChannel(object):
    '''One Lindblad operator e^{i pi n_p} xi^+ xi with xi^+ = sum_k a_k c^+_k

    Only two entries of `a` are nonzero; they are also kept as `support`
    (flattened indices) and `coeffs` so trajectory code can use the sparsity.
    '''

    def __init__(self, leg, rung, a, p):
        self.leg = leg
        self.rung = rung
        self.a = a
        self.p = p
        self.support = numpy.flatnonzero(a)
        self.coeffs = a[self.support]

    def __repr__(self):
        return "JumpChannel(%d%s, p=%d)" % (self.rung, self.leg, self.p)


def build_jump_channels(cfg):
    '''All 2(N-1) channels, ordered (1,A), (1,B), (2,A), ...'''
    channels = []
    s = 1.0 / math.sqrt(2.0)
    # xi^+_{j,A} = (c^+_j - i c^+_{j+1}) / sqrt2, xi^+_{j,B} has +i
    phase = {LEG_A: -1j, LEG_B: 1j}
    for j in range(1, cfg.N):
        for leg in LEGS:
            a = numpy.zeros(cfg.n_sites, dtype=complex)
            a[flat_index(j, leg)] = s
            a[flat_index(j + 1, leg)] = phase[leg] * s
            channels.append(JumpChannel(leg, j, a, flat_index(j + 1, leg)))
    return channels


def build_h0(cfg):
    '''Hermitian ladder Hamiltonian h_0 with open boundaries'''
    h = numpy.zeros((cfg.n_sites, cfg.n_sites), dtype=complex)
    for leg in LEGS:
        for j in range(1, cfg.N):
            m, n = flat_index(j, leg), flat_index(j + 1, leg)
            h[m, n] = h[n, m] = cfg.t
    for j in range(1, cfg.N + 1):
        m, n = flat_index(j, LEG_A), flat_index(j, LEG_B)
        h[m, n] = h[n, m] = cfg.delta
    return h


def build_heff(cfg):
    '''Non-Hermitian effective Hamiltonian h_0 - (i gamma/2) sum a a^+

    Written out term by term: leg A hops forward (c^+_j c_{j+1}) with
    t + gamma/4 and backward with t - gamma/4, leg B the other way round, and
    each site carries -i gamma/4 per bond it belongs to.
    '''
    g = cfg.gamma / 4.0
    h = build_h0(cfg)
    forward = {LEG_A: cfg.t + g, LEG_B: cfg.t - g}
    backward = {LEG_A: cfg.t - g, LEG_B: cfg.t + g}
    for leg in LEGS:
        for j in range(1, cfg.N):
            m, n = flat_index(j, leg), flat_index(j + 1, leg)
            h[m, n] = forward[leg]
            h[n, m] = backward[leg]
            h[m, m] -= 1j * g
            h[n, n] -= 1j * g
    return h


def rotation_permutation(cfg):
    '''Permutation matrix of the rotation (j, A) <-> (N+1-j, B)'''
    P = numpy.zeros((cfg.n_sites, cfg.n_sites))
    for j in range(1, cfg.N + 1):
        P[flat_index(cfg.N + 1 - j, LEG_B), flat_index(j, LEG_A)] = 1.0
        P[flat_index(cfg.N + 1 - j, LEG_A), flat_index(j, LEG_B)] = 1.0
    return P
