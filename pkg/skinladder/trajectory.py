# coding: utf-8
'''Quantum-jump trajectories of Slater determinants

A trajectory alternates a no-jump drift with Bernoulli-sampled jumps. Both
keep the state Gaussian: the drift multiplies the orbitals by
G = exp(-i h_eff dt), a jump projects onto the channel mode xi^+ and flips the
sign of the feedback site. The orbitals are re-orthonormalized by a thin QR
after every drift and every jump, which also supplies the norm of the state.
'''

from __future__ import division

import functools
import logging
import warnings
from collections import OrderedDict

import numpy
import scipy.linalg

from skinladder.common.errors import (CoarseTimeStepWarning,
                                      ImpossibleJumpError, NumericalError,
                                      SkinLadderError, TrajectoryError,
                                      UsageError)
from skinladder.model import (LEG_A, LEG_B, build_heff,
                              build_jump_channels, flat_index)
from skinladder.observables import ObservableSeries

logger = logging.getLogger(__name__)

RANK_TOL = 1e-13
OVERLAP_TOL = 1e-12
COARSE_PROBABILITY = 0.1


class SlaterState(object):
    '''Orbitals U (2N x N_p, orthonormal columns) at simulation time `time`'''

    def __init__(self, U, time=0.0):
        self.U = U
        self.time = time

    @property
    def n_particles(self):
        return self.U.shape[1]

    def orthonormality(self):
        '''max |U^+ U - I|'''
        return float(numpy.abs(self.U.conj().T.dot(self.U) -
                               numpy.eye(self.n_particles)).max())


class TrajectoryConfig(object):
    '''Time stepping and seeding of one trajectory

    Args:
        dt (float): time step.
        t_total (float or None): total time; None means 2N, resolved by
            `resolve`.
        sample_interval (float): period of observable recording. It is
            rounded to a whole number of steps.
        seed (int): master seed shared by all trajectories of a run.
        trajectory_id (int): selects the independent random stream.
    '''

    def __init__(self, dt=0.05, t_total=None, sample_interval=1.0, seed=0,
                 trajectory_id=0):
        if not dt > 0:
            raise UsageError("Time step dt must be > 0, got '%s'" % dt)
        if sample_interval < dt:
            raise UsageError("Sample interval %s is shorter than dt=%s" %
                             (sample_interval, dt))
        if t_total is not None and t_total < sample_interval:
            raise UsageError("Total time %s is shorter than the sample "
                             "interval %s" % (t_total, sample_interval))
        if int(seed) != seed or seed < 0 or seed >= 2**64:
            raise UsageError("Seed must be an unsigned 64-bit integer, got "
                             "'%s'" % seed)
        self.dt = float(dt)
        self.t_total = None if t_total is None else float(t_total)
        self.sample_interval = float(sample_interval)
        self.seed = int(seed)
        self.trajectory_id = int(trajectory_id)

    def resolve(self, cfg):
        '''Copy with t_total filled in (2N when unset)'''
        t_total = 2.0 * cfg.N if self.t_total is None else self.t_total
        return TrajectoryConfig(self.dt, t_total, self.sample_interval,
                                self.seed, self.trajectory_id)

    def replace(self, **kwargs):
        values = OrderedDict([("dt", self.dt), ("t_total", self.t_total),
                              ("sample_interval", self.sample_interval),
                              ("seed", self.seed),
                              ("trajectory_id", self.trajectory_id)])
        values.update(kwargs)
        return TrajectoryConfig(**values)

    @property
    def sample_every(self):
        return max(1, int(round(self.sample_interval / self.dt)))

    @property
    def n_steps(self):
        return int(round(self.t_total / self.dt))


def make_rng(seed, trajectory_id):
    '''Philox stream keyed by (seed, trajectory_id)

    Distinct ids give distinct spawn keys of the same seed sequence, hence
    independent counter-based streams.
    '''
    seq = numpy.random.SeedSequence(seed, spawn_key=(trajectory_id,))
    return numpy.random.Generator(numpy.random.Philox(seq))


def basis_state(cfg, occupied):
    U = numpy.zeros((cfg.n_sites, len(occupied)), dtype=complex)
    U[occupied, numpy.arange(len(occupied))] = 1.0
    return SlaterState(U)


def neel_sites(n_sites):
    '''Occupied flattened sites of the pattern 1,0,0,1,1,0,0,1,...'''
    return [s for s in range(n_sites) if s % 4 in (0, 3)]


def neel_initial_state(cfg):
    '''Leg A reads |1010...> and leg B |0101...>, so each leg is half filled'''
    if cfg.N % 2:
        raise UsageError("Neel initial state needs an even N, got N=%d" %
                         cfg.N)
    return basis_state(cfg, neel_sites(cfg.n_sites))


def domain_wall_initial_state(cfg):
    '''Left half of each leg filled, |1...10...0> per leg'''
    if cfg.N % 2:
        raise UsageError("Domain-wall initial state needs an even N, got "
                         "N=%d" % cfg.N)
    occupied = sorted(flat_index(j, leg) for j in range(1, cfg.N // 2 + 1)
                      for leg in (LEG_A, LEG_B))
    return basis_state(cfg, occupied)


INITIAL_STATES = OrderedDict([("neel", neel_initial_state),
                              ("domain-wall", domain_wall_initial_state)])


def initial_state(cfg, name):
    if name not in INITIAL_STATES:
        raise UsageError("Unknown initial state '%s', choose from %s" %
                         (name, ", ".join(INITIAL_STATES)))
    return INITIAL_STATES[name](cfg)


@functools.lru_cache(maxsize=16)
def propagator(cfg, dt):
    '''exp(-i h_eff dt) by scaling and squaring; cached and read-only'''
    if not dt > 0:
        raise UsageError("Time step dt must be > 0, got '%s'" % dt)
    G = scipy.linalg.expm(-1j * dt * build_heff(cfg))
    G.setflags(write=False)
    return G


def _orthonormalize(U, what):
    Q, R = numpy.linalg.qr(U)
    smallest = numpy.abs(numpy.diag(R)).min()
    if smallest < RANK_TOL:
        raise NumericalError("%s left a rank-deficient state: |R_kk| = %g" %
                             (what, smallest))
    return Q


def drift_step(state, G, dt=0.0):
    '''U <- qr(G U).Q; `dt` only advances the clock'''
    return SlaterState(_orthonormalize(G.dot(state.U), "drift step"),
                       state.time + dt)


def _overlaps(U, channels):
    # <a_i|U_k> from the two nonzero entries of each mode
    support = numpy.array([ch.support for ch in channels])
    coeffs = numpy.array([ch.coeffs for ch in channels])
    return numpy.einsum("cs,csk->ck", coeffs.conj(), U[support])


def jump_probabilities(state, channels, gamma, dt):
    '''p_i = gamma dt sum_k |<a_i|U_k>|^2 per channel'''
    p = gamma * dt * numpy.sum(numpy.abs(_overlaps(state.U, channels))**2,
                               axis=1)
    if len(p) and p.max() > COARSE_PROBABILITY:
        warnings.warn("Jump probability %.3g exceeds %g: dt=%g is too coarse"
                      % (p.max(), COARSE_PROBABILITY, dt),
                      CoarseTimeStepWarning)
    return p


def apply_jump(state, ch):
    '''Project onto the channel mode and apply the feedback sign

    The column with the largest overlap with the mode becomes the pivot; the
    other columns are made orthogonal to the mode against it, the pivot is
    replaced by the mode itself and row p changes sign.
    '''
    U = state.U.copy()
    ov = ch.coeffs.conj().dot(U[ch.support])
    if numpy.sum(numpy.abs(ov)**2) <= OVERLAP_TOL:
        raise ImpossibleJumpError("impossible jump on channel %r: overlap %g"
                                  % (ch, numpy.sum(numpy.abs(ov)**2)))
    # any column with nonzero overlap spans the same post-jump state; the
    # largest one keeps the elimination below well scaled
    k = int(numpy.argmax(numpy.abs(ov)))
    U[:, [0, k]] = U[:, [k, 0]]
    ov[[0, k]] = ov[[k, 0]]
    U[:, 1:] -= numpy.outer(U[:, 0], ov[1:] / ov[0])
    U[:, 0] = ch.a
    U[ch.p, :] *= -1.0
    return SlaterState(_orthonormalize(U, "jump %r" % ch), state.time)


def run_trajectory(cfg, tcfg, initial="neel", state=None):
    '''Evolve one trajectory and record observables every sample interval

    Within a step the channels whose uniform draw falls below their
    probability all fire, in channel order, with the probabilities of the
    step start.

    Raises:
        TrajectoryError: wrapping the drift or jump failure with its step.
    '''
    tcfg = tcfg.resolve(cfg)
    if state is None:
        state = initial_state(cfg, initial)
    G = propagator(cfg, tcfg.dt)
    channels = build_jump_channels(cfg)
    rng = make_rng(tcfg.seed, tcfg.trajectory_id)
    series = ObservableSeries(cfg, tcfg.trajectory_id)
    jumps = 0
    series.record(0.0, state.U, jumps)
    for step in range(1, tcfg.n_steps + 1):
        try:
            state = drift_step(state, G, tcfg.dt)
            p = jump_probabilities(state, channels, cfg.gamma, tcfg.dt)
            fired = numpy.flatnonzero(rng.random(len(channels)) < p)
            for i in fired:
                state = apply_jump(state, channels[i])
        except SkinLadderError as e:
            raise TrajectoryError(step, e)
        jumps += len(fired)
        if step % tcfg.sample_every == 0:
            series.record(step * tcfg.dt, state.U, jumps)
    logger.debug("trajectory %d: %d steps, %d jumps", tcfg.trajectory_id,
                 tcfg.n_steps, jumps)
    return series.finalize()


def sample_times(cfg, tcfg):
    '''Times at which `run_trajectory` records observables'''
    tcfg = tcfg.resolve(cfg)
    k = numpy.arange(0, tcfg.n_steps + 1, tcfg.sample_every)
    return k * tcfg.dt

