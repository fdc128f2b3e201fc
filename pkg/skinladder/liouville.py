# coding: utf-8
'''Exact single-particle Lindbladian of the ladder

In the one-particle sector the density matrix is a 2N x 2N matrix and the
Lindbladian acts on its row-major vectorization |rho>> = sum rho_ij |i>|j>:

    L = -i (h_eff (x) I - I (x) h_eff^*) + gamma sum_ch L_ch (x) L_ch^*

with L_ch = (I - 2 e_p e_p^+) a a^+ the first-quantized jump operator. The
matrix is dense; its dimension (2N)^2 is capped by `Tolerances.memory_cap`.
'''

from __future__ import division

import logging
from collections import OrderedDict

import numpy
import scipy.linalg
import scipy.sparse

from skinladder.common.errors import (NumericalError, SkinLadderError,
                                      SteadyStateError, UsageError,
                                      check_memory)
from skinladder.common.utils import linear_fit
from skinladder.model import (LEG_A, LEG_B, LEGS, build_heff,
                              build_jump_channels, leg_sites)
from skinladder.observables import scaling_fit

logger = logging.getLogger(__name__)

# A dense eigendecomposition holds the matrix, its eigenvectors and a LAPACK
# working copy at the same time.
EIG_WORKSPACE_FACTOR = 4


class Tolerances(object):
    '''Numerical thresholds of the exact diagonalization'''

    def __init__(self, tol_zero=1e-8, tol_pos=1e-9, memory_cap=8 * 2**30,
                 residual=1e-7, psd=1e-8):
        self.tol_zero = tol_zero
        self.tol_pos = tol_pos
        self.memory_cap = memory_cap
        self.residual = residual
        self.psd = psd


DEFAULT_TOLERANCES = Tolerances()


class LiouvillianMatrix(object):
    '''Vectorized Lindbladian on the density-matrix block spanned by `sites`

    `sites` are the flattened indices the block lives on: all 2N sites for the
    full one-particle sector, one leg after `restrict_to_leg`.
    '''

    def __init__(self, entries, cfg, sites):
        self.entries = entries
        self.cfg = cfg
        self.sites = numpy.asarray(sites)

    @property
    def dim(self):
        return self.entries.shape[0]

    def trace_row(self):
        '''Vectorized identity; trace preservation means it is a left null vector'''
        return numpy.eye(len(self.sites)).ravel()


class SpectrumResult(object):
    '''Eigenvalues, gap and (optionally) steady state of a Liouvillian'''

    def __init__(self, cfg, eigenvalues, gap, steady_state=None, sites=None):
        self.cfg = cfg
        self.eigenvalues = eigenvalues
        self.gap = gap
        self.steady_state = steady_state
        self.sites = sites
        if steady_state is not None:
            diag = numpy.real(numpy.diag(steady_state))
            self.density_A = diag[leg_sites(cfg, LEG_A)]
            self.density_B = diag[leg_sites(cfg, LEG_B)]
        else:
            self.density_A = self.density_B = None

    @property
    def max_real(self):
        return float(numpy.max(self.eigenvalues.real))

    @property
    def real_range(self):
        return float(numpy.max(numpy.abs(self.eigenvalues.real)))


def jump_sp_matrix(ch):
    '''First-quantized jump operator (I - 2 e_p e_p^+) a a^+ of one channel'''
    L = numpy.outer(ch.a, ch.a.conj())
    L[ch.p, :] *= -1.0
    return L


def jump_sp_matrices(cfg):
    return [jump_sp_matrix(ch) for ch in build_jump_channels(cfg)]


def liouvillian_bytes(cfg):
    d2 = cfg.n_sites**2
    return EIG_WORKSPACE_FACTOR * 16 * d2 * d2


def vectorize(h_eff, jumps, gamma, dense=True):
    '''-i(h (x) I - I (x) h^*) + gamma sum L (x) L^*, built from sparse krons

    Returns a dense array, or the CSR matrix itself when `dense` is False.
    '''
    d = h_eff.shape[0]
    eye = scipy.sparse.identity(d, dtype=complex, format="csr")
    h = scipy.sparse.csr_matrix(h_eff)
    L = -1j * (scipy.sparse.kron(h, eye) - scipy.sparse.kron(eye, h.conj()))
    for J in jumps:
        J = scipy.sparse.csr_matrix(J)
        L = L + gamma * scipy.sparse.kron(J, J.conj())
    return L.toarray() if dense else L.tocsr()


def build_liouvillian(cfg, tol=DEFAULT_TOLERANCES):
    '''Vectorized single-particle Lindbladian of the full ladder

    Raises:
        CapacityError: if diagonalizing it would exceed `tol.memory_cap`.
    '''
    check_memory("Liouvillian of dimension %d" % cfg.n_sites**2,
                 liouvillian_bytes(cfg), tol.memory_cap)
    logger.debug("building Liouvillian for %r", cfg)
    entries = vectorize(build_heff(cfg), jump_sp_matrices(cfg), cfg.gamma)
    return LiouvillianMatrix(entries, cfg, numpy.arange(cfg.n_sites))


def restrict_to_leg(L, leg):
    '''Block of `L` with both density-matrix indices on `leg`

    The block is invariant only when the legs decouple, so delta must be 0.
    '''
    if L.cfg.delta != 0:
        raise UsageError("Leg restriction needs delta=0, got delta=%s" %
                         L.cfg.delta)
    if leg not in LEGS:
        raise UsageError("Unknown leg '%s'" % leg)
    d = L.cfg.n_sites
    sites = leg_sites(L.cfg, leg)
    idx = (sites[:, None] * d + sites[None, :]).ravel()
    return LiouvillianMatrix(L.entries[numpy.ix_(idx, idx)], L.cfg, sites)


def zero_modes(eigenvalues, tol):
    return numpy.flatnonzero(numpy.abs(eigenvalues) < tol.tol_zero)


def check_half_plane(eigenvalues, tol):
    if numpy.max(eigenvalues.real) > tol.tol_pos:
        raise NumericalError("Eigenvalue with Re=%g > %g found" %
                             (numpy.max(eigenvalues.real), tol.tol_pos))


def eigenvalues(L, tol=DEFAULT_TOLERANCES):
    '''All eigenvalues, without any steady-state requirement'''
    w = scipy.linalg.eigvals(L.entries)
    check_half_plane(w, tol)
    return w


def diagonalize(L, vectors=True, tol=DEFAULT_TOLERANCES):
    '''Full eigendecomposition, gap and steady state

    Args:
        L (LiouvillianMatrix): the matrix to diagonalize.
        vectors (bool): compute eigenvectors and the steady state. Scans that
            only need the gap pass False.

    Raises:
        SteadyStateError: no zero mode, or a degenerate steady sector.
        NumericalError: eigenvalues in the right half-plane, or an inaccurate
            or non-physical steady state.
    '''
    if vectors:
        w, V = scipy.linalg.eig(L.entries, right=True)
    else:
        w = scipy.linalg.eigvals(L.entries)
    check_half_plane(w, tol)
    zeros = zero_modes(w, tol)
    if len(zeros) == 0:
        raise SteadyStateError("no steady state found", 0)
    if len(zeros) > 1:
        raise SteadyStateError(
            "degenerate steady sector: %d zero modes" % len(zeros),
            len(zeros))
    rest = numpy.delete(w, zeros)
    gap = float(-numpy.max(rest.real)) if len(rest) else 0.0
    gap = max(gap, 0.0)
    if not vectors:
        return SpectrumResult(L.cfg, w, gap, sites=L.sites)

    k = zeros[0]
    v = V[:, k]
    norm = numpy.abs(L.entries).max()
    residual = numpy.linalg.norm(L.entries.dot(v) - w[k] * v)
    threshold = tol.residual * max(norm, 1.0)
    if residual > threshold:
        raise NumericalError("Steady-state residual %g exceeds %g" %
                             (residual, threshold))
    rho = steady_state_from_vector(v, L, tol)
    return SpectrumResult(L.cfg, w, gap, steady_state=rho, sites=L.sites)


def steady_state_from_vector(v, L, tol=DEFAULT_TOLERANCES):
    '''Reshape, fix phase and trace, Hermitize and embed into 2N x 2N'''
    n = len(L.sites)
    block = v.reshape(n, n)
    block = block / numpy.trace(block)
    block = 0.5 * (block + block.conj().T)
    block = block / numpy.trace(block).real
    lowest = numpy.linalg.eigvalsh(block).min()
    if lowest < -tol.psd:
        raise NumericalError("Steady state is not positive: eigenvalue %g" %
                             lowest)
    d = L.cfg.n_sites
    rho = numpy.zeros((d, d), dtype=complex)
    rho[numpy.ix_(L.sites, L.sites)] = block
    return rho


def solve(cfg, vectors=True, tol=DEFAULT_TOLERANCES):
    '''Spectrum, gap and steady state of the full single-particle Liouvillian

    At delta=0 the two legs decouple and the steady sector is two-fold
    degenerate. The spectrum and gap are then taken from the full matrix with
    both zero modes excluded, and the steady state is the leg-A one.
    '''
    L = build_liouvillian(cfg, tol)
    if cfg.delta != 0:
        return diagonalize(L, vectors=vectors, tol=tol)
    w = eigenvalues(L, tol)
    zeros = zero_modes(w, tol)
    if len(zeros) != len(LEGS):
        raise SteadyStateError("expected one zero mode per decoupled leg, "
                               "found %d" % len(zeros), len(zeros))
    gap = max(float(-numpy.max(numpy.delete(w, zeros).real)), 0.0)
    if not vectors:
        return SpectrumResult(cfg, w, gap, sites=L.sites)
    leg = diagonalize(restrict_to_leg(L, LEG_A), vectors=True, tol=tol)
    return SpectrumResult(cfg, w, gap, steady_state=leg.steady_state,
                          sites=leg.sites)


def _gap_point(args):
    cfg, tol = args
    try:
        res = solve(cfg, vectors=False, tol=tol)
        return OrderedDict([("N", cfg.N), ("delta", cfg.delta),
                            ("gap", res.gap), ("error", "")])
    except SkinLadderError as e:
        logger.warning("gap scan point N=%d delta=%g failed: %s", cfg.N,
                       cfg.delta, e)
        return OrderedDict([("N", cfg.N), ("delta", cfg.delta),
                            ("gap", float("nan")), ("error", str(e))])


def gap_scan(cfg_base, Ns, deltas, tol=DEFAULT_TOLERANCES, mapper=map):
    '''Liouvillian gap on the N x delta grid

    Failed points are kept as rows with gap=nan and the error text. `mapper`
    may be any map-like callable (e.g. an executor's map) to run points in
    parallel; rows come back in grid order either way.

    Returns:
        (rows, slopes): rows as OrderedDicts (N, delta, gap, error); slopes
        maps delta to the log-log fit report of gap against N (None if fewer
        than three points succeeded).
    '''
    grid = [(cfg_base.replace(N=n, delta=d), tol) for d in deltas for n in Ns]
    rows = list(mapper(_gap_point, grid))
    slopes = OrderedDict()
    for d in deltas:
        points = [(r["N"], r["gap"]) for r in rows
                  if r["delta"] == d and numpy.isfinite(r["gap"]) and
                  r["gap"] > 0]
        slopes[d] = scaling_fit(points, "powerlaw") if len(points) >= 3 \
            else None
    return rows, slopes


def _range_point(args):
    cfg, tol = args
    w = eigenvalues(build_liouvillian(cfg, tol), tol)
    return OrderedDict([("N", cfg.N),
                        ("max_abs_re", float(numpy.max(numpy.abs(w.real))))])


def spectral_range(cfg, Ns, tol=DEFAULT_TOLERANCES, mapper=map):
    '''Width max|Re lambda| of the Liouvillian spectrum for each N

    Only the eigenvalues are needed, so degenerate steady sectors (delta=0 or
    gamma=0) are fine here.
    '''
    return list(mapper(_range_point, [(cfg.replace(N=n), tol) for n in Ns]))


def steady_profile(cfg, tol=DEFAULT_TOLERANCES, leg=None):
    '''Steady state densities; at delta=0 `leg` selects the occupied leg'''
    L = build_liouvillian(cfg, tol)
    if cfg.delta == 0:
        L = restrict_to_leg(L, leg or LEG_A)
    return diagonalize(L, vectors=True, tol=tol)


def _profile_point(args):
    cfg, tol = args
    return steady_profile(cfg, tol)


def steady_profile_scan(cfg_base, Ns, deltas, tol=DEFAULT_TOLERANCES,
                        mapper=map):
    '''Density rows (N, delta, rung, leg, density) for every grid point'''
    grid = [cfg_base.replace(N=n, delta=d) for d in deltas for n in Ns]
    results = list(mapper(_profile_point, [(c, tol) for c in grid]))
    rows = []
    for cfg, res in zip(grid, results):
        for j in range(cfg.N):
            rows.append((cfg.N, cfg.delta, j + 1, LEG_A, res.density_A[j]))
            rows.append((cfg.N, cfg.delta, j + 1, LEG_B, res.density_B[j]))
    return rows, results


def log_linear_fit(values, rungs=None):
    '''Fit log(values) against rung index (1-based by default)'''
    values = numpy.asarray(values, dtype=float)
    if rungs is None:
        rungs = numpy.arange(1, len(values) + 1)
    return linear_fit(rungs, numpy.log(values))


def skin_crossover(density, edge_window=None):
    '''Rung where the density leaves the exponential skin near its heavy edge

    The log-density of the `edge_window` rungs next to the heavier edge is fit
    by a line; the crossover is the first rung, walking inwards, whose
    log-density deviates from that line by more than 1. Returns None when the
    whole profile follows the edge exponential.
    '''
    density = numpy.asarray(density, dtype=float)
    n = len(density)
    flipped = density[-1] > density[0]
    profile = density[::-1] if flipped else density
    window = edge_window or max(3, n // 10)
    fit = log_linear_fit(profile[:window])
    rungs = numpy.arange(1, n + 1)
    expected = fit["slope"] * rungs + fit["intercept"]
    with numpy.errstate(divide="ignore"):
        deviation = numpy.abs(numpy.log(profile) - expected)
    beyond = numpy.flatnonzero(deviation[window:] > 1.0)
    if len(beyond) == 0:
        return None
    k = window + beyond[0] + 1
    return int(n + 1 - k) if flipped else int(k)
