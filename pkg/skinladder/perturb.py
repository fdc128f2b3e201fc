# coding: utf-8
'''Perturbative Liouvillian spectra from the effective Hamiltonian

Splitting the vectorized Lindbladian as L = L0 + gamma L1 with
L0 = -i (h_eff (x) I - I (x) h_eff^*), the eigenvalues of L0 are the pair
energies -i (E_m - E_n^*) with right vectors r_m (x) r_n^* and left vectors
l_m (x) l_n^*. The first-order shift of pair (m, n) factorizes over channels:

    gamma sum_ch (l_m^+ L_ch r_m) (l_n^+ L_ch r_n)^*

so the whole first-order spectrum costs a handful of 2N x 2N products per
channel. Pairs whose zeroth-order values coincide are treated together by
diagonalizing the first-order block inside the cluster.
'''

from __future__ import division

import logging
import warnings
from collections import OrderedDict

import numpy
import scipy.linalg
import scipy.sparse
from scipy import spatial
from scipy.sparse import csgraph

from skinladder.common.errors import IllConditionedWarning
from skinladder.common.utils import hausdorff_distance, linear_fit
from skinladder.liouville import (DEFAULT_TOLERANCES, jump_sp_matrices,
                                  steady_profile)
from skinladder.model import LEG_A, LEG_B, build_heff, leg_sites

__all__ = ["BiorthogonalEigensystem", "LocalizationFit", "heff_eigensystem",
           "eigenspace_density", "max_im_eigenstate_fit",
           "zeroth_order_spectrum",
           "first_order_spectrum", "size_sensitivity", "postselected_profile",
           "hausdorff_distance"]

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
CLUSTER_TOL = 1e-8
BIORTH_TOL = 1e-10
DEGENERATE_IM_TOL = 1e-10
MIN_R_SQUARED = 0.9


class BiorthogonalEigensystem(object):
    '''Eigenvalues with right vectors (columns of `right`) and left vectors
    (columns of `left`) normalized so that left^+ right = I.

    `condition` is the 2-norm condition number of `right`; `ill_conditioned`
    is set when it exceeds 1e12.
    '''

    def __init__(self, energies, right, left, condition):
        self.energies = energies
        self.right = right
        self.left = left
        self.condition = condition
        self.ill_conditioned = condition > CONDITION_LIMIT

    def overlaps(self):
        '''|l^+ r| of unit-normalized left and right vectors, per mode'''
        r = self.right / numpy.linalg.norm(self.right, axis=0)
        l = self.left / numpy.linalg.norm(self.left, axis=0)
        return numpy.abs(numpy.sum(l.conj() * r, axis=0))


def heff_eigensystem(cfg):
    h = build_heff(cfg)
    energies, right = scipy.linalg.eig(h)
    left = scipy.linalg.inv(right).conj().T
    condition = numpy.linalg.cond(right)
    es = BiorthogonalEigensystem(energies, right, left, condition)
    if es.ill_conditioned:
        warnings.warn("Eigenvector matrix of h_eff for %r has condition "
                      "number %.3g" % (cfg, condition), IllConditionedWarning)
    logger.debug("h_eff eigensystem for %r: cond=%.3g", cfg, condition)
    return es


class LocalizationFit(object):
    '''Exponential fit |psi_A(x)| ~ prefactor * exp(-kappa x) of the max-Im(E)
    eigenspace of h_eff

    The fitted profile is the eigenspace density (diagonal of the projector
    onto the span of the max-Im eigenvectors, divided by its rank), so it
    does not depend on the basis numpy picks inside a degenerate set. Its
    leg-A amplitudes are averaged over neighbouring rungs before the
    log-linear fit, which removes the sublattice alternation of modes near
    Re(E) = 0. `profile_A` / `profile_B` hold the unsmoothed amplitudes.

    `rejected` marks fits that do not describe a localized mode: a Hermitian
    spectrum (no distinguished max-Im state) or r_squared below 0.9.
    `partners` holds the fits of the individual eigenvectors of a degenerate
    max-Im set, and `degenerate` is set when there are any.
    '''

    def __init__(self, N, energy, kappa, prefactor, r_squared, profile_A,
                 profile_B, rejected=False):
        self.N = N
        self.energy = energy
        self.kappa = kappa
        self.prefactor = prefactor
        self.r_squared = r_squared
        self.profile_A = profile_A
        self.profile_B = profile_B
        self.rejected = rejected
        self.partners = []

    @property
    def degenerate(self):
        return len(self.partners) > 0

    def as_dict(self):
        return OrderedDict([("N", self.N), ("energy_re", self.energy.real),
                            ("energy_im", self.energy.imag),
                            ("kappa", self.kappa),
                            ("kappa_N", self.kappa * self.N),
                            ("prefactor", self.prefactor),
                            ("r_squared", self.r_squared),
                            ("rejected", int(self.rejected)),
                            ("degenerate", int(self.degenerate))])


def eigenspace_density(vectors):
    '''Site density of the span of `vectors` (columns), summing to one

    Equal to |psi|^2 / |psi|^2_total for a single vector. Nearly parallel
    columns, as found close to an exceptional point, count once.
    '''
    vectors = numpy.asarray(vectors).reshape(len(vectors), -1)
    Q = scipy.linalg.orth(vectors)
    return numpy.sum(numpy.abs(Q)**2, axis=1) / Q.shape[1]


def _fit_density(cfg, energy, density, window, hermitian):
    n_A = density[leg_sites(cfg, LEG_A)]
    n_B = density[leg_sites(cfg, LEG_B)]
    lo, hi = window
    rungs = numpy.arange(lo, hi + 1)
    if len(rungs) >= 3:
        # one point per bond (x, x+1), placed at x + 1/2
        local = 0.5 * (n_A[lo - 1:hi - 1] + n_A[lo:hi])
        rungs = rungs[:-1] + 0.5
    else:
        local = n_A[lo - 1:hi]
    amplitude = numpy.sqrt(numpy.maximum(local, numpy.finfo(float).tiny))
    fit = linear_fit(rungs, numpy.log(amplitude))
    r_squared = fit["r_squared"] if fit["r_squared"] is not None else 0.0
    rejected = hermitian or r_squared < MIN_R_SQUARED
    return LocalizationFit(cfg.N, energy, -fit["slope"],
                           float(numpy.exp(fit["intercept"])), r_squared,
                           numpy.sqrt(n_A), numpy.sqrt(n_B), rejected)


def max_im_indices(es):
    '''Indices of the eigenvalues within 1e-10 of the largest Im(E)'''
    im = es.energies.imag
    return numpy.flatnonzero(numpy.abs(im - im.max()) < DEGENERATE_IM_TOL)


def max_im_eigenstate_fit(cfg, window=None):
    '''Fit the leg-A profile of the h_eff eigenspace with the largest Im(E)

    Args:
        window: inclusive (first, last) rung range of the fit; by default the
            bulk rungs 2..N-1.
    '''
    window = window or (2, cfg.N - 1)
    if window[1] - window[0] < 1:
        window = (1, cfg.N)
    es = heff_eigensystem(cfg)
    hermitian = numpy.ptp(es.energies.imag) < DEGENERATE_IM_TOL
    top = max_im_indices(es)
    if hermitian:
        top = top[:1]
    fit = _fit_density(cfg, es.energies[top[0]],
                       eigenspace_density(es.right[:, top]), window,
                       hermitian)
    if len(top) > 1:
        fit.partners = [_fit_density(cfg, es.energies[k],
                                     eigenspace_density(es.right[:, k]),
                                     window, hermitian) for k in top]
        logger.info("degenerate max-Im eigenstates for %r: %d modes", cfg,
                    len(top))
    return fit


def pair_energies(energies):
    '''-i (E_m - E_n^*) as a (2N, 2N) array indexed [m, n]'''
    return -1j * (energies[:, None] - energies.conj()[None, :])


def zeroth_order_spectrum(cfg, es=None):
    '''All (2N)^2 pair energies in row-major (m, n) order'''
    es = es or heff_eigensystem(cfg)
    return pair_energies(es.energies).ravel()


def degenerate_clusters(values, tol=CLUSTER_TOL):
    '''Groups of indices whose values lie within `tol` of each other

    Closeness is made transitive, so a chain of near neighbours forms one
    cluster. Only groups of two or more are returned, each sorted.
    '''
    points = numpy.column_stack([values.real, values.imag])
    pairs = spatial.cKDTree(points).query_pairs(r=tol, output_type="ndarray")
    if len(pairs) == 0:
        return []
    n = len(values)
    graph = scipy.sparse.coo_matrix(
        (numpy.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = csgraph.connected_components(graph, directed=False)
    counts = numpy.bincount(labels)
    return [numpy.flatnonzero(labels == c)
            for c in numpy.flatnonzero(counts > 1)]


class PerturbativeSpectrum(object):
    '''First-order spectrum with its diagnostics

    `ill_conditioned` is a (2N, 2N) boolean array over pairs (m, n), true when
    either mode has |l^+ r| < 1e-10 for unit-normalized vectors. `clusters`
    is the number of degenerate zeroth-order clusters that were diagonalized.
    '''

    def __init__(self, eigenvalues, zeroth, ill_conditioned, clusters):
        self.eigenvalues = eigenvalues
        self.zeroth = zeroth
        self.ill_conditioned = ill_conditioned
        self.clusters = clusters


def first_order_spectrum(cfg, dissipator_scale=1.0, es=None):
    '''Zeroth-order pair energies plus the first-order dissipator shift

    Args:
        dissipator_scale: multiplies gamma in front of the jump term only;
            0 gives back the zeroth-order spectrum.
    '''
    es = es or heff_eigensystem(cfg)
    d = len(es.energies)
    lam0 = pair_energies(es.energies)
    # K[c, m, m'] = l_m^+ L_c r_m'
    K = numpy.array([es.left.conj().T.dot(J).dot(es.right)
                     for J in jump_sp_matrices(cfg)])
    g = cfg.gamma * dissipator_scale
    diag = numpy.einsum("cmm->cm", K)
    shift = g * numpy.einsum("cm,cn->mn", diag, diag.conj())
    values = (lam0 + shift).ravel()

    flat0 = lam0.ravel()
    clusters = degenerate_clusters(flat0)
    for members in clusters:
        m, n = numpy.divmod(members, d)
        block = g * numpy.einsum(
            "cab,cab->ab", K[:, m[:, None], m[None, :]],
            K[:, n[:, None], n[None, :]].conj())
        block[numpy.diag_indices(len(members))] += flat0[members]
        values[members] = numpy.sort_complex(scipy.linalg.eigvals(block))
    if clusters:
        logger.debug("first order for %r: %d degenerate clusters, largest "
                     "%d", cfg, len(clusters), max(len(c) for c in clusters))

    bad = es.overlaps() < BIORTH_TOL
    ill = bad[:, None] | bad[None, :]
    if ill.any():
        warnings.warn("%d ill-conditioned biorthogonal pairs for %r" %
                      (ill.sum(), cfg), IllConditionedWarning)
    return PerturbativeSpectrum(values, flat0, ill, len(clusters))


def size_sensitivity(cfg_base, Ns):
    '''Hausdorff distance between the h_eff spectra at N and 2N'''
    rows = []
    for n in Ns:
        a = heff_eigensystem(cfg_base.replace(N=n)).energies
        b = heff_eigensystem(cfg_base.replace(N=2 * n)).energies
        rows.append(OrderedDict([("N", n), ("N2", 2 * n),
                                 ("hausdorff", hausdorff_distance(a, b))]))
    return rows


def postselected_profile(cfg, tol=DEFAULT_TOLERANCES):
    '''Densities of the max-Im(E) state against the Lindblad steady state

    Pure non-Hermitian evolution (every jump discarded) relaxes onto the
    eigenstate with the largest Im(E). Its densities are compared with the
    steady state of the full Lindbladian.
    '''
    es = heff_eigensystem(cfg)
    n = eigenspace_density(es.right[:, max_im_indices(es)])
    steady = steady_profile(cfg, tol)
    ps_A, ps_B = n[leg_sites(cfg, LEG_A)], n[leg_sites(cfg, LEG_B)]
    deviation = max(numpy.abs(ps_A - steady.density_A).max(),
                    numpy.abs(ps_B - steady.density_B).max())
    return OrderedDict([("postselected_A", ps_A), ("postselected_B", ps_B),
                        ("steady_A", steady.density_A),
                        ("steady_B", steady.density_B),
                        ("max_deviation", float(deviation))])
