# coding: utf-8
'''Exact many-body Lindbladian of small ladders in the occupation basis

Basis states are sets of occupied flattened sites. The state with occupied
sites k1 < k2 < ... < kn is c^+_{k1} c^+_{k2} ... c^+_{kn} |0>, so c^+_k
acting on it picks up (-1)^(number of occupied sites below k). Everything is
dense; the oracle exists to check the single-particle and trajectory code,
not to scale.
'''

from __future__ import division

import itertools
import logging
from collections import OrderedDict

import numpy
import scipy.linalg
import scipy.sparse
from scipy import integrate

from skinladder.common.errors import (CapacityError, ImpossibleJumpError,
                                      NumericalError, UsageError,
                                      check_memory)
from skinladder.common.utils import pairwise_match
from skinladder.liouville import (DEFAULT_TOLERANCES, EIG_WORKSPACE_FACTOR,
                                  build_liouvillian, vectorize)
from skinladder.model import (LadderConfig, build_h0, build_heff,
                              build_jump_channels)
from skinladder.observables import ensemble_statistics
from skinladder.trajectory import (SlaterState, apply_jump, basis_state,
                                   drift_step, propagator, run_trajectory)

logger = logging.getLogger(__name__)

MAX_SITES = 12
# the all-sector Liouvillian is only formed for ladders this small
MAX_FULL_SITES = 6
ALL_SECTORS = "all"


class FockBasis(object):
    '''Occupation basis of `n_sites` modes, one particle-number sector or all

    `states` holds the occupied-site tuples in order: sectors by increasing
    particle number, and inside a sector the lexicographic order of
    itertools.combinations.
    '''

    def __init__(self, n_sites, sector=ALL_SECTORS):
        if n_sites > MAX_SITES:
            raise CapacityError("Fock operators on %d sites" % n_sites,
                                16 * 4**n_sites, 16 * 4**MAX_SITES)
        if sector != ALL_SECTORS and not 0 <= sector <= n_sites:
            raise UsageError("Invalid particle-number sector '%s' for %d "
                             "sites" % (sector, n_sites))
        self.n_sites = n_sites
        self.sector = sector
        counts = range(n_sites + 1) if sector == ALL_SECTORS else [sector]
        self.states = [s for n in counts
                       for s in itertools.combinations(range(n_sites), n)]
        self.index = dict((s, i) for i, s in enumerate(self.states))
        self.occupations = numpy.zeros((len(self.states), n_sites))
        for i, s in enumerate(self.states):
            self.occupations[i, list(s)] = 1.0
        self.particles = self.occupations.sum(axis=1).astype(int)

    @property
    def dim(self):
        return len(self.states)

    def bitstring(self, i):
        '''Occupations of state i as text, site 1 leftmost'''
        return "".join("%d" % x for x in self.occupations[i])


def hopping_operator(basis, i, j):
    '''c^+_i c_j as a dense matrix on `basis`'''
    M = numpy.zeros((basis.dim, basis.dim))
    for col, s in enumerate(basis.states):
        if j not in s:
            continue
        rest = [k for k in s if k != j]
        if i in rest:
            continue
        sign = (-1)**(sum(1 for k in s if k < j) +
                      sum(1 for k in rest if k < i))
        M[basis.index[tuple(sorted(rest + [i]))], col] = sign
    return M


def quadratic_operator(basis, h):
    '''sum_ij h_ij c^+_i c_j'''
    op = numpy.zeros((basis.dim, basis.dim), dtype=complex)
    for i, j in zip(*numpy.nonzero(h)):
        op += h[i, j] * hopping_operator(basis, i, j)
    return op


def parity_operator(basis, p):
    '''exp(i pi n_p), diagonal +-1'''
    return numpy.diag(1.0 - 2.0 * basis.occupations[:, p]).astype(complex)


class FockOperators(object):
    '''H_0, H_eff, the jump operators and the number operator on one basis'''

    def __init__(self, cfg, basis, H0, Heff, jumps, modes):
        self.cfg = cfg
        self.basis = basis
        self.H0 = H0
        self.Heff = Heff
        self.jumps = jumps
        self.modes = modes
        self.N_tot = numpy.diag(basis.particles).astype(complex)


def build_fock_operators(cfg, sector=ALL_SECTORS, tol=DEFAULT_TOLERANCES):
    '''Dense Fock-space operators of the ladder

    Each jump is built as exp(i pi n_p) xi^+ xi with xi^+ xi the quadratic
    operator of a a^+, and H_eff = H_0 - (i gamma / 2) sum L^+ L.

    Raises:
        CapacityError: if the sector Liouvillian would exceed the memory cap.
    '''
    basis = FockBasis(cfg.n_sites, sector)
    check_memory("Fock Liouvillian of dimension %d" % basis.dim**2,
                 EIG_WORKSPACE_FACTOR * 16 * basis.dim**4, tol.memory_cap)
    H0 = quadratic_operator(basis, build_h0(cfg))
    modes, jumps = [], []
    for ch in build_jump_channels(cfg):
        mode = quadratic_operator(basis, numpy.outer(ch.a, ch.a.conj()))
        modes.append(mode)
        jumps.append(parity_operator(basis, ch.p).dot(mode))
    Heff = H0 - 0.5j * cfg.gamma * sum(L.conj().T.dot(L) for L in jumps)
    logger.debug("Fock operators for %r: sector %s, dim %d", cfg, sector,
                 basis.dim)
    return FockOperators(cfg, basis, H0, Heff, jumps, modes)


class DenseLiouvillian(object):
    '''Vectorized many-body Lindbladian (row-major |rho>>) on a Fock basis'''

    def __init__(self, entries, basis):
        self.entries = entries
        self.basis = basis

    @property
    def dim(self):
        return self.entries.shape[0]

    def trace_row(self):
        return numpy.eye(self.basis.dim).ravel()

    def eigenvalues(self):
        entries = self.entries
        if scipy.sparse.issparse(entries):
            entries = entries.toarray()
        return scipy.linalg.eigvals(entries)


def fock_liouvillian(ops, dense=True):
    return DenseLiouvillian(vectorize(ops.Heff, ops.jumps, ops.cfg.gamma,
                                      dense=dense), ops.basis)


def sector_indices(basis, n_p):
    '''Positions in |rho>> of the block with both indices in sector n_p'''
    idx = numpy.flatnonzero(basis.particles == n_p)
    return (idx[:, None] * basis.dim + idx[None, :]).ravel()


def sector_restrict(L, n_p):
    '''Block of an all-sector Liouvillian between fixed-n_p rows and columns'''
    if L.basis.sector != ALL_SECTORS:
        raise UsageError("Sector restriction needs an all-sector basis")
    idx = sector_indices(L.basis, n_p)
    entries = L.entries[idx][:, idx]
    if hasattr(entries, "toarray"):
        entries = entries.toarray()
    return DenseLiouvillian(entries, FockBasis(L.basis.n_sites, n_p))


def sector_leakage(L):
    '''Largest |matrix element| connecting different (row, column) sectors'''
    n = L.basis.particles
    labels = (n[:, None] * (L.basis.n_sites + 1) + n[None, :]).ravel()
    coo = scipy.sparse.coo_matrix(L.entries)
    mask = labels[coo.row] != labels[coo.col]
    return float(numpy.abs(coo.data[mask]).max()) if mask.any() else 0.0


def fock_state(basis, occupied):
    psi = numpy.zeros(basis.dim, dtype=complex)
    psi[basis.index[tuple(sorted(occupied))]] = 1.0
    return psi


def embed_slater(U, basis=None):
    '''Occupation-basis amplitudes of the Slater determinant with orbitals U

    The amplitude of occupied sites k1 < ... < kn is det U[(k1..kn), :]. A
    SlaterState is accepted in place of U.
    '''
    U = getattr(U, "U", U)
    n_sites, n_p = U.shape
    if basis is None:
        basis = FockBasis(n_sites, n_p)
    if basis.n_sites != n_sites:
        raise UsageError("Basis has %d sites, orbitals have %d" %
                         (basis.n_sites, n_sites))
    psi = numpy.zeros(basis.dim, dtype=complex)
    for i, s in enumerate(basis.states):
        if len(s) == n_p:
            psi[i] = numpy.linalg.det(U[list(s), :]) if n_p else 1.0
    return psi


def apply_fock_jump(ops, psi, channel):
    '''Normalized L_channel |psi>'''
    phi = ops.jumps[channel].dot(psi)
    norm = numpy.linalg.norm(phi)
    if norm**2 <= 1e-12:
        raise ImpossibleJumpError("impossible jump on channel %d: norm %g" %
                                  (channel, norm))
    return phi / norm


def densities(basis, rho):
    '''<n_k> = Tr(rho n_k) for every site'''
    return numpy.real(numpy.diag(rho)).dot(basis.occupations)


def two_point(basis, rho):
    '''D_ij = Tr(rho c^+_i c_j)'''
    D = numpy.zeros((basis.n_sites, basis.n_sites), dtype=complex)
    for i in range(basis.n_sites):
        for j in range(basis.n_sites):
            D[i, j] = numpy.sum(rho.T * hopping_operator(basis, i, j))
    return D


class Evolution(object):
    '''Density matrices of an exact evolution on `times` plus summaries'''

    def __init__(self, basis, times, rhos, residual=None):
        self.basis = basis
        self.times = times
        self.rhos = rhos
        self.residual = residual
        self.densities = numpy.array([densities(basis, r) for r in rhos])
        self.traces = numpy.array([numpy.trace(r).real for r in rhos])
        self.purities = numpy.array([numpy.trace(r.dot(r)).real
                                     for r in rhos])


def _evolve_expm(L, v0, times):
    return numpy.array([scipy.linalg.expm(L * t).dot(v0) for t in times])


def _evolve_ode(L, v0, times, tol):
    sol = integrate.solve_ivp(lambda t, y: L.dot(y), (times[0], times[-1]),
                              v0, method="DOP853", t_eval=times, rtol=tol,
                              atol=tol)
    if not sol.success:
        raise NumericalError("ODE integration failed: %s" % sol.message)
    return sol.y.T


def exact_evolve(ops, rho0, times, method="expm", tol=1e-10):
    '''|rho(t)>> = exp(L t) |rho0>> on the time grid

    Args:
        method: "expm" (dense matrix exponential), "ode" (adaptive
            Runge-Kutta with rtol = atol = `tol`) or "both", which runs the
            two and fails if they disagree by more than 1e3 * `tol`.

    Raises:
        NumericalError: integration failure or disagreement, with the
            achieved residual.
    '''
    if method not in ("expm", "ode", "both"):
        raise UsageError("Unknown evolution method '%s'" % method)
    times = numpy.asarray(times, dtype=float)
    L = fock_liouvillian(ops).entries
    v0 = numpy.asarray(rho0, dtype=complex).ravel()
    residual = None
    if method == "ode":
        vs = _evolve_ode(L, v0, times, tol)
    else:
        vs = _evolve_expm(L, v0, times)
    if method == "both":
        residual = float(numpy.abs(vs - _evolve_ode(L, v0, times, tol)).max())
        if residual > 1e3 * tol:
            raise NumericalError("expm and ODE evolutions differ by %g" %
                                 residual)
    d = ops.basis.dim
    return Evolution(ops.basis, times, vs.reshape(len(times), d, d),
                     residual)


def slater_density_matrix(U, basis):
    psi = embed_slater(U, basis)
    return numpy.outer(psi, psi.conj())


def random_isometry(rng, n_sites, n_p):
    Z = rng.standard_normal((n_sites, n_p)) + \
        1j * rng.standard_normal((n_sites, n_p))
    return numpy.linalg.qr(Z)[0]


def ensemble_densities(series_list):
    '''Ensemble-mean and standard-error site densities, (times, 2N) each'''
    ens = ensemble_statistics(series_list, fields=("density_A", "density_B"))
    shape = (len(ens.times), 2 * ens.mean["density_A"].shape[1])
    mean, err = numpy.empty(shape), numpy.empty(shape)
    mean[:, 0::2], mean[:, 1::2] = (ens.mean["density_A"],
                                    ens.mean["density_B"])
    err[:, 0::2], err[:, 1::2] = (ens.stderr["density_A"],
                                  ens.stderr["density_B"])
    return ens.times, mean, err


def monte_carlo_convergence(cfg, tcfg, occupied, sizes=(500, 2000),
                            replicas=4):
    '''RMS deviation of trajectory-averaged densities from exact_evolve

    Trajectories 0..max(sizes)*replicas-1 start from the basis state
    `occupied`. For each ensemble size n they are cut into disjoint blocks
    of n and the mean-square deviation from the exact densities is averaged
    over the blocks, so the result falls as 1/sqrt(n) once the time step
    bias is negligible.

    Returns:
        OrderedDict mapping each size to its RMS deviation.
    '''
    total = max(sizes) * replicas
    for n in sizes:
        if n < 2 or total % n:
            raise UsageError("Ensemble size %s does not divide %d "
                             "trajectories" % (n, total))
    series = [run_trajectory(cfg, tcfg.replace(trajectory_id=i),
                             state=basis_state(cfg, occupied))
              for i in range(total)]
    ops = build_fock_operators(cfg, len(occupied))
    rho0 = slater_density_matrix(basis_state(cfg, occupied).U, ops.basis)
    exact = exact_evolve(ops, rho0, series[0].times).densities
    rms = OrderedDict()
    for n in sizes:
        mse = [numpy.mean((ensemble_densities(series[k:k + n])[1] -
                           exact)**2) for k in range(0, total, n)]
        rms[n] = float(numpy.sqrt(numpy.mean(mse)))
        logger.info("%d trajectories: RMS density deviation %.3g", n,
                    rms[n])
    return rms


def _check(name, residual, tolerance):
    return OrderedDict([("name", name), ("residual", float(residual)),
                        ("tolerance", tolerance),
                        ("passed", bool(residual <= tolerance))])


def cross_validate(N=3, gamma=0.5, delta=0.1, t=1.0, seed=0):
    '''Run every oracle contract on an N-rung ladder

    Returns:
        OrderedDict with `checks` (name, residual, tolerance, passed per
        contract), `passed` and the name of the `worst` check, the one with
        the largest residual relative to its tolerance.
    '''
    cfg = LadderConfig(N, t=t, delta=delta, gamma=gamma)
    rng = numpy.random.default_rng(seed)
    checks = []

    # single-particle sector against the first-quantized Liouvillian
    single = build_fock_operators(cfg, 1)
    L1 = fock_liouvillian(single)
    sp = build_liouvillian(cfg)
    checks.append(_check("spectrum_single_particle",
                         pairwise_match(L1.eigenvalues(),
                                        scipy.linalg.eigvals(sp.entries)),
                         1e-9))
    checks.append(_check("trace_preservation",
                         numpy.abs(L1.trace_row().dot(L1.entries)).max(),
                         1e-10))

    # the full Fock space is block diagonal in (row, column) particle number
    if cfg.n_sites <= MAX_FULL_SITES:
        full = fock_liouvillian(build_fock_operators(cfg), dense=False)
        checks.append(_check("sector_block_diagonal", sector_leakage(full),
                             1e-14))
        checks.append(_check("sector_restriction",
                             numpy.abs(sector_restrict(full, 1).entries -
                                       L1.entries).max(), 1e-12))
    else:
        logger.info("skipping all-sector checks for %d sites", cfg.n_sites)

    # many-body operator identities in the half-filled sector
    ops = build_fock_operators(cfg, N)
    checks.append(_check("projector_modes",
                         max(numpy.abs(m.dot(m) - m).max()
                             for m in ops.modes), 1e-13))
    checks.append(_check("heff_quadratic",
                         numpy.abs(ops.Heff - quadratic_operator(
                             ops.basis, build_heff(cfg))).max(), 1e-12))

    U = random_isometry(rng, cfg.n_sites, N)
    V = random_isometry(rng, cfg.n_sites, N)
    overlap = embed_slater(U, ops.basis).conj().dot(embed_slater(V, ops.basis))
    checks.append(_check("slater_overlap",
                         abs(overlap - numpy.linalg.det(U.conj().T.dot(V))),
                         1e-10))

    # trajectory jump action against the Fock-space jump
    state = SlaterState(U)
    G = propagator(cfg, 0.3)
    state = drift_step(state, G)
    psi = embed_slater(state.U, ops.basis)
    worst = 0.0
    for c, ch in enumerate(build_jump_channels(cfg)):
        expected = apply_fock_jump(ops, psi, c)
        got = embed_slater(apply_jump(state, ch).U, ops.basis)
        worst = max(worst, 1.0 - abs(expected.conj().dot(got)))
    checks.append(_check("jump_action", worst, 1e-10))

    # the two exact integrators against each other
    rho0 = slater_density_matrix(state.U, ops.basis)
    evo = exact_evolve(ops, rho0, numpy.linspace(0.0, 2.0, 5), method="both")
    checks.append(_check("evolution_methods", evo.residual, 1e-7))
    checks.append(_check("evolution_trace",
                         numpy.abs(evo.traces - 1.0).max(), 1e-10))

    ratio = [c["residual"] / c["tolerance"] for c in checks]
    report = OrderedDict([("N", N), ("gamma", gamma), ("delta", delta),
                          ("checks", checks),
                          ("passed", all(c["passed"] for c in checks)),
                          ("worst", checks[int(numpy.argmax(ratio))]["name"])])
    for c in checks:
        logger.info("oracle check %-26s residual %.3g (tol %g) %s",
                    c["name"], c["residual"], c["tolerance"],
                    "ok" if c["passed"] else "FAILED")
    return report
