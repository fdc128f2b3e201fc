# coding: utf-8
'''Observables of Gaussian (Slater determinant) states and their statistics

Everything is computed from the two-point function D_ij = <c^+_i c_j>, which
for a Slater determinant with orthonormal orbitals U is D = (U U^+)^T. The
entanglement cut is the left half of the ladder, flattened sites 1..N (rungs
1..N/2 of both legs). Entropies use the natural logarithm.
'''

from __future__ import division

import math
from collections import OrderedDict

import numpy
from scipy import special

from skinladder.common.errors import UsageError
from skinladder.common.utils import linear_fit
from skinladder.model import LEG_A, LEG_B, flat_index, leg_sites

MI_CONVENTION = ("segments of N/8 rungs on both legs starting at rungs "
                 "N/4-(N/8-1)//2 and 3N/4-(N/8-1)//2, centered on N/4 and "
                 "3N/4 (N/4+1/2 and 3N/4+1/2 for even N/8), "
                 "center-to-center separation N/2")

SCALING_MODELS = ("plateau", "log", "powerlaw")


def correlation_matrix(U):
    '''D_ij = <c^+_i c_j> = [U U^+]_ji for orthonormal orbitals U

    A SlaterState is accepted in place of its orbital matrix.
    '''
    U = getattr(U, "U", U)
    return U.conj().dot(U.T)


def densities(D, cfg):
    n = numpy.real(numpy.diag(D))
    return n[leg_sites(cfg, LEG_A)], n[leg_sites(cfg, LEG_B)]


def entanglement_entropy(D, sites):
    '''Von Neumann entropy of the subsystem made of flattened `sites`'''
    sites = numpy.asarray(sites)
    if len(set(sites.tolist())) != len(sites):
        raise UsageError("Subsystem sites are not distinct: %s" %
                         sites.tolist())
    if len(sites) and (sites.min() < 0 or sites.max() >= D.shape[0]):
        raise UsageError("Subsystem sites out of range: %s" % sites.tolist())
    eta = numpy.linalg.eigvalsh(D[numpy.ix_(sites, sites)])
    eta = numpy.clip(eta, 0.0, 1.0)
    return float(numpy.sum(special.entr(eta) + special.entr(1.0 - eta)))


def half_cut_sites(cfg):
    return numpy.arange(cfg.N)


def rung_sites(rungs):
    return numpy.array([flat_index(j, leg) for j in rungs
                        for leg in (LEG_A, LEG_B)])


def mutual_information_segments(cfg):
    '''Flattened sites of the two segments V and VI'''
    if cfg.N % 8 != 0:
        raise UsageError("Mutual information needs N divisible by 8, got "
                         "N=%d" % cfg.N)
    width = cfg.N // 8
    first = cfg.N // 4 - (width - 1) // 2
    v = range(first, first + width)
    vi = range(first + cfg.N // 2, first + cfg.N // 2 + width)
    return rung_sites(v), rung_sites(vi)


def mutual_information(D, cfg):
    '''MI = S(V) + S(VI) - S(V u VI)'''
    v, vi = mutual_information_segments(cfg)
    return (entanglement_entropy(D, v) + entanglement_entropy(D, vi) -
            entanglement_entropy(D, numpy.concatenate([v, vi])))


def connected_correlation(D, cfg, leg, x):
    '''C(x) = |<c^+_{N/2} c_{N/2+x}>|^2 on one leg, 1 <= x <= N/2'''
    center = cfg.N // 2
    if not 1 <= x <= cfg.N - center:
        raise UsageError("Correlation distance x=%s outside [1, %d]" %
                         (x, cfg.N - center))
    i = flat_index(center, leg)
    j = flat_index(center + x, leg)
    return float(abs(D[i, j])**2)


def correlation_profile(D, cfg, leg):
    return numpy.array([connected_correlation(D, cfg, leg, x)
                        for x in range(1, cfg.N - cfg.N // 2 + 1)])


def chord_distance(x, N):
    return numpy.sin(numpy.pi * numpy.asarray(x, dtype=float) / N)


def correlation_fits(corr, N, window=None):
    '''Power-law (in chord distance) and exponential fits of C(x)

    `window` restricts the fit to x in [window[0], window[1]]. Points with
    C <= 0 are dropped. The power-law exponent is the slope of log C against
    log sin(pi x / N), the decay rate the slope of log C against x.
    '''
    corr = numpy.asarray(corr, dtype=float)
    x = numpy.arange(1, len(corr) + 1)
    keep = corr > 0
    if window is not None:
        keep &= (x >= window[0]) & (x <= window[1])
    x, corr = x[keep], corr[keep]
    power = linear_fit(numpy.log(chord_distance(x, N)), numpy.log(corr))
    expo = linear_fit(x, numpy.log(corr))
    return OrderedDict([
        ("powerlaw_exponent", power["slope"]),
        ("powerlaw_r_squared", power["r_squared"]),
        ("exponential_rate", -expo["slope"]),
        ("exponential_r_squared", expo["r_squared"]),
    ])


def measure(D, cfg):
    '''All per-sample observables of one state'''
    density_A, density_B = densities(D, cfg)
    if cfg.N % 8 == 0:
        mi = mutual_information(D, cfg)
    else:
        mi = float("nan")
    return OrderedDict([
        ("entropy_half", entanglement_entropy(D, half_cut_sites(cfg))),
        ("mutual_info", mi),
        ("density_A", density_A),
        ("density_B", density_B),
        ("corr_AA", correlation_profile(D, cfg, LEG_A)),
        ("corr_BB", correlation_profile(D, cfg, LEG_B)),
    ])


class ObservableSeries(object):
    '''Observables of one trajectory on its sampling grid

    Scalar observables become 1-d arrays over time, profile observables 2-d
    arrays (time x rung or time x distance). `orthonormality` holds
    max|U^+U - I| and `jumps` the cumulative jump count at each sample.
    '''

    fields = ("entropy_half", "mutual_info", "density_A", "density_B",
              "corr_AA", "corr_BB", "orthonormality", "jumps")

    def __init__(self, cfg, trajectory_id=0):
        self.cfg = cfg
        self.trajectory_id = trajectory_id
        self.times = []
        self.n_particles = None
        for name in self.fields:
            setattr(self, name, [])

    def record(self, time, U, jumps):
        D = correlation_matrix(U)
        values = measure(D, self.cfg)
        values["orthonormality"] = float(
            numpy.abs(U.conj().T.dot(U) - numpy.eye(U.shape[1])).max())
        values["jumps"] = jumps
        self.times.append(time)
        self.n_particles = U.shape[1]
        for name in self.fields:
            getattr(self, name).append(values[name])

    def finalize(self):
        self.times = numpy.asarray(self.times, dtype=float)
        for name in self.fields:
            setattr(self, name, numpy.asarray(getattr(self, name)))
        return self


class TrajectoryEnsemble(object):
    '''Pointwise mean and standard error of several series

    `mean[name]` and `stderr[name]` have the shape of one series' field.
    `steady[name]` is (mean, stderr) of the per-trajectory time average over
    the steady window (the final `steady_fraction` of the run), the standard
    error taken across trajectories, one block per trajectory.
    '''

    def __init__(self, times, n_traj, mean, stderr, steady, window_start):
        self.times = times
        self.n_traj = n_traj
        self.mean = mean
        self.stderr = stderr
        self.steady = steady
        self.window_start = window_start

    @property
    def max_entropy(self):
        '''(max_t mean S(t), argmax time)'''
        k = int(numpy.argmax(self.mean["entropy_half"]))
        return float(self.mean["entropy_half"][k]), float(self.times[k])


def ensemble_statistics(series_list, steady_fraction=0.2, fields=None):
    if len(series_list) < 2:
        raise UsageError("Ensemble statistics need at least 2 series, got %d"
                         % len(series_list))
    times = numpy.asarray(series_list[0].times, dtype=float)
    for s in series_list[1:]:
        if not numpy.array_equal(numpy.asarray(s.times, dtype=float), times):
            raise UsageError("Trajectory %s has a different time grid" %
                             s.trajectory_id)
    n = len(series_list)
    window = times >= times[-1] * (1.0 - steady_fraction)
    mean, stderr, steady = OrderedDict(), OrderedDict(), OrderedDict()
    for name in fields or ObservableSeries.fields:
        data = numpy.array([numpy.asarray(getattr(s, name), dtype=float)
                            for s in series_list])
        mean[name] = data.mean(axis=0)
        stderr[name] = data.std(axis=0, ddof=1) / math.sqrt(n)
        blocks = data[:, window].mean(axis=1)
        steady[name] = (blocks.mean(axis=0),
                        blocks.std(axis=0, ddof=1) / math.sqrt(n))
    return TrajectoryEnsemble(times, n, mean, stderr, steady,
                              float(times[window][0]))


def scaling_fit(points, model):
    '''Fit (N, value) points with a plateau, logarithmic or power law

    plateau: value = a N + b, passing when the relative spread is below 20%;
    log: value = a ln N + b; powerlaw: ln value = a ln N + b.
    '''
    if model not in SCALING_MODELS:
        raise UsageError("Unknown scaling model '%s'" % model)
    if len(points) < 3:
        raise UsageError("Scaling fit needs at least 3 points, got %d" %
                         len(points))
    x = numpy.array([p[0] for p in points], dtype=float)
    y = numpy.array([p[1] for p in points], dtype=float)
    if model == "plateau":
        fit = linear_fit(x, y)
    elif model == "log":
        fit = linear_fit(numpy.log(x), y)
    else:
        fit = linear_fit(numpy.log(x), numpy.log(y))
    report = OrderedDict([("model", model)])
    report.update(fit)
    scale = numpy.abs(y).mean()
    spread = float(numpy.ptp(y) / scale) if scale > 0 else 0.0
    report["relative_spread"] = spread
    if model == "plateau":
        report["plateau"] = spread < 0.2
    return report
