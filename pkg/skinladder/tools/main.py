# coding: utf-8
#
''' skinladder - Liouvillian skin effect experiments on a two-leg ladder

skinladder runs the exact single-particle Lindbladian (spectra, gaps, steady
states), its perturbative approximation, many-body quantum-jump trajectories
and the small-ladder exact cross-checks. Every run writes CSV tables and a
manifest.json into its output directory.
'''
from __future__ import division, print_function, unicode_literals

import argparse
import logging
import os
import sys
from collections import OrderedDict

import numpy
import scipy.linalg

from skinladder.common.conf import (DEFAULTS, load_conf, output_dir,
                                    resolve_parameters, resolve_t_total)
from skinladder.common.errors import (EXIT_SUCCESS, NumericalError,
                                      SkinLadderError, UsageError)
from skinladder.common.manifest import RunManifest
from skinladder.common.utils import (conjugation_defect, ensure_dir,
                                     hausdorff_distance, write_csv,
                                     write_json)
from skinladder.liouville import (build_liouvillian, gap_scan, log_linear_fit,
                                  skin_crossover, solve, spectral_range,
                                  steady_profile_scan)
from skinladder.model import LEG_A, LEG_B, LadderConfig
from skinladder.observables import (MI_CONVENTION, chord_distance,
                                    correlation_fits, ensemble_statistics,
                                    scaling_fit)
from skinladder.oracle import (build_fock_operators, cross_validate,
                               exact_evolve, fock_liouvillian,
                               slater_density_matrix)
from skinladder.perturb import (first_order_spectrum, heff_eigensystem,
                                max_im_eigenstate_fit, postselected_profile,
                                size_sensitivity, zeroth_order_spectrum)
from skinladder.tools.runner import (ProcessPoolLauncher,
                                     SimpleProgressReporter, make_launcher,
                                     run_trajectories)
from skinladder.trajectory import (INITIAL_STATES, TrajectoryConfig,
                                   basis_state, neel_sites)

logger = logging.getLogger(__name__)

SPECTRUM_COLUMNS = ["index", "re", "im"]
PAIR_COLUMNS = ["m", "n", "re", "im"]
DENSITY_COLUMNS = ["rung", "leg", "density"]

SUBCOMMAND_DEFAULTS = {
    "oracle-compare": {"N": [3], "delta": [0.1]},
}


def single(params, key):
    values = params[key]
    if len(values) != 1:
        raise UsageError("This subcommand takes a single --%s, got %s" %
                         (key, ",".join(str(v) for v in values)))
    return values[0]


def ladder(params, N, delta):
    return LadderConfig(N, t=params["t"], delta=delta, gamma=params["gamma"])


def spectrum_rows(eigenvalues):
    return [(k, w.real, w.imag) for k, w in enumerate(eigenvalues)]


def pair_rows(values, extra=None):
    d = int(round(numpy.sqrt(len(values))))
    rows = []
    for k, w in enumerate(values):
        row = [k // d, k % d, w.real, w.imag]
        if extra is not None:
            row.append(int(extra[k]))
        rows.append(row)
    return rows


def density_rows(res):
    rows = []
    for j in range(res.cfg.N):
        rows.append((j + 1, LEG_A, res.density_A[j]))
        rows.append((j + 1, LEG_B, res.density_B[j]))
    return rows


def rotation_defect(density_A, density_B):
    '''max_j |n_{j,A} - n_{N+1-j,B}|'''
    return float(numpy.abs(numpy.asarray(density_A) -
                           numpy.asarray(density_B)[::-1]).max())


def cmd_spectrum(params, manifest, launcher):
    delta = single(params, "delta")
    Ns = params["N"]
    cfg = ladder(params, Ns[0], delta)
    if len(Ns) > 1:
        rows = spectral_range(cfg, Ns, mapper=launcher.map)
        columns = ["N", "max_abs_re"]
        write_csv(manifest.add_output("spectral_range.csv", columns), columns,
                  [(r["N"], r["max_abs_re"]) for r in rows])
        widths = [r["max_abs_re"] for r in rows]
        manifest.results["max_abs_re"] = widths
        manifest.results["strictly_increasing"] = all(
            b > a for a, b in zip(widths, widths[1:]))
        return
    res = solve(cfg)
    write_csv(manifest.add_output("spectrum.csv", SPECTRUM_COLUMNS),
              SPECTRUM_COLUMNS, spectrum_rows(res.eigenvalues))
    write_csv(manifest.add_output("steady_density.csv", DENSITY_COLUMNS),
              DENSITY_COLUMNS, density_rows(res))
    manifest.results["gap"] = res.gap
    manifest.results["max_real"] = res.max_real
    manifest.results["max_abs_re"] = res.real_range
    manifest.results["conjugation_defect"] = conjugation_defect(
        res.eigenvalues)
    if delta > 0:
        manifest.results["rotation_defect"] = rotation_defect(
            res.density_A, res.density_B)


def cmd_gap_scan(params, manifest, launcher):
    cfg = ladder(params, params["N"][0], params["delta"][0])
    rows, slopes = gap_scan(cfg, params["N"], params["delta"],
                            mapper=launcher.map)
    columns = ["N", "delta", "gap", "error"]
    write_csv(manifest.add_output("gap_scan.csv", columns), columns,
              [[r[k] for k in columns] for r in rows])
    fits = OrderedDict()
    for d, fit in slopes.items():
        fits["%r" % d] = fit
    write_json(manifest.add_output("gap_fits.json"), fits)
    manifest.results["slopes"] = OrderedDict(
        (k, None if v is None else v["slope"]) for k, v in fits.items())
    manifest.results["relative_spread"] = OrderedDict(
        (k, None if v is None else v["relative_spread"])
        for k, v in fits.items())
    manifest.results["failed_points"] = sum(1 for r in rows if r["error"])


def profile_summary(res):
    summary = OrderedDict([("N", res.cfg.N), ("delta", res.cfg.delta)])
    for leg, density in ((LEG_A, res.density_A), (LEG_B, res.density_B)):
        positive = bool(numpy.all(density > 0))
        summary["crossover_%s" % leg] = skin_crossover(density) \
            if positive else None
        summary["log_r_squared_%s" % leg] = \
            log_linear_fit(density)["r_squared"] if positive else None
    summary["rotation_defect"] = rotation_defect(res.density_A,
                                                 res.density_B)
    return summary


def cmd_steady_state(params, manifest, launcher):
    cfg = ladder(params, params["N"][0], params["delta"][0])
    rows, results = steady_profile_scan(cfg, params["N"], params["delta"],
                                        mapper=launcher.map)
    columns = ["N", "delta"] + DENSITY_COLUMNS
    write_csv(manifest.add_output("steady_density.csv", columns), columns,
              rows)
    summaries = [profile_summary(res) for res in results]
    columns = list(summaries[0].keys())
    write_csv(manifest.add_output("steady_summary.csv", columns), columns,
              [["" if s[k] is None else s[k] for k in columns]
               for s in summaries])
    manifest.results["skin_crossover"] = [
        OrderedDict([("N", s["N"]), ("delta", s["delta"]),
                     ("A", s["crossover_A"]), ("B", s["crossover_B"])])
        for s in summaries]


def cmd_perturb(params, manifest, launcher):
    order = int(params["order"])
    if order not in (0, 1):
        raise UsageError("Unsupported perturbation order '%s': only 0 and 1"
                         % params["order"])
    cfg = ladder(params, single(params, "N"), single(params, "delta"))
    es = heff_eigensystem(cfg)
    write_csv(manifest.add_output("heff_spectrum.csv", SPECTRUM_COLUMNS),
              SPECTRUM_COLUMNS, spectrum_rows(es.energies))
    exact = scipy.linalg.eigvals(build_liouvillian(cfg).entries)
    zeroth = zeroth_order_spectrum(cfg, es)
    write_csv(manifest.add_output("pert_spectrum_order0.csv", PAIR_COLUMNS),
              PAIR_COLUMNS, pair_rows(zeroth))
    manifest.results["heff_condition"] = es.condition
    manifest.results["hausdorff_order0"] = hausdorff_distance(zeroth, exact)
    if order == 1:
        first = first_order_spectrum(cfg, es=es)
        columns = PAIR_COLUMNS + ["ill_conditioned"]
        write_csv(manifest.add_output("pert_spectrum_order1.csv", columns),
                  columns, pair_rows(first.eigenvalues,
                                     first.ill_conditioned.ravel()))
        h1 = hausdorff_distance(first.eigenvalues, exact)
        manifest.results["hausdorff_order1"] = h1
        manifest.results["first_order_closer"] = \
            h1 < manifest.results["hausdorff_order0"]
        manifest.results["degenerate_clusters"] = first.clusters
        manifest.results["ill_conditioned_pairs"] = int(
            first.ill_conditioned.sum())
    fit = max_im_eigenstate_fit(cfg)
    rows = [f.as_dict() for f in [fit] + fit.partners]
    columns = list(rows[0].keys())
    write_csv(manifest.add_output("localization_fit.csv", columns), columns,
              [[r[k] for k in columns] for r in rows])
    manifest.results["kappa_N"] = fit.kappa * cfg.N
    manifest.results["localization_rejected"] = fit.rejected
    manifest.results["size_sensitivity"] = size_sensitivity(cfg, [cfg.N])[0]
    if params["postselected"]:
        report = postselected_profile(cfg)
        columns = ["rung", "leg", "postselected", "steady"]
        rows = []
        for j in range(cfg.N):
            for leg in (LEG_A, LEG_B):
                rows.append((j + 1, leg, report["postselected_" + leg][j],
                             report["steady_" + leg][j]))
        write_csv(manifest.add_output("postselected_profile.csv", columns),
                  columns, rows)
        manifest.results["postselected_max_deviation"] = \
            report["max_deviation"]


def mean_rows(N, times, mean, stderr):
    return [(N, t, m, s) for t, m, s in zip(times, mean, stderr)]


def profile_rows(N, mean, stderr):
    rows = []
    for j in range(len(mean[0])):
        rows.append((N, j + 1, LEG_A, mean[0][j], stderr[0][j]))
        rows.append((N, j + 1, LEG_B, mean[1][j], stderr[1][j]))
    return rows


def safe_correlation_fits(corr, N):
    try:
        return correlation_fits(corr, N)
    except UsageError as e:
        logger.info("correlation fit skipped for N=%d: %s", N, e)
        return None


def safe_scaling_fits(points, models):
    points = [p for p in points if numpy.isfinite(p[1])]
    fits = OrderedDict()
    for model in models:
        try:
            fits[model] = scaling_fit(points, model)
        except UsageError as e:
            logger.info("%s scaling fit skipped: %s", model, e)
            fits[model] = None
    return fits


def dump_trajectories(manifest, N, series):
    ensure_dir(manifest.path("trajectories"))
    columns = ["time", "entropy_half", "mutual_info", "jumps",
               "orthonormality"]
    for s in series:
        name = os.path.join("trajectories",
                            "N%d_traj%05d.csv" % (N, s.trajectory_id))
        write_csv(manifest.add_output(name, columns), columns,
                  zip(s.times, s.entropy_half, s.mutual_info, s.jumps,
                      s.orthonormality))


def cmd_trajectories(params, manifest, launcher):
    delta = single(params, "delta")
    n_traj = int(params["n_traj"])
    if n_traj < 2:
        raise UsageError("Ensemble statistics need --n-traj >= 2, got '%s'" %
                         n_traj)
    if params["initial"] not in INITIAL_STATES:
        raise UsageError("Unknown initial state '%s'" % params["initial"])
    reporter = SimpleProgressReporter()
    tables = OrderedDict((k, []) for k in ("entropy_t", "mi_t", "density_t",
                                           "steady_profile", "corr_decay"))
    fits = OrderedDict([("mi_convention", MI_CONVENTION),
                        ("steady_fraction", 0.2), ("runs", [])])
    scaling = OrderedDict([("entropy", []), ("mi", [])])
    for N in params["N"]:
        cfg = ladder(params, N, delta)
        tcfg = TrajectoryConfig(dt=params["dt"],
                                t_total=resolve_t_total(params["t_total"], N),
                                sample_interval=params["sample_interval"],
                                seed=params["seed"])
        series, stats = run_trajectories(cfg, tcfg, n_traj, launcher,
                                         reporter, params["initial"])
        ens = ensemble_statistics(series)
        if params["dump_trajectories"]:
            dump_trajectories(manifest, N, series)

        tables["entropy_t"] += mean_rows(N, ens.times,
                                         ens.mean["entropy_half"],
                                         ens.stderr["entropy_half"])
        tables["mi_t"] += mean_rows(N, ens.times, ens.mean["mutual_info"],
                                    ens.stderr["mutual_info"])
        for k, t in enumerate(ens.times):
            for j in range(N):
                for leg in (LEG_A, LEG_B):
                    name = "density_%s" % leg
                    tables["density_t"].append(
                        (N, t, j + 1, leg, ens.mean[name][k][j],
                         ens.stderr[name][k][j]))
        st = ens.steady
        tables["steady_profile"] += profile_rows(
            N, (st["density_A"][0], st["density_B"][0]),
            (st["density_A"][1], st["density_B"][1]))
        corr_AA, corr_BB = st["corr_AA"], st["corr_BB"]
        for x in range(1, len(corr_AA[0]) + 1):
            tables["corr_decay"].append(
                (N, x, float(chord_distance(x, N)), corr_AA[0][x - 1],
                 corr_AA[1][x - 1], corr_BB[0][x - 1], corr_BB[1][x - 1]))

        s_max, t_max = ens.max_entropy
        s_steady = float(st["entropy_half"][0])
        scaling["entropy"].append((N, s_steady, float(st["entropy_half"][1])))
        scaling["mi"].append((N, float(st["mutual_info"][0]),
                              float(st["mutual_info"][1])))
        fits["runs"].append(OrderedDict([
            ("N", N), ("t_total", tcfg.t_total),
            ("steady_window_start", ens.window_start),
            ("steady_entropy", st["entropy_half"]),
            ("steady_mutual_info", st["mutual_info"]),
            ("max_entropy", s_max), ("max_entropy_time", t_max),
            ("entropy_overshoot",
             s_max / s_steady if s_steady > 0 else None),
            ("corr_AA_fit", safe_correlation_fits(corr_AA[0], N)),
            ("corr_BB_fit", safe_correlation_fits(corr_BB[0], N)),
            ("max_orthonormality", float(max(s.orthonormality.max()
                                             for s in series))),
            ("mean_jumps", float(numpy.mean([s.jumps[-1] for s in series]))),
            ("retried", stats["retried"]),
        ]))

    columns = ["N", "time", "mean", "stderr"]
    for name in ("entropy_t", "mi_t"):
        write_csv(manifest.add_output(name + ".csv", columns), columns,
                  tables[name])
    columns = ["N", "time", "rung", "leg", "mean", "stderr"]
    write_csv(manifest.add_output("density_t.csv", columns), columns,
              tables["density_t"])
    columns = ["N", "rung", "leg", "mean", "stderr"]
    write_csv(manifest.add_output("steady_profile.csv", columns), columns,
              tables["steady_profile"])
    columns = ["N", "x", "chord", "C_AA", "C_AA_stderr", "C_BB",
               "C_BB_stderr"]
    write_csv(manifest.add_output("corr_decay.csv", columns), columns,
              tables["corr_decay"])
    if len(params["N"]) > 1:
        columns = ["N", "mean", "stderr"]
        for name in ("entropy", "mi"):
            write_csv(manifest.add_output(name + "_scaling.csv", columns),
                      columns, scaling[name])
            fits[name + "_scaling"] = safe_scaling_fits(
                [(n, v) for n, v, _ in scaling[name]], ("plateau", "log"))
    write_json(manifest.add_output("fits.json"), fits)
    manifest.results["steady_entropy"] = [
        OrderedDict([("N", n), ("mean", v), ("stderr", e)])
        for n, v, e in scaling["entropy"]]


def cmd_oracle_compare(params, manifest, launcher):
    N = single(params, "N")
    delta = single(params, "delta")
    report = cross_validate(N, gamma=params["gamma"], delta=delta,
                            t=params["t"], seed=params["seed"])
    columns = ["name", "residual", "tolerance", "passed"]
    write_csv(manifest.add_output("oracle_report.csv", columns), columns,
              [[c[k] for k in columns] for c in report["checks"]])

    cfg = ladder(params, N, delta)
    single_particle = fock_liouvillian(build_fock_operators(cfg, 1))
    write_csv(manifest.add_output("oracle_spectrum.csv", SPECTRUM_COLUMNS),
              SPECTRUM_COLUMNS,
              spectrum_rows(single_particle.eigenvalues()))

    ops = build_fock_operators(cfg, N)
    U = basis_state(cfg, neel_sites(cfg.n_sites)).U
    times = numpy.arange(0.0, 2.0 * N + 0.5, params["sample_interval"])
    evo = exact_evolve(ops, slater_density_matrix(U, ops.basis), times)
    columns = ["time", "site", "density"]
    write_csv(manifest.add_output("oracle_densities.csv", columns), columns,
              [(t, k + 1, n[k]) for t, n in zip(evo.times, evo.densities)
               for k in range(cfg.n_sites)])

    manifest.results["passed"] = report["passed"]
    manifest.results["worst"] = report["worst"]
    if not report["passed"]:
        manifest.write()
        worst = [c for c in report["checks"]
                 if c["name"] == report["worst"]][0]
        raise NumericalError("oracle check '%s' failed: residual %g > %g" %
                             (worst["name"], worst["residual"],
                              worst["tolerance"]))


COMMANDS = OrderedDict([
    ("spectrum", cmd_spectrum),
    ("gap-scan", cmd_gap_scan),
    ("steady-state", cmd_steady_state),
    ("perturb", cmd_perturb),
    ("trajectories", cmd_trajectories),
    ("oracle-compare", cmd_oracle_compare),
])

TRAJECTORY_COMMANDS = ("trajectories", "oracle-compare")


def build_parser():
    parser = argparse.ArgumentParser(prog="skinladder", description=__doc__)

    common = argparse.ArgumentParser(add_help=False)
    ag = common.add_argument_group("Global options")
    ag.add_argument("--config",
                    default=None,
                    metavar="FILE",
                    help="Config file (.json/.jsonc/.yaml), flags override it")
    ag.add_argument("-v",
                    "--verbose",
                    action="store_true",
                    default=False,
                    help="Be verbose (debug logging)")
    ag.add_argument("--out-dir",
                    default=None,
                    help="Output directory (default: $SKINLADDER_OUTPUT_ROOT"
                    "/<subcommand> or ./skinladder-out/<subcommand>)")

    ag = common.add_argument_group("Model options")
    ag.add_argument("--N",
                    default=None,
                    help="Number of rungs, comma separated for sweeps")
    ag.add_argument("--t", type=float, default=None,
                    help="Intrachain hopping (default: 1)")
    ag.add_argument("--delta",
                    default=None,
                    help="Interchain hopping, comma separated for sweeps")
    ag.add_argument("--gamma", type=float, default=None,
                    help="Dissipation strength (default: 0.5)")

    ag = common.add_argument_group("Launcher options")
    ag.add_argument("--launcher",
                    choices=["serial", "process", "auto"],
                    default=None,
                    help="Worker launcher (default: auto)")
    ProcessPoolLauncher.register_cmdline_args(ag)

    traj = argparse.ArgumentParser(add_help=False)
    ag = traj.add_argument_group("Trajectory options")
    ag.add_argument("--dt", type=float, default=None,
                    help="Time step (default: 0.05)")
    ag.add_argument("--t-total",
                    default=None,
                    help="Total time, or 'auto' for 2N (default: auto)")
    ag.add_argument("--n-traj", type=int, default=None,
                    help="Number of trajectories (default: 300)")
    ag.add_argument("--seed", type=int, default=None,
                    help="Master seed (default: 0)")
    ag.add_argument("--initial",
                    choices=list(INITIAL_STATES),
                    default=None,
                    help="Initial state (default: neel)")
    ag.add_argument("--sample-interval", type=float, default=None,
                    help="Observable recording period (default: 1)")
    ag.add_argument("--dump-trajectories",
                    action="store_true",
                    default=None,
                    help="Write one CSV per trajectory")

    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    sub.required = True
    sub.add_parser("spectrum", parents=[common],
                   help="Liouvillian spectrum and steady state")
    sub.add_parser("gap-scan", parents=[common],
                   help="Liouvillian gap over an N x delta grid")
    sub.add_parser("steady-state", parents=[common],
                   help="Steady-state density profiles")
    p = sub.add_parser("perturb", parents=[common],
                       help="Perturbative spectra and H_eff localization")
    p.add_argument("--order", type=int, choices=[0, 1], default=None,
                   help="Perturbation order (default: 1)")
    p.add_argument("--postselected",
                   action="store_true",
                   default=None,
                   help="Compare the max-Im eigenspace of h_eff with the "
                   "Lindblad steady state")
    sub.add_parser("trajectories", parents=[common, traj],
                   help="Many-body quantum-jump trajectories")
    sub.add_parser("oracle-compare", parents=[common, traj],
                   help="Cross-check against the exact many-body Lindbladian")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else
                        logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    flags = dict((k, v) for k, v in vars(args).items()
                 if k not in ("subcommand", "config", "verbose"))
    defaults = OrderedDict(DEFAULTS)
    defaults.update(SUBCOMMAND_DEFAULTS.get(args.subcommand, {}))
    try:
        config = load_conf(args.config) if args.config else None
        params = resolve_parameters(config, flags, defaults)
        out_dir = ensure_dir(output_dir(args.subcommand, params["out_dir"]))
        seed = params["seed"] if args.subcommand in TRAJECTORY_COMMANDS \
            else None
        manifest = RunManifest(out_dir, args.subcommand, params, seed)
        launcher = make_launcher(params["launcher"], params["workers"])
        logger.info("%s: writing to %s", args.subcommand, out_dir)
        COMMANDS[args.subcommand](params, manifest, launcher)
        manifest.write()
    except SkinLadderError as e:
        sys.stderr.write("error: %s\n" % e)
        return e.exit_code
    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())
