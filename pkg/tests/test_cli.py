# coding: utf-8

import contextlib
import io
import json
import os
import shutil
import tempfile
import unittest
from unittest import mock

from skinladder.common.errors import (CapacityError, EXIT_CAPACITY,
                                      EXIT_SUCCESS, EXIT_USAGE)
from skinladder.common.manifest import MANIFEST_NAME
from skinladder.common.utils import read_csv
from skinladder.tools.main import main


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def run_main(self, name, argv):
        out_dir = os.path.join(self.tmp, name)
        stdout, stderr = io.StringIO(), io.StringIO()
        with contextlib.redirect_stdout(stdout), \
                contextlib.redirect_stderr(stderr):
            code = main(argv + ["--out-dir", out_dir])
        self.stderr = stderr.getvalue()
        return code, out_dir

    def read(self, out_dir, name):
        with io.open(os.path.join(out_dir, name), "rb") as f:
            return f.read()

    def manifest(self, out_dir):
        with io.open(os.path.join(out_dir, MANIFEST_NAME),
                     encoding="utf-8") as f:
            return json.load(f)

    def test_spectrum(self):
        argv = ["spectrum", "--N", "3", "--delta", "0.1", "--gamma", "0.5"]
        code, first = self.run_main("a", argv)
        self.assertEqual(code, EXIT_SUCCESS)
        header, rows = read_csv(os.path.join(first, "spectrum.csv"))
        self.assertEqual(header, ["index", "re", "im"])
        self.assertEqual(len(rows), 36)
        header, rows = read_csv(os.path.join(first, "steady_density.csv"))
        self.assertEqual(len(rows), 6)
        results = self.manifest(first)["results"]
        self.assertLess(results["rotation_defect"], 1e-8)
        self.assertLessEqual(results["max_real"], 1e-9)
        _, second = self.run_main("b", argv)
        for name in ("spectrum.csv", "steady_density.csv"):
            self.assertEqual(self.read(first, name), self.read(second, name))

    def test_spectral_range(self):
        code, out = self.run_main("r", ["spectrum", "--N", "3,4",
                                        "--delta", "0.01"])
        self.assertEqual(code, EXIT_SUCCESS)
        _, rows = read_csv(os.path.join(out, "spectral_range.csv"))
        self.assertEqual([r[0] for r in rows], ["3", "4"])

    def test_usage_errors(self):
        code, _ = self.run_main("e", ["spectrum", "--N", ""])
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("error:", self.stderr)
        code, _ = self.run_main("g", ["spectrum", "--N", "3",
                                      "--gamma", "-1"])
        self.assertEqual(code, EXIT_USAGE)
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(["perturb", "--order", "2"])
        self.assertEqual(ctx.exception.code, 2)

    def test_capacity_exit_code(self):
        with mock.patch("skinladder.tools.main.solve",
                        side_effect=CapacityError("test matrix", 10, 1)):
            code, _ = self.run_main("c", ["spectrum", "--N", "3"])
        self.assertEqual(code, EXIT_CAPACITY)
        self.assertIn("memory cap", self.stderr)

    def test_gap_scan(self):
        code, out = self.run_main("gap", ["gap-scan", "--N", "3,4,5",
                                          "--delta", "0.5"])
        self.assertEqual(code, EXIT_SUCCESS)
        header, rows = read_csv(os.path.join(out, "gap_scan.csv"))
        self.assertEqual(header, ["N", "delta", "gap", "error"])
        self.assertEqual(len(rows), 3)
        results = self.manifest(out)["results"]
        self.assertEqual(results["failed_points"], 0)
        self.assertTrue(os.path.exists(os.path.join(out, "gap_fits.json")))

    def test_steady_state(self):
        code, out = self.run_main("ss", ["steady-state", "--N", "4,5",
                                         "--delta", "0,0.5"])
        self.assertEqual(code, EXIT_SUCCESS)
        header, rows = read_csv(os.path.join(out, "steady_density.csv"))
        self.assertEqual(header, ["N", "delta", "rung", "leg", "density"])
        self.assertEqual(len(rows), 36)
        _, rows = read_csv(os.path.join(out, "steady_summary.csv"))
        self.assertEqual(len(rows), 4)

    def test_perturb(self):
        code, out = self.run_main("p", ["perturb", "--N", "4",
                                        "--delta", "0.3"])
        self.assertEqual(code, EXIT_SUCCESS)
        for name in ("heff_spectrum.csv", "pert_spectrum_order0.csv",
                     "pert_spectrum_order1.csv", "localization_fit.csv"):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        _, rows = read_csv(os.path.join(out, "pert_spectrum_order1.csv"))
        self.assertEqual(len(rows), 64)
        results = self.manifest(out)["results"]
        self.assertIn("hausdorff_order1", results)
        self.assertIn("kappa_N", results)
        self.assertNotIn("postselected_max_deviation", results)
        self.assertFalse(os.path.exists(
            os.path.join(out, "postselected_profile.csv")))

    def test_perturb_postselected(self):
        code, out = self.run_main("ps", ["perturb", "--N", "4", "--delta",
                                         "0.3", "--postselected"])
        self.assertEqual(code, EXIT_SUCCESS)
        header, rows = read_csv(os.path.join(out, "postselected_profile.csv"))
        self.assertEqual(header, ["rung", "leg", "postselected", "steady"])
        self.assertEqual(len(rows), 8)
        self.assertAlmostEqual(sum(float(r[2]) for r in rows), 1.0, places=6)
        results = self.manifest(out)["results"]
        self.assertGreaterEqual(results["postselected_max_deviation"], 0.0)

    def test_trajectories(self):
        argv = ["trajectories", "--N", "8", "--delta", "0.1", "--n-traj", "3",
                "--t-total", "4", "--seed", "5", "--dump-trajectories"]
        code, first = self.run_main("t1", argv + ["--launcher", "serial"])
        self.assertEqual(code, EXIT_SUCCESS)
        for name in ("entropy_t.csv", "mi_t.csv", "density_t.csv",
                     "steady_profile.csv", "corr_decay.csv", "fits.json",
                     os.path.join("trajectories", "N8_traj00002.csv")):
            self.assertTrue(os.path.exists(os.path.join(first, name)), name)
        _, rows = read_csv(os.path.join(first, "entropy_t.csv"))
        self.assertEqual(len(rows), 5)
        manifest = self.manifest(first)
        self.assertEqual(manifest["seed"], 5)
        _, second = self.run_main("t2", argv + ["--launcher", "auto",
                                                "--workers", "2"])
        for name in ("entropy_t.csv", "density_t.csv", "corr_decay.csv"):
            self.assertEqual(self.read(first, name), self.read(second, name))

    def test_trajectories_need_ensemble(self):
        code, _ = self.run_main("t", ["trajectories", "--N", "8",
                                      "--n-traj", "1"])
        self.assertEqual(code, EXIT_USAGE)
        code, _ = self.run_main("t3", ["trajectories", "--N", "3",
                                       "--n-traj", "2", "--t-total", "2"])
        self.assertEqual(code, EXIT_USAGE)

    def test_oracle_compare(self):
        code, out = self.run_main("o", ["oracle-compare"])
        self.assertEqual(code, EXIT_SUCCESS)
        _, rows = read_csv(os.path.join(out, "oracle_report.csv"))
        self.assertTrue(all(r[3] == "True" for r in rows))
        self.assertTrue(self.manifest(out)["results"]["passed"])

    def test_config_file(self):
        fn = os.path.join(self.tmp, "run.yaml")
        with io.open(fn, "w", encoding="utf-8") as f:
            f.write("N: 3\ndelta: 0.2\ngamma: 0.4\n")
        code, out = self.run_main("cfg", ["spectrum", "--config", fn,
                                          "--gamma", "0.3"])
        self.assertEqual(code, EXIT_SUCCESS)
        params = self.manifest(out)["parameters"]
        self.assertEqual(params["N"], [3])
        self.assertEqual(params["delta"], [0.2])
        self.assertEqual(params["gamma"], 0.3)


if __name__ == "__main__":
    unittest.main()
