import unittest

import argparse
import io
import json
import math
import os
import subprocess
import sys
import tempfile
from fractions import Fraction
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

from geocorr.exceptions import DomainError
from geocorr.analytic import bound_pair
from geocorr.extremal import engine, min_corr
from GeoCorr import (SCAN_COLUMNS, apply_config, compute_report,
                     config_sections, format_fraction, format_value,
                     kink_table, load_json, n_workers, params, probability,
                     sample_count, scan, scan_grid, verify, write_scan)

ROOT = Path(__file__).resolve().parents[1]
SCRIPT = ROOT.joinpath("GeoCorr.py")
GOLDEN_PATH = ROOT.joinpath("tests", "data", "figure1.csv")


def run_script(*args, env=None):
    cmd = [sys.executable, str(SCRIPT), "-Q", *args]
    if env is not None:
        env = {**os.environ, **env}
    return subprocess.run(cmd, capture_output=True, text=True, cwd=ROOT,
                          env=env)


class TestEntryPoint(unittest.TestCase):

    def test_help(self):
        for command in ["compute", "scan", "kinks", "verify", "sample"]:
            result = run_script(command, "--help")
            self.assertEqual(result.returncode, 0, result.stderr)
            self.assertIn("usage", result.stdout)

    def test_config_sections(self):
        self.assertIs(config_sections["extremal"], engine.default_options)
        for options in config_sections.values():
            self.assertIsInstance(options, dict)

    def test_executable(self):
        self.assertTrue(os.access(SCRIPT, os.X_OK))


class TestArguments(unittest.TestCase):

    def test_probability(self):
        self.assertEqual(probability("1/4"), Fraction(1, 4))
        self.assertEqual(probability("0.25"), Fraction(1, 4))
        self.assertEqual(probability("1"), 1)
        for text in ["0", "5/4", "abc", "1/0"]:
            with self.assertRaises(argparse.ArgumentTypeError):
                probability(text)

    def test_sample_count(self):
        self.assertEqual(sample_count("10^6"), 10**6)
        self.assertEqual(sample_count("1e6"), 10**6)
        self.assertEqual(sample_count("1000"), 1000)
        for text in ["1.5", "0", "ten", "2^x"]:
            with self.assertRaises(argparse.ArgumentTypeError):
                sample_count(text)

    def test_formatting(self):
        self.assertEqual(format_fraction(Fraction(221, 128), 256), "442/256")
        self.assertEqual(format_fraction(Fraction(-931, 1536), 3072),
                         "-1862/3072")
        self.assertEqual(format_fraction(Fraction(0), 1), "0")
        self.assertEqual(format_fraction(Fraction(1, 3), 256), "1/3")
        self.assertEqual(format_value(0.1), "0.1")
        self.assertEqual(format_value(-1862 / 3072), "-0.606119791666667")

    def test_workers(self):
        with mock.patch.dict(os.environ, {"GEO_EXTREMAL_THREADS": "2"}):
            self.assertEqual(n_workers(8), 2)
            self.assertLessEqual(n_workers(0), 2)
        with mock.patch.dict(os.environ, {}, clear=True):
            self.assertEqual(n_workers(3), 3)
            self.assertGreaterEqual(n_workers(0), 1)
        with mock.patch.dict(os.environ, {"GEO_EXTREMAL_THREADS": "many"}):
            with self.assertRaises(DomainError):
                n_workers(2)
        result = run_script("sample", "0.3", "0.3", "10", "1",
                            env={"GEO_EXTREMAL_THREADS": "many"})
        self.assertEqual(result.returncode, 2, result.stderr)
        self.assertIn("GEO_EXTREMAL_THREADS", result.stderr)


class TestConfig(unittest.TestCase):

    def test_default_file(self):
        config = load_json(ROOT.joinpath("geocorr_config.json"))
        self.assertTrue(set(config) <= set(config_sections))
        self.assertEqual(config["exact"]["bit_budget"], 4096)

    def test_missing_file(self):
        self.assertEqual(load_json(ROOT.joinpath("no_such_config.json")), {})

    def test_apply(self):
        options = config_sections["exact"]
        saved = dict(options)
        try:
            apply_config({"exact": {"bit_budget": 128}})
            self.assertEqual(options["bit_budget"], 128)
        finally:
            options.update(saved)
        with self.assertRaises(DomainError):
            apply_config({"plotting": {}})
        with self.assertRaises(DomainError):
            apply_config({"exact": {"bits": 1}})


class TestCompute(unittest.TestCase):

    def test_report(self):
        report = compute_report(Fraction(1, 4), Fraction(1, 4), exact=True)
        self.assertEqual(report["e_xy_exact"], "442/256")
        self.assertEqual(report["rho_min_exact"], "-1862/3072")
        self.assertAlmostEqual(report["rho_min"], -1862 / 3072, places=12)
        self.assertAlmostEqual(report["rho_max"], 1.0, places=12)
        self.assertEqual(report["n_breakpoints"], 8)
        self.assertEqual(report["path"], "GeneralEnumeration")

    def test_half_case(self):
        report = compute_report(Fraction(3, 5), Fraction(7, 10))
        self.assertAlmostEqual(report["rho_min"], -math.sqrt(0.12),
                               places=14)
        self.assertEqual(report["path"], "ClosedFormHalf")
        self.assertNotIn("e_xy_exact", report)

    def test_budget_skip(self):
        report = compute_report(Fraction(1, 1000), Fraction(1, 1000),
                                exact=True)
        self.assertNotIn("e_xy_exact", report)
        self.assertLess(report["rho_min"], 0)

    def test_script_exact(self):
        result = run_script("compute", "1/4", "1/4", "--exact")
        self.assertEqual(result.returncode, 0, result.stderr)
        self.assertIn("e_xy = 442/256", result.stdout)
        self.assertIn("rho_min = -1862/3072", result.stdout)

    def test_script_json(self):
        result = run_script("compute", "0.6", "0.7", "--json")
        self.assertEqual(result.returncode, 0, result.stderr)
        report = json.loads(result.stdout)
        self.assertAlmostEqual(report["rho_min"], -math.sqrt(0.12),
                               places=14)

    def test_script_errors(self):
        result = run_script("compute", "1.0", "0.5")
        self.assertEqual(result.returncode, 2)
        self.assertIn("p1", result.stderr)
        result = run_script("compute", "abc", "0.5")
        self.assertEqual(result.returncode, 2)
        self.assertIn("p1", result.stderr)


class TestScan(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.df = scan(0.05, 0.95, 0.01, j=1, quiet=True)

    def test_grid(self):
        grid = scan_grid(0.05, 0.95, 0.01, at=[Fraction(1, 3)])
        self.assertEqual(len(grid), 92)
        self.assertTrue(np.all(np.diff(grid) > 0))
        self.assertIn(1 / 3, grid)
        with self.assertRaises(DomainError):
            scan_grid(0.5, 0.4, 0.01)

    def test_rows(self):
        df = self.df
        self.assertEqual(list(df.columns), SCAN_COLUMNS)
        self.assertTrue(np.all(np.diff(df["p"]) > 0))
        upper = df[df["p"] >= 0.5]
        np.testing.assert_allclose(upper["rho_min"], upper["p"] - 1,
                                   rtol=0, atol=1e-12)
        row = df[np.isclose(df["p"], 0.25)].iloc[0]
        self.assertAlmostEqual(row["rho_min"], -1862 / 3072, places=12)
        row = df[np.isclose(df["p"], 0.4)].iloc[0]
        self.assertTrue(row["bound_lower"] <= row["rho_min"]
                        <= row["bound_upper"])
        self.assertTrue(np.all(df["bound_lower"] - 1e-12 <= df["rho_min"]))
        self.assertTrue(np.all(df["rho_min"] <= df["bound_upper"] + 1e-12))

    def test_csv_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp).joinpath("scan.csv")
            write_scan(self.df, path, "csv")
            raw = path.read_bytes()
            self.assertNotIn(b"\r\n", raw)
            self.assertTrue(raw.startswith(
                b"p,rho_min,bound_lower,bound_upper,n_breakpoints\n"))
            cells = pd.read_csv(path, dtype=str)
        for _, row in cells.iterrows():
            p = float(row["p"])
            result = min_corr(p, p)
            bounds = bound_pair(p, p)
            self.assertEqual(row["rho_min"], format_value(result.rho))
            self.assertEqual(row["bound_lower"], format_value(bounds.lower))
            self.assertEqual(row["bound_upper"], format_value(bounds.upper))
            self.assertEqual(int(row["n_breakpoints"]), result.n_breakpoints)

    def test_json(self):
        buffer = io.StringIO()
        with mock.patch("sys.stdout", buffer):
            write_scan(self.df.head(3), None, "json")
        records = json.loads(buffer.getvalue())
        self.assertEqual(len(records), 3)
        self.assertEqual(list(records[0]), SCAN_COLUMNS)

    def test_parallel_matches_serial(self):
        parallel = scan(0.05, 0.95, 0.01, j=2, quiet=True)
        pd.testing.assert_frame_equal(parallel, self.df)

    def test_unwritable(self):
        result = run_script("scan", "0.3", "0.6", "0.1", "--out",
                            "/nonexistent_dir/scan.csv")
        self.assertEqual(result.returncode, 3)


class TestFigure(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.df = scan(0.02, 0.98, 0.002, j=params["j"], quiet=True)
        cls.text = cls.df.to_csv(index=False, float_format="%.15g",
                                 lineterminator="\n")

    def test_shape(self):
        lower = self.df[self.df["p"] < 0.5]["rho_min"].to_numpy()
        turns = np.count_nonzero(np.diff(np.sign(np.diff(lower))) != 0)
        self.assertGreaterEqual(turns, 3)
        upper = self.df[self.df["p"] >= 0.5]
        np.testing.assert_allclose(upper["rho_min"], upper["p"] - 1,
                                   rtol=0, atol=1e-12)

    def test_regeneration(self):
        again = scan(0.02, 0.98, 0.002, j=1, quiet=True)
        self.assertEqual(again.to_csv(index=False, float_format="%.15g",
                                      lineterminator="\n"), self.text)

    def test_golden(self):
        self.assertTrue(GOLDEN_PATH.is_file(), f"missing {GOLDEN_PATH}")
        self.assertEqual(GOLDEN_PATH.read_text(), self.text)


class TestKinks(unittest.TestCase):

    def test_table(self):
        df = kink_table(0.35)
        np.testing.assert_allclose(df["p"], [0.5, 0.381966], atol=1e-6)
        self.assertTrue(np.all(np.abs(df["slope_jump"]) > 10 * df["noise"]))

    def test_script(self):
        result = run_script("kinks", "0.29")
        self.assertEqual(result.returncode, 0, result.stderr)
        df = pd.read_csv(io.StringIO(result.stdout))
        self.assertEqual(list(df.columns),
                         ["i", "c", "x", "p", "slope_jump", "noise"])
        self.assertTrue(np.any(np.isclose(df["p"], 0.292893, atol=1e-6)))
        result = run_script("kinks", "0.5")
        df = pd.read_csv(io.StringIO(result.stdout))
        self.assertEqual(len(df), 1)
        result = run_script("kinks", "0.7")
        self.assertEqual(result.returncode, 2)


class TestVerify(unittest.TestCase):

    def test_quarter(self):
        df = verify(Fraction(1, 4), Fraction(1, 4), 10**6, 42)
        self.assertFalse((df["status"] == "fail").any(), df.to_string())
        self.assertEqual(set(df["status"]), {"pass"})

    def test_half_case(self):
        df = verify(Fraction(3, 5), Fraction(7, 10), 10**5, 7)
        self.assertFalse((df["status"] == "fail").any(), df.to_string())

    def test_script(self):
        result = run_script("verify", "0.999999", "0.5", "10^5", "3")
        self.assertEqual(result.returncode, 0, result.stdout + result.stderr)
        self.assertIn("skip", result.stdout)
        result = run_script("verify", "0.3", "0.3", "100", "3")
        self.assertEqual(result.returncode, 2)


class TestSample(unittest.TestCase):

    def test_countermonotone(self):
        result = run_script("sample", "0.5", "0.5", "5", "1",
                            "countermonotone")
        self.assertEqual(result.returncode, 0, result.stderr)
        pairs = np.loadtxt(io.StringIO(result.stdout), delimiter=",",
                           dtype=np.int64, ndmin=2)
        self.assertEqual(pairs.shape, (5, 2))
        self.assertTrue(np.all(pairs.min(axis=1) == 0))
        again = run_script("sample", "0.5", "0.5", "5", "1",
                           "countermonotone")
        self.assertEqual(result.stdout, again.stdout)

    def test_comonotone(self):
        result = run_script("sample", "0.3", "0.3", "10", "1", "comonotone")
        pairs = np.loadtxt(io.StringIO(result.stdout), delimiter=",",
                           dtype=np.int64, ndmin=2)
        np.testing.assert_array_equal(pairs[:, 0], pairs[:, 1])

    def test_count_formats(self):
        result = run_script("sample", "0.25", "0.25", "10^3", "1")
        self.assertEqual(len(result.stdout.splitlines()), 1000)

    def test_bad_coupling(self):
        result = run_script("sample", "0.3", "0.3", "10", "1", "sideways")
        self.assertEqual(result.returncode, 2)
        self.assertIn("sideways", result.stderr)
