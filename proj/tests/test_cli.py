# SPDX-FileCopyrightText: 2026 The bpve authors
# SPDX-License-Identifier: Apache-2.0

"""End-to-end checks of the bpve command-line tool.

usage: test_cli.py <bpve executable> <source dir>
"""

import json
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema
import referencing

EXE = None
SRC = None


def load_schemas():
    registry = referencing.Registry()
    schemas = {}
    for name in ("schedule.schema.json", "output.schema.json"):
        doc = json.loads((SRC / "schemas" / name).read_text())
        schemas[name] = doc
        registry = registry.with_resource(doc["$id"], referencing.Resource.from_contents(doc))
    make = jsonschema.Draft202012Validator
    return (make(schemas["schedule.schema.json"], registry=registry),
            make(schemas["output.schema.json"], registry=registry))


class Cli(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = pathlib.Path(cls.tmp.name)
        cls.input_schema, cls.output_schema = load_schemas()

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def run_cli(self, *args):
        return subprocess.run([str(EXE), *map(str, args)], capture_output=True, text=True, timeout=300)

    def run_json(self, *args):
        out = self.dir / "out.json"
        out.unlink(missing_ok=True)
        proc = self.run_cli(*args, "--out", out)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        doc = json.loads(out.read_text())
        self.output_schema.validate(doc)
        return doc

    def config(self, name):
        return SRC / "configs" / name

    def write(self, name, doc):
        path = self.dir / name
        path.write_text(json.dumps(doc))
        return path

    # --- input validation -------------------------------------------------

    def test_shipped_configs_validate_and_load(self):
        for path in sorted((SRC / "configs").glob("*.json")):
            with self.subTest(config=path.name):
                self.input_schema.validate(json.loads(path.read_text()))
                doc = self.run_json("analyze", path, "--horizon", "200")
                self.assertTrue(doc["verdicts"])

    def test_malformed_input_exits_2_without_output(self):
        bad = {
            "misspelled_key": {"family": "poisson", "mean": 1.5, "meen": 2},
            "negative_mean": {"family": "poisson", "mean": -1},
            "unknown_family": {"family": "cauchy", "mean": 1},
            "bad_tail": {"schedule": {"family": "poisson", "mean": 2},
                         "tails": {"main0": {"kind": "geometric_ratio", "ratio": 1.5}}},
            "bad_witness": {"schedule": {"family": "poisson", "mean": 2}, "witness": {"c": 1, "C": 0}},
        }
        # Parameter values are checked by evaluating the schedule, not by the schema.
        semantic = {"negative_mean"}
        for name, doc in bad.items():
            with self.subTest(case=name):
                self.assertEqual(self.input_schema.is_valid(doc), name in semantic)
                path = self.write(name + ".json", doc)
                out = self.dir / (name + ".out.json")
                proc = self.run_cli("analyze", path, "--horizon", "50", "--out", out)
                self.assertEqual(proc.returncode, 2, proc.stderr)
                self.assertFalse(out.exists())
                self.assertTrue(proc.stderr)
        proc = self.run_cli("analyze", self.dir / "missing.json")
        self.assertEqual(proc.returncode, 2)
        (self.dir / "broken.json").write_text("{\"family\": ")
        self.assertEqual(self.run_cli("analyze", self.dir / "broken.json").returncode, 2)

    def test_parameter_leaving_its_domain_is_an_input_error(self):
        doc = {"family": "bernoulli",
               "success_prob": {"kind": "power", "scale": 0.5, "exponent": 1, "shift": 1}}
        proc = self.run_cli("extinction-curve", self.write("domain.json", doc))
        self.assertEqual(proc.returncode, 2)
        self.assertIn("generation 1", proc.stderr)

    # --- analyze ---------------------------------------------------------------

    def verdict(self, doc, criterion):
        return next(v for v in doc["verdicts"] if v["criterion"] == criterion)

    def test_analyze_squares(self):
        doc = self.run_json("analyze", self.config("geometric_squares.json"), "--horizon", "1000")
        v = self.verdict(doc, "thm_main0")
        self.assertEqual(v["outcome"], "Survives")
        self.assertEqual(v["qualifier"], "Certified")
        self.assertTrue(v["certificate"]["survival_certificate"]["valid"])
        self.assertEqual(doc["meta"]["command"], "analyze")
        self.assertEqual(len(doc["meta"]["schedule_hash"]), 16)

    def test_analyze_subcritical(self):
        doc = self.run_json("analyze", self.config("subcritical_geometric.json"))
        v = self.verdict(doc, "prop_main0ext")
        self.assertEqual(v["outcome"], "Extinct")

    def test_analyze_csv(self):
        out = self.dir / "a.csv"
        proc = self.run_cli("analyze", self.config("subcritical_geometric.json"), "--horizon", "300",
                            "--format", "csv", "--out", out)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], "criterion,process,outcome,qualifier,horizon")
        self.assertTrue(lines[1].startswith("prop_main0ext,bpve,Extinct,"))

    # --- other commands ----------------------------------------------------------

    def test_extinction_curve(self):
        doc = self.run_json("extinction-curve", self.config("explicit_third.json"), "--horizon", "200")
        self.assertAlmostEqual(doc["curve"]["values"][0], 1.0 / 3.0, places=6)
        out = self.dir / "curve.csv"
        self.run_cli("extinction-curve", self.config("explicit_third.json"), "--horizon", "10",
                     "--format", "csv", "--out", out)
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], "generation,e")
        self.assertEqual(len(lines), 12)

    def test_certificate(self):
        doc = self.run_json("certificate", self.config("geometric_squares.json"))
        self.assertTrue(doc["certificate"]["valid"])
        self.assertTrue(doc["verification"]["ok"])
        self.assertEqual(doc["certificate"]["K"], 200)

    def test_simulate(self):
        doc = self.run_json("simulate", self.config("less1surv.json"), "--horizon", "100",
                            "--replicas", "2000", "--seed", "4", "--trajectories", "3")
        est = doc["estimate"]
        self.assertEqual(est["alive"] + est["extinct"] + est["cap_hit"], 2000)
        self.assertEqual(len(doc["trajectories"]), 3)
        self.assertEqual(doc["meta"]["seed"], 4)
        self.assertEqual(doc["meta"]["options"]["horizon"], 100)

    def test_simulate_csv(self):
        out = self.dir / "traj.csv"
        proc = self.run_cli("simulate", self.config("binary_tree.json"), "--horizon", "5",
                            "--format", "csv", "--out", out)
        self.assertEqual(proc.returncode, 0, proc.stderr)
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], "replica,generation,Z")
        self.assertEqual(lines[-1], "0,5,32")

    def test_select(self):
        doc = self.run_json("select", self.config("nalpha_2.0.json"), "--horizon", "40", "--replicas", "300",
                            "--cap", "32", "--cap-policy", "prune", "--interval", "0.5,0.9",
                            "--trajectories", "2")
        self.assertIn("local_estimate", doc)
        self.assertEqual(doc["meta"]["options"]["cap_policy"], "prune_to_cap")
        out = self.dir / "sel.csv"
        self.run_cli("select", self.config("nalpha_2.0.json"), "--horizon", "10", "--format", "csv",
                     "--out", out)
        self.assertEqual(out.read_text().splitlines()[0], "replica,generation,N,l,count_in_I")

    def test_percolate(self):
        doc = self.run_json("percolate", self.config("binary_tree.json"), "--depth", "6",
                            "--replicas", "200000", "--seed", "3")
        paths = doc["paths"]
        self.assertLessEqual(abs(paths["mean"] - 64 / 5040), 4 * paths["standard_error"])

    def test_reproduce(self):
        doc = self.run_json("reproduce", "exm:continuous", "--replica-scale", "0.05")
        self.assertEqual(doc["report"]["result"], "PASS")
        proc = self.run_cli("reproduce", "--list")
        self.assertEqual(proc.stdout.split(), ["exm:continuous", "exmp:less1surv",
                                               "exmp:largem_nextinction", "exmp:ci", "rem:nalpha-sweep"])
        self.assertEqual(self.run_cli("reproduce", "exmp:unknown").returncode, 2)

    # --- determinism and metadata ----------------------------------------------------

    def test_fixed_seed_is_byte_identical(self):
        args = ("simulate", self.config("nalpha_1.5.json"), "--horizon", "60", "--replicas", "500",
                "--seed", "99", "--cap", "1000")
        a = self.dir / "a.json"
        b = self.dir / "b.json"
        c = self.dir / "c.json"
        self.run_cli(*args, "--threads", "1", "--out", a)
        self.run_cli(*args, "--threads", "1", "--out", b)
        self.run_cli(*args, "--threads", "3", "--out", c)
        self.assertEqual(a.read_bytes(), b.read_bytes())
        self.assertEqual(a.read_bytes(), c.read_bytes())
        self.assertNotIn("wall_clock_seconds", a.read_text())

    def test_timing_adds_wall_clock(self):
        doc = self.run_json("extinction-curve", self.config("explicit_third.json"), "--timing")
        self.assertGreaterEqual(doc["meta"]["wall_clock_seconds"], 0.0)

    def test_config_is_echoed(self):
        doc = self.run_json("extinction-curve", self.config("geometric_squares.json"), "--horizon", "20")
        self.assertEqual(doc["meta"]["config"], json.loads(self.config("geometric_squares.json").read_text()))


if __name__ == "__main__":
    EXE = pathlib.Path(sys.argv[1]).resolve()
    SRC = pathlib.Path(sys.argv[2]).resolve()
    unittest.main(argv=[sys.argv[0], "-v"])
