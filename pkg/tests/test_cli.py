from __future__ import annotations

import contextlib
import io
import json
import os
import tempfile
import unittest

from app.cli import run
from app.db.session import get_engine
from app.services import census_service, census_store_service


def _run(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stderr(err):
        status = run(list(argv), stdout=out, stderr=err)
    return status, out.getvalue(), err.getvalue()


class BraidCommandTests(unittest.TestCase):
    def test_braid_relation_normalizes_identically(self):
        status_a, left, _ = _run("normalize", "B3: 1 2 1")
        status_b, right, _ = _run("normalize", "B3: 2 1 2")
        self.assertEqual((status_a, status_b), (0, 0))
        self.assertEqual(left, right)

    def test_normalize_records(self):
        status, out, _ = _run("normalize", "B3: 1 2 1", "--format", "records")
        self.assertEqual(status, 0)
        payload = json.loads(out)
        self.assertEqual(payload["infimum"], 1)
        self.assertEqual(payload["factors"], [])

    def test_equal(self):
        self.assertEqual(_run("equal", "B3: 1 2 1", "B3: 2 1 2")[1], "true\n")
        self.assertEqual(_run("equal", "B3: 1 2", "B3: 2 1")[1], "false\n")

    def test_conjugacy(self):
        status, out, _ = _run("conj", "B3: 1", "B3: 2")
        self.assertEqual(status, 0)
        verdict, witness, _ = out.rstrip("\n").split("\t")
        self.assertEqual(verdict, "conjugate")
        self.assertTrue(witness.startswith("B3:"))
        self.assertTrue(_run("conj", "B3: 1", "B3: 1 1")[1].startswith("not_conjugate"))

    def test_close_and_color(self):
        self.assertEqual(_run("close", "B2: 1 1")[1], "sphere3\t2\t0,0\t1\n")
        self.assertEqual(_run("color", "B2: 1 1 1", "--quandle", "dihedral3")[1], "9\n")
        status, out, _ = _run("color", "B2: 1 1 1", "--panel", "d3,d4,d5")
        self.assertEqual(status, 0)
        self.assertEqual(out, "dihedral3\t9\ndihedral4\t4\ndihedral5\t5\n")

    def test_solid_torus_closure_is_marked(self):
        status, out, _ = _run("close", "1", "--strands", "2", "--ambient", "solid-torus")
        self.assertEqual(status, 0)
        self.assertTrue(out.startswith("solid_torus\t1\t2"))
        self.assertTrue(out.rstrip("\n").endswith("\tessential"))


class ErrorTests(unittest.TestCase):
    def test_usage_errors_exit_two(self):
        self.assertEqual(_run("frobnicate")[0], 2)
        self.assertEqual(_run("normalize", "B3: 1", "--strands", "0")[0], 2)
        self.assertEqual(_run("close", "B2: 1", "--ambient", "lens")[0], 2)
        self.assertEqual(_run("color", "B2: 1")[0], 2)

    def test_domain_errors_exit_one(self):
        status, out, err = _run("normalize", "B2: 5")
        self.assertEqual(status, 1)
        self.assertEqual(out, "")
        self.assertIn("[braid.generator_out_of_range]", err)

    def test_bad_census_config_exits_one(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "census.conf")
            with open(path, "w") as handle:
                handle.write("colour=blue\n")
            status, _, err = _run("census", "--config", path)
        self.assertEqual(status, 1)
        self.assertIn("config.invalid", err)


class CensusCommandTests(unittest.TestCase):
    def test_small_census_echoes_its_config(self):
        status, out, _ = _run("census", "--min-strands", "2", "--strands", "2", "--max-length", "2", "--depth", "1")
        self.assertEqual(status, 0)
        lines = out.splitlines()
        self.assertEqual(
            lines[0],
            "# census ambient=sphere3 min_strands=2 max_strands=2 max_length=2 depth=1 panel=d3,d4,d5 state_budget=2000000",
        )
        self.assertTrue(lines[1].startswith("# words=7 expected=7 "))

    def test_config_file_and_flags_combine(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "census.conf")
            with open(path, "w") as handle:
                handle.write("ambient=solid-torus\nstrands=3\nlength=1\ndepth=1\n")
            status, out, _ = _run("census", "--config", path, "--strands", "2", "--out", os.path.join(tmp, "out.txt"))
            with open(os.path.join(tmp, "out.txt")) as handle:
                written = handle.read()
        self.assertEqual(status, 0)
        self.assertEqual(out, "")
        self.assertIn("ambient=solid_torus min_strands=1 max_strands=2 max_length=1", written.splitlines()[0])

    def test_census_can_be_stored(self):
        with tempfile.TemporaryDirectory() as tmp:
            url = f"sqlite:///{os.path.join(tmp, 'census.db')}"
            status, out, _ = _run("census", "--strands", "2", "--max-length", "1", "--depth", "1", "--db", url)
            with census_store_service.open_session(url) as db:
                runs = census_store_service.list_runs(db)
                stored = census_service.format_report(census_store_service.load_report(db, runs[0]["id"]))
            get_engine(url).dispose()
        self.assertEqual(status, 0)
        self.assertEqual(len(runs), 1)
        self.assertEqual(stored, out)

    def test_witnesses(self):
        status, out, _ = _run("witness", "3")
        self.assertEqual(status, 0)
        lines = out.splitlines()
        self.assertEqual(len(lines), 3)
        self.assertTrue(all(line.endswith("\tessential") for line in lines))

    def test_unwritable_output_exits_one(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = os.path.join(tmp, "missing", "witnesses.txt")
            status, out, err = _run("witness", "2", "--out", target)
        self.assertEqual(status, 1)
        self.assertEqual(out, "")
        self.assertIn("Cannot write", err)
        self.assertIn("[cli.output]", err)


class VerificationCommandTests(unittest.TestCase):
    def test_mixed_verify(self):
        status, out, _ = _run("mixed-verify", "1", "2")
        self.assertEqual(status, 0)
        self.assertEqual(out.splitlines()[0], "# B1,2 relators=1")
        self.assertNotIn("FAIL", out)

    def test_dynamics_verify(self):
        status, out, _ = _run("dynamics-verify", "--samples", "100")
        self.assertEqual(status, 0)
        self.assertTrue(out.rstrip("\n").endswith("# all_passed=true"))

    def test_group_counts(self):
        status, out, _ = _run("group", "B2: 1 1 1", "--degree", "3")
        self.assertEqual(status, 0)
        self.assertIn("hom_S3\t12", out.splitlines())

    def test_quandles(self):
        status, out, _ = _run("quandles", "3")
        self.assertEqual(status, 0)
        self.assertEqual(out.splitlines()[0], "# order=3 count=5")


if __name__ == "__main__":
    unittest.main()
