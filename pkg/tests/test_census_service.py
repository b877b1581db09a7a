from __future__ import annotations

import json
import random
import unittest

from app.core.exceptions import AppException
from app.schemas.census import CensusConfig, MoveStep
from app.services import (
    braid_service,
    census_service,
    closure_service,
    garside_service,
    mixed_braid_service,
)


def _word(text: str, strands: int):
    return braid_service.parse_braid(text, strands)


class CensusConfigTests(unittest.TestCase):
    def test_key_value_config(self):
        config = census_service.parse_census_config(
            "# small census\nambient = solid-torus\nstrands=2\nlength=3\ndepth=1\npanel=d3,d5\n",
            base=CensusConfig(),
        )
        self.assertEqual(config.ambient, "solid_torus")
        self.assertEqual((config.max_strands, config.max_length, config.depth), (2, 3, 1))
        self.assertEqual(config.panel, (3, 5))

    def test_unknown_key_is_rejected(self):
        with self.assertRaises(AppException) as ctx:
            census_service.parse_census_config("colour=blue\n", base=CensusConfig())
        self.assertEqual(ctx.exception.code, "config.invalid")

    def test_invalid_bounds_are_rejected(self):
        for text in ("depth=-1\n", "strands=0\n", "panel=d0\n", "ambient=lens\n"):
            with self.assertRaises(AppException, msg=text):
                census_service.parse_census_config(text, base=CensusConfig())

    def test_expected_word_count(self):
        config = CensusConfig(min_strands=2, max_strands=3, max_length=4)
        self.assertEqual(census_service.expected_word_count(config), 31 + 341)
        self.assertEqual(len(list(census_service.enumerate_census_words(config))), 372)


class FingerprintTests(unittest.TestCase):
    def test_trefoil_fingerprint(self):
        fp = census_service.fingerprint(_word("1 1 1", 2), (3, 4, 5))
        self.assertEqual((fp.ambient, fp.components), ("sphere3", 1))
        self.assertEqual(fp.colorings, (9, 4, 5))

    def test_one_stabilization_apart(self):
        self.assertEqual(
            census_service.fingerprint(braid_service.identity(1)),
            census_service.fingerprint(_word("1", 2)),
        )

    def test_mirror_hopf_links_share_a_fingerprint(self):
        positive = census_service.fingerprint(_word("1 1", 2))
        negative = census_service.fingerprint(_word("-1 -1", 2))
        self.assertEqual(positive, negative)
        self.assertEqual(census_service.fingerprint_hash(positive), census_service.fingerprint_hash(negative))

    def test_distinct_links_are_separated(self):
        hashes = {
            census_service.fingerprint_hash(census_service.fingerprint(_word(text, 2)))
            for text in ("1", "1 1", "1 1 1")
        }
        self.assertEqual(len(hashes), 3)

    def test_markov_invariance_on_random_words(self):
        rng = random.Random(20240501)
        failures = 0
        for _ in range(500):
            strands = rng.randint(1, 3)
            length = rng.randint(0, 6) if strands > 1 else 0
            letters = [(rng.randint(1, strands - 1), rng.choice((1, -1))) for _ in range(length)]
            word = braid_service.make_word(strands, letters)
            fp = census_service.fingerprint(word)
            moved = word
            if strands > 1:
                conjugator = braid_service.make_word(strands, [(rng.randint(1, strands - 1), rng.choice((1, -1)))])
                moved = closure_service.markov_conjugate(word, conjugator)
            moved = closure_service.markov_stabilize(moved, rng.choice((1, -1)))
            if census_service.fingerprint(moved) != fp:
                failures += 1
        self.assertEqual(failures, 0)

    def test_solid_torus_fingerprint_carries_winding(self):
        fp = census_service.fingerprint(mixed_braid_service.parse_mixed("1", 1, 3))
        self.assertEqual((fp.ambient, fp.components, fp.winding), ("solid_torus", 2, (1, 2)))

    def test_loop_letters_have_no_census_moves(self):
        with self.assertRaises(AppException) as ctx:
            census_service.moving_braid(mixed_braid_service.parse_mixed("a1 1", 1, 2))
        self.assertEqual(ctx.exception.code, "census.loop_letters")

    def test_parallel_fingerprints_keep_input_order(self):
        words = list(braid_service.enumerate_words(2, 3))
        serial = census_service.fingerprint_all(words, (3, 5), workers=1)
        parallel = census_service.fingerprint_all(words, (3, 5), workers=2)
        self.assertEqual(serial, parallel)


class MoveSearchTests(unittest.TestCase):
    def test_destabilization_reaches_the_trivial_braid(self):
        trace = census_service.merge_search(_word("1", 2), braid_service.identity(1), depth=1)
        self.assertIsNotNone(trace)
        self.assertEqual([step.kind for step in trace.steps], ["destabilize"])
        self.assertEqual(census_service.replay_trace(trace).strands, 1)

    def test_equal_words_need_no_moves(self):
        trace = census_service.merge_search(_word("1 2 1", 3), _word("2 1 2", 3), depth=2)
        self.assertEqual(len(trace), 0)

    def test_mirror_trefoils_are_never_connected(self):
        self.assertIsNone(census_service.merge_search(_word("1 1 1", 2), _word("-1 -1 -1", 2), depth=2))

    def test_conjugates_are_connected_and_replay(self):
        trace = census_service.merge_search(_word("1 2 -1", 3), _word("2", 3), depth=2)
        self.assertIsNotNone(trace)
        self.assertLessEqual(len(trace), 4)
        census_service.replay_trace(trace)
        census_service.replay_trace(census_service.reverse_trace(trace))

    def test_solid_torus_search_uses_conjugation_only(self):
        u = mixed_braid_service.parse_mixed("1 2", 1, 3)
        v = mixed_braid_service.parse_mixed("2 1", 1, 3)
        trace = census_service.merge_search(u, v, depth=2)
        self.assertIsNotNone(trace)
        self.assertTrue({step.kind for step in trace.steps} <= {"rotate", "conjugate", "rewrite"})
        census_service.replay_trace(trace)

    def test_solid_torus_words_on_different_strand_counts(self):
        u = mixed_braid_service.parse_mixed("", 1, 1)
        v = mixed_braid_service.parse_mixed("1", 1, 2)
        self.assertIsNone(census_service.merge_search(u, v, depth=3))

    def test_mixed_ambients_are_rejected(self):
        with self.assertRaises(AppException) as ctx:
            census_service.merge_search(_word("1", 2), mixed_braid_service.parse_mixed("1", 1, 2), depth=1)
        self.assertEqual(ctx.exception.code, "census.ambient_mismatch")

    def test_bad_moves_are_rejected(self):
        word = _word("1 2", 3)
        with self.assertRaises(AppException) as ctx:
            census_service.apply_move(word, MoveStep(kind="rotate", offset=2, result=word))
        self.assertEqual(ctx.exception.code, "census.move")
        with self.assertRaises(AppException):
            census_service.apply_move(word, MoveStep(kind="rewrite", result=_word("2 1", 3)))

    def test_zero_state_budget_is_rejected(self):
        with self.assertRaises(AppException) as ctx:
            census_service.merge_search(_word("1 2 -1", 3), _word("2", 3), depth=2, budget=0)
        self.assertEqual(ctx.exception.code, "census.budget")

    def test_tampered_trace_fails_replay(self):
        trace = census_service.merge_search(_word("1", 2), braid_service.identity(1), depth=1)
        wrong = trace.model_copy(update={"source": _word("1 1", 2)})
        with self.assertRaises(AppException):
            census_service.replay_trace(wrong)


class SmallCensusTests(unittest.TestCase):
    def test_b2_classes(self):
        report = census_service.run_census(CensusConfig(min_strands=2, max_strands=2, max_length=3, depth=2))
        self.assertTrue(report.complete)
        self.assertEqual(report.word_count, 15)
        self.assertEqual(report.class_count, 6)
        by_word = {record.word: record for record in report.records}
        self.assertEqual(by_word["B2: 1"].class_id, by_word["B2: -1"].class_id)
        self.assertNotEqual(by_word["B2: 1 1"].class_id, by_word["B2: -1 -1"].class_id)
        self.assertTrue(by_word["B2: 1 1"].undistinguished)
        self.assertFalse(by_word["B2: 1"].undistinguished)

    def test_b2_census_is_monotone_in_length(self):
        small = census_service.run_census(CensusConfig(min_strands=2, max_strands=2, max_length=3, depth=2))
        large = census_service.run_census(CensusConfig(min_strands=2, max_strands=2, max_length=4, depth=2))
        pairs = range(small.word_count)
        for i in pairs:
            for j in pairs:
                if small.records[i].class_id == small.records[j].class_id:
                    self.assertEqual(large.records[i].class_id, large.records[j].class_id)

    def test_unlinks_by_strand_count(self):
        report = census_service.run_census(CensusConfig(min_strands=1, max_strands=3, max_length=0, depth=2))
        self.assertEqual(report.class_count, 3)
        self.assertEqual([record.fingerprint.components for record in report.records], [1, 2, 3])

    def test_solid_torus_unlinks_are_distinct(self):
        report = census_service.run_census(
            CensusConfig(ambient="solid_torus", min_strands=1, max_strands=3, max_length=0, depth=1)
        )
        self.assertEqual(report.class_count, 3)
        self.assertEqual([record.fingerprint.winding for record in report.records], [(1,), (1, 1), (1, 1, 1)])

    def test_state_budget_marks_the_report_incomplete(self):
        report = census_service.run_census(
            CensusConfig(min_strands=2, max_strands=3, max_length=2, depth=2, state_budget=5)
        )
        self.assertFalse(report.complete)
        self.assertEqual(report.word_count, report.expected_word_count)
        self.assertIn("complete=false", census_service.format_report(report))

    def test_records_format(self):
        report = census_service.run_census(CensusConfig(min_strands=2, max_strands=2, max_length=1, depth=1))
        lines = [json.loads(line) for line in census_service.format_report(report, "records").splitlines()]
        self.assertEqual(lines[0]["type"], "config")
        self.assertEqual(lines[-1]["type"], "summary")
        self.assertEqual(sum(1 for line in lines if line["type"] == "record"), 3)
        with self.assertRaises(AppException):
            census_service.format_report(report, "yaml")


class AcceptanceCensusTests(unittest.TestCase):
    config = CensusConfig(min_strands=2, max_strands=3, max_length=4, depth=3)

    @classmethod
    def setUpClass(cls):
        cls.report = census_service.run_census(cls.config)

    def test_reports_are_byte_identical(self):
        again = census_service.run_census(self.config)
        self.assertEqual(census_service.format_report(again), census_service.format_report(self.report))

    def test_header_echoes_config(self):
        header = census_service.format_report(self.report).splitlines()[0]
        self.assertEqual(
            header,
            "# census ambient=sphere3 min_strands=2 max_strands=3 max_length=4 depth=3 panel=d3,d4,d5 state_budget=2000000",
        )

    def test_counts(self):
        self.assertEqual(self.report.word_count, 372)
        self.assertEqual(self.report.expected_word_count, 372)
        self.assertTrue(self.report.complete)

    def test_unknot_hopf_and_trefoil_stay_apart(self):
        by_word = {record.word: record for record in self.report.records}
        classes = {by_word[text].class_id for text in ("B2: 1", "B2: 1 1", "B2: 1 1 1")}
        hashes = {by_word[text].fingerprint_hash for text in ("B2: 1", "B2: 1 1", "B2: 1 1 1")}
        self.assertEqual(len(classes), 3)
        self.assertEqual(len(hashes), 3)

    def test_classes_never_mix_fingerprints(self):
        seen = {}
        for record in self.report.records:
            self.assertEqual(seen.setdefault(record.class_id, record.fingerprint), record.fingerprint)

    def test_every_trace_replays_to_its_representative(self):
        by_word = {record.word: record for record in self.report.records}
        for record in self.report.records:
            end = census_service.replay_trace(record.trace)
            self.assertTrue(garside_service.words_equal(record.trace.source, braid_service.parse_braid_text(record.word)))
            representative = braid_service.parse_braid_text(record.representative)
            self.assertTrue(garside_service.words_equal(end, representative))
            self.assertEqual(by_word[record.representative].class_id, record.class_id)

    def test_representative_is_the_first_word_of_its_class(self):
        first = {}
        for record in self.report.records:
            first.setdefault(record.class_id, record)
        self.assertEqual(list(first), list(range(self.report.class_count)))
        for record in self.report.records:
            self.assertEqual(record.representative, first[record.class_id].word)

    def test_buckets_cover_every_word(self):
        self.assertEqual(sum(bucket.words for bucket in self.report.buckets), 372)
        self.assertEqual(
            sum(bucket.classes for bucket in self.report.buckets),
            self.report.class_count,
        )


class WitnessTests(unittest.TestCase):
    def test_ten_essential_witnesses(self):
        words = census_service.essential_witnesses(10)
        self.assertEqual(len(words), 10)
        windings = []
        for word in words:
            link = closure_service.close_mixed(word)
            self.assertEqual(link.components, 1)
            self.assertTrue(closure_service.is_essential(link))
            windings.append(link.winding)
        self.assertEqual(windings, [(k,) for k in range(1, 11)])

    def test_witness_count_must_be_positive(self):
        with self.assertRaises(AppException) as ctx:
            census_service.essential_witnesses(0)
        self.assertEqual(ctx.exception.code, "census.witness_count")


if __name__ == "__main__":
    unittest.main()
