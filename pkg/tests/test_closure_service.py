from __future__ import annotations

import random
import unittest

from app.core.exceptions import AppException
from app.services import braid_service, closure_service, garside_service, mixed_braid_service


def _word(text: str, strands: int):
    return braid_service.parse_braid(text, strands)


def _cycle_count(images: tuple[int, ...]) -> int:
    seen, count = set(), 0
    for start in range(1, len(images) + 1):
        if start in seen:
            continue
        count += 1
        point = start
        while point not in seen:
            seen.add(point)
            point = images[point - 1]
    return count


class SphereClosureTests(unittest.TestCase):
    def test_unknot_hopf_and_trefoil(self):
        unknot = closure_service.close(_word("1", 2))
        hopf = closure_service.close(_word("1 1", 2))
        trefoil = closure_service.close(_word("1 1 1", 2))
        self.assertEqual(unknot.components, 1)
        self.assertEqual(hopf.components, 2)
        self.assertEqual(hopf.linking_matrix, ((0, 1), (1, 0)))
        self.assertEqual(trefoil.components, 1)
        self.assertEqual(trefoil.linking_matrix, ((0,),))

    def test_negative_hopf_link(self):
        self.assertEqual(closure_service.linking_matrix(_word("-1 -1", 2)), ((0, -1), (-1, 0)))

    def test_identity_closes_to_unlink(self):
        link = closure_service.close(braid_service.identity(3))
        self.assertEqual(link.components, 3)
        self.assertEqual(link.linking_matrix, ((0, 0, 0), (0, 0, 0), (0, 0, 0)))
        self.assertEqual(link.ambient, "sphere3")

    def test_component_count_matches_independent_cycle_count(self):
        rng = random.Random(5)
        for _ in range(200):
            strands = rng.randint(1, 5)
            letters = [(rng.randint(1, strands - 1), rng.choice((1, -1))) for _ in range(rng.randint(0, 7))] if strands > 1 else []
            word = braid_service.make_word(strands, letters)
            link = closure_service.close(word)
            self.assertEqual(link.components, _cycle_count(braid_service.permutation(word).images))

    def test_inclusion_adds_one_unlinked_component(self):
        rng = random.Random(9)
        for _ in range(50):
            strands = rng.randint(2, 5)
            letters = [(rng.randint(1, strands - 1), rng.choice((1, -1))) for _ in range(rng.randint(0, 7))]
            word = braid_service.make_word(strands, letters)
            link = closure_service.close(word)
            wider = closure_service.close(braid_service.include(word, strands + 1))
            self.assertEqual(wider.components, link.components + 1)
            self.assertTrue(all(value == 0 for value in wider.linking_matrix[-1]))

    def test_format_link(self):
        self.assertEqual(closure_service.format_link(closure_service.close(_word("1 1", 2))), "sphere3\t2\t0,0\t1")
        self.assertEqual(closure_service.format_link(closure_service.close(_word("1", 2))), "sphere3\t1\t0\t-")


class SolidTorusClosureTests(unittest.TestCase):
    def test_core_circle_has_winding_one(self):
        link = closure_service.close_mixed(mixed_braid_service.make_mixed(1, 1))
        self.assertEqual((link.ambient, link.components, link.winding), ("solid_torus", 1, (1,)))
        self.assertTrue(closure_service.is_essential(link))

    def test_cyclic_word_has_full_winding(self):
        word = mixed_braid_service.parse_mixed("1 2", 1, 3)
        link = closure_service.close_mixed(word)
        self.assertEqual((link.components, link.winding), (1, (3,)))

    def test_winding_multiset_is_sorted(self):
        word = mixed_braid_service.parse_mixed("1", 1, 3)
        self.assertEqual(closure_service.close_mixed(word).winding, (1, 2))

    def test_loop_generator_links_with_the_fixed_strand(self):
        link = closure_service.close_mixed(mixed_braid_service.parse_mixed("a1", 1, 1))
        self.assertEqual(link.fixed_strand_linking, ((1,),))
        inverse = closure_service.close_mixed(mixed_braid_service.parse_mixed("A1", 1, 1))
        self.assertEqual(inverse.fixed_strand_linking, ((-1,),))

    def test_axis_linking_equals_winding_per_component(self):
        empty = closure_service.close_mixed(mixed_braid_service.parse_mixed("", 1, 1))
        self.assertEqual((empty.axis_linking, empty.fixed_strand_linking), ((1,), ((0,),)))
        swap = closure_service.close_mixed(mixed_braid_service.parse_mixed("1", 1, 2))
        self.assertEqual((swap.winding, swap.axis_linking), ((2,), (2,)))
        looped = closure_service.close_mixed(mixed_braid_service.parse_mixed("a1 a1", 1, 1))
        self.assertEqual(looped.axis_linking, (1,))
        self.assertEqual(looped.fixed_strand_linking, ((2,),))

    def test_axis_linking_follows_component_order(self):
        link = closure_service.close_mixed(mixed_braid_service.parse_mixed("2", 1, 3))
        self.assertEqual(link.axis_linking, tuple(len(strands) for strands in link.component_strands))
        self.assertEqual(sorted(link.axis_linking), list(link.winding))

    def test_close_mixed_needs_one_fixed_strand(self):
        with self.assertRaises(AppException) as ctx:
            closure_service.close_mixed(mixed_braid_service.make_mixed(2, 2))
        self.assertEqual(ctx.exception.code, "mixed.fixed_strands")

    def test_handlebody_closure(self):
        word = mixed_braid_service.parse_mixed("a1 a2 1", 2, 2)
        link = closure_service.close_handlebody(word)
        self.assertEqual(link.ambient, "handlebody")
        self.assertEqual(link.components, 1)
        self.assertEqual(link.fixed_strand_linking, ((1, 1),))

    def test_essentialness_is_undefined_in_the_sphere(self):
        with self.assertRaises(AppException) as ctx:
            closure_service.is_essential(closure_service.close(_word("1", 2)))
        self.assertEqual(ctx.exception.code, "closure.ambient")

    def test_parse_closure_input_accepts_plain_moving_words(self):
        word = closure_service.parse_closure_input("1 2", "solid-torus")
        self.assertEqual((word.fixed_strands, word.moving_strands), (1, 3))
        mixed = closure_service.parse_closure_input("B2,2: a1 1", "solid_torus")
        self.assertEqual(closure_service.close_in(mixed).ambient, "handlebody")
        with self.assertRaises(AppException):
            closure_service.parse_closure_input("1", "lens")


class MarkovMoveTests(unittest.TestCase):
    def test_conjugation_by_a_commuting_letter(self):
        result = closure_service.markov_conjugate(_word("1 1 1", 2), _word("1", 2))
        self.assertTrue(garside_service.words_equal(result, _word("1 1 1", 2)))

    def test_stabilize_appends_new_generator(self):
        result = closure_service.markov_stabilize(_word("1", 2), -1)
        self.assertEqual((result.strands, result.letters), (3, ((1, 1), (2, -1))))

    def test_stabilize_at_position(self):
        result = closure_service.markov_stabilize(_word("1 -1 1", 2), 1, at=1)
        self.assertEqual(result.letters, ((1, 1), (2, 1), (1, -1), (1, 1)))
        with self.assertRaises(AppException) as ctx:
            closure_service.markov_stabilize(_word("1", 2), 1, at=5)
        self.assertEqual(ctx.exception.code, "closure.position")

    def test_destabilize_inverts_stabilize(self):
        word = _word("1 -2 1", 3)
        for sign in (1, -1):
            back = closure_service.markov_destabilize(closure_service.markov_stabilize(word, sign))
            self.assertEqual(back, word)

    def test_destabilize_needs_a_unique_last_generator(self):
        self.assertIsNone(closure_service.markov_destabilize(_word("2 1 2", 3)))
        self.assertIsNone(closure_service.markov_destabilize(braid_service.identity(1)))
        self.assertEqual(closure_service.markov_destabilize(_word("1", 2)).strands, 1)

    def test_moves_preserve_components_and_linking(self):
        rng = random.Random(13)
        for _ in range(100):
            strands = rng.randint(2, 3)
            letters = [(rng.randint(1, strands - 1), rng.choice((1, -1))) for _ in range(rng.randint(0, 6))]
            word = braid_service.make_word(strands, letters)
            link = closure_service.close(word)
            conjugator = braid_service.make_word(strands, [(rng.randint(1, strands - 1), rng.choice((1, -1)))])
            for moved in (
                closure_service.markov_conjugate(word, conjugator),
                closure_service.markov_stabilize(word, rng.choice((1, -1))),
            ):
                other = closure_service.close(moved)
                self.assertEqual(other.components, link.components)
                self.assertEqual(
                    sorted(abs(value) for row in other.linking_matrix for value in row),
                    sorted(abs(value) for row in link.linking_matrix for value in row),
                )


if __name__ == "__main__":
    unittest.main()
