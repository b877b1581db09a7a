"""Fundamental group of a closed braid complement from the Artin action on F_n."""

from __future__ import annotations

import itertools
import logging
from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from app.core.exceptions import AppException
from app.schemas.braid import BraidWord
from app.schemas.mixed import MixedBraidWord
from app.schemas.quandle import GroupPresentation
from app.services import mixed_braid_service

logger = logging.getLogger(__name__)

FreeWord = tuple[int, ...]
MAX_SYMMETRIC_DEGREE = 4
HOMOMORPHISM_ASSIGNMENT_LIMIT = 5_000_000


def free_reduce(word: Sequence[int]) -> FreeWord:
    stack: list[int] = []
    for letter in word:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return tuple(stack)


def invert(word: Sequence[int]) -> FreeWord:
    return tuple(-letter for letter in reversed(word))


def _generator_images(index: int, sign: int) -> dict[int, FreeWord]:
    i, j = index, index + 1
    if sign > 0:
        return {i: (i, j, -i), j: (i,)}
    return {i: (j,), j: (-j, i, j)}


def _substitute(word: FreeWord, images: dict[int, FreeWord]) -> FreeWord:
    result: list[int] = []
    for letter in word:
        image = images.get(abs(letter), (abs(letter),))
        result.extend(image if letter > 0 else invert(image))
    return free_reduce(result)


def artin_images(w: BraidWord) -> tuple[FreeWord, ...]:
    """beta(x_1), ..., beta(x_n) for beta = l_1 ... l_k acting as l_1 o ... o l_k."""
    images = [(generator,) for generator in range(1, w.strands + 1)]
    for index, sign in reversed(w.letters):
        substitution = _generator_images(index, sign)
        images = [_substitute(image, substitution) for image in images]
    return tuple(images)


def link_group(w: BraidWord | MixedBraidWord) -> GroupPresentation:
    braid = mixed_braid_service.embed(w) if isinstance(w, MixedBraidWord) else w
    relators = []
    for generator, image in enumerate(artin_images(braid), start=1):
        relator = free_reduce((-generator, *image))
        if relator:
            relators.append(relator)
    return GroupPresentation(generators=braid.strands, relators=tuple(relators))


@lru_cache(maxsize=8)
def _symmetric_group(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Multiplication table (apply left, then right) and inverse index for S_degree."""
    elements = list(itertools.permutations(range(degree)))
    position = {element: offset for offset, element in enumerate(elements)}
    size = len(elements)
    product = np.empty((size, size), dtype=np.int64)
    inverse = np.empty(size, dtype=np.int64)
    for a, left in enumerate(elements):
        for b, right in enumerate(elements):
            product[a, b] = position[tuple(right[left[point]] for point in range(degree))]
        inverted = [0] * degree
        for point, image in enumerate(left):
            inverted[image] = point
        inverse[a] = position[tuple(inverted)]
    return product, inverse


def count_homomorphisms(presentation: GroupPresentation, degree: int) -> int:
    """Homomorphisms into S_degree, by brute force over S_degree^generators."""
    if not 1 <= degree <= MAX_SYMMETRIC_DEGREE:
        raise AppException(
            f"Homomorphism counting supports S_1..S_{MAX_SYMMETRIC_DEGREE}, got S_{degree}.",
            code="group.degree_out_of_range",
        )
    product, inverse = _symmetric_group(degree)
    size = product.shape[0]
    count = presentation.generators
    if size**count > HOMOMORPHISM_ASSIGNMENT_LIMIT:
        raise AppException(
            f"Brute force over {size}^{count} assignments exceeds the limit.",
            code="group.too_large",
        )
    if count == 0:
        return 1
    assignments = np.indices((size,) * count).reshape(count, -1).T
    satisfied = np.ones(assignments.shape[0], dtype=bool)
    for relator in presentation.relators:
        value = np.zeros(assignments.shape[0], dtype=np.int64)
        for letter in relator:
            image = assignments[:, abs(letter) - 1]
            value = product[value, image if letter > 0 else inverse[image]]
        satisfied &= value == 0
    return int(np.count_nonzero(satisfied))
