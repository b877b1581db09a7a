from __future__ import annotations

import itertools
import re
from collections.abc import Iterator, Sequence

from app.core.exceptions import AppException
from app.schemas.braid import BraidWord, Permutation

Letter = tuple[int, int]

_HEADER_RE = re.compile(r"^\s*B\s*(\d+)\s*:(.*)$", re.DOTALL)
_TOKEN_RE = re.compile(r"^[+-]?\d+$")


def make_word(strands: int, letters: Sequence[Letter] = ()) -> BraidWord:
    if strands < 1:
        raise AppException(f"Strand count must be >= 1, got {strands}.", code="braid.strands")
    for index, sign in letters:
        if not 1 <= index <= strands - 1:
            raise AppException(
                f"Generator sigma_{index} does not exist in B_{strands}.",
                code="braid.generator_out_of_range",
                extra={"index": index, "strands": strands},
            )
        if sign not in (1, -1):
            raise AppException(f"Letter sign must be +1 or -1, got {sign}.", code="braid.malformed_token")
    return BraidWord.model_construct(strands=strands, letters=tuple((int(i), int(s)) for i, s in letters))


def identity(strands: int) -> BraidWord:
    return make_word(strands)


def _parse_tokens(body: str, strands: int) -> list[Letter]:
    letters: list[Letter] = []
    for token in body.split():
        if not _TOKEN_RE.match(token) or int(token) == 0:
            raise AppException(f"Malformed braid token {token!r}.", code="braid.malformed_token", extra={"token": token})
        value = int(token)
        letters.append((abs(value), 1 if value > 0 else -1))
    return letters


def parse_braid(text: str, strands: int) -> BraidWord:
    """Parse whitespace-separated signed generator indices; token k is sigma_|k|^sign(k).

    An optional `Bn:` header is accepted when it agrees with `strands`.
    """
    if strands < 1:
        raise AppException(f"Strand count must be >= 1, got {strands}.", code="braid.strands")
    body = str(text or "")
    match = _HEADER_RE.match(body)
    if match:
        declared = int(match.group(1))
        if declared != strands:
            raise AppException(
                f"Header declares B_{declared} but {strands} strands were requested.",
                code="braid.strand_mismatch",
            )
        body = match.group(2)
    return make_word(strands, _parse_tokens(body, strands))


def parse_braid_text(text: str, default_strands: int | None = None) -> BraidWord:
    """Parse the `Bn: 1 -2 ...` form; without a header, `default_strands` or the
    smallest strand count that fits the word is used."""
    body = str(text or "")
    match = _HEADER_RE.match(body)
    if match:
        return parse_braid(body, int(match.group(1)))
    letters = _parse_tokens(body, default_strands or 1)
    needed = max((index for index, _ in letters), default=0) + 1
    return make_word(default_strands or needed, letters)


def format_letters(w: BraidWord) -> str:
    return " ".join(str(index * sign) for index, sign in w.letters)


def format_braid(w: BraidWord) -> str:
    body = format_letters(w)
    return f"B{w.strands}: {body}" if body else f"B{w.strands}:"


def free_reduce_letters(letters: Sequence[Letter]) -> tuple[Letter, ...]:
    stack: list[Letter] = []
    for index, sign in letters:
        if stack and stack[-1][0] == index and stack[-1][1] == -sign:
            stack.pop()
        else:
            stack.append((index, sign))
    return tuple(stack)


def free_reduce(w: BraidWord) -> BraidWord:
    return BraidWord.model_construct(strands=w.strands, letters=free_reduce_letters(w.letters))


def concat(*words: BraidWord) -> BraidWord:
    if not words:
        raise AppException("Nothing to concatenate.", code="braid.empty_product")
    strands = words[0].strands
    for word in words[1:]:
        if word.strands != strands:
            raise AppException(
                f"Cannot multiply words on {strands} and {word.strands} strands.",
                code="braid.strand_mismatch",
            )
    letters = tuple(letter for word in words for letter in word.letters)
    return BraidWord.model_construct(strands=strands, letters=letters)


def inverse_letters(letters: Sequence[Letter]) -> tuple[Letter, ...]:
    return tuple((index, -sign) for index, sign in reversed(letters))


def inverse(w: BraidWord) -> BraidWord:
    return BraidWord.model_construct(strands=w.strands, letters=inverse_letters(w.letters))


def conjugate_by(w: BraidWord, c: BraidWord) -> BraidWord:
    """c * w * c^-1, freely reduced."""
    return free_reduce(concat(c, w, inverse(c)))


def exponent_sum(w: BraidWord) -> int:
    return sum(sign for _, sign in w.letters)


def permutation_images(strands: int, letters: Sequence[Letter]) -> tuple[int, ...]:
    """Images (0-based) of pi(w) = pi(l_1) o pi(l_2) o ... o pi(l_k)."""
    images = list(range(strands))
    for index, _ in letters:
        images[index - 1], images[index] = images[index], images[index - 1]
    return tuple(images)


def permutation(w: BraidWord) -> Permutation:
    images = permutation_images(w.strands, w.letters)
    return Permutation.model_construct(size=w.strands, images=tuple(image + 1 for image in images))


def compose(p: Permutation, q: Permutation) -> Permutation:
    """p o q: apply q first."""
    if p.size != q.size:
        raise AppException("Cannot compose permutations of different sizes.", code="braid.strand_mismatch")
    return Permutation.model_construct(size=p.size, images=tuple(p(q(point)) for point in range(1, p.size + 1)))


def include(w: BraidWord, new_strands: int) -> BraidWord:
    if new_strands < w.strands:
        raise AppException(
            f"Cannot include B_{w.strands} into B_{new_strands}.",
            code="braid.include_target",
            extra={"strands": w.strands, "newStrands": new_strands},
        )
    return BraidWord.model_construct(strands=new_strands, letters=w.letters)


def signed_generators(strands: int) -> tuple[Letter, ...]:
    """The 2(n-1) letters ordered by index, positive before negative."""
    return tuple((index, sign) for index in range(1, strands) for sign in (1, -1))


def enumerate_words(strands: int, max_length: int) -> Iterator[BraidWord]:
    """Every letter sequence of length <= max_length, by length then lexicographically."""
    if strands < 1:
        raise AppException(f"Strand count must be >= 1, got {strands}.", code="braid.strands")
    if max_length < 0:
        raise AppException("max_length must be >= 0.", code="braid.length")
    alphabet = signed_generators(strands)
    for length in range(max_length + 1):
        for letters in itertools.product(alphabet, repeat=length):
            yield BraidWord.model_construct(strands=strands, letters=letters)


def count_words(strands: int, max_length: int) -> int:
    base = 2 * (strands - 1)
    return sum(base**length for length in range(max_length + 1))
