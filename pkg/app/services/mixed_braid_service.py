from __future__ import annotations

import logging
import re
from collections.abc import Sequence

from app.core.exceptions import AppException
from app.schemas.braid import BraidWord
from app.schemas.mixed import MixedBraidWord, PresentationReport, RelatorCheck
from app.services import garside_service

logger = logging.getLogger(__name__)

MixedLetter = tuple[str, int, int]

_HEADER_RE = re.compile(r"^\s*B\s*(\d+)\s*,\s*(\d+)\s*:(.*)$", re.DOTALL)
_LOOP_RE = re.compile(r"^([aA])(\d+)$")
_SIGMA_RE = re.compile(r"^[+-]?\d+$")


def make_mixed(fixed_strands: int, moving_strands: int, letters: Sequence[MixedLetter] = ()) -> MixedBraidWord:
    if fixed_strands < 0 or moving_strands < 1:
        raise AppException(
            f"B_{{{fixed_strands},{moving_strands}}} needs m >= 0 and n >= 1.",
            code="mixed.strands",
        )
    for tag, index, sign in letters:
        bound = fixed_strands if tag == "a" else moving_strands - 1
        if not 1 <= index <= bound:
            name = f"a{index}" if tag == "a" else f"sigma_{index}"
            raise AppException(
                f"Generator {name} does not exist in B_{{{fixed_strands},{moving_strands}}}.",
                code="braid.generator_out_of_range",
                extra={"tag": tag, "index": index},
            )
    return MixedBraidWord.model_construct(
        fixed_strands=fixed_strands,
        moving_strands=moving_strands,
        letters=tuple((tag, int(index), int(sign)) for tag, index, sign in letters),
    )


def _parse_tokens(body: str) -> list[MixedLetter]:
    letters: list[MixedLetter] = []
    for token in body.split():
        loop = _LOOP_RE.match(token)
        if loop:
            index = int(loop.group(2))
            if index == 0:
                raise AppException(f"Malformed mixed braid token {token!r}.", code="braid.malformed_token")
            letters.append(("a", index, 1 if loop.group(1) == "a" else -1))
            continue
        if _SIGMA_RE.match(token) and int(token) != 0:
            value = int(token)
            letters.append(("s", abs(value), 1 if value > 0 else -1))
            continue
        raise AppException(f"Malformed mixed braid token {token!r}.", code="braid.malformed_token", extra={"token": token})
    return letters


def parse_mixed(text: str, m: int, n: int) -> MixedBraidWord:
    """Tokens `a<i>` / `A<i>` are a_i^{+1} / a_i^{-1}; signed integers are moving sigma letters."""
    body = str(text or "")
    match = _HEADER_RE.match(body)
    if match:
        declared = (int(match.group(1)), int(match.group(2)))
        if declared != (m, n):
            raise AppException(
                f"Header declares B_{{{declared[0]},{declared[1]}}} but B_{{{m},{n}}} was requested.",
                code="braid.strand_mismatch",
            )
        body = match.group(3)
    return make_mixed(m, n, _parse_tokens(body))


def parse_mixed_text(text: str) -> MixedBraidWord:
    match = _HEADER_RE.match(str(text or ""))
    if not match:
        raise AppException("Mixed braid text needs a 'Bm,n:' header.", code="braid.malformed_token")
    return make_mixed(int(match.group(1)), int(match.group(2)), _parse_tokens(match.group(3)))


def format_mixed_letters(w: MixedBraidWord) -> str:
    tokens = []
    for tag, index, sign in w.letters:
        if tag == "a":
            tokens.append(f"a{index}" if sign > 0 else f"A{index}")
        else:
            tokens.append(str(index * sign))
    return " ".join(tokens)


def format_mixed(w: MixedBraidWord) -> str:
    body = format_mixed_letters(w)
    header = f"B{w.fixed_strands},{w.moving_strands}:"
    return f"{header} {body}" if body else header


def from_braid(w: BraidWord) -> MixedBraidWord:
    return make_mixed(0, w.strands, [("s", index, sign) for index, sign in w.letters])


def concat(*words: MixedBraidWord) -> MixedBraidWord:
    if not words:
        raise AppException("Nothing to concatenate.", code="braid.empty_product")
    shape = (words[0].fixed_strands, words[0].moving_strands)
    if any((word.fixed_strands, word.moving_strands) != shape for word in words):
        raise AppException("Cannot multiply mixed braids of different shapes.", code="braid.strand_mismatch")
    return make_mixed(*shape, [letter for word in words for letter in word.letters])


def inverse(w: MixedBraidWord) -> MixedBraidWord:
    return make_mixed(
        w.fixed_strands,
        w.moving_strands,
        [(tag, index, -sign) for tag, index, sign in reversed(w.letters)],
    )


def loop_letters(m: int, i: int, sign: int = 1) -> tuple[tuple[int, int], ...]:
    """sigma_m ... sigma_{i+1} sigma_i^2 sigma_{i+1}^-1 ... sigma_m^-1, or its inverse."""
    prefix = [(k, 1) for k in range(m, i, -1)]
    core = [(i, sign), (i, sign)]
    suffix = [(k, -1) for k in range(i + 1, m + 1)]
    return tuple(prefix + core + suffix)


def embed(w: MixedBraidWord) -> BraidWord:
    """Image in B_{m+n}: fixed strands at positions 1..m, moving strands m+1..m+n."""
    m = w.fixed_strands
    letters: list[tuple[int, int]] = []
    for tag, index, sign in w.letters:
        if tag == "a":
            letters.extend(loop_letters(m, index, sign))
        else:
            letters.append((m + index, sign))
    return BraidWord.model_construct(strands=m + w.moving_strands, letters=tuple(letters))


def _relator_families(m: int, n: int):
    a = lambda i, s=1: ("a", i, s)  # noqa: E731
    s = lambda j, e=1: ("s", j, e)  # noqa: E731
    for j in range(1, n - 1):
        yield "braid", f"s{j} s{j + 1} s{j} = s{j + 1} s{j} s{j + 1}", [s(j), s(j + 1), s(j)], [s(j + 1), s(j), s(j + 1)]
    for j in range(1, n):
        for k in range(j + 2, n):
            yield "far_commutation", f"s{j} s{k} = s{k} s{j}", [s(j), s(k)], [s(k), s(j)]
    if n >= 2:
        for i in range(1, m + 1):
            yield "loop_twist", f"a{i} s1 a{i} s1 = s1 a{i} s1 a{i}", [a(i), s(1), a(i), s(1)], [s(1), a(i), s(1), a(i)]
    for i in range(1, m + 1):
        for k in range(2, n):
            yield "loop_commutation", f"a{i} s{k} = s{k} a{i}", [a(i), s(k)], [s(k), a(i)]
    if n >= 2:
        for i in range(1, m + 1):
            for r in range(1, i):
                conjugated = [s(1), a(r), s(1, -1)]
                yield (
                    "loop_conjugate_commutation",
                    f"a{i} (s1 a{r} S1) = (s1 a{r} S1) a{i}",
                    [a(i), *conjugated],
                    [*conjugated, a(i)],
                )


def verify_presentation(m: int, n: int) -> PresentationReport:
    """Check every defining relator instance of B_{m,n} holds after embedding."""
    if m < 0 or n < 1:
        raise AppException(f"B_{{{m},{n}}} needs m >= 0 and n >= 1.", code="mixed.strands")
    checks: list[RelatorCheck] = []
    for family, label, left_letters, right_letters in _relator_families(m, n):
        left = make_mixed(m, n, left_letters)
        right = make_mixed(m, n, right_letters)
        embedded_left, embedded_right = embed(left), embed(right)
        passed = garside_service.words_equal(embedded_left, embedded_right)
        if not passed:
            logger.error("mixed.relator_failed m=%s n=%s family=%s label=%s", m, n, family, label)
        checks.append(
            RelatorCheck(
                family=family,
                label=label,
                left=left,
                right=right,
                embedded_left=embedded_left,
                embedded_right=embedded_right,
                passed=passed,
            )
        )
    logger.info("mixed.verify m=%s n=%s relators=%s", m, n, len(checks))
    return PresentationReport(fixed_strands=m, moving_strands=n, checks=tuple(checks))
