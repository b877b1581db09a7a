"""Garside structure of B_n over permutation braids.

Internally a simple element is a tuple `p` of length n with `p[j]` the final
position of the strand starting at position j (0-based). Normal forms are kept raw
as `(infimum, factors)` and only wrapped into `NormalForm` at the boundary, where
each factor is reported in the same convention as `braid_service.permutation`.
"""

from __future__ import annotations

import logging
from collections import deque
from collections.abc import Iterable, Sequence
from functools import lru_cache
from itertools import permutations as _all_orders

from app.core.config import get_settings
from app.core.exceptions import AppException
from app.schemas.braid import BraidWord, ConjugacyResult, NormalForm, Permutation, SummitElement, SuperSummitSet
from app.services.braid_service import (
    Letter,
    concat,
    exponent_sum,
    free_reduce,
    free_reduce_letters,
    inverse,
    inverse_letters,
)

settings = get_settings()
logger = logging.getLogger(__name__)

Perm = tuple[int, ...]
RawForm = tuple[int, tuple[Perm, ...]]


def _identity(n: int) -> Perm:
    return tuple(range(n))


def _delta(n: int) -> Perm:
    return tuple(range(n - 1, -1, -1))


def _generator(n: int, i: int) -> Perm:
    images = list(range(n))
    images[i], images[i + 1] = i + 1, i
    return tuple(images)


def _right_mul_generator(p: Perm, i: int) -> Perm:
    return tuple(i + 1 if value == i else i if value == i + 1 else value for value in p)


def _left_div_generator(p: Perm, i: int) -> Perm:
    images = list(p)
    images[i], images[i + 1] = images[i + 1], images[i]
    return tuple(images)


def _invert(p: Perm) -> Perm:
    images = [0] * len(p)
    for start, end in enumerate(p):
        images[end] = start
    return tuple(images)


def _finishing_set(p: Perm) -> frozenset[int]:
    inv = _invert(p)
    return frozenset(i for i in range(len(p) - 1) if inv[i] > inv[i + 1])


def _tau(p: Perm) -> Perm:
    n = len(p)
    return tuple(n - 1 - p[n - 1 - j] for j in range(n))


def _complement(p: Perm) -> Perm:
    """The simple B with p * B = Delta."""
    n = len(p)
    images = [0] * n
    for start, end in enumerate(p):
        images[end] = n - 1 - start
    return tuple(images)


def _normalize_pair(a: Perm, b: Perm) -> tuple[Perm, Perm]:
    n = len(a)
    while True:
        finishing = _finishing_set(a)
        for i in range(n - 1):
            if b[i] > b[i + 1] and i not in finishing:
                a = _right_mul_generator(a, i)
                b = _left_div_generator(b, i)
                break
        else:
            return a, b


def simple_letters(p: Perm) -> tuple[Letter, ...]:
    """Positive reduced word of the permutation braid `p`."""
    n = len(p)
    arrangement = list(range(n))
    letters: list[Letter] = []
    changed = True
    while changed:
        changed = False
        for i in range(n - 1):
            if p[arrangement[i]] > p[arrangement[i + 1]]:
                arrangement[i], arrangement[i + 1] = arrangement[i + 1], arrangement[i]
                letters.append((i + 1, 1))
                changed = True
    return tuple(letters)


class _GarsideState:
    __slots__ = ("n", "infimum", "factors", "_delta", "_identity")

    def __init__(self, n: int, infimum: int = 0, factors: Iterable[Perm] = ()):
        self.n = n
        self.infimum = infimum
        self.factors = list(factors)
        self._delta = _delta(n)
        self._identity = _identity(n)

    def raw(self) -> RawForm:
        return self.infimum, tuple(self.factors)

    def _strip(self) -> None:
        lead = 0
        while lead < len(self.factors) and self.factors[lead] == self._delta:
            lead += 1
        if lead:
            del self.factors[:lead]
            self.infimum += lead
        while self.factors and self.factors[-1] == self._identity:
            self.factors.pop()

    def mul_simple(self, x: Perm) -> None:
        if x == self._identity:
            return
        factors = self.factors
        factors.append(x)
        for j in range(len(factors) - 2, -1, -1):
            a, b = _normalize_pair(factors[j], factors[j + 1])
            if a == factors[j] and b == factors[j + 1]:
                break
            factors[j], factors[j + 1] = a, b
        self._strip()

    def mul_delta_power(self, k: int) -> None:
        if k % 2:
            self.factors = [_tau(factor) for factor in self.factors]
        self.infimum += k

    def mul_inverse_simple(self, x: Perm) -> None:
        if x == self._identity:
            return
        # x^-1 = Delta^-1 * tau(x^-1 Delta)
        self.mul_delta_power(-1)
        self.mul_simple(_tau(_complement(x)))

    def mul_letter(self, index: int, sign: int) -> None:
        generator = _generator(self.n, index - 1)
        if sign > 0:
            self.mul_simple(generator)
        else:
            self.mul_inverse_simple(generator)


@lru_cache(maxsize=65536)
def _raw_normal_form(n: int, letters: tuple[Letter, ...]) -> RawForm:
    if n <= 1:
        return 0, ()
    state = _GarsideState(n)
    for index, sign in letters:
        state.mul_letter(index, sign)
    return state.raw()


def _to_permutation(p: Perm) -> Permutation:
    return Permutation.model_construct(size=len(p), images=tuple(image + 1 for image in _invert(p)))


def _from_permutation(permutation: Permutation) -> Perm:
    return _invert(tuple(image - 1 for image in permutation.images))


def _to_normal_form(n: int, raw: RawForm) -> NormalForm:
    infimum, factors = raw
    return NormalForm.model_construct(
        strands=n,
        infimum=infimum,
        factors=tuple(_to_permutation(factor) for factor in factors),
    )


def left_normal_form(w: BraidWord) -> NormalForm:
    return _to_normal_form(w.strands, _raw_normal_form(w.strands, tuple(w.letters)))


def normal_form_key(w: BraidWord) -> tuple[int, int, tuple[Perm, ...]]:
    """Hashable canonical key of the group element of `w`."""
    infimum, factors = _raw_normal_form(w.strands, tuple(w.letters))
    return w.strands, infimum, factors


def words_equal(u: BraidWord, v: BraidWord) -> bool:
    if u.strands != v.strands:
        raise AppException(
            f"Cannot compare words on {u.strands} and {v.strands} strands.",
            code="braid.strand_mismatch",
        )
    return normal_form_key(u) == normal_form_key(v)


def _raw_word_letters(n: int, raw: RawForm) -> tuple[Letter, ...]:
    infimum, factors = raw
    delta_letters = simple_letters(_delta(n)) if n > 1 else ()
    letters: list[Letter] = []
    if infimum >= 0:
        letters.extend(delta_letters * infimum)
    else:
        letters.extend(inverse_letters(delta_letters) * (-infimum))
    for factor in factors:
        letters.extend(simple_letters(factor))
    return tuple(letters)


def word_from_normal_form(nf: NormalForm) -> BraidWord:
    """Canonical word: Delta^infimum followed by each factor's positive reduced word."""
    raw = (nf.infimum, tuple(_from_permutation(factor) for factor in nf.factors))
    return BraidWord.model_construct(strands=nf.strands, letters=_raw_word_letters(nf.strands, raw))


def canonical_word(w: BraidWord) -> BraidWord:
    return BraidWord.model_construct(
        strands=w.strands,
        letters=_raw_word_letters(w.strands, _raw_normal_form(w.strands, tuple(w.letters))),
    )


# Conjugacy via super summit sets


def _product(n: int, parts: Sequence[tuple[str, object]]) -> RawForm:
    state = _GarsideState(n)
    for kind, value in parts:
        if kind == "simple":
            state.mul_simple(value)
        elif kind == "inverse":
            state.mul_inverse_simple(value)
        elif kind == "delta":
            state.mul_delta_power(value)
        elif kind == "form":
            infimum, factors = value
            state.mul_delta_power(infimum)
            for factor in factors:
                state.mul_simple(factor)
    return state.raw()


def _conjugate_raw(n: int, raw: RawForm, s: Perm) -> RawForm:
    """s^-1 * x * s."""
    return _product(n, [("inverse", s), ("form", raw), ("simple", s)])


def _cycle(n: int, raw: RawForm) -> tuple[RawForm, tuple[Letter, ...]]:
    infimum, factors = raw
    head = _tau(factors[0]) if infimum % 2 else factors[0]
    return _conjugate_raw(n, raw, head), simple_letters(head)


def _decycle(n: int, raw: RawForm) -> tuple[RawForm, tuple[Letter, ...]]:
    tail = raw[1][-1]
    conjugated = _product(n, [("simple", tail), ("form", raw), ("inverse", tail)])
    return conjugated, inverse_letters(simple_letters(tail))


def _sup(raw: RawForm) -> int:
    return raw[0] + len(raw[1])


def _to_summit(n: int, raw: RawForm) -> tuple[RawForm, list[Letter]]:
    """Cycle then decycle until neither raises inf nor lowers sup for n(n-1)/2 rounds.

    Returns the summit element y and letters of G with y = G^-1 x G.
    """
    limit = max(1, n * (n - 1) // 2)
    conjugator: list[Letter] = []
    improved = True
    while improved and raw[1]:
        improved = False
        stalls = 0
        while raw[1] and stalls < limit:
            cycled, letters = _cycle(n, raw)
            stalls = 0 if cycled[0] > raw[0] else stalls + 1
            improved = improved or cycled[0] > raw[0]
            raw = cycled
            conjugator.extend(letters)
        stalls = 0
        while raw[1] and stalls < limit:
            decycled, letters = _decycle(n, raw)
            stalls = 0 if _sup(decycled) < _sup(raw) else stalls + 1
            improved = improved or _sup(decycled) < _sup(raw)
            raw = decycled
            conjugator.extend(letters)
    return raw, conjugator


@lru_cache(maxsize=16)
def _nontrivial_simples(n: int) -> tuple[Perm, ...]:
    identity = _identity(n)
    return tuple(order for order in _all_orders(range(n)) if order != identity)


def _summit_orbit(n: int, start: RawForm, conjugator: list[Letter], budget: int):
    infimum, supremum = start[0], _sup(start)
    elements: dict[RawForm, tuple[Letter, ...]] = {start: tuple(conjugator)}
    queue = deque([start])
    nodes = 0
    complete = True
    while queue and complete:
        current = queue.popleft()
        for simple in _nontrivial_simples(n):
            if nodes >= budget:
                complete = False
                break
            nodes += 1
            candidate = _conjugate_raw(n, current, simple)
            if candidate[0] != infimum or _sup(candidate) != supremum or candidate in elements:
                continue
            elements[candidate] = elements[current] + simple_letters(simple)
            queue.append(candidate)
    return elements, complete, nodes


def _node_budget(budget: int | None) -> int:
    if budget is None:
        return settings.CONJUGACY_NODE_BUDGET
    if budget < 1:
        raise AppException(f"Node budget must be positive, got {budget}.", code="braid.budget")
    return int(budget)


def super_summit_set(w: BraidWord, budget: int | None = None) -> SuperSummitSet:
    n = w.strands
    budget = _node_budget(budget)
    start, conjugator = _to_summit(n, _raw_normal_form(n, tuple(w.letters)))
    if n <= 1:
        elements, complete, nodes = {start: tuple(conjugator)}, True, 0
    else:
        elements, complete, nodes = _summit_orbit(n, start, conjugator, budget)
    return SuperSummitSet(
        strands=n,
        infimum=start[0],
        supremum=_sup(start),
        elements=tuple(
            SummitElement(
                normal_form=_to_normal_form(n, raw),
                conjugator=BraidWord.model_construct(strands=n, letters=free_reduce_letters(letters)),
            )
            for raw, letters in elements.items()
        ),
        complete=complete,
        nodes=nodes,
    )


def conjugate_test(u: BraidWord, v: BraidWord, budget: int | None = None) -> ConjugacyResult:
    """Decide whether c u c^-1 = v for some c, within a node budget.

    "not_conjugate" is only returned with a certificate: differing exponent sums,
    differing summit bounds, or a fully computed super summit set of u that misses v.
    """
    if u.strands != v.strands:
        raise AppException(
            f"Cannot test conjugacy of words on {u.strands} and {v.strands} strands.",
            code="braid.strand_mismatch",
        )
    n = u.strands
    budget = _node_budget(budget)
    sum_u, sum_v = exponent_sum(u), exponent_sum(v)
    if sum_u != sum_v:
        return ConjugacyResult(
            verdict="not_conjugate",
            certificate="exponent_sum",
            details={"exponentSumU": sum_u, "exponentSumV": sum_v},
        )
    if words_equal(u, v):
        return ConjugacyResult(verdict="conjugate", witness=BraidWord(strands=n), certificate="equal")

    start_u, conj_u = _to_summit(n, _raw_normal_form(n, tuple(u.letters)))
    start_v, conj_v = _to_summit(n, _raw_normal_form(n, tuple(v.letters)))
    if (start_u[0], _sup(start_u)) != (start_v[0], _sup(start_v)):
        return ConjugacyResult(
            verdict="not_conjugate",
            certificate="summit_bounds",
            details={
                "infimumU": start_u[0],
                "supremumU": _sup(start_u),
                "infimumV": start_v[0],
                "supremumV": _sup(start_v),
            },
        )

    elements, complete, nodes = _summit_orbit(n, start_u, conj_u, budget)
    match = elements.get(start_v)
    if match is not None:
        # g^-1 u g = h^-1 v h  =>  v = (h g^-1) u (h g^-1)^-1
        g = BraidWord.model_construct(strands=n, letters=match)
        h = BraidWord.model_construct(strands=n, letters=tuple(conj_v))
        witness = free_reduce(concat(h, inverse(g)))
        if not words_equal(free_reduce(concat(witness, u, inverse(witness))), v):
            logger.error("conjugacy.witness_mismatch strands=%s nodes=%s", n, nodes)
            raise AppException("Conjugating witness failed verification.", status_code=500, code="braid.witness")
        return ConjugacyResult(
            verdict="conjugate",
            witness=witness,
            certificate="super_summit_match",
            details={"summitSize": len(elements), "nodes": nodes},
        )
    if complete:
        return ConjugacyResult(
            verdict="not_conjugate",
            certificate="super_summit_disjoint",
            details={"summitSize": len(elements), "nodes": nodes},
        )
    logger.info("conjugacy.undecided strands=%s nodes=%s summit_size=%s", n, nodes, len(elements))
    return ConjugacyResult(verdict="undecided", details={"summitSize": len(elements), "nodes": nodes})
