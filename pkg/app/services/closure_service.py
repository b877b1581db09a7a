from __future__ import annotations

import logging
from collections.abc import Sequence

from app.core.config import AMBIENTS, normalize_ambient
from app.core.exceptions import AppException
from app.schemas.braid import BraidWord
from app.schemas.link import LinkData
from app.schemas.mixed import MixedBraidWord
from app.services import braid_service, mixed_braid_service

logger = logging.getLogger(__name__)


def _crossing_totals(strands: int, letters: Sequence[tuple[int, int]], component_of: Sequence[int], size: int) -> list[list[int]]:
    """Half the crossing-sign sums between strands of distinct labels."""
    arrangement = list(range(strands))
    totals = [[0] * size for _ in range(size)]
    for index, sign in letters:
        left, right = arrangement[index - 1], arrangement[index]
        p, q = component_of[left], component_of[right]
        if p != q:
            totals[p][q] += sign
            totals[q][p] += sign
        arrangement[index - 1], arrangement[index] = right, left
    return [[value // 2 for value in row] for row in totals]


def _labels(cycles: Sequence[Sequence[int]], strands: int) -> list[int]:
    component_of = [0] * strands
    for label, cycle in enumerate(cycles):
        for position in cycle:
            component_of[position - 1] = label
    return component_of


def _as_matrix(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(row) for row in rows)


def _braid_linking(w: BraidWord) -> tuple[tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]:
    cycles = braid_service.permutation(w).cycles()
    totals = _crossing_totals(w.strands, w.letters, _labels(cycles, w.strands), len(cycles))
    return _as_matrix(totals), cycles


def _mixed_structure(w: MixedBraidWord):
    """Moving cycles (numbered 1..n), moving linking matrix and the k x m fixed linking matrix."""
    m = w.fixed_strands
    embedded = mixed_braid_service.embed(w)
    cycles = [cycle for cycle in braid_service.permutation(embedded).cycles() if cycle[0] > m]
    k = len(cycles)
    component_of = _labels(cycles, embedded.strands)
    for fixed in range(m):
        component_of[fixed] = k + fixed
    totals = _crossing_totals(embedded.strands, embedded.letters, component_of, k + m)
    moving = _as_matrix(row[:k] for row in totals[:k])
    fixed_strand_linking = _as_matrix(row[k:] for row in totals[:k])
    moving_cycles = tuple(tuple(position - m for position in cycle) for cycle in cycles)
    return moving_cycles, moving, fixed_strand_linking


def linking_matrix(w: BraidWord | MixedBraidWord) -> tuple[tuple[int, ...], ...]:
    if isinstance(w, MixedBraidWord):
        return _mixed_structure(w)[1]
    return _braid_linking(w)[0]


def close(w: BraidWord) -> LinkData:
    matrix, cycles = _braid_linking(w)
    return LinkData(
        ambient="sphere3",
        components=len(cycles),
        winding=(0,) * len(cycles),
        linking_matrix=matrix,
        component_strands=cycles,
    )


def _close_moving(w: MixedBraidWord, ambient: str) -> LinkData:
    cycles, matrix, fixed_strand_linking = _mixed_structure(w)
    return LinkData(
        ambient=ambient,
        components=len(cycles),
        winding=tuple(sorted(len(cycle) for cycle in cycles)),
        linking_matrix=matrix,
        component_strands=cycles,
        axis_linking=tuple(len(cycle) for cycle in cycles),
        fixed_strand_linking=fixed_strand_linking,
    )


def close_mixed(w: MixedBraidWord) -> LinkData:
    """Closure in the solid torus; each moving strand winds once around the braid axis."""
    if w.fixed_strands != 1:
        raise AppException(
            f"Solid torus closure needs exactly one fixed strand, got {w.fixed_strands}.",
            code="mixed.fixed_strands",
        )
    return _close_moving(w, "solid_torus")


def close_handlebody(w: MixedBraidWord) -> LinkData:
    if w.fixed_strands < 1:
        raise AppException("Handlebody closure needs at least one fixed strand.", code="mixed.fixed_strands")
    return _close_moving(w, "handlebody")


def is_essential(link: LinkData) -> bool:
    """Sufficient test only: False means not certified."""
    if link.ambient == "sphere3":
        raise AppException("Essentialness is only certified for closures in the solid torus.", code="closure.ambient")
    return any(value != 0 for value in link.winding)


def format_link(link: LinkData) -> str:
    k = link.components
    upper = [link.linking_matrix[p][q] for p in range(k) for q in range(p + 1, k)]
    fields = [
        link.ambient,
        str(k),
        ",".join(str(value) for value in link.winding),
        ",".join(str(value) for value in upper) or "-",
    ]
    if link.fixed_strand_linking:
        fields.append(";".join(",".join(str(value) for value in row) for row in link.fixed_strand_linking))
    return "\t".join(fields)


def parse_closure_input(text: str, ambient: str, strands: int | None = None) -> BraidWord | MixedBraidWord:
    """A braid word for sphere3; for the solid torus either `Bm,n: ...` mixed text
    or a plain moving word, read as an element of B_{1,n}."""
    ambient = normalize_ambient(ambient)
    if ambient not in AMBIENTS:
        raise AppException(f"Unknown ambient {ambient!r}.", code="closure.ambient")
    if ambient == "sphere3":
        return braid_service.parse_braid_text(text, strands)
    header = str(text or "").split(":", 1)[0]
    if ":" in str(text or "") and "," in header:
        return mixed_braid_service.parse_mixed_text(text)
    moving = braid_service.parse_braid_text(text, strands)
    return mixed_braid_service.make_mixed(1, moving.strands, [("s", index, sign) for index, sign in moving.letters])


def close_in(w: BraidWord | MixedBraidWord) -> LinkData:
    if isinstance(w, BraidWord):
        return close(w)
    return close_mixed(w) if w.fixed_strands == 1 else close_handlebody(w)


def markov_conjugate(w: BraidWord, c: BraidWord) -> BraidWord:
    if w.strands != c.strands:
        raise AppException(
            f"Conjugator on {c.strands} strands cannot act on B_{w.strands}.",
            code="braid.strand_mismatch",
        )
    return braid_service.conjugate_by(w, c)


def markov_stabilize(w: BraidWord, sign: int, at: int | None = None) -> BraidWord:
    """Include into B_{n+1} and insert sigma_n^sign at letter position `at` (default: the end)."""
    if sign not in (1, -1):
        raise AppException(f"Stabilization sign must be +1 or -1, got {sign}.", code="braid.malformed_token")
    position = len(w.letters) if at is None else at
    if not 0 <= position <= len(w.letters):
        raise AppException(f"Stabilization position {position} outside the word.", code="closure.position")
    letters = list(w.letters)
    letters.insert(position, (w.strands, sign))
    return braid_service.make_word(w.strands + 1, letters)


def destabilizable_position(w: BraidWord) -> int | None:
    """Position of the unique sigma_{n-1} letter in the freely reduced word, if any."""
    if w.strands < 2:
        return None
    reduced = braid_service.free_reduce_letters(w.letters)
    positions = [offset for offset, (index, _) in enumerate(reduced) if index == w.strands - 1]
    return positions[0] if len(positions) == 1 else None


def markov_destabilize(w: BraidWord) -> BraidWord | None:
    position = destabilizable_position(w)
    if position is None:
        return None
    reduced = list(braid_service.free_reduce_letters(w.letters))
    del reduced[position]
    return braid_service.make_word(w.strands - 1, reduced)
