from __future__ import annotations

import itertools
import logging
import re
from functools import lru_cache

import numpy as np
from networkx.utils import UnionFind

from app.core.config import get_settings
from app.core.exceptions import AppException
from app.schemas.braid import BraidWord
from app.schemas.quandle import AxiomReport, FiniteQuandle, QuandlePresentation

settings = get_settings()
logger = logging.getLogger(__name__)

_PANEL_TOKEN_RE = re.compile(r"^(?:d|dihedral)(\d+)$", re.IGNORECASE)
ORACLE_ASSIGNMENT_LIMIT = 5_000_000


def dihedral(n: int) -> FiniteQuandle:
    """R_n on 0..n-1 with i * j = 2j - i mod n."""
    if n < 1:
        raise AppException(f"Dihedral quandle order must be >= 1, got {n}.", code="quandle.order_out_of_range")
    table = tuple(tuple((2 * j - i) % n for j in range(n)) for i in range(n))
    return FiniteQuandle(order=n, table=table, name=f"dihedral{n}")


@lru_cache(maxsize=256)
def _axiom_failure(order: int, table: tuple[tuple[int, ...], ...]) -> tuple[str, tuple[int, ...]] | None:
    matrix = np.asarray(table, dtype=np.int64)
    for i in range(order):
        if matrix[i, i] != i:
            return "idempotence", (i,)
    for j in range(order):
        if len(set(matrix[:, j].tolist())) != order:
            return "right_invertibility", (j,)
    i, j, k = np.indices((order, order, order))
    left = matrix[matrix[i, j], k]
    right = matrix[matrix[i, k], matrix[j, k]]
    violations = np.argwhere(left != right)
    if len(violations):
        return "self_distributivity", tuple(int(value) for value in violations[0])
    return None


def check_axioms(quandle: FiniteQuandle) -> AxiomReport:
    failure = _axiom_failure(quandle.order, quandle.table)
    if failure is None:
        return AxiomReport(valid=True)
    axiom, counterexample = failure
    return AxiomReport(valid=False, axiom=axiom, counterexample=counterexample)


def _require_quandle(quandle: FiniteQuandle) -> np.ndarray:
    report = check_axioms(quandle)
    if not report.valid:
        raise AppException(
            f"Table {quandle.name or '(unnamed)'} violates {report.axiom} at {report.counterexample}.",
            code="quandle.axioms",
            extra={"axiom": report.axiom, "counterexample": list(report.counterexample or ())},
        )
    return np.asarray(quandle.table, dtype=np.int64)


def _right_inverse(table: np.ndarray) -> np.ndarray:
    """inverse[k, j] is the i with i * j = k."""
    order = table.shape[0]
    inverse = np.empty_like(table)
    for j in range(order):
        inverse[table[:, j], j] = np.arange(order)
    return inverse


def _assignments(order: int, count: int) -> np.ndarray:
    return np.indices((order,) * count).reshape(count, -1).T


def coloring_count(w: BraidWord, quandle: FiniteQuandle) -> int:
    """Fixed points of the braid action on Q^n.

    Positive sigma_i sends the colors (a, b) at positions (i, i+1) to (b, a * b);
    negative sigma_i is the inverse move.
    """
    table = _require_quandle(quandle)
    inverse = _right_inverse(table)
    start = _assignments(quandle.order, w.strands)
    colors = start.copy()
    for index, sign in w.letters:
        a = colors[:, index - 1].copy()
        b = colors[:, index].copy()
        if sign > 0:
            colors[:, index - 1] = b
            colors[:, index] = table[a, b]
        else:
            colors[:, index - 1] = inverse[b, a]
            colors[:, index] = a
    return int(np.count_nonzero(np.all(colors == start, axis=1)))


def _merge(classes: UnionFind, left: int, right: int) -> bool:
    if classes[left] == classes[right]:
        return False
    classes.union(left, right)
    return True


def _relabel(size: int, classes: UnionFind, relations) -> QuandlePresentation:
    labels: dict[int, int] = {}
    for item in range(size):
        labels.setdefault(classes[item], len(labels))
    relabelled = tuple(
        (labels[classes[k]], labels[classes[i]], labels[classes[j]]) for k, i, j in relations
    )
    return QuandlePresentation(generators=len(labels), relations=relabelled)


def fundamental_presentation(w: BraidWord) -> QuandlePresentation:
    """One generator per arc of the closed braid diagram, one relation per crossing."""
    n = w.strands
    arcs = list(range(n))
    arc_count = n
    relations: list[tuple[int, int, int]] = []
    for index, sign in w.letters:
        left, right = arcs[index - 1], arcs[index]
        created = arc_count
        arc_count += 1
        if sign > 0:
            relations.append((created, left, right))
            arcs[index - 1], arcs[index] = right, created
        else:
            relations.append((right, created, left))
            arcs[index - 1], arcs[index] = created, left
    classes = UnionFind(range(arc_count))
    for position in range(n):
        classes.union(position, arcs[position])
    return _relabel(arc_count, classes, relations)


def simplify_presentation(presentation: QuandlePresentation) -> QuandlePresentation:
    """Merge generators forced equal by idempotence, functionality and right cancellation,
    then drop trivial and repeated relations."""
    classes = UnionFind(range(presentation.generators))
    changed = True
    while changed:
        changed = False
        by_operands: dict[tuple[int, int], int] = {}
        by_result: dict[tuple[int, int], int] = {}
        for k, i, j in presentation.relations:
            k, i, j = classes[k], classes[i], classes[j]
            if i == j:
                changed |= _merge(classes, k, i)
                continue
            known = by_operands.setdefault((i, j), k)
            if known != k:
                changed |= _merge(classes, known, k)
            source = by_result.setdefault((k, j), i)
            if source != i:
                changed |= _merge(classes, source, i)
    kept: list[tuple[int, int, int]] = []
    seen: set[tuple[int, int, int]] = set()
    for k, i, j in presentation.relations:
        relation = (classes[k], classes[i], classes[j])
        if relation[1] == relation[2] or relation in seen:
            continue
        seen.add(relation)
        kept.append(relation)
    return _relabel(presentation.generators, classes, kept)


def presentation_coloring_count(presentation: QuandlePresentation, quandle: FiniteQuandle) -> int:
    """Brute force over Q^generators."""
    table = _require_quandle(quandle)
    size = quandle.order**presentation.generators
    if size > ORACLE_ASSIGNMENT_LIMIT:
        raise AppException(
            f"Brute force over {size} assignments exceeds the oracle limit.",
            code="quandle.oracle_too_large",
        )
    colors = _assignments(quandle.order, presentation.generators)
    satisfied = np.ones(colors.shape[0], dtype=bool)
    for k, i, j in presentation.relations:
        satisfied &= colors[:, k] == table[colors[:, i], colors[:, j]]
    return int(np.count_nonzero(satisfied))


def enumerate_quandles(order: int) -> list[FiniteQuandle]:
    """Every quandle table on 0..order-1, without isomorphism reduction.

    Columns are right translations: permutations fixing their own index.
    """
    bound = settings.QUANDLE_MAX_ENUMERATION_ORDER
    if not 1 <= order <= bound:
        raise AppException(
            f"Quandle enumeration supports orders 1..{bound}, got {order}.",
            code="quandle.order_out_of_range",
        )
    columns_per_index = [
        [perm for perm in itertools.permutations(range(order)) if perm[j] == j] for j in range(order)
    ]
    tables = []
    for columns in itertools.product(*columns_per_index):
        table = tuple(tuple(columns[j][i] for j in range(order)) for i in range(order))
        if _axiom_failure(order, table) is None:
            tables.append(table)
    found = [FiniteQuandle(order=order, table=table, name=f"q{order}_{rank}") for rank, table in enumerate(sorted(tables))]
    logger.info("quandle.enumerate order=%s count=%s", order, len(found))
    return found


def parse_quandle_table(text: str, name: str = "") -> FiniteQuandle:
    """First line the order q, then q rows of q integers."""
    rows = [line.split() for line in str(text or "").splitlines() if line.strip() and not line.lstrip().startswith("#")]
    try:
        order = int(rows[0][0])
        table = tuple(tuple(int(value) for value in row) for row in rows[1:])
        quandle = FiniteQuandle(order=order, table=table, name=name)
    except (IndexError, ValueError) as exc:
        raise AppException(f"Malformed quandle table: {exc}", code="quandle.table_format") from exc
    return quandle


def format_quandle_table(quandle: FiniteQuandle) -> str:
    lines = [str(quandle.order)]
    lines.extend(" ".join(str(value) for value in row) for row in quandle.table)
    return "\n".join(lines) + "\n"


def parse_quandle_spec(token: str) -> FiniteQuandle:
    match = _PANEL_TOKEN_RE.match(token.strip())
    if not match:
        raise AppException(f"Unknown quandle {token!r}; expected d<n> or dihedral<n>.", code="quandle.panel")
    return dihedral(int(match.group(1)))


def parse_panel(text: str) -> tuple[FiniteQuandle, ...]:
    tokens = [token for token in str(text or "").split(",") if token.strip()]
    if not tokens:
        raise AppException("Quandle panel is empty.", code="quandle.panel")
    return tuple(parse_quandle_spec(token) for token in tokens)


def format_panel(panel) -> str:
    return ",".join(f"d{quandle.order}" if quandle.name.startswith("dihedral") else quandle.name for quandle in panel)
