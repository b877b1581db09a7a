from __future__ import annotations

import hashlib
import itertools
import json
import logging
import math
from collections.abc import Iterator, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import networkx as nx
from networkx.utils import UnionFind
from pydantic import ValidationError

from app.core.config import get_settings, load_key_value_file, normalize_ambient, parse_key_value_text
from app.core.exceptions import AppException
from app.schemas.braid import BraidWord
from app.schemas.census import (
    BucketSummary,
    CensusConfig,
    CensusFingerprint,
    CensusRecord,
    CensusReport,
    MoveStep,
    MoveTrace,
)
from app.schemas.link import LinkData
from app.schemas.mixed import MixedBraidWord
from app.schemas.quandle import FiniteQuandle
from app.services import braid_service, closure_service, garside_service, mixed_braid_service, quandle_service

settings = get_settings()
logger = logging.getLogger(__name__)

CensusWord = BraidWord | MixedBraidWord
NodeKey = tuple

_CONFIG_KEYS = {
    "ambient": "ambient",
    "min_strands": "min_strands",
    "strands": "max_strands",
    "max_strands": "max_strands",
    "length": "max_length",
    "max_length": "max_length",
    "depth": "depth",
    "panel": "panel",
    "budget": "state_budget",
    "state_budget": "state_budget",
    "workers": "workers",
}


# Configuration


def panel_orders(text: str) -> tuple[int, ...]:
    return tuple(quandle.order for quandle in quandle_service.parse_panel(text))


def default_config() -> CensusConfig:
    return CensusConfig(
        ambient=settings.CENSUS_AMBIENT,
        max_strands=settings.CENSUS_MAX_STRANDS,
        max_length=settings.CENSUS_MAX_LENGTH,
        depth=settings.CENSUS_DEPTH,
        panel=panel_orders(settings.CENSUS_PANEL),
        state_budget=settings.CENSUS_STATE_BUDGET,
        workers=settings.CENSUS_WORKERS,
    )


def census_config_from_mapping(values: Mapping[str, object], base: CensusConfig | None = None) -> CensusConfig:
    fields = (base or default_config()).model_dump()
    fields["workers"] = (base or default_config()).workers
    for raw_key, value in values.items():
        key = str(raw_key).strip().lower().replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise AppException(f"Unknown census config key {raw_key!r}.", code="config.invalid", extra={"key": raw_key})
        if value is None:
            continue
        field = _CONFIG_KEYS[key]
        if field == "panel":
            value = panel_orders(value) if isinstance(value, str) else tuple(value)
        elif field == "ambient":
            value = normalize_ambient(value)
        fields[field] = value
    try:
        return CensusConfig(**fields)
    except ValidationError as exc:
        raise AppException(f"Invalid census configuration: {exc.errors()[0]['msg']}", code="config.invalid") from exc


def parse_census_config(text: str, base: CensusConfig | None = None) -> CensusConfig:
    try:
        values = parse_key_value_text(text)
    except ValueError as exc:
        raise AppException(f"Invalid census config: {exc}", code="config.invalid") from exc
    return census_config_from_mapping(values, base)


def load_census_config(path: str | Path, base: CensusConfig | None = None) -> CensusConfig:
    try:
        values = load_key_value_file(path)
    except (OSError, ValueError) as exc:
        raise AppException(f"Cannot read census config {path}: {exc}", code="config.invalid") from exc
    return census_config_from_mapping(values, base)


# Fingerprints


def resolve_panel(panel: str | Sequence[int | FiniteQuandle] | None = None) -> tuple[FiniteQuandle, ...]:
    if panel is None:
        panel = settings.CENSUS_PANEL
    if isinstance(panel, str):
        return quandle_service.parse_panel(panel)
    return tuple(item if isinstance(item, FiniteQuandle) else quandle_service.dihedral(int(item)) for item in panel)


def moving_braid(w: CensusWord) -> BraidWord:
    """The moving part of a solid-torus word, or the word itself."""
    if not isinstance(w, MixedBraidWord):
        return w
    if any(tag == "a" for tag, _, _ in w.letters):
        raise AppException("Loop generators have no solid-torus move set.", code="census.loop_letters")
    return braid_service.make_word(w.moving_strands, [(index, sign) for _, index, sign in w.letters])


def _canonical_link_data(link: LinkData) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Per-component winding and upper-triangular linking, minimised over component
    orders and a global sign."""
    k = link.components
    if link.ambient == "sphere3":
        per_component = [0] * k
    else:
        per_component = [len(strands) for strands in link.component_strands]
    best = None
    for order in itertools.permutations(range(k)):
        for sign in (1, -1):
            candidate = (
                tuple(per_component[p] for p in order),
                tuple(sign * link.linking_matrix[order[p]][order[q]] for p in range(k) for q in range(p + 1, k)),
            )
            if best is None or candidate < best:
                best = candidate
    return best


def fingerprint(w: CensusWord, panel: str | Sequence[int | FiniteQuandle] | None = None) -> CensusFingerprint:
    quandles = resolve_panel(panel)
    if isinstance(w, MixedBraidWord):
        link = closure_service.close_mixed(w)
        colored = mixed_braid_service.embed(w)
    else:
        link = closure_service.close(w)
        colored = w
    winding, linking = _canonical_link_data(link)
    return CensusFingerprint(
        ambient=link.ambient,
        components=link.components,
        winding=winding if link.ambient != "sphere3" else (),
        linking=linking,
        colorings=tuple(quandle_service.coloring_count(colored, quandle) for quandle in quandles),
    )


def fingerprint_text(fp: CensusFingerprint) -> str:
    def join(values: Sequence[int]) -> str:
        return ",".join(str(value) for value in values) or "-"

    return "\t".join([fp.ambient, str(fp.components), join(fp.winding), join(fp.linking), join(fp.colorings)])


def fingerprint_hash(fp: CensusFingerprint) -> str:
    return hashlib.sha256(fingerprint_text(fp).encode("utf-8")).hexdigest()[:12]


def _fingerprint_chunk(payload: tuple[list[CensusWord], tuple[int, ...]]) -> list[CensusFingerprint]:
    words, panel = payload
    return [fingerprint(word, panel) for word in words]


def fingerprint_all(words: Sequence[CensusWord], panel: Sequence[int], workers: int = 1) -> list[CensusFingerprint]:
    """Fingerprints in input order; prefix chunks fan out to worker processes."""
    panel = tuple(panel)
    if workers <= 1 or len(words) < 2 * workers:
        return _fingerprint_chunk((list(words), panel))
    size = math.ceil(len(words) / workers)
    chunks = [(list(words[start : start + size]), panel) for start in range(0, len(words), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_fingerprint_chunk, chunks))
    return [fp for chunk in results for fp in chunk]


# Moves


def _rotated(w: BraidWord, offset: int) -> BraidWord:
    letters = w.letters[offset:] + w.letters[:offset]
    return BraidWord.model_construct(strands=w.strands, letters=braid_service.free_reduce_letters(letters))


def apply_move(w: BraidWord, step: MoveStep) -> BraidWord:
    if step.kind == "rotate":
        if not 0 < step.offset < len(w.letters):
            raise AppException(f"Cannot rotate a word of length {len(w.letters)} by {step.offset}.", code="census.move")
        return _rotated(w, step.offset)
    if step.kind == "conjugate":
        return braid_service.conjugate_by(w, braid_service.make_word(w.strands, step.conjugator))
    if step.kind == "stabilize":
        return closure_service.markov_stabilize(w, step.sign, at=step.at)
    if step.kind == "destabilize":
        result = closure_service.markov_destabilize(w)
        if result is None:
            raise AppException(f"{braid_service.format_braid(w)} has no removable last generator.", code="census.move")
        return result
    if w.strands != step.result.strands or not garside_service.words_equal(w, step.result):
        raise AppException("Rewrite target is not equal in the braid group.", code="census.move")
    return step.result


def replay_trace(trace: MoveTrace) -> BraidWord:
    """Re-execute every step, checking each produced word against the recorded one."""
    current = trace.source
    for number, step in enumerate(trace.steps):
        produced = apply_move(current, step)
        if produced.strands != step.result.strands or not garside_service.words_equal(produced, step.result):
            raise AppException(
                f"Step {number} ({step.kind}) does not reproduce its recorded word.",
                code="census.replay",
                extra={"step": number},
            )
        current = step.result
    if current.strands != trace.target.strands or not garside_service.words_equal(current, trace.target):
        raise AppException("Trace does not end at its target.", code="census.replay")
    return current


def _inverse_step(step: MoveStep, previous: BraidWord) -> MoveStep:
    if step.kind == "rotate":
        return MoveStep(kind="conjugate", conjugator=previous.letters[: step.offset], result=previous)
    if step.kind == "conjugate":
        return MoveStep(kind="conjugate", conjugator=braid_service.inverse_letters(step.conjugator), result=previous)
    if step.kind == "stabilize":
        return MoveStep(kind="destabilize", result=previous)
    if step.kind == "destabilize":
        position = closure_service.destabilizable_position(previous)
        sign = braid_service.free_reduce_letters(previous.letters)[position][1]
        return MoveStep(kind="stabilize", sign=sign, at=position, result=previous)
    return MoveStep(kind="rewrite", result=previous)


def _reversed_steps(source: BraidWord, steps: Sequence[MoveStep]) -> list[MoveStep]:
    words = [source, *(step.result for step in steps)]
    return [_inverse_step(steps[offset], words[offset]) for offset in range(len(steps) - 1, -1, -1)]


def reverse_trace(trace: MoveTrace) -> MoveTrace:
    steps: list[MoveStep] = []
    if trace.steps and trace.steps[-1].result != trace.target:
        steps.append(MoveStep(kind="rewrite", result=trace.steps[-1].result))
    steps.extend(_reversed_steps(trace.source, trace.steps))
    return MoveTrace(source=trace.target, target=trace.source, steps=tuple(steps))


def concat_traces(first: MoveTrace, second: MoveTrace) -> MoveTrace:
    steps = list(first.steps)
    end = first.steps[-1].result if first.steps else first.source
    if end != second.source:
        steps.append(MoveStep(kind="rewrite", result=second.source))
    steps.extend(second.steps)
    return MoveTrace(source=first.source, target=second.target, steps=tuple(steps))


def _neighbors(w: BraidWord, ambient: str, strand_limit: int) -> Iterator[MoveStep]:
    for offset in range(1, len(w.letters)):
        yield MoveStep.model_construct(kind="rotate", offset=offset, conjugator=(), sign=0, at=0, result=_rotated(w, offset))
    for letter in braid_service.signed_generators(w.strands):
        conjugator = BraidWord.model_construct(strands=w.strands, letters=(letter,))
        yield MoveStep.model_construct(
            kind="conjugate",
            offset=0,
            conjugator=(letter,),
            sign=0,
            at=0,
            result=braid_service.conjugate_by(w, conjugator),
        )
    if ambient != "sphere3":
        return
    if w.strands < strand_limit:
        for sign in (1, -1):
            yield MoveStep.model_construct(
                kind="stabilize",
                offset=0,
                conjugator=(),
                sign=sign,
                at=len(w.letters),
                result=closure_service.markov_stabilize(w, sign),
            )
    destabilized = closure_service.markov_destabilize(w)
    if destabilized is not None:
        yield MoveStep.model_construct(kind="destabilize", offset=0, conjugator=(), sign=0, at=0, result=destabilized)


class _Ball:
    """Breadth-first move neighbourhood of one word, keyed by group element."""

    def __init__(self, root: BraidWord):
        self.root = root
        self.root_key = garside_service.normal_form_key(root)
        self.nodes: dict[NodeKey, tuple[BraidWord, NodeKey | None, MoveStep | None]] = {self.root_key: (root, None, None)}
        self.frontier: list[NodeKey] = [self.root_key]

    def grow(self, ambient: str, strand_limit: int, stop: set | dict | None = None) -> Iterator[NodeKey]:
        """Expand one level, yielding each newly reached key; keys in `stop` are not expanded later."""
        next_frontier: list[NodeKey] = []
        for key in self.frontier:
            word = self.nodes[key][0]
            for step in _neighbors(word, ambient, strand_limit):
                reached = garside_service.normal_form_key(step.result)
                if reached in self.nodes:
                    continue
                self.nodes[reached] = (step.result, key, step)
                if stop is None or reached not in stop:
                    next_frontier.append(reached)
                yield reached
        self.frontier = next_frontier

    def path_to(self, key: NodeKey) -> list[MoveStep]:
        steps: list[MoveStep] = []
        while True:
            _, parent, step = self.nodes[key]
            if parent is None:
                break
            steps.append(step)
            key = parent
        steps.reverse()
        return steps

    def word(self, key: NodeKey) -> BraidWord:
        return self.nodes[key][0]


def _joined_trace(forward: _Ball, backward: _Ball, key: NodeKey) -> MoveTrace:
    steps = forward.path_to(key)
    meet_forward, meet_backward = forward.word(key), backward.word(key)
    back = backward.path_to(key)
    if back and meet_forward != meet_backward:
        steps.append(MoveStep(kind="rewrite", result=meet_backward))
    steps.extend(_reversed_steps(backward.root, back))
    return MoveTrace(source=forward.root, target=backward.root, steps=tuple(steps))


def _search_ambient(u: CensusWord, v: CensusWord, ambient: str | None) -> str:
    kinds = {isinstance(u, MixedBraidWord), isinstance(v, MixedBraidWord)}
    if len(kinds) != 1:
        raise AppException("Cannot compare a solid-torus word with a sphere word.", code="census.ambient_mismatch")
    inferred = "solid_torus" if kinds == {True} else "sphere3"
    if ambient is not None and normalize_ambient(ambient) != inferred:
        raise AppException(f"Words live in {inferred}, not {ambient}.", code="census.ambient_mismatch")
    return inferred


def merge_search(
    u: CensusWord,
    v: CensusWord,
    depth: int,
    ambient: str | None = None,
    budget: int | None = None,
    strand_limit: int | None = None,
) -> MoveTrace | None:
    """Grow move balls of radius `depth` around u and v until they meet.

    The returned trace has at most 2 * depth moves. None means not connected
    within the bounds, never that the closures differ.
    """
    ambient = _search_ambient(u, v, ambient)
    start, goal = moving_braid(u), moving_braid(v)
    if ambient == "solid_torus" and start.strands != goal.strands:
        return None
    if budget is None:
        budget = settings.CENSUS_STATE_BUDGET
    elif budget < 1:
        raise AppException(f"State budget must be positive, got {budget}.", code="census.budget")
    strand_limit = strand_limit or max(start.strands, goal.strands) + 1
    forward, backward = _Ball(start), _Ball(goal)
    if forward.root_key == backward.root_key:
        return MoveTrace(source=start, target=goal)
    states = 0
    for _ in range(depth):
        for ball, other, flipped in ((forward, backward, False), (backward, forward, True)):
            for key in ball.grow(ambient, strand_limit):
                states += 1
                if key in other.nodes:
                    trace = _joined_trace(other, ball, key) if flipped else _joined_trace(ball, other, key)
                    logger.debug("census.merge_search.found moves=%s states=%s", len(trace), states)
                    return trace
                if states >= budget:
                    logger.info("census.merge_search.budget_exhausted states=%s", states)
                    return None
    return None


# Census


def enumerate_census_words(config: CensusConfig) -> Iterator[CensusWord]:
    for strands in range(config.min_strands, config.max_strands + 1):
        for word in braid_service.enumerate_words(strands, config.max_length):
            if config.ambient == "sphere3":
                yield word
            else:
                yield mixed_braid_service.make_mixed(1, strands, [("s", index, sign) for index, sign in word.letters])


def expected_word_count(config: CensusConfig) -> int:
    return sum(braid_service.count_words(strands, config.max_length) for strands in range(config.min_strands, config.max_strands + 1))


def format_word(w: CensusWord) -> str:
    if isinstance(w, MixedBraidWord):
        return mixed_braid_service.format_mixed(w)
    return braid_service.format_braid(w)


def run_census(config: CensusConfig | None = None) -> CensusReport:
    """Assign every enumerated word to exactly one class.

    Words with equal braid group elements share a class outright. Classes are
    otherwise merged only when the move balls grown around their representatives
    meet, which yields a replayable trace.
    """
    config = config or default_config()
    logger.info(
        "census.run.start ambient=%s strands=%s..%s max_length=%s depth=%s panel=%s workers=%s",
        config.ambient,
        config.min_strands,
        config.max_strands,
        config.max_length,
        config.depth,
        ",".join(str(order) for order in config.panel),
        config.workers,
    )
    words = list(enumerate_census_words(config))
    braids = [moving_braid(word) for word in words]
    fingerprints = fingerprint_all(words, config.panel, config.workers)
    keys = [garside_service.normal_form_key(braid) for braid in braids]

    element_rep: dict[NodeKey, int] = {}
    for index, key in enumerate(keys):
        element_rep.setdefault(key, index)
    reps = sorted(set(element_rep.values()))

    graph = nx.Graph()
    graph.add_nodes_from(reps)
    merged = UnionFind(reps)
    owner: dict[NodeKey, int] = {}
    balls: dict[int, _Ball] = {}
    strand_limit = config.max_strands + 1
    states = 0
    complete = True

    def connect(rep: int, key: NodeKey) -> None:
        other = owner.get(key)
        if other is None:
            owner[key] = rep
            return
        if other == rep or merged[other] == merged[rep]:
            return
        if fingerprints[other] != fingerprints[rep]:
            logger.warning("census.fingerprint_conflict left=%s right=%s", rep, other)
            return
        trace = _joined_trace(balls[rep], balls[other], key)
        merged.union(rep, other)
        graph.add_edge(rep, other, trace=trace, start=rep)

    for rep in reps:
        ball = _Ball(braids[rep])
        balls[rep] = ball
        connect(rep, ball.root_key)
        for _ in range(config.depth):
            for key in ball.grow(config.ambient, strand_limit, stop=owner):
                states += 1
                connect(rep, key)
                if states >= config.state_budget:
                    complete = False
                    break
            if not complete:
                break
        if not complete:
            logger.warning("census.budget_exhausted states=%s rep=%s", states, rep)
            break

    root_of: dict[int, int] = {}
    for component in nx.connected_components(graph):
        root = min(component)
        root_of.update((rep, root) for rep in component)
    root_ids = {root: class_id for class_id, root in enumerate(sorted(set(root_of.values())))}
    class_traces = {rep: _trace_to_root(graph, rep, root_of[rep], braids) for rep in reps}

    bucket_classes: dict[CensusFingerprint, set[int]] = {}
    bucket_words: dict[CensusFingerprint, int] = {}
    for index, fp in enumerate(fingerprints):
        bucket_classes.setdefault(fp, set()).add(root_of[element_rep[keys[index]]])
        bucket_words[fp] = bucket_words.get(fp, 0) + 1

    records = []
    for index, word in enumerate(words):
        rep = element_rep[keys[index]]
        root = root_of[rep]
        own = MoveTrace(source=braids[index], target=braids[rep])
        trace = concat_traces(own, class_traces[rep]) if index != rep else class_traces[rep]
        fp = fingerprints[index]
        link = closure_service.close_mixed(word) if isinstance(word, MixedBraidWord) else closure_service.close(word)
        records.append(
            CensusRecord(
                index=index,
                word=format_word(word),
                fingerprint=fp,
                fingerprint_hash=fingerprint_hash(fp),
                class_id=root_ids[root],
                representative=format_word(words[root]),
                trace=trace,
                raw_linking=link.linking_matrix,
                undistinguished=len(bucket_classes[fp]) > 1,
            )
        )

    buckets = tuple(
        BucketSummary(
            fingerprint=fp,
            fingerprint_hash=fingerprint_hash(fp),
            classes=len(bucket_classes[fp]),
            words=bucket_words[fp],
        )
        for fp in sorted(bucket_classes, key=lambda item: item.sort_key())
    )
    report = CensusReport(
        config=config,
        records=tuple(records),
        buckets=buckets,
        class_count=len(root_ids),
        word_count=len(words),
        expected_word_count=expected_word_count(config),
        states_explored=states,
        complete=complete,
    )
    logger.info(
        "census.run.done words=%s classes=%s buckets=%s states=%s complete=%s",
        report.word_count,
        report.class_count,
        len(buckets),
        states,
        complete,
    )
    return report


def _trace_to_root(graph: nx.Graph, rep: int, root: int, braids: Sequence[BraidWord]) -> MoveTrace:
    """Compose the merge traces along the shortest edge path from rep to its class root."""
    trace = MoveTrace(source=braids[rep], target=braids[rep])
    path = nx.shortest_path(graph, rep, root)
    for left, right in zip(path, path[1:]):
        edge = graph.edges[left, right]
        # stored traces run from `start` to the other endpoint
        hop = edge["trace"] if edge["start"] == left else reverse_trace(edge["trace"])
        trace = concat_traces(trace, hop)
    return trace


def essential_witnesses(k: int) -> list[MixedBraidWord]:
    """sigma_1 ... sigma_{n-1} on n moving strands for n = 1..k: knots of winding n."""
    if k < 1:
        raise AppException(f"Witness count must be >= 1, got {k}.", code="census.witness_count")
    return [
        mixed_braid_service.make_mixed(1, strands, [("s", index, 1) for index in range(1, strands)])
        for strands in range(1, k + 1)
    ]


# Output


def _config_line(config: CensusConfig) -> str:
    fields = config.model_dump()
    fields["panel"] = ",".join(f"d{order}" for order in config.panel)
    return " ".join(f"{key}={value}" for key, value in fields.items())


def _join(values: Sequence[int]) -> str:
    return ",".join(str(value) for value in values) or "-"


def format_report(report: CensusReport, fmt: str = "text") -> str:
    """`text`: '#'-prefixed header, tab-separated records, bucket summary.
    `records`: one JSON object per line."""
    if fmt == "records":
        return _format_records(report)
    if fmt != "text":
        raise AppException(f"Unknown report format {fmt!r}.", code="census.format")
    lines = [
        f"# census {_config_line(report.config)}",
        f"# words={report.word_count} expected={report.expected_word_count} classes={report.class_count} "
        f"states={report.states_explored} complete={str(report.complete).lower()}",
        "# index\tword\tambient\thash\tcomponents\twinding\tlinking\tcolorings\tclass\trepresentative\tmoves\tstatus",
    ]
    for record in report.records:
        fp = record.fingerprint
        lines.append(
            "\t".join(
                [
                    str(record.index),
                    record.word,
                    fp.ambient,
                    record.fingerprint_hash,
                    str(fp.components),
                    _join(fp.winding),
                    _join(fp.linking),
                    _join(fp.colorings),
                    str(record.class_id),
                    record.representative,
                    str(len(record.trace)),
                    "undistinguished" if record.undistinguished else "separated",
                ]
            )
        )
    lines.append("# buckets: hash\tcomponents\twinding\tlinking\tcolorings\tclasses\twords")
    for bucket in report.buckets:
        fp = bucket.fingerprint
        lines.append(
            "\t".join(
                [
                    f"# {bucket.fingerprint_hash}",
                    str(fp.components),
                    _join(fp.winding),
                    _join(fp.linking),
                    _join(fp.colorings),
                    str(bucket.classes),
                    str(bucket.words),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _format_records(report: CensusReport) -> str:
    lines = [json.dumps({"type": "config", **report.config.model_dump(mode="json")}, sort_keys=True)]
    for record in report.records:
        payload = {
            "type": "record",
            "index": record.index,
            "word": record.word,
            "hash": record.fingerprint_hash,
            "fingerprint": record.fingerprint.model_dump(mode="json"),
            "class": record.class_id,
            "representative": record.representative,
            "moves": [step.kind for step in record.trace.steps],
            "rawLinking": [list(row) for row in record.raw_linking],
            "undistinguished": record.undistinguished,
        }
        lines.append(json.dumps(payload, sort_keys=True))
    for bucket in report.buckets:
        lines.append(
            json.dumps(
                {
                    "type": "bucket",
                    "hash": bucket.fingerprint_hash,
                    "fingerprint": bucket.fingerprint.model_dump(mode="json"),
                    "classes": bucket.classes,
                    "words": bucket.words,
                },
                sort_keys=True,
            )
        )
    lines.append(
        json.dumps(
            {
                "type": "summary",
                "words": report.word_count,
                "expected": report.expected_word_count,
                "classes": report.class_count,
                "states": report.states_explored,
                "complete": report.complete,
            },
            sort_keys=True,
        )
    )
    return "\n".join(lines) + "\n"
