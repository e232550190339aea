"""Line-delimited input parsing and per-bag context construction.

File formats (UTF-8, one JSON object per line, documented in README):

* bag file:     {"bag_id", "head", "tail", "relations": [label, ...],
                 "sentences": [[token, ...], ...],
                 "head_mentions": [[sent, start, end], ...],
                 "tail_mentions": [[sent, start, end], ...]}
* RC file:      {"bag_id", "scores": [real x len(schema)]}
* updated file: {"bag_id", "scores": [real], "validated": [bool]}

Contexts concatenate the bag's truncated sentences behind a leading "null"
sentinel token, which is what unanswerable questions resolve to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence, Union

from .core import Bag, Mention, RcPrediction, RelationSchema
from .errors import ParseError, SchemaError

NULL_TOKEN = "null"

# RC scores may stray outside [0, 1] by at most this much (float round-trip
# slack); anything worse is an input error rather than something to clamp.
SCORE_SLACK = 1e-9


@dataclass(frozen=True, slots=True)
class Context:
    """Concatenated, truncated bag context with the "null" sentinel at index 0.

    ``tail_span`` is the [start, end) location of the designated tail-entity
    mention inside ``tokens`` (None when no tail mention survived truncation).
    """

    tokens: tuple[str, ...]
    tail_span: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.tokens or self.tokens[0] != NULL_TOKEN:
            raise ValueError(f'context must start with the "{NULL_TOKEN}" sentinel')
        if self.tail_span is not None:
            start, end = self.tail_span
            if not 1 <= start < end <= len(self.tokens):
                raise ValueError(
                    f"tail_span [{start}, {end}) invalid for length {len(self.tokens)}"
                )

    def __len__(self) -> int:
        return len(self.tokens)

    def tail_text(self) -> str | None:
        if self.tail_span is None:
            return None
        start, end = self.tail_span
        return " ".join(self.tokens[start:end])


def _window_bounds(length: int, starts: list[int], ends: list[int], window: int) -> tuple[int, int]:
    """[lo, hi) keeping `window` tokens beyond the outermost mention boundaries."""
    if not starts:
        return 0, length
    lo = max(0, min(starts) - window)
    hi = min(length, max(ends) + window)
    return lo, hi


def truncate_sentence(sentence: Sequence[str], head: Mention, tail: Mention, window: int) -> list[str]:
    """Cut a sentence down to `window` tokens around the entity pair.

    Keeps the contiguous token range from `window` tokens before the earlier
    mention to `window` tokens after the later one, clipped to the sentence.
    Both mentions always survive in full.
    """
    if window < 0:
        raise ValueError(f"window must be >= 0, got {window}")
    lo, hi = _window_bounds(
        len(sentence), [head.token_start, tail.token_start], [head.token_end, tail.token_end], window
    )
    return list(sentence[lo:hi])


def build_context(bag: Bag, window: int = 40) -> Context:
    """Concatenate the bag's truncated sentences behind the "null" sentinel.

    Sentences keep input order.  Sentences missing one or both mentions are
    truncated around whatever mentions they do have (kept whole when they
    have none).  ``tail_span`` points at the first tail mention that survives
    truncation, in concatenation order.
    """
    tokens: list[str] = [NULL_TOKEN]
    tail_span: tuple[int, int] | None = None
    for si, sentence in enumerate(bag.sentences):
        heads, tails = bag.mentions_in_sentence(si)
        starts = [m.token_start for m in heads[:1] + tails[:1]]
        ends = [m.token_end for m in heads[:1] + tails[:1]]
        lo, hi = _window_bounds(len(sentence), starts, ends, window)
        offset = len(tokens) - lo
        tokens.extend(sentence[lo:hi])
        if tail_span is None:
            for m in tails:
                if lo <= m.token_start and m.token_end <= hi:
                    tail_span = (m.token_start + offset, m.token_end + offset)
                    break
    return Context(tokens=tuple(tokens), tail_span=tail_span)


Lines = Union[IO[bytes], IO[str], Iterable[Union[bytes, str]]]


def iter_lines(stream: Lines) -> Iterator[tuple[int, str]]:
    for line_no, raw in enumerate(stream, start=1):
        text = raw.decode("utf-8") if isinstance(raw, bytes) else raw
        text = text.strip()
        if text:
            yield line_no, text


def parse_json_line(line_no: int, text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object, got {type(obj).__name__}", line_no)
    return obj


def _require(obj: dict, key: str, line_no: int):
    if key not in obj:
        raise ParseError(f"missing field {key!r}", line_no)
    return obj[key]


def _parse_mentions(raw, role: str, line_no: int) -> tuple[Mention, ...]:
    mentions = []
    for item in raw:
        if not (isinstance(item, list) and len(item) == 3):
            raise ParseError(f"{role} mention must be [sentence, start, end], got {item!r}", line_no)
        try:
            mentions.append(Mention(int(item[0]), int(item[1]), int(item[2])))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"bad {role} mention {item!r}: {exc}", line_no) from exc
    return tuple(mentions)


def parse_bags(stream: Lines, schema: RelationSchema) -> list[Bag]:
    """Parse a bag file, resolving relation labels to schema indices.

    Raises ParseError (with the line number) on malformed records, unknown
    labels, or out-of-range mentions.
    """
    bags = []
    for line_no, text in iter_lines(stream):
        obj = parse_json_line(line_no, text)
        labels = _require(obj, "relations", line_no)
        try:
            relations = frozenset(schema.index_of(label) for label in labels)
        except SchemaError as exc:
            raise ParseError(str(exc), line_no) from exc
        sentences = tuple(
            tuple(str(t) for t in sent) for sent in _require(obj, "sentences", line_no)
        )
        try:
            bag = Bag(
                bag_id=str(_require(obj, "bag_id", line_no)),
                head=str(_require(obj, "head", line_no)),
                tail=str(_require(obj, "tail", line_no)),
                sentences=sentences,
                head_mentions=_parse_mentions(_require(obj, "head_mentions", line_no), "head", line_no),
                tail_mentions=_parse_mentions(_require(obj, "tail_mentions", line_no), "tail", line_no),
                true_relations=relations,
            )
        except ValueError as exc:
            raise ParseError(str(exc), line_no) from exc
        bags.append(bag)
    return bags


def parse_rc_predictions(stream: Lines, schema: RelationSchema) -> dict[str, RcPrediction]:
    """Parse an RC prediction file into a bag_id -> RcPrediction map.

    Vector length must equal the schema size; scores outside [0, 1] by more
    than SCORE_SLACK are errors, closer ones are snapped to the boundary.
    Duplicate bag ids are errors.
    """
    preds: dict[str, RcPrediction] = {}
    for line_no, text in iter_lines(stream):
        obj = parse_json_line(line_no, text)
        bag_id = str(_require(obj, "bag_id", line_no))
        raw_scores = _require(obj, "scores", line_no)
        if bag_id in preds:
            raise ParseError(f"duplicate bag_id {bag_id!r}", line_no)
        if len(raw_scores) != len(schema):
            raise ParseError(
                f"bag {bag_id!r}: got {len(raw_scores)} scores for a "
                f"{len(schema)}-relation schema",
                line_no,
            )
        scores = []
        for i, s in enumerate(raw_scores):
            s = float(s)
            if s < -SCORE_SLACK or s > 1.0 + SCORE_SLACK:
                raise ParseError(f"bag {bag_id!r}: score[{i}]={s} outside [0, 1]", line_no)
            scores.append(min(1.0, max(0.0, s)))
        preds[bag_id] = RcPrediction(bag_id=bag_id, scores=tuple(scores))
    return preds


def bag_to_obj(bag: Bag, schema: RelationSchema) -> dict:
    return {
        "bag_id": bag.bag_id,
        "head": bag.head,
        "tail": bag.tail,
        "relations": [schema.labels[i] for i in sorted(bag.true_relations)],
        "sentences": [list(s) for s in bag.sentences],
        "head_mentions": [[m.sentence_index, m.token_start, m.token_end] for m in bag.head_mentions],
        "tail_mentions": [[m.sentence_index, m.token_start, m.token_end] for m in bag.tail_mentions],
    }


def dump_line(obj: dict) -> str:
    """Canonical one-line JSON encoding used by every writer (byte stable)."""
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"


def write_bags(bags: Iterable[Bag], schema: RelationSchema, out: IO[str]) -> None:
    for bag in bags:
        out.write(dump_line(bag_to_obj(bag, schema)))


def write_rc_predictions(preds: Iterable[RcPrediction], out: IO[str]) -> None:
    for pred in preds:
        out.write(dump_line({"bag_id": pred.bag_id, "scores": list(pred.scores)}))
