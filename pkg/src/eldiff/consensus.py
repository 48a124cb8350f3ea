"""Difficulty labels from the agreement pattern of multiple entity linkers.

Mentions recognised by every system are aligned into tuples carrying one
entity per system; the size of the largest agreement group then decides the
label: all systems disagree -> HARD, all agree -> EASY, anything in
between -> MEDIUM. For three systems this is exactly the
all-distinct / all-equal / two-of-three split.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus
from .errors import MalformedRecordError


class Label(Enum):
    """Difficulty class. Tie-breaking everywhere uses HARD < MEDIUM < EASY."""

    HARD = "HARD"
    MEDIUM = "MEDIUM"
    EASY = "EASY"

    def __str__(self) -> str:
        return self.value


#: Canonical class order used for probability vectors, confusion matrices
#: and argmax tie-breaking.
CLASS_ORDER: tuple[Label, Label, Label] = (Label.HARD, Label.MEDIUM, Label.EASY)
CLASS_INDEX: Mapping[Label, int] = {label: i for i, label in enumerate(CLASS_ORDER)}


class AlignPolicy(Enum):
    """How mention spans are matched across systems."""

    EXACT = "exact"
    OVERLAP = "overlap"


@dataclass(frozen=True)
class SystemAnnotation:
    """One entity link emitted by one system: (document, surface, position, entity)."""

    system_id: str
    doc_id: str
    surface: str
    offset: int
    entity_id: str

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError(f"negative offset {self.offset} in {self.doc_id!r}")
        if not self.entity_id:
            raise ValueError(f"empty entity id at {self.doc_id!r}:{self.offset}")

    @property
    def span(self) -> tuple[int, int]:
        return self.offset, self.offset + len(self.surface)


@dataclass(frozen=True)
class AlignedMention:
    """A mention recognised by all systems, with one entity per system."""

    doc_id: str
    surface: str
    offset: int
    entities: tuple[str, ...]

    def __post_init__(self):
        if len(self.entities) < 2:
            raise ValueError("an aligned mention needs entities from at least 2 systems")

    @property
    def key(self) -> tuple[str, int, str]:
        return self.doc_id, self.offset, self.surface


@dataclass(frozen=True)
class LabelledMention:
    """An aligned mention together with its difficulty label."""

    mention: AlignedMention
    label: Label

    @property
    def key(self) -> tuple[str, int, str]:
        return self.mention.key


def normalize_entity(raw: str, redirect_map: Mapping[str, str] | None = None) -> str:
    """Canonical entity id: trimmed, spaces to underscores, first character
    uppercased, then one redirect hop if a map is given."""
    trimmed = raw.strip()
    if not trimmed:
        raise ValueError("entity id must be non-empty")
    canonical = trimmed.replace(" ", "_")
    canonical = canonical[0].upper() + canonical[1:]
    if redirect_map:
        canonical = redirect_map.get(canonical, canonical)
    return canonical


def read_annotations(
    path: str | Path,
    system_id: str | None = None,
    redirect_map: Mapping[str, str] | None = None,
    normalize: bool = True,
) -> list[SystemAnnotation]:
    """Read one system's annotation dump.

    Format: tab-separated ``doc_id  offset  surface  entity_id``, one
    annotation per line. Entity ids are normalized unless disabled.
    """
    if system_id is None:
        system_id = Path(path).stem
    annotations = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MalformedRecordError(lineno, f"expected 4 tab-separated fields, got {len(fields)}")
            doc_id, offset_str, surface, entity = fields
            try:
                offset = int(offset_str)
            except ValueError:
                raise MalformedRecordError(lineno, f"bad offset {offset_str!r}") from None
            if normalize:
                try:
                    entity = normalize_entity(entity, redirect_map)
                except ValueError:
                    raise MalformedRecordError(lineno, "empty entity id") from None
            try:
                annotations.append(SystemAnnotation(system_id, doc_id, surface, offset, entity))
            except ValueError as exc:
                raise MalformedRecordError(lineno, str(exc)) from None
    return annotations


def write_annotations(annotations: Iterable[SystemAnnotation], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in annotations:
            fh.write(f"{a.doc_id}\t{a.offset}\t{a.surface}\t{a.entity_id}\n")


def validate_annotations(annotations: Iterable[SystemAnnotation], corpus: Corpus) -> None:
    """Check that every annotation fits inside its document."""
    for a in annotations:
        doc = corpus.get(a.doc_id)
        if a.offset + len(a.surface) > len(doc.text):
            raise ValueError(
                f"annotation {a.surface!r} at {a.doc_id}:{a.offset} extends past document end"
            )


def _spans_overlap(a: tuple[int, int], b: tuple[int, int]) -> bool:
    return a[0] < b[1] and b[0] < a[1]


def _align_exact(annotation_sets: Sequence[Sequence[SystemAnnotation]]) -> list[AlignedMention]:
    n = len(annotation_sets)
    slots: dict[tuple[str, int, str], list[str | None]] = {}
    for sys_idx, annotations in enumerate(annotation_sets):
        for a in annotations:
            entry = slots.setdefault((a.doc_id, a.offset, a.surface), [None] * n)
            if entry[sys_idx] is None:
                entry[sys_idx] = a.entity_id
    aligned = []
    for (doc_id, offset, surface), entry in slots.items():
        if all(e is not None for e in entry):
            aligned.append(AlignedMention(doc_id, surface, offset, tuple(entry)))
    aligned.sort(key=lambda m: (m.doc_id, m.offset, m.surface))
    return aligned


def _align_overlap(annotation_sets: Sequence[Sequence[SystemAnnotation]]) -> list[AlignedMention]:
    # Greedy left-to-right in the first system's order; each annotation joins
    # at most one group. An exact (offset, surface) twin is preferred over the
    # first merely-overlapping candidate so that every EXACT group survives
    # under the OVERLAP policy.
    by_doc: dict[str, list[list[SystemAnnotation]]] = {}
    n = len(annotation_sets)
    for sys_idx, annotations in enumerate(annotation_sets):
        for a in annotations:
            by_doc.setdefault(a.doc_id, [[] for _ in range(n)])[sys_idx].append(a)
    aligned = []
    for doc_id in sorted(by_doc):
        per_system = [sorted(annos, key=lambda a: (a.offset, len(a.surface), a.surface))
                      for annos in by_doc[doc_id]]
        used: list[set[int]] = [set() for _ in range(n)]
        for anchor in per_system[0]:
            chosen = [anchor]
            for sys_idx in range(1, n):
                candidate = None
                for pos, a in enumerate(per_system[sys_idx]):
                    if pos in used[sys_idx]:
                        continue
                    if a.offset == anchor.offset and a.surface == anchor.surface:
                        candidate = pos
                        break
                if candidate is None:
                    for pos, a in enumerate(per_system[sys_idx]):
                        if pos in used[sys_idx]:
                            continue
                        if all(_spans_overlap(a.span, c.span) for c in chosen):
                            candidate = pos
                            break
                if candidate is None:
                    chosen = None
                    break
                chosen.append(per_system[sys_idx][candidate])
                used[sys_idx].add(candidate)
            if chosen is None:
                continue
            aligned.append(
                AlignedMention(doc_id, anchor.surface, anchor.offset,
                               tuple(a.entity_id for a in chosen))
            )
    aligned.sort(key=lambda m: (m.doc_id, m.offset, m.surface))
    return aligned


def align(
    annotation_sets: Sequence[Sequence[SystemAnnotation]],
    policy: AlignPolicy = AlignPolicy.EXACT,
) -> list[AlignedMention]:
    """Group the mentions recognised by all systems into AlignedMentions.

    EXACT groups annotations whose (doc, offset, surface) coincide across
    every system. OVERLAP groups annotations whose spans pairwise overlap in
    the same document, greedily left to right, taking surface and offset
    from the first system. Mentions missed by any system are dropped.
    """
    if len(annotation_sets) < 2:
        raise ValueError("alignment needs annotation sets from at least 2 systems")
    if policy is AlignPolicy.EXACT:
        return _align_exact(annotation_sets)
    if policy is AlignPolicy.OVERLAP:
        return _align_overlap(annotation_sets)
    raise ValueError(f"unknown alignment policy {policy!r}")


def label(mention: AlignedMention) -> Label:
    """Difficulty from the largest agreement group among the systems' entities:
    size 1 -> HARD, size n -> EASY, otherwise MEDIUM."""
    top = max(Counter(mention.entities).values())
    if top == len(mention.entities):
        return Label.EASY
    if top == 1:
        return Label.HARD
    return Label.MEDIUM


def label_all(mentions: Iterable[AlignedMention]) -> list[LabelledMention]:
    return [LabelledMention(m, label(m)) for m in mentions]


@dataclass(frozen=True)
class ClassDistribution:
    """Per-class counts and fractions. ``fractions`` is None for empty input."""

    counts: Mapping[Label, int]
    fractions: Mapping[Label, float] | None
    total: int


def class_distribution(labelled: Sequence[LabelledMention]) -> ClassDistribution:
    counts = {lbl: 0 for lbl in CLASS_ORDER}
    for lm in labelled:
        counts[lm.label] += 1
    total = len(labelled)
    fractions = {lbl: counts[lbl] / total for lbl in CLASS_ORDER} if total else None
    return ClassDistribution(counts=counts, fractions=fractions, total=total)


def write_labels(labelled: Iterable[LabelledMention], path: str | Path) -> None:
    """Write the label file: ``doc_id offset surface label e1,...,en`` (tabs)."""
    with open(path, "w", encoding="utf-8") as fh:
        for lm in labelled:
            m = lm.mention
            fh.write(f"{m.doc_id}\t{m.offset}\t{m.surface}\t{lm.label}\t{','.join(m.entities)}\n")


def read_labels(path: str | Path) -> list[LabelledMention]:
    labelled = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 5:
                raise MalformedRecordError(lineno, f"expected 5 tab-separated fields, got {len(fields)}")
            doc_id, offset_str, surface, label_str, entities_str = fields
            try:
                offset = int(offset_str)
            except ValueError:
                raise MalformedRecordError(lineno, f"bad offset {offset_str!r}") from None
            try:
                lbl = Label(label_str)
            except ValueError:
                raise MalformedRecordError(lineno, f"bad label {label_str!r}") from None
            entities = tuple(entities_str.split(","))
            try:
                mention = AlignedMention(doc_id, surface, offset, entities)
            except ValueError as exc:
                raise MalformedRecordError(lineno, str(exc)) from None
            labelled.append(LabelledMention(mention, lbl))
    return labelled
