"""Text-derived signals: binary subjectivity and gazetteer entity extraction.

The subjectivity classifier is a two-class multinomial naive Bayes over
lowercased word unigrams with add-k smoothing. Tokenization is fixed so
results are bit-stable: split on non-alphanumeric characters, lowercase,
drop empty tokens.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable

from .errors import DataError

SUBJECTIVE = "subjective"
OBJECTIVE = "objective"
LABELS = (SUBJECTIVE, OBJECTIVE)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens, in order."""
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class LabeledDoc:
    text: str
    label: str

    def __post_init__(self):
        if not self.text:
            raise DataError("labeled doc has empty text")
        if self.label not in LABELS:
            raise DataError(f"unknown label {self.label!r}")


def load_labeled_docs(path) -> list[LabeledDoc]:
    docs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            docs.append(LabeledDoc(rec["text"], rec["label"]))
    return docs


@dataclass
class SubjectivityModel:
    vocabulary: dict[str, tuple[int, int]]  # token -> (subjective_count, objective_count)
    class_priors: tuple[float, float]  # (P(subjective), P(objective))
    smoothing: float
    trained_on: str
    token_totals: tuple[int, int] = (0, 0)

    def to_record(self) -> dict:
        return {
            "vocabulary": {t: list(c) for t, c in sorted(self.vocabulary.items())},
            "class_priors": list(self.class_priors),
            "smoothing": self.smoothing,
            "trained_on": self.trained_on,
            "token_totals": list(self.token_totals),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SubjectivityModel":
        return cls(
            vocabulary={t: (c[0], c[1]) for t, c in rec["vocabulary"].items()},
            class_priors=(rec["class_priors"][0], rec["class_priors"][1]),
            smoothing=rec["smoothing"],
            trained_on=rec["trained_on"],
            token_totals=(rec["token_totals"][0], rec["token_totals"][1]),
        )


def corpus_fingerprint(docs: Iterable[LabeledDoc]) -> str:
    h = hashlib.sha256()
    for doc in docs:
        h.update(doc.label.encode())
        h.update(b"\x00")
        h.update(doc.text.encode())
        h.update(b"\x01")
    return h.hexdigest()[:16]


def train_subjectivity(docs: list[LabeledDoc], smoothing: float = 1.0) -> SubjectivityModel:
    """Fit the naive Bayes subjectivity model. Deterministic."""
    if smoothing <= 0:
        raise DataError(f"smoothing must be positive, got {smoothing}")
    labels_present = {doc.label for doc in docs}
    if len(labels_present) < 2:
        raise DataError("degenerate training set: both labels must be present")

    vocabulary: dict[str, list[int]] = {}
    doc_counts = [0, 0]
    token_totals = [0, 0]
    for doc in docs:
        cls = 0 if doc.label == SUBJECTIVE else 1
        doc_counts[cls] += 1
        for tok in tokenize(doc.text):
            counts = vocabulary.setdefault(tok, [0, 0])
            counts[cls] += 1
            token_totals[cls] += 1

    n = len(docs)
    return SubjectivityModel(
        vocabulary={t: (c[0], c[1]) for t, c in vocabulary.items()},
        class_priors=(doc_counts[0] / n, doc_counts[1] / n),
        smoothing=smoothing,
        trained_on=corpus_fingerprint(docs),
        token_totals=(token_totals[0], token_totals[1]),
    )


def _log_posteriors(model: SubjectivityModel, text: str) -> tuple[float, float]:
    k = model.smoothing
    vsize = len(model.vocabulary)
    scores = [math.log(p) if p > 0 else -math.inf for p in model.class_priors]
    if vsize == 0:
        return scores[0], scores[1]
    denom = [model.token_totals[c] + k * vsize for c in (0, 1)]
    for tok in tokenize(text):
        counts = model.vocabulary.get(tok, (0, 0))
        for c in (0, 1):
            scores[c] += math.log((counts[c] + k) / denom[c])
    return scores[0], scores[1]


def classify_subjectivity(model: SubjectivityModel, text: str) -> int:
    """1 = subjective, 0 = objective; ties go to objective."""
    subj, obj = _log_posteriors(model, text)
    return 1 if subj > obj else 0


def training_accuracy(model: SubjectivityModel, docs: list[LabeledDoc]) -> float:
    hits = sum(
        1
        for doc in docs
        if classify_subjectivity(model, doc.text) == (1 if doc.label == SUBJECTIVE else 0)
    )
    return hits / len(docs)


ENTITY_KINDS = ("person", "place", "organization")


@dataclass
class Gazetteer:
    """Known entities, keyed by normalized name."""

    entries: dict[str, str] = field(default_factory=dict)  # normalized name -> entity id
    kinds: dict[str, str] = field(default_factory=dict)  # entity id -> kind
    _by_tokens: dict[tuple[str, ...], str] = field(default_factory=dict, repr=False)
    _max_len: int = 0

    def add(self, name: str, kind: str) -> None:
        norm = " ".join(tokenize(name))
        if not norm:
            raise DataError(f"gazetteer name {name!r} normalizes to empty")
        if kind not in ENTITY_KINDS:
            raise DataError(f"unknown entity kind {kind!r}")
        self.entries[norm] = norm
        self.kinds[norm] = kind
        toks = tuple(norm.split(" "))
        self._by_tokens[toks] = norm
        self._max_len = max(self._max_len, len(toks))

    def __len__(self) -> int:
        return len(self.entries)


def load_gazetteer(path) -> Gazetteer:
    """Read a gazetteer TSV: name<TAB>kind per line."""
    gaz = Gazetteer()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"bad gazetteer line {lineno}: expected name<TAB>kind")
            gaz.add(parts[0], parts[1])
    return gaz


def write_gazetteer(gaz: Gazetteer, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for name in sorted(gaz.entries):
            fh.write(f"{name}\t{gaz.kinds[name]}\n")


def extract_entities(
    text: str, gazetteer: Gazetteer, capitalized_heuristic: bool = False
) -> list[str]:
    """Longest-match scan over the token sequence; each entity once, by first occurrence.

    With capitalized_heuristic on, maximal runs of capitalized tokens that
    miss the gazetteer are also reported (id = their normalized form).
    Off by default: reproducibility over recall.
    """
    raw_tokens = _TOKEN_RE.findall(text)
    tokens = [t.casefold() for t in raw_tokens]
    found: list[str] = []
    seen: set[str] = set()
    i = 0
    while i < len(tokens):
        matched = 0
        for length in range(min(gazetteer._max_len, len(tokens) - i), 0, -1):
            ent = gazetteer._by_tokens.get(tuple(tokens[i : i + length]))
            if ent is not None:
                if ent not in seen:
                    seen.add(ent)
                    found.append(ent)
                matched = length
                break
        if matched:
            i += matched
            continue
        if capitalized_heuristic and raw_tokens[i][:1].isupper():
            j = i + 1
            # stop the run where a known entity starts
            while (
                j < len(tokens)
                and raw_tokens[j][:1].isupper()
                and not any(
                    tuple(tokens[j : j + n]) in gazetteer._by_tokens
                    for n in range(1, gazetteer._max_len + 1)
                )
            ):
                j += 1
            ent = " ".join(tokens[i:j])
            if ent not in seen:
                seen.add(ent)
                found.append(ent)
            i = j
            continue
        i += 1
    return found
