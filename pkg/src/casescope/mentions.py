"""Keyword-frequency index and text search over diagnosis texts.

Frequency is document frequency: a token counts once per case no matter
how often it repeats inside one text, because the ranked list answers
"how many cases mention X".
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from casescope.errors import EmptyQuery
from casescope.models import PatientCase

# tokens are maximal alphanumeric runs: any non-alphanumeric character splits,
# so "C6-C7" yields "c6" and "c7"
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    stopwords: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MentionIndex:
    keyword_counts: dict[str, int]
    postings: dict[str, frozenset[str]]
    tokenizer: TokenizerConfig = field(default_factory=TokenizerConfig)


def tokenize(text: str, config: TokenizerConfig) -> list[str]:
    tokens = _TOKEN_RE.findall(text)
    if config.lowercase:
        tokens = [t.lower() for t in tokens]
    if config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    return tokens


def build_index(cases: Iterable[PatientCase], config: TokenizerConfig | None = None) -> MentionIndex:
    """Document-frequency index over the diagnosis texts of the given cases."""
    config = config or TokenizerConfig()
    postings: dict[str, set[str]] = {}
    for case in cases:
        for token in set(tokenize(case.diagnosis_text, config)):
            postings.setdefault(token, set()).add(case.case_id)
    frozen = {t: frozenset(ids) for t, ids in postings.items()}
    counts = {t: len(ids) for t, ids in frozen.items()}
    return MentionIndex(keyword_counts=counts, postings=frozen, tokenizer=config)


def top_keywords(index: MentionIndex, limit: int) -> list[tuple[str, int]]:
    """Keywords by descending count, ties by ascending token, at most ``limit``."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    ranked = sorted(index.keyword_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:limit]


def search(index: MentionIndex, cases: Sequence[PatientCase], query: str) -> list[str]:
    """Ids of cases whose diagnosis text contains the query, case-insensitively.

    This is a substring match (crossing token boundaries), not a token
    lookup; ordering matches filter_cases: admit date descending, id ascending.
    """
    if not query:
        raise EmptyQuery("search query must be nonempty")
    needle = query.lower()
    hits = [c for c in cases if needle in c.diagnosis_text.lower()]
    hits.sort(key=lambda c: (-(c.admit_date.toordinal()), c.case_id))
    return [c.case_id for c in hits]
