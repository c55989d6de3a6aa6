import datetime as dt

import pytest

from casescope.bundle import filter_cases
from casescope.errors import EmptyQuery
from casescope.mentions import TokenizerConfig, build_index, search, top_keywords
from casescope.models import CaseBundle, Demographics, PatientCase


def _case(case_id: str, text: str, admit="2021-06-01") -> PatientCase:
    return PatientCase(
        case_id=case_id,
        specialty="spine",
        admit_date=dt.date.fromisoformat(admit),
        demographics=Demographics(40, 170.0, 70.0),
        chief_complaint="",
        history_entries=(),
        diagnosis_text=text,
        physical_exam=(),
        lab_indicators={},
        disc_signals=(),
        csf_mean=None,
        image_refs=(),
    )


CORPUS = [
    _case("c1", "disc herniation", "2021-03-01"),
    _case("c2", "disc retreat", "2021-05-10"),
    _case("c3", "herniation found", "2021-04-02"),
]


def test_build_index_counts_document_frequency():
    index = build_index(CORPUS)
    assert index.keyword_counts == {"disc": 2, "herniation": 2, "retreat": 1, "found": 1}


def test_empty_corpus_yields_empty_index():
    index = build_index([])
    assert index.keyword_counts == {}
    assert index.postings == {}


def test_stopwords_removed():
    index = build_index(CORPUS, TokenizerConfig(stopwords=frozenset({"found"})))
    assert "found" not in index.keyword_counts
    assert index.keyword_counts["herniation"] == 2


def test_repeated_token_counts_once_per_case():
    index = build_index([_case("c1", "disc disc disc")])
    assert index.keyword_counts == {"disc": 1}


def test_counts_equal_posting_sizes():
    index = build_index(CORPUS)
    for token, count in index.keyword_counts.items():
        assert count == len(index.postings[token])


def test_tokenization_splits_on_non_alphanumeric():
    index = build_index([_case("c1", "C6-C7 narrowing")])
    assert set(index.keyword_counts) == {"c6", "c7", "narrowing"}


def test_top_keywords_tie_order():
    index = build_index(CORPUS)
    assert top_keywords(index, 2) == [("disc", 2), ("herniation", 2)]


def test_top_keywords_limit_beyond_vocabulary():
    index = build_index(CORPUS)
    assert len(top_keywords(index, 100)) == 4


def test_top_keywords_single_token_corpus():
    index = build_index([_case("c1", "herniation")])
    assert top_keywords(index, 1) == [("herniation", 1)]


def test_top_keywords_is_prefix_of_full_ranking():
    index = build_index(CORPUS)
    full = top_keywords(index, len(index.keyword_counts))
    for limit in range(1, len(full) + 1):
        assert top_keywords(index, limit) == full[:limit]


def test_top_keywords_rejects_bad_limit():
    with pytest.raises(ValueError):
        top_keywords(build_index(CORPUS), 0)


def test_search_case_insensitive():
    index = build_index(CORPUS)
    assert search(index, CORPUS, "Retreat") == ["c2"]


def test_search_no_match_empty():
    index = build_index(CORPUS)
    assert search(index, CORPUS, "cardiomyopathy") == []


def test_search_crosses_token_boundary():
    index = build_index(CORPUS)
    # substring-scan oracle over raw texts
    expected = [c.case_id for c in CORPUS if "disc hern" in c.diagnosis_text.lower()]
    assert search(index, CORPUS, "disc hern") == expected == ["c1"]


def test_search_empty_query_rejected():
    with pytest.raises(EmptyQuery):
        search(build_index(CORPUS), CORPUS, "")


def test_search_matches_filter_cases_membership():
    bundle = CaseBundle(
        schema_version=1, cases=tuple(CORPUS), reference_ranges=(), annotations=()
    )
    index = build_index(CORPUS)
    for query in ("disc", "herniation", "a", "zzz"):
        assert search(index, CORPUS, query) == filter_cases(bundle, text_query=query)
