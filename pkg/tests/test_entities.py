import random

import pytest

from datagen import random_mention_corpus
from oracles import brute_force_df

from entityqa.corpus import Document, DocumentSet, segment_sentences
from entityqa.entities import (
    ONTONOTES_TAGS,
    AnnotationFileExtractor,
    CandidatePool,
    EntityMention,
    GazetteerExtractor,
    build_pool,
    filter_by_type,
    write_annotations,
)
from entityqa.errors import IngestionError


def _docset(texts, qid="q1"):
    docs = tuple(
        segment_sentences(Document(question_id=qid, original_rank=i + 1,
                                   text=t))
        for i, t in enumerate(texts)
    )
    return DocumentSet(question_id=qid, documents=docs)


# ---------------------------------------------------------------------------
# mention and tag basics
# ---------------------------------------------------------------------------

def test_ontonotes_tag_set():
    assert len(ONTONOTES_TAGS) == 18
    assert {"PERSON", "GPE", "ORG", "DATE", "MONEY", "WORK_OF_ART",
            "CARDINAL"} <= ONTONOTES_TAGS


def test_mention_rejects_unknown_tag():
    with pytest.raises(ValueError):
        EntityMention(surface="x", tag="NOT_A_TAG", doc_id="q1#1",
                      sentence_index=0, start=0, end=1)


def test_filter_by_type():
    mk = lambda tag: EntityMention(surface="x", tag=tag, doc_id="q1#1",
                                   sentence_index=0, start=0, end=1)
    mentions = [mk("PERSON"), mk("DATE"), mk("GPE")]
    kept = filter_by_type(mentions, frozenset({"PERSON", "GPE"}))
    assert [m.tag for m in kept] == ["PERSON", "GPE"]


# ---------------------------------------------------------------------------
# gazetteer extraction
# ---------------------------------------------------------------------------

def test_gazetteer_extracts_and_canonicalizes():
    ext = GazetteerExtractor({"Webb Simpson": "PERSON",
                              "Burkina Faso": "GPE"})
    docset = _docset(["Webb Simpson visited Burkina Faso. Nothing else."])
    mentions = ext.extract(docset)
    assert {(m.surface, m.tag) for m in mentions} == {
        ("Webb Simpson", "PERSON"), ("Burkina Faso", "GPE")}
    assert all(m.doc_id == "q1#1" for m in mentions)


def test_gazetteer_longest_match_wins():
    ext = GazetteerExtractor({"New York": "GPE", "New York Times": "ORG"})
    docset = _docset(["The New York Times reported it."])
    mentions = ext.extract(docset)
    assert [(m.surface, m.tag) for m in mentions] == [
        ("New York Times", "ORG")]


def test_gazetteer_non_overlapping_left_to_right():
    ext = GazetteerExtractor({"alpha beta": "ORG", "beta gamma": "ORG"})
    docset = _docset(["alpha beta gamma."])
    mentions = ext.extract(docset)
    assert [m.surface for m in mentions] == ["alpha beta"]


def test_gazetteer_matches_ignore_case_and_accents():
    ext = GazetteerExtractor({"Beyoncé Knowles": "PERSON"})
    docset = _docset(["Fans cheered beyonce knowles loudly."])
    mentions = ext.extract(docset)
    assert len(mentions) == 1


def test_gazetteer_from_file(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text("# comment line\nWebb Simpson\tPERSON\nParis\tGPE\n")
    ext = GazetteerExtractor.from_file(path)
    docset = _docset(["Webb Simpson went to Paris."])
    assert len(ext.extract(docset)) == 2


def test_gazetteer_sentence_indices():
    ext = GazetteerExtractor({"Paris": "GPE"})
    docset = _docset(["Nothing here. Paris is nice."])
    mentions = ext.extract(docset)
    assert [m.sentence_index for m in mentions] == [1]


# ---------------------------------------------------------------------------
# annotation-file extraction
# ---------------------------------------------------------------------------

def test_annotation_file_roundtrip(tmp_path):
    docset = _docset(["Webb Simpson won. He was happy."])
    mentions = [EntityMention(surface="Webb Simpson", tag="PERSON",
                              doc_id="q1#1", sentence_index=0, start=0,
                              end=12)]
    path = tmp_path / "ann.jsonl"
    write_annotations(path, docset, mentions)
    ext = AnnotationFileExtractor(path)
    again = ext.extract(docset)
    assert [(m.surface, m.tag, m.sentence_index) for m in again] == [
        ("Webb Simpson", "PERSON", 0)]


def test_annotation_file_bad_sentence_index(tmp_path):
    docset = _docset(["Only one sentence."])
    path = tmp_path / "ann.jsonl"
    path.write_text('{"question_id": "q1", "doc_rank": 1, "entities": '
                    '[{"surface": "x", "tag": "PERSON", "sent_idx": 9, '
                    '"start": 0, "end": 1}]}\n')
    with pytest.raises(IngestionError):
        AnnotationFileExtractor(path).extract(docset)


def test_annotation_file_unknown_doc_ok_when_unused(tmp_path):
    # annotations for other questions are simply not consulted
    docset = _docset(["Webb Simpson won."])
    path = tmp_path / "ann.jsonl"
    path.write_text('{"question_id": "zz", "doc_rank": 1, "entities": []}\n')
    assert AnnotationFileExtractor(path).extract(docset) == []


# ---------------------------------------------------------------------------
# candidate pools and document frequency
# ---------------------------------------------------------------------------

def test_build_pool_groups_surface_variants():
    docset = _docset(["Webb Simpson won.", "WEBB SIMPSON lost."])
    ext = GazetteerExtractor({"Webb Simpson": "PERSON"})
    pool = build_pool(ext.extract(docset), docset)
    assert len(pool.candidates) == 1
    cand = pool.candidates[0]
    assert cand.canonical_surface == "webb simpson"
    assert cand.df == 2
    assert len(cand.mentions) == 2


def test_build_pool_df_counts_documents_not_mentions():
    docset = _docset(["Paris and Paris again. Paris!", "No city here."])
    ext = GazetteerExtractor({"Paris": "GPE"})
    pool = build_pool(ext.extract(docset), docset)
    assert pool.candidates[0].df == 1
    assert len(pool.candidates[0].mentions) == 3


def test_build_pool_orders_by_df_then_surface():
    docset = _docset(["Alpha Corp and Beta Corp.", "Beta Corp alone."])
    ext = GazetteerExtractor({"Alpha Corp": "ORG", "Beta Corp": "ORG"})
    pool = build_pool(ext.extract(docset), docset)
    assert [c.canonical_surface for c in pool.candidates] == [
        "beta corp", "alpha corp"]


def test_build_pool_cap_keeps_df_descending_prefix():
    texts = []
    # entity i appears in i+1 documents
    for d in range(6):
        parts = [f"Ent{i}ax here" for i in range(d, 6)]
        texts.append(". ".join(parts) + ".")
    lexicon = {f"Ent{i}ax": "PERSON" for i in range(6)}
    docset = _docset(texts)
    ext = GazetteerExtractor(lexicon)
    full = build_pool(ext.extract(docset), docset)
    capped = build_pool(ext.extract(docset), docset, cap=3)
    assert capped.capped and not full.capped
    assert [c.canonical_surface for c in capped.candidates] == \
        [c.canonical_surface for c in full.candidates][:3]
    dfs = [c.df for c in full.candidates]
    assert dfs == sorted(dfs, reverse=True)


def test_build_pool_df_any_tag_counts_all_tagged_docs():
    # same surface tagged PERSON everywhere; accepted tags keep PERSON
    docset = _docset(["Ent0ax spoke.", "Ent0ax sang.", "Nothing."])
    ext = GazetteerExtractor({"Ent0ax": "PERSON"})
    mentions = ext.extract(docset)
    kept = filter_by_type(mentions, frozenset({"PERSON"}))
    pool = build_pool(kept, docset, all_mentions=mentions, df_any_tag=True)
    assert pool.candidates[0].df == 2


def test_pool_tags_counted():
    docset = _docset(["Ent0ax spoke. Ent0ax sang."])
    ext = GazetteerExtractor({"Ent0ax": "PERSON"})
    pool = build_pool(ext.extract(docset), docset)
    assert pool.candidates[0].tags[0] == ("PERSON", 2)


def test_df_matches_brute_force_on_random_corpora():
    # The synthetic surfaces are plain alnum words, so lowercasing is a
    # full canonicalization for them; the oracle stays independent.
    rng = random.Random(17)
    for _ in range(50):
        texts, lexicon, truth = random_mention_corpus(rng)
        docset = _docset(texts)
        ext = GazetteerExtractor(lexicon)
        mentions = ext.extract(docset)
        pool = build_pool(mentions, docset, cap=1000)
        got = {c.canonical_surface: c.df for c in pool.candidates}
        assert got == brute_force_df(truth, str.lower)
