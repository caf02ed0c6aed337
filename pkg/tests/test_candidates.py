import numpy as np
import pytest

from src.config.settings import CandgenSettings
from src.connectors.cooccurrence import CooccurrenceTable
from src.connectors.surface_forms import SurfaceFormStore
from src.core.models import CandidateMatch, Document, Mention, SurfaceFormRecord
from src.processors.candidates import (
    CandidateGenerator,
    build_index,
    expand_document_candidates,
    generation_score,
    get_candidates_for_mention,
    gold_recall,
    mine_cooccurrence,
    recall_table,
)
from tests.test_string_metrics import recursive_levenshtein


def padded_trigrams(text):
    padded = "\x02" + text.lower() + "\x03"
    return {padded[i:i + 3] for i in range(len(padded) - 2)}


def brute_force_candidates(store, query, T, E, W, D):
    query_grams = padded_trigrams(query)
    best = {}
    for surface in store.surfaces():
        if not query_grams or len(query_grams & padded_trigrams(surface)) / len(query_grams) < T - 1e-9:
            continue
        edit = recursive_levenshtein(surface, query)
        missing = len(set(surface.split()) - set(query.split()))
        if not (edit <= E * len(query) or (len(surface.split()) >= W and missing <= D)):
            continue
        for entity_id in store.entities_for(surface):
            if entity_id not in best or (edit, surface) < best[entity_id]:
                best[entity_id] = (edit, surface)
    return {(e, s, d) for e, (d, s) in best.items()}


def random_store(rng, surfaces=1000, entities=300):
    syllables = ["pa", "ri", "lo", "mon", "ta", "ne", "ber", "lin", "ko", "sa"]
    store = SurfaceFormStore()
    seen = set()
    while len(seen) < surfaces:
        words = [
            "".join(rng.choice(syllables, size=int(rng.integers(1, 4)))).capitalize()
            for _ in range(int(rng.integers(1, 4)))
        ]
        surface = " ".join(words)
        if surface in seen:
            continue
        seen.add(surface)
        for _ in range(int(rng.integers(1, 3))):
            store.add(SurfaceFormRecord(f"E{int(rng.integers(entities))}", surface, int(rng.integers(1, 50))))
    return store


def test_stage_one_matches_brute_force_scan():
    rng = np.random.default_rng(3)
    store = random_store(rng)
    index = build_index(store)
    surfaces = store.surfaces()
    for _ in range(200):
        query = surfaces[int(rng.integers(len(surfaces)))]
        if rng.random() < 0.5:
            # perturb one character
            position = int(rng.integers(len(query)))
            query = query[:position] + "x" + query[position + 1:]
        got = {(c.entity_id, c.best_sf, c.edit_distance) for c in get_candidates_for_mention(index, query)}
        assert got == brute_force_candidates(store, query, 0.60, 0.25, 2, 1)


def test_candidates_are_unique_and_sorted(mini_store):
    candidates = get_candidates_for_mention(build_index(mini_store), "Paris")
    ids = [c.entity_id for c in candidates]
    assert ids == sorted(set(ids))
    assert {"Paris", "Paris_Hilton", "Paris_Saint-Germain_F.C."} <= set(ids)


def test_expansion_never_lowers_gold_recall():
    for seed in range(50):
        rng = np.random.default_rng(seed)
        store = random_store(rng, surfaces=60, entities=30)
        surfaces = store.surfaces()
        tokens, mentions, golds = [], [], {}
        for i in range(8):
            surface = surfaces[int(rng.integers(len(surfaces)))]
            words = surface.split(" ")
            mentions.append(Mention(0, len(tokens), len(tokens) + len(words), surface,
                                    store.entities_for(surface)[0]))
            tokens.extend(words + ["and"])
        document = Document(f"doc{seed}", [tokens], mentions)
        cooccurrence = mine_cooccurrence([document])
        index = build_index(store)
        stage1 = [get_candidates_for_mention(index, m.surface, T=0.9) for m in mentions]
        expanded = expand_document_candidates(stage1, mentions, cooccurrence, store, top_r=5)
        for i, m in enumerate(mentions):
            golds[(document.doc_id, i)] = m.gold_entity
            assert {c.entity_id for c in stage1[i]} <= {c.entity_id for c in expanded[i]}
        before = gold_recall({(document.doc_id, i): s for i, s in enumerate(stage1)}, golds)
        after = gold_recall({(document.doc_id, i): s for i, s in enumerate(expanded)}, golds)
        assert after >= before


def test_containment_expansion_adds_longer_mention_candidates(mini_store):
    tokens = "Paris Hilton met Hilton".split()
    mentions = [Mention(0, 0, 2, "Paris Hilton", "Paris_Hilton"), Mention(0, 3, 4, "Hilton", "Paris_Hilton")]
    Document("d", [tokens], mentions).validate()
    index = build_index(mini_store)
    stage1 = [get_candidates_for_mention(index, m.surface, D=0) for m in mentions]
    assert "Paris_Hilton" not in {c.entity_id for c in stage1[1]}
    expanded = expand_document_candidates(stage1, mentions, None, mini_store)
    assert "Paris_Hilton" in {c.entity_id for c in expanded[1]}


def test_cooccurrence_expansion_requires_containing_surface():
    store = SurfaceFormStore([
        SurfaceFormRecord("Lyon", "Lyon", 10),
        SurfaceFormRecord("Olympique_Lyonnais", "Olympique Lyon Football", 5),
        SurfaceFormRecord("Marseille", "Marseille", 8),
    ])
    table = CooccurrenceTable()
    table.add("Marseille", "Olympique_Lyonnais", 4)
    mentions = [Mention(0, 0, 1, "Marseille", "Marseille"), Mention(0, 2, 3, "Lyon", "Olympique_Lyonnais")]
    index = build_index(store)
    stage1 = [get_candidates_for_mention(index, m.surface) for m in mentions]
    expanded = expand_document_candidates(stage1, mentions, table, store, top_r=20)
    assert "Olympique_Lyonnais" in {c.entity_id for c in expanded[1]}
    assert "Olympique_Lyonnais" not in {c.entity_id for c in expanded[0]}


def test_generation_score_weights():
    assert generation_score(50, 2, 0.1) == pytest.approx(50 + 200 - 1000)


def test_generator_cuts_to_top_n_and_reports_recall(mini_store, mini_kb, mini_corpus):
    generator = CandidateGenerator(mini_store, kb=mini_kb, settings=CandgenSettings(top_n=2))
    final, stage1 = generator.generate(mini_corpus)
    assert set(final) == set(stage1)
    assert all(len(c) <= 2 for c in final.values())
    for candidates in final.values():
        scores = [c.gen_score for c in candidates]
        assert scores == sorted(scores, reverse=True)
    golds = {(d.doc_id, i): m.gold_entity for d in mini_corpus for i, m in enumerate(d.mentions)}
    table = recall_table(final, stage1, golds)
    assert set(table) == {"stage1", "stage1_N=20", "stage1_N=30", "stage1_N=100", "N=20", "N=30", "N=100"}
    assert all(0.0 <= v <= 100.0 for v in table.values())
    assert table["stage1_N=20"] <= table["stage1_N=100"] <= table["stage1"]
    for candidates in stage1.values():
        scores = [c.gen_score for c in candidates]
        assert scores == sorted(scores, reverse=True)


def test_stage_one_recall_is_reported_at_every_cut():
    ranked = {
        ("d", 0): [CandidateMatch("A", "a", 0), CandidateMatch("B", "b", 0)],
        ("d", 1): [CandidateMatch("C", "c", 0)],
    }
    final = {("d", 0): [CandidateMatch("B", "b", 0)], ("d", 1): []}
    golds = {("d", 0): "B", ("d", 1): "C", ("d", 2): None}
    table = recall_table(final, ranked, golds, cuts=(1, 2))
    assert table == {"stage1": 100.0, "stage1_N=1": 50.0, "stage1_N=2": 100.0, "N=1": 50.0, "N=2": 50.0}
