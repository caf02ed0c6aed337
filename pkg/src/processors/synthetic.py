"""Deterministic synthetic knowledge base and corpus.

Five topics each own a vocabulary. Ten ambiguous names map to three
entities in three different topics, so only the surrounding words tell the
homonyms apart; twenty unambiguous entities (four per topic) provide entity
context. Documents are written in one topic and mention only that topic's
entities. Training documents repeat some names without markup so
auto-annotation has work to do.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from ..config.constants import DOC_HEADER_PREFIX
from ..core.models import Document, Mention
from ..connectors.corpus import render_sentence

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

TOPICS: Dict[str, List[str]] = {
    "music": ["guitar", "album", "concert", "melody", "band", "chorus", "tour", "stage", "drummer", "lyrics",
              "studio", "rhythm", "ballad", "orchestra", "vinyl", "singer", "tempo", "encore", "festival", "record"],
    "sport": ["match", "goal", "league", "coach", "stadium", "season", "striker", "referee", "trophy", "defender",
              "penalty", "fans", "score", "tournament", "keeper", "victory", "draw", "transfer", "pitch", "champion"],
    "politics": ["election", "senate", "minister", "vote", "policy", "campaign", "parliament", "reform", "debate",
                 "governor", "ballot", "coalition", "treaty", "cabinet", "law", "party", "mayor", "council",
                 "diplomat", "budget"],
    "science": ["experiment", "laboratory", "theory", "molecule", "research", "physics", "genome", "telescope",
                "hypothesis", "protein", "data", "quantum", "cell", "orbit", "study", "scientist", "particle",
                "enzyme", "climate", "fossil"],
    "finance": ["market", "stock", "bank", "investor", "shares", "profit", "dividend", "bond", "trading", "capital",
                "merger", "revenue", "inflation", "fund", "equity", "loan", "portfolio", "earnings", "currency",
                "asset"],
}
FILLER = ["the", "a", "of", "and", "in", "on", "with", "after", "during", "for", "new", "its", "this", "said"]

TOPIC_SYNSETS: Dict[str, Tuple[str, str]] = {
    "music": ("wordnet_musician_110340312", "Person"),
    "sport": ("wordnet_team_108208560", "SportsTeam"),
    "politics": ("wordnet_politician_110450303", "Person"),
    "science": ("wordnet_facility_103315023", "Location"),
    "finance": ("wordnet_company_108058098", "Organization"),
}
TOPIC_SUFFIX = {"music": "Band", "sport": "FC", "politics": "Party", "science": "Institute", "finance": "Capital"}

AMBIGUOUS_NAMES = ["Alder", "Birch", "Cedar", "Dorian", "Ember", "Falcon", "Garnet", "Harbor", "Iris", "Juniper"]

CONTEXT_ENTITIES: Dict[str, List[str]] = {
    "music": ["Velvet_Orchestra", "Lumen_Records", "Nova_Quartet", "Echo_Arena"],
    "sport": ["Northside_United", "Riverton_Rovers", "Summit_Stadium", "Crestwood_Athletic"],
    "politics": ["Unity_Alliance", "Civic_Forum", "Maria_Lindqvist", "Meridian_Council"],
    "science": ["Quasar_Observatory", "Helix_Institute", "Photon_Laboratory", "Tesla_Academy"],
    "finance": ["Granite_Bank", "Apex_Holdings", "Sterling_Exchange", "Beacon_Trust"],
}
FIRST_NAMES = ["Maria"]
SURNAMES = ["Lindqvist"]
NIL_SURFACES = ["Zephyrine", "Quillon", "Marrowby"]

FIXTURE_CONFIG = """\
[runtime]
seed = {seed}
deterministic = true

[corpus]
context_mentions = 10
min_sentence_words = 10
max_sentence_words = 50

[embeddings]
dim = 24
window = 2
negatives = 5
epochs = 5
synset_epochs = 20
cooccurrence_epochs = 20
learning_rate = 0.025

[clustering]
k = 5
max_iterations = 50
change_tolerance = 0.01
top_combinations = 10

[typing]
encoder = mean
hidden = 32
dropout = 0.1
learning_rate = 0.1
batch_size = 32
epochs = 20
patience = 5
dev_fraction = 0.1

[candgen]
T = 0.60
E = 0.25
W = 2
D = 1
N = 100
coocc_top_r = 20

[features]
top_n = 3
window_m = 5

[ranker]
hidden = 64,32
dropout = 0.1,0.2
learning_rate = 0.05
batch_size = 64
epochs = 40
patience = 8
dev_fraction = 0.1
threshold = 0.03

[evaluation]
rounds = 1000
"""


@dataclass
class SyntheticEntity:
    id: str
    topic: str
    surfaces: List[Tuple[str, int, str]] = field(default_factory=list)

    @property
    def frequency(self) -> int:
        return sum(freq for _, freq, _ in self.surfaces)


def build_entities(rng: np.random.Generator) -> List[SyntheticEntity]:
    """Thirty homonym entities followed by twenty context entities."""
    topics = list(TOPICS)
    entities: List[SyntheticEntity] = []
    for i, name in enumerate(AMBIGUOUS_NAMES):
        for j in range(3):
            topic = topics[(i + j) % len(topics)]
            entity = SyntheticEntity(f"{name}_({topic})", topic)
            entity.surfaces.append((name, int(rng.integers(20, 200)), ""))
            entity.surfaces.append((f"{name} {TOPIC_SUFFIX[topic]}", int(rng.integers(5, 30)), "R"))
            entities.append(entity)
    for topic, ids in CONTEXT_ENTITIES.items():
        for entity_id in ids:
            entity = SyntheticEntity(entity_id, topic)
            title = entity_id.replace("_", " ")
            entity.surfaces.append((title, int(rng.integers(10, 100)), ""))
            words = title.split()
            if words[0] in FIRST_NAMES:
                entity.surfaces.append((words[-1], int(rng.integers(5, 20)), ""))
            entities.append(entity)
    return entities


def _topic_mentions(entities: Sequence[SyntheticEntity], topic: str) -> Tuple[List[SyntheticEntity], List[SyntheticEntity]]:
    homonyms = [e for e in entities if e.topic == topic and e.id.endswith(f"_({topic})")]
    context = [e for e in entities if e.topic == topic and e not in homonyms]
    return homonyms, context


def _sentence(
    rng: np.random.Generator,
    topic: str,
    mentions: Sequence[Tuple[Optional[str], str, bool]],
    sentence_index: int,
) -> Tuple[List[str], List[Mention]]:
    """Topic words around the given (entity, surface, annotated) spans."""
    words = TOPICS[topic]
    mention_tokens = sum(len(surface.split()) for _, surface, _ in mentions)
    size = max(int(rng.integers(10, 21)) - mention_tokens, 3)
    plain = [
        FILLER[int(rng.integers(len(FILLER)))] if rng.random() < 0.3 else words[int(rng.integers(len(words)))]
        for _ in range(size)
    ]
    slots = sorted(rng.choice(size + 1, size=len(mentions), replace=True).tolist())
    tokens: List[str] = []
    spans: List[Mention] = []
    cursor = 0
    last_end = -1
    for slot, (entity_id, surface, annotated) in zip(slots, mentions):
        tokens.extend(plain[cursor:slot])
        cursor = slot
        # keep spans apart so neighbouring surfaces never merge
        if last_end == len(tokens):
            tokens.append(FILLER[int(rng.integers(len(FILLER)))])
        start = len(tokens)
        tokens.extend(surface.split())
        last_end = len(tokens)
        if annotated:
            spans.append(Mention(sentence_index, start, len(tokens), surface, entity_id))
    tokens.extend(plain[cursor:])
    tokens.append(".")
    return tokens, spans


def build_document(
    doc_id: str,
    topic: str,
    entities: Sequence[SyntheticEntity],
    rng: np.random.Generator,
    training: bool,
) -> Document:
    """One topical document; training documents leave repeats unannotated."""
    homonyms, context = _topic_mentions(entities, topic)
    chosen = [homonyms[i] for i in rng.choice(len(homonyms), size=int(rng.integers(2, 4)), replace=False)]
    chosen += [context[i] for i in rng.choice(len(context), size=int(rng.integers(1, 3)), replace=False)]
    order = rng.permutation(len(chosen)).tolist()

    plan: List[Tuple[Optional[str], str, bool]] = []
    for i in order:
        entity = chosen[i]
        use_long = entity in homonyms and rng.random() < 0.15
        plan.append((entity.id, entity.surfaces[1 if use_long else 0][0], True))
    if rng.random() < 0.2:
        plan.insert(int(rng.integers(len(plan) + 1)), (None, NIL_SURFACES[int(rng.integers(len(NIL_SURFACES)))], True))
    repeats = [(e.id, e.surfaces[0][0], not training) for e in chosen if e in homonyms and rng.random() < 0.5]

    sentences: List[List[str]] = []
    mentions: List[Mention] = []
    groups = [plan[i:i + 2] for i in range(0, len(plan), 2)] + [[r] for r in repeats]
    groups.append([])
    for index, group in enumerate(groups):
        tokens, spans = _sentence(rng, topic, group, index)
        sentences.append(tokens)
        mentions.extend(spans)
    document = Document(doc_id, sentences, mentions)
    document.validate()
    return document


def _write_corpus_input(documents: Sequence[Document], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for document in documents:
            handle.write(f"{DOC_HEADER_PREFIX}{document.doc_id}\n")
            for index in range(len(document.sentences)):
                handle.write(render_sentence(document, index) + "\n")
            handle.write("\n")


def generate_fixture(
    out_dir: PathLike,
    seed: int = 13,
    train_docs: int = 200,
    test_docs: int = 50,
) -> Dict[str, object]:
    """Write the KB, type mapping, surface forms, lexicons, corpora and config.

    Returns:
        Paths of the written files and entity/document counts
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entities = build_entities(rng)
    topics = list(TOPICS)

    with open(out / "types.tsv", "w", encoding="utf-8", newline="\n") as handle:
        for synset, coarse in TOPIC_SYNSETS.values():
            handle.write(f"{synset}\t{coarse}\n")
    with open(out / "kb.tsv", "w", encoding="utf-8", newline="\n") as handle:
        for entity in entities:
            synset = TOPIC_SYNSETS[entity.topic][0]
            wikicat = f"wikicat_Synthetic_{entity.topic}"
            handle.write(f"{entity.id}\towl:Thing,{wikicat}\t{entity.frequency}\t{wikicat}={synset}\n")
    with open(out / "surface_forms.tsv", "w", encoding="utf-8", newline="\n") as handle:
        for entity in entities:
            for surface, frequency, flags in entity.surfaces:
                handle.write(f"{entity.id}\t{surface}\t{frequency}\t{flags}\n")
    (out / "first_names.txt").write_text("\n".join(FIRST_NAMES) + "\n", encoding="utf-8")
    (out / "surnames.txt").write_text("\n".join(SURNAMES) + "\n", encoding="utf-8")

    train = [build_document(f"train-{i:04d}", topics[i % len(topics)], entities, rng, True)
             for i in range(train_docs)]
    test = [build_document(f"test-{i:04d}", topics[int(rng.integers(len(topics)))], entities, rng, False)
            for i in range(test_docs)]
    _write_corpus_input(train, out / "train.txt")
    _write_corpus_input(test, out / "test.txt")
    (out / "config.ini").write_text(FIXTURE_CONFIG.format(seed=seed), encoding="utf-8")

    summary = {
        "out_dir": str(out),
        "entities": len(entities),
        "ambiguous_surfaces": len(AMBIGUOUS_NAMES),
        "train_documents": len(train),
        "test_documents": len(test),
        "train_mentions": sum(len(d.mentions) for d in train),
        "test_mentions": sum(len(d.mentions) for d in test),
    }
    logger.info("synthetic_fixture_written", **summary)
    return summary
