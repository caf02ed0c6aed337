"""Constants and enumerations for the cluster-typing NED toolkit."""

from enum import Enum
from typing import Dict, Tuple


class CoarseType(str, Enum):
    """Coarse entity types, in the slot order of the entity-type feature."""
    PERSON = "Person"
    ORGANIZATION = "Organization"
    LOCATION = "Location"
    SPORTS_TEAM = "SportsTeam"
    MISC = "Misc"


class SurfaceFormType(str, Enum):
    """Surface form types, in the slot order of the surface-type feature."""
    WIKI_ID = "WikiID"
    REDIRECT = "Redirect"
    DISAMBIGUATION = "Disambiguation"
    FIRST_NAME = "FirstName"
    SURNAME = "Surname"
    FIRST_WORD = "FirstWord"
    LAST_WORD = "LastWord"
    PREFIX_PHRASE = "PrefixPhrase"
    SUFFIX_PHRASE = "SuffixPhrase"
    BEFORE_COMMA = "BeforeComma"
    ORG_ACRONYM = "OrgAcronym"


class SurfaceFlag(str, Enum):
    """Record flags of the surface form file."""
    REDIRECT = "R"
    DISAMBIGUATION = "D"


class ClusterFlavor(str, Enum):
    """The five clusterings of the entity space."""
    WORD = "Word"
    SURFACE = "Surface"
    ENTITY = "Entity"
    SYNSET = "Synset"
    BROWN = "Brown"


class ContextFormat(str, Enum):
    """Context representations of a mention."""
    WC = "WC"
    SFC = "SFC"
    EC = "EC"


class MentionSource(str, Enum):
    """Origin of a mention annotation."""
    MANUAL = "manual"
    AUTO = "auto"


class Provenance(str, Enum):
    """How a candidate entered a mention's candidate set."""
    DIRECT = "direct"
    CONTAINMENT = "containment"
    COOCCURRENCE = "cooccurrence"


class EncoderKind(str, Enum):
    """Channel encoders of the typing model."""
    MEAN = "mean"
    RECURRENT = "recurrent"


class TrainingMode(str, Enum):
    """SGNS data units."""
    WINDOW = "window"
    PAIR = "pair"


# Typing input format of every flavor
FLAVOR_FORMATS: Dict[ClusterFlavor, ContextFormat] = {
    ClusterFlavor.WORD: ContextFormat.WC,
    ClusterFlavor.SYNSET: ContextFormat.WC,
    ClusterFlavor.SURFACE: ContextFormat.SFC,
    ClusterFlavor.BROWN: ContextFormat.SFC,
    ClusterFlavor.ENTITY: ContextFormat.EC,
}

# Flavors available before the first ranking stage
STAGE_ONE_FLAVORS: Tuple[ClusterFlavor, ...] = (
    ClusterFlavor.WORD,
    ClusterFlavor.SURFACE,
    ClusterFlavor.SYNSET,
    ClusterFlavor.BROWN,
)

ALL_FLAVORS: Tuple[ClusterFlavor, ...] = STAGE_ONE_FLAVORS + (ClusterFlavor.ENTITY,)

# Artifact header
ARTIFACT_MAGIC = "#ned-artifact"
ARTIFACT_VERSION = 1

# Corpus markup
DOC_HEADER_PREFIX = "#DOC "
NIL_ENTITY = "NIL"
AUTO_MARKER = "auto:"
MENTION_KEY_SEPARATOR = "::"

# Context windows
CONTEXT_MENTIONS = 10
MIN_SENTENCE_WORDS = 10
MAX_SENTENCE_WORDS = 50

# Cluster token injected into the cluster-centric stream
CLUSTER_TOKEN_TEMPLATE = "⟨CLUSTER_{k}⟩"

# Synset prefix replaced by its hypernym
WIKICAT_PREFIX = "wikicat_"

# Trigram padding markers
TRIGRAM_START = "\x02"
TRIGRAM_END = "\x03"

# Candidate scoring weights
OCCURRENCE_WEIGHT = 100.0
JARO_WINKLER_WEIGHT = 10_000.0
GOLD_RECALL_CUTS: Tuple[int, ...] = (20, 30, 100)

# Typing model
UNKNOWN_TOKEN = "<unk>"
PAD_TOKEN = "<pad>"
MAX_CHANNEL_TOKENS = 50

# Ranker
ABSTAIN_THRESHOLD = 0.03
RANKER_HIDDEN: Tuple[int, int] = (500, 300)
RANKER_DROPOUT: Tuple[float, float] = (0.1, 0.7)

# Which subcommand produces each artifact kind
ARTIFACT_PRODUCERS: Dict[str, str] = {
    "kb": "ingest",
    "surface_forms": "ingest",
    "corpus": "ingest",
    "cooccurrence": "mine-coocc",
    "stream": "build-streams",
    "pairs": "build-streams",
    "embeddings": "embed",
    "clustering": "cluster",
    "typing_dataset": "build-typing-data",
    "typing_model": "train-typing",
    "typing_predictions": "predict-typing",
    "candidates": "candgen",
    "features": "features",
    "ranker_model": "train-ranker",
    "rank_scores": "rank",
    "predictions": "rank",
    "evaluation": "evaluate",
    "recall": "candgen",
    "combinations": "select-combo",
    "agccs": "agccs",
    "replication": "replicate",
}

# Root-level synsets that carry no type information
EXCLUDED_SYNSETS = frozenset({
    "owl:Thing",
    "wordnet_entity_100001740",
    "wordnet_physical_entity_100001930",
    "wordnet_abstraction_100002137",
    "wordnet_object_100002684",
    "wordnet_whole_100003553",
    "yagoLegalActor",
    "yagoLegalActorGeo",
    "common.topic",
})

# Coarse type precedence when several synsets map to different types
COARSE_TYPE_PRIORITY: Tuple[CoarseType, ...] = (
    CoarseType.SPORTS_TEAM,
    CoarseType.PERSON,
    CoarseType.LOCATION,
    CoarseType.ORGANIZATION,
)
