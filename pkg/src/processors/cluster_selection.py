"""Clustering quality measures used to pick clustering combinations.

``agccs`` measures how many candidates share the gold candidate's cluster;
``eq1_penalty`` sums how much typing probability non-gold candidates receive
beyond the gold one, and ``select_combinations`` ranks every combination of
per-flavor clusterings by that penalty.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import structlog

from ..config.constants import STAGE_ONE_FLAVORS, ClusterFlavor
from ..core.exceptions import DataProcessingError, ValidationError
from ..core.models import CandidateMatch, Clustering, Document

logger = structlog.get_logger(__name__)

# (mention key, candidate entity ids, gold entity id)
MentionSet = Tuple[str, Sequence[str], Optional[str]]
# mention key → entity id → probability
CandidateProbabilities = Mapping[str, Mapping[str, float]]


def mention_sets(
    corpus: Iterable[Document],
    candidate_sets: Mapping[Tuple[str, int], Sequence[CandidateMatch]],
) -> List[MentionSet]:
    """Every mention of a corpus with its candidate ids and gold."""
    return [
        (document.mention_key(index), [c.entity_id for c in candidate_sets.get((document.doc_id, index), [])],
         mention.gold_entity)
        for document in corpus
        for index, mention in enumerate(document.mentions)
    ]


@dataclass(frozen=True)
class CombinationScore:
    """One clustering option per flavor and its summed penalty."""
    combo: Tuple[Tuple[ClusterFlavor, str], ...]
    penalty: float

    def option(self, flavor: ClusterFlavor) -> str:
        return dict(self.combo)[flavor]


def agccs(clustering: Clustering, mentions: Iterable[MentionSet]) -> float:
    """Average gold candidate cluster size.

    Only mentions whose gold is among the candidates and clustered count.
    Unclustered candidates never share the gold's group.

    Raises:
        DataProcessingError: If no mention is eligible
    """
    sizes: List[int] = []
    for _, candidates, gold in mentions:
        if not gold or gold not in candidates:
            continue
        gold_cluster = clustering.cluster_of(gold)
        if gold_cluster is None:
            continue
        sizes.append(sum(1 for c in set(candidates) if clustering.cluster_of(c) == gold_cluster))
    if not sizes:
        raise DataProcessingError("No mention with a clustered gold candidate", operation="agccs")
    value = sum(sizes) / len(sizes)
    logger.info("agccs_computed", flavor=clustering.flavor.value, mentions=len(sizes), agccs=value)
    return value


def flavor_penalty(
    probabilities: CandidateProbabilities,
    mentions: Iterable[MentionSet],
    flavor: ClusterFlavor,
) -> float:
    """Penalty of one flavor's typing probabilities.

    Σ over mentions Σ over non-gold candidates of ``max(0, P_ng − P_g)``.
    Mentions whose gold is NIL or not a candidate contribute nothing.

    Raises:
        DataProcessingError: If a candidate has no probability
    """
    total = 0.0
    for key, candidates, gold in mentions:
        if not gold or gold not in candidates:
            continue
        row = probabilities.get(key, {})

        def lookup(entity_id: str) -> float:
            if entity_id not in row:
                raise DataProcessingError(
                    f"Missing {flavor.value} typing probability for candidate {entity_id} "
                    f"of mention {key}",
                    operation="eq1_penalty",
                )
            return row[entity_id]

        gold_probability = lookup(gold)
        for candidate in candidates:
            if candidate == gold:
                continue
            difference = lookup(candidate) - gold_probability
            if difference > 0:
                total += difference
    return total


def eq1_penalty(
    probabilities: Mapping[ClusterFlavor, CandidateProbabilities],
    mentions: Sequence[MentionSet],
) -> float:
    """Combination penalty: the sum of the flavor penalties (Entity excluded)."""
    return sum(
        flavor_penalty(probs, mentions, flavor)
        for flavor, probs in probabilities.items()
        if flavor is not ClusterFlavor.ENTITY
    )


def select_combinations(
    options: Mapping[ClusterFlavor, Mapping[str, CandidateProbabilities]],
    mentions: Sequence[MentionSet],
    top: int = 10,
) -> List[CombinationScore]:
    """Rank every combination of per-flavor options by ascending penalty.

    Args:
        options: flavor → option name (e.g. a clustering file) → probabilities
        mentions: Mentions with candidates and golds
        top: Number of combinations to return

    Returns:
        Lowest-penalty combinations; ties ordered by option names
    """
    if ClusterFlavor.ENTITY in options:
        logger.warning("entity_flavor_ignored", reason="not available before ranking")
    flavors = [f for f in STAGE_ONE_FLAVORS if f in options]
    if not flavors:
        raise ValidationError("No clustering options to combine", field="options")
    mentions = list(mentions)

    # penalties are additive, so each (flavor, option) is scored once
    penalties: Dict[Tuple[ClusterFlavor, str], float] = {
        (flavor, name): flavor_penalty(probs, mentions, flavor)
        for flavor in flavors
        for name, probs in options[flavor].items()
    }
    scores = [
        CombinationScore(
            combo=tuple(zip(flavors, names)),
            penalty=sum(penalties[(flavor, name)] for flavor, name in zip(flavors, names)),
        )
        for names in itertools.product(*(sorted(options[f]) for f in flavors))
    ]
    scores.sort(key=lambda s: (s.penalty, tuple(name for _, name in s.combo)))
    logger.info("combinations_ranked", combinations=len(scores), best=scores[0].penalty if scores else None)
    return scores[:top]
