"""
Comparaison de deux définitions

- table de vérité exacte sur l'univers commun des constats (feuilles de présence)
- concordance empirique sur un flux d'enregistrements, indéterminés compris
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from config.osd_config import (
    DISCORDANT_EXAMPLES_CAP,
    MAX_TRUTH_TABLE_UNIVERSE,
    PARALLEL_TRUTH_TABLE_THRESHOLD,
    STREAM_BATCH_SIZE,
    WORKERS,
)
from utils.errors import ComparisonError
from utils.evaluator import Outcome, Record, StreamError, classify, ordered_map
from utils.model import Criterion, CriterionType, Definition, LogicalOperator, iter_leaves
from utils.normalize import normalize_name
from utils.validator import check_presence_only

logger = logging.getLogger(__name__)

# Taille des tranches de la table de vérité (évaluation vectorisée)
CHUNK_SIZE = 1 << 16

Aliases = Mapping[str, str]


# ============================================================================
# ALIAS
# ============================================================================

def load_aliases(data: Union[bytes, str, Mapping[str, str]]) -> Dict[str, str]:
    """
    Table d'alias : nom normalisé → nom canonique

    Raises:
        ComparisonError: table qui n'est pas un objet JSON de textes
    """
    if isinstance(data, (bytes, str)):
        try:
            data = json.loads(data)
        except ValueError as e:
            raise ComparisonError(f"table d'alias illisible : {e}")
    if not isinstance(data, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise ComparisonError("la table d'alias doit être un objet JSON {nom: nom canonique}")
    return {normalize_name(key): normalize_name(value) for key, value in data.items()}


def _alias_criterion(criterion: Criterion, aliases: Aliases) -> Criterion:
    if criterion.is_composite:
        return replace(criterion, values=tuple(_alias_criterion(child, aliases) for child in criterion.values))
    if criterion.name is None:
        return criterion
    canonical = aliases.get(normalize_name(criterion.name))
    return replace(criterion, name=canonical) if canonical else criterion


def apply_aliases(definition: Definition, aliases: Optional[Aliases]) -> Definition:
    """Renomme les feuilles selon la table d'alias"""
    if not aliases:
        return definition
    exclusion = definition.exclusion_criteria
    return replace(
        definition,
        inclusion_criteria=_alias_criterion(definition.inclusion_criteria, aliases),
        exclusion_criteria=_alias_criterion(exclusion, aliases) if exclusion is not None else None,
    )


def alias_record(record: Record, aliases: Optional[Aliases]) -> Record:
    """Renomme les constats d'un enregistrement ; un constat présent l'emporte sur un absent"""
    if not aliases:
        return record
    findings = {aliases.get(name, name) for name in record.findings}
    absent = {aliases.get(name, name) for name in record.absent_findings} - findings
    return replace(record, findings=frozenset(findings), absent_findings=frozenset(absent))


# ============================================================================
# TABLE DE VÉRITÉ
# ============================================================================

@dataclass(frozen=True)
class ComparisonReport:
    """Décompte des affectations complètes acceptées par a, par b, par les deux ou par aucune"""

    universe: List[str]
    assignments_total: int
    match_a_only: int
    match_b_only: int
    match_both: int
    match_neither: int
    jaccard: float
    discordant_examples: List[Dict[str, Any]] = field(default_factory=list, hash=False)
    notes: List[str] = field(default_factory=list, hash=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "universe": self.universe,
            "assignments_total": self.assignments_total,
            "match_both": self.match_both,
            "match_a_only": self.match_a_only,
            "match_b_only": self.match_b_only,
            "match_neither": self.match_neither,
            "jaccard": self.jaccard,
            "discordant_examples": self.discordant_examples,
            "notes": self.notes,
        }

    def to_text(self) -> str:
        table = pd.DataFrame(
            [[self.match_both, self.match_a_only], [self.match_b_only, self.match_neither]],
            index=["b: match", "b: no match"],
            columns=["a: match", "a: no match"],
        )
        lines = [
            f"universe ({len(self.universe)}): {', '.join(self.universe)}",
            f"assignments: {self.assignments_total}",
            "",
            table.to_string(),
            "",
            f"jaccard: {self.jaccard:.4f}",
        ]
        for example in self.discordant_examples:
            present = ", ".join(example["present"]) or "-"
            lines.append(f"discordant: a={example['match_a']} b={example['match_b']} present=[{present}]")
        lines.extend(f"note: {note}" for note in self.notes)
        return "\n".join(lines) + "\n"


def leaf_names(definition: Definition) -> List[str]:
    roots = [definition.inclusion_criteria, definition.exclusion_criteria]
    return [normalize_name(leaf.name) for root in roots if root is not None for leaf in iter_leaves(root)]


MaskFunction = Callable[[np.ndarray], np.ndarray]


def _compile(criterion: Criterion, index: Dict[str, int]) -> MaskFunction:
    """Fonction vectorisée : tableau d'affectations (bits) → tableau de booléens"""
    if not criterion.is_composite:
        shift = index[normalize_name(criterion.name)]
        return lambda masks: ((masks >> shift) & 1).astype(bool)

    parts = [_compile(child, index) for child in criterion.values]
    operator = criterion.logical_operator or LogicalOperator.AND.value
    n = criterion.at_least_n or 0

    def evaluate(masks: np.ndarray) -> np.ndarray:
        columns = [part(masks) for part in parts]
        if operator == LogicalOperator.OR.value:
            return np.any(columns, axis=0) if columns else np.zeros(len(masks), dtype=bool)
        if operator == LogicalOperator.AT_LEAST.value:
            total = np.sum(columns, axis=0) if columns else np.zeros(len(masks), dtype=int)
            return total >= n
        return np.all(columns, axis=0) if columns else np.ones(len(masks), dtype=bool)

    return evaluate


def _compile_definition(definition: Definition, index: Dict[str, int]) -> MaskFunction:
    # Affectation complète : aucune valeur inconnue, l'exclusion vraie l'emporte
    inclusion = _compile(definition.inclusion_criteria, index)
    if definition.exclusion_criteria is None:
        return inclusion
    exclusion = _compile(definition.exclusion_criteria, index)
    return lambda masks: inclusion(masks) & ~exclusion(masks)


def _professional_judgment_notes(definition: Definition, label: str) -> List[str]:
    notes = []
    roots = [definition.inclusion_criteria, definition.exclusion_criteria]
    for root in filter(None, roots):
        for leaf in iter_leaves(root):
            if leaf.type == CriterionType.PROFESSIONAL_JUDGMENT.value:
                notes.append(f"{label} : « {leaf.name} » (professional_judgment) traité comme un constat binaire")
    return notes


def truth_table_compare(
    a: Definition,
    b: Definition,
    aliases: Optional[Aliases] = None,
    max_universe: int = MAX_TRUTH_TABLE_UNIVERSE,
    workers: int = WORKERS,
) -> ComparisonReport:
    """
    Compare deux définitions sur toutes les affectations complètes de leurs constats

    Raises:
        ComparisonError: feuille autre qu'un test de présence (diagnostics
            compare-presence-only joints), ou univers au-delà de max_universe
    """
    a = apply_aliases(a, aliases)
    b = apply_aliases(b, aliases)

    diagnostics = check_presence_only(a) + check_presence_only(b)
    if diagnostics:
        raise ComparisonError("la table de vérité n'accepte que des feuilles de présence", diagnostics)

    universe = sorted(set(leaf_names(a)) | set(leaf_names(b)))
    if len(universe) > max_universe:
        raise ComparisonError(
            f"univers de {len(universe)} constats (maximum {max_universe}) : "
            "utiliser la comparaison sur enregistrements (--mode records)"
        )

    index = {name: position for position, name in enumerate(universe)}
    match_a = _compile_definition(a, index)
    match_b = _compile_definition(b, index)
    total = 1 << len(universe)
    logger.info(f"🔢 Table de vérité : {len(universe)} constats, {total:,} affectations")

    def tally(start: int) -> Tuple[np.ndarray, np.ndarray]:
        masks = np.arange(start, min(start + CHUNK_SIZE, total), dtype=np.int64)
        in_a = match_a(masks)
        in_b = match_b(masks)
        cells = np.array([
            np.count_nonzero(in_a & in_b),
            np.count_nonzero(in_a & ~in_b),
            np.count_nonzero(~in_a & in_b),
            np.count_nonzero(~in_a & ~in_b),
        ])
        return cells, masks[in_a != in_b][:DISCORDANT_EXAMPLES_CAP]

    starts = range(0, total, CHUNK_SIZE)
    if len(universe) >= PARALLEL_TRUTH_TABLE_THRESHOLD and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(tally, starts))
    else:
        partials = [tally(start) for start in starts]

    both, a_only, b_only, neither = (int(value) for value in np.sum([cells for cells, _ in partials], axis=0))
    discordant = [int(mask) for _, masks in partials for mask in masks][:DISCORDANT_EXAMPLES_CAP]

    denominator = both + a_only + b_only
    examples = []
    for mask in discordant:
        present = [name for position, name in enumerate(universe) if mask >> position & 1]
        examples.append({
            "present": present,
            "absent": [name for name in universe if name not in present],
            "match_a": bool(match_a(np.array([mask]))[0]),
            "match_b": bool(match_b(np.array([mask]))[0]),
        })

    return ComparisonReport(
        universe=universe,
        assignments_total=total,
        match_a_only=a_only,
        match_b_only=b_only,
        match_both=both,
        match_neither=neither,
        jaccard=both / denominator if denominator else 1.0,
        discordant_examples=examples,
        notes=_professional_judgment_notes(a, "a") + _professional_judgment_notes(b, "b"),
    )


# ============================================================================
# ENREGISTREMENTS
# ============================================================================

OUTCOMES = [outcome.value for outcome in Outcome]


@dataclass(frozen=True)
class RecordComparisonReport:
    """Matrice 3×3 des issues conjointes (a en ligne, b en colonne)"""

    records_total: int
    matrix: Dict[str, Dict[str, int]]
    agreement: Optional[float]
    errors: List[Dict[str, Any]] = field(default_factory=list, hash=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "records_total": self.records_total,
            "matrix": self.matrix,
            "agreement": self.agreement,
            "errors": self.errors,
        }

    def to_text(self) -> str:
        table = pd.DataFrame(self.matrix).T.reindex(index=OUTCOMES, columns=OUTCOMES)
        table.index = [f"a: {name}" for name in table.index]
        table.columns = [f"b: {name}" for name in table.columns]
        agreement = "n/a" if self.agreement is None else f"{self.agreement:.4f}"
        lines = [f"records: {self.records_total}", "", table.to_string(), "", f"agreement: {agreement}"]
        lines.extend(f"error: line {error['line']}: {error['error']}" for error in self.errors)
        return "\n".join(lines) + "\n"


def record_compare(
    a: Definition,
    b: Definition,
    records: Iterable[Union[Record, StreamError]],
    aliases: Optional[Aliases] = None,
    workers: int = WORKERS,
    batch_size: int = STREAM_BATCH_SIZE,
) -> RecordComparisonReport:
    """
    Concordance de deux définitions sur un flux d'enregistrements

    La concordance ne porte que sur les paires où les deux issues sont
    déterminées ; elle vaut None s'il n'y en a aucune.
    """
    a = apply_aliases(a, aliases)
    b = apply_aliases(b, aliases)

    def pair(item: Union[Record, StreamError]) -> Union[Tuple[Outcome, Outcome], StreamError]:
        if isinstance(item, StreamError):
            return item
        record = alias_record(item, aliases)
        return classify(a, record).outcome, classify(b, record).outcome

    matrix = {row: {column: 0 for column in OUTCOMES} for row in OUTCOMES}
    errors: List[Dict[str, Any]] = []
    total = determined = agreed = 0
    for result in ordered_map(pair, records, workers, batch_size):
        if isinstance(result, StreamError):
            errors.append(result.to_dict())
            continue
        outcome_a, outcome_b = result
        total += 1
        matrix[outcome_a.value][outcome_b.value] += 1
        if Outcome.UNDETERMINED not in (outcome_a, outcome_b):
            determined += 1
            agreed += outcome_a == outcome_b

    if errors:
        logger.warning(f"⚠️ {len(errors)} enregistrement(s) illisible(s)")
    return RecordComparisonReport(
        records_total=total,
        matrix=matrix,
        agreement=agreed / determined if determined else None,
        errors=errors,
    )
