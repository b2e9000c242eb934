"""
Jeu de données des définitions publiées

Chargement d'une copie locale (sous-arborescence machine-readable), statistiques
du corpus et export en graphe nœuds/liens pour les visualisations par forces.
"""

import json
import logging
import re
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import pandas as pd

from config.osd_config import CATEGORY_TABLE_PATH, DISEASE_TABLE_PATH, MACHINE_READABLE_DIR, WORKERS
from utils.diagnostics import Diagnostic, has_errors, make_diagnostic
from utils.errors import CorpusError
from utils.model import Criterion, CriterionType, Definition, depth, iter_leaves, walk_criteria
from utils.normalize import normalize_name
from utils.validator import load_definition

logger = logging.getLogger(__name__)

UNSPECIFIED = "unspecified"
UNCATEGORIZED = "uncategorized"


@dataclass(frozen=True)
class CorpusEntry:
    """Un fichier du corpus : définition lue (ou None) et ses diagnostics"""

    path: Path
    definition: Optional[Definition]
    diagnostics: List[Diagnostic] = field(default_factory=list, hash=False)

    @property
    def is_valid(self) -> bool:
        return self.definition is not None and not has_errors(self.diagnostics)


# ============================================================================
# CHARGEMENT
# ============================================================================

def _machine_readable_roots(root: Path) -> List[Path]:
    direct = root / MACHINE_READABLE_DIR
    if direct.is_dir():
        return [direct]
    nested = sorted(path for path in root.rglob(MACHINE_READABLE_DIR) if path.is_dir())
    return nested or [root]


def _load_file(path: Path) -> CorpusEntry:
    try:
        data = path.read_bytes()
    except OSError as e:
        logger.warning(f"⚠️ Lecture impossible : {path} ({e})")
        return CorpusEntry(path, None, [make_diagnostic("file-unreadable", "/", f"lecture impossible : {e}")])
    definition, diagnostics = load_definition(data)
    if definition is None:
        logger.warning(f"⚠️ Fichier illisible : {path}")
    return CorpusEntry(path, definition, diagnostics)


def load_corpus(root: Union[str, Path], workers: int = WORKERS) -> List[CorpusEntry]:
    """
    Charge et valide tous les fichiers *.json du jeu de données

    Args:
        root: copie locale du dépôt des définitions (ou directement le
            répertoire machine-readable)
        workers: nombre de fils de lecture

    Returns:
        List[CorpusEntry]: une entrée par fichier, triées par chemin

    Raises:
        CorpusError: racine absente ou qui n'est pas un répertoire
    """
    root = Path(root)
    if not root.is_dir():
        logger.error(f"❌ Répertoire du corpus introuvable : {root}")
        raise CorpusError(f"répertoire introuvable ou illisible : {root}")

    paths = sorted({
        path
        for base in _machine_readable_roots(root)
        for path in base.rglob("*.json")
        if path.is_file()
    })
    logger.info(f"📂 {len(paths)} fichier(s) JSON sous {root}")

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        entries = list(pool.map(_load_file, paths))

    invalid = sum(1 for entry in entries if not entry.is_valid)
    if invalid:
        logger.warning(f"⚠️ {invalid} fichier(s) avec des erreurs")
    logger.info(f"✅ {len(entries) - invalid} définition(s) valide(s)")
    return entries


def loaded_definitions(entries: Iterable[CorpusEntry]) -> List[Definition]:
    """Définitions lues avec succès, dans l'ordre du corpus"""
    return [entry.definition for entry in entries if entry.definition is not None]


# ============================================================================
# MALADIES ET CATÉGORIES
# ============================================================================

class DiseaseTable:
    """Table de correspondance titre/mots-clés → maladie (fichier de données)"""

    def __init__(self, aliases: Dict[str, List[str]], categories: Dict[str, str]):
        self.categories = {normalize_name(name): category for name, category in categories.items()}
        self._patterns: List[Tuple[str, re.Pattern]] = []
        for disease, names in aliases.items():
            for alias in names:
                pattern = re.compile(rf"(?<!\w){re.escape(normalize_name(alias))}(?!\w)")
                self._patterns.append((normalize_name(disease), pattern))

    @classmethod
    def from_files(cls, disease_path: Path = DISEASE_TABLE_PATH, category_path: Path = CATEGORY_TABLE_PATH) -> "DiseaseTable":
        aliases = json.loads(Path(disease_path).read_text(encoding="utf-8"))
        categories = json.loads(Path(category_path).read_text(encoding="utf-8"))
        return cls(aliases, categories)

    def _search(self, text: str) -> Optional[str]:
        for disease, pattern in self._patterns:
            if pattern.search(text):
                return disease
        return None

    def disease_of(self, definition: Definition) -> str:
        """Premier alias trouvé dans le titre, puis dans les mots-clés ; sinon le titre normalisé"""
        title = normalize_name(definition.title)
        found = self._search(title)
        for keyword in definition.keywords or ():
            if found:
                break
            found = self._search(normalize_name(keyword))
        return found or title

    def category_of(self, disease: str) -> str:
        return self.categories.get(disease, UNCATEGORIZED)


@lru_cache(maxsize=1)
def default_disease_table() -> DiseaseTable:
    return DiseaseTable.from_files()


# ============================================================================
# STATISTIQUES
# ============================================================================

def primary_leaf_type(root: Criterion) -> str:
    """Type de feuille majoritaire ; égalité en faveur de symptom, puis ordre alphabétique"""
    counts = Counter(leaf.type for leaf in iter_leaves(root))
    if not counts:
        return UNSPECIFIED
    best = max(counts.values())
    tied = sorted(kind for kind, count in counts.items() if count == best)
    return CriterionType.SYMPTOM.value if CriterionType.SYMPTOM.value in tied else tied[0]


def uses_logical_operator(definition: Definition) -> bool:
    roots = [definition.inclusion_criteria, definition.exclusion_criteria]
    for root in filter(None, roots):
        for _, criterion, _ in walk_criteria(root, ""):
            if criterion.is_composite and criterion.logical_operator is not None:
                return True
    return False


def _ordered_counts(series: pd.Series) -> Dict[str, int]:
    counts = series.value_counts()
    return {str(key): int(value) for key, value in sorted(counts.items(), key=lambda item: (-item[1], str(item[0])))}


@dataclass(frozen=True)
class CorpusStats:
    """Statistiques descriptives d'un ensemble de définitions"""

    definition_count: int
    per_disease_counts: Dict[str, int]
    language_distribution: Dict[str, int]
    location_distribution: Dict[str, int]
    category_distribution: Dict[str, int]
    leaf_type_distribution: Dict[str, int]
    primary_type_distribution: Dict[str, int]
    definition_type_distribution: Dict[str, int]
    symptom_primary_fraction: float
    logical_operator_fraction: float
    depth_histogram: Dict[int, int]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "definition_count": self.definition_count,
            "per_disease_counts": self.per_disease_counts,
            "language_distribution": self.language_distribution,
            "location_distribution": self.location_distribution,
            "category_distribution": self.category_distribution,
            "leaf_type_distribution": self.leaf_type_distribution,
            "primary_type_distribution": self.primary_type_distribution,
            "definition_type_distribution": self.definition_type_distribution,
            "symptom_primary_fraction": self.symptom_primary_fraction,
            "logical_operator_fraction": self.logical_operator_fraction,
            "depth_histogram": {str(key): value for key, value in self.depth_histogram.items()},
        }

    def to_text(self) -> str:
        """Tableaux en colonnes alignées (pandas)"""
        summary = pd.DataFrame(
            {
                "value": [
                    self.definition_count,
                    round(self.symptom_primary_fraction, 4),
                    round(self.logical_operator_fraction, 4),
                ]
            },
            index=["definition_count", "symptom_primary_fraction", "logical_operator_fraction"],
        )
        blocks = [summary.to_string(header=False)]
        tables = [
            ("disease", self.per_disease_counts),
            ("language", self.language_distribution),
            ("location", self.location_distribution),
            ("category", self.category_distribution),
            ("leaf_type", self.leaf_type_distribution),
            ("primary_type", self.primary_type_distribution),
            ("definition_type", self.definition_type_distribution),
            ("depth", self.depth_histogram),
        ]
        for label, counts in tables:
            if not counts:
                continue
            frame = pd.Series(counts, name="count").rename_axis(label).reset_index()
            blocks.append(frame.to_string(index=False))
        return "\n\n".join(blocks) + "\n"


def compute_stats(definitions: List[Definition], table: Optional[DiseaseTable] = None) -> CorpusStats:
    """
    Statistiques du corpus

    Le type majoritaire et la profondeur sont calculés sur l'arbre d'inclusion.
    Les fractions valent 0.0 sur un corpus vide.
    """
    table = table or default_disease_table()
    rows = []
    leaf_types: List[str] = []
    for definition in definitions:
        disease = table.disease_of(definition)
        leaf_types.extend(leaf.type for leaf in iter_leaves(definition.inclusion_criteria))
        rows.append({
            "disease": disease,
            "category": table.category_of(disease),
            "language": (definition.language or "").strip() or UNSPECIFIED,
            "location": (definition.location or "").strip() or UNSPECIFIED,
            "definition_type": definition.definition_type or UNSPECIFIED,
            "primary_type": primary_leaf_type(definition.inclusion_criteria),
            "depth": depth(definition.inclusion_criteria),
            "logical": uses_logical_operator(definition),
        })

    frame = pd.DataFrame(rows, columns=[
        "disease", "category", "language", "location", "definition_type", "primary_type", "depth", "logical",
    ])
    count = len(frame)
    symptom_fraction = float((frame["primary_type"] == CriterionType.SYMPTOM.value).mean()) if count else 0.0
    logical_fraction = float(frame["logical"].astype(bool).mean()) if count else 0.0
    depth_counts = frame["depth"].value_counts()

    return CorpusStats(
        definition_count=count,
        per_disease_counts=_ordered_counts(frame["disease"]),
        language_distribution=_ordered_counts(frame["language"]),
        location_distribution=_ordered_counts(frame["location"]),
        category_distribution=_ordered_counts(frame["category"]),
        leaf_type_distribution=_ordered_counts(pd.Series(leaf_types, dtype=object)),
        primary_type_distribution=_ordered_counts(frame["primary_type"]),
        definition_type_distribution=_ordered_counts(frame["definition_type"]),
        symptom_primary_fraction=symptom_fraction,
        logical_operator_fraction=logical_fraction,
        depth_histogram={int(key): int(value) for key, value in sorted(depth_counts.items())},
    )


# ============================================================================
# GRAPHE
# ============================================================================

def export_graph(definitions: List[Definition]) -> Dict[str, List[Dict[str, Any]]]:
    """
    Graphe nœuds/liens du corpus ({"nodes": [...], "links": [...]})

    Un nœud par définition (niveau 0) et par critère (niveau d'imbrication) ;
    liens définition → racines (rôle inclusion/exclusion) puis parent → enfant.
    """
    nodes: List[Dict[str, Any]] = []
    links: List[Dict[str, str]] = []

    for index, definition in enumerate(definitions):
        definition_id = f"definition-{index}"
        nodes.append({
            "id": definition_id,
            "label": definition.title,
            "kind": "definition",
            "depth": 0,
            "type": definition.definition_type or UNSPECIFIED,
            "group": index,
        })
        sections = [
            ("inclusion", "inclusion_criteria", definition.inclusion_criteria, definition.inclusion_layout),
            ("exclusion", "exclusion_criteria", definition.exclusion_criteria, definition.exclusion_layout),
        ]
        for role, section, root, layout in sections:
            if root is None:
                continue
            parents = {0: definition_id}
            for path, criterion, level in walk_criteria(root, f"/{section}", layout):
                node_id = f"{definition_id}{path}"
                nodes.append({
                    "id": node_id,
                    "label": criterion.label,
                    "kind": "composite" if criterion.is_composite else "leaf",
                    "depth": level,
                    "type": criterion.type,
                    "group": index,
                })
                links.append({
                    "source": parents[level - 1],
                    "target": node_id,
                    "role": role if level == 1 else "child",
                })
                parents[level] = node_id

    return {"nodes": nodes, "links": links}
