"""
Script de reproduction des statistiques du jeu de données publié

Charge une copie locale du dépôt des définitions, calcule les statistiques du
corpus et les affiche à côté des valeurs publiées.

Usage: python scripts/reproduce_corpus_stats.py <répertoire_du_jeu_de_données>
"""

import logging
import sys
from pathlib import Path

import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from config.osd_config import LOG_LEVEL  # noqa: E402
from utils.corpus import CorpusStats, compute_stats, load_corpus, loaded_definitions  # noqa: E402
from utils.errors import CorpusError  # noqa: E402

logger = logging.getLogger(__name__)

# Valeurs publiées avec le jeu de données
PUBLISHED_DEFINITION_COUNT = 40
PUBLISHED_DISEASE_COUNTS = {
    "measles": 4,
    "cholera": 2,
    "influenza-like illness": 2,
    "covid-19": 2,
}
PUBLISHED_SYMPTOM_FRACTION = 0.53
SYMPTOM_FRACTION_TOLERANCE = 0.03


def reproduction_table(stats: CorpusStats, error_count: int = 0) -> pd.DataFrame:
    """
    Tableau valeur publiée / valeur calculée / concordance

    Args:
        stats: statistiques calculées sur le corpus local
        error_count: nombre de fichiers avec des erreurs de validation

    Returns:
        pd.DataFrame: une ligne par indicateur
    """
    rows = [
        ("definition_count", PUBLISHED_DEFINITION_COUNT, stats.definition_count,
         stats.definition_count == PUBLISHED_DEFINITION_COUNT),
        ("validation_errors", 0, error_count, error_count == 0),
    ]
    for disease, expected in PUBLISHED_DISEASE_COUNTS.items():
        observed = stats.per_disease_counts.get(disease, 0)
        rows.append((f"count[{disease}]", expected, observed, observed == expected))

    fraction = round(stats.symptom_primary_fraction, 4)
    rows.append((
        "symptom_primary_fraction", PUBLISHED_SYMPTOM_FRACTION, fraction,
        abs(fraction - PUBLISHED_SYMPTOM_FRACTION) <= SYMPTOM_FRACTION_TOLERANCE,
    ))

    shallow = sum(count for level, count in stats.depth_histogram.items() if level <= 3)
    rows.append((
        "depth<=3 majority", "> 50%", shallow, shallow * 2 > stats.definition_count,
    ))
    return pd.DataFrame(rows, columns=["indicateur", "publié", "calculé", "concordant"])


def reproduce(root: str) -> bool:
    """Affiche le tableau de reproduction ; True si tous les indicateurs concordent"""
    logger.info(f"📂 Lecture du corpus : {root}")
    entries = load_corpus(root)
    definitions = loaded_definitions(entries)
    error_count = sum(1 for entry in entries if not entry.is_valid)
    stats = compute_stats(definitions)

    table = reproduction_table(stats, error_count)
    print("\n📊 Reproduction des statistiques du corpus :")
    print(table.to_string(index=False))
    print("\n📏 Histogramme des profondeurs :")
    print(pd.Series(stats.depth_histogram, name="définitions").rename_axis("profondeur").to_string())
    return bool(table["concordant"].all())


if __name__ == "__main__":
    logging.basicConfig(level=LOG_LEVEL)

    if len(sys.argv) < 2:
        print("Usage: python scripts/reproduce_corpus_stats.py <répertoire_du_jeu_de_données>")
        print("Exemple: python osd.py fetch-dataset /tmp/osd && python scripts/reproduce_corpus_stats.py /tmp/osd/definitions-main")
        sys.exit(2)

    try:
        ok = reproduce(sys.argv[1])
    except CorpusError as e:
        print(f"❌ {e}")
        sys.exit(3)

    print("\n✅ Statistiques reproduites" if ok else "\n⚠️ Écarts avec les valeurs publiées")
    sys.exit(0 if ok else 1)
