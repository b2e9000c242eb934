"""
Configuration de Syndromo (boîte à outils Open Syndrome Definition)

Les valeurs par défaut peuvent être surchargées par variables d'environnement
ou par un fichier .env à la racine du projet.
"""

import os
from pathlib import Path

try:
    # Chargement optionnel des variables d'environnement depuis .env
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass

# Racine du projet et fichiers de données livrés avec le code
PROJECT_ROOT = Path(__file__).parent.parent
DATA_DIR = PROJECT_ROOT / "data"
SCHEMA_PATH = DATA_DIR / "osd_schema_v1.json"
DISEASE_TABLE_PATH = DATA_DIR / "diseases.json"
CATEGORY_TABLE_PATH = DATA_DIR / "threat_categories.json"

# Version du format prise en charge
OPEN_SYNDROME_VERSION = "v1"

# Journalisation des points d'entrée (CLI, Streamlit, scripts)
LOG_LEVEL = os.getenv("OSD_LOG_LEVEL", "WARNING").upper()

# Parallélisme
WORKERS = max(1, int(os.getenv("OSD_WORKERS", "4")))
STREAM_BATCH_SIZE = max(1, int(os.getenv("OSD_STREAM_BATCH", "512")))

# Comparaison par table de vérité : 2^24 ≈ 16,7 M évaluations au maximum
MAX_TRUTH_TABLE_UNIVERSE = int(os.getenv("OSD_MAX_UNIVERSE", "24"))
DISCORDANT_EXAMPLES_CAP = 10
# En dessous de cette taille d'univers l'énumération reste séquentielle
PARALLEL_TRUTH_TABLE_THRESHOLD = 16

# Jeu de données publié (archive du dépôt public des définitions)
DATASET_URL = os.getenv(
    "OSD_DATASET_URL",
    "https://codeload.github.com/OpenSyndrome/definitions/zip/refs/heads/main",
)
DATASET_TIMEOUT = 30
MACHINE_READABLE_DIR = "machine-readable"

# Codes de sortie de la CLI (stables d'une version à l'autre)
EXIT_CODES = {
    "success": 0,
    "findings": 1,
    "usage": 2,
    "io": 3,
}
