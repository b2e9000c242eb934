"""
Téléchargement du jeu de données des définitions publiées

Récupère l'archive du dépôt public et l'extrait localement ; le reste de la
boîte à outils travaille ensuite hors ligne sur cette copie.
"""

import io
import logging
import time
import zipfile
from pathlib import Path
from typing import Optional, Union

import requests

from config.osd_config import DATASET_TIMEOUT, DATASET_URL
from utils.errors import DatasetError

logger = logging.getLogger(__name__)


class DatasetDownloader:
    """Client HTTP de l'archive du jeu de données (avec nouvelles tentatives)"""

    def __init__(self, url: str = DATASET_URL, session: Optional[requests.Session] = None,
                 timeout: int = DATASET_TIMEOUT, max_retries: int = 3, retry_delay: float = 2.0):
        """
        Args:
            url: adresse de l'archive zip du dépôt
            session: session requests (injectable pour les tests)
            timeout: délai maximal d'une requête, en secondes
            max_retries: nombre de tentatives avant abandon
            retry_delay: attente entre deux tentatives, en secondes
        """
        self.url = url
        self.session = session or requests.Session()
        self.session.headers.update({"User-Agent": "syndromo-dataset-fetcher"})
        self.timeout = timeout
        self.max_retries = max(1, max_retries)
        self.retry_delay = retry_delay

    def download(self) -> bytes:
        """Contenu brut de l'archive ; DatasetError après la dernière tentative"""
        last_error: Optional[Exception] = None
        for attempt in range(self.max_retries):
            try:
                response = self.session.get(self.url, timeout=self.timeout)
                response.raise_for_status()
                logger.info(f"📥 Archive récupérée : {len(response.content):,} octets")
                return response.content
            except requests.RequestException as e:
                last_error = e
                logger.warning(f"Tentative {attempt + 1}/{self.max_retries} échouée : {e}")
                if attempt < self.max_retries - 1:
                    time.sleep(self.retry_delay)
        logger.error(f"❌ Téléchargement impossible : {self.url}")
        raise DatasetError(f"téléchargement impossible ({self.url}) : {last_error}")

    @staticmethod
    def extract(archive: bytes, dest: Union[str, Path]) -> Path:
        """
        Extrait l'archive dans dest

        Returns:
            Path: répertoire racine de la copie (le dossier unique de l'archive
                s'il existe, sinon dest)
        """
        dest = Path(dest)
        dest.mkdir(parents=True, exist_ok=True)
        root = dest.resolve()
        try:
            with zipfile.ZipFile(io.BytesIO(archive)) as bundle:
                names = bundle.namelist()
                for name in names:
                    target = (root / name).resolve()
                    if target != root and root not in target.parents:
                        raise DatasetError(f"chemin hors du répertoire cible dans l'archive : {name}")
                bundle.extractall(root)
        except zipfile.BadZipFile as e:
            raise DatasetError(f"archive invalide : {e}")

        top_level = {name.split("/", 1)[0] for name in names if name.strip("/")}
        if len(top_level) == 1 and (root / next(iter(top_level))).is_dir():
            return root / next(iter(top_level))
        return root

    def fetch(self, dest: Union[str, Path]) -> Path:
        """Télécharge puis extrait ; renvoie le chemin de la copie locale"""
        checkout = self.extract(self.download(), dest)
        logger.info(f"✅ Jeu de données disponible : {checkout}")
        return checkout
