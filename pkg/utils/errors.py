"""
Exceptions de Syndromo

Toutes les erreurs levées par la bibliothèque héritent de OSDError.
"""

from typing import List, Optional


class OSDError(Exception):
    """Erreur de base de la boîte à outils"""


class DefinitionParseError(OSDError):
    """Document illisible : la liste des diagnostics remplace la définition"""

    def __init__(self, diagnostics: List, message: str = ""):
        self.diagnostics = list(diagnostics)
        super().__init__(message or f"{len(self.diagnostics)} diagnostic(s) bloquant(s)")


class RecordError(OSDError):
    """Enregistrement patient invalide"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"ligne {line} : {message}")


class CorpusError(OSDError):
    """Répertoire du jeu de données inutilisable"""


class ComparisonError(OSDError):
    """Comparaison impossible (univers trop grand, critères non binaires...)"""

    def __init__(self, message: str, diagnostics: Optional[List] = None):
        self.diagnostics = list(diagnostics or [])
        super().__init__(message)


class DatasetError(OSDError):
    """Téléchargement ou extraction du jeu de données en échec"""


class ConverterNotAvailable(OSDError):
    """Aucun convertisseur texte → OSD enregistré sous ce nom"""
