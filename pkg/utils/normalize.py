"""Normalisation des libellés (noms de critères, constats, clés d'attributs)"""

import unicodedata


def normalize_name(text: str) -> str:
    """
    NFC, casefold, suppression des espaces en bordure et réduction des espaces internes

    Exemples: "Fever " → "fever", "Maculo-papular   Rash" → "maculo-papular rash"
    """
    folded = unicodedata.normalize("NFC", text).casefold()
    return " ".join(unicodedata.normalize("NFC", folded).split())
