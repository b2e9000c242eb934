"""
Point d'extension : conversion texte narratif → définition OSD

Aucun convertisseur n'est livré (la conversion par modèle de langage est hors
périmètre). Une intégration enregistre une fabrique sous un nom ; la sortie
passe obligatoirement par la lecture et la validation habituelles.
"""

import logging
from typing import Callable, Dict, List, Optional, Protocol, Tuple, Union

from utils.diagnostics import Diagnostic
from utils.errors import ConverterNotAvailable
from utils.model import Definition
from utils.validator import load_definition

logger = logging.getLogger(__name__)


class TextConverter(Protocol):
    """Convertit le texte d'une définition de cas en document OSD JSON"""

    name: str

    def convert(self, text: str, language: Optional[str] = None) -> Union[bytes, str]:
        ...


_REGISTRY: Dict[str, Callable[[], TextConverter]] = {}


def register_converter(name: str, factory: Callable[[], TextConverter]) -> None:
    if name in _REGISTRY:
        logger.warning(f"Convertisseur « {name} » remplacé")
    _REGISTRY[name] = factory


def unregister_converter(name: str) -> None:
    _REGISTRY.pop(name, None)


def available_converters() -> List[str]:
    return sorted(_REGISTRY)


def get_converter(name: str) -> TextConverter:
    try:
        factory = _REGISTRY[name]
    except KeyError:
        known = ", ".join(available_converters()) or "aucun"
        raise ConverterNotAvailable(f"convertisseur inconnu : {name} (disponibles : {known})")
    return factory()


def convert_text(name: str, text: str, language: Optional[str] = None) -> Tuple[Optional[Definition], List[Diagnostic]]:
    """
    Convertit un texte puis lit et valide le document produit

    Returns:
        Tuple: (Definition ou None, diagnostics) comme load_definition
    """
    converter = get_converter(name)
    logger.info(f"🔄 Conversion avec « {name} »")
    return load_definition(converter.convert(text, language))
