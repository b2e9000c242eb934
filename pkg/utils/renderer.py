"""
Conversion inverse JSON → texte lisible

Rendu déterministe par gabarits, dans le style des définitions narratives :
listes à puces indentées reliées par les mots des opérateurs logiques.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from utils.model import Criterion, Definition, LogicalOperator, format_scalar

logger = logging.getLogger(__name__)

BULLET = "- "

ENGLISH_WORDS = {
    "AND": "AND",
    "OR": "OR",
    "AT_LEAST": "at least {n} of the following",
    "ALL": "all of the following",
    "ANY": "any of the following",
    "MATCHES": "matches",
    "CODE": "code",
    "INCLUSION": "Inclusion criteria:",
    "EXCLUSION": "Exclusion criteria:",
    "TITLE": "Title",
    "ORGANIZATION": "Organization",
    "STATUS": "Status",
    "VERSION": "Version",
    "CATEGORY": "Category",
}

LANGUAGE_WORDS: Dict[str, Dict[str, str]] = {
    "en": ENGLISH_WORDS,
    "fr": {
        "AND": "ET",
        "OR": "OU",
        "AT_LEAST": "au moins {n} des critères suivants",
        "ALL": "tous les critères suivants",
        "ANY": "l'un des critères suivants",
        "MATCHES": "correspond à",
        "CODE": "code",
        "INCLUSION": "Critères d'inclusion :",
        "EXCLUSION": "Critères d'exclusion :",
        "TITLE": "Titre",
        "ORGANIZATION": "Organisation",
        "STATUS": "Statut",
        "VERSION": "Version",
        "CATEGORY": "Catégorie",
    },
    "pt": {
        "AND": "E",
        "OR": "OU",
        "AT_LEAST": "pelo menos {n} dos seguintes",
        "ALL": "todos os seguintes",
        "ANY": "qualquer um dos seguintes",
        "MATCHES": "corresponde a",
        "CODE": "código",
        "INCLUSION": "Critérios de inclusão:",
        "EXCLUSION": "Critérios de exclusão:",
        "TITLE": "Título",
        "ORGANIZATION": "Organização",
        "STATUS": "Status",
        "VERSION": "Versão",
        "CATEGORY": "Categoria",
    },
    "es": {
        "AND": "Y",
        "OR": "O",
        "AT_LEAST": "al menos {n} de los siguientes",
        "ALL": "todos los siguientes",
        "ANY": "cualquiera de los siguientes",
        "MATCHES": "coincide con",
        "CODE": "código",
        "INCLUSION": "Criterios de inclusión:",
        "EXCLUSION": "Criterios de exclusión:",
        "TITLE": "Título",
        "ORGANIZATION": "Organización",
        "STATUS": "Estado",
        "VERSION": "Versión",
        "CATEGORY": "Categoría",
    },
}


@dataclass(frozen=True)
class RenderOptions:
    """
    Options de rendu

    Args:
        include_metadata: en-tête titre / organisation / statut / version / catégorie
        indent_width: espaces par niveau d'imbrication (1 à 8)
        operator_words: mots des opérateurs et libellés, complétés par l'anglais
    """

    include_metadata: bool = True
    indent_width: int = 2
    operator_words: Mapping[str, str] = field(default_factory=lambda: dict(ENGLISH_WORDS), hash=False)

    def __post_init__(self):
        if not 1 <= self.indent_width <= 8:
            raise ValueError(f"indent_width doit être compris entre 1 et 8 (reçu : {self.indent_width})")
        object.__setattr__(self, "operator_words", {**ENGLISH_WORDS, **self.operator_words})

    @classmethod
    def for_language(cls, language: str, **kwargs) -> "RenderOptions":
        """Préréglage des mots pour en, fr, pt ou es"""
        try:
            words = LANGUAGE_WORDS[language]
        except KeyError:
            raise ValueError(f"langue non prise en charge : {language} ({', '.join(sorted(LANGUAGE_WORDS))})")
        return cls(operator_words=dict(words), **kwargs)

    def word(self, key: str, n: Optional[int] = None) -> str:
        text = self.operator_words[key]
        return text.format(n=n) if n is not None else text


def _clean(text: str) -> str:
    return " ".join(text.split())


def leaf_text(criterion: Criterion, opts: RenderOptions) -> str:
    """Texte d'une feuille : nom, comparaison, motif ou code clinique"""
    kind = criterion.kind
    if kind == "comparison":
        text = f"{_clean(criterion.attribute)} {criterion.operator} {format_scalar(criterion.value)}"
    elif kind == "regex":
        pattern = (criterion.regex_pattern or "").replace("\n", "\\n").replace("\r", "\\r")
        text = f"{_clean(criterion.attribute)} {opts.word('MATCHES')} /{pattern}/{criterion.regex_flags or ''}"
    elif kind == "code":
        text = f"{opts.word('CODE')} {_clean(criterion.code.system)}:{_clean(criterion.code.code)}"
        if criterion.code.display:
            text += f" ({_clean(criterion.code.display)})"
    else:
        return _clean(criterion.name or criterion.type)
    if criterion.name:
        return f"{_clean(criterion.name)}: {text}"
    return text


def _group_header(criterion: Criterion, opts: RenderOptions) -> str:
    operator = criterion.logical_operator or LogicalOperator.AND.value
    if operator == LogicalOperator.AT_LEAST.value:
        phrase = opts.word("AT_LEAST", criterion.at_least_n if criterion.at_least_n is not None else 0)
    elif operator == LogicalOperator.OR.value:
        phrase = opts.word("ANY")
    else:
        phrase = opts.word("ALL")
    if criterion.name:
        return f"{_clean(criterion.name)}: {phrase}"
    return phrase


def _joining_word(criterion: Criterion, opts: RenderOptions) -> Optional[str]:
    operator = criterion.logical_operator or LogicalOperator.AND.value
    if operator == LogicalOperator.AT_LEAST.value:
        return None
    return opts.word(operator)


class _Writer:
    def __init__(self, opts: RenderOptions):
        self.opts = opts
        self.lines: List[str] = []

    def emit(self, level: int, text: str, bullet: bool):
        prefix = " " * (self.opts.indent_width * level)
        self.lines.append((prefix + (BULLET if bullet else "") + text).rstrip())

    def items(self, children, level: int, bullet: bool, word: Optional[str]):
        for index, child in enumerate(children):
            if index and word:
                self.emit(level, word, bullet=False)
            self.item(child, level, bullet)

    def item(self, criterion: Criterion, level: int, bullet: bool):
        if not criterion.is_composite:
            self.emit(level, leaf_text(criterion, self.opts), bullet)
            return
        self.emit(level, _group_header(criterion, self.opts), bullet)
        self.items(criterion.values, level + 1, True, _joining_word(criterion, self.opts))

    def tree(self, root: Criterion):
        # Conjonction/disjonction racine sans nom d'au moins deux éléments : premier niveau à plat
        operator = root.logical_operator or LogicalOperator.AND.value
        flat = root.is_composite and len(root.values) >= 2
        if flat and not root.name and operator != LogicalOperator.AT_LEAST.value:
            self.items(root.values, 0, False, _joining_word(root, self.opts))
        else:
            self.item(root, 0, False)


def render(definition: Definition, opts: Optional[RenderOptions] = None) -> str:
    """
    Rend une définition validée en texte structuré

    Returns:
        str: texte terminé par un saut de ligne, sans espace en fin de ligne
    """
    opts = opts or RenderOptions()
    writer = _Writer(opts)

    if opts.include_metadata:
        header = [
            ("TITLE", definition.title),
            ("ORGANIZATION", definition.organization),
            ("STATUS", definition.status),
            ("VERSION", definition.version),
            ("CATEGORY", definition.category),
        ]
        for key, value in header:
            if value:
                writer.lines.append(f"{opts.word(key)}: {_clean(value)}")
        writer.lines.append("")

    writer.lines.append(opts.word("INCLUSION"))
    writer.tree(definition.inclusion_criteria)

    if definition.exclusion_criteria is not None:
        writer.lines.append("")
        writer.lines.append(opts.word("EXCLUSION"))
        writer.tree(definition.exclusion_criteria)

    return "\n".join(writer.lines) + "\n"
