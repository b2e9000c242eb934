"""
Validation automatique des définitions OSD

Structure (schéma JSON, voir utils.model.parse_definition) puis règles de
composition des critères. Aucune exception n'est levée : tout constat devient
un Diagnostic portant un identifiant de règle du registre.
"""

import logging
import re
from functools import lru_cache
from typing import Iterator, List, Optional, Tuple, Union
from urllib.parse import urlsplit

from config.osd_config import OPEN_SYNDROME_VERSION
from utils.diagnostics import RULES, Diagnostic, Rule, make_diagnostic, sort_diagnostics
from utils.errors import DefinitionParseError
from utils.model import (
    COMPARISON_OPERATORS,
    ORDERING_OPERATORS,
    Category,
    Criterion,
    CriterionType,
    Definition,
    DefinitionType,
    LogicalOperator,
    Operator,
    Scope,
    Status,
    canonical_form,
    enum_values,
    parse_definition,
    parse_iso_date,
    parse_rfc3339_utc,
    walk_definition,
)

logger = logging.getLogger(__name__)

METADATA_ENUMS = {
    "scope": enum_values(Scope),
    "status": enum_values(Status),
    "category": enum_values(Category),
    "definition_type": enum_values(DefinitionType),
}
CRITERION_TYPES = enum_values(CriterionType)
LOGICAL_OPERATORS = enum_values(LogicalOperator)
OPERATORS = enum_values(Operator)

PUBLISHED_AT_PATTERN = re.compile(r"\d{4}-\d{2}-\d{2}[Tt ]\d{2}:\d{2}:\d{2}(\.\d+)?(Z|z|\+00:00)")
REGEX_FLAG_BITS = {"i": re.IGNORECASE, "m": re.MULTILINE, "s": re.DOTALL}


def rule_registry() -> List[Rule]:
    """Liste stable de toutes les règles (identifiant, sévérité, description)"""
    return list(RULES)


# ============================================================================
# EXPRESSIONS RÉGULIÈRES
# ============================================================================

def dialect_violation(pattern: str) -> Optional[str]:
    """
    Vérifie qu'un motif reste dans le sous-ensemble portable

    Classes de caractères, ancres, alternatives, répétitions et groupes
    non capturants sont acceptés ; références arrière et assertions non.

    Returns:
        str: description du premier élément refusé, None si le motif est portable
    """
    i = 0
    in_class = False
    while i < len(pattern):
        char = pattern[i]
        if char == "\\":
            escaped = pattern[i + 1:i + 2]
            if escaped and escaped in "123456789":
                return f"référence arrière \\{escaped} (position {i})"
            i += 2
            continue
        if in_class:
            if char == "]":
                in_class = False
        elif char == "[":
            in_class = True
            # « ] » en tête de classe est littéral
            if pattern[i + 1:i + 2] == "^":
                i += 1
            if pattern[i + 1:i + 2] == "]":
                i += 1
        elif char == "(" and pattern[i + 1:i + 2] == "?" and pattern[i + 2:i + 3] != ":":
            return f"groupe spécial (?{pattern[i + 2:i + 3]}...) (position {i})"
        i += 1
    return None


@lru_cache(maxsize=1024)
def compile_pattern(pattern: str, flags: str = "") -> "re.Pattern":
    """Compile un motif OSD avec ses drapeaux i/m/s (cache partagé, lecture seule)"""
    bits = 0
    for flag in flags:
        bits |= REGEX_FLAG_BITS[flag]
    return re.compile(pattern, bits)


# ============================================================================
# RÈGLES
# ============================================================================

def _check_metadata(definition: Definition) -> Iterator[Diagnostic]:
    if not definition.title.strip():
        yield make_diagnostic("required-field-missing", "/title", "title est vide")

    for name, allowed in METADATA_ENUMS.items():
        value = getattr(definition, name)
        if value is not None and value not in allowed:
            yield make_diagnostic(
                "enum-value-invalid", f"/{name}",
                f"{name} = {value!r} ; valeurs possibles : {', '.join(sorted(allowed))}",
            )

    if definition.published_at is not None:
        if not PUBLISHED_AT_PATTERN.fullmatch(definition.published_at) or definition.published_datetime is None:
            yield make_diagnostic(
                "published-at-format", "/published_at",
                f"{definition.published_at!r} n'est pas un horodatage RFC 3339 UTC",
            )

    if definition.created_at is not None and parse_iso_date(definition.created_at) is None:
        yield make_diagnostic(
            "created-at-format", "/created_at", f"{definition.created_at!r} n'est pas une date ISO 8601",
        )

    version = definition.open_syndrome_version
    if version is not None and version != OPEN_SYNDROME_VERSION:
        yield make_diagnostic(
            "osd-version-unsupported", "/open_syndrome_version",
            f"version {version!r}, seule {OPEN_SYNDROME_VERSION} est prise en charge",
        )

    for index, reference in enumerate(definition.references or ()):
        try:
            parts = urlsplit(reference.strip())
            valid = parts.scheme in ("http", "https") and bool(parts.netloc)
        except ValueError:
            valid = False
        if not valid:
            yield make_diagnostic("reference-not-url", f"/references/{index}", f"{reference!r} n'est pas une URL http(s)")


def _check_composite(criterion: Criterion, path: str, section: str, level: int) -> Iterator[Diagnostic]:
    children = criterion.values
    if criterion.has_leaf_fields:
        fields = [name for name in ("attribute", "value", "operator", "regex_pattern", "regex_flags", "code")
                  if getattr(criterion, name) is not None]
        yield make_diagnostic(
            "criterion-kind-ambiguous", path,
            f"critère composite portant des champs de feuille : {', '.join(fields)}",
        )

    if not children:
        if section == "exclusion_criteria" and level == 1:
            yield make_diagnostic("exclusion-empty", path, "critères d'exclusion vides")
        else:
            yield make_diagnostic("composite-empty", f"{path}/values", "values ne contient aucun critère")
    elif len(children) == 1:
        yield make_diagnostic("composite-single-child", f"{path}/values", "un seul critère dans values")

    operator = criterion.logical_operator
    if operator is None:
        yield make_diagnostic("composite-operator-missing", path, "logical_operator absent : AND appliqué")
    elif operator not in LOGICAL_OPERATORS:
        yield make_diagnostic(
            "enum-value-invalid", f"{path}/logical_operator",
            f"logical_operator = {operator!r} ; valeurs possibles : AND, OR, AT_LEAST",
        )
    elif operator == LogicalOperator.AT_LEAST.value:
        n = criterion.at_least_n
        if n is None:
            yield make_diagnostic(
                "at_least-arguments-required", f"{path}/logical_operator_arguments",
                "AT_LEAST exige un entier n >= 0 en premier élément de logical_operator_arguments",
            )
        elif n == 0:
            yield make_diagnostic("at_least-vacuous", f"{path}/logical_operator_arguments/0", "AT_LEAST 0 : toujours vrai")
        elif n > len(children or ()):
            yield make_diagnostic(
                "at_least-unsatisfiable", f"{path}/logical_operator_arguments/0",
                f"AT_LEAST {n} sur {len(children or ())} critère(s) : jamais satisfait",
            )

    seen = set()
    for index, child in enumerate(children or ()):
        key = canonical_form(child)
        if key in seen:
            yield make_diagnostic("children-duplicate", f"{path}/values/{index}", f"doublon de « {child.label} »")
        seen.add(key)


def _check_regex(criterion: Criterion, path: str) -> Iterator[Diagnostic]:
    pattern = criterion.regex_pattern
    flags = criterion.regex_flags

    if flags is not None:
        if pattern is None:
            yield make_diagnostic("regex-flags-orphaned", f"{path}/regex_flags", "regex_flags sans regex_pattern")
        if set(flags) - set(REGEX_FLAG_BITS) or len(set(flags)) != len(flags):
            yield make_diagnostic("regex-flags-invalid", f"{path}/regex_flags", f"drapeaux {flags!r} ; autorisés : i, m, s")

    if pattern is None:
        return
    if criterion.operator != Operator.REGEX.value:
        yield make_diagnostic("regex-operator-required", f"{path}/operator", "regex_pattern exige operator = regex")

    violation = dialect_violation(pattern)
    if violation:
        yield make_diagnostic("regex-pattern-invalid", f"{path}/regex_pattern", f"motif non portable : {violation}")
        return
    try:
        re.compile(pattern)
    except (re.error, OverflowError, RecursionError) as e:
        yield make_diagnostic("regex-pattern-invalid", f"{path}/regex_pattern", f"motif invalide : {e}")


def _check_leaf(criterion: Criterion, path: str) -> Iterator[Diagnostic]:
    if criterion.logical_operator is not None:
        yield make_diagnostic(
            "logical-operator-without-values", f"{path}/logical_operator", "logical_operator ignoré sur une feuille",
        )

    if criterion.name is None and criterion.attribute is None and criterion.code is None:
        yield make_diagnostic("criterion-test-missing", path, "ni name, ni attribute, ni code")

    if criterion.attribute is not None and criterion.code is not None:
        yield make_diagnostic("leaf-kind-ambiguous", path, "attribute et code sur le même critère")

    operator = criterion.operator
    if operator is not None and operator not in OPERATORS:
        yield make_diagnostic(
            "enum-value-invalid", f"{path}/operator",
            f"operator = {operator!r} ; valeurs possibles : {', '.join(sorted(OPERATORS))}",
        )
        operator = None

    if criterion.attribute is None:
        if criterion.operator is not None or criterion.regex_pattern is not None:
            yield make_diagnostic("attribute-required", f"{path}/attribute", "operator ou regex_pattern sans attribute")
    elif operator == Operator.REGEX.value:
        if criterion.regex_pattern is None:
            yield make_diagnostic("regex-pattern-required", f"{path}/regex_pattern", "operator regex sans regex_pattern")
    elif operator in COMPARISON_OPERATORS:
        if criterion.value is None:
            yield make_diagnostic("comparison-incomplete", f"{path}/value", f"attribute {criterion.attribute!r} sans value")
        elif operator in ORDERING_OPERATORS and (isinstance(criterion.value, (bool, str))):
            yield make_diagnostic(
                "comparison-operator-text", f"{path}/operator",
                f"{operator} sur une valeur non numérique : toujours inconnu",
            )
    elif criterion.operator is None and criterion.regex_pattern is None:
        yield make_diagnostic("comparison-incomplete", f"{path}/operator", f"attribute {criterion.attribute!r} sans operator")

    if criterion.code is not None:
        if not criterion.code.system.strip() or not criterion.code.code.strip():
            yield make_diagnostic("code-incomplete", f"{path}/code", "system et code doivent être renseignés")

    yield from _check_regex(criterion, path)


def _check_criterion(criterion: Criterion, path: str, section: str, level: int) -> Iterator[Diagnostic]:
    if not criterion.type.strip():
        yield make_diagnostic("required-field-missing", f"{path}/type", "type est vide")
    elif criterion.type not in CRITERION_TYPES:
        yield make_diagnostic(
            "enum-value-invalid", f"{path}/type",
            f"type = {criterion.type!r} ; valeurs possibles : {', '.join(sorted(CRITERION_TYPES))}",
        )

    if criterion.is_composite:
        yield from _check_composite(criterion, path, section, level)
    else:
        yield from _check_leaf(criterion, path)


def validate(definition: Definition) -> List[Diagnostic]:
    """
    Applique toutes les règles sémantiques à une définition déjà lue

    Args:
        definition: Definition issue de parse_definition

    Returns:
        List[Diagnostic]: liste vide si la définition respecte toutes les
            règles, sinon triée par chemin puis par identifiant de règle
    """
    found = list(_check_metadata(definition))
    for section, path, criterion, level in walk_definition(definition):
        found.extend(_check_criterion(criterion, path, section, level))
    return sort_diagnostics(found)


def check_presence_only(definition: Definition) -> List[Diagnostic]:
    """Précondition de la table de vérité : uniquement des feuilles de présence"""
    found = []
    for _, path, criterion, _ in walk_definition(definition):
        if not criterion.is_composite and criterion.kind != "presence":
            found.append(make_diagnostic(
                "compare-presence-only", path,
                f"critère « {criterion.label} » de forme {criterion.kind}, test de présence attendu",
            ))
    return sort_diagnostics(found)


def load_definition(data: Union[bytes, str]) -> Tuple[Optional[Definition], List[Diagnostic]]:
    """
    Lecture puis validation en une étape

    Returns:
        Tuple: (Definition ou None si illisible, diagnostics de lecture ou de validation)
    """
    try:
        definition = parse_definition(data)
    except DefinitionParseError as e:
        logger.debug(f"Document illisible : {len(e.diagnostics)} diagnostic(s)")
        return None, e.diagnostics
    return definition, validate(definition)
