"""
Modèle de données Open Syndrome Definition (OSD)

Représentation typée et immuable d'une définition de cas et de ses arbres de
critères, avec lecture/écriture canonique du format JSON OSD v1.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from enum import Enum
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from jsonschema import Draft202012Validator

from config.osd_config import SCHEMA_PATH
from utils.diagnostics import Diagnostic, make_diagnostic, sort_diagnostics
from utils.errors import DefinitionParseError
from utils.normalize import normalize_name

logger = logging.getLogger(__name__)

Scalar = Union[bool, int, float, str]


class Scope(str, Enum):
    BROAD = "broad"
    SPECIFIC = "specific"


class Status(str, Enum):
    DRAFT = "draft"
    PUBLISHED = "published"
    DEPRECATED = "deprecated"


class Category(str, Enum):
    CONFIRMED = "confirmed"
    PROBABLE = "probable"
    SUSPECTED = "suspected"


class DefinitionType(str, Enum):
    CASE_DEFINITION = "case_definition"
    SYNDROMIC_INDICATOR = "syndromic_indicator"


class CriterionType(str, Enum):
    CRITERIA = "criteria"
    SYNDROME = "syndrome"
    SYMPTOM = "symptom"
    DIAGNOSIS = "diagnosis"
    DIAGNOSTIC_TEST = "diagnostic_test"
    PROFESSIONAL_JUDGMENT = "professional_judgment"
    EPIDEMIOLOGICAL_HISTORY = "epidemiological_history"
    DEMOGRAPHIC_CRITERIA = "demographic_criteria"


class LogicalOperator(str, Enum):
    AND = "AND"
    OR = "OR"
    AT_LEAST = "AT_LEAST"


class CriteriaLayout(str, Enum):
    """Forme écrite de inclusion_criteria / exclusion_criteria dans le document"""

    OBJECT = "object"
    SINGLE = "single"
    # Liste de plusieurs critères : conjonction implicite
    MULTI = "multi"


class Operator(str, Enum):
    GT = ">"
    GE = ">="
    LT = "<"
    LE = "<="
    EQ = "=="
    NE = "!="
    REGEX = "regex"


def enum_values(enum_cls) -> frozenset:
    return frozenset(member.value for member in enum_cls)


COMPARISON_OPERATORS = frozenset({">", ">=", "<", "<=", "==", "!="})
ORDERING_OPERATORS = frozenset({">", ">=", "<", "<="})

# Ordre canonique des propriétés (tableau des métadonnées, puis critères)
METADATA_FIELDS = (
    "title", "description", "scope", "created_at", "published_in", "published_at",
    "published_by", "authors", "location", "language", "organization", "status",
    "keywords", "category", "version", "open_syndrome_version", "definition_type",
    "surveillance_system_type",
)
LIST_FIELDS = frozenset({"published_by", "authors", "keywords", "references"})
DEFINITION_FIELDS = frozenset(METADATA_FIELDS) | {"inclusion_criteria", "exclusion_criteria", "references"}

CRITERION_FIELDS = (
    "type", "name", "description", "logical_operator", "logical_operator_arguments",
    "attribute", "value", "operator", "regex_pattern", "regex_flags", "code", "values",
)
LEAF_FIELDS = ("attribute", "value", "operator", "regex_pattern", "regex_flags", "code")


@dataclass(frozen=True)
class CodeRef:
    """Code clinique indépendant du système (ICD-10, SNOMED CT...)"""

    system: str
    code: str
    display: Optional[str] = None

    def to_dict(self) -> Dict[str, str]:
        data = {"system": self.system, "code": self.code}
        if self.display is not None:
            data["display"] = self.display
        return data


@dataclass(frozen=True)
class Criterion:
    """
    Nœud récursif d'un arbre de critères

    Feuille (test de présence, comparaison, regex ou code) quand values est
    absent, composite (AND / OR / AT_LEAST sur values) sinon.
    """

    type: str
    name: Optional[str] = None
    description: Optional[str] = None
    logical_operator: Optional[str] = None
    logical_operator_arguments: Optional[Tuple[Scalar, ...]] = None
    attribute: Optional[str] = None
    value: Optional[Scalar] = None
    operator: Optional[str] = None
    regex_pattern: Optional[str] = None
    regex_flags: Optional[str] = None
    code: Optional[CodeRef] = None
    values: Optional[Tuple["Criterion", ...]] = None
    extras: Dict[str, Any] = field(default_factory=dict, hash=False)

    @property
    def is_composite(self) -> bool:
        return self.values is not None

    @property
    def has_leaf_fields(self) -> bool:
        return any(getattr(self, name) is not None for name in LEAF_FIELDS)

    @property
    def kind(self) -> str:
        """composite, regex, comparison, code, presence ou empty"""
        if self.values is not None:
            return "composite"
        if self.attribute is not None:
            return "regex" if self.operator == Operator.REGEX.value else "comparison"
        if self.code is not None:
            return "code"
        if self.name is not None:
            return "presence"
        return "empty"

    @property
    def at_least_n(self) -> Optional[int]:
        """Seuil n d'un AT_LEAST (premier argument), None s'il est inexploitable"""
        if not self.logical_operator_arguments:
            return None
        n = self.logical_operator_arguments[0]
        if isinstance(n, bool):
            return None
        if isinstance(n, float) and n.is_integer():
            n = int(n)
        if not isinstance(n, int) or n < 0:
            return None
        return n

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        if self.attribute is not None:
            if self.operator == Operator.REGEX.value:
                return f"{self.attribute} matches /{self.regex_pattern}/"
            return f"{self.attribute} {self.operator} {format_scalar(self.value)}"
        if self.code is not None:
            return f"{self.code.system}:{self.code.code}"
        if self.values is not None:
            return self.logical_operator or LogicalOperator.AND.value
        return self.type

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for name in CRITERION_FIELDS:
            value = getattr(self, name)
            if value is None:
                continue
            if name == "code":
                data[name] = value.to_dict()
            elif name == "values":
                data[name] = [child.to_dict() for child in value]
            elif name == "logical_operator_arguments":
                data[name] = list(value)
            else:
                data[name] = value
        for key, value in self.extras.items():
            data.setdefault(key, value)
        return data


@dataclass(frozen=True)
class Definition:
    """Document OSD : métadonnées, critères d'inclusion/exclusion et références"""

    title: str
    inclusion_criteria: Criterion
    description: Optional[str] = None
    scope: Optional[str] = None
    created_at: Optional[str] = None
    published_in: Optional[str] = None
    published_at: Optional[str] = None
    published_by: Optional[Tuple[str, ...]] = None
    authors: Optional[Tuple[str, ...]] = None
    location: Optional[str] = None
    language: Optional[str] = None
    organization: Optional[str] = None
    status: Optional[str] = None
    keywords: Optional[Tuple[str, ...]] = None
    category: Optional[str] = None
    version: Optional[str] = None
    open_syndrome_version: Optional[str] = None
    definition_type: Optional[str] = None
    surveillance_system_type: Optional[str] = None
    exclusion_criteria: Optional[Criterion] = None
    references: Optional[Tuple[str, ...]] = None
    inclusion_layout: str = CriteriaLayout.OBJECT.value
    exclusion_layout: str = CriteriaLayout.OBJECT.value
    extras: Dict[str, Any] = field(default_factory=dict, hash=False)

    @property
    def created_date(self) -> Optional[date]:
        return parse_iso_date(self.created_at) if self.created_at else None

    @property
    def published_datetime(self) -> Optional[datetime]:
        return parse_rfc3339_utc(self.published_at) if self.published_at else None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {}
        for name in METADATA_FIELDS:
            value = getattr(self, name)
            if value is not None:
                data[name] = list(value) if name in LIST_FIELDS else value
        data["inclusion_criteria"] = _criteria_to_json(self.inclusion_criteria, self.inclusion_layout)
        if self.exclusion_criteria is not None:
            data["exclusion_criteria"] = _criteria_to_json(self.exclusion_criteria, self.exclusion_layout)
        if self.references is not None:
            data["references"] = list(self.references)
        for key, value in self.extras.items():
            data.setdefault(key, value)
        return data


# ============================================================================
# DATES
# ============================================================================

def parse_iso_date(text: str) -> Optional[date]:
    """Date ISO 8601 (AAAA-MM-JJ), un horodatage complet est aussi accepté"""
    try:
        return date.fromisoformat(text)
    except ValueError:
        pass
    try:
        return datetime.fromisoformat(text.replace("Z", "+00:00")).date()
    except ValueError:
        return None


def parse_rfc3339_utc(text: str) -> Optional[datetime]:
    """Horodatage RFC 3339 exprimé en UTC (suffixe Z ou +00:00), None sinon"""
    if len(text) < 20 or text[10] not in "Tt ":
        return None
    candidate = text[:-1] + "+00:00" if text[-1] in "Zz" else text
    try:
        parsed = datetime.fromisoformat(candidate)
    except ValueError:
        return None
    if parsed.tzinfo is None or parsed.utcoffset() != timezone.utc.utcoffset(None):
        return None
    return parsed


def format_scalar(value: Optional[Scalar]) -> str:
    """Représentation textuelle stable d'un scalaire (JSON)"""
    return json.dumps(value, ensure_ascii=False)


# ============================================================================
# LECTURE
# ============================================================================

@lru_cache(maxsize=1)
def _schema_validator() -> Draft202012Validator:
    schema = json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
    return Draft202012Validator(schema)


def _finite_float(text: str) -> float:
    number = float(text)
    if not math.isfinite(number):
        raise ValueError(f"nombre non fini : {text}")
    return number


def _reject_constant(name: str):
    raise ValueError(f"constante non standard : {name}")


def _fatal(message: str) -> DefinitionParseError:
    return DefinitionParseError([make_diagnostic("json-malformed", "/", message)])


def _decode(data: Union[bytes, str]) -> Any:
    if isinstance(data, str):
        data = data.encode("utf-8", errors="surrogatepass")
    offset = 3 if data.startswith(b"\xef\xbb\xbf") else 0
    try:
        text = data[offset:].decode("utf-8")
    except UnicodeDecodeError as e:
        raise _fatal(f"UTF-8 invalide à l'octet {offset + e.start}")
    try:
        return json.loads(text, parse_float=_finite_float, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        byte_offset = offset + len(text[:e.pos].encode("utf-8"))
        raise _fatal(f"JSON mal formé à l'octet {byte_offset} : {e.msg}")
    except RecursionError:
        raise _fatal("imbrication JSON trop profonde")
    except ValueError as e:
        raise _fatal(f"JSON non conforme : {e}")


def _pointer(parts) -> str:
    return "/" + "/".join(str(part) for part in parts)


def _json_type(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "string"
    return "array" if isinstance(value, list) else "object"


def _structural_diagnostics(document: Dict[str, Any]) -> List[Diagnostic]:
    """Conformité au schéma JSON OSD v1 (champs requis, types des propriétés)"""
    found: List[Diagnostic] = []
    errors = list(_schema_validator().iter_errors(document))
    for error in errors:
        parts = list(error.absolute_path)
        path = _pointer(parts)
        if error.validator == "required":
            for prop in error.validator_value:
                if isinstance(error.instance, dict) and prop not in error.instance:
                    found.append(make_diagnostic(
                        "required-field-missing",
                        _pointer(parts + [prop]),
                        f"propriété obligatoire absente : {prop}",
                    ))
        elif error.validator == "type" and parts and parts[-1] == "value":
            found.append(make_diagnostic(
                "value-scalar-required", path,
                f"value doit être un booléen, un nombre ou un texte (reçu : {_json_type(error.instance)})",
            ))
        elif error.validator == "type":
            expected = error.validator_value
            expected = "/".join(expected) if isinstance(expected, list) else expected
            found.append(make_diagnostic(
                "property-type-invalid", path,
                f"type attendu {expected}, reçu {_json_type(error.instance)}",
            ))
        else:
            found.append(make_diagnostic("property-type-invalid", path, error.message))
    return sort_diagnostics(found)


def _build_criterion(raw: Dict[str, Any]) -> Criterion:
    code_raw = raw.get("code")
    values_raw = raw.get("values")
    arguments = raw.get("logical_operator_arguments")
    return Criterion(
        type=raw["type"],
        name=raw.get("name"),
        description=raw.get("description"),
        logical_operator=raw.get("logical_operator"),
        logical_operator_arguments=tuple(arguments) if arguments is not None else None,
        attribute=raw.get("attribute"),
        value=raw.get("value"),
        operator=raw.get("operator"),
        regex_pattern=raw.get("regex_pattern"),
        regex_flags=raw.get("regex_flags"),
        code=CodeRef(code_raw["system"], code_raw["code"], code_raw.get("display")) if code_raw is not None else None,
        values=tuple(_build_criterion(child) for child in values_raw) if values_raw is not None else None,
        extras={key: value for key, value in raw.items() if key not in CRITERION_FIELDS},
    )


def _build_criteria(raw: Union[Dict, List]) -> Tuple[Criterion, str]:
    if isinstance(raw, dict):
        return _build_criterion(raw), CriteriaLayout.OBJECT.value
    if len(raw) == 1:
        return _build_criterion(raw[0]), CriteriaLayout.SINGLE.value
    # Plusieurs critères au premier niveau : conjonction implicite
    children = tuple(_build_criterion(child) for child in raw)
    root = Criterion(type=CriterionType.CRITERIA.value, logical_operator=LogicalOperator.AND.value, values=children)
    return root, CriteriaLayout.MULTI.value


def _build_definition(document: Dict[str, Any]) -> Definition:
    fields: Dict[str, Any] = {}
    for name in METADATA_FIELDS + ("references",):
        value = document.get(name)
        if value is not None and name in LIST_FIELDS:
            value = tuple(value)
        fields[name] = value
    inclusion, inclusion_layout = _build_criteria(document["inclusion_criteria"])
    exclusion, exclusion_layout = None, CriteriaLayout.OBJECT.value
    if document.get("exclusion_criteria") is not None:
        exclusion, exclusion_layout = _build_criteria(document["exclusion_criteria"])
    return Definition(
        inclusion_criteria=inclusion,
        exclusion_criteria=exclusion,
        inclusion_layout=inclusion_layout,
        exclusion_layout=exclusion_layout,
        extras={key: value for key, value in document.items() if key not in DEFINITION_FIELDS},
        **fields,
    )


def parse_definition(data: Union[bytes, str]) -> Definition:
    """
    Lit un document OSD (JSON UTF-8) et construit une Definition typée

    Args:
        data: contenu brut du fichier (octets ou texte)

    Returns:
        Definition: tous les champs conservés, champs inconnus dans extras

    Raises:
        DefinitionParseError: JSON mal formé (un diagnostic avec la position en
            octets) ou document non conforme à la structure OSD v1
    """
    document = _decode(data)
    if not isinstance(document, dict):
        raise DefinitionParseError([make_diagnostic(
            "document-not-object", "/", f"la racine est de type {_json_type(document)}, objet attendu",
        )])
    try:
        diagnostics = _structural_diagnostics(document)
        if diagnostics:
            raise DefinitionParseError(diagnostics)
        return _build_definition(document)
    except RecursionError:
        raise _fatal("arbre de critères trop profond")


# ============================================================================
# ÉCRITURE
# ============================================================================

def listed_items(root: Criterion, layout: str) -> Tuple[Criterion, ...]:
    """Critères de premier niveau tels qu'écrits sous forme de liste"""
    if layout == CriteriaLayout.MULTI.value and root.is_composite:
        return root.values
    return (root,)


def _criteria_to_json(root: Criterion, layout: str) -> Any:
    if layout == CriteriaLayout.OBJECT.value:
        return root.to_dict()
    return [item.to_dict() for item in listed_items(root, layout)]


def serialize_definition(definition: Definition) -> bytes:
    """Forme canonique : UTF-8, indentation de 2 espaces, ordre des champs du format"""
    text = json.dumps(definition.to_dict(), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# ============================================================================
# PARCOURS ET MESURES
# ============================================================================

def _walk(criterion: Criterion, path: str, level: int) -> Iterator[Tuple[str, Criterion, int]]:
    yield path, criterion, level
    for index, child in enumerate(criterion.values or ()):
        yield from _walk(child, f"{path}/values/{index}", level + 1)


def walk_criteria(root: Criterion, base_path: str, layout: str = CriteriaLayout.OBJECT.value) -> Iterator[Tuple[str, Criterion, int]]:
    """
    Parcours préfixe d'un arbre : (chemin dans le document, critère, niveau)

    Les chemins suivent la forme écrite du document (liste ou objet).
    """
    if layout == CriteriaLayout.OBJECT.value:
        yield from _walk(root, base_path, 1)
    elif layout == CriteriaLayout.MULTI.value and root.is_composite:
        yield base_path, root, 1
        for index, child in enumerate(root.values):
            yield from _walk(child, f"{base_path}/{index}", 2)
    else:
        yield from _walk(root, f"{base_path}/0", 1)


def walk_definition(definition: Definition) -> Iterator[Tuple[str, str, Criterion, int]]:
    """(section, chemin, critère, niveau) pour l'inclusion puis l'exclusion"""
    for path, criterion, level in walk_criteria(definition.inclusion_criteria, "/inclusion_criteria", definition.inclusion_layout):
        yield "inclusion_criteria", path, criterion, level
    if definition.exclusion_criteria is not None:
        for path, criterion, level in walk_criteria(definition.exclusion_criteria, "/exclusion_criteria", definition.exclusion_layout):
            yield "exclusion_criteria", path, criterion, level


def iter_leaves(root: Criterion) -> Iterator[Criterion]:
    if root.values is None:
        yield root
        return
    for child in root.values:
        yield from iter_leaves(child)


def depth(criterion: Criterion) -> int:
    """Feuille → 1, composite → 1 + profondeur maximale des enfants"""
    if not criterion.values:
        return 1
    return 1 + max(depth(child) for child in criterion.values)


# ============================================================================
# ÉGALITÉ CANONIQUE
# ============================================================================

def _scalar_key(value: Optional[Scalar]) -> Any:
    if value is None:
        return None
    if isinstance(value, bool):
        return ["b", value]
    if isinstance(value, (int, float)):
        return ["n", float(value)]
    return ["s", value]


def _canonical(criterion: Criterion) -> Dict[str, Any]:
    # description, code.display et champs inconnus n'entrent pas dans l'égalité
    data: Dict[str, Any] = {
        "type": criterion.type,
        "name": normalize_name(criterion.name) if criterion.name is not None else None,
        "attribute": normalize_name(criterion.attribute) if criterion.attribute is not None else None,
        "operator": criterion.operator,
        "value": _scalar_key(criterion.value),
        "regex_pattern": criterion.regex_pattern,
        "regex_flags": "".join(sorted(set(criterion.regex_flags))) if criterion.regex_flags is not None else None,
        "code": [criterion.code.system.casefold(), criterion.code.code] if criterion.code is not None else None,
        "logical_operator": criterion.logical_operator,
        "logical_operator_arguments": (
            [_scalar_key(arg) for arg in criterion.logical_operator_arguments]
            if criterion.logical_operator_arguments is not None else None
        ),
        "values": None,
    }
    if criterion.values is not None:
        data["logical_operator"] = criterion.logical_operator or LogicalOperator.AND.value
        data["values"] = sorted(canonical_form(child) for child in criterion.values)
    return data


def canonical_form(criterion: Criterion) -> str:
    """Clé textuelle : deux critères sont égaux canoniquement ssi leurs clés le sont"""
    return json.dumps(_canonical(criterion), sort_keys=True, ensure_ascii=False)


def canonical_equal(a: Criterion, b: Criterion) -> bool:
    """Égalité structurelle après normalisation des noms, enfants sans ordre"""
    return canonical_form(a) == canonical_form(b)
