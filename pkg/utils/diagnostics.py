"""
Diagnostics de validation et registre des règles

Chaque diagnostic porte un identifiant de règle stable, tiré du registre RULES.
Les règles « parse » sont produites par utils.model.parse_definition, les autres
par utils.validator.validate (et check_presence_only pour la comparaison).
"""

import json
import re
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Dict, Iterable, List, Tuple


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Rule:
    rule_id: str
    severity: Severity
    description: str
    stage: str = "validate"


@dataclass(frozen=True)
class Diagnostic:
    """Constat de validation : sévérité, règle, chemin dans le document, message"""

    severity: Severity
    rule_id: str
    path: str
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == Severity.ERROR

    def to_dict(self) -> Dict[str, str]:
        data = asdict(self)
        data["severity"] = self.severity.value
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)


RULES: Tuple[Rule, ...] = (
    # Structure du document (étape parse)
    Rule("file-unreadable", Severity.ERROR, "Fichier du jeu de données impossible à lire.", "parse"),
    Rule("json-malformed", Severity.ERROR, "Le document n'est pas du JSON UTF-8 bien formé (position en octets).", "parse"),
    Rule("document-not-object", Severity.ERROR, "La racine du document doit être un objet JSON.", "parse"),
    Rule("required-field-missing", Severity.ERROR, "Champ obligatoire absent ou vide (title, inclusion_criteria, type d'un critère, system/code d'un code).", "parse"),
    Rule("property-type-invalid", Severity.ERROR, "Propriété d'un type JSON inattendu.", "parse"),
    Rule("value-scalar-required", Severity.ERROR, "La propriété value doit être un booléen, un nombre fini ou un texte.", "parse"),
    # Métadonnées
    Rule("enum-value-invalid", Severity.ERROR, "Valeur hors énumération (scope, status, category, definition_type, type, logical_operator, operator)."),
    Rule("published-at-format", Severity.ERROR, "published_at doit être un horodatage RFC 3339 en UTC."),
    Rule("created-at-format", Severity.ERROR, "created_at doit être une date ISO 8601."),
    Rule("osd-version-unsupported", Severity.WARNING, "open_syndrome_version différente de la version prise en charge (v1)."),
    Rule("reference-not-url", Severity.WARNING, "Référence qui n'a pas la forme d'une URL http(s)."),
    # Critères composites
    Rule("at_least-arguments-required", Severity.ERROR, "AT_LEAST exige logical_operator_arguments dont le premier élément est un entier n >= 0."),
    Rule("at_least-vacuous", Severity.WARNING, "AT_LEAST avec n = 0 : critère toujours vrai."),
    Rule("at_least-unsatisfiable", Severity.ERROR, "AT_LEAST avec n supérieur au nombre d'enfants : critère impossible à satisfaire."),
    Rule("criterion-kind-ambiguous", Severity.ERROR, "Critère portant à la fois des enfants (values) et des champs de feuille."),
    Rule("composite-empty", Severity.ERROR, "Critère composite sans enfant."),
    Rule("composite-single-child", Severity.WARNING, "Critère composite avec un seul enfant (l'opérateur est l'identité)."),
    Rule("composite-operator-missing", Severity.WARNING, "Critère composite sans logical_operator : AND est appliqué."),
    Rule("children-duplicate", Severity.ERROR, "Enfants identiques au sens de l'égalité canonique."),
    Rule("exclusion-empty", Severity.WARNING, "Critères d'exclusion composites vides."),
    # Critères feuilles
    Rule("criterion-test-missing", Severity.ERROR, "Feuille sans name, attribute ni code : rien à tester."),
    Rule("logical-operator-without-values", Severity.WARNING, "logical_operator sur une feuille sans enfants : ignoré."),
    Rule("leaf-kind-ambiguous", Severity.ERROR, "Feuille portant à la fois attribute et code."),
    Rule("attribute-required", Severity.ERROR, "operator ou regex_pattern sans attribute."),
    Rule("comparison-incomplete", Severity.ERROR, "attribute sans operator, ou sans value pour un opérateur de comparaison."),
    Rule("comparison-operator-text", Severity.WARNING, "Opérateur d'ordre (<, >, ...) sur une valeur non numérique : résultat toujours inconnu."),
    Rule("regex-pattern-required", Severity.ERROR, "operator regex sans regex_pattern."),
    Rule("regex-operator-required", Severity.ERROR, "regex_pattern présent alors que operator n'est pas regex."),
    Rule("regex-pattern-invalid", Severity.ERROR, "regex_pattern hors du dialecte portable (pas de références arrière ni d'assertions) ou invalide."),
    Rule("regex-flags-invalid", Severity.ERROR, "regex_flags doit être un sous-ensemble de {i, m, s}."),
    Rule("regex-flags-orphaned", Severity.ERROR, "regex_flags sans regex_pattern."),
    Rule("code-incomplete", Severity.ERROR, "Code clinique dont system ou code est vide."),
    # Précondition de la comparaison par table de vérité
    Rule("compare-presence-only", Severity.ERROR, "La table de vérité n'accepte que des feuilles de présence (name seul).", "compare"),
)

RULES_BY_ID: Dict[str, Rule] = {rule.rule_id: rule for rule in RULES}


def make_diagnostic(rule_id: str, path: str, message: str) -> Diagnostic:
    """Construit un diagnostic avec la sévérité déclarée dans le registre"""
    rule = RULES_BY_ID[rule_id]
    return Diagnostic(rule.severity, rule_id, path or "/", message)


def _path_key(path: str) -> Tuple:
    # Les indices de tableau sont triés numériquement (values/2 avant values/10)
    parts = [p for p in path.split("/") if p]
    return tuple((0, int(p), "") if re.fullmatch(r"\d+", p) else (1, 0, p) for p in parts)


def sort_diagnostics(diagnostics: Iterable[Diagnostic]) -> List[Diagnostic]:
    """Ordre déterministe : chemin du document, puis identifiant de règle"""
    unique = dict.fromkeys(diagnostics)
    return sorted(unique, key=lambda d: (_path_key(d.path), d.rule_id, d.message))


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)
