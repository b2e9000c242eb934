"""
Évaluation d'enregistrements patients contre une définition OSD

Logique à trois valeurs (Kleene) : une observation non renseignée donne
UNKNOWN au lieu d'être confondue avec une observation absente.
"""

import json
import logging
import math
import operator as op
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import islice
from typing import Any, Callable, Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

from config.osd_config import STREAM_BATCH_SIZE, WORKERS
from utils.errors import RecordError
from utils.model import Criterion, Definition, LogicalOperator, Operator, Scalar, format_scalar
from utils.normalize import normalize_name
from utils.validator import compile_pattern

logger = logging.getLogger(__name__)


class Truth(str, Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @classmethod
    def from_bool(cls, value: bool) -> "Truth":
        return cls.TRUE if value else cls.FALSE


class Outcome(str, Enum):
    MATCH = "match"
    NO_MATCH = "no_match"
    UNDETERMINED = "undetermined"


def kleene_and(values: Iterable[Truth]) -> Truth:
    values = list(values)
    if Truth.FALSE in values:
        return Truth.FALSE
    if Truth.UNKNOWN in values:
        return Truth.UNKNOWN
    return Truth.TRUE


def kleene_or(values: Iterable[Truth]) -> Truth:
    values = list(values)
    if Truth.TRUE in values:
        return Truth.TRUE
    if Truth.UNKNOWN in values:
        return Truth.UNKNOWN
    return Truth.FALSE


def kleene_at_least(n: int, values: Iterable[Truth]) -> Truth:
    """Vrai si au moins n vrais, faux si même les inconnus ne suffisent pas"""
    values = list(values)
    true_count = values.count(Truth.TRUE)
    unknown_count = values.count(Truth.UNKNOWN)
    if true_count >= n:
        return Truth.TRUE
    if true_count + unknown_count < n:
        return Truth.FALSE
    return Truth.UNKNOWN


def decide(inclusion: Truth, exclusion: Optional[Truth]) -> Outcome:
    """Issue d'un classement à partir des valeurs d'inclusion et d'exclusion"""
    if inclusion == Truth.FALSE or exclusion == Truth.TRUE:
        return Outcome.NO_MATCH
    if inclusion == Truth.TRUE and exclusion in (None, Truth.FALSE):
        return Outcome.MATCH
    return Outcome.UNDETERMINED


# ============================================================================
# ENREGISTREMENTS
# ============================================================================

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class Record:
    """
    Observation d'un patient ou d'un cas

    Les noms de constats et les clés d'attributs sont normalisés à la
    construction ; les systèmes de codes sont comparés sans casse.
    """

    id: str
    findings: FrozenSet[str] = frozenset()
    absent_findings: FrozenSet[str] = frozenset()
    attributes: Mapping[str, Scalar] = field(default_factory=dict, hash=False)
    codes: FrozenSet[Tuple[str, str]] = frozenset()
    codes_complete: bool = True

    def __post_init__(self):
        findings = frozenset(normalize_name(name) for name in self.findings)
        absent = frozenset(normalize_name(name) for name in self.absent_findings)
        overlap = findings & absent
        if overlap:
            raise RecordError(f"constats à la fois présents et absents : {', '.join(sorted(overlap))}")
        object.__setattr__(self, "findings", findings)
        object.__setattr__(self, "absent_findings", absent)
        object.__setattr__(self, "attributes", {normalize_name(key): value for key, value in self.attributes.items()})
        object.__setattr__(self, "codes", frozenset((system.casefold(), code) for system, code in self.codes))

    @classmethod
    def from_dict(cls, data: Any, line: Optional[int] = None) -> "Record":
        """Construit un Record depuis un objet JSON (une ligne NDJSON)"""
        if not isinstance(data, dict):
            raise RecordError("objet JSON attendu", line)

        record_id = data.get("id", "" if line is None else str(line))
        if isinstance(record_id, bool) or not isinstance(record_id, (str, int)):
            raise RecordError("id doit être un texte", line)

        def text_list(key: str) -> List[str]:
            items = data.get(key) or []
            if not isinstance(items, list) or not all(isinstance(item, str) for item in items):
                raise RecordError(f"{key} doit être une liste de textes", line)
            return items

        attributes = data.get("attributes") or {}
        if not isinstance(attributes, dict):
            raise RecordError("attributes doit être un objet", line)
        for key, value in attributes.items():
            if value is not None and not isinstance(value, (bool, int, float, str)):
                raise RecordError(f"attribut {key!r} : valeur scalaire attendue", line)
            if isinstance(value, float) and not math.isfinite(value):
                raise RecordError(f"attribut {key!r} : nombre non fini", line)

        codes = []
        for item in data.get("codes") or []:
            if not isinstance(item, dict) or not isinstance(item.get("system"), str) or not isinstance(item.get("code"), str):
                raise RecordError("chaque code doit porter system et code (textes)", line)
            codes.append((item["system"], item["code"]))

        codes_complete = data.get("codes_complete", True)
        if not isinstance(codes_complete, bool):
            raise RecordError("codes_complete doit être un booléen", line)

        try:
            return cls(
                id=str(record_id),
                findings=frozenset(text_list("findings")),
                absent_findings=frozenset(text_list("absent_findings")),
                # Un attribut à null équivaut à un attribut non renseigné
                attributes={key: value for key, value in attributes.items() if value is not None},
                codes=frozenset(codes),
                codes_complete=codes_complete,
            )
        except RecordError as e:
            raise RecordError(str(e), line) from None


@dataclass(frozen=True)
class StreamError:
    """Ligne d'un flux d'enregistrements impossible à lire"""

    line: int
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return {"line": self.line, "error": self.message}


def _reject_constant(name: str):
    raise ValueError(f"constante non standard : {name}")


def read_records(lines: Iterable[Union[str, bytes]]) -> Iterator[Union[Record, StreamError]]:
    """
    Lit un flux NDJSON d'enregistrements

    Les lignes vides sont ignorées ; une ligne illisible produit un StreamError
    à sa place sans interrompre le flux.
    """
    for number, line in enumerate(lines, start=1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError as e:
                yield StreamError(number, f"UTF-8 invalide à l'octet {e.start}")
                continue
        if not line.strip():
            continue
        try:
            data = json.loads(line, parse_constant=_reject_constant)
        except ValueError as e:
            yield StreamError(number, f"JSON mal formé : {e}")
            continue
        try:
            yield Record.from_dict(data, line=number)
        except RecordError as e:
            yield StreamError(number, str(e))


# ============================================================================
# ÉVALUATION
# ============================================================================

@dataclass(frozen=True)
class TraceNode:
    """Nœud de l'explication, parallèle à l'arbre de critères"""

    label: str
    kind: str
    truth: Truth
    evidence: str
    children: Tuple["TraceNode", ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "label": self.label,
            "kind": self.kind,
            "truth": self.truth.value,
            "evidence": self.evidence,
        }
        if self.children:
            data["children"] = [child.to_dict() for child in self.children]
        return data


COMPARATORS: Dict[str, Callable[[Any, Any], bool]] = {
    ">": op.gt,
    ">=": op.ge,
    "<": op.lt,
    "<=": op.le,
    "==": op.eq,
    "!=": op.ne,
}


def compare_scalars(operator: str, actual: Scalar, expected: Scalar) -> Optional[bool]:
    """Comparaison typée ; None si les types sont incompatibles"""
    if _is_number(actual) and _is_number(expected):
        return COMPARATORS[operator](actual, expected)
    same_kind = (
        (isinstance(actual, bool) and isinstance(expected, bool))
        or (isinstance(actual, str) and isinstance(expected, str))
    )
    if same_kind and operator in ("==", "!="):
        return COMPARATORS[operator](actual, expected)
    return None


def _eval_presence(criterion: Criterion, record: Record) -> Tuple[Truth, str]:
    name = normalize_name(criterion.name)
    if name in record.findings:
        return Truth.TRUE, f"« {name} » présent"
    if name in record.absent_findings:
        return Truth.FALSE, f"« {name} » absent"
    return Truth.UNKNOWN, f"« {name} » non renseigné"


def _eval_comparison(criterion: Criterion, record: Record) -> Tuple[Truth, str]:
    key = normalize_name(criterion.attribute)
    if key not in record.attributes:
        return Truth.UNKNOWN, f"attribut « {key} » non renseigné"
    actual = record.attributes[key]
    result = compare_scalars(criterion.operator, actual, criterion.value)
    if result is None:
        return Truth.UNKNOWN, (
            f"types incompatibles : {format_scalar(actual)} {criterion.operator} {format_scalar(criterion.value)}"
        )
    return Truth.from_bool(result), f"{key} = {format_scalar(actual)}"


def _eval_regex(criterion: Criterion, record: Record) -> Tuple[Truth, str]:
    key = normalize_name(criterion.attribute)
    if key not in record.attributes:
        return Truth.UNKNOWN, f"attribut « {key} » non renseigné"
    target = record.attributes[key]
    if not isinstance(target, str):
        return Truth.UNKNOWN, f"types incompatibles : {format_scalar(target)} n'est pas un texte"
    pattern = compile_pattern(criterion.regex_pattern, criterion.regex_flags or "")
    matched = pattern.search(target) is not None
    return Truth.from_bool(matched), f"{key} = {format_scalar(target)}"


def _eval_code(criterion: Criterion, record: Record) -> Tuple[Truth, str]:
    ref = criterion.code
    if (ref.system.casefold(), ref.code) in record.codes:
        return Truth.TRUE, f"code {ref.system}:{ref.code} présent"
    if not record.codes_complete:
        return Truth.UNKNOWN, f"code {ref.system}:{ref.code} non trouvé (codes incomplets)"
    return Truth.FALSE, f"code {ref.system}:{ref.code} absent"


LEAF_EVALUATORS = {
    "presence": _eval_presence,
    "comparison": _eval_comparison,
    "regex": _eval_regex,
    "code": _eval_code,
}


def eval_criterion(criterion: Criterion, record: Record) -> Tuple[Truth, TraceNode]:
    """
    Évalue un critère (validé) sur un enregistrement

    Returns:
        Tuple: (valeur de vérité, nœud de trace avec les éléments consultés)
    """
    if not criterion.is_composite:
        evaluator = LEAF_EVALUATORS.get(criterion.kind)
        if evaluator is None:
            truth, evidence = Truth.UNKNOWN, "aucun test exploitable"
        else:
            truth, evidence = evaluator(criterion, record)
        return truth, TraceNode(criterion.label, criterion.kind, truth, evidence)

    results = [eval_criterion(child, record) for child in criterion.values]
    truths = [truth for truth, _ in results]
    operator = criterion.logical_operator or LogicalOperator.AND.value
    if operator == LogicalOperator.OR.value:
        truth = kleene_or(truths)
    elif operator == LogicalOperator.AT_LEAST.value:
        n = criterion.at_least_n
        truth = kleene_at_least(n, truths) if n is not None else Truth.UNKNOWN
    else:
        truth = kleene_and(truths)

    evidence = (
        f"{operator} : {truths.count(Truth.TRUE)} vrai(s), "
        f"{truths.count(Truth.UNKNOWN)} inconnu(s) sur {len(truths)}"
    )
    return truth, TraceNode(criterion.label, "composite", truth, evidence, tuple(node for _, node in results))


@dataclass(frozen=True)
class Verdict:
    """Issue du classement d'un enregistrement, avec l'explication complète"""

    record_id: str
    outcome: Outcome
    inclusion: Truth
    exclusion: Optional[Truth]
    inclusion_trace: TraceNode
    exclusion_trace: Optional[TraceNode] = None

    def to_dict(self, trace: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "id": self.record_id,
            "outcome": self.outcome.value,
            "inclusion": self.inclusion.value,
            "exclusion": self.exclusion.value if self.exclusion is not None else None,
        }
        if trace:
            data["trace"] = {
                "inclusion_criteria": self.inclusion_trace.to_dict(),
                "exclusion_criteria": self.exclusion_trace.to_dict() if self.exclusion_trace else None,
            }
        return data

    def to_json(self, trace: bool = False) -> str:
        return json.dumps(self.to_dict(trace), ensure_ascii=False)


def classify(definition: Definition, record: Record) -> Verdict:
    """Classe un enregistrement : inclusion, puis exclusion si elle existe"""
    inclusion, inclusion_trace = eval_criterion(definition.inclusion_criteria, record)
    exclusion, exclusion_trace = None, None
    if definition.exclusion_criteria is not None:
        exclusion, exclusion_trace = eval_criterion(definition.exclusion_criteria, record)
    return Verdict(
        record_id=record.id,
        outcome=decide(inclusion, exclusion),
        inclusion=inclusion,
        exclusion=exclusion,
        inclusion_trace=inclusion_trace,
        exclusion_trace=exclusion_trace,
    )


def classify_stream(
    definition: Definition,
    records: Iterable[Union[Record, StreamError]],
    workers: int = WORKERS,
    batch_size: int = STREAM_BATCH_SIZE,
) -> Iterator[Union[Verdict, StreamError]]:
    """
    Classe un flux d'enregistrements, éventuellement en parallèle

    L'ordre de sortie est celui de l'entrée ; les StreamError sont transmis tels
    quels à leur position. Les lots bornent la mémoire sur les longs flux.
    """
    def handle(item: Union[Record, StreamError]) -> Union[Verdict, StreamError]:
        return item if isinstance(item, StreamError) else classify(definition, item)

    return ordered_map(handle, records, workers, batch_size)


def ordered_map(function: Callable[[Any], Any], items: Iterable[Any], workers: int = WORKERS,
                batch_size: int = STREAM_BATCH_SIZE) -> Iterator[Any]:
    """map() par lots sur un pool de fils, résultats dans l'ordre d'entrée"""
    items = iter(items)
    if workers <= 1:
        yield from map(function, items)
        return

    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            batch = list(islice(items, max(1, batch_size)))
            if not batch:
                break
            yield from pool.map(function, batch)
