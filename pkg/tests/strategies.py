"""Générateurs hypothesis : arbres de critères, définitions et enregistrements"""

from dataclasses import replace

from hypothesis import strategies as st

from utils.evaluator import Record
from utils.model import CodeRef, CriteriaLayout, Criterion, Definition

NAMES = ["fever", "cough", "rash", "headache", "vomiting", "coryza"]
STATES = ["present", "absent", "unknown"]

names = st.sampled_from(NAMES)

presence_leaves = st.builds(
    lambda name, kind: Criterion(type=kind, name=name),
    names,
    st.sampled_from(["symptom", "diagnosis", "epidemiological_history"]),
)


def _with_threshold(children):
    return st.integers(0, len(children)).map(
        lambda n: Criterion(
            type="criteria",
            logical_operator="AT_LEAST",
            logical_operator_arguments=(n,),
            values=tuple(children),
        )
    )


def _composites(children, max_children: int = 4):
    child_lists = st.lists(children, min_size=1, max_size=max_children)
    return st.one_of(
        st.builds(
            lambda operator, values: Criterion(type="criteria", logical_operator=operator, values=tuple(values)),
            st.sampled_from(["AND", "OR"]),
            child_lists,
        ),
        child_lists.flatmap(_with_threshold),
    )


presence_trees = st.recursive(presence_leaves, _composites, max_leaves=12)


def _bounded(levels: int):
    if levels == 1:
        return presence_leaves
    return st.one_of(presence_leaves, _composites(_bounded(levels - 1), max_children=6))


# Profondeur au plus 4, au plus 6 enfants par nœud
bounded_trees = _bounded(4)

definitions = st.builds(
    lambda inclusion, exclusion: Definition(title="generated", inclusion_criteria=inclusion, exclusion_criteria=exclusion),
    presence_trees,
    st.none() | presence_trees,
)


def record_from_states(states, record_id: str = "generated") -> Record:
    findings = [name for name, state in zip(NAMES, states) if state == "present"]
    absent = [name for name, state in zip(NAMES, states) if state == "absent"]
    return Record(id=record_id, findings=frozenset(findings), absent_findings=frozenset(absent))


records = st.lists(st.sampled_from(STATES), min_size=len(NAMES), max_size=len(NAMES)).map(record_from_states)

json_values = st.recursive(
    st.none() | st.booleans() | st.integers() | st.floats(allow_nan=False, allow_infinity=False) | st.text(max_size=8),
    lambda children: st.lists(children, max_size=4) | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=20,
)

CRITERION_KEYS = [
    "type", "name", "logical_operator", "logical_operator_arguments", "attribute",
    "value", "operator", "regex_pattern", "regex_flags", "code", "values",
]

# Documents proches du format : clés connues, valeurs arbitraires
criterion_like = st.recursive(
    st.dictionaries(st.sampled_from(CRITERION_KEYS), json_values, max_size=5),
    lambda children: st.fixed_dictionaries(
        {"type": st.sampled_from(["criteria", "symptom", ""]), "values": st.lists(children, max_size=3)},
        optional={"logical_operator": st.sampled_from(["AND", "OR", "AT_LEAST", "XOR"]),
                  "logical_operator_arguments": st.lists(json_values, max_size=2)},
    ),
    max_leaves=8,
)

document_like = st.fixed_dictionaries(
    {"inclusion_criteria": criterion_like | st.lists(criterion_like, max_size=3)},
    optional={
        "title": st.text(max_size=10) | json_values,
        "status": st.sampled_from(["draft", "published", "final"]),
        "published_at": st.text(max_size=25),
        "created_at": st.text(max_size=12),
        "exclusion_criteria": criterion_like,
        "references": st.lists(st.text(max_size=12), max_size=2),
    },
)


# ============================================================================
# DOCUMENTS COMPLETS (toutes les formes de feuilles, champs inconnus, listes)
# ============================================================================

ATTRIBUTES = ["body_temperature", "age_years", "stool_culture", "pcr_result"]
COMPARISON_OPERATORS = [">", ">=", "<", "<=", "==", "!="]

# Texte encodable en UTF-8 (pas de demi-paires de substitution)
texts = st.text(st.characters(blacklist_categories=("Cs",)), max_size=10)
scalars = (
    st.booleans()
    | st.integers(-10**6, 10**6)
    | st.floats(allow_nan=False, allow_infinity=False)
    | texts
)

plain_json = st.recursive(
    st.none() | scalars,
    lambda children: st.lists(children, max_size=3) | st.dictionaries(texts, children, max_size=3),
    max_leaves=8,
)
extras = st.dictionaries(st.sampled_from(["x_source", "comment", "weight"]), plain_json, max_size=2)

comparison_leaves = st.builds(
    lambda attribute, operator, value: Criterion(type="diagnostic_test", attribute=attribute, operator=operator, value=value),
    st.sampled_from(ATTRIBUTES),
    st.sampled_from(COMPARISON_OPERATORS),
    scalars,
)

regex_leaves = st.builds(
    lambda attribute, pattern, flags: Criterion(
        type="diagnostic_test", attribute=attribute, operator="regex", regex_pattern=pattern, regex_flags=flags,
    ),
    st.sampled_from(ATTRIBUTES),
    st.sampled_from(["^positive", "vibrio", "o1|o139"]),
    st.none() | st.sampled_from(["i", "im", "s"]),
)

code_leaves = st.builds(
    lambda system, code, display: Criterion(type="diagnosis", code=CodeRef(system, code, display)),
    st.sampled_from(["ICD-10", "SNOMED CT"]),
    st.sampled_from(["A00", "B05", "J11"]),
    st.none() | texts,
)

any_leaves = st.builds(
    lambda leaf, fields: replace(leaf, extras=fields),
    presence_leaves | comparison_leaves | regex_leaves | code_leaves,
    extras,
)

any_trees = st.recursive(any_leaves, _composites, max_leaves=10)

laid_out_trees = st.one_of(
    any_trees.map(lambda root: (root, CriteriaLayout.OBJECT.value)),
    any_trees.map(lambda root: (root, CriteriaLayout.SINGLE.value)),
    st.lists(any_trees, min_size=2, max_size=3).map(lambda items: (
        Criterion(type="criteria", logical_operator="AND", values=tuple(items)),
        CriteriaLayout.MULTI.value,
    )),
)


def _document(title, inclusion, exclusion, language, keywords, fields):
    return Definition(
        title=title,
        inclusion_criteria=inclusion[0],
        inclusion_layout=inclusion[1],
        exclusion_criteria=exclusion[0],
        exclusion_layout=exclusion[1],
        language=language,
        keywords=keywords,
        extras=fields,
    )


documents = st.builds(
    _document,
    texts,
    laid_out_trees,
    st.just((None, CriteriaLayout.OBJECT.value)) | laid_out_trees,
    st.none() | st.sampled_from(["English", "Portuguese"]),
    st.none() | st.lists(texts, max_size=3).map(tuple),
    st.dictionaries(st.sampled_from(["x_source", "notes"]), plain_json, max_size=2),
)


# ============================================================================
# ARBRES RENDUS EN TEXTE (présence et comparaisons sans nom)
# ============================================================================

renderable_leaves = st.one_of(
    st.builds(lambda name: Criterion(type="symptom", name=name), names),
    st.builds(
        lambda attribute, operator, value: Criterion(type="diagnostic_test", attribute=attribute, operator=operator, value=value),
        st.sampled_from(ATTRIBUTES),
        st.sampled_from(COMPARISON_OPERATORS),
        st.booleans() | st.integers(-1000, 1000) | st.floats(-100, 100) | st.text("abcdé O1-", max_size=8),
    ),
)

renderable_trees = st.recursive(renderable_leaves, _composites, max_leaves=10)
