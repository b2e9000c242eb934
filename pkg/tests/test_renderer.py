"""Tests du rendu texte"""

import json
import re
from collections import Counter

import hypothesis as hyp
import pytest
from hypothesis import strategies as st

from conftest import definition_from, fixture_path
from strategies import NAMES, definitions, renderable_trees
from utils.model import Criterion, Definition, canonical_equal, iter_leaves
from utils.renderer import BULLET, RenderOptions, leaf_text, render

NO_METADATA = RenderOptions(include_metadata=False)


def test_golden_ecdc(ecdc):
    assert render(ecdc) == fixture_path("measles_ecdc.txt").read_text(encoding="utf-8")


def test_ecdc_without_metadata(ecdc):
    assert render(ecdc, NO_METADATA) == (
        "Inclusion criteria:\n"
        "fever\n"
        "AND\n"
        "maculo-papular rash\n"
        "AND\n"
        "at least 1 of the following\n"
        "  - cough\n"
        "  - coryza\n"
        "  - conjunctivitis\n"
    )


def test_nested_group_is_bulleted(india):
    assert render(india, NO_METADATA) == (
        "Inclusion criteria:\n"
        "all of the following\n"
        "  - Fever\n"
        "  AND\n"
        "  - Maculopapular Rash\n"
        "OR\n"
        "clinician suspects measles\n"
    )


def test_leaf_forms_and_exclusion(cholera):
    assert render(cholera, NO_METADATA) == (
        "Inclusion criteria:\n"
        'stool culture: stool_culture == "Vibrio cholerae O1"\n'
        "OR\n"
        "PCR: pcr_result matches /^positive/i\n"
        "OR\n"
        "code ICD-10:A00 (Cholera)\n"
        "\n"
        "Exclusion criteria:\n"
        "under two years: age_years < 2\n"
    )


def test_root_threshold_from_list_form(ili):
    lines = render(ili, NO_METADATA).splitlines()
    assert lines[:3] == ["Inclusion criteria:", "at least 2 of the following", "  - febre"]
    assert len(lines) == 10


def test_single_leaf():
    definition = definition_from({"title": "Fever", "inclusion_criteria": {"type": "symptom", "name": "fever"}})
    assert render(definition, NO_METADATA) == "Inclusion criteria:\nfever\n"
    assert render(definition) == "Title: Fever\n\nInclusion criteria:\nfever\n"


@pytest.mark.parametrize("operator, header", [("OR", "any of the following"), ("AND", "all of the following")])
def test_single_child_root_keeps_its_group(operator, header):
    group = Definition(title="x", inclusion_criteria=Criterion(
        type="criteria", logical_operator=operator, values=(Criterion(type="symptom", name="fever"),),
    ))
    bare = Definition(title="x", inclusion_criteria=Criterion(type="symptom", name="fever"))
    assert render(group, NO_METADATA) == f"Inclusion criteria:\n{header}\n  - fever\n"
    assert render(group, NO_METADATA) != render(bare, NO_METADATA)


def test_named_root_group():
    definition = definition_from({
        "title": "x",
        "inclusion_criteria": {
            "type": "criteria", "name": "Clinical criteria", "logical_operator": "OR",
            "values": [{"type": "symptom", "name": "fever"}, {"type": "symptom", "name": "cough"}],
        },
    })
    assert render(definition, NO_METADATA).splitlines()[1:] == [
        "Clinical criteria: any of the following",
        "  - fever",
        "  OR",
        "  - cough",
    ]


def test_indent_width(ecdc):
    text = render(ecdc, RenderOptions(include_metadata=False, indent_width=4))
    assert "    - cough" in text.splitlines()


@pytest.mark.parametrize("width", [0, 9, -1])
def test_indent_bounds(width):
    with pytest.raises(ValueError):
        RenderOptions(indent_width=width)


@pytest.mark.parametrize("language, inclusion, conjunction, threshold", [
    ("fr", "Critères d'inclusion :", "ET", "au moins 1 des critères suivants"),
    ("pt", "Critérios de inclusão:", "E", "pelo menos 1 dos seguintes"),
    ("es", "Criterios de inclusión:", "Y", "al menos 1 de los siguientes"),
])
def test_languages(ecdc, language, inclusion, conjunction, threshold):
    lines = render(ecdc, RenderOptions.for_language(language, include_metadata=False)).splitlines()
    assert lines[0] == inclusion
    assert lines[2] == conjunction
    assert lines[5] == threshold


def test_unknown_language():
    with pytest.raises(ValueError):
        RenderOptions.for_language("de")


def test_partial_words_fall_back_to_english(ecdc):
    opts = RenderOptions(include_metadata=False, operator_words={"AND": "and"})
    lines = render(ecdc, opts).splitlines()
    assert lines[0] == "Inclusion criteria:"
    assert lines[2] == "and"


def test_control_characters_are_escaped():
    definition = definition_from({
        "title": "x",
        "inclusion_criteria": {"type": "symptom", "attribute": "notes", "operator": "regex", "regex_pattern": "a\nb"},
    })
    assert leaf_text(definition.inclusion_criteria, RenderOptions()) == "notes matches /a\\nb/"


@hyp.given(definitions)
def test_render_mentions_every_leaf_once(definition: Definition):
    text = render(definition, NO_METADATA)
    assert text.endswith("\n")
    assert all(line == line.rstrip() for line in text.splitlines())
    roots = filter(None, [definition.inclusion_criteria, definition.exclusion_criteria])
    expected = Counter(leaf.name for root in roots for leaf in iter_leaves(root))
    seen = Counter(_entry(line)[2] for line in text.splitlines())
    assert {name: seen[name] for name in NAMES} == {name: expected[name] for name in NAMES}
    assert render(definition, NO_METADATA) == text


# ============================================================================
# RELECTURE DU TEXTE RENDU
# ============================================================================

JOIN_WORDS = {"AND", "OR"}
HEADERS = {"all of the following": "AND", "any of the following": "OR"}
AT_LEAST_HEADER = re.compile(r"^at least (\d+) of the following$")
COMPARISON = re.compile(r"^(\S+) (>=|<=|==|!=|>|<) (.+)$")


def _entry(line: str, width: int = 2):
    text = line.lstrip(" ")
    level = (len(line) - len(text)) // width
    bullet = text.startswith(BULLET)
    return level, bullet, text[len(BULLET):] if bullet else text


def _node(text: str, children) -> Criterion:
    if text in HEADERS:
        return Criterion(type="criteria", logical_operator=HEADERS[text], values=tuple(children))
    threshold = AT_LEAST_HEADER.match(text)
    if threshold:
        n = int(threshold.group(1))
        return Criterion(type="criteria", logical_operator="AT_LEAST", logical_operator_arguments=(n,), values=tuple(children))
    comparison = COMPARISON.match(text)
    if comparison:
        attribute, operator, value = comparison.groups()
        return Criterion(type="diagnostic_test", attribute=attribute, operator=operator, value=json.loads(value))
    return Criterion(type="symptom", name=text)


def _read_level(entries, pos: int, level: int):
    nodes, word = [], None
    while pos < len(entries) and entries[pos][0] == level:
        _, bullet, text = entries[pos]
        pos += 1
        if not bullet and text in JOIN_WORDS:
            word = text
            continue
        children, _, pos = _read_level(entries, pos, level + 1)
        nodes.append(_node(text, children))
    return nodes, word, pos


def read_rendered_tree(lines) -> Criterion:
    """Reconstruit un arbre à partir des lignes indentées d'un bloc de critères"""
    entries = [_entry(line) for line in lines]
    nodes, word, pos = _read_level(entries, 0, 0)
    assert pos == len(entries)
    if len(nodes) == 1:
        return nodes[0]
    return Criterion(type="criteria", logical_operator=word, values=tuple(nodes))


def read_rendered(text: str):
    lines = text.splitlines()
    assert lines[0] == "Inclusion criteria:"
    if "" not in lines:
        return read_rendered_tree(lines[1:]), None
    cut = lines.index("")
    assert lines[cut + 1] == "Exclusion criteria:"
    return read_rendered_tree(lines[1:cut]), read_rendered_tree(lines[cut + 2:])


def test_read_rendered_ecdc(ecdc):
    inclusion, exclusion = read_rendered(render(ecdc, NO_METADATA))
    assert canonical_equal(inclusion, ecdc.inclusion_criteria)
    assert exclusion is None


@hyp.given(renderable_trees, st.none() | renderable_trees)
@hyp.settings(max_examples=200, deadline=None)
def test_rendered_structure_is_recoverable(inclusion, exclusion):
    definition = Definition(title="generated", inclusion_criteria=inclusion, exclusion_criteria=exclusion)
    read_inclusion, read_exclusion = read_rendered(render(definition, NO_METADATA))
    assert canonical_equal(read_inclusion, inclusion)
    if exclusion is None:
        assert read_exclusion is None
    else:
        assert canonical_equal(read_exclusion, exclusion)
