"""Tests du point d'extension texte → OSD"""

import pytest

from api.converter import available_converters, convert_text, get_converter, register_converter, unregister_converter
from conftest import fixture_bytes
from utils.errors import ConverterNotAvailable


class FixtureConverter:
    """Renvoie toujours la définition ECDC, quel que soit le texte"""

    name = "fixture"

    def convert(self, text, language=None):
        return fixture_bytes("measles_ecdc.json")


class BrokenConverter:
    name = "broken"

    def convert(self, text, language=None):
        return '{"title": "Measles"}'


@pytest.fixture
def registered():
    register_converter("fixture", FixtureConverter)
    register_converter("broken", BrokenConverter)
    yield
    unregister_converter("fixture")
    unregister_converter("broken")


def test_registry(registered):
    assert available_converters() == ["broken", "fixture"]
    assert get_converter("fixture").name == "fixture"


def test_output_is_validated(registered):
    definition, diagnostics = convert_text("fixture", "Fever and rash...", language="en")
    assert definition.title == "Measles"
    assert diagnostics == []

    definition, diagnostics = convert_text("broken", "Fever and rash...")
    assert definition is None
    assert [d.rule_id for d in diagnostics] == ["required-field-missing"]


def test_unknown_converter():
    with pytest.raises(ConverterNotAvailable, match="aucun"):
        get_converter("llm")
