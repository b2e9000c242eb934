"""Fixtures partagées : définitions de référence et corpus miniature"""

import json
import shutil
from pathlib import Path

import pytest

from utils.model import Definition, parse_definition

FIXTURES = Path(__file__).parent / "fixtures"

# Disposition d'une copie locale du dépôt publié
CORPUS_LAYOUT = {
    "measles_ecdc.json": "eu",
    "measles_india.json": "in",
    "ili_brazil.json": "br",
    "cholera_who.json": "global",
}


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def fixture_bytes(name: str) -> bytes:
    return fixture_path(name).read_bytes()


def load_fixture(name: str) -> Definition:
    return parse_definition(fixture_bytes(name))


def definition_from(document: dict) -> Definition:
    return parse_definition(json.dumps(document))


@pytest.fixture
def ecdc() -> Definition:
    return load_fixture("measles_ecdc.json")


@pytest.fixture
def india() -> Definition:
    return load_fixture("measles_india.json")


@pytest.fixture
def ili() -> Definition:
    return load_fixture("ili_brazil.json")


@pytest.fixture
def cholera() -> Definition:
    return load_fixture("cholera_who.json")


@pytest.fixture
def corpus_dir(tmp_path) -> Path:
    """definitions-main/machine-readable/<pays>/*.json, plus un dossier texte à ignorer"""
    root = tmp_path / "definitions-main"
    for name, country in CORPUS_LAYOUT.items():
        target = root / "machine-readable" / country
        target.mkdir(parents=True, exist_ok=True)
        shutil.copy(fixture_path(name), target / name)
    text_dir = root / "text"
    text_dir.mkdir()
    (text_dir / "notes.json").write_text("pas une définition", encoding="utf-8")
    return root
