"""Tests du corpus : chargement, statistiques, graphe"""

import os
from pathlib import Path

import pytest

from conftest import definition_from
from utils.corpus import (
    DiseaseTable,
    _load_file,
    compute_stats,
    default_disease_table,
    export_graph,
    load_corpus,
    loaded_definitions,
    primary_leaf_type,
)
from utils.errors import CorpusError
from utils.model import Criterion


def test_load_corpus_reads_machine_readable_only(corpus_dir):
    entries = load_corpus(corpus_dir)
    assert [entry.path.name for entry in entries] == [
        "ili_brazil.json", "measles_ecdc.json", "cholera_who.json", "measles_india.json",
    ]
    assert all(entry.is_valid for entry in entries)


def test_load_corpus_accepts_machine_readable_root(corpus_dir):
    assert len(load_corpus(corpus_dir / "machine-readable", workers=1)) == 4


def test_corrupt_file_is_reported_not_fatal(corpus_dir):
    (corpus_dir / "machine-readable" / "eu" / "broken.json").write_bytes(b'{"title": "Rubella",')
    entries = load_corpus(corpus_dir)
    broken = [entry for entry in entries if not entry.is_valid]
    assert len(entries) == 5
    assert [entry.path.name for entry in broken] == ["broken.json"]
    assert broken[0].definition is None
    assert broken[0].diagnostics[0].rule_id == "json-malformed"
    assert compute_stats(loaded_definitions(entries)).definition_count == 4


def test_unreadable_file(tmp_path):
    directory = tmp_path / "looks-like.json"
    directory.mkdir()
    entry = _load_file(directory)
    assert entry.definition is None
    assert entry.diagnostics[0].rule_id == "file-unreadable"


def test_missing_root(tmp_path):
    with pytest.raises(CorpusError):
        load_corpus(tmp_path / "absent")


def test_empty_corpus(tmp_path):
    stats = compute_stats(loaded_definitions(load_corpus(tmp_path)))
    assert stats.definition_count == 0
    assert stats.symptom_primary_fraction == 0.0
    assert stats.logical_operator_fraction == 0.0
    assert stats.depth_histogram == {}
    assert stats.per_disease_counts == {}


def test_stats_small_corpus(corpus_dir):
    stats = compute_stats(loaded_definitions(load_corpus(corpus_dir)))
    assert stats.definition_count == 4
    assert stats.per_disease_counts == {"measles": 2, "cholera": 1, "influenza-like illness": 1}
    assert stats.language_distribution == {"English": 3, "Portuguese": 1}
    assert stats.category_distribution == {
        "vaccine-preventable viral": 2, "respiratory": 1, "waterborne and foodborne": 1,
    }
    assert stats.leaf_type_distribution == {
        "symptom": 15, "diagnostic_test": 2, "diagnosis": 1, "professional_judgment": 1,
    }
    assert stats.primary_type_distribution == {"symptom": 3, "diagnostic_test": 1}
    assert stats.definition_type_distribution == {"case_definition": 3, "syndromic_indicator": 1}
    assert stats.symptom_primary_fraction == 0.75
    assert stats.logical_operator_fraction == 1.0
    assert stats.depth_histogram == {2: 2, 3: 2}


def test_stats_serialization(corpus_dir):
    stats = compute_stats(loaded_definitions(load_corpus(corpus_dir)))
    data = stats.to_dict()
    assert data["depth_histogram"] == {"2": 2, "3": 2}
    text = stats.to_text()
    assert "symptom_primary_fraction" in text
    assert "influenza-like illness" in text


def test_disease_matching():
    table = DiseaseTable({"measles": ["measles", "rougeole"], "ili": ["ili"]}, {"measles": "viral"})
    assert table.disease_of(definition_from({"title": "Rougeole (cas suspect)", "inclusion_criteria": {"type": "symptom", "name": "f"}})) == "measles"
    # Mot entier uniquement
    assert table.disease_of(definition_from({"title": "Brasilia fever", "inclusion_criteria": {"type": "symptom", "name": "f"}})) == "brasilia fever"
    keyworded = definition_from({"title": "Suspected case", "keywords": ["ILI"], "inclusion_criteria": {"type": "symptom", "name": "f"}})
    assert table.disease_of(keyworded) == "ili"
    assert table.category_of("measles") == "viral"
    assert table.category_of("ili") == "uncategorized"


def test_default_table_knows_portuguese_titles(ili):
    assert default_disease_table().disease_of(ili) == "influenza-like illness"


def test_primary_leaf_type_ties():
    tied = Criterion(type="criteria", values=(
        Criterion(type="diagnosis", name="a"),
        Criterion(type="symptom", name="b"),
    ))
    assert primary_leaf_type(tied) == "symptom"
    other = Criterion(type="criteria", values=(
        Criterion(type="epidemiological_history", name="a"),
        Criterion(type="diagnosis", name="b"),
    ))
    assert primary_leaf_type(other) == "diagnosis"


# ============================================================================
# GRAPHE
# ============================================================================

def check_integrity(graph):
    ids = [node["id"] for node in graph["nodes"]]
    assert len(ids) == len(set(ids))
    known = set(ids)
    targets = [link["target"] for link in graph["links"]]
    assert all(link["source"] in known and link["target"] in known for link in graph["links"])
    # Chaque critère a exactement un parent, les définitions aucun
    for node in graph["nodes"]:
        expected = 0 if node["kind"] == "definition" else 1
        assert targets.count(node["id"]) == expected


def test_graph_ecdc(ecdc):
    graph = export_graph([ecdc])
    check_integrity(graph)
    assert len(graph["nodes"]) == 8
    assert len(graph["links"]) == 7
    root = graph["nodes"][1]
    assert root["id"] == "definition-0/inclusion_criteria"
    assert (root["kind"], root["depth"]) == ("composite", 1)
    assert graph["links"][0] == {"source": "definition-0", "target": "definition-0/inclusion_criteria", "role": "inclusion"}
    assert max(node["depth"] for node in graph["nodes"]) == 3


def test_graph_exclusion_and_list_form(cholera, ili):
    graph = export_graph([cholera, ili])
    check_integrity(graph)
    roles = [link["role"] for link in graph["links"] if link["source"] in ("definition-0", "definition-1")]
    assert roles == ["inclusion", "exclusion", "inclusion"]
    ids = {node["id"] for node in graph["nodes"]}
    assert "definition-0/exclusion_criteria" in ids
    assert "definition-1/inclusion_criteria/0/values/7" in ids
    assert {node["group"] for node in graph["nodes"]} == {0, 1}


def test_graph_small_corpus(corpus_dir):
    graph = export_graph(loaded_definitions(load_corpus(corpus_dir)))
    check_integrity(graph)
    assert sum(node["kind"] == "definition" for node in graph["nodes"]) == 4


# ============================================================================
# JEU DE DONNÉES PUBLIÉ
# ============================================================================

@pytest.mark.dataset
@pytest.mark.skipif(not os.getenv("OSD_DATASET_DIR"), reason="OSD_DATASET_DIR non défini")
def test_published_dataset_statistics():
    entries = load_corpus(Path(os.environ["OSD_DATASET_DIR"]))
    assert all(entry.is_valid for entry in entries)
    stats = compute_stats(loaded_definitions(entries))
    assert stats.definition_count == 40
    for disease, count in {"measles": 4, "cholera": 2, "influenza-like illness": 2, "covid-19": 2}.items():
        assert stats.per_disease_counts.get(disease) == count
    assert abs(stats.symptom_primary_fraction - 0.53) <= 0.03
    shallow = sum(count for level, count in stats.depth_histogram.items() if level <= 3)
    assert shallow * 2 > stats.definition_count
