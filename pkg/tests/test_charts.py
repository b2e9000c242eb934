"""Tests des figures Plotly du tableau de bord"""

import plotly.graph_objects as go

from utils.charts import corpus_figures, depth_histogram_chart, distribution_bar
from utils.corpus import compute_stats, load_corpus, loaded_definitions


def test_corpus_figures(corpus_dir):
    stats = compute_stats(loaded_definitions(load_corpus(corpus_dir)))
    figures = corpus_figures(stats)
    assert len(figures) == 6
    assert all(isinstance(figure, go.Figure) for figure in figures)
    assert figures[0].layout.title.text == "Définitions par maladie"


def test_empty_corpus_has_no_figures():
    assert corpus_figures(compute_stats([])) == []


def test_bar_keeps_distribution_order():
    figure = distribution_bar({"measles": 4, "cholera": 2}, "maladie", "Définitions par maladie")
    assert list(figure.data[0].y) == ["measles", "cholera"]
    assert list(figure.data[0].x) == [4, 2]


def test_depth_histogram_labels():
    figure = depth_histogram_chart({2: 5, 3: 1})
    assert list(figure.data[0].x) == ["2", "3"]
    assert list(figure.data[0].y) == [5, 1]
