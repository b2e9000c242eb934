"""
Graphiques Plotly des statistiques du corpus

Fonctions pures : elles renvoient des figures, l'affichage (Streamlit,
export HTML) reste à l'appelant.
"""

import logging
from typing import Dict, List

import pandas as pd
import plotly.express as px
import plotly.graph_objects as go

from utils.corpus import CorpusStats

logger = logging.getLogger(__name__)

# Couleurs sobres et professionnelles
COLORS_SOBER = [
    '#2C3E50', '#34495E', '#5D6D7E', '#85929E',
    '#AEB6BF', '#D5DBDB', '#BDC3C7', '#95A5A6',
    '#7F8C8D', '#566573'
]
COLORS_ACCENT = ['#2E86AB', '#A23B72', '#F18F01', '#C73E1D', '#5D737E', '#64A6BD', '#90A959']


def _frame(counts: Dict, label: str) -> pd.DataFrame:
    return pd.DataFrame({"libelle": [str(key) for key in counts], "valeur": list(counts.values())}).rename(
        columns={"libelle": label}
    )


def distribution_bar(counts: Dict, label: str, title: str) -> go.Figure:
    """Histogramme horizontal d'une distribution (maladies, langues, lieux...)"""
    df = _frame(counts, label)
    fig = px.bar(
        df,
        x="valeur",
        y=label,
        orientation="h",
        title=title,
        color_discrete_sequence=COLORS_ACCENT,
    )
    fig.update_traces(hovertemplate='<b>%{y}</b><br>Définitions: %{x}<extra></extra>')
    fig.update_layout(
        xaxis_title="Nombre de définitions",
        yaxis_title=None,
        yaxis=dict(autorange="reversed"),
        showlegend=False,
        title_x=0.5,
    )
    return fig


def distribution_pie(counts: Dict, label: str, title: str) -> go.Figure:
    """Camembert d'une distribution (catégories de menace, types de critères)"""
    df = _frame(counts, label)
    fig = px.pie(
        df,
        values="valeur",
        names=label,
        title=title,
        color_discrete_sequence=COLORS_SOBER,
    )
    fig.update_traces(
        textposition='inside',
        textinfo='percent+label',
        marker=dict(line=dict(color='#FFFFFF', width=2)),
        hovertemplate='<b>%{label}</b><br>Nombre: %{value}<br>Pourcentage: %{percent}<extra></extra>',
    )
    fig.update_layout(title_x=0.5, showlegend=True)
    return fig


def depth_histogram_chart(histogram: Dict[int, int]) -> go.Figure:
    """Profondeur des arbres d'inclusion (niveaux d'imbrication)"""
    fig = go.Figure()
    fig.add_trace(go.Bar(
        x=[str(level) for level in histogram],
        y=list(histogram.values()),
        marker_color=COLORS_ACCENT[0],
        hovertemplate='Profondeur %{x}<br>Définitions: %{y}<extra></extra>',
    ))
    fig.update_layout(
        title="Profondeur des critères d'inclusion",
        xaxis_title="Profondeur",
        yaxis_title="Nombre de définitions",
        title_x=0.5,
        showlegend=False,
    )
    return fig


def corpus_figures(stats: CorpusStats) -> List[go.Figure]:
    """Jeu complet de figures pour un tableau de bord du corpus"""
    figures = []
    if stats.per_disease_counts:
        figures.append(distribution_bar(stats.per_disease_counts, "maladie", "Définitions par maladie"))
    if stats.category_distribution:
        figures.append(distribution_pie(stats.category_distribution, "categorie", "Catégories de menace"))
    if stats.location_distribution:
        figures.append(distribution_bar(stats.location_distribution, "lieu", "Définitions par lieu"))
    if stats.language_distribution:
        figures.append(distribution_pie(stats.language_distribution, "langue", "Langues des définitions"))
    if stats.primary_type_distribution:
        figures.append(distribution_pie(stats.primary_type_distribution, "type", "Type de critère majoritaire"))
    if stats.depth_histogram:
        figures.append(depth_histogram_chart(stats.depth_histogram))
    logger.debug(f"📊 {len(figures)} figure(s) générée(s)")
    return figures
