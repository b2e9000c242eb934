"""
Syndromo - Explorateur de définitions de cas
Application Streamlit au-dessus de la bibliothèque OSD

Validation, rendu texte, classement d'un enregistrement, comparaison de deux
définitions et statistiques d'un corpus local.
"""

import json
import logging
from pathlib import Path

import pandas as pd
import streamlit as st

from config.osd_config import LOG_LEVEL
from utils.charts import corpus_figures
from utils.compare import truth_table_compare
from utils.corpus import compute_stats, export_graph, load_corpus, loaded_definitions
from utils.diagnostics import has_errors
from utils.errors import ComparisonError, CorpusError, RecordError
from utils.evaluator import Record, classify
from utils.renderer import LANGUAGE_WORDS, RenderOptions, render
from utils.validator import load_definition

logging.basicConfig(level=LOG_LEVEL)
logger = logging.getLogger(__name__)

# Configuration de la page
st.set_page_config(
    page_title="Syndromo - Définitions de cas",
    page_icon="🩺",
    layout="wide",
    initial_sidebar_state="collapsed"
)

st.markdown("""
<style>
    :root {
        --syndromo-blue: #213a56;
        --syndromo-gold: #deb35b;
    }
    .main-title {
        color: var(--syndromo-blue);
        font-weight: 700;
    }
    .tab-card {
        border: 1px solid var(--syndromo-gold);
        border-radius: 8px;
        padding: 1rem;
    }
</style>
""", unsafe_allow_html=True)

EXAMPLE_RECORD = {
    "id": "patient-1",
    "findings": ["fever", "maculo-papular rash", "cough"],
    "absent_findings": ["coryza"],
    "attributes": {"body_temperature": 38.5},
    "codes": [],
}


def definition_input(key: str, label: str):
    """Zone de saisie ou téléversement d'un document OSD ; renvoie (Definition, diagnostics)"""
    uploaded = st.file_uploader(f"{label} (fichier JSON)", type=["json"], key=f"{key}_file")
    text = st.text_area(f"{label} (JSON collé)", height=220, key=f"{key}_text")
    data = uploaded.getvalue() if uploaded is not None else text.encode("utf-8")
    if not data.strip():
        return None, []
    return load_definition(data)


def show_diagnostics(diagnostics):
    if not diagnostics:
        st.success("✅ Aucun constat : définition valide")
        return
    df = pd.DataFrame([d.to_dict() for d in diagnostics])
    if has_errors(diagnostics):
        st.error(f"❌ {len(diagnostics)} constat(s), dont des erreurs")
    else:
        st.warning(f"⚠️ {len(diagnostics)} avertissement(s)")
    st.dataframe(df, use_container_width=True, hide_index=True)


def main():
    """Interface principale : navigation par onglets"""
    st.markdown('<h1 class="main-title">Syndromo</h1>', unsafe_allow_html=True)
    st.caption("Définitions de cas lisibles par machine : validation • rendu • classement • comparaison")

    tab_definition, tab_compare, tab_corpus = st.tabs(["🩺 Définition", "⚖️ Comparaison", "📊 Corpus"])
    with tab_definition:
        show_definition_tab()
    with tab_compare:
        show_compare_tab()
    with tab_corpus:
        show_corpus_tab()


def show_definition_tab():
    """Validation, rendu et classement d'un enregistrement"""
    definition, diagnostics = definition_input("definition", "Définition")
    if definition is None and not diagnostics:
        st.info("Collez ou téléversez une définition OSD pour commencer")
        return

    st.subheader("🔍 Validation")
    show_diagnostics(diagnostics)
    if definition is None or has_errors(diagnostics):
        return

    st.subheader("📝 Texte lisible")
    col1, col2 = st.columns([1, 3])
    with col1:
        language = st.selectbox("Langue", sorted(LANGUAGE_WORDS), index=sorted(LANGUAGE_WORDS).index("en"))
        include_metadata = st.checkbox("En-tête", value=True)
        indent = st.slider("Indentation", 1, 8, 2)
    with col2:
        opts = RenderOptions.for_language(language, include_metadata=include_metadata, indent_width=indent)
        st.code(render(definition, opts), language="text")

    st.subheader("🧪 Classer un enregistrement")
    raw = st.text_area("Enregistrement (JSON)", json.dumps(EXAMPLE_RECORD, indent=2, ensure_ascii=False), height=200)
    if st.button("Classer", use_container_width=True):
        try:
            record = Record.from_dict(json.loads(raw))
        except (ValueError, RecordError) as e:
            st.error(f"❌ Enregistrement invalide : {e}")
            return
        verdict = classify(definition, record)
        st.metric("Issue", verdict.outcome.value)
        st.json(verdict.to_dict(trace=True))


def show_compare_tab():
    """Table de vérité de deux définitions à feuilles de présence"""
    col1, col2 = st.columns(2)
    with col1:
        a, diagnostics_a = definition_input("compare_a", "Définition A")
    with col2:
        b, diagnostics_b = definition_input("compare_b", "Définition B")
    if a is None or b is None:
        st.info("Deux définitions valides sont nécessaires")
        return
    if has_errors(diagnostics_a) or has_errors(diagnostics_b):
        st.error("❌ Une des définitions contient des erreurs de validation")
        return

    try:
        report = truth_table_compare(a, b)
    except ComparisonError as e:
        st.error(f"❌ {e}")
        if e.diagnostics:
            show_diagnostics(e.diagnostics)
        return

    cols = st.columns(4)
    cols[0].metric("A et B", report.match_both)
    cols[1].metric("A seule", report.match_a_only)
    cols[2].metric("B seule", report.match_b_only)
    cols[3].metric("Jaccard", f"{report.jaccard:.3f}")
    st.caption(f"{report.assignments_total:,} affectations sur {len(report.universe)} constats")
    for note in report.notes:
        st.warning(note)
    if report.discordant_examples:
        st.dataframe(pd.DataFrame(report.discordant_examples), use_container_width=True, hide_index=True)


def show_corpus_tab():
    """Statistiques et graphiques d'une copie locale du jeu de données"""
    root = st.text_input("Répertoire du jeu de données", value=str(Path.cwd()))
    if not st.button("📂 Charger le corpus", use_container_width=True):
        return
    try:
        entries = load_corpus(root)
    except CorpusError as e:
        st.error(f"❌ {e}")
        return

    invalid = [entry for entry in entries if not entry.is_valid]
    if invalid:
        st.warning(f"⚠️ {len(invalid)} fichier(s) avec des erreurs")
        st.dataframe(
            pd.DataFrame([{"fichier": str(entry.path), "constats": len(entry.diagnostics)} for entry in invalid]),
            use_container_width=True,
            hide_index=True,
        )

    definitions = loaded_definitions(entries)
    stats = compute_stats(definitions)
    cols = st.columns(3)
    cols[0].metric("Définitions", stats.definition_count)
    cols[1].metric("Symptômes majoritaires", f"{stats.symptom_primary_fraction:.0%}")
    cols[2].metric("Opérateurs logiques", f"{stats.logical_operator_fraction:.0%}")

    for figure in corpus_figures(stats):
        st.plotly_chart(figure, use_container_width=True)

    st.download_button(
        "⬇️ Graphe (JSON)",
        json.dumps(export_graph(definitions), indent=2, ensure_ascii=False),
        file_name="osd_graph.json",
        mime="application/json",
    )


if __name__ == "__main__":
    main()
