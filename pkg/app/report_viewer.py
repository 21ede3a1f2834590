"""
Visualização dos relatórios de vazamento (JSON gravado por write_report).
Interface interativa com AgGrid e Plotly.
"""
import streamlit as st
import pandas as pd
import plotly.express as px
import plotly.graph_objects as go
from typing import Dict, List, Optional

try:
    from st_aggrid import AgGrid, GridOptionsBuilder, GridUpdateMode
    AGGRID_AVAILABLE = True
except ImportError:
    AGGRID_AVAILABLE = False

import sys
from pathlib import Path
sys.path.insert(0, str(Path(__file__).parent.parent))

from app.report_generator import findings_dataframe, histogram_dataframe, load_report_json


# ═══════════════════════════════════════════════════════════════════════════════
# PLOTLY THEME
# ═══════════════════════════════════════════════════════════════════════════════

PLOTLY_COLORS = {
    'primary': '#667eea',
    'secondary': '#764ba2',
    'success': '#48bb78',
    'warning': '#ecc94b',
    'error': '#fc8181',
    'info': '#63b3ed',
}

KIND_COLORS = {
    'ChanSend': '#fc8181',
    'ChanRecv': '#ecc94b',
    'Select': '#667eea',
    'IOWait': '#63b3ed',
    'Syscall': '#4fd1c5',
    'Sleep': '#cbd5e0',
    'CondWait': '#f6ad55',
    'SemAcquire': '#b794f4',
    'Running': '#48bb78',
    'Other': '#a0aec0',
}

PLOTLY_LAYOUT = dict(
    paper_bgcolor='rgba(0,0,0,0)',
    plot_bgcolor='rgba(0,0,0,0)',
    font=dict(family='Inter, sans-serif', size=12),
    margin=dict(l=20, r=20, t=40, b=20),
    legend=dict(orientation='h', yanchor='bottom', y=-0.2, xanchor='center', x=0.5),
)

HEADER_CSS = """
<style>
.app-header {
    background: linear-gradient(135deg, #667eea 0%, #764ba2 100%);
    padding: 1.5rem 2rem;
    border-radius: 1rem;
    margin-bottom: 1.5rem;
    color: white;
}
.app-header h1 { margin: 0; font-size: 1.8rem; color: white; }
.app-header p { margin: 0.3rem 0 0 0; opacity: 0.85; }
</style>
"""


def render_header(title: str, subtitle: str = ""):
    st.markdown(HEADER_CSS, unsafe_allow_html=True)
    st.markdown(f"""
    <div class="app-header">
        <h1>{title}</h1>
        <p>{subtitle}</p>
    </div>
    """, unsafe_allow_html=True)


def render_empty_state(message: str, icon: str = "📭"):
    st.markdown(f"""
    <div style="text-align: center; padding: 3rem 1rem; color: #718096;">
        <div style="font-size: 3rem; margin-bottom: 1rem;">{icon}</div>
        <div style="font-size: 1rem;">{message}</div>
    </div>
    """, unsafe_allow_html=True)


def list_reports(report_dir) -> List[Path]:
    """Relatórios JSON válidos no diretório (mais recentes primeiro)."""
    report_dir = Path(report_dir)
    if not report_dir.is_dir():
        return []
    paths = [p for p in report_dir.glob("*.json") if load_report_json(p) is not None]
    return sorted(paths, key=lambda p: p.stat().st_mtime, reverse=True)


# ═══════════════════════════════════════════════════════════════════════════════
# KPI CARDS
# ═══════════════════════════════════════════════════════════════════════════════

def render_kpi_cards(report: Dict):
    """Cards com os números principais do relatório"""
    findings = report.get('findings', [])
    histogram = report.get('histogram', {})
    total_goroutines = sum(v['count'] for v in histogram.values())
    blocked_at_findings = sum(f['total'] for f in findings)
    suppressed = sum(report.get('suppressed', {}).values())

    col1, col2, col3, col4, col5 = st.columns(5)
    col1.metric("🖥️ Perfis", report.get('profiles', 0))
    col2.metric("🧵 Goroutines", total_goroutines)
    col3.metric("🚨 Locais suspeitos", len(findings))
    col4.metric("⛔ Bloqueadas nos locais", blocked_at_findings)
    col5.metric("🙈 Suprimidas", suppressed)


# ═══════════════════════════════════════════════════════════════════════════════
# AGGRID TABLES
# ═══════════════════════════════════════════════════════════════════════════════

def _render_aggrid_table(df: pd.DataFrame, key: str, height: int = 400, selection: bool = False):
    """
    Renderiza uma tabela interativa com AgGrid.
    Fallback para st.dataframe se AgGrid não estiver disponível.
    """
    if not AGGRID_AVAILABLE or df.empty:
        st.dataframe(df, width="stretch", hide_index=True, height=height)
        return None

    gb = GridOptionsBuilder.from_dataframe(df)
    gb.configure_default_column(
        filterable=True,
        sortable=True,
        resizable=True,
        wrapText=True,
        autoHeight=True,
        minWidth=80,
    )
    gb.configure_grid_options(enableQuickFilter=True, domLayout='normal')
    gb.configure_pagination(paginationAutoPageSize=False, paginationPageSize=15)
    if selection:
        gb.configure_selection('single', use_checkbox=False)

    return AgGrid(
        df,
        gridOptions=gb.build(),
        height=height,
        update_mode=GridUpdateMode.SELECTION_CHANGED if selection else GridUpdateMode.NO_UPDATE,
        fit_columns_on_grid_load=True,
        theme='streamlit',
        key=key,
        allow_unsafe_jscode=False,
    )


def render_findings_table(report: Dict):
    """Tabela de locais suspeitos + pilha do representante"""

    st.markdown("### 🚨 Locais suspeitos")
    findings = report.get('findings', [])
    if not findings:
        render_empty_state("Nenhum local acima do limiar.", icon="✅")
        return

    search = st.text_input("🔍 Busca rápida (arquivo, função, tipo...)", key="findings_quick_search",
                           placeholder="Digite para filtrar...")
    display_df = findings_dataframe(findings)
    if search:
        mask = display_df.apply(lambda row: row.astype(str).str.contains(search, case=False, na=False).any(), axis=1)
        display_df = display_df[mask]
    st.caption(f"Mostrando {len(display_df)} de {len(findings)} locais")

    _render_aggrid_table(display_df, key="findings_grid", height=350)

    labels = [f"[{i}] {f['kind']} @ {f['file']}:{f['line']}" for i, f in enumerate(findings, 1)]
    selected = st.selectbox("Detalhar local", labels, key="finding_detail_select")
    if selected:
        finding = findings[labels.index(selected)]
        col1, col2 = st.columns([3, 2])
        with col1:
            rep = finding['representative']
            st.markdown(f"**Representante:** `{rep['instance']}` goroutine {rep['goroutine']} [{rep['state']}]")
            stack = "\n".join(f"{fr['symbol']}\n\t{fr['location']}" for fr in rep['frames'])
            if rep.get('created_by'):
                stack += f"\ncreated by {rep['created_by']['symbol']}\n\t{rep['created_by']['location']}"
            st.code(stack, language=None)
        with col2:
            render_instance_chart(finding)


# ═══════════════════════════════════════════════════════════════════════════════
# CHARTS
# ═══════════════════════════════════════════════════════════════════════════════

def render_instance_chart(finding: Dict):
    """Contagem por instância do local selecionado"""
    per_instance = pd.DataFrame(finding['per_instance'])
    if per_instance.empty:
        st.info("Sem contagens por instância")
        return
    per_instance.columns = ['Instância', 'Goroutines']
    fig = px.bar(
        per_instance.sort_values('Goroutines', ascending=False),
        x='Instância', y='Goroutines',
        title=f"📊 {finding['file']}:{finding['line']} por instância",
        color_discrete_sequence=[KIND_COLORS.get(finding['kind'], PLOTLY_COLORS['primary'])],
    )
    fig.update_layout(**PLOTLY_LAYOUT, height=350)
    st.plotly_chart(fig, width="stretch")


def render_charts(report: Dict):
    """Histograma de tipos de bloqueio e ranking de RMS"""

    col1, col2 = st.columns(2)

    with col1:
        hist = histogram_dataframe(report.get('histogram', {}), 'kind')
        hist = hist[hist['count'] > 0]
        if hist.empty:
            st.info("Sem goroutines nos perfis")
        else:
            fig = go.Figure(data=[go.Pie(
                labels=hist['kind'],
                values=hist['count'],
                hole=0.55,
                marker=dict(colors=[KIND_COLORS.get(k, '#cbd5e0') for k in hist['kind']],
                            line=dict(color='white', width=2)),
                textinfo='label+percent',
                textfont_size=12,
            )])
            fig.update_layout(
                **PLOTLY_LAYOUT,
                title='🧵 Goroutines por tipo de bloqueio',
                height=380,
                annotations=[dict(text=str(int(hist['count'].sum())), x=0.5, y=0.5, font_size=28, showarrow=False)],
            )
            st.plotly_chart(fig, width="stretch")

    with col2:
        findings = report.get('findings', [])
        if findings:
            ranking = pd.DataFrame([
                {'Local': f"{f['file']}:{f['line']}", 'RMS': f['rms'], 'Tipo': f['kind']}
                for f in findings
            ])
            fig = px.bar(
                ranking.iloc[::-1],
                x='RMS', y='Local', orientation='h', color='Tipo',
                title='🏆 Ranking por RMS',
                color_discrete_map=KIND_COLORS,
            )
            fig.update_layout(**PLOTLY_LAYOUT, height=380)
            st.plotly_chart(fig, width="stretch")
        else:
            st.info("Sem locais suspeitos para ranquear")

    st.markdown("### 📋 Tipos de bloqueio")
    categories = histogram_dataframe(report.get('categories', {}), 'tipo')
    _render_aggrid_table(categories, key="categories_grid", height=420)


def render_suppressed_table(report: Dict):
    st.markdown("### 🙈 Suprimidos")
    suppressed = report.get('suppressed', {})
    if not suppressed:
        st.info("Nenhuma função suprimida com goroutines bloqueadas.")
        return
    df = pd.DataFrame([{'Função': k, 'Goroutines': v} for k, v in suppressed.items()])
    _render_aggrid_table(df, key="suppressed_grid", height=250)


# ═══════════════════════════════════════════════════════════════════════════════
# MAIN ENTRY POINT
# ═══════════════════════════════════════════════════════════════════════════════

def render_report_viewer(report: Optional[Dict]):
    """
    Renderiza a página completa de um relatório.
    Chamada a partir do main.py.
    """
    if report is None:
        render_empty_state("Nenhum relatório carregado. Gere um com `python -m app.cli analyze` "
                           "ou analise um diretório de perfis pela barra lateral.")
        return

    cfg = report.get('config', {})
    st.caption(f"schema v{report.get('schema_version')} • capturado em {report.get('generated_at') or '-'} • "
               f"limiar {cfg.get('threshold')} • top {cfg.get('top_n')}")

    render_kpi_cards(report)
    st.divider()

    tab1, tab2, tab3 = st.tabs(["🚨 Locais", "📊 Gráficos", "🙈 Suprimidos"])
    with tab1:
        render_findings_table(report)
    with tab2:
        render_charts(report)
    with tab3:
        render_suppressed_table(report)

    if report.get('unclassified'):
        st.warning(f"{report['unclassified']} goroutine(s) com pilha não classificável foram ignoradas.")
