"""
Interface Streamlit do leakwatch: relatórios de frota e execução de cenários

    streamlit run app/main.py
"""
import streamlit as st
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from config.settings import OUTPUT_DIR, THRESHOLD, TOP_N, DEFAULT_SEED, get_config_status, validate_config
from app.leakprof import AnalyzerConfig, AnalyzerError, analyze_fleet
from app.profile import parse_profile_dir
from app.report_generator import write_report, load_report_json, report_to_dict
from app.report_viewer import render_header, render_report_viewer, list_reports
from app.scenarios import get_scenario, scenario_names
from app.runtime import SchedulerConfig
from app.goleak import goleak_verify
from app.logger import log_error


# Configuração da página
st.set_page_config(
    page_title="leakwatch",
    page_icon="🧵",
    layout="wide",
    initial_sidebar_state="expanded"
)

DEFAULT_SESSION_STATE = {
    'report': None,
    'report_path': None,
}


def init_session_state():
    for key, default in DEFAULT_SESSION_STATE.items():
        if key not in st.session_state:
            st.session_state[key] = default


def render_sidebar():
    """Escolha do relatório e análise de um diretório de perfis"""
    st.sidebar.markdown("## 📂 Relatórios")
    report_dir = st.sidebar.text_input("Diretório", value=str(OUTPUT_DIR))
    reports = list_reports(report_dir)
    if reports:
        names = [p.name for p in reports]
        chosen = st.sidebar.selectbox("Relatório", names)
        if st.sidebar.button("Abrir", type="primary"):
            path = reports[names.index(chosen)]
            st.session_state.report = load_report_json(path)
            st.session_state.report_path = str(path)
    else:
        st.sidebar.caption("Nenhum relatório JSON neste diretório.")

    st.sidebar.divider()
    st.sidebar.markdown("## 🔬 Analisar perfis")
    target = st.sidebar.text_input("Perfis (diretório ou glob)", value="")
    threshold = st.sidebar.number_input("Limiar", min_value=1, value=THRESHOLD, step=1)
    top_n = st.sidebar.number_input("Top N", min_value=1, value=TOP_N, step=1)
    if st.sidebar.button("Analisar") and target:
        with st.spinner("Lendo perfis..."):
            profiles, failures = parse_profile_dir(target)
        for path, message in failures:
            st.sidebar.warning(f"{Path(path).name}: {message}")
        if not profiles:
            st.sidebar.error("Nenhum perfil legível.")
            return
        try:
            report = analyze_fleet(profiles, AnalyzerConfig(int(threshold), int(top_n)))
        except AnalyzerError as e:
            st.sidebar.error(str(e))
            return
        written = write_report(report, report_dir)
        st.session_state.report = report_to_dict(report)
        st.session_state.report_path = str(written['json'])
        st.sidebar.success(f"Relatório gravado em {written['json']}")


def render_scenarios_tab():
    """Executa um cenário embutido e mostra o veredito do verificador"""
    st.markdown("## 🧪 Cenários")
    col1, col2, col3 = st.columns([3, 1, 1])
    with col1:
        name = st.selectbox("Cenário", scenario_names())
    with col2:
        seed = st.number_input("Semente", min_value=0, value=DEFAULT_SEED, step=1)
    scenario = get_scenario(name)
    with col3:
        fixed = st.checkbox("Corrigido", value=False, disabled=not scenario.has_fixed)
    st.caption(scenario.description)

    if st.button("Executar", type="primary"):
        try:
            program, expectation = scenario.build(fixed=fixed)
            verdict = goleak_verify(program, SchedulerConfig(seed=int(seed)), conditions=expectation.conditions)
        except Exception as e:
            log_error("ui", f"falha ao executar '{name}'", e)
            st.error(str(e))
            return

        if verdict.passed:
            st.success(f"{program.name}: nenhuma goroutine remanescente")
        else:
            st.error(f"{program.name}: {len(verdict.findings)} goroutine(s) remanescente(s)")
            for finding in verdict.findings:
                st.markdown(f"- {finding}")
            st.code(verdict.stacks, language=None)

        with st.expander("Tabela final de tarefas"):
            st.code(verdict.run.task_table(), language=None)
        with st.expander("Trace"):
            st.code(verdict.run.trace_text(), language=None)


def render_settings_tab():
    st.markdown("## ⚙️ Configurações")
    errors = validate_config()
    for error in errors:
        st.error(error)
    st.json(get_config_status())


def main():
    """Função principal"""
    init_session_state()
    render_header("🧵 leakwatch", "Goroutines bloqueadas: simulação, verificação e análise de frota")
    render_sidebar()

    tab1, tab2, tab3 = st.tabs(["📈 Relatório", "🧪 Cenários", "⚙️ Configurações"])
    with tab1:
        if st.session_state.report_path:
            st.caption(f"📄 {st.session_state.report_path}")
        render_report_viewer(st.session_state.report)
    with tab2:
        render_scenarios_tab()
    with tab3:
        render_settings_tab()


if __name__ == "__main__":
    main()
