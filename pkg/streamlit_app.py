"""
Web front end for the irregular-drift SDE experiments.

Interactive rate runs and Yamada-Watanabe plots on top of the same
harness the CLI uses.

Run locally: streamlit run streamlit_app.py
"""
import sys
import os

# Add current directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import streamlit as st  # type: ignore

from src.data.models import NormKind, SchemeKind
from src.errors import SimulationError
from src.harness.core import RateHarness
from src.tools import yamada_watanabe
from src.tools.catalog import ProblemCatalog


# Page configuration
st.set_page_config(
    page_title="Irregular-drift SDE experiments",
    page_icon="📈",
    layout="wide",
    initial_sidebar_state="expanded"
)

# Initialize session state
if 'harness' not in st.session_state:
    st.session_state.harness = RateHarness()

if 'report' not in st.session_state:
    st.session_state.report = None


def format_acceptance_badge(report) -> str:
    """Return emoji badge for the acceptance verdict."""
    if report.acceptance is None:
        return '⚪'
    return '🟢' if report.acceptance.passed else '🔴'


def rate_tab(report):
    col1, col2, col3 = st.columns(3)
    with col1:
        slope = report.fitted_slope
        st.metric("Fitted slope", "n/a" if slope is None else f"{slope:+.3f}")
    with col2:
        theory = report.theory_slope
        st.metric("Theory slope", "n/a" if theory is None else f"{theory:+.3f}", report.theory_kind)
    with col3:
        st.metric("Acceptance", format_acceptance_badge(report))

    if report.exact:
        st.info("All errors vanish: the scheme is exact for this problem.")
    if report.dropped_n is not None:
        st.caption(f"n = {report.dropped_n} dropped as a pre-asymptotic point")

    rows = {
        "n": [point.n for point in report.per_n],
        "error": [point.error for point in report.per_n],
        "std_error": [point.std_error for point in report.per_n],
    }
    st.dataframe(rows, use_container_width=True)
    positive = [(point.n, point.error) for point in report.per_n if point.error > 0]
    if positive:
        st.line_chart({
            "log2 n": [np.log2(n) for n, _ in positive],
            "log2 error": [np.log2(e) for _, e in positive],
        }, x="log2 n", y="log2 error")


def yw_tab():
    st.markdown("### Yamada-Watanabe functions")
    col1, col2 = st.columns(2)
    with col1:
        delta = st.number_input("delta", min_value=1.01, value=2.0)
    with col2:
        eps = st.number_input("eps", min_value=1e-6, max_value=0.999, value=0.25, format="%.6f")
    try:
        f = yamada_watanabe.build(delta, eps)
    except SimulationError as e:
        st.error(f"Error: {e}")
        return
    z, psi, slope, curvature = map(list, zip(*yamada_watanabe.sample_table(f)))
    st.line_chart({"z": z, "psi": psi, "phi'": slope}, x="z", y=["psi", "phi'"])
    report = yamada_watanabe.check_properties(f, yamada_watanabe.default_grid(2_000))
    for name in ("phi1", "phi2", "phi3", "phi4"):
        count = report.violations.get(name, 0)
        st.markdown(f"{'🟢' if count == 0 else '🔴'} **{name}**: {count} violations")
    st.caption(f"normalization error {report.extras['normalization_error']:.2e}")


def main():
    """Main Streamlit application."""

    st.title("📈 Euler-Maruyama for irregular drift")
    st.markdown("Strong-error rates on shared Brownian paths")
    st.divider()

    with st.sidebar:
        st.header("Experiment")
        problem = st.selectbox("Problem", options=ProblemCatalog().list_problems())
        family = st.text_input("Family parameter override", placeholder="e.g. holder_diffusion(0.25)")
        scheme = st.selectbox("Scheme", options=[s.value for s in SchemeKind])
        norm = st.selectbox("Norm", options=[n.value for n in NormKind])
        p_exponent = st.number_input("p", min_value=1.0, max_value=8.0, value=1.0)
        max_level = st.slider("Largest n = 2^k", min_value=6, max_value=10, value=8)
        ref_level = st.slider("Reference level L", min_value=max_level + 1, max_value=14, value=max_level + 4)
        paths = st.number_input("Paths", min_value=100, max_value=100_000, value=2_000, step=100)
        seed = st.number_input("Seed", min_value=0, value=0)

        if st.button("▶️ Run", type="primary", use_container_width=True):
            with st.spinner("Simulating..."):
                try:
                    harness = st.session_state.harness
                    spec = harness.spec_for(
                        family.strip() or problem,
                        scheme=SchemeKind(scheme),
                        norm=NormKind(norm),
                        p_exponent=float(p_exponent),
                        n_list=tuple(2 ** k for k in range(4, max_level + 1)),
                        ref_level_L=int(ref_level),
                        paths=int(paths),
                        master_seed=int(seed),
                    )
                    st.session_state.report = harness.run(spec)
                    st.success("Run complete!")
                except SimulationError as e:
                    st.error(f"Error: {e}")

    tab1, tab2 = st.tabs(["📉 Rate", "🧮 Yamada-Watanabe"])
    with tab1:
        if st.session_state.report is None:
            st.info("👈 Choose a problem and click 'Run' to begin")
        else:
            rate_tab(st.session_state.report)
    with tab2:
        yw_tab()


if __name__ == "__main__":
    main()
