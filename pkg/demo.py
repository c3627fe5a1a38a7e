"""
Demo script for the irregular-drift SDE experiments.
A small tour: a rate run, a scheme comparison, the Yamada-Watanabe checks,
the coefficient assumptions and the Gaussian tail bound.
"""
from src.harness.core import RateHarness
from src.data.models import SchemeKind
from src.reporting import format_assumptions, format_properties, format_rate, format_schemes
from src.tools import diagnostics, yamada_watanabe
from src.tools.assumptions import verify_assumptions


def run_demo():
    """Run demonstration of the experiment harness at a small scale."""
    print("\n" + "=" * 80)
    print("Irregular-drift Euler-Maruyama - Demo")
    print("=" * 80 + "\n")

    harness = RateHarness()

    # Demo 1: sign drift, sup norm
    print("\n" + "=" * 80)
    print("DEMO 1: Strong rate for the sign drift (sup norm)")
    print("=" * 80)
    spec = harness.spec_for(
        "sign_drift", n_list=(16, 32, 64, 128), ref_level_L=10, paths=2_000, master_seed=42,
    )
    print(format_rate(harness.run(spec)))

    # Demo 2: the three schemes on shared paths
    print("\n\n" + "=" * 80)
    print("DEMO 2: Scheme comparison for holder_diffusion(0.25)")
    print("=" * 80)
    spec = harness.spec_for(
        "holder_diffusion(0.25)", n_list=(16, 32, 64, 128), ref_level_L=10, paths=2_000, master_seed=7,
    )
    print(format_schemes(harness.compare_schemes(spec, tuple(SchemeKind))))

    # Demo 3: test functions used in the pathwise uniqueness argument
    print("\n\n" + "=" * 80)
    print("DEMO 3: Yamada-Watanabe functions")
    print("=" * 80)
    grid = yamada_watanabe.default_grid(2_000)
    reports = [
        yamada_watanabe.check_properties(yamada_watanabe.build(delta, eps), grid)
        for delta, eps in yamada_watanabe.proof_parameters(1024)
    ]
    print(format_properties("Yamada-Watanabe properties", reports))

    # Demo 4: assumption spot checks and Komatsu's bound
    print("\n\n" + "=" * 80)
    print("DEMO 4: Coefficient assumptions and the Gaussian tail bound")
    print("=" * 80)
    print(format_assumptions(verify_assumptions(harness.catalog.get_problem("monotone_2d"), 2_000, seed=0)))
    print(format_properties("Komatsu tail bound", [diagnostics.komatsu_check()]))

    print("\n\n" + "=" * 80)
    print("Demo Complete!")
    print("=" * 80 + "\n")


if __name__ == "__main__":
    run_demo()
