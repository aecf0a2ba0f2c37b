"""Three-level randomness test audit (C++ core)."""

from ._core import (
    BitSource,
    InapplicableTest,
    InsufficientInput,
    binom_pmf,
    build_categories,
    chi2_sf,
    erfc,
    excursion_pi,
    igamc,
    run_test,
    run_three_level,
    sample_corr_test,
    savir2_cell_probs,
    test_ids,
    __version__,
)

__all__ = [
    "BitSource",
    "InapplicableTest",
    "InsufficientInput",
    "binom_pmf",
    "build_categories",
    "chi2_sf",
    "erfc",
    "excursion_pi",
    "igamc",
    "run_test",
    "run_three_level",
    "sample_corr_test",
    "savir2_cell_probs",
    "test_ids",
    "__version__",
]
