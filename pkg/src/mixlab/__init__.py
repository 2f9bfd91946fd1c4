"""Finite reversible Markov chains: mixing profiles, hitting times, and the
constructions separating them."""

from .chain import (
    ChainSpec,
    DistanceCurve,
    DistributionVector,
    MixingTime,
    build_chain,
    dbar,
    default_horizon,
    distance_curve,
    evolve,
    kernel_power_sweep,
    lp_distance,
    mixing_time,
    mixing_time_from_curve,
    point_mass,
    separation,
    stationary_distribution,
    tv_distance,
    worst_tv,
    worst_tv_from,
)
from .spectral import (
    CheegerEstimate,
    SpectralSummary,
    cheeger_bounds,
    cheeger_exact,
    eigen_summary,
    hitting_from_stationary_tail,
    l2_contraction_bound,
    product_condition_report,
)
from .hitting import (
    HittingDistribution,
    balanced_check,
    convolve,
    fill_geometric_representation,
    hitting_pmf,
    log_concavity_check,
    mode_and_spread,
    paths_decomposition_check,
    stochastic_dominance,
    tail_quantile,
)
from .graphs import GraphSpec, WeightedMultigraph, expander_3regular, lazy_srw_chain
from .constructions import (
    aldous_chain,
    basic_segment_chain,
    bd_projection,
    build_H1,
    build_H2,
    build_H3,
    build_H4,
    build_Tn,
    build_Tn_prime,
    example1,
    example2,
    example3,
    example4,
    example5,
    ratio_two_variant,
    stretched_excision,
)
from .large_deviation import (
    empirical_rate,
    phi,
    psi,
    psi_derivatives_at_6,
    solve_sM,
)
from .analysis import (
    cutoff_sweep,
    hit_vs_mix_sandwich,
    lp_mixing_comparison,
    precutoff_ratio,
    run_verification_suite,
    sep_profile_vs_hitting,
    tv_profile_vs_hitting,
    verify_overlap_lower_bound,
    verify_sep_from_tv_rel,
    verify_tv_sep_chain,
    verify_window_binomial,
    window_one_analysis,
)

__version__ = "0.1.0"
