"""Exact finite-blocklength bounds and semi-finite-length expansions.

The package computes, for i.i.d. discrete models:

* exact smooth min-entropy / key-length / hypothesis-testing bounds from
  the full log-likelihood-ratio spectrum (``spectrum``, ``bounds_exact``),
* divergence statistics and the constant terms of the asymptotic
  expansions (``quantities``),
* theorem-level expansions up to the constant term and classical tail
  approximations (``asymptotics``),
* task adapters for channels, wire-tap pairs, BPSK signaling and
  correlated sources (``tasks``),
* a text input format and the ``flb`` command line (``textfmt``, ``cli``).
"""

from .asymptotics import (
    EQUALITY,
    Expansion,
    TailEstimate,
    bahadur_rao_log_tail,
    edgeworth_cdf,
    expand_channel,
    expand_ht,
    expand_source,
    expand_source_side,
    expand_srng,
    expand_wiretap,
    tilted_log_tail,
)
from .bounds_exact import (
    BoundResult,
    beta_eps,
    d_dt_eps,
    d_h_eps,
    delta_min,
    ell_2_eps,
    ell_min_eps,
    h_sp_eps,
    hmin_smooth_eps,
    legacy_bounds_w,
    renyi_cond,
    sacrifice,
)
from .measures import (
    ConditionalKernel,
    DiscreteMeasure,
    JointMeasure,
    MeasureError,
    compose,
    counting_measure,
    marginal,
    product_reference,
    uniform,
)
from .quantities import (
    DivergenceStats,
    cond_entropies,
    conditional_stats,
    ddt_constant,
    dh_constant,
    divergence_stats,
    f_constant,
    hmin_constant,
    gauss_cdf,
    gauss_inv,
    v_of,
)
from .spectrum import (
    CgfView,
    LatticeInfo,
    LlrSpectrum,
    SpectrumError,
    build_spectrum,
    convolve_iid,
    detect_lattice,
    dump_csv,
    lattice_span,
)
from .tasks import (
    BpskPair,
    ConditionalAdditiveChannel,
    WiretapPair,
    bpsk_expansions,
    bpsk_stats,
    bsc_channel,
    bsc_kernel,
    channel_spectrum,
    correlated_rv_expansions,
    degraded_witness_bsc,
    wiretap_bsc_expansions,
    wiretap_bsc_pair,
    wiretap_bsc_tables,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
