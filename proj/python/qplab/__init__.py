"""Grid densities, information functionals, kernels, evolvers and stochastic paths."""

from ._core import (
    ConfigError,
    DomainError,
    NumericalError,
    QplabError,
    __version__,
    evolve_fokker_planck,
    evolve_quantum,
    fisher_extremum_pdf,
    free_propagator,
    functionals,
    git_blob_hash,
    heat_kernel,
    hydro_fields,
    kernel_row,
    large_friction_moments,
    max_entropy_pdf,
    mehler_kernel,
    oscillator_propagator,
    ou_covariance,
    ou_transition,
    recoil_trajectory,
    run,
    sample_density,
    simulate_sde,
    stationary_drift,
    verify,
)
