"""Dynamical Casimir effect between two concentric spherical shells."""
from .breathing import (
    BreathingMotion,
    Scenario,
    closed_form_N,
    no_creation_condition,
    principal_resonance_shift,
    resonance,
    resonance_scan,
    resonant_N_l0,
    second_factor_bound_check,
)
from .coupling import (
    c_alpha,
    coupling_matrix,
    harmonic_motion,
    load_trajectory,
    mu,
    static_motion,
    tabulated_motion,
)
from .dynamics import (
    BogoliubovState,
    evolve_bogoliubov_full,
    particle_number_full,
    particle_number_perturbative,
)
from .errors import DegenerateRootError, DomainError, IntegrationError, SpectralError
from .specfun import cross_product_D, sph_bessel_j, sph_bessel_j_prime, sph_bessel_y, sph_bessel_y_prime
from .spectrum import Mode, ShellGeometry, domega_dr, eval_F, find_eigenfrequencies, radial_mode

__all__ = [name for name in dir() if not name.startswith("_")]
