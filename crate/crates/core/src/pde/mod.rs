//! Particle approximation of 1-D quasilinear PDEs `∂_t y = Σ_l a_l(t, x, y) ∂_x^l y`
//! through a mollified interaction kernel.

pub mod dsl;
pub mod expr;
pub mod kernel;
pub mod mollifier;
pub mod operator;
pub mod sigma;
pub mod solve;
pub mod spectral;

pub use dsl::{parse_pde, parse_pde_on, Domain, PdeSpec};
pub use expr::{parse_expr, Expr};
pub use kernel::{gaussian_pde_kernel, hermite, MollifiedKernel, Variant};
pub use mollifier::{polynomial_mollifier, Mollifier};
pub use operator::{apply_a, apply_a_eps, grid_inner};
pub use sigma::{sigma_eps, SigmaMatrices};
pub use solve::{
    l2_error, particle_pde_solve, pde_sweep, EpsPolicy, particle_pde_solve_with, reference_pde_solve, schedule_experiment, scaling_schedule,
    stable_dt, ReferenceOptions, Schedule, ScheduleRow, ScheduleTable,
};
pub use spectral::FineSolution;
