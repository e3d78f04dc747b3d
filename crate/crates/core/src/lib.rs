//! Numerical laboratory for resolvents of holomorphic semigroup generators
//! on the unit disk.
//!
//! A generator `f(z) = p(z) z` is described by a [`GeneratorSpec`], with `p`
//! given through its Herglotz representation. The crate solves the resolvent
//! equation `w + λ f(w) = z`, evaluates closed-form distortion, accretivity
//! and starlikeness bounds for `G_λ = (Id + λf)⁻¹`, integrates the generated
//! semigroup, and checks the bounds against sampled values in seeded
//! verification suites.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod herglotz;
pub mod resolvent;
pub mod semigroup;
pub mod starlike;
pub mod verify;

pub use bounds::{calc_order, distortion_coefficients, BoundSet, CertifiedOrder};
pub use error::{Error, Result};
pub use herglotz::{sample_generator, Atom, Disk, GeneratorSpec, SamplerConfig};
pub use resolvent::{solve_resolvent, ResolventSolution, SolverOptions};
pub use semigroup::{integrate, product_formula, squeeze_check, Trajectory};
pub use starlike::{empirical_order, starlike_functional, theorem_vs_empirical};
pub use verify::{run_suite, Suite, SuiteConfig, VerificationReport};
