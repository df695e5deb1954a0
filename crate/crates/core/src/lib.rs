//! Exact symbolic calculus of variations on finite-order jet bundles.
//!
//! Everything is computed over polynomial coefficients with `BigRational`
//! arithmetic; no floating point enters except in the numeric quadrature
//! helpers, and no simplification step is heuristic. Forms are kept in the
//! adapted contact basis `{dx^lambda, theta^i_p}`, which makes the
//! horizontal/vertical splitting of the exterior differential a term-level
//! operation.
//!
//! Module map:
//! - [`multiindex`]: symmetric multi-indices and their combinatorics.
//! - [`jetalg`]: jet-chart coordinates, polynomial expressions, total
//!   derivatives.
//! - [`forms`]: differential forms in the contact basis, `d`, `d_h`, `d_v`,
//!   horizontalization.
//! - [`varcalc`]: first/second variation, source-form decomposition, momenta,
//!   the Helmholtz obstruction tensor.
//! - [`inverse`]: fiber homotopy, Volterra-Vainberg construction, minimal
//!   Lagrangians, null (divergence) Lagrangians.

pub mod multiindex;

pub mod jetalg;

pub mod forms;

pub mod varcalc;

pub mod inverse;

mod solve;

pub use forms::{BasisCovector, Form};
pub use jetalg::{Expr, JetCoordinate, JetSpec, Monomial};
pub use multiindex::MultiIndex;
pub use varcalc::{Gauge, HelmholtzTensor, Lagrangian, Momentum, SourceForm};
