//! Numerical laboratory for the cyclic power inequality
//!
//! ```text
//!     Σ_i (x_i^α − x_i) / (x_1 + … + x_i^α + … + x_n) ≥ 0   for ∏ x_i ≥ 1, α ≥ 1
//! ```
//!
//! together with every intermediate inequality of its two-case proof, the
//! reversed inequality for `1/(1-n) ≤ α ≤ 1`, the counterexample families
//! showing where the proof steps stop working, and adversarial search for the
//! open thresholds.
//!
//! * [`numerics`]: log-domain evaluation, feasibility, margins.
//! * [`propositions`]: one checker per inequality, with explicit hypotheses.
//! * [`families`]: parametric counterexample points and limit formulas.
//! * [`search`]: sampling, fuzzing, multistart simplex descent, bisection.

pub mod decimal;
pub mod error;
pub mod families;
pub mod numerics;
pub mod propositions;
pub mod real;
pub mod search;
pub mod serde_float;
pub mod wide;

pub use error::{Error, Result};
pub use numerics::{
    eval_sum, eval_sum_hp, eval_term, is_feasible, log_product, make_point, project_to_boundary,
    EvalPoint, Exponents, Margin, Precision, Tolerance, Verdict,
};
pub use propositions::{CheckOptions, CheckReport, PredicateId};
pub use wide::Wide;
