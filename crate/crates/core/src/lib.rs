//! Exact-rational engine for budget-balanced, truthful, symmetric ranking
//! mechanisms that allocate a single object.
//!
//! A ranking rule gives the agent with the `j`-th highest value the object
//! with probability `pi_j`; tied agents share their ranks' probabilities.
//! The crate decides which rules can be paired with a payment rule that is
//! truthful, symmetric and exactly budget balanced, computes those payments
//! three independent ways, and constructs the rule that maximizes the
//! probability of allocating to the highest-valued agent, together with a
//! linear-programming certificate of its optimality.
//!
//! All arithmetic is exact; see [`Rational`].

pub mod error;
pub mod exactnum;
pub mod harness;
pub mod optimal;
pub mod payments;
pub mod revenue;
pub mod rules;
pub mod verify;

pub use error::{Error, Result};
pub use exactnum::{binomial, psi, Rational};
pub use harness::{convergence_table, gl_convergence_threshold, random_profiles, sample_lottery, ConvergenceRow};
pub use optimal::{
    closed_form_ell, dual_certificate, is_dominated_fosd, r_optimal_rule, select_ell, DualCertificate,
    LinearProgram, OptimalRuleReport,
};
pub use payments::{
    payments_recursive, payments_subset_formula, payments_two_step, run_mechanism, Outcome, PaymentMethod,
};
pub use revenue::{revenue_view, total_revenue, RevenueView};
pub use rules::{
    efficient_rule, equal_share_rule, gl_rule, is_implementable, two_step_rule, AllocationRule, RankingRule,
    TwoStepRule, ValuationProfile,
};
pub use verify::{check_expost_ir, check_residual_balance, check_satisfactory, GridSpec, VerificationReport};
