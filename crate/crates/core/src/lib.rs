//! Bivariate lack-of-memory (BLM) lifetime distributions.
//!
//! A BLM law is determined by two marginals `F`, `G` and a diagonal rate
//! `θ`. The crate builds and validates such laws ([`blm`]), provides the
//! classical families ([`families`]), closed-form transforms and moments with
//! quadrature cross-checks ([`moments`]), total-positivity and dependence
//! diagnostics ([`dependence`]), stochastic-order comparisons ([`orders`])
//! and exact samplers ([`simulate`]). Models can be described in JSON
//! ([`model`]).

pub mod blm;
pub mod dependence;
pub mod error;
pub mod families;
pub mod model;
pub mod moments;
pub mod numdiff;
pub mod orders;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod simulate;
pub mod univariate;

pub use blm::{from_hazards, make_blm, BlmDecomposition, BlmDistribution, Side, ValidationMode, ValidationReport};
pub use error::{Error, Result};
pub use families::{
    block_basu, freund, freund_to_block_basu, generalized_marshall_olkin, marshall_olkin, Family, FreundParams,
    GmoDistribution, MoParams,
};
pub use model::{MarginalSpec, Model, ModelSpec};
pub use report::{Grid, GridReport, Verdict};
pub use univariate::{Marginal, MarginalRef};
