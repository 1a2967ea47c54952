//! Residuals, simulated envelopes, predictive cross-validation and
//! variance-inflation screening.

mod cv;
mod envelope;
mod residuals;
mod vif;

pub use cv::{cross_validate, CvOptions, CvResult};
pub use envelope::{simulated_envelope, simulated_envelopes, EnvelopeOptions, EnvelopeResult};
pub use residuals::{fsmd_terms, pearson_residuals, quantile_residuals, QuantileResiduals, ResidualKind};
pub use vif::{variance_inflation, vif_select, VifRemoval, VifResult};
