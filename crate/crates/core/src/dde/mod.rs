//! Discrete density evolution for the normalized min-sum decoder, and the
//! width search built on it.
//!
//! Messages live on a uniform LLR grid (`k * step`, saturating at
//! `half * step`). The channel density comes from the integer reliability
//! mapping, symmetrized so that "bit 0 sent" can be assumed throughout.

mod density;
mod diffevo;
mod evolution;
mod pmf;
mod widths;

pub use density::{
    analytic_densities, channel_density, BitPlaneDensity, ChannelDensities, LabeledSample,
};
pub use diffevo::{DeOutcome, DifferentialEvolution};
pub use evolution::{check_update, dde_run, error_fraction, variable_update, ZeroMass};
pub use pmf::{DdeGrid, MessagePmf};
pub use widths::{feasible_box, optimize_widths, width_cost, DensitySource, WidthResult, WidthSearch};
