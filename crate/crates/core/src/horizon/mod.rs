//! Horizon functions `φ∞` of mirror potentials and the gauges they define.
//!
//! * [`horizon_separable`] evaluates the closed-limit formula
//!   `φ∞(β̄) ∝ lim_{η→0} η ϕ⁻¹(Σᵢ ϕ(β̄ᵢ/η))` for separable even potentials.
//! * [`horizon_shape_numeric`] approximates the horizon shape by normalized
//!   sublevel sets `S_c / R_c` for growing levels `c`.
//! * [`Gauge`] is the resulting asymmetric norm with dual-gauge and
//!   subdifferential access.

mod gauge;
mod probe;
mod separable;

pub use gauge::{Gauge, GaugeKind, GaugeSummary, SampledGauge, Subdifferential};
pub use probe::{
    gauge_from_probe, horizon_shape_numeric, DirectionGrid, HorizonShapeProbe, ProbeOptions,
    ProbeSummary, DEFAULT_DEGENERACY_THRESHOLD, DEFAULT_GAP_TOLERANCE,
};
pub use separable::{gauge_from_separable, horizon_separable, HorizonEstimate, SeparableOptions};

/// Gauge of the closed-form horizon of a shipped separable potential, if known.
pub fn named_horizon_gauge<T: crate::Scalar>(
    p: &crate::potentials::ScalarPotential<T>,
) -> Option<Gauge<T>> {
    use crate::potentials::ScalarKind;
    match p.kind() {
        ScalarKind::Quadratic => Some(Gauge::l2()),
        ScalarKind::Power { p } => Gauge::lp(*p).ok(),
        ScalarKind::CoshEntropy => Some(Gauge::linf()),
        ScalarKind::HypEntropy => Some(Gauge::l1()),
        ScalarKind::Custom(_) => None,
    }
}
