//! Numerical tolerances used across the crate and its verification checks.
//!
//! All values assume `f64` and the default integrator resolution
//! ([`DEFAULT_STEPS_PER_UNIT`]).

/// RK4 steps per unit of time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 2000;

/// Orbits leaving this radius are treated as runaway.
pub const ESCAPE_RADIUS: f64 = 3.0;

/// Largest spatial displacement allowed for a single integration sub-step.
pub const MAX_SPATIAL_STEP: f64 = 0.05;

/// Maximum number of step-halving levels before a step is rejected.
pub const MAX_HALVING_LEVELS: u32 = 20;

/// Samples closer than this to the winding centre count as hitting it.
pub const CENTER_HIT: f64 = 1e-12;

/// Slack for annulus membership of sampled loops.
pub const ANNULUS_SLACK: f64 = 1e-9;

/// Boundary condition `H = 0` on the unit circle for closed-form families.
pub const BOUNDARY_VANISHING: f64 = 1e-12;

/// Boundary condition accepted by `build_mollified`.
pub const MOLLIFY_BOUNDARY: f64 = 1e-10;

/// Endpoint mismatch accepted for a loop to count as closed.
pub const LOOP_CLOSURE: f64 = 1e-6;

/// Residual `|phi^k(z) - z|` required of a reported periodic point.
pub const PERIODIC_RESIDUAL: f64 = 1e-9;

/// Newton stops once the numerical residual falls below this.
pub const NEWTON_RESIDUAL: f64 = 1e-12;

/// Cluster radius for deduplicating periodic points.
pub const CLUSTER_RADIUS: f64 = 1e-6;

/// `||z| - 1|` below which a point is classified as a boundary point.
pub const BOUNDARY_BAND: f64 = 1e-8;

/// Bisection tolerance for radial level isolation.
pub const ROOT_BISECTION: f64 = 1e-12;

/// Level condition `|g'(s) + pi k|` required of tangent-line levels.
pub const LEVEL_RESIDUAL: f64 = 1e-10;

/// Lower bound slack used by the staircase gap certificate.
pub const GAP_SLACK: f64 = 1e-6;

/// Slack of the quantitative Brouwer estimate.
pub const BROUWER_SLACK: f64 = 1e-6;

/// Slack of the Calabi/mean-action bracket.
pub const BRACKET_SLACK: f64 = 1e-6;

/// Margin below one for annulus windings in the winding-bound check.
pub const WIND_MARGIN: f64 = 1e-3;

/// Slack for closed-form membership comparisons.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;
