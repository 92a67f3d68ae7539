//! Density parameter, dense-round count and the `(D_i, Z_i)` recurrence.
//!
//! All logarithms are natural. `D_i` and `Z_i` are real-valued bounds and
//! are never rounded.

use serde::Serialize;

use crate::error::ScheduleError;

/// Default for the constant `K`. Small enough that moderate graphs can meet
/// the regularity conditions when ε is overridden.
pub const DEFAULT_K: f64 = 16.0;

/// `K` used by strict mode.
pub const STRICT_K: f64 = 1000.0;

/// Probability that a vertex proposes a color in the initial step.
pub const INITIAL_ACTIVATION_PROBABILITY: f64 = 0.01;

/// `ε = 100^(-√ln Δ) / (100 K)`.
pub fn epsilon_for(max_degree: f64, k: f64) -> f64 {
    let root = max_degree.ln().max(0.0).sqrt();
    100f64.powf(-root) / (100.0 * k)
}

/// `⌈√ln Δ⌉`, ignoring floating noise just above an integer.
pub fn num_dense_rounds(max_degree: f64) -> usize {
    let root = max_degree.ln().max(0.0).sqrt();
    (root - 1e-9).ceil().max(0.0) as usize
}

/// Regularity conditions: `D·δ >= K ln n` and `δ <= 1/K`, with `δ = D/Z`.
pub fn regularity_ok(d: f64, z: f64, n: usize, k: f64) -> bool {
    let delta = d / z;
    d * delta >= k * (n as f64).ln() && delta <= 1.0 / k
}

/// One step of the recurrence: `D' = 12 D √δ`, `Z' = D / √δ`.
pub fn advance_params(d: f64, z: f64) -> Result<(f64, f64), ScheduleError> {
    if !(d > 0.0 && d < z) {
        return Err(ScheduleError::Domain { d, z });
    }
    Ok(recurrence(d, z))
}

fn recurrence(d: f64, z: f64) -> (f64, f64) {
    let root = (d / z).sqrt();
    (12.0 * d * root, d / root)
}

/// The recurrence in log space, `(ln D, ln Z) -> (ln D', ln Z')`. Stays
/// finite far past the point where `D` and `Z` overflow, and has no domain
/// restriction.
pub fn advance_log_params(ln_d: f64, ln_z: f64) -> (f64, f64) {
    let half_ln_delta = 0.5 * (ln_d - ln_z);
    (12f64.ln() + ln_d + half_ln_delta, ln_d - half_ln_delta)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundParams {
    pub index: usize,
    pub d: f64,
    pub z: f64,
    pub delta: f64,
    /// `γ_i = 1 - 2√δ_{i-1}`; absent for round 0.
    pub gamma: Option<f64>,
    pub regular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub epsilon: f64,
    pub epsilon_overridden: bool,
    pub max_degree: f64,
    pub n: usize,
    pub alpha: f64,
    pub num_dense_rounds: usize,
    /// Rounds `0..=num_dense_rounds`.
    pub rounds: Vec<RoundParams>,
    /// `ε⁴Δ >= K ln n`.
    pub main_path: bool,
    /// Largest `i <= num_dense_rounds` with every round `j < i` regular.
    pub regularity_horizon: usize,
}

impl ScheduleParams {
    /// Number of dense steps the analysis covers.
    pub fn dense_steps(&self) -> usize {
        self.num_dense_rounds.min(self.regularity_horizon)
    }
}

/// Schedule with the formula value of ε.
pub fn build_schedule(max_degree: f64, n: usize, k: f64) -> Result<ScheduleParams, ScheduleError> {
    check_inputs(max_degree, n, k)?;
    build(max_degree, n, k, epsilon_for(max_degree, k), false)
}

/// Schedule with a caller-chosen ε in place of the formula.
pub fn build_schedule_with_epsilon(
    max_degree: f64,
    n: usize,
    k: f64,
    epsilon: f64,
) -> Result<ScheduleParams, ScheduleError> {
    check_inputs(max_degree, n, k)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ScheduleError::BadEpsilon(epsilon));
    }
    build(max_degree, n, k, epsilon, true)
}

fn check_inputs(max_degree: f64, n: usize, k: f64) -> Result<(), ScheduleError> {
    if max_degree.is_nan() || max_degree < 1.0 {
        return Err(ScheduleError::ZeroDegree);
    }
    if n == 0 {
        return Err(ScheduleError::ZeroVertices);
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(ScheduleError::BadK(k));
    }
    Ok(())
}

fn build(
    max_degree: f64,
    n: usize,
    k: f64,
    epsilon: f64,
    overridden: bool,
) -> Result<ScheduleParams, ScheduleError> {
    let num_rounds = num_dense_rounds(max_degree);
    let mut rounds = Vec::with_capacity(num_rounds + 1);
    let (mut d, mut z) = (3.0 * epsilon * max_degree, max_degree / 2.0);
    for index in 0..=num_rounds {
        let gamma = rounds
            .last()
            .map(|prev: &RoundParams| 1.0 - 2.0 * prev.delta.sqrt());
        rounds.push(RoundParams {
            index,
            d,
            z,
            delta: d / z,
            gamma,
            regular: regularity_ok(d, z, n, k),
        });
        (d, z) = recurrence(d, z);
    }
    let regularity_horizon = rounds[..num_rounds]
        .iter()
        .position(|r| !r.regular)
        .unwrap_or(num_rounds);
    Ok(ScheduleParams {
        k,
        epsilon,
        epsilon_overridden: overridden,
        max_degree,
        n,
        alpha: INITIAL_ACTIVATION_PROBABILITY,
        num_dense_rounds: num_rounds,
        rounds,
        main_path: epsilon.powi(4) * max_degree >= k * (n as f64).ln(),
        regularity_horizon,
    })
}
