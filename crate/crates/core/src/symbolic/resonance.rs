//! Resonance geometry of cubic Schrödinger interactions.
//!
//! A frequency quadruple interacts through `Δ⁴ξ = ξ1-ξ2+ξ3-ξ4` and
//! `Δ⁴ξ² = ξ1²-ξ2²+ξ3²-ξ4²`; the resonant set is where both vanish,
//! equivalently `{ξ1,ξ3} = {ξ2,ξ4}`. The Galilean-invariant replacement of
//! `Δ⁴ξ²` is `Δ̃⁴ξ² = ((ξ1-ξ3)² - (ξ2-ξ4)²)/2`.
//!
//! In the linear coordinates
//! `η1 = Δ⁴ξ, η2 = ξ1+ξ2-ξ3-ξ4, η3 = ξ1-ξ2-ξ3+ξ4, η4 = ξ1+ξ2+ξ3+ξ4`
//! one has `η2 η3 = 2 Δ̃⁴ξ²`,
//! `δξ^hi = max(|η1|,|η2|,|η3|)` and `δξ^med = max(|η1|, min(|η2|,|η3|))`.

use serde::Serialize;

/// `Δ⁴ξ`.
pub fn delta4(xi: [f64; 4]) -> f64 {
    xi[0] - xi[1] + xi[2] - xi[3]
}

/// `Δ⁴ξ²`.
pub fn delta4_sq(xi: [f64; 4]) -> f64 {
    xi[0] * xi[0] - xi[1] * xi[1] + xi[2] * xi[2] - xi[3] * xi[3]
}

/// Galilean-invariant `Δ̃⁴ξ²`.
pub fn tilde_delta4_sq(xi: [f64; 4]) -> f64 {
    0.5 * ((xi[0] - xi[2]).powi(2) - (xi[1] - xi[3]).powi(2))
}

pub fn xi_avg(xi: [f64; 4]) -> f64 {
    0.25 * (xi[0] + xi[1] + xi[2] + xi[3])
}

/// Linear change to interaction-adapted coordinates.
pub fn to_eta(xi: [f64; 4]) -> [f64; 4] {
    [
        xi[0] - xi[1] + xi[2] - xi[3],
        xi[0] + xi[1] - xi[2] - xi[3],
        xi[0] - xi[1] - xi[2] + xi[3],
        xi[0] + xi[1] + xi[2] + xi[3],
    ]
}

pub fn from_eta(eta: [f64; 4]) -> [f64; 4] {
    [
        0.25 * (eta[0] + eta[1] + eta[2] + eta[3]),
        0.25 * (-eta[0] + eta[1] - eta[2] + eta[3]),
        0.25 * (eta[0] - eta[1] - eta[2] + eta[3]),
        0.25 * (-eta[0] - eta[1] + eta[2] + eta[3]),
    ]
}

/// Pairing diameters of Eq-style `δξ^hi` / `δξ^med`.
pub fn deltas(xi: [f64; 4]) -> (f64, f64) {
    let eta = to_eta(xi);
    deltas_eta(&eta)
}

pub fn deltas_eta(eta: &[f64; 4]) -> (f64, f64) {
    let a1 = eta[0].abs();
    let a2 = eta[1].abs();
    let a3 = eta[2].abs();
    let hi = a1.max(a2).max(a3);
    let med = a1.max(a2.min(a3));
    (hi, med)
}

/// C^7 polynomial step equal to 1 for `t <= a` and 0 for `t >= b`.
///
/// The transition is the symmetric smoothstep with derivative `∝ s^7(1-s)^7`;
/// polynomial transitions keep the Fourier tails of the region weights short,
/// which the separable fast paths depend on.
pub fn smooth_down(t: f64, a: f64, b: f64) -> f64 {
    debug_assert!(b > a);
    if t <= a {
        return 1.0;
    }
    if t >= b {
        return 0.0;
    }
    let s = (t - a) / (b - a);
    1.0 - smoothstep7(s)
}

/// `∫_0^x t^7 (1-t)^7 dt / B(8,8)`, the C^7 monotone step on [0, 1].
fn smoothstep7(x: f64) -> f64 {
    // Expand (1-t)^7 and integrate term by term; coefficients of x^{8+j}.
    const COEF: [f64; 8] = [
        1.0 / 8.0,
        -7.0 / 9.0,
        21.0 / 10.0,
        -35.0 / 11.0,
        35.0 / 12.0,
        -21.0 / 13.0,
        7.0 / 14.0,
        -1.0 / 15.0,
    ];
    const NORM: f64 = 51480.0; // 1 / B(8,8)
    let x8 = x.powi(8);
    let mut acc = 0.0;
    let mut xp = x8;
    for c in COEF {
        acc += c * xp;
        xp *= x;
    }
    acc * NORM
}

/// Smoothed absolute value with analyticity width `nu`.
fn sabs(x: f64, nu: f64) -> f64 {
    (x * x + nu * nu).sqrt()
}

/// Smoothed min/max pair used by the region weights; the smoothing keeps the
/// weights free of creases along `|η2| = |η3|`.
fn smin_smax(a: f64, b: f64, nu: f64) -> (f64, f64) {
    let d = sabs(a - b, nu);
    (0.5 * (a + b - d), 0.5 * (a + b + d))
}

/// Smoothed interaction diameters used by the region weights.
pub fn smooth_deltas_eta(eta: &[f64; 4], nu: f64) -> (f64, f64) {
    let a1 = sabs(eta[0], nu);
    let a2 = sabs(eta[1], nu);
    let a3 = sabs(eta[2], nu);
    let (lo23, hi23) = smin_smax(a2, a3, nu);
    let (_, hi) = smin_smax(a1, hi23, nu);
    let (_, med) = smin_smax(a1, lo23, nu);
    (hi, med)
}

/// Threshold knots of the smooth region decomposition.
///
/// `omega1` controls the near-resonant window in `δξ^med`; `ratio` splits the
/// complement between division by `Δ̃⁴ξ²` (small `|Δ⁴ξ|/δξ^med`) and division
/// by `Δ⁴ξ`; `sub` separates the internal near-resonant cases by `|η2|`,`|η3|`.
/// The deep-region threshold 1/8 realizes the "much smaller" comparisons.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegionThresholds {
    pub omega1: (f64, f64),
    pub ratio: (f64, f64),
    pub sub: (f64, f64),
    /// Analyticity width of the smoothed absolute values inside the weights.
    pub nu: f64,
}

impl Default for RegionThresholds {
    fn default() -> Self {
        Self {
            omega1: (2.0, 4.0),
            ratio: (0.125, 0.5),
            sub: (4.0, 6.0),
            nu: 0.75,
        }
    }
}

impl RegionThresholds {
    /// Smooth membership weights (w1, w2, w3) summing to one.
    pub fn weights_eta(&self, eta: &[f64; 4]) -> (f64, f64, f64) {
        let (_, med) = smooth_deltas_eta(eta, self.nu);
        let w1 = smooth_down(med, self.omega1.0, self.omega1.1);
        let rest = 1.0 - w1;
        if rest <= 0.0 {
            return (1.0, 0.0, 0.0);
        }
        // med >= omega1.0 here, so the ratio is well defined. The true |η1|
        // keeps the Δ⁴ξ division safe; its kink sits inside the plateau where
        // the step is constant, so no crease reaches the weights.
        let ratio = eta[0].abs() / med;
        let split = smooth_down(ratio, self.ratio.0, self.ratio.1);
        (w1, rest * split, rest * (1.0 - split))
    }

    pub fn weights(&self, xi: [f64; 4]) -> (f64, f64, f64) {
        self.weights_eta(&to_eta(xi))
    }
}

/// Which overlapping region dominates a quadruple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    NearResonant,
    TimeElliptic,
    SpaceElliptic,
}

/// A frequency quadruple with all derived interaction quantities.
#[derive(Debug, Clone, Serialize)]
pub struct ResonancePoint {
    pub xi: [f64; 4],
    pub delta4: f64,
    pub delta4_sq: f64,
    pub tilde_delta4_sq: f64,
    pub d_hi: f64,
    pub d_med: f64,
    pub region_weights: (f64, f64, f64),
    pub region: Region,
}

/// Fill all derived fields for a quadruple.
pub fn resonance(xi: [f64; 4], thresholds: &RegionThresholds) -> ResonancePoint {
    let (d_hi, d_med) = deltas(xi);
    let w = thresholds.weights(xi);
    let region = if w.0 >= w.1 && w.0 >= w.2 {
        Region::NearResonant
    } else if w.1 >= w.2 {
        Region::TimeElliptic
    } else {
        Region::SpaceElliptic
    };
    ResonancePoint {
        xi,
        delta4: delta4(xi),
        delta4_sq: delta4_sq(xi),
        tilde_delta4_sq: tilde_delta4_sq(xi),
        d_hi,
        d_med,
        region_weights: w,
        region,
    }
}

/// Membership test for the resonant set `{ξ1,ξ3} = {ξ2,ξ4}` up to `tol`.
pub fn on_resonant_set(xi: [f64; 4], tol: f64) -> bool {
    let b1 = (xi[0] - xi[1]).abs().max((xi[2] - xi[3]).abs());
    let b2 = (xi[0] - xi[3]).abs().max((xi[2] - xi[1]).abs());
    b1.min(b2) <= tol
}
