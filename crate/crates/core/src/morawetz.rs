//! Interaction functionals over the ordered half plane `x > y`.
//!
//! The interaction functional pairs corrected mass and momentum densities of
//! two solutions (the second usually a spatial translate of the first):
//!
//! ```text
//! I(u, v) = ∬_{x>y} M♯_a(u)(x) P♯_{a,ξ0}(v)(y) - P♯_{a,ξ0}(u)(x) M♯_a(v)(y)
//! ```
//!
//! Its time derivative decomposes into the single-integral terms J⁴ + J⁶ + J⁸
//! plus the half-plane remainder pairing K⁸, all assembled here from the
//! density-flux machinery. The derivative is always measured by differencing
//! the I series, so the decomposition is a genuine cross-check of the
//! conservation algebra.

use crate::conservation::{
    density_dx, quadratic_density, CenteredSymbols, ConservationContext, ConservationError,
    DensitySet, QuadKind,
};
use crate::forms::DensityField;
use crate::grid::SpectralField;
use crate::lattice::Localizer;
use crate::solver::Trajectory;
use num_complex::Complex64 as C64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MorawetzError {
    #[error("window guard: {frac:.2e} of |{name}| lies outside the central half window")]
    WindowGuard { name: &'static str, frac: f64 },
    #[error(transparent)]
    Conservation(#[from] ConservationError),
    #[error("no dense snapshot window around t = {0}")]
    NoDenseWindow(f64),
}

/// Check that a density is supported in the central half of the torus.
fn window_guard(f: &DensityField, name: &'static str) -> Result<(), MorawetzError> {
    let n = f.grid.num_points;
    let total: f64 = f.values.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let outside: f64 = f
        .values
        .iter()
        .enumerate()
        .filter(|(j, _)| *j < n / 4 || *j >= 3 * n / 4)
        .map(|(_, z)| z.norm())
        .sum();
    let frac = outside / total;
    if frac > 1e-6 {
        return Err(MorawetzError::WindowGuard { name, frac });
    }
    Ok(())
}

/// `∬_{x>y} F(x) G(y) dx dy` on the unwrapped central window via one prefix
/// sum; the diagonal cell carries half weight.
pub fn half_plane_pairing(f: &DensityField, g: &DensityField) -> Result<f64, MorawetzError> {
    window_guard(f, "first factor")?;
    window_guard(g, "second factor")?;
    let h = f.grid.h();
    let mut cum = 0.0f64;
    let mut total = 0.0f64;
    for (a, b) in f.values.iter().zip(&g.values) {
        let gj = b.re;
        total += a.re * (cum + 0.5 * gj * h);
        cum += gj * h;
    }
    Ok(total * h)
}

/// Sharp (corrected) mass and momentum densities of one snapshot.
pub struct SharpPair {
    pub mass_sharp: DensityField,
    pub momentum_sharp: DensityField,
}

fn sharp_pair(
    ctx: &ConservationContext,
    centered: &CenteredSymbols,
    hat: &SpectralField,
) -> Result<SharpPair, ConservationError> {
    let set = ctx.densities_centered(hat, centered, false)?;
    Ok(SharpPair {
        mass_sharp: set.mass_sharp,
        momentum_sharp: set.momentum_sharp,
    })
}

/// `I_a(u, v)` from the two sharp pairs.
fn interaction_value(u: &SharpPair, v: &SharpPair) -> Result<f64, MorawetzError> {
    Ok(half_plane_pairing(&u.mass_sharp, &v.momentum_sharp)?
        - half_plane_pairing(&u.momentum_sharp, &v.mass_sharp)?)
}

/// Component values of dI/dt at one time.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InteractionComponents {
    pub j4: f64,
    pub j6: f64,
    pub j8: f64,
    pub k8: f64,
}

impl InteractionComponents {
    pub fn total(&self) -> f64 {
        self.j4 + self.j6 + self.j8 + self.k8
    }
}

/// Full diagnostic record of one interaction-functional experiment.
#[derive(Debug, Clone, Serialize)]
pub struct InteractionReport {
    pub t: f64,
    pub xi0: f64,
    pub x0: f64,
    /// I values on the differencing stencil (center at `stencil/2`).
    pub i_series: Vec<f64>,
    pub i_times: Vec<f64>,
    pub components: InteractionComponents,
    /// Central-difference dI/dt at steps dt, 2dt, 4dt.
    pub didt: [f64; 3],
    /// |dI/dt - Σ components| for the three stencil steps.
    pub residuals: [f64; 3],
    /// Interaction value and component set recomputed at ξ0 + 1.
    pub xi0_shift_relative_change: f64,
    pub scale: f64,
}

impl InteractionReport {
    pub fn csv_header() -> &'static str {
        "t,xi0,x0,i_value,j4,j6,j8,k8,didt_fine,residual_fine,residual_mid,residual_coarse\n"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.t,
            self.xi0,
            self.x0,
            self.i_series[self.i_series.len() / 2],
            self.components.j4,
            self.components.j6,
            self.components.j8,
            self.components.k8,
            self.didt[0],
            self.residuals[0],
            self.residuals[1],
            self.residuals[2]
        )
    }
}

/// Densities needed by the single-integral components, for one field.
struct ComponentDensities {
    mass: DensityField,
    momentum: DensityField,
    energy: DensityField,
    set: DensitySet,
    remainder_mass: DensityField,
    remainder_momentum: DensityField,
}

fn component_densities(
    ctx: &ConservationContext,
    centered: &CenteredSymbols,
    hat: &SpectralField,
) -> Result<ComponentDensities, ConservationError> {
    let set = ctx.densities_centered(hat, centered, true)?;
    Ok(ComponentDensities {
        mass: set.mass.clone(),
        momentum: set.momentum.clone(),
        energy: set.energy.clone(),
        remainder_mass: set.mass_remainder.clone().unwrap(),
        remainder_momentum: set.momentum_remainder.clone().unwrap(),
        set,
    })
}

/// J⁴ between two component bundles (the a = b diagonal shape).
fn j4_of(u: &ComponentDensities, v: &ComponentDensities) -> f64 {
    (u.mass.pair_integral(&v.energy) + v.mass.pair_integral(&u.energy)
        - 2.0 * u.momentum.pair_integral(&v.momentum))
    .re
}

fn j6_of(u: &ComponentDensities, v: &ComponentDensities) -> f64 {
    let half = |a: &ComponentDensities, b: &ComponentDensities| -> f64 {
        (a.mass.pair_integral(&b.set.momentum_flux_quartic).re
            + a.set.mass_correction.pair_integral(&b.energy).re
            - a.momentum.pair_integral(&b.set.momentum_correction).re
            - a.set.mass_flux_quartic.pair_integral(&b.momentum).re)
    };
    half(u, v) + half(v, u)
}

fn j8_of(u: &ComponentDensities, v: &ComponentDensities) -> f64 {
    let half = |a: &ComponentDensities, b: &ComponentDensities| -> f64 {
        a.set
            .mass_correction
            .pair_integral(&b.set.momentum_flux_quartic)
            .re
            - a.set
                .mass_flux_quartic
                .pair_integral(&b.set.momentum_correction)
                .re
    };
    half(u, v) + half(v, u)
}

fn k8_of(u: &ComponentDensities, v: &ComponentDensities) -> Result<f64, MorawetzError> {
    Ok(
        half_plane_pairing(&u.remainder_mass, &v.set.momentum_sharp)?
            + half_plane_pairing(&u.set.mass_sharp, &v.remainder_momentum)?
            - half_plane_pairing(&u.remainder_momentum, &v.set.mass_sharp)?
            - half_plane_pairing(&u.set.momentum_sharp, &v.remainder_mass)?,
    )
}

fn shifted(hat: &SpectralField, x0: f64) -> SpectralField {
    let mut out = hat.clone();
    out.phase_shift(x0);
    out
}

fn central_diff(series: &[f64], center: usize, k: usize, dt: f64) -> f64 {
    (series[center + k] - series[center - k]) / (2.0 * k as f64 * dt)
}

/// Interaction Morawetz experiment in the localized diagonal configuration.
///
/// `v = u(· + x0)`. The I series is computed on a radius-4 dense stencil
/// around `t`; the identity residual is reported for stencil steps dt, 2dt
/// and 4dt, and every component is recomputed at `ξ0 + 1` to verify the
/// recentering invariance.
pub fn interaction_diagonal(
    ctx: &ConservationContext,
    traj: &Trajectory,
    xi0: f64,
    x0: f64,
    t: f64,
) -> Result<InteractionReport, MorawetzError> {
    let (times, snaps) = traj
        .dense_window(t, 4)
        .ok_or(MorawetzError::NoDenseWindow(t))?;
    let dt = times[1] - times[0];
    let center = 4usize;
    let run = |xi0: f64| -> Result<(Vec<f64>, InteractionComponents), MorawetzError> {
        let centered = ctx.centered(xi0);
        let mut i_series = Vec::with_capacity(times.len());
        for hat in &snaps {
            let u = sharp_pair(ctx, &centered, hat)?;
            let v = sharp_pair(ctx, &centered, &shifted(hat, x0))?;
            i_series.push(interaction_value(&u, &v)?);
        }
        let u = component_densities(ctx, &centered, snaps[center])?;
        let v = component_densities(ctx, &centered, &shifted(snaps[center], x0))?;
        let comp = InteractionComponents {
            j4: j4_of(&u, &v),
            j6: j6_of(&u, &v),
            j8: j8_of(&u, &v),
            k8: k8_of(&u, &v)?,
        };
        Ok((i_series, comp))
    };
    let (i_series, components) = run(xi0)?;
    let (i_shifted, comp_shifted) = run(xi0 + 1.0)?;
    let total = components.total();
    let didt = [
        central_diff(&i_series, center, 1, dt),
        central_diff(&i_series, center, 2, dt),
        central_diff(&i_series, center, 4, dt),
    ];
    let residuals = [
        (didt[0] - total).abs(),
        (didt[1] - total).abs(),
        (didt[2] - total).abs(),
    ];
    let scale = i_series
        .iter()
        .map(|v| v.abs())
        .fold(total.abs(), f64::max)
        / 1.0f64.max(dt);
    let mut shift_change = (i_series[center] - i_shifted[center]).abs();
    for (a, b) in [
        (components.j4, comp_shifted.j4),
        (components.j6, comp_shifted.j6),
        (components.j8, comp_shifted.j8),
        (components.k8, comp_shifted.k8),
    ] {
        shift_change = shift_change.max((a - b).abs());
    }
    let comp_scale = [
        components.j4.abs(),
        components.j6.abs(),
        components.j8.abs(),
        components.k8.abs(),
        i_series[center].abs(),
    ]
    .into_iter()
    .fold(1e-300, f64::max);
    Ok(InteractionReport {
        t: times[center],
        xi0,
        x0,
        i_series,
        i_times: times,
        components,
        didt,
        residuals,
        xi0_shift_relative_change: shift_change / comp_scale,
        scale,
    })
}

/// Transversal interaction experiment with separate localizers for the two
/// factors. With `ctx_b = ctx_a` and `x0 = 0` this reduces to the diagonal
/// configuration exactly.
#[allow(clippy::too_many_arguments)]
pub fn interaction_transversal(
    ctx_a: &ConservationContext,
    ctx_b: &ConservationContext,
    traj: &Trajectory,
    xi0: f64,
    x0: f64,
    t: f64,
) -> Result<InteractionReport, MorawetzError> {
    let (times, snaps) = traj
        .dense_window(t, 4)
        .ok_or(MorawetzError::NoDenseWindow(t))?;
    let dt = times[1] - times[0];
    let center = 4usize;
    let run = |xi0: f64| -> Result<(Vec<f64>, InteractionComponents), MorawetzError> {
        let ca = ctx_a.centered(xi0);
        let cb = ctx_b.centered(xi0);
        let mut i_series = Vec::with_capacity(times.len());
        for hat in &snaps {
            let u = sharp_pair(ctx_a, &ca, hat)?;
            let v = sharp_pair(ctx_b, &cb, &shifted(hat, x0))?;
            i_series.push(interaction_value(&u, &v)?);
        }
        let u = component_densities(ctx_a, &ca, snaps[center])?;
        let v = component_densities(ctx_b, &cb, &shifted(snaps[center], x0))?;
        let comp = InteractionComponents {
            j4: j4_of(&u, &v),
            j6: j6_of(&u, &v),
            j8: j8_of(&u, &v),
            k8: k8_of(&u, &v)?,
        };
        Ok((i_series, comp))
    };
    let (i_series, components) = run(xi0)?;
    let (_, comp_shifted) = run(xi0 + 1.0)?;
    let total = components.total();
    let didt = [
        central_diff(&i_series, center, 1, dt),
        central_diff(&i_series, center, 2, dt),
        central_diff(&i_series, center, 4, dt),
    ];
    let residuals = [
        (didt[0] - total).abs(),
        (didt[1] - total).abs(),
        (didt[2] - total).abs(),
    ];
    let mut shift_change = 0.0f64;
    for (a, b) in [
        (components.j4, comp_shifted.j4),
        (components.j6, comp_shifted.j6),
        (components.j8, comp_shifted.j8),
        (components.k8, comp_shifted.k8),
    ] {
        shift_change = shift_change.max((a - b).abs());
    }
    let comp_scale = [
        components.j4.abs(),
        components.j6.abs(),
        components.j8.abs(),
        components.k8.abs(),
        i_series[center].abs(),
    ]
    .into_iter()
    .fold(1e-300, f64::max);
    Ok(InteractionReport {
        t: times[center],
        xi0,
        x0,
        i_series: i_series.clone(),
        i_times: times,
        components,
        didt,
        residuals,
        xi0_shift_relative_change: shift_change / comp_scale,
        scale: comp_scale,
    })
}

/// `4 ∫ |∂_x (A0 u · conj(A0 v))|² dx`, with the symbol-side cross-check
/// `∫ M_a(u) E_{a,ξ0}(v) + M_a(v) E_{a,ξ0}(u) - 2 P_{a,ξ0}(u) P_{a,ξ0}(v) dx`.
pub fn j4_positivity(
    u_hat: &SpectralField,
    v_hat: &SpectralField,
    a: &Localizer,
) -> (f64, f64) {
    let a0 = |xi: f64| C64::new(a.a0(xi), 0.0);
    let au = u_hat.multiplied(a0).to_physical();
    let av = v_hat.multiplied(a0).to_physical();
    let prod = DensityField {
        grid: u_hat.grid,
        values: au
            .samples
            .iter()
            .zip(&av.samples)
            .map(|(x, y)| x * y.conj())
            .collect(),
    };
    let deriv = density_dx(&prod);
    let physical = 4.0
        * deriv
            .values
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
        * u_hat.grid.h();
    // Symbol side at ξ0 = 0 (the value is recentering invariant).
    let m_u = quadratic_density(u_hat, a, QuadKind::Mass, 0.0);
    let m_v = quadratic_density(v_hat, a, QuadKind::Mass, 0.0);
    let p_u = quadratic_density(u_hat, a, QuadKind::Momentum, 0.0);
    let p_v = quadratic_density(v_hat, a, QuadKind::Momentum, 0.0);
    let e_u = quadratic_density(u_hat, a, QuadKind::Energy, 0.0);
    let e_v = quadratic_density(v_hat, a, QuadKind::Energy, 0.0);
    let symbolic = (m_u.pair_integral(&e_v) + m_v.pair_integral(&e_u)
        - 2.0 * p_u.pair_integral(&p_v))
    .re;
    (physical, symbolic)
}

/// Max deviation of the assembled sextic diagonal trace from `a0⁴ c` over the
/// localizer support. Uses the exact pointwise division evaluators.
pub fn diagonal_trace_check(ctx: &ConservationContext, xi0: f64, n_samples: usize) -> f64 {
    let a = &ctx.localizer;
    let (lo, hi) = a.support();
    let lo = lo.max(-(ctx.modes.band));
    let hi = hi.min(ctx.modes.band);
    let mut worst = 0.0f64;
    for i in 0..n_samples {
        let xi = lo + (hi - lo) * (i as f64 + 0.5) / n_samples as f64;
        let quad = [xi, xi, xi, xi];
        let m_a = a.a(xi, xi);
        let p_a = (-2.0 * xi + 2.0 * xi0) * m_a;
        let e_a = (2.0 * xi - 2.0 * xi0).powi(2) * m_a;
        // Momentum flux and corrections at ξ0 by linearity.
        let beta_m = ctx.mass_div.correction(quad);
        let beta_p = ctx.momentum_div.correction(quad) + 2.0 * xi0 * beta_m;
        let flux_m = ctx.mass_div.pair.r4_centered(quad, xi0);
        let flux_p = ctx.momentum_div.pair.r4_centered(quad, xi0)
            + 2.0 * xi0 * ctx.momentum_div.correction(quad)
            + 2.0 * xi0 * flux_m;
        let trace = m_a * flux_p + beta_m * e_a - p_a * beta_p - flux_m * p_a;
        let expect = a.a0(xi).powi(4) * ctx.c.diagonal(xi);
        let dev = (trace - expect).norm();
        worst = worst.max(dev);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::forms::TrilinearForm;
    use crate::grid::{Field, GridSpec};
    use crate::lowrank::{lowrank_trilinear, BandModes};
    use crate::solver::{simulate, SolverConfig};
    use crate::symbolic::resonance::RegionThresholds;
    use crate::symbolic::TrilinearSymbol;
    use std::sync::Arc;

    fn grid() -> GridSpec {
        GridSpec::new(1024, 64.0, 1e-3, 1.0, 3).unwrap()
    }

    fn packet(g: GridSpec, eps: f64, carrier: f64) -> Field {
        data::normalize_mass(
            &data::packets_field(
                g,
                &[data::Packet {
                    amplitude: 1.0,
                    center: 0.0,
                    width: 3.0,
                    carrier,
                }],
            ),
            eps,
        )
    }

    fn context(c_src: &str, loc: Localizer, g: GridSpec) -> ConservationContext {
        let c = TrilinearSymbol::parse(c_src).unwrap();
        let modes = Arc::new(BandModes::new(g, g.k_max as f64 + 2.0));
        let rank = lowrank_trilinear(&c, &modes, 1e-11, 64, 33);
        let form = TrilinearForm::with_rank(c.clone(), rank);
        ConservationContext::new(
            &c,
            form,
            &loc,
            modes,
            RegionThresholds::default(),
            1e-9,
            320,
        )
        .unwrap()
    }

    #[test]
    fn half_plane_pairing_matches_double_sum() {
        let g = grid();
        let f = DensityField {
            grid: g,
            values: (0..g.num_points)
                .map(|j| {
                    let x = g.x_at(j);
                    C64::new((-(x - 2.0) * (x - 2.0) / 4.0).exp(), 0.0)
                })
                .collect(),
        };
        let gdens = DensityField {
            grid: g,
            values: (0..g.num_points)
                .map(|j| {
                    let x = g.x_at(j);
                    C64::new((-(x + 3.0) * (x + 3.0) / 2.0).exp() * (0.5 * x).sin(), 0.0)
                })
                .collect(),
        };
        let fast = half_plane_pairing(&f, &gdens).unwrap();
        // Direct double sum on a coarsened copy of the same data.
        let h = g.h();
        let mut slow = 0.0;
        for (i, a) in f.values.iter().enumerate() {
            for (j, b) in gdens.values.iter().enumerate() {
                if j < i {
                    slow += a.re * b.re;
                } else if j == i {
                    slow += 0.5 * a.re * b.re;
                }
            }
        }
        slow *= h * h;
        assert!(
            (fast - slow).abs() < 1e-10 * slow.abs().max(1.0),
            "fast {fast} vs slow {slow}"
        );
        // Ordered bumps factorize.
        let int_f = f.integral().re;
        let int_g = gdens.integral().re;
        let swapped = half_plane_pairing(&gdens, &f).unwrap();
        assert!((fast + swapped - int_f * int_g).abs() < 1e-10 * (int_f * int_g).abs().max(1.0));
    }

    #[test]
    fn window_guard_rejects_off_window_mass() {
        let g = grid();
        let f = DensityField {
            grid: g,
            values: (0..g.num_points)
                .map(|j| {
                    let x = g.x_at(j);
                    C64::new((-(x - 30.0) * (x - 30.0)).exp(), 0.0)
                })
                .collect(),
        };
        assert!(matches!(
            half_plane_pairing(&f, &f),
            Err(MorawetzError::WindowGuard { .. })
        ));
    }

    #[test]
    fn j4_positivity_and_symbol_cross_check() {
        let g = grid();
        let u = packet(g, 0.2, 0.3).to_spectral();
        let v = packet(g, 0.15, -0.4).shift(2.0).to_spectral();
        let a = Localizer::unit_bin(0);
        let (physical, symbolic) = j4_positivity(&u, &v, &a);
        assert!(physical >= 0.0);
        assert!(
            (physical - symbolic).abs() < 1e-9 * physical.max(1e-300),
            "physical {physical:e} vs symbolic {symbolic:e}"
        );
        // Zero field and single modes are degenerate.
        let zero = Field::zero(g).to_spectral();
        let (p0, s0) = j4_positivity(&zero, &zero, &a);
        assert_eq!(p0, 0.0);
        assert!(s0.abs() < 1e-300);
        let slot = (0.5 / g.dxi()).round() as isize;
        let xi0 = slot as f64 * g.dxi();
        let mode = Field::from_fn(g, |x| C64::from_polar(0.05, xi0 * x)).to_spectral();
        let (pm, _) = j4_positivity(&mode, &mode, &a);
        assert!(pm < 1e-20, "single mode gives {pm:e}");
    }

    #[test]
    fn j4_symbol_arithmetic_spot_check() {
        // On the interaction diagonal the quartic symbol is
        // 4 (ξ1-ξ4)(ξ2-ξ3); at (1,2,3,2) both routes give 4.
        let (x1, x2, x3, x4) = (1.0f64, 2.0, 3.0, 2.0);
        let direct = 4.0 * (x1 - x4) * (x2 - x3);
        let via_squares = (x1 + x2).powi(2) + (x3 + x4).powi(2)
            - 2.0 * (x1 + x2) * (x3 + x4);
        assert_eq!(direct, 4.0);
        assert_eq!(via_squares, 4.0);
    }

    #[test]
    fn linear_interaction_derivative_is_j4() {
        let g = grid();
        let u0 = packet(g, 0.2, 0.5);
        let cfg = SolverConfig {
            horizon: 0.3,
            ..SolverConfig::from_grid(&g)
        }
        .with_dense_window(0.1, 0.2);
        let traj = simulate(&u0, &TrilinearForm::constant(0.0), &cfg).unwrap();
        let ctx = context("0", Localizer::unit_bin(0), g);
        let rep = interaction_diagonal(&ctx, &traj, 0.0, 1.5, 0.15).unwrap();
        // For the linear flow the corrections vanish and dI/dt = J⁴ ≥ 0.
        assert!(rep.components.j6.abs() < 1e-14);
        assert!(rep.components.j8.abs() < 1e-14);
        assert!(rep.components.k8.abs() < 1e-14);
        assert!(rep.components.j4 >= 0.0);
        let rel = rep.residuals[0] / rep.components.j4.max(1e-300);
        assert!(
            rel < crate::tol::LINEAR_MORAWETZ,
            "relative defect {rel:e} (J4 = {:e})",
            rep.components.j4
        );
        // Refining the stencil from 4dt to dt improves the match.
        assert!(rep.residuals[0] <= rep.residuals[2] * 1.5 + 1e-16);
    }

    #[test]
    fn xi0_invariance_of_components() {
        let g = grid();
        let u0 = packet(g, 0.25, 0.0);
        let ctx = context("1 + 0.5*sin(x1-x3) + 0.25*cos(x2)", Localizer::unit_bin(0), g);
        let cfg = SolverConfig {
            horizon: 0.3,
            ..SolverConfig::from_grid(&g)
        }
        .with_dense_window(0.1, 0.2);
        let traj = simulate(&u0, &ctx.form, &cfg).unwrap();
        let rep = interaction_diagonal(&ctx, &traj, 0.0, 1.0, 0.15).unwrap();
        assert!(
            rep.xi0_shift_relative_change < crate::tol::XI0_INVARIANCE,
            "xi0 dependence {:e}",
            rep.xi0_shift_relative_change
        );
    }

    #[test]
    fn transversal_reduces_to_diagonal() {
        let g = grid();
        let u0 = packet(g, 0.2, 0.0);
        let ctx = context("1 + 0.3*cos(x2)", Localizer::unit_bin(0), g);
        let cfg = SolverConfig {
            horizon: 0.3,
            ..SolverConfig::from_grid(&g)
        }
        .with_dense_window(0.1, 0.2);
        let traj = simulate(&u0, &ctx.form, &cfg).unwrap();
        let diag = interaction_diagonal(&ctx, &traj, 0.0, 0.0, 0.15).unwrap();
        let trans = interaction_transversal(&ctx, &ctx, &traj, 0.0, 0.0, 0.15).unwrap();
        assert_eq!(diag.components.j4, trans.components.j4);
        assert_eq!(diag.components.j6, trans.components.j6);
        assert_eq!(diag.components.j8, trans.components.j8);
        assert_eq!(diag.components.k8, trans.components.k8);
        assert_eq!(diag.i_series, trans.i_series);
    }

    #[test]
    fn diagonal_trace_matches_bump_fourth_times_c() {
        let g = grid();
        let ctx = context("1 + 0.5*sin(x1-x3) + 0.25*cos(x2)", Localizer::unit_bin(0), g);
        for xi0 in [0.0, 0.4] {
            let dev = diagonal_trace_check(&ctx, xi0, 41);
            assert!(
                dev < crate::tol::DIAGONAL_TRACE,
                "trace deviation {dev:e} at xi0 = {xi0}"
            );
        }
        // Scaling the localizer scales the trace by λ⁴: the defocusing trace
        // is strictly positive on the bump core.
        let xi = 0.0;
        let a = Localizer::unit_bin(0);
        let c = &ctx.c;
        let trace = a.a0(xi).powi(4) * c.diagonal(xi).re;
        assert!(trace > 0.0);
    }
}
