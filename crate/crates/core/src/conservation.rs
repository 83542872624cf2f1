//! Localized densities, quartic corrections, fluxes, and sextic remainders.
//!
//! For a localizer `a` and recentering frequency `ξ0` the corrected densities
//! satisfy, along the flow,
//!
//! ```text
//! (∂_t + 2 ξ0 ∂_x) M♯_a(u) = ∂_x ( P_{a,ξ0}(u) + R⁴_{m,a,ξ0}(u) ) + R⁶_{m,a}(u)
//! (∂_t + 2 ξ0 ∂_x) P♯_{a,ξ0}(u) = ∂_x ( E_{a,ξ0}(u) + R⁴_{p,a,ξ0}(u) ) + R⁶_{p,a,ξ0}(u)
//! ```
//!
//! where `M♯ = M_a + B⁴`, the correction symbol is minus the Lemma factor of
//! the divided real-coefficient symbol, and `R⁶` collects the nonlinear slot
//! substitutions of `B⁴`. Everything here is assembled from the four base
//! objects at `ξ0 = 0` by linearity:
//! `β_{p,ξ0} = β_p + 2ξ0 β_m`, `r⁴_{X,ξ0} = r⁴_X + 2ξ0 β_X` and
//! `r⁴_{p,ξ0,total} = r⁴_{p,ξ0} + 2ξ0 r⁴_{m,ξ0}`.

use crate::forms::{pair_split_density, DensityField, FormError, TrilinearForm};
use crate::grid::{GridSpec, SpectralField};
use crate::lattice::Localizer;
use crate::lowrank::{lowrank_quartic, BandModes, PairSplit};
use crate::solver::Trajectory;
use crate::symbolic::division::{localized_division, DensityKind, DivisionError, LocalizedDivision};
use crate::symbolic::resonance::RegionThresholds;
use crate::symbolic::TrilinearSymbol;
use num_complex::Complex64 as C64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConservationError {
    #[error(transparent)]
    Division(#[from] DivisionError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("no dense snapshot window around t = {0}")]
    NoDenseWindow(f64),
}

/// Weighted quadratic density kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadKind {
    Mass,
    Momentum,
    Energy,
}

/// Quadratic density of a single field through multiplier products.
///
/// Mass is `|A0 u|²`; momentum `(-ξ-η+2ξ0)`-weighted; energy
/// `(ξ+η-2ξ0)²`-weighted. All are real by construction.
pub fn quadratic_density(
    hat: &SpectralField,
    a: &Localizer,
    kind: QuadKind,
    xi0: f64,
) -> DensityField {
    let a0 = |xi: f64| C64::new(a.a0(xi), 0.0);
    let u0 = hat.multiplied(a0).to_physical();
    match kind {
        QuadKind::Mass => DensityField {
            grid: hat.grid,
            values: u0.samples.iter().map(|z| C64::new(z.norm_sqr(), 0.0)).collect(),
        },
        QuadKind::Momentum => {
            let u1 = hat
                .multiplied(|xi| C64::new(xi * a.a0(xi), 0.0))
                .to_physical();
            DensityField {
                grid: hat.grid,
                values: u0
                    .samples
                    .iter()
                    .zip(&u1.samples)
                    .map(|(z0, z1)| {
                        C64::new(-2.0 * (z1 * z0.conj()).re + 2.0 * xi0 * z0.norm_sqr(), 0.0)
                    })
                    .collect(),
            }
        }
        QuadKind::Energy => {
            let u1 = hat
                .multiplied(|xi| C64::new(xi * a.a0(xi), 0.0))
                .to_physical();
            let u2 = hat
                .multiplied(|xi| C64::new(xi * xi * a.a0(xi), 0.0))
                .to_physical();
            DensityField {
                grid: hat.grid,
                values: u0
                    .samples
                    .iter()
                    .zip(u1.samples.iter().zip(&u2.samples))
                    .map(|(z0, (z1, z2))| {
                        let v = 2.0 * (z2 * z0.conj()).re + 2.0 * z1.norm_sqr()
                            - 8.0 * xi0 * (z1 * z0.conj()).re
                            + 4.0 * xi0 * xi0 * z0.norm_sqr();
                        C64::new(v, 0.0)
                    })
                    .collect(),
            }
        }
    }
}

/// Spatial derivative of a density, spectrally.
pub fn density_dx(f: &DensityField) -> DensityField {
    let hat = crate::grid::Field {
        grid: f.grid,
        samples: f.values.clone(),
    }
    .to_spectral()
    .derivative();
    DensityField {
        grid: f.grid,
        values: hat.to_physical().samples,
    }
}

/// Division data and pair splits for one localizer, ready for any `ξ0`.
pub struct ConservationContext {
    pub c: TrilinearSymbol,
    pub form: TrilinearForm,
    pub localizer: Localizer,
    pub modes: Arc<BandModes>,
    pub mass_div: LocalizedDivision,
    pub momentum_div: LocalizedDivision,
    /// Correction symbols β at ξ0 = 0 (already minus the Lemma factor).
    pub beta_mass: PairSplit,
    pub beta_momentum: PairSplit,
    /// Flux symbols r⁴ recentered at ξ0 = 0.
    pub flux_mass: PairSplit,
    pub flux_momentum: PairSplit,
    pub build_errors: [f64; 4],
}

/// A ξ0-specialized bundle of pair splits.
pub struct CenteredSymbols {
    pub xi0: f64,
    pub beta_mass: PairSplit,
    pub beta_momentum: PairSplit,
    pub flux_mass: PairSplit,
    pub flux_momentum: PairSplit,
}

impl ConservationContext {
    pub fn new(
        c: &TrilinearSymbol,
        form: TrilinearForm,
        localizer: &Localizer,
        modes: Arc<BandModes>,
        thresholds: RegionThresholds,
        tol: f64,
        max_rank: usize,
    ) -> Result<Self, ConservationError> {
        let sample_box = modes.band + 1.0;
        let mass_div = localized_division(
            c,
            localizer,
            0.0,
            DensityKind::Mass,
            thresholds,
            sample_box,
        )?;
        let momentum_div = localized_division(
            c,
            localizer,
            0.0,
            DensityKind::Momentum,
            thresholds,
            sample_box,
        )?;
        let beta_mass = lowrank_quartic(
            |xi| mass_div.correction(xi),
            &modes,
            tol,
            max_rank,
            0xB0_0001,
        );
        let flux_mass = lowrank_quartic(|xi| mass_div.flux(xi), &modes, tol, max_rank, 0xB0_0002);
        let beta_momentum = lowrank_quartic(
            |xi| momentum_div.correction(xi),
            &modes,
            tol,
            max_rank,
            0xB0_0003,
        );
        let flux_momentum =
            lowrank_quartic(|xi| momentum_div.flux(xi), &modes, tol, max_rank, 0xB0_0004);
        let build_errors = [
            beta_mass.sampled_error,
            flux_mass.sampled_error,
            beta_momentum.sampled_error,
            flux_momentum.sampled_error,
        ];
        Ok(Self {
            c: c.clone(),
            form,
            localizer: localizer.clone(),
            modes,
            mass_div,
            momentum_div,
            beta_mass,
            beta_momentum,
            flux_mass,
            flux_momentum,
            build_errors,
        })
    }

    /// Assemble the ξ0-recentered symbol splits by linearity.
    pub fn centered(&self, xi0: f64) -> CenteredSymbols {
        if xi0 == 0.0 {
            return CenteredSymbols {
                xi0,
                beta_mass: self.beta_mass.clone(),
                beta_momentum: self.beta_momentum.clone(),
                flux_mass: self.flux_mass.clone(),
                flux_momentum: self.flux_momentum.clone(),
            };
        }
        let two_xi0 = C64::new(2.0 * xi0, 0.0);
        let beta_mass = self.beta_mass.clone();
        let beta_momentum = self
            .beta_momentum
            .add(&self.beta_mass.scaled(two_xi0));
        // r⁴_{m,ξ0} = r⁴_m + 2 ξ0 β_m.
        let flux_mass = self.flux_mass.add(&self.beta_mass.scaled(two_xi0));
        // r⁴_{p,ξ0,total} = r⁴_p + 2 ξ0 β_p + 2 ξ0 r⁴_{m,ξ0}.
        let flux_momentum = self
            .flux_momentum
            .add(&self.beta_momentum.scaled(two_xi0))
            .add(&flux_mass.scaled(two_xi0));
        CenteredSymbols {
            xi0,
            beta_mass,
            beta_momentum,
            flux_mass,
            flux_momentum,
        }
    }

    /// Real part of a quartic density whose symbol class is Hermitian under
    /// the pair swap; the imaginary residue measures decomposition noise.
    fn real_density(&self, split: &PairSplit, hat: &SpectralField) -> DensityField {
        let d = pair_split_density(split, [hat, hat, hat, hat]);
        DensityField {
            grid: d.grid,
            values: d.values.iter().map(|z| C64::new(z.re, 0.0)).collect(),
        }
    }

    /// Sextic remainder by slot insertion: each slot of the correction
    /// receives `-i C(u, conj u, u)`, conjugated slots through the pattern.
    pub fn sextic_remainder(
        &self,
        split: &PairSplit,
        hat: &SpectralField,
    ) -> Result<DensityField, ConservationError> {
        let mut w = self.form.apply_spectral(hat, hat, hat)?;
        for z in &mut w.coeffs {
            *z *= C64::new(0.0, -1.0);
        }
        let mut total = DensityField::zero(hat.grid);
        for slot in 0..4 {
            let mut slots = [hat, hat, hat, hat];
            slots[slot] = &w;
            total.add_assign(&pair_split_density(split, slots));
        }
        // The four substitutions sum to the time derivative of a real density.
        Ok(DensityField {
            grid: total.grid,
            values: total.values.iter().map(|z| C64::new(z.re, 0.0)).collect(),
        })
    }

    /// All densities of the set at one time and recentering frequency.
    pub fn densities(
        &self,
        hat: &SpectralField,
        xi0: f64,
        with_remainders: bool,
    ) -> Result<DensitySet, ConservationError> {
        let centered = self.centered(xi0);
        self.densities_centered(hat, &centered, with_remainders)
    }

    pub fn densities_centered(
        &self,
        hat: &SpectralField,
        centered: &CenteredSymbols,
        with_remainders: bool,
    ) -> Result<DensitySet, ConservationError> {
        let a = &self.localizer;
        let xi0 = centered.xi0;
        let mass = quadratic_density(hat, a, QuadKind::Mass, xi0);
        let momentum = quadratic_density(hat, a, QuadKind::Momentum, xi0);
        let energy = quadratic_density(hat, a, QuadKind::Energy, xi0);
        let mass_correction = self.real_density(&centered.beta_mass, hat);
        let momentum_correction = self.real_density(&centered.beta_momentum, hat);
        let mut mass_sharp = mass.clone();
        mass_sharp.add_assign(&mass_correction);
        let mut momentum_sharp = momentum.clone();
        momentum_sharp.add_assign(&momentum_correction);
        let mass_flux_quartic = self.real_density(&centered.flux_mass, hat);
        let momentum_flux_quartic = self.real_density(&centered.flux_momentum, hat);
        let (mass_remainder, momentum_remainder) = if with_remainders {
            (
                Some(self.sextic_remainder(&centered.beta_mass, hat)?),
                Some(self.sextic_remainder(&centered.beta_momentum, hat)?),
            )
        } else {
            (None, None)
        };
        Ok(DensitySet {
            grid: hat.grid,
            xi0,
            mass,
            momentum,
            energy,
            mass_correction,
            momentum_correction,
            mass_sharp,
            momentum_sharp,
            mass_flux_quartic,
            momentum_flux_quartic,
            mass_remainder,
            momentum_remainder,
        })
    }
}

/// Density snapshot bundle for one `(localizer, ξ0, t)`.
#[derive(Debug, Clone)]
pub struct DensitySet {
    pub grid: GridSpec,
    pub xi0: f64,
    pub mass: DensityField,
    pub momentum: DensityField,
    pub energy: DensityField,
    pub mass_correction: DensityField,
    pub momentum_correction: DensityField,
    pub mass_sharp: DensityField,
    pub momentum_sharp: DensityField,
    pub mass_flux_quartic: DensityField,
    pub momentum_flux_quartic: DensityField,
    pub mass_remainder: Option<DensityField>,
    pub momentum_remainder: Option<DensityField>,
}

/// Pointwise residuals of the two density-flux identities at one time.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResidualReport {
    pub t: f64,
    pub xi0: f64,
    pub dt_used: f64,
    pub mass_residual_l2: f64,
    pub mass_residual_linf: f64,
    pub mass_scale: f64,
    pub momentum_residual_l2: f64,
    pub momentum_residual_linf: f64,
    pub momentum_scale: f64,
    /// |d/dt ∫(M_a + B⁴) dx - ∫ R⁶ dx| (the integrated identity).
    pub integrated_mass_drift_residual: f64,
}

fn l2_of(grid: &GridSpec, values: &[f64]) -> f64 {
    (values.iter().map(|v| v * v).sum::<f64>() * grid.h()).sqrt()
}

/// Evaluate both flux identities at `t` by 4th-order central differencing of
/// the stored dense window against the spectrally assembled right-hand side.
pub fn flux_residual(
    ctx: &ConservationContext,
    traj: &Trajectory,
    xi0: f64,
    t: f64,
    stride: usize,
) -> Result<ResidualReport, ConservationError> {
    let stride = stride.max(1);
    let (times, snaps) = traj
        .dense_window(t, 2 * stride)
        .ok_or(ConservationError::NoDenseWindow(t))?;
    let dt = (times[1] - times[0]) * stride as f64;
    let centered = ctx.centered(xi0);
    let center = 2 * stride;
    let idx = [0usize, stride, 2 * stride, 3 * stride, 4 * stride];
    // Densities at the five stencil points.
    let sets: Vec<DensitySet> = idx
        .iter()
        .map(|&i| ctx.densities_centered(snaps[i], &centered, i == center))
        .collect::<Result<_, _>>()?;
    let grid = sets[0].grid;
    let stencil = |f: [&DensityField; 5]| -> Vec<f64> {
        (0..grid.num_points)
            .map(|j| {
                (f[0].values[j].re - 8.0 * f[1].values[j].re + 8.0 * f[3].values[j].re
                    - f[4].values[j].re)
                    / (12.0 * dt)
            })
            .collect()
    };
    let report_for = |sharp: [&DensityField; 5],
                      flux_quad: &DensityField,
                      flux_quartic: &DensityField,
                      remainder: &DensityField|
     -> (f64, f64, f64) {
        let ddt = stencil(sharp);
        let transport = density_dx(sharp[2]);
        let mut flux = flux_quad.clone();
        flux.add_assign(flux_quartic);
        let flux_dx = density_dx(&flux);
        let residual: Vec<f64> = (0..grid.num_points)
            .map(|j| {
                ddt[j] + 2.0 * xi0 * transport.values[j].re
                    - flux_dx.values[j].re
                    - remainder.values[j].re
            })
            .collect();
        let linf = residual.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = sharp[2].linf().max(1e-300);
        (l2_of(&grid, &residual), linf, scale)
    };
    let mass_sets = [
        &sets[0].mass_sharp,
        &sets[1].mass_sharp,
        &sets[2].mass_sharp,
        &sets[3].mass_sharp,
        &sets[4].mass_sharp,
    ];
    let (mass_l2, mass_linf, mass_scale) = report_for(
        mass_sets,
        &sets[2].momentum,
        &sets[2].mass_flux_quartic,
        sets[2].mass_remainder.as_ref().unwrap(),
    );
    let momentum_sets = [
        &sets[0].momentum_sharp,
        &sets[1].momentum_sharp,
        &sets[2].momentum_sharp,
        &sets[3].momentum_sharp,
        &sets[4].momentum_sharp,
    ];
    let (mom_l2, mom_linf, mom_scale) = report_for(
        momentum_sets,
        &sets[2].energy,
        &sets[2].momentum_flux_quartic,
        sets[2].momentum_remainder.as_ref().unwrap(),
    );
    // Integrated identity: the flux integrates away on the torus.
    let ddt_int = {
        let vals: Vec<f64> = idx
            .iter()
            .map(|&i| sets[idx.iter().position(|&k| k == i).unwrap()].mass_sharp.integral().re)
            .collect();
        (vals[0] - 8.0 * vals[1] + 8.0 * vals[3] - vals[4]) / (12.0 * dt)
    };
    let integrated =
        (ddt_int - sets[2].mass_remainder.as_ref().unwrap().integral().re).abs();
    Ok(ResidualReport {
        t: times[center],
        xi0,
        dt_used: dt,
        mass_residual_l2: mass_l2,
        mass_residual_linf: mass_linf,
        mass_scale,
        momentum_residual_l2: mom_l2,
        momentum_residual_linf: mom_linf,
        momentum_scale: mom_scale,
        integrated_mass_drift_residual: integrated,
    })
}
