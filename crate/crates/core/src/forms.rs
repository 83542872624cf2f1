//! Translation-invariant multilinear forms evaluated on fields.
//!
//! Conjugation alternates: odd slots enter unconjugated, even slots
//! conjugated. With the grid's spectral normalization a separable symbol term
//! turns into a plain product of multiplier outputs, so a form with symbol
//! `Π w_slot(ξ_slot)` is evaluated by `Π [w(D) u]` with conjugated slots
//! receiving `conj([conj(w)](D) u)`. The constant trilinear symbol therefore
//! gives exactly the pointwise cubic `u |u|²`, which pins every prefactor.
//!
//! Fast paths (separable decompositions from [`crate::lowrank`]) are always
//! cross-checked against the direct frequency-sum oracles in the tests.

use crate::grid::{Field, GridSpec, SpectralField};
use crate::lowrank::{BandModes, PairSplit, TrilinearRank};
use crate::symbolic::TrilinearSymbol;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormError {
    #[error("input carries {mass:.3e} of its L² mass beyond the dealiasing band {band:.2}")]
    Aliasing { mass: f64, band: f64 },
    #[error("argument count {got} does not match arity {want}")]
    Arity { got: usize, want: usize },
    #[error("density has imaginary contamination {imag:.3e} at scale {scale:.3e}")]
    NotReal { imag: f64, scale: f64 },
}

/// Real or complex density samples on the physical grid.
#[derive(Debug, Clone)]
pub struct DensityField {
    pub grid: GridSpec,
    pub values: Vec<C64>,
}

impl DensityField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![C64::ZERO; grid.num_points],
        }
    }

    /// ∫ density dx.
    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.grid.h()
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Real part, after checking the imaginary contamination against the
    /// field scale.
    pub fn try_real(&self) -> Result<Vec<f64>, FormError> {
        let scale = self.linf().max(1e-300);
        let imag = self.max_imag();
        if imag > crate::tol::DENSITY_REALNESS * scale {
            return Err(FormError::NotReal { imag, scale });
        }
        Ok(self.values.iter().map(|z| z.re).collect())
    }

    pub fn add_assign(&mut self, other: &DensityField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += b;
        }
    }

    pub fn axpy(&mut self, c: C64, other: &DensityField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: C64) {
        for a in &mut self.values {
            *a *= c;
        }
    }

    /// Pointwise product integrated over the line: ∫ F G dx.
    pub fn pair_integral(&self, other: &DensityField) -> C64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<C64>()
            * self.grid.h()
    }

    pub fn sub(&self, other: &DensityField) -> DensityField {
        DensityField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

fn dealias_guard(hat: &SpectralField) -> Result<(), FormError> {
    let band = hat.grid.nyquist() / 2.0;
    let outside = hat.mass_outside(band);
    let total = hat.l2_norm().powi(2).max(1e-300);
    if outside > 1e-20 * total {
        return Err(FormError::Aliasing {
            mass: outside,
            band,
        });
    }
    Ok(())
}

/// Evaluation path for the trilinear map.
#[derive(Clone)]
pub enum TriPath {
    /// Pointwise `c · u1 conj(u2) u3`.
    Constant(f64),
    /// Separable fast path over band modes.
    Rank(Arc<TrilinearRank>),
    /// Exact frequency double sum (small grids; the oracle).
    Direct(Arc<BandModes>),
}

/// The trilinear form `C(u, conj u, u)` with its symbol and evaluation path.
#[derive(Clone)]
pub struct TrilinearForm {
    pub symbol: TrilinearSymbol,
    pub path: TriPath,
}

impl TrilinearForm {
    pub fn constant(value: f64) -> Self {
        Self {
            symbol: TrilinearSymbol::constant(value),
            path: TriPath::Constant(value),
        }
    }

    pub fn with_rank(symbol: TrilinearSymbol, rank: TrilinearRank) -> Self {
        Self {
            symbol,
            path: TriPath::Rank(Arc::new(rank)),
        }
    }

    pub fn direct(symbol: TrilinearSymbol, modes: Arc<BandModes>) -> Self {
        Self {
            symbol,
            path: TriPath::Direct(modes),
        }
    }

    /// `C(u, conj u, u)`.
    pub fn apply(&self, u: &Field) -> Result<Field, FormError> {
        self.apply3(u, u, u)
    }

    /// `C(u1, conj u2, u3)` with independent slot fields.
    pub fn apply3(&self, u1: &Field, u2: &Field, u3: &Field) -> Result<Field, FormError> {
        if let TriPath::Constant(c) = self.path {
            let samples = u1
                .samples
                .iter()
                .zip(&u2.samples)
                .zip(&u3.samples)
                .map(|((a, b), d)| c * a * b.conj() * d)
                .collect();
            return Ok(Field {
                grid: u1.grid,
                samples,
            });
        }
        let h1 = u1.to_spectral();
        let h2 = u2.to_spectral();
        let h3 = u3.to_spectral();
        Ok(self.apply_spectral(&h1, &h2, &h3)?.to_physical())
    }

    pub fn apply_spectral(
        &self,
        h1: &SpectralField,
        h2: &SpectralField,
        h3: &SpectralField,
    ) -> Result<SpectralField, FormError> {
        for h in [h1, h2, h3] {
            dealias_guard(h)?;
        }
        match &self.path {
            TriPath::Constant(c) => {
                let u1 = h1.to_physical();
                let u2 = h2.to_physical();
                let u3 = h3.to_physical();
                let samples: Vec<C64> = u1
                    .samples
                    .iter()
                    .zip(&u2.samples)
                    .zip(&u3.samples)
                    .map(|((a, b), d)| *c * a * b.conj() * d)
                    .collect();
                let mut out = Field {
                    grid: h1.grid,
                    samples,
                }
                .to_spectral();
                out.truncate_band(h1.grid.nyquist() / 2.0);
                Ok(out)
            }
            TriPath::Rank(rank) => {
                let grid = h1.grid;
                let modes = &rank.modes;
                let mut acc = vec![C64::ZERO; grid.num_points];
                for term in &rank.terms {
                    // Middle (conjugated) slot: conj([conj g](D) u2).
                    let gbar = band_multiplier(h2, modes, &term.g, true).to_physical();
                    for (w, z) in &term.pairs {
                        let wu = band_multiplier(h1, modes, w, false).to_physical();
                        let zu = band_multiplier(h3, modes, z, false).to_physical();
                        for (a, ((x, y), g)) in acc
                            .iter_mut()
                            .zip(wu.samples.iter().zip(&zu.samples).zip(&gbar.samples))
                        {
                            *a += x * g.conj() * y;
                        }
                    }
                }
                let mut out = Field {
                    grid,
                    samples: acc,
                }
                .to_spectral();
                out.truncate_band(grid.nyquist() / 2.0);
                Ok(out)
            }
            TriPath::Direct(modes) => Ok(direct_trilinear(&self.symbol, modes, h1, h2, h3)),
        }
    }
}

/// Multiplier restricted to band modes; `conjugate` applies `conj(values)`.
fn band_multiplier(
    hat: &SpectralField,
    modes: &BandModes,
    values: &[C64],
    conjugate: bool,
) -> SpectralField {
    let mut out = SpectralField::zero(hat.grid);
    for (i, slot) in modes.slots_on(&hat.grid).into_iter().enumerate() {
        let m = if conjugate {
            values[i].conj()
        } else {
            values[i]
        };
        out.coeffs[slot] = hat.coeffs[slot] * m;
    }
    out
}

/// Exact frequency-sum trilinear oracle.
fn direct_trilinear(
    c: &TrilinearSymbol,
    modes: &BandModes,
    h1: &SpectralField,
    h2: &SpectralField,
    h3: &SpectralField,
) -> SpectralField {
    let grid = h1.grid;
    let d = grid.dxi();
    let pref = d * d / (2.0 * PI);
    let signed = &modes.signed;
    let n = modes.len();
    let slots1 = modes.slots_on(&grid);
    // Output can live on three times the input band.
    let out_slots = grid.band_slots((3.0 * modes.band).min(grid.nyquist() / 2.0));
    let coeffs: Vec<(usize, C64)> = out_slots
        .par_iter()
        .map(|&slot4| {
            let s4 = (grid.xi_at(slot4) / d).round() as isize;
            let mut acc = C64::ZERO;
            for i1 in 0..n {
                let a1 = h1.coeffs[slots1[i1]];
                if a1 == C64::ZERO {
                    continue;
                }
                for i3 in 0..n {
                    let a3 = h3.coeffs[slots1[i3]];
                    if a3 == C64::ZERO {
                        continue;
                    }
                    let s2 = signed[i1] + signed[i3] - s4;
                    let Some(slot2) = grid.slot_of(s2) else {
                        continue;
                    };
                    let a2 = h2.coeffs[slot2];
                    if a2 == C64::ZERO {
                        continue;
                    }
                    let xi2 = s2 as f64 * d;
                    acc += c.eval([modes.xis[i1], xi2, modes.xis[i3]]) * a1 * a2.conj() * a3;
                }
            }
            (slot4, acc * pref)
        })
        .collect();
    let mut out = SpectralField::zero(grid);
    for (slot, v) in coeffs {
        out.coeffs[slot] = v;
    }
    out
}

/// Unnormalized inverse FFT of band-placed coefficients, as physical samples
/// of `Σ_s acc[s] e^{i s dξ x}`.
fn band_wave_sum(grid: GridSpec, acc: &[C64]) -> Vec<C64> {
    // to_physical computes (2π)^{-1/2} dξ Σ_m coeffs[m] e^{i ξ_m x_j} with the
    // centered-origin phase already included; undo its normalization.
    let hat = SpectralField {
        grid,
        coeffs: acc.to_vec(),
    };
    let f = hat.to_physical();
    let undo = (2.0 * PI).sqrt() / grid.dxi();
    f.samples.iter().map(|z| z * undo).collect()
}

/// Quartic density from a pair-split symbol: slots `(u1, conj u2, u3, conj u4)`
/// are passed as the unconjugated spectra.
pub fn pair_split_density(ps: &PairSplit, slots: [&SpectralField; 4]) -> DensityField {
    let modes = &ps.modes;
    let grid = slots[0].grid;
    let n = modes.len();
    let d = grid.dxi();
    let signed = &modes.signed;
    let sl = modes.slots_on(&grid);
    let a1: Vec<C64> = sl.iter().map(|&s| slots[0].coeffs[s]).collect();
    let a2: Vec<C64> = sl.iter().map(|&s| slots[1].coeffs[s]).collect();
    let a3: Vec<C64> = sl.iter().map(|&s| slots[2].coeffs[s]).collect();
    let a4: Vec<C64> = sl.iter().map(|&s| slots[3].coeffs[s]).collect();
    let contributions: Vec<Vec<C64>> = ps
        .x
        .par_iter()
        .zip(ps.y.par_iter())
        .map(|(xk, yk)| {
            let side = |w: &[C64], fa: &[C64], fb: &[C64]| -> Vec<C64> {
                let mut acc = vec![C64::ZERO; grid.num_points];
                for ia in 0..n {
                    let va = fa[ia];
                    if va == C64::ZERO {
                        continue;
                    }
                    let base = ia * n;
                    for ib in 0..n {
                        let wv = w[base + ib];
                        if wv == C64::ZERO {
                            continue;
                        }
                        let vb = fb[ib];
                        if vb == C64::ZERO {
                            continue;
                        }
                        let s = signed[ia] - signed[ib];
                        let slot = grid.slot_of(s).expect("pair difference within Nyquist");
                        acc[slot] += wv * va * vb.conj();
                    }
                }
                band_wave_sum(grid, &acc)
            };
            let xa = side(xk, &a1, &a2);
            let yb = side(yk, &a3, &a4);
            xa.iter().zip(&yb).map(|(p, q)| p * q).collect()
        })
        .collect();
    let mut values = vec![C64::ZERO; grid.num_points];
    for c in contributions {
        for (v, z) in values.iter_mut().zip(c) {
            *v += z;
        }
    }
    let pref = d.powi(4) / (2.0 * PI).powi(2);
    for v in &mut values {
        *v *= pref;
    }
    DensityField { grid, values }
}

/// Exact quartic density oracle: quadruple frequency sum over the band.
pub fn direct_quartic_density(
    f: &(dyn Fn([f64; 4]) -> C64 + Sync),
    modes: &BandModes,
    slots: [&SpectralField; 4],
) -> DensityField {
    let grid = slots[0].grid;
    let n = modes.len();
    let signed = &modes.signed;
    let sl = modes.slots_on(&grid);
    let fields: Vec<Vec<C64>> = (0..4)
        .map(|k| sl.iter().map(|&s| slots[k].coeffs[s]).collect())
        .collect();
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|i1| {
            let mut acc = vec![C64::ZERO; grid.num_points];
            let v1 = fields[0][i1];
            if v1 == C64::ZERO {
                return acc;
            }
            for i2 in 0..n {
                let v2 = fields[1][i2];
                if v2 == C64::ZERO {
                    continue;
                }
                for i3 in 0..n {
                    let v3 = fields[2][i3];
                    if v3 == C64::ZERO {
                        continue;
                    }
                    for i4 in 0..n {
                        let v4 = fields[3][i4];
                        if v4 == C64::ZERO {
                            continue;
                        }
                        let s = signed[i1] - signed[i2] + signed[i3] - signed[i4];
                        let Some(slot) = grid.slot_of(s) else {
                            continue;
                        };
                        let val = f([
                            modes.xis[i1],
                            modes.xis[i2],
                            modes.xis[i3],
                            modes.xis[i4],
                        ]) * v1
                            * v2.conj()
                            * v3
                            * v4.conj();
                        acc[slot] += val;
                    }
                }
            }
            acc
        })
        .collect();
    let mut spec = vec![C64::ZERO; grid.num_points];
    for row in rows {
        for (a, b) in spec.iter_mut().zip(row) {
            *a += b;
        }
    }
    let values = band_wave_sum(grid, &spec);
    let pref = grid.dxi().powi(4) / (2.0 * PI).powi(2);
    DensityField {
        grid,
        values: values.into_iter().map(|z| z * pref).collect(),
    }
}

/// Exact bilinear density `(u1, conj u2) ↦ Σ w(ξ1, ξ2) û1 conj(û2) e^{i(ξ1-ξ2)x}`
/// with the (2π) normalization of the density convention.
pub fn direct_bilinear_density(
    w: &(dyn Fn(f64, f64) -> C64 + Sync),
    modes: &BandModes,
    slots: [&SpectralField; 2],
) -> DensityField {
    let grid = slots[0].grid;
    let n = modes.len();
    let d = grid.dxi();
    let signed = &modes.signed;
    let sl = modes.slots_on(&grid);
    let a1: Vec<C64> = sl.iter().map(|&s| slots[0].coeffs[s]).collect();
    let a2: Vec<C64> = sl.iter().map(|&s| slots[1].coeffs[s]).collect();
    let mut acc = vec![C64::ZERO; grid.num_points];
    for ia in 0..n {
        if a1[ia] == C64::ZERO {
            continue;
        }
        for ib in 0..n {
            if a2[ib] == C64::ZERO {
                continue;
            }
            let slot = grid.slot_of(signed[ia] - signed[ib]).unwrap();
            acc[slot] += w(modes.xis[ia], modes.xis[ib]) * a1[ia] * a2[ib].conj();
        }
    }
    let values = band_wave_sum(grid, &acc);
    let pref = d * d / (2.0 * PI);
    DensityField {
        grid,
        values: values.into_iter().map(|z| z * pref).collect(),
    }
}

/// Quartic functional over the interaction diagonal, computed on the Fourier
/// side; equals `∫ density dx` of the matching density.
pub fn quartic_functional_fourier(
    f: &(dyn Fn([f64; 4]) -> C64 + Sync),
    modes: &BandModes,
    slots: [&SpectralField; 4],
) -> C64 {
    let grid = slots[0].grid;
    let n = modes.len();
    let d = grid.dxi();
    let signed = &modes.signed;
    let sl = modes.slots_on(&grid);
    let fields: Vec<Vec<C64>> = (0..4)
        .map(|k| sl.iter().map(|&s| slots[k].coeffs[s]).collect())
        .collect();
    let total: C64 = (0..n)
        .into_par_iter()
        .map(|i1| {
            let mut acc = C64::ZERO;
            let v1 = fields[0][i1];
            if v1 == C64::ZERO {
                return acc;
            }
            for i2 in 0..n {
                let v2 = fields[1][i2];
                if v2 == C64::ZERO {
                    continue;
                }
                for i3 in 0..n {
                    let v3 = fields[2][i3];
                    if v3 == C64::ZERO {
                        continue;
                    }
                    // Diagonal constraint fixes the fourth frequency.
                    let s4 = signed[i1] - signed[i2] + signed[i3];
                    let Some(pos) = signed_position(&signed, s4) else {
                        continue;
                    };
                    let v4 = fields[3][pos];
                    if v4 == C64::ZERO {
                        continue;
                    }
                    acc += f([
                        modes.xis[i1],
                        modes.xis[i2],
                        modes.xis[i3],
                        modes.xis[pos],
                    ]) * v1
                        * v2.conj()
                        * v3
                        * v4.conj();
                }
            }
            acc
        })
        .sum();
    total * d.powi(3) / (2.0 * PI)
}

fn signed_position(signed: &[isize], s: isize) -> Option<usize> {
    let first = signed[0];
    let idx = s - first;
    if idx >= 0 && (idx as usize) < signed.len() {
        Some(idx as usize)
    } else {
        None
    }
}
