//! Discretized periodic domain and complex fields with physical/spectral views.
//!
//! The line is modeled by a torus of circumference `L` with data kept in the
//! central half; `x_j = -L/2 + j L/N`. Spectral coefficients follow the
//! continuum normalization `F u (k) = (2π)^{-1/2} ∫ u e^{-ikx} dx` with the
//! discrete measure `dk = 2π/L`, so Parseval `h Σ|u_j|² = dk Σ|û_m|²` is exact.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("num_points must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("{name} must be positive, got {value}")]
    NotPositive { name: &'static str, value: f64 },
    #[error("frequency spacing {dxi:.4} exceeds 0.1; enlarge the circumference")]
    SpacingTooCoarse { dxi: f64 },
    #[error("Nyquist frequency {nyquist:.2} does not cover the lattice range {need:.2}")]
    NyquistTooSmall { nyquist: f64, need: f64 },
    #[error("sample count {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
}

/// Discretized periodic spatial domain.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub num_points: usize,
    pub circumference: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Declared lattice range `[-k_max, k_max]` for the unit partition.
    pub k_max: u32,
}

impl GridSpec {
    pub fn new(
        num_points: usize,
        circumference: f64,
        dt: f64,
        horizon: f64,
        k_max: u32,
    ) -> Result<Self, GridError> {
        if !num_points.is_power_of_two() || num_points == 0 {
            return Err(GridError::NotPowerOfTwo(num_points));
        }
        for (name, value) in [
            ("circumference", circumference),
            ("dt", dt),
            ("horizon", horizon),
        ] {
            if !(value > 0.0) {
                return Err(GridError::NotPositive { name, value });
            }
        }
        let spec = Self {
            num_points,
            circumference,
            dt,
            horizon,
            k_max,
        };
        if spec.dxi() > 0.1 + 1e-12 {
            return Err(GridError::SpacingTooCoarse { dxi: spec.dxi() });
        }
        let need = k_max as f64 + 2.0;
        if spec.nyquist() < need {
            return Err(GridError::NyquistTooSmall {
                nyquist: spec.nyquist(),
                need,
            });
        }
        Ok(spec)
    }

    /// Default desk-scale grid: L = 256, N = 16384 (about 81 modes per unit bin).
    pub fn default_lab(k_max: u32) -> Self {
        Self::new(16384, 256.0, 1e-3, 10.0, k_max).expect("default grid is valid")
    }

    /// Spatial step.
    pub fn h(&self) -> f64 {
        self.circumference / self.num_points as f64
    }

    /// Frequency spacing 2π/L.
    pub fn dxi(&self) -> f64 {
        2.0 * PI / self.circumference
    }

    /// Largest representable frequency.
    pub fn nyquist(&self) -> f64 {
        self.num_points as f64 / 2.0 * self.dxi()
    }

    pub fn x_at(&self, j: usize) -> f64 {
        -0.5 * self.circumference + j as f64 * self.h()
    }

    /// Signed frequency of FFT slot `m`.
    pub fn xi_at(&self, m: usize) -> f64 {
        let n = self.num_points;
        let signed = if m < n / 2 {
            m as isize
        } else {
            m as isize - n as isize
        };
        signed as f64 * self.dxi()
    }

    /// FFT slot holding the signed mode index `s`, if within the band.
    pub fn slot_of(&self, s: isize) -> Option<usize> {
        let half = (self.num_points / 2) as isize;
        if s >= -half && s < half {
            Some(if s >= 0 {
                s as usize
            } else {
                (s + self.num_points as isize) as usize
            })
        } else {
            None
        }
    }

    /// Slots with |xi| <= bound, in increasing frequency order.
    pub fn band_slots(&self, bound: f64) -> Vec<usize> {
        let smax = (bound / self.dxi()).floor() as isize;
        (-smax..=smax)
            .filter_map(|s| self.slot_of(s))
            .collect()
    }

    /// Guard of the torus model: max group speed times the horizon must stay
    /// under a quarter circumference so that ordered-x diagnostics are clean.
    pub fn window_guard_ok(&self, horizon: f64) -> bool {
        let vmax = 2.0 * (self.k_max as f64 + 2.0);
        vmax * horizon < self.circumference / 4.0
    }
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Complex-valued state on the physical grid.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: GridSpec,
    pub samples: Vec<C64>,
}

impl Field {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![C64::ZERO; grid.num_points],
        }
    }

    pub fn from_samples(grid: GridSpec, samples: Vec<C64>) -> Result<Self, GridError> {
        if samples.len() != grid.num_points {
            return Err(GridError::LengthMismatch {
                got: samples.len(),
                want: grid.num_points,
            });
        }
        Ok(Self { grid, samples })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> C64) -> Self {
        let samples = (0..grid.num_points).map(|j| f(grid.x_at(j))).collect();
        Self { grid, samples }
    }

    pub fn to_spectral(&self) -> SpectralField {
        let n = self.grid.num_points;
        let mut buf = self.samples.clone();
        plans(n).0.process(&mut buf);
        let pref = self.grid.h() / (2.0 * PI).sqrt();
        // Centered x-origin shows up as an alternating sign per slot.
        for (m, v) in buf.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *v *= pref * sign;
        }
        SpectralField {
            grid: self.grid,
            coeffs: buf,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.h();
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * h).sqrt()
    }

    pub fn linf_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ∫ |u|^p dx by the trapezoid rule (exact for periodic samples).
    pub fn lp_power(&self, p: f64) -> f64 {
        let h = self.grid.h();
        self.samples.iter().map(|z| z.norm().powf(p)).sum::<f64>() * h
    }

    pub fn scale(&mut self, c: C64) {
        for v in &mut self.samples {
            *v *= c;
        }
    }

    pub fn add_assign(&mut self, other: &Field) {
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &Field) -> Field {
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a - b)
            .collect();
        Field {
            grid: self.grid,
            samples,
        }
    }

    /// Translate by `x0` (samples of `u(x + x0)`), exact for band-limited data.
    pub fn shift(&self, x0: f64) -> Field {
        let mut hat = self.to_spectral();
        hat.phase_shift(x0);
        hat.to_physical()
    }
}

/// Spectral view of a [`Field`], coefficients in FFT slot order.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn zero(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![C64::ZERO; grid.num_points],
        }
    }

    pub fn to_physical(&self) -> Field {
        let n = self.grid.num_points;
        let mut buf = self.coeffs.clone();
        for (m, v) in buf.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *v *= sign;
        }
        plans(n).1.process(&mut buf);
        let pref = self.grid.dxi() / (2.0 * PI).sqrt();
        for v in &mut buf {
            *v *= pref;
        }
        Field {
            grid: self.grid,
            samples: buf,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let d = self.grid.dxi();
        (self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>() * d).sqrt()
    }

    /// Apply a Fourier multiplier in place.
    pub fn apply_multiplier(&mut self, m: impl Fn(f64) -> C64) {
        for (slot, v) in self.coeffs.iter_mut().enumerate() {
            *v *= m(self.grid.xi_at(slot));
        }
    }

    pub fn multiplied(&self, m: impl Fn(f64) -> C64) -> SpectralField {
        let mut out = self.clone();
        out.apply_multiplier(m);
        out
    }

    /// Phase shift corresponding to translation `u(x) -> u(x + x0)`.
    pub fn phase_shift(&mut self, x0: f64) {
        self.apply_multiplier(|xi| C64::from_polar(1.0, xi * x0));
    }

    /// Spatial derivative.
    pub fn derivative(&self) -> SpectralField {
        self.multiplied(|xi| C64::new(0.0, xi))
    }

    /// L² mass carried by modes with |xi| > bound.
    pub fn mass_outside(&self, bound: f64) -> f64 {
        let d = self.grid.dxi();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(m, _)| self.grid.xi_at(*m).abs() > bound)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * d
    }

    /// Zero all modes with |xi| > bound.
    pub fn truncate_band(&mut self, bound: f64) {
        for slot in 0..self.coeffs.len() {
            if self.grid.xi_at(slot).abs() > bound {
                self.coeffs[slot] = C64::ZERO;
            }
        }
    }
}
