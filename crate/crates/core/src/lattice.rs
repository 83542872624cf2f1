//! Unit-scale frequency partition of unity, projectors and localizers.
//!
//! The partition bump is `ψ(x) = φ(x) / Σ_j φ(x - j)` built from the standard
//! mollifier `φ(x) = exp(-1/(1-x²))` on (-1,1). The translate sum in the
//! denominator is 1-periodic, which makes `Σ_k ψ(ξ - k) = 1` exact up to
//! rounding on the covered range.

use crate::grid::{Field, GridSpec, SpectralField};
use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("bin {k} outside the lattice range [-{k_max}, {k_max}]")]
    OutOfRange { k: i64, k_max: u32 },
    #[error("empty interval [{a}, {b}]")]
    EmptyInterval { a: i64, b: i64 },
}

/// The mollifier bump: positive on (-1,1), zero outside, C^∞.
pub fn mollifier(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Normalized unit bump ψ with `Σ_j ψ(x - j) = 1`.
pub fn unit_bump(x: f64) -> f64 {
    let num = mollifier(x);
    if num == 0.0 {
        return 0.0;
    }
    // Only translates within distance 1 contribute.
    let j0 = x.floor();
    let mut den = 0.0;
    for j in [j0 - 1.0, j0, j0 + 1.0] {
        den += mollifier(x - j);
    }
    num / den
}

/// Smooth partition of unity on the frequency lattice `[-k_max, k_max]`.
#[derive(Debug, Clone, Copy)]
pub struct UnitPartition {
    pub k_max: u32,
}

impl UnitPartition {
    pub fn new(k_max: u32) -> Self {
        assert!(k_max >= 1, "k_max must be at least 1");
        Self { k_max }
    }

    /// Bump of bin `k`, supported in `[k-1, k+1]`.
    pub fn bump(&self, k: i64, xi: f64) -> f64 {
        unit_bump(xi - k as f64)
    }

    pub fn bins(&self) -> impl Iterator<Item = i64> {
        let k = self.k_max as i64;
        -k..=k
    }

    /// Σ_k p_k(ξ) over the declared range.
    pub fn partition_sum(&self, xi: f64) -> f64 {
        // Only the two nearest bins can be active.
        let k0 = xi.round() as i64;
        let mut s = 0.0;
        for k in (k0 - 1)..=(k0 + 1) {
            if k.unsigned_abs() <= self.k_max as u64 {
                s += self.bump(k, xi);
            }
        }
        s
    }

    fn check_bin(&self, k: i64) -> Result<(), LatticeError> {
        if k.unsigned_abs() > self.k_max as u64 {
            Err(LatticeError::OutOfRange {
                k,
                k_max: self.k_max,
            })
        } else {
            Ok(())
        }
    }

    /// Frequency projection `P_k u`.
    pub fn project(&self, u: &Field, k: i64) -> Result<Field, LatticeError> {
        Ok(self.project_spectral(&u.to_spectral(), k)?.to_physical())
    }

    pub fn project_spectral(
        &self,
        hat: &SpectralField,
        k: i64,
    ) -> Result<SpectralField, LatticeError> {
        self.check_bin(k)?;
        Ok(hat.multiplied(|xi| C64::new(self.bump(k, xi), 0.0)))
    }

    /// `u_A = Σ_{k in [a,b]} u_k`.
    pub fn project_interval(&self, u: &Field, a: i64, b: i64) -> Result<Field, LatticeError> {
        if a > b {
            return Err(LatticeError::EmptyInterval { a, b });
        }
        self.check_bin(a)?;
        self.check_bin(b)?;
        let hat = u.to_spectral();
        let weight = move |xi: f64| {
            let mut s = 0.0;
            let k0 = xi.round() as i64;
            for k in (k0 - 1)..=(k0 + 1) {
                if k >= a && k <= b {
                    s += self.bump(k, xi);
                }
            }
            C64::new(s, 0.0)
        };
        Ok(hat.multiplied(weight).to_physical())
    }

    /// Per-bin L² norms `‖P_k u‖` for the whole lattice.
    pub fn bin_norms(&self, u: &Field) -> Vec<(i64, f64)> {
        let hat = u.to_spectral();
        let d = hat.grid.dxi();
        self.bins()
            .map(|k| {
                let mass: f64 = hat
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(m, z)| {
                        let w = self.bump(k, hat.grid.xi_at(m));
                        w * w * z.norm_sqr()
                    })
                    .sum();
                (k, (mass * d).sqrt())
            })
            .collect()
    }
}

/// Spatial partition of unity: unit-spaced translates of the same bump.
#[derive(Debug, Clone, Copy)]
pub struct SpatialPartition;

impl SpatialPartition {
    /// χ_j evaluated at x (translate centered at integer j).
    pub fn chi(j: i64, x: f64) -> f64 {
        unit_bump(x - j as f64)
    }

    /// Integer tube centers whose bump meets the grid window.
    pub fn centers(grid: &GridSpec) -> impl Iterator<Item = i64> {
        let half = (grid.circumference / 2.0).ceil() as i64;
        -half..=half
    }
}

/// Frequency localizer with separated variables `a(ξ, η) = a0(ξ) a0(η)`.
#[derive(Debug, Clone)]
pub struct Localizer {
    pub center: f64,
    pub width: f64,
}

impl Localizer {
    /// Unit bump at integer bin `k` (the default localizer choice).
    pub fn unit_bin(k: i64) -> Self {
        Self {
            center: k as f64,
            width: 1.0,
        }
    }

    /// The constant localizer `a ≡ 1` (no localization).
    pub fn all_pass() -> Self {
        Self {
            center: 0.0,
            width: f64::INFINITY,
        }
    }

    pub fn is_all_pass(&self) -> bool {
        !self.width.is_finite()
    }

    /// Profile a0: the polynomial bump `(1 - x²)^8`, compactly supported on
    /// the width interval and C^7 at the edges. Polynomial profiles keep the
    /// Fourier tails of localized symbols short, which the separable quartic
    /// fast paths depend on; the frequency partition keeps the mollifier.
    pub fn a0(&self, xi: f64) -> f64 {
        if self.is_all_pass() {
            1.0
        } else {
            let x = (xi - self.center) / self.width;
            let t = 1.0 - x * x;
            if t > 0.0 {
                t.powi(8)
            } else {
                0.0
            }
        }
    }

    /// Tensor symbol a(ξ, η) = a0(ξ) a0(η); real, hence conjugate-symmetric.
    pub fn a(&self, xi: f64, eta: f64) -> f64 {
        self.a0(xi) * self.a0(eta)
    }

    /// Support interval of a0 (unbounded for the all-pass localizer).
    pub fn support(&self) -> (f64, f64) {
        if self.is_all_pass() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (self.center - self.width, self.center + self.width)
        }
    }
}
