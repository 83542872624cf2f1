//! Symbol calculus for the trilinear nonlinearity and its derived quartic
//! symbols.
//!
//! Trilinear symbols are always symmetrized in the first and third slots. The
//! derived conservation symbols follow the symmetrized four-term pattern
//!
//! ```text
//! c⁴_w(ξ) = -(i/2) [ c(ξ1,ξ2,ξ3) w(ξ1-ξ2+ξ3, ξ4) + c(ξ1,ξ4,ξ3) w(ξ1-ξ4+ξ3, ξ2)
//!                  - conj c(ξ2,ξ3,ξ4) w(ξ1, ξ2-ξ3+ξ4) - conj c(ξ2,ξ1,ξ4) w(ξ3, ξ2-ξ1+ξ4) ]
//! ```
//!
//! with `w = m_a` for mass and `w = p_{a,ξ0}` for momentum. Under the
//! conservative hypothesis these vanish on the resonant set, which is what the
//! division algorithm in [`division`] requires.

pub mod division;
pub mod expr;
pub mod resonance;

use crate::lattice::Localizer;
use expr::{EvalError, ExprProgram, ParseError};
use num_complex::Complex64 as C64;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SymbolError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("symbol table: {0}")]
    Table(String),
}

type DynEval = Arc<dyn Fn([f64; 3]) -> C64 + Send + Sync>;

#[derive(Clone)]
enum Backend {
    Constant(f64),
    Expr(Arc<ExprProgram>),
    Table(Arc<SymbolTable>),
    Shifted { inner: Box<TrilinearSymbol>, shift: f64 },
    Closure(DynEval),
}

/// Trilinear Fourier-multiplier symbol `c(ξ1, ξ2, ξ3)`.
///
/// Evaluation is exact for the declared backend; fast-path decompositions are
/// attached separately (see [`crate::lowrank`]) and never change `eval`.
#[derive(Clone)]
pub struct TrilinearSymbol {
    backend: Backend,
    pub name: String,
}

impl std::fmt::Debug for TrilinearSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TrilinearSymbol({})", self.name)
    }
}

impl TrilinearSymbol {
    pub fn constant(value: f64) -> Self {
        Self {
            backend: Backend::Constant(value),
            name: format!("{value}"),
        }
    }

    /// Parse an expression over x1, x2, x3; the result is symmetrized in
    /// (x1, x3) at evaluation time.
    pub fn parse(src: &str) -> Result<Self, SymbolError> {
        let prog = ExprProgram::parse(src)?;
        Ok(Self {
            backend: Backend::Expr(Arc::new(prog)),
            name: src.trim().to_string(),
        })
    }

    pub fn from_closure(
        name: impl Into<String>,
        f: impl Fn([f64; 3]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            backend: Backend::Closure(Arc::new(f)),
            name: name.into(),
        }
    }

    pub fn from_table(table: SymbolTable) -> Self {
        Self {
            backend: Backend::Table(Arc::new(table)),
            name: "tabulated".into(),
        }
    }

    /// Galilean transform: `ξ ↦ c(ξ1-k, ξ2-k, ξ3-k)`.
    pub fn galilean_shift(&self, k: f64) -> Self {
        if k == 0.0 {
            return self.clone();
        }
        Self {
            backend: Backend::Shifted {
                inner: Box::new(self.clone()),
                shift: k,
            },
            name: format!("{} @ shift {k}", self.name),
        }
    }

    fn eval_raw(&self, xi: [f64; 3]) -> C64 {
        match &self.backend {
            Backend::Constant(v) => C64::new(*v, 0.0),
            Backend::Expr(p) => C64::new(p.eval(xi), 0.0),
            Backend::Table(t) => t.interpolate(xi),
            Backend::Shifted { inner, shift } => {
                inner.eval_raw([xi[0] - shift, xi[1] - shift, xi[2] - shift])
            }
            Backend::Closure(f) => f(xi),
        }
    }

    /// Symmetrized evaluation `(c(ξ1,ξ2,ξ3) + c(ξ3,ξ2,ξ1)) / 2`.
    pub fn eval(&self, xi: [f64; 3]) -> C64 {
        match &self.backend {
            Backend::Constant(v) => C64::new(*v, 0.0),
            _ => 0.5 * (self.eval_raw(xi) + self.eval_raw([xi[2], xi[1], xi[0]])),
        }
    }

    pub fn eval_checked(&self, xi: [f64; 3]) -> Result<C64, SymbolError> {
        let v = self.eval(xi);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(SymbolError::Eval(EvalError::NonFinite(xi[0], xi[1], xi[2])))
        }
    }

    /// Value on the diagonal, `c(ξ, ξ, ξ)`.
    pub fn diagonal(&self, xi: f64) -> C64 {
        self.eval([xi, xi, xi])
    }
}

/// Complex symbol tabulated on a tensor-product lattice with trilinear
/// interpolation (clamped outside the hull).
pub struct SymbolTable {
    axes: [Vec<f64>; 3],
    values: Vec<C64>,
}

impl SymbolTable {
    /// Parse CSV rows `xi1,xi2,xi3,re,im` covering a complete lattice.
    pub fn from_csv(text: &str) -> Result<Self, SymbolError> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("xi1") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(SymbolError::Table(format!(
                    "line {}: expected 5 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let mut vals = [0.0f64; 5];
            for (i, c) in cols.iter().enumerate() {
                vals[i] = c.parse().map_err(|_| {
                    SymbolError::Table(format!("line {}: bad number `{c}`", lineno + 1))
                })?;
            }
            rows.push(vals);
        }
        if rows.is_empty() {
            return Err(SymbolError::Table("empty table".into()));
        }
        let mut axes: [Vec<f64>; 3] = Default::default();
        for d in 0..3 {
            let mut ax: Vec<f64> = rows.iter().map(|r| r[d]).collect();
            ax.sort_by(f64::total_cmp);
            ax.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
            if ax.len() < 2 {
                return Err(SymbolError::Table(format!("axis {d} has fewer than 2 knots")));
            }
            axes[d] = ax;
        }
        let (n1, n2, n3) = (axes[0].len(), axes[1].len(), axes[2].len());
        if rows.len() != n1 * n2 * n3 {
            return Err(SymbolError::Table(format!(
                "expected a complete {n1}x{n2}x{n3} lattice ({} rows), got {}",
                n1 * n2 * n3,
                rows.len()
            )));
        }
        let locate = |ax: &[f64], v: f64| -> Result<usize, SymbolError> {
            ax.iter()
                .position(|a| (a - v).abs() < 1e-9)
                .ok_or_else(|| SymbolError::Table(format!("off-lattice knot {v}")))
        };
        let mut values = vec![C64::ZERO; n1 * n2 * n3];
        for r in &rows {
            let i = locate(&axes[0], r[0])?;
            let j = locate(&axes[1], r[1])?;
            let k = locate(&axes[2], r[2])?;
            values[(i * n2 + j) * n3 + k] = C64::new(r[3], r[4]);
        }
        Ok(Self { axes, values })
    }

    fn bracket(ax: &[f64], v: f64) -> (usize, f64) {
        if v <= ax[0] {
            return (0, 0.0);
        }
        if v >= ax[ax.len() - 1] {
            return (ax.len() - 2, 1.0);
        }
        let mut lo = 0;
        let mut hi = ax.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ax[mid] <= v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, (v - ax[lo]) / (ax[lo + 1] - ax[lo]))
    }

    fn interpolate(&self, xi: [f64; 3]) -> C64 {
        let (i, t1) = Self::bracket(&self.axes[0], xi[0]);
        let (j, t2) = Self::bracket(&self.axes[1], xi[1]);
        let (k, t3) = Self::bracket(&self.axes[2], xi[2]);
        let (n2, n3) = (self.axes[1].len(), self.axes[2].len());
        let at = |a: usize, b: usize, c: usize| self.values[(a * n2 + b) * n3 + c];
        let mut out = C64::ZERO;
        for (da, wa) in [(0, 1.0 - t1), (1, t1)] {
            for (db, wb) in [(0, 1.0 - t2), (1, t2)] {
                for (dc, wc) in [(0, 1.0 - t3), (1, t3)] {
                    out += at(i + da, j + db, k + dc) * (wa * wb * wc);
                }
            }
        }
        out
    }
}

/// Hypothesis verdicts for a trilinear symbol.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisReport {
    /// Max sampled |∂^α c| keyed by derivative order 0..=4.
    pub h1_max_derivative_bounds: [f64; 5],
    pub h2_max_imag_on_slice: f64,
    pub h3_min_diagonal: f64,
    pub h3_argmin: f64,
    pub h1_pass: bool,
    pub h2_pass: bool,
    pub h3_pass: bool,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.h1_pass && self.h2_pass && self.h3_pass
    }
}

fn sampled_derivative(
    c: &TrilinearSymbol,
    x: [f64; 3],
    alpha: [u8; 3],
    h: f64,
) -> Result<C64, SymbolError> {
    // Compose second-order central first differences, one per derivative.
    fn rec(
        c: &TrilinearSymbol,
        x: [f64; 3],
        mut alpha: [u8; 3],
        h: f64,
    ) -> Result<C64, SymbolError> {
        for d in 0..3 {
            if alpha[d] > 0 {
                alpha[d] -= 1;
                let mut xp = x;
                xp[d] += h;
                let mut xm = x;
                xm[d] -= h;
                let fp = rec(c, xp, alpha, h)?;
                let fm = rec(c, xm, alpha, h)?;
                return Ok((fp - fm) / (2.0 * h));
            }
        }
        c.eval_checked(x)
    }
    rec(c, x, alpha, h)
}

/// Sample the three structural hypotheses on `[-box, box]` slices.
///
/// H1 samples finite-difference derivatives through order 4, H2 the imaginary
/// part on the slice `(ξ, ξ, η)`, H3 the real part on the diagonal.
pub fn check_hypotheses(
    c: &TrilinearSymbol,
    box_size: f64,
    n_samples: usize,
) -> Result<HypothesisReport, SymbolError> {
    assert!(box_size > 0.0);
    assert!(n_samples >= 1000, "need at least 1e3 samples");
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut h1 = [0.0f64; 5];
    let h = 0.05f64;
    let mut alphas: Vec<[u8; 3]> = Vec::new();
    for a1 in 0..=4u8 {
        for a2 in 0..=4u8 {
            for a3 in 0..=4u8 {
                if a1 + a2 + a3 <= 4 {
                    alphas.push([a1, a2, a3]);
                }
            }
        }
    }
    let n_pts = (n_samples / 8).max(64);
    for _ in 0..n_pts {
        let x = [
            rng.gen_range(-box_size..box_size),
            rng.gen_range(-box_size..box_size),
            rng.gen_range(-box_size..box_size),
        ];
        for alpha in &alphas {
            let order = (alpha[0] + alpha[1] + alpha[2]) as usize;
            let v = sampled_derivative(c, x, *alpha, h)?.norm();
            h1[order] = h1[order].max(v);
        }
    }
    let slice_n = (n_samples as f64).sqrt().ceil() as usize;
    let mut h2_max = 0.0f64;
    for i in 0..slice_n {
        for j in 0..slice_n {
            let xi = -box_size + 2.0 * box_size * (i as f64 + 0.5) / slice_n as f64;
            let eta = -box_size + 2.0 * box_size * (j as f64 + 0.5) / slice_n as f64;
            h2_max = h2_max.max(c.eval_checked([xi, xi, eta])?.im.abs());
        }
    }
    let mut h3_min = f64::INFINITY;
    let mut h3_argmin = 0.0;
    for i in 0..n_samples {
        let xi = -box_size + 2.0 * box_size * i as f64 / (n_samples - 1) as f64;
        let v = c.eval_checked([xi, xi, xi])?.re;
        if v < h3_min {
            h3_min = v;
            h3_argmin = xi;
        }
    }
    Ok(HypothesisReport {
        h1_max_derivative_bounds: h1,
        h2_max_imag_on_slice: h2_max,
        h3_min_diagonal: h3_min,
        h3_argmin,
        h1_pass: h1.iter().all(|v| v.is_finite()),
        h2_pass: h2_max < 1e-10,
        h3_pass: h3_min > 0.0,
    })
}

/// Role of a derived quartic symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum QuarticTag {
    Mass,
    Momentum,
    CorrectionB,
    FluxR,
    MorawetzJ,
}

type DynEval4 = Arc<dyn Fn([f64; 4]) -> C64 + Send + Sync>;

/// Quartic symbol on frequency quadruples.
#[derive(Clone)]
pub struct QuarticSymbol {
    pub tag: QuarticTag,
    pub name: String,
    eval: DynEval4,
}

impl std::fmt::Debug for QuarticSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "QuarticSymbol({}, {:?})", self.name, self.tag)
    }
}

impl QuarticSymbol {
    pub fn new(
        tag: QuarticTag,
        name: impl Into<String>,
        eval: impl Fn([f64; 4]) -> C64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            tag,
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, xi: [f64; 4]) -> C64 {
        (self.eval)(xi)
    }

    pub fn zero() -> Self {
        Self::new(QuarticTag::CorrectionB, "0", |_| C64::ZERO)
    }
}

/// Bilinear density weight `w(ξ, η)`.
pub type DensityWeight = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Mass weight `m_a = a(ξ, η)`.
pub fn mass_weight(a: &Localizer) -> DensityWeight {
    let a = a.clone();
    Arc::new(move |xi, eta| a.a(xi, eta))
}

/// Recentered momentum weight `p_{a,ξ0} = (-ξ - η + 2 ξ0) a(ξ, η)`.
pub fn momentum_weight(a: &Localizer, xi0: f64) -> DensityWeight {
    let a = a.clone();
    Arc::new(move |xi, eta| (-xi - eta + 2.0 * xi0) * a.a(xi, eta))
}

/// Recentered energy weight `e_{a,ξ0} = (ξ + η - 2 ξ0)² a(ξ, η)`.
pub fn energy_weight(a: &Localizer, xi0: f64) -> DensityWeight {
    let a = a.clone();
    Arc::new(move |xi, eta| (xi + eta - 2.0 * xi0).powi(2) * a.a(xi, eta))
}

/// Symmetrized quartic symbol arising when a weighted quadratic density is
/// differentiated along the flow.
pub fn conservation_quartic(
    c: &TrilinearSymbol,
    weight: DensityWeight,
    tag: QuarticTag,
    name: impl Into<String>,
) -> QuarticSymbol {
    let c = c.clone();
    QuarticSymbol::new(tag, name, move |xi| {
        let [x1, x2, x3, x4] = xi;
        let t1 = c.eval([x1, x2, x3]) * weight(x1 - x2 + x3, x4);
        let t2 = c.eval([x1, x4, x3]) * weight(x1 - x4 + x3, x2);
        let t3 = c.eval([x2, x3, x4]).conj() * weight(x1, x2 - x3 + x4);
        let t4 = c.eval([x2, x1, x4]).conj() * weight(x3, x2 - x1 + x4);
        C64::new(0.0, -0.5) * (t1 + t2 - t3 - t4)
    })
}

/// Quartic mass symbol `c⁴_m` (no localization).
pub fn quartic_mass_symbol(c: &TrilinearSymbol) -> QuarticSymbol {
    quartic_mass_symbol_localized(c, &Localizer::all_pass())
}

/// Localized quartic mass symbol `c⁴_{m,a}`.
pub fn quartic_mass_symbol_localized(c: &TrilinearSymbol, a: &Localizer) -> QuarticSymbol {
    conservation_quartic(
        c,
        mass_weight(a),
        QuarticTag::Mass,
        format!("c4_m[{}]", c.name),
    )
}

/// Localized, recentered quartic momentum symbol `c⁴_{p,a,ξ0}`.
pub fn quartic_momentum_symbol(c: &TrilinearSymbol, a: &Localizer, xi0: f64) -> QuarticSymbol {
    conservation_quartic(
        c,
        momentum_weight(a, xi0),
        QuarticTag::Momentum,
        format!("c4_p[{}; xi0={xi0}]", c.name),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn parse_and_symmetrize() {
        let c = TrilinearSymbol::parse("x1").unwrap();
        // Symmetrization averages the first and third slots.
        assert!((c.eval([2.0, 5.0, 4.0]).re - 3.0).abs() < 1e-15);
        let c = TrilinearSymbol::parse("1 + 0.5*exp(-((x1-2*x2+x3)^2)/8)").unwrap();
        assert!((c.diagonal(7.3).re - 1.5).abs() < 1e-15);
    }

    #[test]
    fn galilean_shift_examples() {
        let c = TrilinearSymbol::parse("x1+x3").unwrap();
        let s = c.galilean_shift(1.0);
        assert!((s.eval([2.0, 0.0, 2.0]).re - 2.0).abs() < 1e-15);
        let one = TrilinearSymbol::constant(1.0);
        assert_eq!(one.galilean_shift(5.0).eval([1.0, 2.0, 3.0]).re, 1.0);
        // Zero shift is the identity.
        let id = c.galilean_shift(0.0);
        assert_eq!(id.eval([1.0, 0.0, 2.0]), c.eval([1.0, 0.0, 2.0]));
    }

    #[test]
    fn hypotheses_of_reference_symbols() {
        let one = TrilinearSymbol::constant(1.0);
        let rep = check_hypotheses(&one, 5.0, 1000).unwrap();
        assert!(rep.all_pass());
        assert!((rep.h1_max_derivative_bounds[0] - 1.0).abs() < 1e-12);
        assert!(rep.h1_max_derivative_bounds[1] < 1e-9);
        assert!(rep.h2_max_imag_on_slice == 0.0);
        assert!((rep.h3_min_diagonal - 1.0).abs() < 1e-12);

        // c = x1: conservative (real) but focusing-degenerate on the diagonal.
        let lin = TrilinearSymbol::parse("x1").unwrap();
        let rep = check_hypotheses(&lin, 5.0, 1000).unwrap();
        assert!(rep.h2_pass);
        assert!(!rep.h3_pass);
        assert!((rep.h3_min_diagonal + 5.0).abs() < 1e-6);

        let sin = TrilinearSymbol::parse("1 + 0.5*sin(x1-x3)").unwrap();
        let rep = check_hypotheses(&sin, 5.0, 1000).unwrap();
        assert!(rep.h2_pass);
        // Diagonal value is exactly 1: sin(0) = 0 after symmetrization.
        assert!(rep.h3_pass);
        assert!((rep.h3_min_diagonal - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quartic_mass_vanishes_for_constant_symbol() {
        let one = TrilinearSymbol::constant(1.0);
        let c4 = quartic_mass_symbol(&one);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let xi = [
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
            ];
            assert_eq!(c4.eval(xi), C64::ZERO);
        }
    }

    #[test]
    fn quartic_mass_vanishes_on_resonant_set() {
        let c = TrilinearSymbol::parse("1 + 0.5*sin(x1-x3) + 0.25*cos(x2)").unwrap();
        let c4 = quartic_mass_symbol(&c);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(-10.0..10.0);
            let b: f64 = rng.gen_range(-10.0..10.0);
            assert!(c4.eval([a, a, b, b]).norm() < crate::tol::RESONANT_VANISHING);
            assert!(c4.eval([a, b, b, a]).norm() < crate::tol::RESONANT_VANISHING);
        }
        // Off the resonant set but with Δ⁴ξ = 0 the symbol is generically nonzero.
        assert!(c4.eval([0.0, 1.0, 3.0, 2.0]).norm() > 1e-3);
    }

    #[test]
    fn quartic_momentum_reference_points() {
        let one = TrilinearSymbol::constant(1.0);
        let a = Localizer::all_pass();
        let c4p = quartic_momentum_symbol(&one, &a, 0.0);
        // Vanishes on the resonant set.
        assert!(c4p.eval([1.0, 1.0, 3.0, 3.0]).norm() < 1e-14);
        // Equals i Δ⁴ξ for the constant symbol.
        let xi = [0.7, -1.3, 2.2, 0.4];
        let expect = C64::new(0.0, resonance::delta4(xi));
        assert!((c4p.eval(xi) - expect).norm() < 1e-13);
        // At the full diagonal of the recentering frequency the weight dies.
        let loc = Localizer::unit_bin(0);
        let c4p = quartic_momentum_symbol(&one, &loc, 0.3);
        assert!(c4p.eval([0.3, 0.3, 0.3, 0.3]).norm() < 1e-15);
    }

    #[test]
    fn quartic_momentum_matches_term_by_term_assembly() {
        let c = TrilinearSymbol::parse("1 + 0.5*exp(-((x1-2*x2+x3)^2)/8)").unwrap();
        let a = Localizer::unit_bin(0);
        let xi0 = 0.5;
        let c4p = quartic_momentum_symbol(&c, &a, xi0);
        let p = |x: f64, y: f64| (-x - y + 2.0 * xi0) * a.a(x, y);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let xi: [f64; 4] = [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
            ];
            let [x1, x2, x3, x4] = xi;
            let hand = C64::new(0.0, -0.5)
                * (c.eval([x1, x2, x3]) * p(x1 - x2 + x3, x4)
                    + c.eval([x1, x4, x3]) * p(x1 - x4 + x3, x2)
                    - c.eval([x2, x3, x4]).conj() * p(x1, x2 - x3 + x4)
                    - c.eval([x2, x1, x4]).conj() * p(x3, x2 - x1 + x4));
            assert!((c4p.eval(xi) - hand).norm() < 1e-14);
        }
    }

    #[test]
    fn table_symbol_roundtrip() {
        let mut csv = String::from("xi1,xi2,xi3,re,im\n");
        let knots = [-1.0, 0.0, 1.0];
        for a in knots {
            for b in knots {
                for c in knots {
                    let v = 1.0 + 0.1 * (a + c) + 0.05 * b;
                    csv.push_str(&format!("{a},{b},{c},{v},0.0\n"));
                }
            }
        }
        let table = SymbolTable::from_csv(&csv).unwrap();
        let sym = TrilinearSymbol::from_table(table);
        // Exact at knots, linear in between: the underlying function is affine.
        assert!((sym.eval([0.0, 0.0, 0.0]).re - 1.0).abs() < 1e-12);
        assert!((sym.eval([0.5, -0.5, 0.5]).re - (1.0 + 0.1 - 0.025)).abs() < 1e-12);
        // Incomplete lattices are rejected.
        let bad = "0,0,0,1,0\n0,0,1,1,0\n";
        assert!(SymbolTable::from_csv(bad).is_err());
    }
}
