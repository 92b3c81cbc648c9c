//! The symmetrized problem on the disk `Ω^♯` of radius `R`:
//!
//! ```text
//!   -(r v')' = f^♯(r) r^{l+1}        0 < r < R
//!   v'(R) + β R^{l/2} v(R) = 0
//! ```
//!
//! In the variable `s = 2π r^{l+2} / (l+2)` the source is the piecewise
//! linear profile `f*(s)`, the flux is `Q(r) = F(s) / 2π` with `F` the
//! primitive of `f*`, and
//!
//! ```text
//!   v(R) = Q(R) / (β R^{(l+2)/2}),
//!   v(s) = v(R) + 1/(2π(l+2)) ∫_s^S F(σ)/σ dσ,
//! ```
//!
//! which is evaluated in closed form piece by piece. The first eigenvalue
//! comes from a self-adjoint three-point scheme on a graded grid.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{disk_measure, SymmetrizedDisk};
use crate::quadrature::gauss_legendre;
use crate::rearrange::{DistributionCurve, RearrangementProfile};

/// Grid size for symmetrized solves.
pub const DEFAULT_GRID: usize = 2048;
/// Fine grid size for the eigenvalue; the coarse grid has half as many cells.
pub const DEFAULT_EIGEN_GRID: usize = 8192;

/// One linear piece of the source profile.
#[derive(Debug, Clone, PartialEq)]
struct Piece {
    s0: f64,
    s1: f64,
    f0: f64,
    /// slope of `f*` on the piece
    slope: f64,
    /// `F(s0)`
    big_f0: f64,
    /// `∫_{s1}^S F(σ)/σ dσ`
    tail1: f64,
}

impl Piece {
    fn primitive(&self, s: f64) -> f64 {
        let d = s - self.s0;
        self.big_f0 + self.f0 * d + 0.5 * self.slope * d * d
    }

    /// `∫_{a}^{b} F(σ)/σ dσ` for `s0 ≤ a ≤ b ≤ s1`.
    fn log_moment(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let half = 0.5 * self.slope;
        if self.s0 == 0.0 {
            // F(σ) = f0 σ + slope σ²/2
            return self.f0 * (b - a) + 0.5 * half * (b - a) * (b + a);
        }
        // F(σ) = A + B σ + C σ²
        let s0 = self.s0;
        let c_a = self.big_f0 - self.f0 * s0 + half * s0 * s0;
        let c_b = self.f0 - self.slope * s0;
        c_a * ((b - a) / a).ln_1p() + c_b * (b - a) + half * 0.5 * (b - a) * (b + a)
    }
}

/// Closed-form solution of the symmetrized problem.
#[derive(Debug, Clone, PartialEq)]
struct ClosedForm {
    pieces: Vec<Piece>,
    total: f64,
    v_boundary: f64,
    factor: f64,
}

impl ClosedForm {
    fn new(profile: &RearrangementProfile, total: f64, l: f64, beta: f64, radius: f64) -> Self {
        let mut pieces: Vec<Piece> = Vec::new();
        let mut big_f = 0.0;
        let bp = &profile.breakpoints;
        for j in 1..bp.len() {
            let (s0, s1) = (bp[j - 1], bp[j].min(total));
            if s1 <= s0 {
                continue;
            }
            let (f0, f1) = (profile.values[j - 1], profile.values[j]);
            let slope = (f1 - f0) / (bp[j] - s0);
            let piece = Piece { s0, s1, f0, slope, big_f0: big_f, tail1: 0.0 };
            big_f = piece.primitive(s1);
            pieces.push(piece);
            if s1 >= total {
                break;
            }
        }
        // profile shorter than the disk measure: continue with its last value
        let reach = pieces.last().map_or(0.0, |p| p.s1);
        if reach < total {
            let f0 = profile.values.last().copied().unwrap_or(0.0);
            pieces.push(Piece { s0: reach, s1: total, f0, slope: 0.0, big_f0: big_f, tail1: 0.0 });
        }
        let mut tail = 0.0;
        for p in pieces.iter_mut().rev() {
            p.tail1 = tail;
            tail += p.log_moment(p.s0, p.s1);
        }
        let flux_total = pieces.last().map_or(0.0, |p| p.primitive(p.s1));
        let q_boundary = flux_total / (2.0 * PI);
        Self {
            pieces,
            total,
            v_boundary: q_boundary / (beta * radius.powf(0.5 * (l + 2.0))),
            factor: 1.0 / (2.0 * PI * (l + 2.0)),
        }
    }

    fn piece_at(&self, s: f64) -> &Piece {
        let k = self.pieces.partition_point(|p| p.s1 < s);
        &self.pieces[k.min(self.pieces.len() - 1)]
    }

    fn value(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total);
        let p = self.piece_at(s);
        self.v_boundary + self.factor * (p.log_moment(s, p.s1) + p.tail1)
    }

    /// `F(s)`
    fn primitive(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.total);
        self.piece_at(s).primitive(s)
    }
}

/// A radial function tabulated on a graded grid of `[0, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub radius: f64,
    pub l: f64,
    pub beta: f64,
    closed: Option<ClosedForm>,
}

/// Scalars exported next to a radial table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialScalars {
    #[serde(rename = "R")]
    pub radius: f64,
    pub l: f64,
    pub beta: f64,
    pub v0: f64,
    #[serde(rename = "vR")]
    pub v_boundary: f64,
    pub lambda: Option<f64>,
}

/// `r_i = R (i/n)^g` with `g = max(1, 2/(l+2))`.
pub fn graded_grid(radius: f64, l: f64, n: usize) -> Vec<f64> {
    let g = (2.0 / (l + 2.0)).max(1.0);
    (0..=n)
        .map(|i| {
            if i == n {
                radius
            } else {
                radius * (i as f64 / n as f64).powf(g)
            }
        })
        .collect()
}

impl RadialField {
    /// A tabulated radial function interpolated linearly in `r`.
    pub fn from_table(radii: Vec<f64>, values: Vec<f64>, l: f64, beta: f64) -> Result<Self> {
        if radii.len() < 2 || radii.len() != values.len() {
            return Err(Error::Argument("radial table needs at least two matching rows".into()));
        }
        if radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] != 0.0 {
            return Err(Error::Argument("radii must start at 0 and increase".into()));
        }
        let radius = *radii.last().unwrap();
        Ok(Self { radii, values, radius, l, beta, closed: None })
    }

    /// `v(r)` for `0 ≤ r ≤ R` (clamped outside).
    pub fn value_at(&self, r: f64) -> f64 {
        if let Some(c) = &self.closed {
            return c.value(disk_measure(r.clamp(0.0, self.radius), self.l));
        }
        let r = r.clamp(0.0, self.radius);
        let k = self.radii.partition_point(|&x| x < r).clamp(1, self.radii.len() - 1);
        let (r0, r1) = (self.radii[k - 1], self.radii[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * (r - r0) / (r1 - r0)
    }

    pub fn value_at_origin(&self) -> f64 {
        self.value_at(0.0)
    }

    pub fn value_at_boundary(&self) -> f64 {
        self.value_at(self.radius)
    }

    /// `Q(r) = ∫_0^r f^♯(ρ) ρ^{l+1} dρ`, available for symmetrized solves.
    pub fn flux(&self, r: f64) -> Option<f64> {
        self.closed
            .as_ref()
            .map(|c| c.primitive(disk_measure(r.clamp(0.0, self.radius), self.l)) / (2.0 * PI))
    }

    /// `(∫_{Ω^♯} |v|^p |x|^l dx)^{1/p}`, integrated in `s` cell by cell.
    pub fn weighted_lp_norm(&self, p: f64) -> f64 {
        let gl = gauss_legendre(8);
        let l = self.l;
        let mut total = 0.0;
        for w in self.radii.windows(2) {
            let (s0, s1) = (disk_measure(w[0], l), disk_measure(w[1], l));
            total += gl.integrate(s0, s1, |s| {
                let r = (s * (l + 2.0) / (2.0 * PI)).powf(1.0 / (l + 2.0));
                self.value_at(r).abs().powf(p)
            });
        }
        total.powf(1.0 / p)
    }

    /// `v'(R)` by the one-sided four-point difference with step `10^{-3} R`.
    pub fn boundary_derivative(&self) -> f64 {
        let h = 1e-3 * self.radius;
        let r = self.radius;
        let v = |k: f64| self.value_at(r - k * h);
        (11.0 * v(0.0) - 18.0 * v(1.0) + 9.0 * v(2.0) - 2.0 * v(3.0)) / (6.0 * h)
    }

    /// `|v'(R) + β R^{l/2} v(R)| / |v(R)|`
    pub fn boundary_residual(&self) -> f64 {
        let vr = self.value_at_boundary();
        let res = self.boundary_derivative() + self.beta * self.radius.powf(0.5 * self.l) * vr;
        if vr == 0.0 {
            res.abs()
        } else {
            (res / vr).abs()
        }
    }

    /// The stored table is nonincreasing.
    pub fn is_nonincreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn scalars(&self, lambda: Option<f64>) -> RadialScalars {
        RadialScalars {
            radius: self.radius,
            l: self.l,
            beta: self.beta,
            v0: self.value_at_origin(),
            v_boundary: self.value_at_boundary(),
            lambda,
        }
    }

    /// CSV with header `r,v`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,v")?;
        for (r, v) in self.radii.iter().zip(&self.values) {
            writeln!(w, "{r},{v}")?;
        }
        Ok(())
    }
}

/// Solves the symmetrized problem for the source profile `fsharp` on
/// `disk`, tabulated on [`DEFAULT_GRID`] cells.
pub fn solve_symmetrized(fsharp: &RearrangementProfile, disk: &SymmetrizedDisk) -> Result<RadialField> {
    solve_symmetrized_on(fsharp, disk, DEFAULT_GRID)
}

pub fn solve_symmetrized_on(
    fsharp: &RearrangementProfile,
    disk: &SymmetrizedDisk,
    n_grid: usize,
) -> Result<RadialField> {
    if n_grid < 2 {
        return Err(Error::Argument(format!("radial grid needs at least 2 cells, got {n_grid}")));
    }
    if let Some(&v) = fsharp.values.iter().find(|&&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::NegativeSource { value: v, x: 0.0, y: 0.0 });
    }
    let (l, beta, radius) = (disk.l, disk.beta, disk.radius);
    let closed = ClosedForm::new(fsharp, disk.weighted_measure, l, beta, radius);
    let radii = graded_grid(radius, l, n_grid);
    let mut values: Vec<f64> = radii.iter().map(|&r| closed.value(disk_measure(r, l))).collect();
    // the exact solution is nonincreasing; remove round-off wiggles in the table
    for k in 1..values.len() {
        if values[k] > values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    Ok(RadialField { radii, values, radius, l, beta, closed: Some(closed) })
}

/// `φ(t) = |{v > t}|_l` of a radially nonincreasing table, by inversion.
pub fn radial_distribution(v: &RadialField) -> Result<DistributionCurve> {
    if let Some(k) = (1..v.values.len()).find(|&k| v.values[k] > v.values[k - 1]) {
        return Err(Error::NonMonotone(v.radii[k]));
    }
    let n = v.radii.len();
    let mut levels = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let t = v.values[k].abs();
        // inside a plateau only the ends matter
        if k + 1 < n && k > 0 && v.values[k + 1] == v.values[k] && v.values[k - 1] == v.values[k] {
            continue;
        }
        levels.push(t);
        values.push(disk_measure(v.radii[k], v.l));
    }
    Ok(DistributionCurve {
        levels,
        values,
        total_measure: disk_measure(v.radius, v.l),
    })
}

/// First eigenpair of the disk problem.
#[derive(Debug, Clone)]
pub struct RadialEigen {
    /// Richardson extrapolation of the two grids
    pub lambda: f64,
    pub lambda_coarse: f64,
    pub lambda_fine: f64,
    /// eigenfunction on the fine grid, `∫ v² |x|^l dx = 1`, positive
    pub field: RadialField,
    /// `‖A v - λ M v‖ / ‖v‖` on the fine grid
    pub residual: f64,
}

/// Smallest eigenvalue of `-Δv = λ|x|^l v` on `disk` with the Robin
/// condition `∂v/∂ν + β R^{l/2} v = 0`; `n_grid` is the fine grid size.
pub fn radial_eigen(disk: &SymmetrizedDisk, n_grid: usize) -> Result<RadialEigen> {
    if n_grid < 64 {
        return Err(Error::Argument(format!("radial eigen grid must have at least 64 cells, got {n_grid}")));
    }
    let coarse = sturm_liouville(disk, n_grid / 2)?;
    let fine = sturm_liouville(disk, n_grid)?;
    let lambda = fine.lambda + (fine.lambda - coarse.lambda) / 3.0;
    let radii = graded_grid(disk.radius, disk.l, n_grid);
    let field = RadialField::from_table(radii, fine.vector, disk.l, disk.beta)?;
    Ok(RadialEigen {
        lambda,
        lambda_coarse: coarse.lambda,
        lambda_fine: fine.lambda,
        field,
        residual: fine.residual,
    })
}

struct GridEigen {
    lambda: f64,
    vector: Vec<f64>,
    residual: f64,
}

/// Tridiagonal `A` (diagonal, upper) and lumped mass for the
/// finite-volume scheme on the graded grid.
fn sturm_liouville_matrices(disk: &SymmetrizedDisk, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (l, radius) = (disk.l, disk.radius);
    let r = graded_grid(radius, l, n);
    let mut diag = vec![0.0; n + 1];
    let mut upper = vec![0.0; n];
    for i in 0..n {
        let mid = 0.5 * (r[i] + r[i + 1]);
        let c = mid / (r[i + 1] - r[i]);
        diag[i] += c;
        diag[i + 1] += c;
        upper[i] = -c;
    }
    diag[n] += disk.beta * radius.powf(1.0 + 0.5 * l);
    let moment = |a: f64, b: f64| (b.powf(l + 2.0) - a.powf(l + 2.0)) / (l + 2.0);
    let mass: Vec<f64> = (0..=n)
        .map(|i| {
            let a = if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
            let b = if i == n { radius } else { 0.5 * (r[i] + r[i + 1]) };
            moment(a, b)
        })
        .collect();
    (diag, upper, mass)
}

fn tridiagonal_mul(diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
    let n = diag.len();
    (0..n)
        .map(|i| {
            let mut y = diag[i] * x[i];
            if i > 0 {
                y += upper[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y += upper[i] * x[i + 1];
            }
            y
        })
        .collect()
}

/// Thomas algorithm for a symmetric tridiagonal system.
fn thomas(diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - upper[i - 1] * c[i - 1];
        if i + 1 < n {
            c[i] = upper[i] / denom;
        }
        d[i] = (rhs[i] - upper[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    x
}

fn sturm_liouville(disk: &SymmetrizedDisk, n: usize) -> Result<GridEigen> {
    let (diag, upper, mass) = sturm_liouville_matrices(disk, n);
    let m_norm = |x: &[f64]| x.iter().zip(&mass).map(|(v, m)| v * v * m).sum::<f64>().sqrt();
    let mut x = vec![1.0; n + 1];
    let norm = m_norm(&x);
    x.iter_mut().for_each(|v| *v /= norm);
    let mut lambda = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 0..500 {
        let rhs: Vec<f64> = x.iter().zip(&mass).map(|(v, m)| v * m).collect();
        let mut y = thomas(&diag, &upper, &rhs);
        let norm = m_norm(&y);
        y.iter_mut().for_each(|v| *v /= norm);
        let ay = tridiagonal_mul(&diag, &upper, &y);
        let new_lambda: f64 = ay.iter().zip(&y).map(|(a, v)| a * v).sum();
        let res: f64 = ay
            .iter()
            .zip(&y)
            .zip(&mass)
            .map(|((a, v), m)| (a - new_lambda * m * v).powi(2))
            .sum::<f64>()
            .sqrt()
            / y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let converged = (new_lambda - lambda).abs() <= 1e-15 * new_lambda.abs() && it > 2;
        lambda = new_lambda;
        residual = res;
        x = y;
        if converged || res <= 1e-13 * lambda {
            break;
        }
    }
    if !(residual <= 1e-8 * lambda.max(1.0)) {
        return Err(Error::Eigen { iterations: 500, residual });
    }
    if x[0] < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    // continuous normalization ∫ v² |x|^l dx = 2π Σ m_i v_i² = 1
    let scale = (2.0 * PI).sqrt();
    x.iter_mut().for_each(|v| *v /= scale);
    Ok(GridEigen { lambda, vector: x, residual })
}
