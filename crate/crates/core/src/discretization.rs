//! Uniform grid on `Ω = (-L, L)` and the dense nonlocal operator with zero
//! exterior data.
//!
//! `(A u)_i` approximates `c_{1,s} PV∫ (u(x_i) - ũ(y)) |x_i - y|^{-1-2s} dy`,
//! `ũ` the piecewise-linear interpolant of `u` extended by zero outside `Ω`.
//! On the self panel `|y - x_i| < h` the integrand is replaced by its
//! second-order Taylor expansion; beyond it the hat functions are integrated
//! against the kernel. The interpolation error `ũ - u ≈ ½u''(ρ-k)(k+1-ρ)h²`
//! of the far panels contributes `-c h^{2-2s} β u''` with
//! `β = Σ_{k≥1} ∫_k^{k+1} (ρ-k)(k+1-ρ) ρ^{-1-2s} dρ`; it is removed with the
//! same second difference that serves the near field. In units of `c h^{-2s}`:
//!
//! ```text
//! A_ii       = 2/(2-2s) + 1/s - 2b
//! A_i,i±1    = -(1/(2-2s) + w_1 - b)
//! A_i,i±k    = -w_k,            k ≥ 2
//! w_k        = ∫_{ρ>1} hat(ρ - k) ρ^{-1-2s} dρ
//! b          = min(β, (1/(2-2s) + w_1)/2)
//! ```
//!
//! The cap on `b` only binds for `s` below about 0.19 and keeps the first
//! off-diagonal negative. The weights are nonnegative and
//! `Σ_{k≥1} w_k = 1/(2s)`, so the row sums are the (positive) kernel mass that
//! falls outside the grid: the exterior condition enters only through the
//! diagonal. `A` is symmetric, Toeplitz and an M-matrix.

use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::specfun::{check_order, cns};

/// Gauss–Legendre points per unit panel for the far-field weights.
const WEIGHT_RULE_POINTS: usize = 16;

/// Interior nodes `x_i = -L + i h`, `i = 1..=n`, with `h = 2L/(n+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_width: f64,
    n: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("domain half-width L = {half_width} must be positive")));
        }
        if n == 0 {
            return Err(Error::Domain("grid needs at least one interior node".into()));
        }
        Ok(Self {
            half_width,
            n,
            h: 2.0 * half_width / (n as f64 + 1.0),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Node `i` for `i` in `0..n` (the first interior node is `-L + h`).
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Grid with `2(n+1) - 1` nodes, whose nodes contain the current ones.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            n: 2 * self.n + 1,
            h: 0.5 * self.h,
        }
    }

    /// Samples `f` at the nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.node(i))).collect()
    }

    /// Discrete `L²` inner product `h Σ u_i v_i`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.h * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }
}

/// Nonnegative weight `q` sampled at the nodes, with floor `q₀` on an open interval.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    values: Vec<f64>,
    q0: f64,
    floor: (f64, f64),
}

impl WeightField {
    /// Samples `q` and checks `q ≥ 0` everywhere and `q ≥ q₀` on nodes in `floor`.
    pub fn new(
        grid: &Grid1D,
        q0: f64,
        floor: (f64, f64),
        q: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if !(q0 > 0.0 && q0.is_finite()) {
            return Err(Error::Domain(format!("(Q2) requires a floor q0 > 0, got {q0}")));
        }
        let (a, b) = floor;
        let l = grid.half_width();
        if !(a < b && a >= -l && b <= l) {
            return Err(Error::Domain(format!(
                "(Q2) requires a nonempty floor interval inside (-{l}, {l}), got ({a}, {b})"
            )));
        }
        let values = grid.sample(&q);
        let mut inside = 0;
        for (i, &v) in values.iter().enumerate() {
            let x = grid.node(i);
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("(Q1) requires 0 <= q < inf, got q({x}) = {v}")));
            }
            if x > a && x < b {
                inside += 1;
                if v < q0 {
                    return Err(Error::Domain(format!(
                        "(Q2) requires q >= q0 = {q0} on ({a}, {b}), got q({x}) = {v}"
                    )));
                }
            }
        }
        if inside == 0 {
            return Err(Error::Domain(format!("floor interval ({a}, {b}) contains no grid node")));
        }
        Ok(Self { values, q0, floor })
    }

    /// `q ≡ value`, floor `value` on `floor`.
    pub fn constant(grid: &Grid1D, value: f64, floor: (f64, f64)) -> Result<Self> {
        Self::new(grid, value, floor, |_| value)
    }

    /// Weight without the floor check; `q ≡ 0` is representable here.
    pub fn unchecked(values: Vec<f64>) -> Self {
        Self {
            values,
            q0: 0.0,
            floor: (0.0, 0.0),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn floor(&self) -> (f64, f64) {
        self.floor
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Same weight multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            q0: self.q0 * factor,
            floor: self.floor,
        }
    }

    /// `q_i |u_i|^{α-1} u_i`, with `0^α = 0`.
    pub fn reaction(&self, u: &[f64], alpha: f64) -> Vec<f64> {
        self.values
            .iter()
            .zip(u)
            .map(|(q, &v)| q * signed_power(v, alpha))
            .collect()
    }
}

/// `|v|^{α-1} v`, continuous at zero.
pub fn signed_power(v: f64, alpha: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v.signum() * v.abs().powf(alpha)
    }
}

/// Far-field weights `w_k`, `k = 0..len` (`w_0 = 0`).
pub fn far_field_weights(s: f64, len: usize) -> Vec<f64> {
    let rule = GaussLegendre::new(WEIGHT_RULE_POINTS);
    let kernel = |r: f64| r.powf(-1.0 - 2.0 * s);
    let mut w = vec![0.0; len];
    if len > 1 {
        w[1] = rule.integrate(1.0, 2.0, |r| (2.0 - r) * kernel(r));
    }
    for (k, wk) in w.iter_mut().enumerate().skip(2) {
        let kf = k as f64;
        *wk = rule.integrate(kf - 1.0, kf, |r| (r - kf + 1.0) * kernel(r))
            + rule.integrate(kf, kf + 1.0, |r| (kf + 1.0 - r) * kernel(r));
    }
    w
}

/// `β = Σ_{k≥1} ∫_k^{k+1} (ρ-k)(k+1-ρ) ρ^{-1-2s} dρ`.
///
/// Panels up to `k = 256` are integrated, the rest is the mean `1/6` of the
/// periodic factor plus the first Euler–Maclaurin correction.
pub fn interpolation_defect(s: f64) -> f64 {
    const PANELS: usize = 256;
    let rule = GaussLegendre::new(WEIGHT_RULE_POINTS);
    let mut sum = 0.0;
    for k in 1..PANELS {
        let kf = k as f64;
        sum += rule.integrate(kf, kf + 1.0, |r| (r - kf) * (kf + 1.0 - r) * r.powf(-1.0 - 2.0 * s));
    }
    let big_k = PANELS as f64;
    let tail = big_k.powf(-2.0 * s) / (12.0 * s) - (1.0 + 2.0 * s) * big_k.powf(-2.0 - 2.0 * s) / 360.0;
    sum + tail
}

/// The assembled operator `A` and the grid it lives on.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<f64>,
    grid: Grid1D,
    s: f64,
}

/// Dense assembly of `A`; rows are filled in parallel, each entry independently.
pub fn assemble_operator(grid: &Grid1D, s: f64) -> Result<OperatorMatrix> {
    check_order(s)?;
    let n = grid.len();
    if n < 3 {
        return Err(Error::Domain(format!("operator needs n >= 3 interior nodes, got {n}")));
    }
    let scale = cns(1, s)? * grid.spacing().powf(-2.0 * s);
    let w = far_field_weights(s, n);
    let near = 1.0 / (2.0 - 2.0 * s);
    let b = interpolation_defect(s).min(0.5 * (near + w[1]));
    let mut band = vec![0.0; n];
    band[0] = scale * (2.0 * near + 1.0 / s - 2.0 * b);
    band[1] = -scale * (near + w[1] - b);
    for k in 2..n {
        band[k] = -scale * w[k];
    }
    // column-major storage: column j holds band[|i - j|]
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(j, col)| {
        for (i, e) in col.iter_mut().enumerate() {
            *e = band[i.abs_diff(j)];
        }
    });
    Ok(OperatorMatrix {
        entries: DMatrix::from_vec(n, n, data),
        grid: *grid,
        s,
    })
}

impl OperatorMatrix {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.dim(),
                got: v.len(),
            })
        }
    }

    pub fn apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(u)?;
        let v = &self.entries * DVector::from_column_slice(u);
        Ok(v.as_slice().to_vec())
    }

    /// Worst violation of the M-matrix sign pattern and of diagonal dominance (0 when it holds).
    pub fn m_matrix_defect(&self) -> f64 {
        let n = self.dim();
        let mut defect: f64 = 0.0;
        for i in 0..n {
            let mut off = 0.0;
            for j in 0..n {
                let a = self.entries[(i, j)];
                if i != j {
                    defect = defect.max(a);
                    off += a.abs();
                } else {
                    defect = defect.max(-a);
                }
            }
            defect = defect.max(off - self.entries[(i, i)]);
        }
        defect
    }

    /// Largest `|A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                m = m.max((self.entries[(i, j)] - self.entries[(j, i)]).abs());
            }
        }
        m
    }

    /// Cholesky factor of `shift·I + A`.
    pub fn shifted_cholesky(&self, shift: f64) -> Result<Cholesky<f64, Dyn>> {
        let n = self.dim();
        let m = &self.entries + DMatrix::identity(n, n) * shift;
        Cholesky::new(m).ok_or_else(|| {
            Error::Numeric(format!("shift {shift} + A is not positive definite"))
        })
    }

    /// Factored `shift·I + A`, reusable for any number of right-hand sides.
    pub fn factor(&self, shift: f64) -> Result<ShiftedSolver> {
        Ok(ShiftedSolver {
            chol: self.shifted_cholesky(shift)?,
            shift,
        })
    }

    /// Writes `row,col,value` lines (zero-based indices, 17 significant digits).
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                writeln!(out, "{i},{j},{:.16e}", self.entries[(i, j)])?;
            }
        }
        Ok(())
    }
}

/// Cholesky factorization of `shift·I + A`.
#[derive(Debug, Clone)]
pub struct ShiftedSolver {
    chol: Cholesky<f64, Dyn>,
    shift: f64,
}

impl ShiftedSolver {
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Solves `(shift·I + A) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = DVector::from_column_slice(b);
        self.chol.solve_mut(&mut x);
        x.as_slice().to_vec()
    }
}

/// `E_h(u, v) = h uᵀ A v`.
pub fn energy(u: &[f64], v: &[f64], a: &OperatorMatrix) -> Result<f64> {
    a.check_len(u)?;
    let av = a.apply(v)?;
    Ok(a.grid().inner(u, &av))
}

/// One eigenpair of `A`; the vector is normalised in the `h`-weighted norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// The `k` smallest eigenpairs, increasing; the first vector has positive sum.
pub fn eigendecomposition(a: &OperatorMatrix, k: usize) -> Result<Vec<EigenPair>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let max_iter = 100 * n;
    let eig = SymmetricEigen::try_new(a.entries.clone(), f64::EPSILON, max_iter).ok_or_else(|| {
        Error::Numeric(format!("symmetric eigensolver did not converge in {max_iter} sweeps"))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let scale = 1.0 / a.grid().spacing().sqrt();
    let mut pairs: Vec<EigenPair> = order[..k]
        .iter()
        .map(|&c| EigenPair {
            value: eig.eigenvalues[c],
            vector: eig.eigenvectors.column(c).iter().map(|v| v * scale).collect(),
        })
        .collect();
    for p in &mut pairs {
        if p.vector.iter().sum::<f64>() < 0.0 {
            p.vector.iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn closed_form_weight(s: f64, k: usize) -> f64 {
        // G'' = ρ^{-1-2s}
        let e = 1.0 - 2.0 * s;
        let g = |r: f64| {
            if e == 0.0 {
                -r.ln()
            } else {
                -(e * r.ln()).exp_m1() / e / (2.0 * s)
            }
        };
        let g1 = |r: f64| r.powf(-2.0 * s) / (-2.0 * s);
        let kf = k as f64;
        if k == 1 {
            -g1(1.0) + g(2.0) - g(1.0)
        } else {
            g(kf + 1.0) - 2.0 * g(kf) + g(kf - 1.0)
        }
    }

    #[test]
    fn weights_match_closed_form() {
        for s in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let w = far_field_weights(s, 40);
            for (k, &wk) in w.iter().enumerate().take(6).skip(1) {
                assert_relative_eq!(wk, closed_form_weight(s, k), max_relative = 1e-12);
            }
            assert!(w.iter().skip(1).all(|&v| v > 0.0));
            // the full sum is 1/(2s); the tail beyond 40 is about 40^{-2s}/(2s)
            let total: f64 = w.iter().sum();
            assert!(total < 0.5 / s);
        }
    }

    #[test]
    fn interpolation_defect_values() {
        // high-precision sums of the panel integrals
        for (s, v) in [(0.2, 0.4132975995299342), (0.5, 0.16212293359134897), (0.9, 0.08675220014507103)] {
            assert_relative_eq!(interpolation_defect(s), v, max_relative = 1e-9);
        }
    }

    #[test]
    fn grid_layout() {
        let g = Grid1D::new(1.0, 3).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.nodes(), vec![-0.5, 0.0, 0.5]);
        let f = g.refined();
        assert_eq!(f.len(), 7);
        assert_eq!(f.node(1), g.node(0));
        assert!(Grid1D::new(0.0, 3).is_err());
    }

    #[test]
    fn small_operator_structure() {
        let g = Grid1D::new(1.0, 7).unwrap();
        let a = assemble_operator(&g, 0.5).unwrap();
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.m_matrix_defect(), 0.0);
        let ones = a.apply(&[1.0; 7]).unwrap();
        assert!(ones.iter().all(|&v| v > 0.0));
        assert!(assemble_operator(&Grid1D::new(1.0, 2).unwrap(), 0.5).is_err());
        assert!(assemble_operator(&g, 1.0).is_err());
    }

    #[test]
    fn energy_checks_dimensions() {
        let g = Grid1D::new(1.0, 5).unwrap();
        let a = assemble_operator(&g, 0.3).unwrap();
        assert_eq!(energy(&[0.0; 5], &[1.0; 5], &a).unwrap(), 0.0);
        assert!(matches!(
            energy(&[0.0; 4], &[1.0; 5], &a),
            Err(Error::Dimension { expected: 5, got: 4 })
        ));
    }

    #[test]
    fn weight_field_validation() {
        let g = Grid1D::new(1.0, 15).unwrap();
        assert!(WeightField::constant(&g, 1.0, (-0.5, 0.5)).is_ok());
        assert!(WeightField::constant(&g, 0.0, (-0.5, 0.5)).is_err());
        assert!(WeightField::new(&g, 1.0, (-0.5, 0.5), |x| if x.abs() < 0.2 { 0.5 } else { 1.0 }).is_err());
        assert!(WeightField::new(&g, 1.0, (-0.5, 0.5), |x| if x > 0.6 { -1.0 } else { 1.0 }).is_err());
        assert!(WeightField::constant(&g, 1.0, (0.01, 0.02)).is_err());
        assert_eq!(signed_power(-4.0, 0.5), -2.0);
        assert_eq!(signed_power(0.0, 0.5), 0.0);
    }
}
