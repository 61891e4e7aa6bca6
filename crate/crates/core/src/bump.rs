//! The barrier `ψ_{x₀,R}(x) = (R² - |x - x₀|²)₊^p` and the time profile `θ`.
//!
//! Inside the ball the fractional Laplacian of `ψ` is known in closed form,
//!
//! ```text
//! (-Δ)^s ψ_{x₀,R}(x) = R^{2p-2s} κ ₂F₁(s + N/2, s - p; N/2; |x - x₀|²/R²),
//! ```
//!
//! obtained from the unit bump by translation and the dilation rule
//! `(-Δ)^s[v(·/R)] = R^{-2s} ((-Δ)^s v)(·/R)`. In one dimension the same
//! quantity is also computed directly from the singular integral, which
//! serves as an independent check of the closed form and gives the values
//! outside the ball, where no closed form is used.
//!
//! `θ(t) = ((1-α) a t)^{1/(1-α)}` solves `θ' = a θ^α`, `θ(0) = 0`. Together with
//! the ratio bound `(-Δ)^sψ/ψ ≤ C` it makes `θ(t)ψ(x)` a subsolution for
//! `t < 1/((1-α)C)`.

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;
use crate::specfun::{cns, hyp2f1, kappa, FracParams};

/// Even Taylor orders kept in the near-field expansion of the quadrature.
const NEAR_FIELD_ORDER: usize = 12;
const QUAD_PANEL_BUDGET: usize = 4000;
/// Multiplier applied to the scanned maximum of the ratio `(-Δ)^sψ/ψ`.
pub const RATIO_SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    center: f64,
    radius: f64,
    params: FracParams,
    kappa: f64,
}

impl BumpProfile {
    pub fn new(center: f64, radius: f64, params: FracParams) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(Error::Domain(format!(
                "bump needs a finite centre and radius > 0, got x0 = {center}, R = {radius}"
            )));
        }
        let kappa = kappa(&params)?;
        Ok(Self {
            center,
            radius,
            params,
            kappa,
        })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    /// `κ` of the unit bump with the same `(N, s, p)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Largest value of `ψ`, attained at the centre: `R^{2p}`.
    pub fn sup(&self) -> f64 {
        self.radius.powf(2.0 * self.params.p)
    }

    /// Whether `x` lies in the open ball `B_R(x₀)`.
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() < self.radius
    }

    pub fn psi(&self, x: f64) -> f64 {
        let y = x - self.center;
        let u = self.radius * self.radius - y * y;
        if u > 0.0 {
            u.powf(self.params.p)
        } else {
            0.0
        }
    }

    /// Closed-form `(-Δ)^s ψ` at distance `r < R` from the centre (any `N`).
    pub fn frac_lap_at_radius(&self, r: f64) -> Result<f64> {
        if !(r.abs() < self.radius) {
            return Err(Error::Domain(format!(
                "closed form holds inside the ball only: |x - x0| = {} >= R = {}",
                r.abs(),
                self.radius
            )));
        }
        let FracParams { s, p, .. } = self.params;
        let n2 = self.params.half_dim();
        let z = (r / self.radius).powi(2);
        let f = hyp2f1(s + n2, s - p, n2, z)?;
        Ok(self.radius.powf(2.0 * p - 2.0 * s) * self.kappa * f)
    }

    /// Closed-form `(-Δ)^s ψ(x)` for `|x - x₀| < R`.
    pub fn frac_lap_inside(&self, x: f64) -> Result<f64> {
        self.frac_lap_at_radius(x - self.center)
    }

    /// Limit of the closed form at the sphere `|x - x₀| = R`, negative for `p > 2s`.
    pub fn frac_lap_edge_limit(&self) -> Result<f64> {
        let FracParams { s, p, .. } = self.params;
        let n2 = self.params.half_dim();
        Ok(self.radius.powf(2.0 * p - 2.0 * s) * self.kappa * hyp2f1(s + n2, s - p, n2, 1.0)?)
    }

    /// `(-Δ)^s ψ(x)` from the principal-value integral, `N = 1` only.
    ///
    /// Inside the ball the integral is taken in the symmetric form
    /// `∫₀^∞ (2ψ(x) - ψ(x+r) - ψ(x-r)) r^{-1-2s} dr`; on `(0, h₀)` the bracket
    /// is replaced by its even Taylor polynomial and integrated exactly,
    /// beyond `R + |x - x₀|` the bracket is `2ψ(x)` and the tail is exact.
    /// Outside the ball the integrand `ψ(y)/|x-y|^{1+2s}` has no singularity
    /// in the open ball and is integrated directly.
    pub fn frac_lap_quadrature(&self, x: f64, tol: f64) -> Result<f64> {
        if self.params.dim != 1 {
            return Err(Error::Domain(
                "singular-integral quadrature is implemented for N = 1 only".into(),
            ));
        }
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("quadrature tolerance must be positive, got {tol}")));
        }
        let s = self.params.s;
        let c = cns(1, s)?;
        let y = x - self.center;
        let d = y.abs();
        let big_r = self.radius;
        let inner_tol = tol / c;

        if d < big_r {
            let p = self.params.p;
            let u = big_r * big_r - y * y;
            let gap = big_r - d;
            let h0 = f64::min(1e-3 * big_r, gap / 8.0);

            // (1 + e1 r + e2 r²)^p as a power series in r
            let e1 = -2.0 * y / u;
            let e2 = -1.0 / u;
            let coeffs = power_series_of_quadratic(e1, e2, p, NEAR_FIELD_ORDER);
            let up = u.powf(p);
            let near: f64 = (2..=NEAR_FIELD_ORDER)
                .step_by(2)
                .map(|j| {
                    let e = j as f64 - 2.0 * s;
                    -2.0 * up * coeffs[j] * h0.powf(e) / e
                })
                .sum();

            let psi_x = up;
            let integrand = |r: f64| {
                (2.0 * psi_x - self.psi(x + r) - self.psi(x - r)) * r.powf(-1.0 - 2.0 * s)
            };
            let r_outer = big_r + d;
            let mut points = geometric_breaks(h0, gap);
            if r_outer > gap {
                points.push(r_outer);
            }
            let far = integrate_adaptive(integrand, &points, 0.5 * inner_tol, QUAD_PANEL_BUDGET)?;
            let tail = 2.0 * psi_x * r_outer.powf(-2.0 * s) / (2.0 * s);
            Ok(c * (near + far.value + tail))
        } else {
            // distance from the nearest point of the ball, parametrised by t ∈ [0, 2R]
            let delta = d - big_r;
            let p = self.params.p;
            let integrand = |t: f64| {
                let base = t * (2.0 * big_r - t);
                if base <= 0.0 {
                    0.0
                } else {
                    base.powf(p) * (delta + t).powf(-1.0 - 2.0 * s)
                }
            };
            let start = if delta > 0.0 { delta } else { 1e-8 * big_r };
            let mut points = vec![0.0];
            points.extend(geometric_breaks(start.min(2.0 * big_r), 2.0 * big_r));
            let est = integrate_adaptive(integrand, &points, inner_tol, QUAD_PANEL_BUDGET)?;
            Ok(-c * est.value)
        }
    }

    /// `C = 1.05 · max (-Δ)^sψ/ψ` over `resolution` equispaced radii in `[0, R)`.
    pub fn ratio_bound_constant(&self, resolution: usize) -> Result<f64> {
        if resolution < 64 {
            return Err(Error::Domain(format!(
                "ratio scan needs at least 64 radii, got {resolution}"
            )));
        }
        let mut best = f64::NEG_INFINITY;
        for j in 0..resolution {
            let r = self.radius * j as f64 / resolution as f64;
            let ratio = self.frac_lap_at_radius(r)? / self.psi(self.center + r);
            best = best.max(ratio);
        }
        Ok(RATIO_SAFETY * best)
    }
}

/// `[a, 4a, 16a, …, b]`, the last break pinned to `b`.
fn geometric_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut v = vec![a];
    let mut x = a;
    while x * 4.0 < b {
        x *= 4.0;
        v.push(x);
    }
    if b > a {
        v.push(b);
    }
    v
}

/// Coefficients of `(1 + e1 r + e2 r²)^p` up to `r^order` (J. C. P. Miller's recurrence).
fn power_series_of_quadratic(e1: f64, e2: f64, p: f64, order: usize) -> Vec<f64> {
    let h = [1.0, e1, e2];
    let mut g = vec![0.0; order + 1];
    g[0] = 1.0;
    for n in 1..=order {
        let mut acc = 0.0;
        for (k, &hk) in h.iter().enumerate().skip(1).take_while(|(k, _)| *k <= n) {
            acc += ((p + 1.0) * k as f64 - n as f64) * hk * g[n - k];
        }
        g[n] = acc / n as f64;
    }
    g
}

/// Which bound on `ψ` enters the growth rate of `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ThetaConvention {
    /// `ψ ≤ R^{2p}`, the exact supremum of the bump: rate `q₀ R^{2p(α-1)}/2`.
    #[default]
    Exact,
    /// `ψ ≤ R`, rate `q₀ R^{α-1}/2`; coincides with `Exact` for `R = 1`.
    PaperNormalized,
}

/// `θ(t) = ((1-α) a t)^{1/(1-α)}`, the solution of `θ' = a θ^α` leaving zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSchedule {
    q0: f64,
    radius: f64,
    alpha: f64,
    ratio_bound: f64,
    psi_cap: f64,
    convention: ThetaConvention,
}

impl ThetaSchedule {
    pub fn new(
        q0: f64,
        profile: &BumpProfile,
        alpha: f64,
        ratio_bound: f64,
        convention: ThetaConvention,
    ) -> Result<Self> {
        if !(q0 > 0.0 && q0.is_finite()) {
            return Err(Error::Domain(format!("weight floor q0 = {q0} must be positive")));
        }
        check_sublinear(alpha)?;
        if !(ratio_bound > 0.0 && ratio_bound.is_finite()) {
            return Err(Error::Domain(format!("ratio bound C = {ratio_bound} must be positive")));
        }
        let psi_cap = match convention {
            ThetaConvention::Exact => profile.sup(),
            ThetaConvention::PaperNormalized => profile.radius(),
        };
        Ok(Self {
            q0,
            radius: profile.radius(),
            alpha,
            ratio_bound,
            psi_cap,
            convention,
        })
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ratio_bound(&self) -> f64 {
        self.ratio_bound
    }

    pub fn convention(&self) -> ThetaConvention {
        self.convention
    }

    /// Same schedule with a different weight floor.
    pub fn with_q0(&self, q0: f64) -> Result<Self> {
        if !(q0 > 0.0 && q0.is_finite()) {
            return Err(Error::Domain(format!("weight floor q0 = {q0} must be positive")));
        }
        Ok(Self { q0, ..*self })
    }

    /// Growth coefficient `a` in `θ' = a θ^α`.
    pub fn rate(&self) -> f64 {
        0.5 * self.q0 * self.psi_cap.powf(self.alpha - 1.0)
    }

    /// Bound on `θ^{1-α}` that keeps the barrier a subsolution: `a / C`.
    pub fn threshold(&self) -> f64 {
        self.rate() / self.ratio_bound
    }

    /// Horizon `T_max = 1/((1-α)C)` at which `θ^{1-α}` reaches the threshold.
    pub fn t_max(&self) -> f64 {
        1.0 / ((1.0 - self.alpha) * self.ratio_bound)
    }

    pub fn theta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        ((1.0 - self.alpha) * self.rate() * t).powf(1.0 / (1.0 - self.alpha))
    }

    pub fn theta_derivative(&self, t: f64) -> f64 {
        self.rate() * self.theta(t).powf(self.alpha)
    }
}

fn check_sublinear(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("sublinear exponent alpha = {alpha} must lie in (0, 1)")))
    }
}

/// `T_max = 1/((1-α)C)`; the `q₀` and `R` factors cancel.
pub fn max_valid_time(alpha: f64, ratio_bound: f64) -> Result<f64> {
    check_sublinear(alpha)?;
    if !(ratio_bound > 0.0) {
        return Err(Error::Domain(format!("ratio bound C = {ratio_bound} must be positive")));
    }
    Ok(1.0 / ((1.0 - alpha) * ratio_bound))
}

/// Left-hand side `θ'ψ + θ(-Δ)^sψ - q θ^α ψ^α` of the subsolution inequality.
///
/// Inside the ball the closed form of `(-Δ)^sψ` is used, outside the
/// quadrature (with tolerance `quad_tol`), where the value reduces to
/// `θ (-Δ)^sψ`.
pub fn subsolution_residual(
    t: f64,
    x: f64,
    profile: &BumpProfile,
    schedule: &ThetaSchedule,
    q_at_x: f64,
    quad_tol: f64,
) -> Result<f64> {
    if !(t >= 0.0 && t < schedule.t_max()) {
        return Err(Error::Domain(format!(
            "time {t} outside [0, T_max = {})",
            schedule.t_max()
        )));
    }
    if q_at_x < 0.0 {
        return Err(Error::Domain(format!("weight must be nonnegative, got {q_at_x}")));
    }
    let theta = schedule.theta(t);
    if theta == 0.0 {
        return Ok(0.0);
    }
    if profile.contains(x) {
        let psi = profile.psi(x);
        let lap = profile.frac_lap_inside(x)?;
        Ok(schedule.theta_derivative(t) * psi + theta * lap
            - q_at_x * theta.powf(schedule.alpha()) * psi.powf(schedule.alpha()))
    } else {
        Ok(theta * profile.frac_lap_quadrature(x, quad_tol)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit(s: f64, p: f64, r: f64) -> BumpProfile {
        BumpProfile::new(0.0, r, FracParams::new(1, s, p).unwrap()).unwrap()
    }

    #[test]
    fn psi_examples() {
        let b = unit(0.5, 2.0, 1.0);
        assert_eq!(b.psi(0.0), 1.0);
        assert_eq!(b.psi(2.0), 0.0);
        assert_eq!(b.psi(1.0), 0.0);
        assert_eq!(unit(0.5, 2.0, 2.0).psi(1.0), 9.0);
    }

    #[test]
    fn closed_form_at_centre() {
        let k = 16.0 / (3.0 * PI);
        assert_relative_eq!(unit(0.5, 2.0, 1.0).frac_lap_inside(0.0).unwrap(), k, max_relative = 1e-13);
        assert_relative_eq!(
            unit(0.5, 2.0, 2.0).frac_lap_inside(0.0).unwrap(),
            8.0 * k,
            max_relative = 1e-13
        );
        assert!(unit(0.5, 2.0, 1.0).frac_lap_inside(1.0).is_err());
        assert!(unit(0.5, 2.0, 1.0).frac_lap_edge_limit().unwrap() < 0.0);
    }

    #[test]
    fn taylor_coefficients_of_polynomial_power() {
        // (1 + r)^2 through e1 = 1, e2 = 0 and (1 - r²)^3 through e1 = 0, e2 = -1
        let g = power_series_of_quadratic(1.0, 0.0, 2.0, 4);
        assert_eq!(g, vec![1.0, 2.0, 1.0, 0.0, 0.0]);
        let g = power_series_of_quadratic(0.0, -1.0, 3.0, 8);
        let expect = [1.0, 0.0, -3.0, 0.0, 3.0, 0.0, -1.0, 0.0, 0.0];
        for (a, b) in g.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn quadrature_matches_closed_form_at_centre() {
        let b = unit(0.5, 2.0, 1.0);
        let q = b.frac_lap_quadrature(0.0, 1e-10).unwrap();
        assert_relative_eq!(q, 16.0 / (3.0 * PI), epsilon = 1e-8);
    }

    #[test]
    fn quadrature_is_negative_outside() {
        let b = unit(0.5, 2.0, 1.0);
        assert!(b.frac_lap_quadrature(1.5, 1e-10).unwrap() < 0.0);
        assert!(b.frac_lap_quadrature(1.0, 1e-10).unwrap() < 0.0);
        // far-field bound c|B_1|/(|x|-1)^{1+2s} with |B_1| = 2
        let far = b.frac_lap_quadrature(10.0, 1e-12).unwrap();
        let bound = cns(1, 0.5).unwrap() * 2.0 / 9f64.powi(2);
        assert!(far < 0.0 && far > -bound, "{far} vs {bound}");
    }

    #[test]
    fn quadrature_rejects_higher_dimension() {
        let b = BumpProfile::new(0.0, 1.0, FracParams::new(2, 0.5, 2.0).unwrap()).unwrap();
        assert!(b.frac_lap_quadrature(0.0, 1e-8).is_err());
        // the closed form remains available
        assert!(b.frac_lap_inside(0.3).unwrap().is_finite());
    }

    #[test]
    fn ratio_bound_examples() {
        let b = unit(0.5, 2.0, 1.0);
        let c = b.ratio_bound_constant(64).unwrap();
        assert!(c >= b.kappa());
        let c2 = b.ratio_bound_constant(128).unwrap();
        assert!((c2 - c).abs() / c < 0.01);
        let b2 = unit(0.5, 2.0, 2.0);
        let centre_ratio = b2.frac_lap_inside(0.0).unwrap() / b2.psi(0.0);
        assert_relative_eq!(centre_ratio, b2.kappa() * 2f64.powf(-1.0), max_relative = 1e-13);
        assert!(b2.ratio_bound_constant(64).unwrap() >= centre_ratio);
        assert!(b.ratio_bound_constant(10).is_err());
    }

    #[test]
    fn theta_examples() {
        let b = unit(0.5, 2.0, 1.0);
        let sched = ThetaSchedule::new(2.0, &b, 0.5, 1.0, ThetaConvention::Exact).unwrap();
        assert_eq!(sched.theta(0.0), 0.0);
        assert_relative_eq!(sched.theta(1.0), 0.25, max_relative = 1e-15);
        // the PaperNormalized rate matches the closed form (1/R)((1-α)q₀t/2)^{1/(1-α)}
        let b = unit(0.5, 2.0, 0.5);
        let sched = ThetaSchedule::new(2.0, &b, 0.5, 1.0, ThetaConvention::PaperNormalized).unwrap();
        assert_relative_eq!(sched.theta(0.8), (0.5 * 2.0 * 0.8 / 2.0f64).powi(2) / 0.5, max_relative = 1e-14);
    }

    #[test]
    fn max_valid_time_examples() {
        assert_relative_eq!(max_valid_time(0.5, 2.0).unwrap(), 1.0);
        // 1/((1-α)C) grows without bound as α → 1
        let mut prev = 0.0;
        for alpha in [0.1, 0.5, 0.9, 0.99] {
            let t = max_valid_time(alpha, 3.0).unwrap();
            assert!(t > prev);
            prev = t;
        }
        assert!(max_valid_time(1.0, 2.0).is_err());
        // the threshold is met with equality at T_max and strictly before
        let b = unit(0.5, 2.0, 0.5);
        let c = b.ratio_bound_constant(128).unwrap();
        let sched = ThetaSchedule::new(1.0, &b, 0.5, c, ThetaConvention::Exact).unwrap();
        let t = sched.t_max();
        assert_relative_eq!(sched.theta(t).powf(0.5), sched.threshold(), max_relative = 1e-12);
        assert!(sched.theta(0.5 * t).powf(0.5) < sched.threshold());
    }

    #[test]
    fn residual_sign_and_errors() {
        let b = unit(0.5, 2.0, 0.5);
        let c = b.ratio_bound_constant(256).unwrap();
        let sched = ThetaSchedule::new(1.0, &b, 0.5, c, ThetaConvention::Exact).unwrap();
        assert_eq!(subsolution_residual(0.0, 0.1, &b, &sched, 1.0, 1e-10).unwrap(), 0.0);
        let t = 0.5 * sched.t_max();
        assert!(subsolution_residual(t, 0.7, &b, &sched, 1.0, 1e-10).unwrap() < 0.0);
        assert!(subsolution_residual(t, 0.2, &b, &sched, 1.0, 1e-10).unwrap() <= 0.0);
        assert!(subsolution_residual(sched.t_max(), 0.2, &b, &sched, 1.0, 1e-10).is_err());
    }
}
