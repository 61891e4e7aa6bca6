//! Gamma, beta, digamma and the Gauss hypergeometric function on `[0, 1]`,
//! together with the two constants that normalise the fractional Laplacian
//! of a polynomial bump: `c_{N,s}` and `κ`.
//!
//! Everything here is a pure function of its arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Parameters shared by the fractional Laplacian and the bump profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    /// Spatial dimension `N ≥ 1`.
    pub dim: u32,
    /// Fractional order `s ∈ (0, 1)`.
    pub s: f64,
    /// Bump exponent, `p > max{1, 2s}`.
    pub p: f64,
}

impl FracParams {
    pub fn new(dim: u32, s: f64, p: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension N must be at least 1".into()));
        }
        check_order(s)?;
        if !(p.is_finite() && p > 1.0 && p > 2.0 * s) {
            return Err(Error::Domain(format!(
                "bump exponent p = {p} must exceed max(1, 2s) = {}",
                f64::max(1.0, 2.0 * s)
            )));
        }
        Ok(Self { dim, s, p })
    }

    pub fn half_dim(&self) -> f64 {
        0.5 * self.dim as f64
    }
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if s.is_finite() && s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("fractional order s = {s} must lie in (0, 1)")))
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `sin(πx)` with the argument reduced modulo 2 before scaling.
fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    (PI * r).sin()
}

fn cos_pi(x: f64) -> f64 {
    let r = x - 2.0 * (0.5 * x).round();
    (PI * r).cos()
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Gamma function on the real line minus the poles `{0, -1, -2, …}`.
///
/// Lanczos approximation for `x ≥ 1/2`, reflection below. Positive integers
/// up to 30 are returned as exact factorials.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x == x.floor() && x <= 31.0 {
        return Ok(factorial(x as u32 - 1));
    }
    if x < 0.5 {
        return Ok(PI / (sin_pi(x) * gamma(1.0 - x)?));
    }
    let x = x - 1.0;
    let series = LANCZOS_COEF[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS_COEF[0], |acc, (i, c)| acc + c / (x + (i + 1) as f64));
    let t = x + LANCZOS_G + 0.5;
    // split the power so that arguments up to ~171 do not overflow early
    let half = t.powf(0.5 * (x + 0.5));
    Ok((2.0 * PI).sqrt() * half * (half * (-t).exp()) * series)
}

/// `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Ok(0.0);
    }
    Ok(1.0 / gamma(x)?)
}

/// Beta function `Γ(a)Γ(b)/Γ(a+b)`, valid for negative non-integer `a` or `b`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    for v in [a, b, a + b] {
        if is_nonpositive_integer(v) {
            return Err(Error::Pole(v));
        }
    }
    Ok(gamma(a)? * gamma(b)? / gamma(a + b)?)
}

/// Digamma `ψ = Γ'/Γ`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("digamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.0 {
        return Ok(digamma(1.0 - x)? - PI * cos_pi(x) / sin_pi(x));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0))))));
    Ok(acc + x.ln() - 0.5 / x - tail)
}

/// Hard cap on the number of series terms.
pub const SERIES_TERM_CAP: usize = 1_000_000;
const SERIES_REL_STOP: f64 = 1e-15;
const SERIES_MIN_TERMS: usize = 8;

/// Above this argument the evaluation switches to the expansion around `z = 1`.
const CONNECTION_SWITCH: f64 = 0.9;

fn raw_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_TERM_CAP {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if k + 1 >= SERIES_MIN_TERMS && term.abs() < SERIES_REL_STOP * (1.0 + sum.abs()) {
            return Ok(sum);
        }
    }
    Err(Error::SeriesCap {
        terms: SERIES_TERM_CAP,
        partial: sum,
    })
}

fn check_hyp_args(a: f64, b: f64, c: f64, z: f64) -> Result<()> {
    if ![a, b, c, z].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("2F1 arguments must be finite".into()));
    }
    if c <= 0.0 {
        return Err(Error::Domain(format!("2F1 requires c > 0, got c = {c}")));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("2F1 is evaluated on [0, 1] only, got z = {z}")));
    }
    if z == 1.0 && c - a - b <= 0.0 {
        return Err(Error::Domain(format!(
            "2F1 series diverges at z = 1 when c - a - b = {} <= 0",
            c - a - b
        )));
    }
    Ok(())
}

/// Plain power series `Σ (a)_k (b)_k / ((c)_k k!) z^k`.
///
/// Summation stops once a term drops below `1e-15·(1 + |partial sum|)` after
/// at least 8 terms; more than [`SERIES_TERM_CAP`] terms is an error.
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_hyp_args(a, b, c, z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    raw_series(a, b, c, z)
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for `c > 0`, `z ∈ [0, 1]`.
///
/// The power series is used below `z = 0.9` and for terminating parameters.
/// Closer to `z = 1` the expansion in powers of `1 - z` is used (with the
/// logarithmic form when `c - a - b` is a positive integer), which reduces to
/// Gauss's summation formula at `z = 1`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    check_hyp_args(a, b, c, z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    let sigma = c - a - b;
    if z < CONNECTION_SWITCH
        || sigma <= 0.0
        || is_nonpositive_integer(a)
        || is_nonpositive_integer(b)
    {
        return raw_series(a, b, c, z);
    }
    let w = 1.0 - z;
    let m = sigma.round();
    let gap = (sigma - m).abs();
    if gap < 1e-12 {
        if m < 1.0 {
            return raw_series(a, b, c, z);
        }
        return connection_integer(a, b, m as u32, w);
    }
    let (first, second) = connection_generic(a, b, c, w)?;
    let value = first + second;
    if (first.abs() + second.abs()) > CANCELLATION_LIMIT * value.abs() && w >= 5e-5 {
        // the two halves cancel; the power series is still affordable here
        return raw_series(a, b, c, z);
    }
    Ok(value)
}

/// Largest tolerated ratio of the connection halves to their sum.
const CANCELLATION_LIMIT: f64 = 100.0;

/// The two halves of `F(a,b;c;1-w)` in the generic `1 - z` connection formula
/// (non-integer `c - a - b`).
fn connection_generic(a: f64, b: f64, c: f64, w: f64) -> Result<(f64, f64)> {
    let sigma = c - a - b;
    let g1 = gamma(c)? * gamma(sigma)? * rgamma(c - a)? * rgamma(c - b)?;
    let mut first = 0.0;
    if g1 != 0.0 {
        first = g1 * if w == 0.0 { 1.0 } else { raw_series(a, b, 1.0 - sigma, w)? };
    }
    let mut second = 0.0;
    if w > 0.0 {
        let g2 = gamma(c)? * gamma(-sigma)? * rgamma(a)? * rgamma(b)?;
        if g2 != 0.0 {
            second = w.powf(sigma) * g2 * raw_series(c - a, c - b, 1.0 + sigma, w)?;
        }
    }
    Ok((first, second))
}

/// `F(a,b;a+b+m;1-w)` for a positive integer `m` (logarithmic case).
fn connection_integer(a: f64, b: f64, m: u32, w: f64) -> Result<f64> {
    let mf = m as f64;
    let c = a + b + mf;
    let gc = gamma(c)?;

    let lead = gamma(mf)? * gc * rgamma(a + mf)? * rgamma(b + mf)?;
    let mut finite = 0.0;
    let mut term = 1.0;
    for n in 0..m {
        finite += term;
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((nf + 1.0) * (1.0 - mf + nf)) * w;
    }
    let mut value = lead * finite;

    if w > 0.0 {
        let pref = gc * rgamma(a)? * rgamma(b)?;
        if pref != 0.0 {
            let lw = w.ln();
            let mut coef = 1.0 / factorial(m);
            let mut sum = 0.0;
            for n in 0..SERIES_TERM_CAP {
                let nf = n as f64;
                let bracket = lw - digamma(nf + 1.0)? - digamma(nf + mf + 1.0)?
                    + digamma(a + nf + mf)?
                    + digamma(b + nf + mf)?;
                let t = coef * bracket;
                sum += t;
                if n >= SERIES_MIN_TERMS && t.abs() < SERIES_REL_STOP * (1.0 + sum.abs()) {
                    break;
                }
                coef *= (a + mf + nf) * (b + mf + nf) / ((nf + 1.0) * (nf + mf + 1.0)) * w;
            }
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            value -= sign * w.powi(m as i32) * pref * sum;
        }
    }
    Ok(value)
}

/// Gauss summation `Γ(c)Γ(c-a-b) / (Γ(c-a)Γ(c-b))`, the value of `₂F₁` at 1.
pub fn gauss_sum(a: f64, b: f64, c: f64) -> Result<f64> {
    if c - a - b <= 0.0 {
        return Err(Error::Domain("Gauss summation needs c - a - b > 0".into()));
    }
    Ok(gamma(c)? * gamma(c - a - b)? * rgamma(c - a)? * rgamma(c - b)?)
}

/// Normalising constant of the pointwise fractional Laplacian,
/// `c_{N,s} = s 2^{2s} Γ((N+2s)/2) / (π^{N/2} Γ(1-s))`.
pub fn cns(dim: u32, s: f64) -> Result<f64> {
    if dim == 0 {
        return Err(Error::Domain("dimension N must be at least 1".into()));
    }
    check_order(s)?;
    let n = dim as f64;
    Ok(s * 2f64.powf(2.0 * s) * gamma(0.5 * (n + 2.0 * s))?
        / (PI.powf(0.5 * n) * gamma(1.0 - s)?))
}

/// `κ = -c_{N,s} B(-s, p+1) π^{N/2} / Γ(N/2)`: the fractional Laplacian of the
/// unit bump at its centre.
pub fn kappa(params: &FracParams) -> Result<f64> {
    let n = params.dim as f64;
    Ok(-cns(params.dim, params.s)? * beta(-params.s, params.p + 1.0)? * PI.powf(0.5 * n)
        / gamma(0.5 * n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_reference_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(-0.5).unwrap(), -2.0 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(2.5).unwrap(), 0.75 * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(gamma(-1.5).unwrap(), 4.0 / 3.0 * PI.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn gamma_rejects_poles() {
        assert_eq!(gamma(0.0), Err(Error::Pole(0.0)));
        assert_eq!(gamma(-3.0), Err(Error::Pole(-3.0)));
        assert!(beta(-1.0, 2.5).is_err());
        assert!(beta(-0.5, -0.5).is_err());
        assert!(digamma(-2.0).is_err());
    }

    #[test]
    fn gamma_recurrence_holds_on_wide_range() {
        let mut x = -9.75;
        while x < 49.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            x += 0.37;
        }
    }

    #[test]
    fn beta_examples() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(beta(-0.5, 3.0).unwrap(), -16.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(beta(2.0, 3.0).unwrap(), 1.0 / 12.0, max_relative = 1e-14);
    }

    #[test]
    fn digamma_reference_values() {
        let euler = 0.577_215_664_901_532_9;
        assert_relative_eq!(digamma(1.0).unwrap(), -euler, max_relative = 1e-14);
        assert_relative_eq!(
            digamma(0.5).unwrap(),
            -euler - 2.0 * std::f64::consts::LN_2,
            max_relative = 1e-14
        );
        // ψ(x+1) = ψ(x) + 1/x across the negative axis
        for x in [-2.3, -0.7, 0.1, 3.3, 17.5] {
            assert_relative_eq!(
                digamma(x + 1.0).unwrap(),
                digamma(x).unwrap() + 1.0 / x,
                max_relative = 1e-12,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1(1.0, -1.5, 0.5, 0.0).unwrap(), 1.0);
        assert_relative_eq!(hyp2f1(1.0, -1.5, 0.5, 1.0).unwrap(), -0.5, max_relative = 1e-12);
        // high-precision reference −0.2174189301051728850…
        assert_relative_eq!(
            hyp2f1(1.0, -1.5, 0.5, 0.5).unwrap(),
            -0.217_418_930_105_172_9,
            max_relative = 1e-12
        );
    }

    #[test]
    fn hyp2f1_domain_errors() {
        assert!(matches!(hyp2f1(1.0, 1.0, 1.5, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, 0.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, -0.5, 0.5), Err(Error::Domain(_))));
        assert!(matches!(hyp2f1(1.0, 1.0, 1.5, 1.2), Err(Error::Domain(_))));
    }

    #[test]
    fn series_cap_is_reported() {
        // c - a - b = 0.01 at z = 1 decays like k^{-1.01}: cannot terminate
        match hyp2f1_series(0.5, -0.49, 0.02, 1.0) {
            Err(Error::SeriesCap { terms, .. }) => assert_eq!(terms, SERIES_TERM_CAP),
            other => panic!("expected cap error, got {other:?}"),
        }
    }

    #[test]
    fn connection_formulas_match_direct_series_in_overlap() {
        // both 1 - z expansions against the plain series where the latter converges fast
        let cases = [
            (1.0, -1.5, 0.5),   // c - a - b = 1, logarithmic branch
            (1.5, -1.5, 1.0),   // c - a - b = 1
            (0.75, -2.25, 0.5), // c - a - b = 2
            (0.9, -1.3, 0.5),   // generic
            (1.25, -2.75, 0.5), // generic, σ = 2
            (1.6, -0.9, 1.0),   // generic, σ = 0.3
        ];
        for &(a, b, c) in &cases {
            for &z in &[0.9, 0.93, 0.97] {
                let direct = raw_series(a, b, c, z).unwrap();
                let w = 1.0 - z;
                let sigma: f64 = c - a - b;
                let via = if (sigma - sigma.round()).abs() < 1e-12 {
                    connection_integer(a, b, sigma.round() as u32, w).unwrap()
                } else {
                    let (first, second) = connection_generic(a, b, c, w).unwrap();
                    first + second
                };
                assert_relative_eq!(direct, via, max_relative = 1e-11, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn near_integer_gap_falls_back_to_the_series() {
        // c - a - b = 1.00025; reference value from 40-digit arithmetic
        let (a, b) = (1.6495049714965835, -1.1497531114363009);
        let v = hyp2f1(a, b, 1.5, 0.9).unwrap();
        assert_relative_eq!(v, -0.011353588265739922, max_relative = 1e-12);
    }

    #[test]
    fn hyp2f1_at_one_is_gauss_sum() {
        let v = hyp2f1(0.5 + 1.0, 0.5 - 3.0, 1.0, 1.0).unwrap();
        let g = gauss_sum(1.5, -2.5, 1.0).unwrap();
        assert_relative_eq!(v, g, max_relative = 1e-13);
    }

    #[test]
    fn cns_and_kappa_examples() {
        assert_relative_eq!(cns(1, 0.5).unwrap(), 1.0 / PI, max_relative = 1e-14);
        // 1/(2π) from Γ(3/2)/(π Γ(1/2))
        assert_relative_eq!(cns(2, 0.5).unwrap(), 0.5 / PI, max_relative = 1e-14);
        let params = FracParams::new(1, 0.5, 2.0).unwrap();
        assert_relative_eq!(kappa(&params).unwrap(), 16.0 / (3.0 * PI), max_relative = 1e-13);
    }

    #[test]
    fn frac_params_validation() {
        assert!(FracParams::new(0, 0.5, 2.0).is_err());
        assert!(FracParams::new(1, 1.0, 2.0).is_err());
        assert!(FracParams::new(1, 0.75, 1.4).is_err());
        assert!(FracParams::new(1, 0.25, 1.0).is_err());
        assert!(FracParams::new(3, 0.75, 1.6).is_ok());
    }
}
