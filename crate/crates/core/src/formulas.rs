//! Closed-form statistics for the number of l-matchings in G(n,p) and
//! G(n,m): means, the asymptotic standard deviation sigma_bar, the
//! log-normal scale beta, exact shared-edge pair counts by
//! inclusion-exclusion, smoothed pair counts and ratio predictions, and
//! the numeric concentration conditions for G(n,m).
//!
//! Floating-point results go through [`LogReal`]; everything that must be
//! exact has a big-rational twin (`*_exact`).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::count::{binomial_big, double_factorial, matchings_complete, matchings_containing};
use crate::error::{Error, Result};
use crate::graph::edge_slots;
use crate::logreal::LogReal;

/// Model parameters: n vertices, matching size l, edge probability p,
/// optionally an edge count m for G(n,m).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ModelParams {
    pub n: u32,
    pub l: u32,
    pub p: f64,
    pub m: Option<u64>,
}

impl ModelParams {
    pub fn new(n: u32, l: u32, p: f64) -> Result<Self> {
        let params = ModelParams { n, l, p, m: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_m(mut self, m: u64) -> Result<Self> {
        self.m = Some(m);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 1 || 2 * self.l as u64 > self.n as u64 {
            return Err(Error::invalid(format!(
                "need 1 <= l <= floor(n/2), got n={} l={}",
                self.n, self.l
            )));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::invalid(format!("need 0 < p < 1, got p={}", self.p)));
        }
        if let Some(m) = self.m {
            if m > self.edge_slots() {
                return Err(Error::invalid(format!(
                    "need m <= C(n,2), got m={m}, C(n,2)={}",
                    self.edge_slots()
                )));
            }
        }
        Ok(())
    }

    pub fn edge_slots(&self) -> u64 {
        edge_slots(self.n)
    }
}

fn ln_factorial(n: u64) -> f64 {
    ln_gamma(n as f64 + 1.0)
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// ln(m!!) with (-1)!! = 0!! = 1.
pub fn ln_double_factorial(m: i64) -> f64 {
    if m <= 0 {
        return 0.0;
    }
    let m = m as u64;
    if m % 2 == 1 {
        // (2t-1)!! = (2t)! / (2^t t!)
        let t = (m + 1) / 2;
        ln_factorial(2 * t) - t as f64 * std::f64::consts::LN_2 - ln_factorial(t)
    } else {
        let t = m / 2;
        t as f64 * std::f64::consts::LN_2 + ln_factorial(t)
    }
}

/// Mean count in G(n,p): C(n,2l) (2l-1)!! p^l.
pub fn gnp_mean(params: &ModelParams) -> LogReal {
    let (n, l) = (params.n as u64, params.l as u64);
    LogReal::exp_ln(
        ln_binomial(n, 2 * l) + ln_double_factorial(2 * l as i64 - 1) + l as f64 * params.p.ln(),
    )
}

/// Asymptotic standard deviation:
/// sigma_bar^2 = l C(n,2l) C(n-2,2l-2) (2l-1)!! (2l-3)!! (p^(2l-1) - p^(2l)).
pub fn sigma_bar(params: &ModelParams) -> LogReal {
    let (n, l) = (params.n as u64, params.l as u64);
    let ln_sq = (l as f64).ln()
        + ln_binomial(n, 2 * l)
        + ln_binomial(n - 2, 2 * l - 2)
        + ln_double_factorial(2 * l as i64 - 1)
        + ln_double_factorial(2 * l as i64 - 3)
        + (2 * l - 1) as f64 * params.p.ln()
        + (1.0 - params.p).ln();
    LogReal::exp_ln(ln_sq / 2.0)
}

/// Log-normal scale: beta = l sqrt((1-p) / (p N)).
pub fn beta(params: &ModelParams) -> f64 {
    if params.l == 0 {
        return 0.0;
    }
    let n_slots = params.edge_slots() as f64;
    params.l as f64 * ((1.0 - params.p) / (params.p * n_slots)).sqrt()
}

/// Mean count in G(n,m) for a family of s graphs with h edges each:
/// mu = s C(N-h, m-h) / C(N, m).
pub fn gnm_mean(params: &ModelParams, s: &BigUint, h: u64) -> Result<LogReal> {
    let m = params
        .m
        .ok_or_else(|| Error::invalid("G(n,m) mean needs an edge count m"))?;
    if h > m {
        return Err(Error::invalid(format!("need h <= m, got h={h}, m={m}")));
    }
    let n_slots = params.edge_slots();
    Ok(LogReal::from_biguint(s).mul(LogReal::exp_ln(
        ln_binomial(n_slots - h, m - h) - ln_binomial(n_slots, m),
    )))
}

/// First-order approximation of [`gnm_mean`]:
/// s (m/N)^h exp(-(N-m) h^2 / (2 m N)).
pub fn gnm_mean_approx(params: &ModelParams, s: &BigUint, h: u64) -> Result<LogReal> {
    let m = params
        .m
        .ok_or_else(|| Error::invalid("G(n,m) mean needs an edge count m"))?;
    if h > m {
        return Err(Error::invalid(format!("need h <= m, got h={h}, m={m}")));
    }
    let n_slots = params.edge_slots() as f64;
    let (m, h) = (m as f64, h as f64);
    let ln = h * (m.ln() - n_slots.ln()) - (n_slots - m) / (m * n_slots) * h * h / 2.0;
    Ok(LogReal::from_biguint(s).mul(LogReal::exp_ln(ln)))
}

/// Exact number of ordered pairs of l-matchings of K_n sharing exactly i
/// edges, by inclusion-exclusion over the counts of matchings containing
/// a fixed r-matching:
/// f_i = s * sum_{j >= i} (-1)^(j-i) C(j,i) C(l,j) Delta_j.
pub fn pair_count_exact(n: u64, l: u64, i: u64) -> Result<BigUint> {
    if i > l || 2 * l > n {
        return Err(Error::invalid(format!(
            "need i <= l and 2l <= n, got n={n} l={l} i={i}"
        )));
    }
    let mut acc = BigInt::zero();
    for j in i..=l {
        let term = BigInt::from(binomial_big(j, i) * binomial_big(l, j) * matchings_containing(n, l, j)?);
        if (j - i) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let f = BigInt::from(matchings_complete(n, l)?) * acc;
    debug_assert!(!f.is_negative());
    Ok(f.magnitude().clone())
}

/// Typical excess of shared vertices over shared-edge endpoints for pairs
/// sharing i edges: z(i) = 4 (l-i)^2 / (n - 2i).
pub fn mode_excess(n: u64, l: u64, i: u64) -> Result<f64> {
    if 2 * i >= n {
        return Err(Error::invalid(format!("need 2i < n, got n={n} i={i}")));
    }
    let d = (l as f64 - i as f64).powi(2);
    Ok(4.0 * d / (n as f64 - 2.0 * i as f64))
}

/// Gaussian-smoothed pair count built from the census value at the mode:
/// sqrt(pi) * (1/(2z) + 1/(2l - z - 2i) + 1/(2(n - 4l + z + 2i)))^(-1/2)
/// * f(i, z(i) + 2i).
pub fn smoothed_pair_count(
    n: u64,
    l: u64,
    i: u64,
    f_at_mode: &BigUint,
    delta: f64,
) -> Result<f64> {
    if i as f64 > delta * l as f64 {
        return Err(Error::invalid(format!(
            "smoothed pair count needs i <= delta*l = {:.2}, got i={i}",
            delta * l as f64
        )));
    }
    let z = mode_excess(n, l, i)?;
    let d1 = 2.0 * z;
    let d2 = 2.0 * l as f64 - z - 2.0 * i as f64;
    let d3 = 2.0 * (n as f64 - 4.0 * l as f64 + z + 2.0 * i as f64);
    for (name, d) in [("2z", d1), ("2l - z - 2i", d2), ("2(n - 4l + z + 2i)", d3)] {
        if d <= 0.0 {
            return Err(Error::invalid(format!(
                "smoothed pair count denominator {name} is non-positive ({d})"
            )));
        }
    }
    let width = (1.0 / d1 + 1.0 / d2 + 1.0 / d3).powf(-0.5);
    Ok(std::f64::consts::PI.sqrt() * width * LogReal::from_biguint(f_at_mode).to_f64())
}

/// Leading-order prediction of f_i / f_(i-1) in the near-perfect regime:
/// n^2 / (8 i l^2).
pub fn pair_ratio_near_perfect(n: u64, l: u64, i: u64) -> Result<f64> {
    if i < 1 {
        return Err(Error::invalid("ratio prediction needs i >= 1"));
    }
    Ok((n * n) as f64 / (8.0 * i as f64 * (l * l) as f64))
}

/// Leading-order prediction of f'_i / f'_(i-1) away from the perfect end:
/// z(i)^2 / (8 i (l-i)^2).
pub fn pair_ratio_from_mode(n: u64, l: u64, i: u64) -> Result<f64> {
    if i < 1 {
        return Err(Error::invalid("ratio prediction needs i >= 1"));
    }
    if i >= l {
        return Err(Error::invalid("ratio prediction needs i < l"));
    }
    let z = mode_excess(n, l, i)?;
    Ok(z * z / (8.0 * i as f64 * (l - i).pow(2) as f64))
}

/// Linear normalization (x - lambda) / sigma_bar, in log space.
pub fn normalized_subcritical(x: &BigUint, params: &ModelParams) -> f64 {
    LogReal::from_biguint(x)
        .sub(gnp_mean(params))
        .div(sigma_bar(params))
        .to_f64()
}

/// Log normalization (ln(x / lambda) + beta^2 / 2) / beta; needs x > 0.
pub fn normalized_supercritical(x: &BigUint, params: &ModelParams) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::invalid(
            "log-normalized statistic undefined for a zero count",
        ));
    }
    let b = beta(params);
    let lam = gnp_mean(params).ln().expect("mean is positive");
    let lnx = LogReal::from_biguint(x).ln().expect("x > 0");
    Ok((lnx - lam + b * b / 2.0) / b)
}

/// Numeric check of the concentration conditions for X/E -> 1 in G(n,m),
/// evaluated at h = l from supplied consecutive-count ratios r_j.
#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    /// rho = h^2 / m.
    pub rho: f64,
    /// gamma = floor(delta * l).
    pub gamma: u64,
    /// For j <= k_const * rho: signed relative deviation of r_j from
    /// h^2 / (N j).
    pub small_j_deviation: Vec<(u64, f64)>,
    /// For ceil(4 rho) <= j <= gamma: r_j <= m / (2N), boundary inclusive.
    pub mid_j_bounded: Vec<(u64, bool)>,
    /// sum_{j > gamma} f_j / (s * mu).
    pub tail_ratio: f64,
}

pub fn gnm_concentration_report(
    n: u64,
    l: u64,
    m: u64,
    ratios: &[f64],
    k_const: f64,
    delta: f64,
) -> Result<ConcentrationReport> {
    let params = ModelParams::new(n as u32, l as u32, 0.5)?.with_m(m)?;
    let gamma = ((delta * l as f64).floor() as u64).min(l);
    if (ratios.len() as u64) < gamma {
        return Err(Error::invalid(format!(
            "need ratios r_1..r_gamma with gamma={gamma}, got {}",
            ratios.len()
        )));
    }
    let n_slots = edge_slots(n as u32) as f64;
    let rho = (l * l) as f64 / m as f64;

    let mut small_j_deviation = Vec::new();
    let j_hi = (k_const * rho).floor() as u64;
    for j in 1..=j_hi.min(gamma) {
        let reference = (l * l) as f64 / (n_slots * j as f64);
        let r = ratios[(j - 1) as usize];
        small_j_deviation.push((j, (r - reference) / reference));
    }

    let mut mid_j_bounded = Vec::new();
    let j_lo = (4.0 * rho).ceil() as u64;
    let bound = m as f64 / (2.0 * n_slots);
    for j in j_lo.max(1)..=gamma {
        mid_j_bounded.push((j, ratios[(j - 1) as usize] <= bound));
    }

    let tail_ratio = pair_tail_sum_over_mean(&params, gamma + 1)?;

    Ok(ConcentrationReport {
        rho,
        gamma,
        small_j_deviation,
        mid_j_bounded,
        tail_ratio,
    })
}

/// Exact tail mass of shared-edge pair counts, relative to s * mu:
/// sum_{i >= ceil(delta l)} f_i / (s mu). Needs delta > 4/5.
pub fn pair_tail_ratio(n: u64, l: u64, m: u64, delta: f64) -> Result<f64> {
    if delta <= 0.8 {
        return Err(Error::invalid(format!(
            "tail ratio is only meaningful for delta > 4/5, got {delta}"
        )));
    }
    let params = ModelParams::new(n as u32, l as u32, 0.5)?.with_m(m)?;
    let start = (delta * l as f64).ceil() as u64;
    pair_tail_sum_over_mean(&params, start)
}

fn pair_tail_sum_over_mean(params: &ModelParams, start: u64) -> Result<f64> {
    let (n, l) = (params.n as u64, params.l as u64);
    let mut tail = BigUint::zero();
    for i in start..=l {
        tail += pair_count_exact(n, l, i)?;
    }
    let s = matchings_complete(n, l)?;
    let mu = gnm_mean(params, &s, l)?;
    Ok(LogReal::from_biguint(&tail)
        .div(LogReal::from_biguint(&s).mul(mu))
        .to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Supercritical,
    Boundary,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RegimeReport {
    /// l / (n sqrt(p)).
    pub ratio: f64,
    pub classification: Regime,
    pub c: f64,
    pub tol: f64,
}

/// Classify l relative to the transition scale n sqrt(p): subcritical if
/// ratio < c(1-tol), supercritical if ratio > c(1+tol), else boundary.
pub fn regime_classify(params: &ModelParams, c: f64, tol: f64) -> RegimeReport {
    let ratio = params.l as f64 / (params.n as f64 * params.p.sqrt());
    let classification = if ratio < c * (1.0 - tol) {
        Regime::Subcritical
    } else if ratio > c * (1.0 + tol) {
        Regime::Supercritical
    } else {
        Regime::Boundary
    };
    RegimeReport {
        ratio,
        classification,
        c,
        tol,
    }
}

// ---------------------------------------------------------------------
// Exact big-rational twins. These keep every identity exact; the
// log-space versions above must agree with them to float precision.
// ---------------------------------------------------------------------

pub fn pow_rational(p: &BigRational, e: u64) -> BigRational {
    let mut acc = BigRational::one();
    let mut base = p.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    acc
}

fn big_ratio(x: BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// lambda = C(n,2l) (2l-1)!! p^l, exactly.
pub fn gnp_mean_exact(n: u64, l: u64, p: &BigRational) -> Result<BigRational> {
    Ok(big_ratio(matchings_complete(n, l)?) * pow_rational(p, l))
}

/// sigma_bar^2 exactly.
pub fn sigma_bar_sq_exact(n: u64, l: u64, p: &BigRational) -> Result<BigRational> {
    if l < 1 || 2 * l > n {
        return Err(Error::invalid(format!("need 1 <= l <= n/2, got n={n} l={l}")));
    }
    let combinatorial = BigUint::from(l)
        * binomial_big(n, 2 * l)
        * binomial_big(n - 2, 2 * l - 2)
        * double_factorial(2 * l as i64 - 1)?
        * double_factorial(2 * l as i64 - 3)?;
    let edge_weight = pow_rational(p, 2 * l - 1) - pow_rational(p, 2 * l);
    Ok(big_ratio(combinatorial) * edge_weight)
}

/// mu = s C(N-l, m-l) / C(N, m) for the l-matching family, exactly.
pub fn gnm_mean_exact(n: u64, l: u64, m: u64) -> Result<BigRational> {
    let n_slots = edge_slots(n as u32);
    if l > m || m > n_slots {
        return Err(Error::invalid(format!(
            "need l <= m <= C(n,2), got l={l} m={m} C={n_slots}"
        )));
    }
    let s = matchings_complete(n, l)?;
    Ok(BigRational::new(
        BigInt::from(s * binomial_big(n_slots - l, m - l)),
        BigInt::from(binomial_big(n_slots, m)),
    ))
}

/// E[X^2] = sum_i f_i p^(2l-i), exactly.
pub fn second_moment_exact(n: u64, l: u64, p: &BigRational) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for i in 0..=l {
        acc += big_ratio(pair_count_exact(n, l, i)?) * pow_rational(p, 2 * l - i);
    }
    Ok(acc)
}

/// Var X = sum_{i>=1} f_i (p^(2l-i) - p^(2l)), exactly.
pub fn variance_exact(n: u64, l: u64, p: &BigRational) -> Result<BigRational> {
    let p2l = pow_rational(p, 2 * l);
    let mut acc = BigRational::zero();
    for i in 1..=l {
        acc += big_ratio(pair_count_exact(n, l, i)?) * (pow_rational(p, 2 * l - i) - &p2l);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ratio(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn rel_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn gnp_mean_small_cases() {
        let p = ModelParams::new(4, 1, 0.5).unwrap();
        rel_close(gnp_mean(&p).to_f64(), 3.0, 1e-12);
        let p = ModelParams::new(4, 2, 0.5).unwrap();
        rel_close(gnp_mean(&p).to_f64(), 0.75, 1e-12);
    }

    #[test]
    fn log_space_matches_exact_rational() {
        // <= 1e-9 relative agreement across n <= 20
        for n in 4..=20u64 {
            for l in 1..=n / 2 {
                let p = ratio(3, 10);
                let pf = 0.3;
                let params = ModelParams::new(n as u32, l as u32, pf).unwrap();
                let lam_exact = gnp_mean_exact(n, l, &p).unwrap().to_f64().unwrap();
                rel_close(gnp_mean(&params).to_f64(), lam_exact, 1e-9);
                let sig_exact = sigma_bar_sq_exact(n, l, &p).unwrap().to_f64().unwrap();
                rel_close(sigma_bar(&params).to_f64().powi(2), sig_exact, 1e-9);
                let n_slots = edge_slots(n as u32);
                let m = n_slots / 2;
                if l <= m {
                    let mu_exact = gnm_mean_exact(n, l, m).unwrap().to_f64().unwrap();
                    let params_m = params.with_m(m).unwrap();
                    let s = matchings_complete(n, l).unwrap();
                    let mu = gnm_mean(&params_m, &s, l).unwrap().to_f64();
                    rel_close(mu, mu_exact, 1e-9);
                }
            }
        }
    }

    #[test]
    fn sigma_bar_collapses_at_l1() {
        // sigma_bar^2 = N p (1-p): binomial edge-count variance
        let p = ratio(1, 2);
        let sq = sigma_bar_sq_exact(4, 1, &p).unwrap();
        assert_eq!(sq, ratio(3, 2));
        for n in [5u64, 9, 16] {
            let sq = sigma_bar_sq_exact(n, 1, &ratio(1, 4)).unwrap();
            let expected = ratio(edge_slots(n as u32) as i64, 1) * ratio(1, 4) * ratio(3, 4);
            assert_eq!(sq, expected);
        }
    }

    #[test]
    fn sigma_bar_eq_2_2_example() {
        let p = ratio(1, 2);
        let sq = sigma_bar_sq_exact(6, 2, &p).unwrap();
        let direct = ratio(2 * 15 * 6 * 3, 1) * (pow_rational(&p, 3) - pow_rational(&p, 4));
        assert_eq!(sq, direct);
        let params = ModelParams::new(6, 2, 0.5).unwrap();
        rel_close(
            sigma_bar(&params).to_f64(),
            direct.to_f64().unwrap().sqrt(),
            1e-9,
        );
    }

    #[test]
    fn sigma_bar_sq_is_first_pair_term() {
        // sigma_bar^2 = s * l*Delta_1 * (p^(2l-1) - p^(2l)) exactly
        for (n, l) in [(6u64, 2u64), (8, 3), (10, 4), (9, 2)] {
            let p = ratio(2, 7);
            let lhs = sigma_bar_sq_exact(n, l, &p).unwrap();
            let s = big_ratio(matchings_complete(n, l).unwrap());
            let d1 = big_ratio(BigUint::from(l) * matchings_containing(n, l, 1).unwrap());
            let w = pow_rational(&p, 2 * l - 1) - pow_rational(&p, 2 * l);
            assert_eq!(lhs, s * d1 * w);
        }
    }

    #[test]
    fn beta_examples() {
        let params = ModelParams::new(10, 5, 0.5).unwrap();
        rel_close(beta(&params), 5.0 / 45f64.sqrt(), 1e-12);
        assert!(ModelParams::new(10, 10, 0.5).is_err());
        let degenerate = ModelParams {
            n: 10,
            l: 0,
            p: 0.5,
            m: None,
        };
        assert_eq!(beta(&degenerate), 0.0);
    }

    #[test]
    fn gnm_mean_examples() {
        // n=4, l=2: s=3, h=2, N=6, m=3 -> mu = 3*C(4,1)/C(6,3) = 0.6
        let mu = gnm_mean_exact(4, 2, 3).unwrap();
        assert_eq!(mu, ratio(3, 5));
        // m = N -> mu = s
        let mu = gnm_mean_exact(4, 2, 6).unwrap();
        assert_eq!(mu, ratio(3, 1));
        // m = h -> mu = s / C(N, h)
        let mu = gnm_mean_exact(4, 2, 2).unwrap();
        assert_eq!(mu, ratio(3, 15));
        // log-space approximation agrees at larger scales
        let params = ModelParams::new(20, 3, 0.4).unwrap().with_m(76).unwrap();
        let s = matchings_complete(20, 3).unwrap();
        let exact = gnm_mean(&params, &s, 3).unwrap().to_f64();
        let approx = gnm_mean_approx(&params, &s, 3).unwrap().to_f64();
        assert!((approx / exact - 1.0).abs() < 0.05, "{approx} vs {exact}");
        assert!(gnm_mean(&params, &s, 100).is_err());
    }

    #[test]
    fn pair_count_small_cases() {
        // n=4, l=1: 6 ordered identical pairs, 30 sharing nothing
        assert_eq!(pair_count_exact(4, 1, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(pair_count_exact(4, 1, 0).unwrap(), BigUint::from(30u32));
        // sum rule: sum_i f_i = s^2
        for n in 4..=10u64 {
            for l in 1..=n / 2 {
                let s = matchings_complete(n, l).unwrap();
                let mut total = BigUint::zero();
                for i in 0..=l {
                    total += pair_count_exact(n, l, i).unwrap();
                }
                assert_eq!(total, &s * &s, "sum rule at n={n} l={l}");
            }
        }
    }

    #[test]
    fn mode_excess_values() {
        rel_close(mode_excess(10, 4, 0).unwrap(), 6.4, 1e-12);
        assert_eq!(mode_excess(10, 4, 4).unwrap(), 0.0);
        rel_close(mode_excess(100, 40, 10).unwrap(), 45.0, 1e-12);
        assert!(mode_excess(10, 4, 5).is_err());
    }

    #[test]
    fn ratio_predictions() {
        rel_close(pair_ratio_near_perfect(12, 5, 1).unwrap(), 0.72, 1e-12);
        assert!(pair_ratio_near_perfect(12, 5, 0).is_err());
        // algebraic identity: z(i)^2/(8i(l-i)^2) = 2(l-i)^2/(i(n-2i)^2)
        for (n, l) in [(20u64, 8u64), (30, 9), (16, 7)] {
            for i in 1..l {
                let lhs = pair_ratio_from_mode(n, l, i).unwrap();
                let rhs = 2.0 * ((l - i) * (l - i)) as f64
                    / (i as f64 * ((n - 2 * i) * (n - 2 * i)) as f64);
                rel_close(lhs, rhs, 1e-12);
            }
        }
    }

    #[test]
    fn smoothed_pair_count_shape() {
        // equal denominators d: factor must be sqrt(pi * 2d/3)
        // pick synthetic z via direct formula evaluation instead
        let f = BigUint::from(1000u32);
        let v = smoothed_pair_count(12, 5, 1, &f, 0.9).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let z = mode_excess(12, 5, 1).unwrap();
        let w = (1.0 / (2.0 * z) + 1.0 / (10.0 - z - 2.0) + 1.0 / (2.0 * (12.0 - 20.0 + z + 2.0)))
            .powf(-0.5);
        rel_close(v, std::f64::consts::PI.sqrt() * w * 1000.0, 1e-12);
        // i = l has z = 0: denominator error
        assert!(smoothed_pair_count(12, 5, 5, &f, 1.0).is_err());
        // i beyond delta*l rejected
        assert!(smoothed_pair_count(12, 5, 5, &f, 0.9).is_err());
    }

    #[test]
    fn normalized_statistics() {
        let params = ModelParams::new(12, 3, 0.4).unwrap();
        let lam = gnp_mean(&params);
        // x = lambda -> subcritical statistic 0 (use nearest integer)
        let x = BigUint::from(lam.to_f64().round() as u64);
        let stat = normalized_subcritical(&x, &params);
        assert!(stat.abs() < 0.05, "{stat}");
        // supercritical statistic at x = lambda is beta/2
        let b = beta(&params);
        let stat = normalized_supercritical(&x, &params).unwrap();
        let drift = (LogReal::from_biguint(&x).ln().unwrap() - lam.ln().unwrap()) / b;
        rel_close(stat - drift, b / 2.0, 1e-9);
        assert!(normalized_supercritical(&BigUint::zero(), &params).is_err());
    }

    #[test]
    fn concentration_report_shapes() {
        let n = 12u64;
        let l = 5u64;
        let m = 26u64; // ~0.4 * 66
        let n_slots = edge_slots(12) as f64;
        let gamma = (0.9 * l as f64).floor() as usize;
        // r_j set identically to l^2/(Nj) -> zero deviation
        let ratios: Vec<f64> = (1..=gamma)
            .map(|j| (l * l) as f64 / (n_slots * j as f64))
            .collect();
        let rep = gnm_concentration_report(n, l, m, &ratios, 1.0, 0.9).unwrap();
        for &(_, dev) in &rep.small_j_deviation {
            assert!(dev.abs() < 1e-12);
        }
        assert!(rep.tail_ratio.is_finite() && rep.tail_ratio > 0.0);
        // boundary exactly m/2N counts as bounded (inclusive)
        let bound = m as f64 / (2.0 * n_slots);
        let ratios: Vec<f64> = vec![bound; gamma];
        let rep = gnm_concentration_report(n, l, m, &ratios, 1.0, 0.9).unwrap();
        assert!(rep.mid_j_bounded.iter().all(|&(_, ok)| ok));
    }

    #[test]
    fn tail_ratio_cases() {
        // l=1, delta=0.9: f_1/(s mu) = 1/mu
        let r = pair_tail_ratio(6, 1, 7, 0.9).unwrap();
        let mu = gnm_mean_exact(6, 1, 7).unwrap().to_f64().unwrap();
        rel_close(r, 1.0 / mu, 1e-9);
        // m = N: mu = s, ratio = tail / s^2
        let r = pair_tail_ratio(8, 3, 28, 0.9).unwrap();
        let s = matchings_complete(8, 3).unwrap();
        let tail = pair_count_exact(8, 3, 3).unwrap();
        rel_close(
            r,
            tail.to_f64().unwrap() / (&s * &s).to_f64().unwrap(),
            1e-9,
        );
        assert!(pair_tail_ratio(8, 3, 28, 0.5).is_err());
    }

    #[test]
    fn regime_examples() {
        let p = ModelParams::new(10_000, 1, 0.5).unwrap();
        assert_eq!(
            regime_classify(&p, 1.0, 0.1).classification,
            Regime::Subcritical
        );
        let p = ModelParams::new(24, 12, 0.25).unwrap();
        assert_eq!(
            regime_classify(&p, 1.0, 0.1).classification,
            Regime::Boundary
        );
        let p = ModelParams::new(24, 12, 0.04).unwrap();
        assert_eq!(
            regime_classify(&p, 1.0, 0.1).classification,
            Regime::Supercritical
        );
    }

    #[test]
    fn variance_identity_consistency() {
        // variance_exact at l=1 must be N p(1-p)
        let p = ratio(1, 3);
        let var = variance_exact(5, 1, &p).unwrap();
        assert_eq!(var, ratio(10, 1) * &p * (BigRational::one() - &p));
    }
}
