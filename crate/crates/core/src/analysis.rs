//! Closed-form failure model of one stabilized computational step.
//!
//! With per-cycle wrong-syndrome probability `alpha`, `r` cycles and a code
//! correcting `t` errors on `n` qubits:
//!
//! * `P1 = sum_{i > r/2} C(r, i) alpha^i` (majority of cycles wrong),
//! * `P2 = sum_{i > t} C(N, i) q^i` with `N = n (4 r + c)` and `q = gamma + n epsilon`
//!   (more errors than the code corrects),
//! * `p = 4 (P1 + P2)`, clipped to 1.
//!
//! The literal sums omit the complementary `(1 - alpha)` and `(1 - q)` factors;
//! the `_exact` variants include them.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};

/// Six significant digits in scientific notation, e.g. `2.30740e-3`.
pub fn format_sig(x: f64) -> String {
    format!("{x:.5e}")
}

/// `1 - [(1 - gamma)(1 - epsilon)^n]^(3n)`.
pub fn alpha(n: usize, gamma: f64, epsilon: f64) -> f64 {
    let n = n as f64;
    let log_ok = 3.0 * n * ((-gamma).ln_1p() + n * (-epsilon).ln_1p());
    -log_ok.exp_m1()
}

/// Small-parameter form `3 n (gamma + n epsilon)` (not clipped).
pub fn alpha_approx(n: usize, gamma: f64, epsilon: f64) -> f64 {
    let n = n as f64;
    3.0 * n * (gamma + n * epsilon)
}

fn check_odd(r: usize) -> Result<()> {
    if r == 0 || r % 2 == 0 {
        return Err(Error::InvalidParameter(format!("r = {r} must be odd and positive")));
    }
    Ok(())
}

/// Sum of `terms(i)` for `i` in `lo..=hi` given in log space, skipping the
/// tail once terms drop below `1e-30` of the largest, added smallest first.
fn log_sum(lo: u64, hi: u64, log_term: impl Fn(u64) -> f64) -> f64 {
    let mut terms = Vec::new();
    let mut max = f64::NEG_INFINITY;
    let cutoff = 1e-30f64.ln();
    for i in lo..=hi {
        let l = log_term(i);
        if l == f64::NEG_INFINITY {
            continue;
        }
        if l < max + cutoff && terms.last().is_some_and(|&prev| l < prev) {
            break;
        }
        max = max.max(l);
        terms.push(l);
    }
    terms.sort_by(f64::total_cmp);
    terms.iter().fold(0.0, |acc, &l| acc + l.exp())
}

fn ln_pow(x: f64, i: u64) -> f64 {
    if i == 0 {
        0.0
    } else {
        i as f64 * x.ln()
    }
}

/// Literal majority-failure sum `sum_{i=(r+1)/2}^{r} C(r, i) alpha^i`.
pub fn p1(r: usize, alpha: f64) -> Result<f64> {
    check_odd(r)?;
    let r = r as u64;
    Ok(log_sum((r + 1) / 2, r, |i| ln_binomial(r, i) + ln_pow(alpha, i)))
}

/// Binomial tail `sum_{i=(r+1)/2}^{r} C(r, i) alpha^i (1 - alpha)^(r - i)`.
pub fn p1_exact(r: usize, alpha: f64) -> Result<f64> {
    check_odd(r)?;
    let r = r as u64;
    Ok(log_sum((r + 1) / 2, r, |i| {
        ln_binomial(r, i) + ln_pow(alpha, i) + ln_pow(1.0 - alpha, r - i)
    }))
}

/// Opportunities `N = n (4 r + c)`.
pub fn opportunities(n: usize, r: usize, c: usize) -> u64 {
    (n * (4 * r + c)) as u64
}

/// Literal accumulation sum `sum_{i=t+1}^{N} C(N, i) q^i`.
pub fn p2(n: usize, t: usize, r: usize, c: usize, q: f64) -> f64 {
    let big_n = opportunities(n, r, c);
    let t = t as u64;
    if t >= big_n {
        return 0.0;
    }
    log_sum(t + 1, big_n, |i| ln_binomial(big_n, i) + ln_pow(q, i))
}

/// Binomial tail `sum_{i=t+1}^{N} C(N, i) q^i (1 - q)^(N - i)`.
pub fn p2_exact(n: usize, t: usize, r: usize, c: usize, q: f64) -> f64 {
    let big_n = opportunities(n, r, c);
    let t = t as u64;
    if t >= big_n {
        return 0.0;
    }
    log_sum(t + 1, big_n, |i| {
        ln_binomial(big_n, i) + ln_pow(q, i) + ln_pow(1.0 - q, big_n - i)
    })
}

/// Result of [`choose_r`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RChoice {
    pub r: usize,
    /// No odd `r <= r_max` made `P1 < P2`; `r = r_max`.
    pub capped: bool,
}

/// Smallest odd `r` in `[3, r_max]` with `P1 < P2`.
pub fn choose_r(n: usize, t: usize, c: usize, gamma: f64, epsilon: f64, r_max: usize) -> Result<RChoice> {
    if r_max < 3 {
        return Err(Error::InvalidParameter(format!("r_max = {r_max} is below 3")));
    }
    let a = alpha(n, gamma, epsilon);
    let q = gamma + n as f64 * epsilon;
    let mut r = 3;
    while r <= r_max {
        let p1 = p1(r, a)?;
        if p1 == 0.0 || p1 < p2(n, t, r, c, q) {
            return Ok(RChoice { r, capped: false });
        }
        r += 2;
    }
    let top = if r_max % 2 == 1 { r_max } else { r_max - 1 };
    Ok(RChoice { r: top, capped: true })
}

/// How `epsilon` follows from `gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EpsilonRule {
    /// `epsilon = gamma / (10 n)`.
    TenthPerQubit,
    Fixed(f64),
}

impl EpsilonRule {
    pub fn epsilon(self, gamma: f64, n: usize) -> f64 {
        match self {
            EpsilonRule::TenthPerQubit => gamma / (10.0 * n as f64),
            EpsilonRule::Fixed(e) => e,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveConfig {
    pub name: String,
    pub n: usize,
    pub t: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub points: usize,
    /// Gate-step opportunities per qubit in `N`.
    pub c: usize,
    pub r_max: usize,
    pub epsilon: EpsilonRule,
}

impl CurveConfig {
    /// Defaults: `gamma` from `1e-7` to `1e-2` over 101 points, `c = 1`,
    /// `r_max = 15`, `epsilon = gamma / (10 n)`.
    pub fn new(name: impl Into<String>, n: usize, t: usize) -> Self {
        Self {
            name: name.into(),
            n,
            t,
            gamma_min: 1e-7,
            gamma_max: 1e-2,
            points: 101,
            c: 1,
            r_max: 15,
            epsilon: EpsilonRule::TenthPerQubit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_range = self.gamma_min > 0.0 && self.gamma_min < self.gamma_max && self.gamma_max <= 1.0;
        if !ok_range {
            return Err(Error::InvalidParameter(format!(
                "gamma grid [{}, {}] must satisfy 0 < min < max <= 1",
                self.gamma_min, self.gamma_max
            )));
        }
        if self.points < 2 {
            return Err(Error::InvalidParameter("a curve needs at least 2 points".into()));
        }
        if self.r_max < 3 {
            return Err(Error::InvalidParameter(format!("r_max = {} is below 3", self.r_max)));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if let EpsilonRule::Fixed(e) = self.epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::InvalidParameter(format!("epsilon = {e} is not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Log-spaced grid, ascending.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.gamma_min.ln(), self.gamma_max.ln());
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| match i {
                0 => self.gamma_min,
                i if i == self.points - 1 => self.gamma_max,
                i => (lo + (hi - lo) * i as f64 / last).exp(),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisPoint {
    pub gamma: f64,
    pub epsilon: f64,
    pub r: usize,
    pub r_capped: bool,
    pub alpha: f64,
    pub p1: f64,
    pub p2: f64,
    /// `4 (p1 + p2)` clipped to 1.
    pub p: f64,
}

/// Evaluates the model at one `gamma`, choosing `r`.
pub fn evaluate(config: &CurveConfig, gamma: f64) -> Result<AnalysisPoint> {
    let epsilon = config.epsilon.epsilon(gamma, config.n);
    let choice = choose_r(config.n, config.t, config.c, gamma, epsilon, config.r_max)?;
    let a = alpha(config.n, gamma, epsilon);
    let p1 = p1(choice.r, a)?;
    let p2 = p2(config.n, config.t, choice.r, config.c, gamma + config.n as f64 * epsilon);
    Ok(AnalysisPoint {
        gamma,
        epsilon,
        r: choice.r,
        r_capped: choice.capped,
        alpha: a,
        p1,
        p2,
        p: (4.0 * (p1 + p2)).min(1.0),
    })
}

pub fn curve(config: &CurveConfig) -> Result<Vec<AnalysisPoint>> {
    config.validate()?;
    config.grid().into_iter().map(|g| evaluate(config, g)).collect()
}

/// `gamma*` with `p(gamma*) = gamma*`, bracketed by the first sign change of
/// `p - gamma` on the grid and refined by bisection in `log gamma`. `None`
/// when the sign never changes.
pub fn break_even(config: &CurveConfig) -> Result<Option<f64>> {
    let points = curve(config)?;
    let Some(w) = points
        .windows(2)
        .find(|w| (w[0].p - w[0].gamma < 0.0) != (w[1].p - w[1].gamma < 0.0))
    else {
        return Ok(None);
    };
    let below = w[0].p < w[0].gamma;
    let (mut lo, mut hi) = (w[0].gamma.ln(), w[1].gamma.ln());
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        let pt = evaluate(config, mid.exp())?;
        if (pt.p < pt.gamma) == below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

/// Computational steps a per-step failure probability `p` supports,
/// `floor(1 / p)`; `None` (unbounded) for `p = 0`.
pub fn steps_supported(p: f64) -> Result<Option<u64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} is not in [0, 1]")));
    }
    if p == 0.0 {
        return Ok(None);
    }
    let s = 1.0 / p;
    let nearest = s.round();
    // 1 / 1e-12 evaluates just below 1e12.
    let steps = if (s - nearest).abs() <= 1e-9 * nearest { nearest } else { s.floor() };
    Ok(Some(steps as u64))
}

pub const CURVE_CSV_HEADER: &str = "code,gamma,epsilon,r,alpha,p1,p2,p";

pub fn curve_csv(name: &str, points: &[AnalysisPoint]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{name},{},{},{},{},{},{},{}\n",
            format_sig(p.gamma),
            format_sig(p.epsilon),
            p.r,
            format_sig(p.alpha),
            format_sig(p.p1),
            format_sig(p.p2),
            format_sig(p.p)
        ));
    }
    out
}
