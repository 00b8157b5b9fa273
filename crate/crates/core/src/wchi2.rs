//! Distribution of `Q = Σ λ_i χ²_1` for nonnegative weights.
//!
//! The CDF uses the Robbins–Pitman mixture representation
//!
//! ```text
//! P(Q <= t) = Σ_k a_k P(χ²_{d + 2k} <= t / β),   β = min λ
//! ```
//!
//! where `a_k` is the pmf of a sum of independent negative-binomial(1/2, c_i)
//! counts with `c_i = 1 - β / λ_i`. With `β = min λ` every `a_k` is
//! nonnegative, so the truncation error after `K` terms is bounded by
//! `(1 - Σ_{k<K} a_k) · P(χ²_{d+2K} <= t/β)`.
//!
//! The coefficients satisfy `a_k = (1 / 2k) Σ_i s_i(k)` with
//! `s_i(k) = c_i (s_i(k-1) + a_{k-1})`, which costs `O(d)` per term and only
//! adds nonnegative quantities.

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

pub const DEFAULT_TRUNC_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_TERMS: usize = 100_000;
/// Weights below this fraction of the largest are dropped.
pub const STRIP_RATIO: f64 = 1e-12;
/// Probability-space tolerance of [`WeightedChiSq::quantile`].
pub const QUANTILE_TOL: f64 = 1e-10;

const RESCALE_AT: f64 = 1e250;
const REANCHOR_EVERY: usize = 128;

#[derive(Debug, Clone)]
pub struct WeightedChiSq {
    lambdas: Vec<f64>,
    beta: f64,
    trunc_tol: f64,
    max_terms: usize,
}

impl WeightedChiSq {
    /// Zero and negligible weights are stripped; an all-zero input gives the
    /// point mass at zero.
    pub fn new(weights: &[f64]) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidInput(format!("invalid chi-square weight {w}")));
        }
        let max = weights.iter().cloned().fold(0.0, f64::max);
        let mut lambdas: Vec<f64> = weights
            .iter()
            .copied()
            .filter(|&w| w > 0.0 && w >= STRIP_RATIO * max)
            .collect();
        lambdas.sort_by(|a, b| b.total_cmp(a));
        let beta = lambdas.last().copied().unwrap_or(0.0);
        Ok(Self {
            lambdas,
            beta,
            trunc_tol: DEFAULT_TRUNC_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        })
    }

    pub fn with_trunc_tol(mut self, tol: f64) -> Self {
        self.trunc_tol = tol;
        self
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator::new(self)
    }

    pub fn cdf(&self, t: f64) -> Result<f64> {
        self.evaluator().cdf(t)
    }

    pub fn sf(&self, t: f64) -> Result<f64> {
        Ok(1.0 - self.cdf(t)?)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.evaluator().quantile(p)
    }
}

/// Reusable series state; the mixture coefficients are computed once and
/// extended on demand, so repeated CDF calls on one distribution are cheap.
#[derive(Debug)]
pub struct Evaluator<'a> {
    dist: &'a WeightedChiSq,
    ratios: Vec<f64>,
    coeffs: Vec<f64>,
    cum_mass: Vec<f64>,
    s: Vec<f64>,
    scaled_last: f64,
    log_scale: f64,
}

impl<'a> Evaluator<'a> {
    fn new(dist: &'a WeightedChiSq) -> Self {
        let beta = dist.beta;
        let ratios: Vec<f64> = dist.lambdas.iter().map(|&l| 1.0 - beta / l).collect();
        let log_a0 = 0.5 * dist.lambdas.iter().map(|&l| (beta / l).ln()).sum::<f64>();
        let a0 = log_a0.exp();
        Self {
            dist,
            s: vec![0.0; ratios.len()],
            ratios,
            coeffs: vec![a0],
            cum_mass: vec![a0],
            scaled_last: 1.0,
            log_scale: log_a0,
        }
    }

    fn extend(&mut self) -> Result<()> {
        let k = self.coeffs.len();
        if k >= self.dist.max_terms {
            let ratio = self.dist.lambdas[0] / self.dist.beta;
            return Err(Error::SeriesStall {
                max_terms: self.dist.max_terms,
                tol: self.dist.trunc_tol,
                ratio,
            });
        }
        let prev = self.scaled_last;
        let mut total = 0.0;
        for (si, &c) in self.s.iter_mut().zip(&self.ratios) {
            *si = c * (*si + prev);
            total += *si;
        }
        let mut next = total / (2.0 * k as f64);
        if next > RESCALE_AT {
            let f = 1.0 / RESCALE_AT;
            self.s.iter_mut().for_each(|v| *v *= f);
            next *= f;
            self.log_scale += RESCALE_AT.ln();
        }
        self.scaled_last = next;
        let a = next * self.log_scale.exp();
        let mass = self.cum_mass[k - 1] + a;
        debug_assert!(a >= 0.0);
        debug_assert!(mass <= 1.0 + 1e-9, "mixture mass {mass} exceeds one");
        self.coeffs.push(a);
        self.cum_mass.push(mass);
        Ok(())
    }

    /// Mixture coefficients computed so far.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn cdf(&mut self, t: f64) -> Result<f64> {
        Ok(self.cdf_pdf(t)?.0)
    }

    /// CDF and density at `t`.
    pub fn cdf_pdf(&mut self, t: f64) -> Result<(f64, f64)> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidInput(format!("cdf argument must be >= 0, got {t}")));
        }
        if self.dist.is_degenerate() {
            return Ok((1.0, 0.0));
        }
        if t == 0.0 {
            return Ok((0.0, 0.0));
        }
        if t.is_infinite() {
            return Ok((1.0, 0.0));
        }
        let beta = self.dist.beta;
        let tol = self.dist.trunc_tol;
        let d = self.dist.lambdas.len() as f64;
        // all chi-square terms in units of x' = t / (2β), shape a = (d + 2k) / 2
        let half_x = t / (2.0 * beta);
        let log_half_x = half_x.ln();
        let shape0 = d / 2.0;
        let mut lower = gamma_lr(shape0, half_x);
        // density of χ²_d at x, via x'^{a-1} e^{-x'} / Γ(a) / 2
        let mut pdf_term = 0.5 * ((shape0 - 1.0) * log_half_x - half_x - ln_gamma(shape0)).exp();
        let mut cdf = 0.0;
        let mut pdf = 0.0;
        let mut ln_gamma_next = ln_gamma(shape0 + 1.0);
        let mut k = 0usize;
        loop {
            if k >= self.coeffs.len() {
                self.extend()?;
            }
            let a_k = self.coeffs[k];
            let shape = shape0 + k as f64;
            cdf += a_k * lower;
            pdf += a_k * pdf_term;
            // step to shape + 1
            let step = (shape * log_half_x - half_x - ln_gamma_next).exp();
            ln_gamma_next += (shape + 1.0).ln();
            lower = if (k + 1).is_multiple_of(REANCHOR_EVERY) {
                gamma_lr(shape + 1.0, half_x)
            } else {
                (lower - step).max(0.0)
            };
            pdf_term = 0.5 * step;
            k += 1;
            let remaining = (1.0 - self.cum_mass[k - 1]).max(0.0);
            if remaining * lower <= tol || remaining <= tol {
                break;
            }
        }
        Ok((cdf.clamp(0.0, 1.0), pdf / beta))
    }

    /// Smallest `t` with `|cdf(t) - p| <= 1e-10`, by bracketing and
    /// safeguarded Newton steps.
    pub fn quantile(&mut self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidInput(format!("quantile level must lie in (0,1), got {p}")));
        }
        if self.dist.is_degenerate() {
            return Ok(0.0);
        }
        let total = self.dist.mean();
        let chi1 = ChiSquared::new(1.0).expect("valid dof").inverse_cdf(p);
        let mut lo = 0.0;
        let mut hi = total * chi1.max(1.0);
        loop {
            let f = self.cdf(hi)?;
            if f >= p {
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let (f, dens) = self.cdf_pdf(t)?;
            let diff = f - p;
            if diff.abs() <= QUANTILE_TOL {
                return Ok(t);
            }
            if diff > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                return Ok(0.5 * (lo + hi));
            }
            let newton = if dens > 0.0 { t - diff / dens } else { f64::NAN };
            t = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Ok(t)
    }
}

/// Partial-sum majorization `major ≻ minor` of descending vectors (implicit
/// zero padding), with the total sums equal up to `tol · total`.
pub fn check_majorization(major: &[f64], minor: &[f64], tol: f64) -> Result<()> {
    let mut a: Vec<f64> = major.to_vec();
    let mut b: Vec<f64> = minor.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    let len = a.len().max(b.len());
    let scale = a.iter().sum::<f64>().max(b.iter().sum::<f64>()).max(f64::MIN_POSITIVE);
    let (mut sa, mut sb) = (0.0, 0.0);
    for i in 0..len {
        sa += a.get(i).copied().unwrap_or(0.0);
        sb += b.get(i).copied().unwrap_or(0.0);
        if sa < sb - tol * scale {
            return Err(Error::NotMajorizing {
                index: i + 1,
                deficit: sb - sa,
            });
        }
    }
    if (sa - sb).abs() > tol * scale {
        return Err(Error::NotMajorizing {
            index: len,
            deficit: sb - sa,
        });
    }
    Ok(())
}

pub fn majorizes(major: &[f64], minor: &[f64], tol: f64) -> bool {
    check_majorization(major, minor, tol).is_ok()
}

const ALPHA0_GRID: usize = 256;
const ALPHA0_TOP: f64 = 1.0 - 1e-6;
const ALPHA0_DIFF_TOL: f64 = 1e-12;
const ALPHA0_ROOT_TOL: f64 = 1e-8;

/// Tail probability `α₀` of the true distribution at the last crossing of
/// the CDFs of `Σ true_i χ²_1` and `Σ major_i χ²_1`.
///
/// Scans `cdf_major - cdf_true` on a 256-point geometric grid between the
/// median and the `1 - 1e-6` quantile of the true distribution and bisects
/// the last sign change. Without a sign change: identical CDFs give 1.0, a
/// major CDF below the true one on the whole grid gives the tail at the grid
/// start, and a major CDF still above at the grid end gives the tail at the
/// grid end.
pub fn alpha0_diagnostic(lambda_true: &[f64], lambda_major: &[f64]) -> Result<f64> {
    check_majorization(lambda_major, lambda_true, 1e-8)?;
    let dt = WeightedChiSq::new(lambda_true)?;
    let dm = WeightedChiSq::new(lambda_major)?;
    if dt.is_degenerate() {
        return Ok(1.0);
    }
    let mut et = dt.evaluator();
    let mut em = dm.evaluator();
    let start = et.quantile(0.5)?;
    let stop = et.quantile(ALPHA0_TOP)?;
    let ratio = (stop / start).powf(1.0 / (ALPHA0_GRID - 1) as f64);
    let grid: Vec<f64> = (0..ALPHA0_GRID).map(|j| start * ratio.powi(j as i32)).collect();

    let mut diffs = Vec::with_capacity(grid.len());
    for &t in &grid {
        diffs.push(em.cdf(t)? - et.cdf(t)?);
    }
    let sign = |d: f64| {
        if d > ALPHA0_DIFF_TOL {
            1
        } else if d < -ALPHA0_DIFF_TOL {
            -1
        } else {
            0
        }
    };
    let signs: Vec<i32> = diffs.iter().map(|&d| sign(d)).collect();
    if signs.iter().all(|&s| s == 0) {
        return Ok(1.0);
    }
    let last_pos = signs.iter().rposition(|&s| s > 0);
    let Some(jp) = last_pos else {
        // major below true from the median on: crossing lies below the grid
        return Ok(1.0 - et.cdf(grid[0])?);
    };
    let Some(jn) = (jp + 1..grid.len()).find(|&j| signs[j] < 0) else {
        return Ok(1.0 - et.cdf(grid[grid.len() - 1])?);
    };
    let (mut lo, mut hi) = (grid[jp], grid[jn]);
    while hi - lo > ALPHA0_ROOT_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if em.cdf(mid)? - et.cdf(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(1.0 - et.cdf(0.5 * (lo + hi))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi2_cdf(dof: f64, x: f64) -> f64 {
        ChiSquared::new(dof).unwrap().cdf(x)
    }

    #[test]
    fn singleton_matches_scaled_chi2() {
        let d = WeightedChiSq::new(&[2.5]).unwrap();
        for t in [0.01, 0.5, 2.5, 7.0, 30.0] {
            assert!((d.cdf(t).unwrap() - chi2_cdf(1.0, t / 2.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_weights_match_chi2_dof() {
        let d = WeightedChiSq::new(&[1.0; 7]).unwrap();
        for t in [0.3, 4.0, 7.0, 15.0, 40.0] {
            assert!((d.cdf(t).unwrap() - chi2_cdf(7.0, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_boundaries() {
        let d = WeightedChiSq::new(&[3.0, 1.0, 0.2]).unwrap();
        assert_eq!(d.cdf(0.0).unwrap(), 0.0);
        assert!(d.cdf(1e4).unwrap() > 1.0 - 1e-12);
        assert!(d.cdf(-1.0).is_err());
    }

    #[test]
    fn zero_weights_are_stripped() {
        let a = WeightedChiSq::new(&[2.0, 0.0, 1.0, 0.0]).unwrap();
        let b = WeightedChiSq::new(&[2.0, 1.0]).unwrap();
        assert_eq!(a.lambdas(), b.lambdas());
        let z = WeightedChiSq::new(&[0.0, 0.0]).unwrap();
        assert!(z.is_degenerate());
        assert_eq!(z.cdf(0.5).unwrap(), 1.0);
        assert_eq!(z.quantile(0.95).unwrap(), 0.0);
    }

    #[test]
    fn coefficients_are_a_subprobability() {
        let d = WeightedChiSq::new(&[5.0, 2.0, 1.0, 0.3]).unwrap();
        let mut ev = d.evaluator();
        ev.cdf(200.0).unwrap();
        let mut total = 0.0;
        for &a in ev.coefficients() {
            assert!(a >= 0.0);
            total += a;
            assert!(total <= 1.0 + 1e-12);
        }
        assert!(total > 0.99);
    }

    #[test]
    fn chi2_one_quantile() {
        let d = WeightedChiSq::new(&[1.0]).unwrap();
        let q = d.quantile(0.95).unwrap();
        assert!((q - 3.841458820694124).abs() < 1e-8);
    }

    #[test]
    fn quantile_round_trip() {
        let d = WeightedChiSq::new(&[2.0, 1.0, 0.5]).unwrap();
        for p in [0.5, 0.9, 0.95, 0.99] {
            let q = d.quantile(p).unwrap();
            assert!((d.cdf(q).unwrap() - p).abs() <= 1e-10);
        }
    }

    #[test]
    fn small_ratio_stalls_with_tiny_budget() {
        let d = WeightedChiSq::new(&[1.0, 1e-4]).unwrap().with_max_terms(50);
        assert!(matches!(d.cdf(3.0), Err(Error::SeriesStall { .. })));
    }

    #[test]
    fn many_weights_do_not_underflow() {
        // a_0 = (β/λ)^{d/2} is far below f64 range here
        let weights: Vec<f64> = (0..400).map(|i| 1.0 + 3.0 * (i % 2) as f64).collect();
        let d = WeightedChiSq::new(&weights).unwrap();
        let mean = d.mean();
        let c = d.cdf(mean).unwrap();
        assert!(c > 0.4 && c < 0.6, "cdf at mean {c}");
    }

    #[test]
    fn majorization_partial_sums() {
        assert!(majorizes(&[2.0, 0.0], &[1.0, 1.0], 1e-12));
        assert!(!majorizes(&[1.0, 1.0], &[2.0, 0.0], 1e-12));
        assert!(!majorizes(&[2.0, 1.0], &[1.0, 1.0], 1e-12));
        assert!(majorizes(&[3.0], &[1.0, 1.0, 1.0], 1e-12));
    }

    #[test]
    fn alpha0_identical_is_one() {
        let l = [3.0, 1.0, 0.5];
        assert_eq!(alpha0_diagnostic(&l, &l).unwrap(), 1.0);
    }

    #[test]
    fn alpha0_rejects_non_majorizing_pair() {
        assert!(matches!(
            alpha0_diagnostic(&[2.0, 0.0], &[1.0, 1.0]),
            Err(Error::NotMajorizing { .. })
        ));
    }
}
