//! Single-step shortcut for closed testing of `H_R` within `F`.
//!
//! Every superset `R ⊆ S ⊆ F` is indexed by its level `ℓ_S = Σ_{i∈S} w_i`.
//! Two curves over `[ℓ_R, ℓ_F]` bound the superset tests:
//!
//! - `g_min(ℓ)`, a convex piecewise-linear lower bound on `g_S`, obtained by
//!   adding features of `F ∖ R` in ascending order of `q_i = g_i / w_i`;
//! - `c_max(ℓ)`, the critical value of a vector that majorizes every
//!   superset spectrum at that level, valid while `α <= α₀`.
//!
//! If `g_min` stays above `c_max`, closed testing rejects `H_R`. Otherwise the
//! staircase sets (the breakpoints of `g_min`) are tested exactly, which can
//! exhibit a non-rejected superset.

use std::collections::HashMap;

use crate::driver::{check_alpha, LocalTester};
use crate::error::{Error, Result};
use crate::linmodel::{FeatureStats, Spectrum, SpectrumProvider};
use crate::sets::{self, IndexSet};
use crate::wchi2::{WeightedChiSq, DEFAULT_TRUNC_TOL};
use crate::Decision;

pub const DEFAULT_EPSILON: f64 = 1e-4;
/// Hard cap on Algorithm-1 steps; hitting it reports a crossing.
pub const MAX_CROSSING_STEPS: usize = 100_000;
const LEVEL_SLACK: f64 = 1e-8;
/// Fallback floor (fraction of the level) for tiny majorizing entries when
/// the series would otherwise stall.
const CMAX_FLOOR: f64 = 2e-5;

pub fn level(stats: &FeatureStats, set: &[usize]) -> f64 {
    stats.level(set)
}

/// `g_min(ℓ)` over `[ℓ_R, ℓ_F]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    /// Ratio order π of `F ∖ R` (ascending `q`, ties by index).
    order: Vec<usize>,
    /// Levels of the staircase sets `R ∪ {π_1..π_k}`, `k = 0..=v`.
    levels: Vec<f64>,
    stats: Vec<f64>,
    /// `slopes[k] = q_{π_{k+1}}`, the slope right of breakpoint `k`.
    slopes: Vec<f64>,
}

impl PiecewiseCurve {
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn base_level(&self) -> f64 {
        self.levels[0]
    }

    pub fn base_stat(&self) -> f64 {
        self.stats[0]
    }

    pub fn top_level(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    pub fn top_stat(&self) -> f64 {
        *self.stats.last().unwrap()
    }

    /// `(level, statistic, slope)` per breakpoint; the last slope is `None`.
    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64, Option<f64>)> + '_ {
        (0..self.levels.len()).map(|k| (self.levels[k], self.stats[k], self.slopes.get(k).copied()))
    }

    /// The staircase set with `k` ratio-ordered features added to `base`.
    pub fn staircase_set(&self, base: &[usize], k: usize) -> IndexSet {
        sets::union(base, &self.order[..k])
    }

    pub fn n_segments(&self) -> usize {
        self.slopes.len()
    }

    /// Curve value, with `ℓ` clamped into `[ℓ_R, ℓ_F]`.
    pub fn evaluate(&self, ell: f64) -> f64 {
        let ell = ell.clamp(self.base_level(), self.top_level());
        let k = self.levels.partition_point(|&l| l <= ell).saturating_sub(1);
        if k >= self.slopes.len() {
            return self.top_stat();
        }
        self.stats[k] + (ell - self.levels[k]) * self.slopes[k]
    }

    /// Largest level at which the curve equals `target`.
    pub fn inverse(&self, target: f64) -> Result<f64> {
        let (lo, hi) = (self.base_stat(), self.top_stat());
        let slack = 1e-12 * hi.abs().max(1.0);
        if !(target >= lo - slack && target <= hi + slack) {
            return Err(Error::OutOfRange { value: target, lo, hi });
        }
        let target = target.clamp(lo, hi);
        let k = self.stats.partition_point(|&s| s <= target).saturating_sub(1);
        if k >= self.slopes.len() {
            return Ok(self.top_level());
        }
        // stats[k] <= target < stats[k + 1] forces a positive slope
        let ell = self.levels[k] + (target - self.stats[k]) / self.slopes[k];
        Ok(ell.min(self.levels[k + 1]))
    }
}

/// Builds `g_min` for `R ⊆ F`; all features must be active.
pub fn gmin_curve(stats: &FeatureStats, base: &[usize], top: &[usize]) -> Result<PiecewiseCurve> {
    if !sets::is_subset(base, top) {
        return Err(Error::InvalidInput("R must be a subset of F".into()));
    }
    if let Some(&i) = top.iter().find(|&&i| !stats.active[i]) {
        return Err(Error::InvalidInput(format!("feature {i} is inactive")));
    }
    let mut order = sets::difference(top, base);
    order.sort_by(|&a, &b| stats.q[a].total_cmp(&stats.q[b]).then(a.cmp(&b)));
    let mut levels = Vec::with_capacity(order.len() + 1);
    let mut values = Vec::with_capacity(order.len() + 1);
    let (mut l, mut g) = (stats.level(base), stats.stat(base));
    levels.push(l);
    values.push(g);
    for &i in &order {
        l += stats.w[i];
        g += stats.g[i];
        levels.push(l);
        values.push(g);
    }
    let slopes = order.iter().map(|&i| stats.q[i]).collect();
    Ok(PiecewiseCurve {
        order,
        levels,
        stats: values,
        slopes,
    })
}

/// `λ̂(ℓ) = (λ^F_1..λ^F_i, η, λ^R_{i+2}..)` with `λ^R_{i+1} <= η <= λ^F_{i+1}`
/// and total `ℓ`; the head index `i` is the smallest feasible one.
pub fn majorizing_vector(lambda_r: &Spectrum, lambda_f: &Spectrum, ell: f64) -> Result<Spectrum> {
    let (lr, lf) = (lambda_r.level, lambda_f.level);
    let slack = LEVEL_SLACK * lf.max(f64::MIN_POSITIVE);
    if !(ell >= lr - slack && ell <= lf + slack) {
        return Err(Error::Infeasible { level: ell, lo: lr, hi: lf });
    }
    if ell >= lf {
        return Ok(lambda_f.clone());
    }
    if ell <= lr {
        return Ok(lambda_r.clone());
    }
    let len = lambda_r.nonzeros().max(lambda_f.nonzeros());
    if len == 0 {
        return Ok(Spectrum::new(Vec::new(), lambda_f.ambient_n));
    }
    // head[i] = Σ_{j<i} λ^F_j, tail[i] = Σ_{j>=i} λ^R_j
    let mut tail = vec![0.0; len + 1];
    for j in (0..len).rev() {
        tail[j] = tail[j + 1] + lambda_r.get(j);
    }
    let mut head = 0.0;
    let mut chosen = None;
    for i in 0..len {
        // T(i+1) = head + λ^F_i + tail[i+1]
        if ell <= head + lambda_f.get(i) + tail[i + 1] || i + 1 == len {
            chosen = Some((i, head));
            break;
        }
        head += lambda_f.get(i);
    }
    let (i, head) = chosen.expect("len > 0");
    let eta = (ell - head - tail[i + 1]).clamp(lambda_r.get(i).min(lambda_f.get(i)), lambda_f.get(i));
    let mut v: Vec<f64> = (0..i).map(|j| lambda_f.get(j)).collect();
    v.push(eta);
    v.extend((i + 1..len).map(|j| lambda_r.get(j)));
    Ok(Spectrum::new(v, lambda_f.ambient_n))
}

/// `c_max(ℓ)` for one `(R, F)` pair, memoized by level.
pub struct CmaxCurve<'s> {
    lambda_r: &'s Spectrum,
    lambda_f: &'s Spectrum,
    alpha: f64,
    trunc_tol: f64,
    cache: HashMap<i64, f64>,
    evaluations: usize,
}

impl<'s> CmaxCurve<'s> {
    pub fn new(lambda_r: &'s Spectrum, lambda_f: &'s Spectrum, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            lambda_r,
            lambda_f,
            alpha,
            trunc_tol: DEFAULT_TRUNC_TOL,
            cache: HashMap::new(),
            evaluations: 0,
        })
    }

    pub fn with_trunc_tol(mut self, trunc_tol: f64) -> Self {
        self.trunc_tol = trunc_tol;
        self
    }

    /// Calls to [`CmaxCurve::eval`], cache hits included.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn eval(&mut self, ell: f64) -> Result<f64> {
        self.evaluations += 1;
        let key = (ell / self.lambda_f.level.max(f64::MIN_POSITIVE) * 1e9).round() as i64;
        if let Some(&c) = self.cache.get(&key) {
            return Ok(c);
        }
        let c = cmax_with_tol(self.lambda_r, self.lambda_f, ell, self.alpha, self.trunc_tol)?;
        self.cache.insert(key, c);
        Ok(c)
    }
}

/// `(1 - α)` quantile of `λ̂(ℓ)`.
///
/// If the exact vector has entries so small that the series stalls, entries
/// below `2e-5 · ℓ` are raised to that floor. The raised vector dominates
/// `λ̂(ℓ)` elementwise, so its quantile is an upper bound.
pub fn cmax(lambda_r: &Spectrum, lambda_f: &Spectrum, ell: f64, alpha: f64) -> Result<f64> {
    cmax_with_tol(lambda_r, lambda_f, ell, alpha, DEFAULT_TRUNC_TOL)
}

pub fn cmax_with_tol(lambda_r: &Spectrum, lambda_f: &Spectrum, ell: f64, alpha: f64, trunc_tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let v = majorizing_vector(lambda_r, lambda_f, ell)?;
    let dist = |l: &[f64]| Ok::<_, Error>(WeightedChiSq::new(l)?.with_trunc_tol(trunc_tol));
    match dist(&v.lambdas)?.quantile(1.0 - alpha) {
        Err(Error::SeriesStall { .. }) => {
            let floor = CMAX_FLOOR * v.level;
            let raised: Vec<f64> = v.lambdas.iter().map(|&l| l.max(floor)).collect();
            log::debug!("c_max at level {ell}: series stalled, using floor {floor:e}");
            dist(&raised)?.quantile(1.0 - alpha)
        }
        other => other,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Crossing {
    /// `g_min >= c_max` certified over the whole range.
    Above,
    /// Successive step levels closer than ε at this level.
    Cross(f64),
}

/// Step iteration between `g_min` and `c_max`, starting from `ℓ_F`.
///
/// The caller guarantees `g_F >= c_F`. Returns the outcome and the number of
/// `c_max` evaluations (one per step).
pub fn crossing_test<F>(curve: &PiecewiseCurve, mut cmax_fn: F, epsilon: f64) -> Result<(Crossing, usize)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    let g_r = curve.base_stat();
    let g_f = curve.top_stat();
    let mut ell0 = curve.top_level();
    let mut c1 = cmax_fn(ell0)?;
    let mut evals = 1;
    if c1 <= g_r {
        return Ok((Crossing::Above, evals));
    }
    for _ in 0..MAX_CROSSING_STEPS {
        let ell1 = ell0;
        // c_max is nondecreasing in ℓ, so c1 <= g_min(ell1); a larger value
        // means the curves already cross at ell1 and the step stalls
        ell0 = curve.inverse(c1.min(g_f))?.min(ell1);
        c1 = cmax_fn(ell0)?;
        evals += 1;
        if c1 <= g_r {
            return Ok((Crossing::Above, evals));
        }
        if (ell1 - ell0).abs() <= epsilon {
            return Ok((Crossing::Cross(ell0), evals));
        }
    }
    Ok((Crossing::Cross(ell0), evals))
}

/// Which check settled a single-step decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// `g_R < c_R` or `g_F < c_F`.
    EndpointTest,
    /// `g_R >= c_F`.
    BaseAboveTop,
    /// `g_min` above `c_max`.
    Curves,
    /// Exact staircase tests (witness found, or all passed: unsure).
    Staircase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleStepResult {
    pub decision: Decision,
    pub witness: Option<IndexSet>,
    pub stage: Stage,
    pub n_cmax_evals: usize,
    pub n_exact_tests: usize,
}

impl SingleStepResult {
    fn not_reject(witness: IndexSet, stage: Stage, n_cmax_evals: usize, n_exact_tests: usize) -> Self {
        Self {
            decision: Decision::NotReject,
            witness: Some(witness),
            stage,
            n_cmax_evals,
            n_exact_tests,
        }
    }
}

/// One shortcut pass for `H_R` within `F`.
pub fn single_step<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    epsilon: f64,
) -> Result<SingleStepResult> {
    if base.is_empty() {
        return Err(Error::InvalidInput("R must be nonempty".into()));
    }
    let stats = tester.stats();
    let curve = gmin_curve(stats, base, top)?;
    let mut exact = 0;

    exact += 1;
    if !tester.test(base)?.reject {
        return Ok(SingleStepResult::not_reject(base.to_vec(), Stage::EndpointTest, 0, exact));
    }
    exact += 1;
    if !tester.test(top)?.reject {
        return Ok(SingleStepResult::not_reject(top.to_vec(), Stage::EndpointTest, 0, exact));
    }
    if tester.exceeds_critical(curve.base_stat(), top)? {
        return Ok(SingleStepResult {
            decision: Decision::Reject,
            witness: None,
            stage: Stage::BaseAboveTop,
            n_cmax_evals: 0,
            n_exact_tests: exact,
        });
    }

    let lambda_r = tester.spectrum(base)?;
    let lambda_f = tester.spectrum(top)?;
    let mut cmax_curve = CmaxCurve::new(&lambda_r, &lambda_f, tester.alpha())?.with_trunc_tol(tester.trunc_tol());
    let (crossing, _) = crossing_test(&curve, |l| cmax_curve.eval(l), epsilon)?;
    let n_cmax_evals = cmax_curve.evaluations();
    if crossing == Crossing::Above {
        return Ok(SingleStepResult {
            decision: Decision::Reject,
            witness: None,
            stage: Stage::Curves,
            n_cmax_evals,
            n_exact_tests: exact,
        });
    }

    for k in 1..curve.n_segments() {
        let set = curve.staircase_set(base, k);
        exact += 1;
        if !tester.test(&set)?.reject {
            return Ok(SingleStepResult::not_reject(set, Stage::Staircase, n_cmax_evals, exact));
        }
    }
    Ok(SingleStepResult {
        decision: Decision::Unsure,
        witness: None,
        stage: Stage::Staircase,
        n_cmax_evals,
        n_exact_tests: exact,
    })
}

/// Sampled `(ℓ, g_min(ℓ), c_max(ℓ))` and exact staircase points for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveExport {
    /// Evenly spaced levels merged with all breakpoints, ascending.
    pub rows: Vec<CurveRow>,
    /// Staircase sets with their exact level, statistic and critical value.
    pub staircase: Vec<StaircasePoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub level: f64,
    pub gmin: f64,
    pub cmax: f64,
    pub breakpoint: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StaircasePoint {
    pub set: IndexSet,
    pub level: f64,
    pub statistic: f64,
    pub critical_value: f64,
}

pub fn export_curves<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    samples: usize,
) -> Result<CurveExport> {
    let curve = gmin_curve(tester.stats(), base, top)?;
    let lambda_r = tester.spectrum(base)?;
    let lambda_f = tester.spectrum(top)?;
    let alpha = tester.alpha();
    let (lo, hi) = (curve.base_level(), curve.top_level());

    let mut points: Vec<(f64, bool)> = curve.breakpoints().map(|(l, _, _)| (l, true)).collect();
    if samples >= 2 && hi > lo {
        points.extend((0..samples).map(|j| (lo + (hi - lo) * j as f64 / (samples - 1) as f64, false)));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    points.dedup_by(|b, a| b.0 == a.0);

    let mut rows = Vec::with_capacity(points.len());
    for (level, breakpoint) in points {
        rows.push(CurveRow {
            level,
            gmin: curve.evaluate(level),
            cmax: cmax_with_tol(&lambda_r, &lambda_f, level, alpha, tester.trunc_tol())?,
            breakpoint,
        });
    }
    let mut staircase = Vec::with_capacity(curve.n_segments() + 1);
    for k in 0..=curve.n_segments() {
        let set = curve.staircase_set(base, k);
        staircase.push(StaircasePoint {
            level: tester.stats().level(&set),
            statistic: tester.stats().stat(&set),
            critical_value: tester.critical_value(&set)?,
            set,
        });
    }
    Ok(CurveExport { rows, staircase })
}

/// α₀ over random supersets `R ⊆ S ⊆ F`.
#[derive(Debug, Clone, PartialEq)]
pub struct Alpha0Survey {
    pub values: Vec<f64>,
    /// Supersets whose diagnostic could not be evaluated.
    pub failures: usize,
}

impl Alpha0Survey {
    pub fn min(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::min)
    }

    pub fn median(&self) -> Option<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        (!v.is_empty()).then(|| v[v.len() / 2])
    }
}

/// α₀ of `λ_S` against `λ̂(ℓ_S)`.
pub fn alpha0_for<P: SpectrumProvider + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    set: &[usize],
) -> Result<f64> {
    let lambda_r = tester.spectrum(base)?;
    let lambda_f = tester.spectrum(top)?;
    let lambda_s = tester.spectrum(set)?;
    let major = majorizing_vector(&lambda_r, &lambda_f, lambda_s.level)?;
    crate::wchi2::alpha0_diagnostic(&lambda_s.lambdas, &major.lambdas)
}

/// Draws `samples` supersets: a uniform number of extra features, then a
/// uniform subset of that size.
pub fn alpha0_survey<P: SpectrumProvider + ?Sized, G: rand::Rng + ?Sized>(
    tester: &mut LocalTester<'_, P>,
    base: &[usize],
    top: &[usize],
    samples: usize,
    rng: &mut G,
) -> Result<Alpha0Survey> {
    if !sets::is_subset(base, top) || base.is_empty() {
        return Err(Error::InvalidInput("R must be a nonempty subset of F".into()));
    }
    let free = sets::difference(top, base);
    let mut survey = Alpha0Survey { values: Vec::with_capacity(samples), failures: 0 };
    for _ in 0..samples {
        let k = rng.random_range(0..=free.len());
        let extra = rand::seq::index::sample(rng, free.len(), k).into_iter().map(|j| free[j]);
        let set = sets::union(base, &sets::normalize(extra.collect()));
        match alpha0_for(tester, base, top, &set) {
            Ok(a) => survey.values.push(a),
            Err(e) => {
                log::warn!("alpha0 diagnostic failed for a superset of size {}: {e}", set.len());
                survey.failures += 1;
            }
        }
    }
    Ok(survey)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(g: &[f64], w: &[f64]) -> FeatureStats {
        FeatureStats {
            g: g.to_vec(),
            w: w.to_vec(),
            q: g.iter().zip(w).map(|(a, b)| a / b).collect(),
            active: vec![true; g.len()],
        }
    }

    #[test]
    fn curve_degenerates_when_r_equals_f() {
        let s = stats(&[1.0, 2.0], &[1.0, 1.0]);
        let c = gmin_curve(&s, &[0, 1], &[0, 1]).unwrap();
        assert_eq!(c.n_segments(), 0);
        assert_eq!(c.evaluate(2.0), 3.0);
        assert_eq!(c.inverse(3.0).unwrap(), 2.0);
    }

    #[test]
    fn curve_orders_by_ratio_with_index_ties() {
        let s = stats(&[4.0, 1.0, 2.0, 3.0, 1.0], &[1.0, 1.0, 2.0, 1.0, 1.0]);
        let c = gmin_curve(&s, &[0], &[0, 1, 2, 3, 4]).unwrap();
        // q = (4, 1, 1, 3, 1): ties among 1, 2, 4 resolved by index
        assert_eq!(c.order(), &[1, 2, 4, 3]);
        let l1 = 1.0 + s.w[1];
        assert_eq!(c.evaluate(l1), s.g[0] + s.g[1]);
        assert_eq!(c.evaluate(c.top_level()), 11.0);
        assert_eq!(c.evaluate(c.base_level()), 4.0);
    }

    #[test]
    fn inverse_takes_supremum_of_flat_segment() {
        let s = stats(&[2.0, 0.0, 0.0, 3.0], &[1.0, 1.0, 2.0, 1.0]);
        let c = gmin_curve(&s, &[0], &[0, 1, 2, 3]).unwrap();
        assert_eq!(c.inverse(2.0).unwrap(), 4.0);
        assert_eq!(c.inverse(5.0).unwrap(), 5.0);
        assert!((c.inverse(3.5).unwrap() - 4.5).abs() < 1e-15);
        assert!(matches!(c.inverse(5.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(c.inverse(1.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn majorizing_vector_endpoints() {
        let r = Spectrum::new(vec![2.0, 0.5], 10);
        let f = Spectrum::new(vec![5.0, 3.0, 1.0, 0.2], 10);
        assert_eq!(majorizing_vector(&r, &f, r.level).unwrap().lambdas, r.lambdas);
        assert_eq!(majorizing_vector(&r, &f, f.level).unwrap().lambdas, f.lambdas);
        let mid = majorizing_vector(&r, &f, 6.0).unwrap();
        // T(1) = 5 + 0.5 = 5.5 < 6 <= T(2) = 8: head (5), η = 1 in [0.5, 3]
        assert_eq!(mid.lambdas, vec![5.0, 1.0]);
        assert!(matches!(majorizing_vector(&r, &f, 10.0), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn cmax_matches_endpoint_critical_values() {
        let r = Spectrum::new(vec![2.0, 0.5], 10);
        let f = Spectrum::new(vec![5.0, 3.0, 1.0, 0.2], 10);
        let cf = WeightedChiSq::new(&f.lambdas).unwrap().quantile(0.95).unwrap();
        let cr = WeightedChiSq::new(&r.lambdas).unwrap().quantile(0.95).unwrap();
        assert_eq!(cmax(&r, &f, f.level, 0.05).unwrap(), cf);
        assert_eq!(cmax(&r, &f, r.level, 0.05).unwrap(), cr);
        assert!(cmax(&r, &f, r.level, 0.5).is_err());
    }

    #[test]
    fn cmax_is_nondecreasing_in_level() {
        let r = Spectrum::new(vec![2.0, 0.5], 10);
        let f = Spectrum::new(vec![5.0, 3.0, 1.0, 0.2], 10);
        let mut prev = 0.0;
        for j in 0..=40 {
            let ell = r.level + (f.level - r.level) * j as f64 / 40.0;
            let c = cmax(&r, &f, ell, 0.05).unwrap();
            assert!(c >= prev - 1e-9);
            prev = c;
        }
    }

    #[test]
    fn cmax_survives_tiny_eta() {
        let r = Spectrum::new(vec![2.0], 10);
        let f = Spectrum::new(vec![5.0, 3.0], 10);
        // T(1) = 5 exactly; η = 1e-9 is far too small for the series
        let c = cmax(&r, &f, 5.0 + 1e-9, 0.05).unwrap();
        let c_head = WeightedChiSq::new(&[5.0]).unwrap().quantile(0.95).unwrap();
        assert!(c >= c_head && c < c_head * 1.01);
    }

    #[test]
    fn crossing_above_after_one_evaluation() {
        let s = stats(&[10.0, 1.0, 1.0], &[1.0, 1.0, 1.0]);
        let c = gmin_curve(&s, &[0], &[0, 1, 2]).unwrap();
        let (res, evals) = crossing_test(&c, |_| Ok(9.0), 1e-4).unwrap();
        assert_eq!(res, Crossing::Above);
        assert_eq!(evals, 1);
    }

    #[test]
    fn crossing_on_identical_curves() {
        let s = stats(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0]);
        let c = gmin_curve(&s, &[0], &[0, 1, 2]).unwrap();
        let curve = c.clone();
        let (res, evals) = crossing_test(&c, |l| Ok(curve.evaluate(l)), 1e-4).unwrap();
        assert!(matches!(res, Crossing::Cross(_)));
        assert!(evals <= ((c.top_level() - c.base_level()) / 1e-4).ceil() as usize + 1);
    }

    #[test]
    fn crossing_detects_dip_below_curve() {
        // g_min: 1 -> 2 -> 6 over levels 1..3; c_max linear from 1.5 to 5.5
        let s = stats(&[1.0, 1.0, 4.0], &[1.0, 1.0, 1.0]);
        let c = gmin_curve(&s, &[0], &[0, 1, 2]).unwrap();
        let (res, _) = crossing_test(&c, |l| Ok(1.5 + 2.0 * (l - 1.0)), 1e-4).unwrap();
        assert!(matches!(res, Crossing::Cross(_)));
        let (res, _) = crossing_test(&c, |l| Ok(0.5 + 0.3 * (l - 1.0)), 1e-4).unwrap();
        assert_eq!(res, Crossing::Above);
    }
}
