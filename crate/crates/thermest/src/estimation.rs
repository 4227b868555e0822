//! Classical estimation layer: outcome models p(k|x), Fisher information,
//! maximum-likelihood estimation and likelihood-ratio confidence regions.

use crate::qmat::{CMatrix, DensityOperator};
use crate::{Error, Result};
use std::sync::Arc;

/// Two-sided coverage of one standard deviation of a Gaussian, erf(1/sqrt 2).
pub const ALPHA_ONE_SIGMA: f64 = 0.682_689_492_137_085_9;

const GRID_POINTS: usize = 2001;
const REFINE_TOL: f64 = 1e-8;

/// Parameter domain for an outcome model.
#[derive(Debug, Clone, Copy)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Domain {
    pub fn phase() -> Self {
        Domain {
            lo: 0.0,
            hi: 2.0 * std::f64::consts::PI,
            periodic: true,
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        Domain {
            lo,
            hi,
            periodic: false,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Evaluation grid. Periodic domains omit the duplicate endpoint.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let len = self.length();
        if self.periodic {
            (0..n).map(|i| self.lo + len * i as f64 / n as f64).collect()
        } else {
            (0..n)
                .map(|i| self.lo + len * i as f64 / (n - 1) as f64)
                .collect()
        }
    }

    /// Map x into [lo, hi) for periodic domains; clamp otherwise.
    pub fn wrap(&self, x: f64) -> f64 {
        if self.periodic {
            let len = self.length();
            let mut y = (x - self.lo).rem_euclid(len) + self.lo;
            if y >= self.hi {
                y -= len;
            }
            y
        } else {
            x.clamp(self.lo, self.hi)
        }
    }

    /// Distance between parameters, along the circle if periodic.
    pub fn distance(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        if self.periodic {
            let len = self.length();
            let d = d.rem_euclid(len);
            d.min(len - d)
        } else {
            d
        }
    }
}

/// Discrete-outcome statistical model x ↦ (p(0|x), ..., p(K-1|x)).
#[derive(Clone)]
pub struct OutcomeModel {
    prob: Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>,
    n_outcomes: usize,
    domain: Domain,
}

impl std::fmt::Debug for OutcomeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OutcomeModel")
            .field("n_outcomes", &self.n_outcomes)
            .field("domain", &self.domain)
            .finish()
    }
}

impl OutcomeModel {
    /// Wraps a probability function after spot-checking normalization on a
    /// few sample points.
    pub fn new(
        prob: Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>,
        n_outcomes: usize,
        domain: Domain,
    ) -> Result<Self> {
        if n_outcomes == 0 {
            return Err(Error::InvalidArgument("model needs at least one outcome".into()));
        }
        for i in 0..5 {
            let x = domain.lo + domain.length() * (0.09 + 0.2 * i as f64);
            let mut total = 0.0;
            for k in 0..n_outcomes {
                let p = prob(x, k);
                if p < -1e-12 {
                    return Err(Error::InvalidProbability(p));
                }
                total += p;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidProbability(total));
            }
        }
        Ok(OutcomeModel {
            prob,
            n_outcomes,
            domain,
        })
    }

    /// Born-rule model p(k|x) = tr[M_k ρ(x)].
    pub fn from_povm(
        povm: Vec<CMatrix>,
        family: Arc<dyn Fn(f64) -> DensityOperator + Send + Sync>,
        domain: Domain,
    ) -> Result<Self> {
        let n = povm.len();
        let povm = Arc::new(povm);
        let prob = Arc::new(move |x: f64, k: usize| {
            let rho = family(x);
            povm[k]
                .matmul(rho.mat())
                .map(|m| m.trace().re)
                .unwrap_or(f64::NAN)
        });
        OutcomeModel::new(prob, n, domain)
    }

    pub fn prob(&self, x: f64, k: usize) -> f64 {
        let x = if self.domain.periodic { self.domain.wrap(x) } else { x };
        (self.prob)(x, k)
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
}

/// Classical Fisher information at x by central differences.
pub fn fisher(model: &OutcomeModel, x: f64) -> f64 {
    let h = 1e-5;
    let mut total = 0.0;
    for k in 0..model.n_outcomes() {
        let p = model.prob(x, k);
        if p < 1e-12 {
            continue;
        }
        let dp = (model.prob(x + h, k) - model.prob(x - h, k)) / (2.0 * h);
        total += dp * dp / p;
    }
    total
}

/// Cramér-Rao precision bound 1/sqrt(n F). Zero information gives +inf.
pub fn cramer_rao(model: &OutcomeModel, x: f64, n: usize) -> f64 {
    let f = fisher(model, x);
    if f <= 0.0 || n == 0 {
        return f64::INFINITY;
    }
    1.0 / (n as f64 * f).sqrt()
}

fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Maximum-likelihood parameter for outcome k: grid scan over 2001 points
/// then golden-section refinement. Ties break toward the smallest grid x.
pub fn mle(model: &OutcomeModel, k: usize) -> Result<f64> {
    if k >= model.n_outcomes() {
        return Err(Error::InvalidArgument(format!("outcome {} out of range", k)));
    }
    let dom = model.domain();
    let grid = dom.grid(GRID_POINTS);
    let eval = |x: f64| model.prob(x, k);
    let mut best_i = 0usize;
    let mut best_p = eval(grid[0]);
    for (i, &x) in grid.iter().enumerate().skip(1) {
        let p = eval(x);
        if p > best_p {
            best_p = p;
            best_i = i;
        }
    }
    let step = dom.length() / if dom.periodic { GRID_POINTS as f64 } else { (GRID_POINTS - 1) as f64 };
    let (a, b) = if dom.periodic {
        (grid[best_i] - step, grid[best_i] + step)
    } else {
        ((grid[best_i] - step).max(dom.lo), (grid[best_i] + step).min(dom.hi))
    };
    let refined = golden_max(&eval, a, b, REFINE_TOL);
    if eval(refined) > best_p {
        Ok(dom.wrap(refined))
    } else {
        Ok(grid[best_i])
    }
}

fn llr_value(p: f64, p_ref: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    if p_ref <= 0.0 {
        return 0.0;
    }
    (-2.0 * (p / p_ref).log2()).max(0.0)
}

/// Log-likelihood ratio λ_k(x) = -2 log2 [p(k|x) / p(k|x_ML)].
pub fn llr(model: &OutcomeModel, k: usize, x: f64) -> Result<f64> {
    let x_ml = mle(model, k)?;
    Ok(llr_value(model.prob(x, k), model.prob(x_ml, k)))
}

fn ml_references(model: &OutcomeModel) -> Result<Vec<f64>> {
    (0..model.n_outcomes())
        .map(|k| {
            let x_ml = mle(model, k)?;
            Ok(model.prob(x_ml, k))
        })
        .collect()
}

/// Probability mass of outcomes whose ratio statistic strictly exceeds lam:
/// f(lam|x) = Σ_{k: λ_k(x) > lam} p(k|x).
pub fn tail_coverage(model: &OutcomeModel, lam: f64, x: f64) -> Result<f64> {
    let refs = ml_references(model)?;
    let mut mass = 0.0;
    for (k, &r) in refs.iter().enumerate() {
        let p = model.prob(x, k);
        if llr_value(p, r) > lam {
            mass += p;
        }
    }
    Ok(mass)
}

/// Smallest attained statistic value v with max_x f(v|x) ≤ 1 - alpha.
pub fn conf_threshold(model: &OutcomeModel, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || alpha <= 0.0 {
        return Err(Error::InvalidProbability(alpha));
    }
    let refs = ml_references(model)?;
    let dom = model.domain();
    let grid = dom.grid(GRID_POINTS);
    // Precompute (λ_k(x), p_k(x)) per grid point; the tail function over the
    // whole domain is then a cheap scan per candidate threshold.
    let mut table: Vec<Vec<(f64, f64)>> = Vec::with_capacity(grid.len());
    let mut attained: Vec<f64> = vec![0.0];
    for &x in &grid {
        let mut row = Vec::with_capacity(model.n_outcomes());
        for (k, &r) in refs.iter().enumerate() {
            let p = model.prob(x, k);
            let lam = llr_value(p, r);
            if lam.is_finite() {
                attained.push(lam);
            }
            row.push((lam, p));
        }
        table.push(row);
    }
    attained.sort_by(|a, b| a.partial_cmp(b).unwrap());
    attained.dedup();
    let worst_tail = |v: f64| -> f64 {
        table
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|(lam, _)| *lam > v)
                    .map(|(_, p)| *p)
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    };
    let budget = 1.0 - alpha;
    // worst_tail is nonincreasing in v and hits 0 at the largest attained
    // value, so the bisection always terminates on a valid threshold.
    let (mut lo, mut hi) = (0usize, attained.len() - 1);
    if worst_tail(attained[lo]) <= budget {
        return Ok(attained[lo]);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if worst_tail(attained[mid]) <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(attained[hi])
}

/// Confidence interval: center (the MLE) plus half-width.
#[derive(Debug, Clone, Copy)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
    pub alpha: f64,
}

/// Likelihood-ratio confidence region for outcome k at confidence alpha.
/// Errs with MultiInterval when {x : λ_k(x) < threshold} is disconnected.
pub fn conf_region(model: &OutcomeModel, k: usize, alpha: f64) -> Result<ConfidenceInterval> {
    let threshold = conf_threshold(model, alpha)?;
    conf_region_given(model, k, alpha, threshold)
}

/// Same as conf_region but with a precomputed threshold, so that repeated
/// sampling over outcomes does not redo the global tail calibration.
pub fn conf_region_given(
    model: &OutcomeModel,
    k: usize,
    alpha: f64,
    threshold: f64,
) -> Result<ConfidenceInterval> {
    let x_ml = mle(model, k)?;
    let p_ref = model.prob(x_ml, k);
    let dom = model.domain();
    let grid = dom.grid(GRID_POINTS);
    let lam_at = |x: f64| llr_value(model.prob(x, k), p_ref);
    let inside: Vec<bool> = grid.iter().map(|&x| lam_at(x) < threshold).collect();
    let n_in = inside.iter().filter(|&&b| b).count();
    if n_in == grid.len() {
        return Ok(ConfidenceInterval {
            center: x_ml,
            half_width: if dom.periodic { std::f64::consts::PI } else { dom.length() / 2.0 },
            alpha,
        });
    }
    if n_in == 0 {
        return Ok(ConfidenceInterval {
            center: x_ml,
            half_width: 0.0,
            alpha,
        });
    }
    // Count cyclic (or linear) runs of inside points.
    let n = grid.len();
    let mut entries = Vec::new();
    for i in 0..n {
        let prev = if i == 0 {
            if dom.periodic {
                inside[n - 1]
            } else {
                false
            }
        } else {
            inside[i - 1]
        };
        if inside[i] && !prev {
            entries.push(i);
        }
    }
    if entries.len() > 1 {
        return Err(Error::MultiInterval);
    }
    let start = entries[0];
    let mut end = start;
    while {
        let next = if end + 1 == n { 0 } else { end + 1 };
        (next != start) && inside[next] && (dom.periodic || end + 1 < n)
    } {
        end = if end + 1 == n { 0 } else { end + 1 };
    }
    let step = dom.length() / if dom.periodic { n as f64 } else { (n - 1) as f64 };
    // Bisect each edge between the last outside and first inside grid point.
    let edge = |mut out_x: f64, mut in_x: f64| -> f64 {
        for _ in 0..60 {
            if (out_x - in_x).abs() < REFINE_TOL {
                break;
            }
            let mid = 0.5 * (out_x + in_x);
            if lam_at(dom.wrap(mid)) < threshold {
                in_x = mid;
            } else {
                out_x = mid;
            }
        }
        in_x
    };
    let start_x = grid[start];
    // Unwrapped coordinates keep left < right across the periodic seam.
    let run_len = if end >= start { end - start } else { end + n - start };
    let end_x = start_x + run_len as f64 * step;
    let left = if !dom.periodic && start == 0 {
        start_x
    } else {
        edge(start_x - step, start_x)
    };
    let right = if !dom.periodic && end == n - 1 {
        end_x
    } else {
        edge(end_x + step, end_x)
    };
    let half_width = ((right - left) / 2.0).min(if dom.periodic {
        std::f64::consts::PI
    } else {
        dom.length() / 2.0
    });
    Ok(ConfidenceInterval {
        center: x_ml,
        half_width,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Two-outcome phase model p(0|φ) = (1 + s cos(φ̂ - φ))/2.
    fn phase_model(s: f64, phi_meas: f64) -> OutcomeModel {
        OutcomeModel::new(
            Arc::new(move |x: f64, k: usize| {
                let c = s * (phi_meas - x).cos();
                if k == 0 {
                    0.5 * (1.0 + c)
                } else {
                    0.5 * (1.0 - c)
                }
            }),
            2,
            Domain::phase(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_unnormalized_model() {
        let bad = OutcomeModel::new(
            Arc::new(|_x, _k| 0.4),
            2,
            Domain::phase(),
        );
        assert!(matches!(bad, Err(Error::InvalidProbability(_))));
    }

    #[test]
    fn fisher_matches_closed_form() {
        for (s, delta) in [(0.9, 0.7), (0.5, 1.9), (0.99, 0.3)] {
            let model = phase_model(s, 0.0);
            let x = -delta;
            let f = fisher(&model, x);
            let expect = s * s * delta.sin().powi(2) / (1.0 - s * s * delta.cos().powi(2));
            assert!(
                (f - expect).abs() < 1e-5 * expect.max(1.0),
                "s={} d={} got {} want {}",
                s,
                delta,
                f,
                expect
            );
        }
    }

    #[test]
    fn fisher_vanishes_for_uninformative_model() {
        let model = phase_model(0.0, 0.0);
        assert!(fisher(&model, 1.0).abs() < 1e-12);
        assert!(cramer_rao(&model, 1.0, 10).is_infinite());
    }

    #[test]
    fn cramer_rao_examples() {
        // F = s^2 at delta = pi/2, so s = r^2 with m = r gives 1/r^2 at n = 1.
        let r: f64 = 0.8;
        let model = phase_model(r * r, PI / 2.0);
        let cr = cramer_rao(&model, 0.0, 1);
        assert!((cr - 1.0 / (r * r)).abs() < 1e-4);
        // Linear model with slope 1/4 per outcome at p = 1/2: F = 1/4, n = 4.
        let lin = OutcomeModel::new(
            Arc::new(|x: f64, k: usize| {
                if k == 0 {
                    0.5 * (1.0 + 0.5 * (x - 0.5))
                } else {
                    0.5 * (1.0 - 0.5 * (x - 0.5))
                }
            }),
            2,
            Domain::interval(0.0, 1.0),
        )
        .unwrap();
        assert!((cramer_rao(&lin, 0.5, 4) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mle_finds_peak_phase() {
        let model = phase_model(0.8, 0.0);
        // Outcome 0 is most likely at φ = φ̂ = 0.
        let x0 = mle(&model, 0).unwrap();
        assert!(model.domain().distance(x0, 0.0) < 1e-7);
        // Outcome 1 peaks on the far side of the circle.
        let x1 = mle(&model, 1).unwrap();
        assert!(model.domain().distance(x1, PI) < 1e-7);
    }

    #[test]
    fn mle_constant_likelihood_returns_leftmost_point() {
        let model = phase_model(0.0, 0.0);
        assert_eq!(mle(&model, 0).unwrap(), 0.0);
    }

    #[test]
    fn llr_matches_closed_form() {
        let s = 0.75;
        let model = phase_model(s, 0.4);
        for i in 0..9 {
            let x = 0.7 * i as f64;
            for k in 0..2 {
                let sign = if k == 0 { 1.0 } else { -1.0 };
                let expect =
                    -2.0 * ((1.0 + sign * s * (0.4 - x).cos()) / (1.0 + s)).log2();
                let got = llr(&model, k, x).unwrap();
                assert!((got - expect).abs() < 1e-6, "x={} k={}", x, k);
            }
        }
    }

    #[test]
    fn llr_infinite_outside_support() {
        let model = phase_model(1.0, 0.0);
        // p(1|0) = 0 exactly.
        assert!(llr(&model, 1, 0.0).unwrap().is_infinite());
    }

    #[test]
    fn tail_coverage_limits() {
        let model = phase_model(0.75, 0.0);
        let x = 0.9;
        assert_eq!(tail_coverage(&model, f64::INFINITY, x).unwrap(), 0.0);
        // Strict comparison at lam = 0 drops only the outcomes at their ML
        // point; at generic x every λ_k > 0 so the whole mass survives.
        assert!((tail_coverage(&model, 0.0, x).unwrap() - 1.0).abs() < 1e-12);
        // At x = 0 outcome 0 sits exactly at its ML reference.
        let p1 = model.prob(0.0, 1);
        assert!((tail_coverage(&model, 0.0, 0.0).unwrap() - p1).abs() < 1e-9);
        // Any negative lam catches everything.
        assert!((tail_coverage(&model, -1e-9, x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_smallest_attained_value_with_enough_coverage() {
        let model = phase_model(0.85, 0.0);
        for alpha in [0.01, ALPHA_ONE_SIGMA, 0.99] {
            let thr = conf_threshold(&model, alpha).unwrap();
            // Defining property on the calibration grid itself.
            let worst = model
                .domain()
                .grid(GRID_POINTS)
                .into_iter()
                .map(|x| tail_coverage(&model, thr, x).unwrap())
                .fold(0.0, f64::max);
            assert!(worst <= 1.0 - alpha + 1e-12, "alpha={}", alpha);
            // Shrinking below the previous attained value must break coverage
            // somewhere, otherwise thr was not minimal.
            let shrunk = thr - 1e-6;
            if shrunk > 0.0 {
                let worst_shrunk = model
                    .domain()
                    .grid(GRID_POINTS)
                    .into_iter()
                    .map(|x| tail_coverage(&model, shrunk, x).unwrap())
                    .fold(0.0, f64::max);
                assert!(worst_shrunk > 1.0 - alpha, "alpha={}", alpha);
            }
        }
    }

    #[test]
    fn threshold_approaches_largest_attained_value_as_alpha_to_one() {
        let s = 0.8_f64;
        let model = phase_model(s, 0.0);
        let thr = conf_threshold(&model, 0.9999).unwrap();
        // Largest finite statistic is at the antipode: -2 log2[(1-s)/(1+s)].
        let top = -2.0 * ((1.0 - s) / (1.0 + s)).log2();
        assert!((thr - top).abs() < 1e-6);
    }

    #[test]
    fn region_matches_arccos_closed_form() {
        let alpha = ALPHA_ONE_SIGMA;
        for s in [0.9, 0.75, 0.99] {
            let model = phase_model(s, 0.0);
            let ci = conf_region(&model, 0, alpha).unwrap();
            let expect = ((1.0 - 2.0 * alpha) / s).acos();
            let tol = 2.0 * PI / GRID_POINTS as f64 + 1e-6;
            assert!(
                (ci.half_width - expect).abs() < tol,
                "s={} got {} want {}",
                s,
                ci.half_width,
                expect
            );
            assert!(model.domain().distance(ci.center, 0.0) < 1e-7);
        }
    }

    #[test]
    fn region_clamps_to_full_circle_for_weak_signal() {
        // s below 2α-1 keeps every phase inside the region.
        let alpha = ALPHA_ONE_SIGMA;
        let model = phase_model(0.2, 0.0);
        let ci = conf_region(&model, 0, alpha).unwrap();
        assert_eq!(ci.half_width, PI);
    }

    #[test]
    fn disconnected_region_is_an_error() {
        // Two likelihood peaks at x = 0 and x = π give two islands.
        let model = OutcomeModel::new(
            Arc::new(|x: f64, k: usize| {
                let c = 0.9 * (2.0 * x).cos();
                if k == 0 {
                    0.5 * (1.0 + c)
                } else {
                    0.5 * (1.0 - c)
                }
            }),
            2,
            Domain::phase(),
        )
        .unwrap();
        assert!(matches!(
            conf_region(&model, 0, ALPHA_ONE_SIGMA),
            Err(Error::MultiInterval)
        ));
    }

    #[test]
    fn coverage_smoke_test() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let alpha = ALPHA_ONE_SIGMA;
        let model = phase_model(0.81, 0.0);
        let thr = conf_threshold(&model, alpha).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut covered = 0usize;
        let mut total = 0usize;
        for i in 0..10 {
            let x_true = 0.61 * i as f64;
            let p0 = model.prob(x_true, 0);
            for _ in 0..400 {
                let k = if rng.gen::<f64>() < p0 { 0 } else { 1 };
                let ci = conf_region_given(&model, k, alpha, thr).unwrap();
                if model.domain().distance(ci.center, x_true) <= ci.half_width + 1e-9 {
                    covered += 1;
                }
                total += 1;
            }
        }
        let rate = covered as f64 / total as f64;
        assert!(rate >= alpha - 0.05, "coverage {}", rate);
    }
}
