//! Scalar root finding, binary entropy, and a small derivative-free box
//! minimizer (dense grid scan followed by compass search).

use crate::{Error, Result};

/// Solves f(x) = target for monotone f on [lo, hi] by bisection.
///
/// The direction of monotonicity is read off the endpoint values. Stops when
/// |f(mid) - target| <= tol or the bracket width falls below tol.
pub fn bisect_monotone<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    target: f64,
    tol: f64,
) -> Result<f64> {
    if !lo.is_finite() || !hi.is_finite() || lo >= hi || !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "bisect_monotone needs finite lo < hi and tol > 0".into(),
        ));
    }
    let flo = f(lo);
    let fhi = f(hi);
    if !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::SolverFailure("non-finite endpoint value".into()));
    }
    let (fmin, fmax) = if flo <= fhi { (flo, fhi) } else { (fhi, flo) };
    if target < fmin - tol || target > fmax + tol {
        return Err(Error::TargetOutOfRange);
    }
    let increasing = fhi >= flo;
    let (mut a, mut b) = (lo, hi);
    let mut mid = 0.5 * (a + b);
    for _ in 0..200 {
        mid = 0.5 * (a + b);
        let fm = f(mid);
        if !fm.is_finite() {
            return Err(Error::SolverFailure("non-finite value in bracket".into()));
        }
        if (fm - target).abs() <= tol || (b - a) <= tol {
            return Ok(mid);
        }
        if (fm < target) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(mid)
}

/// Binary entropy h(p) = -p log2 p - (1-p) log2 (1-p).
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Preimage in [0, 1/2].
    Lower,
    /// Preimage in [1/2, 1].
    Upper,
}

/// Inverse of the binary entropy on the chosen monotone branch.
///
/// y = 0 and y = 1 map to exact endpoints (no bisection residue), which
/// matters when callers need p = 1 exactly.
pub fn inv_binary_entropy(y: f64, branch: Branch) -> Result<f64> {
    if !y.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&y) {
        return Err(Error::InvalidProbability(y));
    }
    if y <= 0.0 {
        return Ok(match branch {
            Branch::Lower => 0.0,
            Branch::Upper => 1.0,
        });
    }
    if y >= 1.0 {
        return Ok(0.5);
    }
    let (mut a, mut b) = match branch {
        Branch::Lower => (0.0, 0.5),
        Branch::Upper => (0.5, 1.0),
    };
    // h is increasing on [0, 1/2] and decreasing on [1/2, 1].
    let increasing = matches!(branch, Branch::Lower);
    for _ in 0..120 {
        let mid = 0.5 * (a + b);
        let hm = binary_entropy(mid)?;
        if (b - a) <= 1e-15 {
            return Ok(mid);
        }
        if (hm < y) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Minimizes f over an axis-aligned box in up to 3 dimensions.
///
/// Phase 1 scans a uniform grid with grid_n points per axis (first strict
/// minimum wins, so ties resolve to the lexicographically smallest point).
/// Phase 2 runs compass search from the grid winner: probe +/- step on each
/// axis (clamped to the box), move to the best strict improvement, halve all
/// steps when none improves, stop when every step is below tol.
///
/// Returns the minimizer and its value. Non-finite objective values anywhere
/// are an error.
pub fn minimize_box<F: Fn(&[f64]) -> f64>(
    f: F,
    bounds: &[(f64, f64)],
    grid_n: usize,
    tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let k = bounds.len();
    if k == 0 || k > 3 {
        return Err(Error::InvalidArgument(format!(
            "minimize_box supports 1 to 3 dimensions, got {}",
            k
        )));
    }
    if grid_n < 11 {
        return Err(Error::InvalidArgument("grid_n must be at least 11".into()));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    for &(lo, hi) in bounds {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidArgument("invalid bounds".into()));
        }
    }

    let eval = |x: &[f64]| -> Result<f64> {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::SolverFailure(format!(
                "objective not finite at {:?}",
                x
            )));
        }
        Ok(v)
    };

    let axis_point = |axis: usize, j: usize| -> f64 {
        let (lo, hi) = bounds[axis];
        if grid_n == 1 {
            return lo;
        }
        lo + (hi - lo) * (j as f64) / ((grid_n - 1) as f64)
    };

    let mut best_x = vec![0.0f64; k];
    let mut best_v = f64::INFINITY;
    let total = grid_n.pow(k as u32);
    let mut x = vec![0.0f64; k];
    for flat in 0..total {
        let mut rem = flat;
        for axis in (0..k).rev() {
            x[axis] = axis_point(axis, rem % grid_n);
            rem /= grid_n;
        }
        let v = eval(&x)?;
        if v < best_v {
            best_v = v;
            best_x.copy_from_slice(&x);
        }
    }

    let mut steps: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| (hi - lo) / ((grid_n - 1) as f64))
        .collect();
    let mut iters = 0usize;
    while steps.iter().any(|&s| s >= tol) && iters < 100_000 {
        iters += 1;
        let mut cand_x = best_x.clone();
        let mut cand_v = best_v;
        let mut improved = false;
        for axis in 0..k {
            if steps[axis] == 0.0 {
                continue;
            }
            for dir in [-1.0, 1.0] {
                let mut probe = best_x.clone();
                probe[axis] =
                    (probe[axis] + dir * steps[axis]).clamp(bounds[axis].0, bounds[axis].1);
                if probe[axis] == best_x[axis] {
                    continue;
                }
                let v = eval(&probe)?;
                if v < cand_v {
                    cand_v = v;
                    cand_x = probe;
                    improved = true;
                }
            }
        }
        if improved {
            best_x = cand_x;
            best_v = cand_v;
        } else {
            for s in &mut steps {
                *s *= 0.5;
            }
        }
    }
    Ok((best_x, best_v))
}
