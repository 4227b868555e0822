//! Shannon, von Neumann, min-, max-, and conditional min/max entropies.
//! Everything is in bits (log base 2).

use crate::qmat::{
    eig_hermitian, kron, partial_trace_mat, spectral_norm, support_projector, CMatrix,
    DensityOperator, C64, SUPPORT_TOL, TRACE_TOL,
};
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// H({p}) = -Σ p log2 p with 0 log 0 = 0.
pub fn shannon(probs: &[f64]) -> Result<f64> {
    if probs.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
        return Err(Error::InvalidProbability(
            *probs
                .iter()
                .find(|&&p| p < -1e-12 || !p.is_finite())
                .unwrap(),
        ));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidProbability(sum));
    }
    Ok(probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum())
}

/// Shannon entropy of the eigenvalue spectrum.
pub fn von_neumann(rho: &DensityOperator) -> f64 {
    rho.eigenvalues()
        .iter()
        .map(|&v| v.max(0.0))
        .filter(|&v| v > 0.0)
        .map(|v| -v * v.log2())
        .sum()
}

/// -log2 of the largest eigenvalue.
pub fn h_min(rho: &DensityOperator) -> f64 {
    let top = rho.eigenvalues().first().copied().unwrap_or(0.0);
    -top.log2()
}

/// log2 of the rank (support tolerance shared with qmat).
pub fn h_max(rho: &DensityOperator) -> f64 {
    (rho.rank() as f64).log2()
}

fn bipartite_parts(rho: &DensityOperator, x: usize) -> Result<(usize, usize)> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidSubsystem(format!(
            "conditional entropies need a bipartite state, got {} subsystems",
            rho.dims().len()
        )));
    }
    if x > 1 {
        return Err(Error::InvalidSubsystem(format!(
            "subject subsystem {} out of range",
            x
        )));
    }
    Ok((x, 1 - x))
}

/// Rényi-zero conditional max-entropy H_max(X|Y) = log2 ‖tr_X Π_ρ‖∞,
/// where x indexes the subject subsystem X and the other one is Y.
pub fn cond_h_max(rho: &DensityOperator, x: usize) -> Result<f64> {
    let (x, y) = bipartite_parts(rho, x)?;
    let proj = support_projector(rho.mat(), SUPPORT_TOL)?;
    let reduced = partial_trace_mat(&proj, rho.dims(), &[y])?;
    let _ = x;
    Ok(spectral_norm(&reduced)?.log2())
}

/// Conditional min-entropy H_min(X|Y) = -log2 min { tr σ : 1_X ⊗ σ_Y ⪰ ρ }.
///
/// The minimization runs over Hermitian PSD σ parameterized by a Cholesky
/// factor, with the PSD constraint enforced through a repair penalty:
/// raising σ by δ·I restores feasibility at trace cost δ·dim(Y), so the
/// objective tr σ + max(0, -λ_min(1⊗σ-ρ))·dim(Y) upper-bounds the true
/// optimum and agrees with it at feasible points. Deterministic multi-start
/// Nelder-Mead plus a pattern-search polish; at least two starts must agree
/// before the result is trusted.
pub fn cond_h_min(rho: &DensityOperator, x: usize) -> Result<f64> {
    let (x, y) = bipartite_parts(rho, x)?;
    let dy = rho.dims()[y];
    let dx = rho.dims()[x];
    let lift = |sigma: &CMatrix| -> CMatrix {
        if x == 0 {
            kron(&CMatrix::identity(dx), sigma)
        } else {
            kron(sigma, &CMatrix::identity(dx))
        }
    };

    let lambda_min = |m: &CMatrix| -> f64 {
        let (vals, _) = eig_hermitian(m).expect("Hermitian by construction");
        vals.last().copied().unwrap_or(0.0)
    };

    let objective = |params: &[f64]| -> f64 {
        let sigma = cholesky_to_matrix(params, dy);
        let gap = lift(&sigma).sub(rho.mat()).expect("dims agree");
        let deficit = (-lambda_min(&gap)).max(0.0);
        sigma.trace().re + deficit * dy as f64
    };

    let top = rho.eigenvalues().first().copied().unwrap_or(0.0);
    let marginal = rho.partial_trace(&[y])?;

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(matrix_to_cholesky(
        &CMatrix::identity(dy).scale_re(top.max(1e-6)),
        dy,
    ));
    let ridged = marginal
        .mat()
        .add(&CMatrix::identity(dy).scale_re(0.05 * top.max(1e-6)))
        .unwrap();
    starts.push(matrix_to_cholesky(&ridged, dy));
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    while starts.len() < 8 {
        let base = starts[starts.len() % 2].clone();
        let jittered: Vec<f64> = base
            .iter()
            .map(|&v| v * (1.0 + 0.3 * (rng.gen::<f64>() - 0.5)) + 0.05 * (rng.gen::<f64>() - 0.5))
            .collect();
        starts.push(jittered);
    }

    let mut results: Vec<(f64, Vec<f64>)> = Vec::new();
    for start in &starts {
        let coarse = nelder_mead(&objective, start, 0.1, 400 * start.len());
        let fine = nelder_mead(&objective, &coarse.1, 1e-4, 400 * start.len());
        let polished = pattern_polish(&objective, &fine.1, 1e-3, 1e-10);
        results.push(polished);
    }
    results.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let best = &results[0];
    let agreeing = results
        .iter()
        .filter(|r| (r.0 - best.0).abs() <= 1e-5 * best.0.abs().max(1.0))
        .count();
    if agreeing < 2 {
        return Err(Error::SolverFailure(format!(
            "conditional min-entropy starts disagree (best {:.9}, next {:.9})",
            best.0, results[1].0
        )));
    }

    // Repair any residual infeasibility exactly, then report the trace.
    let sigma = cholesky_to_matrix(&best.1, dy);
    let gap = lift(&sigma).sub(rho.mat())?;
    let deficit = (-lambda_min(&gap)).max(0.0);
    let feasible_trace = sigma.trace().re + deficit * dy as f64;
    Ok(-feasible_trace.log2())
}

/// Lower-triangular parameterization: dy real diagonal entries followed by
/// re/im pairs for the strictly-lower entries, row by row.
fn cholesky_to_matrix(params: &[f64], dy: usize) -> CMatrix {
    let mut l = CMatrix::zeros(dy, dy);
    let mut idx = 0;
    for i in 0..dy {
        l[(i, i)] = C64::new(params[idx], 0.0);
        idx += 1;
    }
    for i in 1..dy {
        for j in 0..i {
            l[(i, j)] = C64::new(params[idx], params[idx + 1]);
            idx += 2;
        }
    }
    l.matmul(&l.dagger()).expect("square")
}

fn matrix_to_cholesky(sigma: &CMatrix, dy: usize) -> Vec<f64> {
    let l = cholesky_lower(sigma);
    let mut params = Vec::with_capacity(dy * dy);
    for i in 0..dy {
        params.push(l[(i, i)].re);
    }
    for i in 1..dy {
        for j in 0..i {
            params.push(l[(i, j)].re);
            params.push(l[(i, j)].im);
        }
    }
    params
}

/// Cholesky of a Hermitian PD matrix, with a tiny ridge retry so that
/// barely-PSD starting points do not abort the solver.
fn cholesky_lower(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    let mut a = m.clone();
    for attempt in 0..3 {
        let mut l = CMatrix::zeros(n, n);
        let mut ok = true;
        'outer: for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                if i == j {
                    if s.re <= 0.0 {
                        ok = false;
                        break 'outer;
                    }
                    l[(i, i)] = C64::new(s.re.sqrt(), 0.0);
                } else {
                    l[(i, j)] = s / l[(j, j)];
                }
            }
        }
        if ok {
            return l;
        }
        let ridge = 1e-8 * 10f64.powi(attempt) * (a.trace().re.abs().max(1.0));
        a = a.add(&CMatrix::identity(n).scale_re(ridge)).unwrap();
    }
    CMatrix::identity(n)
}

/// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2) returning (best value, best point).
fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    scale: f64,
    max_iter: usize,
) -> (f64, Vec<f64>) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += scale * (p[i].abs() + 1.0);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let (best, worst, second_worst) = (order[0], order[n], order[n - 1]);
        if (values[worst] - values[best]).abs() <= 1e-13 * (values[best].abs() + 1e-13) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|d| {
                order[..n].iter().map(|&i| simplex[i][d]).sum::<f64>() / n as f64
            })
            .collect();
        let reflect: Vec<f64> = (0..n)
            .map(|d| centroid[d] + (centroid[d] - simplex[worst][d]))
            .collect();
        let fr = f(&reflect);
        if fr < values[best] {
            let expand: Vec<f64> = (0..n)
                .map(|d| centroid[d] + 2.0 * (centroid[d] - simplex[worst][d]))
                .collect();
            let fe = f(&expand);
            if fe < fr {
                simplex[worst] = expand;
                values[worst] = fe;
            } else {
                simplex[worst] = reflect;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflect;
            values[worst] = fr;
        } else {
            let contract: Vec<f64> = (0..n)
                .map(|d| centroid[d] + 0.5 * (simplex[worst][d] - centroid[d]))
                .collect();
            let fc = f(&contract);
            if fc < values[worst] {
                simplex[worst] = contract;
                values[worst] = fc;
            } else {
                let best_point = simplex[best].clone();
                for i in 0..=n {
                    if i == best {
                        continue;
                    }
                    for d in 0..n {
                        simplex[i][d] = best_point[d] + 0.5 * (simplex[i][d] - best_point[d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let mut best_idx = 0;
    for i in 1..=n {
        if values[i] < values[best_idx] {
            best_idx = i;
        }
    }
    (values[best_idx], simplex[best_idx].clone())
}

/// Coordinate pattern search with halving steps; cleans up the last digits
/// that Nelder-Mead leaves on non-smooth penalized objectives.
fn pattern_polish<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    step0: f64,
    tol: f64,
) -> (f64, Vec<f64>) {
    let mut x = start.to_vec();
    let mut v = f(&x);
    let mut step = step0;
    while step >= tol {
        let mut improved = false;
        for d in 0..x.len() {
            for dir in [1.0, -1.0] {
                let mut probe = x.clone();
                probe[d] += dir * step;
                let pv = f(&probe);
                if pv < v {
                    v = pv;
                    x = probe;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, x)
}
