//! Seeded random states, unitaries and channels. Used by property tests and
//! the CLI selftest; every function takes the generator explicitly so runs
//! are reproducible.

use crate::channel::KrausChannel;
use crate::qmat::{CMatrix, DensityOperator, PureState, C64};
use rand::Rng;
use rand_distr::StandardNormal;

fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix via modified Gram-Schmidt
/// with the R diagonal phase fixed to be real positive.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    loop {
        let g = ginibre(d, d, rng);
        let mut cols: Vec<Vec<C64>> = (0..d)
            .map(|j| (0..d).map(|i| g[(i, j)]).collect())
            .collect();
        let mut ok = true;
        for j in 0..d {
            let (done, rest) = cols.split_at_mut(j);
            let col = &mut rest[0];
            for prev in done.iter() {
                let overlap: C64 = prev.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                for (v, &p) in col.iter_mut().zip(prev.iter()) {
                    *v -= overlap * p;
                }
            }
            let norm: f64 = col.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for v in col.iter_mut() {
                *v /= norm;
            }
        }
        if ok {
            return CMatrix::from_fn(d, d, |i, j| cols[j][i]);
        }
    }
}

pub fn random_pure(d: usize, rng: &mut impl Rng) -> PureState {
    let g = ginibre(d, 1, rng);
    PureState::renormalized((0..d).map(|i| g[(i, 0)]).collect(), vec![d])
}

/// GG†/tr(GG†) with a square Ginibre G: full-rank almost surely but possibly
/// with tiny eigenvalues.
pub fn random_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let g = ginibre(d, d, rng);
    let gg = g.matmul(&g.dagger()).unwrap();
    let tr = gg.trace().re;
    DensityOperator::new(gg.scale_re(1.0 / tr), vec![d]).unwrap()
}

/// Random density mixed with I/d so the smallest eigenvalue is bounded away
/// from the support tolerance.
pub fn random_full_rank_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let rho = random_density(d, rng);
    let mixed = rho
        .mat()
        .scale_re(0.95)
        .add(&CMatrix::identity(d).scale_re(0.05 / d as f64))
        .unwrap();
    DensityOperator::new(mixed, vec![d]).unwrap()
}

pub fn random_diag_density(d: usize, rng: &mut impl Rng) -> DensityOperator {
    let raw: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let sum: f64 = raw.iter().sum();
    let probs: Vec<f64> = raw.iter().map(|v| v / sum).collect();
    DensityOperator::from_diag(&probs, vec![d]).unwrap()
}

/// Channel whose Kraus operators are the blocks of a Haar-random isometry
/// from dim_in into dim_out ⊗ (n_kraus-dimensional environment).
pub fn random_channel(
    dim_in: usize,
    dim_out: usize,
    n_kraus: usize,
    rng: &mut impl Rng,
) -> KrausChannel {
    let total = dim_out * n_kraus;
    assert!(total >= dim_in, "isometry needs dim_out*n_kraus >= dim_in");
    let u = haar_unitary(total, rng);
    let kraus: Vec<CMatrix> = (0..n_kraus)
        .map(|k| CMatrix::from_fn(dim_out, dim_in, |i, j| u[(i * n_kraus + k, j)]))
        .collect();
    KrausChannel::new(kraus).expect("isometry blocks are trace preserving")
}

/// Random system-memory interaction unitary for protocol fuzzing.
pub fn random_correlating_unitary(dim_s: usize, dim_m: usize, rng: &mut impl Rng) -> CMatrix {
    haar_unitary(dim_s * dim_m, rng)
}
