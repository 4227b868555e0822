//! Erasure costs: resetting a maximally mixed bit costs exactly one bit of
//! work, in both the single-shot and the repeated-run accounting.
//!
//!     cargo run --example landauer

use thermest::channel::{work_ms, work_ss_deg, work_ss_fixed_deg, HamiltonianSpec, KrausChannel};
use thermest::qmat::CMatrix;
use thermest::{DensityOperator, C64};

fn main() -> thermest::Result<()> {
    // Reset-to-zero as an explicit channel: A_0 = |0><0|, A_1 = |0><1|.
    let mut a0 = CMatrix::zeros(2, 2);
    a0[(0, 0)] = C64::new(1.0, 0.0);
    let mut a1 = CMatrix::zeros(2, 2);
    a1[(0, 1)] = C64::new(1.0, 0.0);
    let erase = KrausChannel::new(vec![a0, a1])?;

    let h = HamiltonianSpec::degenerate(2);
    let mixed = DensityOperator::maximally_mixed(2);
    let zero = DensityOperator::from_diag(&[1.0, 0.0], vec![2])?;

    let ss = work_ss_deg(&erase, &mixed)?;
    let ms = work_ms(&mixed, &erase.apply_density(&mixed)?, &h, &h)?;
    println!("erasing one fully mixed bit:");
    println!("  single-shot   w = {:.12}", ss);
    println!("  expected-work w = {:.12}", ms);

    // The fixed-output shortcut agrees without building the channel.
    let shortcut = work_ss_fixed_deg(&mixed, &zero);
    println!("  fixed-output  w = {:.12}", shortcut);

    // Partially known bits are cheaper on average but not in the worst case:
    // the single-shot price only sees the support, the expected price sees
    // the populations.
    println!("\nbias sweep (p = weight of |0>):");
    println!("{:>6} {:>14} {:>14}", "p", "single-shot", "expected");
    for p in [0.5, 0.7, 0.9, 0.99] {
        let biased = DensityOperator::from_diag(&[p, 1.0 - p], vec![2])?;
        let ss = work_ss_deg(&erase, &biased)?;
        let ms = work_ms(&biased, &zero, &h, &h)?;
        println!("{:>6.2} {:>14.6} {:>14.6}", p, ss, ms);
    }
    println!("(the single-shot column stays pinned at 1: a rare |1> still needs erasing)");
    Ok(())
}
