//! Entropy zoo: Shannon, von Neumann, min/max, and the conditional
//! min/max entropies that price single-shot work.
//!
//!     cargo run --example entropies

use thermest::entropy::{cond_h_max, cond_h_min, h_max, h_min, shannon, von_neumann};
use thermest::qmat::PureState;
use thermest::{DensityOperator, C64};

fn main() -> thermest::Result<()> {
    // Classical distribution vs the quantum state carrying it.
    let p = [0.5, 0.25, 0.125, 0.125];
    println!("shannon {:?} = {:.6}", p, shannon(&p)?);
    let rho = DensityOperator::from_diag(&p, vec![4])?;
    println!("von Neumann of the same diagonal state = {:.6}", von_neumann(&rho));

    // A tilted qubit: all four entropies disagree once the state is mixed.
    let qubit = DensityOperator::from_bloch(0.8, 1.1, 0.3)?;
    println!("\nqubit with Bloch radius 0.8:");
    println!("  von Neumann = {:.6}", von_neumann(&qubit));
    println!("  min-entropy = {:.6}  (work value of erasure)", h_min(&qubit));
    println!("  max-entropy = {:.6}  (log of the support)", h_max(&qubit));

    // Maximal entanglement drives conditional entropies negative: the
    // quantum memory is worth more than the system it describes.
    let bell = PureState::new(
        vec![
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ],
        vec![2, 2],
    )?
    .to_density();
    println!("\nBell pair, conditioning on the second qubit:");
    println!("  H_max(A|B) = {:.6}", cond_h_max(&bell, 0)?);
    println!("  H_min(A|B) = {:.6}", cond_h_min(&bell, 0)?);

    // Product states have no side information: conditioning changes nothing.
    let product = qubit.tensor(&DensityOperator::maximally_mixed(2));
    println!("\nproduct state sanity check:");
    println!("  H_min(A|B) = {:.6}", cond_h_min(&product, 0)?);
    println!("  H_min(A)   = {:.6}", h_min(&qubit));
    Ok(())
}
