//! Single-shot work of arbitrary channels, three ways: the output-support
//! norm, the conditional max-entropy of the channel's dilation, and the
//! Gibbs-weighted norm once energies enter.
//!
//!     cargo run --example channel_work

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thermest::channel::{
    dilation_state, free_energy_triple, work_ms, work_ss_cond_hmax, work_ss_deg, work_ss_general,
    HamiltonianSpec,
};
use thermest::entropy::cond_h_max;
use thermest::sample::{random_channel, random_full_rank_density};

fn main() -> thermest::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // A random qutrit-to-qubit channel on a full-rank input. The operator
    // norm route and the dilation route price the same work.
    let chan = random_channel(3, 2, 3, &mut rng);
    let rho = random_full_rank_density(3, &mut rng);
    let direct = work_ss_deg(&chan, &rho)?;
    let via_dilation = work_ss_cond_hmax(&chan, &rho)?;
    println!("random 3 -> 2 channel, degenerate energies:");
    println!("  log-norm route        w = {:.12}", direct);
    println!("  dilation H_max route  w = {:.12}", via_dilation);

    // The dilation itself: purify, attach the environment, condition on
    // everything that is not the output.
    let psi = dilation_state(&chan, &rho)?;
    println!(
        "  dilation dims = {:?} (output, reference, environment)",
        psi.dims()
    );
    let joint = psi.to_density();
    let out_env = joint.partial_trace(&[0, 2])?;
    println!(
        "  H_max(env | output) of the marginal = {:.12}",
        cond_h_max(&out_env, 1)?
    );

    // Expected work only needs the endpoint free energies.
    let out = chan.apply_density(&rho)?;
    let h3 = HamiltonianSpec::degenerate(3);
    let h2 = HamiltonianSpec::degenerate(2);
    println!("  expected work          = {:.12}", work_ms(&rho, &out, &h3, &h2)?);

    // With a gapped target the same channel is priced by Gibbs-weighted
    // norms, and the free-energy trio brackets the expected cost.
    let h2_gapped = HamiltonianSpec::new(vec![0.0, 1.5])?;
    let w_gapped = work_ss_general(&chan, &rho, &h3, &h2_gapped)?;
    println!("\nsame channel into a 1.5-bit gapped qubit:");
    println!("  single-shot w = {:.12}", w_gapped);
    let (a, a_min, a_max) = free_energy_triple(&out, &h2_gapped)?;
    println!("  output free energies: A_min = {:.6} <= A = {:.6} <= A_max = {:.6}", a_min, a, a_max);
    Ok(())
}
