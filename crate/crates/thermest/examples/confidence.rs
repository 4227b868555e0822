//! From one measurement click to a phase estimate with a guarantee:
//! likelihood ratios, calibrated thresholds, confidence regions, and a
//! Monte Carlo check that the guarantee holds.
//!
//!     cargo run --example confidence

use thermest::estimation::{
    conf_region, conf_threshold, cramer_rao, fisher, llr, mle,
};
use thermest::phasequbit::{coverage_estimate, delta_phi, outcome_model, ProbeParams};
use thermest::ALPHA_ONE_SIGMA;

fn main() -> thermest::Result<()> {
    let alpha = ALPHA_ONE_SIGMA;
    let p = ProbeParams::new(0.9, std::f64::consts::FRAC_PI_2, 0.0, 0.9, 0.0, 0.0, alpha)?;
    let model = outcome_model(&p)?;

    // Point estimates: each outcome votes for the phase that makes it
    // most likely.
    for k in 0..2 {
        println!("outcome {}: maximum-likelihood phase = {:.6}", k, mle(&model, k)?);
    }

    // The asymptotic benchmark at a generic phase.
    let x = 1.0;
    println!("\nFisher information at phi = {}: {:.6}", x, fisher(&model, x));
    println!("Cramer-Rao bound, one shot:   {:.6}", cramer_rao(&model, x, 1));
    println!("Cramer-Rao bound, 100 shots:  {:.6}", cramer_rao(&model, x, 100));

    // Single-shot guarantees instead: the ratio statistic, its calibrated
    // threshold, and the region it cuts out.
    println!("\nratio statistic for outcome 0 along the circle:");
    for i in 0..5 {
        let phi = 0.6 * i as f64;
        println!("  lambda_0({:.1}) = {:.6}", phi, llr(&model, 0, phi)?);
    }
    let thr = conf_threshold(&model, alpha)?;
    println!("threshold at alpha = {:.4}: {:.6}", alpha, thr);
    let ci = conf_region(&model, 0, alpha)?;
    println!(
        "confidence region: {:.6} +/- {:.6}",
        ci.center, ci.half_width
    );
    println!(
        "closed-form half-width:       {:.6}",
        delta_phi(&p)
    );

    // The construction is honest: simulated coverage meets the target.
    let rate = coverage_estimate(&p, 25, 800, 7)?;
    println!(
        "\nMonte Carlo coverage over 25 phases x 800 draws: {:.4} (target {:.4})",
        rate, alpha
    );
    Ok(())
}
