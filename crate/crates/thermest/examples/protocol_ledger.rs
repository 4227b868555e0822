//! The full estimation protocol as a work ledger: prepare a probe and a
//! biased memory from thermal states, correlate them, and reset. Expected
//! work balances to zero over the cycle; single-shot work does not.
//!
//!     cargo run --example protocol_ledger

use thermest::phasequbit::{c_meas, credit_ms, credit_ss, protocol_spec, ProbeParams};
use thermest::{Regime, ALPHA_ONE_SIGMA};

fn print_report(label: &str, report: &thermest::WorkReport) {
    println!("{} ({})", label, report.regime);
    println!("  preparation  {:+.9}", report.w_prep);
    println!("  measurement  {:+.9}", report.w_meas);
    println!("  extraction   {:+.9}", report.w_extract);
    println!("  net          {:+.9}", report.w_total);
    if let Some(eta) = report.eta {
        println!("  erasure efficiency eta = {:.9}", eta);
    }
}

fn main() -> thermest::Result<()> {
    // A moderately pure probe read out by a moderately biased memory.
    let p = ProbeParams::new(0.9, 1.2, 0.7, 0.8, 0.0, 0.0, ALPHA_ONE_SIGMA)?;
    let spec = protocol_spec(&p)?;

    let ms = spec.work_report(p.phi, Regime::MultiShot)?;
    print_report("degenerate probe", &ms);
    println!("  credit fronted for preparation = {:.9}", ms.w_credit);
    println!("  closed-form credit             = {:.9}", credit_ms(&p));

    println!();
    let ss = spec.work_report(p.phi, Regime::SingleShot)?;
    print_report("degenerate probe", &ss);
    println!("  closed-form credit             = {:.9}", credit_ss(&p));

    // Gap the probe and the ledger changes: the measurement stage now has a
    // genuine single-shot price even though its expected cost stays small.
    println!();
    let gapped = ProbeParams { e: 2.0, r: 0.8, ..p };
    let spec = protocol_spec(&gapped)?;
    let ms = spec.work_report(gapped.phi, Regime::MultiShot)?;
    print_report("probe with a 2-bit gap", &ms);
    let ss = spec.work_report(gapped.phi, Regime::SingleShot)?;
    print_report("probe with a 2-bit gap", &ss);
    println!(
        "  reset-sector measurement price c(E) = {:.9}",
        c_meas(gapped.e)
    );
    Ok(())
}
