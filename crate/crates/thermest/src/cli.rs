//! Thin command-line front end. The library and the examples/ directory are
//! the primary interface; this binary exists for scripting and self-checks.
//!
//! Exit codes: 0 success, 2 bad input, 3 contract violation (infeasible
//! budget, rank-deficient state, disconnected region), 4 solver failure.

use crate::channel::{work_ms, work_ss_deg, work_ss_general, HamiltonianSpec};
use crate::entropy;
use crate::estimation::ALPHA_ONE_SIGMA;
use crate::io;
use crate::phasequbit::{self, Fig};
use crate::protocol::Regime;
use crate::qmat::DensityOperator;
use crate::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use std::f64::consts::PI;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "thermest", version, about = "Work accounting for quantum measurement protocols")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Entropy of a stored density operator.
    Entropy {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        kind: EntropyKind,
    },
    /// Work cost of a stored channel acting on a stored state.
    Workcost {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum)]
        regime: RegimeArg,
        /// Input Hamiltonian (defaults to fully degenerate).
        #[arg(long)]
        h_in: Option<PathBuf>,
        /// Output Hamiltonian (defaults to fully degenerate).
        #[arg(long)]
        h_out: Option<PathBuf>,
    },
    /// Protocol-level reports.
    Protocol {
        #[command(subcommand)]
        cmd: ProtocolCmd,
    },
    /// Precision-versus-work trade-off curves as CSV.
    Curves {
        #[command(subcommand)]
        cmd: CurvesCmd,
    },
    /// Fast internal consistency battery.
    Selftest {
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum ProtocolCmd {
    /// Per-stage work ledger for one protocol run.
    Report {
        #[arg(long)]
        file: PathBuf,
        /// Parameter value handed to the probe family.
        #[arg(long)]
        x: f64,
        #[arg(long, value_enum)]
        regime: RegimeArg,
    },
}

#[derive(clap::Args)]
struct CurveArgs {
    #[arg(long, default_value_t = ALPHA_ONE_SIGMA)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    w_min: f64,
    #[arg(long, default_value_t = 2.0)]
    w_max: f64,
    #[arg(long, default_value_t = 101)]
    w_points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum CurvesCmd {
    /// Degenerate probe: both regimes from closed-form optima.
    Fig2 {
        #[command(flatten)]
        args: CurveArgs,
    },
    /// One curve pair per probe energy gap.
    Fig3 {
        #[command(flatten)]
        args: CurveArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,5,10")]
        energies: Vec<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EntropyKind {
    Vn,
    Min,
    Max,
    Shannon,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Ss,
    Ms,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Regime {
        match r {
            RegimeArg::Ss => Regime::SingleShot,
            RegimeArg::Ms => Regime::MultiShot,
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args())
}

/// Entry point shared with the test suite: parses, dispatches, maps errors
/// to exit codes without touching the process.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err);
            exit_code(&err)
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::RankDeficient
        | Error::NonDiagonalMemory
        | Error::MultiInterval
        | Error::Infeasible(_) => 3,
        Error::SolverFailure(_) | Error::TargetOutOfRange => 4,
        _ => 2,
    }
}

fn scalar(v: f64) -> String {
    format!("{:.11e}", v)
}

fn csv_cell(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if (v - PI).abs() < 1e-12 {
        "3.14159265359".into()
    } else {
        format!("{:.8e}", v)
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Entropy { state, kind } => {
            let rho = io::read_state(&state)?;
            let value = match kind {
                EntropyKind::Vn => entropy::von_neumann(&rho),
                EntropyKind::Min => entropy::h_min(&rho),
                EntropyKind::Max => entropy::h_max(&rho),
                EntropyKind::Shannon => {
                    // Shannon entropy of the populations in the stored basis.
                    let diag: Vec<f64> =
                        (0..rho.dim()).map(|i| rho.mat()[(i, i)].re).collect();
                    entropy::shannon(&diag)?
                }
            };
            println!("{}", scalar(value));
            Ok(0)
        }
        Cmd::Workcost {
            channel,
            state,
            regime,
            h_in,
            h_out,
        } => {
            let chan = io::read_channel(&channel)?;
            let rho = io::read_state(&state)?;
            if rho.dim() != chan.dim_in() {
                return Err(Error::DimMismatch {
                    expected: chan.dim_in(),
                    got: rho.dim(),
                });
            }
            let h_in = match h_in {
                Some(p) => io::read_hamiltonian(&p)?,
                None => HamiltonianSpec::degenerate(chan.dim_in()),
            };
            let h_out = match h_out {
                Some(p) => io::read_hamiltonian(&p)?,
                None => HamiltonianSpec::degenerate(chan.dim_out()),
            };
            if h_in.dim() != chan.dim_in() {
                return Err(Error::DimMismatch {
                    expected: chan.dim_in(),
                    got: h_in.dim(),
                });
            }
            if h_out.dim() != chan.dim_out() {
                return Err(Error::DimMismatch {
                    expected: chan.dim_out(),
                    got: h_out.dim(),
                });
            }
            let value = match regime {
                RegimeArg::Ss => {
                    if h_in.is_degenerate() && h_out.is_degenerate() {
                        work_ss_deg(&chan, &rho)?
                    } else {
                        work_ss_general(&chan, &rho, &h_in, &h_out)?
                    }
                }
                RegimeArg::Ms => {
                    let out = chan.apply_density(&rho)?;
                    work_ms(&rho, &out, &h_in, &h_out)?
                }
            };
            println!("{}", scalar(value));
            Ok(0)
        }
        Cmd::Protocol {
            cmd: ProtocolCmd::Report { file, x, regime },
        } => {
            let spec = io::read_protocol(&file)?;
            let report = spec.work_report(x, regime.into())?;
            println!("regime = {}", report.regime);
            println!("w_prep = {}", scalar(report.w_prep));
            println!("w_meas = {}", scalar(report.w_meas));
            println!("w_extract = {}", scalar(report.w_extract));
            println!("w_total = {}", scalar(report.w_total));
            println!("w_credit = {}", scalar(report.w_credit));
            if let Some(eta) = report.eta {
                println!("eta = {}", scalar(eta));
            }
            Ok(0)
        }
        Cmd::Curves { cmd } => {
            let (fig, args, energies) = match cmd {
                CurvesCmd::Fig2 { args } => (Fig::Fig2, args, vec![0.0]),
                CurvesCmd::Fig3 { args, energies } => (Fig::Fig3, args, energies),
            };
            if args.w_points < 2 || args.w_max <= args.w_min {
                return Err(Error::InvalidArgument(
                    "need w_max > w_min and at least two points".into(),
                ));
            }
            let w_grid: Vec<f64> = (0..args.w_points)
                .map(|i| {
                    args.w_min
                        + (args.w_max - args.w_min) * i as f64 / (args.w_points - 1) as f64
                })
                .collect();
            let points = phasequbit::curve(fig, &w_grid, &energies, args.alpha)?;
            let mut text = String::from("E,w,delta_phi_ss,sqrtn_dphi_ms,r_opt,m_opt,theta_opt\n");
            for p in &points {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    csv_cell(p.e),
                    csv_cell(p.w),
                    csv_cell(p.delta_phi_ss),
                    csv_cell(p.sqrtn_dphi_ms),
                    csv_cell(p.r_opt),
                    csv_cell(p.m_opt),
                    csv_cell(p.theta_opt),
                ));
            }
            io::atomic_write(&args.out, &text)?;
            Ok(0)
        }
        Cmd::Selftest { seed } => selftest(seed),
    }
}

fn selftest(seed: u64) -> Result<i32> {
    println!("seed = {}", seed);
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        if ok {
            println!("ok - {}", name);
        } else {
            println!("FAIL - {} ({})", name, detail);
            failures += 1;
        }
    };

    {
        use crate::qmat::{CMatrix, C64};
        let mut k0 = CMatrix::zeros(2, 2);
        k0[(0, 0)] = C64::new(1.0, 0.0);
        let mut k1 = CMatrix::zeros(2, 2);
        k1[(0, 1)] = C64::new(1.0, 0.0);
        let erase = crate::channel::KrausChannel::new(vec![k0, k1])?;
        let mixed = DensityOperator::maximally_mixed(2);
        let ss = work_ss_deg(&erase, &mixed)?;
        let out = erase.apply_density(&mixed)?;
        let ms = work_ms(&mixed, &out, &HamiltonianSpec::degenerate(2), &HamiltonianSpec::degenerate(2))?;
        check(
            "erasing one mixed bit costs one bit",
            (ss - 1.0).abs() < 1e-12 && (ms - 1.0).abs() < 1e-12,
            format!("ss={} ms={}", ss, ms),
        );
    }

    {
        let amps = vec![
            crate::qmat::C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            crate::qmat::C64::new(0.0, 0.0),
            crate::qmat::C64::new(0.0, 0.0),
            crate::qmat::C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let bell = crate::qmat::PureState::new(amps, vec![2, 2])?.to_density();
        let hmax = entropy::cond_h_max(&bell, 0)?;
        let hmin = entropy::cond_h_min(&bell, 0)?;
        check(
            "maximal entanglement drives both conditional entropies to -1",
            (hmax + 1.0).abs() < 1e-6 && (hmin + 1.0).abs() < 1e-6,
            format!("hmax={} hmin={}", hmax, hmin),
        );
    }

    {
        let c = phasequbit::c_meas(10.0);
        check(
            "ten-bit gap measurement cost",
            (c - 8.0028).abs() < 1e-3,
            format!("c={}", c),
        );
    }

    {
        let alpha = ALPHA_ONE_SIGMA;
        let closed = phasequbit::solve_opt_ss(1.7, 0.0, alpha)?;
        let numeric = phasequbit::solve_opt_ss_numeric(1.7, 0.0, alpha)?;
        let ms_closed = phasequbit::solve_opt_ms(1.3, 0.0)?;
        let ms_numeric = phasequbit::solve_opt_ms_numeric(1.3, 0.0)?;
        check(
            "numeric optimizers reproduce closed forms",
            (closed.value - numeric.value).abs() < 1e-3
                && (ms_closed.value - ms_numeric.value).abs() < 1e-4 * ms_closed.value,
            format!(
                "ss {} vs {}, ms {} vs {}",
                closed.value, numeric.value, ms_closed.value, ms_numeric.value
            ),
        );
    }

    {
        let p = crate::phasequbit::ProbeParams::new(
            0.9,
            std::f64::consts::FRAC_PI_2,
            0.0,
            0.9,
            0.0,
            0.0,
            ALPHA_ONE_SIGMA,
        )?;
        let rate = phasequbit::coverage_estimate(&p, 10, 200, seed)?;
        check(
            "confidence regions cover at the stated rate",
            rate >= ALPHA_ONE_SIGMA - 0.05,
            format!("coverage={}", rate),
        );
    }

    if failures == 0 {
        Ok(0)
    } else {
        Ok(4)
    }
}
