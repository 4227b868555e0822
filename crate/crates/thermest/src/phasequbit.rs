//! Qubit phase estimation with a qubit memory: closed-form work credits,
//! measurement cost, confidence half-widths, and the optimizers behind the
//! precision-versus-work trade-off curves.
//!
//! Conventions: probe Bloch vector (r sinθ cos φ, r sinθ sin φ, r cosθ),
//! memory bias m along z, probe Hamiltonian diag(0, E) in kT ln 2 units,
//! memory degenerate. The measurement correlates the memory with the
//! outcome of the sharp phase observable along φ̂.

use crate::channel::HamiltonianSpec;
use crate::estimation::{Domain, OutcomeModel};
use crate::numopt::{bisect_monotone, binary_entropy, inv_binary_entropy, minimize_box, Branch};
use crate::protocol::{ProbeFamily, ProtocolSpec};
use crate::qmat::{kron, CMatrix, DensityOperator, C64};
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

/// Complete parameter set for one protocol instance.
#[derive(Debug, Clone, Copy)]
pub struct ProbeParams {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub m: f64,
    pub phi_meas: f64,
    pub e: f64,
    pub alpha: f64,
}

impl ProbeParams {
    pub fn new(
        r: f64,
        theta: f64,
        phi: f64,
        m: f64,
        phi_meas: f64,
        e: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("bloch radius {} outside [0,1]", r)));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidArgument(format!("polar angle {} outside [0,pi]", theta)));
        }
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::InvalidArgument(format!("memory bias {} outside [0,1]", m)));
        }
        if !e.is_finite() || e < 0.0 {
            return Err(Error::InvalidHamiltonian(format!("energy gap {}", e)));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidProbability(alpha));
        }
        Ok(ProbeParams {
            r,
            theta,
            phi: phi.rem_euclid(2.0 * PI),
            m,
            phi_meas: phi_meas.rem_euclid(2.0 * PI),
            e,
            alpha,
        })
    }
}

fn partition_z(e: f64) -> f64 {
    1.0 + 2.0_f64.powf(-e)
}

pub fn probe_state(p: &ProbeParams) -> Result<DensityOperator> {
    DensityOperator::from_bloch(p.r, p.theta, p.phi)
}

pub fn memory_state(m: f64) -> Result<DensityOperator> {
    DensityOperator::from_diag(&[(1.0 + m) / 2.0, (1.0 - m) / 2.0], vec![2])
}

/// U = Q0 ⊗ 1 + Q1 ⊗ σx where Q_k projects onto the phase eigenstates
/// |φ̂⟩ and |φ̂+π⟩: the memory records which eigenstate the probe is in.
pub fn correlating_unitary(phi_meas: f64) -> CMatrix {
    let half = C64::new(0.5, 0.0);
    let off = C64::new(0.0, -phi_meas).exp() * half;
    let mut q0 = CMatrix::zeros(2, 2);
    q0[(0, 0)] = half;
    q0[(1, 1)] = half;
    q0[(0, 1)] = off;
    q0[(1, 0)] = off.conj();
    let mut q1 = CMatrix::zeros(2, 2);
    q1[(0, 0)] = half;
    q1[(1, 1)] = half;
    q1[(0, 1)] = -off;
    q1[(1, 0)] = -off.conj();
    let mut sx = CMatrix::zeros(2, 2);
    sx[(0, 1)] = C64::new(1.0, 0.0);
    sx[(1, 0)] = C64::new(1.0, 0.0);
    kron(&q0, &CMatrix::identity(2))
        .add(&kron(&q1, &sx))
        .expect("fixed 4x4 shapes")
}

/// Assembles the full two-qubit protocol for these parameters.
pub fn protocol_spec(p: &ProbeParams) -> Result<ProtocolSpec> {
    ProtocolSpec::new(
        HamiltonianSpec::new(vec![0.0, p.e])?,
        HamiltonianSpec::degenerate(2),
        ProbeFamily::BlochPhase {
            r: p.r,
            theta: p.theta,
        },
        memory_state(p.m)?,
        correlating_unitary(p.phi_meas),
    )
}

/// Closed-form outcome statistics p(0|φ) = (1 + m r sinθ cos(φ̂-φ))/2.
pub fn outcome_model(p: &ProbeParams) -> Result<OutcomeModel> {
    let s = p.m * p.r * p.theta.sin();
    let phi_meas = p.phi_meas;
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
}

/// 2^{A_max} of the probe state against diag(0, E): the Gibbs-weighted
/// spectral factor entering the single-shot preparation credit.
pub fn lambda_big(r: f64, theta: f64, e: f64) -> f64 {
    let z = r * theta.cos();
    let g = 2.0_f64.powf(e);
    let bracket = (1.0 + z) + g * (1.0 - z);
    let disc = (1.0 + z).powi(2)
        + 2.0 * g * (2.0 * r * r - z * z - 1.0)
        + g * g * (1.0 - z).powi(2);
    partition_z(e) / 4.0 * (bracket + disc.max(0.0).sqrt())
}

/// Single-shot work credit of the preparation stage.
pub fn credit_ss(p: &ProbeParams) -> f64 {
    lambda_big(p.r, p.theta, p.e).log2() + (1.0 + p.m).log2()
}

fn base_ms(r: f64, theta: f64, e: f64) -> f64 {
    let h = binary_entropy((1.0 + r) / 2.0).expect("r in [0,1]");
    0.5 * e * (1.0 - r * theta.cos()) + partition_z(e).log2() - h
}

/// Expected work credit of the preparation stage.
pub fn credit_ms(p: &ProbeParams) -> f64 {
    let hm = binary_entropy((1.0 + p.m) / 2.0).expect("m in [0,1]");
    base_ms(p.r, p.theta, p.e) + 1.0 - hm
}

/// Single-shot cost of the measurement stage when the memory starts in its
/// reset state: E + 2(log2 Z - 1), zero at E = 0 and ~E - 2/ln2 · 2^{-E}
/// for large gaps.
pub fn c_meas(e: f64) -> f64 {
    e + 2.0 * (partition_z(e).log2() - 1.0)
}

fn delta_phi_raw(s: f64, alpha: f64) -> f64 {
    if s <= 1e-15 {
        return PI;
    }
    let arg = (1.0 - 2.0 * alpha) / s;
    if arg <= -1.0 {
        PI
    } else if arg >= 1.0 {
        0.0
    } else {
        arg.acos()
    }
}

/// Confidence half-width arccos[(1-2α)/(m r sinθ)], clamped to [0, π].
pub fn delta_phi(p: &ProbeParams) -> f64 {
    delta_phi_raw(p.m * p.r * p.theta.sin(), p.alpha)
}

/// One solved point of a trade-off curve.
#[derive(Debug, Clone, Copy)]
pub struct RegimeOptimum {
    pub value: f64,
    pub r: f64,
    pub m: f64,
    pub theta: f64,
}

const GRID_N: usize = 61;
const BOX_TOL: f64 = 1e-11;
const FEAS_SLACK: f64 = 1e-9;

/// Minimal single-shot half-width achievable with work budget w at gap E.
/// The budget must cover both the preparation credit and the measurement
/// cost exactly: log2 λ + log2(1+m) + c(E) = w.
pub fn solve_opt_ss(w: f64, e: f64, alpha: f64) -> Result<RegimeOptimum> {
    if e == 0.0 {
        solve_opt_ss_closed(w, alpha)
    } else {
        solve_opt_ss_numeric(w, e, alpha)
    }
}

fn solve_opt_ss_closed(w: f64, alpha: f64) -> Result<RegimeOptimum> {
    if w < 0.0 {
        return Err(Error::Infeasible(format!("negative work budget {}", w)));
    }
    // Budget splits evenly between probe purity and memory bias.
    let r = 2.0_f64.powf(w / 2.0) - 1.0;
    if r > 1.0 + 1e-12 {
        return Err(Error::Infeasible(format!(
            "budget {} exceeds the 2-bit single-shot ceiling",
            w
        )));
    }
    let r = r.min(1.0);
    Ok(RegimeOptimum {
        value: delta_phi_raw(r * r, alpha),
        r,
        m: r,
        theta: FRAC_PI_2,
    })
}

pub fn solve_opt_ss_numeric(w: f64, e: f64, alpha: f64) -> Result<RegimeOptimum> {
    let target = w - c_meas(e);
    let memory_log = |rt: &[f64]| -> Option<f64> {
        let lo = lambda_big(rt[0], rt[1], e).log2();
        let t = target - lo;
        if (-FEAS_SLACK..=1.0 + FEAS_SLACK).contains(&t) {
            Some(t.clamp(0.0, 1.0))
        } else {
            None
        }
    };
    let objective = |rt: &[f64]| -> f64 {
        match memory_log(rt) {
            Some(t) => {
                // m recovered by inverting log2(1+m) on [0,1].
                let m = bisect_monotone(|m: f64| (1.0 + m).log2(), 0.0, 1.0, t, 1e-13)
                    .unwrap_or(2.0_f64.powf(t) - 1.0);
                delta_phi_raw(m * rt[0] * rt[1].sin(), alpha)
            }
            None => {
                let lo = lambda_big(rt[0], rt[1], e).log2();
                let dist = if target < lo { lo - target } else { target - lo - 1.0 };
                PI + dist.max(0.0) + 1e-6
            }
        }
    };
    let (point, _) = minimize_box(
        objective,
        &[(0.0, 1.0), (0.0, FRAC_PI_2)],
        GRID_N,
        BOX_TOL,
    )?;
    match memory_log(&point) {
        Some(t) => {
            let m = bisect_monotone(|m: f64| (1.0 + m).log2(), 0.0, 1.0, t, 1e-13)?;
            Ok(RegimeOptimum {
                value: delta_phi_raw(m * point[0] * point[1].sin(), alpha),
                r: point[0],
                m,
                theta: point[1],
            })
        }
        None => Err(Error::Infeasible(format!(
            "no probe meets budget {} at gap {}",
            w, e
        ))),
    }
}

/// Minimal multi-shot precision 1/(m r sinθ) = lim √n Δφ̃ under expected
/// work w: base(r,θ) + 1 - h((1+m)/2) = w.
pub fn solve_opt_ms(w: f64, e: f64) -> Result<RegimeOptimum> {
    if e == 0.0 {
        solve_opt_ms_closed(w)
    } else {
        solve_opt_ms_numeric(w, e)
    }
}

fn solve_opt_ms_closed(w: f64) -> Result<RegimeOptimum> {
    if w < 0.0 {
        return Err(Error::Infeasible(format!("negative work budget {}", w)));
    }
    if w > 2.0 {
        return Err(Error::Infeasible(format!(
            "budget {} exceeds the 2-bit expected-work ceiling",
            w
        )));
    }
    let p = inv_binary_entropy(1.0 - w / 2.0, Branch::Upper)?;
    let r = 2.0 * p - 1.0;
    let s = r * r;
    Ok(RegimeOptimum {
        value: if s > 0.0 { 1.0 / s } else { f64::INFINITY },
        r,
        m: r,
        theta: FRAC_PI_2,
    })
}

pub fn solve_opt_ms_numeric(w: f64, e: f64) -> Result<RegimeOptimum> {
    let bias = |rt: &[f64]| -> Option<f64> {
        let t = w - base_ms(rt[0], rt[1], e);
        if (-FEAS_SLACK..=1.0 + FEAS_SLACK).contains(&t) {
            let p = inv_binary_entropy((1.0 - t).clamp(0.0, 1.0), Branch::Upper).ok()?;
            Some(2.0 * p - 1.0)
        } else {
            None
        }
    };
    let objective = |rt: &[f64]| -> f64 {
        match bias(rt) {
            Some(m) => {
                let s = m * rt[0] * rt[1].sin();
                if s > 1e-15 {
                    1.0 / s
                } else {
                    1e18
                }
            }
            None => {
                let t = w - base_ms(rt[0], rt[1], e);
                let dist = if t < 0.0 { -t } else { t - 1.0 };
                1e18 + 1e18 * dist.max(0.0)
            }
        }
    };
    let (point, _) = minimize_box(
        objective,
        &[(0.0, 1.0), (0.0, FRAC_PI_2)],
        GRID_N,
        BOX_TOL,
    )?;
    match bias(&point) {
        Some(m) => {
            let s = m * point[0] * point[1].sin();
            Ok(RegimeOptimum {
                value: if s > 1e-15 { 1.0 / s } else { f64::INFINITY },
                r: point[0],
                m,
                theta: point[1],
            })
        }
        None => Err(Error::Infeasible(format!(
            "no probe meets expected budget {} at gap {}",
            w, e
        ))),
    }
}

/// Which family of curves to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fig {
    /// Degenerate probe (E = 0), both regimes, closed-form optima.
    Fig2,
    /// One curve pair per energy gap in the supplied list.
    Fig3,
}

#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub e: f64,
    pub w: f64,
    pub delta_phi_ss: f64,
    pub sqrtn_dphi_ms: f64,
    pub r_opt: f64,
    pub m_opt: f64,
    pub theta_opt: f64,
}

/// Solves both regimes over a grid of work budgets. Infeasible single-shot
/// points report the trivial half-width π with zeroed optimizers; infeasible
/// multi-shot points report +inf.
pub fn curve(fig: Fig, w_grid: &[f64], e_list: &[f64], alpha: f64) -> Result<Vec<CurvePoint>> {
    if w_grid.is_empty() {
        return Err(Error::InvalidArgument("empty work grid".into()));
    }
    let energies: Vec<f64> = match fig {
        Fig::Fig2 => vec![0.0],
        Fig::Fig3 => {
            if e_list.is_empty() {
                return Err(Error::InvalidArgument("empty energy list".into()));
            }
            e_list.to_vec()
        }
    };
    let mut points = Vec::with_capacity(energies.len() * w_grid.len());
    for &e in &energies {
        for &w in w_grid {
            let (delta_phi_ss, r_opt, m_opt, theta_opt) = match solve_opt_ss(w, e, alpha) {
                Ok(opt) => (opt.value, opt.r, opt.m, opt.theta),
                Err(Error::Infeasible(_)) => (PI, 0.0, 0.0, 0.0),
                Err(err) => return Err(err),
            };
            let sqrtn_dphi_ms = match solve_opt_ms(w, e) {
                Ok(opt) => opt.value,
                Err(Error::Infeasible(_)) => f64::INFINITY,
                Err(err) => return Err(err),
            };
            points.push(CurvePoint {
                e,
                w,
                delta_phi_ss,
                sqrtn_dphi_ms,
                r_opt,
                m_opt,
                theta_opt,
            });
        }
    }
    Ok(points)
}

/// Monte Carlo check of the confidence construction for these parameters:
/// returns the fraction of simulated outcomes whose region covers the truth.
pub fn coverage_estimate(
    p: &ProbeParams,
    phases: usize,
    draws_per_phase: usize,
    seed: u64,
) -> Result<f64> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let model = outcome_model(p)?;
    let threshold = crate::estimation::conf_threshold(&model, p.alpha)?;
    // Two outcomes means two distinct regions; solve each once.
    let regions: Vec<crate::estimation::ConfidenceInterval> = (0..2)
        .map(|k| crate::estimation::conf_region_given(&model, k, p.alpha, threshold))
        .collect::<Result<_>>()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let dom = model.domain();
    let mut covered = 0usize;
    for i in 0..phases {
        let x_true = dom.lo + dom.length() * i as f64 / phases as f64;
        let p0 = model.prob(x_true, 0);
        for _ in 0..draws_per_phase {
            let k = if rng.gen::<f64>() < p0 { 0 } else { 1 };
            let ci = &regions[k];
            if dom.distance(ci.center, x_true) <= ci.half_width + 1e-12 {
                covered += 1;
            }
        }
    }
    Ok(covered as f64 / (phases * draws_per_phase) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{free_energy_triple, gamma_operator, gibbs_weighted_image_norm, work_ss_general};
    use crate::estimation::{conf_region, ALPHA_ONE_SIGMA};
    use crate::protocol::Regime;

    fn params(r: f64, theta: f64, m: f64, e: f64) -> ProbeParams {
        ProbeParams::new(r, theta, 0.0, m, 0.9, e, ALPHA_ONE_SIGMA).unwrap()
    }

    #[test]
    fn correlating_unitary_is_unitary_and_swaps_phase_eigenstates() {
        for phi in [0.0, 0.7, 2.9, 5.5] {
            let u = correlating_unitary(phi);
            let dev = u
                .dagger()
                .matmul(&u)
                .unwrap()
                .sub(&CMatrix::identity(4))
                .unwrap()
                .max_abs();
            assert!(dev < 1e-12);
        }
    }

    #[test]
    fn povm_is_biased_phase_observable() {
        // M_0 = (1 + m(cos φ̂ σx + sin φ̂ σy))/2.
        for (m, phi) in [(1.0, 0.0), (0.6, 1.1), (0.3, 4.0)] {
            let p = params(0.8, 1.0, m, 0.0);
            let spec = protocol_spec(&ProbeParams { phi_meas: phi, ..p }).unwrap();
            let povm = spec.povm().unwrap();
            let mut expect = CMatrix::zeros(2, 2);
            expect[(0, 0)] = C64::new(0.5, 0.0);
            expect[(1, 1)] = C64::new(0.5, 0.0);
            expect[(0, 1)] = C64::new(m / 2.0 * phi.cos(), -m / 2.0 * phi.sin());
            expect[(1, 0)] = expect[(0, 1)].conj();
            assert!(povm[0].approx_eq(&expect, 1e-12), "m={} phi={}", m, phi);
        }
    }

    #[test]
    fn pure_memory_measurement_is_projective() {
        let p = params(0.5, 1.2, 1.0, 0.0);
        let phi = 0.8;
        let spec = protocol_spec(&ProbeParams { phi_meas: phi, ..p }).unwrap();
        let kraus = spec.measurement_kraus().unwrap();
        assert_eq!(kraus.len(), 2);
        for entry in &kraus {
            // Projector onto |φ̂ + kπ⟩.
            let sign = if entry.k == 0 { 1.0 } else { -1.0 };
            let mut proj = CMatrix::zeros(2, 2);
            proj[(0, 0)] = C64::new(0.5, 0.0);
            proj[(1, 1)] = C64::new(0.5, 0.0);
            proj[(0, 1)] = C64::new(0.0, -phi).exp() * C64::new(sign * 0.5, 0.0);
            proj[(1, 0)] = proj[(0, 1)].conj();
            assert!(entry.op.approx_eq(&proj, 1e-12));
        }
    }

    #[test]
    fn outcome_model_matches_born_rule() {
        for (r, theta, m, phi_meas) in [(0.9, 1.1, 0.7, 0.3), (0.5, 0.6, 1.0, 2.2)] {
            let mut p = params(r, theta, m, 0.0);
            p.phi_meas = phi_meas;
            let spec = protocol_spec(&p).unwrap();
            let povm = spec.povm().unwrap();
            let model = outcome_model(&p).unwrap();
            for i in 0..12 {
                let x = 0.55 * i as f64;
                let rho = DensityOperator::from_bloch(r, theta, x).unwrap();
                for (k, effect) in povm.iter().enumerate() {
                    let born = effect.matmul(rho.mat()).unwrap().trace().re;
                    assert!((model.prob(x, k) - born).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lambda_reduces_to_one_plus_r_at_zero_gap() {
        for i in 0..10 {
            for j in 0..10 {
                let r = i as f64 / 9.0;
                let theta = PI / 2.0 * j as f64 / 9.0;
                assert!((lambda_big(r, theta, 0.0) - (1.0 + r)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_of_mixed_probe_is_excited_gibbs_weight() {
        for e in [0.3, 1.0, 4.0] {
            let expect = 2.0_f64.powf(e) * partition_z(e) / 2.0;
            assert!((lambda_big(0.0, 0.7, e) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda_matches_free_energy_witness() {
        // log2 λ - log2 Z must equal A_max of the probe against diag(0, E).
        for (r, theta, e) in [
            (0.85, 1.2, 0.0),
            (0.85, 1.2, 1.7),
            (0.3, 0.4, 0.5),
            (1.0, FRAC_PI_2, 2.0),
            (0.62, 2.6, 3.0),
        ] {
            let rho = DensityOperator::from_bloch(r, theta, 0.45).unwrap();
            let h = HamiltonianSpec::new(vec![0.0, e]).unwrap();
            let (_, _, a_max) = free_energy_triple(&rho, &h).unwrap();
            let lam = lambda_big(r, theta, e).log2() - partition_z(e).log2();
            assert!(
                (lam - a_max).abs() < 1e-10,
                "r={} theta={} e={}: {} vs {}",
                r,
                theta,
                e,
                lam,
                a_max
            );
        }
    }

    #[test]
    fn ss_credit_matches_protocol_preparation_cost() {
        for (r, theta, m, e) in [(0.7, 1.0, 0.5, 0.0), (0.6, 0.8, 0.4, 1.3), (0.9, 1.4, 0.8, 0.6)] {
            let p = params(r, theta, m, e);
            let report = protocol_spec(&p)
                .unwrap()
                .work_report(p.phi, Regime::SingleShot)
                .unwrap();
            assert!(
                (credit_ss(&p) - report.w_prep).abs() < 1e-9,
                "{} vs {}",
                credit_ss(&p),
                report.w_prep
            );
        }
    }

    #[test]
    fn ms_credit_matches_protocol_preparation_cost() {
        for (r, theta, m, e) in [(0.7, 1.0, 0.5, 0.0), (0.55, 0.9, 0.35, 2.1), (0.95, 1.5, 0.9, 0.7)] {
            let p = params(r, theta, m, e);
            let report = protocol_spec(&p)
                .unwrap()
                .work_report(p.phi, Regime::MultiShot)
                .unwrap();
            assert!(
                (credit_ms(&p) - report.w_prep).abs() < 1e-10,
                "{} vs {}",
                credit_ms(&p),
                report.w_prep
            );
        }
    }

    #[test]
    fn ss_credit_examples() {
        let p = params(1.0, FRAC_PI_2, 1.0, 0.0);
        assert!((credit_ss(&p) - 2.0).abs() < 1e-12);
        let r = 2.0_f64.sqrt() - 1.0;
        let p = params(r, FRAC_PI_2, r, 0.0);
        assert!((credit_ss(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measurement_cost_values() {
        assert_eq!(c_meas(0.0), 0.0);
        assert!((c_meas(10.0) - 8.0028).abs() < 1e-3);
        let direct = 10.0 + 2.0 * ((1.0_f64 + 2.0_f64.powf(-10.0)).log2() - 1.0);
        assert!((c_meas(10.0) - direct).abs() < 1e-15);
        // Cost grows with the gap and stays nonnegative.
        let mut prev = 0.0;
        for i in 1..40 {
            let c = c_meas(0.25 * i as f64);
            assert!(c >= prev);
            prev = c;
        }
    }

    #[test]
    fn measurement_cost_matches_support_restricted_channel_norm() {
        // The closed form is the Gibbs-weighted output norm of the joint
        // measurement channel with the input weight restricted to the
        // memory reset sector.
        for e in [0.0, 0.5, 1.0, 3.0, 10.0] {
            let p = params(0.8, 1.1, 0.6, e);
            let spec = protocol_spec(&p).unwrap();
            let h_sm = spec.joint_hamiltonian();
            let meas = spec.measurement_channel().unwrap();
            let mut reset = CMatrix::zeros(4, 4);
            reset[(0, 0)] = C64::new(1.0, 0.0);
            reset[(2, 2)] = C64::new(1.0, 0.0);
            let g_in = gamma_operator(&h_sm, Some(&reset)).unwrap();
            let got = gibbs_weighted_image_norm(&meas, &g_in, &h_sm).unwrap();
            assert!(
                (got - c_meas(e)).abs() < 1e-9,
                "e={}: {} vs {}",
                e,
                got,
                c_meas(e)
            );
        }
    }

    #[test]
    fn full_rank_measurement_cost_depends_only_on_gap() {
        // Against the full Gibbs weight the measurement costs
        // E + log2 Z - 1 regardless of the probe parameters.
        for (e, r, theta, m) in [(0.0, 0.7, 1.0, 0.5), (1.5, 0.4, 0.7, 0.3), (10.0, 0.9, 1.3, 0.55)] {
            let p = params(r, theta, m, e);
            let spec = protocol_spec(&p).unwrap();
            let h_sm = spec.joint_hamiltonian();
            let meas = spec.measurement_channel().unwrap();
            let prepared = spec.prepared_state(p.phi).unwrap();
            let got = work_ss_general(&meas, &prepared, &h_sm, &h_sm).unwrap();
            let expect = e + partition_z(e).log2() - 1.0;
            assert!(
                (got - expect).abs() < 1e-9,
                "e={}: {} vs {}",
                e,
                got,
                expect
            );
        }
    }

    #[test]
    fn half_width_examples() {
        let alpha = ALPHA_ONE_SIGMA;
        let p = ProbeParams::new(1.0, FRAC_PI_2, 0.0, 1.0, 0.0, 0.0, alpha).unwrap();
        assert!((delta_phi(&p) - (1.0 - 2.0 * alpha).acos()).abs() < 1e-12);
        // Signal too weak for the target confidence: full circle.
        let p = ProbeParams::new(0.3, FRAC_PI_2, 0.0, 0.9, 0.0, 0.0, alpha).unwrap();
        assert_eq!(delta_phi(&p), PI);
        let p = ProbeParams::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, alpha).unwrap();
        assert_eq!(delta_phi(&p), PI);
    }

    #[test]
    fn half_width_matches_confidence_region_machinery() {
        let alpha = ALPHA_ONE_SIGMA;
        for (r, m) in [(0.9, 0.9), (1.0, 0.8), (0.75, 1.0)] {
            let p = ProbeParams::new(r, FRAC_PI_2, 0.0, m, 0.0, 0.0, alpha).unwrap();
            let model = outcome_model(&p).unwrap();
            let ci = conf_region(&model, 0, alpha).unwrap();
            let tol = 2.0 * PI / 2001.0 + 1e-6;
            assert!(
                (ci.half_width - delta_phi(&p)).abs() < tol,
                "r={} m={}: {} vs {}",
                r,
                m,
                ci.half_width,
                delta_phi(&p)
            );
        }
    }

    #[test]
    fn ss_solver_closed_form_endpoints() {
        let alpha = ALPHA_ONE_SIGMA;
        let top = solve_opt_ss(2.0, 0.0, alpha).unwrap();
        assert!((top.r - 1.0).abs() < 1e-12);
        assert!((top.value - (1.0 - 2.0 * alpha).acos()).abs() < 1e-12);
        let zero = solve_opt_ss(0.0, 0.0, alpha).unwrap();
        assert_eq!(zero.value, PI);
        assert!(solve_opt_ss(2.4, 0.0, alpha).is_err());
    }

    #[test]
    fn ms_solver_closed_form_endpoints() {
        let top = solve_opt_ms(2.0, 0.0).unwrap();
        assert_eq!(top.r, 1.0);
        assert_eq!(top.value, 1.0);
        let zero = solve_opt_ms(0.0, 0.0).unwrap();
        assert!(zero.value.is_infinite());
        assert!(solve_opt_ms(2.5, 0.0).is_err());
    }

    #[test]
    fn numeric_ss_agrees_with_closed_form_at_zero_gap() {
        let alpha = ALPHA_ONE_SIGMA;
        for i in 0..12 {
            let w = 0.15 + 1.8 * i as f64 / 11.0;
            if w > 2.0 {
                continue;
            }
            let closed = solve_opt_ss_closed(w, alpha).unwrap();
            let numeric = solve_opt_ss_numeric(w, 0.0, alpha).unwrap();
            assert!(
                (closed.value - numeric.value).abs() < 1e-3,
                "w={}: {} vs {}",
                w,
                closed.value,
                numeric.value
            );
        }
    }

    #[test]
    fn numeric_ms_agrees_with_closed_form_at_zero_gap() {
        for i in 0..12 {
            let w = 0.1 + 1.85 * i as f64 / 11.0;
            let closed = solve_opt_ms_closed(w).unwrap();
            let numeric = solve_opt_ms_numeric(w, 0.0).unwrap();
            assert!(
                (closed.value - numeric.value).abs() < 1e-4 * closed.value.max(1.0),
                "w={}: {} vs {}",
                w,
                closed.value,
                numeric.value
            );
        }
    }

    #[test]
    fn solved_points_satisfy_the_budget_constraint() {
        let alpha = ALPHA_ONE_SIGMA;
        for (w, e) in [(1.2, 0.0), (1.7, 0.5), (1.9, 1.0)] {
            if let Ok(opt) = solve_opt_ss(w, e, alpha) {
                let p = ProbeParams::new(opt.r, opt.theta, 0.0, opt.m, 0.0, e, alpha).unwrap();
                let spent = credit_ss(&p) + c_meas(e);
                assert!((spent - w).abs() < 1e-6, "ss w={} e={}: spent {}", w, e, spent);
            }
            let opt = solve_opt_ms(w, e).unwrap();
            let p = ProbeParams::new(opt.r, opt.theta, 0.0, opt.m, 0.0, e, alpha).unwrap();
            let spent = credit_ms(&p);
            assert!((spent - w).abs() < 1e-6, "ms w={} e={}: spent {}", w, e, spent);
        }
    }

    #[test]
    fn large_gap_single_shot_is_infeasible_below_measurement_cost() {
        let alpha = ALPHA_ONE_SIGMA;
        assert!(matches!(
            solve_opt_ss(2.0, 10.0, alpha),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn curve_fig2_shape_and_sentinels() {
        let w: Vec<f64> = (0..9).map(|i| 0.05 + i as f64 * 0.24).collect();
        let pts = curve(Fig::Fig2, &w, &[], ALPHA_ONE_SIGMA).unwrap();
        assert_eq!(pts.len(), 9);
        let mut prev_ss = f64::INFINITY;
        let mut prev_ms = f64::INFINITY;
        for p in &pts {
            assert_eq!(p.e, 0.0);
            // More work never hurts precision.
            assert!(p.delta_phi_ss <= prev_ss + 1e-12);
            assert!(p.sqrtn_dphi_ms <= prev_ms + 1e-12);
            prev_ss = p.delta_phi_ss;
            prev_ms = p.sqrtn_dphi_ms;
        }
        assert_eq!(pts[0].delta_phi_ss, PI);
        assert!(pts[0].sqrtn_dphi_ms.is_finite());
    }

    #[test]
    fn curve_fig3_zero_gap_row_reproduces_fig2() {
        let w: Vec<f64> = (0..7).map(|i| 0.2 + i as f64 * 0.28).collect();
        let fig2 = curve(Fig::Fig2, &w, &[], ALPHA_ONE_SIGMA).unwrap();
        let fig3 = curve(Fig::Fig3, &w, &[0.0, 2.0], ALPHA_ONE_SIGMA).unwrap();
        for (a, b) in fig2.iter().zip(fig3.iter().take(7)) {
            assert!((a.delta_phi_ss - b.delta_phi_ss).abs() < 1e-12);
            assert!(
                (a.sqrtn_dphi_ms - b.sqrtn_dphi_ms).abs() < 1e-12
                    || (a.sqrtn_dphi_ms.is_infinite() && b.sqrtn_dphi_ms.is_infinite())
            );
        }
    }

    #[test]
    fn coverage_estimate_smoke() {
        let p = ProbeParams::new(0.9, FRAC_PI_2, 0.0, 0.9, 0.0, 0.0, ALPHA_ONE_SIGMA).unwrap();
        let rate = coverage_estimate(&p, 10, 300, 11).unwrap();
        assert!(rate >= ALPHA_ONE_SIGMA - 0.05, "coverage {}", rate);
    }
}
