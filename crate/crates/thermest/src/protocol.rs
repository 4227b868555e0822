//! The three-stage estimation protocol on system ⊗ memory:
//! preparation (thermal → probe ⊗ reset memory), correlating measurement,
//! and extraction back to thermal states, with per-stage work accounting.

use crate::channel::{
    work_ms, work_ss_deg, work_ss_fixed_deg, work_ss_fixed_general, work_ss_general,
    HamiltonianSpec, KrausChannel,
};
use crate::entropy::h_min;
use crate::qmat::{kron, CMatrix, DensityOperator, C64, HERMITICITY_TOL, SUPPORT_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SingleShot,
    MultiShot,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::SingleShot => write!(f, "single-shot"),
            Regime::MultiShot => write!(f, "multi-shot"),
        }
    }
}

/// Family of probe states indexed by the estimated parameter x.
#[derive(Debug, Clone)]
pub enum ProbeFamily {
    /// Qubit with Bloch vector (r sinθ cos x, r sinθ sin x, r cosθ).
    BlochPhase { r: f64, theta: f64 },
    /// x-independent probe, mostly for randomized cyclicity tests.
    Constant(DensityOperator),
}

impl ProbeFamily {
    pub fn state(&self, x: f64) -> Result<DensityOperator> {
        match self {
            ProbeFamily::BlochPhase { r, theta } => DensityOperator::from_bloch(*r, *theta, x),
            ProbeFamily::Constant(rho) => Ok(rho.clone()),
        }
    }

    fn dim(&self) -> usize {
        match self {
            ProbeFamily::BlochPhase { .. } => 2,
            ProbeFamily::Constant(rho) => rho.dim(),
        }
    }
}

/// One Kraus operator of the measurement, acting on the system alone:
/// A_{k,j} = √q_j ⟨k|U|j⟩_M for outcome k and memory eigenvalue index j.
#[derive(Debug, Clone)]
pub struct MeasurementKraus {
    pub k: usize,
    pub j: usize,
    pub op: CMatrix,
}

#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    dim_s: usize,
    dim_m: usize,
    h_s: HamiltonianSpec,
    h_m: HamiltonianSpec,
    probe: ProbeFamily,
    memory_init: DensityOperator,
    correlating_unitary: CMatrix,
}

impl ProtocolSpec {
    pub fn new(
        h_s: HamiltonianSpec,
        h_m: HamiltonianSpec,
        probe: ProbeFamily,
        memory_init: DensityOperator,
        correlating_unitary: CMatrix,
    ) -> Result<Self> {
        let dim_s = h_s.dim();
        let dim_m = h_m.dim();
        if probe.dim() != dim_s {
            return Err(Error::DimMismatch {
                expected: dim_s,
                got: probe.dim(),
            });
        }
        if memory_init.dim() != dim_m {
            return Err(Error::DimMismatch {
                expected: dim_m,
                got: memory_init.dim(),
            });
        }
        for i in 0..dim_m {
            for j in 0..dim_m {
                if i != j && memory_init.mat()[(i, j)].norm() > HERMITICITY_TOL {
                    return Err(Error::NonDiagonalMemory);
                }
            }
        }
        let d = dim_s * dim_m;
        if correlating_unitary.rows() != d || correlating_unitary.cols() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: correlating_unitary.rows(),
            });
        }
        let dev = correlating_unitary
            .dagger()
            .matmul(&correlating_unitary)?
            .sub(&CMatrix::identity(d))?
            .max_abs();
        if dev > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "correlating unitary is not unitary (deviation {:.3e})",
                dev
            )));
        }
        Ok(ProtocolSpec {
            dim_s,
            dim_m,
            h_s,
            h_m,
            probe,
            memory_init,
            correlating_unitary,
        })
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_m(&self) -> usize {
        self.dim_m
    }

    pub fn h_s(&self) -> &HamiltonianSpec {
        &self.h_s
    }

    pub fn h_m(&self) -> &HamiltonianSpec {
        &self.h_m
    }

    pub fn probe(&self) -> &ProbeFamily {
        &self.probe
    }

    pub fn memory_init(&self) -> &DensityOperator {
        &self.memory_init
    }

    pub fn correlating_unitary(&self) -> &CMatrix {
        &self.correlating_unitary
    }

    pub fn joint_hamiltonian(&self) -> HamiltonianSpec {
        self.h_s.tensor_sum(&self.h_m)
    }

    /// τ_S ⊗ τ_M, the protocol's free input and final output.
    pub fn thermal_input(&self) -> DensityOperator {
        self.h_s.gibbs_state().tensor(&self.h_m.gibbs_state())
    }

    /// ρ_S(x) ⊗ ρ_M, the joint state after preparation.
    pub fn prepared_state(&self, x: f64) -> Result<DensityOperator> {
        Ok(self.probe.state(x)?.tensor(&self.memory_init))
    }

    /// Trace-and-replace onto ρ_S(x) ⊗ ρ_M.
    pub fn preparation_channel(&self, x: f64) -> Result<KrausChannel> {
        KrausChannel::constant_output(&self.prepared_state(x)?, self.dim_s * self.dim_m)
    }

    /// System-side Kraus operators A_{k,j} = √q_j ⟨k|U|j⟩_M, with j running
    /// over the support of the memory state only.
    pub fn measurement_kraus(&self) -> Result<Vec<MeasurementKraus>> {
        let q: Vec<f64> = (0..self.dim_m)
            .map(|j| self.memory_init.mat()[(j, j)].re)
            .collect();
        let q_top = q.iter().cloned().fold(0.0, f64::max);
        let mut out = Vec::new();
        for k in 0..self.dim_m {
            for (j, &qj) in q.iter().enumerate() {
                if qj <= SUPPORT_TOL * q_top {
                    continue;
                }
                let w = C64::new(qj.sqrt(), 0.0);
                let op = CMatrix::from_fn(self.dim_s, self.dim_s, |sp, s| {
                    self.correlating_unitary[(sp * self.dim_m + k, s * self.dim_m + j)] * w
                });
                out.push(MeasurementKraus { k, j, op });
            }
        }
        Ok(out)
    }

    /// POVM elements M_k = Σ_j A†_{k,j} A_{k,j} on the system.
    pub fn povm(&self) -> Result<Vec<CMatrix>> {
        let kraus = self.measurement_kraus()?;
        let mut povm = vec![CMatrix::zeros(self.dim_s, self.dim_s); self.dim_m];
        for entry in &kraus {
            povm[entry.k] = povm[entry.k].add(&entry.op.dagger().matmul(&entry.op)?)?;
        }
        Ok(povm)
    }

    /// The joint channel Σ_k (1_S ⊗ |k⟩⟨k|) U · U† (1_S ⊗ |k⟩⟨k|).
    pub fn measurement_channel(&self) -> Result<KrausChannel> {
        let mut kraus = Vec::with_capacity(self.dim_m);
        for k in 0..self.dim_m {
            let mut pk = CMatrix::zeros(self.dim_m, self.dim_m);
            pk[(k, k)] = C64::new(1.0, 0.0);
            let b = kron(&CMatrix::identity(self.dim_s), &pk).matmul(&self.correlating_unitary)?;
            kraus.push(b);
        }
        KrausChannel::new(kraus)
    }

    /// Trace-and-replace onto τ_S ⊗ τ_M.
    pub fn extraction_channel(&self) -> Result<KrausChannel> {
        KrausChannel::constant_output(&self.thermal_input(), self.dim_s * self.dim_m)
    }

    /// Post-measurement joint state for probe parameter x.
    pub fn post_measurement_state(&self, x: f64) -> Result<DensityOperator> {
        let prepared = self.prepared_state(x)?;
        let mat = self.measurement_channel()?.apply_mat(prepared.mat())?;
        DensityOperator::new(mat, vec![self.dim_s, self.dim_m])
    }

    /// Per-stage work ledger for one run of the protocol at parameter x.
    pub fn work_report(&self, x: f64, regime: Regime) -> Result<WorkReport> {
        let tau = self.thermal_input();
        let prepared = self.prepared_state(x)?;
        let after = self.post_measurement_state(x)?;
        let h = self.joint_hamiltonian();

        let (w_prep, w_meas, w_extract, eta) = match regime {
            Regime::MultiShot => (
                work_ms(&tau, &prepared, &h, &h)?,
                work_ms(&prepared, &after, &h, &h)?,
                work_ms(&after, &tau, &h, &h)?,
                None,
            ),
            Regime::SingleShot => {
                let meas = self.measurement_channel()?;
                if h.is_degenerate() {
                    let w_prep = work_ss_fixed_deg(&tau, &prepared);
                    let w_meas = work_ss_deg(&meas, &prepared)?;
                    let w_extract = work_ss_fixed_deg(&after, &tau);
                    // w(M) = -η H_min(ρ'_SM): η only defined away from the
                    // pure-output limit, and only in the degenerate regime
                    // where the identity w ≤ 0 pins it to [0,1].
                    let hm = h_min(&after);
                    let eta = if hm > 1e-9 {
                        Some((-w_meas / hm).clamp(0.0, 1.0))
                    } else {
                        None
                    };
                    (w_prep, w_meas, w_extract, eta)
                } else {
                    (
                        work_ss_fixed_general(&tau, &prepared, &h, &h)?,
                        work_ss_general(&meas, &prepared, &h, &h)?,
                        work_ss_fixed_general(&after, &tau, &h, &h)?,
                        None,
                    )
                }
            }
        };

        Ok(WorkReport {
            regime,
            w_prep,
            w_meas,
            w_extract,
            w_total: w_prep + w_meas + w_extract,
            w_credit: w_prep,
            eta,
        })
    }
}

/// Stage-by-stage work in units kT ln 2. The credit is the preparation cost:
/// work that must be fronted even when the full cycle nets to zero.
#[derive(Debug, Clone)]
pub struct WorkReport {
    pub regime: Regime,
    pub w_prep: f64,
    pub w_meas: f64,
    pub w_extract: f64,
    pub w_total: f64,
    pub w_credit: f64,
    pub eta: Option<f64>,
}
