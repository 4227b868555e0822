//! Quantum channels as Kraus sets, Hamiltonians as diagonal energy lists,
//! and the work costs of implementing channels with Gibbs-preserving maps.
//!
//! Work is in units of kT ln 2. The degenerate-Hamiltonian cost of a channel
//! is log2 of the operator norm of the image of the input support projector;
//! the non-degenerate version replaces projectors with Boltzmann-weighted
//! Gamma operators.

use crate::entropy::{cond_h_max, h_max, h_min, von_neumann};
use crate::qmat::{
    eig_hermitian, spectral_norm, CMatrix, DensityOperator, PureState, C64, SUPPORT_TOL,
};
use crate::{Error, Result};

/// Completeness tolerance for Σ A†A = I.
pub const KRAUS_TOL: f64 = 1e-9;
/// Energies closer than this count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl KrausChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if kraus
            .iter()
            .any(|a| a.rows() != dim_out || a.cols() != dim_in)
        {
            return Err(Error::InvalidChannel(
                "Kraus operators have inconsistent shapes".into(),
            ));
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for a in &kraus {
            sum = sum.add(&a.dagger().matmul(a)?)?;
        }
        let dev = sum.sub(&CMatrix::identity(dim_in))?.max_abs();
        if dev > KRAUS_TOL {
            return Err(Error::InvalidChannel(format!(
                "not trace preserving (deviation {:.3e})",
                dev
            )));
        }
        Ok(KrausChannel {
            kraus,
            dim_in,
            dim_out,
        })
    }

    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        Self::new(vec![u.clone()])
    }

    /// Trace-and-replace channel: every input maps to `sigma`. Kraus set
    /// {√λ_k |v_k⟩⟨j|} over output eigenvectors and input basis states, with
    /// amplitudes rescaled so completeness holds to machine precision.
    pub fn constant_output(sigma: &DensityOperator, dim_in: usize) -> Result<Self> {
        let (vals, vecs) = eig_hermitian(sigma.mat())?;
        let d_out = sigma.dim();
        let total: f64 = vals.iter().map(|&v| v.max(0.0)).sum();
        let mut kraus = Vec::new();
        for (k, &lam) in vals.iter().enumerate() {
            let lam = lam.max(0.0);
            if lam <= 0.0 {
                continue;
            }
            let w = (lam / total).sqrt();
            for j in 0..dim_in {
                let mut a = CMatrix::zeros(d_out, dim_in);
                for i in 0..d_out {
                    a[(i, j)] = vecs[(i, k)] * C64::new(w, 0.0);
                }
                kraus.push(a);
            }
        }
        Self::new(kraus)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn n_kraus(&self) -> usize {
        self.kraus.len()
    }

    /// C[m] = Σ A m A† for an arbitrary square matrix argument.
    pub fn apply_mat(&self, m: &CMatrix) -> Result<CMatrix> {
        if m.rows() != self.dim_in || m.cols() != self.dim_in {
            return Err(Error::DimMismatch {
                expected: self.dim_in,
                got: m.rows(),
            });
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus {
            out = out.add(&a.matmul(m)?.matmul(&a.dagger())?)?;
        }
        Ok(out)
    }

    /// Channel action on a density operator; output declared as a single
    /// subsystem of dimension dim_out.
    pub fn apply_density(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        let mat = self.apply_mat(rho.mat())?;
        DensityOperator::new(mat, vec![self.dim_out])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    energies: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() || energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidHamiltonian(
                "energies must be a nonempty finite list".into(),
            ));
        }
        Ok(HamiltonianSpec { energies })
    }

    pub fn degenerate(dim: usize) -> Self {
        HamiltonianSpec {
            energies: vec![0.0; dim],
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn is_degenerate(&self) -> bool {
        let lo = self.energies.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self
            .energies
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        hi - lo <= DEGENERACY_TOL
    }

    /// Z = Σ 2^(-E_i).
    pub fn partition_function(&self) -> f64 {
        self.energies.iter().map(|&e| 2f64.powf(-e)).sum()
    }

    /// Unnormalized Gibbs operator Γ = diag(2^(-E_i)).
    pub fn gamma(&self) -> CMatrix {
        let diag: Vec<f64> = self.energies.iter().map(|&e| 2f64.powf(-e)).collect();
        CMatrix::from_real_diag(&diag)
    }

    pub fn gibbs_state(&self) -> DensityOperator {
        let z = self.partition_function();
        let diag: Vec<f64> = self.energies.iter().map(|&e| 2f64.powf(-e) / z).collect();
        DensityOperator::from_diag(&diag, vec![self.dim()]).expect("thermal state is valid")
    }

    /// Hamiltonian of the composite system: E_i + F_j with self on the most
    /// significant factor.
    pub fn tensor_sum(&self, other: &HamiltonianSpec) -> HamiltonianSpec {
        let mut energies = Vec::with_capacity(self.dim() * other.dim());
        for &a in &self.energies {
            for &b in &other.energies {
                energies.push(a + b);
            }
        }
        HamiltonianSpec { energies }
    }

    /// Average energy tr[ℋ ρ] in units kT ln 2.
    pub fn mean_energy(&self, rho: &DensityOperator) -> Result<f64> {
        if rho.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        Ok((0..self.dim())
            .map(|i| self.energies[i] * rho.mat()[(i, i)].re)
            .sum())
    }
}

/// Γ restricted to a support: Γ^{1/2} Π Γ^{1/2}. `None` means full support,
/// which gives the plain diagonal Γ.
pub fn gamma_operator(h: &HamiltonianSpec, support: Option<&CMatrix>) -> Result<CMatrix> {
    let gamma = h.gamma();
    match support {
        None => Ok(gamma),
        Some(proj) => {
            if proj.rows() != h.dim() {
                return Err(Error::DimMismatch {
                    expected: h.dim(),
                    got: proj.rows(),
                });
            }
            let half = gamma.hermitian_map(|x| x.sqrt())?;
            half.matmul(proj)?.matmul(&half)
        }
    }
}

/// ‖C[τ_in] − τ_out‖∞ ≤ tol test for the free operations of the theory.
pub fn is_gibbs_preserving(
    c: &KrausChannel,
    h_in: &HamiltonianSpec,
    h_out: &HamiltonianSpec,
    tol: f64,
) -> Result<bool> {
    let image = c.apply_mat(h_in.gibbs_state().mat())?;
    let diff = image.sub(h_out.gibbs_state().mat())?;
    Ok(spectral_norm(&diff)? <= tol)
}

/// Purified channel input with the environment recording the Kraus index:
/// |ψ⟩ = Σ_k (A_k ⊗ 1_R)|ψ_XR⟩ ⊗ |k⟩_E, subsystem order X′, R, E.
pub fn dilation_state(c: &KrausChannel, rho: &DensityOperator) -> Result<PureState> {
    if rho.dim() != c.dim_in() {
        return Err(Error::DimMismatch {
            expected: c.dim_in(),
            got: rho.dim(),
        });
    }
    let psi = rho.purify();
    let dr = psi.dims()[1];
    let (dx, dxp, ne) = (c.dim_in(), c.dim_out(), c.n_kraus());
    let mut amps = vec![C64::new(0.0, 0.0); dxp * dr * ne];
    for (k, a) in c.kraus().iter().enumerate() {
        for xp in 0..dxp {
            for x in 0..dx {
                let w = a[(xp, x)];
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                for r in 0..dr {
                    amps[(xp * dr + r) * ne + k] += w * psi.amps()[x * dr + r];
                }
            }
        }
    }
    // Kraus completeness holds to 1e-9, looser than the pure-state norm
    // tolerance, so renormalize rather than round-trip the drift.
    Ok(PureState::renormalized(amps, vec![dxp, dr, ne]))
}

/// Single-shot cost of a channel in the degenerate regime:
/// log2 ‖C[Π_ρ]‖∞. Negative values are extractable work.
pub fn work_ss_deg(c: &KrausChannel, rho: &DensityOperator) -> Result<f64> {
    if rho.dim() != c.dim_in() {
        return Err(Error::DimMismatch {
            expected: c.dim_in(),
            got: rho.dim(),
        });
    }
    let image = c.apply_mat(&rho.support_projector())?;
    Ok(spectral_norm(&image)?.log2())
}

/// The same cost through the conditional-max-entropy form: H_max of the
/// environment conditioned on the channel output, evaluated on the
/// (X′, E) marginal of the dilation.
pub fn work_ss_cond_hmax(c: &KrausChannel, rho: &DensityOperator) -> Result<f64> {
    let psi = dilation_state(c, rho)?;
    let marginal = psi.marginal(&[0, 2])?;
    cond_h_max(&marginal, 1)
}

/// Fixed-output shortcut, degenerate regime: H_max(in) − H_min(out).
pub fn work_ss_fixed_deg(rho_in: &DensityOperator, rho_out: &DensityOperator) -> f64 {
    h_max(rho_in) - h_min(rho_out)
}

/// Ordinary free energy A(ρ) = tr[ℋρ] − H(ρ), dimensionless.
fn free_energy(rho: &DensityOperator, h: &HamiltonianSpec) -> Result<f64> {
    Ok(h.mean_energy(rho)? - von_neumann(rho))
}

/// Multi-shot (asymptotic per-copy) cost of transforming rho_in into rho_out:
/// the free-energy difference A(out) − A(in). Reduces to H(in) − H(out) for
/// degenerate Hamiltonians.
pub fn work_ms(
    rho_in: &DensityOperator,
    rho_out: &DensityOperator,
    h_in: &HamiltonianSpec,
    h_out: &HamiltonianSpec,
) -> Result<f64> {
    Ok(free_energy(rho_out, h_out)? - free_energy(rho_in, h_in)?)
}

/// (A, A_min, A_max): ordinary free energy bracketed by the single-shot pair.
/// A_min = −log2 tr[Γ restricted to supp ρ]; A_max = log2 ‖Γ^{-1/2} ρ Γ^{-1/2}‖∞.
pub fn free_energy_triple(rho: &DensityOperator, h: &HamiltonianSpec) -> Result<(f64, f64, f64)> {
    if rho.dim() != h.dim() {
        return Err(Error::DimMismatch {
            expected: h.dim(),
            got: rho.dim(),
        });
    }
    let a = free_energy(rho, h)?;
    let z_supp = gamma_operator(h, Some(&rho.support_projector()))?.trace().re;
    let a_min = -z_supp.log2();
    let inv_half = h.gamma().hermitian_map(|x| {
        if x > SUPPORT_TOL {
            x.powf(-0.5)
        } else {
            0.0
        }
    })?;
    let sandwich = inv_half.matmul(rho.mat())?.matmul(&inv_half)?;
    let a_max = spectral_norm(&sandwich)?.log2();
    Ok((a, a_min, a_max))
}

/// Fixed-output shortcut, general Hamiltonians: A_max(out) − A_min(in).
pub fn work_ss_fixed_general(
    rho_in: &DensityOperator,
    rho_out: &DensityOperator,
    h_in: &HamiltonianSpec,
    h_out: &HamiltonianSpec,
) -> Result<f64> {
    let (_, a_min_in, _) = free_energy_triple(rho_in, h_in)?;
    let (_, _, a_max_out) = free_energy_triple(rho_out, h_out)?;
    Ok(a_max_out - a_min_in)
}

/// log2 ‖Γ_out^{-1/2} C[g_in] Γ_out^{-1/2}‖∞ for a given (possibly
/// support-restricted) input Gibbs weight g_in. Γ_out is pseudo-inverted on
/// the support of the weighted image.
pub fn gibbs_weighted_image_norm(
    c: &KrausChannel,
    g_in: &CMatrix,
    h_out: &HamiltonianSpec,
) -> Result<f64> {
    if h_out.dim() != c.dim_out() {
        return Err(Error::DimMismatch {
            expected: c.dim_out(),
            got: h_out.dim(),
        });
    }
    let image = c.apply_mat(g_in)?;
    let inv_half = h_out.gamma().hermitian_map(|x| {
        if x > SUPPORT_TOL {
            x.powf(-0.5)
        } else {
            0.0
        }
    })?;
    let sandwich = inv_half.matmul(&image)?.matmul(&inv_half)?;
    Ok(spectral_norm(&sandwich)?.log2())
}

/// Single-shot cost of a channel between systems with arbitrary diagonal
/// Hamiltonians. Only derived for full-rank inputs; anything rank-deficient
/// is an error, not a silent fallback.
pub fn work_ss_general(
    c: &KrausChannel,
    rho: &DensityOperator,
    h_in: &HamiltonianSpec,
    h_out: &HamiltonianSpec,
) -> Result<f64> {
    if rho.dim() != c.dim_in() || h_in.dim() != c.dim_in() {
        return Err(Error::DimMismatch {
            expected: c.dim_in(),
            got: rho.dim(),
        });
    }
    if rho.rank() < rho.dim() {
        return Err(Error::RankDeficient);
    }
    gibbs_weighted_image_norm(c, &h_in.gamma(), h_out)
}
