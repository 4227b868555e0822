//! JSON file formats for states, channels, Hamiltonians and protocol specs.
//! Matrices are stored row-major as parallel re/im arrays; paths inside a
//! protocol file resolve relative to the file itself.

use crate::channel::{HamiltonianSpec, KrausChannel};
use crate::protocol::{ProbeFamily, ProtocolSpec};
use crate::qmat::{CMatrix, DensityOperator, C64};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct KrausEntryFile {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<KrausEntryFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub energies: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ProbeFile {
    BlochPhase { r: f64, theta: f64 },
    Constant { state: String },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProtocolFile {
    pub h_s: String,
    pub h_m: String,
    pub probe: ProbeFile,
    pub memory_init: String,
    pub correlating_unitary: String,
}

fn parse_err(path: &Path, err: serde_json::Error) -> Error {
    Error::Parse(format!("{}: {}", path.display(), err))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

/// Writes through a temp file in the same directory so readers never see a
/// half-written artifact.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let mut tmp = PathBuf::from(dir);
    tmp.push(format!(
        ".{}.tmp",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn matrix_from_parts(dims: Vec<usize>, re: &[f64], im: &[f64], path: &Path) -> Result<(CMatrix, Vec<usize>)> {
    let d: usize = dims.iter().product();
    if dims.is_empty() || d == 0 {
        return Err(Error::Parse(format!("{}: empty dims", path.display())));
    }
    if re.len() != d * d || im.len() != d * d {
        return Err(Error::Parse(format!(
            "{}: expected {} entries for dims {:?}, got {}/{}",
            path.display(),
            d * d,
            dims,
            re.len(),
            im.len()
        )));
    }
    let mat = CMatrix::from_fn(d, d, |i, j| C64::new(re[i * d + j], im[i * d + j]));
    Ok((mat, dims))
}

pub fn read_matrix(path: &Path) -> Result<(CMatrix, Vec<usize>)> {
    let file: MatrixFile = read_json(path)?;
    matrix_from_parts(file.dims, &file.re, &file.im, path)
}

pub fn read_state(path: &Path) -> Result<DensityOperator> {
    let (mat, dims) = read_matrix(path)?;
    DensityOperator::new(mat, dims)
}

fn matrix_to_file(mat: &CMatrix, dims: Vec<usize>) -> MatrixFile {
    let d = mat.rows();
    let mut re = Vec::with_capacity(d * d);
    let mut im = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            re.push(mat[(i, j)].re);
            im.push(mat[(i, j)].im);
        }
    }
    MatrixFile { dims, re, im }
}

pub fn write_state(path: &Path, rho: &DensityOperator) -> Result<()> {
    let file = matrix_to_file(rho.mat(), rho.dims().to_vec());
    let text = serde_json::to_string_pretty(&file).map_err(|e| parse_err(path, e))?;
    atomic_write(path, &text)
}

pub fn write_matrix(path: &Path, mat: &CMatrix, dims: Vec<usize>) -> Result<()> {
    let file = matrix_to_file(mat, dims);
    let text = serde_json::to_string_pretty(&file).map_err(|e| parse_err(path, e))?;
    atomic_write(path, &text)
}

pub fn read_channel(path: &Path) -> Result<KrausChannel> {
    let file: ChannelFile = read_json(path)?;
    let mut kraus = Vec::with_capacity(file.kraus.len());
    for (idx, entry) in file.kraus.iter().enumerate() {
        let n = file.dim_out * file.dim_in;
        if entry.re.len() != n || entry.im.len() != n {
            return Err(Error::Parse(format!(
                "{}: kraus[{}] expected {} entries, got {}/{}",
                path.display(),
                idx,
                n,
                entry.re.len(),
                entry.im.len()
            )));
        }
        kraus.push(CMatrix::from_fn(file.dim_out, file.dim_in, |i, j| {
            C64::new(entry.re[i * file.dim_in + j], entry.im[i * file.dim_in + j])
        }));
    }
    KrausChannel::new(kraus)
}

pub fn write_channel(path: &Path, chan: &KrausChannel) -> Result<()> {
    let kraus = chan
        .kraus()
        .iter()
        .map(|a| {
            let mut re = Vec::with_capacity(chan.dim_out() * chan.dim_in());
            let mut im = Vec::with_capacity(chan.dim_out() * chan.dim_in());
            for i in 0..chan.dim_out() {
                for j in 0..chan.dim_in() {
                    re.push(a[(i, j)].re);
                    im.push(a[(i, j)].im);
                }
            }
            KrausEntryFile { re, im }
        })
        .collect();
    let file = ChannelFile {
        dim_in: chan.dim_in(),
        dim_out: chan.dim_out(),
        kraus,
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| parse_err(path, e))?;
    atomic_write(path, &text)
}

pub fn read_hamiltonian(path: &Path) -> Result<HamiltonianSpec> {
    let file: HamiltonianFile = read_json(path)?;
    HamiltonianSpec::new(file.energies)
}

pub fn write_hamiltonian(path: &Path, h: &HamiltonianSpec) -> Result<()> {
    let file = HamiltonianFile {
        energies: h.energies().to_vec(),
    };
    let text = serde_json::to_string_pretty(&file).map_err(|e| parse_err(path, e))?;
    atomic_write(path, &text)
}

pub fn read_protocol(path: &Path) -> Result<ProtocolSpec> {
    let file: ProtocolFile = read_json(path)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &str| -> PathBuf {
        let pb = PathBuf::from(p);
        if pb.is_absolute() {
            pb
        } else {
            dir.join(pb)
        }
    };
    let h_s = read_hamiltonian(&resolve(&file.h_s))?;
    let h_m = read_hamiltonian(&resolve(&file.h_m))?;
    let probe = match &file.probe {
        ProbeFile::BlochPhase { r, theta } => ProbeFamily::BlochPhase {
            r: *r,
            theta: *theta,
        },
        ProbeFile::Constant { state } => ProbeFamily::Constant(read_state(&resolve(state))?),
    };
    let memory_init = read_state(&resolve(&file.memory_init))?;
    let (unitary, _) = read_matrix(&resolve(&file.correlating_unitary))?;
    ProtocolSpec::new(h_s, h_m, probe, memory_init, unitary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn state_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = crate::sample::random_density(4, &mut rng);
        let rho = DensityOperator::new(rho.mat().clone(), vec![2, 2]).unwrap();
        write_state(&path, &rho).unwrap();
        let back = read_state(&path).unwrap();
        assert_eq!(back.dims(), rho.dims());
        assert!(back.mat().approx_eq(rho.mat(), 1e-15));
    }

    #[test]
    fn channel_roundtrip_preserves_action() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("chan.json");
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let chan = crate::sample::random_channel(2, 3, 2, &mut rng);
        write_channel(&path, &chan).unwrap();
        let back = read_channel(&path).unwrap();
        let rho = crate::sample::random_density(2, &mut rng);
        let a = chan.apply_mat(rho.mat()).unwrap();
        let b = back.apply_mat(rho.mat()).unwrap();
        assert!(a.approx_eq(&b, 1e-15));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{ not json").unwrap();
        assert!(matches!(read_state(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn wrong_entry_count_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.json");
        std::fs::write(
            &path,
            r#"{"dims": [2], "re": [1.0, 0.0], "im": [0.0, 0.0]}"#,
        )
        .unwrap();
        assert!(matches!(read_state(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn protocol_file_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        write_hamiltonian(
            &dir.path().join("hs.json"),
            &HamiltonianSpec::new(vec![0.0, 1.0]).unwrap(),
        )
        .unwrap();
        write_hamiltonian(
            &dir.path().join("hm.json"),
            &HamiltonianSpec::degenerate(2),
        )
        .unwrap();
        let mem = DensityOperator::from_diag(&[0.8, 0.2], vec![2]).unwrap();
        write_state(&dir.path().join("mem.json"), &mem).unwrap();
        let u = crate::phasequbit::correlating_unitary(0.4);
        write_matrix(&dir.path().join("u.json"), &u, vec![2, 2]).unwrap();
        let spec_text = r#"{
            "h_s": "hs.json",
            "h_m": "hm.json",
            "probe": {"name": "bloch_phase", "r": 0.7, "theta": 1.2},
            "memory_init": "mem.json",
            "correlating_unitary": "u.json"
        }"#;
        let path = dir.path().join("protocol.json");
        std::fs::write(&path, spec_text).unwrap();
        let spec = read_protocol(&path).unwrap();
        assert_eq!(spec.dim_s(), 2);
        assert_eq!(spec.dim_m(), 2);
        assert!(spec.correlating_unitary().approx_eq(&u, 1e-15));
        let report = spec
            .work_report(0.3, crate::protocol::Regime::MultiShot)
            .unwrap();
        assert!(report.w_total.abs() < 1e-9);
    }
}
