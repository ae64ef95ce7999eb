//! Interpolant files: a JSON document plus the node snapshots in the binary container.

use std::fs;
use std::path::{Path, PathBuf};

use mri_core::{BasisKind, InnerProduct, PolyBasis, PolyCoeffs, RationalInterpolant, SampleSet, C64};
use serde::{Deserialize, Serialize};

use crate::config::{Cplx, InnerSpec};
use crate::container;
use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "mri-interpolant/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisRecord {
    Monomial { center: Cplx },
    Chebyshev { a: Cplx, b: Cplx },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolantArtifact {
    pub format: String,
    pub dim: usize,
    pub degree: usize,
    pub basis: BasisRecord,
    pub inner: InnerSpec,
    /// Denominator coefficients in the basis.
    pub denominator: Vec<Cplx>,
    pub nodes: Vec<Cplx>,
    /// Snapshot file, relative to the JSON file.
    pub snapshots: PathBuf,
    pub sigma_min: f64,
    pub sigma_gap: f64,
    pub poles: Vec<Cplx>,
    pub infinite_poles: usize,
}

impl InterpolantArtifact {
    pub fn from_interpolant(r: &RationalInterpolant, inner: InnerSpec, snapshots: PathBuf) -> CliResult<Self> {
        let basis = match r.denominator().basis().kind() {
            BasisKind::ShiftedMonomial { center } => BasisRecord::Monomial { center: center.into() },
            BasisKind::Chebyshev { a, b } => BasisRecord::Chebyshev { a: a.into(), b: b.into() },
        };
        let roots = r.poles()?;
        Ok(InterpolantArtifact {
            format: FORMAT.to_string(),
            dim: r.snapshots().nrows(),
            degree: r.degree(),
            basis,
            inner,
            denominator: r.denominator().coeffs().iter().map(|&z| z.into()).collect(),
            nodes: r.samples().nodes().iter().map(|&z| z.into()).collect(),
            snapshots,
            sigma_min: r.sigma_min(),
            sigma_gap: r.sigma_gap(),
            poles: roots.finite.iter().map(|&z| z.into()).collect(),
            infinite_poles: roots.infinite,
        })
    }

    /// Writes `<dir>/<stem>.json` and `<dir>/<stem>.snapshots.bin`.
    pub fn save(r: &RationalInterpolant, inner: InnerSpec, dir: &Path, stem: &str) -> CliResult<(PathBuf, Self)> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let snap_name = PathBuf::from(format!("{stem}.snapshots.bin"));
        container::write(&dir.join(&snap_name), r.snapshots())?;
        let art = Self::from_interpolant(r, inner, snap_name)?;
        let path = dir.join(format!("{stem}.json"));
        let text = serde_json::to_string_pretty(&art).expect("artifact is serializable");
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        Ok((path, art))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let art: Self = serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if art.format != FORMAT {
            return Err(CliError::config(format!("{}: unknown format {:?}", path.display(), art.format)));
        }
        Ok(art)
    }

    /// Rebuilds the interpolant, reading snapshots relative to `json_path`.
    pub fn restore(&self, json_path: &Path, inner: &InnerProduct) -> CliResult<RationalInterpolant> {
        let base = json_path.parent().unwrap_or(Path::new("."));
        let snaps = container::read(&base.join(&self.snapshots))?;
        if snaps.nrows() != self.dim || snaps.ncols() != self.nodes.len() {
            return Err(CliError::config("snapshot file does not match the interpolant"));
        }
        let basis = match self.basis {
            BasisRecord::Monomial { center } => PolyBasis::monomial(center.into(), self.degree),
            BasisRecord::Chebyshev { a, b } => {
                PolyBasis::chebyshev(a.into(), b.into(), self.degree).map_err(|e| CliError::config(e.to_string()))?
            }
        };
        let coeffs: Vec<C64> = self.denominator.iter().map(|&z| z.into()).collect();
        let q = PolyCoeffs::new(basis, coeffs).map_err(|e| CliError::config(e.to_string()))?;
        let samples = SampleSet::new(self.nodes.iter().map(|&z| z.into()).collect()).map_err(|e| CliError::config(e.to_string()))?;
        Ok(RationalInterpolant::with_denominator(&snaps, inner, &samples, q)?)
    }
}
