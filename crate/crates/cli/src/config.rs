//! JSON experiment description.
//!
//! Complex numbers are written as `[re, im]`. A minimal config:
//!
//! ```json
//! {
//!   "fom": { "kind": "normal_eigen", "n": 100 },
//!   "region": { "kind": "disk", "center": [0, 0], "radius": 1 },
//!   "samples": { "start": 11, "end": 30 },
//!   "degree": { "fixed": 10 },
//!   "seed": 1
//! }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use mri_core::{DegreePolicy, PolyBasis, Region, SampleSet, C64};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cplx(pub f64, pub f64);

impl From<Cplx> for C64 {
    fn from(z: Cplx) -> C64 {
        C64::new(z.0, z.1)
    }
}

impl From<C64> for Cplx {
    fn from(z: C64) -> Cplx {
        Cplx(z.re, z.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub fom: FomSpec,
    pub region: RegionSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
    pub samples: SampleRange,
    pub degree: DegreeSpec,
    #[serde(default)]
    pub basis: BasisSpec,
    #[serde(default)]
    pub inner: InnerSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub report_poles: ReportPoles,
    #[serde(default)]
    pub eval: EvalSpec,
    /// Also write POD-baseline pole errors (normal-eigen problems only).
    #[serde(default)]
    pub pod: bool,
    /// Also write a gnuplot script next to the sweep CSV.
    #[serde(default)]
    pub plot: bool,
    #[serde(default)]
    pub estimate: EstimateSpec,
    #[serde(default)]
    pub greedy: GreedySpec,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FomSpec {
    /// `(A − μI) u = v`, `A` normal with eigenvalues uniform in `[lo, hi]²`.
    NormalEigen {
        n: usize,
        #[serde(default = "default_box")]
        bound_box: [f64; 2],
    },
    /// Damped elastic bar, parameter `ν`.
    #[serde(rename = "helmholtz_1d")]
    Helmholtz1d {
        grid_points: usize,
        eta: f64,
        #[serde(default = "one")]
        rho: f64,
        stiffness: StiffnessSpec,
    },
    /// `Σ v_λ/(λ − μ)`; residues random orthogonal from the seed unless given.
    Meromorphic {
        dim: usize,
        poles: Vec<Cplx>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        residues: Option<Vec<Vec<Cplx>>>,
    },
    /// Snapshots computed elsewhere, in the binary container format.
    Snapshots {
        path: PathBuf,
        nodes: Vec<Cplx>,
        #[serde(default)]
        true_poles: Vec<Cplx>,
    },
}

fn default_box() -> [f64; 2] {
    [-5.0, 5.0]
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StiffnessSpec {
    Uniform(f64),
    /// One value per element.
    Profile(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Disk {
        #[serde(default = "origin")]
        center: Cplx,
        radius: f64,
    },
    Segment {
        a: Cplx,
        b: Cplx,
    },
}

fn origin() -> Cplx {
    Cplx(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SamplingSpec {
    #[default]
    Fejer,
    QuasiRandom {
        #[serde(default)]
        skip: usize,
    },
}

/// Inclusive range of sample counts; empty when `start > end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRange {
    pub start: usize,
    pub end: usize,
}

impl SampleRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }

    pub fn is_empty(&self) -> bool {
        self.start > self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeSpec {
    Fixed(usize),
    /// `N = S − 1`.
    Diagonal,
}

impl DegreeSpec {
    pub fn policy(&self) -> DegreePolicy {
        match *self {
            DegreeSpec::Fixed(n) => DegreePolicy::Fixed(n),
            DegreeSpec::Diagonal => DegreePolicy::Diagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisSpec {
    /// Monomials centered at the region center.
    #[default]
    Monomial,
    /// Chebyshev polynomials on the segment (segment regions only).
    Chebyshev,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSpec {
    #[default]
    Euclidean,
    /// Stiffness-weighted product (bar problems only).
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportPoles {
    /// True poles inside the region.
    #[default]
    Inside,
    /// The `k` true poles closest to the region center.
    Nearest(usize),
}

/// Test points for the relative error column: quasi-random points in the region,
/// dropping those closer than `min_pole_distance` to a true pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSpec {
    pub points: usize,
    pub min_pole_distance: f64,
    pub skip: usize,
}

impl Default for EvalSpec {
    fn default() -> Self {
        EvalSpec { points: 50, min_pole_distance: 0.1, skip: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSpec {
    /// Number of grid points (evenly spaced on a segment, a square grid clipped to a disk).
    pub grid: usize,
    /// Calibration point; by default the grid point with median `|ω/Q|`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Cplx>,
}

impl Default for EstimateSpec {
    fn default() -> Self {
        EstimateSpec { grid: 201, calibration: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreedySpec {
    pub tol: f64,
    pub initial_samples: usize,
    pub max_samples: usize,
    /// Candidate grid resolution, same layout as the estimate grid.
    pub candidates: usize,
}

impl Default for GreedySpec {
    fn default() -> Self {
        GreedySpec { tol: 1e-6, initial_samples: 6, max_samples: 40, candidates: 41 }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is serializable")
    }

    pub fn validate(&self) -> CliResult<()> {
        let region = self.region()?;
        if !self.samples.is_empty() {
            if self.samples.start == 0 {
                return Err(CliError::config("samples.start must be at least 1"));
            }
            if let DegreeSpec::Fixed(n) = self.degree {
                if n + 1 > self.samples.start {
                    return Err(CliError::config(format!(
                        "denominator degree N = {n} violates N <= S - 1 with S = {}",
                        self.samples.start
                    )));
                }
            }
        }
        self.basis_for(&region, 0)?;
        match &self.fom {
            FomSpec::NormalEigen { n, bound_box } => {
                if *n == 0 {
                    return Err(CliError::config("fom.n must be at least 1"));
                }
                if !(bound_box[0] < bound_box[1]) {
                    return Err(CliError::config("fom.bound_box must satisfy lo < hi"));
                }
            }
            FomSpec::Helmholtz1d { grid_points, rho, stiffness, .. } => {
                if *grid_points < 3 {
                    return Err(CliError::config("fom.grid_points must be at least 3"));
                }
                if !(*rho > 0.0) {
                    return Err(CliError::config("fom.rho must be positive"));
                }
                if let StiffnessSpec::Profile(p) = stiffness {
                    if p.len() != grid_points - 1 {
                        return Err(CliError::config(format!(
                            "fom.stiffness needs {} values (one per element), got {}",
                            grid_points - 1,
                            p.len()
                        )));
                    }
                }
            }
            FomSpec::Meromorphic { dim, poles, residues } => {
                if poles.is_empty() || *dim == 0 {
                    return Err(CliError::config("meromorphic fom needs poles and dim >= 1"));
                }
                match residues {
                    Some(r) if r.len() != poles.len() || r.iter().any(|v| v.len() != *dim) => {
                        return Err(CliError::config("fom.residues must hold one vector of length dim per pole"));
                    }
                    None if poles.len() > *dim => {
                        return Err(CliError::config("random orthogonal residues need dim >= number of poles"));
                    }
                    _ => {}
                }
            }
            FomSpec::Snapshots { nodes, .. } => {
                if nodes.is_empty() {
                    return Err(CliError::config("fom.nodes must not be empty"));
                }
            }
        }
        if self.inner == InnerSpec::Energy && !matches!(self.fom, FomSpec::Helmholtz1d { .. }) {
            return Err(CliError::config("inner = energy needs a helmholtz_1d fom"));
        }
        if self.eval.min_pole_distance < 0.0 {
            return Err(CliError::config("eval.min_pole_distance must be nonnegative"));
        }
        Ok(())
    }

    pub fn region(&self) -> CliResult<Region> {
        let r = match self.region {
            RegionSpec::Disk { center, radius } => Region::disk(center.into(), radius),
            RegionSpec::Segment { a, b } => Region::segment(a.into(), b.into()),
        };
        r.map_err(|e| CliError::config(format!("region: {e}")))
    }

    pub fn basis_for(&self, region: &Region, degree: usize) -> CliResult<PolyBasis> {
        match (self.basis, *region) {
            (BasisSpec::Monomial, r) => Ok(PolyBasis::monomial(r.center(), degree)),
            (BasisSpec::Chebyshev, Region::Segment { a, b }) => {
                PolyBasis::chebyshev(a, b, degree).map_err(|e| CliError::config(e.to_string()))
            }
            (BasisSpec::Chebyshev, Region::Disk { .. }) => Err(CliError::config("basis = chebyshev needs a segment region")),
        }
    }

    /// Sample nodes for `count` samples under the configured strategy.
    pub fn nodes(&self, count: usize) -> CliResult<SampleSet> {
        let region = self.region()?;
        let out = match self.sampling {
            SamplingSpec::Fejer => region.fejer_nodes(count),
            SamplingSpec::QuasiRandom { skip } => region.quasi_random_nodes(count, skip),
        };
        Ok(out?)
    }

    pub fn degree_for(&self, samples: usize) -> CliResult<usize> {
        self.degree.policy().degree_for(samples).map_err(|e| CliError::config(e.to_string()))
    }
}

/// Evenly spaced points on a segment, or a square grid clipped to a disk.
pub fn region_grid(region: &Region, count: usize) -> Vec<C64> {
    match *region {
        Region::Segment { a, b } => match count {
            0 => Vec::new(),
            1 => vec![(a + b) * 0.5],
            _ => (0..count).map(|k| a + (b - a) * (k as f64 / (count - 1) as f64)).collect(),
        },
        Region::Disk { center, radius } => {
            if count < 2 {
                return vec![center];
            }
            let h = 2.0 * radius / (count - 1) as f64;
            let mut out = Vec::new();
            for i in 0..count {
                for k in 0..count {
                    let z = C64::new(-radius + h * i as f64, -radius + h * k as f64);
                    if z.norm() <= radius * (1.0 + 1e-12) {
                        out.push(center + z);
                    }
                }
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "fom": { "kind": "normal_eigen", "n": 100 },
        "region": { "kind": "disk", "center": [0, 0], "radius": 1 },
        "samples": { "start": 11, "end": 30 },
        "degree": { "fixed": 10 },
        "seed": 1
    }"#;

    #[test]
    fn parses_minimal_config_with_defaults() {
        let cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        assert_eq!(cfg.fom, FomSpec::NormalEigen { n: 100, bound_box: [-5.0, 5.0] });
        assert_eq!(cfg.sampling, SamplingSpec::Fejer);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
        assert_eq!(cfg.eval, EvalSpec::default());
    }

    #[test]
    fn round_trips() {
        let cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_degree_above_samples() {
        let bad = SAMPLE.replace(r#""start": 11"#, r#""start": 5"#);
        let err = ExperimentConfig::from_json(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("N <= S - 1"));
    }

    #[test]
    fn rejects_unknown_fields_and_bad_basis() {
        let bad = SAMPLE.replace(r#""seed": 1"#, r#""seed": 1, "sed": 2"#);
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let cheb = SAMPLE.replace(r#""seed": 1"#, r#""seed": 1, "basis": "chebyshev""#);
        assert!(ExperimentConfig::from_json(&cheb).is_err());
    }

    #[test]
    fn empty_range_is_valid() {
        let cfg = ExperimentConfig::from_json(&SAMPLE.replace(r#""end": 30"#, r#""end": 3"#)).unwrap();
        assert!(cfg.samples.is_empty());
        assert_eq!(cfg.samples.iter().count(), 0);
    }

    #[test]
    fn grids() {
        let seg = Region::segment(C64::new(0.0, 0.0), C64::new(2.0, 0.0)).unwrap();
        let g = region_grid(&seg, 5);
        assert_eq!(g[2], C64::new(1.0, 0.0));
        let disk = Region::unit_disk();
        assert!(region_grid(&disk, 11).iter().all(|z| z.norm() <= 1.0 + 1e-12));
    }
}
