use mri_core::estimators::AffineOperator;
use mri_core::testbeds::{helmholtz_1d_fom, random_normal_fom, sort_by_distance, DampedBar, MeromorphicMap, NormalEigenFom};
use mri_core::{CMat, CVec, InnerProduct, Region, SampleSet, C64};

use crate::config::{ExperimentConfig, FomSpec, InnerSpec, ReportPoles, StiffnessSpec};
use crate::container;
use crate::error::{CliError, CliResult};

/// A full-order model resolved from a config.
#[derive(Debug, Clone)]
pub enum Fom {
    Normal(NormalEigenFom),
    Bar(DampedBar),
    Map(MeromorphicMap),
    External { snapshots: CMat, samples: SampleSet, true_poles: Vec<C64> },
}

impl Fom {
    pub fn from_config(cfg: &ExperimentConfig) -> CliResult<Self> {
        Ok(match &cfg.fom {
            FomSpec::NormalEigen { n, bound_box } => Fom::Normal(random_normal_fom(*n, (bound_box[0], bound_box[1]), cfg.seed)?),
            FomSpec::Helmholtz1d { grid_points, eta, rho, stiffness } => {
                let profile = match stiffness {
                    StiffnessSpec::Uniform(k) => vec![*k; grid_points - 1],
                    StiffnessSpec::Profile(p) => p.clone(),
                };
                Fom::Bar(helmholtz_1d_fom(*grid_points, *eta, *rho, &profile).map_err(|e| CliError::config(e.to_string()))?)
            }
            FomSpec::Meromorphic { dim, poles, residues } => {
                let poles: Vec<C64> = poles.iter().map(|&z| z.into()).collect();
                let map = match residues {
                    Some(r) => {
                        let vecs = r.iter().map(|v| CVec::from_iterator(*dim, v.iter().map(|&z| C64::from(z)))).collect();
                        MeromorphicMap::new(poles, vecs)
                    }
                    None => MeromorphicMap::random_orthogonal(poles, *dim, cfg.seed),
                };
                Fom::Map(map.map_err(|e| CliError::config(e.to_string()))?)
            }
            FomSpec::Snapshots { path, nodes, true_poles } => {
                let snapshots = container::read(path)?;
                let nodes: Vec<C64> = nodes.iter().map(|&z| z.into()).collect();
                if snapshots.ncols() != nodes.len() {
                    return Err(CliError::config(format!(
                        "snapshot file has {} columns but {} nodes are listed",
                        snapshots.ncols(),
                        nodes.len()
                    )));
                }
                let samples = SampleSet::new(nodes).map_err(|e| CliError::config(e.to_string()))?;
                Fom::External { snapshots, samples, true_poles: true_poles.iter().map(|&z| z.into()).collect() }
            }
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            Fom::Normal(f) => f.dim(),
            Fom::Bar(b) => b.dim(),
            Fom::Map(m) => m.dim(),
            Fom::External { snapshots, .. } => snapshots.nrows(),
        }
    }

    pub fn solve(&self, mu: C64) -> CliResult<CVec> {
        Ok(match self {
            Fom::Normal(f) => f.solve(mu)?,
            Fom::Bar(b) => b.solve(mu)?,
            Fom::Map(m) => m.eval(mu)?,
            Fom::External { .. } => return Err(CliError::config("snapshot-file problems cannot be solved at new points")),
        })
    }

    /// Snapshots at the given nodes; external problems must match their own node list.
    pub fn snapshots(&self, samples: &SampleSet) -> CliResult<CMat> {
        if let Fom::External { snapshots, samples: own, .. } = self {
            if own.nodes() != samples.nodes() {
                return Err(CliError::config("snapshot-file problems only support their own node list"));
            }
            return Ok(snapshots.clone());
        }
        let cols = samples.nodes().iter().map(|&mu| self.solve(mu)).collect::<CliResult<Vec<_>>>()?;
        Ok(CMat::from_columns(&cols))
    }

    pub fn can_solve(&self) -> bool {
        !matches!(self, Fom::External { .. })
    }

    pub fn true_poles(&self) -> Vec<C64> {
        match self {
            Fom::Normal(f) => f.eigenvalues().to_vec(),
            Fom::Bar(b) => b.resonances(),
            Fom::Map(m) => m.poles().to_vec(),
            Fom::External { true_poles, .. } => true_poles.clone(),
        }
    }

    /// Poles to report, ordered by distance from the region center.
    pub fn reported_poles(&self, region: &Region, which: ReportPoles) -> Vec<C64> {
        let sorted = sort_by_distance(&self.true_poles(), region.center());
        match which {
            ReportPoles::Inside => sorted.into_iter().filter(|&p| region.contains(p)).collect(),
            ReportPoles::Nearest(k) => sorted.into_iter().take(k).collect(),
        }
    }

    pub fn operator(&self) -> Option<AffineOperator> {
        match self {
            Fom::Normal(f) => Some(f.as_affine_operator()),
            Fom::Bar(b) => Some(b.operator().clone()),
            _ => None,
        }
    }

    /// The matrix `A` used by the POD baseline.
    pub fn pod_matrix(&self) -> Option<&CMat> {
        match self {
            Fom::Normal(f) => Some(f.matrix()),
            _ => None,
        }
    }

    pub fn inner(&self, spec: InnerSpec) -> CliResult<InnerProduct> {
        match (spec, self) {
            (InnerSpec::Euclidean, f) => Ok(InnerProduct::euclidean(f.dim())),
            (InnerSpec::Energy, Fom::Bar(b)) => Ok(b.energy_inner()),
            (InnerSpec::Energy, _) => Err(CliError::config("inner = energy needs a helmholtz_1d fom")),
        }
    }
}
