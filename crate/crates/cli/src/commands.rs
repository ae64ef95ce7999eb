use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use mri_core::estimators::{
    calibrate, calibrate_at_median, greedy_refine, residual_direct, residual_separable, CalibratedEstimator,
    GreedyOptions, GreedyStep, LinearEstimator,
};
use mri_core::rational::pole_matching_error;
use mri_core::testbeds::pod_pole_baseline;
use mri_core::{CVec, EvalStatus, InnerProduct, MriConfig, RationalInterpolant, Region, C64};
use rayon::prelude::*;

use crate::artifact::InterpolantArtifact;
use crate::config::{region_grid, ExperimentConfig};
use crate::error::{CliError, CliResult};
use crate::fom::Fom;

pub const SWEEP_HEADER: [&str; 9] =
    ["S", "N", "pole_index", "true_pole_re", "true_pole_im", "pole_error", "sigma_min", "max_rel_err", "wall_ms"];
pub const POD_HEADER: [&str; 6] = ["S", "N", "pole_index", "true_pole_re", "true_pole_im", "pole_error"];
pub const ESTIMATE_HEADER: [&str; 8] =
    ["mu_re", "mu_im", "exact", "separable", "linear", "calibrated", "calibrated_over_exact", "status"];
pub const GREEDY_HEADER: [&str; 6] = ["iteration", "S", "mu_re", "mu_im", "estimator_max", "exact_residual"];

fn num(x: f64) -> String {
    format!("{x}")
}

fn status_name(s: EvalStatus) -> &'static str {
    match s {
        EvalStatus::Regular => "regular",
        EvalStatus::Node(_) => "node",
        EvalStatus::NearPole => "near_pole",
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e.into()))?;
    w.write_record(header).map_err(|e| CliError::io(path, e.into()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::io(path, e.into()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn build_interpolant(cfg: &ExperimentConfig, region: &Region, fom: &Fom, inner: &InnerProduct, s: usize) -> CliResult<RationalInterpolant> {
    let samples = match fom {
        Fom::External { samples, .. } => samples.clone(),
        _ => cfg.nodes(s)?,
    };
    let degree = cfg.degree_for(samples.len())?;
    let snaps = fom.snapshots(&samples)?;
    let mri = MriConfig::new(degree, cfg.basis_for(region, degree)?);
    Ok(RationalInterpolant::build(&snaps, inner, &samples, &mri)?)
}

/// Builds the surrogate from `s` samples in memory.
pub fn build_at(cfg: &ExperimentConfig, s: usize) -> CliResult<RationalInterpolant> {
    let region = cfg.region()?;
    let fom = Fom::from_config(cfg)?;
    let inner = fom.inner(cfg.inner)?;
    build_interpolant(cfg, &region, &fom, &inner, s)
}

/// What `build` produced.
#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub path: PathBuf,
    pub artifact: InterpolantArtifact,
}

/// Builds the surrogate for the largest `S` in the range (or the node list of a
/// snapshot file) and writes `interpolant.json`.
pub fn cmd_build(cfg: &ExperimentConfig) -> CliResult<BuildOutput> {
    let region = cfg.region()?;
    let fom = Fom::from_config(cfg)?;
    let inner = fom.inner(cfg.inner)?;
    if cfg.samples.is_empty() && fom.can_solve() {
        return Err(CliError::config("build needs a nonempty sample range"));
    }
    let r = build_interpolant(cfg, &region, &fom, &inner, cfg.samples.end)?;
    let (path, artifact) = InterpolantArtifact::save(&r, cfg.inner, &cfg.output_dir, "interpolant")?;
    Ok(BuildOutput { path, artifact })
}

pub fn build_summary(out: &BuildOutput) -> String {
    let a = &out.artifact;
    let mut s = format!(
        "wrote {}\nS = {}, N = {}, sigma_min = {:e}, sigma_gap = {:e}\n",
        out.path.display(),
        a.nodes.len(),
        a.degree,
        a.sigma_min,
        a.sigma_gap
    );
    for p in &a.poles {
        s.push_str(&format!("pole {} {:+}i\n", p.0, p.1));
    }
    if a.infinite_poles > 0 {
        s.push_str(&format!("{} pole(s) at infinity\n", a.infinite_poles));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub s: usize,
    pub n: usize,
    pub pole_index: usize,
    pub true_pole: C64,
    pub pole_error: f64,
    pub sigma_min: f64,
    pub max_rel_err: f64,
    pub wall_ms: f64,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.n.to_string(),
            self.pole_index.to_string(),
            num(self.true_pole.re),
            num(self.true_pole.im),
            num(self.pole_error),
            num(self.sigma_min),
            num(self.max_rel_err),
            format!("{:.3}", self.wall_ms),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PodRow {
    pub s: usize,
    pub n: usize,
    pub pole_index: usize,
    pub true_pole: C64,
    pub pole_error: f64,
}

impl PodRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.s.to_string(),
            self.n.to_string(),
            self.pole_index.to_string(),
            num(self.true_pole.re),
            num(self.true_pole.im),
            num(self.pole_error),
        ]
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub pod_rows: Vec<PodRow>,
    /// Sample counts whose build failed.
    pub failed: Vec<usize>,
}

struct EvalSet {
    points: Vec<C64>,
    exact: Vec<CVec>,
    norms: Vec<f64>,
}

fn eval_set(cfg: &ExperimentConfig, region: &Region, fom: &Fom, inner: &InnerProduct) -> CliResult<Option<EvalSet>> {
    if !fom.can_solve() || cfg.eval.points == 0 {
        return Ok(None);
    }
    let poles = fom.true_poles();
    let mut points = Vec::new();
    let mut skip = cfg.eval.skip;
    // draw in batches until enough points clear the poles
    for _ in 0..64 {
        let batch = region.quasi_random_nodes(cfg.eval.points, skip)?;
        skip += cfg.eval.points;
        points.extend(
            batch.nodes().iter().copied().filter(|p| poles.iter().all(|q| (p - q).norm() >= cfg.eval.min_pole_distance)),
        );
        if points.len() >= cfg.eval.points {
            break;
        }
    }
    points.truncate(cfg.eval.points);
    let exact = points.iter().map(|&mu| fom.solve(mu)).collect::<CliResult<Vec<_>>>()?;
    let norms = exact.iter().map(|u| inner.norm(u)).collect::<Result<Vec<_>, _>>()?;
    Ok(Some(EvalSet { points, exact, norms }))
}

fn sweep_one(
    cfg: &ExperimentConfig,
    region: &Region,
    fom: &Fom,
    inner: &InnerProduct,
    reported: &[C64],
    eval: Option<&EvalSet>,
    s: usize,
) -> (Vec<SweepRow>, Vec<PodRow>, bool) {
    let n = cfg.degree.policy().degree_for(s).unwrap_or(0);
    let start = Instant::now();
    let built = build_interpolant(cfg, region, fom, inner, s);
    let (errors, sigma_min, max_rel_err, ok) = match &built {
        Ok(r) => {
            let approx = r.poles().map(|p| p.finite).unwrap_or_default();
            let errors = pole_matching_error(reported, &approx).unwrap_or_else(|_| vec![f64::NAN; reported.len()]);
            let max_rel = match eval {
                Some(e) => e
                    .points
                    .iter()
                    .zip(&e.exact)
                    .zip(&e.norms)
                    .map(|((&mu, u), &nu)| inner.norm(&(r.evaluate(mu).value - u)).map(|d| d / nu).unwrap_or(f64::NAN))
                    .fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) }),
                None => f64::NAN,
            };
            (errors, r.sigma_min(), max_rel, true)
        }
        Err(_) => (vec![f64::NAN; reported.len()], f64::NAN, f64::NAN, false),
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let rows = reported
        .iter()
        .zip(&errors)
        .enumerate()
        .map(|(k, (&p, &e))| SweepRow { s, n, pole_index: k, true_pole: p, pole_error: e, sigma_min, max_rel_err, wall_ms })
        .collect();
    let mut pod_rows = Vec::new();
    if let (true, Some(a), Ok(r)) = (cfg.pod, fom.pod_matrix(), &built) {
        let ritz = if n == 0 { Err(mri_core::Error::InvalidArgument("POD dimension must be positive")) } else { pod_pole_baseline(r.snapshots(), inner, a, n) };
        let errs = ritz
            .ok()
            .and_then(|p| pole_matching_error(reported, &p).ok())
            .unwrap_or_else(|| vec![f64::NAN; reported.len()]);
        pod_rows = reported
            .iter()
            .zip(errs)
            .enumerate()
            .map(|(k, (&p, e))| PodRow { s, n, pole_index: k, true_pole: p, pole_error: e })
            .collect();
    }
    (rows, pod_rows, ok)
}

/// Pole errors and surrogate errors over the sample range, computed in memory.
pub fn run_sweep(cfg: &ExperimentConfig) -> CliResult<SweepOutput> {
    let region = cfg.region()?;
    let fom = Fom::from_config(cfg)?;
    let inner = fom.inner(cfg.inner)?;
    let sizes: Vec<usize> = match &fom {
        Fom::External { samples, .. } => cfg.samples.iter().filter(|&s| s == samples.len()).collect(),
        _ => cfg.samples.iter().collect(),
    };
    if cfg.pod && fom.pod_matrix().is_none() {
        return Err(CliError::config("pod = true needs a normal_eigen fom"));
    }
    let reported = fom.reported_poles(&region, cfg.report_poles);
    let eval = eval_set(cfg, &region, &fom, &inner)?;
    let results: Vec<_> = sizes
        .par_iter()
        .map(|&s| (s, sweep_one(cfg, &region, &fom, &inner, &reported, eval.as_ref(), s)))
        .collect();
    let mut out = SweepOutput::default();
    for (s, (rows, pod, ok)) in results {
        out.rows.extend(rows);
        out.pod_rows.extend(pod);
        if !ok {
            out.failed.push(s);
        }
    }
    out.rows.sort_by_key(|r| (r.s, r.pole_index));
    out.pod_rows.sort_by_key(|r| (r.s, r.pole_index));
    out.failed.sort_unstable();
    if !sizes.is_empty() && out.failed.len() == sizes.len() {
        return Err(CliError::NumericMsg("every surrogate build in the sweep failed".into()));
    }
    Ok(out)
}

/// Runs the sweep and writes `sweep.csv` (plus `sweep_pod.csv` and `sweep.gp` when requested).
pub fn cmd_sweep(cfg: &ExperimentConfig) -> CliResult<(PathBuf, SweepOutput)> {
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("sweep.csv");
    let out = match run_sweep(cfg) {
        Ok(out) => out,
        Err(e) => {
            if matches!(e, CliError::NumericMsg(_)) {
                write_csv(&path, &SWEEP_HEADER, Vec::new())?;
            }
            return Err(e);
        }
    };
    write_csv(&path, &SWEEP_HEADER, out.rows.iter().map(SweepRow::record))?;
    if cfg.pod {
        write_csv(&cfg.output_dir.join("sweep_pod.csv"), &POD_HEADER, out.pod_rows.iter().map(PodRow::record))?;
    }
    if cfg.plot {
        let count = out.rows.iter().map(|r| r.pole_index + 1).max().unwrap_or(0);
        let gp = cfg.output_dir.join("sweep.gp");
        fs::write(&gp, gnuplot_script(count, cfg.pod)).map_err(|e| CliError::io(&gp, e))?;
    }
    Ok((path, out))
}

fn gnuplot_script(poles: usize, pod: bool) -> String {
    let mut s = String::from(
        "set datafile separator ','\nset logscale y\nset format y '10^{%L}'\nset xlabel 'S'\nset ylabel 'pole error'\nset key outside\n",
    );
    if poles == 0 {
        s.push_str("# no poles to plot\n");
        return s;
    }
    s.push_str(&format!(
        "plot for [k=0:{}] 'sweep.csv' every ::1 using ($3==k ? $1 : 1/0):6 with linespoints title sprintf('MRI pole %d', k)",
        poles - 1
    ));
    if pod {
        s.push_str(&format!(
            ", \\\n     for [k=0:{}] 'sweep_pod.csv' every ::1 using ($3==k ? $1 : 1/0):6 with points title sprintf('POD pole %d', k)",
            poles - 1
        ));
    }
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub mu: C64,
    pub exact: f64,
    pub separable: f64,
    pub linear: f64,
    pub calibrated: f64,
    pub status: EvalStatus,
}

impl EstimateRow {
    /// `calibrated / exact`; NaN at nodes, where both vanish up to rounding.
    pub fn ratio(&self) -> f64 {
        match self.status {
            EvalStatus::Node(_) => f64::NAN,
            _ => self.calibrated / self.exact,
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            num(self.mu.re),
            num(self.mu.im),
            num(self.exact),
            num(self.separable),
            num(self.linear),
            num(self.calibrated),
            num(self.ratio()),
            status_name(self.status).to_string(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct EstimateOutput {
    pub rows: Vec<EstimateRow>,
    pub calibration_point: C64,
    pub calibration_constant: f64,
}

/// Residuals and estimators of an interpolant over a grid.
pub fn run_estimate(cfg: &ExperimentConfig, r: &RationalInterpolant, grid: &[C64]) -> CliResult<EstimateOutput> {
    let fom = Fom::from_config(cfg)?;
    let op = fom.operator().ok_or_else(|| CliError::config("estimate needs a normal_eigen or helmholtz_1d fom"))?;
    let inner = fom.inner(cfg.inner)?;
    if r.snapshots().nrows() != fom.dim() {
        return Err(CliError::config("interpolant dimension does not match the fom"));
    }
    let (mu_c, cal) = match cfg.estimate.calibration {
        Some(p) => {
            let mu: C64 = p.into();
            let constant = calibrate(&op, r, mu, &inner)?;
            (mu, CalibratedEstimator::with_constant(r, constant))
        }
        None => calibrate_at_median(&op, r, grid, &inner)?,
    };
    let linear = LinearEstimator::new(&op, r, &inner).ok();
    let rows = grid
        .par_iter()
        .map(|&mu| {
            let d = residual_direct(&op, r, mu, &inner)?;
            let s = residual_separable(&op, r, mu, &inner)?;
            Ok(EstimateRow {
                mu,
                exact: d.norm,
                separable: s.norm,
                linear: linear.as_ref().map_or(f64::NAN, |e| e.estimate(mu).norm),
                calibrated: cal.estimate(mu).norm,
                status: d.status,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EstimateOutput { rows, calibration_point: mu_c, calibration_constant: cal.constant() })
}

/// Reads an interpolant file, evaluates residuals on the estimate grid, writes `estimate.csv`.
pub fn cmd_estimate(cfg: &ExperimentConfig, interpolant: &Path) -> CliResult<(PathBuf, EstimateOutput)> {
    let fom = Fom::from_config(cfg)?;
    let inner = fom.inner(cfg.inner)?;
    let art = InterpolantArtifact::load(interpolant)?;
    let r = art.restore(interpolant, &inner)?;
    let grid = region_grid(&cfg.region()?, cfg.estimate.grid);
    let out = run_estimate(cfg, &r, &grid)?;
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("estimate.csv");
    write_csv(&path, &ESTIMATE_HEADER, out.rows.iter().map(EstimateRow::record))?;
    Ok((path, out))
}

#[derive(Debug, Clone)]
pub struct GreedyRun {
    pub history: Vec<GreedyStep>,
    pub converged: bool,
    pub interpolant: RationalInterpolant,
}

pub fn run_greedy(cfg: &ExperimentConfig, tol: f64) -> CliResult<GreedyRun> {
    if !(tol > 0.0) {
        return Err(CliError::config("tol must be positive"));
    }
    let region = cfg.region()?;
    let fom = Fom::from_config(cfg)?;
    let op = fom.operator().ok_or_else(|| CliError::config("greedy needs a normal_eigen or helmholtz_1d fom"))?;
    let inner = fom.inner(cfg.inner)?;
    let g = cfg.greedy;
    if g.initial_samples == 0 || g.max_samples < g.initial_samples {
        return Err(CliError::config("greedy needs 1 <= initial_samples <= max_samples"));
    }
    let policy = cfg.degree.policy();
    policy.degree_for(g.initial_samples).map_err(|e| CliError::config(e.to_string()))?;
    let initial = cfg.nodes(g.initial_samples)?;
    let candidates = region_grid(&region, g.candidates);
    let options = GreedyOptions { tol, max_samples: g.max_samples, degree: policy, basis: cfg.basis_for(&region, 0)? };
    let out = greedy_refine(&op, |mu| fom.solve(mu).map_err(|_| mri_core::Error::SingularSystem), &inner, &inner, &initial, &candidates, &options)?;
    Ok(GreedyRun { history: out.history, converged: out.converged, interpolant: out.interpolant })
}

/// Writes `greedy_history.csv` and `greedy_interpolant.json`; a spent budget is
/// reported after both files are written.
pub fn cmd_greedy(cfg: &ExperimentConfig, tol: f64) -> CliResult<(PathBuf, GreedyRun)> {
    let run = run_greedy(cfg, tol)?;
    ensure_dir(&cfg.output_dir)?;
    let path = cfg.output_dir.join("greedy_history.csv");
    let rows = run.history.iter().enumerate().map(|(i, h)| {
        vec![i.to_string(), h.samples.to_string(), num(h.argmax.re), num(h.argmax.im), num(h.estimator_max), num(h.exact_residual)]
    });
    write_csv(&path, &GREEDY_HEADER, rows)?;
    InterpolantArtifact::save(&run.interpolant, cfg.inner, &cfg.output_dir, "greedy_interpolant")?;
    if !run.converged {
        return Err(CliError::BudgetExhausted);
    }
    Ok((path, run))
}

/// Writes `nodes.csv` with the sample points of every `S` in the range.
pub fn cmd_nodes(cfg: &ExperimentConfig) -> CliResult<PathBuf> {
    ensure_dir(&cfg.output_dir)?;
    let mut rows = Vec::new();
    for s in cfg.samples.iter() {
        let set = cfg.nodes(s)?;
        for (k, z) in set.nodes().iter().enumerate() {
            rows.push(vec![s.to_string(), k.to_string(), num(z.re), num(z.im)]);
        }
    }
    let path = cfg.output_dir.join("nodes.csv");
    write_csv(&path, &["S", "index", "re", "im"], rows)?;
    Ok(path)
}
