//! Residual-driven adaptive sampling.

use super::{calibrate_at_median, residual_direct, AffineOperator, CalibratedEstimator, LinearEstimator, Residual};
use crate::polybasis::PolyBasis;
use crate::prelude::*;
use crate::rational::{DegreePolicy, MriConfig, RationalInterpolant, NODE_TOL};
use crate::sampling::SampleSet;
use crate::snapshots::InnerProduct;

#[derive(Debug, Clone, Copy)]
pub struct GreedyOptions {
    /// Stop once the estimator maximum over the candidates drops below this.
    pub tol: f64,
    /// Budget on the total number of snapshots.
    pub max_samples: usize,
    pub degree: DegreePolicy,
    pub basis: PolyBasis,
}

/// One pass of the loop: the estimator was maximized over the candidates
/// for the surrogate built from `samples` snapshots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub samples: usize,
    pub argmax: C64,
    pub estimator_max: f64,
    pub exact_residual: f64,
}

#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    pub interpolant: RationalInterpolant,
    pub history: Vec<GreedyStep>,
    /// `false` when the sample budget ran out before reaching `tol`.
    pub converged: bool,
}

enum Estimator {
    Linear(LinearEstimator),
    Calibrated(CalibratedEstimator),
}

impl Estimator {
    fn estimate(&self, mu: C64) -> Residual {
        match self {
            Estimator::Linear(e) => e.estimate(mu),
            Estimator::Calibrated(e) => e.estimate(mu),
        }
    }
}

fn min_spacing(nodes: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            best = best.min((a - b).norm());
        }
    }
    best
}

/// Builds the estimator for the current surrogate. Linear operators use the
/// exact closed form; otherwise the constant is calibrated at the eligible
/// candidate whose `|ω/Q|` is the median.
fn make_estimator(
    op: &AffineOperator,
    interp: &RationalInterpolant,
    res_inner: &InnerProduct,
    eligible: &[C64],
) -> Result<Estimator> {
    if op.is_linear_in_mu() {
        if let Ok(e) = LinearEstimator::new(op, interp, res_inner) {
            return Ok(Estimator::Linear(e));
        }
    }
    let (_, e) = calibrate_at_median(op, interp, eligible, res_inner)?;
    Ok(Estimator::Calibrated(e))
}

/// Adds snapshots one at a time at the candidate that maximizes the residual
/// estimator, until the maximum falls below `tol` or the budget is spent.
///
/// Candidates closer than half the current minimal node spacing to a node are
/// skipped. The history holds one entry per surrogate built, including the
/// final one.
pub fn greedy_refine<F>(
    op: &AffineOperator,
    mut solve: F,
    inner: &InnerProduct,
    res_inner: &InnerProduct,
    initial: &SampleSet,
    candidates: &[C64],
    options: &GreedyOptions,
) -> Result<GreedyOutcome>
where
    F: FnMut(C64) -> Result<CVec>,
{
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("candidate set is empty"));
    }
    if options.max_samples < initial.len() {
        return Err(Error::InvalidArgument("sample budget is below the initial sample count"));
    }
    let mut samples = initial.clone();
    let mut columns: Vec<CVec> = Vec::with_capacity(options.max_samples);
    for &mu in samples.nodes() {
        columns.push(solve(mu)?);
    }
    let mut history = Vec::new();
    loop {
        let snaps = CMat::from_columns(&columns);
        let degree = options.degree.degree_for(samples.len())?;
        let config = MriConfig::new(degree, options.basis);
        let interp = RationalInterpolant::build(&snaps, inner, &samples, &config)?;

        let exclusion = if samples.len() > 1 {
            min_spacing(samples.nodes()) / 2.0
        } else {
            NODE_TOL * samples.scale()
        };
        let eligible: Vec<C64> = candidates
            .iter()
            .copied()
            .filter(|&mu| samples.nodes().iter().all(|&node| (mu - node).norm() > exclusion))
            .collect();
        if eligible.is_empty() {
            return Ok(GreedyOutcome { interpolant: interp, history, converged: false });
        }
        let estimator = make_estimator(op, &interp, res_inner, &eligible)?;
        let (mut best_mu, mut best) = (eligible[0], f64::NEG_INFINITY);
        for &mu in &eligible {
            let r = estimator.estimate(mu);
            let value = if r.norm.is_finite() { r.norm } else { f64::MAX };
            if value > best {
                best = value;
                best_mu = mu;
            }
        }
        let exact = residual_direct(op, &interp, best_mu, res_inner)?.norm;
        history.push(GreedyStep { samples: samples.len(), argmax: best_mu, estimator_max: best, exact_residual: exact });

        if best <= options.tol {
            return Ok(GreedyOutcome { interpolant: interp, history, converged: true });
        }
        if samples.len() >= options.max_samples {
            return Ok(GreedyOutcome { interpolant: interp, history, converged: false });
        }
        samples = samples.with_node(best_mu)?;
        columns.push(solve(best_mu)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::sampling::Region;

    fn problem() -> AffineOperator {
        let eigs = [c(0.4, 0.3), c(-0.6, 0.1), c(1.5, 0.5), c(-1.1, -1.3), c(2.2, 0.0), c(0.0, 2.5), c(-3.0, 0.5), c(0.2, -0.4)];
        let n = eigs.len();
        let a = CMat::from_diagonal(&CVec::from_column_slice(&eigs));
        let v = CVec::from_fn(n, |i, _| c(1.0, 0.1 * i as f64));
        AffineOperator::linear(a, -CMat::identity(n, n), v).unwrap()
    }

    fn grid() -> Vec<C64> {
        let mut out = Vec::new();
        for i in 0..21 {
            for j in 0..21 {
                let mu = c(-0.987 + 0.1 * i as f64, -0.973 + 0.1 * j as f64);
                if mu.norm() <= 1.0 {
                    out.push(mu);
                }
            }
        }
        out
    }

    fn opts(tol: f64, max_samples: usize) -> GreedyOptions {
        GreedyOptions { tol, max_samples, degree: DegreePolicy::Diagonal, basis: PolyBasis::monomial(c(0.0, 0.0), 0) }
    }

    #[test]
    fn infinite_tolerance_stops_immediately() {
        let op = problem();
        let ip = InnerProduct::euclidean(op.dim());
        let init = Region::unit_disk().fejer_nodes(2).unwrap();
        let out = greedy_refine(&op, |mu| op.solve(mu), &ip, &ip, &init, &grid(), &opts(f64::INFINITY, 10)).unwrap();
        assert!(out.converged);
        assert_eq!(out.history.len(), 1);
        assert_eq!(out.interpolant.samples().len(), 2);
    }

    #[test]
    fn budget_equal_to_initial_exhausts() {
        let op = problem();
        let ip = InnerProduct::euclidean(op.dim());
        let init = Region::unit_disk().fejer_nodes(3).unwrap();
        let out = greedy_refine(&op, |mu| op.solve(mu), &ip, &ip, &init, &grid(), &opts(1e-14, 3)).unwrap();
        assert!(!out.converged);
        assert_eq!(out.history.len(), 1);
    }

    #[test]
    fn converges_on_rational_map() {
        let op = problem();
        let ip = InnerProduct::euclidean(op.dim());
        let init = Region::unit_disk().fejer_nodes(2).unwrap();
        let out = greedy_refine(&op, |mu| op.solve(mu), &ip, &ip, &init, &grid(), &opts(1e-8, 12)).unwrap();
        assert!(out.converged, "{:?}", out.history);
        assert!(out.interpolant.samples().len() <= 9);
        for step in &out.history {
            assert!((step.exact_residual - step.estimator_max).abs() <= 1e-6 * step.estimator_max + 1e-9, "{step:?}");
        }
    }

    #[test]
    fn rejects_empty_candidates() {
        let op = problem();
        let ip = InnerProduct::euclidean(op.dim());
        let init = Region::unit_disk().fejer_nodes(2).unwrap();
        assert!(greedy_refine(&op, |mu| op.solve(mu), &ip, &ip, &init, &[], &opts(1.0, 5)).is_err());
    }
}
