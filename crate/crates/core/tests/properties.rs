use mri_core::estimators::{
    greedy_refine, residual_direct, residual_estimator_linear, residual_separable, CalibratedEstimator, GreedyOptions,
};
use mri_core::testbeds::{helmholtz_1d_fom, random_normal_fom, uniform_stiffness, MeromorphicMap};
use mri_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

/// Points in the disk of the given radius, pairwise at least `sep` apart.
fn separated_points(rng: &mut ChaCha8Rng, count: usize, radius: f64, sep: f64) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::new();
    while out.len() < count {
        let p = C64::from_polar(radius * rng.random::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.random::<f64>());
        if out.iter().all(|q| (q - p).norm() >= sep) {
            out.push(p);
        }
    }
    out
}

fn test_points(rng: &mut ChaCha8Rng, count: usize, avoid: &[C64], radius: f64, dist: f64) -> Vec<C64> {
    let mut out = Vec::new();
    while out.len() < count {
        let p = c(rng.random_range(-radius..radius), rng.random_range(-radius..radius));
        if avoid.iter().all(|q| (q - p).norm() >= dist) {
            out.push(p);
        }
    }
    out
}

/// Largest distance from a point of `a` to the nearest point of `b`.
fn set_distance(a: &[C64], b: &[C64]) -> f64 {
    a.iter().map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

fn build(snaps: &CMat, inner: &InnerProduct, samples: &SampleSet, degree: usize) -> RationalInterpolant {
    let cfg = MriConfig::new(degree, PolyBasis::monomial(c(0.0, 0.0), degree));
    RationalInterpolant::build(snaps, inner, samples, &cfg).unwrap()
}

fn nodal(samples: &SampleSet, mu: C64) -> C64 {
    samples.nodes().iter().map(|&x| mu - x).product()
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn omega_prime_matches_recomputation(seed in any::<u64>(), count in 1usize..40, quasi in any::<bool>()) {
        let region = Region::disk(c(0.3, -0.2), 1.7).unwrap();
        let samples = if quasi { region.quasi_random_nodes(count, (seed % 100) as usize).unwrap() } else { region.fejer_nodes(count).unwrap() };
        let nodes = samples.nodes();
        for (j, &wp) in samples.omega_prime().iter().enumerate() {
            let direct: C64 = nodes.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &x)| nodes[j] - x).product();
            prop_assert!((direct - wp).norm() <= 1e-13 * direct.norm());
        }
    }

    #[test]
    fn green_potential_bounds_and_continuity(re in -3.0f64..3.0, im in -3.0f64..3.0, t in 0.0f64..1.0) {
        let seg = Region::segment(c(-1.0, 0.5), c(2.0, 1.0)).unwrap();
        let disk = Region::disk(c(0.5, 0.5), 1.2).unwrap();
        for region in [seg, disk] {
            let mu = c(re, im);
            prop_assert!(region.green_potential(mu) >= region.capacity() * (1.0 - 1e-14));
        }
        // a point on the segment and a point on the circle
        let on_seg = c(-1.0, 0.5) + (c(2.0, 1.0) - c(-1.0, 0.5)) * t;
        prop_assert!((seg.green_potential(on_seg) - seg.capacity()).abs() < 1e-12);
        let angle = 2.0 * std::f64::consts::PI * t;
        let on_circle = c(0.5, 0.5) + C64::from_polar(1.2, angle);
        let normal = C64::from_polar(1.0, angle);
        let jump = (disk.green_potential(on_circle + normal * 1e-10) - disk.green_potential(on_circle - normal * 1e-10)).abs();
        prop_assert!(jump < 1e-8);
        let seg_normal = c(-0.5, 3.0) / c(-0.5, 3.0).norm();
        let jump = (seg.green_potential(on_seg + seg_normal * 1e-12) - seg.green_potential(on_seg - seg_normal * 1e-12)).abs();
        prop_assert!(jump < 1e-5 * seg.capacity());
    }

    #[test]
    fn poly_eval_matches_basis_sum(seed in any::<u64>(), degree in 0usize..25, re in -2.0f64..2.0, im in -2.0f64..2.0, cheb in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = if cheb { PolyBasis::chebyshev(c(-1.0, 0.0), c(2.0, 0.0), degree).unwrap() } else { PolyBasis::monomial(c(0.2, 0.1), degree) };
        let coeffs: Vec<C64> = (0..=degree).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let p = PolyCoeffs::new(basis, coeffs.clone()).unwrap();
        let mu = c(re, im);
        let naive: C64 = coeffs.iter().enumerate().map(|(l, &q)| q * basis.eval_basis(l, mu).unwrap()).sum();
        let mag: f64 = coeffs.iter().enumerate().map(|(l, &q)| (q * basis.eval_basis(l, mu).unwrap()).norm()).sum();
        prop_assert!((p.eval(mu) - naive).norm() <= 1e-13 * mag.max(1e-300) * (degree as f64 + 1.0));
    }

    #[test]
    fn roots_rebuild_monomial_coefficients(seed in any::<u64>(), degree in 1usize..=30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = c(0.3, -0.1);
        let coeffs: Vec<C64> = (0..=degree).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        prop_assume!(coeffs[degree].norm() > 0.05);
        let p = PolyCoeffs::new(PolyBasis::monomial(center, degree), coeffs.clone()).unwrap();
        let roots = p.roots().unwrap();
        prop_assert_eq!(roots.finite.len(), degree);
        // expand Π (t − (r − center)) in the local variable
        let mut monic = vec![c(1.0, 0.0)];
        for r in &roots.finite {
            let t = r - center;
            let mut next = vec![c(0.0, 0.0); monic.len() + 1];
            for (k, &a) in monic.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * t;
            }
            monic = next;
        }
        let rebuilt: Vec<C64> = monic.iter().map(|&a| a * coeffs[degree]).collect();
        let diff: f64 = rebuilt.iter().zip(&coeffs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let norm: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-8 * norm, "relative {}", diff / norm);
    }

    #[test]
    fn quasi_random_is_deterministic(count in 1usize..50, skip in 0usize..1000) {
        let region = Region::segment(c(0.0, 0.0), c(1.0, 1.0)).unwrap();
        let a = region.quasi_random_nodes(count, skip).unwrap();
        let b = region.quasi_random_nodes(count, skip).unwrap();
        prop_assert_eq!(a.nodes(), b.nodes());
    }
}

proptest! {
    #![proptest_config(cases(20))]

    #[test]
    fn exact_rational_recovery(seed in any::<u64>(), npoles in 1usize..=8, extra in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poles = separated_points(&mut rng, npoles, 0.9, 0.1);
        let map = MeromorphicMap::random_orthogonal(poles.clone(), 12, seed).unwrap();
        let samples = Region::unit_disk().fejer_nodes(npoles + 1 + extra).unwrap();
        let snaps = map.snapshots(samples.nodes()).unwrap();
        let ip = InnerProduct::euclidean(12);
        let r = build(&snaps, &ip, &samples, npoles);
        let vmax = map.residues().iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(r.sigma_min() < 1e-10 * vmax);
        let approx = r.poles().unwrap().finite;
        prop_assert!(set_distance(&poles, &approx) < 1e-8, "poles {:?} vs {:?}", poles, approx);
        for mu in test_points(&mut rng, 50, &poles, 1.5, 0.1) {
            let exact = map.eval(mu).unwrap();
            let err = (r.evaluate(mu).value - &exact).norm();
            prop_assert!(err <= 1e-8 * exact.norm());
        }
    }

    #[test]
    fn optimality_identity_for_orthogonal_residues(seed in any::<u64>(), npoles in 1usize..=50, count in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let poles = separated_points(&mut rng, npoles, 3.0, 0.01);
        let samples = Region::unit_disk().fejer_nodes(count).unwrap();
        prop_assume!(poles.iter().all(|p| samples.nodes().iter().all(|x| (p - x).norm() > 1e-3)));
        let map = MeromorphicMap::random_orthogonal(poles.clone(), 60, seed ^ 0x5eed).unwrap();
        let snaps = map.snapshots(samples.nodes()).unwrap();
        let degree = count - 1;
        let r = build(&snaps, &InnerProduct::euclidean(60), &samples, degree);
        let mut q: Vec<C64> = (0..=degree).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let qn = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        q.iter_mut().for_each(|z| *z /= qn);
        let qpoly = PolyCoeffs::new(PolyBasis::monomial(c(0.0, 0.0), degree), q.clone()).unwrap();
        let j = r.j_functional(&q).unwrap();
        let oracle: f64 = map
            .poles()
            .iter()
            .zip(map.residues())
            .map(|(&l, v)| v.norm_squared() * qpoly.eval(l).norm_sqr() / nodal(&samples, l).norm_sqr())
            .sum();
        prop_assert!((j * j - oracle).abs() < 1e-10 * oracle.max(j * j), "j² {} vs {}", j * j, oracle);
    }

    #[test]
    fn interpolation_minimality_and_scaling(seed in any::<u64>(), count in 2usize..14, scale_re in -3.0f64..3.0, scale_im in -3.0f64..3.0) {
        prop_assume!(c(scale_re, scale_im).norm() > 0.1);
        let fom = random_normal_fom(15, (-2.0, 2.0), seed).unwrap();
        let samples = Region::unit_disk().quasi_random_nodes(count, 3).unwrap();
        prop_assume!(fom.eigenvalues().iter().all(|l| samples.nodes().iter().all(|x| (l - x).norm() > 1e-3)));
        let cols: Vec<CVec> = samples.nodes().iter().map(|&m| fom.solve(m).unwrap()).collect();
        let snaps = CMat::from_columns(&cols);
        let ip = InnerProduct::euclidean(15);
        let degree = (count - 1).min(5);
        let r = build(&snaps, &ip, &samples, degree);
        for (j, &node) in samples.nodes().iter().enumerate() {
            if r.qnode()[j].norm() > 0.0 {
                prop_assert!((r.evaluate(node).value - snaps.column(j)).norm() <= 1e-14 * snaps.column(j).norm());
            }
        }
        let built = r.j_functional(r.denominator().coeffs()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for _ in 0..100 {
            let k = rng.random_range(0..=degree);
            let mut q: Vec<C64> = (0..=k).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let qn = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            q.iter_mut().for_each(|z| *z /= qn);
            prop_assert!(built <= r.j_functional(&q).unwrap() * (1.0 + 1e-12) + 1e-15);
        }
        let factor = c(scale_re, scale_im);
        let scaled = build(&(&snaps * factor), &ip, &samples, degree);
        let q0 = r.denominator().coeffs();
        let q1 = scaled.denominator().coeffs();
        if r.sigma_gap() < 0.5 {
            let dq: f64 = q0.iter().zip(q1).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(dq < 1e-11, "dq {}", dq);
            let p0 = r.poles().unwrap().finite;
            let p1 = scaled.poles().unwrap().finite;
            prop_assert!(set_distance(&p0, &p1) < 1e-10 * (1.0 + p0.iter().map(|z| z.norm()).fold(0.0, f64::max)), "{:?} {:?} dq {}", p0, p1, dq);
            let mu = c(0.37, -0.21);
            let a = r.evaluate(mu).value * factor;
            let b = scaled.evaluate(mu).value;
            prop_assert!((&a - &b).norm() <= 1e-10 * a.norm());
        }
    }

    #[test]
    fn residual_chain_on_linear_fom(seed in any::<u64>(), count in 2usize..12) {
        let fom = random_normal_fom(20, (-3.0, 3.0), seed).unwrap();
        let samples = Region::unit_disk().fejer_nodes(count).unwrap();
        prop_assume!(fom.eigenvalues().iter().all(|l| samples.nodes().iter().all(|x| (l - x).norm() > 1e-3)));
        let op = fom.as_affine_operator();
        let cols: Vec<CVec> = samples.nodes().iter().map(|&m| fom.solve(m).unwrap()).collect();
        let ip = InnerProduct::euclidean(20);
        let r = build(&CMat::from_columns(&cols), &ip, &samples, count - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cal_a = CalibratedEstimator::calibrate(&op, &r, c(0.11, 0.52), &ip).unwrap();
        let cal_b = CalibratedEstimator::calibrate(&op, &r, c(-0.63, -0.14), &ip).unwrap();
        prop_assert!((cal_a.constant() - cal_b.constant()).abs() <= 1e-8 * cal_a.constant());
        for _ in 0..25 {
            let mu = c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let d = residual_direct(&op, &r, mu, &ip).unwrap().norm;
            let s = residual_separable(&op, &r, mu, &ip).unwrap().norm;
            let l = residual_estimator_linear(&op, &r, mu, &ip).unwrap().norm;
            prop_assert!((d - s).abs() <= 1e-8 * d, "direct {} separable {}", d, s);
            prop_assert!((d - l).abs() <= 1e-8 * d, "direct {} linear {}", d, l);
        }
    }

    #[test]
    fn separable_residual_on_quadratic_operator(count in 2usize..16, eta in 0.0f64..0.5, nu_re in 0.0f64..2.0, nu_im in -0.3f64..0.3) {
        let bar = helmholtz_1d_fom(25, eta, 1.0, &uniform_stiffness(25, 1.0)).unwrap();
        let region = Region::segment(c(0.1, 0.0), c(1.9, 0.0)).unwrap();
        let samples = region.fejer_nodes(count).unwrap();
        let cols: Vec<CVec> = samples.nodes().iter().map(|&m| bar.solve(m).unwrap()).collect();
        let w = bar.energy_inner();
        let cfg = MriConfig::new(count - 1, PolyBasis::chebyshev(c(0.1, 0.0), c(1.9, 0.0), count - 1).unwrap());
        let r = RationalInterpolant::build(&CMat::from_columns(&cols), &w, &samples, &cfg).unwrap();
        let nu = c(nu_re, nu_im);
        let d = residual_direct(bar.operator(), &r, nu, &w).unwrap();
        let s = residual_separable(bar.operator(), &r, nu, &w).unwrap();
        prop_assume!(d.status == EvalStatus::Regular);
        prop_assert!((d.norm - s.norm).abs() <= 1e-8 * d.norm, "direct {} separable {}", d.norm, s.norm);
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn greedy_never_reselects_nodes(seed in any::<u64>()) {
        let fom = random_normal_fom(30, (-2.0, 2.0), seed).unwrap();
        let op = fom.as_affine_operator();
        let ip = InnerProduct::euclidean(30);
        let h = 0.05;
        let grid: Vec<C64> = (0..41).flat_map(|i| (0..41).map(move |k| c(-1.0 + h * i as f64 + 0.003, -1.0 + h * k as f64 + 0.007))).filter(|z| z.norm() <= 1.0).collect();
        prop_assume!(fom.eigenvalues().iter().all(|l| grid.iter().all(|g| (l - g).norm() > 1e-6)));
        let init = Region::unit_disk().fejer_nodes(3).unwrap();
        let opts = GreedyOptions { tol: 1e-6, max_samples: 20, degree: DegreePolicy::Diagonal, basis: PolyBasis::monomial(c(0.0, 0.0), 0) };
        let out = greedy_refine(&op, |mu| fom.solve(mu), &ip, &ip, &init, &grid, &opts).unwrap();
        let nodes = out.interpolant.samples().nodes();
        for (i, a) in nodes.iter().enumerate() {
            for b in &nodes[i + 1..] {
                prop_assert!((a - b).norm() > h / 2.0 - 1e-12 || init.nodes().contains(a) && init.nodes().contains(b));
            }
        }
    }

    #[test]
    fn testbeds_are_reproducible(seed in any::<u64>(), n in 1usize..30) {
        let a = random_normal_fom(n, (-5.0, 5.0), seed).unwrap();
        let b = random_normal_fom(n, (-5.0, 5.0), seed).unwrap();
        prop_assert_eq!(a.matrix(), b.matrix());
        prop_assert_eq!(a.rhs(), b.rhs());
        let poles = vec![c(0.5, 0.0), c(0.0, 0.5)];
        let m1 = MeromorphicMap::random_orthogonal(poles.clone(), n.max(2), seed).unwrap();
        let m2 = MeromorphicMap::random_orthogonal(poles, n.max(2), seed).unwrap();
        prop_assert_eq!(m1.residues(), m2.residues());
    }
}

#[test]
fn normal_fom_invariants_ten_seeds() {
    for seed in 0..10 {
        let fom = random_normal_fom(100, (-5.0, 5.0), seed).unwrap();
        assert!(fom.normality_defect() < 1e-12);
        let eig = mri_core::linalg::eigenvalues(fom.matrix()).unwrap();
        assert!(set_distance(fom.eigenvalues(), &eig) < 1e-10);
        assert!(set_distance(&eig, fom.eigenvalues()) < 1e-10);
    }
}

#[test]
fn spectral_form_reproduces_solve() {
    let fom = random_normal_fom(100, (-5.0, 5.0), 17).unwrap();
    let map = fom.as_meromorphic();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pts = test_points(&mut rng, 50, fom.eigenvalues(), 5.0, 0.05);
    for mu in pts {
        let u = fom.solve(mu).unwrap();
        let w = map.eval(mu).unwrap();
        assert!((&u - &w).norm() <= 1e-10 * w.norm());
    }
}

#[test]
fn nodal_polynomial_approaches_green_potential() {
    let region = Region::unit_disk();
    let samples = region.fejer_nodes(200).unwrap();
    for k in 0..10 {
        let mu = C64::from_polar(1.2 + 0.3 * k as f64, 0.7 * k as f64);
        let root = (samples.log_abs_nodal(mu) / 200.0).exp();
        let phi = region.green_potential(mu);
        assert!((root - phi).abs() < 0.02 * phi);
    }
}
