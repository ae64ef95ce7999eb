//! Parameter-domain geometry: regions, logarithmic capacity, Green's potential,
//! and sample-node generation.
//!
//! Two kinds of compact region are supported: closed disks and line segments in
//! the complex plane. For both the exterior conformal map is explicit, so the
//! capacity and the Green's potential `Φ_K` have closed forms:
//!
//! - disk `D(c, r)`: `capac = r`, `Φ_K(μ) = max(|μ − c|, r)`;
//! - segment `[a, b]`: `capac = |b − a| / 4`, `Φ_K(μ) = capac · |z + √(z² − 1)|`
//!   with `z = (2μ − a − b)/(b − a)` and the root branch giving modulus ≥ 1.

use core::f64::consts::PI;

use crate::linalg::c;
use crate::prelude::*;

/// A compact parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: C64, radius: f64 },
    Segment { a: C64, b: C64 },
}

impl Region {
    pub fn disk(center: C64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRegion("disk radius must be positive and finite"));
        }
        Ok(Region::Disk { center, radius })
    }

    pub fn segment(a: C64, b: C64) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidRegion("segment endpoints must be distinct"));
        }
        if !(a.norm().is_finite() && b.norm().is_finite()) {
            return Err(Error::InvalidRegion("segment endpoints must be finite"));
        }
        Ok(Region::Segment { a, b })
    }

    /// Unit disk centered at the origin.
    pub fn unit_disk() -> Self {
        Region::Disk { center: c(0.0, 0.0), radius: 1.0 }
    }

    /// Center of the region (disk center or segment midpoint).
    pub fn center(&self) -> C64 {
        match *self {
            Region::Disk { center, .. } => center,
            Region::Segment { a, b } => (a + b) * 0.5,
        }
    }

    /// Logarithmic capacity.
    pub fn capacity(&self) -> f64 {
        match *self {
            Region::Disk { radius, .. } => radius,
            Region::Segment { a, b } => (b - a).norm() / 4.0,
        }
    }

    /// Green's potential `Φ_K(μ)`: `|φ_K(μ)|` outside the region, the capacity on it.
    pub fn green_potential(&self, mu: C64) -> f64 {
        match *self {
            Region::Disk { center, radius } => (mu - center).norm().max(radius),
            Region::Segment { a, b } => {
                let z = (mu * 2.0 - a - b) / (b - a);
                let w = (z * z - 1.0).sqrt();
                // (z + w)(z − w) = 1, so the larger modulus is >= 1
                let m = (z + w).norm().max((z - w).norm()).max(1.0);
                self.capacity() * m
            }
        }
    }

    /// Whether `mu` lies in the region, up to a relative tolerance on its size.
    pub fn contains(&self, mu: C64) -> bool {
        let tol = 1e-12 * self.capacity();
        match *self {
            Region::Disk { center, radius } => (mu - center).norm() <= radius + tol,
            Region::Segment { a, b } => {
                let d = b - a;
                let t = ((mu - a) * d.conj()).re / d.norm_sqr();
                let t = t.clamp(0.0, 1.0);
                (a + d * t - mu).norm() <= tol
            }
        }
    }

    /// Fejér points: roots of unity for a disk, first-kind Chebyshev nodes for a segment.
    pub fn fejer_nodes(&self, count: usize) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::EmptySampleSet);
        }
        let s = count as f64;
        let (nodes, provenance): (Vec<C64>, _) = match *self {
            Region::Disk { center, radius } => (
                (1..=count)
                    .map(|j| {
                        let t = 2.0 * PI * j as f64 / s;
                        center + C64::from_polar(radius, t)
                    })
                    .collect(),
                Provenance::FejerDisk,
            ),
            Region::Segment { a, b } => {
                let mid = (a + b) * 0.5;
                let half = (b - a) * 0.5;
                (
                    (1..=count)
                        .map(|k| {
                            let x = ((2 * k - 1) as f64 * PI / (2.0 * s)).cos();
                            mid + half * x
                        })
                        .collect(),
                    Provenance::FejerSegment,
                )
            }
        };
        SampleSet::with_provenance(nodes, provenance)
    }

    /// Halton (bases 2 and 3) points mapped into the region, starting at sequence
    /// index `skip + 1`.
    ///
    /// Disk: `(radius, angle) = (r √x₁, 2π x₂)` about the center. Segment: `a + x₁ (b − a)`.
    /// Points that coincide with an earlier one are skipped and the sequence extended.
    pub fn quasi_random_nodes(&self, count: usize, skip: usize) -> Result<SampleSet> {
        if count == 0 {
            return Err(Error::EmptySampleSet);
        }
        let tol = 1e-14 * self.capacity();
        let mut nodes: Vec<C64> = Vec::with_capacity(count);
        let mut index = skip as u64;
        while nodes.len() < count {
            index += 1;
            let x1 = radical_inverse(index, 2);
            let x2 = radical_inverse(index, 3);
            let p = match *self {
                Region::Disk { center, radius } => center + C64::from_polar(radius * x1.sqrt(), 2.0 * PI * x2),
                Region::Segment { a, b } => a + (b - a) * x1,
            };
            if nodes.iter().all(|q| (q - p).norm() > tol) {
                nodes.push(p);
            }
        }
        SampleSet::with_provenance(nodes, Provenance::QuasiRandom)
    }
}

/// Van der Corput radical inverse of `index` in the given base.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// How a sample set was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    FejerDisk,
    FejerSegment,
    QuasiRandom,
    Custom,
}

/// Ordered distinct sample nodes with the nodal-polynomial derivative at each node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    nodes: Vec<C64>,
    omega_prime: Vec<C64>,
    provenance: Provenance,
}

impl SampleSet {
    /// Custom node list; fails on empty input or coincident nodes.
    pub fn new(nodes: Vec<C64>) -> Result<Self> {
        Self::with_provenance(nodes, Provenance::Custom)
    }

    fn with_provenance(nodes: Vec<C64>, provenance: Provenance) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        for (i, a) in nodes.iter().enumerate() {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidArgument("sample nodes must be finite"));
            }
            for (j, b) in nodes.iter().enumerate().skip(i + 1) {
                if a == b {
                    return Err(Error::DuplicateNode(i, j));
                }
            }
        }
        let omega_prime = omega_prime_of(&nodes);
        Ok(SampleSet { nodes, omega_prime, provenance })
    }

    /// A new set with `mu` appended (used by adaptive sampling).
    pub fn with_node(&self, mu: C64) -> Result<Self> {
        let mut nodes = self.nodes.clone();
        nodes.push(mu);
        Self::with_provenance(nodes, Provenance::Custom)
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// `ω'(μ_j) = ∏_{k≠j} (μ_j − μ_k)`.
    pub fn omega_prime(&self) -> &[C64] {
        &self.omega_prime
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodal polynomial `ω(μ) = ∏_j (μ − μ_j)`.
    pub fn nodal_poly_eval(&self, mu: C64) -> C64 {
        self.nodes.iter().fold(c(1.0, 0.0), |acc, &m| acc * (mu - m))
    }

    /// `ln |ω(μ)|`, safe against overflow for many nodes.
    pub fn log_abs_nodal(&self, mu: C64) -> f64 {
        self.nodes.iter().map(|&m| (mu - m).norm().ln()).sum()
    }

    /// Index of a node within `tol` of `mu`, if any.
    pub fn nearest_node_within(&self, mu: C64, tol: f64) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(j, &m)| (j, (mu - m).norm()))
            .filter(|&(_, d)| d <= tol)
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(core::cmp::Ordering::Equal))
            .map(|(j, _)| j)
    }

    /// Length scale of the node set: `1 + max_j |μ_j|`.
    pub fn scale(&self) -> f64 {
        1.0 + self.nodes.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}

fn omega_prime_of(nodes: &[C64]) -> Vec<C64> {
    nodes
        .iter()
        .enumerate()
        .map(|(j, &mj)| {
            nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .fold(c(1.0, 0.0), |acc, (_, &mk)| acc * (mj - mk))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(Region::segment(c(0.0, 0.0), c(4.0, 0.0)).unwrap().capacity(), 1.0);
        assert_eq!(Region::unit_disk().capacity(), 1.0);
        let seg = Region::segment(c(-1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(seg.capacity(), 0.5);
        // boundary value of the exterior map equals the capacity
        assert!((seg.green_potential(c(0.3, 0.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(Region::disk(c(0.0, 0.0), 0.0).is_err());
        assert!(Region::disk(c(0.0, 0.0), -1.0).is_err());
        assert!(Region::segment(c(1.0, 1.0), c(1.0, 1.0)).is_err());
    }

    #[test]
    fn green_potential_examples() {
        let d = Region::unit_disk();
        assert_eq!(d.green_potential(c(2.0, 0.0)), 2.0);
        assert_eq!(d.green_potential(c(0.5, 0.0)), 1.0);
        let seg = Region::segment(c(-2.0, 0.0), c(2.0, 0.0)).unwrap();
        let expected = 2.0 + 3.0_f64.sqrt();
        assert!((seg.green_potential(c(4.0, 0.0)) - expected).abs() < 1e-14);
        // symmetric branch on the other side and off the real axis
        assert!((seg.green_potential(c(-4.0, 0.0)) - expected).abs() < 1e-14);
        assert!((seg.green_potential(c(0.0, 4.0)) - seg.green_potential(c(0.0, -4.0))).abs() < 1e-14);
    }

    #[test]
    fn segment_potential_approaches_distance_far_away() {
        let seg = Region::segment(c(10.0, 0.0), c(40.0, 0.0)).unwrap();
        let mu = c(25.0, 1e6);
        let rel = (seg.green_potential(mu) - (mu - seg.center()).norm()).abs() / mu.norm();
        assert!(rel < 1e-6);
    }

    #[test]
    fn fejer_examples() {
        let s = Region::unit_disk().fejer_nodes(3).unwrap();
        let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(close(s.nodes()[0], w, 1e-15));
        assert!(close(s.nodes()[1], w * w, 1e-15));
        assert!(close(s.nodes()[2], c(1.0, 0.0), 1e-15));
        assert_eq!(s.provenance(), Provenance::FejerDisk);

        let seg = Region::segment(c(10.0, 0.0), c(40.0, 0.0)).unwrap().fejer_nodes(1).unwrap();
        assert!(close(seg.nodes()[0], c(25.0, 0.0), 1e-14));

        let two = Region::unit_disk().fejer_nodes(2).unwrap();
        // nodes {-1, 1}, ω(μ) = μ² − 1
        assert!(close(two.nodes()[0], c(-1.0, 0.0), 1e-15));
        assert!(close(two.omega_prime()[0], c(-2.0, 0.0), 1e-15));
        assert!(close(two.omega_prime()[1], c(2.0, 0.0), 1e-15));
        assert_eq!(Region::unit_disk().fejer_nodes(0), Err(Error::EmptySampleSet));
    }

    #[test]
    fn halton_examples() {
        let one = Region::unit_disk().quasi_random_nodes(1, 0).unwrap();
        let p = one.nodes()[0];
        assert!((p.norm() - 0.5_f64.sqrt()).abs() < 1e-15);
        assert!((p.arg() - 2.0 * PI / 3.0).abs() < 1e-14);

        let seg = Region::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap().quasi_random_nodes(2, 0).unwrap();
        assert!(close(seg.nodes()[0], c(0.5, 0.0), 0.0));
        assert!(close(seg.nodes()[1], c(0.25, 0.0), 0.0));

        let skipped = Region::segment(c(0.0, 0.0), c(1.0, 0.0)).unwrap().quasi_random_nodes(1, 1).unwrap();
        assert!(close(skipped.nodes()[0], c(0.25, 0.0), 0.0));
    }

    #[test]
    fn nodal_poly_examples() {
        let s = SampleSet::new(vec![c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(s.nodal_poly_eval(c(0.0, 0.0)), c(-1.0, 0.0));
        assert_eq!(s.nodal_poly_eval(c(1.0, 0.0)), c(0.0, 0.0));
        let t = SampleSet::new(vec![c(2.0, 0.0)]).unwrap();
        assert_eq!(t.nodal_poly_eval(c(5.0, 0.0)), c(3.0, 0.0));
        assert_eq!(t.omega_prime(), &[c(1.0, 0.0)]);
    }

    #[test]
    fn duplicate_nodes_rejected() {
        assert_eq!(
            SampleSet::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]),
            Err(Error::DuplicateNode(0, 2))
        );
        assert_eq!(SampleSet::new(vec![]), Err(Error::EmptySampleSet));
        let s = SampleSet::new(vec![c(1.0, 0.0)]).unwrap();
        assert!(s.with_node(c(1.0, 0.0)).is_err());
        assert_eq!(s.with_node(c(3.0, 0.0)).unwrap().omega_prime(), &[c(-2.0, 0.0), c(2.0, 0.0)]);
    }

    #[test]
    fn contains_checks_both_shapes() {
        let d = Region::unit_disk();
        assert!(d.contains(c(0.6, 0.8)));
        assert!(!d.contains(c(0.6, 0.81)));
        let s = Region::segment(c(0.0, 0.0), c(2.0, 2.0)).unwrap();
        assert!(s.contains(c(1.0, 1.0)));
        assert!(!s.contains(c(1.0, 1.1)));
        assert!(!s.contains(c(3.0, 3.0)));
    }
}
