//! Graph manifolds, their lattice frequency grids, cap partitions and
//! dyadic covers.
//!
//! A manifold here is always a graph `(eta, pi(eta))` over a base cube in
//! `m` dimensions, embedded in `d`-dimensional frequency space. A frequency
//! set at scale `R` samples the base on the lattice `n/R` and stores the
//! point `s = (n, R * pi(n/R))`. The first `m` coordinates of `s` are exact
//! integers; differences of distinct points therefore always have a nonzero
//! integer coordinate, which is what makes the associated exponentials an
//! orthonormal system on the normalized domain.

use crate::error::{Error, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Supported graph-manifold families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldKind {
    /// `pi(eta) = |eta|^2`, positive curvature hypersurface (m = d-1).
    EllipticParaboloid,
    /// `pi(eta) = sqrt(1 - |eta|^2)` on a sub-cube away from the equator.
    SphereGraph,
    /// `pi(eta) = eta_1 * eta_2` in d = 3; contains two line families.
    HyperbolicParaboloid,
    /// `pi(eta) = (eta^2, ..., eta^d)`, m = 1. With d = 1 the tail is empty
    /// and the grid degenerates to the plain 1-D integer lattice.
    MomentCurve,
    /// `pi(eta) = |eta|` on a sub-cube away from the cone tip (m = d-1).
    ConeGraph,
}

impl ManifoldKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ManifoldKind::EllipticParaboloid => "elliptic_paraboloid",
            ManifoldKind::SphereGraph => "sphere_graph",
            ManifoldKind::HyperbolicParaboloid => "hyperbolic_paraboloid",
            ManifoldKind::MomentCurve => "moment_curve",
            ManifoldKind::ConeGraph => "cone_graph",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "elliptic_paraboloid" | "paraboloid" => Ok(ManifoldKind::EllipticParaboloid),
            "sphere_graph" | "sphere" => Ok(ManifoldKind::SphereGraph),
            "hyperbolic_paraboloid" | "hyperbolic" => Ok(ManifoldKind::HyperbolicParaboloid),
            "moment_curve" | "momentcurve" | "moment" => Ok(ManifoldKind::MomentCurve),
            "cone_graph" | "cone" => Ok(ManifoldKind::ConeGraph),
            other => Err(Error::InvalidManifold(format!("unknown kind {other:?}"))),
        }
    }
}

/// A graph manifold with its ambient dimension, base dimension and base
/// domain. The domain is the same interval along every base axis; it is
/// the full `[0,1]` except for the sphere and cone graphs, which are
/// restricted away from their singular behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    /// Ambient dimension.
    pub d: usize,
    /// Base dimension (m < d except for the degenerate MomentCurve d = 1).
    pub m: usize,
    /// Base domain `[lo, hi]` along each of the m axes.
    pub domain: [f64; 2],
}

impl ManifoldSpec {
    pub fn new(kind: ManifoldKind, d: usize) -> Result<Self> {
        let (m, domain) = match kind {
            ManifoldKind::EllipticParaboloid => {
                if d < 2 {
                    return Err(Error::InvalidManifold(
                        "elliptic paraboloid needs d >= 2".into(),
                    ));
                }
                (d - 1, [0.0, 1.0])
            }
            ManifoldKind::SphereGraph => {
                if d < 2 {
                    return Err(Error::InvalidManifold("sphere graph needs d >= 2".into()));
                }
                let m = d - 1;
                // Keep |eta|^2 <= 1/4 so the graph stays away from the equator.
                (m, [0.0, 1.0 / (2.0 * (m as f64).sqrt())])
            }
            ManifoldKind::HyperbolicParaboloid => {
                if d != 3 {
                    return Err(Error::InvalidManifold(
                        "hyperbolic paraboloid is defined for d = 3".into(),
                    ));
                }
                (2, [0.0, 1.0])
            }
            ManifoldKind::MomentCurve => {
                if d < 1 {
                    return Err(Error::InvalidManifold("moment curve needs d >= 1".into()));
                }
                (1, [0.0, 1.0])
            }
            ManifoldKind::ConeGraph => {
                if d < 3 {
                    return Err(Error::InvalidManifold(
                        "cone graph needs d >= 3 (d = 2 has no curvature left)".into(),
                    ));
                }
                // Away from the tip at the origin.
                (d - 1, [0.25, 0.75])
            }
        };
        Ok(ManifoldSpec { kind, d, m, domain })
    }

    /// Tail map `pi`: base point to the d-m graph coordinates.
    pub fn pi(&self, eta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(eta.len(), self.m);
        match self.kind {
            ManifoldKind::EllipticParaboloid => {
                vec![eta.iter().map(|e| e * e).sum()]
            }
            ManifoldKind::SphereGraph => {
                let sq: f64 = eta.iter().map(|e| e * e).sum();
                vec![(1.0 - sq).sqrt()]
            }
            ManifoldKind::HyperbolicParaboloid => vec![eta[0] * eta[1]],
            ManifoldKind::MomentCurve => {
                let mut out = Vec::with_capacity(self.d - 1);
                let mut p = eta[0];
                for _ in 2..=self.d {
                    p *= eta[0];
                    out.push(p);
                }
                out
            }
            ManifoldKind::ConeGraph => {
                let sq: f64 = eta.iter().map(|e| e * e).sum();
                vec![sq.sqrt()]
            }
        }
    }

    /// Critical exponent below which maximal-size tight decoupling fails.
    pub fn critical_exponent(&self) -> Result<Ratio<i64>> {
        let d = self.d as i64;
        match self.kind {
            ManifoldKind::EllipticParaboloid | ManifoldKind::SphereGraph => {
                Ok(Ratio::new(2 * (d + 1), d - 1))
            }
            ManifoldKind::ConeGraph => {
                if d <= 2 {
                    Err(Error::InvalidManifold(
                        "cone critical exponent undefined for d = 2".into(),
                    ))
                } else {
                    Ok(Ratio::new(2 * d, d - 2))
                }
            }
            ManifoldKind::MomentCurve => Ok(Ratio::from_integer(d * (d + 1))),
            ManifoldKind::HyperbolicParaboloid => Ok(Ratio::from_integer(4)),
        }
    }

    /// Is this a hypersurface in the sense m = d - 1?
    pub fn is_hypersurface(&self) -> bool {
        self.m + 1 == self.d
    }
}

/// Construction provenance carried by every frequency set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Accepted draw index when a retry loop was involved.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw: Option<u32>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

impl Provenance {
    pub fn new(method: &str) -> Self {
        Provenance {
            method: method.to_string(),
            seed: None,
            draw: None,
            params: serde_json::Value::Null,
        }
    }

    pub fn with_seed(method: &str, seed: u64) -> Self {
        Provenance {
            method: method.to_string(),
            seed: Some(seed),
            draw: None,
            params: serde_json::Value::Null,
        }
    }
}

/// One sampled frequency: the integer lattice part and the real tail
/// `R * pi(n/R)`. The full frequency vector is the concatenation.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqPoint {
    pub n: Vec<i64>,
    pub tail: Vec<f64>,
}

/// A discrete system of frequencies on a manifold at scale R.
#[derive(Debug, Clone)]
pub struct FrequencySet {
    pub r: u64,
    pub spec: ManifoldSpec,
    pub points: Vec<FreqPoint>,
    pub provenance: Provenance,
}

impl FrequencySet {
    /// Assemble a set from lattice vectors, recomputing tails through `pi`.
    /// Rejects duplicate lattice vectors: distinctness is what guarantees
    /// orthonormality of the exponentials.
    pub fn from_lattice(
        spec: ManifoldSpec,
        r: u64,
        lattice: Vec<Vec<i64>>,
        provenance: Provenance,
    ) -> Result<Self> {
        if r < 1 {
            return Err(Error::BadScale {
                r,
                reason: "scale must be a positive integer".into(),
            });
        }
        let mut seen = HashSet::with_capacity(lattice.len());
        for n in &lattice {
            if n.len() != spec.m {
                return Err(Error::InvalidSet(format!(
                    "lattice vector has {} coordinates, base dimension is {}",
                    n.len(),
                    spec.m
                )));
            }
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidSet(format!(
                    "duplicate lattice vector {n:?} breaks orthonormality"
                )));
            }
        }
        let rf = r as f64;
        let points = lattice
            .into_iter()
            .map(|n| {
                let eta: Vec<f64> = n.iter().map(|&v| v as f64 / rf).collect();
                let tail: Vec<f64> = spec.pi(&eta).into_iter().map(|t| rf * t).collect();
                if tail.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidManifold(format!(
                        "pi evaluation failed on grid node {n:?}"
                    )));
                }
                Ok(FreqPoint { n, tail })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrequencySet {
            r,
            spec,
            points,
            provenance,
        })
    }

    /// A plain 1-D integer system (no tail coordinates). This realizes
    /// systems like the Dirichlet lattice `{0, ..., N-1}` that are not
    /// sampled from a curved graph.
    pub fn integer_1d(r: u64, freqs: Vec<i64>, provenance: Provenance) -> Result<Self> {
        let spec = ManifoldSpec {
            kind: ManifoldKind::MomentCurve,
            d: 1,
            m: 1,
            domain: [0.0, 1.0],
        };
        let lattice = freqs.into_iter().map(|v| vec![v]).collect();
        // Bypass the tail recomputation: d = 1 has no tail anyway.
        FrequencySet::from_lattice(spec, r, lattice, provenance)
    }

    /// A random pure-lattice 1-D system: distinct frequencies drawn from
    /// `[0, freq_range)`, between 2 and `max_points` of them. Used by the
    /// oracle cross-checks.
    pub fn random_integer_1d(seed: u64, index: u64, max_points: usize, freq_range: u64) -> Self {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, &[crate::rng::tag::GRID_SELECT, index]);
        let len = rng.random_range(2..=max_points.max(2));
        let mut ns: Vec<i64> = Vec::with_capacity(len);
        while ns.len() < len {
            let c = rng.random_range(0..freq_range as i64);
            if !ns.contains(&c) {
                ns.push(c);
            }
        }
        FrequencySet::integer_1d(
            freq_range,
            ns,
            Provenance::with_seed("random_lattice", seed),
        )
        .expect("distinct frequencies by construction")
    }

    /// Every lattice node of the base domain at scale R.
    pub fn full_grid(spec: &ManifoldSpec, r: u64) -> Result<Self> {
        if r < 2 {
            return Err(Error::BadScale {
                r,
                reason: "full grid needs R >= 2".into(),
            });
        }
        let lo = (spec.domain[0] * r as f64).ceil() as i64;
        // Half-open grid [0, R)^m intersected with the recorded domain.
        let hi_dom = (spec.domain[1] * r as f64).floor() as i64;
        let hi = hi_dom.min(r as i64 - 1);
        if hi < lo {
            return Err(Error::BadScale {
                r,
                reason: "domain contains no lattice nodes at this scale".into(),
            });
        }
        let per_axis: Vec<i64> = (lo..=hi).collect();
        let mut lattice = Vec::new();
        let mut idx = vec![0usize; spec.m];
        loop {
            lattice.push(idx.iter().map(|&i| per_axis[i]).collect::<Vec<i64>>());
            let mut axis = spec.m;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < per_axis.len() {
                    break;
                }
                idx[axis] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
        FrequencySet::from_lattice(spec.clone(), r, lattice, Provenance::new("fullgrid"))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Full frequency vector `s = (n, tail)` of point `i`.
    pub fn freq(&self, i: usize) -> Vec<f64> {
        let p = &self.points[i];
        let mut s = Vec::with_capacity(self.spec.d);
        s.extend(p.n.iter().map(|&v| v as f64));
        s.extend_from_slice(&p.tail);
        s
    }

    /// All frequency vectors, flattened row-major (len * d).
    pub fn freqs_flat(&self) -> Vec<f64> {
        let d = self.spec.d;
        let mut out = Vec::with_capacity(self.len() * d);
        for i in 0..self.len() {
            out.extend(self.freq(i));
        }
        out
    }

    /// Restriction to a subset of indices, preserving order.
    pub fn subset(&self, indices: &[usize], provenance: Provenance) -> FrequencySet {
        FrequencySet {
            r: self.r,
            spec: self.spec.clone(),
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            provenance,
        }
    }

    /// True when every coordinate of every frequency is an integer, so
    /// norms reduce to exact lattice energy counting.
    pub fn is_pure_lattice(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.tail.iter().all(|&t| t.fract() == 0.0 && t.abs() < 2e18))
    }
}

/// Axis-aligned box given by center and positive halfwidths.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub center: Vec<f64>,
    pub halfwidths: Vec<f64>,
}

/// Halfwidths below this are clamped before polarizing so the polar box
/// stays representable.
pub const MIN_HALFWIDTH: f64 = 9.094947017729282e-13; // 2^-40

impl BoundingBox {
    /// Origin-centered box with reciprocal halfwidths.
    pub fn polar(&self) -> BoundingBox {
        BoundingBox {
            center: vec![0.0; self.center.len()],
            halfwidths: self.halfwidths.iter().map(|l| 1.0 / l).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Smallest axis-aligned box containing the selected frequencies, with
/// halfwidths floored at 2^-40.
pub fn enclosing_box(fset: &FrequencySet, members: &[usize]) -> Result<BoundingBox> {
    if members.is_empty() {
        return Err(Error::EmptySelection);
    }
    let d = fset.spec.d;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &i in members {
        let s = fset.freq(i);
        for a in 0..d {
            lo[a] = lo[a].min(s[a]);
            hi[a] = hi[a].max(s[a]);
        }
    }
    let center: Vec<f64> = (0..d).map(|a| 0.5 * (lo[a] + hi[a])).collect();
    let halfwidths: Vec<f64> = (0..d)
        .map(|a| (0.5 * (hi[a] - lo[a])).max(MIN_HALFWIDTH))
        .collect();
    Ok(BoundingBox { center, halfwidths })
}

/// `ceil(r^(num/den))` computed exactly in integers when the powers fit
/// in u128, with a guarded floating-point fallback otherwise.
pub fn pow_ceil(r: u64, num: u32, den: u32) -> u64 {
    assert!(den > 0, "exponent denominator must be positive");
    if num == 0 || r <= 1 {
        return 1;
    }
    fn checked_pow(base: u64, exp: u32) -> Option<u128> {
        let mut acc: u128 = 1;
        for _ in 0..exp {
            acc = acc.checked_mul(base as u128)?;
        }
        Some(acc)
    }
    if let Some(rn) = checked_pow(r, num) {
        // Smallest c with c^den >= r^num.
        let mut lo: u64 = 1;
        let mut hi: u64 = r.max(2); // num <= den is the supported range
        if num > den {
            hi = u64::MAX >> 1;
        }
        while let Some(h) = checked_pow(hi, den) {
            if h >= rn {
                break;
            }
            hi = hi.saturating_mul(2);
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let ok = match checked_pow(mid, den) {
                Some(v) => v >= rn,
                None => true,
            };
            if ok {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    } else {
        let t = ((num as f64) * (r as f64).ln() / (den as f64)).exp();
        let rounded = t.round();
        if (t - rounded).abs() < 1e-6 * t.max(1.0) {
            rounded as u64
        } else {
            t.ceil() as u64
        }
    }
}

/// One cap of a base partition: its grid cell, base box and member indices.
#[derive(Debug, Clone)]
pub struct Cap {
    pub cell: Vec<u64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub members: Vec<usize>,
}

/// Partition of the base cube into an axis-aligned grid of half-open caps
/// of side exactly `1 / cells_per_axis`.
#[derive(Debug, Clone)]
pub struct CapPartition {
    pub cells_per_axis: u64,
    /// The scale exponent beta the grid was derived from (recorded).
    pub beta: Ratio<i64>,
    pub caps: Vec<Cap>,
}

impl CapPartition {
    /// Sum of member counts (must equal the set size for a true partition).
    pub fn total_members(&self) -> usize {
        self.caps.iter().map(|c| c.members.len()).sum()
    }

    /// Densest cap, ties broken by the earliest smallest member index.
    pub fn densest(&self) -> Option<&Cap> {
        self.caps
            .iter()
            .filter(|c| !c.members.is_empty())
            .max_by(|a, b| {
                a.members
                    .len()
                    .cmp(&b.members.len())
                    .then_with(|| b.members[0].cmp(&a.members[0]))
            })
    }
}

/// Cells are materialized (including empty ones) up to this many; beyond
/// it only nonempty cells are kept.
const MAX_MATERIALIZED_CELLS: u128 = 1 << 22;

/// Partition a set's base points into grid caps of side `1/ceil(R^beta)`.
pub fn cap_partition(fset: &FrequencySet, beta: Ratio<i64>) -> Result<CapPartition> {
    if beta <= Ratio::from_integer(0) || beta > Ratio::from_integer(1) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in (0, 1], got {beta}"
        )));
    }
    let cells = pow_ceil(fset.r, *beta.numer() as u32, *beta.denom() as u32);
    grid_partition(fset, cells, beta)
}

/// Partition by an explicit per-axis cell count (used by cap_partition and
/// by the equidistribution diagnostic).
pub fn grid_partition(fset: &FrequencySet, cells: u64, beta: Ratio<i64>) -> Result<CapPartition> {
    if cells == 0 {
        return Err(Error::InvalidArgument("cell count must be positive".into()));
    }
    let m = fset.spec.m;
    let r = fset.r;
    // Cell index of a lattice coordinate: floor(n * cells / R), half-open.
    let cell_of = |n: i64| -> u64 {
        let c = (n.max(0) as u128 * cells as u128 / r as u128) as u64;
        c.min(cells - 1)
    };
    let total = (cells as u128).checked_pow(m as u32);
    let materialize_all = matches!(total, Some(t) if t <= MAX_MATERIALIZED_CELLS);

    let mut by_cell: std::collections::HashMap<Vec<u64>, Vec<usize>> =
        std::collections::HashMap::new();
    for (i, p) in fset.points.iter().enumerate() {
        let cell: Vec<u64> = p.n.iter().map(|&n| cell_of(n)).collect();
        by_cell.entry(cell).or_default().push(i);
    }

    let mut cell_list: Vec<Vec<u64>> = if materialize_all {
        let mut cs = Vec::with_capacity(total.unwrap() as usize);
        let mut idx = vec![0u64; m];
        loop {
            cs.push(idx.clone());
            let mut axis = m;
            loop {
                if axis == 0 {
                    break;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < cells {
                    break;
                }
                idx[axis] = 0;
            }
            if idx.iter().all(|&v| v == 0) {
                break;
            }
        }
        cs
    } else {
        let mut cs: Vec<Vec<u64>> = by_cell.keys().cloned().collect();
        cs.sort();
        cs
    };
    // Deterministic cap order: lexicographic in the cell index.
    cell_list.sort();

    let side = 1.0 / cells as f64;
    let caps = cell_list
        .into_iter()
        .map(|cell| {
            let lo: Vec<f64> = cell.iter().map(|&c| c as f64 * side).collect();
            let hi: Vec<f64> = cell.iter().map(|&c| (c + 1) as f64 * side).collect();
            let members = by_cell.remove(&cell).unwrap_or_default();
            Cap {
                cell,
                lo,
                hi,
                members,
            }
        })
        .collect();
    Ok(CapPartition {
        cells_per_axis: cells,
        beta,
        caps,
    })
}

/// Overlapping dyadic cover of the unit square by axis-parallel rectangles
/// of width `2^l` and height `2^-l / R`, one partition per dyadic level.
/// Every base point lies in exactly one rectangle per level, hence in
/// exactly `log2(R) + 1` rectangles overall.
#[derive(Debug, Clone)]
pub struct DyadicCover {
    pub r: u64,
    /// R = 2^k.
    pub k: u32,
}

pub fn dyadic_cover(r: u64) -> Result<DyadicCover> {
    if r < 2 || !r.is_power_of_two() {
        return Err(Error::BadScale {
            r,
            reason: "dyadic cover needs R a power of two (>= 2)".into(),
        });
    }
    Ok(DyadicCover {
        r,
        k: r.trailing_zeros(),
    })
}

impl DyadicCover {
    /// Number of levels (k + 1).
    pub fn levels(&self) -> u32 {
        self.k + 1
    }

    /// Rectangles per level (exactly R).
    pub fn rects_per_level(&self) -> u64 {
        self.r
    }

    /// Rectangle of a base lattice point at a given level. Level `t` has
    /// rectangles of width `2^t / R` (covering `2^t` lattice columns) and
    /// height `2^-t` (covering `R / 2^t` lattice rows).
    pub fn rect_index(&self, level: u32, n: &[i64]) -> u64 {
        debug_assert!(level <= self.k);
        debug_assert_eq!(n.len(), 2);
        let col = (n[0] as u64) >> level; // in [0, R / 2^t)
        let row = (n[1] as u64) >> (self.k - level); // in [0, 2^t)
        let cols = self.r >> level;
        row * cols + col
    }

    /// Base-plane box `[lo, hi)` per axis of a rectangle.
    pub fn rect_box(&self, level: u32, index: u64) -> ([f64; 2], [f64; 2]) {
        let cols = self.r >> level;
        let col = index % cols;
        let row = index / cols;
        let w = (1u64 << level) as f64 / self.r as f64;
        let h = 1.0 / (1u64 << level) as f64;
        (
            [col as f64 * w, (col + 1) as f64 * w],
            [row as f64 * h, (row + 1) as f64 * h],
        )
    }

    /// Member indices per rectangle, per level, for a point set on `[0,R)^2`.
    pub fn members(&self, fset: &FrequencySet) -> Vec<Vec<Vec<usize>>> {
        let mut out =
            vec![vec![Vec::new(); self.rects_per_level() as usize]; self.levels() as usize];
        for (i, p) in fset.points.iter().enumerate() {
            for t in 0..=self.k {
                let rect = self.rect_index(t, &p.n);
                out[t as usize][rect as usize].push(i);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment(d: usize) -> ManifoldSpec {
        ManifoldSpec::new(ManifoldKind::MomentCurve, d).unwrap()
    }

    #[test]
    fn full_grid_moment_curve_tails() {
        let fs = FrequencySet::full_grid(&moment(2), 4).unwrap();
        assert_eq!(fs.len(), 4);
        let tails: Vec<f64> = fs.points.iter().map(|p| p.tail[0]).collect();
        // tail = n^2 / 4
        assert_eq!(tails, vec![0.0, 0.25, 1.0, 2.25]);
    }

    #[test]
    fn full_grid_hyperbolic_tails() {
        let spec = ManifoldSpec::new(ManifoldKind::HyperbolicParaboloid, 3).unwrap();
        let fs = FrequencySet::full_grid(&spec, 2).unwrap();
        assert_eq!(fs.len(), 4);
        let mut tails: Vec<f64> = fs.points.iter().map(|p| p.tail[0]).collect();
        tails.sort_by(f64::total_cmp);
        // tail = n1 * n2 / 2 over {0,1}^2
        assert_eq!(tails, vec![0.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn full_grid_size_is_r_to_the_m() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = FrequencySet::full_grid(&spec, 16).unwrap();
        assert_eq!(fs.len(), 256);
    }

    #[test]
    fn full_grid_rejects_small_scale() {
        assert!(FrequencySet::full_grid(&moment(2), 1).is_err());
    }

    #[test]
    fn restricted_domains_stay_inside() {
        for kind in [ManifoldKind::SphereGraph, ManifoldKind::ConeGraph] {
            let spec = ManifoldSpec::new(kind, 3).unwrap();
            let fs = FrequencySet::full_grid(&spec, 32).unwrap();
            assert!(!fs.is_empty());
            for p in &fs.points {
                for &n in &p.n {
                    let eta = n as f64 / 32.0;
                    assert!(eta >= spec.domain[0] - 1e-12 && eta <= spec.domain[1] + 1e-12);
                }
                assert!(p.tail.iter().all(|t| t.is_finite()));
            }
        }
    }

    #[test]
    fn duplicate_lattice_vectors_rejected() {
        let err = FrequencySet::integer_1d(4, vec![1, 2, 1], Provenance::new("test"));
        assert!(err.is_err());
    }

    #[test]
    fn orthonormality_surrogate_pairwise_distinct() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = FrequencySet::full_grid(&spec, 8).unwrap();
        for i in 0..fs.len() {
            for j in (i + 1)..fs.len() {
                let diff: Vec<i64> = fs.points[i]
                    .n
                    .iter()
                    .zip(&fs.points[j].n)
                    .map(|(a, b)| a - b)
                    .collect();
                assert!(diff.iter().any(|&v| v != 0));
            }
        }
    }

    #[test]
    fn cap_partition_moment_16_beta_half() {
        let fs = FrequencySet::full_grid(&moment(2), 16).unwrap();
        let cp = cap_partition(&fs, Ratio::new(1, 2)).unwrap();
        assert_eq!(cp.cells_per_axis, 4);
        assert_eq!(cp.caps.len(), 4);
        for cap in &cp.caps {
            assert_eq!(cap.members.len(), 4);
        }
        assert_eq!(cp.total_members(), 16);
    }

    #[test]
    fn cap_partition_elliptic_64_beta_half() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = FrequencySet::full_grid(&spec, 64).unwrap();
        let cp = cap_partition(&fs, Ratio::new(1, 2)).unwrap();
        // Oracle: enumerate the grid cells directly.
        assert_eq!(cp.cells_per_axis, 8);
        assert_eq!(cp.caps.len(), 64);
        for cap in &cp.caps {
            assert_eq!(cap.members.len(), 64, "cell {:?}", cap.cell);
        }
    }

    #[test]
    fn cap_partition_is_a_true_partition() {
        let fs = FrequencySet::full_grid(&moment(2), 37).unwrap();
        let cp = cap_partition(&fs, Ratio::new(1, 3)).unwrap();
        let mut seen = vec![false; fs.len()];
        for cap in &cp.caps {
            for &i in &cap.members {
                assert!(!seen[i], "index {i} appears twice");
                seen[i] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn degenerate_single_cell_partition() {
        let fs = FrequencySet::full_grid(&moment(2), 8).unwrap();
        let cp = grid_partition(&fs, 1, Ratio::new(1, 8)).unwrap();
        assert_eq!(cp.caps.len(), 1);
        assert_eq!(cp.caps[0].members.len(), fs.len());
    }

    #[test]
    fn pow_ceil_exact_values() {
        assert_eq!(pow_ceil(64, 1, 2), 8);
        assert_eq!(pow_ceil(64, 1, 3), 4);
        assert_eq!(pow_ceil(4096, 2, 3), 256);
        assert_eq!(pow_ceil(8, 1, 3), 2);
        assert_eq!(pow_ceil(9, 1, 2), 3);
        assert_eq!(pow_ceil(10, 1, 2), 4);
        assert_eq!(pow_ceil(65536, 1, 2), 256);
        assert_eq!(pow_ceil(7, 1, 1), 7);
    }

    #[test]
    fn dyadic_cover_structure() {
        let cov = dyadic_cover(8).unwrap();
        assert_eq!(cov.levels(), 4);
        assert_eq!(cov.rects_per_level(), 8);
        // 32 rectangles total; every lattice point has multiplicity 4.
        let spec = ManifoldSpec::new(ManifoldKind::HyperbolicParaboloid, 3).unwrap();
        let fs = FrequencySet::full_grid(&spec, 8).unwrap();
        let members = cov.members(&fs);
        let total_rects: usize = members.iter().map(|lvl| lvl.len()).sum();
        assert_eq!(total_rects, 32);
        let mut mult = vec![0u32; fs.len()];
        for lvl in &members {
            for rect in lvl {
                for &i in rect {
                    mult[i] += 1;
                }
            }
        }
        assert!(mult.iter().all(|&c| c == 4));
        // Per-level rectangle area is exactly 1/R and levels partition.
        for t in 0..=cov.k {
            let mut covered = 0usize;
            for rect in 0..cov.rects_per_level() {
                let (xb, yb) = cov.rect_box(t, rect);
                let area = (xb[1] - xb[0]) * (yb[1] - yb[0]);
                assert!((area - 1.0 / 8.0).abs() < 1e-15);
                covered += members[t as usize][rect as usize].len();
            }
            assert_eq!(covered, fs.len());
        }
    }

    #[test]
    fn dyadic_cover_r2_and_rejections() {
        let cov = dyadic_cover(2).unwrap();
        assert_eq!(cov.levels(), 2);
        assert_eq!(cov.rects_per_level(), 2);
        assert!(dyadic_cover(6).is_err());
        assert!(dyadic_cover(1).is_err());
    }

    #[test]
    fn enclosing_box_degenerate_and_full() {
        let fs = FrequencySet::integer_1d(4, vec![0, 1, 2, 3], Provenance::new("test")).unwrap();
        let single = enclosing_box(&fs, &[1]).unwrap();
        assert_eq!(single.halfwidths[0], MIN_HALFWIDTH);
        let polar = single.polar();
        assert!((polar.halfwidths[0] - 1.0 / MIN_HALFWIDTH).abs() < 1.0);

        let fs2 = FrequencySet::full_grid(&moment(2), 64).unwrap();
        let all: Vec<usize> = (0..fs2.len()).collect();
        let bb = enclosing_box(&fs2, &all).unwrap();
        // Extremes at n = 0 and n = 63: box spans [0, 63] x [0, 63^2/64].
        assert!((bb.center[0] - 31.5).abs() < 1e-12);
        assert!((bb.halfwidths[0] - 31.5).abs() < 1e-12);
        assert!((bb.halfwidths[1] - 63.0 * 63.0 / 128.0).abs() < 1e-9);

        assert!(matches!(
            enclosing_box(&fs2, &[]),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn enclosing_box_arc_scaling() {
        // Arc of the parabola of base length R^{-1/2} at R = 256 spans
        // about R^{1/2} in the first frequency axis.
        let fs = FrequencySet::full_grid(&moment(2), 256).unwrap();
        let members: Vec<usize> = (0..16).collect();
        let bb = enclosing_box(&fs, &members).unwrap();
        assert!((bb.halfwidths[0] - 7.5).abs() < 1e-12);
        // Tail extent of the origin arc is (15^2)/256 < 1.
        assert!(bb.halfwidths[1] < 1.0);
    }

    #[test]
    fn critical_exponents() {
        let ep3 = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        assert_eq!(ep3.critical_exponent().unwrap(), Ratio::from_integer(4));
        let mc3 = moment(3);
        assert_eq!(mc3.critical_exponent().unwrap(), Ratio::from_integer(12));
        let cone4 = ManifoldSpec::new(ManifoldKind::ConeGraph, 4).unwrap();
        assert_eq!(cone4.critical_exponent().unwrap(), Ratio::from_integer(4));
        let sphere4 = ManifoldSpec::new(ManifoldKind::SphereGraph, 4).unwrap();
        assert_eq!(sphere4.critical_exponent().unwrap(), Ratio::new(10, 3));
        assert!(ManifoldSpec::new(ManifoldKind::ConeGraph, 2).is_err());
    }

    #[test]
    fn densest_cap_prefers_first_index_on_ties() {
        let fs = FrequencySet::full_grid(&moment(2), 16).unwrap();
        let cp = cap_partition(&fs, Ratio::new(1, 2)).unwrap();
        let densest = cp.densest().unwrap();
        // All caps have 4 members; the tie must resolve to the cap holding
        // index 0 (the origin arc).
        assert!(densest.members.contains(&0));
    }
}
