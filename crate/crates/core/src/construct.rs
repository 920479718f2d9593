//! Builders for the candidate frequency sets: cap-wise random assembly on
//! hypersurfaces, the explicit squares set, the hyperbolic-paraboloid
//! pipeline, the moment-curve recursion and the small-cap sets.
//!
//! Every construction emits points whose base coordinates are exact
//! lattice vectors, so orthonormality holds by the set invariant. The
//! probabilistic steps are realized as Bernoulli draws with a size window
//! `[t/2, 3t/2]` around the integer target and a bounded retry budget.

use crate::error::{Error, Result};
use crate::manifolds::{
    cap_partition, dyadic_cover, grid_partition, pow_ceil, FrequencySet, ManifoldKind,
    ManifoldSpec, Provenance,
};
use crate::rng::{stream, tag};
use crate::select::{family_select, Family, FamilyConfig, FamilyOutcome};
use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Audit record of a construction, embedded into provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub method: String,
    pub r: u64,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    /// Per-piece integer targets after ceiling, as audited.
    pub piece_targets: Vec<u64>,
    /// The exponent-formula total the final size is windowed against.
    pub total_target: f64,
}

const PIECE_RETRIES: u32 = 32;

fn integer_sqrt(r: u64) -> Option<u64> {
    let s = (r as f64).sqrt().round() as u64;
    (s.saturating_sub(1)..=s + 1).find(|&c| c * c == r)
}

/// Bernoulli-select indices out of `pool` aiming at `target`, retrying
/// until the count lands in [target/2, 3 target/2].
fn windowed_pick(
    pool: &[usize],
    target: u64,
    seed: u64,
    scope_tag: u64,
    scope: u64,
    context: &str,
) -> Result<Vec<usize>> {
    let n = pool.len() as u64;
    if target == 0 || n == 0 {
        return Ok(Vec::new());
    }
    if target >= n {
        return Ok(pool.to_vec());
    }
    let delta = target as f64 / n as f64;
    let lo = target as f64 / 2.0;
    let hi = 3.0 * target as f64 / 2.0;
    let mut history = Vec::new();
    for draw in 0..=PIECE_RETRIES {
        let picked: Vec<usize> = pool
            .iter()
            .enumerate()
            .filter(|(j, _)| {
                stream(seed, &[scope_tag, scope, draw as u64, *j as u64]).random::<f64>() < delta
            })
            .map(|(_, &i)| i)
            .collect();
        let size = picked.len() as f64;
        if size >= lo && size <= hi {
            return Ok(picked);
        }
        history.push(picked.len());
    }
    Err(Error::RetriesExhausted {
        attempts: PIECE_RETRIES + 1,
        context: format!("{context}: sizes {history:?} missed [{lo:.1}, {hi:.1}]"),
    })
}

fn window_check(total: u64, formula: f64, context: &str) -> Result<()> {
    let lo = formula / 2.0;
    let hi = 1.5 * formula;
    if (total as f64) < lo || (total as f64) > hi {
        return Err(Error::SizeWindow {
            got: total,
            lo: lo.floor() as u64,
            hi: hi.ceil() as u64,
            context: context.to_string(),
        });
    }
    Ok(())
}

/// Cap-wise assembly on a hypersurface at the critical exponent: caps of
/// side R^{-1/2}, each thinned to its size to the power 2/p_d.
pub fn capwise_build(spec: &ManifoldSpec, r: u64, seed: u64) -> Result<FrequencySet> {
    if !spec.is_hypersurface() {
        return Err(Error::InvalidManifold(
            "capwise_build needs a hypersurface (m = d - 1)".into(),
        ));
    }
    if integer_sqrt(r).is_none() {
        return Err(Error::BadScale {
            r,
            reason: "capwise_build needs a perfect square R for exact caps".into(),
        });
    }
    let pd = spec.critical_exponent()?;
    let grid = FrequencySet::full_grid(spec, r)?;
    let caps = cap_partition(&grid, Ratio::new(1, 2))?;

    let mut picked_all = Vec::new();
    let mut piece_targets = Vec::new();
    let mut target_sum = 0u64;
    for (ci, cap) in caps.caps.iter().enumerate() {
        if cap.members.is_empty() {
            continue;
        }
        // Per-cap target |cap|^{2/p_d}.
        let t = pow_ceil(
            cap.members.len() as u64,
            2 * (*pd.denom() as u32),
            *pd.numer() as u32,
        );
        piece_targets.push(t);
        target_sum += t;
        let picked = windowed_pick(
            &cap.members,
            t,
            seed,
            tag::CAPWISE,
            ci as u64,
            &format!("cap {ci}"),
        )?;
        picked_all.extend(picked);
    }
    picked_all.sort_unstable();
    window_check(picked_all.len() as u64, target_sum as f64, "capwise total")?;

    let params = ConstructionParams {
        method: "capwise".into(),
        r,
        p: Some(*pd.numer() as f64 / *pd.denom() as f64),
        seed: Some(seed),
        piece_targets,
        total_target: target_sum as f64,
    };
    let mut prov = Provenance::with_seed("capwise", seed);
    prov.params = serde_json::to_value(&params)?;
    Ok(grid.subset(&picked_all, prov))
}

/// The explicit, seed-free squares construction on a d = 3 hypersurface:
/// base points `(i/sqrt(R) + n^2/R, j/sqrt(R) + m^2/R)` lifted through pi.
pub fn squares_build(r: u64, spec: &ManifoldSpec) -> Result<FrequencySet> {
    if spec.d != 3 || !spec.is_hypersurface() {
        return Err(Error::InvalidManifold(
            "squares_build is defined on d = 3 hypersurfaces".into(),
        ));
    }
    let s = integer_sqrt(r).ok_or_else(|| Error::BadScale {
        r,
        reason: "squares_build needs sqrt(R) integer".into(),
    })?;
    let q = integer_sqrt(s).ok_or_else(|| Error::BadScale {
        r,
        reason: "squares_build needs R^{1/4} integer".into(),
    })?;
    if s < 2 || q < 2 {
        return Err(Error::BadScale {
            r,
            reason: "squares_build needs R >= 16".into(),
        });
    }
    let mut lattice = Vec::new();
    for i in 0..(s - 1) {
        for j in 0..(s - 1) {
            for n in 1..q {
                for m in 1..q {
                    lattice.push(vec![(i * s + n * n) as i64, (j * s + m * m) as i64]);
                }
            }
        }
    }
    let expected = (s - 1) * (s - 1) * (q - 1) * (q - 1);
    debug_assert_eq!(lattice.len() as u64, expected);
    let params = ConstructionParams {
        method: "squares".into(),
        r,
        p: Some(4.0),
        seed: None,
        piece_targets: vec![expected],
        total_target: expected as f64,
    };
    let mut prov = Provenance::new("squares");
    prov.params = serde_json::to_value(&params)?;
    FrequencySet::from_lattice(spec.clone(), r, lattice, prov)
}

/// Hyperbolic-paraboloid pipeline: Bernoulli selection at density
/// R^{-1/2} validated against the overlapping dyadic cover at p = 4.
pub fn hyperbolic_build(r: u64, seed: u64) -> Result<FamilyOutcome> {
    let spec = ManifoldSpec::new(ManifoldKind::HyperbolicParaboloid, 3)?;
    let grid = FrequencySet::full_grid(&spec, r)?;
    let cover = dyadic_cover(r)?;
    let mut outcome = family_select(
        &grid,
        &Family::Dyadic(&cover),
        4.0,
        seed,
        &FamilyConfig::default(),
        32,
    )?;
    let formula = (r as f64).powf(1.5);
    window_check(outcome.subset.len() as u64, formula, "hyperbolic total")?;
    let params = ConstructionParams {
        method: "hyperbolic".into(),
        r,
        p: Some(4.0),
        seed: Some(seed),
        piece_targets: vec![],
        total_target: formula,
    };
    let mut prov = outcome.subset.provenance.clone();
    prov.method = "hyperbolic".into();
    if let serde_json::Value::Object(map) = &mut prov.params {
        map.insert("construction".into(), serde_json::to_value(&params)?);
        map.insert(
            "probe_table".into(),
            serde_json::to_value(&outcome.probe_table)?,
        );
    }
    outcome.subset.provenance = prov;
    Ok(outcome)
}

/// Lattice range [lo, hi) of one piece when splitting an interval of
/// lattice points into pieces of about `piece_len` points.
fn split_ranges(lo: i64, hi: i64, piece_len: i64) -> Vec<(i64, i64)> {
    let len = hi - lo;
    let pieces = ((len + piece_len - 1) / piece_len).max(1);
    (0..pieces)
        .map(|j| {
            let a = lo + j * len / pieces;
            let b = lo + (j + 1) * len / pieces;
            (a, b)
        })
        .filter(|(a, b)| b > a)
        .collect()
}

/// Moment-curve selection for one arc of Gamma^dim spanning the lattice
/// interval [lo, hi). Returns selected lattice coordinates.
fn moment_arc(
    dim: usize,
    r: u64,
    lo: i64,
    hi: i64,
    seed: u64,
    scope: &mut u64,
    targets: &mut Vec<u64>,
) -> Result<Vec<i64>> {
    let my_scope = *scope;
    *scope += 1;
    if dim == 2 {
        // Base case: thin the arc's N points down to N^{2/gamma_2} = N^{1/3}.
        let n_points = (hi - lo) as u64;
        if n_points == 0 {
            return Ok(Vec::new());
        }
        let t = pow_ceil(n_points, 1, 3);
        targets.push(t);
        let pool: Vec<usize> = (0..n_points as usize).collect();
        let picked = windowed_pick(
            &pool,
            t,
            seed,
            tag::MOMENT,
            my_scope,
            &format!("moment base arc [{lo},{hi})"),
        )?;
        return Ok(picked.into_iter().map(|j| lo + j as i64).collect());
    }

    // Split into sub-arcs of length ~ R^{-1/(dim-1)} and recurse.
    let sub_count_global = pow_ceil(r, 1, (dim - 1) as u32);
    let piece_len = r.div_ceil(sub_count_global).max(1) as i64;
    let mut union = Vec::new();
    for (a, b) in split_ranges(lo, hi, piece_len) {
        union.extend(moment_arc(dim - 1, r, a, b, seed, scope, targets)?);
    }
    if union.is_empty() {
        return Ok(Vec::new());
    }
    // Thin the union to |S|^{gamma_{dim-1} / gamma_dim}.
    let gd_prev = ((dim - 1) * dim) as u32;
    let gd = (dim * (dim + 1)) as u32;
    let t = pow_ceil(union.len() as u64, gd_prev, gd);
    targets.push(t);
    let pool: Vec<usize> = (0..union.len()).collect();
    let picked = windowed_pick(
        &pool,
        t,
        seed,
        tag::MOMENT,
        my_scope,
        &format!("moment thinning dim {dim} arc [{lo},{hi})"),
    )?;
    Ok(picked.into_iter().map(|j| union[j]).collect())
}

/// Moment-curve recursion: arcs of length R^{-1/d}, each built by the
/// dimension recursion, no further thinning at the top level. The first
/// coordinates stay on the (1/R)-lattice at every stage.
pub fn moment_build(d: usize, r: u64, seed: u64) -> Result<FrequencySet> {
    if !(2..=4).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "moment_build supports 2 <= d <= 4 (exact validation is infeasible beyond), got {d}"
        )));
    }
    let spec = ManifoldSpec::new(ManifoldKind::MomentCurve, d)?;
    let arc_count = pow_ceil(r, 1, d as u32);
    if r / arc_count == 0 {
        return Err(Error::BadScale {
            r,
            reason: "arcs would contain no lattice points".into(),
        });
    }
    let piece_len = r.div_ceil(arc_count).max(1) as i64;
    let mut scope = 0u64;
    let mut targets = Vec::new();
    let mut lattice = Vec::new();
    for (a, b) in split_ranges(0, r as i64, piece_len) {
        let picked = moment_arc(d, r, a, b, seed, &mut scope, &mut targets)?;
        lattice.extend(picked.into_iter().map(|n| vec![n]));
    }
    let gamma_d = (d * (d + 1)) as u32;
    let formula = (r as f64).powf(2.0 * d as f64 / gamma_d as f64);
    window_check(lattice.len() as u64, formula, "moment total")?;

    let params = ConstructionParams {
        method: "moment".into(),
        r,
        p: Some(gamma_d as f64),
        seed: Some(seed),
        piece_targets: targets,
        total_target: formula,
    };
    let mut prov = Provenance::with_seed("moment", seed);
    prov.params = serde_json::to_value(&params)?;
    FrequencySet::from_lattice(spec, r, lattice, prov)
}

/// Small-cap l^p sets: arcs of length R^{-beta} with beta = 2/(p-2) on
/// the parabola (4 <= p < 6) and beta = 2/(p-6) on Gamma^3 (10 <= p < 12,
/// per-arc sets built by the moment recursion at arc scale).
pub fn smallcap_build(d: usize, r: u64, p: Ratio<i64>, seed: u64) -> Result<FrequencySet> {
    let p_f = *p.numer() as f64 / *p.denom() as f64;
    let (beta, spec) = match d {
        2 => {
            if !(4.0..6.0).contains(&p_f) {
                return Err(Error::InvalidArgument(format!(
                    "smallcap on the parabola needs 4 <= p < 6, got {p_f}"
                )));
            }
            let beta = Ratio::new(2, 1) / (p - Ratio::new(2, 1));
            (beta, ManifoldSpec::new(ManifoldKind::MomentCurve, 2)?)
        }
        3 => {
            if !(10.0..12.0).contains(&p_f) {
                return Err(Error::InvalidArgument(format!(
                    "smallcap on Gamma^3 needs 10 <= p < 12, got {p_f}"
                )));
            }
            let beta = Ratio::new(2, 1) / (p - Ratio::new(6, 1));
            (beta, ManifoldSpec::new(ManifoldKind::MomentCurve, 3)?)
        }
        _ => {
            return Err(Error::InvalidArgument(
                "smallcap sets are built for d in {2, 3}".into(),
            ))
        }
    };
    let arc_count = pow_ceil(r, *beta.numer() as u32, *beta.denom() as u32);
    let piece_len = r.div_ceil(arc_count).max(1) as i64;
    let mut targets = Vec::new();
    let mut lattice = Vec::new();
    let mut scope_counter = 1_000_000u64;
    for (ai, (a, b)) in split_ranges(0, r as i64, piece_len).into_iter().enumerate() {
        if d == 2 {
            // Per-arc target (arc size)^{2/p}.
            let n_points = (b - a) as u64;
            let t = pow_ceil(n_points, 2 * (*p.denom() as u32), *p.numer() as u32);
            targets.push(t);
            let pool: Vec<usize> = (0..n_points as usize).collect();
            let picked = windowed_pick(
                &pool,
                t,
                seed,
                tag::SMALLCAP,
                ai as u64,
                &format!("smallcap arc {ai}"),
            )?;
            lattice.extend(picked.into_iter().map(|j| vec![a + j as i64]));
        } else {
            // Gamma^3: run the moment machinery inside the arc, then thin
            // the union to |S|^{6/p}.
            let sub_count = pow_ceil(r, 1, 2);
            let sub_len = r.div_ceil(sub_count).max(1) as i64;
            let mut union = Vec::new();
            for (sa, sb) in split_ranges(a, b, sub_len) {
                union.extend(moment_arc(
                    2,
                    r,
                    sa,
                    sb,
                    seed,
                    &mut scope_counter,
                    &mut Vec::new(),
                )?);
            }
            if union.is_empty() {
                continue;
            }
            let t = pow_ceil(
                union.len() as u64,
                6 * (*p.denom() as u32),
                *p.numer() as u32,
            );
            targets.push(t);
            let pool: Vec<usize> = (0..union.len()).collect();
            let picked = windowed_pick(
                &pool,
                t,
                seed,
                tag::SMALLCAP,
                ai as u64,
                &format!("smallcap gamma3 arc {ai}"),
            )?;
            lattice.extend(picked.into_iter().map(|j| vec![union[j]]));
        }
    }
    let formula = (r as f64).powf(2.0 * d as f64 / p_f);
    window_check(lattice.len() as u64, formula, "smallcap total")?;

    let params = ConstructionParams {
        method: "smallcap".into(),
        r,
        p: Some(p_f),
        seed: Some(seed),
        piece_targets: targets,
        total_target: formula,
    };
    let mut prov = Provenance::with_seed("smallcap", seed);
    prov.params = serde_json::to_value(&params)?;
    FrequencySet::from_lattice(spec, r, lattice, prov)
}

/// Full grid thinned by the generic selector density M^{2/p-1}
/// (q = 2, K_2 = 1): the maximal-size random construction.
pub fn fullgrid_select_build(
    spec: &ManifoldSpec,
    r: u64,
    p: f64,
    seed: u64,
) -> Result<FrequencySet> {
    let grid = FrequencySet::full_grid(spec, r)?;
    let delta = crate::select::selection_density(grid.len() as u64, 1.0, 2.0, p)?;
    let mut out = crate::select::bernoulli_select(&grid, delta, seed, 32)?;
    let params = ConstructionParams {
        method: "fullgrid-select".into(),
        r,
        p: Some(p),
        seed: Some(seed),
        piece_targets: vec![],
        total_target: grid.len() as f64 * delta,
    };
    let mut prov = out.provenance.clone();
    prov.method = "fullgrid-select".into();
    if let serde_json::Value::Object(map) = &mut prov.params {
        map.insert("construction".into(), serde_json::to_value(&params)?);
    }
    out.provenance = prov;
    Ok(out)
}

/// Equidistribution counting helper shared with the diagnostics: counts
/// per grid cap of side ~ delta.
pub fn cap_counts(fset: &FrequencySet, cells: u64) -> Result<Vec<usize>> {
    let cp = grid_partition(fset, cells, Ratio::new(1, 1))?;
    Ok(cp.caps.iter().map(|c| c.members.len()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capwise_elliptic_d3_r64() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = capwise_build(&spec, 64, 7).unwrap();
        // 64 caps x target 8 = 512 = R^{2d/p_d}; the window allows CH
        // fluctuation around it.
        let size = fs.len() as f64;
        assert!((256.0..=768.0).contains(&size), "size {size}");
        // Per-cap sizes stay in their own windows.
        let grid_cells = 8u64;
        let counts = cap_counts(&fs, grid_cells).unwrap();
        for c in counts {
            assert!((4..=12).contains(&c), "cap count {c}");
        }
    }

    #[test]
    fn capwise_parabola_r64() {
        let spec = ManifoldSpec::new(ManifoldKind::MomentCurve, 2).unwrap();
        let fs = capwise_build(&spec, 64, 3).unwrap();
        // 8 arcs x ceil(8^{1/3}) = 2 -> 16 targeted.
        let size = fs.len() as f64;
        assert!((8.0..=24.0).contains(&size), "size {size}");
    }

    #[test]
    fn capwise_degenerate_r4() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = capwise_build(&spec, 4, 1).unwrap();
        // 2x2 caps of side 1/2, per-cap target 2, total 8 = 4^{3/2}.
        let size = fs.len() as f64;
        assert!((4.0..=12.0).contains(&size), "size {size}");
    }

    #[test]
    fn capwise_base_selection_ignores_the_graph_map() {
        // Same (R, seed) on two different hypersurfaces picks the same
        // base lattice: the selection never looks at pi.
        let para = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let hyp = ManifoldSpec::new(ManifoldKind::HyperbolicParaboloid, 3).unwrap();
        let a = capwise_build(&para, 16, 5).unwrap();
        let b = capwise_build(&hyp, 16, 5).unwrap();
        let an: Vec<&Vec<i64>> = a.points.iter().map(|p| &p.n).collect();
        let bn: Vec<&Vec<i64>> = b.points.iter().map(|p| &p.n).collect();
        assert_eq!(an, bn);
    }

    #[test]
    fn capwise_rejects_bad_input() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        assert!(capwise_build(&spec, 48, 1).is_err()); // not a perfect square
        let curve = ManifoldSpec::new(ManifoldKind::MomentCurve, 3).unwrap();
        assert!(capwise_build(&curve, 64, 1).is_err()); // not a hypersurface
    }

    #[test]
    fn squares_sizes_are_exact() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        assert_eq!(squares_build(16, &spec).unwrap().len(), 9);
        assert_eq!(squares_build(81, &spec).unwrap().len(), 256);
        assert_eq!(squares_build(256, &spec).unwrap().len(), 2025);
        assert!(squares_build(15, &spec).is_err());
        assert!(squares_build(64, &spec).is_err()); // 64^{1/4} not integer
    }

    #[test]
    fn squares_base_coordinates_stay_inside() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        for r in [16u64, 81, 256] {
            let fs = squares_build(r, &spec).unwrap();
            for pt in &fs.points {
                for &n in &pt.n {
                    assert!(n >= 0 && (n as u64) < r, "coordinate {n} at R = {r}");
                }
            }
        }
    }

    #[test]
    fn squares_build_is_deterministic() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let a = squares_build(81, &spec).unwrap();
        let b = squares_build(81, &spec).unwrap();
        assert_eq!(
            a.points.iter().map(|p| &p.n).collect::<Vec<_>>(),
            b.points.iter().map(|p| &p.n).collect::<Vec<_>>()
        );
    }

    #[test]
    fn moment_d2_matches_capwise_arithmetic() {
        let fs = moment_build(2, 4096, 9).unwrap();
        // 64 arcs x 4 = 256 = R^{2/3} targeted.
        let size = fs.len() as f64;
        assert!((128.0..=384.0).contains(&size), "size {size}");
    }

    #[test]
    fn moment_d3_bookkeeping() {
        let fs = moment_build(3, 4096, 11).unwrap();
        // Total ~ R^{1/2} = 64.
        let size = fs.len() as f64;
        assert!((32.0..=96.0).contains(&size), "size {size}");
        // First coordinates exactly on the (1/R)-lattice: structural, the
        // points are stored as integers.
        for pt in &fs.points {
            assert!(pt.n[0] >= 0 && (pt.n[0] as u64) < 4096);
            // Tails recompute from the lattice part.
            let eta = pt.n[0] as f64 / 4096.0;
            assert!((pt.tail[0] - 4096.0 * eta * eta).abs() < 1e-9);
        }
    }

    #[test]
    fn moment_rejects_out_of_range_dimension() {
        assert!(moment_build(5, 4096, 1).is_err());
        assert!(moment_build(1, 4096, 1).is_err());
    }

    #[test]
    fn smallcap_parabola_p4_keeps_full_grid() {
        // beta = 1: arcs of length 1/R with one point each.
        let fs = smallcap_build(2, 64, Ratio::new(4, 1), 3).unwrap();
        assert_eq!(fs.len(), 64);
    }

    #[test]
    fn smallcap_parabola_p5() {
        // beta = 2/3: 256 arcs x ceil((16)^{2/5}) = 256 x 4 at R = 4096.
        let fs = smallcap_build(2, 4096, Ratio::new(5, 1), 5).unwrap();
        let formula = 4096.0f64.powf(4.0 / 5.0);
        let size = fs.len() as f64;
        assert!(
            size >= formula / 2.0 && size <= 1.5 * formula,
            "size {size}"
        );
    }

    #[test]
    fn smallcap_size_exponent_regression() {
        let mut pairs = Vec::new();
        for r in [1024u64, 4096, 16384] {
            let fs = smallcap_build(2, r, Ratio::new(5, 1), 2).unwrap();
            pairs.push((r as f64, fs.len() as f64));
        }
        let fit = crate::diagnose::scaling_regression(&pairs).unwrap();
        assert!((fit.slope - 0.8).abs() < 0.05, "slope {}", fit.slope);
    }

    #[test]
    fn smallcap_gamma3_p10() {
        let fs = smallcap_build(3, 4096, Ratio::new(10, 1), 7).unwrap();
        let formula = 4096.0f64.powf(6.0 / 10.0);
        let size = fs.len() as f64;
        assert!(
            size >= formula / 2.0 && size <= 1.5 * formula,
            "size {size}"
        );
        assert_eq!(fs.spec.d, 3);
    }

    #[test]
    fn smallcap_range_checks() {
        assert!(smallcap_build(2, 64, Ratio::new(7, 1), 1).is_err());
        assert!(smallcap_build(3, 4096, Ratio::new(9, 1), 1).is_err());
        assert!(smallcap_build(4, 64, Ratio::new(11, 1), 1).is_err());
    }

    #[test]
    fn fullgrid_select_hits_target() {
        let spec = ManifoldSpec::new(ManifoldKind::EllipticParaboloid, 3).unwrap();
        let fs = fullgrid_select_build(&spec, 16, 4.0, 3).unwrap();
        // M = 256, delta = M^{-1/2} = 1/16: expect 16.
        let size = fs.len() as f64;
        assert!((8.0..=24.0).contains(&size), "size {size}");
    }
}
