//! Necessity and distribution diagnostics: constructive interference,
//! densest-cap necessity probes, ball-count nonconcentration, cap
//! equidistribution and scaling regression.

use crate::error::{Error, Result};
use crate::expsum::{norm_lp, Coefficients, NormConfig, NormReport};
use crate::manifolds::{cap_partition, enclosing_box, grid_partition, FrequencySet};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Least-squares power-law fit `value ~ x^slope` on log-log pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub pairs: Vec<(f64, f64)>,
    pub slope: f64,
    /// Two residual standard errors of the slope.
    pub halfwidth: f64,
    pub intercept: f64,
}

pub fn scaling_regression(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "scaling regression needs at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(x, v)| x <= 0.0 || v <= 0.0) {
        return Err(Error::InvalidArgument(
            "scaling regression needs positive scales and values".into(),
        ));
    }
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(x, v)| (x.ln(), v.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "scaling regression needs at least two distinct scales".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (intercept + slope * p.0);
            r * r
        })
        .sum();
    let dof = (logs.len() - 2).max(1) as f64;
    let se = (ss_res / dof / sxx).sqrt();
    if !slope.is_finite() {
        return Err(Error::InvalidArgument("non-finite slope".into()));
    }
    Ok(ScalingFit {
        pairs: pairs.to_vec(),
        slope,
        halfwidth: 2.0 * se,
        intercept,
    })
}

/// Minimum of `|sum e(s.x)| / count` over a sample grid of the shrunken
/// polar box of the members' bounding box, intersected with the positive
/// domain. Inside that region the phase spread is at most 1/100 of a
/// cycle, so the ratio provably stays above cos(2 pi / 100).
pub fn interference_lower(
    fset: &FrequencySet,
    members: &[usize],
    samples_per_axis: usize,
) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptySelection);
    }
    let d = fset.spec.d;
    let bb = enclosing_box(fset, members)?;
    let rf = fset.r as f64;
    // Halfwidth of the admissible region along each axis.
    let widths: Vec<f64> = bb
        .halfwidths
        .iter()
        .map(|l| (1.0 / (100.0 * d as f64 * l)).min(rf))
        .collect();
    if widths.iter().any(|w| !w.is_finite() || *w <= 0.0) {
        return Err(Error::InvalidArgument(
            "polar region degenerate after clamping".into(),
        ));
    }
    let g = samples_per_axis.max(2);
    let count = members.len() as f64;
    let freqs: Vec<Vec<f64>> = members.iter().map(|&i| fset.freq(i)).collect();

    let mut min_ratio = f64::INFINITY;
    let mut grid_idx = vec![0usize; d];
    loop {
        let x: Vec<f64> = (0..d)
            .map(|a| widths[a] * grid_idx[a] as f64 / (g - 1) as f64)
            .collect();
        let mut re = 0.0;
        let mut im = 0.0;
        for s in &freqs {
            let phase: f64 = s.iter().zip(&x).map(|(si, xi)| si * xi).sum();
            let (sn, cs) = (TAU * phase).sin_cos();
            re += cs;
            im += sn;
        }
        let ratio = (re * re + im * im).sqrt() / count;
        min_ratio = min_ratio.min(ratio);

        let mut axis = d;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            grid_idx[axis] += 1;
            if grid_idx[axis] < g {
                break;
            }
            grid_idx[axis] = 0;
        }
        if grid_idx.iter().all(|&v| v == 0) {
            break;
        }
    }
    Ok(min_ratio)
}

/// One necessity-probe row: the left/right ratio of the square-function
/// inequality tested with the densest cap's indicator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NecessityRow {
    pub r: u64,
    pub p: f64,
    pub beta: f64,
    pub cap_size: usize,
    /// `norm^p / ||a||_2^p`; grows with R below the critical exponent.
    pub ratio: f64,
    pub norm: NormReport,
}

pub fn necessity_probe(
    fset: &FrequencySet,
    p: f64,
    beta: Ratio<i64>,
    cfg: &NormConfig,
) -> Result<NecessityRow> {
    let caps = cap_partition(fset, beta)?;
    let densest = caps.densest().ok_or(Error::EmptySelection)?;
    let a = Coefficients::indicator(fset.len(), &densest.members);
    let norm = norm_lp(fset, &a, p, cfg)?;
    let ratio = (norm.value / a.l2()).powf(p);
    Ok(NecessityRow {
        r: fset.r,
        p,
        beta: *beta.numer() as f64 / *beta.denom() as f64,
        cap_size: densest.members.len(),
        ratio,
        norm,
    })
}

/// Maximal normalized ball counts of the rescaled points, with the fitted
/// nonconcentration exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallCounts {
    /// (radius, max over centers of the fraction of points within it).
    pub rows: Vec<(f64, f64)>,
    /// Power-law fit of the rows; absent with fewer than three radii.
    pub alpha: Option<ScalingFit>,
}

pub fn ball_counts(fset: &FrequencySet, radii: &[f64]) -> Result<BallCounts> {
    if fset.is_empty() {
        return Err(Error::EmptySelection);
    }
    if radii.is_empty() {
        return Err(Error::InvalidArgument("need at least one radius".into()));
    }
    let rf = fset.r as f64;
    for &r in radii {
        if !(r > 1.0 / rf && r <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "radius {r} outside the resolvable range (1/R, 1]"
            )));
        }
    }
    let d = fset.spec.d;
    let m = fset.len();
    // Rescaled points xi = s / R.
    let pts: Vec<Vec<f64>> = (0..m)
        .map(|i| fset.freq(i).iter().map(|v| v / rf).collect())
        .collect();
    let mut sorted_radii: Vec<f64> = radii.to_vec();
    sorted_radii.sort_by(f64::total_cmp);

    let rows: Vec<(f64, f64)> = sorted_radii
        .iter()
        .map(|&radius| {
            let r2 = radius * radius;
            let mut best = 0usize;
            for center in &pts {
                let mut count = 0usize;
                for q in &pts {
                    let dist2: f64 = (0..d)
                        .map(|a| {
                            let dv = center[a] - q[a];
                            dv * dv
                        })
                        .sum();
                    if dist2 <= r2 {
                        count += 1;
                    }
                }
                best = best.max(count);
            }
            (radius, best as f64 / m as f64)
        })
        .collect();
    let alpha = if rows.len() >= 3 {
        Some(scaling_regression(&rows)?)
    } else {
        None
    };
    Ok(BallCounts { rows, alpha })
}

/// Per-cap counts against the uniform prediction `|P| * Delta^m`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquidistReport {
    pub cells_per_axis: u64,
    pub delta: f64,
    pub predicted: f64,
    pub counts: Vec<usize>,
    pub min: usize,
    pub median: usize,
    pub max: usize,
}

pub fn cap_equidistribution(fset: &FrequencySet, delta: f64) -> Result<EquidistReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let cells = (1.0 / delta).round().max(1.0) as u64;
    let cp = grid_partition(fset, cells, Ratio::new(1, 1))?;
    let counts: Vec<usize> = cp.caps.iter().map(|c| c.members.len()).collect();
    let delta_eff = 1.0 / cells as f64;
    let predicted = fset.len() as f64 * delta_eff.powi(fset.spec.m as i32);
    let mut sorted = counts.clone();
    sorted.sort_unstable();
    Ok(EquidistReport {
        cells_per_axis: cells,
        delta: delta_eff,
        predicted,
        min: *sorted.first().unwrap(),
        median: sorted[sorted.len() / 2],
        max: *sorted.last().unwrap(),
        counts,
    })
}
