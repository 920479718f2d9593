//! Monte-Carlo estimation of normalized L^p norms.
//!
//! Samples are uniform over the normalized domain. Each sample's point is
//! derived from `(seed, sample index)` alone, and partial sums are reduced
//! in fixed block order, so the estimate is bit-identical for any worker
//! count.

use crate::manifolds::FrequencySet;
use crate::rng::{stream, tag};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::TAU;

use super::Coefficients;

const BLOCK: u64 = 8192;

/// Returns `(value, standard error of value)`.
pub fn mc_norm(
    fset: &FrequencySet,
    coeffs: &Coefficients,
    p: f64,
    samples: u64,
    seed: u64,
) -> (f64, f64) {
    let samples = samples.max(2);
    let d = fset.spec.d;
    let freqs = fset.freqs_flat();
    let active: Vec<(usize, num_complex::Complex64)> = coeffs
        .0
        .iter()
        .enumerate()
        .filter(|(_, a)| **a != num_complex::Complex64::new(0.0, 0.0))
        .map(|(i, a)| (i, *a))
        .collect();

    let blocks = samples.div_ceil(BLOCK);
    let partials: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(samples);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            let mut y = vec![0.0f64; d];
            for s in lo..hi {
                let mut rng = stream(seed, &[tag::MONTE_CARLO, s]);
                for yi in y.iter_mut() {
                    *yi = rng.random::<f64>();
                }
                let mut re = 0.0;
                let mut im = 0.0;
                for &(i, a) in &active {
                    let mut phase = 0.0;
                    for (sf, yi) in freqs[i * d..(i + 1) * d].iter().zip(&y) {
                        phase += sf * yi;
                    }
                    let (sin, cos) = (TAU * phase).sin_cos();
                    re += a.re * cos - a.im * sin;
                    im += a.re * sin + a.im * cos;
                }
                let v = (re * re + im * im).powf(p / 2.0);
                sum += v;
                sumsq += v * v;
            }
            (sum, sumsq)
        })
        .collect();

    // Fixed-order reduction over blocks.
    let (sum, sumsq) = partials
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sumsq / n) - mean * mean).max(0.0) * n / (n - 1.0);
    let se_mean = (var / n).sqrt();
    let value = mean.max(0.0).powf(1.0 / p);
    // Delta method: d(m^{1/p})/dm = m^{1/p - 1} / p.
    let se_value = if mean > 0.0 {
        se_mean * value / (p * mean)
    } else {
        0.0
    };
    (value, se_value)
}
