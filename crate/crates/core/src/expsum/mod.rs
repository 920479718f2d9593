//! Evaluation of `F(x) = sum_s a_s e(s . x)` and its normalized L^p norms.
//!
//! All norms are computed on the probability-normalized domain: the value
//! reported for exponent `p` is
//!
//! ```text
//! ( (1/R^d) \int_{[0,R]^d} |sum_s a_s e((s/R) . x)|^p dx )^{1/p}
//! ```
//!
//! which by the substitution `y = x/R` is the unit-cube average of the
//! system with the stored frequencies `s`. Under this normalization the
//! p = 2 norm of an orthonormal set is exactly the l^2 norm of the
//! coefficients, so a reported ratio `norm / ||a||_2` is directly a K_p
//! lower bound.
//!
//! Three methods are provided. `exact-even` expands an even power into the
//! multilinear tuple sum and integrates each phase in closed form (the
//! integer lattice axes collapse to exact Kronecker deltas). `quadrature`
//! samples a tensor grid that is exact along the lattice axes (band-limited
//! FFT evaluation) and Gauss-Legendre along the tail axes. `monte-carlo`
//! averages `|F|^p` over seeded uniform samples and reports the standard
//! error.

mod energy;
mod exact;
mod montecarlo;
mod quadrature;

pub use energy::count_energy;
pub use exact::exact_even_norm;
pub use quadrature::{gauss_legendre_unit, QuadraturePlan};

use crate::error::{Error, Result};
use crate::manifolds::FrequencySet;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Complex coefficient vector aligned index-for-index with a frequency set.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients(pub Vec<Complex64>);

impl Coefficients {
    pub fn constant(len: usize) -> Self {
        Coefficients(vec![Complex64::new(1.0, 0.0); len])
    }

    /// Indicator of a subset of indices.
    pub fn indicator(len: usize, support: &[usize]) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); len];
        for &i in support {
            v[i] = Complex64::new(1.0, 0.0);
        }
        Coefficients(v)
    }

    /// Unit-modulus random phases; keeps the l^2 norm deterministic.
    pub fn steinhaus<R: Rng>(len: usize, rng: &mut R) -> Self {
        let v = (0..len)
            .map(|_| {
                let phase: f64 = rng.random::<f64>();
                Complex64::from_polar(1.0, TAU * phase)
            })
            .collect();
        Coefficients(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l2(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn lp(&self, p: f64) -> f64 {
        self.0
            .iter()
            .map(|c| c.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Coefficients(self.0.iter().map(|c| c * lambda).collect())
    }
}

/// Which integration engine produced a norm value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactEven,
    Quadrature,
    MonteCarlo,
}

impl NormMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormMethod::ExactEven => "exact-even",
            NormMethod::Quadrature => "quadrature",
            NormMethod::MonteCarlo => "monte-carlo",
        }
    }
}

/// Method selection plus the knobs shared by the engines.
#[derive(Debug, Clone)]
pub struct NormConfig {
    /// None = pick automatically (exact if affordable, else quadrature for
    /// even p, else Monte-Carlo).
    pub method: Option<NormMethod>,
    /// Monte-Carlo sample count.
    pub mc_samples: u64,
    /// Work budget in elementary operations for exact/quadrature engines.
    pub budget: u128,
    /// Seed for the Monte-Carlo sampler.
    pub seed: u64,
    /// Per-lattice-axis resolution override for quadrature. Rejected when
    /// below the Nyquist-style floor.
    pub resolution: Option<u64>,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            method: None,
            mc_samples: 1_000_000,
            budget: 2_000_000_000,
            seed: 0,
            resolution: None,
        }
    }
}

/// A computed norm with its error contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormReport {
    pub p: f64,
    /// Normalized p-th root of the integral.
    pub value: f64,
    pub method: NormMethod,
    /// Absolute error bound on `value` (zero up to rounding for exact-even,
    /// standard error for monte-carlo).
    pub error: f64,
    /// Grid resolution (total nodes) or sample count, per method.
    pub samples: u64,
    pub seed: Option<u64>,
    pub wall_ms: u64,
}

/// Evaluate `F(x_j) = sum_s a_s e(s . x_j)` at explicit points, in index
/// order (bit-identical for identical inputs).
pub fn evaluate(fset: &FrequencySet, coeffs: &Coefficients, xs: &[Vec<f64>]) -> Vec<Complex64> {
    assert_eq!(fset.len(), coeffs.len(), "coefficients must align with set");
    let d = fset.spec.d;
    let freqs = fset.freqs_flat();
    xs.iter()
        .map(|x| {
            debug_assert_eq!(x.len(), d);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, a) in coeffs.0.iter().enumerate() {
                let phase: f64 = freqs[i * d..(i + 1) * d]
                    .iter()
                    .zip(x.iter())
                    .map(|(s, xi)| s * xi)
                    .sum();
                let (sin, cos) = (TAU * phase).sin_cos();
                acc += a * Complex64::new(cos, sin);
            }
            acc
        })
        .collect()
}

pub(crate) fn even_exponent(p: f64) -> Option<u32> {
    let k = p.round();
    if (p - k).abs() < 1e-9 && k >= 2.0 && (k as u64).is_multiple_of(2) {
        Some(k as u32)
    } else {
        None
    }
}

/// Normalized L^p norm by the requested (or automatically chosen) method.
pub fn norm_lp(
    fset: &FrequencySet,
    coeffs: &Coefficients,
    p: f64,
    cfg: &NormConfig,
) -> Result<NormReport> {
    if fset.is_empty() {
        return Err(Error::EmptySelection);
    }
    if coeffs.len() != fset.len() {
        return Err(Error::InvalidArgument(format!(
            "coefficient length {} does not match set size {}",
            coeffs.len(),
            fset.len()
        )));
    }
    if p < 2.0 {
        return Err(Error::InvalidArgument(format!(
            "norms are only defined for p >= 2, got {p}"
        )));
    }
    let start = std::time::Instant::now();
    let finish = |mut rep: NormReport| {
        rep.wall_ms = start.elapsed().as_millis() as u64;
        rep
    };

    match cfg.method {
        Some(NormMethod::ExactEven) => {
            let two_k = even_exponent(p).ok_or_else(|| {
                Error::InvalidArgument(format!("exact-even needs an even integer p, got {p}"))
            })?;
            let integral = exact::exact_even_norm(fset, coeffs, two_k, cfg.budget)?;
            Ok(finish(NormReport {
                p,
                value: integral.max(0.0).powf(1.0 / p),
                method: NormMethod::ExactEven,
                error: 0.0,
                samples: 0,
                seed: None,
                wall_ms: 0,
            }))
        }
        Some(NormMethod::Quadrature) => {
            let plan = QuadraturePlan::build(fset, p, cfg.resolution, cfg.budget)?;
            let (value, error) = plan.norm(fset, coeffs, p);
            Ok(finish(NormReport {
                p,
                value,
                method: NormMethod::Quadrature,
                error,
                samples: plan.total_nodes(),
                seed: None,
                wall_ms: 0,
            }))
        }
        Some(NormMethod::MonteCarlo) => {
            let (value, error) = montecarlo::mc_norm(fset, coeffs, p, cfg.mc_samples, cfg.seed);
            Ok(finish(NormReport {
                p,
                value,
                method: NormMethod::MonteCarlo,
                error,
                samples: cfg.mc_samples,
                seed: Some(cfg.seed),
                wall_ms: 0,
            }))
        }
        None => {
            if let Some(two_k) = even_exponent(p) {
                match exact::exact_even_norm(fset, coeffs, two_k, cfg.budget) {
                    Ok(integral) => {
                        return Ok(finish(NormReport {
                            p,
                            value: integral.max(0.0).powf(1.0 / p),
                            method: NormMethod::ExactEven,
                            error: 0.0,
                            samples: 0,
                            seed: None,
                            wall_ms: 0,
                        }))
                    }
                    Err(Error::BudgetExceeded { .. }) => {}
                    Err(e) => return Err(e),
                }
                match QuadraturePlan::build(fset, p, cfg.resolution, cfg.budget) {
                    Ok(plan) => {
                        let (value, error) = plan.norm(fset, coeffs, p);
                        return Ok(finish(NormReport {
                            p,
                            value,
                            method: NormMethod::Quadrature,
                            error,
                            samples: plan.total_nodes(),
                            seed: None,
                            wall_ms: 0,
                        }));
                    }
                    Err(Error::BudgetExceeded { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            let (value, error) = montecarlo::mc_norm(fset, coeffs, p, cfg.mc_samples, cfg.seed);
            Ok(finish(NormReport {
                p,
                value,
                method: NormMethod::MonteCarlo,
                error,
                samples: cfg.mc_samples,
                seed: Some(cfg.seed),
                wall_ms: 0,
            }))
        }
    }
}
