//! Exact integration of even powers via the multilinear expansion.
//!
//! `|F|^{2k}` is a sum over pairs of ordered k-tuples of frequencies. Each
//! pair contributes the product of its coefficient products times the
//! per-axis unit integrals of the net phase. On the normalized domain the
//! per-axis factor is
//!
//! ```text
//! (1/R) \int_0^R e(theta x) dx = 1            if theta = 0
//!                              = (e(theta R) - 1) / (2 pi i theta R)
//! ```
//!
//! with `theta` the net phase in rescaled units; in the stored frequency
//! units this is the unit-interval integral `e^{i pi u} sinc(pi u)` of the
//! net frequency `u`. Integer lattice axes therefore contribute exact
//! Kronecker deltas, and only tuples whose lattice k-fold sums match on
//! both sides survive. Grouping tuples by that lattice sum (meet in the
//! middle) reduces the pair work from `M^{2k}` to the sum of squared group
//! sizes.

use crate::error::{Error, Result};
use crate::manifolds::FrequencySet;
use num_complex::Complex64;
use rayon::prelude::*;

use super::Coefficients;

/// Hard cap on stored tuple rows for the grouped path; beyond this the
/// caller should switch to quadrature.
const ENUM_CAP: u128 = 4_000_000;

/// Unit-interval integral of a complex exponential of frequency `u`:
/// `\int_0^1 e(u y) dy = e^{i pi u} sinc(pi u)`.
pub(crate) fn unit_integral(u: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // Exact integers integrate to exactly zero; do not leave sin(pi n)
    // rounding noise in what should be a Kronecker delta.
    if u == u.round() {
        return Complex64::new(0.0, 0.0);
    }
    let pu = std::f64::consts::PI * u;
    let sinc = pu.sin() / pu;
    Complex64::from_polar(sinc, pu)
}

/// Exact normalized integral of `|F|^{2k}` over the domain.
pub fn exact_even_norm(
    fset: &FrequencySet,
    coeffs: &Coefficients,
    two_k: u32,
    budget: u128,
) -> Result<f64> {
    if two_k < 2 || !two_k.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "exact even norm needs an even exponent >= 2, got {two_k}"
        )));
    }
    if fset.is_empty() {
        return Err(Error::EmptySelection);
    }
    let k = two_k / 2;
    let m = fset.spec.m;
    let d = fset.spec.d;
    let tails = d - m;

    // Pure 1-D integer systems: the k-fold coefficient self-convolution
    // gives the histogram of weighted sums; the integral is its energy.
    if d == 1 {
        return convolution_path(fset, coeffs, k, budget);
    }

    let mm = fset.len() as u128;
    let rows = mm.checked_pow(k).ok_or(Error::BudgetExceeded {
        op: "exact_even_norm",
        needed: u128::MAX,
        budget,
    })?;
    let cap = ENUM_CAP.min(budget);
    if rows > cap {
        return Err(Error::BudgetExceeded {
            op: "exact_even_norm",
            needed: rows,
            budget: cap,
        });
    }

    // Enumerate ordered k-tuples: lattice sum key, tail sums, coefficient
    // product. Keys are packed into u128 for cheap grouping.
    let n_rows = rows as usize;
    let kay = k as usize;
    let mut keys: Vec<u128> = Vec::with_capacity(n_rows);
    let mut taus: Vec<f64> = Vec::with_capacity(n_rows * tails);
    let mut prods: Vec<Complex64> = Vec::with_capacity(n_rows);

    let bits_per_axis = 40u32;
    let offset: i128 = (k as i128) * (1i128 << 32);
    let mut idx = vec![0usize; kay];
    loop {
        let mut key: u128 = 0;
        let mut lat = [0i64; 8];
        let mut tau = [0.0f64; 8];
        let mut prod = Complex64::new(1.0, 0.0);
        for &i in &idx {
            let p = &fset.points[i];
            for (a, &v) in p.n.iter().enumerate() {
                lat[a] += v;
            }
            for (t, &v) in p.tail.iter().enumerate() {
                tau[t] += v;
            }
            prod *= coeffs.0[i];
        }
        for &l in lat.iter().take(m) {
            let shifted = (l as i128 + offset) as u128;
            key = (key << bits_per_axis) | (shifted & ((1u128 << bits_per_axis) - 1));
        }
        keys.push(key);
        taus.extend_from_slice(&tau[..tails]);
        prods.push(prod);

        // Odometer over ordered k-tuples.
        let mut axis = kay;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < fset.len() {
                break;
            }
            idx[axis] = 0;
        }
        if idx.iter().all(|&v| v == 0) {
            break;
        }
    }

    // Stable sort by key keeps within-group enumeration order, so the
    // floating-point reduction is deterministic.
    let mut order: Vec<u32> = (0..n_rows as u32).collect();
    order.sort_by_key(|&i| keys[i as usize]);

    // Group boundaries and the pair-stage budget (sum of squared sizes).
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut pair_cost: u128 = 0;
    {
        let mut i = 0usize;
        while i < n_rows {
            let mut j = i + 1;
            while j < n_rows && keys[order[j] as usize] == keys[order[i] as usize] {
                j += 1;
            }
            let g = (j - i) as u128;
            pair_cost += g * g;
            groups.push((i, j));
            i = j;
        }
    }
    if pair_cost > budget {
        return Err(Error::BudgetExceeded {
            op: "exact_even_norm",
            needed: pair_cost,
            budget,
        });
    }

    // Groups are independent; partial sums are reduced in group order so
    // the result is identical for any worker count.
    let partials: Vec<Complex64> = groups
        .par_iter()
        .map(|&(i, j)| {
            let group = &order[i..j];
            let mut acc = Complex64::new(0.0, 0.0);
            if tails == 0 {
                let mut s = Complex64::new(0.0, 0.0);
                for &gi in group {
                    s += prods[gi as usize];
                }
                acc += Complex64::new(s.norm_sqr(), 0.0);
            } else {
                for &gi in group {
                    let ci = prods[gi as usize];
                    if ci == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let ti = &taus[gi as usize * tails..(gi as usize + 1) * tails];
                    for &gj in group {
                        let cj = prods[gj as usize];
                        if cj == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        let tj = &taus[gj as usize * tails..(gj as usize + 1) * tails];
                        let mut factor = Complex64::new(1.0, 0.0);
                        for t in 0..tails {
                            factor *= unit_integral(ti[t] - tj[t]);
                        }
                        acc += ci * cj.conj() * factor;
                    }
                }
            }
            acc
        })
        .collect();
    let total: Complex64 = partials.iter().sum();

    let scale = total.re.abs().max(1.0);
    assert!(
        total.im.abs() <= 1e-9 * scale,
        "imaginary residue {} exceeds tolerance; exact-even algebra is broken",
        total.im
    );
    Ok(total.re)
}

/// 1-D integer systems: iterated self-convolution of the coefficient
/// sequence, then the energy of the k-fold sum histogram.
fn convolution_path(
    fset: &FrequencySet,
    coeffs: &Coefficients,
    k: u32,
    budget: u128,
) -> Result<f64> {
    let ns: Vec<i64> = fset.points.iter().map(|p| p.n[0]).collect();
    let lo = *ns.iter().min().unwrap();
    let hi = *ns.iter().max().unwrap();
    let span = (hi - lo) as u128;
    let base_len = span + 1;
    let final_len = span * k as u128 + 1;
    let cost = final_len * base_len * k as u128;
    if cost > budget || final_len > 1 << 28 {
        return Err(Error::BudgetExceeded {
            op: "exact_even_norm",
            needed: cost,
            budget,
        });
    }

    let mut base = vec![Complex64::new(0.0, 0.0); base_len as usize];
    for (i, &n) in ns.iter().enumerate() {
        base[(n - lo) as usize] += coeffs.0[i];
    }
    let mut h = base.clone();
    for _ in 1..k {
        let mut next = vec![Complex64::new(0.0, 0.0); h.len() + base.len() - 1];
        for (i, &hv) in h.iter().enumerate() {
            if hv == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &bv) in base.iter().enumerate() {
                next[i + j] += hv * bv;
            }
        }
        h = next;
    }
    Ok(h.iter().map(|c| c.norm_sqr()).sum())
}
