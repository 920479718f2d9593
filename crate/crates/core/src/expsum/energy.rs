//! Exact additive-energy counting for integer frequency lists.
//!
//! The 2k-energy is the number of ordered 2k-tuples whose first k entries
//! and last k entries have equal sums. It equals the exact normalized
//! L^{2k} integral (to the 2k-th power) of the constant-coefficient system
//! on integer frequencies, and serves as the independent oracle for the
//! exact-even engine. The implementation enumerates k-fold sums into a
//! multiplicity table (meet in the middle) and returns the sum of squared
//! multiplicities; it deliberately shares no code with the convolution
//! route used by `exact_even_norm`.

use crate::error::{Error, Result};
use std::collections::HashMap;

pub fn count_energy(freqs: &[Vec<i64>], k: u32, budget: u128) -> Result<u128> {
    if freqs.is_empty() {
        return Err(Error::EmptySelection);
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let dim = freqs[0].len();
    if freqs.iter().any(|f| f.len() != dim) {
        return Err(Error::InvalidArgument(
            "frequency vectors must share a dimension".into(),
        ));
    }
    let m = freqs.len() as u128;
    let tuples = m.checked_pow(k).ok_or(Error::BudgetExceeded {
        op: "count_energy",
        needed: u128::MAX,
        budget,
    })?;
    if tuples > budget {
        return Err(Error::BudgetExceeded {
            op: "count_energy",
            needed: tuples,
            budget,
        });
    }

    let mut counts: HashMap<Vec<i64>, u64> = HashMap::with_capacity(freqs.len());
    let mut idx = vec![0usize; k as usize];
    loop {
        let mut sum = vec![0i64; dim];
        for &i in &idx {
            for (a, &v) in freqs[i].iter().enumerate() {
                sum[a] += v;
            }
        }
        *counts.entry(sum).or_insert(0) += 1;

        let mut axis = k as usize;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < freqs.len() {
                break;
            }
            idx[axis] = 0;
        }
        if idx.iter().all(|&v| v == 0) {
            break;
        }
    }

    Ok(counts.values().map(|&r| (r as u128) * (r as u128)).sum())
}
