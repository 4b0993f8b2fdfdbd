//! Generalized multilinear extension of a tabulated set function.
//!
//! `F(p) = Σ_S f(S) Π_{i∈S} p_i Π_{i∉S} (1 - p_i)` is evaluated by folding the
//! table one element at a time, which costs `O(2ⁿ)` instead of `O(n 2ⁿ)`.

use crate::error::{Error, Result};

/// Largest ground set for which a table is built.
pub const MAX_ELEMENTS: usize = 12;

/// Values of a set function on every subset of `{0, .., n-1}`; bit `i` of the
/// index marks element `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetTable {
    n: usize,
    values: Vec<f64>,
}

impl SetTable {
    pub fn from_fn<F: FnMut(usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(Error::Refused(format!(
                "power-set table over {n} elements exceeds the guard of {MAX_ELEMENTS}"
            )));
        }
        let values = (0..1usize << n).map(&mut f).collect();
        Ok(SetTable { n, values })
    }

    pub fn num_elements(&self) -> usize {
        self.n
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Expected value when element `i` is present independently with
    /// probability `p[i]`.
    pub fn expectation(&self, p: &[f64]) -> f64 {
        debug_assert_eq!(p.len(), self.n);
        let mut t = self.values.clone();
        for j in (0..self.n).rev() {
            fold_top(&mut t, j, p[j]);
        }
        t[0]
    }

    /// `∂/∂p_i` of [`SetTable::expectation`], i.e. the expected marginal gain
    /// of element `i` over a random set drawn from the other elements.
    pub fn partials(&self, p: &[f64], out: &mut [f64]) {
        debug_assert_eq!(p.len(), self.n);
        // `prefix` has every element above `i` folded out, so `i` is its top bit
        let mut prefix = self.values.clone();
        for i in (0..self.n).rev() {
            let mut t = prefix.clone();
            for j in (0..i).rev() {
                fold_at(&mut t, j, p[j]);
            }
            out[i] = t[1] - t[0];
            fold_top(&mut prefix, i, p[i]);
        }
    }
}

/// Removes bit `j`, the highest remaining one.
fn fold_top(t: &mut Vec<f64>, j: usize, p: f64) {
    let half = 1usize << j;
    for s in 0..half {
        t[s] = (1.0 - p) * t[s] + p * t[s + half];
    }
    t.truncate(half);
}

/// Removes bit `j` from the middle of the index.
fn fold_at(t: &mut Vec<f64>, j: usize, p: f64) {
    let bit = 1usize << j;
    let low = bit - 1;
    let half = t.len() / 2;
    let mut out = Vec::with_capacity(half);
    for s in 0..half {
        let i0 = ((s & !low) << 1) | (s & low);
        out.push((1.0 - p) * t[i0] + p * t[i0 | bit]);
    }
    *t = out;
}
