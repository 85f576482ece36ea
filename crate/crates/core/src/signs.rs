//! Exact scalars, permutation signs and Koszul sign bookkeeping.
//!
//! Permutations are given in one-line notation with 1-based images:
//! `sigma[k - 1] = σ(k)`.

use std::fmt::{Debug, Display};
use std::ops::Neg;
use std::str::FromStr;

use num_traits::{FromPrimitive, Num};
use thiserror::Error;

/// Coefficient ring of every linear object in the crate.
///
/// Everything is written against this trait; the crate root fixes
/// [`crate::Rational`] as the concrete exact field.
pub trait Scalar:
    Clone + Debug + Display + FromStr + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_int(v: i64) -> Self;

    /// `(-1)^odd`
    fn sign(odd: bool) -> Self {
        if odd {
            -Self::one()
        } else {
            Self::one()
        }
    }
}

impl<T> Scalar for T
where
    T: Clone
        + Debug
        + Display
        + FromStr
        + PartialEq
        + Num
        + Neg<Output = T>
        + FromPrimitive
        + Send
        + Sync
        + 'static,
{
    fn from_int(v: i64) -> Self {
        T::from_i64(v).expect("integer embeds into the scalar field")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignError {
    #[error("permutation has length {perm} but {degs} degrees were supplied")]
    LengthMismatch { perm: usize, degs: usize },
    #[error("not a permutation of 1..{0}")]
    NotAPermutation(usize),
}

/// Degrees `|x_1|, ..., |x_n|` of a list of homogeneous elements.
pub type DegreeSeq = Vec<i64>;

fn is_odd(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

fn validate(sigma: &[usize], degs: &[i64]) -> Result<(), SignError> {
    if sigma.len() != degs.len() {
        return Err(SignError::LengthMismatch {
            perm: sigma.len(),
            degs: degs.len(),
        });
    }
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s == 0 || s > n || seen[s - 1] {
            return Err(SignError::NotAPermutation(n));
        }
        seen[s - 1] = true;
    }
    Ok(())
}

/// Parity of the Koszul sign of rearranging elements listed in source order
/// `0..n` into the order `order` (0-based source indices), given per-source
/// degrees.
pub fn reorder_parity(order: &[usize], degs: &[i64]) -> bool {
    let mut odd = false;
    for p in 0..order.len() {
        if !is_odd(degs[order[p]]) {
            continue;
        }
        for q in p + 1..order.len() {
            if order[p] > order[q] && is_odd(degs[order[q]]) {
                odd = !odd;
            }
        }
    }
    odd
}

/// Parity of `sgn(σ)`.
pub fn permutation_parity(sigma: &[usize]) -> bool {
    let mut odd = false;
    for p in 0..sigma.len() {
        for q in p + 1..sigma.len() {
            if sigma[p] > sigma[q] {
                odd = !odd;
            }
        }
    }
    odd
}

/// Koszul sign ε(σ; x_1, ..., x_n) defined by
/// `x_1 ⊙ ... ⊙ x_n = ε · x_σ(1) ⊙ ... ⊙ x_σ(n)` in the graded symmetric algebra.
pub fn koszul_epsilon<K: Scalar>(sigma: &[usize], degs: &[i64]) -> Result<K, SignError> {
    validate(sigma, degs)?;
    let order: Vec<usize> = sigma.iter().map(|s| s - 1).collect();
    Ok(K::sign(reorder_parity(&order, degs)))
}

/// χ(σ; x_1, ..., x_n) = sgn(σ) ε(σ; x_1, ..., x_n).
pub fn koszul_chi<K: Scalar>(sigma: &[usize], degs: &[i64]) -> Result<K, SignError> {
    validate(sigma, degs)?;
    let order: Vec<usize> = sigma.iter().map(|s| s - 1).collect();
    Ok(K::sign(
        reorder_parity(&order, degs) ^ permutation_parity(sigma),
    ))
}

/// All `(i_1, ..., i_r)`-shuffles, in lexicographic order of their one-line
/// notation.
pub fn shuffles(block_sizes: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = block_sizes.iter().sum();
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n + 1];
    shuffle_rec(block_sizes, 0, 0, 0, &mut current, &mut used, &mut out);
    out
}

fn shuffle_rec(
    blocks: &[usize],
    block: usize,
    filled_in_block: usize,
    last: usize,
    current: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    if block == blocks.len() {
        out.push(current.clone());
        return;
    }
    if filled_in_block == blocks[block] {
        shuffle_rec(blocks, block + 1, 0, 0, current, used, out);
        return;
    }
    let n = used.len() - 1;
    for v in last + 1..=n {
        if used[v] {
            continue;
        }
        used[v] = true;
        current.push(v);
        shuffle_rec(blocks, block, filled_in_block + 1, v, current, used, out);
        current.pop();
        used[v] = false;
    }
}

/// All permutations of `1..=n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    shuffles(&vec![1; n])
}

/// All compositions of `total` into exactly `parts` positive integers, lexicographic.
pub fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    compositions_rec(total, parts, &mut cur, &mut out);
    out
}

fn compositions_rec(rest: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if parts == 0 {
        if rest == 0 {
            out.push(cur.clone());
        }
        return;
    }
    if rest < parts {
        return;
    }
    for first in 1..=rest - (parts - 1) {
        cur.push(first);
        compositions_rec(rest - first, parts - 1, cur, out);
        cur.pop();
    }
}
