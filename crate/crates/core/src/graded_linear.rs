//! Finite-dimensional graded spaces, sparse homogeneous multilinear maps with
//! Koszul-signed insertion, based graded algebras (matrix algebras in
//! particular) and sparse tensor powers of them.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signs::Scalar;
use crate::tree_operad::{Generator, OperadElement, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearError {
    #[error("duplicate basis name {0}")]
    DuplicateName(String),
    #[error("unknown basis name {0}")]
    UnknownName(String),
    #[error("position {index} out of range for arity {arity}")]
    PositionOutOfRange { index: usize, arity: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("slot list {0:?} is not strictly increasing within 1..={1}")]
    BadSlots(Vec<usize>, usize),
    #[error("inhomogeneous entry: output {out} has degree {found}, expected {expected}")]
    Inhomogeneous {
        out: String,
        found: i64,
        expected: i64,
    },
    #[error("invalid rational {0:?}")]
    BadScalar(String),
    #[error("no map assigned to generator {0}")]
    Unassigned(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisVector {
    pub name: String,
    pub degree: i64,
}

/// A finite graded space with a named homogeneous basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSpace {
    basis: Vec<BasisVector>,
    index: HashMap<String, usize>,
}

impl GradedSpace {
    pub fn new(basis: Vec<BasisVector>) -> Result<Self, LinearError> {
        let mut index = HashMap::new();
        for (k, b) in basis.iter().enumerate() {
            if index.insert(b.name.clone(), k).is_some() {
                return Err(LinearError::DuplicateName(b.name.clone()));
            }
        }
        Ok(GradedSpace { basis, index })
    }

    /// Basis `v1, ..., vn` with the given degrees.
    pub fn with_degrees(degrees: &[i64]) -> Self {
        let basis = degrees
            .iter()
            .enumerate()
            .map(|(k, &d)| BasisVector {
                name: format!("v{}", k + 1),
                degree: d,
            })
            .collect();
        Self::new(basis).expect("generated names are unique")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].degree
    }

    pub fn degrees(&self) -> Vec<i64> {
        self.basis.iter().map(|b| b.degree).collect()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.basis[i].name
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn index_of(&self, name: &str) -> Result<usize, LinearError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| LinearError::UnknownName(name.to_string()))
    }

    /// Same basis names with every degree raised by `k` (`k = 1` is `sV`).
    pub fn shifted(&self, k: i64) -> Self {
        let basis = self
            .basis
            .iter()
            .map(|b| BasisVector {
                name: b.name.clone(),
                degree: b.degree + k,
            })
            .collect();
        Self::new(basis).expect("names unchanged")
    }
}

impl Serialize for GradedSpace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            basis: &'a [BasisVector],
        }
        Repr { basis: &self.basis }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GradedSpace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            basis: Vec<BasisVector>,
        }
        let r = Repr::deserialize(d)?;
        GradedSpace::new(r.basis).map_err(serde::de::Error::custom)
    }
}

fn koszul_prefix(space: &GradedSpace, inputs: &[usize]) -> i64 {
    inputs.iter().map(|&i| space.degree(i)).sum()
}

fn odd(e: i64) -> bool {
    e.rem_euclid(2) == 1
}

/// Sparse vector over basis indices.
pub type SparseVec<K> = BTreeMap<usize, K>;

fn add_into<K: Scalar>(v: &mut SparseVec<K>, i: usize, c: K) {
    if c.is_zero() {
        return;
    }
    match v.entry(i) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get().clone() + c;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

/// A multilinear map `X^{⊗n} → X` of fixed degree, stored as the images of
/// input basis tuples. Inputs and outputs index the same basis; the degrees
/// used for Koszul signs come from the space passed to each operation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiMap<K: Scalar + Eq + Ord + std::hash::Hash> {
    arity: usize,
    degree: i64,
    entries: BTreeMap<Vec<usize>, SparseVec<K>>,
}

/// Bound collecting what maps need from their scalars.
pub trait Coeff: Scalar + Eq + Ord + std::hash::Hash {}
impl<T: Scalar + Eq + Ord + std::hash::Hash> Coeff for T {}

impl<K: Coeff> MultiMap<K> {
    pub fn zero(arity: usize, degree: i64) -> Self {
        MultiMap {
            arity,
            degree,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(1, 0);
        for i in 0..dim {
            m.add_entry(vec![i], i, K::one());
        }
        m
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &SparseVec<K>)> {
        self.entries.iter()
    }

    pub fn num_entries(&self) -> usize {
        self.entries.values().map(|v| v.len()).sum()
    }

    pub fn add_entry(&mut self, inputs: Vec<usize>, out: usize, c: K) {
        debug_assert_eq!(inputs.len(), self.arity);
        if c.is_zero() {
            return;
        }
        let slot = self.entries.entry(inputs.clone()).or_default();
        add_into(slot, out, c);
        if slot.is_empty() {
            self.entries.remove(&inputs);
        }
    }

    /// Image of a basis tuple.
    pub fn eval_basis(&self, inputs: &[usize]) -> SparseVec<K> {
        self.entries.get(inputs).cloned().unwrap_or_default()
    }

    /// Coefficient of `out` in the image of `inputs`.
    pub fn coefficient(&self, inputs: &[usize], out: usize) -> K {
        self.entries
            .get(inputs)
            .and_then(|v| v.get(&out))
            .cloned()
            .unwrap_or_else(K::zero)
    }

    /// Evaluate on homogeneous-basis linear combinations in each slot.
    pub fn eval(&self, args: &[SparseVec<K>]) -> SparseVec<K> {
        let mut out = SparseVec::new();
        for (ins, img) in &self.entries {
            let mut c = K::one();
            for (a, &i) in args.iter().zip(ins) {
                match a.get(&i) {
                    Some(x) => c = c * x.clone(),
                    None => {
                        c = K::zero();
                        break;
                    }
                }
            }
            if c.is_zero() {
                continue;
            }
            for (o, v) in img {
                add_into(&mut out, *o, v.clone() * c.clone());
            }
        }
        out
    }

    pub fn add_scaled(&mut self, other: &Self, k: &K) {
        debug_assert_eq!(self.arity, other.arity);
        for (ins, img) in &other.entries {
            for (o, v) in img {
                self.add_entry(ins.clone(), *o, v.clone() * k.clone());
            }
        }
    }

    pub fn scaled(&self, k: &K) -> Self {
        let mut m = Self::zero(self.arity, self.degree);
        m.add_scaled(self, k);
        m
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut m = self.clone();
        m.add_scaled(other, &K::one());
        m
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut m = self.clone();
        m.add_scaled(other, &-K::one());
        m
    }

    /// Check that every entry has output degree = input degrees + map degree.
    pub fn check_homogeneous(
        &self,
        input: &GradedSpace,
        output: &GradedSpace,
    ) -> Result<(), LinearError> {
        for (ins, img) in &self.entries {
            let expected = koszul_prefix(input, ins) + self.degree;
            for o in img.keys() {
                if output.degree(*o) != expected {
                    return Err(LinearError::Inhomogeneous {
                        out: output.name(*o).to_string(),
                        found: output.degree(*o),
                        expected,
                    });
                }
            }
        }
        Ok(())
    }

    /// `f ∘_i g = f ∘ (id^{⊗ i-1} ⊗ g ⊗ id^{⊗ n-i})`, with the sign
    /// `(-1)^{|g|(|x_1| + ... + |x_{i-1}|)}` from passing `g` over the inputs
    /// to its left.
    pub fn insert(&self, i: usize, g: &Self, space: &GradedSpace) -> Result<Self, LinearError> {
        if i == 0 || i > self.arity {
            return Err(LinearError::PositionOutOfRange {
                index: i,
                arity: self.arity,
            });
        }
        let mut out = Self::zero(self.arity + g.arity - 1, self.degree + g.degree);
        // index f's entries by the basis vector in slot i
        let mut by_slot: HashMap<usize, Vec<(&Vec<usize>, &SparseVec<K>)>> = HashMap::new();
        for (ins, img) in &self.entries {
            by_slot.entry(ins[i - 1]).or_default().push((ins, img));
        }
        for (gins, gimg) in &g.entries {
            for (mid, gc) in gimg {
                let Some(fs) = by_slot.get(mid) else { continue };
                for (fins, fimg) in fs {
                    let prefix = koszul_prefix(space, &fins[..i - 1]);
                    let sign = K::sign(odd(g.degree * prefix));
                    let mut ins = Vec::with_capacity(out.arity);
                    ins.extend_from_slice(&fins[..i - 1]);
                    ins.extend_from_slice(gins);
                    ins.extend_from_slice(&fins[i..]);
                    for (o, fc) in fimg.iter() {
                        out.add_entry(ins.clone(), *o, sign.clone() * gc.clone() * fc.clone());
                    }
                }
            }
        }
        Ok(out)
    }

    /// `f ∘ (g_1 ⊗ ... ⊗ g_k)` with `None` standing for an identity slot;
    /// the Koszul tensor product `(g ⊗ h)(a ⊗ b) = (-1)^{|h||a|} g(a) ⊗ h(b)`.
    pub fn compose(&self, gs: &[Option<&Self>], space: &GradedSpace) -> Result<Self, LinearError> {
        if gs.len() != self.arity {
            return Err(LinearError::ArityMismatch {
                expected: self.arity,
                found: gs.len(),
            });
        }
        let mut acc = self.clone();
        let mut pos = 1;
        for g in gs {
            match g {
                Some(g) => {
                    acc = acc.insert(pos, g, space)?;
                    pos += g.arity;
                }
                None => pos += 1,
            }
        }
        Ok(acc)
    }

    /// Brace `f{g_1, ..., g_k}`: sum over order-preserving placements of the
    /// `g`s into distinct inputs of `f`, remaining inputs identities.
    pub fn brace(&self, gs: &[&Self], space: &GradedSpace) -> Self {
        let k = gs.len();
        let new_arity = self.arity + gs.iter().map(|g| g.arity).sum::<usize>() - k;
        let deg = self.degree + gs.iter().map(|g| g.degree).sum::<i64>();
        let mut out = Self::zero(new_arity, deg);
        if k > self.arity {
            return out;
        }
        for pos in crate::tree_operad::increasing_tuples(self.arity, k) {
            let mut slots: Vec<Option<&Self>> = vec![None; self.arity];
            for (p, g) in pos.iter().zip(gs) {
                slots[p - 1] = Some(g);
            }
            let term = self.compose(&slots, space).expect("arity matches");
            out.add_scaled(&term, &K::one());
        }
        out
    }

    /// Re-read the same coefficient table as a map of another degree, e.g. to
    /// view `g: W^n → V` as `s∘g: W^n → W`.
    pub fn with_degree(&self, degree: i64) -> Self {
        MultiMap {
            arity: self.arity,
            degree,
            entries: self.entries.clone(),
        }
    }

    /// Multiply every entry by a sign depending on its input tuple.
    pub fn map_signs(&self, f: impl Fn(&[usize]) -> bool) -> Self {
        let mut out = Self::zero(self.arity, self.degree);
        for (ins, img) in &self.entries {
            let s = K::sign(f(ins));
            for (o, c) in img {
                out.add_entry(ins.clone(), *o, s.clone() * c.clone());
            }
        }
        out
    }
}

/// Evaluate a tree monomial in `End_X`, reading vertex maps in planar order
/// from `maps`. A leaf is the identity.
pub fn evaluate_tree_with<K: Coeff>(
    t: &Tree,
    maps: &mut dyn Iterator<Item = MultiMap<K>>,
    space: &GradedSpace,
) -> Result<MultiMap<K>, LinearError> {
    match t {
        Tree::Leaf => Ok(MultiMap::identity(space.dim())),
        Tree::Node(_, ch) => {
            let root = maps.next().expect("one map per vertex");
            let mut children = Vec::with_capacity(ch.len());
            for c in ch {
                children.push(match c {
                    Tree::Leaf => None,
                    _ => Some(evaluate_tree_with(c, maps, space)?),
                });
            }
            let refs: Vec<Option<&MultiMap<K>>> = children.iter().map(|c| c.as_ref()).collect();
            root.compose(&refs, space)
        }
    }
}

/// Evaluate an operad element in `End_X` under an assignment of maps to
/// generators: the operad morphism determined by the assignment.
pub fn evaluate_element<K: Coeff>(
    e: &OperadElement<K>,
    assign: &dyn Fn(&Generator) -> Option<MultiMap<K>>,
    degree: i64,
    space: &GradedSpace,
) -> Result<MultiMap<K>, LinearError> {
    let mut out = MultiMap::zero(e.arity(), degree);
    for (t, c) in e.terms() {
        let maps: Vec<MultiMap<K>> = t
            .vertices()
            .into_iter()
            .map(|g| assign(g).ok_or_else(|| LinearError::Unassigned(g.to_string())))
            .collect::<Result<_, _>>()?;
        let v = evaluate_tree_with(t, &mut maps.into_iter(), space)?;
        out.add_scaled(&v.with_degree(degree), c);
    }
    Ok(out)
}

/// A graded associative algebra with a named basis, structure constants and unit.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedAlgebra<K: Coeff> {
    pub space: GradedSpace,
    pub mult: MultiMap<K>,
    pub unit: SparseVec<K>,
    /// Underlying `V` when the algebra is `End(V)` with matrix units.
    pub matrix_of: Option<GradedSpace>,
}

impl<K: Coeff> BasedAlgebra<K> {
    /// `End(V)` with matrix units `e_i^j` (`e_i^j e_k^l = δ_k^j e_i^l`); the
    /// unit `e_i^j` sends `v_j` to `v_i` and has degree `|v_i| - |v_j|`.
    pub fn matrix(v: &GradedSpace) -> Self {
        let d = v.dim();
        let idx = |i: usize, j: usize| i * d + j;
        let basis = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| BasisVector {
                name: format!("e{}^{}", i + 1, j + 1),
                degree: v.degree(i) - v.degree(j),
            })
            .collect();
        let space = GradedSpace::new(basis).expect("unique matrix unit names");
        let mut mult = MultiMap::zero(2, 0);
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    mult.add_entry(vec![idx(i, j), idx(j, l)], idx(i, l), K::one());
                }
            }
        }
        let unit = (0..d).map(|i| (idx(i, i), K::one())).collect();
        BasedAlgebra {
            space,
            mult,
            unit,
            matrix_of: Some(v.clone()),
        }
    }

    /// `M_n(k)` with `V` concentrated in degree 0.
    pub fn full_matrix(n: usize) -> Self {
        Self::matrix(&GradedSpace::with_degrees(&vec![0; n]))
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Index of the matrix unit `e_i^j` (0-based `i`, `j`).
    pub fn unit_index(&self, i: usize, j: usize) -> usize {
        let d = self.matrix_of.as_ref().expect("matrix algebra").dim();
        i * d + j
    }

    pub fn product_basis(&self, a: usize, b: usize) -> SparseVec<K> {
        self.mult.eval_basis(&[a, b])
    }

    pub fn multiply(&self, a: &SparseVec<K>, b: &SparseVec<K>) -> SparseVec<K> {
        self.mult.eval(&[a.clone(), b.clone()])
    }
}

/// A sparse element of `A^{⊗n}` over the basis of a based algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TensorElem<K: Coeff> {
    order: usize,
    entries: BTreeMap<Vec<usize>, K>,
}

impl<K: Coeff> TensorElem<K> {
    pub fn zero(order: usize) -> Self {
        TensorElem {
            order,
            entries: BTreeMap::new(),
        }
    }

    pub fn unit(alg: &BasedAlgebra<K>, order: usize) -> Self {
        let mut t = Self::zero(order);
        t.add_term_raw(vec![], K::one(), order, &alg.unit);
        t
    }

    fn add_term_raw(&mut self, prefix: Vec<usize>, c: K, remaining: usize, unit: &SparseVec<K>) {
        if remaining == 0 {
            self.add_term(prefix, c);
            return;
        }
        for (u, uc) in unit {
            let mut p = prefix.clone();
            p.push(*u);
            self.add_term_raw(p, c.clone() * uc.clone(), remaining - 1, unit);
        }
    }

    pub fn basis_tensor(factors: Vec<usize>) -> Self {
        let mut t = Self::zero(factors.len());
        t.add_term(factors, K::one());
        t
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<usize>, &K)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn coefficient(&self, factors: &[usize]) -> K {
        self.entries.get(factors).cloned().unwrap_or_else(K::zero)
    }

    pub fn add_term(&mut self, factors: Vec<usize>, c: K) {
        debug_assert_eq!(factors.len(), self.order);
        if c.is_zero() {
            return;
        }
        match self.entries.entry(factors) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, k: &K) {
        for (f, c) in &other.entries {
            self.add_term(f.clone(), c.clone() * k.clone());
        }
    }

    pub fn scaled(&self, k: &K) -> Self {
        let mut t = Self::zero(self.order);
        t.add_scaled(self, k);
        t
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut t = self.clone();
        t.add_scaled(other, &K::one());
        t
    }

    pub fn minus(&self, other: &Self) -> Self {
        let mut t = self.clone();
        t.add_scaled(other, &-K::one());
        t
    }

    /// The degree of every stored tuple, if they agree.
    pub fn degree(&self, alg: &BasedAlgebra<K>) -> Option<i64> {
        let mut it = self
            .entries
            .keys()
            .map(|f| f.iter().map(|&i| alg.space.degree(i)).sum::<i64>());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    /// Slotwise product `(a_1 ⊗ ... ⊗ a_n)(b_1 ⊗ ... ⊗ b_n) =
    /// (-1)^{Σ_{i>j}|a_i||b_j|} a_1 b_1 ⊗ ... ⊗ a_n b_n`.
    pub fn multiply(&self, other: &Self, alg: &BasedAlgebra<K>) -> Result<Self, LinearError> {
        if self.order != other.order {
            return Err(LinearError::OrderMismatch(self.order, other.order));
        }
        let n = self.order;
        let mut out = Self::zero(n);
        for (fa, ca) in &self.entries {
            for (fb, cb) in &other.entries {
                let mut e = 0i64;
                for i in 0..n {
                    for j in 0..i {
                        e += alg.space.degree(fa[i]) * alg.space.degree(fb[j]);
                    }
                }
                let mut partial: Vec<(Vec<usize>, K)> =
                    vec![(Vec::with_capacity(n), K::sign(odd(e)) * ca.clone() * cb.clone())];
                for i in 0..n {
                    let prod = alg.product_basis(fa[i], fb[i]);
                    let mut next = Vec::new();
                    for (p, c) in &partial {
                        for (k, v) in &prod {
                            let mut q = p.clone();
                            q.push(*k);
                            next.push((q, c.clone() * v.clone()));
                        }
                    }
                    partial = next;
                }
                for (f, c) in partial {
                    out.add_term(f, c);
                }
            }
        }
        Ok(out)
    }

    /// Place the factors in the given (1-based, strictly increasing) slots of
    /// an order-`n` tensor, with the unit in every other slot.
    pub fn raise_indices(
        &self,
        slots: &[usize],
        n: usize,
        alg: &BasedAlgebra<K>,
    ) -> Result<Self, LinearError> {
        let increasing = slots.windows(2).all(|w| w[0] < w[1]);
        if slots.len() != self.order
            || !increasing
            || slots.first().is_some_and(|&s| s == 0)
            || slots.last().is_some_and(|&s| s > n)
        {
            return Err(LinearError::BadSlots(slots.to_vec(), n));
        }
        let mut out = Self::zero(n);
        for (f, c) in &self.entries {
            let mut partial: Vec<(Vec<usize>, K)> = vec![(Vec::with_capacity(n), c.clone())];
            let mut next_factor = 0;
            for pos in 1..=n {
                let choices: Vec<(usize, K)> = if slots.get(next_factor) == Some(&pos) {
                    next_factor += 1;
                    vec![(f[next_factor - 1], K::one())]
                } else {
                    alg.unit.iter().map(|(u, uc)| (*u, uc.clone())).collect()
                };
                let mut next = Vec::new();
                for (p, pc) in &partial {
                    for (b, bc) in &choices {
                        let mut q = p.clone();
                        q.push(*b);
                        next.push((q, pc.clone() * bc.clone()));
                    }
                }
                partial = next;
            }
            for (f, c) in partial {
                out.add_term(f, c);
            }
        }
        Ok(out)
    }
}

impl<K: Coeff> fmt::Display for TensorElem<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (k, (fs, c)) in self.entries.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{fs:?}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// JSON forms. Rationals are written as strings ("-3/2"); integers are accepted
// as plain numbers on input.

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum JsonScalar {
    Int(i64),
    Text(String),
}

impl JsonScalar {
    pub fn parse<K: Scalar>(&self) -> Result<K, LinearError> {
        match self {
            JsonScalar::Int(v) => Ok(K::from_int(*v)),
            JsonScalar::Text(s) => s
                .trim()
                .parse::<K>()
                .map_err(|_| LinearError::BadScalar(s.clone())),
        }
    }

    pub fn from_scalar<K: Scalar>(k: &K) -> Self {
        JsonScalar::Text(k.to_string())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MultiMapEntryJson {
    #[serde(rename = "in")]
    pub inputs: Vec<String>,
    pub out: BTreeMap<String, JsonScalar>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MultiMapJson {
    pub arity: usize,
    pub degree: i64,
    pub entries: Vec<MultiMapEntryJson>,
}

impl<K: Coeff> MultiMap<K> {
    pub fn to_json(&self, space: &GradedSpace) -> MultiMapJson {
        MultiMapJson {
            arity: self.arity,
            degree: self.degree,
            entries: self
                .entries
                .iter()
                .map(|(ins, img)| MultiMapEntryJson {
                    inputs: ins.iter().map(|&i| space.name(i).to_string()).collect(),
                    out: img
                        .iter()
                        .map(|(o, c)| (space.name(*o).to_string(), JsonScalar::from_scalar(c)))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &MultiMapJson, space: &GradedSpace) -> Result<Self, LinearError> {
        let mut m = Self::zero(j.arity, j.degree);
        for e in &j.entries {
            if e.inputs.len() != j.arity {
                return Err(LinearError::ArityMismatch {
                    expected: j.arity,
                    found: e.inputs.len(),
                });
            }
            let ins = e
                .inputs
                .iter()
                .map(|n| space.index_of(n))
                .collect::<Result<Vec<_>, _>>()?;
            for (name, c) in &e.out {
                m.add_entry(ins.clone(), space.index_of(name)?, c.parse()?);
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TensorEntryJson {
    pub factors: Vec<String>,
    pub coeff: JsonScalar,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TensorElemJson {
    pub order: usize,
    pub entries: Vec<TensorEntryJson>,
}

impl<K: Coeff> TensorElem<K> {
    pub fn to_json(&self, space: &GradedSpace) -> TensorElemJson {
        TensorElemJson {
            order: self.order,
            entries: self
                .entries
                .iter()
                .map(|(f, c)| TensorEntryJson {
                    factors: f.iter().map(|&i| space.name(i).to_string()).collect(),
                    coeff: JsonScalar::from_scalar(c),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &TensorElemJson, space: &GradedSpace) -> Result<Self, LinearError> {
        let mut t = Self::zero(j.order);
        for e in &j.entries {
            if e.factors.len() != j.order {
                return Err(LinearError::OrderMismatch(j.order, e.factors.len()));
            }
            let f = e
                .factors
                .iter()
                .map(|n| space.index_of(n))
                .collect::<Result<Vec<_>, _>>()?;
            t.add_term(f, e.coeff.parse()?);
        }
        Ok(t)
    }
}

/// Shared handle used by structures that keep their space alongside maps.

// ---------------------------------------------------------------------------
// Random sampling

/// A coefficient drawn uniformly from `{-2, -1, 0, 1, 2, 1/2}`.
pub fn sample_coeff<K: Scalar, R: Rng + ?Sized>(rng: &mut R) -> K {
    let choices: [(i64, i64); 6] = [(-2, 1), (-1, 1), (0, 1), (1, 1), (2, 1), (1, 2)];
    let (p, q) = *choices.choose(rng).expect("nonempty");
    K::from_int(p) / K::from_int(q)
}

/// Every basis tuple of length `arity` over `dim` basis vectors, in
/// lexicographic order.
pub fn basis_tuples(dim: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..dim).map(move |i| {
                    let mut q = p.clone();
                    q.push(i);
                    q
                })
            })
            .collect();
    }
    out
}

/// A homogeneous map with every allowed coefficient sampled independently.
pub fn random_map<K: Coeff, R: Rng + ?Sized>(
    space: &GradedSpace,
    arity: usize,
    degree: i64,
    rng: &mut R,
) -> MultiMap<K> {
    let mut m = MultiMap::zero(arity, degree);
    for ins in basis_tuples(space.dim(), arity) {
        let d: i64 = ins.iter().map(|&i| space.degree(i)).sum::<i64>() + degree;
        for o in 0..space.dim() {
            if space.degree(o) == d {
                m.add_entry(ins.clone(), o, sample_coeff(rng));
            }
        }
    }
    m
}

/// A homogeneous element of `A^{⊗order}` of the given total degree.
pub fn random_tensor<K: Coeff, R: Rng + ?Sized>(
    alg: &BasedAlgebra<K>,
    order: usize,
    degree: i64,
    rng: &mut R,
) -> TensorElem<K> {
    let mut t = TensorElem::zero(order);
    for f in basis_tuples(alg.dim(), order) {
        if f.iter().map(|&i| alg.space.degree(i)).sum::<i64>() == degree {
            t.add_term(f, sample_coeff(rng));
        }
    }
    t
}
