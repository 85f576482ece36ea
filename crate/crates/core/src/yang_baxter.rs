//! Associative Yang-Baxter pairs and their infinity version, the operator map
//! `F: A^{⊗n+1} → Hom(A^{⊗n}, A)` and the correspondences with (homotopy)
//! Rota-Baxter systems on matrix algebras.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graded_linear::{
    basis_tuples, BasedAlgebra, Coeff, LinearError, MultiMap, SparseVec, TensorElem,
    TensorElemJson,
};
use crate::homotopy_rbs_checker::{AlgebraJson, CheckError, HomotopyRBS, Side};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum YbError {
    #[error("tensor of order {0} has no operator image (order must be at least 2)")]
    OrderTooSmall(usize),
    #[error("the algebra is not a full matrix algebra End(V)")]
    NotMatrixAlgebra,
    #[error("tensor entry of degree {found} in a tensor of degree {expected}")]
    Inhomogeneous { expected: i64, found: i64 },
    #[error("r_1 and s_1 differ")]
    UnaryMismatch,
    #[error("order {n} exceeds the truncation {truncation}")]
    TruncationExceeded { n: usize, truncation: usize },
    #[error("m_1 is not -[d, -] for the supplied d")]
    NotInner,
    #[error("m_2 is not the matrix product or some m_k with k >= 3 is nonzero")]
    NotMatrixProduct,
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Check(#[from] CheckError),
}

fn odd(e: i64) -> bool {
    e.rem_euclid(2) == 1
}

fn check_degree<K: Coeff>(
    t: &TensorElem<K>,
    alg: &BasedAlgebra<K>,
    degree: i64,
) -> Result<(), YbError> {
    for (f, _) in t.entries() {
        let found: i64 = f.iter().map(|&i| alg.space.degree(i)).sum();
        if found != degree {
            return Err(YbError::Inhomogeneous {
                expected: degree,
                found,
            });
        }
    }
    Ok(())
}

/// `F(a_1 ⊗ ... ⊗ a_{n+1})(x_1, ..., x_n) =
/// (-1)^{Σ_k Σ_{j>k} |x_k||a_j|} a_1 x_1 a_2 ... x_n a_{n+1}`, as a map of the
/// given degree.
pub fn f_map<K: Coeff>(
    t: &TensorElem<K>,
    alg: &BasedAlgebra<K>,
    degree: i64,
) -> Result<MultiMap<K>, YbError> {
    let order = t.order();
    if order < 2 {
        return Err(YbError::OrderTooSmall(order));
    }
    check_degree(t, alg, degree)?;
    let n = order - 1;
    let deg = |i: usize| alg.space.degree(i);
    let sign_of = |a: &[usize], x: &[usize]| {
        let mut e = 0;
        for k in 0..n {
            for j in k + 1..=n {
                e += deg(x[k]) * deg(a[j]);
            }
        }
        K::sign(odd(e))
    };
    let mut out = MultiMap::zero(n, degree);
    if let Some(v) = &alg.matrix_of {
        // only x_k = e_{j_{k-1}}^{i_k} survives; the product is e_{i_0}^{j_n}
        let d = v.dim();
        for (a, c) in t.entries() {
            let pairs: Vec<(usize, usize)> = a.iter().map(|&u| (u / d, u % d)).collect();
            let x: Vec<usize> = (1..=n).map(|k| pairs[k - 1].1 * d + pairs[k].0).collect();
            let o = pairs[0].0 * d + pairs[n].1;
            out.add_entry(x.clone(), o, sign_of(a, &x) * c.clone());
        }
        return Ok(out);
    }
    for (a, c) in t.entries() {
        for x in basis_tuples(alg.dim(), n) {
            let mut cur: SparseVec<K> = BTreeMap::from([(a[0], sign_of(a, &x) * c.clone())]);
            for k in 0..n {
                cur = alg.multiply(&cur, &BTreeMap::from([(x[k], K::one())]));
                cur = alg.multiply(&cur, &BTreeMap::from([(a[k + 1], K::one())]));
            }
            for (o, v) in cur {
                out.add_entry(x.clone(), o, v);
            }
        }
    }
    Ok(out)
}

/// The unique preimage under [`f_map`] of a map on `End(V)`, read off the
/// matrix-unit coefficients: the entry `e_{p_1}^{q_1}, ..., e_{p_n}^{q_n} ↦
/// e_{q_0}^{p_{n+1}}` becomes the factor tuple
/// `e_{q_0}^{p_1} ⊗ e_{q_1}^{p_2} ⊗ ... ⊗ e_{q_n}^{p_{n+1}}`.
pub fn f_inverse<K: Coeff>(
    m: &MultiMap<K>,
    alg: &BasedAlgebra<K>,
) -> Result<TensorElem<K>, YbError> {
    let d = alg.matrix_of.as_ref().ok_or(YbError::NotMatrixAlgebra)?.dim();
    let n = m.arity();
    let deg = |i: usize| alg.space.degree(i);
    let mut t = TensorElem::zero(n + 1);
    for (ins, outs) in m.entries() {
        for (&o, c) in outs {
            let (q0, pn1) = (o / d, o % d);
            let mut a = Vec::with_capacity(n + 1);
            let mut row = q0;
            for &x in ins {
                let (p, q) = (x / d, x % d);
                a.push(row * d + p);
                row = q;
            }
            a.push(row * d + pn1);
            let mut e = 0;
            for k in 0..n {
                for j in k + 1..=n {
                    e += deg(ins[k]) * deg(a[j]);
                }
            }
            t.add_term(a, K::sign(odd(e)) * c.clone());
        }
    }
    Ok(t)
}

fn raise<K: Coeff>(
    t: &TensorElem<K>,
    slots: impl IntoIterator<Item = usize>,
    n: usize,
    alg: &BasedAlgebra<K>,
) -> Result<TensorElem<K>, YbError> {
    let slots: Vec<usize> = slots.into_iter().collect();
    Ok(t.raise_indices(&slots, n, alg)?)
}

/// Left-hand sides of
/// `r^{13} r^{12} - r^{12} r^{23} + s^{23} r^{13} = 0` and
/// `s^{13} r^{12} - s^{12} s^{23} + s^{23} s^{13} = 0`.
pub fn check_classical_ybp<K: Coeff>(
    r: &TensorElem<K>,
    s: &TensorElem<K>,
    alg: &BasedAlgebra<K>,
) -> Result<(TensorElem<K>, TensorElem<K>), YbError> {
    let up = |t: &TensorElem<K>, a: usize, b: usize| raise(t, [a, b], 3, alg);
    let (r12, r13, r23) = (up(r, 1, 2)?, up(r, 1, 3)?, up(r, 2, 3)?);
    let (s12, s13, s23) = (up(s, 1, 2)?, up(s, 1, 3)?, up(s, 2, 3)?);
    let mul = |a: &TensorElem<K>, b: &TensorElem<K>| a.multiply(b, alg);
    let first = mul(&r13, &r12)?.minus(&mul(&r12, &r23)?).plus(&mul(&s23, &r13)?);
    let second = mul(&s13, &r12)?.minus(&mul(&s12, &s23)?).plus(&mul(&s23, &s13)?);
    Ok((first, second))
}

/// `(R, S) = (F(r), F(s))`.
pub fn ybp_to_rbs<K: Coeff>(
    r: &TensorElem<K>,
    s: &TensorElem<K>,
    alg: &BasedAlgebra<K>,
) -> Result<(MultiMap<K>, MultiMap<K>), YbError> {
    Ok((f_map(r, alg, 0)?, f_map(s, alg, 0)?))
}

/// `(r, s) = (F⁻¹(R), F⁻¹(S))` on a matrix algebra.
pub fn rbs_to_ybp<K: Coeff>(
    r: &MultiMap<K>,
    s: &MultiMap<K>,
    alg: &BasedAlgebra<K>,
) -> Result<(TensorElem<K>, TensorElem<K>), YbError> {
    Ok((f_inverse(r, alg)?, f_inverse(s, alg)?))
}

/// `m_1(x) = -[d, x] = -d·x + (-1)^{|x|} x·d` for an odd element `d`.
pub fn inner_differential<K: Coeff>(
    d: &TensorElem<K>,
    alg: &BasedAlgebra<K>,
) -> Result<MultiMap<K>, YbError> {
    check_degree(d, alg, -1)?;
    let dv: SparseVec<K> = d.entries().map(|(f, c)| (f[0], c.clone())).collect();
    let mut m1 = MultiMap::zero(1, -1);
    for x in 0..alg.dim() {
        let xv = BTreeMap::from([(x, K::one())]);
        let sign = K::sign(odd(alg.space.degree(x)));
        for (o, c) in alg.multiply(&dv, &xv) {
            m1.add_entry(vec![x], o, -c);
        }
        for (o, c) in alg.multiply(&xv, &dv) {
            m1.add_entry(vec![x], o, sign.clone() * c);
        }
    }
    Ok(m1)
}

/// Two families `r_n`, `s_n` of elements of `A^{⊗n}`, `|r_n| = |s_n| = n - 2`,
/// sharing `r_1 = s_1 = d`, for `n` up to the truncation order.
#[derive(Clone, Debug, PartialEq)]
pub struct InfinityYBPair<K: Coeff> {
    pub algebra: BasedAlgebra<K>,
    pub d: TensorElem<K>,
    pub r: BTreeMap<usize, TensorElem<K>>,
    pub s: BTreeMap<usize, TensorElem<K>>,
    pub truncation: usize,
}

/// One of the four term-family identities behind the infinity correspondence:
/// an operator expression and `F` of a tensor expression.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCheck<K: Coeff> {
    pub name: &'static str,
    pub operator_side: MultiMap<K>,
    pub tensor_side: MultiMap<K>,
}

impl<K: Coeff> EquivalenceCheck<K> {
    pub fn holds(&self) -> bool {
        self.operator_side == self.tensor_side
    }
}

impl<K: Coeff> InfinityYBPair<K> {
    pub fn new(algebra: BasedAlgebra<K>, d: TensorElem<K>, truncation: usize) -> Self {
        InfinityYBPair {
            algebra,
            d,
            r: BTreeMap::new(),
            s: BTreeMap::new(),
            truncation,
        }
    }

    pub fn validate(&self) -> Result<(), YbError> {
        check_degree(&self.d, &self.algebra, -1)?;
        if self.d.order() != 1 {
            return Err(YbError::Linear(LinearError::OrderMismatch(self.d.order(), 1)));
        }
        for fam in [&self.r, &self.s] {
            for (&n, t) in fam {
                if t.order() != n {
                    return Err(YbError::Linear(LinearError::OrderMismatch(t.order(), n)));
                }
                if n > self.truncation {
                    return Err(YbError::TruncationExceeded {
                        n,
                        truncation: self.truncation,
                    });
                }
                check_degree(t, &self.algebra, n as i64 - 2)?;
            }
        }
        Ok(())
    }

    pub fn r(&self, n: usize) -> TensorElem<K> {
        if n == 1 {
            return self.d.clone();
        }
        self.r.get(&n).cloned().unwrap_or_else(|| TensorElem::zero(n))
    }

    pub fn s(&self, n: usize) -> TensorElem<K> {
        if n == 1 {
            return self.d.clone();
        }
        self.s.get(&n).cloned().unwrap_or_else(|| TensorElem::zero(n))
    }

    fn family(&self, side: Side, n: usize) -> TensorElem<K> {
        match side {
            Side::R => self.r(n),
            Side::S => self.s(n),
        }
    }

    fn mul(&self, a: &TensorElem<K>, b: &TensorElem<K>) -> Result<TensorElem<K>, YbError> {
        Ok(a.multiply(b, &self.algebra)?)
    }

    fn raise(
        &self,
        t: &TensorElem<K>,
        slots: impl IntoIterator<Item = usize>,
        n: usize,
    ) -> Result<TensorElem<K>, YbError> {
        raise(t, slots, n, &self.algebra)
    }

    /// `X_{i+1}^{1,...,s,s+j+1,...,n+1}`: the outer element with a gap of `j`
    /// slots after slot `s`.
    fn outer(&self, x: &TensorElem<K>, s: usize, j: usize, n: usize) -> Result<TensorElem<K>, YbError> {
        self.raise(x, (1..=s).chain(s + j + 1..=n + 1), n + 1)
    }

    /// `Σ_{i+j=n, i,j≥1} (-1)^{1+i} X_{i+1}^{1..i+1} · X_{j+1}^{i+1..n+1}`.
    fn products(&self, side: Side, n: usize) -> Result<TensorElem<K>, YbError> {
        let mut out = TensorElem::zero(n + 1);
        for i in 1..n {
            let j = n - i;
            let a = self.raise(&self.family(side, i + 1), 1..=i + 1, n + 1)?;
            let b = self.raise(&self.family(side, j + 1), i + 1..=n + 1, n + 1)?;
            out.add_scaled(&self.mul(&a, &b)?, &K::sign(i % 2 == 0));
        }
        Ok(out)
    }

    /// `X_{i+1}^{1..s,s+j+1..n+1} · r_{j+1}^{s..s+j}` with its sign
    /// `(-1)^{s-1+(j-1)(n-s-j-1)}`. At `i = 0` the outer factor is `d` and the
    /// inner one is `X_{n+1}` itself: this is the term `d^1 · X_{n+1}`.
    fn r_merge(&self, side: Side, i: usize, j: usize, s: usize) -> Result<TensorElem<K>, YbError> {
        let n = i + j;
        let a = self.outer(&self.family(side, i + 1), s, j, n)?;
        let inner = if i == 0 { self.family(side, j + 1) } else { self.r(j + 1) };
        let b = self.raise(&inner, s..=s + j, n + 1)?;
        let e = s as i64 - 1 + (j as i64 - 1) * (n as i64 - s as i64 - j as i64 - 1);
        Ok(self.mul(&a, &b)?.scaled(&K::sign(odd(e))))
    }

    /// `s_{j+1}^{s+1..s+j+1} · X_{i+1}^{1..s,s+j+1..n+1}` with its sign
    /// `(-1)^{s-1+(j-1)(n-s-j-1)+(1-j)i}`.
    fn s_merge(&self, side: Side, i: usize, j: usize, s: usize) -> Result<TensorElem<K>, YbError> {
        let n = i + j;
        let a = self.raise(&self.s(j + 1), s + 1..=s + j + 1, n + 1)?;
        let b = self.outer(&self.family(side, i + 1), s, j, n)?;
        let e = s as i64 - 1
            + (j as i64 - 1) * (n as i64 - s as i64 - j as i64 - 1)
            + (1 - j as i64) * i as i64;
        Ok(self.mul(&a, &b)?.scaled(&K::sign(odd(e))))
    }

    /// Left minus right side of the infinity equation for the `r` family
    /// (`Side::R`) or the `s` family (`Side::S`) at level `n`, an element of
    /// `A^{⊗n+1}`. At `n = 0` this is `d·d`.
    ///
    /// The right side runs over `i + j = n`, `i, j ≥ 0`; the terms with `i = 0`
    /// or `j = 0` are the ones containing `d`. The `r_{j+1}` family takes
    /// `1 ≤ s ≤ i` when `i, j ≥ 1` and `1 ≤ s ≤ i + 1` otherwise, and the
    /// `s_{j+1}` family takes `1 ≤ s ≤ i`.
    pub fn aybe_residual(&self, side: Side, n: usize) -> Result<TensorElem<K>, YbError> {
        if n + 1 > self.truncation {
            return Err(YbError::TruncationExceeded {
                n: n + 1,
                truncation: self.truncation,
            });
        }
        if n == 0 {
            return self.mul(&self.d, &self.d);
        }
        let mut out = self.products(side, n)?;
        for i in 0..=n {
            let j = n - i;
            let r_top = if i >= 1 && j >= 1 { i } else { i + 1 };
            for s in 1..=r_top {
                out = out.minus(&self.r_merge(side, i, j, s)?);
            }
            for s in 1..=i {
                out = out.minus(&self.s_merge(side, i, j, s)?);
            }
        }
        Ok(out)
    }

    /// The image `(m_1 = -[d,-], m_2, R_n = F(r_{n+1}), S_n = F(s_{n+1}))` on
    /// `End(V)`, truncated one arity below the tensors.
    pub fn chi(&self) -> Result<HomotopyRBS<K>, YbError> {
        if self.algebra.matrix_of.is_none() {
            return Err(YbError::NotMatrixAlgebra);
        }
        let alg = &self.algebra;
        let mut h = HomotopyRBS::new(alg.space.clone(), self.truncation.saturating_sub(1).max(1));
        h.m.insert(1, inner_differential(&self.d, alg)?);
        h.m.insert(2, alg.mult.clone());
        for n in 1..self.truncation {
            let deg = n as i64 - 1;
            h.r.insert(n, f_map(&self.r(n + 1), alg, deg)?);
            h.s.insert(n, f_map(&self.s(n + 1), alg, deg)?);
        }
        Ok(h)
    }

    /// Inverse of [`InfinityYBPair::chi`]; `d` is supplied explicitly because
    /// `-[d,-]` only determines it up to central elements.
    pub fn from_homotopy(
        h: &HomotopyRBS<K>,
        algebra: &BasedAlgebra<K>,
        d: &TensorElem<K>,
    ) -> Result<Self, YbError> {
        if algebra.matrix_of.is_none() {
            return Err(YbError::NotMatrixAlgebra);
        }
        if h.m(1) != inner_differential(d, algebra)? {
            return Err(YbError::NotInner);
        }
        if h.m(2) != algebra.mult || h.is_dg().is_err() {
            return Err(YbError::NotMatrixProduct);
        }
        let mut p = InfinityYBPair::new(algebra.clone(), d.clone(), h.truncation + 1);
        for n in 1..=h.truncation {
            p.r.insert(n + 1, f_inverse(&h.r(n), algebra)?);
            p.s.insert(n + 1, f_inverse(&h.s(n), algebra)?);
        }
        Ok(p)
    }

    /// The four identities relating operator terms of the dg identity for
    /// `X_n` to `F` of the tensor terms of the infinity equation at level `n`:
    /// the `m_1` terms, the `m_2(X_i ⊗ X_j)` terms, and the insertions of
    /// `m_2(R_j ⊗ id)` and of `m_2(id ⊗ S_j)`.
    pub fn equivalence_identities(
        &self,
        side: Side,
        n: usize,
    ) -> Result<Vec<EquivalenceCheck<K>>, YbError> {
        let h = self.chi()?;
        if n == 0 || n > h.truncation {
            return Err(YbError::TruncationExceeded {
                n: n + 1,
                truncation: self.truncation,
            });
        }
        let alg = &self.algebra;
        let sp = &alg.space;
        let op = |k: usize| match side {
            Side::R => h.r(k),
            Side::S => h.s(k),
        };
        let fm = |t: &TensorElem<K>, deg: i64| f_map(t, alg, deg);
        let deg = n as i64 - 1;
        let xn1 = self.family(side, n + 1);
        let nm1_odd = (n - 1) % 2 == 1;

        // m_1 terms
        let m1 = h.m(1);
        let mut lhs1 = m1.insert(1, &op(n), sp)?;
        for i in 1..=n {
            lhs1.add_scaled(&op(n).insert(i, &m1, sp)?, &-K::sign(nm1_odd));
        }
        let mut t1 = TensorElem::zero(n + 1);
        for k in 1..=n + 1 {
            let dk = self.raise(&self.d, [k], n + 1)?;
            t1.add_scaled(&self.mul(&dk, &xn1)?, &-K::one());
            t1.add_scaled(&self.mul(&xn1, &dk)?, &K::sign(nm1_odd));
        }
        let e1 = EquivalenceCheck {
            name: "m1",
            operator_side: lhs1.with_degree(deg - 1),
            tensor_side: fm(&t1, deg - 1)?,
        };

        // m_2(X_i ⊗ X_j)
        let mut lhs2 = MultiMap::zero(n, deg - 1);
        for i in 1..n {
            let (a, b) = (op(i), op(n - i));
            let t = h.m(2).compose(&[Some(&a), Some(&b)], sp)?;
            lhs2.add_scaled(&t, &K::sign(i % 2 == 0));
        }
        let e2 = EquivalenceCheck {
            name: "m2_products",
            operator_side: lhs2.with_degree(deg - 1),
            tensor_side: fm(&self.products(side, n)?, deg - 1)?,
        };

        // insertions of m_2(R_j ⊗ id) and m_2(id ⊗ S_j)
        let mut lhs3 = MultiMap::zero(n, deg - 1);
        let mut lhs4 = MultiMap::zero(n, deg - 1);
        let mut t3 = TensorElem::zero(n + 1);
        let mut t4 = TensorElem::zero(n + 1);
        for j in 1..n {
            let p = n - j;
            let with_r = h.m(2).compose(&[Some(&h.r(j)), None], sp)?;
            let with_s = h.m(2).compose(&[None, Some(&h.s(j))], sp)?;
            for s0 in 0..p {
                let k = (p - 1 - s0) as i64;
                let (s0i, ji) = (s0 as i64, j as i64);
                let t = op(p).insert(s0 + 1, &with_r, sp)?;
                lhs3.add_scaled(&t, &K::sign(odd(s0i + (ji - 1) * (k + 1))));
                let t = op(p).insert(s0 + 1, &with_s, sp)?;
                lhs4.add_scaled(&t, &K::sign(odd(s0i + (ji - 1) * k)));
                t3.add_scaled(&self.r_merge(side, p, j, s0 + 1)?, &K::one());
                t4.add_scaled(&self.s_merge(side, p, j, s0 + 1)?, &K::one());
            }
        }
        let e3 = EquivalenceCheck {
            name: "m2_R_insertions",
            operator_side: lhs3.with_degree(deg - 1),
            tensor_side: fm(&t3, deg - 1)?,
        };
        let e4 = EquivalenceCheck {
            name: "m2_S_insertions",
            operator_side: lhs4.with_degree(deg - 1),
            tensor_side: fm(&t4, deg - 1)?,
        };
        Ok(vec![e1, e2, e3, e4])
    }
}

// ---------------------------------------------------------------------------
// JSON

/// `{algebra, r, s}` for a classical pair.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct YbpJson {
    pub algebra: AlgebraJson,
    pub r: TensorElemJson,
    pub s: TensorElemJson,
}

/// `{algebra, r:[...], s:[...]}` for an infinity pair; each tensor is placed
/// at its own order, and the order-1 element `d` may appear in either list.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InfinityYbpJson {
    pub algebra: AlgebraJson,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub r: Vec<TensorElemJson>,
    #[serde(default)]
    pub s: Vec<TensorElemJson>,
}

impl InfinityYbpJson {
    pub fn build<K: Coeff>(&self, min_truncation: usize) -> Result<InfinityYBPair<K>, YbError> {
        let alg: BasedAlgebra<K> = self.algebra.build()?;
        let read = |list: &Vec<TensorElemJson>| -> Result<BTreeMap<usize, TensorElem<K>>, YbError> {
            let mut out = BTreeMap::new();
            for j in list {
                let t = TensorElem::from_json(j, &alg.space)?;
                out.insert(t.order(), t);
            }
            Ok(out)
        };
        let mut r = read(&self.r)?;
        let mut s = read(&self.s)?;
        let (dr, ds) = (r.remove(&1), s.remove(&1));
        let d = match (dr, ds) {
            (Some(a), Some(b)) if a != b => return Err(YbError::UnaryMismatch),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => TensorElem::zero(1),
        };
        let top = r.keys().chain(s.keys()).copied().max().unwrap_or(1);
        let truncation = self.truncation.unwrap_or(top).max(top).max(min_truncation);
        let p = InfinityYBPair {
            algebra: alg,
            d,
            r,
            s,
            truncation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_pair<K: Coeff>(p: &InfinityYBPair<K>) -> Self {
        let sp = &p.algebra.space;
        let mut r = vec![p.d.to_json(sp)];
        r.extend(p.r.values().map(|t| t.to_json(sp)));
        InfinityYbpJson {
            algebra: AlgebraJson::from_algebra(&p.algebra),
            truncation: Some(p.truncation),
            r,
            s: p.s.values().map(|t| t.to_json(sp)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_linear::{random_map, random_tensor, GradedSpace};
    use crate::homotopy_rbs_checker::check_classical_rbs;
    use crate::{Rational, Scalar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type T = TensorElem<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn m2() -> BasedAlgebra<Rational> {
        BasedAlgebra::full_matrix(2)
    }

    #[test]
    fn f_of_unit_is_identity() {
        let alg = m2();
        let one = T::unit(&alg, 2);
        assert_eq!(f_map(&one, &alg, 0).unwrap(), MultiMap::identity(4));
        assert_eq!(f_map(&T::zero(1), &alg, 0), Err(YbError::OrderTooSmall(1)));
    }

    #[test]
    fn f_on_matrix_units() {
        let alg = m2();
        let e11 = alg.unit_index(0, 0);
        let e12 = alg.unit_index(0, 1);
        let f = f_map(&T::basis_tensor(vec![e11, e11]), &alg, 0).unwrap();
        assert_eq!(f.eval_basis(&[e11]), BTreeMap::from([(e11, q(1))]));
        assert!(f.eval_basis(&[e12]).is_empty());
    }

    #[test]
    fn matrix_shortcut_matches_generic_products() {
        let v = GradedSpace::with_degrees(&[0, 1]);
        let alg = BasedAlgebra::<Rational>::matrix(&v);
        let generic = BasedAlgebra {
            matrix_of: None,
            ..alg.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (order, deg) in [(2, 0), (3, 1), (3, -1), (4, 2)] {
            let t = random_tensor(&alg, order, deg, &mut rng);
            assert_eq!(
                f_map(&t, &alg, deg).unwrap(),
                f_map(&t, &generic, deg).unwrap()
            );
        }
    }

    #[test]
    fn f_inverse_round_trips() {
        let v = GradedSpace::with_degrees(&[0, 1]);
        let alg = BasedAlgebra::<Rational>::matrix(&v);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n, deg) in [(1, 0), (1, 1), (2, 1), (3, 2), (2, -1)] {
            let t = random_tensor(&alg, n + 1, deg, &mut rng);
            let f = f_map(&t, &alg, deg).unwrap();
            assert_eq!(f_inverse(&f, &alg).unwrap(), t);
            let m = random_map(&alg.space, n, deg, &mut rng);
            let back = f_map(&f_inverse(&m, &alg).unwrap(), &alg, deg).unwrap();
            assert_eq!(back, m);
        }
        let id = MultiMap::<Rational>::identity(4);
        let back = f_map(&f_inverse(&id, &alg).unwrap(), &alg, 0).unwrap();
        assert_eq!(back, id);
        assert!(f_inverse(&MultiMap::zero(2, 0), &alg).unwrap().is_zero());
    }

    #[test]
    fn nilpotent_pair_is_yang_baxter() {
        let alg = m2();
        let a = alg.unit_index(0, 1);
        let r = T::basis_tensor(vec![a, a]);
        let (y1, y2) = check_classical_ybp(&r, &r, &alg).unwrap();
        assert!(y1.is_zero() && y2.is_zero());
        let (rr, ss) = ybp_to_rbs(&r, &r, &alg).unwrap();
        let (c1, c2) = check_classical_rbs(&alg, &rr, &ss).unwrap();
        assert!(c1.is_zero() && c2.is_zero());
    }

    #[test]
    fn rbs_residual_is_minus_f_of_ybp_residual() {
        let alg = m2();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..5 {
            let r = random_tensor(&alg, 2, 0, &mut rng);
            let s = random_tensor(&alg, 2, 0, &mut rng);
            let (y1, y2) = check_classical_ybp(&r, &s, &alg).unwrap();
            assert!(!y1.is_zero());
            let (rr, ss) = ybp_to_rbs(&r, &s, &alg).unwrap();
            let (c1, c2) = check_classical_rbs(&alg, &rr, &ss).unwrap();
            assert_eq!(c1, f_map(&y1, &alg, 0).unwrap().scaled(&q(-1)));
            assert_eq!(c2, f_map(&y2, &alg, 0).unwrap().scaled(&q(-1)));
        }
    }

    fn random_pair(seed: u64, truncation: usize, with_d: bool) -> InfinityYBPair<Rational> {
        let v = GradedSpace::with_degrees(&[0, 1]);
        let alg = BasedAlgebra::<Rational>::matrix(&v);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = if with_d {
            random_tensor(&alg, 1, -1, &mut rng)
        } else {
            T::zero(1)
        };
        let mut p = InfinityYBPair::new(alg.clone(), d, truncation);
        for n in 2..=truncation {
            p.r.insert(n, random_tensor(&alg, n, n as i64 - 2, &mut rng));
            p.s.insert(n, random_tensor(&alg, n, n as i64 - 2, &mut rng));
        }
        p
    }

    #[test]
    fn small_levels() {
        let p = random_pair(2, 4, true);
        let alg = &p.algebra;
        let dd = p.d.multiply(&p.d, alg).unwrap();
        assert_eq!(p.aybe_residual(Side::R, 0).unwrap(), dd);
        // level 1: the graded commutator with d^1 + d^2
        let dsum = p
            .raise(&p.d, [1], 2)
            .unwrap()
            .plus(&p.raise(&p.d, [2], 2).unwrap());
        for side in [Side::R, Side::S] {
            let x = p.family(side, 2);
            let comm = dsum.multiply(&x, alg).unwrap().minus(&x.multiply(&dsum, alg).unwrap());
            assert_eq!(p.aybe_residual(side, 1).unwrap(), comm.scaled(&q(-1)));
        }
        // level 2 without r_3, s_3 is the classical pair up to sign
        let mut p2 = p.clone();
        p2.r.remove(&3);
        p2.s.remove(&3);
        let (y1, y2) = check_classical_ybp(&p2.r(2), &p2.s(2), alg).unwrap();
        assert_eq!(p2.aybe_residual(Side::R, 2).unwrap(), y1.scaled(&q(-1)));
        assert_eq!(p2.aybe_residual(Side::S, 2).unwrap(), y2.scaled(&q(-1)));
    }

    #[test]
    fn f_of_aybe_residual_is_dg_residual() {
        for seed in 0..3 {
            let p = random_pair(seed, 4, true);
            let h = p.chi().unwrap();
            for n in 1..=3 {
                for side in [Side::R, Side::S] {
                    let t = p.aybe_residual(side, n).unwrap();
                    let f = f_map(&t, &p.algebra, n as i64 - 2).unwrap();
                    assert_eq!(f, h.dga_residual(side, n).unwrap(), "{side:?} {n}");
                }
            }
        }
    }

    #[test]
    fn four_identities_hold() {
        for seed in 0..3 {
            let p = random_pair(10 + seed, 4, true);
            for n in 1..=3 {
                for side in [Side::R, Side::S] {
                    for e in p.equivalence_identities(side, n).unwrap() {
                        assert!(e.holds(), "{} {side:?} n={n}", e.name);
                    }
                }
            }
        }
    }

    #[test]
    fn chi_round_trip_and_square_zero_d() {
        let p = random_pair(5, 4, true);
        let h = p.chi().unwrap();
        let back = InfinityYBPair::from_homotopy(&h, &p.algebra, &p.d).unwrap();
        assert_eq!(back.r, p.r);
        assert_eq!(back.s, p.s);
        let other = random_pair(6, 4, true);
        assert_eq!(
            InfinityYBPair::from_homotopy(&h, &p.algebra, &other.d),
            Err(YbError::NotInner)
        );
        // d = e_1^2 is odd and squares to zero
        let alg = p.algebra.clone();
        let d = T::basis_tensor(vec![alg.unit_index(0, 1)]);
        let q0 = InfinityYBPair::new(alg.clone(), d, 4);
        let h = q0.chi().unwrap();
        let m1 = h.m(1);
        assert!(m1.insert(1, &m1, &alg.space).unwrap().is_zero());
        for n in 0..=3 {
            assert!(q0.aybe_residual(Side::R, n).unwrap().is_zero());
        }
        for n in 1..=3 {
            assert!(h.hrbs_residual(Side::R, n).unwrap().is_zero());
            assert!(h.stasheff_residual(n).unwrap().is_zero());
        }
    }

    #[test]
    fn json_round_trip() {
        let p = random_pair(7, 3, true);
        let j = InfinityYbpJson::from_pair(&p);
        let text = serde_json::to_string(&j).unwrap();
        let back: InfinityYbpJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build::<Rational>(0).unwrap(), p);
    }
}
