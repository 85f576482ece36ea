//! Residuals of the defining identities of homotopy Rota-Baxter systems on a
//! finite-dimensional graded space: the Stasheff identities, the coupled
//! operator identities in general and in the dg case, and the classical
//! Rota-Baxter system identities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graded_linear::{
    evaluate_element, BasedAlgebra, Coeff, GradedSpace, JsonScalar, LinearError, MultiMap,
    MultiMapJson,
};
use crate::rbs_minimal_model::{diff_generator, SignExponents};
use crate::signs::compositions;
use crate::tree_operad::{Family, Generator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("arity {n} exceeds the truncation {truncation}")]
    TruncationExceeded { n: usize, truncation: usize },
    #[error("the dg form needs m_k = 0 for k >= 3, but m_{0} is nonzero")]
    NotDg(usize),
    #[error("{family}_{arity} has degree {found}, expected {expected}")]
    WrongDegree {
        family: char,
        arity: usize,
        found: i64,
        expected: i64,
    },
    #[error(transparent)]
    Linear(#[from] LinearError),
}

/// Which operator family an identity is about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    R,
    S,
}

/// `m_n` (degree `n-2`, `m_1` the differential), `R_n`, `S_n` (degree `n-1`)
/// on a graded space, up to a truncation arity. Missing entries are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyRBS<K: Coeff> {
    pub space: GradedSpace,
    pub m: BTreeMap<usize, MultiMap<K>>,
    pub r: BTreeMap<usize, MultiMap<K>>,
    pub s: BTreeMap<usize, MultiMap<K>>,
    pub truncation: usize,
}

impl<K: Coeff> HomotopyRBS<K> {
    pub fn new(space: GradedSpace, truncation: usize) -> Self {
        HomotopyRBS {
            space,
            m: BTreeMap::new(),
            r: BTreeMap::new(),
            s: BTreeMap::new(),
            truncation,
        }
    }

    /// Validate degrees and homogeneity of every stored operation.
    pub fn validate(&self) -> Result<(), CheckError> {
        let fams = [('m', &self.m, -2i64), ('R', &self.r, -1), ('S', &self.s, -1)];
        for (c, fam, shift) in fams {
            for (&n, f) in fam {
                let expected = n as i64 + shift;
                if f.degree() != expected || f.arity() != n {
                    return Err(CheckError::WrongDegree {
                        family: c,
                        arity: n,
                        found: f.degree(),
                        expected,
                    });
                }
                f.check_homogeneous(&self.space, &self.space)?;
            }
        }
        Ok(())
    }

    pub fn m(&self, n: usize) -> MultiMap<K> {
        self.m
            .get(&n)
            .cloned()
            .unwrap_or_else(|| MultiMap::zero(n, n as i64 - 2))
    }

    pub fn r(&self, n: usize) -> MultiMap<K> {
        self.r
            .get(&n)
            .cloned()
            .unwrap_or_else(|| MultiMap::zero(n, n as i64 - 1))
    }

    pub fn s(&self, n: usize) -> MultiMap<K> {
        self.s
            .get(&n)
            .cloned()
            .unwrap_or_else(|| MultiMap::zero(n, n as i64 - 1))
    }

    fn op(&self, side: Side, n: usize) -> MultiMap<K> {
        match side {
            Side::R => self.r(n),
            Side::S => self.s(n),
        }
    }

    fn within(&self, n: usize) -> Result<(), CheckError> {
        if n == 0 || n > self.truncation {
            Err(CheckError::TruncationExceeded {
                n,
                truncation: self.truncation,
            })
        } else {
            Ok(())
        }
    }

    pub fn is_dg(&self) -> Result<(), CheckError> {
        match self.m.iter().find(|(&k, f)| k >= 3 && !f.is_zero()) {
            Some((&k, _)) => Err(CheckError::NotDg(k)),
            None => Ok(()),
        }
    }

    /// `Σ_{i+j+k=n} (-1)^{i+jk} m_{i+1+k} ∘ (id^{⊗i} ⊗ m_j ⊗ id^{⊗k})`.
    pub fn stasheff_residual(&self, n: usize) -> Result<MultiMap<K>, CheckError> {
        self.within(n)?;
        let mut out = MultiMap::zero(n, n as i64 - 3);
        for j in 1..=n {
            for i in 0..=n - j {
                let k = n - j - i;
                let term = self.m(i + 1 + k).insert(i + 1, &self.m(j), &self.space)?;
                out.add_scaled(&term, &K::sign((i + j * k) % 2 == 1));
            }
        }
        Ok(out.with_degree(n as i64 - 3))
    }

    /// Left minus right side of the general coupled identity for `R_n` or `S_n`:
    /// `Σ (-1)^δ m_k(X_{l_1} ⊗ ... ⊗ X_{l_k})` against
    /// `Σ (-1)^η X_{r_1}(id^{⊗i} ⊗ m_p(R_{r_2}, ..., R_{r_j}, id, S_{r_{j+1}}, ..., S_{r_p}) ⊗ id^{⊗k})`
    /// with `i + 1 + k = r_1`.
    pub fn hrbs_residual(&self, side: Side, n: usize) -> Result<MultiMap<K>, CheckError> {
        self.within(n)?;
        let deg = n as i64 - 2;
        let mut out = MultiMap::zero(n, deg);
        for k in 1..=n {
            for l in compositions(n, k) {
                let args: Vec<MultiMap<K>> = l.iter().map(|&a| self.op(side, a)).collect();
                let refs: Vec<Option<&MultiMap<K>>> = args.iter().map(Some).collect();
                let term = self.m(k).compose(&refs, &self.space)?;
                out.add_scaled(&term, &K::sign(SignExponents::delta(&l) % 2 == 1));
            }
        }
        for p in 1..=n {
            for r in compositions(n, p) {
                for j in 1..=p {
                    let inner = self.coupled_inner(p, j, &r)?;
                    let outer = self.op(side, r[0]);
                    for i in 0..r[0] {
                        let k = r[0] - 1 - i;
                        let term = outer.insert(i + 1, &inner, &self.space)?;
                        let e = SignExponents::eta(p, j, i, k, &r);
                        out.add_scaled(&term, &-K::sign(e.rem_euclid(2) == 1));
                    }
                }
            }
        }
        Ok(out.with_degree(deg))
    }

    /// `m_p(R_{r_2}, ..., R_{r_j}, id, S_{r_{j+1}}, ..., S_{r_p})`.
    fn coupled_inner(&self, p: usize, j: usize, r: &[usize]) -> Result<MultiMap<K>, CheckError> {
        let mut args: Vec<Option<MultiMap<K>>> = Vec::with_capacity(p);
        for t in 2..=j {
            args.push(Some(self.r(r[t - 1])));
        }
        args.push(None);
        for t in j + 1..=p {
            args.push(Some(self.s(r[t - 1])));
        }
        let refs: Vec<Option<&MultiMap<K>>> = args.iter().map(|a| a.as_ref()).collect();
        Ok(self.m(p).compose(&refs, &self.space)?)
    }

    /// Left minus right side of the dg-case identity for `R_n` or `S_n`
    /// (only `m_1`, `m_2` may be nonzero):
    /// `m_1 X_n + Σ_{i+j=n} (-1)^{i+1} m_2(X_i ⊗ X_j)` against
    /// `Σ ± X_p(id^{⊗i} ⊗ m_2(R_q ⊗ id) ⊗ id^{⊗p-i-1})
    ///  + (-1)^{n-1} Σ_i X_n(id^{⊗i} ⊗ m_1 ⊗ id^{⊗n-i-1})
    ///  + Σ ± X_p(id^{⊗i} ⊗ m_2(id ⊗ S_q) ⊗ id^{⊗p-i-1})`.
    ///
    /// The two families of composite terms are signed so that the identity
    /// is the restriction of [`HomotopyRBS::hrbs_residual`] to the dg case:
    /// the `R_q` term carries `(-1)^{i + (q-1)(p-i)}` and the `S_q` term
    /// `(-1)^{i + (q-1)(p-i-1)}`, for both operator families.
    pub fn dga_residual(&self, side: Side, n: usize) -> Result<MultiMap<K>, CheckError> {
        self.within(n)?;
        self.is_dg()?;
        let deg = n as i64 - 2;
        let sp = &self.space;
        let mut out = MultiMap::zero(n, deg);
        out.add_scaled(&self.m(1).insert(1, &self.op(side, n), sp)?, &K::one());
        for i in 1..n {
            let j = n - i;
            let (a, b) = (self.op(side, i), self.op(side, j));
            let term = self.m(2).compose(&[Some(&a), Some(&b)], sp)?;
            out.add_scaled(&term, &K::sign(i % 2 == 0));
        }
        for p in 1..n {
            let q = n - p;
            let (rq, sq) = (self.r(q), self.s(q));
            let with_r = self.m(2).compose(&[Some(&rq), None], sp)?;
            let with_s = self.m(2).compose(&[None, Some(&sq)], sp)?;
            let outer = self.op(side, p);
            for i in 0..p {
                let sr = (i + (q - 1) * (p - i)) % 2 == 1;
                let ss = (i + (q - 1) * (p - i - 1)) % 2 == 1;
                out.add_scaled(&outer.insert(i + 1, &with_r, sp)?, &-K::sign(sr));
                out.add_scaled(&outer.insert(i + 1, &with_s, sp)?, &-K::sign(ss));
            }
        }
        let xn = self.op(side, n);
        for i in 0..n {
            let term = xn.insert(i + 1, &self.m(1), sp)?;
            out.add_scaled(&term, &-K::sign((n - 1) % 2 == 1));
        }
        Ok(out.with_degree(deg))
    }

    /// The same identity read through the free-operad differential: evaluate
    /// `∂g` on the structure and subtract the differential `[m_1, g]` of the
    /// endomorphism operad. Agrees with the Stasheff and coupled residuals up
    /// to the overall sign `-1`.
    pub fn operadic_residual(&self, g: &Generator) -> Result<MultiMap<K>, CheckError> {
        self.within(g.arity)?;
        let d = diff_generator::<K>(g).expect("m/R/S generator");
        let assign = |h: &Generator| -> Option<MultiMap<K>> {
            match h.family {
                Family::M => Some(self.m(h.arity)),
                Family::R => Some(self.r(h.arity)),
                Family::S => Some(self.s(h.arity)),
                _ => None,
            }
        };
        let deg = g.degree - 1;
        let evaluated = evaluate_element(&d, &assign, deg, &self.space)?;
        let phi = assign(g).expect("m/R/S generator");
        let m1 = self.m(1);
        let mut bracket = m1.insert(1, &phi, &self.space)?;
        for i in 1..=g.arity {
            let t = phi.insert(i, &m1, &self.space)?;
            bracket.add_scaled(&t, &-K::sign(g.degree % 2 != 0));
        }
        Ok(evaluated.minus(&bracket.with_degree(deg)))
    }

    /// Every residual up to `max_arity`, keyed by identity name.
    pub fn all_residuals(&self, max_arity: usize) -> Result<Vec<(String, MultiMap<K>)>, CheckError> {
        let mut out = Vec::new();
        for n in 1..=max_arity {
            out.push((format!("stasheff_{n}"), self.stasheff_residual(n)?));
            out.push((format!("R_{n}"), self.hrbs_residual(Side::R, n)?));
            out.push((format!("S_{n}"), self.hrbs_residual(Side::S, n)?));
        }
        Ok(out)
    }
}

/// Residuals of the classical identities
/// `R(a)R(b) = R(R(a)b + aS(b))` and `S(a)S(b) = S(R(a)b + aS(b))`
/// as arity-2 maps on the algebra.
pub fn check_classical_rbs<K: Coeff>(
    alg: &BasedAlgebra<K>,
    r: &MultiMap<K>,
    s: &MultiMap<K>,
) -> Result<(MultiMap<K>, MultiMap<K>), LinearError> {
    let sp = &alg.space;
    let mu = &alg.mult;
    let inner = mu
        .compose(&[Some(r), None], sp)?
        .plus(&mu.compose(&[None, Some(s)], sp)?);
    let res = |x: &MultiMap<K>| -> Result<MultiMap<K>, LinearError> {
        let lhs = mu.compose(&[Some(x), Some(x)], sp)?;
        let rhs = x.insert(1, &inner, sp)?;
        Ok(lhs.minus(&rhs))
    };
    Ok((res(r)?, res(s)?))
}

/// Associativity residual `μ(μ ⊗ id) - μ(id ⊗ μ)` of a based algebra.
pub fn associativity_residual<K: Coeff>(
    space: &GradedSpace,
    mu: &MultiMap<K>,
) -> Result<MultiMap<K>, LinearError> {
    Ok(mu.insert(1, mu, space)?.minus(&mu.insert(2, mu, space)?))
}

// ---------------------------------------------------------------------------
// JSON

/// A based algebra in a file: either `End(V)` from the degrees of `V`, or
/// explicit structure constants.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AlgebraJson {
    Matrix {
        matrix_degrees: Vec<i64>,
    },
    Explicit {
        space: GradedSpace,
        mult: MultiMapJson,
        unit: BTreeMap<String, JsonScalar>,
    },
}

impl AlgebraJson {
    pub fn build<K: Coeff>(&self) -> Result<BasedAlgebra<K>, LinearError> {
        match self {
            AlgebraJson::Matrix { matrix_degrees } => Ok(BasedAlgebra::matrix(
                &GradedSpace::with_degrees(matrix_degrees),
            )),
            AlgebraJson::Explicit { space, mult, unit } => {
                let mult = MultiMap::from_json(mult, space)?;
                let unit = unit
                    .iter()
                    .map(|(n, c)| Ok((space.index_of(n)?, c.parse()?)))
                    .collect::<Result<_, LinearError>>()?;
                Ok(BasedAlgebra {
                    space: space.clone(),
                    mult,
                    unit,
                    matrix_of: None,
                })
            }
        }
    }

    pub fn from_algebra<K: Coeff>(alg: &BasedAlgebra<K>) -> Self {
        match &alg.matrix_of {
            Some(v) => AlgebraJson::Matrix {
                matrix_degrees: v.degrees(),
            },
            None => AlgebraJson::Explicit {
                space: alg.space.clone(),
                mult: alg.mult.to_json(&alg.space),
                unit: alg
                    .unit
                    .iter()
                    .map(|(i, c)| (alg.space.name(*i).to_string(), JsonScalar::from_scalar(c)))
                    .collect(),
            },
        }
    }
}

/// `{algebra, R, S}` for a classical Rota-Baxter system.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RbsJson {
    pub algebra: AlgebraJson,
    #[serde(rename = "R")]
    pub r: MultiMapJson,
    #[serde(rename = "S")]
    pub s: MultiMapJson,
}

/// `{space, truncation?, m:[...], R:[...], S:[...]}` for a homotopy structure;
/// each listed map is placed at its own arity.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct HomotopyRbsJson {
    pub space: GradedSpace,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub m: Vec<MultiMapJson>,
    #[serde(rename = "R", default)]
    pub r: Vec<MultiMapJson>,
    #[serde(rename = "S", default)]
    pub s: Vec<MultiMapJson>,
}

impl HomotopyRbsJson {
    pub fn build<K: Coeff>(&self, max_arity: usize) -> Result<HomotopyRBS<K>, CheckError> {
        let truncation = self.truncation.unwrap_or(max_arity).max(max_arity);
        let mut h = HomotopyRBS::new(self.space.clone(), truncation);
        for (list, fam) in [(&self.m, &mut h.m), (&self.r, &mut h.r), (&self.s, &mut h.s)] {
            for j in list {
                let f = MultiMap::from_json(j, &self.space)?;
                fam.insert(f.arity(), f);
            }
        }
        h.validate()?;
        Ok(h)
    }

    pub fn from_structure<K: Coeff>(h: &HomotopyRBS<K>) -> Self {
        let dump = |fam: &BTreeMap<usize, MultiMap<K>>| {
            fam.values().map(|f| f.to_json(&h.space)).collect()
        };
        HomotopyRbsJson {
            space: h.space.clone(),
            truncation: Some(h.truncation),
            m: dump(&h.m),
            r: dump(&h.r),
            s: dump(&h.s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded_linear::random_map;
    use crate::{Rational, Scalar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = MultiMap<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn random_structure(degrees: &[i64], n: usize, dg: bool, seed: u64) -> HomotopyRBS<Rational> {
        let space = GradedSpace::with_degrees(degrees);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut h = HomotopyRBS::new(space.clone(), n);
        for k in 1..=n {
            if !dg || k <= 2 {
                h.m.insert(k, random_map(&space, k, k as i64 - 2, &mut rng));
            }
            h.r.insert(k, random_map(&space, k, k as i64 - 1, &mut rng));
            h.s.insert(k, random_map(&space, k, k as i64 - 1, &mut rng));
        }
        h
    }

    #[test]
    fn stasheff_low_arity() {
        let alg = BasedAlgebra::<Rational>::full_matrix(2);
        let mut h = HomotopyRBS::new(alg.space.clone(), 3);
        h.m.insert(2, alg.mult.clone());
        assert!(h.stasheff_residual(3).unwrap().is_zero());
        assert!(h.stasheff_residual(1).unwrap().is_zero());
        assert!(h.stasheff_residual(4).is_err());
        // a non-associative product: m2(v1, v1) = v2, m2(v2, v1) = v1
        let v = GradedSpace::with_degrees(&[0, 0]);
        let mut m2 = M::zero(2, 0);
        m2.add_entry(vec![0, 0], 1, q(1));
        m2.add_entry(vec![1, 0], 0, q(1));
        let mut h = HomotopyRBS::new(v, 3);
        h.m.insert(2, m2);
        assert!(!h.stasheff_residual(3).unwrap().is_zero());
    }

    #[test]
    fn unary_identity_is_chain_map_condition() {
        let h = random_structure(&[0, 1], 2, false, 3);
        let expected = h
            .m(1)
            .insert(1, &h.r(1), &h.space)
            .unwrap()
            .minus(&h.r(1).insert(1, &h.m(1), &h.space).unwrap());
        assert_eq!(h.hrbs_residual(Side::R, 1).unwrap(), expected.with_degree(-1));
    }

    #[test]
    fn arity_two_matches_hand_expansion() {
        let h = random_structure(&[0, 1], 2, false, 11);
        let sp = &h.space;
        let (m1, m2, r1, s1, r2) = (h.m(1), h.m(2), h.r(1), h.s(1), h.r(2));
        let lhs = m2
            .compose(&[Some(&r1), Some(&r1)], sp)
            .unwrap()
            .minus(&r1.insert(1, &m2.compose(&[None, Some(&s1)], sp).unwrap(), sp).unwrap())
            .minus(&r1.insert(1, &m2.compose(&[Some(&r1), None], sp).unwrap(), sp).unwrap());
        let homotopy = m1
            .insert(1, &r2, sp)
            .unwrap()
            .plus(&r2.insert(2, &m1, sp).unwrap())
            .plus(&r2.insert(1, &m1, sp).unwrap());
        let expected = lhs.plus(&homotopy);
        assert_eq!(h.hrbs_residual(Side::R, 2).unwrap(), expected);
    }

    #[test]
    fn explicit_residuals_agree_with_operadic_route() {
        for seed in 0..4 {
            let h = random_structure(&[0, 1], 3, false, seed);
            for n in 1..=3 {
                let st = h.stasheff_residual(n).unwrap();
                if n >= 2 {
                    let op = h.operadic_residual(&Generator::m(n)).unwrap();
                    assert_eq!(st, op.scaled(&q(-1)), "stasheff n={n}");
                }
                for (side, g) in [(Side::R, Generator::r(n)), (Side::S, Generator::s(n))] {
                    let explicit = h.hrbs_residual(side, n).unwrap();
                    let op = h.operadic_residual(&g).unwrap();
                    assert_eq!(explicit, op.scaled(&q(-1)), "{g}");
                }
            }
        }
    }

    #[test]
    fn dg_form_agrees_with_general_form() {
        for seed in 0..4 {
            let h = random_structure(&[0, 1], 3, true, 100 + seed);
            for n in 1..=3 {
                for side in [Side::R, Side::S] {
                    assert_eq!(
                        h.dga_residual(side, n).unwrap(),
                        h.hrbs_residual(side, n).unwrap(),
                        "{side:?} n={n}"
                    );
                }
            }
        }
        let h = random_structure(&[0, 1], 3, false, 1);
        assert_eq!(h.dga_residual(Side::R, 2), Err(CheckError::NotDg(3)));
    }

    #[test]
    fn classical_rbs_examples() {
        let alg = BasedAlgebra::<Rational>::full_matrix(2);
        let zero = M::zero(1, 0);
        let (a, b) = check_classical_rbs(&alg, &zero, &zero).unwrap();
        assert!(a.is_zero() && b.is_zero());
        // R = id, S = 0 satisfies the first identity
        let id = M::identity(alg.dim());
        let (a, _) = check_classical_rbs(&alg, &id, &zero).unwrap();
        assert!(a.is_zero());
        let (a, b) = check_classical_rbs(&alg, &id, &id).unwrap();
        // ab - (ab + ab) = -ab
        assert_eq!(a, alg.mult.scaled(&q(-1)));
        assert_eq!(b, alg.mult.scaled(&q(-1)));
    }

    #[test]
    fn degree_zero_structure_reduces_to_classical() {
        let alg = BasedAlgebra::<Rational>::full_matrix(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random_map(&alg.space, 1, 0, &mut rng);
        let s = random_map(&alg.space, 1, 0, &mut rng);
        let mut h = HomotopyRBS::new(alg.space.clone(), 3);
        h.m.insert(2, alg.mult.clone());
        h.r.insert(1, r.clone());
        h.s.insert(1, s.clone());
        let (c1, c2) = check_classical_rbs(&alg, &r, &s).unwrap();
        assert_eq!(h.hrbs_residual(Side::R, 2).unwrap(), c1);
        assert_eq!(h.hrbs_residual(Side::S, 2).unwrap(), c2);
        assert!(h.hrbs_residual(Side::R, 3).unwrap().is_zero());
    }

    #[test]
    fn json_round_trip() {
        let h = random_structure(&[0, 1], 2, false, 5);
        let j = HomotopyRbsJson::from_structure(&h);
        let text = serde_json::to_string(&j).unwrap();
        let back: HomotopyRbsJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build::<Rational>(2).unwrap(), h);
    }
}
