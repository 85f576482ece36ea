//! The monomial resolution: the simplified differential `∂̄` on `m_n, R_n, S_n`,
//! effective tree monomials, the contracting homotopy `H̄` and the check
//! `∂̄H̄ + H̄∂̄ = Id` on positive-degree monomials.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::rbs_minimal_model::{extend_derivation, DiffError};
use crate::signs::Scalar;
use crate::tree_operad::{Family, Generator, OperadElement, Tree};

/// `∂̄` on a generator of the m/R/S alphabet.
pub fn diff_bar<K: Scalar>(g: &Generator) -> Result<OperadElement<K>, DiffError> {
    let n = g.arity;
    let mut out = OperadElement::zero(n);
    match g.family {
        Family::M => {
            for j in 2..n {
                let sign = (1 + j * (n - 1)) % 2 == 1;
                let term = OperadElement::<K>::generator(Generator::m(n - j + 1))
                    .compose_at(1, &OperadElement::generator(Generator::m(j)))
                    .expect("index in range");
                out.add_scaled(&term, &K::sign(sign));
            }
        }
        Family::R | Family::S => {
            for r1 in 1..n {
                let r2 = n - r1;
                let top = Generator::builtin(g.family.clone(), r1).expect("arity >= 1");
                let term = OperadElement::<K>::generator(top)
                    .compose_at(1, &OperadElement::generator(Generator::m(2)))
                    .and_then(|e| e.compose_at(1, &OperadElement::generator(Generator::r(r2))))
                    .expect("index in range");
                out.add_scaled(&term, &K::sign((r1 * (r2 - 1)) % 2 == 1));
            }
        }
        _ => return Err(DiffError::Unsupported(g.to_string())),
    }
    Ok(out)
}

/// `∂̄` extended to a derivation.
pub fn apply_diff_bar<K: Scalar>(e: &OperadElement<K>) -> Result<OperadElement<K>, DiffError> {
    extend_derivation(diff_bar::<K>, e)
}

/// Coefficient of the leading monomial of `∂̄g`, for `g` of positive degree.
pub fn leading_coefficient<K: Scalar>(g: &Generator) -> Result<K, DiffError> {
    let d = diff_bar::<K>(g)?;
    d.leading_monomial()
        .map(|(_, c)| c)
        .map_err(|_| DiffError::Unsupported(g.to_string()))
}

/// The generator whose leading term is the typical monomial rooted at a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EffectiveDivisorLocation {
    /// Planar index of the divisor's root vertex.
    pub root: usize,
    /// Index (1-based) of the leftmost leaf above the divisor root.
    pub leaf: usize,
    /// The generator `S` with `Ŝ` equal to the divisor.
    pub generator: Generator,
}

/// Vertex table of a tree in planar order.
struct Flat {
    gens: Vec<Generator>,
    children: Vec<Vec<Option<usize>>>,
    first_leaf: Vec<usize>,
    leaf_paths: Vec<Vec<usize>>,
}

impl Flat {
    fn new(t: &Tree) -> Flat {
        let mut f = Flat {
            gens: Vec::new(),
            children: Vec::new(),
            first_leaf: Vec::new(),
            leaf_paths: Vec::new(),
        };
        let mut stack = Vec::new();
        f.visit(t, &mut stack);
        f
    }

    fn visit(&mut self, t: &Tree, stack: &mut Vec<usize>) -> Option<usize> {
        match t {
            Tree::Leaf => {
                self.leaf_paths.push(stack.clone());
                None
            }
            Tree::Node(g, ch) => {
                let id = self.gens.len();
                self.gens.push(g.clone());
                self.children.push(Vec::new());
                self.first_leaf.push(self.leaf_paths.len());
                stack.push(id);
                let kids: Vec<_> = ch.iter().map(|c| self.visit(c, stack)).collect();
                stack.pop();
                self.children[id] = kids;
                Some(id)
            }
        }
    }

    /// If a typical monomial is rooted at `v`, its generator and vertices.
    fn typical_at(&self, v: usize) -> Option<(Generator, Vec<usize>)> {
        let g = &self.gens[v];
        let c = self.children[v].first().copied().flatten()?;
        if self.gens[c] != Generator::m(2) {
            return None;
        }
        match g.family {
            Family::M => Some((Generator::m(g.arity + 1), vec![v, c])),
            Family::R | Family::S => {
                let d = self.children[c][0]?;
                (self.gens[d] == Generator::r(1)).then(|| {
                    let s = Generator::builtin(g.family.clone(), g.arity + 1).unwrap();
                    (s, vec![v, c, d])
                })
            }
            _ => None,
        }
    }

    /// Vertices from `v` up to the leftmost leaf above it.
    fn left_chain(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut cur = v;
        while let Some(Some(c)) = self.children[cur].first() {
            out.push(*c);
            cur = *c;
        }
        out
    }
}

/// Locate the effective divisor of `t`, if `t` is effective.
///
/// A typical divisor rooted at `v` is effective when the chain of first
/// children from `v` to the leaf `l` above it carries no other typical divisor
/// and no positive-degree vertex besides `v`, and every root-to-leaf path
/// ending left of `l` carries no positive-degree vertex and no vertex rooting a
/// typical divisor.
pub fn is_effective(t: &Tree) -> Option<EffectiveDivisorLocation> {
    let flat = Flat::new(t);
    for v in 0..flat.gens.len() {
        let Some((s, _)) = flat.typical_at(v) else {
            continue;
        };
        let chain = flat.left_chain(v);
        let chain_ok = chain[1..]
            .iter()
            .all(|&u| flat.gens[u].degree == 0 && flat.typical_at(u).is_none());
        if !chain_ok {
            continue;
        }
        let leaf = flat.first_leaf[v];
        let left_ok = flat.leaf_paths[..leaf].iter().all(|path| {
            path.iter()
                .all(|&u| flat.gens[u].degree == 0 && flat.typical_at(u).is_none())
        });
        if left_ok {
            return Some(EffectiveDivisorLocation {
                root: v,
                leaf: leaf + 1,
                generator: s,
            });
        }
    }
    None
}

/// Replace the typical monomial rooted at planar vertex `v` by `s`.
fn contract(t: &Tree, v: usize, s: &Generator) -> Tree {
    fn rec(t: &Tree, v: usize, s: &Generator, counter: &mut usize) -> Tree {
        match t {
            Tree::Leaf => Tree::Leaf,
            Tree::Node(g, ch) => {
                let here = *counter;
                *counter += 1;
                if here == v {
                    // first child is m_2, whose first child is R_1 for R/S roots
                    let Tree::Node(_, mch) = &ch[0] else {
                        unreachable!("typical divisor has an m_2 first child")
                    };
                    let mut new_children = Vec::new();
                    match g.family {
                        Family::M => new_children.extend(mch.iter().cloned()),
                        _ => {
                            let Tree::Node(_, rch) = &mch[0] else {
                                unreachable!("typical divisor has an R_1 above m_2")
                            };
                            new_children.push(rch[0].clone());
                            new_children.push(mch[1].clone());
                        }
                    }
                    new_children.extend(ch[1..].iter().cloned());
                    Tree::Node(s.clone(), new_children)
                } else {
                    Tree::Node(g.clone(), ch.iter().map(|c| rec(c, v, s, counter)).collect())
                }
            }
        }
    }
    let mut counter = 0;
    rec(t, v, s, &mut counter)
}

/// `H̄` on a tree monomial: zero off effective monomials, otherwise the
/// effective divisor contracted to its generator with sign `(-1)^ω / l_S`,
/// where `ω` sums the degrees of the vertices before the divisor root in
/// planar order.
pub fn homotopy_h<K: Scalar>(t: &Tree) -> OperadElement<K> {
    let Some(loc) = is_effective(t) else {
        return OperadElement::zero(t.arity());
    };
    let omega: i64 = t.vertices()[..loc.root].iter().map(|g| g.degree).sum();
    let l = leading_coefficient::<K>(&loc.generator).expect("typical generator has positive degree");
    let coeff = K::sign(omega.rem_euclid(2) == 1) / l;
    OperadElement::term(contract(t, loc.root, &loc.generator), coeff)
}

/// Linear extension of [`homotopy_h`].
pub fn apply_homotopy<K: Scalar>(e: &OperadElement<K>) -> OperadElement<K> {
    let mut out = OperadElement::zero(e.arity());
    for (t, c) in e.terms() {
        out.add_scaled(&homotopy_h(t), c);
    }
    out
}

/// A degree-0 monomial over `m_2, R_1, S_1` is normal when it contains none
/// of `m_2∘_1 m_2`, `R_1∘_1(m_2∘_1 R_1)`, `S_1∘_1(m_2∘_1 R_1)`.
pub fn is_normal_form(t: &Tree) -> bool {
    let flat = Flat::new(t);
    (0..flat.gens.len()).all(|v| match flat.typical_at(v) {
        None => true,
        Some((s, _)) => s.arity > 3 || s.arity == 3 && s.family != Family::M,
    })
}

/// Alphabet `{m_n}_{2≤n≤A} ∪ {R_n, S_n}_{1≤n≤A}`.
pub fn alphabet(max_arity: usize) -> Vec<Generator> {
    let mut out = Vec::new();
    for n in 1..=max_arity {
        out.push(Generator::r(n));
        out.push(Generator::s(n));
        if n >= 2 {
            out.push(Generator::m(n));
        }
    }
    out
}

/// All tree monomials over [`alphabet`] with arity at most `max_arity` and
/// weight between 1 and `max_weight`.
pub fn enumerate_trees(max_arity: usize, max_weight: usize) -> Vec<Tree> {
    // table[a][w] = trees (or the bare leaf) of exact arity a and weight w
    let mut table: Vec<Vec<Vec<Tree>>> = vec![vec![Vec::new(); max_weight + 1]; max_arity + 1];
    if max_arity >= 1 {
        table[1][0].push(Tree::Leaf);
    }
    let gens = alphabet(max_arity);
    for w in 1..=max_weight {
        for g in &gens {
            // fill g's children with total weight w - 1 and total arity ≤ max_arity
            let mut partial: Vec<(Vec<Tree>, usize, usize)> = vec![(Vec::new(), 0, 0)];
            for _ in 0..g.arity {
                let mut next = Vec::new();
                for (kids, a, wt) in &partial {
                    for ca in 1..=max_arity.saturating_sub(*a) {
                        for cw in 0..=(w - 1 - wt) {
                            for c in &table[ca][cw] {
                                let mut k = kids.clone();
                                k.push(c.clone());
                                next.push((k, a + ca, wt + cw));
                            }
                        }
                    }
                }
                partial = next;
            }
            for (kids, a, wt) in partial {
                if wt == w - 1 && a <= max_arity {
                    table[a][w].push(Tree::Node(g.clone(), kids));
                }
            }
        }
    }
    let mut out = Vec::new();
    for a in 1..=max_arity {
        for w in 1..=max_weight {
            out.extend(table[a][w].iter().cloned());
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HomotopyFailure {
    pub tree: String,
    pub residual: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct HomotopyReport {
    pub checked: usize,
    pub failures: Vec<HomotopyFailure>,
    /// Monomials on which `H̄²` is nonzero; recorded, not required to vanish.
    pub h_squared_nonzero: usize,
}

impl HomotopyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// `∂̄H̄(T) + H̄∂̄(T) - T` on a single monomial.
pub fn homotopy_residual<K: Scalar>(t: &Tree) -> OperadElement<K> {
    let h = homotopy_h::<K>(t);
    let dh = apply_diff_bar(&h).expect("alphabet labels");
    let d = apply_diff_bar(&OperadElement::<K>::monomial(t.clone())).expect("alphabet labels");
    let hd = apply_homotopy(&d);
    dh + hd - OperadElement::monomial(t.clone())
}

/// Check `∂̄H̄ + H̄∂̄ = Id` on every positive-degree monomial within the bounds.
pub fn check_homotopy<K: Scalar>(max_arity: usize, max_weight: usize) -> HomotopyReport {
    let trees: Vec<Tree> = enumerate_trees(max_arity, max_weight)
        .into_iter()
        .filter(|t| t.degree() >= 1)
        .collect();
    let results: Vec<(Option<HomotopyFailure>, bool)> = trees
        .par_iter()
        .map(|t| {
            let res = homotopy_residual::<K>(t);
            let failure = (!res.is_zero()).then(|| HomotopyFailure {
                tree: t.to_string(),
                residual: res.to_string(),
            });
            let hh = apply_homotopy(&homotopy_h::<K>(t));
            (failure, !hh.is_zero())
        })
        .collect();
    HomotopyReport {
        checked: trees.len(),
        h_squared_nonzero: results.iter().filter(|(_, nz)| *nz).count(),
        failures: results.into_iter().filter_map(|(f, _)| f).collect(),
    }
}

/// Leading coefficients `l_S` of all positive-degree generators up to `max_arity`.
pub fn leading_coefficients<K: Scalar>(max_arity: usize) -> BTreeMap<String, K> {
    alphabet(max_arity)
        .into_iter()
        .filter(|g| g.degree >= 1)
        .map(|g| {
            let l = leading_coefficient::<K>(&g).expect("positive degree");
            (g.to_string(), l)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_operad::compare_graded_pathlex;
    use crate::Rational;
    use std::cmp::Ordering;

    type E = OperadElement<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn t(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    #[test]
    fn diff_bar_examples() {
        assert_eq!(
            diff_bar::<Rational>(&Generator::m(3)).unwrap(),
            E::term(t("m2(m2(1, 2), 3)"), q(-1))
        );
        assert!(diff_bar::<Rational>(&Generator::r(1)).unwrap().is_zero());
        assert!(diff_bar::<Rational>(&Generator::m(2)).unwrap().is_zero());
        assert_eq!(
            diff_bar::<Rational>(&Generator::r(2)).unwrap(),
            E::term(t("R1(m2(R1(1), 2))"), q(1))
        );
    }

    #[test]
    fn leading_monomials() {
        let (lm, c) = diff_bar::<Rational>(&Generator::m(3)).unwrap().leading_monomial().unwrap();
        assert_eq!((lm, c), (t("m2(m2(1, 2), 3)"), q(-1)));
        let (lm, _) = diff_bar::<Rational>(&Generator::r(2)).unwrap().leading_monomial().unwrap();
        assert_eq!(lm, t("R1(m2(R1(1), 2))"));
        for n in 3..=6 {
            let (lm, _) = diff_bar::<Rational>(&Generator::r(n)).unwrap().leading_monomial().unwrap();
            let expected = Tree::Node(
                Generator::r(n - 1),
                std::iter::once(Tree::Node(
                    Generator::m(2),
                    vec![Tree::corolla(Generator::r(1)), Tree::Leaf],
                ))
                .chain(std::iter::repeat(Tree::Leaf).take(n - 2))
                .collect(),
            );
            assert_eq!(lm, expected);
        }
    }

    #[test]
    fn leading_coefficients_are_units() {
        for (_, l) in leading_coefficients::<Rational>(6) {
            assert_eq!(l.clone() * l, q(1));
        }
    }

    #[test]
    fn diff_bar_squares_to_zero() {
        for g in alphabet(6) {
            let d = diff_bar::<Rational>(&g).unwrap();
            assert!(apply_diff_bar(&d).unwrap().is_zero(), "{g}");
        }
    }

    #[test]
    fn typical_trees_are_effective() {
        let loc = is_effective(&t("m2(m2(1, 2), 3)")).unwrap();
        assert_eq!((loc.root, loc.leaf), (0, 1));
        assert_eq!(loc.generator, Generator::m(3));
        assert!(is_effective(&t("R2(1, 2)")).is_none());
        assert!(is_effective(&t("m3(1, 2, 3)")).is_none());
    }

    #[test]
    fn first_leaf_on_positive_vertex_is_not_effective() {
        // the leftmost leaf hangs off a degree-1 root, with a typical divisor to the right
        assert!(is_effective(&t("R2(1, m2(m2(2, 3), 4))")).is_none());
    }

    #[test]
    fn positive_vertex_above_divisor_is_not_effective() {
        assert!(is_effective(&t("m2(m2(R2(1, 2), 3), 4)")).is_none());
        assert!(is_effective(&t("m2(m2(1, 2), 3)")).is_some());
    }

    #[test]
    fn homotopy_examples() {
        assert_eq!(homotopy_h::<Rational>(&t("m2(m2(1, 2), 3)")), E::term(t("m3(1, 2, 3)"), q(-1)));
        assert_eq!(homotopy_h::<Rational>(&t("R1(m2(R1(1), 2))")), E::term(t("R2(1, 2)"), q(1)));
        assert!(homotopy_h::<Rational>(&t("R2(1, m2(m2(2, 3), 4))")).is_zero());
        for s in ["R2(1, 2)", "m3(1, 2, 3)"] {
            assert!(homotopy_residual::<Rational>(&t(s)).is_zero(), "{s}");
        }
    }

    #[test]
    fn homotopy_identity_small() {
        let report = check_homotopy::<Rational>(3, 3);
        assert!(report.checked > 0);
        assert!(report.ok(), "{:?}", &report.failures[..report.failures.len().min(5)]);
    }

    #[test]
    fn enumeration_counts() {
        // arity 1, weight ≤ 2: R1, S1, and the four unary chains
        assert_eq!(enumerate_trees(1, 2).len(), 6);
        for tr in enumerate_trees(3, 3) {
            assert!(tr.arity() <= 3 && (1..=3).contains(&tr.weight()));
        }
    }

    #[test]
    fn normal_forms() {
        assert!(is_normal_form(&t("m2(1, m2(2, 3))")));
        assert!(!is_normal_form(&t("m2(m2(1, 2), 3)")));
        assert!(!is_normal_form(&t("S1(m2(R1(1), 2))")));
        assert!(is_normal_form(&t("R1(m2(S1(1), 2))")));
        assert!(is_normal_form(&t("m2(R1(1), R1(2))")));
    }

    #[test]
    fn pathlex_is_total_on_sample() {
        let sample = enumerate_trees(3, 2);
        for a in &sample {
            for b in &sample {
                let ab = compare_graded_pathlex(a, b).unwrap();
                let ba = compare_graded_pathlex(b, a).unwrap();
                assert_eq!(ab, ba.reverse());
                assert_eq!(ab == Ordering::Equal, a == b);
            }
        }
    }
}
