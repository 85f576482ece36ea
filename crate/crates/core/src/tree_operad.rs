//! Free graded non-symmetric operads: planar tree monomials, their rational
//! linear combinations, partial compositions and brace operations.
//!
//! Every tree monomial is read with its vertices in planar order (depth first
//! from the root, a vertex before its subtrees, subtrees left to right). A
//! composite built from pieces listed in some other order picks up the Koszul
//! sign of rearranging the vertex degrees into planar order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signs::{reorder_parity, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperadError {
    #[error("leaf index {index} out of range for arity {arity}")]
    LeafOutOfRange { index: usize, arity: usize },
    #[error("vertex index {index} out of range for weight {weight}")]
    VertexOutOfRange { index: usize, weight: usize },
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("invalid generator {0}")]
    InvalidGenerator(String),
    #[error("label {0} is outside the m/R/S alphabet")]
    OutsideAlphabet(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("the zero element has no leading monomial")]
    ZeroElement,
    #[error("element is zero or not homogeneous")]
    Inhomogeneous,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    M,
    R,
    S,
    X,
    Y,
    Z,
    Custom(String),
}

/// A generating operation: family tag, arity and homological degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Generator {
    pub family: Family,
    pub arity: usize,
    pub degree: i64,
}

impl Generator {
    /// Builtin generator with its conventional degree:
    /// `|m_n| = n-2`, `|R_n| = |S_n| = n-1`, `|x_n| = -1`, `|y_n| = |z_n| = 0`.
    pub fn builtin(family: Family, arity: usize) -> Result<Self, OperadError> {
        let n = arity as i64;
        let degree = match family {
            Family::M if arity >= 2 => n - 2,
            Family::X if arity >= 2 => -1,
            Family::R | Family::S if arity >= 1 => n - 1,
            Family::Y | Family::Z if arity >= 1 => 0,
            _ => {
                return Err(OperadError::InvalidGenerator(format!(
                    "{}{}",
                    family_symbol(&family),
                    arity
                )))
            }
        };
        Ok(Generator {
            family,
            arity,
            degree,
        })
    }

    pub fn custom(name: &str, arity: usize, degree: i64) -> Self {
        Generator {
            family: Family::Custom(name.to_string()),
            arity,
            degree,
        }
    }

    pub fn m(n: usize) -> Self {
        Self::builtin(Family::M, n).expect("m_n needs n >= 2")
    }
    pub fn r(n: usize) -> Self {
        Self::builtin(Family::R, n).expect("R_n needs n >= 1")
    }
    pub fn s(n: usize) -> Self {
        Self::builtin(Family::S, n).expect("S_n needs n >= 1")
    }
    pub fn x(n: usize) -> Self {
        Self::builtin(Family::X, n).expect("x_n needs n >= 2")
    }
    pub fn y(n: usize) -> Self {
        Self::builtin(Family::Y, n).expect("y_n needs n >= 1")
    }
    pub fn z(n: usize) -> Self {
        Self::builtin(Family::Z, n).expect("z_n needs n >= 1")
    }

    /// Rank in the chain `R_1 < S_1 < m_2 < R_2 < S_2 < m_3 < ...`.
    pub fn alphabet_rank(&self) -> Result<(usize, u8), OperadError> {
        match self.family {
            Family::R => Ok((self.arity, 0)),
            Family::S => Ok((self.arity, 1)),
            Family::M => Ok((self.arity - 1, 2)),
            _ => Err(OperadError::OutsideAlphabet(self.to_string())),
        }
    }
}

fn family_symbol(f: &Family) -> &str {
    match f {
        Family::M => "m",
        Family::R => "R",
        Family::S => "S",
        Family::X => "x",
        Family::Y => "y",
        Family::Z => "z",
        Family::Custom(name) => name,
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", family_symbol(&self.family), self.arity)
    }
}

/// A planar rooted tree with generator-labelled internal vertices. A bare
/// [`Tree::Leaf`] is the operadic unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tree {
    Leaf,
    Node(Generator, Vec<Tree>),
}

impl Tree {
    pub fn corolla(g: Generator) -> Tree {
        let children = vec![Tree::Leaf; g.arity];
        Tree::Node(g, children)
    }

    pub fn arity(&self) -> usize {
        match self {
            Tree::Leaf => 1,
            Tree::Node(_, ch) => ch.iter().map(Tree::arity).sum(),
        }
    }

    pub fn degree(&self) -> i64 {
        match self {
            Tree::Leaf => 0,
            Tree::Node(g, ch) => g.degree + ch.iter().map(Tree::degree).sum::<i64>(),
        }
    }

    pub fn weight(&self) -> usize {
        match self {
            Tree::Leaf => 0,
            Tree::Node(_, ch) => 1 + ch.iter().map(Tree::weight).sum::<usize>(),
        }
    }

    /// Vertex labels in planar order.
    pub fn vertices(&self) -> Vec<&Generator> {
        let mut out = Vec::new();
        self.collect_vertices(&mut out);
        out
    }

    fn collect_vertices<'a>(&'a self, out: &mut Vec<&'a Generator>) {
        if let Tree::Node(g, ch) = self {
            out.push(g);
            for c in ch {
                c.collect_vertices(out);
            }
        }
    }

    pub fn vertex_degrees(&self) -> Vec<i64> {
        self.vertices().iter().map(|g| g.degree).collect()
    }

    /// Path words from the root to each leaf, left to right.
    pub fn path_sequence(&self) -> Vec<Vec<&Generator>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.paths_rec(&mut stack, &mut out);
        out
    }

    fn paths_rec<'a>(&'a self, stack: &mut Vec<&'a Generator>, out: &mut Vec<Vec<&'a Generator>>) {
        match self {
            Tree::Leaf => out.push(stack.clone()),
            Tree::Node(g, ch) => {
                stack.push(g);
                for c in ch {
                    c.paths_rec(stack, out);
                }
                stack.pop();
            }
        }
    }

    /// Subtree rooted at the vertex with planar index `v`.
    pub fn subtree(&self, v: usize) -> Option<&Tree> {
        let mut counter = 0;
        self.subtree_rec(v, &mut counter)
    }

    fn subtree_rec(&self, v: usize, counter: &mut usize) -> Option<&Tree> {
        match self {
            Tree::Leaf => None,
            Tree::Node(_, ch) => {
                if *counter == v {
                    return Some(self);
                }
                *counter += 1;
                ch.iter().find_map(|c| c.subtree_rec(v, counter))
            }
        }
    }

    /// Parse the nested-term syntax, e.g. `m2(R1(1), m2(2, 3))`.
    pub fn parse(text: &str) -> Result<Tree, OperadError> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            next_leaf: 1,
        };
        let t = p.tree()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(t)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut leaf = 0;
        fmt_tree(self, f, &mut leaf)
    }
}

fn fmt_tree(t: &Tree, f: &mut fmt::Formatter<'_>, leaf: &mut usize) -> fmt::Result {
    match t {
        Tree::Leaf => {
            *leaf += 1;
            write!(f, "{}", leaf)
        }
        Tree::Node(g, ch) => {
            write!(f, "{}(", g)?;
            for (k, c) in ch.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                fmt_tree(c, f, leaf)?;
            }
            write!(f, ")")
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    next_leaf: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> OperadError {
        OperadError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self) -> Result<usize, OperadError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn tree(&mut self) -> Result<Tree, OperadError> {
        self.skip_ws();
        let Some(&c) = self.src.get(self.pos) else {
            return Err(self.err("unexpected end of input"));
        };
        if c.is_ascii_digit() {
            let n = self.number()?;
            if n != self.next_leaf {
                return Err(self.err(&format!(
                    "leaves must be numbered left to right; expected {}",
                    self.next_leaf
                )));
            }
            self.next_leaf += 1;
            return Ok(Tree::Leaf);
        }
        let family = match c {
            b'm' => Family::M,
            b'R' => Family::R,
            b'S' => Family::S,
            b'x' => Family::X,
            b'y' => Family::Y,
            b'z' => Family::Z,
            _ => return Err(self.err("unknown generator symbol")),
        };
        self.pos += 1;
        let arity = self.number()?;
        let g = Generator::builtin(family, arity)?;
        self.skip_ws();
        if self.src.get(self.pos) != Some(&b'(') {
            return Err(self.err("expected '('"));
        }
        self.pos += 1;
        let mut children = Vec::new();
        loop {
            children.push(self.tree()?);
            self.skip_ws();
            match self.src.get(self.pos) {
                Some(b',') => self.pos += 1,
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err("expected ',' or ')'")),
            }
        }
        if children.len() != g.arity {
            return Err(OperadError::ArityMismatch {
                expected: g.arity,
                found: children.len(),
            });
        }
        Ok(Tree::Node(g, children))
    }
}

// ---------------------------------------------------------------------------
// Tagged trees: every vertex remembers its position in a "source" listing, so
// the sign of any grafting is the Koszul sign of source order -> planar order.

#[derive(Clone, Debug)]
enum Tagged {
    Leaf,
    Node(Generator, usize, Vec<Tagged>),
}

fn tag(t: &Tree, next: &mut usize, degs: &mut Vec<i64>) -> Tagged {
    match t {
        Tree::Leaf => Tagged::Leaf,
        Tree::Node(g, ch) => {
            let id = *next;
            *next += 1;
            degs.push(g.degree);
            let children = ch.iter().map(|c| tag(c, next, degs)).collect();
            Tagged::Node(g.clone(), id, children)
        }
    }
}

fn untag(t: Tagged, order: &mut Vec<usize>) -> Tree {
    match t {
        Tagged::Leaf => Tree::Leaf,
        Tagged::Node(g, id, ch) => {
            order.push(id);
            Tree::Node(g, ch.into_iter().map(|c| untag(c, order)).collect())
        }
    }
}

/// Replace the leaves of `t`, left to right, by the items of `fills`.
fn graft_leaves(t: Tagged, fills: &mut std::vec::IntoIter<Tagged>) -> Tagged {
    match t {
        Tagged::Leaf => fills.next().expect("one fill per leaf"),
        Tagged::Node(g, id, ch) => {
            Tagged::Node(g, id, ch.into_iter().map(|c| graft_leaves(c, fills)).collect())
        }
    }
}

fn finish(t: Tagged, degs: &[i64]) -> (Tree, bool) {
    let mut order = Vec::with_capacity(degs.len());
    let tree = untag(t, &mut order);
    let parity = reorder_parity(&order, degs);
    (tree, parity)
}

/// Graft several trees into distinct leaves of `base`. The source order is
/// `base`, then the inserted trees in the order given. Returns the composite
/// and the parity of its Koszul sign.
pub fn graft_many(base: &Tree, inserts: &[(usize, &Tree)]) -> Result<(Tree, bool), OperadError> {
    let arity = base.arity();
    let mut degs = Vec::new();
    let mut next = 0;
    let tb = tag(base, &mut next, &mut degs);
    let mut fills: Vec<Option<Tagged>> = vec![None; arity];
    for &(pos, t) in inserts {
        if pos == 0 || pos > arity {
            return Err(OperadError::LeafOutOfRange { index: pos, arity });
        }
        fills[pos - 1] = Some(tag(t, &mut next, &mut degs));
    }
    let fills: Vec<Tagged> = fills.into_iter().map(|f| f.unwrap_or(Tagged::Leaf)).collect();
    let grafted = graft_leaves(tb, &mut fills.into_iter());
    Ok(finish(grafted, &degs))
}

/// `f ∘_i g` on monomials: the composite tree and the parity of its sign.
pub fn compose_monomials(f: &Tree, i: usize, g: &Tree) -> Result<(Tree, bool), OperadError> {
    graft_many(f, &[(i, g)])
}

/// Replace the vertex with planar index `v` by the tree `replacement` (of the
/// same arity), regrafting the vertex's subtrees onto its leaves. Source order
/// is: vertices of `t` before `v`, then `replacement`, then the rest of `t`.
pub fn substitute_vertex(
    t: &Tree,
    v: usize,
    replacement: &Tree,
) -> Result<(Tree, bool), OperadError> {
    let weight = t.weight();
    if v >= weight {
        return Err(OperadError::VertexOutOfRange { index: v, weight });
    }
    let mut degs = Vec::new();
    let mut next = 0;
    let tt = tag(t, &mut next, &mut degs);
    let r_weight = replacement.weight();
    // shift tags of vertices after v to make room for the replacement
    let tt = shift_after(tt, v, r_weight);
    let mut r_degs = Vec::new();
    let mut r_next = v;
    let tr = tag(replacement, &mut r_next, &mut r_degs);
    let mut all_degs = Vec::with_capacity(weight - 1 + r_weight);
    all_degs.extend_from_slice(&degs[..v]);
    all_degs.extend_from_slice(&r_degs);
    all_degs.extend_from_slice(&degs[v + 1..]);
    let mut tr = Some(tr);
    let built = replace_tagged(tt, v, &mut tr)?;
    Ok(finish(built, &all_degs))
}

fn shift_after(t: Tagged, v: usize, r_weight: usize) -> Tagged {
    match t {
        Tagged::Leaf => Tagged::Leaf,
        Tagged::Node(g, id, ch) => {
            let new_id = if id > v { id + r_weight - 1 } else { id };
            Tagged::Node(
                g,
                new_id,
                ch.into_iter().map(|c| shift_after(c, v, r_weight)).collect(),
            )
        }
    }
}

fn replace_tagged(t: Tagged, v: usize, repl: &mut Option<Tagged>) -> Result<Tagged, OperadError> {
    match t {
        Tagged::Leaf => Ok(Tagged::Leaf),
        Tagged::Node(g, id, ch) => {
            let ch: Vec<Tagged> = ch
                .into_iter()
                .map(|c| replace_tagged(c, v, repl))
                .collect::<Result<_, _>>()?;
            if id == v && repl.is_some() {
                let r = repl.take().unwrap();
                let r_arity = tagged_arity(&r);
                if r_arity != ch.len() {
                    return Err(OperadError::ArityMismatch {
                        expected: ch.len(),
                        found: r_arity,
                    });
                }
                Ok(graft_leaves(r, &mut ch.into_iter()))
            } else {
                Ok(Tagged::Node(g, id, ch))
            }
        }
    }
}

fn tagged_arity(t: &Tagged) -> usize {
    match t {
        Tagged::Leaf => 1,
        Tagged::Node(_, _, ch) => ch.iter().map(tagged_arity).sum(),
    }
}

// ---------------------------------------------------------------------------

/// A finite rational-linear combination of tree monomials of a fixed arity.
#[derive(Clone, Debug, PartialEq)]
pub struct OperadElement<K: Scalar> {
    arity: usize,
    terms: BTreeMap<Tree, K>,
}

impl<K: Scalar> OperadElement<K> {
    pub fn zero(arity: usize) -> Self {
        OperadElement {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(t: Tree) -> Self {
        Self::term(t, K::one())
    }

    pub fn term(t: Tree, coeff: K) -> Self {
        let mut e = Self::zero(t.arity());
        e.add_term(t, coeff);
        e
    }

    pub fn generator(g: Generator) -> Self {
        Self::monomial(Tree::corolla(g))
    }

    pub fn identity() -> Self {
        Self::monomial(Tree::Leaf)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Tree, &K)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, t: &Tree) -> K {
        self.terms.get(t).cloned().unwrap_or_else(K::zero)
    }

    /// The common degree of all monomials, if the element is homogeneous and
    /// nonzero.
    pub fn degree(&self) -> Option<i64> {
        let mut degs = self.terms.keys().map(Tree::degree);
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    pub fn add_term(&mut self, t: Tree, coeff: K) {
        if coeff.is_zero() {
            return;
        }
        debug_assert_eq!(t.arity(), self.arity, "arity mismatch in operad element");
        match self.terms.entry(t) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + coeff;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Self, k: &K) {
        if k.is_zero() {
            return;
        }
        for (t, c) in &other.terms {
            self.add_term(t.clone(), c.clone() * k.clone());
        }
    }

    pub fn scaled(&self, k: &K) -> Self {
        let mut out = Self::zero(self.arity);
        out.add_scaled(self, k);
        out
    }

    /// Bilinear partial composition `f ∘_i g`.
    pub fn compose_at(&self, i: usize, g: &Self) -> Result<Self, OperadError> {
        if i == 0 || i > self.arity {
            return Err(OperadError::LeafOutOfRange {
                index: i,
                arity: self.arity,
            });
        }
        let mut out = Self::zero(self.arity + g.arity - 1);
        for (tf, cf) in &self.terms {
            for (tg, cg) in &g.terms {
                let (t, odd) = compose_monomials(tf, i, tg)?;
                out.add_term(t, K::sign(odd) * cf.clone() * cg.clone());
            }
        }
        Ok(out)
    }

    /// Brace operation `f{g_1, ..., g_k}`: the signed sum over all ways of
    /// grafting the arguments, in order, into distinct inputs of `f`.
    pub fn brace(&self, args: &[Self]) -> Self {
        let k = args.len();
        if k == 0 {
            return self.clone();
        }
        let new_arity = self.arity + args.iter().map(|a| a.arity).sum::<usize>() - k;
        let mut out = Self::zero(new_arity);
        if k > self.arity {
            return out;
        }
        let positions = increasing_tuples(self.arity, k);
        let arg_terms: Vec<Vec<(&Tree, &K)>> =
            args.iter().map(|a| a.terms.iter().collect()).collect();
        for_each_product(&arg_terms, &mut |choice: &[(&Tree, &K)]| {
            let mut coeff = K::one();
            for (_, c) in choice {
                coeff = coeff * (*c).clone();
            }
            for (tf, cf) in &self.terms {
                for pos in &positions {
                    let inserts: Vec<(usize, &Tree)> =
                        pos.iter().zip(choice).map(|(&p, (t, _))| (p, *t)).collect();
                    let (t, odd) = graft_many(tf, &inserts).expect("positions within arity");
                    out.add_term(t, K::sign(odd) * cf.clone() * coeff.clone());
                }
            }
        });
        out
    }

    /// `(f{g}){h} - f{g{h}} - f{g, h} - (-1)^{|g||h|} f{h, g}`, zero in a
    /// brace algebra. `g` and `h` must be homogeneous.
    pub fn pre_jacobi_residual(f: &Self, g: &Self, h: &Self) -> Result<Self, OperadError> {
        let dg = g.degree().ok_or(OperadError::Inhomogeneous)?;
        let dh = h.degree().ok_or(OperadError::Inhomogeneous)?;
        let lhs = f.brace(std::slice::from_ref(g)).brace(std::slice::from_ref(h));
        let swapped = f.brace(&[h.clone(), g.clone()]);
        let swapped = if (dg * dh) % 2 != 0 { -swapped } else { swapped };
        Ok(lhs - f.brace(&[g.brace(std::slice::from_ref(h))]) - f.brace(&[g.clone(), h.clone()]) - swapped)
    }

    /// Maximal monomial under [`compare_graded_pathlex`], with its coefficient.
    pub fn leading_monomial(&self) -> Result<(Tree, K), OperadError> {
        let mut best: Option<(&Tree, &K)> = None;
        for (t, c) in &self.terms {
            best = match best {
                None => Some((t, c)),
                Some((bt, bc)) => {
                    if compare_graded_pathlex(t, bt)? == Ordering::Greater {
                        Some((t, c))
                    } else {
                        Some((bt, bc))
                    }
                }
            };
        }
        best.map(|(t, c)| (t.clone(), c.clone()))
            .ok_or(OperadError::ZeroElement)
    }
}

impl<K: Scalar> fmt::Display for OperadElement<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (t, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*{}", c, t)?;
        }
        Ok(())
    }
}

impl<K: Scalar> Add for OperadElement<K> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, &K::one());
        self
    }
}

impl<K: Scalar> Sub for OperadElement<K> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.add_scaled(&rhs, &-K::one());
        self
    }
}

impl<K: Scalar> Neg for OperadElement<K> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scaled(&-K::one())
    }
}

/// All strictly increasing `k`-tuples in `1..=n`.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for v in start..=n {
            if n - v + 1 < k - cur.len() {
                break;
            }
            cur.push(v);
            rec(v + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

fn for_each_product<'a, T: Copy>(lists: &[Vec<T>], f: &mut dyn FnMut(&[T])) {
    fn rec<T: Copy>(lists: &[Vec<T>], cur: &mut Vec<T>, f: &mut dyn FnMut(&[T])) {
        if cur.len() == lists.len() {
            f(cur);
            return;
        }
        for &item in &lists[cur.len()] {
            cur.push(item);
            rec(lists, cur, f);
            cur.pop();
        }
    }
    rec(lists, &mut Vec::with_capacity(lists.len()), f);
}

/// Graded path-lexicographic order on tree monomials over the m/R/S alphabet:
/// arity first, then total degree, then path sequences compared
/// lexicographically with words under length-lexicographic order.
pub fn compare_graded_pathlex(a: &Tree, b: &Tree) -> Result<Ordering, OperadError> {
    let word_keys = |t: &Tree| -> Result<Vec<Vec<(usize, u8)>>, OperadError> {
        t.path_sequence()
            .into_iter()
            .map(|w| w.into_iter().map(Generator::alphabet_rank).collect())
            .collect()
    };
    let ka = word_keys(a)?;
    let kb = word_keys(b)?;
    let ord = a
        .arity()
        .cmp(&b.arity())
        .then(a.degree().cmp(&b.degree()))
        .then_with(|| {
            for (wa, wb) in ka.iter().zip(&kb) {
                let o = wa.len().cmp(&wb.len()).then_with(|| wa.cmp(wb));
                if o != Ordering::Equal {
                    return o;
                }
            }
            Ordering::Equal
        });
    Ok(ord)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    type E = OperadElement<Rational>;

    fn q(v: i64) -> Rational {
        Rational::from_int(v)
    }

    fn t(s: &str) -> Tree {
        Tree::parse(s).unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        let src = "m2(R1(1), m2(2, 3))";
        let tree = t(src);
        assert_eq!(tree.to_string(), src);
        assert_eq!(tree.arity(), 3);
        assert_eq!(tree.weight(), 3);
        assert_eq!(tree.degree(), 0);
        assert!(Tree::parse("m2(1, 3)").is_err());
        assert!(Tree::parse("m1(1)").is_err());
        assert!(Tree::parse("m2(1)").is_err());
        assert!(Tree::parse("q2(1, 2)").is_err());
    }

    #[test]
    fn compose_degree_zero() {
        let m2 = E::generator(Generator::m(2));
        let c = m2.compose_at(1, &m2).unwrap();
        assert_eq!(c, E::monomial(t("m2(m2(1, 2), 3)")));
    }

    #[test]
    fn compose_last_in_planar_order() {
        let m2 = E::generator(Generator::m(2));
        let r2 = E::generator(Generator::r(2));
        let c = m2.compose_at(2, &r2).unwrap();
        assert_eq!(c, E::monomial(t("m2(1, R2(2, 3))")));
    }

    #[test]
    fn compose_reorders_odd_vertices() {
        // T = m2 ∘_2 R2; grafting S2 at leaf 1 lists (m2, R2, S2) but the planar
        // order is (m2, S2, R2): one transposition of two degree-1 vertices.
        let m2 = E::generator(Generator::m(2));
        let r2 = E::generator(Generator::r(2));
        let s2 = E::generator(Generator::s(2));
        let tt = m2.compose_at(2, &r2).unwrap();
        let c = tt.compose_at(1, &s2).unwrap();
        assert_eq!(c, E::term(t("m2(S2(1, 2), R2(3, 4))"), q(-1)));
    }

    #[test]
    fn compose_leaf_out_of_range() {
        let m2 = E::generator(Generator::m(2));
        assert_eq!(
            m2.compose_at(3, &m2),
            Err(OperadError::LeafOutOfRange { index: 3, arity: 2 })
        );
    }

    #[test]
    fn brace_edge_cases() {
        let m2 = E::generator(Generator::m(2));
        assert_eq!(m2.brace(&[]), m2);
        let g = E::generator(Generator::x(2));
        assert!(m2.brace(&[g.clone(), g.clone(), g]).is_zero());
    }

    #[test]
    fn brace_x3_x2() {
        // x3{x2} = Σ_i ± x3 ∘_i x2; grafting at input i lists (x3, x2), which is
        // already planar order, so every term has sign +1.
        let x3 = E::generator(Generator::x(3));
        let x2 = E::generator(Generator::x(2));
        let b = x3.brace(&[x2.clone()]);
        let mut expected = E::zero(4);
        for i in 1..=3 {
            expected = expected + x3.compose_at(i, &x2).unwrap();
        }
        assert_eq!(b, expected);
        assert_eq!(b.len(), 3);
        for (_, c) in b.terms() {
            assert_eq!(*c, q(1));
        }
    }

    #[test]
    fn brace_pre_jacobi_instance() {
        // (x_i{x_j}){x_k} = x_i{x_j{x_k}} + x_i{x_j, x_k} - x_i{x_k, x_j} for
        // degree -1 generators, the identity used for ∂²(x_n) = 0.
        for (i, j, k) in [(3, 2, 2), (3, 3, 2), (4, 2, 3), (2, 2, 2)] {
            let xi = E::generator(Generator::x(i));
            let xj = E::generator(Generator::x(j));
            let xk = E::generator(Generator::x(k));
            let lhs = xi.brace(&[xj.clone()]).brace(&[xk.clone()]);
            let rhs = xi.brace(&[xj.brace(&[xk.clone()])]) + xi.brace(&[xj.clone(), xk.clone()])
                - xi.brace(&[xk.clone(), xj.clone()]);
            assert_eq!(lhs, rhs, "pre-Jacobi failed for ({i},{j},{k})");
        }
    }

    #[test]
    fn substitute_matches_naive_for_leading_chain() {
        // replacing the root of R2(1,2) by (R1∘1 m2)∘1 R1 keeps planar order
        let tree = t("R2(1, 2)");
        let repl = t("R1(m2(R1(1), 2))");
        let (out, odd) = substitute_vertex(&tree, 0, &repl).unwrap();
        assert_eq!(out, repl);
        assert!(!odd);
    }

    #[test]
    fn pathlex_examples() {
        assert_eq!(
            compare_graded_pathlex(&t("m3(1, 2, 3)"), &t("m2(1, 2)")).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            compare_graded_pathlex(&t("R2(1, 2)"), &t("m2(1, 2)")).unwrap(),
            Ordering::Greater
        );
        assert_eq!(
            compare_graded_pathlex(&t("S1(1)"), &t("R1(1)")).unwrap(),
            Ordering::Greater
        );
        assert!(compare_graded_pathlex(&t("x2(1, 2)"), &t("m2(1, 2)")).is_err());
    }

    #[test]
    fn leading_of_single_monomial() {
        let e = E::term(t("m2(R1(1), 2)"), q(3));
        assert_eq!(e.leading_monomial().unwrap(), (t("m2(R1(1), 2)"), q(3)));
        assert_eq!(E::zero(2).leading_monomial(), Err(OperadError::ZeroElement));
    }
}
