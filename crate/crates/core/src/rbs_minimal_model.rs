//! Differentials of the two free resolutions of Rota-Baxter systems: the one
//! on generators `m_n, R_n, S_n` and the brace presentation on `x_n, y_n, z_n`,
//! their extension to derivations of the free operad, and the `∂² = 0` check.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::signs::{compositions, Scalar};
use crate::tree_operad::{substitute_vertex, Family, Generator, OperadElement, Tree};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiffError {
    #[error("no differential is defined on {0}")]
    Unsupported(String),
}

/// Which generating family a differential acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Presentation {
    /// `m_n` (n ≥ 2), `R_n`, `S_n` (n ≥ 1).
    Mrs,
    /// `x_n` (n ≥ 2), `y_n`, `z_n` (n ≥ 1) with brace differentials.
    Xyz,
}

impl std::str::FromStr for Presentation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mrs" => Ok(Presentation::Mrs),
            "xyz" => Ok(Presentation::Xyz),
            other => Err(format!("unknown presentation {other:?}; expected mrs or xyz")),
        }
    }
}

/// Sign exponents of the defining differentials and of the homotopy
/// Rota-Baxter identities. Compositions are passed 1-indexed as slices:
/// `l[0] = l_1`, `r[0] = r_1`. Only parities matter downstream.
pub struct SignExponents;

impl SignExponents {
    /// `α = 1 + Σ_j (k - j)(l_j - 1)`.
    pub fn alpha(l: &[usize]) -> i64 {
        let k = l.len() as i64;
        1 + l
            .iter()
            .enumerate()
            .map(|(idx, &lj)| (k - (idx as i64 + 1)) * (lj as i64 - 1))
            .sum::<i64>()
    }

    /// `β = 1 + i + (p + Σ_{j≥2}(r_j - 1))(r_1 - i) + Σ_{k=2}^{j}(r_k - 1)
    ///  + Σ_{k=2}^{p}(r_k - 1)(p - k)`.
    pub fn beta(p: usize, j: usize, i: usize, r: &[usize]) -> i64 {
        let (p, j, i) = (p as i64, j as i64, i as i64);
        let rr = |k: i64| r[(k - 1) as usize] as i64;
        let tail: i64 = (2..=p).map(|k| rr(k) - 1).sum();
        let upto_j: i64 = (2..=j).map(|k| rr(k) - 1).sum();
        let weighted: i64 = (2..=p).map(|k| (rr(k) - 1) * (p - k)).sum();
        1 + i + (p + tail) * (rr(1) - i) + upto_j + weighted
    }

    /// The well-defined part of the cooperad sign exponent on the shapes with
    /// an `R`/`S` root: `p - 1 + (Σ_{k≥2} r_k)(r_1 - i) + Σ_{k=2}^{j}(r_k - 1)
    /// + Σ_{k=2}^{p}(r_k - 1)(p - k)`. Its leading sum `Σ_j (q - k) r_k` has
    /// unbound indices, so this value is kept as data and never used as a sign.
    pub fn gamma_bound_part(p: usize, j: usize, i: usize, r: &[usize]) -> i64 {
        let (p, j, i) = (p as i64, j as i64, i as i64);
        let rr = |k: i64| r[(k - 1) as usize] as i64;
        let tail: i64 = (2..=p).map(rr).sum();
        let upto_j: i64 = (2..=j).map(|k| rr(k) - 1).sum();
        let weighted: i64 = (2..=p).map(|k| (rr(k) - 1) * (p - k)).sum();
        p - 1 + tail * (rr(1) - i) + upto_j + weighted
    }

    /// `δ = k(k-1)/2 + Σ_j (k - j) l_j`.
    pub fn delta(l: &[usize]) -> i64 {
        let k = l.len() as i64;
        k * (k - 1) / 2
            + l.iter()
                .enumerate()
                .map(|(idx, &lj)| (k - (idx as i64 + 1)) * lj as i64)
                .sum::<i64>()
    }

    /// `η = i + (p + Σ_{j≥2}(r_j - 1))k + Σ_{t=2}^{j}(r_t - 1) + Σ_{t=2}^{p}(r_t - 1)(p - t)`
    /// where `i + 1 + k = r_1` counts the identities around the inserted block.
    pub fn eta(p: usize, j: usize, i: usize, k: usize, r: &[usize]) -> i64 {
        let (p, j, i, k) = (p as i64, j as i64, i as i64, k as i64);
        let rr = |t: i64| r[(t - 1) as usize] as i64;
        let tail: i64 = (2..=p).map(|t| rr(t) - 1).sum();
        let upto_j: i64 = (2..=j).map(|t| rr(t) - 1).sum();
        let weighted: i64 = (2..=p).map(|t| (rr(t) - 1) * (p - t)).sum();
        i + (p + tail) * k + upto_j + weighted
    }
}

fn parity(e: i64) -> bool {
    e.rem_euclid(2) == 1
}

fn gen_el<K: Scalar>(g: Generator) -> OperadElement<K> {
    OperadElement::generator(g)
}

/// Graft `children` one after another at the positions given by the left-to-right
/// nesting: child `t` lands on the first leaf after the leaves already used,
/// skipping one further leaf wherever `skip_before[t]` is set.
fn nested_graft<K: Scalar>(
    root: OperadElement<K>,
    children: &[(OperadElement<K>, bool)],
) -> OperadElement<K> {
    let mut acc = root;
    let mut pos = 1;
    for (child, skip_before) in children {
        if *skip_before {
            pos += 1;
        }
        acc = acc
            .compose_at(pos, child)
            .expect("nested graft stays within arity");
        pos += child.arity();
    }
    acc
}

fn mrs_diff<K: Scalar>(g: &Generator) -> Result<OperadElement<K>, DiffError> {
    let n = g.arity;
    let mut out = OperadElement::zero(n);
    match g.family {
        Family::M => {
            for j in 2..n {
                for i in 1..=n - j + 1 {
                    let sign = parity(i as i64 + (j * (n - i)) as i64);
                    let term = gen_el::<K>(Generator::m(n - j + 1))
                        .compose_at(i, &gen_el(Generator::m(j)))
                        .expect("index in range");
                    out.add_scaled(&term, &K::sign(sign));
                }
            }
        }
        Family::R | Family::S => {
            let own = |a: usize| {
                if g.family == Family::R {
                    Generator::r(a)
                } else {
                    Generator::s(a)
                }
            };
            for k in 2..=n {
                for l in compositions(n, k) {
                    let children: Vec<_> =
                        l.iter().map(|&a| (gen_el::<K>(own(a)), false)).collect();
                    let term = nested_graft(gen_el(Generator::m(k)), &children);
                    out.add_scaled(&term, &K::sign(parity(SignExponents::alpha(&l))));
                }
            }
            for p in 2..=n {
                for r in compositions(n, p) {
                    for j in 1..=p {
                        // slots 1..j-1 carry R_{r_2..r_j}, slot j the identity,
                        // slots j+1..p carry S_{r_{j+1}..r_p}
                        let mut children = Vec::with_capacity(p - 1);
                        for t in 2..=j {
                            children.push((gen_el::<K>(Generator::r(r[t - 1])), false));
                        }
                        for t in j + 1..=p {
                            children.push((gen_el::<K>(Generator::s(r[t - 1])), t == j + 1));
                        }
                        let inner = nested_graft(gen_el(Generator::m(p)), &children);
                        for i in 1..=r[0] {
                            let term = gen_el::<K>(own(r[0]))
                                .compose_at(i, &inner)
                                .expect("index in range");
                            let sign = parity(SignExponents::beta(p, j, i, &r));
                            out.add_scaled(&term, &K::sign(sign));
                        }
                    }
                }
            }
        }
        _ => return Err(DiffError::Unsupported(g.to_string())),
    }
    Ok(out)
}

/// The unary generator `x_1` of degree -1. It is not part of the minimal
/// model; it carries the differential component of a convolution element.
pub(crate) fn x1() -> Generator {
    Generator {
        family: Family::X,
        arity: 1,
        degree: -1,
    }
}

/// Brace differential on `x, y, z`. With `unary` set, the generator `x_1` is
/// admitted and all index ranges start at 1, so `∂` also records the terms
/// coming from a differential on the target.
pub(crate) fn xyz_diff<K: Scalar>(
    g: &Generator,
    unary: bool,
) -> Result<OperadElement<K>, DiffError> {
    let n = g.arity;
    let lo = if unary { 1 } else { 2 };
    let x = |a: usize| -> OperadElement<K> {
        if a == 1 {
            gen_el(x1())
        } else {
            gen_el(Generator::x(a))
        }
    };
    let mut out = OperadElement::zero(n);
    match g.family {
        Family::X => {
            if n == 1 && !unary {
                return Err(DiffError::Unsupported(g.to_string()));
            }
            let hi = if unary { n } else { n - 1 };
            for j in lo..=hi {
                let term = x(n - j + 1).brace(&[x(j)]);
                out.add_scaled(&term, &-K::one());
            }
        }
        Family::Y | Family::Z => {
            let own = |a: usize| -> OperadElement<K> {
                if g.family == Family::Y {
                    gen_el(Generator::y(a))
                } else {
                    gen_el(Generator::z(a))
                }
            };
            for k in lo..=n {
                for r in compositions(n, k) {
                    let args: Vec<_> = r.iter().map(|&a| own(a)).collect();
                    out.add_scaled(&x(k).brace(&args), &-K::one());
                }
            }
            for p in lo..=n {
                for r in compositions(n, p) {
                    for j in 1..=p {
                        let mut args = Vec::with_capacity(p);
                        for t in 2..=j {
                            args.push(gen_el::<K>(Generator::y(r[t - 1])));
                        }
                        args.push(OperadElement::identity());
                        for t in j + 1..=p {
                            args.push(gen_el::<K>(Generator::z(r[t - 1])));
                        }
                        let inner = x(p).brace(&args);
                        out.add_scaled(&own(r[0]).brace(&[inner]), &K::one());
                    }
                }
            }
        }
        _ => return Err(DiffError::Unsupported(g.to_string())),
    }
    Ok(out)
}

/// Differential of a single builtin generator.
pub fn diff_generator<K: Scalar>(g: &Generator) -> Result<OperadElement<K>, DiffError> {
    match g.family {
        Family::M | Family::R | Family::S => mrs_diff(g),
        Family::X | Family::Y | Family::Z => xyz_diff(g, false),
        Family::Custom(_) => Err(DiffError::Unsupported(g.to_string())),
    }
}

/// Extend a differential given on generators to a derivation of the free
/// operad: each vertex `v` is replaced by its differential with the sign
/// `(-1)^(degrees of the vertices before v in planar order)`.
pub fn extend_derivation<K, F>(
    diff: F,
    e: &OperadElement<K>,
) -> Result<OperadElement<K>, DiffError>
where
    K: Scalar,
    F: Fn(&Generator) -> Result<OperadElement<K>, DiffError>,
{
    let mut cache: HashMap<Generator, OperadElement<K>> = HashMap::new();
    let mut out = OperadElement::zero(e.arity());
    for (t, c) in e.terms() {
        let mut prefix = 0i64;
        for (v, g) in t.vertices().into_iter().enumerate() {
            if !cache.contains_key(g) {
                cache.insert(g.clone(), diff(g)?);
            }
            let dg = &cache[g];
            let outer = K::sign(parity(prefix)) * c.clone();
            for (rt, rc) in dg.terms() {
                let (nt, odd) = substitute_vertex(t, v, rt).expect("vertex and arity match");
                out.add_term(nt, K::sign(odd) * outer.clone() * rc.clone());
            }
            prefix += g.degree;
        }
    }
    Ok(out)
}

/// Memoizing differential for repeated derivation extensions.
pub struct CachedDiff<K: Scalar> {
    presentation: Presentation,
    cache: Mutex<HashMap<Generator, OperadElement<K>>>,
}

impl<K: Scalar> CachedDiff<K> {
    pub fn new(presentation: Presentation) -> Self {
        CachedDiff {
            presentation,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn on_generator(&self, g: &Generator) -> Result<OperadElement<K>, DiffError> {
        if let Some(d) = self.cache.lock().unwrap().get(g) {
            return Ok(d.clone());
        }
        let d = match (self.presentation, &g.family) {
            (Presentation::Mrs, Family::M | Family::R | Family::S)
            | (Presentation::Xyz, Family::X | Family::Y | Family::Z) => diff_generator(g)?,
            _ => return Err(DiffError::Unsupported(g.to_string())),
        };
        self.cache.lock().unwrap().insert(g.clone(), d.clone());
        Ok(d)
    }

    pub fn apply(&self, e: &OperadElement<K>) -> Result<OperadElement<K>, DiffError> {
        extend_derivation(|g| self.on_generator(g), e)
    }
}

/// All builtin generators of a presentation with arity at most `max_arity`.
pub fn generators(presentation: Presentation, max_arity: usize) -> Vec<Generator> {
    let (a, b, c) = match presentation {
        Presentation::Mrs => (Family::M, Family::R, Family::S),
        Presentation::Xyz => (Family::X, Family::Y, Family::Z),
    };
    let mut out = Vec::new();
    for n in 1..=max_arity {
        if n >= 2 {
            out.push(Generator::builtin(a.clone(), n).unwrap());
        }
        out.push(Generator::builtin(b.clone(), n).unwrap());
        out.push(Generator::builtin(c.clone(), n).unwrap());
    }
    out
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ResidualTerm {
    pub tree: String,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DSquaredEntry {
    pub generator: String,
    pub arity: usize,
    pub residual_terms: Vec<ResidualTerm>,
    pub ok: bool,
}

pub fn residual_terms<K: Scalar>(e: &OperadElement<K>) -> Vec<ResidualTerm> {
    e.terms()
        .map(|(t, c)| ResidualTerm {
            tree: t.to_string(),
            coeff: c.to_string(),
        })
        .collect()
}

/// Compute `∂(∂g)` for every generator up to `max_arity`, in parallel.
pub fn check_d_squared<K: Scalar>(
    presentation: Presentation,
    max_arity: usize,
) -> Vec<DSquaredEntry> {
    let diff = CachedDiff::<K>::new(presentation);
    generators(presentation, max_arity)
        .par_iter()
        .map(|g| {
            let d = diff.on_generator(g).expect("builtin generator");
            let dd = diff.apply(&d).expect("builtin labels only");
            DSquaredEntry {
                generator: g.to_string(),
                arity: g.arity,
                residual_terms: residual_terms(&dd),
                ok: dd.is_zero(),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct PreJacobiEntry {
    pub triple: [String; 3],
    pub residual_terms: Vec<ResidualTerm>,
    pub ok: bool,
}

/// Pre-Jacobi identity of the brace operations on every ordered triple of
/// `x/y/z` generators with arity at most `max_arity`.
pub fn check_pre_jacobi<K: Scalar>(max_arity: usize) -> Vec<PreJacobiEntry> {
    let gens = generators(Presentation::Xyz, max_arity);
    let mut triples = Vec::new();
    for f in &gens {
        for g in &gens {
            for h in &gens {
                triples.push((f, g, h));
            }
        }
    }
    triples
        .par_iter()
        .map(|&(f, g, h)| {
            let el = |x: &Generator| OperadElement::<K>::generator(x.clone());
            let res = OperadElement::pre_jacobi_residual(&el(f), &el(g), &el(h))
                .expect("generators are homogeneous");
            PreJacobiEntry {
                triple: [f.to_string(), g.to_string(), h.to_string()],
                residual_terms: residual_terms(&res),
                ok: res.is_zero(),
            }
        })
        .collect()
}

/// `∂` evaluated on a single tree monomial.
pub fn diff_tree<K: Scalar>(
    presentation: Presentation,
    t: &Tree,
) -> Result<OperadElement<K>, DiffError> {
    CachedDiff::new(presentation).apply(&OperadElement::monomial(t.clone()))
}
