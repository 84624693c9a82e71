//! Finite-dimensional complex Banach spaces described as norm trees.
//!
//! A tree is built from `ℓ_p` leaves and `⊕_p` direct sums. Coordinates are
//! flattened depth-first, so a vector on `sum2(l1(2),l1(3))` has five entries:
//! the first two belong to the left leaf and the last three to the right one.
//!
//! Trees have a compact textual form used by the CLI and JSON reports:
//! `l1(2)`, `l2(3)`, `linf(4)`, `l1.5(2)`, `sum2(l1(2),l1(2))`, `suminf(l2(1),l2(1))`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Complex column vector; its length is the total dimension of a [`NormTree`].
pub type CVector = DVector<Complex64>;

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf { dim: usize, p: f64 },
    Sum { children: Vec<NormTree>, p: f64 },
}

/// Recursive descriptor of a finite-dimensional complex Banach space.
#[derive(Clone, Debug, PartialEq)]
pub struct NormTree {
    node: Node,
    dim: usize,
}

/// Exponent class of a tree once it is flattened.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Uniformity {
    /// One-dimensional: every `ℓ_p` norm coincides with `|·|`.
    Any,
    Exactly(f64),
    Mixed,
}

fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// Conjugate exponent `q` with `1/p + 1/q = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `ℓ_p` norm of a list of nonnegative reals.
fn lp_of(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else if p == 1.0 {
        values.sum()
    } else if p == 2.0 {
        // scaled to avoid overflow/underflow for extreme magnitudes
        let v: Vec<f64> = values.collect();
        let scale = v.iter().cloned().fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        scale * v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>().sqrt()
    } else {
        let v: Vec<f64> = values.collect();
        let scale = v.iter().cloned().fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        scale * v.iter().map(|x| (x / scale).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Norming weights of a nonnegative real vector in `ℓ_p`: `w ≥ 0` with
/// `‖w‖_q ≤ 1` and `Σ wᵢ vᵢ = ‖v‖_p`.
fn lp_norming_weights(values: &[f64], p: f64) -> Vec<f64> {
    let n = lp_of(values.iter().cloned(), p);
    if n == 0.0 {
        return vec![0.0; values.len()];
    }
    if p == 1.0 {
        values.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect()
    } else if p.is_infinite() {
        let k = argmax(values);
        let mut w = vec![0.0; values.len()];
        w[k] = 1.0;
        w
    } else {
        values.iter().map(|&v| (v / n).powf(p - 1.0)).collect()
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn unit_phase(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / r
    }
}

impl NormTree {
    /// `ℓ_p^dim`.
    pub fn leaf(dim: usize, p: f64) -> Result<Self> {
        check_p(p)?;
        if dim == 0 {
            return Err(Error::EmptySpace);
        }
        Ok(Self { node: Node::Leaf { dim, p }, dim })
    }

    /// `children[0] ⊕_p children[1] ⊕_p …`.
    pub fn sum(children: Vec<NormTree>, p: f64) -> Result<Self> {
        check_p(p)?;
        if children.is_empty() {
            return Err(Error::EmptySpace);
        }
        let dim = children.iter().map(|c| c.dim).sum();
        Ok(Self { node: Node::Sum { children, p }, dim })
    }

    /// `inner ⊕_p inner ⊕_p … ⊕_p inner` with `copies` summands.
    pub fn power(inner: &NormTree, copies: usize, p: f64) -> Result<Self> {
        Self::sum(vec![inner.clone(); copies], p)
    }

    pub fn total_dimension(&self) -> usize {
        self.dim
    }

    /// Exponent at the root node.
    pub fn p(&self) -> f64 {
        match &self.node {
            Node::Leaf { p, .. } | Node::Sum { p, .. } => *p,
        }
    }

    /// Children of a sum node; empty for a leaf.
    pub fn children(&self) -> &[NormTree] {
        match &self.node {
            Node::Leaf { .. } => &[],
            Node::Sum { children, .. } => children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.node, Node::Leaf { .. })
    }

    fn uniformity(&self) -> Uniformity {
        if self.dim == 1 {
            return Uniformity::Any;
        }
        match &self.node {
            Node::Leaf { p, .. } => Uniformity::Exactly(*p),
            Node::Sum { children, p } => {
                // a single summand is isometric to itself whatever the outer p
                let mut acc = if children.len() == 1 {
                    Uniformity::Any
                } else {
                    Uniformity::Exactly(*p)
                };
                for c in children {
                    acc = match (acc, c.uniformity()) {
                        (Uniformity::Mixed, _) | (_, Uniformity::Mixed) => Uniformity::Mixed,
                        (Uniformity::Any, u) | (u, Uniformity::Any) => u,
                        (Uniformity::Exactly(a), Uniformity::Exactly(b)) => {
                            if a == b {
                                Uniformity::Exactly(a)
                            } else {
                                Uniformity::Mixed
                            }
                        }
                    };
                }
                acc
            }
        }
    }

    /// If the flattened space is isometric to `ℓ_p^n` through the identity
    /// map on coordinates, returns that `p`. One-dimensional spaces report `2`.
    pub fn uniform_p(&self) -> Option<f64> {
        match self.uniformity() {
            Uniformity::Any => Some(2.0),
            Uniformity::Exactly(p) => Some(p),
            Uniformity::Mixed => None,
        }
    }

    /// True when the flattened space is `ℓ_p^n` for the given `p`.
    pub fn is_uniform(&self, p: f64) -> bool {
        match self.uniformity() {
            Uniformity::Any => true,
            Uniformity::Exactly(q) => q == p,
            Uniformity::Mixed => false,
        }
    }

    /// All nodes carry `p = 2` (up to one-dimensional leaves): the space is Euclidean.
    pub fn is_euclidean(&self) -> bool {
        self.is_uniform(2.0)
    }

    /// Dual space: every exponent replaced by its conjugate.
    pub fn dual(&self) -> NormTree {
        let node = match &self.node {
            Node::Leaf { dim, p } => Node::Leaf { dim: *dim, p: conjugate_exponent(*p) },
            Node::Sum { children, p } => Node::Sum {
                children: children.iter().map(|c| c.dual()).collect(),
                p: conjugate_exponent(*p),
            },
        };
        NormTree { node, dim: self.dim }
    }

    /// Vector norm; rejects length mismatches and non-finite entries.
    pub fn norm(&self, v: &[Complex64]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: v.len() });
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(self.norm_unchecked(v))
    }

    /// Vector norm without validation; the slice must have `total_dimension` entries.
    pub fn norm_unchecked(&self, v: &[Complex64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        match &self.node {
            Node::Leaf { p, .. } => lp_of(v.iter().map(|z| z.norm()), *p),
            Node::Sum { children, p } => {
                let mut offset = 0;
                let norms = children.iter().map(|c| {
                    let n = c.norm_unchecked(&v[offset..offset + c.dim]);
                    offset += c.dim;
                    n
                });
                lp_of(norms, *p)
            }
        }
    }

    /// A norming functional `g` of `v`: dual norm of `g` is at most one and
    /// `Re Σ conj(gᵢ) vᵢ = ‖v‖`. Returns zeros for `v = 0`.
    pub fn norming_functional(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.norming_into(v, &mut out);
        out
    }

    fn norming_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        match &self.node {
            Node::Leaf { p, .. } => {
                let mags: Vec<f64> = v.iter().map(|z| z.norm()).collect();
                let w = lp_norming_weights(&mags, *p);
                for i in 0..v.len() {
                    out[i] = unit_phase(v[i]) * w[i];
                }
            }
            Node::Sum { children, p } => {
                let mut child_norms = Vec::with_capacity(children.len());
                let mut offset = 0;
                for c in children {
                    child_norms.push(c.norm_unchecked(&v[offset..offset + c.dim]));
                    offset += c.dim;
                }
                let w = lp_norming_weights(&child_norms, *p);
                let mut offset = 0;
                for (c, wk) in children.iter().zip(w) {
                    let slot = &mut out[offset..offset + c.dim];
                    if wk > 0.0 {
                        c.norming_into(&v[offset..offset + c.dim], slot);
                        for s in slot.iter_mut() {
                            *s *= wk;
                        }
                    }
                    offset += c.dim;
                }
            }
        }
    }

    /// Unit vector `x` maximizing `Re Σ conj(zᵢ) xᵢ`; the maximum is the dual norm of `z`.
    pub fn dual_maximizer(&self, z: &[Complex64]) -> Vec<Complex64> {
        let x = self.dual().norming_functional(z);
        let n = self.norm_unchecked(&x);
        if n == 0.0 {
            let mut e = vec![Complex64::new(0.0, 0.0); self.dim];
            e[0] = Complex64::new(self.norm_unchecked(&basis(self.dim, 0)).recip(), 0.0);
            return e;
        }
        x.into_iter().map(|c| c / n).collect()
    }

    /// Scales `v` onto the unit sphere; `None` for the zero vector.
    pub fn normalize(&self, v: &[Complex64]) -> Option<Vec<Complex64>> {
        let n = self.norm_unchecked(v);
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        Some(v.iter().map(|z| z / n).collect())
    }

    /// Offsets of the root's children in the flattened coordinates.
    pub fn child_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::new();
        let mut acc = 0;
        for c in self.children() {
            offsets.push(acc);
            acc += c.dim;
        }
        offsets
    }
}

/// `count` points on the unit sphere of `space`, obtained by normalizing
/// complex Gaussian samples. Deterministic in `seed`.
pub fn sample_unit_sphere(space: &NormTree, count: usize, seed: u64) -> Result<Vec<CVector>> {
    if space.total_dimension() == 0 {
        return Err(Error::EmptySpace);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| random_unit_vector(space, &mut rng)).collect())
}

/// One normalized complex Gaussian sample drawn from `rng`.
pub fn random_unit_vector<R: rand::Rng>(space: &NormTree, rng: &mut R) -> CVector {
    loop {
        let v: Vec<Complex64> = (0..space.total_dimension())
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect();
        if let Some(u) = space.normalize(&v) {
            return CVector::from_vec(u);
        }
    }
}

/// Vector norm as a free function over a [`CVector`].
pub fn vector_norm(space: &NormTree, v: &CVector) -> Result<f64> {
    space.norm(v.as_slice())
}

/// Standard basis vector `e_k` of `ℂ^n`.
pub fn basis(n: usize, k: usize) -> Vec<Complex64> {
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[k] = Complex64::new(1.0, 0.0);
    e
}

/// Signed and phased basis pairs `(e_i, ω e_j)`, `ω ∈ {1, -1, i, -i}`, with `i ≤ j`.
pub fn basis_pairs(n: usize) -> Vec<(CVector, CVector)> {
    let phases = [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ];
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            for w in phases {
                let x = CVector::from_vec(basis(n, i));
                let y = CVector::from_vec(basis(n, j)) * w;
                out.push((x, y));
            }
        }
    }
    out
}

fn fmt_p(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_string()
    } else {
        format!("{p}")
    }
}

impl fmt::Display for NormTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.node {
            Node::Leaf { dim, p } => write!(f, "l{}({})", fmt_p(*p), dim),
            Node::Sum { children, p } => {
                write!(f, "sum{}(", fmt_p(*p))?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn exponent(&mut self) -> Result<f64> {
        if self.eat("inf") {
            return Ok(f64::INFINITY);
        }
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        match self.src[start..self.pos].parse::<f64>() {
            Ok(p) => Ok(p),
            Err(_) => self.err("expected exponent"),
        }
    }

    fn tree(&mut self) -> Result<NormTree> {
        self.skip_ws();
        let at = self.pos;
        if self.eat("sum") {
            let p = self.exponent()?;
            self.expect("(")?;
            let mut children = vec![self.tree()?];
            while self.eat(",") {
                children.push(self.tree()?);
            }
            self.expect(")")?;
            NormTree::sum(children, p).map_err(|e| Error::Parse { pos: at, msg: e.to_string() })
        } else if self.eat("l") {
            let p = self.exponent()?;
            self.expect("(")?;
            self.skip_ws();
            let start = self.pos;
            while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let dim: usize = match self.src[start..self.pos].parse() {
                Ok(d) => d,
                Err(_) => return self.err("expected dimension"),
            };
            self.expect(")")?;
            NormTree::leaf(dim, p).map_err(|e| Error::Parse { pos: at, msg: e.to_string() })
        } else {
            self.err("expected `l<p>(<dim>)` or `sum<p>(...)`")
        }
    }
}

impl FromStr for NormTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parser = Parser { src: s, pos: 0 };
        let tree = parser.tree()?;
        parser.skip_ws();
        if parser.pos != s.len() {
            return parser.err("trailing input");
        }
        Ok(tree)
    }
}

impl Serialize for NormTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NormTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
