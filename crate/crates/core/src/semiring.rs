//! Scalar flow semi-rings and square matrices over them.
//!
//! `Mwp` is the four-valued flow lattice `0 < m < w < p`. `MwpInf` adds a top
//! element `∞` whose product with `0` stays `∞`, so it is a semi-ring but not
//! a strong one. `Matrix<S>` is the square-matrix semi-ring over any scalar
//! semi-ring `S`, with entry `(i, j)` holding the flow from variable `i` into
//! variable `j`.

use std::fmt;

use crate::error::MwpError;

/// A (not necessarily strong) semi-ring whose elements can be cloned and
/// compared.
pub trait Semiring: Clone + PartialEq + fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }
}

/// Flow class in the mwp semi-ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mwp {
    Zero,
    M,
    W,
    P,
}

impl Mwp {
    pub const ALL: [Mwp; 4] = [Mwp::Zero, Mwp::M, Mwp::W, Mwp::P];

    pub fn symbol(self) -> char {
        match self {
            Mwp::Zero => '0',
            Mwp::M => 'm',
            Mwp::W => 'w',
            Mwp::P => 'p',
        }
    }
}

impl Semiring for Mwp {
    fn zero() -> Self {
        Mwp::Zero
    }

    fn one() -> Self {
        Mwp::M
    }

    fn add(&self, other: &Self) -> Self {
        (*self).max(*other)
    }

    fn mul(&self, other: &Self) -> Self {
        if *self == Mwp::Zero || *other == Mwp::Zero {
            Mwp::Zero
        } else {
            (*self).max(*other)
        }
    }
}

impl fmt::Display for Mwp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Flow class in mwp extended with `∞` (rendered `i`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MwpInf {
    Finite(Mwp),
    Inf,
}

impl MwpInf {
    pub const ZERO: MwpInf = MwpInf::Finite(Mwp::Zero);
    pub const M: MwpInf = MwpInf::Finite(Mwp::M);
    pub const W: MwpInf = MwpInf::Finite(Mwp::W);
    pub const P: MwpInf = MwpInf::Finite(Mwp::P);
    pub const INF: MwpInf = MwpInf::Inf;

    pub const ALL: [MwpInf; 5] = [Self::ZERO, Self::M, Self::W, Self::P, Self::INF];

    pub fn is_inf(self) -> bool {
        self == MwpInf::Inf
    }

    pub fn finite(self) -> Option<Mwp> {
        match self {
            MwpInf::Finite(v) => Some(v),
            MwpInf::Inf => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            MwpInf::Finite(v) => v.symbol(),
            MwpInf::Inf => 'i',
        }
    }

    pub fn from_symbol(c: char) -> Option<MwpInf> {
        Some(match c {
            '0' => Self::ZERO,
            'm' => Self::M,
            'w' => Self::W,
            'p' => Self::P,
            'i' => Self::INF,
            _ => return None,
        })
    }
}

impl From<Mwp> for MwpInf {
    fn from(v: Mwp) -> Self {
        MwpInf::Finite(v)
    }
}

impl Semiring for MwpInf {
    fn zero() -> Self {
        MwpInf::ZERO
    }

    fn one() -> Self {
        MwpInf::M
    }

    fn add(&self, other: &Self) -> Self {
        (*self).max(*other)
    }

    fn mul(&self, other: &Self) -> Self {
        match (*self, *other) {
            (MwpInf::Inf, _) | (_, MwpInf::Inf) => MwpInf::Inf,
            (MwpInf::Finite(a), MwpInf::Finite(b)) => MwpInf::Finite(a.mul(&b)),
        }
    }
}

impl fmt::Display for MwpInf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Square matrix over a semi-ring, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<S> {
    dim: usize,
    entries: Vec<S>,
}

pub type MwpMatrix = Matrix<MwpInf>;

impl<S: Semiring> Matrix<S> {
    pub fn zero(dim: usize) -> Self {
        Matrix {
            dim,
            entries: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.set(i, i, S::one());
        }
        m
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, MwpError> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(MwpError::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Matrix { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Matrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &S {
        &self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        let dim = self.dim;
        self.entries
            .iter()
            .enumerate()
            .map(move |(k, v)| (k / dim, k % dim, v))
    }

    pub fn column(&self, col: usize) -> Vec<S> {
        (0..self.dim).map(|i| self.get(i, col).clone()).collect()
    }

    /// `self` with column `col` replaced by `vector` (the `M ←j V` operation).
    pub fn with_column(&self, col: usize, vector: &[S]) -> Result<Self, MwpError> {
        if vector.len() != self.dim {
            return Err(MwpError::DimensionMismatch {
                left: self.dim,
                right: vector.len(),
            });
        }
        let mut out = self.clone();
        for (i, v) in vector.iter().enumerate() {
            out.set(i, col, v.clone());
        }
        Ok(out)
    }

    fn check_dim(&self, other: &Self) -> Result<(), MwpError> {
        if self.dim != other.dim {
            return Err(MwpError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, MwpError> {
        self.check_dim(other)?;
        Ok(Matrix {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MwpError> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = Self::zero(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    // Only skip when both sides are zero: `0 × ∞` is not zero.
                    if a.is_zero() && b.is_zero() {
                        continue;
                    }
                    acc = acc.add(&a.mul(b));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `M* = 1 ⊕ M ⊕ M² ⊕ …`, by iterating `S ← S ⊕ S⊗M` from `S = 1 ⊕ M`.
    ///
    /// The iteration stops once `S` no longer changes. Pointwise, walks of
    /// length `2n + 1` already reach every value a longer walk can produce,
    /// so the loop is also capped there for representations (such as choice
    /// polynomials) whose syntax may keep growing after the value is fixed.
    pub fn closure(&self) -> Self {
        let n = self.dim;
        let mut acc = Self::identity(n)
            .add(self)
            .expect("identity has matching dimension");
        let cap = 2 * n + 2;
        for _ in 0..cap {
            let next = acc
                .add(&acc.mul(self).expect("same dimension"))
                .expect("same dimension");
            if next == acc {
                break;
            }
            acc = next;
        }
        acc
    }

    pub fn map<T: Semiring>(&self, f: impl FnMut(&S) -> T) -> Matrix<T> {
        Matrix {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    /// Submatrix on `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), |i, j| {
            self.get(indices[i], indices[j]).clone()
        })
    }
}

impl MwpMatrix {
    pub fn has_inf(&self) -> bool {
        self.entries.iter().any(|v| v.is_inf())
    }

    /// The same matrix over plain mwp, if no entry is `∞`.
    pub fn to_finite(&self) -> Option<Matrix<Mwp>> {
        let entries = self
            .entries
            .iter()
            .map(|v| v.finite())
            .collect::<Option<Vec<_>>>()?;
        Some(Matrix {
            dim: self.dim,
            entries,
        })
    }

    /// Parses the row-major text rendering produced by `Display`.
    pub fn parse(text: &str) -> Result<Self, MwpError> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                line.split_whitespace()
                    .map(|tok| {
                        let mut chars = tok.chars();
                        match (chars.next(), chars.next()) {
                            (Some(c), None) => MwpInf::from_symbol(c),
                            _ => None,
                        }
                        .ok_or_else(|| MwpError::BadScalar(tok.to_string()))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(rows)
    }
}

impl From<&Matrix<Mwp>> for MwpMatrix {
    fn from(m: &Matrix<Mwp>) -> Self {
        m.map(|v| MwpInf::from(*v))
    }
}

impl<S: Semiring + fmt::Display> fmt::Display for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use MwpInf as V;

    fn m(text: &str) -> MwpMatrix {
        MwpMatrix::parse(&text.replace(';', "\n")).unwrap()
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(Mwp::M.add(&Mwp::W), Mwp::W);
        assert_eq!(Mwp::Zero.add(&Mwp::P), Mwp::P);
        assert_eq!(Mwp::W.add(&Mwp::W), Mwp::W);
        assert_eq!(Mwp::M.mul(&Mwp::P), Mwp::P);
        assert_eq!(Mwp::Zero.mul(&Mwp::P), Mwp::Zero);
        assert_eq!(Mwp::M.mul(&Mwp::M), Mwp::M);

        assert_eq!(V::INF.add(&V::M), V::INF);
        assert_eq!(V::ZERO.add(&V::ZERO), V::ZERO);
        assert_eq!(V::W.add(&V::P), V::P);
        assert_eq!(V::ZERO.mul(&V::INF), V::INF);
        assert_eq!(V::ZERO.mul(&V::P), V::ZERO);
        assert_eq!(V::INF.mul(&V::M), V::INF);
    }

    #[test]
    fn order_is_total_with_inf_on_top() {
        let all = MwpInf::ALL;
        for w in all.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(Mwp::ALL.iter().all(|v| MwpInf::from(*v) < V::INF));
    }

    #[test]
    fn matrix_add_examples() {
        let b = m("m p;0 m");
        assert_eq!(MwpMatrix::zero(2).add(&b).unwrap(), b);
        assert_eq!(b.add(&b).unwrap(), b);
        assert_eq!(m("m p;0 m").add(&m("m 0;w m")).unwrap(), m("m p;w m"));
    }

    #[test]
    fn matrix_mul_examples() {
        let b = m("m w;0 p");
        assert_eq!(MwpMatrix::identity(2).mul(&b).unwrap(), b);
        assert_eq!(MwpMatrix::zero(2).mul(&b).unwrap(), MwpMatrix::zero(2));
        let a = m("m m;0 p");
        assert_eq!(a.mul(&a).unwrap(), m("m p;0 p"));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = MwpMatrix::identity(2);
        let b = MwpMatrix::identity(3);
        assert!(matches!(
            a.add(&b),
            Err(MwpError::DimensionMismatch { left: 2, right: 3 })
        ));
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn closure_examples() {
        let id = MwpMatrix::identity(3);
        assert_eq!(id.closure(), id);

        let body = m("m p 0;0 m 0;0 0 m");
        assert_eq!(body.closure(), body);

        let c = m("m m 0;0 p 0;0 0 m").closure();
        assert_eq!(*c.get(0, 1), V::P);
        assert_eq!(*c.get(1, 1), V::P);
    }

    #[test]
    fn inf_spreads_through_zero_factors() {
        let mut a = MwpMatrix::identity(3);
        a.set(1, 1, V::INF);
        let prod = a.mul(&MwpMatrix::identity(3)).unwrap();
        assert_eq!(*prod.get(1, 1), V::INF);
        // Row 1 of `a` carries ∞, and 0 × ∞ = ∞.
        assert_eq!(*prod.get(1, 0), V::INF);
        assert_eq!(*prod.get(0, 0), V::M);
    }

    #[test]
    fn render_and_parse() {
        let a = m("m i 0;w p m;0 0 m");
        assert_eq!(a.to_string(), "m i 0\nw p m\n0 0 m\n");
        assert_eq!(MwpMatrix::parse(&a.to_string()).unwrap(), a);
        assert!(MwpMatrix::parse("m x").is_err());
    }
}
