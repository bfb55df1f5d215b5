//! Functions from choice assignments to mwp∞, written as polynomials over
//! the indicator generators `δ(i,j)`.
//!
//! `δ(i,j)` is worth `m` on every assignment whose `j`-th pick is `i` and `0`
//! elsewhere. A monomial `α.δ(i1,j1).δ(i2,j2)` therefore denotes a cylinder
//! set of assignments carrying the scalar `α`, and a polynomial is the
//! pointwise maximum of its monomials.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use crate::error::MwpError;
use crate::semiring::{Matrix, MwpInf, MwpMatrix, Semiring};

/// Domain sizes of the choice points, indexed from 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Registry {
    cardinalities: Vec<u32>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cardinalities(cardinalities: Vec<u32>) -> Self {
        assert!(
            cardinalities.iter().all(|&c| c >= 1),
            "choice domains are never empty"
        );
        Registry { cardinalities }
    }

    /// Registers a new choice point and returns its index.
    pub fn allocate(&mut self, cardinality: u32) -> usize {
        assert!(cardinality >= 1, "choice domains are never empty");
        self.cardinalities.push(cardinality);
        self.cardinalities.len() - 1
    }

    pub fn len(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinalities.is_empty()
    }

    pub fn cardinality(&self, index: usize) -> u32 {
        self.cardinalities[index]
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    /// Number of assignments, saturating at `u128::MAX`.
    pub fn assignment_count(&self) -> u128 {
        self.cardinalities
            .iter()
            .try_fold(1u128, |acc, &c| acc.checked_mul(c as u128))
            .unwrap_or(u128::MAX)
    }

    /// All assignments in lexicographic order.
    pub fn assignments(&self) -> Assignments {
        Assignments {
            cardinalities: self.cardinalities.clone(),
            next: Some(vec![0; self.cardinalities.len()]),
        }
    }

    pub fn validate(&self, assignment: &Assignment) -> Result<(), MwpError> {
        if assignment.len() != self.len() {
            return Err(MwpError::AssignmentLength {
                expected: self.len(),
                got: assignment.len(),
            });
        }
        for (index, (&value, &cardinality)) in assignment
            .values()
            .iter()
            .zip(&self.cardinalities)
            .enumerate()
        {
            if value >= cardinality {
                return Err(MwpError::AssignmentRange {
                    index,
                    value,
                    cardinality,
                });
            }
        }
        Ok(())
    }

    pub fn admits(&self, delta: Delta) -> bool {
        (delta.index as usize) < self.len() && delta.value < self.cardinality(delta.index as usize)
    }
}

/// Lexicographic odometer over a registry.
pub struct Assignments {
    cardinalities: Vec<u32>,
    next: Option<Vec<u32>>,
}

impl Iterator for Assignments {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.cardinalities[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(Assignment(current))
    }
}

/// One pick per choice point.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Assignment(pub Vec<u32>);

impl Assignment {
    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<u32> {
        self.0.get(index).copied()
    }

    pub fn satisfies(&self, deltas: &[Delta]) -> Result<bool, MwpError> {
        for d in deltas {
            match self.get(d.index as usize) {
                None => return Err(MwpError::MissingIndex(d.index as usize)),
                Some(v) if v != d.value => return Ok(false),
                Some(_) => {}
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// `δ(value, index)`: pick `value` at choice point `index`.
///
/// Field order gives the derived ordering `(index, value)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Delta {
    pub index: u32,
    pub value: u32,
}

impl Delta {
    pub fn new(value: u32, index: u32) -> Self {
        Delta { index, value }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "δ({},{})", self.value, self.index)
    }
}

/// Merges two delta lists sorted by index; `None` when they pick different
/// values at the same index.
pub fn merge_deltas(a: &[Delta], b: &[Delta]) -> Option<Vec<Delta>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].index.cmp(&b[j].index) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                if a[i].value != b[j].value {
                    return None;
                }
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some(out)
}

/// Whether every delta of `small` occurs in `big` (both sorted by index).
pub fn is_sub_list(small: &[Delta], big: &[Delta]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut j = 0;
    for d in small {
        while j < big.len() && big[j].index < d.index {
            j += 1;
        }
        if j == big.len() || big[j] != *d {
            return false;
        }
        j += 1;
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub scalar: MwpInf,
    deltas: Vec<Delta>,
}

impl Monomial {
    /// Builds a monomial; deltas are sorted, and contradictory picks at the
    /// same index yield `None` (the empty cylinder).
    pub fn new(scalar: MwpInf, deltas: impl IntoIterator<Item = Delta>) -> Option<Self> {
        let mut deltas: Vec<Delta> = deltas.into_iter().collect();
        deltas.sort();
        deltas.dedup();
        if deltas.windows(2).any(|w| w[0].index == w[1].index) {
            return None;
        }
        Some(Monomial { scalar, deltas })
    }

    pub fn scalar(scalar: MwpInf) -> Self {
        Monomial {
            scalar,
            deltas: Vec::new(),
        }
    }

    pub fn deltas(&self) -> &[Delta] {
        &self.deltas
    }

    /// Product of two monomials, `None` for zero.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        let scalar = self.scalar.mul(&other.scalar);
        if scalar == MwpInf::ZERO {
            return None;
        }
        let deltas = merge_deltas(&self.deltas, &other.deltas)?;
        Some(Monomial { scalar, deltas })
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<MwpInf, MwpError> {
        Ok(if assignment.satisfies(&self.deltas)? {
            self.scalar
        } else {
            MwpInf::ZERO
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: delta lists lexicographically by `(index, value)`, a
/// prefix before its extensions; scalar breaks ties.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.deltas
            .cmp(&other.deltas)
            .then(self.scalar.cmp(&other.scalar))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scalar)?;
        for d in &self.deltas {
            write!(f, ".{d}")?;
        }
        Ok(())
    }
}

/// Delta lists keyed by their sorted deltas, answering "is some stored
/// sub-list at least this large".
#[derive(Default)]
struct SubsetTrie {
    nodes: Vec<TrieNode>,
}

#[derive(Default)]
struct TrieNode {
    children: Vec<(Delta, usize)>,
    here: Option<MwpInf>,
    /// Largest scalar stored at or below this node.
    best: Option<MwpInf>,
}

impl SubsetTrie {
    fn insert(&mut self, deltas: &[Delta], scalar: MwpInf) {
        if self.nodes.is_empty() {
            self.nodes.push(TrieNode::default());
        }
        let mut at = 0;
        for d in deltas {
            self.nodes[at].best = self.nodes[at].best.max(Some(scalar));
            at = match self.nodes[at].children.binary_search_by(|c| c.0.cmp(d)) {
                Ok(k) => self.nodes[at].children[k].1,
                Err(k) => {
                    let id = self.nodes.len();
                    self.nodes.push(TrieNode::default());
                    self.nodes[at].children.insert(k, (*d, id));
                    id
                }
            };
        }
        let node = &mut self.nodes[at];
        node.best = node.best.max(Some(scalar));
        node.here = node.here.max(Some(scalar));
    }

    fn has_subset_at_least(&self, deltas: &[Delta], scalar: MwpInf) -> bool {
        !self.nodes.is_empty() && self.search(0, deltas, scalar)
    }

    fn search(&self, at: usize, rest: &[Delta], scalar: MwpInf) -> bool {
        let node = &self.nodes[at];
        if node.best < Some(scalar) {
            return false;
        }
        if node.here >= Some(scalar) {
            return true;
        }
        for (k, d) in rest.iter().enumerate() {
            if let Ok(c) = node.children.binary_search_by(|c| c.0.cmp(d)) {
                if self.search(node.children[c].1, &rest[k + 1..], scalar) {
                    return true;
                }
            }
        }
        false
    }
}

/// A simplified sum of monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ChoicePolynomial {
    monomials: Vec<Monomial>,
}

impl ChoicePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(scalar: MwpInf) -> Self {
        Self::from_monomials([Monomial::scalar(scalar)])
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::from_monomials([m])
    }

    pub fn from_monomials(monomials: impl IntoIterator<Item = Monomial>) -> Self {
        let mut p = ChoicePolynomial {
            monomials: monomials.into_iter().collect(),
        };
        p.simplify_in_place();
        p
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }

    /// Canonical simplification: zero monomials dropped, duplicate delta
    /// lists merged by max, subsumed monomials removed, canonical order.
    pub fn simplify(&self) -> Self {
        let mut p = self.clone();
        p.simplify_in_place();
        p
    }

    fn simplify_in_place(&mut self) {
        self.monomials.retain(|m| m.scalar != MwpInf::ZERO);
        self.monomials.sort();
        // Sorted by (deltas, scalar): keep the last of each run, the max.
        let mut merged: Vec<Monomial> = Vec::with_capacity(self.monomials.len());
        for m in self.monomials.drain(..) {
            match merged.last_mut() {
                Some(last) if last.deltas == m.deltas => *last = m,
                _ => merged.push(m),
            }
        }
        if merged.len() > 1 {
            // Only a strictly shorter list can subsume (equal lists were
            // merged), and subsumption is transitive, so shortest first
            // against the survivors is enough.
            let mut by_len: Vec<usize> = (0..merged.len()).collect();
            by_len.sort_by_key(|&k| merged[k].deltas.len());
            let mut keep = vec![false; merged.len()];
            let mut trie = SubsetTrie::default();
            for x in by_len {
                let m = &merged[x];
                if !trie.has_subset_at_least(&m.deltas, m.scalar) {
                    keep[x] = true;
                    trie.insert(&m.deltas, m.scalar);
                }
            }
            let mut k = 0;
            merged.retain(|_| {
                k += 1;
                keep[k - 1]
            });
        }
        self.monomials = merged;
    }

    /// Merges complete fans: whenever every value of some index `i` extends
    /// a delta list `L` (with `i` not in `L`), the monomial `s.L` is added,
    /// `s` being the least of the extending scalars; repeated to a fixpoint.
    /// Values are unchanged, but lists absorbed by the new monomials drop
    /// out. `cardinalities` gives each index's domain size.
    pub fn compact(&self, cardinalities: &[u32]) -> Self {
        let mut p = self.clone();
        loop {
            let mut fans: HashMap<(Vec<Delta>, u32), (u64, MwpInf)> = HashMap::new();
            for m in &p.monomials {
                for (pos, d) in m.deltas.iter().enumerate() {
                    if cardinalities
                        .get(d.index as usize)
                        .map_or(true, |&c| c > 64)
                    {
                        continue;
                    }
                    let mut rest = m.deltas.clone();
                    rest.remove(pos);
                    let e = fans.entry((rest, d.index)).or_insert((0, MwpInf::INF));
                    e.0 |= 1 << d.value;
                    e.1 = e.1.min(m.scalar);
                }
            }
            let new: Vec<Monomial> = fans
                .into_iter()
                .filter(|((_, i), (seen, _))| {
                    let c = cardinalities[*i as usize];
                    *seen == u64::MAX >> (64 - c)
                })
                .map(|((rest, _), (_, scalar))| Monomial {
                    scalar,
                    deltas: rest,
                })
                .collect();
            if new.is_empty() {
                return p;
            }
            let next = p.add(&ChoicePolynomial::from_monomials(new));
            if next == p {
                return p;
            }
            p = next;
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        // Ordered merge of the two monomial lists.
        let mut out = Vec::with_capacity(self.monomials.len() + other.monomials.len());
        let (mut i, mut j) = (0, 0);
        while i < self.monomials.len() && j < other.monomials.len() {
            if self.monomials[i] <= other.monomials[j] {
                out.push(self.monomials[i].clone());
                i += 1;
            } else {
                out.push(other.monomials[j].clone());
                j += 1;
            }
        }
        out.extend_from_slice(&self.monomials[i..]);
        out.extend_from_slice(&other.monomials[j..]);
        ChoicePolynomial::from_monomials(out)
    }

    /// Pointwise product.
    ///
    /// The monomial-by-monomial expansion follows the ordered-merge scheme:
    /// one partial product `P × q` per monomial `q` of the right operand,
    /// each kept sorted, then a k-way merge repeatedly takes the smallest
    /// head. Union of delta lists is not monotone for any total order, so
    /// each partial product is re-sorted rather than assumed sorted.
    ///
    /// Expansion alone would lose `0 × ∞ = ∞` where one side has no
    /// matching monomial, so the `∞` monomials of both operands are added
    /// back.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.inf_part();
        }
        if other.is_zero() {
            return self.inf_part();
        }
        if self.is_unit() {
            return other.clone();
        }
        if other.is_unit() {
            return self.clone();
        }

        let parts: Vec<Vec<Monomial>> = other
            .monomials
            .iter()
            .map(|q| {
                let mut part: Vec<Monomial> =
                    self.monomials.iter().filter_map(|p| p.mul(q)).collect();
                part.sort();
                part
            })
            .collect();

        let mut heap: BinaryHeap<Reverse<(&Monomial, usize, usize)>> = parts
            .iter()
            .enumerate()
            .filter_map(|(k, part)| part.first().map(|m| Reverse((m, k, 0))))
            .collect();
        let mut out: Vec<Monomial> = Vec::new();
        while let Some(Reverse((m, k, pos))) = heap.pop() {
            match out.last_mut() {
                Some(last) if last.deltas == m.deltas => last.scalar = last.scalar.max(m.scalar),
                _ => out.push(m.clone()),
            }
            if let Some(next) = parts[k].get(pos + 1) {
                heap.push(Reverse((next, k, pos + 1)));
            }
        }

        let mut product = ChoicePolynomial::from_monomials(out);
        let inf = self.inf_part().add(&other.inf_part());
        if !inf.is_zero() {
            product = product.add(&inf);
        }
        product
    }

    fn is_unit(&self) -> bool {
        self.monomials.len() == 1
            && self.monomials[0].deltas.is_empty()
            && self.monomials[0].scalar == MwpInf::M
    }

    /// The monomials whose scalar is `∞`.
    pub fn inf_part(&self) -> Self {
        self.filter_at_least(MwpInf::INF)
    }

    /// The monomials whose scalar is at least `threshold`; as a set of
    /// cylinders this is exactly where the polynomial evaluates `≥ threshold`.
    pub fn filter_at_least(&self, threshold: MwpInf) -> Self {
        ChoicePolynomial {
            monomials: self
                .monomials
                .iter()
                .filter(|m| m.scalar >= threshold)
                .cloned()
                .collect(),
        }
    }

    /// Multiplies every monomial scalar by `scalar` (`αP`).
    pub fn scale(&self, scalar: MwpInf) -> Self {
        self.mul(&ChoicePolynomial::constant(scalar))
    }

    /// Restricts the polynomial to the cylinder `deltas` (product with
    /// `m·∏δ`).
    pub fn restrict(&self, deltas: &[Delta]) -> Self {
        match Monomial::new(MwpInf::M, deltas.iter().copied()) {
            Some(m) => self.mul(&ChoicePolynomial::monomial(m)),
            None => self.inf_part(),
        }
    }

    pub fn has_inf(&self) -> bool {
        self.monomials.iter().any(|m| m.scalar.is_inf())
    }

    pub fn eval(&self, assignment: &Assignment) -> Result<MwpInf, MwpError> {
        let mut acc = MwpInf::ZERO;
        for m in &self.monomials {
            acc = acc.max(m.eval(assignment)?);
        }
        Ok(acc)
    }

    /// Choice indices mentioned by any monomial.
    pub fn indices(&self) -> BTreeSet<usize> {
        self.monomials
            .iter()
            .flat_map(|m| m.deltas.iter().map(|d| d.index as usize))
            .collect()
    }

    /// Registry-aware normal form: for every level, the maximal cylinders on
    /// which the function reaches that level, minus those dominated by a
    /// higher level. Two polynomials denote the same function over
    /// `registry` iff their normal forms are identical.
    ///
    /// Exhaustive over cylinders; intended for small registries.
    pub fn normal_form(&self, registry: &Registry, budget: u128) -> Result<Self, MwpError> {
        let cylinders: u128 = registry
            .cardinalities()
            .iter()
            .map(|&c| c as u128 + 1)
            .product();
        let work = cylinders.saturating_mul(registry.assignment_count());
        if work > budget {
            return Err(MwpError::BudgetExceeded {
                needed: work,
                budget,
            });
        }
        let values: Vec<(Assignment, MwpInf)> = registry
            .assignments()
            .map(|a| self.eval(&a).map(|v| (a, v)))
            .collect::<Result<_, _>>()?;

        // Cylinders as per-index Option picks, enumerated by an odometer
        // where `card` stands for "unconstrained".
        let cards = registry.cardinalities();
        let all_cylinders: Vec<Vec<Delta>> =
            Registry::from_cardinalities(cards.iter().map(|&c| c + 1).collect())
                .assignments()
                .map(|a| {
                    a.values()
                        .iter()
                        .enumerate()
                        .filter(|&(j, &v)| v < cards[j])
                        .map(|(j, &v)| Delta::new(v, j as u32))
                        .collect()
                })
                .collect();

        let mut kept: Vec<Monomial> = Vec::new();
        for level in [MwpInf::INF, MwpInf::P, MwpInf::W, MwpInf::M] {
            let inside: Vec<&Vec<Delta>> = all_cylinders
                .iter()
                .filter(|c| {
                    values.iter().all(|(a, v)| {
                        !a.satisfies(c).expect("registry-sized assignment") || *v >= level
                    })
                })
                .collect();
            for c in &inside {
                let maximal = !inside
                    .iter()
                    .any(|d| d.len() < c.len() && is_sub_list(d, c));
                let dominated = kept.iter().any(|k| is_sub_list(&k.deltas, c));
                if maximal && !dominated {
                    kept.push(Monomial {
                        scalar: level,
                        deltas: (*c).clone(),
                    });
                }
            }
        }
        Ok(ChoicePolynomial::from_monomials(kept))
    }
}

impl Semiring for ChoicePolynomial {
    fn zero() -> Self {
        ChoicePolynomial::zero()
    }

    fn one() -> Self {
        ChoicePolynomial::constant(MwpInf::M)
    }

    fn add(&self, other: &Self) -> Self {
        ChoicePolynomial::add(self, other)
    }

    fn mul(&self, other: &Self) -> Self {
        ChoicePolynomial::mul(self, other)
    }

    fn is_zero(&self) -> bool {
        self.monomials.is_empty()
    }
}

impl fmt::Display for ChoicePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (k, m) in self.monomials.iter().enumerate() {
            if k > 0 {
                write!(f, "+")?;
            }
            write!(f, "{m}")?;
        }
        Ok(())
    }
}

pub type PolyMatrix = Matrix<ChoicePolynomial>;

/// `M[α]`: entry-wise evaluation.
pub fn evaluate(matrix: &PolyMatrix, assignment: &Assignment) -> Result<MwpMatrix, MwpError> {
    let n = matrix.dim();
    let mut out = MwpMatrix::zero(n);
    for (i, j, p) in matrix.entries() {
        out.set(i, j, p.eval(assignment)?);
    }
    Ok(out)
}

/// `M*`, pointwise equal to [`Matrix::closure`] but computed by
/// elimination over the variables instead of by repeated products.
///
/// At an assignment where `M` is `∞`-free, multiplication is idempotent, so
/// `a* = 1 ⊕ a` and one elimination pass sums over every path. Where `M`
/// has an `∞`, the repeated products fill the whole matrix with `∞` (it
/// spreads along its column, then everywhere); that cylinder is added to
/// every entry. Intermediate entries are compacted against
/// `cardinalities`.
pub fn poly_closure(matrix: &PolyMatrix, cardinalities: &[u32]) -> PolyMatrix {
    let n = matrix.dim();
    let one = ChoicePolynomial::constant(MwpInf::M);
    let mut a = matrix.clone();
    for k in 0..n {
        let star = one.add(a.get(k, k));
        let col: Vec<ChoicePolynomial> = (0..n).map(|i| a.get(i, k).mul(&star)).collect();
        let row: Vec<ChoicePolynomial> = (0..n).map(|j| a.get(k, j).clone()).collect();
        for (i, left) in col.iter().enumerate() {
            if left.is_zero() {
                continue;
            }
            for (j, right) in row.iter().enumerate() {
                if right.is_zero() {
                    continue;
                }
                let v = a.get(i, j).add(&left.mul(right)).compact(cardinalities);
                a.set(i, j, v);
            }
        }
    }
    let mut everywhere = ChoicePolynomial::zero();
    for (_, _, p) in matrix.entries() {
        everywhere = everywhere.add(&p.inf_part());
    }
    Matrix::from_fn(n, |i, j| {
        let mut v = a.get(i, j).add(&everywhere);
        if i == j {
            v = v.add(&one);
        }
        v
    })
}

/// The isomorphism `M(A → S) → (A → M(S))`, listed over every assignment.
pub fn iso_expand(
    matrix: &PolyMatrix,
    registry: &Registry,
) -> Result<Vec<(Assignment, MwpMatrix)>, MwpError> {
    registry
        .assignments()
        .map(|a| evaluate(matrix, &a).map(|m| (a, m)))
        .collect()
}

/// Inverse of [`iso_expand`]: each entry becomes the sum over assignments
/// of the value times the full cylinder of that assignment.
pub fn iso_reconstruct(dim: usize, table: &[(Assignment, MwpMatrix)]) -> PolyMatrix {
    Matrix::from_fn(dim, |i, j| {
        ChoicePolynomial::from_monomials(table.iter().filter_map(|(a, m)| {
            Monomial::new(
                *m.get(i, j),
                a.values()
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| Delta::new(v, k as u32)),
            )
        }))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(value: u32, index: u32) -> Delta {
        Delta::new(value, index)
    }

    fn mono(scalar: MwpInf, deltas: &[(u32, u32)]) -> Monomial {
        Monomial::new(scalar, deltas.iter().map(|&(v, i)| d(v, i))).unwrap()
    }

    fn poly(ms: &[(MwpInf, &[(u32, u32)])]) -> ChoicePolynomial {
        ChoicePolynomial::from_monomials(ms.iter().map(|(s, ds)| mono(*s, ds)))
    }

    fn reg(cards: &[u32]) -> Registry {
        Registry::from_cardinalities(cards.to_vec())
    }

    /// Pointwise comparison over every assignment of `registry`.
    fn same_function(a: &ChoicePolynomial, b: &ChoicePolynomial, registry: &Registry) -> bool {
        registry
            .assignments()
            .all(|x| a.eval(&x).unwrap() == b.eval(&x).unwrap())
    }

    #[test]
    fn monomial_products() {
        let a = mono(MwpInf::M, &[(0, 1)]);
        let b = mono(MwpInf::P, &[(0, 1)]);
        assert_eq!(a.mul(&b), Some(mono(MwpInf::P, &[(0, 1)])));

        let c = mono(MwpInf::M, &[(1, 1)]);
        assert_eq!(a.mul(&c), None);

        let w = mono(MwpInf::W, &[(0, 1)]);
        let e = mono(MwpInf::M, &[(2, 2)]);
        assert_eq!(w.mul(&e), Some(mono(MwpInf::W, &[(0, 1), (2, 2)])));
    }

    #[test]
    fn addition_examples() {
        let p = poly(&[(MwpInf::M, &[(0, 1)])]);
        assert_eq!(p.add(&ChoicePolynomial::zero()), p);
        assert_eq!(
            p.add(&poly(&[(MwpInf::P, &[(0, 1)])])),
            poly(&[(MwpInf::P, &[(0, 1)])])
        );
        let sum = ChoicePolynomial::constant(MwpInf::M).add(&poly(&[(MwpInf::P, &[(1, 1)])]));
        assert_eq!(sum.monomials().len(), 2);
        assert_eq!(sum.to_string(), "m+p.δ(1,1)");
    }

    #[test]
    fn multiplication_examples() {
        let p = poly(&[(MwpInf::M, &[(0, 1)]), (MwpInf::W, &[(2, 0)])]);
        assert_eq!(p.mul(&ChoicePolynomial::one()), p);

        let q = poly(&[(MwpInf::M, &[(0, 1)]), (MwpInf::M, &[(1, 1)])]);
        let r = poly(&[(MwpInf::P, &[(0, 1)])]);
        assert_eq!(q.mul(&r), r);

        let inf = poly(&[(MwpInf::INF, &[(1, 1)])]);
        assert_eq!(inf.mul(&ChoicePolynomial::zero()), inf);
        assert_eq!(ChoicePolynomial::zero().mul(&inf), inf);
    }

    #[test]
    fn eval_examples() {
        let e2 = poly(&[
            (MwpInf::M, &[(0, 0)]),
            (MwpInf::INF, &[(1, 0)]),
            (MwpInf::INF, &[(2, 0)]),
        ]);
        assert_eq!(e2.eval(&Assignment(vec![1])).unwrap(), MwpInf::INF);
        assert_eq!(e2.eval(&Assignment(vec![0])).unwrap(), MwpInf::M);
        assert_eq!(
            ChoicePolynomial::constant(MwpInf::M)
                .eval(&Assignment(vec![2, 1]))
                .unwrap(),
            MwpInf::M
        );
        let q = poly(&[(MwpInf::M, &[(0, 1)]), (MwpInf::P, &[(2, 1)])]);
        assert_eq!(q.eval(&Assignment(vec![0, 2])).unwrap(), MwpInf::P);
    }

    #[test]
    fn eval_rejects_short_assignment() {
        let q = poly(&[(MwpInf::M, &[(0, 3)])]);
        assert_eq!(q.eval(&Assignment(vec![0])), Err(MwpError::MissingIndex(3)));
    }

    #[test]
    fn simplify_examples() {
        let dup = ChoicePolynomial {
            monomials: vec![mono(MwpInf::M, &[(0, 1)]), mono(MwpInf::M, &[(0, 1)])],
        };
        assert_eq!(dup.simplify(), poly(&[(MwpInf::M, &[(0, 1)])]));

        let sub = ChoicePolynomial {
            monomials: vec![Monomial::scalar(MwpInf::P), mono(MwpInf::M, &[(0, 1)])],
        };
        assert_eq!(sub.simplify(), ChoicePolynomial::constant(MwpInf::P));

        let ext = ChoicePolynomial {
            monomials: vec![
                mono(MwpInf::M, &[(0, 1), (0, 2)]),
                mono(MwpInf::P, &[(0, 1)]),
            ],
        };
        let simplified = ext.simplify();
        assert_eq!(simplified, poly(&[(MwpInf::P, &[(0, 1)])]));
        assert!(same_function(&ext, &simplified, &reg(&[3, 3, 3])));
    }

    #[test]
    fn simplify_keeps_larger_scalar_on_smaller_cylinder() {
        let p = ChoicePolynomial {
            monomials: vec![Monomial::scalar(MwpInf::M), mono(MwpInf::P, &[(1, 0)])],
        };
        assert_eq!(p.simplify().monomials().len(), 2);
    }

    #[test]
    fn registry_enumeration_is_lexicographic() {
        let all: Vec<Vec<u32>> = reg(&[2, 3]).assignments().map(|a| a.0).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 0]);
        assert_eq!(all[1], vec![0, 1]);
        assert_eq!(all[5], vec![1, 2]);
        assert_eq!(Registry::new().assignments().count(), 1);
    }

    #[test]
    fn registry_validation() {
        let r = reg(&[3, 2]);
        assert!(r.validate(&Assignment(vec![2, 1])).is_ok());
        assert!(matches!(
            r.validate(&Assignment(vec![2])),
            Err(MwpError::AssignmentLength { .. })
        ));
        assert!(matches!(
            r.validate(&Assignment(vec![0, 2])),
            Err(MwpError::AssignmentRange { index: 1, .. })
        ));
    }

    #[test]
    fn normal_form_identifies_equal_functions() {
        let r = reg(&[3]);
        let fan = poly(&[
            (MwpInf::M, &[(0, 0)]),
            (MwpInf::M, &[(1, 0)]),
            (MwpInf::M, &[(2, 0)]),
        ]);
        let budget = 1 << 20;
        assert_eq!(
            fan.normal_form(&r, budget).unwrap(),
            ChoicePolynomial::constant(MwpInf::M)
        );
    }

    #[test]
    fn iso_round_trip_on_example_matrix() {
        let r = reg(&[3]);
        let mut m = PolyMatrix::identity(3);
        m.set(
            1,
            1,
            poly(&[
                (MwpInf::M, &[(0, 0)]),
                (MwpInf::INF, &[(1, 0)]),
                (MwpInf::INF, &[(2, 0)]),
            ]),
        );
        let table = iso_expand(&m, &r).unwrap();
        assert_eq!(table.len(), 3);
        let back = iso_reconstruct(3, &table);
        assert_eq!(iso_expand(&back, &r).unwrap(), table);
    }
}
