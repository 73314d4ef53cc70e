//! Finite atomic probability spaces and the L⁰ scalar lattice over them.
//!
//! On an atomic space every atom carries positive mass, so "almost surely"
//! collapses to "at every atom" and equivalence classes of random variables
//! are plain per-atom value vectors.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};

/// Shared absolute tolerance for order predicates and supports.
pub const ORDER_TOL: f64 = 1e-12;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// A probability space with finitely many atoms, all of positive mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicSpace {
    weights: Vec<f64>,
    tolerance: f64,
}

impl AtomicSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("a probability space needs at least one atom"));
        }
        for (atom, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::domain(format!(
                    "atom {atom} has non-positive or non-finite weight {w}"
                )));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            weights,
            tolerance: ORDER_TOL,
        })
    }

    pub fn uniform(atom_count: usize) -> Self {
        assert!(atom_count > 0, "a probability space needs at least one atom");
        Self {
            weights: vec![1.0 / atom_count as f64; atom_count],
            tolerance: ORDER_TOL,
        }
    }

    /// Rescales arbitrary positive masses into a probability vector.
    pub fn normalized(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::domain("masses must have a positive finite total"));
        }
        let mut weights: Vec<f64> = masses.iter().map(|m| m / total).collect();
        // push the rounding residue onto the heaviest atom
        let residue = 1.0 - weights.iter().sum::<f64>();
        if let Some(heaviest) = weights
            .iter_mut()
            .max_by(|a, b| a.partial_cmp(b).expect("finite weights"))
        {
            *heaviest += residue;
        }
        Self::new(weights)
    }

    /// Overrides the order tolerance used by this space's predicates.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        assert!(tolerance >= 0.0 && tolerance.is_finite());
        self.tolerance = tolerance;
        self
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> f64 {
        self.weights[atom]
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn measure(&self, set: &MeasurableSet) -> f64 {
        debug_assert_eq!(set.atom_count(), self.atom_count());
        set.members
            .iter()
            .zip(&self.weights)
            .filter(|(&inside, _)| inside)
            .map(|(_, w)| w)
            .sum()
    }

    /// ∫ ξ dP, summed in ascending atom order.
    pub fn expectation(&self, xi: &L0Real) -> Result<f64> {
        ensure_len(self.atom_count(), xi.len())?;
        Ok(self.weights.iter().zip(&xi.0).map(|(w, v)| w * v).sum())
    }

    /// ξ ≤ η almost surely, with this space's tolerance.
    pub fn leq(&self, xi: &L0Real, eta: &L0Real) -> Result<bool> {
        ensure_len(self.atom_count(), xi.len())?;
        leq_with(xi, eta, self.tolerance)
    }

    /// P{ω : |ξ(ω)| ≥ ε}.
    pub fn prob_of_exceed(&self, xi: &L0Real, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
        }
        ensure_len(self.atom_count(), xi.len())?;
        Ok(xi
            .0
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| v.abs() >= epsilon)
            .map(|(_, w)| w)
            .sum())
    }

    /// Worst exceedance mass P{|ξ_n − limit| ≥ ε} over the indices `n ≥ tail`.
    pub fn tail_exceedance(
        &self,
        seq: &[L0Real],
        limit: &L0Real,
        epsilon: f64,
        tail: usize,
    ) -> Result<f64> {
        if tail >= seq.len() {
            return Err(Error::domain(format!(
                "tail index {tail} out of range for a sequence of length {}",
                seq.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for term in &seq[tail..] {
            ensure_len(limit.len(), term.len())?;
            let mass = self.prob_of_exceed(&(term - limit), epsilon)?;
            worst = worst.max(mass);
        }
        Ok(worst)
    }

    /// Finite-sample check of convergence in probability: every term from
    /// index `tail` on lies in the (ε, λ)-neighbourhood of `limit`.
    pub fn converges_in_probability(
        &self,
        seq: &[L0Real],
        limit: &L0Real,
        epsilon: f64,
        lambda: f64,
        tail: usize,
    ) -> Result<bool> {
        check_lambda(lambda)?;
        Ok(self.tail_exceedance(seq, limit, epsilon, tail)? < lambda)
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda must lie in (0, 1), got {lambda}")))
    }
}

/// A measurable set on an atomic space: one membership flag per atom.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurableSet {
    members: Vec<bool>,
}

impl MeasurableSet {
    pub fn from_flags(members: Vec<bool>) -> Self {
        Self { members }
    }

    pub fn full(atom_count: usize) -> Self {
        Self::from_flags(vec![true; atom_count])
    }

    pub fn empty(atom_count: usize) -> Self {
        Self::from_flags(vec![false; atom_count])
    }

    /// Set of the given (zero-based) atoms.
    pub fn from_atoms(atom_count: usize, atoms: &[usize]) -> Result<Self> {
        let mut members = vec![false; atom_count];
        for &a in atoms {
            if a >= atom_count {
                return Err(Error::domain(format!(
                    "atom {a} out of range for {atom_count} atoms"
                )));
            }
            members[a] = true;
        }
        Ok(Self { members })
    }

    pub fn atom_count(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.members[atom]
    }

    pub fn flags(&self) -> &[bool] {
        &self.members
    }

    pub fn atoms(&self) -> Vec<usize> {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn cardinality(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn complement(&self) -> Self {
        Self::from_flags(self.members.iter().map(|m| !m).collect())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        assert_eq!(self.atom_count(), other.atom_count(), "atom count mismatch");
        Self::from_flags(
            self.members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a && *b)
                .collect(),
        )
    }

    pub fn union(&self, other: &Self) -> Self {
        assert_eq!(self.atom_count(), other.atom_count(), "atom count mismatch");
        Self::from_flags(
            self.members
                .iter()
                .zip(&other.members)
                .map(|(a, b)| *a || *b)
                .collect(),
        )
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(a, b)| !a || *b)
    }
}

/// A finite-valued random variable: one real per atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L0Real(Vec<f64>);

impl L0Real {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(atom) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite value at atom {atom}")));
        }
        Ok(Self(values))
    }

    pub fn constant(atom_count: usize, value: f64) -> Self {
        assert!(value.is_finite());
        Self(vec![value; atom_count])
    }

    pub fn zeros(atom_count: usize) -> Self {
        Self::constant(atom_count, 0.0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, atom: usize) -> f64 {
        self.0[atom]
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_len(self.len(), other.len())?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Atom-wise maximum of two variables.
    pub fn sup(&self, other: &Self) -> Self {
        self.zip_with(other, f64::max).expect("atom count mismatch")
    }

    /// Atom-wise minimum of two variables.
    pub fn inf(&self, other: &Self) -> Self {
        self.zip_with(other, f64::min).expect("atom count mismatch")
    }

    /// Largest value over all atoms (the L^∞ norm for nonnegative variables).
    pub fn max_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest value over the atoms of `set`, or `None` when the set is empty.
    pub fn max_on(&self, set: &MeasurableSet) -> Option<f64> {
        set.atoms().into_iter().map(|a| self.0[a]).reduce(f64::max)
    }

    /// Ĩ_A · ξ
    pub fn restrict(&self, set: &MeasurableSet) -> Self {
        assert_eq!(self.len(), set.atom_count(), "atom count mismatch");
        Self(
            self.0
                .iter()
                .zip(set.flags())
                .map(|(&v, &inside)| if inside { v } else { 0.0 })
                .collect(),
        )
    }
}

macro_rules! l0_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&L0Real> for &L0Real {
            type Output = L0Real;
            fn $method(self, rhs: &L0Real) -> L0Real {
                self.zip_with(rhs, |a, b| a $op b).expect("atom count mismatch")
            }
        }
        impl $trait<L0Real> for L0Real {
            type Output = L0Real;
            fn $method(self, rhs: L0Real) -> L0Real {
                (&self).$method(&rhs)
            }
        }
    };
}

l0_binop!(Add, add, +);
l0_binop!(Sub, sub, -);
l0_binop!(Mul, mul, *);

impl Neg for &L0Real {
    type Output = L0Real;
    fn neg(self) -> L0Real {
        self.map(|v| -v)
    }
}

fn leq_with(xi: &L0Real, eta: &L0Real, tol: f64) -> Result<bool> {
    ensure_len(xi.len(), eta.len())?;
    Ok(xi.0.iter().zip(&eta.0).all(|(a, b)| *a <= *b + tol))
}

/// ξ ≤ η a.s. with the shared tolerance [`ORDER_TOL`].
pub fn almost_sure_leq(xi: &L0Real, eta: &L0Real) -> Result<bool> {
    leq_with(xi, eta, ORDER_TOL)
}

/// Supremum of a nonempty family in the L⁰ lattice (atom-wise maximum).
pub fn lattice_sup(family: &[L0Real]) -> Result<L0Real> {
    let (first, rest) = family
        .split_first()
        .ok_or_else(|| Error::domain("supremum of an empty family"))?;
    rest.iter().try_fold(first.clone(), |acc, xi| {
        acc.zip_with(xi, f64::max)
    })
}

/// Ĩ_A as an element of L⁰.
pub fn indicator(set: &MeasurableSet) -> L0Real {
    L0Real(set.flags().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect())
}

/// A finite measurable partition of the atoms: disjoint, covering, no empty pieces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pieces: Vec<MeasurableSet>,
}

impl Partition {
    /// Drops empty pieces and checks disjointness and coverage.
    pub fn new(pieces: Vec<MeasurableSet>) -> Result<Self> {
        let atom_count = pieces
            .first()
            .map(MeasurableSet::atom_count)
            .ok_or_else(|| Error::domain("a partition needs at least one piece"))?;
        let mut owner = vec![false; atom_count];
        for piece in &pieces {
            ensure_len(atom_count, piece.atom_count())?;
            for atom in piece.atoms() {
                if owner[atom] {
                    return Err(Error::PartitionOverlap { atom });
                }
                owner[atom] = true;
            }
        }
        if let Some(atom) = owner.iter().position(|&o| !o) {
            return Err(Error::PartitionGap { atom });
        }
        Ok(Self {
            pieces: pieces.into_iter().filter(|p| !p.is_empty()).collect(),
        })
    }

    /// Groups atoms by label; pieces come out in ascending label order.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut distinct: Vec<usize> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        Self::new(
            distinct
                .into_iter()
                .map(|l| MeasurableSet::from_flags(labels.iter().map(|&x| x == l).collect()))
                .collect(),
        )
    }

    pub fn trivial(atom_count: usize) -> Self {
        Self {
            pieces: vec![MeasurableSet::full(atom_count)],
        }
    }

    pub fn atomic(atom_count: usize) -> Self {
        Self {
            pieces: (0..atom_count)
                .map(|a| MeasurableSet::from_atoms(atom_count, &[a]).expect("atom in range"))
                .collect(),
        }
    }

    pub fn pieces(&self) -> &[MeasurableSet] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn atom_count(&self) -> usize {
        self.pieces[0].atom_count()
    }

    pub fn piece_of(&self, atom: usize) -> usize {
        self.pieces
            .iter()
            .position(|p| p.contains(atom))
            .expect("partition covers every atom")
    }

    /// Piece index for every atom.
    pub fn labels(&self) -> Vec<usize> {
        (0..self.atom_count()).map(|a| self.piece_of(a)).collect()
    }

    /// Common refinement: all nonempty pairwise intersections, ordered by
    /// (self piece, other piece).
    pub fn refine(&self, other: &Partition) -> Self {
        let pieces = self
            .pieces
            .iter()
            .flat_map(|a| other.pieces.iter().map(move |b| a.intersection(b)))
            .filter(|p| !p.is_empty())
            .collect();
        Self { pieces }
    }
}
