//! Elements of the RN module L⁰(F, ℝ^d) with an ℓ_q fiber norm.
//!
//! An element stores one d-vector per atom (atom-major, flat). The L⁰-norm is
//! the per-atom ℓ_q norm of the fiber, and L⁰ scalars act fiber by fiber.

use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};
use crate::measure::{AtomicSpace, L0Real, MeasurableSet, Partition, ORDER_TOL};

/// Fiber ℝ^d carrying the ℓ_q norm, 1 < q < ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiberSpec {
    pub dim: usize,
    pub exponent: f64,
}

impl FiberSpec {
    pub fn new(dim: usize, exponent: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("fiber dimension must be positive"));
        }
        if !(exponent > 1.0 && exponent.is_finite()) {
            return Err(Error::domain(format!(
                "fiber exponent must satisfy 1 < q < inf, got {exponent}"
            )));
        }
        Ok(Self { dim, exponent })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, 2.0).expect("valid euclidean spec")
    }

    /// q* with 1/q + 1/q* = 1.
    pub fn dual_exponent(&self) -> f64 {
        self.exponent / (self.exponent - 1.0)
    }

    pub fn is_euclidean(&self) -> bool {
        self.exponent == 2.0
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        lq_norm(v, self.exponent)
    }

    pub fn dual_norm(&self, v: &[f64]) -> f64 {
        lq_norm(v, self.dual_exponent())
    }
}

/// ℓ_q norm of a finite vector, 1 ≤ q < ∞, or the max norm for q = ∞.
pub fn lq_norm(v: &[f64], q: f64) -> f64 {
    if q == 2.0 {
        return v.iter().map(|a| a * a).sum::<f64>().sqrt();
    }
    let peak = v.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
    if q.is_infinite() || peak == 0.0 {
        return peak;
    }
    if q == 1.0 {
        return v.iter().map(|a| a.abs()).sum();
    }
    peak * v.iter().map(|a| (a.abs() / peak).powf(q)).sum::<f64>().powf(1.0 / q)
}

/// An element of E: one fiber vector per atom.
#[derive(Clone, PartialEq)]
pub struct RNElement {
    space: Arc<AtomicSpace>,
    spec: FiberSpec,
    data: Vec<f64>,
}

impl fmt::Debug for RNElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.fibers()).finish()
    }
}

impl RNElement {
    pub fn zero(space: Arc<AtomicSpace>, spec: FiberSpec) -> Self {
        let data = vec![0.0; space.atom_count() * spec.dim];
        Self { space, spec, data }
    }

    pub fn from_flat(space: Arc<AtomicSpace>, spec: FiberSpec, data: Vec<f64>) -> Result<Self> {
        ensure_len(space.atom_count() * spec.dim, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("element has non-finite coordinates"));
        }
        Ok(Self { space, spec, data })
    }

    pub fn from_fibers(
        space: Arc<AtomicSpace>,
        spec: FiberSpec,
        fibers: &[Vec<f64>],
    ) -> Result<Self> {
        ensure_len(space.atom_count(), fibers.len())?;
        let mut data = Vec::with_capacity(fibers.len() * spec.dim);
        for fiber in fibers {
            ensure_len(spec.dim, fiber.len())?;
            data.extend_from_slice(fiber);
        }
        Self::from_flat(space, spec, data)
    }

    /// The same fiber at every atom.
    pub fn constant(space: Arc<AtomicSpace>, spec: FiberSpec, fiber: &[f64]) -> Result<Self> {
        ensure_len(spec.dim, fiber.len())?;
        let data = fiber.repeat(space.atom_count());
        Self::from_flat(space, spec, data)
    }

    pub fn space(&self) -> &Arc<AtomicSpace> {
        &self.space
    }

    pub fn spec(&self) -> FiberSpec {
        self.spec
    }

    pub fn atom_count(&self) -> usize {
        self.space.atom_count()
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn fiber(&self, atom: usize) -> &[f64] {
        let d = self.spec.dim;
        &self.data[atom * d..(atom + 1) * d]
    }

    pub fn fiber_mut(&mut self, atom: usize) -> &mut [f64] {
        let d = self.spec.dim;
        &mut self.data[atom * d..(atom + 1) * d]
    }

    pub fn fibers(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.spec.dim)
    }

    pub fn to_fibers(&self) -> Vec<Vec<f64>> {
        self.fibers().map(<[f64]>::to_vec).collect()
    }

    /// Rebuilds the element fiber by fiber; `f` receives the atom index, the
    /// input fiber and the output slice.
    pub fn map_fibers(&self, mut f: impl FnMut(usize, &[f64], &mut [f64])) -> Self {
        let mut out = self.clone();
        for (atom, (src, dst)) in self
            .data
            .chunks_exact(self.spec.dim)
            .zip(out.data.chunks_exact_mut(self.spec.dim))
            .enumerate()
        {
            f(atom, src, dst);
        }
        out
    }

    pub fn check_compatible(&self, other: &RNElement) -> Result<()> {
        ensure_len(self.atom_count(), other.atom_count())?;
        ensure_len(self.spec.dim, other.spec.dim)?;
        if self.spec != other.spec {
            return Err(Error::domain("elements use different fiber norms"));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// ‖x‖ as an element of L⁰₊.
    pub fn l0_norm(&self) -> L0Real {
        L0Real::new(self.fibers().map(|v| self.spec.norm(v)).collect())
            .expect("norms of finite fibers are finite")
    }

    /// ξ · x, fiber by fiber.
    pub fn module_scale(&self, xi: &L0Real) -> Result<Self> {
        ensure_len(self.atom_count(), xi.len())?;
        Ok(self.map_fibers(|atom, src, dst| {
            let c = xi.get(atom);
            for (o, i) in dst.iter_mut().zip(src) {
                *o = c * i;
            }
        }))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            space: Arc::clone(&self.space),
            spec: self.spec,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    /// Ĩ_A · x
    pub fn restrict(&self, set: &MeasurableSet) -> Self {
        assert_eq!(set.atom_count(), self.atom_count(), "atom count mismatch");
        self.map_fibers(|atom, src, dst| {
            if set.contains(atom) {
                dst.copy_from_slice(src);
            } else {
                dst.fill(0.0);
            }
        })
    }

    /// A_x: atoms where ‖x‖ exceeds the support threshold.
    pub fn support(&self) -> MeasurableSet {
        MeasurableSet::from_flags(
            self.fibers()
                .map(|v| self.spec.norm(v) > ORDER_TOL)
                .collect(),
        )
    }

    pub fn try_add(&self, other: &RNElement) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.combine(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &RNElement) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.combine(other, |a, b| a - b))
    }

    /// (1 − c)·self + c·other with a real weight.
    pub fn lerp(&self, other: &RNElement, c: f64) -> Self {
        self.combine(other, |a, b| (1.0 - c) * a + c * b)
    }

    fn combine(&self, other: &RNElement, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.data.len(), other.data.len(), "element shape mismatch");
        Self {
            space: Arc::clone(&self.space),
            spec: self.spec,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Largest coordinate difference over all atoms.
    pub fn max_abs_diff(&self, other: &RNElement) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "element shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Add<&RNElement> for &RNElement {
    type Output = RNElement;
    fn add(self, rhs: &RNElement) -> RNElement {
        self.try_add(rhs).expect("incompatible elements")
    }
}

impl Sub<&RNElement> for &RNElement {
    type Output = RNElement;
    fn sub(self, rhs: &RNElement) -> RNElement {
        self.try_sub(rhs).expect("incompatible elements")
    }
}

pub fn l0_norm(x: &RNElement) -> L0Real {
    x.l0_norm()
}

pub fn module_scale(xi: &L0Real, x: &RNElement) -> Result<RNElement> {
    x.module_scale(xi)
}

pub fn support(x: &RNElement) -> MeasurableSet {
    x.support()
}

/// A_{x,y} = A_x ∩ A_y
pub fn joint_support(x: &RNElement, y: &RNElement) -> MeasurableSet {
    x.support().intersection(&y.support())
}

/// B_{x,y} = A_x ∩ A_y ∩ A_{x−y}
pub fn separated_support(x: &RNElement, y: &RNElement) -> MeasurableSet {
    joint_support(x, y).intersection(&(x - y).support())
}

/// Countable concatenation Σ Ĩ_{A_n} x_n over a finite partition.
pub fn glue(partition: &Partition, elements: &[RNElement]) -> Result<RNElement> {
    if partition.len() != elements.len() {
        return Err(Error::domain(format!(
            "{} pieces but {} elements",
            partition.len(),
            elements.len()
        )));
    }
    let first = &elements[0];
    ensure_len(partition.atom_count(), first.atom_count())?;
    for e in &elements[1..] {
        first.check_compatible(e)?;
    }
    let labels = partition.labels();
    Ok(first.map_fibers(|atom, _, dst| {
        dst.copy_from_slice(elements[labels[atom]].fiber(atom));
    }))
}
