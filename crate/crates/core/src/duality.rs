//! Random conjugate functionals, the Lᵖ(E) norms and the canonical map
//! T_F(x) = ∫ F(x) dP, plus finite-sample checks for the (ε, λ)- and random
//! weak topologies.

use std::sync::Arc;

use serde::Serialize;

use crate::element::{FiberSpec, RNElement};
use crate::error::{ensure_len, Error, Result};
use crate::exec::Exec;
use crate::measure::{check_lambda, AtomicSpace, L0Real, MeasurableSet};

/// An a.s. bounded random linear functional represented by its dual fibers:
/// F(x)(ω) = ⟨F(ω), x(ω)⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomFunctional {
    primal: FiberSpec,
    dual: RNElement,
}

impl RandomFunctional {
    pub fn from_fibers(
        space: Arc<AtomicSpace>,
        primal: FiberSpec,
        dual_fibers: &[Vec<f64>],
    ) -> Result<Self> {
        let dual_spec = FiberSpec::new(primal.dim, primal.dual_exponent())?;
        Ok(Self {
            primal,
            dual: RNElement::from_fibers(space, dual_spec, dual_fibers)?,
        })
    }

    pub fn from_flat(space: Arc<AtomicSpace>, primal: FiberSpec, data: Vec<f64>) -> Result<Self> {
        let dual_spec = FiberSpec::new(primal.dim, primal.dual_exponent())?;
        Ok(Self {
            primal,
            dual: RNElement::from_flat(space, dual_spec, data)?,
        })
    }

    pub fn zero(space: Arc<AtomicSpace>, primal: FiberSpec) -> Self {
        let n = space.atom_count() * primal.dim;
        Self::from_flat(space, primal, vec![0.0; n]).expect("valid zero functional")
    }

    pub fn space(&self) -> &Arc<AtomicSpace> {
        self.dual.space()
    }

    pub fn primal_spec(&self) -> FiberSpec {
        self.primal
    }

    pub fn dual_fiber(&self, atom: usize) -> &[f64] {
        self.dual.fiber(atom)
    }

    pub fn atom_count(&self) -> usize {
        self.dual.atom_count()
    }

    /// F(x) ∈ L⁰.
    pub fn eval(&self, x: &RNElement) -> Result<L0Real> {
        ensure_len(self.atom_count(), x.atom_count())?;
        ensure_len(self.primal.dim, x.dim())?;
        L0Real::new(
            (0..x.atom_count())
                .map(|a| dot(self.dual.fiber(a), x.fiber(a)))
                .collect(),
        )
    }

    /// ‖F‖*: the per-atom dual norm.
    pub fn conjugate_norm(&self) -> L0Real {
        self.dual.l0_norm()
    }

    /// ξ · F
    pub fn module_scale(&self, xi: &L0Real) -> Result<Self> {
        Ok(Self {
            primal: self.primal,
            dual: self.dual.module_scale(xi)?,
        })
    }

    /// Per-atom unit vector attaining ⟨F(ω), x⟩ = ‖F‖*(ω); θ where F vanishes.
    pub fn alignment(&self) -> RNElement {
        let q_dual = self.primal.dual_exponent();
        let spec = self.dual.spec();
        let zero = RNElement::zero(self.space().clone(), self.primal);
        zero.map_fibers(|atom, _, dst| {
            let f = self.dual.fiber(atom);
            let norm = spec.norm(f);
            if norm == 0.0 {
                dst.fill(0.0);
                return;
            }
            for (o, &fi) in dst.iter_mut().zip(f) {
                *o = fi.signum() * (fi.abs() / norm).powf(q_dual - 1.0);
            }
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hölder conjugate exponents, 1 ≤ p < ∞ (q = ∞ when p = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderPair {
    pub p: f64,
    pub q: f64,
}

impl HolderPair {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::domain(format!("need 1 <= p < inf, got {p}")));
        }
        let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        Ok(Self { p, q })
    }
}

/// ‖ξ‖_p on the atomic space; p = ∞ gives the essential supremum of |ξ|.
pub fn lp_norm_l0(space: &AtomicSpace, xi: &L0Real, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("need p >= 1, got {p}")));
    }
    ensure_len(space.atom_count(), xi.len())?;
    if p.is_infinite() {
        return Ok(xi.abs().max_value());
    }
    let peak = xi.abs().max_value();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let moment: f64 = space
        .weights()
        .iter()
        .zip(xi.values())
        .map(|(w, v)| w * (v.abs() / peak).powf(p))
        .sum();
    Ok(peak * moment.powf(1.0 / p))
}

/// ‖x‖_p = (∫ ‖x‖^p dP)^{1/p}, or max-atom ‖x‖ for p = ∞.
pub fn lp_norm(x: &RNElement, p: f64) -> Result<f64> {
    lp_norm_l0(x.space(), &x.l0_norm(), p)
}

/// Lᵠ(E*) norm of a functional: ‖ ‖F‖* ‖_q.
pub fn dual_lq_norm(f: &RandomFunctional, pair: HolderPair) -> Result<f64> {
    lp_norm_l0(f.space(), &f.conjugate_norm(), pair.q)
}

pub fn conjugate_norm(f: &RandomFunctional) -> L0Real {
    f.conjugate_norm()
}

/// T_F(x) = Σ_ω P(ω)⟨F(ω), x(ω)⟩ in ascending atom order.
pub fn canonical_t(f: &RandomFunctional, x: &RNElement) -> Result<f64> {
    let values = f.eval(x)?;
    f.space().expectation(&values)
}

// Irrational strides for the Kronecker grid (square roots of primes).
const STRIDES: [f64; 16] = [
    std::f64::consts::SQRT_2,
    1.732_050_807_568_877,
    2.236_067_977_499_79,
    2.645_751_311_064_591,
    3.316_624_790_355_4,
    3.605_551_275_463_989,
    4.123_105_625_617_661,
    4.358_898_943_540_674,
    4.795_831_523_312_719,
    5.385_164_807_134_504,
    5.567_764_362_830_022,
    6.082_762_530_298_219,
    6.403_124_237_432_849,
    6.557_438_524_302,
    6.855_654_600_401_044,
    7.280_109_889_280_518,
];

fn kronecker(index: usize, slot: usize) -> f64 {
    let alpha = STRIDES[slot % STRIDES.len()] * (1 + slot / STRIDES.len()) as f64;
    ((index as f64 + 1.0) * alpha).fract()
}

/// Brute-force estimate of sup{|T_F(x)| : ‖x‖_p ≤ 1}.
///
/// Candidates are the analytic alignment maximizer (mass a(ω) ∝ ‖F‖*(ω)^{q−1}
/// on the aligned unit fibers) plus `grid²` low-discrepancy points, each
/// normalised onto the Lᵖ unit sphere. Returns the best value found.
pub fn operator_norm_oracle(f: &RandomFunctional, pair: HolderPair, grid: usize) -> f64 {
    operator_norm_oracle_with(f, pair, grid, Exec::default())
}

pub fn operator_norm_oracle_with(
    f: &RandomFunctional,
    pair: HolderPair,
    grid: usize,
    exec: Exec,
) -> f64 {
    let analytic = aligned_maximizer(f, pair);
    let best_analytic = normalized_pairing(f, &analytic, pair.p);
    let candidates = grid_candidates(f, pair, grid, exec);
    candidates.into_iter().fold(best_analytic, f64::max)
}

/// The grid half of the oracle on its own, useful as a lower bound.
pub fn grid_candidates(f: &RandomFunctional, pair: HolderPair, grid: usize, exec: Exec) -> Vec<f64> {
    let n = f.atom_count();
    let d = f.primal_spec().dim;
    let spec = f.primal_spec();
    let count = grid.max(1).pow(2);
    exec.map_indexed(count, |c| {
        let base = RNElement::zero(f.space().clone(), spec);
        let x = base.map_fibers(|atom, _, dst| {
            let slot = atom * (d + 1);
            let mass = kronecker(c, slot);
            let dir: Vec<f64> = (0..d).map(|k| 2.0 * kronecker(c, slot + 1 + k) - 1.0).collect();
            let norm = spec.norm(&dir);
            for k in 0..d {
                dst[k] = if norm > 0.0 { mass * dir[k] / norm } else { 0.0 };
            }
        });
        debug_assert_eq!(x.atom_count(), n);
        normalized_pairing(f, &x, pair.p)
    })
}

fn normalized_pairing(f: &RandomFunctional, x: &RNElement, p: f64) -> f64 {
    let norm = lp_norm(x, p).expect("p >= 1");
    if norm == 0.0 {
        return 0.0;
    }
    canonical_t(f, x).expect("compatible shapes").abs() / norm
}

fn aligned_maximizer(f: &RandomFunctional, pair: HolderPair) -> RNElement {
    let phi = f.conjugate_norm();
    let align = f.alignment();
    let space = f.space();
    let mass = if pair.q.is_infinite() {
        // p = 1: all mass on the heaviest atom of ‖F‖*
        let (top, _) = phi
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        L0Real::new(
            (0..phi.len())
                .map(|a| if a == top { 1.0 / space.weight(a) } else { 0.0 })
                .collect(),
        )
        .expect("finite mass")
    } else {
        phi.map(|v| v.powf(pair.q - 1.0))
    };
    align.module_scale(&mass).expect("same atoms")
}

/// Per-functional outcome of a random weak convergence check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalDiagnostic {
    pub index: usize,
    pub worst_exceedance: f64,
    pub converged: bool,
}

pub fn weak_convergence_diagnostics(
    seq: &[RNElement],
    x: &RNElement,
    family: &[RandomFunctional],
    epsilon: f64,
    lambda: f64,
    tail: usize,
) -> Result<Vec<FunctionalDiagnostic>> {
    if family.is_empty() {
        return Err(Error::domain("random weak convergence needs a nonempty test family"));
    }
    check_lambda(lambda)?;
    let space = x.space();
    family
        .iter()
        .enumerate()
        .map(|(index, f)| {
            let values: Vec<L0Real> = seq.iter().map(|s| f.eval(s)).collect::<Result<_>>()?;
            let worst = space.tail_exceedance(&values, &f.eval(x)?, epsilon, tail)?;
            Ok(FunctionalDiagnostic {
                index,
                worst_exceedance: worst,
                converged: worst < lambda,
            })
        })
        .collect()
}

/// x_n → x in σ(E, E*), checked against a finite family of functionals.
pub fn random_weak_converges(
    seq: &[RNElement],
    x: &RNElement,
    family: &[RandomFunctional],
    epsilon: f64,
    lambda: f64,
    tail: usize,
) -> Result<bool> {
    Ok(weak_convergence_diagnostics(seq, x, family, epsilon, lambda, tail)?
        .iter()
        .all(|d| d.converged))
}

/// x_n → x in the (ε, λ)-topology: ‖x_n − x‖ → 0 in probability.
pub fn eps_lambda_converges(
    seq: &[RNElement],
    x: &RNElement,
    epsilon: f64,
    lambda: f64,
    tail: usize,
) -> Result<bool> {
    let norms: Vec<L0Real> = seq
        .iter()
        .map(|s| Ok(s.try_sub(x)?.l0_norm()))
        .collect::<Result<_>>()?;
    x.space()
        .converges_in_probability(&norms, &L0Real::zeros(x.atom_count()), epsilon, lambda, tail)
}

/// Dual coordinate basis scaled by each atom indicator. Norming on atomic
/// spaces with finite-dimensional fibers.
pub fn default_norming_family(space: &Arc<AtomicSpace>, spec: FiberSpec) -> Vec<RandomFunctional> {
    let n = space.atom_count();
    let mut family = Vec::with_capacity(n * spec.dim);
    for atom in 0..n {
        let set = MeasurableSet::from_atoms(n, &[atom]).expect("atom in range");
        for k in 0..spec.dim {
            let mut data = vec![0.0; n * spec.dim];
            for a in set.atoms() {
                data[a * spec.dim + k] = 1.0;
            }
            family.push(RandomFunctional::from_flat(space.clone(), spec, data).expect("valid basis"));
        }
    }
    family
}
