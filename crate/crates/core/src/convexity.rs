//! Random uniform convexity witnesses and a numerical modulus of convexity
//! for Lᵖ(E).

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::duality::lp_norm;
use crate::element::{FiberSpec, RNElement};
use crate::error::{ensure_len, Error, Result};
use crate::exec::{item_rng, Exec};
use crate::measure::{AtomicSpace, L0Real, MeasurableSet};

/// Random (ε, δ) pair: ε ∈ ε_F[0,2] and δ ∈ δ_F[0,1], i.e. each bounded below
/// by a positive constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexityParams {
    epsilon: L0Real,
    delta: L0Real,
}

impl ConvexityParams {
    pub fn new(epsilon: L0Real, delta: L0Real) -> Result<Self> {
        ensure_len(epsilon.len(), delta.len())?;
        if !(epsilon.min_value() > 0.0 && epsilon.max_value() <= 2.0) {
            return Err(Error::domain("epsilon must lie in [lambda, 2] for some lambda > 0"));
        }
        if !(delta.min_value() > 0.0 && delta.max_value() <= 1.0) {
            return Err(Error::domain("delta must lie in [eta, 1] for some eta > 0"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn constant(atom_count: usize, epsilon: f64, delta: f64) -> Result<Self> {
        Self::new(
            L0Real::constant(atom_count, epsilon),
            L0Real::constant(atom_count, delta),
        )
    }

    pub fn epsilon(&self) -> &L0Real {
        &self.epsilon
    }

    pub fn delta(&self) -> &L0Real {
        &self.delta
    }
}

/// Checks "‖x − y‖ ≥ ε on D implies ‖x + y‖ ≤ 2(1 − δ) on D" atom by atom.
///
/// Atoms of D outside B_{x,y} satisfy the implication vacuously, so D is not
/// required to sit inside B_{x,y}; only the unit-ball precondition is enforced.
pub fn random_uc_witness_check(
    x: &RNElement,
    y: &RNElement,
    d: &MeasurableSet,
    params: &ConvexityParams,
) -> Result<bool> {
    x.check_compatible(y)?;
    ensure_len(x.atom_count(), d.atom_count())?;
    ensure_len(x.atom_count(), params.epsilon.len())?;
    let tol = x.space().tolerance();
    let (nx, ny) = (x.l0_norm(), y.l0_norm());
    if let Some(atom) = (0..x.atom_count()).find(|&a| nx.get(a) > 1.0 + tol || ny.get(a) > 1.0 + tol) {
        return Err(Error::precondition(format!(
            "x and y must lie in the random unit ball (atom {atom})"
        )));
    }
    let gap = (x - y).l0_norm();
    let sum = (x + y).l0_norm();
    Ok(d.atoms().into_iter().all(|a| {
        gap.get(a) < params.epsilon.get(a) - tol
            || sum.get(a) <= 2.0 * (1.0 - params.delta.get(a)) + tol
    }))
}

/// δ(ε) = 1 − sqrt(1 − ε²/4), the modulus of any Hilbert space.
pub fn hilbert_modulus(epsilon: f64) -> f64 {
    1.0 - (1.0 - epsilon * epsilon / 4.0).max(0.0).sqrt()
}

/// Estimate of the modulus of convexity of Lᵖ(E) on a fixed three-atom model
/// with Euclidean ℝ² fibers.
pub fn lp_uc_modulus_estimate(p: f64, epsilon: f64, samples: usize, seed: u64) -> Result<f64> {
    let space = Arc::new(AtomicSpace::new(vec![0.5, 0.3, 0.2])?);
    modulus_estimate_on(&space, FiberSpec::euclidean(2), p, epsilon, samples, seed, Exec::default())
}

/// δ(ε) = inf{1 − ‖(x+y)/2‖_p : ‖x‖_p, ‖y‖_p ≤ 1, ‖x − y‖_p ≥ ε} by seeded
/// random search followed by `2·samples` local refinement steps.
///
/// Every candidate is a feasible pair, so the estimate never undershoots the
/// true modulus.
pub fn modulus_estimate_on(
    space: &Arc<AtomicSpace>,
    spec: FiberSpec,
    p: f64,
    epsilon: f64,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("need 1 < p < inf, got {p}")));
    }
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::domain(format!("need 0 < epsilon <= 2, got {epsilon}")));
    }
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let probe = ModulusProbe { p, epsilon };
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let n = space.atom_count() * spec.dim;
        let mut gauss = || -> Vec<f64> { (0..n).map(|_| rng.sample(StandardNormal)).collect() };
        let m = RNElement::from_flat(space.clone(), spec, gauss()).expect("shape");
        let h = RNElement::from_flat(space.clone(), spec, gauss()).expect("shape");
        (m, h)
    };

    let scored = exec.map_indexed(samples, |i| {
        let mut rng = item_rng(seed, i);
        let (m, h) = draw(&mut rng);
        (probe.value(&m, &h), m, h)
    });
    let (mut best, mut m, mut h) = scored
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("samples > 0");

    let mut rng = item_rng(seed, samples);
    let mut step = 0.5;
    for _ in 0..2 * samples {
        let (dm, dh) = draw(&mut rng);
        let m_scale = lp_norm(&m, p)? * step;
        let h_scale = lp_norm(&h, p)? * step;
        let m2 = &m + &dm.scale(m_scale / lp_norm(&dm, p)?.max(f64::MIN_POSITIVE));
        let h2 = &h + &dh.scale(h_scale / lp_norm(&dh, p)?.max(f64::MIN_POSITIVE));
        let v = probe.value(&m2, &h2);
        if v < best {
            best = v;
            m = m2;
            h = h2;
            step = (step * 1.5).min(1.0);
        } else {
            step = (step * 0.9).max(1e-6);
        }
    }
    Ok(best.max(0.0))
}

struct ModulusProbe {
    p: f64,
    epsilon: f64,
}

impl ModulusProbe {
    /// Scores the pair x = t·m + h, y = t·m − h with ‖x − y‖_p = ε and the
    /// largest feasible t.
    fn value(&self, m: &RNElement, h: &RNElement) -> f64 {
        let p = self.p;
        let hn = lp_norm(h, p).expect("p > 1");
        let mn = lp_norm(m, p).expect("p > 1");
        if hn == 0.0 || mn == 0.0 {
            return 1.0;
        }
        let h = h.scale(0.5 * self.epsilon / hn);
        let m = m.scale(1.0 / mn);
        let worst = |t: f64| {
            let tm = m.scale(t);
            lp_norm(&(&tm + &h), p)
                .expect("p > 1")
                .max(lp_norm(&(&tm - &h), p).expect("p > 1"))
        };
        // worst(·) is convex with worst(0) = ε/2 ≤ 1 and worst(2) ≥ 1
        let (mut lo, mut hi) = (0.0_f64, 2.0_f64);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if worst(mid) <= 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        1.0 - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space1() -> Arc<AtomicSpace> {
        Arc::new(AtomicSpace::new(vec![0.5, 0.3, 0.2]).unwrap())
    }

    #[test]
    fn witness_examples() {
        let s = space1();
        let spec = FiberSpec::euclidean(2);
        let x = RNElement::constant(s.clone(), spec, &[1.0, 0.0]).unwrap();
        let y = RNElement::constant(s.clone(), spec, &[0.0, 1.0]).unwrap();
        let d = MeasurableSet::full(3);

        let tight = ConvexityParams::constant(3, 1.0, 1.0 - 2f64.sqrt() / 2.0).unwrap();
        assert!(random_uc_witness_check(&x, &y, &d, &tight).unwrap());
        let greedy = ConvexityParams::constant(3, 1.0, 0.5).unwrap();
        assert!(!random_uc_witness_check(&x, &y, &d, &greedy).unwrap());

        // hypothesis never triggered: the points are too close
        let near = RNElement::constant(s.clone(), spec, &[0.9, 0.1]).unwrap();
        assert!(random_uc_witness_check(&x, &near, &d, &greedy).unwrap());
        assert!(random_uc_witness_check(&x, &x, &d, &greedy).unwrap());

        let big = x.scale(1.5);
        assert!(matches!(
            random_uc_witness_check(&big, &y, &d, &tight),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn params_validation() {
        assert!(ConvexityParams::constant(2, 0.0, 0.5).is_err());
        assert!(ConvexityParams::constant(2, 2.5, 0.5).is_err());
        assert!(ConvexityParams::constant(2, 1.0, 1.5).is_err());
        assert!(ConvexityParams::constant(2, 2.0, 1.0).is_ok());
    }

    #[test]
    fn modulus_examples() {
        let v = lp_uc_modulus_estimate(2.0, 2.0, 64, 1).unwrap();
        assert!((0.0..=1.0).contains(&v));

        let v = lp_uc_modulus_estimate(2.0, 1.0, 256, 7).unwrap();
        let exact = hilbert_modulus(1.0);
        assert!((exact - 0.1340).abs() < 1e-4);
        assert!(v >= exact - 1e-9, "estimate {v} undershoots {exact}");
        assert!(v - exact < 2e-2, "estimate {v} too far from {exact}");

        for p in [1.5, 2.0, 4.0] {
            assert!(lp_uc_modulus_estimate(p, 0.01, 64, 3).unwrap() < 0.05);
        }
        assert!(lp_uc_modulus_estimate(1.0, 0.5, 8, 0).is_err());
        assert!(lp_uc_modulus_estimate(2.0, 2.5, 8, 0).is_err());
    }

    #[test]
    fn modulus_is_deterministic_across_strategies() {
        let s = space1();
        let spec = FiberSpec::euclidean(2);
        let a = modulus_estimate_on(&s, spec, 3.0, 1.0, 64, 11, Exec::Sequential).unwrap();
        let b = modulus_estimate_on(&s, spec, 3.0, 1.0, 64, 11, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
