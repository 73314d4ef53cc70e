//! Random asymptotically nonexpansive self-maps of a convex body, their
//! certificate sequences {η_m}, and Mann iteration.
//!
//! Every built-in map acts fiber by fiber with per-atom parameters, so it
//! commutes with gluing along any partition (σ-stability) exactly.

use serde::Serialize;

use crate::body::ConvexBody;
use crate::element::{glue, RNElement};
use crate::error::{ensure_len, Error, Result};
use crate::exec::{item_rng, Exec};
use crate::measure::{L0Real, Partition};

/// Horizon on which η_m → 1 is checked at construction.
pub const ETA_HORIZON: usize = 64;
/// Allowed max-atom |η_M − 1| at the horizon.
pub const ETA_TOL: f64 = 1e-6;
/// Slack added to the right-hand side of certificate inequalities.
pub const CERTIFY_SLACK: f64 = 1e-9;

/// A certificate sequence {η_m, m ≥ 1} in L⁰₊.
#[derive(Debug, Clone, PartialEq)]
pub enum EtaSequence {
    /// η_m ≡ 1
    Unit { atoms: usize },
    /// η_m = 1 + a·r^m
    Decaying { amplitude: L0Real, ratio: L0Real },
    /// η_m = b^m; converges only where b = 1
    Geometric { base: L0Real },
    /// η_m = max(1, |c|^{m−1}·L)
    ShearDecay { lipschitz: L0Real, decay: L0Real },
    /// Given terms for m = 1..=len, then 1
    Explicit { terms: Vec<L0Real> },
    /// Different certificates on the pieces of a partition
    Glued { partition: Partition, parts: Vec<EtaSequence> },
}

impl EtaSequence {
    pub fn atom_count(&self) -> usize {
        match self {
            EtaSequence::Unit { atoms } => *atoms,
            EtaSequence::Decaying { amplitude, .. } => amplitude.len(),
            EtaSequence::Geometric { base } => base.len(),
            EtaSequence::ShearDecay { lipschitz, .. } => lipschitz.len(),
            EtaSequence::Explicit { terms } => terms.first().map_or(0, L0Real::len),
            EtaSequence::Glued { partition, .. } => partition.atom_count(),
        }
    }

    /// η_m for m ≥ 1.
    pub fn term(&self, m: usize) -> L0Real {
        assert!(m >= 1, "certificate terms start at m = 1");
        match self {
            EtaSequence::Unit { atoms } => L0Real::constant(*atoms, 1.0),
            EtaSequence::Decaying { amplitude, ratio } => amplitude
                .zip_with(ratio, |a, r| 1.0 + a * r.powi(m as i32))
                .expect("same atoms"),
            EtaSequence::Geometric { base } => base.map(|b| b.powi(m as i32)),
            EtaSequence::ShearDecay { lipschitz, decay } => lipschitz
                .zip_with(decay, |l, c| (c.abs().powi(m as i32 - 1) * l).max(1.0))
                .expect("same atoms"),
            EtaSequence::Explicit { terms } => terms
                .get(m - 1)
                .cloned()
                .unwrap_or_else(|| L0Real::constant(self.atom_count(), 1.0)),
            EtaSequence::Glued { partition, parts } => {
                let labels = partition.labels();
                let values = parts.iter().map(|p| p.term(m)).collect::<Vec<_>>();
                L0Real::new(
                    labels
                        .iter()
                        .enumerate()
                        .map(|(atom, &piece)| values[piece].get(atom))
                        .collect(),
                )
                .expect("finite terms")
            }
        }
    }

    /// η_1, …, η_horizon
    pub fn terms(&self, horizon: usize) -> Vec<L0Real> {
        (1..=horizon).map(|m| self.term(m)).collect()
    }
}

/// Built-in self-map constructors.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Identity,
    /// x ↦ a + α(x − a), per-atom factor α ≥ 0.
    Homothety { factor: L0Real, anchor: RNElement },
    /// x ↦ P_G(c + γ·R_φ(x − c)) with c the body centre and R_φ a rotation of
    /// the first two coordinates by a per-atom angle. Needs Euclidean fibers.
    RotationProjection { angle: L0Real, gain: f64 },
    /// x ↦ a + A(x − a), A(v) = (0, k·v₁ + c·v₂, c·v₃, …, c·v_d), per-atom k, c.
    /// A is not nonexpansive once ‖(k, c)‖_{q*} > 1, but ‖A^m‖ → 0 when |c| < 1.
    EventuallyContractive { shear: L0Real, decay: L0Real, anchor: RNElement },
    /// `parts[i]` on piece i of `partition`.
    Glued { partition: Partition, parts: Vec<MapKind> },
    /// u ↦ f(u + u₀) − u₀, where f acts on the body translated back by u₀.
    Translated { offset: RNElement, inner: Box<MapKind> },
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            MapKind::Identity => "identity",
            MapKind::Homothety { .. } => "homothety",
            MapKind::RotationProjection { .. } => "rotation-projection",
            MapKind::EventuallyContractive { .. } => "eventually-contractive",
            MapKind::Glued { .. } => "glued",
            MapKind::Translated { .. } => "translated",
        }
    }

    fn validate(&self, body: &ConvexBody) -> Result<()> {
        let n = body.atom_count();
        let spec = body.spec();
        match self {
            MapKind::Identity => Ok(()),
            MapKind::Homothety { factor, anchor } => {
                ensure_len(n, factor.len())?;
                ensure_len(n, anchor.atom_count())?;
                ensure_len(spec.dim, anchor.dim())?;
                if factor.min_value() < 0.0 {
                    return Err(Error::domain("homothety factor must be nonnegative"));
                }
                Ok(())
            }
            MapKind::RotationProjection { angle, gain } => {
                ensure_len(n, angle.len())?;
                if !spec.is_euclidean() || spec.dim < 2 {
                    return Err(Error::Unsupported(
                        "rotation maps need Euclidean fibers of dimension >= 2".into(),
                    ));
                }
                if !(*gain >= 0.0 && gain.is_finite()) {
                    return Err(Error::domain("rotation gain must be finite and nonnegative"));
                }
                Ok(())
            }
            MapKind::EventuallyContractive { shear, decay, anchor } => {
                ensure_len(n, shear.len())?;
                ensure_len(n, decay.len())?;
                ensure_len(n, anchor.atom_count())?;
                ensure_len(spec.dim, anchor.dim())?;
                if spec.dim < 2 {
                    return Err(Error::Unsupported(
                        "eventually contractive maps need fibers of dimension >= 2".into(),
                    ));
                }
                Ok(())
            }
            MapKind::Glued { partition, parts } => {
                ensure_len(n, partition.atom_count())?;
                if partition.len() != parts.len() {
                    return Err(Error::domain(format!(
                        "glued map has {} pieces but {} parts",
                        partition.len(),
                        parts.len()
                    )));
                }
                parts.iter().try_for_each(|p| p.validate(body))
            }
            MapKind::Translated { offset, inner } => {
                ensure_len(n, offset.atom_count())?;
                inner.validate(&body.translate(&offset.scale(-1.0))?)
            }
        }
    }

    /// Evaluates the map on `x` with `body` as its domain.
    pub fn apply(&self, body: &ConvexBody, x: &RNElement) -> RNElement {
        match self {
            MapKind::Identity => x.clone(),
            MapKind::Homothety { factor, anchor } => x.map_fibers(|atom, src, dst| {
                let a = anchor.fiber(atom);
                let alpha = factor.get(atom);
                for k in 0..src.len() {
                    dst[k] = a[k] + alpha * (src[k] - a[k]);
                }
            }),
            MapKind::RotationProjection { angle, gain } => {
                let c = body.center();
                let moved = x.map_fibers(|atom, src, dst| {
                    let cf = c.fiber(atom);
                    let (s, co) = angle.get(atom).sin_cos();
                    let (v0, v1) = (src[0] - cf[0], src[1] - cf[1]);
                    dst[0] = cf[0] + gain * (co * v0 - s * v1);
                    dst[1] = cf[1] + gain * (s * v0 + co * v1);
                    for k in 2..src.len() {
                        dst[k] = cf[k] + gain * (src[k] - cf[k]);
                    }
                });
                body.project(&moved).expect("validated Euclidean body")
            }
            MapKind::EventuallyContractive { shear, decay, anchor } => {
                x.map_fibers(|atom, src, dst| {
                    let a = anchor.fiber(atom);
                    let (k, c) = (shear.get(atom), decay.get(atom));
                    dst[0] = a[0];
                    dst[1] = a[1] + k * (src[0] - a[0]) + c * (src[1] - a[1]);
                    for j in 2..src.len() {
                        dst[j] = a[j] + c * (src[j] - a[j]);
                    }
                })
            }
            MapKind::Glued { partition, parts } => {
                let images: Vec<RNElement> = parts.iter().map(|p| p.apply(body, x)).collect();
                glue(partition, &images).expect("validated glued map")
            }
            MapKind::Translated { offset, inner } => {
                let original = body
                    .translate(&offset.scale(-1.0))
                    .expect("validated translation");
                &inner.apply(&original, &(x + offset)) - offset
            }
        }
    }

    /// The certificate each constructor satisfies by construction.
    pub fn natural_certificate(&self, body: &ConvexBody) -> EtaSequence {
        let n = body.atom_count();
        match self {
            MapKind::Identity => EtaSequence::Unit { atoms: n },
            MapKind::Homothety { factor, .. } => {
                if factor.max_value() <= 1.0 {
                    EtaSequence::Unit { atoms: n }
                } else {
                    EtaSequence::Geometric {
                        base: factor.map(|a| a.max(1.0)),
                    }
                }
            }
            MapKind::RotationProjection { gain, .. } => {
                if *gain <= 1.0 {
                    EtaSequence::Unit { atoms: n }
                } else {
                    EtaSequence::Geometric {
                        base: L0Real::constant(n, *gain),
                    }
                }
            }
            MapKind::EventuallyContractive { shear, decay, .. } => {
                let dual = body.spec().dual_exponent();
                let lipschitz = shear
                    .zip_with(decay, |k, c| crate::element::lq_norm(&[k, c], dual))
                    .expect("same atoms");
                EtaSequence::ShearDecay {
                    lipschitz,
                    decay: decay.abs(),
                }
            }
            MapKind::Glued { partition, parts } => EtaSequence::Glued {
                partition: partition.clone(),
                parts: parts.iter().map(|p| p.natural_certificate(body)).collect(),
            },
            MapKind::Translated { offset, inner } => {
                let original = body
                    .translate(&offset.scale(-1.0))
                    .expect("validated translation");
                inner.natural_certificate(&original)
            }
        }
    }

    /// A fixed point known from the construction, when it is the only one.
    pub fn known_fixed_point(&self, body: &ConvexBody) -> Option<RNElement> {
        match self {
            MapKind::Identity => None,
            MapKind::Homothety { factor, anchor } => {
                (factor.max_value() < 1.0).then(|| anchor.clone())
            }
            MapKind::RotationProjection { gain, .. } => {
                let planar_rotation = *gain == 1.0
                    && body.is_ball()
                    && body.spec().dim == 2
                    && !self.has_zero_angle();
                (*gain < 1.0 || planar_rotation).then(|| body.center())
            }
            MapKind::EventuallyContractive { decay, anchor, .. } => {
                (decay.abs().max_value() < 1.0).then(|| anchor.clone())
            }
            MapKind::Glued { partition, parts } => {
                let points: Option<Vec<RNElement>> =
                    parts.iter().map(|p| p.known_fixed_point(body)).collect();
                points.map(|pts| glue(partition, &pts).expect("validated glued map"))
            }
            MapKind::Translated { offset, inner } => {
                let original = body.translate(&offset.scale(-1.0)).ok()?;
                inner
                    .known_fixed_point(&original)
                    .map(|p| &p - offset)
            }
        }
    }

    fn has_zero_angle(&self) -> bool {
        match self {
            MapKind::RotationProjection { angle, .. } => angle
                .values()
                .iter()
                .any(|a| a.rem_euclid(std::f64::consts::TAU).abs() < 1e-12),
            _ => false,
        }
    }
}

/// A random asymptotically nonexpansive self-map of `domain` with its
/// certificate {η_m}.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticMap {
    domain: ConvexBody,
    kind: MapKind,
    eta: EtaSequence,
    asymptotic: bool,
}

impl AsymptoticMap {
    /// Validates the map and checks η_m ≥ 0 and max-atom |η_M − 1| ≤ 1e-6 at
    /// M = [`ETA_HORIZON`].
    pub fn new(domain: ConvexBody, kind: MapKind, eta: EtaSequence) -> Result<Self> {
        let map = Self::finite_horizon(domain, kind, eta)?;
        check_eta_convergence(&map.eta, ETA_HORIZON)?;
        Ok(Self {
            asymptotic: true,
            ..map
        })
    }

    pub fn with_natural_certificate(domain: ConvexBody, kind: MapKind) -> Result<Self> {
        let eta = kind.natural_certificate(&domain);
        Self::new(domain, kind, eta)
    }

    /// A map whose certificate is only claimed up to a finite horizon, so
    /// η_m → 1 is not required. The partition engine rejects these.
    pub fn finite_horizon(domain: ConvexBody, kind: MapKind, eta: EtaSequence) -> Result<Self> {
        kind.validate(&domain)?;
        ensure_len(domain.atom_count(), eta.atom_count())?;
        for m in 1..=ETA_HORIZON {
            let term = eta.term(m);
            if let Some(atom) = term.values().iter().position(|&v| v < 0.0) {
                return Err(Error::domain(format!("eta_{m} is negative at atom {atom}")));
            }
        }
        Ok(Self {
            domain,
            kind,
            eta,
            asymptotic: false,
        })
    }

    pub fn domain(&self) -> &ConvexBody {
        &self.domain
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn eta(&self) -> &EtaSequence {
        &self.eta
    }

    pub fn is_asymptotic(&self) -> bool {
        self.asymptotic
    }

    /// Every built-in map is fiber-local and therefore σ-stable.
    pub fn is_sigma_stable(&self) -> bool {
        true
    }

    pub fn apply(&self, x: &RNElement) -> RNElement {
        self.kind.apply(&self.domain, x)
    }

    /// f^m(x)
    pub fn iterate(&self, x: &RNElement, m: usize) -> RNElement {
        (0..m).fold(x.clone(), |acc, _| self.apply(&acc))
    }

    pub fn known_fixed_point(&self) -> Option<RNElement> {
        self.kind.known_fixed_point(&self.domain)
    }

    /// Conjugates by u ↦ u − offset: the result acts on G − offset with the
    /// same certificate.
    pub fn translated(&self, offset: &RNElement) -> Result<Self> {
        let domain = self.domain.translate(offset)?;
        let kind = match &self.kind {
            MapKind::Translated { offset: prior, inner } => MapKind::Translated {
                offset: prior + offset,
                inner: inner.clone(),
            },
            other => MapKind::Translated {
                offset: offset.clone(),
                inner: Box::new(other.clone()),
            },
        };
        Ok(Self {
            domain,
            kind,
            eta: self.eta.clone(),
            asymptotic: self.asymptotic,
        })
    }
}

pub(crate) fn check_eta_convergence(eta: &EtaSequence, horizon: usize) -> Result<()> {
    let last = eta.term(horizon);
    for (atom, &v) in last.values().iter().enumerate() {
        let deviation = (v - 1.0).abs();
        if deviation > ETA_TOL {
            return Err(Error::NonConvergence { atom, deviation });
        }
    }
    Ok(())
}

/// One failed instance of ‖f^m x − f^m y‖ ≤ η_m‖x − y‖.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub sample: usize,
    pub m: usize,
    pub atom: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub horizon: usize,
    pub samples: usize,
    pub violation_count: usize,
    /// First violations, in (sample, m, atom) order.
    pub violations: Vec<Violation>,
    /// Samples whose image left the domain.
    pub escapes: usize,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

const MAX_RECORDED_VIOLATIONS: usize = 32;

/// Checks the defining inequality on seeded sample pairs from the domain for
/// m = 1..=horizon. Violations are reported, not raised.
pub fn certify(f: &AsymptoticMap, horizon: usize, samples: usize, seed: u64) -> CertificateReport {
    certify_with(f, horizon, samples, seed, Exec::default())
}

pub fn certify_with(
    f: &AsymptoticMap,
    horizon: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> CertificateReport {
    let eta = f.eta.terms(horizon);
    let per_sample = exec.map_indexed(samples, |sample| {
        let mut rng = item_rng(seed, sample);
        let x = f.domain.sample(&mut rng);
        let y = f.domain.sample(&mut rng);
        let base = (&x - &y).l0_norm();
        let mut found = Vec::new();
        let (mut fx, mut fy) = (x.clone(), y.clone());
        let mut escaped = false;
        for (m, eta_m) in (1..=horizon).zip(&eta) {
            fx = f.apply(&fx);
            fy = f.apply(&fy);
            if m == 1 {
                escaped = !f.domain.contains(&fx, 1e-9) || !f.domain.contains(&fy, 1e-9);
            }
            let gap = (&fx - &fy).l0_norm();
            for atom in 0..x.atom_count() {
                let rhs = eta_m.get(atom) * base.get(atom) + CERTIFY_SLACK;
                if gap.get(atom) > rhs {
                    found.push((m, atom, gap.get(atom), rhs));
                }
            }
        }
        (x, y, found, escaped)
    });

    let mut report = CertificateReport {
        horizon,
        samples,
        violation_count: 0,
        violations: Vec::new(),
        escapes: 0,
    };
    for (sample, (x, y, found, escaped)) in per_sample.into_iter().enumerate() {
        report.escapes += usize::from(escaped);
        report.violation_count += found.len();
        for (m, atom, lhs, rhs) in found {
            if report.violations.len() < MAX_RECORDED_VIOLATIONS {
                report.violations.push(Violation {
                    sample,
                    m,
                    atom,
                    lhs,
                    rhs,
                    x: x.to_fibers(),
                    y: y.to_fibers(),
                });
            }
        }
    }
    report
}

/// Mixing coefficients c_n ∈ [0, 1] for Mann iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Schedule {
    Constant(f64),
    /// c_n = start / (n + 1)^power, n = 0, 1, …
    Decreasing { start: f64, power: f64 },
    Explicit(Vec<f64>),
}

impl Schedule {
    pub fn coefficients(&self, steps: usize) -> Result<Vec<f64>> {
        let coeffs: Vec<f64> = match self {
            Schedule::Constant(c) => vec![*c; steps],
            Schedule::Decreasing { start, power } => (0..steps)
                .map(|n| start / ((n + 1) as f64).powf(*power))
                .collect(),
            Schedule::Explicit(values) => {
                if values.len() < steps {
                    return Err(Error::domain(format!(
                        "schedule has {} coefficients but {steps} steps were requested",
                        values.len()
                    )));
                }
                values[..steps].to_vec()
            }
        };
        if let Some(n) = coeffs.iter().position(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::domain(format!(
                "schedule coefficient c_{n} = {} lies outside [0, 1]",
                coeffs[n]
            )));
        }
        Ok(coeffs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iterates: Vec<RNElement>,
    /// ‖x_n − f(x_n)‖ for every iterate.
    pub residuals: Vec<L0Real>,
    pub schedule: Vec<f64>,
}

/// x_{n+1} = c_n f(x_n) + (1 − c_n) x_n
pub fn mann_iterate(
    f: &AsymptoticMap,
    x0: &RNElement,
    schedule: &Schedule,
    steps: usize,
) -> Result<IterationTrace> {
    if !f.domain.contains(x0, 1e-9) {
        return Err(Error::precondition("starting point lies outside the domain"));
    }
    let coeffs = schedule.coefficients(steps)?;
    let mut iterates = Vec::with_capacity(steps + 1);
    let mut residuals = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    for &c in &coeffs {
        let fx = f.apply(&x);
        residuals.push((&x - &fx).l0_norm());
        let next = x.lerp(&fx, c);
        iterates.push(std::mem::replace(&mut x, next));
    }
    residuals.push(residual(f, &x));
    iterates.push(x);
    Ok(IterationTrace {
        iterates,
        residuals,
        schedule: coeffs,
    })
}

/// ‖x − f(x)‖
pub fn residual(f: &AsymptoticMap, x: &RNElement) -> L0Real {
    (x - &f.apply(x)).l0_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::FiberSpec;
    use crate::measure::AtomicSpace;
    use std::sync::Arc;

    fn space3() -> Arc<AtomicSpace> {
        Arc::new(AtomicSpace::new(vec![0.5, 0.3, 0.2]).unwrap())
    }

    fn ball(radius: f64) -> ConvexBody {
        ConvexBody::centered_ball(space3(), FiberSpec::euclidean(2), radius).unwrap()
    }

    fn halving(body: ConvexBody) -> AsymptoticMap {
        let n = body.atom_count();
        let anchor = RNElement::zero(body.space().clone(), body.spec());
        AsymptoticMap::with_natural_certificate(
            body,
            MapKind::Homothety {
                factor: L0Real::constant(n, 0.5),
                anchor,
            },
        )
        .unwrap()
    }

    #[test]
    fn certify_examples() {
        let f = halving(ball(3.0));
        assert!(certify(&f, 8, 32, 1).passed());

        let g = ball(3.0);
        let doubling = AsymptoticMap::new(
            g.clone(),
            MapKind::Homothety {
                factor: L0Real::constant(3, 2.0),
                anchor: RNElement::zero(g.space().clone(), g.spec()),
            },
            EtaSequence::Unit { atoms: 3 },
        )
        .unwrap();
        let report = certify(&doubling, 4, 8, 2);
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.m == 1));

        let rho = 0.1;
        let rot = AsymptoticMap::finite_horizon(
            g.clone(),
            MapKind::RotationProjection {
                angle: L0Real::new(vec![0.3, 1.0, -2.0]).unwrap(),
                gain: 1.0 + rho,
            },
            EtaSequence::Geometric {
                base: L0Real::constant(3, 1.0 + rho),
            },
        )
        .unwrap();
        let report = certify(&rot, 16, 32, 3);
        assert!(report.passed(), "{:?}", report.violations.first());
        assert_eq!(report.escapes, 0);
    }

    #[test]
    fn geometric_certificate_is_not_asymptotic() {
        let g = ball(1.0);
        let kind = MapKind::RotationProjection {
            angle: L0Real::constant(3, 0.5),
            gain: 1.1,
        };
        assert!(matches!(
            AsymptoticMap::with_natural_certificate(g, kind),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn eventually_contractive_certificate() {
        let s = space3();
        let spec = FiberSpec::new(3, 3.0).unwrap();
        let shear = L0Real::new(vec![1.2, 0.8, 2.0]).unwrap();
        let decay = L0Real::new(vec![0.5, 0.3, 0.6]).unwrap();
        let lower = RNElement::constant(s.clone(), spec, &[-1.0, -6.0, -1.0]).unwrap();
        let upper = RNElement::constant(s.clone(), spec, &[1.0, 6.0, 1.0]).unwrap();
        let body = ConvexBody::cube(lower, upper).unwrap();
        let f = AsymptoticMap::with_natural_certificate(
            body,
            MapKind::EventuallyContractive {
                shear,
                decay,
                anchor: RNElement::zero(s, spec),
            },
        )
        .unwrap();
        assert!(f.eta().term(1).max_value() > 1.5);
        let report = certify(&f, 12, 64, 5);
        assert!(report.passed(), "{:?}", report.violations.first());
        assert_eq!(report.escapes, 0);
    }

    #[test]
    fn certify_is_strategy_independent() {
        let f = halving(ball(2.0));
        let a = certify_with(&f, 6, 40, 9, Exec::Sequential);
        let b = certify_with(&f, 6, 40, 9, Exec::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn mann_examples() {
        let g = ball(2.0);
        let x0 = RNElement::from_fibers(g.space().clone(), g.spec(), &[vec![1., 1.], vec![0., -1.], vec![0.5, 0.]])
            .unwrap();

        let id = AsymptoticMap::with_natural_certificate(g.clone(), MapKind::Identity).unwrap();
        let trace = mann_iterate(&id, &x0, &Schedule::Constant(0.5), 10).unwrap();
        assert_eq!(trace.iterates.len(), 11);
        assert_eq!(trace.residuals.len(), 11);
        assert!(trace.iterates.iter().all(|x| *x == x0));
        assert!(trace.residuals.iter().all(|r| r.max_value() == 0.0));

        let f = halving(g.clone());
        let trace = mann_iterate(&f, &x0, &Schedule::Constant(0.5), 20).unwrap();
        for w in trace.iterates.windows(2) {
            assert!(w[1].max_abs_diff(&w[0].scale(0.75)) < 1e-15);
        }
        for w in trace.residuals.windows(3) {
            let ratio = w[2].values()[0] / w[0].values()[0];
            assert!((ratio - 0.5625).abs() < 1e-12);
        }

        let trace = mann_iterate(&f, &x0, &Schedule::Constant(0.0), 5).unwrap();
        assert!(trace.iterates.iter().all(|x| *x == x0));

        let outside = x0.scale(10.0);
        assert!(matches!(
            mann_iterate(&f, &outside, &Schedule::Constant(0.5), 3),
            Err(Error::Precondition(_))
        ));
        assert!(mann_iterate(&f, &x0, &Schedule::Constant(1.5), 3).is_err());
    }

    #[test]
    fn residual_examples() {
        let f = halving(ball(10.0));
        let zero = RNElement::zero(f.domain().space().clone(), f.domain().spec());
        assert_eq!(residual(&f, &zero).values(), &[0.0, 0.0, 0.0]);
        let x = RNElement::from_fibers(zero.space().clone(), zero.spec(), &[vec![2., 0.], vec![0., 0.], vec![0., 4.]])
            .unwrap();
        assert_eq!(residual(&f, &x).values(), &[1.0, 0.0, 2.0]);
    }

    #[test]
    fn residual_commutes_with_equal_weight_relabeling() {
        let s = Arc::new(AtomicSpace::uniform(3));
        let spec = FiberSpec::euclidean(2);
        let body = ConvexBody::centered_ball(s.clone(), spec, 5.0).unwrap();
        let f = AsymptoticMap::with_natural_certificate(
            body,
            MapKind::Homothety {
                factor: L0Real::constant(3, 0.3),
                anchor: RNElement::zero(s.clone(), spec),
            },
        )
        .unwrap();
        let fibers = vec![vec![1., 2.], vec![-3., 0.5], vec![0., 4.]];
        let perm = [2, 0, 1];
        let x = RNElement::from_fibers(s.clone(), spec, &fibers).unwrap();
        let px = RNElement::from_fibers(s, spec, &perm.map(|i| fibers[i].clone())).unwrap();
        let r = residual(&f, &x);
        let pr = residual(&f, &px);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(pr.get(k), r.get(i));
        }
    }

    #[test]
    fn translation_composes() {
        let g = ball(1.0);
        let s = g.space().clone();
        let spec = g.spec();
        let f = AsymptoticMap::with_natural_certificate(
            g,
            MapKind::RotationProjection {
                angle: L0Real::constant(3, 0.7),
                gain: 0.9,
            },
        )
        .unwrap();
        let u0 = RNElement::constant(s.clone(), spec, &[0.2, -0.1]).unwrap();
        let u1 = RNElement::constant(s.clone(), spec, &[-0.3, 0.4]).unwrap();
        let twice = f.translated(&u0).unwrap().translated(&u1).unwrap();
        let once = f.translated(&(&u0 + &u1)).unwrap();
        let x = RNElement::constant(s, spec, &[-0.4, 0.1]).unwrap();
        assert!(twice.apply(&x).max_abs_diff(&once.apply(&x)) < 1e-14);
        assert_eq!(twice.domain(), once.domain());
    }
}
