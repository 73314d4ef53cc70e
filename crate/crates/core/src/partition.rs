//! Decomposition of a random asymptotically nonexpansive map into classical
//! asymptotically nonexpansive maps on the pieces of a finite partition.
//!
//! The pieces are built in three stages: atoms are grouped so that η_m → 1
//! uniformly on each group, each group is split by the integer part of
//! sup_{m ≤ m_k} η_m, and finally by the integer part of the body bound ξ.
//! On a piece A the induced map u ↦ Ĩ_A f(u) has Lipschitz constants
//! β_m = max_A η_m in every Lᵖ(E) norm.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::body::ConvexBody;
use crate::duality::lp_norm;
use crate::dynamics::{AsymptoticMap, CERTIFY_SLACK, ETA_TOL};
use crate::element::{glue, RNElement};
use crate::error::{Error, Result};
use crate::exec::{item_rng, Exec};
use crate::measure::{L0Real, MeasurableSet, Partition};

/// Max-atom |η_horizon − 1| beyond which the Egoroff step gives up.
pub const EGOROFF_TOL: f64 = 1e-3;

/// Reconstruction tolerance for the recomposition identity.
pub const RECOMPOSITION_TOL: f64 = 1e-12;

/// One piece A_i = C_n ∩ H_{k,j} with its classical constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceData {
    #[serde(serialize_with = "serialize_set")]
    pub piece: MeasurableSet,
    /// Integer n_i with ‖x‖ ≤ n_i on the piece for every x ∈ Ĩ_{A_i}G.
    pub norm_bound: u64,
    /// β_m = max over the piece of η_m, for m = 1..=horizon.
    pub beta: Vec<f64>,
    /// Index k of the uniform-convergence group.
    pub group: usize,
    /// m_k used for the H-bins of this group.
    pub m_k: usize,
    /// j with j − 1 ≤ sup_{m ≤ m_k} η_m < j.
    pub eta_bin: usize,
    /// n with n − 1 ≤ ξ < n.
    pub bound_bin: usize,
}

fn serialize_set<S: serde::Serializer>(set: &MeasurableSet, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(set.atoms())
}

/// Groups atoms so that η_m → 1 uniformly on each group.
///
/// Atoms are binned by ⌊max_{m ≤ horizon} m·|η_m − 1|⌋; on a bin with index b
/// this gives |η_m − 1| < (b + 1)/m for every atom and every m ≤ horizon.
pub fn egoroff_pieces(eta: &[L0Real], horizon: usize) -> Result<Partition> {
    if horizon == 0 {
        return Err(Error::domain("horizon must be at least 1"));
    }
    if eta.len() < horizon {
        return Err(Error::domain(format!(
            "certificate has {} terms but the horizon is {horizon}",
            eta.len()
        )));
    }
    let last = &eta[horizon - 1];
    if let Some((atom, deviation)) = last
        .values()
        .iter()
        .map(|v| (v - 1.0).abs())
        .enumerate()
        .find(|(_, dev)| *dev > EGOROFF_TOL)
    {
        return Err(Error::NonConvergence { atom, deviation });
    }
    let atoms = last.len();
    let rates: Vec<f64> = (0..atoms)
        .map(|a| {
            (1..=horizon)
                .map(|m| m as f64 * (eta[m - 1].get(a) - 1.0).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let labels: Vec<usize> = rates.iter().map(|r| r.floor() as usize).collect();
    let partition = Partition::from_labels(&labels)?;

    for piece in partition.pieces() {
        let bin = labels[piece.atoms()[0]] as f64;
        for m in 1..=horizon {
            let spread = (&eta[m - 1] - &L0Real::constant(atoms, 1.0))
                .abs()
                .max_on(piece)
                .expect("pieces are nonempty");
            if spread > (bin + 1.0) / m as f64 {
                return Err(Error::domain(format!(
                    "group with rate bin {bin} is not uniform at m = {m}"
                )));
            }
        }
    }
    Ok(partition)
}

/// Builds the pieces C_n ∩ H_{k,j} for `f` on its own domain.
pub fn lemma31_partition(f: &AsymptoticMap, horizon: usize) -> Result<Vec<PieceData>> {
    let eta = f.eta().terms(horizon);
    let groups = egoroff_pieces(&eta, horizon)?;
    let xi = f.domain().bound();
    let atoms = xi.len();

    let mut pieces = Vec::new();
    for (k, group) in groups.pieces().iter().enumerate() {
        let m_k = (1..=horizon)
            .find(|&m| {
                group
                    .atoms()
                    .into_iter()
                    .all(|a| (eta[m - 1].get(a) - 1.0).abs() <= 1.0)
            })
            .unwrap_or(horizon);

        // (j, n) -> atoms, ordered by j then n
        let mut bins: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for a in group.atoms() {
            let sup_eta = eta[..m_k].iter().map(|e| e.get(a)).fold(f64::NEG_INFINITY, f64::max);
            let j = sup_eta.floor() as usize + 1;
            let n = xi.get(a).floor() as usize + 1;
            bins.entry((j, n)).or_default().push(a);
        }
        for ((j, n), members) in bins {
            let piece = MeasurableSet::from_atoms(atoms, &members)?;
            let beta = eta
                .iter()
                .map(|e| e.max_on(&piece).expect("nonempty piece"))
                .collect();
            let top = xi.max_on(&piece).expect("nonempty piece");
            pieces.push(PieceData {
                piece,
                norm_bound: (top.ceil() as u64).max(1),
                beta,
                group: k,
                m_k,
                eta_bin: j,
                bound_bin: n,
            });
        }
    }
    Ok(pieces)
}

/// The partition formed by the pieces.
pub fn pieces_partition(pieces: &[PieceData]) -> Result<Partition> {
    Partition::new(pieces.iter().map(|p| p.piece.clone()).collect())
}

/// Checks the per-piece invariants: the norm bound dominates the restricted
/// body and β is the exact piece maximum of η with β_horizon → 1.
pub fn verify_piece(f: &AsymptoticMap, pd: &PieceData) -> Result<()> {
    let restricted = f.domain().restrict(&pd.piece);
    let top = restricted.bound().max_value();
    if top > pd.norm_bound as f64 {
        return Err(Error::domain(format!(
            "norm bound {} below body bound {top}",
            pd.norm_bound
        )));
    }
    for (m, &b) in (1..).zip(&pd.beta) {
        let exact = f.eta().term(m).max_on(&pd.piece).expect("nonempty piece");
        if b != exact {
            return Err(Error::domain(format!("beta_{m} = {b} but max eta_{m} = {exact}")));
        }
    }
    match pd.beta.last() {
        Some(last) if (last - 1.0).abs() <= ETA_TOL => Ok(()),
        Some(last) => Err(Error::domain(format!("beta at the horizon is {last}, not 1"))),
        None => Err(Error::domain("empty beta sequence")),
    }
}

/// f_i on Ĩ_A G, acting by Ĩ_A x ↦ Ĩ_A f(x).
///
/// An argument u ∈ Ĩ_A G is lifted to a member of G by filling the atoms off A
/// with the body centre; σ-stability makes the result independent of the fill.
#[derive(Debug, Clone)]
pub struct InducedMap<'a> {
    map: &'a AsymptoticMap,
    piece: MeasurableSet,
    lift: Partition,
    filler: RNElement,
}

const WELL_DEFINED_PROBES: usize = 8;

/// Builds f_i for `piece` and spot-checks that it is well defined.
pub fn induced_map<'a>(f: &'a AsymptoticMap, piece: &MeasurableSet) -> Result<InducedMap<'a>> {
    let filler = f.domain().center();
    let lift = if piece.cardinality() == piece.atom_count() {
        Partition::trivial(piece.atom_count())
    } else {
        Partition::new(vec![piece.clone(), piece.complement()])?
    };
    let induced = InducedMap {
        map: f,
        piece: piece.clone(),
        lift,
        filler,
    };
    for probe in 0..WELL_DEFINED_PROBES {
        let mut rng = item_rng(0x5_eed0_f1f7, probe);
        let x = f.domain().sample(&mut rng);
        let other_fill = f.domain().sample(&mut rng);
        let direct = f.apply(&x).restrict(piece);
        let via_center = induced.apply(&x.restrict(piece));
        let via_other = f.apply(&induced.lift_with(&x.restrict(piece), &other_fill)).restrict(piece);
        if direct != via_center || direct != via_other {
            return Err(Error::SigmaStability(format!(
                "induced map depends on values off the piece (probe {probe})"
            )));
        }
    }
    Ok(induced)
}

impl InducedMap<'_> {
    pub fn piece(&self) -> &MeasurableSet {
        &self.piece
    }

    /// Ĩ_A G as a body.
    pub fn restricted_body(&self) -> ConvexBody {
        self.map.domain().restrict(&self.piece)
    }

    fn lift_with(&self, u: &RNElement, fill: &RNElement) -> RNElement {
        if self.lift.len() == 1 {
            return u.clone();
        }
        glue(&self.lift, &[u.clone(), fill.clone()]).expect("compatible shapes")
    }

    pub fn apply(&self, u: &RNElement) -> RNElement {
        self.map
            .apply(&self.lift_with(u, &self.filler))
            .restrict(&self.piece)
    }

    pub fn iterate(&self, u: &RNElement, m: usize) -> RNElement {
        (0..m).fold(u.clone(), |acc, _| self.apply(&acc))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzViolation {
    pub sample: usize,
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub checks: usize,
    pub violation_count: usize,
    pub violations: Vec<LipschitzViolation>,
    /// Largest observed ‖f_i^m u − f_i^m v‖_p / (β_m ‖u − v‖_p).
    pub worst_ratio: f64,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

/// Samples pairs in Ĩ_A G and checks ‖f_i^m u − f_i^m v‖_p ≤ β_m ‖u − v‖_p.
pub fn induced_lipschitz_check(
    f: &AsymptoticMap,
    pd: &PieceData,
    p: f64,
    horizon: usize,
    samples: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    induced_lipschitz_check_with(f, pd, p, horizon, samples, seed, Exec::default())
}

pub fn induced_lipschitz_check_with(
    f: &AsymptoticMap,
    pd: &PieceData,
    p: f64,
    horizon: usize,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<LipschitzReport> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("need 1 < p < inf, got {p}")));
    }
    if horizon > pd.beta.len() {
        return Err(Error::domain(format!(
            "piece carries {} beta terms but the horizon is {horizon}",
            pd.beta.len()
        )));
    }
    let fi = induced_map(f, &pd.piece)?;
    let outcomes = exec.map_indexed(samples, |sample| {
        let mut rng = item_rng(seed, sample);
        let u = f.domain().sample(&mut rng).restrict(&pd.piece);
        let v = f.domain().sample(&mut rng).restrict(&pd.piece);
        let base = lp_norm(&(&u - &v), p).expect("p > 1");
        let (mut fu, mut fv) = (u, v);
        let mut found = Vec::new();
        let mut worst: f64 = 0.0;
        for m in 1..=horizon {
            fu = fi.apply(&fu);
            fv = fi.apply(&fv);
            let lhs = lp_norm(&(&fu - &fv), p).expect("p > 1");
            let scale = pd.beta[m - 1] * base;
            if scale > 0.0 {
                worst = worst.max(lhs / scale);
            }
            let rhs = scale + CERTIFY_SLACK;
            if lhs > rhs {
                found.push(LipschitzViolation { sample, m, lhs, rhs });
            }
        }
        (found, worst)
    });
    let mut report = LipschitzReport {
        checks: samples * horizon,
        violation_count: 0,
        violations: Vec::new(),
        worst_ratio: 0.0,
    };
    for (found, worst) in outcomes {
        report.worst_ratio = report.worst_ratio.max(worst);
        report.violation_count += found.len();
        report.violations.extend(found.into_iter().take(8));
    }
    report.violations.truncate(32);
    Ok(report)
}

/// f(x) = Σ Ĩ_{A_i} f_i(Ĩ_{A_i} x), checked atom-wise to 1e-12.
pub fn recomposition_check(f: &AsymptoticMap, pieces: &[PieceData], x: &RNElement) -> Result<bool> {
    let partition = pieces_partition(pieces)?;
    let images = pieces
        .iter()
        .map(|pd| Ok(induced_map(f, &pd.piece)?.apply(&x.restrict(&pd.piece))))
        .collect::<Result<Vec<_>>>()?;
    let recomposed = glue(&partition, &images)?;
    Ok(recomposed.max_abs_diff(&f.apply(x)) <= RECOMPOSITION_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{EtaSequence, MapKind};
    use crate::element::FiberSpec;
    use crate::measure::AtomicSpace;
    use std::sync::Arc;

    fn l0(v: &[f64]) -> L0Real {
        L0Real::new(v.to_vec()).unwrap()
    }

    fn decaying(amplitudes: &[f64], ratios: &[f64]) -> EtaSequence {
        EtaSequence::Decaying {
            amplitude: l0(amplitudes),
            ratio: l0(ratios),
        }
    }

    #[test]
    fn egoroff_examples() {
        let unit = EtaSequence::Unit { atoms: 3 }.terms(16);
        assert_eq!(egoroff_pieces(&unit, 16).unwrap().len(), 1);

        let halves = decaying(&[1., 1., 1.], &[0.5, 0.5, 0.5]).terms(32);
        assert_eq!(egoroff_pieces(&halves, 32).unwrap().len(), 1);

        let mixed = decaying(&[1., 1., 1., 1.], &[0.5, 0.25, 0.5, 0.25]).terms(32);
        let p = egoroff_pieces(&mixed, 32).unwrap();
        assert!((1..=2).contains(&p.len()));

        // a group whose rates differ a lot gets split
        let split = decaying(&[1., 40.], &[0.5, 0.9]).terms(400);
        assert_eq!(egoroff_pieces(&split, 400).unwrap().len(), 2);

        let stuck = EtaSequence::Geometric { base: l0(&[1.0, 1.1]) }.terms(8);
        assert!(matches!(
            egoroff_pieces(&stuck, 8),
            Err(Error::NonConvergence { atom: 1, .. })
        ));
        assert!(egoroff_pieces(&unit, 0).is_err());
        assert!(egoroff_pieces(&unit, 17).is_err());
    }

    fn identity_on_box(bound: &[f64]) -> AsymptoticMap {
        let s = Arc::new(AtomicSpace::uniform(bound.len()));
        let spec = FiberSpec::new(1, 2.0).unwrap();
        let upper = RNElement::from_flat(s.clone(), spec, bound.to_vec()).unwrap();
        let body = ConvexBody::cube(RNElement::zero(s, spec), upper).unwrap();
        AsymptoticMap::with_natural_certificate(body, MapKind::Identity).unwrap()
    }

    #[test]
    fn lemma31_bound_bins() {
        let f = identity_on_box(&[0.8, 2.5, 2.5]);
        let pieces = lemma31_partition(&f, 16).unwrap();
        assert_eq!(pieces.len(), 2);
        assert_eq!(pieces[0].piece.atoms(), vec![0]);
        assert_eq!(pieces[0].norm_bound, 1);
        assert_eq!(pieces[1].piece.atoms(), vec![1, 2]);
        assert_eq!(pieces[1].norm_bound, 3);
        for pd in &pieces {
            verify_piece(&f, pd).unwrap();
        }
    }

    #[test]
    fn lemma31_eta_bins() {
        let s = Arc::new(AtomicSpace::uniform(3));
        let spec = FiberSpec::euclidean(2);
        let body = ConvexBody::centered_ball(s.clone(), spec, 0.5).unwrap();
        let f = AsymptoticMap::new(
            body,
            MapKind::Homothety {
                factor: L0Real::constant(3, 0.5),
                anchor: RNElement::zero(s, spec),
            },
            decaying(&[1., 1., 1.], &[0.5, 0.5, 0.5]),
        )
        .unwrap();
        let pieces = lemma31_partition(&f, 32).unwrap();
        assert_eq!(pieces.len(), 1);
        assert_eq!(pieces[0].eta_bin, 2);
        assert_eq!(pieces[0].m_k, 1);
        assert_eq!(pieces[0].beta[0], 1.5);
        verify_piece(&f, &pieces[0]).unwrap();
        let report = induced_lipschitz_check(&f, &pieces[0], 2.0, 32, 16, 4).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn lemma31_single_atom() {
        let f = identity_on_box(&[7.3]);
        assert_eq!(lemma31_partition(&f, 8).unwrap().len(), 1);
    }

    #[test]
    fn induced_map_examples() {
        let s = Arc::new(AtomicSpace::uniform(3));
        let spec = FiberSpec::euclidean(2);
        let body = ConvexBody::centered_ball(s.clone(), spec, 2.0).unwrap();
        let zero = RNElement::zero(s.clone(), spec);
        let halve = MapKind::Homothety {
            factor: L0Real::constant(3, 0.5),
            anchor: zero.clone(),
        };
        let rotate = MapKind::RotationProjection {
            angle: L0Real::constant(3, 1.0),
            gain: 1.0,
        };
        let a = MeasurableSet::from_atoms(3, &[0, 2]).unwrap();
        let partition = Partition::new(vec![a.clone(), a.complement()]).unwrap();
        let glued = AsymptoticMap::with_natural_certificate(
            body.clone(),
            MapKind::Glued {
                partition,
                parts: vec![halve.clone(), rotate],
            },
        )
        .unwrap();
        let g = AsymptoticMap::with_natural_certificate(body.clone(), halve).unwrap();
        let x = RNElement::from_fibers(s.clone(), spec, &[vec![1., 1.], vec![-1., 0.5], vec![0., 1.5]]).unwrap();

        let fa = induced_map(&glued, &a).unwrap();
        let u = x.restrict(&a);
        assert_eq!(fa.apply(&u), g.apply(&x).restrict(&a));

        let whole = induced_map(&glued, &MeasurableSet::full(3)).unwrap();
        assert_eq!(whole.apply(&x), glued.apply(&x));

        let id = AsymptoticMap::with_natural_certificate(body, MapKind::Identity).unwrap();
        let fid = induced_map(&id, &a).unwrap();
        assert_eq!(fid.apply(&u), u);
    }

    #[test]
    fn recomposition_examples() {
        let f = identity_on_box(&[0.8, 2.5, 2.5]);
        let pieces = lemma31_partition(&f, 8).unwrap();
        let x = f.domain().center();
        assert!(recomposition_check(&f, &pieces, &x).unwrap());
        let single = lemma31_partition(&identity_on_box(&[0.5, 0.5, 0.5]), 8).unwrap();
        assert_eq!(single.len(), 1);
        assert!(recomposition_check(&f, &single, &x).unwrap());
    }

    #[test]
    fn degenerate_pairs_pass() {
        let f = identity_on_box(&[1.0]);
        let pieces = lemma31_partition(&f, 4).unwrap();
        let report = induced_lipschitz_check(&f, &pieces[0], 2.0, 4, 4, 0).unwrap();
        assert!(report.passed());
        assert!(induced_lipschitz_check(&f, &pieces[0], 1.0, 4, 4, 0).is_err());
        assert!(induced_lipschitz_check(&f, &pieces[0], 2.0, 5, 4, 0).is_err());
    }
}
