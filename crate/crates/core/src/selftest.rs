//! Random instance generators and a quick invariant battery.
//!
//! The generators draw spaces, elements, partitions and certified maps for
//! every built-in constructor. [`run_selftest`] uses them for a fast pass
//! over the core invariants; the same generators drive the larger test
//! suites.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::Serialize;

use crate::body::ConvexBody;
use crate::convexity::{hilbert_modulus, random_uc_witness_check, ConvexityParams};
use crate::duality::{canonical_t, dual_lq_norm, lp_norm, operator_norm_oracle, HolderPair, RandomFunctional};
use crate::dynamics::{certify, certify_with, AsymptoticMap, EtaSequence, MapKind};
use crate::element::{glue, FiberSpec, RNElement};
use crate::exec::{item_rng, Exec};
use crate::measure::{AtomicSpace, L0Real, MeasurableSet, Partition};
use crate::partition::{induced_lipschitz_check, lemma31_partition, pieces_partition, recomposition_check, verify_piece};

pub const FIBER_EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

/// Space with `1..=max_atoms` atoms and random positive weights.
pub fn random_space<R: Rng + ?Sized>(rng: &mut R, max_atoms: usize) -> Arc<AtomicSpace> {
    let n = rng.random_range(1..=max_atoms.max(1));
    let masses: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    Arc::new(AtomicSpace::normalized(&masses).expect("positive masses"))
}

pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> FiberSpec {
    let dim = rng.random_range(1..=max_dim.max(1));
    let exponent = *FIBER_EXPONENTS.choose(rng).expect("nonempty");
    FiberSpec::new(dim, exponent).expect("valid spec")
}

/// Coordinates uniform in [−scale, scale]; each fiber is zero with
/// probability 0.1.
pub fn random_element<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<AtomicSpace>,
    spec: FiberSpec,
    scale: f64,
) -> RNElement {
    RNElement::zero(space.clone(), spec).map_fibers(|_, _, dst| {
        if rng.random_bool(0.1) {
            return;
        }
        for v in dst.iter_mut() {
            *v = rng.random_range(-scale..=scale);
        }
    })
}

pub fn random_l0<R: Rng + ?Sized>(rng: &mut R, atoms: usize, lo: f64, hi: f64) -> L0Real {
    L0Real::new((0..atoms).map(|_| rng.random_range(lo..=hi)).collect()).expect("finite")
}

pub fn random_set<R: Rng + ?Sized>(rng: &mut R, atoms: usize) -> MeasurableSet {
    MeasurableSet::from_flags((0..atoms).map(|_| rng.random_bool(0.5)).collect())
}

/// Partition with at most `max_pieces` pieces.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, atoms: usize, max_pieces: usize) -> Partition {
    let labels: Vec<usize> = (0..atoms).map(|_| rng.random_range(0..max_pieces.max(1))).collect();
    Partition::from_labels(&labels).expect("labels cover every atom")
}

pub fn random_functional<R: Rng + ?Sized>(
    rng: &mut R,
    space: &Arc<AtomicSpace>,
    spec: FiberSpec,
) -> RandomFunctional {
    let data = (0..space.atom_count() * spec.dim)
        .map(|_| rng.random_range(-2.0..=2.0))
        .collect();
    RandomFunctional::from_flat(space.clone(), spec, data).expect("shape")
}

/// The built-in map constructors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constructor {
    Identity,
    Homothety,
    Rotation,
    EventuallyContractive,
    Glued,
    Translated,
}

impl Constructor {
    pub const ALL: [Constructor; 6] = [
        Constructor::Identity,
        Constructor::Homothety,
        Constructor::Rotation,
        Constructor::EventuallyContractive,
        Constructor::Glued,
        Constructor::Translated,
    ];

    fn needs_plane(self) -> bool {
        matches!(self, Constructor::Rotation | Constructor::EventuallyContractive)
    }
}

/// A certified map of the given constructor on a random body with at most
/// `max_atoms` atoms and fiber dimension at most 3.
pub fn random_map<R: Rng + ?Sized>(rng: &mut R, ctor: Constructor, max_atoms: usize) -> AsymptoticMap {
    let space = random_space(rng, max_atoms);
    let n = space.atom_count();
    let dim = if ctor.needs_plane() || ctor == Constructor::Glued {
        rng.random_range(2..=3)
    } else {
        rng.random_range(1..=3)
    };
    let exponent = if ctor == Constructor::Rotation || ctor == Constructor::Glued {
        2.0
    } else {
        *FIBER_EXPONENTS.choose(rng).expect("nonempty")
    };
    let spec = FiberSpec::new(dim, exponent).expect("valid spec");
    let center = random_element(rng, &space, spec, 2.0);

    let (kind, body) = match ctor {
        Constructor::Identity | Constructor::Homothety | Constructor::Rotation => {
            let body = random_body(rng, &center, ctor == Constructor::Rotation);
            (simple_kind(rng, ctor, &body), body)
        }
        Constructor::EventuallyContractive => {
            let shear = random_l0(rng, n, -2.0, 2.0);
            let decay = random_l0(rng, n, -0.9, 0.9);
            let body = shear_box(rng, &center, &shear, &decay);
            let kind = MapKind::EventuallyContractive {
                shear,
                decay,
                anchor: center,
            };
            (kind, body)
        }
        Constructor::Glued => {
            let shear = random_l0(rng, n, -2.0, 2.0);
            let decay = random_l0(rng, n, -0.9, 0.9);
            let body = shear_box(rng, &center, &shear, &decay);
            let partition = random_partition(rng, n, 3);
            let parts = (0..partition.len())
                .map(|_| match rng.random_range(0..4) {
                    0 => MapKind::EventuallyContractive {
                        shear: shear.clone(),
                        decay: decay.clone(),
                        anchor: center.clone(),
                    },
                    1 => simple_kind(rng, Constructor::Identity, &body),
                    2 => simple_kind(rng, Constructor::Homothety, &body),
                    _ => simple_kind(rng, Constructor::Rotation, &body),
                })
                .collect();
            (MapKind::Glued { partition, parts }, body)
        }
        Constructor::Translated => {
            let base = [Constructor::Homothety, Constructor::EventuallyContractive, Constructor::Glued];
            let pick = *base.choose(rng).expect("nonempty");
            let inner = random_map(rng, pick, max_atoms);
            let offset = random_element(rng, inner.domain().space(), inner.domain().spec(), 3.0);
            return inner.translated(&offset).expect("compatible offset");
        }
    };
    let eta = if rng.random_bool(0.5) {
        kind.natural_certificate(&body)
    } else {
        // a weaker certificate 1 + a·r^m with r ≤ 1/2 on top of the natural one
        let natural = kind.natural_certificate(&body);
        if natural == (EtaSequence::Unit { atoms: n }) {
            EtaSequence::Decaying {
                amplitude: random_l0(rng, n, 0.0, 2.0),
                ratio: random_l0(rng, n, 0.05, 0.5),
            }
        } else {
            natural
        }
    };
    AsymptoticMap::new(body, kind, eta).expect("generated maps are certified")
}

fn random_body<R: Rng + ?Sized>(rng: &mut R, center: &RNElement, euclidean_ball_only: bool) -> ConvexBody {
    let n = center.atom_count();
    let use_ball = rng.random_bool(0.5) && (!euclidean_ball_only || center.spec().is_euclidean());
    if use_ball {
        ConvexBody::ball(center.clone(), random_l0(rng, n, 0.2, 3.0)).expect("valid ball")
    } else {
        let widths = random_element(rng, center.space(), center.spec(), 1.0).map_fibers(|_, src, dst| {
            for (o, s) in dst.iter_mut().zip(src) {
                *o = 0.1 + 2.0 * s.abs();
            }
        });
        ConvexBody::cube(center - &widths, center + &widths).expect("valid box")
    }
}

/// Box around `center` invariant under the shear-decay map anchored there.
fn shear_box<R: Rng + ?Sized>(rng: &mut R, center: &RNElement, shear: &L0Real, decay: &L0Real) -> ConvexBody {
    let widths = center.map_fibers(|atom, _, dst| {
        let w0 = rng.random_range(0.2..2.0);
        let (k, c) = (shear.get(atom).abs(), decay.get(atom).abs());
        dst[0] = w0;
        dst[1] = k * w0 / (1.0 - c) + rng.random_range(0.0..1.0);
        for v in dst.iter_mut().skip(2) {
            *v = rng.random_range(0.2..2.0);
        }
    });
    ConvexBody::cube(center - &widths, center + &widths).expect("valid box")
}

fn simple_kind<R: Rng + ?Sized>(rng: &mut R, ctor: Constructor, body: &ConvexBody) -> MapKind {
    let n = body.atom_count();
    match ctor {
        Constructor::Identity => MapKind::Identity,
        Constructor::Homothety => MapKind::Homothety {
            factor: random_l0(rng, n, 0.0, 1.0),
            anchor: body.center(),
        },
        Constructor::Rotation => MapKind::RotationProjection {
            angle: random_l0(rng, n, -3.0, 3.0),
            gain: rng.random_range(0.5..=1.0),
        },
        _ => unreachable!("not a simple constructor"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn outcome(name: &str, results: impl IntoIterator<Item = bool>) -> CheckOutcome {
    let (mut cases, mut failures) = (0, 0);
    for ok in results {
        cases += 1;
        failures += usize::from(!ok);
    }
    CheckOutcome {
        name: name.to_string(),
        cases,
        failures,
    }
}

/// Runs the invariant battery with `scale` instances per check.
pub fn run_selftest(scale: usize, seed: u64) -> Vec<CheckOutcome> {
    let exec = Exec::default();
    let tol = 1e-9;
    let mut out = Vec::new();

    out.push(outcome(
        "module axioms",
        exec.map_indexed(scale, |i| {
            let mut rng = item_rng(seed, i);
            let space = random_space(&mut rng, 8);
            let spec = random_spec(&mut rng, 3);
            let x = random_element(&mut rng, &space, spec, 3.0);
            let y = random_element(&mut rng, &space, spec, 3.0);
            let xi = random_l0(&mut rng, space.atom_count(), -2.0, 2.0);
            let a = random_set(&mut rng, space.atom_count());
            let (nx, ny) = (x.l0_norm(), y.l0_norm());
            let zero_ok = (0..x.atom_count()).all(|k| (nx.get(k) == 0.0) == x.fiber(k).iter().all(|v| *v == 0.0));
            let scaled = x.module_scale(&xi).expect("shape").l0_norm();
            let homogeneous = (0..x.atom_count()).all(|k| (scaled.get(k) - xi.get(k).abs() * nx.get(k)).abs() <= tol);
            let sum = (&x + &y).l0_norm();
            let triangle = (0..x.atom_count()).all(|k| sum.get(k) <= nx.get(k) + ny.get(k) + tol);
            let restricted = x.restrict(&a).l0_norm();
            let local = (0..x.atom_count())
                .all(|k| (restricted.get(k) - if a.contains(k) { nx.get(k) } else { 0.0 }).abs() <= tol);
            zero_ok && homogeneous && triangle && local
        }),
    ));

    out.push(outcome(
        "hoelder and isometry",
        exec.map_indexed(scale.div_ceil(5).max(1), |i| {
            let mut rng = item_rng(seed ^ 1, i);
            let space = random_space(&mut rng, 4);
            let spec = random_spec(&mut rng, 3);
            let f = random_functional(&mut rng, &space, spec);
            let pair = HolderPair::new(2.0).expect("p = 2");
            let norm = dual_lq_norm(&f, pair).expect("p = 2");
            let x = random_element(&mut rng, &space, spec, 2.0);
            let holder = canonical_t(&f, &x).expect("shape").abs() <= norm * lp_norm(&x, 2.0).expect("p = 2") + tol;
            let oracle = operator_norm_oracle(&f, pair, 8);
            holder && (oracle - norm).abs() <= 1e-6
        }),
    ));

    out.push(outcome(
        "uniform convexity witnesses",
        exec.map_indexed(scale, |i| {
            let mut rng = item_rng(seed ^ 2, i);
            let space = random_space(&mut rng, 6);
            let spec = FiberSpec::euclidean(rng.random_range(1..=3));
            let unit = ConvexBody::centered_ball(space.clone(), spec, 1.0).expect("unit ball");
            let x = unit.sample(&mut rng);
            let y = unit.sample(&mut rng);
            let eps = rng.random_range(0.1..=2.0);
            let params = ConvexityParams::constant(space.atom_count(), eps, hilbert_modulus(eps).max(1e-12))
                .expect("valid params");
            let d = random_set(&mut rng, space.atom_count());
            random_uc_witness_check(&x, &y, &d, &params).unwrap_or(false)
        }),
    ));

    out.push(outcome(
        "certificates",
        Constructor::ALL.iter().enumerate().flat_map(|(c, &ctor)| {
            (0..scale.div_ceil(20).max(1))
                .map(|i| {
                    let mut rng = item_rng(seed ^ 3, c * 1000 + i);
                    let f = random_map(&mut rng, ctor, 5);
                    let report = certify(&f, 16, 16, seed + i as u64);
                    report.passed() && report.escapes == 0
                })
                .collect::<Vec<_>>()
        }),
    ));

    out.push(outcome(
        "partition engine",
        (0..scale.div_ceil(20).max(1)).map(|i| {
            let mut rng = item_rng(seed ^ 4, i);
            let ctor = *Constructor::ALL.choose(&mut rng).expect("nonempty");
            let f = random_map(&mut rng, ctor, 5);
            let Ok(pieces) = lemma31_partition(&f, 16) else {
                return false;
            };
            let valid = pieces_partition(&pieces).is_ok() && pieces.iter().all(|pd| verify_piece(&f, pd).is_ok());
            let lipschitz = pieces.iter().all(|pd| {
                induced_lipschitz_check(&f, pd, 2.0, 16, 8, seed)
                    .map(|r| r.passed())
                    .unwrap_or(false)
            });
            let recomposed = (0..10).all(|_| {
                let x = f.domain().sample(&mut rng);
                recomposition_check(&f, &pieces, &x).unwrap_or(false)
            });
            valid && lipschitz && recomposed
        }),
    ));

    out.push(outcome(
        "sigma stability",
        Constructor::ALL.iter().enumerate().flat_map(|(c, &ctor)| {
            (0..scale.div_ceil(10).max(1))
                .map(|i| {
                    let mut rng = item_rng(seed ^ 5, c * 1000 + i);
                    let f = random_map(&mut rng, ctor, 6);
                    sigma_commutes(&mut rng, &f)
                })
                .collect::<Vec<_>>()
        }),
    ));

    out.push(outcome(
        "execution strategies agree",
        (0..3).map(|i| {
            let mut rng = item_rng(seed ^ 6, i);
            let f = random_map(&mut rng, Constructor::Glued, 5);
            certify_with(&f, 8, 32, seed, Exec::Sequential) == certify_with(&f, 8, 32, seed, Exec::Parallel)
        }),
    ));
    out
}

/// f(Σ Ĩ_{A_n} x_n) = Σ Ĩ_{A_n} f(x_n) on a random partition and family.
pub fn sigma_commutes<R: Rng + ?Sized>(rng: &mut R, f: &AsymptoticMap) -> bool {
    let g = f.domain();
    let partition = random_partition(rng, g.atom_count(), 4);
    let family: Vec<RNElement> = (0..partition.len()).map(|_| g.sample(rng)).collect();
    let glued = glue(&partition, &family).expect("same shapes");
    let images: Vec<RNElement> = family.iter().map(|x| f.apply(x)).collect();
    f.apply(&glued) == glue(&partition, &images).expect("same shapes")
}
