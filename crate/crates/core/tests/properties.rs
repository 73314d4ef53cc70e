use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rnmod::duality::{canonical_t, dual_lq_norm, lp_norm, HolderPair, RandomFunctional};
use rnmod::dynamics::{mann_iterate, Schedule};
use rnmod::experiment::translate_to_origin;
use rnmod::measure::{lattice_sup, AtomicSpace, L0Real, MeasurableSet, Partition};
use rnmod::partition::{lemma31_partition, pieces_partition, recomposition_check};
use rnmod::selftest::{random_map, Constructor};
use rnmod::{glue, ConvexBody, FiberSpec, RNElement};

fn space_strategy(max_atoms: usize) -> impl Strategy<Value = Arc<AtomicSpace>> {
    prop::collection::vec(0.01f64..1.0, 1..=max_atoms)
        .prop_map(|m| Arc::new(AtomicSpace::normalized(&m).unwrap()))
}

fn spec_strategy() -> impl Strategy<Value = FiberSpec> {
    (1usize..=3, prop::sample::select(vec![1.5, 2.0, 3.0])).prop_map(|(d, q)| FiberSpec::new(d, q).unwrap())
}

fn element(space: &Arc<AtomicSpace>, spec: FiberSpec, data: &[f64]) -> RNElement {
    let n = space.atom_count() * spec.dim;
    RNElement::from_flat(space.clone(), spec, data.iter().cycle().take(n).copied().collect()).unwrap()
}

fn coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 24)
}

fn labels(max_atoms: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..4, max_atoms)
}

proptest! {
    #[test]
    fn partition_from_labels_is_a_disjoint_cover(labels in prop::collection::vec(0usize..5, 1..12)) {
        let p = Partition::from_labels(&labels).unwrap();
        let n = labels.len();
        let mut seen = vec![0; n];
        for piece in p.pieces() {
            prop_assert!(!piece.is_empty());
            for a in piece.atoms() {
                seen[a] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for a in 0..n {
            for b in 0..n {
                prop_assert_eq!(labels[a] == labels[b], p.piece_of(a) == p.piece_of(b));
            }
        }
    }

    #[test]
    fn refinement_splits_both_partitions(a in labels(8), b in labels(8)) {
        let (pa, pb) = (Partition::from_labels(&a).unwrap(), Partition::from_labels(&b).unwrap());
        let r = pa.refine(&pb);
        for piece in r.pieces() {
            let atoms = piece.atoms();
            prop_assert!(atoms.iter().all(|&x| pa.piece_of(x) == pa.piece_of(atoms[0])));
            prop_assert!(atoms.iter().all(|&x| pb.piece_of(x) == pb.piece_of(atoms[0])));
        }
        prop_assert!(r.len() >= pa.len().max(pb.len()));
    }

    #[test]
    fn set_algebra(flags_a in prop::collection::vec(any::<bool>(), 6), flags_b in prop::collection::vec(any::<bool>(), 6)) {
        let a = MeasurableSet::from_flags(flags_a);
        let b = MeasurableSet::from_flags(flags_b);
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
        prop_assert!(a.intersection(&b).is_subset_of(&a));
        prop_assert!(a.is_subset_of(&a.union(&b)));
        prop_assert_eq!(a.cardinality() + a.complement().cardinality(), 6);
    }

    #[test]
    fn lattice_sup_dominates(values in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 1..6)) {
        let family: Vec<L0Real> = values.iter().map(|v| L0Real::new(v.clone()).unwrap()).collect();
        let sup = lattice_sup(&family).unwrap();
        for xi in &family {
            for a in 0..4 {
                prop_assert!(xi.get(a) <= sup.get(a));
            }
        }
        for a in 0..4 {
            prop_assert!(family.iter().any(|xi| xi.get(a) == sup.get(a)));
        }
    }

    #[test]
    fn expectation_is_linear(space in space_strategy(6), u in coords(), v in coords(), c in -3.0f64..3.0) {
        let n = space.atom_count();
        let x = L0Real::new(u[..n].to_vec()).unwrap();
        let y = L0Real::new(v[..n].to_vec()).unwrap();
        let lhs = space.expectation(&(&x.scale(c) + &y)).unwrap();
        let rhs = c * space.expectation(&x).unwrap() + space.expectation(&y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn module_norm_axioms(space in space_strategy(8), spec in spec_strategy(), u in coords(), v in coords(), s in coords()) {
        let x = element(&space, spec, &u);
        let y = element(&space, spec, &v);
        let xi = L0Real::new(s[..space.atom_count()].to_vec()).unwrap();
        let (nx, ny, nxy) = (x.l0_norm(), y.l0_norm(), (&x + &y).l0_norm());
        let scaled = x.module_scale(&xi).unwrap().l0_norm();
        for a in 0..space.atom_count() {
            prop_assert!(nxy.get(a) <= nx.get(a) + ny.get(a) + 1e-9);
            assert_relative_eq!(scaled.get(a), xi.get(a).abs() * nx.get(a), epsilon = 1e-9, max_relative = 1e-12);
        }
    }

    #[test]
    fn glue_reassembles_restrictions(space in space_strategy(8), spec in spec_strategy(), u in coords(), lab in labels(8)) {
        let x = element(&space, spec, &u);
        let p = Partition::from_labels(&lab[..space.atom_count()]).unwrap();
        let parts: Vec<RNElement> = p.pieces().iter().map(|piece| x.restrict(piece)).collect();
        prop_assert_eq!(glue(&p, &parts).unwrap(), x.clone());
        let sum = parts.iter().skip(1).fold(parts[0].clone(), |acc, part| &acc + part);
        prop_assert_eq!(sum, x);
    }

    #[test]
    fn restriction_is_idempotent_and_local(space in space_strategy(8), spec in spec_strategy(), u in coords(), flags in prop::collection::vec(any::<bool>(), 8)) {
        let x = element(&space, spec, &u);
        let a = MeasurableSet::from_flags(flags[..space.atom_count()].to_vec());
        let once = x.restrict(&a);
        prop_assert_eq!(once.restrict(&a), once.clone());
        prop_assert!(once.restrict(&a.complement()).is_zero());
        prop_assert_eq!(once.l0_norm(), x.l0_norm().restrict(&a));
    }

    #[test]
    fn projection_lands_in_body(space in space_strategy(5), d in 1usize..=3, u in coords(), radius in 0.1f64..3.0) {
        let spec = FiberSpec::euclidean(d);
        let ball = ConvexBody::centered_ball(space.clone(), spec, radius).unwrap();
        let cube = ConvexBody::uniform_cube(space.clone(), spec, -radius, radius / 2.0).unwrap();
        let x = element(&space, spec, &u);
        for body in [ball, cube] {
            let p = body.project(&x).unwrap();
            prop_assert!(body.contains(&p, 1e-12));
            prop_assert_eq!(body.project(&p).unwrap(), p);
        }
    }

    #[test]
    fn samples_lie_in_body(seed in any::<u64>(), space in space_strategy(6), spec in spec_strategy()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ball = ConvexBody::centered_ball(space.clone(), spec, 1.5).unwrap();
        let cube = ConvexBody::uniform_cube(space, spec, -1.0, 2.0).unwrap();
        for _ in 0..8 {
            prop_assert!(ball.contains(&ball.sample(&mut rng), 1e-12));
            prop_assert!(cube.contains(&cube.sample(&mut rng), 1e-12));
        }
    }

    #[test]
    fn hoelder_and_alignment(space in space_strategy(4), spec in spec_strategy(), u in coords(), v in coords()) {
        let n = space.atom_count() * spec.dim;
        let f = RandomFunctional::from_flat(space.clone(), spec, u[..n].to_vec()).unwrap();
        let x = element(&space, spec, &v);
        for p in [1.5, 2.0, 4.0] {
            let pair = HolderPair::new(p).unwrap();
            let bound = dual_lq_norm(&f, pair).unwrap() * lp_norm(&x, p).unwrap();
            prop_assert!(canonical_t(&f, &x).unwrap().abs() <= bound * (1.0 + 1e-12) + 1e-12);
        }
        let aligned = f.eval(&f.alignment()).unwrap();
        let norm = f.conjugate_norm();
        for a in 0..space.atom_count() {
            prop_assert!((aligned.get(a) - norm.get(a)).abs() <= 1e-9 * (1.0 + norm.get(a)));
        }
    }

    #[test]
    fn canonical_pairing_is_linear(space in space_strategy(4), spec in spec_strategy(), u in coords(), v in coords(), w in coords(), c in -2.0f64..2.0) {
        let n = space.atom_count() * spec.dim;
        let f = RandomFunctional::from_flat(space.clone(), spec, u[..n].to_vec()).unwrap();
        let x = element(&space, spec, &v);
        let y = element(&space, spec, &w);
        let lhs = canonical_t(&f, &(&x.scale(c) + &y)).unwrap();
        let rhs = c * canonical_t(&f, &x).unwrap() + canonical_t(&f, &y).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }
}

fn constructor() -> impl Strategy<Value = Constructor> {
    prop::sample::select(Constructor::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maps_are_sigma_stable_self_maps(seed in any::<u64>(), ctor in constructor()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, ctor, 6);
        let g = f.domain();
        let x = g.sample(&mut rng);
        let y = g.sample(&mut rng);
        prop_assert!(g.contains(&f.apply(&x), 1e-9));
        let a = MeasurableSet::from_flags((0..g.atom_count()).map(|i| i % 2 == 0).collect());
        let p = Partition::new(vec![a.clone(), a.complement()]).unwrap_or_else(|_| Partition::trivial(g.atom_count()));
        let family: Vec<RNElement> = if p.len() == 2 { vec![x.clone(), y.clone()] } else { vec![x.clone()] };
        let images: Vec<RNElement> = family.iter().map(|e| f.apply(e)).collect();
        prop_assert_eq!(f.apply(&glue(&p, &family).unwrap()), glue(&p, &images).unwrap());
    }

    #[test]
    fn translation_conjugates(seed in any::<u64>(), ctor in constructor()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, ctor, 5);
        let (g, offset) = translate_to_origin(&f).unwrap();
        let origin = RNElement::zero(f.domain().space().clone(), f.domain().spec());
        prop_assert!(g.domain().contains(&origin, 1e-12));
        prop_assert_eq!(g.eta(), f.eta());
        let x = f.domain().sample(&mut rng);
        let lhs = g.apply(&(&x - &offset));
        let rhs = &f.apply(&x) - &offset;
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * (1.0 + offset.data().iter().fold(0.0_f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn mann_iterates_stay_in_domain(seed in any::<u64>(), ctor in constructor(), c in 0.05f64..0.95) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, ctor, 5);
        let x0 = f.domain().sample(&mut rng);
        let trace = mann_iterate(&f, &x0, &Schedule::Constant(c), 30).unwrap();
        prop_assert_eq!(trace.iterates.len(), 31);
        for x in &trace.iterates {
            prop_assert!(f.domain().contains(x, 1e-9));
        }
    }

    #[test]
    fn lemma_pieces_recompose(seed in any::<u64>(), ctor in constructor()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_map(&mut rng, ctor, 6);
        let pieces = lemma31_partition(&f, 16).unwrap();
        prop_assert!(pieces_partition(&pieces).is_ok());
        for _ in 0..5 {
            let x = f.domain().sample(&mut rng);
            prop_assert!(recomposition_check(&f, &pieces, &x).unwrap());
        }
    }
}
