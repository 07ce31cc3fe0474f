use std::collections::HashSet;
use std::sync::Arc;

use proptest::prelude::*;

use fbp::algebra::builtin;
use fbp::automorphism::PowerAutomorphism;
use fbp::cantor::{orbit_witness, Clopen, EPHomeo, PointContext, Word};
use fbp::factor::{bergman_growth, cell_action};
use fbp::fraisse::PowerClass;
use fbp::json::{self, AlgebraJson, AutomorphismJson, ElementJson, EmbeddingJson, HomeoJson, TailClopenJson};
use fbp::power::PowerContext;
use fbp::random;

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..2, 0..5).prop_map(Word::from_bits)
}

fn clopen() -> impl Strategy<Value = Clopen> {
    prop::collection::vec(word(), 0..5).prop_map(|ws| Clopen::from_prefixes(&ws))
}

fn points(seed: u64) -> Arc<PointContext> {
    Arc::new(PointContext::standard(1 + seed as usize % 3))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn clopens_form_a_boolean_algebra(a in clopen(), b in clopen(), c in clopen()) {
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersect(&b.complement()));
        prop_assert_eq!(a.intersect(&b.union(&c)), a.intersect(&b).union(&a.intersect(&c)));
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert!(a.union(&a.complement()).is_full());
        prop_assert!(a.is_disjoint(&a.complement()));
        prop_assert!((a.measure() + a.complement().measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clopen_membership_matches_prefixes(ws in prop::collection::vec(word(), 0..5), x in word()) {
        let c = Clopen::from_prefixes(&ws);
        let inside = ws.iter().any(|w| w.is_prefix_of(&x));
        if inside {
            prop_assert!(c.contains_cylinder(&x));
        }
        if c.contains_cylinder(&x) {
            prop_assert!(Word::all_of_length(2).iter().all(|t| ws.iter().any(|w| w.is_prefix_of(&x.concat(t)))));
        }
    }

    #[test]
    fn tail_clopens_form_a_boolean_algebra(seed in 0u64..1000) {
        let ctx = points(seed);
        let mut rng = random::seeded(seed);
        let a = random::tail_clopen(&ctx, &mut rng).unwrap();
        let b = random::tail_clopen(&ctx, &mut rng).unwrap();
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.union(&b).unwrap().complement(), a.complement().intersect(&b.complement()).unwrap());
        prop_assert!(a.difference(&b).unwrap().is_disjoint(&b).unwrap());
        prop_assert!(a.intersect(&b).unwrap().is_subset(&a).unwrap());
        for x in EPHomeo::sample_points(&ctx, 5) {
            if ctx.is_distinguished(&x) {
                continue;
            }
            prop_assert_eq!(a.union(&b).unwrap().contains(&x), a.contains(&x) || b.contains(&x));
        }
    }

    #[test]
    fn split_good_halves_a_good_clopen(seed in 0u64..1000) {
        let ctx = points(seed);
        let mut rng = random::seeded(seed);
        let c = random::tail_clopen(&ctx, &mut rng).unwrap();
        match c.split_good() {
            Ok((a, b)) => {
                prop_assert!(c.is_good());
                prop_assert!(a.is_good() && b.is_good());
                prop_assert!(a.is_disjoint(&b).unwrap());
                prop_assert_eq!(a.union(&b).unwrap(), c.clone());
                prop_assert_eq!(a.limit_points(), c.limit_points());
            }
            Err(_) => prop_assert!(!c.is_good()),
        }
    }

    #[test]
    fn orbit_witnesses_preserve_type(seed in 0u64..1000) {
        let ctx = points(seed);
        let mut rng = random::seeded(seed);
        let (a, b) = random::equal_type_pair(&ctx, &mut rng).unwrap();
        let h = orbit_witness(&a, &b).unwrap();
        prop_assert_eq!(h.apply_tail_clopen(&a).unwrap(), b.clone());
        prop_assert_eq!(h.inverse().apply_tail_clopen(&b).unwrap(), a.clone());
        let c = random::tail_clopen(&ctx, &mut rng).unwrap();
        let image = h.apply_tail_clopen(&c).unwrap();
        prop_assert_eq!(image.limit_points(), c.limit_points());
        prop_assert_eq!(image.complement().limit_points(), c.complement().limit_points());
    }

    #[test]
    fn homeomorphisms_compose(seed in 0u64..1000) {
        let ctx = points(seed);
        let mut rng = random::seeded(seed);
        let f = random::point_fixing_homeo(&ctx, &mut rng, 2).unwrap();
        let g = random::point_fixing_homeo(&ctx, &mut rng, 2).unwrap();
        let fg = f.compose(&g).unwrap();
        prop_assert!(fg.compose(&fg.inverse()).unwrap().is_identity());
        for x in EPHomeo::sample_points(&ctx, 4) {
            prop_assert_eq!(fg.apply_point(&x).unwrap(), f.apply_point(&g.apply_point(&x).unwrap()).unwrap());
        }
    }

    #[test]
    fn generated_subalgebras_are_closed(gens in prop::collection::vec(0usize..4, 1..3)) {
        let alg = builtin::gf4_idempotent_reduct();
        let sub: HashSet<usize> = alg.subalgebra_generated(&gens).into_iter().collect();
        prop_assert!(gens.iter().all(|g| sub.contains(g)));
        for (op, o) in alg.ops().iter().enumerate() {
            for args in fbp::algebra::tuples(4, o.arity) {
                if args.iter().all(|a| sub.contains(a)) {
                    prop_assert!(sub.contains(&alg.apply(op, &args)));
                }
            }
        }
    }

    #[test]
    fn power_automorphisms_form_a_group(seed in 0u64..1000) {
        let alg = Arc::new(builtin::gf4_idempotent_reduct());
        let filters = if seed % 2 == 0 { vec![0] } else { vec![0, 1] };
        let ctx = PowerContext::standard(&alg, &filters).unwrap();
        let mut rng = random::seeded(seed);
        let a = random::automorphism(&ctx, &mut rng, 2).unwrap();
        let b = random::automorphism(&ctx, &mut rng, 2).unwrap();
        let c = random::automorphism(&ctx, &mut rng, 2).unwrap();
        let id = PowerAutomorphism::identity(&ctx);
        prop_assert_eq!(a.compose(&b).unwrap().compose(&c).unwrap(), a.compose(&b.compose(&c).unwrap()).unwrap());
        prop_assert_eq!(a.compose(&a.inverse().unwrap()).unwrap(), id.clone());
        prop_assert_eq!(id.compose(&a).unwrap(), a.clone());
        prop_assert_eq!(a.kernel_part().compose(&a.section_part()).unwrap(), a.clone());
    }

    #[test]
    fn json_round_trips(seed in 0u64..1000) {
        let alg = Arc::new(builtin::gf4_idempotent_reduct());
        let ctx = PowerContext::standard(&alg, &[0, 1]).unwrap();
        let pts = ctx.points();
        let mut rng = random::seeded(seed);

        let a = AlgebraJson::from_algebra(&alg);
        let back: AlgebraJson = json::from_str(&json::to_string(&a)).unwrap();
        let parsed = back.to_algebra().unwrap();
        prop_assert_eq!(parsed.size(), alg.size());
        prop_assert_eq!(parsed.ops(), alg.ops());

        let c = random::tail_clopen(pts, &mut rng).unwrap();
        let cj: TailClopenJson = json::from_str(&json::to_string(&TailClopenJson::from_clopen(&c))).unwrap();
        prop_assert_eq!(cj.to_clopen(pts).unwrap(), c);

        let h = random::point_fixing_homeo(pts, &mut rng, 2).unwrap();
        let hj: HomeoJson = json::from_str(&json::to_string(&HomeoJson::from_homeo(&h))).unwrap();
        prop_assert!(hj.to_homeo(pts).unwrap().same_map(&h).unwrap());

        let phi = random::automorphism(&ctx, &mut rng, 1).unwrap();
        let pj: AutomorphismJson = json::from_str(&json::to_string(&AutomorphismJson::from_automorphism(&phi))).unwrap();
        prop_assert_eq!(pj.to_automorphism(&ctx).unwrap(), phi);

        let f = &ctx.elements_at_depth(2, 1 << 12).unwrap()[seed as usize % 16];
        let fj: ElementJson = json::from_str(&json::to_string(&ElementJson::from_element(f))).unwrap();
        prop_assert_eq!(&fj.to_element(&ctx).unwrap(), f);

        let class = PowerClass::new(alg.clone()).unwrap();
        let embs = class.all_embeddings(1, 2);
        let e = &embs[seed as usize % embs.len()];
        let ej: EmbeddingJson = json::from_str(&json::to_string(&EmbeddingJson::from_embedding(&class, e))).unwrap();
        prop_assert_eq!(&ej.to_embedding(&class).unwrap(), e);
    }

    #[test]
    fn word_balls_grow_monotonically(perms in prop::collection::vec(Just((0..6).collect::<Vec<usize>>()).prop_shuffle(), 1..3)) {
        let g = bergman_growth(&perms, 8).unwrap();
        prop_assert!(g.sizes.windows(2).all(|p| p[0] <= p[1]));
        if let Some(t) = g.stabilized_at {
            prop_assert!(g.sizes[t - 1..].windows(2).all(|p| p[0] == p[1]));
            prop_assert_eq!(g.sizes[t - 1], g.group_order);
        }
    }

    #[test]
    fn cell_actions_are_permutations(seed in 0u64..1000) {
        let ctx = Arc::new(PointContext::standard(0));
        let mut rng = random::seeded(seed);
        let a = random::proper_tail_clopen(&ctx, &mut rng);
        let b = random::proper_tail_clopen(&ctx, &mut rng);
        let (Ok(a), Ok(b)) = (a, b) else { return Ok(()) };
        let Ok(h) = orbit_witness(&a, &b) else { return Ok(()) };
        for depth in 0..4 {
            let Ok(p) = cell_action(&h, depth) else { continue };
            let mut sorted = p.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..1usize << depth).collect::<Vec<_>>());
        }
    }
}
