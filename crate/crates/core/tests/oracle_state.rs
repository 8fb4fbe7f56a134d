use std::collections::BTreeSet;

use npmt::{
    bundled, check_coherence, load_structure, oracle_apply, state_leq, Codomain, Element, NonPredetermined, Oracle,
    Point, State, Structure,
};
use npmt_testkit::gen::{random_rule, random_state, random_structure, universe, Shape};
use npmt_testkit::raw::walk;
use npmt_testkit::reference::reachable_states;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn example() -> Structure {
    load_structure(bundled::EXAMPLE).unwrap()
}

fn p(d: u32) -> Point {
    Point::new([d])
}

#[test]
fn example_query_protocol() {
    let m = example();
    let e0 = m.initial_state();
    assert_eq!(e0.to_string(), "([],[λ])");
    let (v, e1) = m.query(&e0, "R1", &p(0)).unwrap();
    assert_eq!((v, e1.to_string().as_str()), (1, "([],[⟨(0)⟩])"));
    let (v, e2) = m.query(&e1, "R1", &p(1)).unwrap();
    assert_eq!((v, e2.to_string().as_str()), (0, "([],[⟨(0),(1)⟩])"));
    let (v, same) = m.query(&e1, "R1", &p(0)).unwrap();
    assert_eq!((v, &same), (1, &e1));
}

#[test]
fn example_oracle_applied_to_strings() {
    let m = example();
    let o = &m.predicate_oracles()[0];
    let applied = oracle_apply(o, &[p(0), p(1)]);
    assert_eq!(applied.into_iter().collect::<Vec<_>>(), vec![(p(0), 1), (p(1), 0)]);
    assert!(oracle_apply(o, &[]).is_empty());
    let with_dup = oracle_apply(o, &[p(0), p(0), p(1)]);
    let direct: Vec<(Point, u32)> = walk(&o.rule, &[p(0), p(0), p(1)]);
    assert_eq!(with_dup, direct.into_iter().collect());
    assert_eq!(with_dup, oracle_apply(o, &[p(0), p(1)]));
}

#[test]
fn bundled_oracles_are_coherent() {
    for (name, text) in bundled::ALL {
        let m = load_structure(text).unwrap();
        for o in m.function_oracles().iter().chain(m.predicate_oracles()) {
            let r = check_coherence(o, m.universe(), 5);
            assert!(r.is_coherent(), "{name}/{}: {:?}", o.symbol, r.violation);
        }
    }
}

#[test]
fn futures_of_example_match_reachable_states() {
    let m = example();
    let futures = m.futures(&m.initial_state());
    let rendered: Vec<String> = futures.iter().map(State::to_string).collect();
    assert_eq!(rendered, ["([],[λ])", "([],[⟨(0)⟩])", "([],[⟨(0),(1)⟩])", "([],[⟨(1)⟩])", "([],[⟨(1),(0)⟩])"]);
    let bfs: BTreeSet<String> = reachable_states(&m, &m.initial_state()).iter().map(State::to_string).collect();
    assert_eq!(bfs, rendered.into_iter().collect());
}

#[test]
fn state_order_examples() {
    let m = example();
    let e0 = m.initial_state();
    let e1 = m.query(&e0, "R1", &p(0)).unwrap().1;
    let e2 = m.query(&m.query(&e0, "R1", &p(1)).unwrap().1, "R1", &p(0)).unwrap().1;
    assert!(state_leq(&e0, &e1).unwrap());
    assert!(!state_leq(&e1, &e2).unwrap());
    let other = load_structure(bundled::SUCCESSOR).unwrap();
    assert!(state_leq(&e0, &other.initial_state()).is_err());
}

fn small_shape(rng: &mut StdRng) -> Shape {
    Shape {
        universe: rng.gen_range(1..=2),
        predicates: vec![("R".into(), 1), ("E".into(), 2)],
        functions: vec![("f".into(), 1)],
        constants: vec![],
        max_clauses: 3,
        max_guard: 2,
    }
}

#[test]
fn state_literals_parse() {
    let m = example();
    let e = m.parse_state("([],[⟨(1),(0)⟩])").unwrap();
    assert_eq!(e, m.replay([("R1", &p(1)), ("R1", &p(0))]).unwrap());
    assert_eq!(m.parse_state("( [ ] , [ lambda ] )").unwrap(), m.initial_state());
    assert_eq!(m.parse_state("([],[<(0)>])").unwrap().to_string(), "([],[⟨(0)⟩])");
    for bad in ["([],[⟨(0),(0)⟩])", "([],[⟨(2)⟩])", "([],[λ,λ])", "([],[⟨(0)⟩]) x", "([],[⟨0⟩])"] {
        assert!(m.parse_state(bad).is_err(), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn state_literals_round_trip(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = small_shape(&mut rng);
        let m = random_structure(&mut rng, &shape);
        let e = random_state(&mut rng, &m, 6);
        prop_assert_eq!(m.parse_state(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn random_rule_oracles_are_coherent(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let u = universe(rng.gen_range(1..=3));
        let values: Vec<u32> = if rng.gen_bool(0.5) { vec![0, 1] } else { u.iter().map(|e| e.0).collect() };
        let codomain = if values == [0, 1] { Codomain::Truth } else { Codomain::Universe(u.clone()) };
        let rule = random_rule(&mut rng, &u, 1, &values, 4, 2);
        let o = Oracle::new("h", 1, codomain, rule);
        prop_assert!(check_coherence(&o, &u, 5).is_coherent());
    }

    #[test]
    fn repetition_invariance(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let u = universe(rng.gen_range(1..=3));
        let rule = random_rule(&mut rng, &u, 1, &[0, 1], 4, 2);
        let o = Oracle::new("h", 1, Codomain::Truth, rule);
        let len = rng.gen_range(0..=6);
        let s: Vec<Point> = (0..len).map(|_| Point::new([u[rng.gen_range(0..u.len())].0])).collect();
        let mut firsts: Vec<Point> = Vec::new();
        for d in &s {
            if !firsts.contains(d) {
                firsts.push(d.clone());
            }
        }
        prop_assert_eq!(o.apply(&s), o.apply(&firsts));
        let domain: BTreeSet<Point> = o.apply(&s).into_keys().collect();
        prop_assert_eq!(domain, s.iter().cloned().collect::<BTreeSet<_>>());
    }

    #[test]
    fn state_order_is_a_partial_order(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = small_shape(&mut rng);
        let m = random_structure(&mut rng, &shape);
        let states: Vec<State> = (0..6).map(|_| { let k = rng.gen_range(0..5); random_state(&mut rng, &m, k) }).collect();
        for a in &states {
            prop_assert!(state_leq(a, a).unwrap());
            prop_assert!(state_leq(&m.initial_state(), a).unwrap());
            for b in &states {
                if state_leq(a, b).unwrap() && state_leq(b, a).unwrap() {
                    prop_assert_eq!(a, b);
                }
                for c in &states {
                    if state_leq(a, b).unwrap() && state_leq(b, c).unwrap() {
                        prop_assert!(state_leq(a, c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn determination_is_monotone(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let shape = small_shape(&mut rng);
        let m = random_structure(&mut rng, &shape);
        let e = random_state(&mut rng, &m, 3);
        for later in m.futures(&e) {
            prop_assert!(state_leq(&e, &later).unwrap());
            for sym in m.symbols() {
                for (d, v) in e.sequence(sym) {
                    prop_assert_eq!(later.value(sym, d), Some(*v));
                }
            }
        }
    }

    #[test]
    fn futures_are_the_query_closure(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n = rng.gen_range(1..=2);
        let shape = Shape::unary(n, 2, 3, 2);
        let m = random_structure(&mut rng, &shape);
        let k = rng.gen_range(0..3);
        let e = random_state(&mut rng, &m, k);
        let futures = m.futures(&e);
        prop_assert_eq!(futures.len() as u128, m.futures_count(&e));
        prop_assert_eq!(&futures[0], &e);
        let a: BTreeSet<String> = futures.iter().map(State::to_string).collect();
        let b: BTreeSet<String> = reachable_states(&m, &e).iter().map(State::to_string).collect();
        prop_assert_eq!(a.len(), futures.len());
        prop_assert_eq!(a, b);
    }
}

#[test]
fn queries_check_points() {
    let m = example();
    let e0 = m.initial_state();
    assert!(m.query(&e0, "R2", &p(0)).is_err());
    assert!(m.query(&e0, "R1", &Point::new([0, 1])).is_err());
    assert!(m.query(&e0, "R1", &p(7)).is_err());
    assert_eq!(m.universe(), &[Element(0), Element(1)]);
}
