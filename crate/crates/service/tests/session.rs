use npmt::{bundled, print_structure, Structure};
use npmt_service::session::LogLine;
use npmt_service::Session;
use npmt_testkit::gen::{random_formula, random_structure, Shape};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn example() -> Session {
    Session::create("s", bundled::EXAMPLE).unwrap()
}

#[test]
fn fresh_session_is_at_the_initial_state() {
    let s = example();
    assert_eq!(s.state().to_string(), "([],[λ])");
    assert!(s.log().is_empty());
    assert!(s.watchlist().is_empty());
}

#[test]
fn malformed_spec_is_rejected() {
    let err = Session::create("s", "universe 0 1\nrelation R1 1\noracle R1 {\n  when bogus -> 1\n}\n").err().unwrap();
    assert_eq!(err.code, "invalid_spec");
}

#[test]
fn example_queries() {
    let mut s = example();
    let first = s.query("R1", &[0]).unwrap();
    assert_eq!((first.value, first.seq, first.new_event), (1, 1, true));
    let second = s.query("R1", &[1]).unwrap();
    assert_eq!((second.value, second.seq, second.new_event), (0, 2, true));
    let again = s.query("R1", &[0]).unwrap();
    assert_eq!((again.value, again.seq, again.new_event), (1, 1, false));
    assert_eq!(s.log().len(), 2);
    assert_eq!(s.state().to_string(), "([],[⟨(0),(1)⟩])");
}

#[test]
fn bad_queries_are_rejected_without_changing_the_session() {
    let mut s = example();
    assert_eq!(s.query("Q", &[0]).unwrap_err().code, "unknown_symbol");
    assert_eq!(s.query("R1", &[0, 1]).unwrap_err().code, "arity_mismatch");
    assert_eq!(s.query("R1", &[2]).unwrap_err().code, "element_outside_universe");
    assert!(s.log().is_empty());
}

#[test]
fn eval_examples() {
    let mut s = example();
    assert!(!s.eval("R1(0)").unwrap().satisfied);
    s.query("R1", &[0]).unwrap();
    assert!(s.eval("R1(0)").unwrap().satisfied);
    assert_eq!(s.watchlist().len(), 1, "re-evaluating a watched formula does not duplicate it");
    assert_eq!(s.watchlist()[0].history, vec![(0, false), (1, true)]);
    assert_eq!(s.watchlist()[0].satisfied_since(), Some(1));
}

#[test]
fn eval_errors() {
    let mut s = example();
    assert_eq!(s.eval("R1(x)").unwrap_err().code, "open_formula");
    let err = s.eval("R1(0").unwrap_err();
    assert_eq!((err.code, err.position), ("syntax_error", Some(4)));
    assert_eq!(s.eval("Q(0)").unwrap_err().code, "unknown_symbol");
    assert!(s.watchlist().is_empty());
}

#[test]
fn view_lists_points_in_canonical_order() {
    let mut s = Session::create("s", bundled::EDGES).unwrap();
    s.query("E", &[1, 0]).unwrap();
    let view = s.view();
    assert_eq!(view.determined.len(), 1);
    let open: Vec<Vec<u32>> = view.undetermined.iter().map(|p| p.point.clone()).collect();
    assert_eq!(open, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
}

#[test]
fn log_replays_to_the_same_session() {
    let mut s = example();
    s.eval("R1(0) | !R1(0)").unwrap();
    s.query("R1", &[1]).unwrap();
    s.eval("R1(1)").unwrap();
    s.query("R1", &[0]).unwrap();
    let lines = s.log_lines();
    assert!(matches!(lines[1], LogLine::Watch { .. }));
    assert!(matches!(lines[2], LogLine::Query(_)));
    let r = Session::replay("s", &lines).unwrap();
    assert_eq!(r.view(), s.view());
    assert_eq!(r.watchlist(), s.watchlist());
}

#[test]
fn log_file_round_trip_and_append() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.jsonl");
    let mut s = example();
    s.query("R1", &[1]).unwrap();
    s.attach_log(&path).unwrap();
    s.eval("R1(0)").unwrap();
    s.query("R1", &[0]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 4, "spec, two events and one watch");

    let mut resumed = Session::resume("s", &path).unwrap();
    assert_eq!(resumed.view(), s.view());
    resumed.eval("R1(1)").unwrap();
    drop(resumed);
    let again = Session::resume("s", &path).unwrap();
    assert_eq!(again.watchlist().len(), 2);
    assert_eq!(again.state(), s.state());
}

#[test]
fn tampered_log_is_rejected() {
    let mut s = example();
    s.query("R1", &[0]).unwrap();
    let mut lines = s.log_lines();
    if let LogLine::Query(ev) = &mut lines[1] {
        ev.value = 0;
    }
    assert_eq!(Session::replay("s", &lines).err().unwrap().code, "corrupt_log");
    assert_eq!(Session::replay("s", &lines[1..]).err().unwrap().code, "corrupt_log");
}

fn random_session(rng: &mut StdRng) -> (Session, Structure) {
    let shape = Shape {
        universe: rng.gen_range(1..=2),
        predicates: vec![("R".into(), 1), ("S".into(), 1)],
        functions: vec![("f".into(), 1)],
        constants: vec!["c".into()],
        max_clauses: 3,
        max_guard: 2,
    };
    let m = random_structure(rng, &shape);
    (Session::create("s", &print_structure(&m)).unwrap(), m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Each watched formula goes ⊭* ⊨*, events are numbered from 1 and the state only grows.
    #[test]
    fn watchlist_is_monotone_and_log_replays(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (mut s, m) = random_session(&mut rng);
        for _ in 0..4 {
            let phi = random_formula(&mut rng, m.signature(), m.universe(), 3);
            s.eval(&phi.to_string()).unwrap();
        }
        let mut points: Vec<(String, Vec<u32>)> = Vec::new();
        for name in ["R", "S", "f"] {
            for e in m.universe() {
                points.push((name.to_string(), vec![e.0]));
            }
        }
        points.shuffle(&mut rng);
        let mut before = s.state().clone();
        for (sym, d) in &points {
            s.query(sym, d).unwrap();
            prop_assert!(before.leq(s.state()).unwrap());
            before = s.state().clone();
        }
        let seqs: Vec<u64> = s.log().iter().map(|ev| ev.seq).collect();
        prop_assert_eq!(seqs, (1..=points.len() as u64).collect::<Vec<_>>());
        for w in s.watchlist() {
            let flips = w.history.windows(2).filter(|p| p[0].1 != p[1].1).count();
            prop_assert!(flips <= 1);
            prop_assert!(!w.history.windows(2).any(|p| p[0].1 && !p[1].1), "{} went back to ⊭", w.formula);
        }
        let r = Session::replay("s", &s.log_lines()).unwrap();
        prop_assert_eq!(r.view(), s.view());
    }
}
