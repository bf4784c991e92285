use proptest::prelude::*;
use supsynth::attack::AttackConstraint;
use supsynth::automata::{check_language_inclusion, sync_product, Alphabet, EventId, EventSet, Fsa, StateId};
use supsynth::supervision::{transform, untransform, ControlConstraint, Supervisor};

/// Longer than any shortest counterexample over the 3 x 4 product states.
const MAX_LEN: usize = 11;

fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

fn table(states: usize) -> impl Strategy<Value = Fsa> {
    prop::collection::vec(prop::option::of(0..states), states * 2).prop_map(move |cells| {
        let delta = cells.chunks(2).map(|r| r.iter().map(|c| c.map(StateId)).collect()).collect();
        let names = (0..states).map(|i| format!("s{i}")).collect();
        Fsa::from_table(ab(), names, delta, StateId(0), vec![true; states])
    })
}

fn fsa() -> impl Strategy<Value = Fsa> {
    (1usize..=3).prop_flat_map(table)
}

fn words() -> Vec<Vec<EventId>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..MAX_LEN {
        let mut next = Vec::new();
        for w in &frontier {
            for e in 0..2 {
                let mut w2: Vec<EventId> = w.clone();
                w2.push(EventId(e));
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

proptest! {
    #[test]
    fn product_accepts_the_intersection(a in fsa(), b in fsa()) {
        let p = sync_product(&a, &b);
        for w in words().iter().filter(|w| w.len() <= 6) {
            prop_assert_eq!(p.accepts(w), a.accepts(w) && b.accepts(w));
        }
    }

    #[test]
    fn inclusion_agrees_with_bounded_words(a in fsa(), b in fsa()) {
        let brute = words().iter().all(|w| !a.accepts(w) || b.accepts(w));
        prop_assert_eq!(check_language_inclusion(&a, &b), brute);
    }

    #[test]
    fn completion_and_trim_keep_the_language(a in fsa()) {
        let c = a.complete();
        let t = a.trim();
        for w in words() {
            prop_assert_eq!(c.fsa().accepts(&w) && c.fsa().run(&w) != c.dump(), a.accepts(&w));
            prop_assert_eq!(t.accepts(&w), a.accepts(&w));
        }
    }

    #[test]
    fn transform_round_trips(s in fsa(), c in 0u64..4, o in 0u64..4, ca in 0u64..4) {
        let alphabet = ab();
        let control = ControlConstraint::new(&alphabet, EventSet::from_bits(c), EventSet::from_bits(o)).unwrap();
        let attack = AttackConstraint::new(EventSet::full(2), EventSet::from_bits(ca & c));
        let s = Supervisor::new(s);
        prop_assume!(s.validate(&control).is_empty());
        let t = transform(&s, &control, &attack).unwrap();
        prop_assert_eq!(untransform(&t), s);
    }
}
