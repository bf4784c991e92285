//! Replaces a fragile supervisor with a resilient one enforcing the same closed loop.

use supsynth::attack::{AttackConstraint, AttackSetting, DamageAutomaton};
use supsynth::automata::{language_equivalent, sync_product, Alphabet, Fsa};
use supsynth::format::write_supervisor;
use supsynth::solve::{bound_schedule, find_attacker, AttackSearch, Method, SynthesisInstance, SynthesisOptions};
use supsynth::supervision::{build_obfuscation_bounds, ControlConstraint, Supervisor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alphabet = Alphabet::new(["a", "b"])?;
    let all = alphabet.all();
    // `a` is compromised and invisible to the supervisor
    let control = ControlConstraint::new(&alphabet, all, alphabet.set_of(["b"])?)?;
    let setting = AttackSetting::new(alphabet.clone(), control, AttackConstraint::new(all, alphabet.set_of(["a"])?))?;

    let mut g = Fsa::new(alphabet.clone(), ["q0", "q1", "q2", "q3"], "q0")?;
    for (s, e, d) in [("q0", "b", "q1"), ("q1", "a", "q2"), ("q2", "b", "q3")] {
        g.add_transition(s, e, d)?;
    }
    // a second `b` is damage
    let mut h = Fsa::new(alphabet.clone(), ["w0", "w1", "wm"], "w0")?;
    for (s, e, d) in [("w0", "a", "w0"), ("w0", "b", "w1"), ("w1", "a", "w1"), ("w1", "b", "wm")] {
        h.add_transition(s, e, d)?;
    }
    h.set_marked_states(&["wm"])?;
    let (damage, _) = DamageAutomaton::normalize(&h)?;

    // keeps `b` enabled after the first `b`; harmless until the attacker inserts `a`
    let mut r = Fsa::new(alphabet.clone(), ["r0", "r1"], "r0")?;
    r.add_transition("r0", "b", "r1")?;
    r.add_transition("r1", "b", "r1")?;
    let reference = Supervisor::new(r);

    let (lower, upper) = build_obfuscation_bounds(&reference, &g);
    let inst = SynthesisInstance::new(setting, g.clone(), lower, upper, damage)?;
    let search = AttackSearch::default();
    println!("reference defeated: {}", find_attacker(&reference, &inst, 1, &search)?.is_some());

    let outcome = bound_schedule(&inst, 3, Method::Cegis, &SynthesisOptions::default())?;
    match outcome.supervisor() {
        Some(s) => {
            print!("{}", write_supervisor(s));
            let same = language_equivalent(&sync_product(s.fsa(), &g), &sync_product(reference.fsa(), &g));
            println!("same closed loop: {same}");
            println!("defeated: {}", find_attacker(s, &inst, 1, &search)?.is_some());
        }
        None => println!("no resilient replacement up to 3 states"),
    }
    Ok(())
}
