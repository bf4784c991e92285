//! Building automata, composing them and checking language inclusion.

use supsynth::automata::{check_language_inclusion, sync_product, Alphabet, Fsa};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let alphabet = Alphabet::new(["a", "b"])?;

    let mut plant = Fsa::new(alphabet.clone(), ["q0", "q1", "q2"], "q0")?;
    plant.add_transition("q0", "a", "q1")?;
    plant.add_transition("q1", "b", "q2")?;
    plant.add_transition("q0", "b", "q0")?;

    let mut only_b = Fsa::new(alphabet.clone(), ["x0"], "x0")?;
    only_b.add_transition("x0", "b", "x0")?;

    let closed = sync_product(&only_b, &plant);
    println!("closed loop has {} states", closed.num_states());
    println!("L(S||G) in L(G): {}", check_language_inclusion(&closed, &plant));
    println!("L(G) in L(S||G): {}", check_language_inclusion(&plant, &closed));

    let complete = plant.complete();
    let dump = complete.dump().expect("plant is partial");
    println!("completion adds `{}`", complete.fsa().state_name(dump));
    Ok(())
}
