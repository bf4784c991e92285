//! Searches for the smallest resilient supervisor of the memory instance.

use supsynth::format::{parse_instance, write_supervisor};
use supsynth::solve::{bound_schedule, Method, SynthesisOptions, SynthesisOutcome};

const INSTANCE: &str = include_str!("../instances/memory.des");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = parse_instance(INSTANCE)?.synthesis_instance()?;
    let outcome = bound_schedule(&inst, 3, Method::Cegis, &SynthesisOptions::default())?;
    for s in outcome.stats() {
        println!("n={} sat calls={} vars={} clauses={}", s.n, s.sat_calls, s.vars, s.clauses);
    }
    match outcome {
        SynthesisOutcome::Found { supervisor, certificate, .. } => {
            println!("found after {} counterexample(s):", certificate.len());
            print!("{}", write_supervisor(&supervisor));
        }
        SynthesisOutcome::NotFoundAtBounds { n, m, .. } => println!("none with n<={n}, m={m}"),
    }
    Ok(())
}
