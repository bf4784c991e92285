//! Writes the resilient-synthesis QBF of an instance as QDIMACS.

use supsynth::encoding::{emit_qdimacs, Encoder};
use supsynth::format::parse_instance;

const INSTANCE: &str = include_str!("../instances/memory.des");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = parse_instance(INSTANCE)?.synthesis_instance()?;
    let mut enc = Encoder::new(&inst, 2, 1)?;
    let qbf = enc.assemble_resilient_qbf();
    let text = emit_qdimacs(&qbf);
    for line in text.lines().take(4) {
        let short: String = line.chars().take(72).collect();
        println!("{short}");
    }
    println!("{} variables, {} clauses", qbf.matrix.num_vars(), qbf.matrix.clauses().len());
    for (v, label) in enc.vars().iter().take(5).map(|(v, _)| (v, enc.vars().label(v))) {
        println!("v {v} {label}");
    }
    Ok(())
}
