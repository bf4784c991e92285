//! Bounded search for a Moore attacker against a given supervisor.

use supsynth::format::{parse_instance, parse_supervisor};
use supsynth::solve::{bmc_depth, find_attacker, AttackSearch, SearchMethod};

const INSTANCE: &str = include_str!("../instances/inst2.des");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let inst = parse_instance(INSTANCE)?.synthesis_instance()?;
    let setting = inst.setting();
    let candidates = [
        ("b only", "automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 b x0\nend\n"),
        ("a and b", "automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 a x0\ntrans: x0 b x0\nend\n"),
    ];
    for (name, text) in candidates {
        let s = parse_supervisor(text, setting)?;
        for method in [SearchMethod::Fast, SearchMethod::Bmc] {
            let search = AttackSearch {
                method,
                max_steps: 16,
                ..AttackSearch::default()
            };
            let found = find_attacker(&s, &inst, 2, &search)?;
            println!("{name} / {method:?} (depth {}):", bmc_depth(&s, &inst, 2, 16));
            match found {
                Some(a) => println!("{}", a.render(setting)),
                None => println!("  no attacker"),
            }
        }
    }
    Ok(())
}
