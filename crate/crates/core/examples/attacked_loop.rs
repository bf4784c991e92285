//! Composes an attacker with a supervised plant and inspects the result.

use supsynth::attack::{all_enable_attacker, compose, SupervisorState};
use supsynth::format::{parse_instance, parse_supervisor};

const INSTANCE: &str = include_str!("../instances/inst1.des");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let file = parse_instance(INSTANCE)?;
    let inst = file.synthesis_instance()?;
    let setting = inst.setting();
    let s = parse_supervisor("automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 b x0\nend\n", setting)?;

    let attacker = all_enable_attacker(setting);
    println!("attacker:\n{}", attacker.render(setting));

    let o = compose(setting, &attacker, &s, inst.plant(), inst.damage())?;
    for (i, st) in o.states().iter().enumerate() {
        let x = match st.supervisor {
            SupervisorState::Running(x) => s.fsa().state_name(x).to_string(),
            SupervisorState::Halted => "halted".to_string(),
        };
        let moves: Vec<String> = o
            .successors(i)
            .iter()
            .map(|&(e, j)| format!("{}->{j}", setting.alphabet().name(e)))
            .collect();
        println!(
            "{i}: x={x} q={} damage={} [{}]",
            inst.plant().state_name(st.plant),
            o.is_damage(i),
            moves.join(" ")
        );
    }
    println!("damage reachable: {}", o.damage_reachable());
    Ok(())
}
