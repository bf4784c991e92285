use supsynth::format::{parse_instance, write_supervisor};
use supsynth::solve::{bound_schedule, synthesize_cegis, synthesize_direct, Method, SynthesisInstance, SynthesisOptions};

fn load(name: &str) -> SynthesisInstance {
    let path = format!("{}/instances/{name}.des", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    parse_instance(&text).unwrap().synthesis_instance().unwrap()
}

#[test]
fn inst2_found_with_b_only_supervisor() {
    let inst = load("inst2");
    let out = synthesize_direct(&inst, &SynthesisOptions::default()).unwrap();
    let s = out.supervisor().expect("found");
    assert_eq!(write_supervisor(s), "automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 b x0\nend\n");
    let out = synthesize_cegis(&inst, &SynthesisOptions::default()).unwrap();
    assert!(out.is_found());
    assert!(out.sat_calls() <= 2);
}

#[test]
fn inst1_not_found_up_to_three_states() {
    let inst = load("inst1");
    for method in [Method::Direct, Method::Cegis] {
        let out = bound_schedule(&inst, 3, method, &SynthesisOptions::default()).unwrap();
        assert!(!out.is_found());
        assert_eq!(out.stats().len(), 3);
    }
}

#[test]
fn memory_instance_needs_two_states() {
    let inst = load("memory");
    let one = synthesize_direct(&inst, &SynthesisOptions::default()).unwrap();
    assert!(!one.is_found());
    let out = bound_schedule(&inst, 3, Method::Cegis, &SynthesisOptions::default()).unwrap();
    match out {
        supsynth::solve::SynthesisOutcome::Found { n, .. } => assert_eq!(n, 2),
        _ => panic!("expected a two-state supervisor"),
    }
}
