#![allow(dead_code)]

use rand::Rng;
use supsynth::attack::{
    all_enable_attacker, compose, enumerate_attackers, AttackConstraint, AttackSetting, DamageAutomaton, MooreAttacker,
};
use supsynth::automata::{Alphabet, EventId, EventSet, Fsa, StateId};
use supsynth::format::parse_instance;
use supsynth::solve::SynthesisInstance;
use supsynth::supervision::{check_range_control, ControlConstraint, Supervisor};

pub fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

pub fn load(name: &str) -> SynthesisInstance {
    let path = format!("{}/instances/{name}.des", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    parse_instance(&text).unwrap().synthesis_instance().unwrap()
}

/// Automaton over `alphabet` from `(src, event, dst)` triples; all states marked.
pub fn fsa(alphabet: &Alphabet, states: &[&str], trans: &[(&str, &str, &str)]) -> Fsa {
    let mut f = Fsa::new(alphabet.clone(), states.iter().copied(), states[0]).unwrap();
    for (s, e, d) in trans {
        f.add_transition(s, e, d).unwrap();
    }
    f
}

/// Prefix closure of one word.
pub fn word(alphabet: &Alphabet, w: &str) -> Fsa {
    let names: Vec<String> = (0..=w.len()).map(|i| format!("p{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let evs: Vec<String> = w.chars().map(|c| c.to_string()).collect();
    let trans: Vec<(&str, &str, &str)> = (0..w.len()).map(|i| (refs[i], evs[i].as_str(), refs[i + 1])).collect();
    fsa(alphabet, &refs, &trans)
}

pub struct PlantShape {
    pub name: &'static str,
    pub states: &'static [&'static str],
    pub trans: &'static [(&'static str, &'static str, &'static str)],
    /// A maximal word of the plant, used for single-string specifications.
    pub word: &'static str,
}

pub const PLANTS: [PlantShape; 3] = [
    PlantShape {
        name: "branch",
        states: &["q0", "q1", "q2"],
        trans: &[("q0", "a", "q1"), ("q0", "b", "q2")],
        word: "b",
    },
    PlantShape {
        name: "chain",
        states: &["q0", "q1", "q2"],
        trans: &[("q0", "a", "q1"), ("q1", "b", "q2")],
        word: "ab",
    },
    PlantShape {
        name: "loop",
        states: &["q0", "q1", "q2"],
        trans: &[("q0", "b", "q0"), ("q0", "a", "q1"), ("q1", "b", "q2")],
        word: "bab",
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecPair {
    /// `G1 = {ε}`, `G2 = G`.
    EmptyToPlant,
    /// `G1 = w`, `G2 = G`.
    WordToPlant,
    /// `G1 = G2 = w`.
    WordOnly,
    /// `G1 = G2 = G`.
    PlantOnly,
}

pub const SPECS: [SpecPair; 4] = [SpecPair::EmptyToPlant, SpecPair::WordToPlant, SpecPair::WordOnly, SpecPair::PlantOnly];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Damage {
    /// Any occurrence of `a`.
    EventA,
    /// The substring `ab`.
    TwoStep,
}

pub const DAMAGES: [Damage; 2] = [Damage::EventA, Damage::TwoStep];

pub fn damage(alphabet: &Alphabet, d: Damage) -> DamageAutomaton {
    let mut f = match d {
        Damage::EventA => fsa(alphabet, &["w0", "wm"], &[("w0", "a", "wm"), ("w0", "b", "w0")]),
        Damage::TwoStep => fsa(
            alphabet,
            &["w0", "w1", "wm"],
            &[("w0", "a", "w1"), ("w0", "b", "w0"), ("w1", "a", "w1"), ("w1", "b", "wm")],
        ),
    };
    let marked = f.states().last().unwrap();
    f.set_marked_states(&[f.state_name(marked).to_string().as_str()]).unwrap();
    DamageAutomaton::normalize(&f).unwrap().0
}

/// Every `(Σc, Σo, Σ_{o,A}, Σ_{c,A})` over `{a,b}` with `Σ_{c,A} ⊆ Σc`.
pub fn settings() -> Vec<AttackSetting> {
    let alphabet = ab();
    let mut out = Vec::new();
    for c in 0..4u64 {
        for o in 0..4u64 {
            for oa in 0..4u64 {
                for ca in 0..4u64 {
                    if ca & !c != 0 {
                        continue;
                    }
                    let control = ControlConstraint::new(&alphabet, EventSet::from_bits(c), EventSet::from_bits(o)).unwrap();
                    let attack = AttackConstraint::new(EventSet::from_bits(oa), EventSet::from_bits(ca));
                    out.push(AttackSetting::new(alphabet.clone(), control, attack).unwrap());
                }
            }
        }
    }
    out
}

pub struct CorpusEntry {
    pub name: String,
    pub instance: SynthesisInstance,
}

/// Fixed enumeration: every setting combined with every plant, spec pair and damage.
pub fn corpus() -> Vec<CorpusEntry> {
    let alphabet = ab();
    let mut out = Vec::new();
    for (si, setting) in settings().into_iter().enumerate() {
        for p in &PLANTS {
            let g = fsa(&alphabet, p.states, p.trans);
            let w = word(&alphabet, p.word);
            for spec in SPECS {
                let (lower, upper) = match spec {
                    SpecPair::EmptyToPlant => (word(&alphabet, ""), g.clone()),
                    SpecPair::WordToPlant => (w.clone(), g.clone()),
                    SpecPair::WordOnly => (w.clone(), w.clone()),
                    SpecPair::PlantOnly => (g.clone(), g.clone()),
                };
                for d in DAMAGES {
                    let instance =
                        SynthesisInstance::new(setting.clone(), g.clone(), lower.clone(), upper.clone(), damage(&alphabet, d))
                            .unwrap();
                    out.push(CorpusEntry {
                        name: format!("setting{si}/{}/{spec:?}/{d:?}", p.name),
                        instance,
                    });
                }
            }
        }
    }
    out
}

/// Every partial transition table on `n` states; no validity filter.
pub fn all_tables(alphabet: &Alphabet, n: usize) -> Vec<Fsa> {
    let cells = n * alphabet.len();
    let radix = n + 1;
    let total = radix.pow(cells as u32);
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    (0..total)
        .map(|mut code| {
            let mut delta = vec![vec![None; alphabet.len()]; n];
            for row in delta.iter_mut() {
                for cell in row.iter_mut() {
                    let v = code % radix;
                    code /= radix;
                    *cell = (v > 0).then(|| StateId(v - 1));
                }
            }
            Fsa::from_table(alphabet.clone(), names.clone(), delta, StateId(0), vec![true; n])
        })
        .collect()
}

/// Every `n`-state supervisor valid under the setting's control constraint.
pub fn valid_supervisors(setting: &AttackSetting, n: usize) -> Vec<Supervisor> {
    all_tables(setting.alphabet(), n)
        .into_iter()
        .map(Supervisor::new)
        .filter(|s| s.validate(setting.control()).is_empty())
        .collect()
}

pub fn attack_succeeds(inst: &SynthesisInstance, a: &MooreAttacker, s: &Supervisor) -> bool {
    compose(inst.setting(), a, s, inst.plant(), inst.damage()).unwrap().damage_reachable()
}

/// Some enumerated `m`-state attacker reaches damage against `s`.
pub fn some_attacker_succeeds(inst: &SynthesisInstance, s: &Supervisor, m: usize) -> bool {
    enumerate_attackers(m, inst.setting(), 1 << 20)
        .unwrap()
        .any(|a| attack_succeeds(inst, &a, s))
}

/// Brute-force verdict: a valid `n`-state supervisor meets range control and
/// defeats every 1-state attacker.
pub fn oracle(inst: &SynthesisInstance, n: usize) -> Option<Supervisor> {
    valid_supervisors(inst.setting(), n).into_iter().find(|s| {
        check_range_control(s, inst.plant(), inst.lower(), inst.upper()) && !some_attacker_succeeds(inst, s, 1)
    })
}

pub fn all_enable_succeeds(inst: &SynthesisInstance, s: &Supervisor) -> bool {
    attack_succeeds(inst, &all_enable_attacker(inst.setting()), s)
}

/// Uniform valid `n`-state supervisor: random tables until one validates.
pub fn random_supervisor(rng: &mut impl Rng, setting: &AttackSetting, n: usize) -> Supervisor {
    let alphabet = setting.alphabet();
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    loop {
        let delta: Vec<Vec<Option<StateId>>> = (0..n)
            .map(|_| {
                (0..alphabet.len())
                    .map(|_| {
                        let v = rng.gen_range(0..=n);
                        (v > 0).then(|| StateId(v - 1))
                    })
                    .collect()
            })
            .collect();
        let s = Supervisor::new(Fsa::from_table(alphabet.clone(), names.clone(), delta, StateId(0), vec![true; n]));
        if s.validate(setting.control()).is_empty() {
            return s;
        }
    }
}

pub fn random_attacker(rng: &mut impl Rng, setting: &AttackSetting, m: usize) -> MooreAttacker {
    let obs = setting.observations().len();
    let next = (0..m).map(|_| (0..obs).map(|_| rng.gen_range(0..m)).collect()).collect();
    let output = (0..m)
        .map(|_| {
            let mut out = EventSet::EMPTY;
            for e in setting.attack().compromised().iter() {
                if rng.gen_bool(0.5) {
                    out.insert(EventId(e.0));
                }
            }
            out
        })
        .collect();
    MooreAttacker::new(next, output).unwrap()
}
