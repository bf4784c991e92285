//! The `.des` instance format.
//!
//! ```text
//! # comment
//! alphabet: a b
//! controllable: a b
//! observable: a b
//! attacker_observable: a
//! attacker_compromised: a
//!
//! automaton plant
//! states: q0 q1
//! initial: q0
//! marked: q0 q1        # optional, default all
//! trans: q0 a q1
//! end
//! ```
//!
//! Header lines other than `alphabet:` default to the empty set. Blocks have
//! one of the roles `plant`, `lower`, `upper`, `damage`, `supervisor`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::attack::{AttackConstraint, AttackSetting, DamageAutomaton};
use crate::automata::{Alphabet, EventSet, Fsa};
use crate::solve::SynthesisInstance;
use crate::supervision::{ControlConstraint, ModelError, Supervisor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Plant,
    Lower,
    Upper,
    Damage,
    Supervisor,
}

impl Role {
    fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "plant" => Role::Plant,
            "lower" => Role::Lower,
            "upper" => Role::Upper,
            "damage" => Role::Damage,
            "supervisor" => Role::Supervisor,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Plant => "plant",
            Role::Lower => "lower",
            Role::Upper => "upper",
            Role::Damage => "damage",
            Role::Supervisor => "supervisor",
        }
    }
}

/// A parsed instance file. The damage automaton is already normalized; the
/// changes made are listed in `notes`.
#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub setting: AttackSetting,
    pub plant: Option<Fsa>,
    pub lower: Option<Fsa>,
    pub upper: Option<Fsa>,
    pub damage: Option<DamageAutomaton>,
    pub supervisor: Option<Supervisor>,
    pub notes: Vec<String>,
    /// Line of the last line of the file, for diagnostics about missing blocks.
    last_line: usize,
}

impl InstanceFile {
    pub fn alphabet(&self) -> &Alphabet {
        self.setting.alphabet()
    }

    fn require<'a, T>(&self, v: &'a Option<T>, role: Role) -> Result<&'a T, FormatError> {
        v.as_ref()
            .ok_or_else(|| err(self.last_line, format!("missing `automaton {}` block", role.name())))
    }

    pub fn require_plant(&self) -> Result<&Fsa, FormatError> {
        self.require(&self.plant, Role::Plant)
    }

    pub fn require_supervisor(&self) -> Result<&Supervisor, FormatError> {
        self.require(&self.supervisor, Role::Supervisor)
    }

    /// The synthesis problem; needs plant, lower, upper and damage blocks.
    pub fn synthesis_instance(&self) -> Result<SynthesisInstance, FormatError> {
        let plant = self.require(&self.plant, Role::Plant)?.clone();
        let lower = self.require(&self.lower, Role::Lower)?.clone();
        let upper = self.require(&self.upper, Role::Upper)?.clone();
        let damage = self.require(&self.damage, Role::Damage)?.clone();
        SynthesisInstance::new(self.setting.clone(), plant, lower, upper, damage)
            .map_err(|e| err(self.last_line, e.to_string()))
    }
}

struct Block {
    role: Role,
    line: usize,
    states: Option<(usize, Vec<String>)>,
    initial: Option<(usize, String)>,
    marked: Option<(usize, Vec<String>)>,
    trans: Vec<(usize, [String; 3])>,
}

fn words(rest: &str) -> Vec<String> {
    rest.split_whitespace().map(str::to_string).collect()
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Parses a complete instance file.
pub fn parse_instance(text: &str) -> Result<InstanceFile, FormatError> {
    let mut header: [Option<(usize, Vec<String>)>; 5] = Default::default();
    const KEYS: [&str; 5] = [
        "alphabet",
        "controllable",
        "observable",
        "attacker_observable",
        "attacker_compromised",
    ];
    let mut body_start = None;
    let mut last_line = 0;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        last_line = no;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("automaton") {
            body_start.get_or_insert(i);
            continue;
        }
        if body_start.is_some() {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(err(no, format!("expected `key: values`, found `{line}`")));
        };
        let Some(k) = KEYS.iter().position(|x| *x == key.trim()) else {
            return Err(err(no, format!("unknown header key `{}`", key.trim())));
        };
        if header[k].is_some() {
            return Err(err(no, format!("duplicate `{}` line", KEYS[k])));
        }
        header[k] = Some((no, words(rest)));
    }
    let (alpha_line, names) = header[0].clone().ok_or_else(|| err(1, "missing `alphabet:` line"))?;
    let alphabet = Alphabet::new(names).map_err(|e| err(alpha_line, e.to_string()))?;
    let set = |k: usize| -> Result<EventSet, FormatError> {
        match &header[k] {
            None => Ok(EventSet::EMPTY),
            Some((no, ws)) => alphabet
                .set_of(ws.iter().map(String::as_str))
                .map_err(|e| err(*no, e.to_string())),
        }
    };
    let line_of = |k: usize| header[k].as_ref().map_or(alpha_line, |(no, _)| *no);
    let control = ControlConstraint::new(&alphabet, set(1)?, set(2)?).map_err(|e| err(line_of(1), e.to_string()))?;
    let attack = AttackConstraint::new(set(3)?, set(4)?);
    let setting = AttackSetting::new(alphabet.clone(), control, attack).map_err(|e| err(line_of(4), e.to_string()))?;

    let mut file = InstanceFile {
        setting,
        plant: None,
        lower: None,
        upper: None,
        damage: None,
        supervisor: None,
        notes: Vec::new(),
        last_line,
    };
    let body: Vec<(usize, &str)> = match body_start {
        Some(start) => text.lines().enumerate().skip(start).map(|(i, l)| (i + 1, l)).collect(),
        None => Vec::new(),
    };
    for block in parse_blocks(&body)? {
        let fsa = build_fsa(&alphabet, &block)?;
        let slot_taken = match block.role {
            Role::Plant => file.plant.replace(fsa).is_some(),
            Role::Lower => file.lower.replace(fsa).is_some(),
            Role::Upper => file.upper.replace(fsa).is_some(),
            Role::Damage => {
                let (d, notes) = DamageAutomaton::normalize(&fsa).map_err(|e| err(block.line, e.to_string()))?;
                file.notes.extend(notes);
                file.damage.replace(d).is_some()
            }
            Role::Supervisor => {
                let s = check_supervisor(fsa, &file.setting, block.line)?;
                file.supervisor.replace(s).is_some()
            }
        };
        if slot_taken {
            return Err(err(block.line, format!("second `automaton {}` block", block.role.name())));
        }
    }
    Ok(file)
}

fn check_supervisor(fsa: Fsa, setting: &AttackSetting, line: usize) -> Result<Supervisor, FormatError> {
    let s = Supervisor::new(fsa);
    setting
        .check_supervisor(&s)
        .map_err(|e: ModelError| err(line, e.to_string()))?;
    Ok(s)
}

/// Parses a file holding a single `automaton supervisor` block over the
/// alphabet and control constraint of `setting`.
pub fn parse_supervisor(text: &str, setting: &AttackSetting) -> Result<Supervisor, FormatError> {
    let body: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let blocks = parse_blocks(&body)?;
    let mut sup = None;
    for b in blocks {
        if b.role != Role::Supervisor {
            return Err(err(b.line, format!("expected a supervisor block, found `{}`", b.role.name())));
        }
        if sup.is_some() {
            return Err(err(b.line, "second supervisor block"));
        }
        let fsa = build_fsa(setting.alphabet(), &b)?;
        sup = Some(check_supervisor(fsa, setting, b.line)?);
    }
    sup.ok_or_else(|| err(body.len().max(1), "no `automaton supervisor` block"))
}

fn parse_blocks(lines: &[(usize, &str)]) -> Result<Vec<Block>, FormatError> {
    let mut blocks = Vec::new();
    let mut cur: Option<Block> = None;
    let mut last = 0;
    for &(no, raw) in lines {
        last = no;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("automaton") {
            if cur.is_some() {
                return Err(err(no, "`automaton` inside an unterminated block"));
            }
            let name = rest.trim();
            let role = Role::parse(name).ok_or_else(|| err(no, format!("unknown role `{name}`")))?;
            cur = Some(Block {
                role,
                line: no,
                states: None,
                initial: None,
                marked: None,
                trans: Vec::new(),
            });
            continue;
        }
        let Some(b) = cur.as_mut() else {
            return Err(err(no, format!("`{line}` outside an automaton block")));
        };
        if line == "end" {
            blocks.push(cur.take().expect("inside a block"));
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(err(no, format!("expected `key: values`, found `{line}`")));
        };
        let ws = words(rest);
        match key.trim() {
            "states" if b.states.is_none() => b.states = Some((no, ws)),
            "initial" if b.initial.is_none() => {
                let [s] = &ws[..] else {
                    return Err(err(no, "`initial:` takes exactly one state"));
                };
                b.initial = Some((no, s.clone()));
            }
            "marked" if b.marked.is_none() => b.marked = Some((no, ws)),
            "trans" => {
                let [s, e, d] = &ws[..] else {
                    return Err(err(no, "`trans:` takes `source event target`"));
                };
                b.trans.push((no, [s.clone(), e.clone(), d.clone()]));
            }
            k @ ("states" | "initial" | "marked") => return Err(err(no, format!("duplicate `{k}:` line"))),
            k => return Err(err(no, format!("unknown block key `{k}`"))),
        }
    }
    if let Some(b) = cur {
        return Err(err(last.max(b.line), format!("`automaton {}` block has no `end`", b.role.name())));
    }
    Ok(blocks)
}

fn build_fsa(alphabet: &Alphabet, b: &Block) -> Result<Fsa, FormatError> {
    let (sl, states) = b.states.clone().ok_or_else(|| err(b.line, "block has no `states:` line"))?;
    let initial = match &b.initial {
        Some((_, s)) => s.clone(),
        None => states.first().cloned().ok_or_else(|| err(sl, "no states"))?,
    };
    let il = b.initial.as_ref().map_or(sl, |(l, _)| *l);
    let mut fsa = Fsa::new(alphabet.clone(), states, &initial).map_err(|e| err(il, e.to_string()))?;
    for (no, [s, e, d]) in &b.trans {
        fsa.add_transition(s, e, d).map_err(|x| err(*no, x.to_string()))?;
    }
    if let Some((no, marked)) = &b.marked {
        let names: Vec<&str> = marked.iter().map(String::as_str).collect();
        fsa.set_marked_states(&names).map_err(|x| err(*no, x.to_string()))?;
    }
    Ok(fsa)
}

/// One `automaton <role>` block; transitions in state then event order and
/// the `marked:` line only when some state is unmarked.
pub fn write_block(role: Role, fsa: &Fsa) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "automaton {}", role.name());
    let _ = writeln!(out, "states: {}", fsa.state_names().join(" "));
    let _ = writeln!(out, "initial: {}", fsa.state_name(fsa.initial()));
    if fsa.marked_states().count() != fsa.num_states() {
        let marked: Vec<&str> = fsa.marked_states().map(|s| fsa.state_name(s)).collect();
        let _ = writeln!(out, "marked: {}", marked.join(" "));
    }
    for (s, e, d) in fsa.transitions() {
        let _ = writeln!(
            out,
            "trans: {} {} {}",
            fsa.state_name(s),
            fsa.alphabet().name(e),
            fsa.state_name(d)
        );
    }
    out.push_str("end\n");
    out
}

pub fn write_supervisor(s: &Supervisor) -> String {
    write_block(Role::Supervisor, s.fsa())
}

fn write_set(out: &mut String, key: &str, alphabet: &Alphabet, set: EventSet) {
    let names: Vec<&str> = set.iter().map(|e| alphabet.name(e)).collect();
    let _ = writeln!(out, "{key}: {}", names.join(" "));
}

/// Serializes the header and every present block.
pub fn write_instance(file: &InstanceFile) -> String {
    let setting = &file.setting;
    let alphabet = setting.alphabet();
    let mut out = String::new();
    let _ = writeln!(out, "alphabet: {}", alphabet.names().join(" "));
    write_set(&mut out, "controllable", alphabet, setting.control().controllable());
    write_set(&mut out, "observable", alphabet, setting.control().observable());
    write_set(&mut out, "attacker_observable", alphabet, setting.attack().observable());
    write_set(&mut out, "attacker_compromised", alphabet, setting.attack().compromised());
    let blocks = [
        (Role::Plant, file.plant.as_ref()),
        (Role::Lower, file.lower.as_ref()),
        (Role::Upper, file.upper.as_ref()),
        (Role::Damage, file.damage.as_ref().map(DamageAutomaton::fsa)),
        (Role::Supervisor, file.supervisor.as_ref().map(Supervisor::fsa)),
    ];
    for (role, fsa) in blocks {
        if let Some(f) = fsa {
            out.push('\n');
            out.push_str(&write_block(role, f));
        }
    }
    out
}

/// An instance file for a synthesis problem, without a supervisor block.
pub fn instance_file_of(inst: &SynthesisInstance) -> InstanceFile {
    InstanceFile {
        setting: inst.setting().clone(),
        plant: Some(inst.plant().clone()),
        lower: Some(inst.lower().clone()),
        upper: Some(inst.upper().clone()),
        damage: Some(inst.damage().clone()),
        supervisor: None,
        notes: Vec::new(),
        last_line: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
alphabet: a
controllable: a
automaton plant
states: q0
end
automaton lower
states: q0
end
automaton upper
states: q0
end
automaton damage
states: w0
marked:
end
";

    #[test]
    fn minimal_instance_parses() {
        let f = parse_instance(MINIMAL).unwrap();
        let inst = f.synthesis_instance().unwrap();
        assert_eq!(inst.plant().num_states(), 1);
        assert!(!f.notes.is_empty());
        assert_eq!(f.setting.attack().compromised(), EventSet::EMPTY);
    }

    #[test]
    fn undeclared_target_reports_its_line() {
        let text = "alphabet: a\nautomaton plant\nstates: q0\ntrans: q0 a q1\nend\n";
        let e = parse_instance(text).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.msg.contains("q1"));
    }

    #[test]
    fn diagnostics_carry_lines() {
        let nondet = "alphabet: a\nautomaton plant\nstates: q0 q1\ntrans: q0 a q0\ntrans: q0 a q1\nend\n";
        assert_eq!(parse_instance(nondet).unwrap_err().line, 5);
        let bad_event = "alphabet: a\nautomaton plant\nstates: q0\ntrans: q0 z q0\nend\n";
        assert_eq!(parse_instance(bad_event).unwrap_err().line, 4);
        let not_subset = "alphabet: a b\ncontrollable: a\nattacker_compromised: b\n";
        assert_eq!(parse_instance(not_subset).unwrap_err().line, 3);
        let not_sink = "alphabet: a\nautomaton damage\nstates: w0 w1\nmarked: w0\ntrans: w0 a w1\nend\n";
        assert_eq!(parse_instance(not_sink).unwrap_err().line, 2);
        let missing = "alphabet: a\nautomaton plant\nstates: q0\nend\n";
        let e = parse_instance(missing).unwrap().synthesis_instance().unwrap_err();
        assert!(e.msg.contains("lower"));
        assert!(parse_instance("controllable: a\n").is_err());
        assert_eq!(parse_instance("alphabet: a\nautomaton plant\nstates: q0\n").unwrap_err().line, 3);
    }

    #[test]
    fn supervisor_block_written_and_read() {
        let f = parse_instance(MINIMAL).unwrap();
        let mut fsa = Fsa::new(f.alphabet().clone(), ["x0"], "x0").unwrap();
        fsa.add_transition("x0", "a", "x0").unwrap();
        let s = Supervisor::new(fsa);
        let text = write_supervisor(&s);
        assert_eq!(text, "automaton supervisor\nstates: x0\ninitial: x0\ntrans: x0 a x0\nend\n");
        assert_eq!(parse_supervisor(&text, &f.setting).unwrap(), s);
        // a must be defined everywhere when uncontrollable
        let f2 = parse_instance("alphabet: a\n").unwrap();
        let empty = "automaton supervisor\nstates: x0\nend\n";
        assert!(parse_supervisor(empty, &f2.setting).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let f = parse_instance(MINIMAL).unwrap();
        let text = write_instance(&f);
        let g = parse_instance(&text).unwrap();
        assert_eq!(write_instance(&g), text);
        assert_eq!(g.damage, f.damage);
    }
}
