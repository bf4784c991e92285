//! Moore-machine actuator attackers and the attacked closed loop.
//!
//! The closed loop `∘(A,S,G)‖H` runs the attacker `A`, the transformed
//! supervisor `S^T`, the plant `G` and the damage automaton `H` in lockstep.
//! A compromised event fires when the attacker's current output enables it;
//! every other event fires when the supervisor defines it. The attacker moves
//! only when it observes something: the event (if in `Σ_{o,A}`) and/or a new
//! control command (when an observable event changes `Γ`).

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automata::{Alphabet, EventId, EventSet, Fsa, StateId};
use crate::supervision::{transform, CommandSpace, ControlConstraint, ModelError, Supervisor};

/// `(Σ_{o,A}, Σ_{c,A})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttackConstraint {
    observable: EventSet,
    compromised: EventSet,
}

impl AttackConstraint {
    pub fn new(observable: EventSet, compromised: EventSet) -> Self {
        AttackConstraint {
            observable,
            compromised,
        }
    }

    /// `Σ_{o,A}`.
    pub fn observable(&self) -> EventSet {
        self.observable
    }

    /// `Σ_{c,A}`.
    pub fn compromised(&self) -> EventSet {
        self.compromised
    }
}

/// What the attacker sees on one step. `(None, None)` never occurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AttackObservation {
    pub event: Option<EventId>,
    pub command: Option<EventSet>,
}

impl AttackObservation {
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let ev = self.event.map_or("eps".to_string(), |e| alphabet.name(e).to_string());
        let cmd = self.command.map_or("eps".to_string(), |c| alphabet.format_set(c));
        format!("({ev},{cmd})")
    }
}

/// The attacker's observation alphabet: `Σ_{o,A}×Γ`, then `Σ_{o,A}×{ε}`,
/// then `{ε}×Γ`, each in event then command order.
pub fn attack_alphabet(attack: &AttackConstraint, commands: &CommandSpace) -> Vec<AttackObservation> {
    let mut out = Vec::new();
    for e in attack.observable().iter() {
        for c in commands.iter() {
            out.push(AttackObservation {
                event: Some(e),
                command: Some(c),
            });
        }
    }
    for e in attack.observable().iter() {
        out.push(AttackObservation {
            event: Some(e),
            command: None,
        });
    }
    for c in commands.iter() {
        out.push(AttackObservation {
            event: None,
            command: Some(c),
        });
    }
    out
}

/// Alphabet, control and attack constraints, and the derived command space
/// and observation alphabet, bundled for the operations that need all of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackSetting {
    alphabet: Alphabet,
    control: ControlConstraint,
    attack: AttackConstraint,
    commands: CommandSpace,
    observations: Vec<AttackObservation>,
}

impl AttackSetting {
    pub fn new(alphabet: Alphabet, control: ControlConstraint, attack: AttackConstraint) -> Result<Self, ModelError> {
        if control.universe() != alphabet.all() {
            return Err(ModelError::AlphabetMismatch("control constraint".into()));
        }
        if !attack.observable().is_subset(alphabet.all()) {
            return Err(ModelError::NotSubset {
                what: "attacker-observable events",
                of: "the alphabet",
            });
        }
        if !attack.compromised().is_subset(control.controllable()) {
            return Err(ModelError::NotSubset {
                what: "compromised events",
                of: "controllable events",
            });
        }
        let commands = CommandSpace::new(&control);
        let observations = attack_alphabet(&attack, &commands);
        Ok(AttackSetting {
            alphabet,
            control,
            attack,
            commands,
            observations,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn control(&self) -> &ControlConstraint {
        &self.control
    }

    pub fn attack(&self) -> &AttackConstraint {
        &self.attack
    }

    pub fn commands(&self) -> &CommandSpace {
        &self.commands
    }

    pub fn observations(&self) -> &[AttackObservation] {
        &self.observations
    }

    /// Position of `(event, command)` in [`AttackSetting::observations`].
    pub fn observation_index(&self, event: Option<EventId>, command: Option<EventSet>) -> Option<usize> {
        let oa: Vec<EventId> = self.attack.observable().iter().collect();
        let ng = self.commands.len();
        let ei = match event {
            Some(e) => Some(oa.iter().position(|x| *x == e)?),
            None => None,
        };
        let gi = match command {
            Some(c) => Some(self.commands.index_of(c)?),
            None => None,
        };
        match (ei, gi) {
            (Some(e), Some(g)) => Some(e * ng + g),
            (Some(e), None) => Some(oa.len() * ng + e),
            (None, Some(g)) => Some(oa.len() * ng + oa.len() + g),
            (None, None) => None,
        }
    }

    /// What the attacker observes when `e` fires at supervisor state `x`, or
    /// `None` when it observes nothing.
    pub fn observation_for(&self, s: &Supervisor, x: StateId, e: EventId) -> Option<usize> {
        let event = self.attack.observable().contains(e).then_some(e);
        let after = s.command_after(x, e);
        let changed = self.control.observable().contains(e) && after != s.gamma(x);
        let command = changed.then_some(after);
        self.observation_index(event, command)
    }

    pub fn check_fsa(&self, what: &str, fsa: &Fsa) -> Result<(), ModelError> {
        if fsa.alphabet() != &self.alphabet {
            return Err(ModelError::AlphabetMismatch(what.to_string()));
        }
        Ok(())
    }

    pub fn check_supervisor(&self, s: &Supervisor) -> Result<(), ModelError> {
        self.check_fsa("supervisor", s.fsa())?;
        let violations = s.validate(&self.control);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidSupervisor(violations))
        }
    }
}

/// A complete Moore machine over the observation alphabet whose output at
/// each state is the set of compromised events it enables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MooreAttacker {
    next: Vec<Vec<usize>>,
    output: Vec<EventSet>,
}

impl MooreAttacker {
    /// `next[y][o]` is the successor of `y` on observation `o`; state 0 is initial.
    pub fn new(next: Vec<Vec<usize>>, output: Vec<EventSet>) -> Result<Self, ModelError> {
        let m = next.len();
        if m == 0 || output.len() != m {
            return Err(ModelError::AttackerShape("needs at least one state and one output per state".into()));
        }
        let width = next[0].len();
        if next.iter().any(|row| row.len() != width || row.iter().any(|&d| d >= m)) {
            return Err(ModelError::AttackerShape("transition table is not total".into()));
        }
        Ok(MooreAttacker { next, output })
    }

    pub fn num_states(&self) -> usize {
        self.next.len()
    }

    pub fn num_observations(&self) -> usize {
        self.next[0].len()
    }

    pub fn next(&self, y: usize, obs: usize) -> usize {
        self.next[y][obs]
    }

    pub fn output(&self, y: usize) -> EventSet {
        self.output[y]
    }

    /// Checks that the attacker fits `setting`.
    pub fn check(&self, setting: &AttackSetting) -> Result<(), ModelError> {
        if self.num_observations() != setting.observations().len() {
            return Err(ModelError::AttackerShape(format!(
                "{} observations, expected {}",
                self.num_observations(),
                setting.observations().len()
            )));
        }
        if self.output.iter().any(|o| !o.is_subset(setting.attack().compromised())) {
            return Err(ModelError::AttackerShape("output outside the compromised events".into()));
        }
        Ok(())
    }

    /// Same behaviour with `m` states; extra states copy state 0's output and
    /// lead back to it.
    pub fn padded(&self, m: usize) -> MooreAttacker {
        let mut a = self.clone();
        let width = self.num_observations();
        while a.next.len() < m {
            a.next.push(vec![0; width]);
            a.output.push(self.output[0]);
        }
        a
    }

    pub fn render(&self, setting: &AttackSetting) -> String {
        let alphabet = setting.alphabet();
        let mut out = String::new();
        let names: Vec<String> = (0..self.num_states()).map(|y| format!("y{y}")).collect();
        let _ = writeln!(out, "states: {}", names.join(" "));
        for (y, o) in self.output.iter().enumerate() {
            let _ = writeln!(out, "output: y{y} {}", alphabet.format_set(*o));
        }
        for (y, row) in self.next.iter().enumerate() {
            for (o, d) in row.iter().enumerate() {
                let _ = writeln!(out, "trans: y{y} {} y{d}", setting.observations()[o].render(alphabet));
            }
        }
        out
    }
}

/// One state, self-loops everywhere, enables every compromised event.
pub fn all_enable_attacker(setting: &AttackSetting) -> MooreAttacker {
    MooreAttacker {
        next: vec![vec![0; setting.observations().len()]],
        output: vec![setting.attack().compromised()],
    }
}

/// Number of `m`-state attackers: `m^(m·|obs|) · 2^(m·|Σ_{c,A}|)`, saturating.
pub fn attacker_count(m: usize, setting: &AttackSetting) -> u128 {
    let obs = setting.observations().len() as u32;
    let ca = setting.attack().compromised().len() as u32;
    let trans = (m as u128).checked_pow(m as u32 * obs);
    let outs = 2u128.checked_pow(m as u32 * ca);
    match (trans, outs) {
        (Some(t), Some(o)) => t.saturating_mul(o),
        _ => u128::MAX,
    }
}

/// Every `m`-state attacker, in a fixed order: output functions vary fastest,
/// then transition functions in mixed-radix order.
pub fn enumerate_attackers(m: usize, setting: &AttackSetting, cap: u128) -> Result<AttackerEnumeration, ModelError> {
    let count = attacker_count(m, setting);
    if m == 0 || count > cap {
        let count = if count == u128::MAX {
            "more than 2^128".to_string()
        } else {
            count.to_string()
        };
        return Err(ModelError::TooManyAttackers { count, cap });
    }
    Ok(AttackerEnumeration {
        m,
        width: setting.observations().len(),
        compromised: setting.attack().compromised().iter().collect(),
        trans: vec![0; m * setting.observations().len()],
        outs: vec![0; m],
        done: false,
    })
}

/// Iterator returned by [`enumerate_attackers`].
#[derive(Debug, Clone)]
pub struct AttackerEnumeration {
    m: usize,
    width: usize,
    compromised: Vec<EventId>,
    trans: Vec<usize>,
    outs: Vec<u64>,
    done: bool,
}

impl Iterator for AttackerEnumeration {
    type Item = MooreAttacker;

    fn next(&mut self) -> Option<MooreAttacker> {
        if self.done {
            return None;
        }
        let next = self.trans.chunks(self.width.max(1)).map(|c| c.to_vec()).collect::<Vec<_>>();
        let next = if self.width == 0 { vec![vec![]; self.m] } else { next };
        let output = self
            .outs
            .iter()
            .map(|bits| {
                self.compromised
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| bits & (1 << k) != 0)
                    .map(|(_, e)| *e)
                    .collect()
            })
            .collect();
        let item = MooreAttacker { next, output };

        let out_radix = 1u64 << self.compromised.len();
        let mut carry = true;
        for o in self.outs.iter_mut() {
            *o += 1;
            if *o < out_radix {
                carry = false;
                break;
            }
            *o = 0;
        }
        if carry {
            for t in self.trans.iter_mut() {
                *t += 1;
                if *t < self.m {
                    carry = false;
                    break;
                }
                *t = 0;
            }
        }
        self.done = carry;
        Some(item)
    }
}

/// A complete damage automaton with a single marked sink `w_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DamageAutomaton {
    fsa: Fsa,
    sink: StateId,
}

impl DamageAutomaton {
    /// Brings an arbitrary damage automaton into normal form.
    ///
    /// Marked states must be sinks (all their defined transitions are
    /// self-loops); missing self-loops are added and several marked states are
    /// merged into the first one. Remaining undefined transitions go to a
    /// fresh unmarked absorbing state. Without marked states an unreachable
    /// marked sink is added. Returns one note per change made.
    pub fn normalize(fsa: &Fsa) -> Result<(DamageAutomaton, Vec<String>), ModelError> {
        let alphabet = fsa.alphabet().clone();
        let marked: Vec<StateId> = fsa.marked_states().collect();
        for &w in &marked {
            if fsa.enabled(w).iter().any(|e| fsa.next(w, e) != Some(w)) {
                return Err(ModelError::DamageNotSink(fsa.state_name(w).to_string()));
            }
        }
        let mut notes = Vec::new();
        let mut names: Vec<String> = Vec::new();
        let mut remap: Vec<Option<StateId>> = vec![None; fsa.num_states()];
        let merged_into = marked.first().copied();
        for s in fsa.states() {
            if fsa.is_marked(s) && Some(s) != merged_into {
                continue;
            }
            remap[s.0] = Some(StateId(names.len()));
            names.push(fsa.state_name(s).to_string());
        }
        if let Some(first) = merged_into {
            for &w in &marked[1..] {
                remap[w.0] = remap[first.0];
            }
            if marked.len() > 1 {
                notes.push(format!(
                    "damage: merged {} marked sink states into `{}`",
                    marked.len(),
                    fsa.state_name(first)
                ));
            }
        }
        let sink = match merged_into {
            Some(first) => remap[first.0].expect("kept"),
            None => {
                let id = StateId(names.len());
                names.push(unique(&names, "w_m"));
                notes.push("damage: no marked state, added an unreachable damage sink".to_string());
                id
            }
        };
        let mut delta: Vec<Vec<Option<StateId>>> = vec![vec![None; alphabet.len()]; names.len()];
        for (s, e, d) in fsa.transitions() {
            if let Some(ns) = remap[s.0] {
                delta[ns.0][e.0] = remap[d.0];
            }
        }
        if delta[sink.0].iter().any(Option::is_none) {
            if merged_into.is_some() {
                notes.push("damage: completed the marked sink with self-loops".to_string());
            }
            delta[sink.0] = vec![Some(sink); alphabet.len()];
        }
        if delta.iter().any(|row| row.iter().any(Option::is_none)) {
            let safe = StateId(names.len());
            names.push(unique(&names, "w_safe"));
            delta.push(vec![Some(safe); alphabet.len()]);
            for row in delta.iter_mut() {
                for t in row.iter_mut() {
                    t.get_or_insert(safe);
                }
            }
            notes.push("damage: completed with a fresh unmarked absorbing state".to_string());
        }
        let marked = (0..names.len()).map(|i| i == sink.0).collect();
        let initial = remap[fsa.initial().0].expect("initial state kept");
        Ok((
            DamageAutomaton {
                fsa: Fsa::from_table(alphabet, names, delta, initial, marked),
                sink,
            },
            notes,
        ))
    }

    /// The damage automaton with empty marked language.
    pub fn never(alphabet: &Alphabet) -> DamageAutomaton {
        let f = Fsa::new(alphabet.clone(), ["w0"], "w0").expect("one state");
        let mut f = f;
        f.set_marked(StateId(0), false);
        Self::normalize(&f).expect("no marked states").0
    }

    pub fn fsa(&self) -> &Fsa {
        &self.fsa
    }

    /// `w_m`.
    pub fn sink(&self) -> StateId {
        self.sink
    }

    pub fn num_states(&self) -> usize {
        self.fsa.num_states()
    }

    pub fn next(&self, w: StateId, e: EventId) -> StateId {
        self.fsa.next(w, e).expect("damage automaton is complete")
    }
}

fn unique(existing: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while existing.contains(&name) {
        name.push('\'');
    }
    name
}

/// Supervisor component of a closed-loop state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SupervisorState {
    Running(StateId),
    Halted,
}

/// A state `(y, x, q, w)` of the attacked closed loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LoopState {
    pub attacker: usize,
    pub supervisor: SupervisorState,
    pub plant: StateId,
    pub damage: StateId,
}

/// Reachable part of `∘(A,S,G)‖H`; state 0 is initial.
#[derive(Debug, Clone)]
pub struct AttackedLoop {
    alphabet: Alphabet,
    states: Vec<LoopState>,
    succ: Vec<Vec<(EventId, usize)>>,
    sink: StateId,
}

impl AttackedLoop {
    pub fn states(&self) -> &[LoopState] {
        &self.states
    }

    pub fn successors(&self, i: usize) -> &[(EventId, usize)] {
        &self.succ[i]
    }

    /// Whether `i` belongs to `I_m`.
    pub fn is_damage(&self, i: usize) -> bool {
        self.states[i].damage == self.sink
    }

    pub fn damage_reachable(&self) -> bool {
        (0..self.states.len()).any(|i| self.is_damage(i))
    }

    /// Some reachable halted state has not inflicted damage.
    pub fn caught_before_damage(&self) -> bool {
        self.states
            .iter()
            .any(|s| s.supervisor == SupervisorState::Halted && s.damage != self.sink)
    }

    /// `(x, q, w)` projections of the reachable states.
    pub fn projections(&self) -> std::collections::BTreeSet<(SupervisorState, StateId, StateId)> {
        self.states.iter().map(|s| (s.supervisor, s.plant, s.damage)).collect()
    }

    /// The loop as an automaton over `Σ` with every state marked.
    pub fn to_fsa(&self) -> Fsa {
        let names = (0..self.states.len()).map(|i| format!("i{i}")).collect();
        let mut delta = vec![vec![None; self.alphabet.len()]; self.states.len()];
        for (i, row) in self.succ.iter().enumerate() {
            for &(e, j) in row {
                delta[i][e.0] = Some(StateId(j));
            }
        }
        Fsa::from_table(
            self.alphabet.clone(),
            names,
            delta,
            StateId(0),
            vec![true; self.states.len()],
        )
    }
}

/// Builds the reachable part of `∘(A,S,G)‖H`.
pub fn compose(
    setting: &AttackSetting,
    attacker: &MooreAttacker,
    s: &Supervisor,
    g: &Fsa,
    h: &DamageAutomaton,
) -> Result<AttackedLoop, ModelError> {
    setting.check_supervisor(s)?;
    setting.check_fsa("plant", g)?;
    setting.check_fsa("damage", h.fsa())?;
    attacker.check(setting)?;
    let st = transform(s, setting.control(), setting.attack())?;
    let halt = st.halt();
    let compromised = setting.attack().compromised();
    let alphabet = setting.alphabet();

    // per supervisor state and event: observation index (None = attacker frozen)
    let obs: Vec<Vec<Option<usize>>> = s
        .fsa()
        .states()
        .map(|x| alphabet.ids().map(|e| setting.observation_for(s, x, e)).collect())
        .collect();

    let init = LoopState {
        attacker: 0,
        supervisor: SupervisorState::Running(s.fsa().initial()),
        plant: g.initial(),
        damage: h.fsa().initial(),
    };
    let mut index = HashMap::from([(init, 0usize)]);
    let mut states = vec![init];
    let mut succ = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let cur = states[i];
        let mut row = Vec::new();
        if let SupervisorState::Running(x) = cur.supervisor {
            for e in alphabet.ids() {
                let enabled = if compromised.contains(e) {
                    attacker.output(cur.attacker).contains(e)
                } else {
                    s.fsa().next(x, e).is_some()
                };
                if !enabled {
                    continue;
                }
                let Some(q) = g.next(cur.plant, e) else { continue };
                let xt = st.fsa().next(x, e).expect("enabled events are defined in S^T");
                let nxt = LoopState {
                    attacker: match obs[x.0][e.0] {
                        Some(o) => attacker.next(cur.attacker, o),
                        None => cur.attacker,
                    },
                    supervisor: if xt == halt {
                        SupervisorState::Halted
                    } else {
                        SupervisorState::Running(xt)
                    },
                    plant: q,
                    damage: h.next(cur.damage, e),
                };
                let j = *index.entry(nxt).or_insert_with(|| {
                    states.push(nxt);
                    states.len() - 1
                });
                row.push((e, j));
            }
        }
        succ.push(row);
        i += 1;
    }
    Ok(AttackedLoop {
        alphabet: alphabet.clone(),
        states,
        succ,
        sink: h.sink(),
    })
}

/// Some state of `I_m` is reachable.
pub fn damage_reachable(o: &AttackedLoop) -> bool {
    o.damage_reachable()
}

/// Success condition of an attacker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    /// Reach damage, getting caught along the way is acceptable.
    Risky,
    /// Reach damage and never halt the supervisor before damage is done.
    Covert,
}

pub fn is_successful(
    setting: &AttackSetting,
    attacker: &MooreAttacker,
    s: &Supervisor,
    g: &Fsa,
    h: &DamageAutomaton,
    semantics: Semantics,
) -> Result<bool, ModelError> {
    let o = compose(setting, attacker, s, g, h)?;
    Ok(match semantics {
        Semantics::Risky => o.damage_reachable(),
        Semantics::Covert => o.damage_reachable() && !o.caught_before_damage(),
    })
}
