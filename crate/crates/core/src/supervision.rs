//! Supervisors under a control constraint, their control commands, and the
//! attack-aware transformed supervisor with its halt state.

use std::fmt;

use thiserror::Error;

use crate::attack::AttackConstraint;
use crate::automata::{
    check_language_inclusion, sync_product, Alphabet, AutomatonError, CompleteFsa, EventId, EventSet, Fsa, StateId,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("{what} must be a subset of {of}")]
    NotSubset { what: &'static str, of: &'static str },
    #[error("automaton `{0}` is not over the instance alphabet")]
    AlphabetMismatch(String),
    #[error("supervisor violates its control constraint: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidSupervisor(Vec<Violation>),
    #[error("damage state `{0}` is marked but not a sink")]
    DamageNotSink(String),
    #[error("attacker does not match the observation alphabet: {0}")]
    AttackerShape(String),
    #[error("the lower specification language is not included in the upper one")]
    SpecOrder,
    #[error("enumerating {count} attackers exceeds the cap of {cap}")]
    TooManyAttackers { count: String, cap: u128 },
}

/// `(Σc, Σo)` over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlConstraint {
    controllable: EventSet,
    observable: EventSet,
    universe: EventSet,
}

impl ControlConstraint {
    pub fn new(alphabet: &Alphabet, controllable: EventSet, observable: EventSet) -> Result<Self, ModelError> {
        let universe = alphabet.all();
        if !controllable.is_subset(universe) {
            return Err(ModelError::NotSubset {
                what: "controllable events",
                of: "the alphabet",
            });
        }
        if !observable.is_subset(universe) {
            return Err(ModelError::NotSubset {
                what: "observable events",
                of: "the alphabet",
            });
        }
        Ok(ControlConstraint {
            controllable,
            observable,
            universe,
        })
    }

    pub fn controllable(&self) -> EventSet {
        self.controllable
    }

    pub fn observable(&self) -> EventSet {
        self.observable
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.universe.difference(self.controllable)
    }

    pub fn unobservable(&self) -> EventSet {
        self.universe.difference(self.observable)
    }

    pub fn universe(&self) -> EventSet {
        self.universe
    }
}

/// Every command `γ` with `Σuc ⊆ γ ⊆ Σ`, ordered by the bit pattern of
/// `γ ∩ Σc` read over `Σc` in alphabet order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandSpace {
    commands: Vec<EventSet>,
}

impl CommandSpace {
    pub fn new(control: &ControlConstraint) -> Self {
        let ctrl: Vec<EventId> = control.controllable().iter().collect();
        let base = control.uncontrollable();
        let commands = (0u64..(1u64 << ctrl.len()))
            .map(|mask| {
                let mut g = base;
                for (k, e) in ctrl.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        g.insert(*e);
                    }
                }
                g
            })
            .collect();
        CommandSpace { commands }
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    pub fn get(&self, i: usize) -> EventSet {
        self.commands[i]
    }

    pub fn index_of(&self, command: EventSet) -> Option<usize> {
        self.commands.iter().position(|c| *c == command)
    }

    pub fn iter(&self) -> impl Iterator<Item = EventSet> + '_ {
        self.commands.iter().copied()
    }
}

/// One failed supervisor condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An uncontrollable event is not defined at a state.
    Controllability { state: String, event: String },
    /// An unobservable event moves the supervisor to another state.
    Observability { state: String, event: String, target: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Controllability { state, event } => {
                write!(f, "controllability: uncontrollable `{event}` undefined at `{state}`")
            }
            Violation::Observability { state, event, target } => {
                write!(f, "observability: unobservable `{event}` leads from `{state}` to `{target}`")
            }
        }
    }
}

/// Lists every controllability and observability violation of `s`.
pub fn validate_supervisor(s: &Fsa, control: &ControlConstraint) -> Vec<Violation> {
    let alphabet = s.alphabet();
    let mut out = Vec::new();
    for x in s.states() {
        for e in alphabet.ids() {
            match s.next(x, e) {
                None if control.uncontrollable().contains(e) => out.push(Violation::Controllability {
                    state: s.state_name(x).to_string(),
                    event: alphabet.name(e).to_string(),
                }),
                Some(t) if t != x && control.unobservable().contains(e) => out.push(Violation::Observability {
                    state: s.state_name(x).to_string(),
                    event: alphabet.name(e).to_string(),
                    target: s.state_name(t).to_string(),
                }),
                _ => {}
            }
        }
    }
    out
}

/// A supervisor automaton; every state is marked.
///
/// Validity against a [`ControlConstraint`] is checked separately with
/// [`validate_supervisor`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supervisor {
    fsa: Fsa,
}

impl Supervisor {
    pub fn new(mut fsa: Fsa) -> Self {
        for s in fsa.states().collect::<Vec<_>>() {
            fsa.set_marked(s, true);
        }
        Supervisor { fsa }
    }

    pub fn fsa(&self) -> &Fsa {
        &self.fsa
    }

    pub fn into_fsa(self) -> Fsa {
        self.fsa
    }

    pub fn num_states(&self) -> usize {
        self.fsa.num_states()
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.fsa.alphabet()
    }

    /// `Γ(x)`: the events defined at `x`.
    pub fn gamma(&self, x: StateId) -> EventSet {
        self.fsa.enabled(x)
    }

    pub fn gamma_of(&self, state: &str) -> Result<EventSet, ModelError> {
        let x = self
            .fsa
            .state_id(state)
            .ok_or_else(|| AutomatonError::UnknownState(state.to_string()))?;
        Ok(self.gamma(x))
    }

    /// The command in force after `σ` fires at `x`: `Γ(ζ(x,σ))`, or `Γ(x)`
    /// when `ζ(x,σ)` is undefined (the event only happened through an attack).
    pub fn command_after(&self, x: StateId, e: EventId) -> EventSet {
        match self.fsa.next(x, e) {
            Some(t) => self.gamma(t),
            None => self.gamma(x),
        }
    }

    pub fn validate(&self, control: &ControlConstraint) -> Vec<Violation> {
        validate_supervisor(&self.fsa, control)
    }

    /// The supervisor that enables every event at its single state.
    pub fn permissive(alphabet: &Alphabet) -> Self {
        let mut fsa = Fsa::new(alphabet.clone(), ["x0"], "x0").expect("single state");
        for e in alphabet.ids() {
            fsa.set_transition(StateId(0), e, StateId(0)).expect("fresh");
        }
        Supervisor { fsa }
    }
}

/// `S^T`: the supervisor with a halt state (index `n`) and the loop flags
/// `l(x,σ)` for compromised unobservable events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformedSupervisor {
    fsa: Fsa,
    loops: Vec<EventSet>,
    loop_events: EventSet,
}

impl TransformedSupervisor {
    /// Assembles a transformed supervisor from its parts; `fsa` has the
    /// original states followed by the halt state.
    pub fn from_parts(fsa: Fsa, loops: Vec<EventSet>, loop_events: EventSet) -> Self {
        assert_eq!(loops.len() + 1, fsa.num_states());
        TransformedSupervisor {
            fsa,
            loops,
            loop_events,
        }
    }

    pub fn fsa(&self) -> &Fsa {
        &self.fsa
    }

    pub fn halt(&self) -> StateId {
        StateId(self.loops.len())
    }

    /// Number of states of the original supervisor.
    pub fn original_states(&self) -> usize {
        self.loops.len()
    }

    /// `Σ_{c,A} ∩ Σuo`, the events carrying loop flags.
    pub fn loop_events(&self) -> EventSet {
        self.loop_events
    }

    /// `l(x,σ)`: whether the original supervisor defines the self-loop.
    pub fn loop_flag(&self, x: StateId, e: EventId) -> bool {
        self.loops[x.0].contains(e)
    }

    /// Completion with dump state at index `n+1`.
    pub fn completed(&self) -> CompleteFsa {
        self.fsa.complete()
    }
}

/// Builds `S^T`: undefined compromised observable events lead to the halt
/// state, undefined compromised unobservable events become self-loops.
pub fn transform(
    s: &Supervisor,
    control: &ControlConstraint,
    attack: &AttackConstraint,
) -> Result<TransformedSupervisor, ModelError> {
    let compromised = attack.compromised();
    if !compromised.is_subset(control.controllable()) {
        return Err(ModelError::NotSubset {
            what: "compromised events",
            of: "controllable events",
        });
    }
    let src = s.fsa();
    let n = src.num_states();
    let mut names = src.state_names().to_vec();
    let mut halt_name = "x_halt".to_string();
    while names.contains(&halt_name) {
        halt_name.push('_');
    }
    names.push(halt_name);
    let halt = StateId(n);
    let loop_events = compromised.intersection(control.unobservable());
    let alphabet = src.alphabet().clone();
    let mut delta = vec![vec![None; alphabet.len()]; n + 1];
    let mut loops = vec![EventSet::EMPTY; n];
    for x in src.states() {
        for e in alphabet.ids() {
            let t = src.next(x, e);
            delta[x.0][e.0] = match t {
                Some(t) => Some(t),
                None if compromised.contains(e) && control.observable().contains(e) => Some(halt),
                None if compromised.contains(e) => Some(x),
                None => None,
            };
            if loop_events.contains(e) && t.is_some() {
                loops[x.0].insert(e);
            }
        }
    }
    Ok(TransformedSupervisor {
        fsa: Fsa::from_table(alphabet, names, delta, src.initial(), vec![true; n + 1]),
        loops,
        loop_events,
    })
}

/// Recovers `S` from `S^T`: drops the halt state and the transitions into it,
/// and the compromised unobservable self-loops whose loop flag is false.
pub fn untransform(t: &TransformedSupervisor) -> Supervisor {
    let n = t.original_states();
    let src = t.fsa();
    let alphabet = src.alphabet().clone();
    let halt = t.halt();
    let delta = (0..n)
        .map(|x| {
            alphabet
                .ids()
                .map(|e| match src.next(StateId(x), e) {
                    Some(d) if d == halt || d.0 > n => None,
                    Some(_) if t.loop_events.contains(e) && !t.loop_flag(StateId(x), e) => None,
                    other => other,
                })
                .collect()
        })
        .collect();
    Supervisor::new(Fsa::from_table(
        alphabet,
        src.state_names()[..n].to_vec(),
        delta,
        src.initial(),
        vec![true; n],
    ))
}

/// `L(G1) ⊆ L(S‖G)`.
pub fn lower_bound_holds(s: &Supervisor, g: &Fsa, lower: &Fsa) -> bool {
    check_language_inclusion(lower, &sync_product(s.fsa(), g))
}

/// `L(S‖G) ⊆ L(G2)`.
pub fn upper_bound_holds(s: &Supervisor, g: &Fsa, upper: &Fsa) -> bool {
    check_language_inclusion(&sync_product(s.fsa(), g), upper)
}

/// `L(G1) ⊆ L(S‖G) ⊆ L(G2)`.
pub fn check_range_control(s: &Supervisor, g: &Fsa, lower: &Fsa, upper: &Fsa) -> bool {
    let closed_loop = sync_product(s.fsa(), g);
    check_language_inclusion(lower, &closed_loop) && check_language_inclusion(&closed_loop, upper)
}

/// Range bounds that pin the closed-loop language to `L(Sref‖G)`.
pub fn build_obfuscation_bounds(reference: &Supervisor, g: &Fsa) -> (Fsa, Fsa) {
    let product = sync_product(reference.fsa(), g).trim();
    (product.clone(), product)
}
