//! Deterministic partial finite automata over named event alphabets.
//!
//! Every automaton in the crate (plant, specifications, damage automaton,
//! supervisor) is an [`Fsa`]. Events and states are numbered by declaration
//! order; everything downstream (variable numbering, emitted files) derives
//! from that order.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

/// Largest alphabet an [`EventSet`] can hold.
pub const MAX_EVENTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("unknown event `{0}`")]
    UnknownEvent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate event `{0}` in alphabet")]
    DuplicateEvent(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("alphabet has {0} events, at most {MAX_EVENTS} are supported")]
    AlphabetTooLarge(usize),
    #[error("nondeterministic transition: `{state}` already has a successor on `{event}`")]
    Nondeterministic { state: String, event: String },
    #[error("automaton must have at least one state")]
    NoStates,
}

/// Index of an event in its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub usize);

/// Index of a state in its automaton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// A set of events, stored as a bitmask over alphabet positions.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct EventSet(u64);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn from_bits(bits: u64) -> Self {
        EventSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The set `{0, .., len-1}`.
    pub fn full(len: usize) -> Self {
        if len >= 64 {
            EventSet(u64::MAX)
        } else {
            EventSet((1u64 << len) - 1)
        }
    }

    pub fn singleton(e: EventId) -> Self {
        EventSet(1u64 << e.0)
    }

    pub fn contains(self, e: EventId) -> bool {
        self.0 & (1u64 << e.0) != 0
    }

    pub fn insert(&mut self, e: EventId) {
        self.0 |= 1u64 << e.0;
    }

    pub fn remove(&mut self, e: EventId) {
        self.0 &= !(1u64 << e.0);
    }

    pub fn union(self, other: EventSet) -> Self {
        EventSet(self.0 | other.0)
    }

    pub fn intersection(self, other: EventSet) -> Self {
        EventSet(self.0 & other.0)
    }

    pub fn difference(self, other: EventSet) -> Self {
        EventSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: EventSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Members in increasing index order.
    pub fn iter(self) -> impl Iterator<Item = EventId> {
        let bits = self.0;
        (0..64).filter(move |i| bits & (1u64 << i) != 0).map(EventId)
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}

impl FromIterator<EventId> for EventSet {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> Self {
        let mut s = EventSet::EMPTY;
        for e in iter {
            s.insert(e);
        }
        s
    }
}

/// Ordered set of event names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(names: I) -> Result<Self, AutomatonError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_EVENTS {
            return Err(AutomatonError::AlphabetTooLarge(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(AutomatonError::DuplicateEvent(n.clone()));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, e: EventId) -> &str {
        &self.names[e.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id(&self, name: &str) -> Option<EventId> {
        self.names.iter().position(|n| n == name).map(EventId)
    }

    pub fn ids(&self) -> impl Iterator<Item = EventId> {
        (0..self.names.len()).map(EventId)
    }

    pub fn all(&self) -> EventSet {
        EventSet::full(self.names.len())
    }

    pub fn set_of<'a, I>(&self, names: I) -> Result<EventSet, AutomatonError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        names
            .into_iter()
            .map(|n| self.id(n).ok_or_else(|| AutomatonError::UnknownEvent(n.to_string())))
            .collect()
    }

    /// Renders a set as `{a,b}`.
    pub fn format_set(&self, set: EventSet) -> String {
        let parts: Vec<&str> = set.iter().map(|e| self.name(e)).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Events of `self` followed by the events of `other` not already present.
    pub fn union(&self, other: &Alphabet) -> Result<Alphabet, AutomatonError> {
        let mut names = self.names.clone();
        for n in &other.names {
            if !names.contains(n) {
                names.push(n.clone());
            }
        }
        Alphabet::new(names)
    }
}

/// Deterministic partial finite automaton `(Q, Σ, δ, q0, Qm)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fsa {
    alphabet: Alphabet,
    states: Vec<String>,
    delta: Vec<Vec<Option<StateId>>>,
    initial: StateId,
    marked: Vec<bool>,
}

impl Fsa {
    /// New automaton with the given states, no transitions, every state marked.
    pub fn new<I, S>(alphabet: Alphabet, states: I, initial: &str) -> Result<Self, AutomatonError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if states.is_empty() {
            return Err(AutomatonError::NoStates);
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(AutomatonError::DuplicateState(s.clone()));
            }
        }
        let initial = states
            .iter()
            .position(|s| s == initial)
            .map(StateId)
            .ok_or_else(|| AutomatonError::UnknownState(initial.to_string()))?;
        let n = states.len();
        Ok(Fsa {
            delta: vec![vec![None; alphabet.len()]; n],
            alphabet,
            states,
            initial,
            marked: vec![true; n],
        })
    }

    /// Builds an automaton straight from a transition table (rows are states).
    pub fn from_table(
        alphabet: Alphabet,
        states: Vec<String>,
        delta: Vec<Vec<Option<StateId>>>,
        initial: StateId,
        marked: Vec<bool>,
    ) -> Self {
        assert_eq!(states.len(), delta.len());
        assert_eq!(states.len(), marked.len());
        assert!(delta.iter().all(|row| row.len() == alphabet.len()));
        assert!(initial.0 < states.len());
        Fsa {
            alphabet,
            states,
            delta,
            initial,
            marked,
        }
    }

    /// Adds `src --event--> dst`, by name.
    pub fn add_transition(&mut self, src: &str, event: &str, dst: &str) -> Result<(), AutomatonError> {
        let s = self.state_id(src).ok_or_else(|| AutomatonError::UnknownState(src.to_string()))?;
        let d = self.state_id(dst).ok_or_else(|| AutomatonError::UnknownState(dst.to_string()))?;
        let e = self
            .alphabet
            .id(event)
            .ok_or_else(|| AutomatonError::UnknownEvent(event.to_string()))?;
        self.set_transition(s, e, d)
    }

    pub fn set_transition(&mut self, src: StateId, event: EventId, dst: StateId) -> Result<(), AutomatonError> {
        match self.delta[src.0][event.0] {
            Some(old) if old != dst => Err(AutomatonError::Nondeterministic {
                state: self.states[src.0].clone(),
                event: self.alphabet.name(event).to_string(),
            }),
            _ => {
                self.delta[src.0][event.0] = Some(dst);
                Ok(())
            }
        }
    }

    pub fn remove_transition(&mut self, src: StateId, event: EventId) {
        self.delta[src.0][event.0] = None;
    }

    pub fn set_marked_states(&mut self, marked: &[&str]) -> Result<(), AutomatonError> {
        let mut flags = vec![false; self.states.len()];
        for m in marked {
            let id = self.state_id(m).ok_or_else(|| AutomatonError::UnknownState(m.to_string()))?;
            flags[id.0] = true;
        }
        self.marked = flags;
        Ok(())
    }

    pub fn set_marked(&mut self, s: StateId, marked: bool) {
        self.marked[s.0] = marked;
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0]
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_marked(&self, s: StateId) -> bool {
        self.marked[s.0]
    }

    pub fn marked_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.states().filter(|s| self.marked[s.0])
    }

    pub fn next(&self, s: StateId, e: EventId) -> Option<StateId> {
        self.delta[s.0][e.0]
    }

    /// Events defined at `s`.
    pub fn enabled(&self, s: StateId) -> EventSet {
        self.delta[s.0]
            .iter()
            .enumerate()
            .filter(|(_, t)| t.is_some())
            .map(|(e, _)| EventId(e))
            .collect()
    }

    /// All transitions as `(src, event, dst)` in state then event order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.delta.iter().enumerate().flat_map(|(s, row)| {
            row.iter()
                .enumerate()
                .filter_map(move |(e, t)| t.map(|d| (StateId(s), EventId(e), d)))
        })
    }

    pub fn is_complete(&self) -> bool {
        self.delta.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// State reached by `word` from the initial state, if the run is defined.
    pub fn run(&self, word: &[EventId]) -> Option<StateId> {
        word.iter().try_fold(self.initial, |s, &e| self.next(s, e))
    }

    /// Membership in the closed language `L(self)`.
    pub fn accepts(&self, word: &[EventId]) -> bool {
        self.run(word).is_some()
    }

    /// Membership in the marked language `Lm(self)`.
    pub fn accepts_marked(&self, word: &[EventId]) -> bool {
        self.run(word).is_some_and(|s| self.marked[s.0])
    }

    /// Adds a fresh dump state absorbing every undefined transition.
    pub fn complete(&self) -> CompleteFsa {
        let n = self.states.len();
        let dump = StateId(n);
        let mut states = self.states.clone();
        states.push(fresh_name(&self.states, "dump"));
        let mut delta: Vec<Vec<Option<StateId>>> = self
            .delta
            .iter()
            .map(|row| row.iter().map(|t| Some(t.unwrap_or(dump))).collect())
            .collect();
        delta.push(vec![Some(dump); self.alphabet.len()]);
        let mut marked = vec![true; n];
        marked.push(false);
        CompleteFsa {
            fsa: Fsa {
                alphabet: self.alphabet.clone(),
                states,
                delta,
                initial: self.initial,
                marked,
            },
            dump: Some(dump),
        }
    }

    /// Least set containing the initial state and closed under transitions.
    pub fn reachable_states(&self) -> BTreeSet<StateId> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial.0] = true;
        while let Some(s) = queue.pop_front() {
            for d in self.delta[s.0].iter().flatten() {
                if !seen[d.0] {
                    seen[d.0] = true;
                    queue.push_back(*d);
                }
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, r)| **r)
            .map(|(i, _)| StateId(i))
            .collect()
    }

    /// Restriction to the reachable states, keeping their relative order.
    pub fn trim(&self) -> Fsa {
        let reach = self.reachable_states();
        let mut remap = vec![None; self.states.len()];
        for (new, old) in reach.iter().enumerate() {
            remap[old.0] = Some(StateId(new));
        }
        let keep: Vec<StateId> = reach.into_iter().collect();
        Fsa {
            alphabet: self.alphabet.clone(),
            states: keep.iter().map(|s| self.states[s.0].clone()).collect(),
            delta: keep
                .iter()
                .map(|s| self.delta[s.0].iter().map(|t| t.and_then(|d| remap[d.0])).collect())
                .collect(),
            initial: remap[self.initial.0].expect("initial state is reachable"),
            marked: keep.iter().map(|s| self.marked[s.0]).collect(),
        }
    }

    /// Same automaton over a larger alphabet that contains this one.
    pub fn extend_alphabet(&self, alphabet: &Alphabet) -> Result<Fsa, AutomatonError> {
        let map: Vec<EventId> = self
            .alphabet
            .names()
            .iter()
            .map(|n| alphabet.id(n).ok_or_else(|| AutomatonError::UnknownEvent(n.clone())))
            .collect::<Result<_, _>>()?;
        let delta = self
            .delta
            .iter()
            .map(|row| {
                let mut new_row = vec![None; alphabet.len()];
                for (e, t) in row.iter().enumerate() {
                    new_row[map[e].0] = *t;
                }
                new_row
            })
            .collect();
        Ok(Fsa {
            alphabet: alphabet.clone(),
            states: self.states.clone(),
            delta,
            initial: self.initial,
            marked: self.marked.clone(),
        })
    }
}

fn fresh_name(existing: &[String], base: &str) -> String {
    let mut name = base.to_string();
    let mut k = 0;
    while existing.contains(&name) {
        k += 1;
        name = format!("{base}{k}");
    }
    name
}

/// An automaton whose transition function is total.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompleteFsa {
    fsa: Fsa,
    dump: Option<StateId>,
}

impl CompleteFsa {
    /// Wraps an automaton that is already complete; `None` if it is not.
    pub fn from_complete(fsa: Fsa) -> Option<Self> {
        fsa.is_complete().then_some(CompleteFsa { fsa, dump: None })
    }

    pub fn fsa(&self) -> &Fsa {
        &self.fsa
    }

    pub fn into_fsa(self) -> Fsa {
        self.fsa
    }

    /// The dump state added by [`Fsa::complete`], if any.
    pub fn dump(&self) -> Option<StateId> {
        self.dump
    }

    pub fn next(&self, s: StateId, e: EventId) -> StateId {
        self.fsa.delta[s.0][e.0].expect("complete automaton")
    }
}

/// Synchronous product: shared events synchronize, private events interleave.
///
/// Only the reachable part is built. Composite states are named `(q,p)`.
pub fn sync_product(a: &Fsa, b: &Fsa) -> Fsa {
    let alphabet = a.alphabet.union(&b.alphabet).expect("union of two alphabets fits");
    let in_a: Vec<Option<EventId>> = alphabet.names().iter().map(|n| a.alphabet.id(n)).collect();
    let in_b: Vec<Option<EventId>> = alphabet.names().iter().map(|n| b.alphabet.id(n)).collect();

    let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
    let mut pairs = vec![(a.initial, b.initial)];
    index.insert((a.initial, b.initial), StateId(0));
    let mut delta: Vec<Vec<Option<StateId>>> = Vec::new();
    let mut i = 0;
    while i < pairs.len() {
        let (p, q) = pairs[i];
        let mut row = vec![None; alphabet.len()];
        for (e, slot) in row.iter_mut().enumerate() {
            let np = match in_a[e] {
                Some(ea) => a.next(p, ea),
                None => Some(p),
            };
            let nq = match in_b[e] {
                Some(eb) => b.next(q, eb),
                None => Some(q),
            };
            if let (Some(np), Some(nq)) = (np, nq) {
                let next_id = StateId(pairs.len());
                let id = *index.entry((np, nq)).or_insert_with(|| {
                    pairs.push((np, nq));
                    next_id
                });
                *slot = Some(id);
            }
        }
        delta.push(row);
        i += 1;
    }
    Fsa {
        states: pairs
            .iter()
            .map(|(p, q)| format!("({},{})", a.state_name(*p), b.state_name(*q)))
            .collect(),
        marked: pairs.iter().map(|(p, q)| a.is_marked(*p) && b.is_marked(*q)).collect(),
        alphabet,
        delta,
        initial: StateId(0),
    }
}

/// `L(a) ⊆ L(b)` for automata over the same alphabet.
///
/// Explores `a ‖ complete(b)` and fails as soon as a reachable pair sits on
/// `b`'s dump state.
pub fn check_language_inclusion(a: &Fsa, b: &Fsa) -> bool {
    let cb = b.complete();
    let dump = cb.dump().expect("completion adds a dump state");
    let events: Vec<Option<EventId>> = a.alphabet.names().iter().map(|n| b.alphabet.id(n)).collect();
    let mut seen = vec![false; a.num_states() * cb.fsa.num_states()];
    let key = |p: StateId, q: StateId| p.0 * cb.fsa.num_states() + q.0;
    let mut stack = vec![(a.initial, cb.fsa.initial)];
    seen[key(a.initial, cb.fsa.initial)] = true;
    while let Some((p, q)) = stack.pop() {
        if q == dump {
            return false;
        }
        for e in a.alphabet.ids() {
            if let Some(np) = a.next(p, e) {
                // an event outside b's alphabet cannot be matched by b
                let nq = match events[e.0] {
                    Some(eb) => cb.next(q, eb),
                    None => dump,
                };
                if !seen[key(np, nq)] {
                    seen[key(np, nq)] = true;
                    stack.push((np, nq));
                }
            }
        }
    }
    true
}

/// `L(a) = L(b)`.
pub fn language_equivalent(a: &Fsa, b: &Fsa) -> bool {
    check_language_inclusion(a, b) && check_language_inclusion(b, a)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    /// All words over `alphabet` of length at most `k`.
    pub(crate) fn words_up_to(alphabet: &Alphabet, k: usize) -> Vec<Vec<EventId>> {
        let mut out = vec![vec![]];
        let mut frontier = vec![vec![]];
        for _ in 0..k {
            let mut next = Vec::new();
            for w in &frontier {
                for e in alphabet.ids() {
                    let mut w2: Vec<EventId> = w.clone();
                    w2.push(e);
                    next.push(w2);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    fn chain() -> Fsa {
        let mut f = Fsa::new(ab(), ["q0", "q1"], "q0").unwrap();
        f.add_transition("q0", "a", "q1").unwrap();
        f
    }

    #[test]
    fn complete_single_state_no_transitions() {
        let f = Fsa::new(Alphabet::new(["a"]).unwrap(), ["u0"], "u0").unwrap();
        let c = f.complete();
        let d = c.dump().unwrap();
        assert_eq!(c.fsa().num_states(), 2);
        assert_eq!(c.fsa().next(StateId(0), EventId(0)), Some(d));
        assert_eq!(c.fsa().next(d, EventId(0)), Some(d));
        assert_eq!(c.fsa().marked_states().collect::<Vec<_>>(), vec![StateId(0)]);
    }

    #[test]
    fn complete_of_complete_adds_unreachable_dump() {
        let mut f = Fsa::new(ab(), ["q0"], "q0").unwrap();
        f.add_transition("q0", "a", "q0").unwrap();
        f.add_transition("q0", "b", "q0").unwrap();
        let c = f.complete();
        assert_eq!(c.fsa().num_states(), 2);
        assert!(!c.fsa().reachable_states().contains(&c.dump().unwrap()));
        assert!(language_equivalent(&f, c.fsa()));
    }

    #[test]
    fn completion_languages_by_enumeration() {
        let c = chain().complete();
        let words = words_up_to(&ab(), 3);
        let marked: Vec<_> = words.iter().filter(|w| c.fsa().accepts_marked(w)).collect();
        assert_eq!(marked, vec![&vec![], &vec![EventId(0)]]);
        assert!(words.iter().all(|w| c.fsa().accepts(w)));
    }

    #[test]
    fn reachable_chain_and_isolated() {
        assert_eq!(chain().reachable_states(), BTreeSet::from([StateId(0), StateId(1)]));
        let f = Fsa::new(ab(), ["q0", "q1"], "q0").unwrap();
        assert_eq!(f.reachable_states(), BTreeSet::from([StateId(0)]));
    }

    #[test]
    fn nondeterminism_rejected() {
        let mut f = chain();
        f.add_transition("q0", "a", "q1").unwrap();
        assert!(matches!(
            f.add_transition("q0", "a", "q0"),
            Err(AutomatonError::Nondeterministic { .. })
        ));
    }

    #[test]
    fn product_same_alphabet_chain() {
        let mut b = Fsa::new(ab(), ["p0", "p1"], "p0").unwrap();
        b.add_transition("p0", "a", "p1").unwrap();
        let p = sync_product(&chain(), &b);
        assert_eq!(p.num_states(), 2);
        assert_eq!(p.state_name(StateId(0)), "(q0,p0)");
        assert_eq!(p.next(StateId(0), EventId(0)), Some(StateId(1)));
        assert_eq!(p.state_name(StateId(1)), "(q1,p1)");
    }

    #[test]
    fn inclusion_basic() {
        let c = chain();
        assert!(check_language_inclusion(&c, &c));
        let eps = Fsa::new(ab(), ["p0"], "p0").unwrap();
        assert!(!check_language_inclusion(&c, &eps));
        assert!(check_language_inclusion(&eps, &c));
    }
}
