//! Constraint families over supervisor, attacker and reachability variables.
//!
//! Supervisor state indices run over `0..n+2`: `0..n` are the states of `S`,
//! `n` is the halt state and `n+1` the dump state of the completion of `S^T`.

use crate::attack::MooreAttacker;
use crate::automata::{CompleteFsa, EventId, EventSet, StateId};
use crate::solve::SynthesisInstance;
use crate::supervision::{transform, Supervisor};

use super::cnf::{define, to_cnf, Cnf, Quantifier, Qbf};
use super::formula::{Formula, Var};
use super::varmap::{VarDesc, VarMap};
use super::EncodingError;

/// Variable registry plus the completed automata for one `(instance, n, m)`.
#[derive(Debug, Clone)]
pub struct Encoder<'a> {
    inst: &'a SynthesisInstance,
    n: usize,
    m: usize,
    plant: CompleteFsa,
    lower: CompleteFsa,
    upper: CompleteFsa,
    vars: VarMap,
    copies: usize,
}

/// Allocates the supervisor, attacker and reachability variables in their
/// fixed order; see [`Encoder::new`].
pub fn allocate_vars(n: usize, m: usize, inst: &SynthesisInstance) -> Result<VarMap, EncodingError> {
    Ok(Encoder::new(inst, n, m)?.vars)
}

impl<'a> Encoder<'a> {
    /// Allocates, in order: `t^S(i,σ,j)`, `l(i,σ)`, `t^A(k,o,l)`, `e(k,σ)`,
    /// left and right reachability and the first copy of safety reachability.
    pub fn new(inst: &'a SynthesisInstance, n: usize, m: usize) -> Result<Self, EncodingError> {
        if n == 0 || m == 0 {
            return Err(EncodingError::BadBounds { n, m });
        }
        let mut enc = Encoder {
            inst,
            n,
            m,
            plant: inst.plant().complete(),
            lower: inst.lower().complete(),
            upper: inst.upper().complete(),
            vars: VarMap::new(),
            copies: 0,
        };
        enc.allocate();
        Ok(enc)
    }

    fn allocate(&mut self) {
        let setting = self.inst.setting();
        let alphabet = setting.alphabet();
        let xs = self.n + 2;
        for i in 0..xs {
            for e in alphabet.ids() {
                for j in 0..xs {
                    let label = format!("t_S {} {} {}", self.x_name(i), alphabet.name(e), self.x_name(j));
                    self.vars.push(VarDesc::SupTrans { from: i, event: e.0, to: j }, label);
                }
            }
        }
        for i in 0..self.n {
            for e in self.loop_events().iter() {
                let label = format!("l {} {}", self.x_name(i), alphabet.name(e));
                self.vars.push(VarDesc::Loop { state: i, event: e.0 }, label);
            }
        }
        for k in 0..self.m {
            for (o, obs) in setting.observations().iter().enumerate() {
                for l in 0..self.m {
                    let label = format!("t_A y{k} {} y{l}", obs.render(alphabet));
                    self.vars.push(VarDesc::AtkTrans { from: k, obs: o, to: l }, label);
                }
            }
        }
        for k in 0..self.m {
            for e in setting.attack().compromised().iter() {
                let label = format!("e y{k} {}", alphabet.name(e));
                self.vars.push(VarDesc::AtkEnable { state: k, event: e.0 }, label);
            }
        }
        for (left, spec) in [(true, self.lower.clone()), (false, self.upper.clone())] {
            for x in 0..xs {
                for q in self.plant.fsa().states() {
                    for p in spec.fsa().states() {
                        let (tag, desc) = if left {
                            ("r_left", VarDesc::ReachLeft { x, q: q.0, spec: p.0 })
                        } else {
                            ("r_right", VarDesc::ReachRight { x, q: q.0, spec: p.0 })
                        };
                        let label = format!(
                            "{tag} {} {} {}",
                            self.x_name(x),
                            self.plant.fsa().state_name(q),
                            spec.fsa().state_name(p)
                        );
                        self.vars.push(desc, label);
                    }
                }
            }
        }
        self.allocate_safe_copy();
    }

    fn allocate_safe_copy(&mut self) -> usize {
        let copy = self.copies;
        self.copies += 1;
        let h = self.inst.damage().fsa();
        for y in 0..self.m {
            for x in 0..self.n + 2 {
                for q in self.plant.fsa().states() {
                    for w in h.states() {
                        let label = format!(
                            "r_safe#{copy} y{y} {} {} {}",
                            self.x_name(x),
                            self.plant.fsa().state_name(q),
                            h.state_name(w)
                        );
                        let desc = VarDesc::ReachSafe { copy, y, x, q: q.0, w: w.0 };
                        self.vars.push(desc, label);
                    }
                }
            }
        }
        copy
    }

    fn x_name(&self, i: usize) -> String {
        if i < self.n {
            format!("x{i}")
        } else if i == self.n {
            "x_halt".into()
        } else {
            "x_dump".into()
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn instance(&self) -> &SynthesisInstance {
        self.inst
    }

    pub fn vars(&self) -> &VarMap {
        &self.vars
    }

    pub fn vars_mut(&mut self) -> &mut VarMap {
        &mut self.vars
    }

    /// `Σ_{c,A} ∩ Σuo`.
    pub fn loop_events(&self) -> EventSet {
        let s = self.inst.setting();
        s.attack().compromised().intersection(s.control().unobservable())
    }

    pub fn t(&self, i: usize, e: EventId, j: usize) -> Var {
        self.vars.var(VarDesc::SupTrans { from: i, event: e.0, to: j })
    }

    pub fn l(&self, i: usize, e: EventId) -> Var {
        self.vars.var(VarDesc::Loop { state: i, event: e.0 })
    }

    pub fn ta(&self, k: usize, o: usize, l: usize) -> Var {
        self.vars.var(VarDesc::AtkTrans { from: k, obs: o, to: l })
    }

    pub fn e(&self, k: usize, e: EventId) -> Var {
        self.vars.var(VarDesc::AtkEnable { state: k, event: e.0 })
    }

    fn rl(&self, x: usize, q: StateId, p: StateId) -> Formula {
        Formula::var(self.vars.var(VarDesc::ReachLeft { x, q: q.0, spec: p.0 }))
    }

    fn rr(&self, x: usize, q: StateId, p: StateId) -> Formula {
        Formula::var(self.vars.var(VarDesc::ReachRight { x, q: q.0, spec: p.0 }))
    }

    fn rs(&self, y: usize, x: usize, q: StateId, w: StateId) -> Formula {
        Formula::var(self.vars.var(VarDesc::ReachSafe { copy: 0, y, x, q: q.0, w: w.0 }))
    }

    fn tf(&self, i: usize, e: EventId, j: usize) -> Formula {
        Formula::var(self.t(i, e, j))
    }

    /// The completion of `S^T` is a transition function: rows `0..n` have
    /// exactly one target, halt and dump go to the dump.
    pub fn fsa_constraints(&self) -> Formula {
        let alphabet = self.inst.setting().alphabet();
        let (n, xs) = (self.n, self.n + 2);
        let mut parts = Vec::new();
        for i in 0..n {
            for e in alphabet.ids() {
                for j in 0..xs {
                    for k in j + 1..xs {
                        parts.push(Formula::or([Formula::not(self.tf(i, e, j)), Formula::not(self.tf(i, e, k))]));
                    }
                }
                parts.push(Formula::or((0..xs).map(|j| self.tf(i, e, j))));
            }
        }
        for e in alphabet.ids() {
            parts.push(self.tf(n, e, n + 1));
        }
        for e in alphabet.ids() {
            parts.push(self.tf(n + 1, e, n + 1));
        }
        Formula::and(parts)
    }

    /// Controllability, observability and the halt rules, plus the ban on
    /// compromised observable events leading from `X` to the dump.
    pub fn control_constraints(&self) -> Formula {
        let s = self.inst.setting();
        let alphabet = s.alphabet();
        let control = s.control();
        let compromised = s.attack().compromised();
        let n = self.n;
        let mut parts = Vec::new();
        for i in 0..n {
            for e in alphabet.ids() {
                let defined = Formula::or((0..n).map(|j| self.tf(i, e, j)));
                if control.uncontrollable().contains(e) {
                    parts.push(defined.clone());
                }
                if control.unobservable().contains(e) && !compromised.contains(e) {
                    parts.push(Formula::implies(defined, self.tf(i, e, i)));
                }
                if compromised.contains(e) && control.unobservable().contains(e) {
                    parts.push(self.tf(i, e, i));
                }
                if compromised.contains(e) && control.observable().contains(e) {
                    parts.push(Formula::not(self.tf(i, e, n + 1)));
                } else {
                    parts.push(Formula::not(self.tf(i, e, n)));
                }
            }
        }
        Formula::and(parts)
    }

    /// `φ_n`: transition function and control rules.
    pub fn supervisor_constraints(&self) -> Formula {
        Formula::and([self.fsa_constraints(), self.control_constraints()])
    }

    /// The attacker's transition relation is a total function.
    pub fn attacker_constraints(&self) -> Formula {
        let obs = self.inst.setting().observations().len();
        let mut parts = Vec::new();
        for k in 0..self.m {
            for o in 0..obs {
                for l in 0..self.m {
                    for l2 in l + 1..self.m {
                        parts.push(Formula::or([
                            Formula::lit(self.ta(k, o, l), false),
                            Formula::lit(self.ta(k, o, l2), false),
                        ]));
                    }
                }
                parts.push(Formula::or((0..self.m).map(|l| Formula::var(self.ta(k, o, l)))));
            }
        }
        Formula::and(parts)
    }

    /// `L(G1) ⊆ L(S‖G)`.
    ///
    /// Besides the self-loop propagation under `l(x,σ)`, a disabled
    /// compromised unobservable self-loop (`¬l(x,σ)`) sends the triple to the
    /// dump, so that a `G1` string needing that event is caught.
    pub fn left_inclusion(&self) -> Formula {
        let mut parts = self.reach_propagation(&self.lower, |x, q, p| self.rl(x, q, p), true);
        let n = self.n;
        let qd = self.plant.dump().expect("completion has a dump");
        let pd = self.lower.dump().expect("completion has a dump");
        for p in self.lower.fsa().states().filter(|&p| p != pd) {
            for q in self.plant.fsa().states() {
                parts.push(Formula::not(self.rl(n, q, p)));
                parts.push(Formula::not(self.rl(n + 1, q, p)));
            }
            for i in 0..n + 2 {
                parts.push(Formula::not(self.rl(i, qd, p)));
            }
        }
        Formula::and(parts)
    }

    /// `L(S‖G) ⊆ L(G2)`.
    pub fn right_inclusion(&self) -> Formula {
        let mut parts = self.reach_propagation(&self.upper, |x, q, p| self.rr(x, q, p), false);
        let qd = self.plant.dump().expect("completion has a dump");
        let pd = self.upper.dump().expect("completion has a dump");
        for i in 0..self.n {
            for q in self.plant.fsa().states().filter(|&q| q != qd) {
                parts.push(Formula::not(self.rr(i, q, pd)));
            }
        }
        Formula::and(parts)
    }

    fn reach_propagation(
        &self,
        spec: &CompleteFsa,
        r: impl Fn(usize, StateId, StateId) -> Formula,
        disabled_loops_to_dump: bool,
    ) -> Vec<Formula> {
        let alphabet = self.inst.setting().alphabet();
        let loops = self.loop_events();
        let (n, xs) = (self.n, self.n + 2);
        let mut parts = vec![r(0, self.plant.fsa().initial(), spec.fsa().initial())];
        for q in self.plant.fsa().states() {
            for p in spec.fsa().states() {
                for e in alphabet.ids() {
                    let (q2, p2) = (self.plant.next(q, e), spec.next(p, e));
                    for i in 0..xs {
                        if loops.contains(e) && i < n {
                            let l = Formula::var(self.l(i, e));
                            parts.push(Formula::implies(Formula::and([r(i, q, p), l.clone()]), r(i, q2, p2)));
                            if disabled_loops_to_dump {
                                parts.push(Formula::implies(
                                    Formula::and([r(i, q, p), Formula::not(l)]),
                                    r(n + 1, q2, p2),
                                ));
                            }
                            continue;
                        }
                        for j in 0..xs {
                            parts.push(Formula::implies(Formula::and([r(i, q, p), self.tf(i, e, j)]), r(j, q2, p2)));
                        }
                    }
                }
            }
        }
        parts
    }

    /// `ω(x_i,σ)`: `ζ(x_i,σ)` is defined in `S`.
    pub fn helper_omega(&self, i: usize, e: EventId) -> Result<Formula, EncodingError> {
        if i >= self.n {
            return Err(EncodingError::OutOfRange(format!("omega at {}", self.x_name(i))));
        }
        Ok(self.omega(i, e))
    }

    fn omega(&self, i: usize, e: EventId) -> Formula {
        if self.loop_events().contains(e) {
            Formula::var(self.l(i, e))
        } else {
            Formula::or((0..self.n).map(|j| self.tf(i, e, j)))
        }
    }

    /// `φ(x_i,x_j)`: `Γ(x_i) = Γ(x_j)`; true when either index is halt or dump.
    pub fn helper_phi(&self, i: usize, j: usize) -> Formula {
        if i >= self.n || j >= self.n {
            return Formula::True;
        }
        let controllable = self.inst.setting().control().controllable();
        Formula::and(
            controllable
                .iter()
                .map(|e| Formula::iff(self.omega(i, e), self.omega(j, e))),
        )
    }

    /// `ψ(x_j,γ)`: `Γ(x_j) = γ`.
    pub fn helper_psi(&self, j: usize, gamma: EventSet) -> Result<Formula, EncodingError> {
        if j >= self.n {
            return Err(EncodingError::OutOfRange(format!("psi at {}", self.x_name(j))));
        }
        let controllable = self.inst.setting().control().controllable();
        Ok(Formula::and(controllable.iter().map(|e| {
            if gamma.contains(e) {
                self.omega(j, e)
            } else {
                Formula::not(self.omega(j, e))
            }
        })))
    }

    /// Reachability in the attacked loop over the first copy of the safety variables:
    /// no damage state is reachable in the attacked loop.
    pub fn safety(&self) -> Formula {
        let setting = self.inst.setting();
        let alphabet = setting.alphabet();
        let compromised = setting.attack().compromised();
        let atk_obs = setting.attack().observable();
        let sup_obs = setting.control().observable();
        let commands = setting.commands();
        let h = self.inst.damage();
        let (n, xs) = (self.n, self.n + 2);
        let mut parts = vec![self.rs(0, 0, self.plant.fsa().initial(), h.fsa().initial())];

        for k in 0..self.m {
            for i in 0..xs {
                for e in alphabet.ids() {
                    let enabled = if compromised.contains(e) {
                        Formula::var(self.e(k, e))
                    } else if i < n {
                        self.omega(i, e)
                    } else {
                        continue;
                    };
                    let seen_event = atk_obs.contains(e).then_some(e);
                    for j in 0..xs {
                        let same = self.helper_phi(i, j);
                        for q in self.plant.fsa().states() {
                            let q2 = self.plant.next(q, e);
                            for w in h.fsa().states() {
                                let w2 = h.next(w, e);
                                let base = [self.rs(k, i, q, w), self.tf(i, e, j), enabled.clone()];
                                let step = |extra: Vec<Formula>, y2: usize| {
                                    let premise = Formula::and(base.iter().cloned().chain(extra));
                                    Formula::implies(premise, self.rs(y2, j, q2, w2))
                                };
                                // command unchanged (always the case for unobservable events)
                                let unchanged = if sup_obs.contains(e) { same.clone() } else { Formula::True };
                                match seen_event {
                                    None => parts.push(step(vec![unchanged], k)),
                                    Some(ev) => {
                                        let o = setting.observation_index(Some(ev), None).expect("observation");
                                        for l in 0..self.m {
                                            let t = Formula::var(self.ta(k, o, l));
                                            parts.push(step(vec![unchanged.clone(), t], l));
                                        }
                                    }
                                }
                                // command changed: only between states of S
                                if !sup_obs.contains(e) || i >= n || j >= n {
                                    continue;
                                }
                                for gamma in commands.iter() {
                                    let psi = self.helper_psi(j, gamma).expect("j < n");
                                    let o = setting.observation_index(seen_event, Some(gamma)).expect("observation");
                                    for l in 0..self.m {
                                        let t = Formula::var(self.ta(k, o, l));
                                        parts.push(step(vec![Formula::not(same.clone()), psi.clone(), t], l));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        let qd = self.plant.dump().expect("completion has a dump");
        for k in 0..self.m {
            for i in 0..=n {
                for q in self.plant.fsa().states().filter(|&q| q != qd) {
                    parts.push(Formula::not(self.rs(k, i, q, h.sink())));
                }
            }
        }
        Formula::and(parts)
    }

    /// `φ_n ∧ φ_left ∧ φ_right`.
    pub fn outer_formula(&self) -> Formula {
        Formula::and([self.supervisor_constraints(), self.left_inclusion(), self.right_inclusion()])
    }

    /// The prenex QBF `∃X,R_left,R_right ∀Y ∃R_safe. φ_n ∧ φ_left ∧ φ_right ∧ (φ_attack ⇒ φ_safe)`.
    pub fn assemble_resilient_qbf(&mut self) -> Qbf {
        let outer_vars = self.vars.len() as Var;
        let mut matrix = to_cnf(&self.outer_formula(), &mut self.vars);
        let outer_aux_end = self.vars.len() as Var;
        let (attack_lit, attack_defs) = define(&self.attacker_constraints(), &mut self.vars);
        matrix.extend(attack_defs);
        let inner = Formula::implies(Formula::lit(attack_lit.unsigned_abs(), attack_lit > 0), self.safety());
        matrix.extend(to_cnf(&inner, &mut self.vars));
        matrix.set_num_vars(self.vars.len());

        let mut outer = Vec::new();
        let mut universal = Vec::new();
        let mut inner_block = Vec::new();
        for (v, d) in self.vars.iter() {
            match d {
                VarDesc::SupTrans { .. } | VarDesc::Loop { .. } | VarDesc::ReachLeft { .. } | VarDesc::ReachRight { .. } => {
                    outer.push(v)
                }
                VarDesc::Aux(_) if v > outer_vars && v <= outer_aux_end => outer.push(v),
                VarDesc::AtkTrans { .. } | VarDesc::AtkEnable { .. } => universal.push(v),
                _ => inner_block.push(v),
            }
        }
        Qbf {
            prefix: vec![
                (Quantifier::Exists, outer),
                (Quantifier::Forall, universal),
                (Quantifier::Exists, inner_block),
            ],
            matrix,
        }
    }

    /// `f` with the attacker variables fixed by `a` and the safety variables
    /// renamed to a fresh copy.
    pub fn instantiate_attacker(&mut self, f: &Formula, a: &MooreAttacker) -> Result<Formula, EncodingError> {
        let setting = self.inst.setting();
        if a.num_states() != self.m || a.num_observations() != setting.observations().len() {
            return Err(EncodingError::Dimension(format!(
                "attacker has {} states and {} observations, encoding expects {} and {}",
                a.num_states(),
                a.num_observations(),
                self.m,
                setting.observations().len()
            )));
        }
        let copy = self.allocate_safe_copy();
        let vars = &self.vars;
        Ok(f.substitute(&|v| match vars.desc(v) {
            VarDesc::AtkTrans { from, obs, to } => Some(Formula::constant(a.next(from, obs) == to)),
            VarDesc::AtkEnable { state, event } => Some(Formula::constant(a.output(state).contains(EventId(event)))),
            VarDesc::ReachSafe { copy: 0, y, x, q, w } => {
                Some(Formula::var(vars.var(VarDesc::ReachSafe { copy, y, x, q, w })))
            }
            _ => None,
        }))
    }

    /// `φ_safe[A]` over a fresh copy of the safety variables.
    pub fn safety_against(&mut self, a: &MooreAttacker) -> Result<Formula, EncodingError> {
        let f = self.safety();
        self.instantiate_attacker(&f, a)
    }

    /// CNF of `f` with Tseitin variables registered in the map.
    pub fn clausify(&mut self, f: &Formula) -> Cnf {
        let mut cnf = to_cnf(f, &mut self.vars);
        cnf.set_num_vars(self.vars.len());
        cnf
    }

    /// Truth values of the supervisor variables describing `s`.
    pub fn encode_supervisor(&self, s: &Supervisor) -> Result<Vec<(Var, bool)>, EncodingError> {
        if s.num_states() != self.n {
            return Err(EncodingError::Dimension(format!(
                "supervisor has {} states, encoding expects {}",
                s.num_states(),
                self.n
            )));
        }
        let setting = self.inst.setting();
        let st = transform(s, setting.control(), setting.attack())?;
        let (n, xs) = (self.n, self.n + 2);
        let mut out = Vec::new();
        for i in 0..xs {
            for e in setting.alphabet().ids() {
                let target = if i < n {
                    st.fsa().next(StateId(i), e).map_or(n + 1, |d| d.0)
                } else {
                    n + 1
                };
                for j in 0..xs {
                    out.push((self.t(i, e, j), j == target));
                }
            }
        }
        for i in 0..n {
            for e in self.loop_events().iter() {
                out.push((self.l(i, e), st.loop_flag(StateId(i), e)));
            }
        }
        Ok(out)
    }

    /// Truth values of the attacker variables describing `a`.
    pub fn encode_attacker(&self, a: &MooreAttacker) -> Result<Vec<(Var, bool)>, EncodingError> {
        let setting = self.inst.setting();
        if a.num_states() != self.m || a.num_observations() != setting.observations().len() {
            return Err(EncodingError::Dimension("attacker shape".into()));
        }
        let mut out = Vec::new();
        for k in 0..self.m {
            for o in 0..a.num_observations() {
                for l in 0..self.m {
                    out.push((self.ta(k, o, l), a.next(k, o) == l));
                }
            }
        }
        for k in 0..self.m {
            for e in setting.attack().compromised().iter() {
                out.push((self.e(k, e), a.output(k).contains(e)));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::enumerate_attackers;
    use crate::automata::Fsa;
    use crate::format::parse_instance;
    use crate::solve::decode_supervisor;

    // a is compromised but unobservable to the supervisor, so it gets loop flags
    const LOOPY: &str = "\
alphabet: a b
controllable: a b
observable: b
attacker_observable: a b
attacker_compromised: a
automaton plant
states: q0 q1
trans: q0 a q1
trans: q1 b q0
end
automaton lower
states: q0
end
automaton upper
states: q0 q1
trans: q0 a q1
trans: q1 b q0
end
automaton damage
states: w0 wm
marked: wm
trans: w0 b wm
end
";

    fn inst(text: &str) -> SynthesisInstance {
        parse_instance(text).unwrap().synthesis_instance().unwrap()
    }

    fn inst2() -> SynthesisInstance {
        inst(include_str!("../../instances/inst2.des"))
    }

    fn clauses(enc: &mut Encoder, f: &Formula) -> usize {
        enc.clausify(f).clauses().len()
    }

    #[test]
    fn transition_function_clause_counts() {
        let i = inst2();
        // per row: C(n+2, 2) at-most-one clauses and one at-least-one clause,
        // plus |Σ| units for each of halt and dump
        for (n, expected) in [(1, 2 * 3 + 2 + 4), (2, 4 * 6 + 4 + 4)] {
            let mut enc = Encoder::new(&i, n, 1).unwrap();
            let f = enc.fsa_constraints();
            assert_eq!(clauses(&mut enc, &f), expected);
        }
    }

    #[test]
    fn attacker_clause_counts() {
        let i = inst2();
        let obs = i.setting().observations().len();
        let mut enc = Encoder::new(&i, 1, 1).unwrap();
        let f = enc.attacker_constraints();
        assert_eq!(clauses(&mut enc, &f), obs);
        let mut enc = Encoder::new(&i, 1, 2).unwrap();
        let f = enc.attacker_constraints();
        assert_eq!(clauses(&mut enc, &f), 2 * obs * 2);
    }

    #[test]
    fn zero_bounds_are_rejected() {
        let i = inst2();
        assert!(matches!(Encoder::new(&i, 0, 1), Err(EncodingError::BadBounds { .. })));
        assert!(matches!(Encoder::new(&i, 1, 0), Err(EncodingError::BadBounds { .. })));
    }

    #[test]
    fn helpers_reject_halt_and_dump() {
        let i = inst2();
        let enc = Encoder::new(&i, 1, 1).unwrap();
        assert!(enc.helper_omega(1, EventId(0)).is_err());
        assert!(enc.helper_psi(2, EventSet::EMPTY).is_err());
        assert_eq!(enc.helper_phi(0, 1), Formula::True);
    }

    /// Every one-hot choice of rows `0..n` and every loop flag vector.
    fn assignments(enc: &Encoder) -> Vec<Vec<(Var, bool)>> {
        let alphabet = enc.instance().setting().alphabet().clone();
        let (n, xs) = (enc.n(), enc.n() + 2);
        let cells: Vec<(usize, EventId)> = (0..n).flat_map(|i| alphabet.ids().map(move |e| (i, e))).collect();
        let loops: Vec<(usize, EventId)> =
            (0..n).flat_map(|i| enc.loop_events().iter().map(move |e| (i, e))).collect();
        let total = xs.pow(cells.len() as u32) << loops.len();
        (0..total)
            .map(|code| {
                let mut out = Vec::new();
                let mut c = code >> loops.len();
                for &(i, e) in &cells {
                    let target = c % xs;
                    c /= xs;
                    out.extend((0..xs).map(|j| (enc.t(i, e, j), j == target)));
                }
                for (k, &(i, e)) in loops.iter().enumerate() {
                    out.push((enc.l(i, e), code >> k & 1 == 1));
                }
                for i in n..xs {
                    for e in alphabet.ids() {
                        out.extend((0..xs).map(|j| (enc.t(i, e, j), j == n + 1)));
                    }
                }
                out
            })
            .collect()
    }

    fn valid_supervisors(i: &SynthesisInstance, n: usize) -> Vec<Supervisor> {
        let alphabet = i.setting().alphabet();
        let cells = n * alphabet.len();
        let names: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
        (0..(n + 1).pow(cells as u32))
            .filter_map(|mut code| {
                let delta = (0..n)
                    .map(|_| {
                        (0..alphabet.len())
                            .map(|_| {
                                let v = code % (n + 1);
                                code /= n + 1;
                                (v > 0).then(|| StateId(v - 1))
                            })
                            .collect()
                    })
                    .collect();
                let s = Supervisor::new(Fsa::from_table(alphabet.clone(), names.clone(), delta, StateId(0), vec![true; n]));
                s.validate(i.setting().control()).is_empty().then_some(s)
            })
            .collect()
    }

    #[test]
    fn supervisor_constraints_match_valid_supervisors_one_to_one() {
        for text in [LOOPY, include_str!("../../instances/inst1.des")] {
            let i = inst(text);
            for n in [1, 2] {
                let enc = Encoder::new(&i, n, 1).unwrap();
                let phi = enc.supervisor_constraints();
                let models: Vec<Vec<(Var, bool)>> = assignments(&enc)
                    .into_iter()
                    .filter(|a| {
                        let lookup = |v: Var| a.iter().find(|&&(w, _)| w == v).map(|&(_, b)| b);
                        phi.eval(&lookup).unwrap()
                    })
                    .collect();
                let valid = valid_supervisors(&i, n);
                assert_eq!(models.len(), valid.len(), "n={n}");
                let mut decoded = Vec::new();
                for a in &models {
                    let mut model = vec![false; enc.vars().len() + 1];
                    for &(v, b) in a {
                        model[v as usize] = b;
                    }
                    decoded.push(decode_supervisor(&model, enc.vars(), n, i.setting()).unwrap());
                }
                for s in &valid {
                    assert!(decoded.contains(s));
                    let mut enc_s = enc.encode_supervisor(s).unwrap();
                    enc_s.sort();
                    assert!(models.iter().any(|a| {
                        let mut a = a.clone();
                        a.sort();
                        a == enc_s
                    }));
                }
            }
        }
    }

    #[test]
    fn qbf_prefix_covers_every_matrix_variable() {
        let i = inst(LOOPY);
        let mut enc = Encoder::new(&i, 2, 2).unwrap();
        let qbf = enc.assemble_resilient_qbf();
        assert!(qbf.is_closed());
        let universal = &qbf.prefix[1].1;
        assert!(universal
            .iter()
            .all(|&v| matches!(enc.vars().desc(v), VarDesc::AtkTrans { .. } | VarDesc::AtkEnable { .. })));
        assert_eq!(universal.len(), 2 * i.setting().observations().len() * 2 + 2);
    }

    #[test]
    fn instantiation_fixes_every_attacker_variable() {
        let i = inst(LOOPY);
        let mut enc = Encoder::new(&i, 1, 1).unwrap();
        for a in enumerate_attackers(1, i.setting(), 64).unwrap() {
            let f = enc.safety_against(&a).unwrap();
            assert!(f.vars().iter().all(|&v| !matches!(
                enc.vars().desc(v),
                VarDesc::AtkTrans { .. } | VarDesc::AtkEnable { .. } | VarDesc::ReachSafe { copy: 0, .. }
            )));
        }
        let wrong = crate::attack::all_enable_attacker(i.setting()).padded(2);
        assert!(matches!(enc.safety_against(&wrong), Err(EncodingError::Dimension(_))));
    }

    #[test]
    fn encoding_is_deterministic() {
        let i = inst(LOOPY);
        let emit = || {
            let mut enc = Encoder::new(&i, 2, 1).unwrap();
            (crate::encoding::emit_qdimacs(&enc.assemble_resilient_qbf()), enc.vars().render())
        };
        assert_eq!(emit(), emit());
    }
}
