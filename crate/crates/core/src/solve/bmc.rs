//! Counterexample search: is there an attacker that drives the loop into damage?

use crate::attack::{all_enable_attacker, compose, MooreAttacker, Semantics};
use crate::automata::{EventId, StateId};
use crate::encoding::{Cnf, Var, VarDesc, VarMap};
use crate::supervision::{transform, Supervisor};

use super::decode::decode_attacker;
use super::sat::{sat_solve, SatConfig, SatResult};
use super::{SolveError, SynthesisInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    /// Check the all-enable attacker only; exact for risky attackers.
    Fast,
    /// Bounded model checking over symbolic `m`-state attackers.
    Bmc,
}

#[derive(Debug, Clone)]
pub struct AttackSearch {
    pub method: SearchMethod,
    /// Upper limit on the unrolling depth of [`SearchMethod::Bmc`].
    pub max_steps: usize,
    pub sat: SatConfig,
}

impl Default for AttackSearch {
    fn default() -> Self {
        AttackSearch {
            method: SearchMethod::Fast,
            max_steps: 64,
            sat: SatConfig::default(),
        }
    }
}

/// A successful risky attacker with at most `m` states against `s`, if any.
///
/// Covert semantics are refused: success there depends on every run, which
/// a single bounded path cannot witness.
pub fn find_attacker(
    s: &Supervisor,
    inst: &SynthesisInstance,
    m: usize,
    search: &AttackSearch,
) -> Result<Option<MooreAttacker>, SolveError> {
    if inst.semantics != Semantics::Risky {
        return Err(SolveError::CovertUnsupported);
    }
    let setting = inst.setting();
    setting.check_supervisor(s)?;
    match search.method {
        SearchMethod::Fast => {
            let a = all_enable_attacker(setting);
            let o = compose(setting, &a, s, inst.plant(), inst.damage())?;
            Ok(o.damage_reachable().then_some(a))
        }
        SearchMethod::Bmc => {
            let found = bmc(s, inst, m, search)?;
            if let Some(a) = &found {
                let o = compose(setting, a, s, inst.plant(), inst.damage())?;
                if !o.damage_reachable() {
                    return Err(SolveError::Verification(
                        "bounded search returned an attacker that does not reach damage".into(),
                    ));
                }
            }
            Ok(found)
        }
    }
}

/// Unrolling depth used by [`SearchMethod::Bmc`].
pub fn bmc_depth(s: &Supervisor, inst: &SynthesisInstance, m: usize, max_steps: usize) -> usize {
    let bound = m * (s.num_states() + 2) * (inst.plant().num_states() + 1) * inst.damage().num_states();
    bound.min(max_steps)
}

struct Run {
    vars: VarMap,
    cnf: Cnf,
}

impl Run {
    fn one_hot(&mut self, step: usize, component: &'static str, size: usize) {
        let vs: Vec<Var> = (0..size)
            .map(|value| {
                self.vars.push(
                    VarDesc::Run { step, component, value },
                    format!("run {step} {component}={value}"),
                )
            })
            .collect();
        self.cnf.add_clause(vs.iter().map(|&v| v as i32));
        for a in 0..vs.len() {
            for b in a + 1..vs.len() {
                self.cnf.add_clause([-(vs[a] as i32), -(vs[b] as i32)]);
            }
        }
    }

    fn at(&self, step: usize, component: &'static str, value: usize) -> i32 {
        self.vars.var(VarDesc::Run { step, component, value }) as i32
    }
}

fn bmc(s: &Supervisor, inst: &SynthesisInstance, m: usize, search: &AttackSearch) -> Result<Option<MooreAttacker>, SolveError> {
    let setting = inst.setting();
    let alphabet = setting.alphabet();
    let compromised = setting.attack().compromised();
    let st = transform(s, setting.control(), setting.attack())?;
    let (g, h) = (inst.plant(), inst.damage());
    let n = s.num_states();
    let halt = n;
    let idle = alphabet.len();
    let depth = bmc_depth(s, inst, m, search.max_steps);
    let obs = setting.observations().len();

    let mut run = Run {
        vars: VarMap::new(),
        cnf: Cnf::new(0),
    };
    for k in 0..m {
        for (o, ob) in setting.observations().iter().enumerate() {
            for l in 0..m {
                run.vars.push(
                    VarDesc::AtkTrans { from: k, obs: o, to: l },
                    format!("t_A y{k} {} y{l}", ob.render(alphabet)),
                );
            }
        }
    }
    for k in 0..m {
        for e in compromised.iter() {
            run.vars
                .push(VarDesc::AtkEnable { state: k, event: e.0 }, format!("e y{k} {}", alphabet.name(e)));
        }
    }
    let ta = |vars: &VarMap, k: usize, o: usize, l: usize| vars.var(VarDesc::AtkTrans { from: k, obs: o, to: l }) as i32;
    for k in 0..m {
        for o in 0..obs {
            let row: Vec<i32> = (0..m).map(|l| ta(&run.vars, k, o, l)).collect();
            run.cnf.add_clause(row.iter().copied());
            for a in 0..m {
                for b in a + 1..m {
                    run.cnf.add_clause([-row[a], -row[b]]);
                }
            }
        }
    }

    let sizes = [("y", m), ("x", n + 1), ("q", g.num_states()), ("w", h.num_states())];
    for step in 0..=depth {
        for (c, size) in sizes {
            run.one_hot(step, c, size);
        }
        if step < depth {
            run.one_hot(step, "ev", alphabet.len() + 1);
        }
    }
    let init = [
        ("y", 0),
        ("x", s.fsa().initial().0),
        ("q", g.initial().0),
        ("w", h.fsa().initial().0),
    ];
    for (c, v) in init {
        let l = run.at(0, c, v);
        run.cnf.add_clause([l]);
    }
    let final_damage = run.at(depth, "w", h.sink().0);
    run.cnf.add_clause([final_damage]);

    for step in 0..depth {
        let idle_lit = run.at(step, "ev", idle);
        for (c, size) in sizes {
            for v in 0..size {
                let (now, next) = (run.at(step, c, v), run.at(step + 1, c, v));
                run.cnf.add_clause([-idle_lit, -now, next]);
            }
        }
        for e in alphabet.ids() {
            let ev = run.at(step, "ev", e.0);
            for x in 0..=n {
                let xs = run.at(step, "x", x);
                if x == halt {
                    run.cnf.add_clause([-ev, -xs]);
                    continue;
                }
                let xid = StateId(x);
                if !compromised.contains(e) && s.fsa().next(xid, e).is_none() {
                    run.cnf.add_clause([-ev, -xs]);
                    continue;
                }
                let x2 = st.fsa().next(xid, e).expect("defined in the transformed supervisor");
                let x2_lit = run.at(step + 1, "x", x2.0);
                run.cnf.add_clause([-ev, -xs, x2_lit]);
                let observation = setting.observation_for(s, xid, e);
                for k in 0..m {
                    let ys = run.at(step, "y", k);
                    if compromised.contains(e) {
                        let en = run.vars.var(VarDesc::AtkEnable { state: k, event: e.0 }) as i32;
                        run.cnf.add_clause([-ev, -xs, -ys, en]);
                    }
                    match observation {
                        None => {
                            let y2 = run.at(step + 1, "y", k);
                            run.cnf.add_clause([-ev, -xs, -ys, y2]);
                        }
                        Some(o) => {
                            for l in 0..m {
                                let t = ta(&run.vars, k, o, l);
                                let y2 = run.at(step + 1, "y", l);
                                run.cnf.add_clause([-ev, -xs, -ys, -t, y2]);
                            }
                        }
                    }
                }
            }
            for q in g.states() {
                let qs = run.at(step, "q", q.0);
                match g.next(q, e) {
                    Some(q2) => {
                        let q2_lit = run.at(step + 1, "q", q2.0);
                        run.cnf.add_clause([-ev, -qs, q2_lit]);
                    }
                    None => run.cnf.add_clause([-ev, -qs]),
                }
            }
            for w in h.fsa().states() {
                let ws = run.at(step, "w", w.0);
                let w2 = run.at(step + 1, "w", h.next(w, EventId(e.0)).0);
                run.cnf.add_clause([-ev, -ws, w2]);
            }
        }
    }
    run.cnf.set_num_vars(run.vars.len());
    match sat_solve(&run.cnf, &search.sat)? {
        SatResult::Unsat => Ok(None),
        SatResult::Sat(model) => Ok(Some(decode_attacker(&model, &run.vars, m, setting)?)),
    }
}
