//! Reading supervisors and attackers back out of SAT models.

use crate::attack::{AttackSetting, MooreAttacker};
use crate::automata::{EventId, EventSet, Fsa, StateId};
use crate::encoding::{VarDesc, VarMap};
use crate::supervision::{untransform, Supervisor, TransformedSupervisor};

use super::SolveError;

fn value(model: &[bool], vars: &VarMap, desc: VarDesc) -> Result<bool, SolveError> {
    let v = vars
        .get(&desc)
        .ok_or_else(|| SolveError::Decode(format!("variable {desc:?} not allocated")))?;
    model
        .get(v as usize)
        .copied()
        .ok_or_else(|| SolveError::Decode(format!("model has no value for variable {v}")))
}

/// Builds `S^T` from the `t`/`l` variables of rows `0..n` and strips it back
/// to `S`; the result must pass validation against the control constraint.
pub fn decode_supervisor(
    model: &[bool],
    vars: &VarMap,
    n: usize,
    setting: &AttackSetting,
) -> Result<Supervisor, SolveError> {
    let alphabet = setting.alphabet();
    let mut delta = vec![vec![None; alphabet.len()]; n + 1];
    for (i, row) in delta.iter_mut().enumerate().take(n) {
        for e in alphabet.ids() {
            let mut targets = Vec::new();
            for j in 0..n + 2 {
                if value(model, vars, VarDesc::SupTrans { from: i, event: e.0, to: j })? {
                    targets.push(j);
                }
            }
            let [j] = targets[..] else {
                return Err(SolveError::Decode(format!(
                    "x{i} on {} has {} successors",
                    alphabet.name(e),
                    targets.len()
                )));
            };
            if j <= n {
                row[e.0] = Some(StateId(j));
            }
        }
    }
    let loop_events = setting.attack().compromised().intersection(setting.control().unobservable());
    let mut loops = vec![EventSet::EMPTY; n];
    for (i, l) in loops.iter_mut().enumerate() {
        for e in loop_events.iter() {
            if value(model, vars, VarDesc::Loop { state: i, event: e.0 })? {
                l.insert(e);
            }
        }
    }
    let mut names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    names.push("x_halt".into());
    let fsa = Fsa::from_table(alphabet.clone(), names, delta, StateId(0), vec![true; n + 1]);
    let s = untransform(&TransformedSupervisor::from_parts(fsa, loops, loop_events));
    let violations = s.validate(setting.control());
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(SolveError::Decode(format!("decoded supervisor is invalid: {}", text.join("; "))));
    }
    Ok(s)
}

/// Reads `β` and `η` from the `t^A`/`e` variables.
pub fn decode_attacker(
    model: &[bool],
    vars: &VarMap,
    m: usize,
    setting: &AttackSetting,
) -> Result<MooreAttacker, SolveError> {
    let obs = setting.observations().len();
    let mut next = vec![vec![0; obs]; m];
    for (k, row) in next.iter_mut().enumerate() {
        for (o, cell) in row.iter_mut().enumerate() {
            let mut targets = Vec::new();
            for l in 0..m {
                if value(model, vars, VarDesc::AtkTrans { from: k, obs: o, to: l })? {
                    targets.push(l);
                }
            }
            let [l] = targets[..] else {
                return Err(SolveError::Decode(format!(
                    "attacker state y{k} has {} successors on observation {o}",
                    targets.len()
                )));
            };
            *cell = l;
        }
    }
    let mut output = vec![EventSet::EMPTY; m];
    for (k, out) in output.iter_mut().enumerate() {
        for e in setting.attack().compromised().iter() {
            if value(model, vars, VarDesc::AtkEnable { state: k, event: e.0 })? {
                out.insert(EventId(e.0));
            }
        }
    }
    Ok(MooreAttacker::new(next, output)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::enumerate_attackers;
    use crate::encoding::Encoder;
    use crate::format::parse_instance;

    #[test]
    fn every_one_state_attacker_round_trips() {
        let inst = parse_instance(include_str!("../../instances/memory.des"))
            .unwrap()
            .synthesis_instance()
            .unwrap();
        let enc = Encoder::new(&inst, 1, 1).unwrap();
        let mut count = 0;
        for a in enumerate_attackers(1, inst.setting(), 64).unwrap() {
            let mut model = vec![false; enc.vars().len() + 1];
            for (v, b) in enc.encode_attacker(&a).unwrap() {
                model[v as usize] = b;
            }
            assert_eq!(decode_attacker(&model, enc.vars(), 1, inst.setting()).unwrap(), a);
            count += 1;
        }
        assert_eq!(count, 2);
    }

    #[test]
    fn two_successors_are_reported() {
        let inst = parse_instance(include_str!("../../instances/inst2.des"))
            .unwrap()
            .synthesis_instance()
            .unwrap();
        let enc = Encoder::new(&inst, 1, 1).unwrap();
        let mut model = vec![false; enc.vars().len() + 1];
        for (v, b) in enc.encode_supervisor(&crate::supervision::Supervisor::permissive(inst.setting().alphabet())).unwrap() {
            model[v as usize] = b;
        }
        let a = inst.setting().alphabet().id("a").unwrap();
        model[enc.t(0, a, 1) as usize] = true;
        assert!(matches!(
            decode_supervisor(&model, enc.vars(), 1, inst.setting()),
            Err(SolveError::Decode(_))
        ));
    }
}
