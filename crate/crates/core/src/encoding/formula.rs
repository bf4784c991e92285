//! Propositional formulas with constant-folding constructors.

use std::collections::BTreeSet;

use super::EncodingError;

/// Variable id, dense from 1.
pub type Var = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Var(Var),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(v: Var) -> Formula {
        debug_assert!(v > 0);
        Formula::Var(v)
    }

    pub fn constant(b: bool) -> Formula {
        if b {
            Formula::True
        } else {
            Formula::False
        }
    }

    /// `v` if `positive`, else `¬v`.
    pub fn lit(v: Var, positive: bool) -> Formula {
        if positive {
            Formula::Var(v)
        } else {
            Formula::Not(Box::new(Formula::Var(v)))
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        match f {
            Formula::True => Formula::False,
            Formula::False => Formula::True,
            Formula::Not(g) => *g,
            g => Formula::Not(Box::new(g)),
        }
    }

    pub fn and<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().expect("one element"),
            _ => Formula::And(out),
        }
    }

    pub fn or<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(inner) => out.extend(inner),
                g => out.push(g),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().expect("one element"),
            _ => Formula::Or(out),
        }
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::True) => Formula::True,
            (Formula::True, b) => b,
            (a, Formula::False) => Formula::not(a),
            (a, b) => Formula::Implies(Box::new(a), Box::new(b)),
        }
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, g) | (g, Formula::True) => g,
            (Formula::False, g) | (g, Formula::False) => Formula::not(g),
            (a, b) if a == b => Formula::True,
            (a, b) => Formula::Iff(Box::new(a), Box::new(b)),
        }
    }

    /// Truth value under `value`; fails on the first unassigned variable.
    pub fn eval(&self, value: &impl Fn(Var) -> Option<bool>) -> Result<bool, EncodingError> {
        Ok(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Var(v) => value(*v).ok_or(EncodingError::Unassigned(*v))?,
            Formula::Not(g) => !g.eval(value)?,
            Formula::And(gs) => {
                for g in gs {
                    if !g.eval(value)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(gs) => {
                for g in gs {
                    if g.eval(value)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(a, b) => !a.eval(value)? || b.eval(value)?,
            Formula::Iff(a, b) => a.eval(value)? == b.eval(value)?,
        })
    }

    /// Replaces variables by `sub(v)` where it returns `Some`, refolding constants.
    pub fn substitute(&self, sub: &impl Fn(Var) -> Option<Formula>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Var(v) => sub(*v).unwrap_or(Formula::Var(*v)),
            Formula::Not(g) => Formula::not(g.substitute(sub)),
            Formula::And(gs) => Formula::and(gs.iter().map(|g| g.substitute(sub))),
            Formula::Or(gs) => Formula::or(gs.iter().map(|g| g.substitute(sub))),
            Formula::Implies(a, b) => Formula::implies(a.substitute(sub), b.substitute(sub)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(sub), b.substitute(sub)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Var(v) => {
                out.insert(*v);
            }
            Formula::Not(g) => g.collect_vars(out),
            Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| g.collect_vars(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }
}
