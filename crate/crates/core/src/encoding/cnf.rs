//! Clause form, Tseitin conversion and DIMACS/QDIMACS text.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::formula::{Formula, Var};
use super::EncodingError;

/// Source of fresh auxiliary variables.
pub trait FreshVars {
    fn fresh(&mut self) -> Var;
}

/// Hands out `next, next+1, ...`.
#[derive(Debug, Clone)]
pub struct Counter(pub Var);

impl FreshVars for Counter {
    fn fresh(&mut self) -> Var {
        let v = self.0;
        self.0 += 1;
        v
    }
}

/// A clause set over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Cnf {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl Cnf {
    pub fn new(num_vars: usize) -> Self {
        Cnf {
            num_vars,
            clauses: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn set_num_vars(&mut self, n: usize) {
        self.num_vars = n;
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Adds a clause after sorting and deduplicating its literals; tautologies
    /// are dropped.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = i32>) {
        let mut c: Vec<i32> = lits.into_iter().collect();
        c.sort_by_key(|l| (l.unsigned_abs(), *l < 0));
        c.dedup();
        if c.windows(2).any(|w| w[0] == -w[1]) {
            return;
        }
        for l in &c {
            self.num_vars = self.num_vars.max(l.unsigned_abs() as usize);
        }
        self.clauses.push(c);
    }

    pub fn extend(&mut self, other: Cnf) {
        self.num_vars = self.num_vars.max(other.num_vars);
        self.clauses.extend(other.clauses);
    }

    /// Whether `model` (indexed by variable, slot 0 unused) satisfies every clause.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let v = l.unsigned_abs() as usize;
                v < model.len() && model[v] == (l > 0)
            })
        })
    }
}

/// Converts `f` to an equisatisfiable CNF whose models restricted to the
/// variables of `f` are exactly the models of `f`.
///
/// Top-level conjunctions are split and disjunctions flattened; a disjunction
/// with one conjunctive disjunct is distributed over it. Anything else nested
/// gets a Tseitin variable from `fresh`, shared between equal subformulas.
pub fn to_cnf(f: &Formula, fresh: &mut dyn FreshVars) -> Cnf {
    let mut c = Clausifier {
        fresh,
        memo: HashMap::new(),
        cnf: Cnf::new(0),
    };
    c.top(f);
    c.cnf
}

/// A literal equivalent to `f` together with the clauses defining it.
pub fn define(f: &Formula, fresh: &mut dyn FreshVars) -> (i32, Cnf) {
    let mut c = Clausifier {
        fresh,
        memo: HashMap::new(),
        cnf: Cnf::new(0),
    };
    let l = c.literal(f);
    (l, c.cnf)
}

struct Clausifier<'a> {
    fresh: &'a mut dyn FreshVars,
    memo: HashMap<Formula, i32>,
    cnf: Cnf,
}

impl Clausifier<'_> {
    fn top(&mut self, f: &Formula) {
        match f {
            Formula::True => {}
            Formula::And(gs) => gs.iter().for_each(|g| self.top(g)),
            Formula::Not(g) => match g.as_ref() {
                Formula::Or(hs) => hs.iter().for_each(|h| self.top(&Formula::not(h.clone()))),
                Formula::Implies(a, b) => {
                    self.top(a);
                    self.top(&Formula::not((**b).clone()));
                }
                _ => self.disjunction(vec![f.clone()]),
            },
            Formula::Iff(a, b) => {
                self.disjunction(vec![Formula::not((**a).clone()), (**b).clone()]);
                self.disjunction(vec![(**a).clone(), Formula::not((**b).clone())]);
            }
            _ => self.disjunction(vec![f.clone()]),
        }
    }

    fn disjunction(&mut self, parts: Vec<Formula>) {
        let mut flat = Vec::new();
        let mut stack = parts;
        while let Some(p) = stack.pop() {
            match p {
                Formula::False => {}
                Formula::True => return,
                Formula::Or(gs) => stack.extend(gs),
                Formula::Implies(a, b) => {
                    stack.push(Formula::not(*a));
                    stack.push(*b);
                }
                Formula::Not(g) => match *g {
                    Formula::And(hs) => stack.extend(hs.into_iter().map(Formula::not)),
                    g => flat.push(Formula::not(g)),
                },
                g => flat.push(g),
            }
        }
        flat.reverse();
        let conj = flat.iter().position(|g| matches!(g, Formula::And(_)));
        if let Some(k) = conj {
            let Formula::And(children) = flat.remove(k) else { unreachable!() };
            let rest: Vec<i32> = flat.iter().map(|g| self.literal(g)).collect();
            for child in children {
                let mut parts: Vec<Formula> = rest.iter().map(|&l| lit_formula(l)).collect();
                parts.push(child);
                self.disjunction(parts);
            }
            return;
        }
        let clause: Vec<i32> = flat.iter().map(|g| self.literal(g)).collect();
        self.cnf.add_clause(clause);
    }

    fn literal(&mut self, f: &Formula) -> i32 {
        match f {
            Formula::Var(v) => *v as i32,
            Formula::Not(g) => -self.literal(g),
            Formula::True | Formula::False => {
                let v = self.constant();
                if matches!(f, Formula::True) {
                    v
                } else {
                    -v
                }
            }
            _ => {
                if let Some(&l) = self.memo.get(f) {
                    return l;
                }
                let l = self.define(f);
                self.memo.insert(f.clone(), l);
                l
            }
        }
    }

    fn constant(&mut self) -> i32 {
        if let Some(&l) = self.memo.get(&Formula::True) {
            return l;
        }
        let v = self.fresh.fresh() as i32;
        self.cnf.add_clause([v]);
        self.memo.insert(Formula::True, v);
        v
    }

    fn define(&mut self, f: &Formula) -> i32 {
        match f {
            Formula::And(gs) => {
                let ls: Vec<i32> = gs.iter().map(|g| self.literal(g)).collect();
                let v = self.fresh.fresh() as i32;
                for &l in &ls {
                    self.cnf.add_clause([-v, l]);
                }
                self.cnf.add_clause(std::iter::once(v).chain(ls.iter().map(|l| -l)));
                v
            }
            Formula::Or(gs) => {
                let ls: Vec<i32> = gs.iter().map(|g| self.literal(g)).collect();
                let v = self.fresh.fresh() as i32;
                for &l in &ls {
                    self.cnf.add_clause([v, -l]);
                }
                self.cnf.add_clause(std::iter::once(-v).chain(ls.iter().copied()));
                v
            }
            Formula::Implies(a, b) => {
                let g = Formula::Or(vec![Formula::not((**a).clone()), (**b).clone()]);
                self.literal(&g)
            }
            Formula::Iff(a, b) => {
                let la = self.literal(a);
                let lb = self.literal(b);
                let v = self.fresh.fresh() as i32;
                self.cnf.add_clause([-v, -la, lb]);
                self.cnf.add_clause([-v, la, -lb]);
                self.cnf.add_clause([v, la, lb]);
                self.cnf.add_clause([v, -la, -lb]);
                v
            }
            Formula::Var(_) | Formula::Not(_) | Formula::True | Formula::False => unreachable!("handled by literal"),
        }
    }
}

fn lit_formula(l: i32) -> Formula {
    Formula::lit(l.unsigned_abs(), l > 0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

/// Prenex QBF: quantifier blocks (outermost first) and a CNF matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf {
    pub prefix: Vec<(Quantifier, Vec<Var>)>,
    pub matrix: Cnf,
}

impl Qbf {
    /// Every variable in `1..=num_vars` sits in exactly one block.
    pub fn is_closed(&self) -> bool {
        let n = self.matrix.num_vars();
        let mut seen = vec![false; n + 1];
        for (_, vs) in &self.prefix {
            for &v in vs {
                let v = v as usize;
                if v == 0 || v > n || seen[v] {
                    return false;
                }
                seen[v] = true;
            }
        }
        seen[1..].iter().all(|&b| b)
    }
}

pub fn emit_dimacs(cnf: &Cnf) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.clauses().len());
    write_clauses(&mut out, cnf);
    out
}

/// QDIMACS text; empty blocks are skipped and adjacent blocks with the same
/// quantifier merged.
pub fn emit_qdimacs(qbf: &Qbf) -> String {
    let mut blocks: Vec<(Quantifier, Vec<Var>)> = Vec::new();
    for (q, vs) in &qbf.prefix {
        if vs.is_empty() {
            continue;
        }
        match blocks.last_mut() {
            Some((last, acc)) if last == q => acc.extend(vs),
            _ => blocks.push((*q, vs.clone())),
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "p cnf {} {}", qbf.matrix.num_vars(), qbf.matrix.clauses().len());
    for (q, vs) in &blocks {
        out.push(match q {
            Quantifier::Exists => 'e',
            Quantifier::Forall => 'a',
        });
        for v in vs {
            let _ = write!(out, " {v}");
        }
        out.push_str(" 0\n");
    }
    write_clauses(&mut out, &qbf.matrix);
    out
}

fn write_clauses(out: &mut String, cnf: &Cnf) {
    for c in cnf.clauses() {
        for l in c {
            let _ = write!(out, "{l} ");
        }
        out.push_str("0\n");
    }
}

/// Reads DIMACS CNF. Comment lines start with `c`; clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<Cnf, EncodingError> {
    let mut header: Option<(usize, usize)> = None;
    let mut cnf = Cnf::new(0);
    let mut current = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        let bad = |msg: &str| EncodingError::Dimacs {
            line: no + 1,
            msg: msg.to_string(),
        };
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" || header.is_some() {
                return Err(bad("malformed problem line"));
            }
            let v = parts[2].parse().map_err(|_| bad("bad variable count"))?;
            let c = parts[3].parse().map_err(|_| bad("bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        if header.is_none() {
            return Err(bad("clause before problem line"));
        }
        for tok in line.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| bad("bad literal"))?;
            if l == 0 {
                cnf.clauses.push(std::mem::take(&mut current));
            } else {
                current.push(l);
            }
        }
    }
    let (v, _) = header.ok_or(EncodingError::Dimacs {
        line: 0,
        msg: "missing problem line".into(),
    })?;
    if !current.is_empty() {
        cnf.clauses.push(current);
    }
    let max = cnf.clauses.iter().flatten().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0);
    if max > v {
        return Err(EncodingError::Dimacs {
            line: 0,
            msg: format!("literal {max} exceeds the declared {v} variables"),
        });
    }
    cnf.num_vars = v;
    Ok(cnf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::{sat_solve, SatConfig, SatResult};
    use proptest::prelude::*;

    fn v(i: Var) -> Formula {
        Formula::var(i)
    }

    #[test]
    fn cnf_input_adds_no_auxiliaries() {
        let f = Formula::and([Formula::or([v(1), v(2)]), Formula::not(v(1))]);
        let cnf = to_cnf(&f, &mut Counter(3));
        assert_eq!(emit_dimacs(&cnf), "p cnf 2 2\n1 2 0\n-1 0\n");
    }

    #[test]
    fn implication_with_conjunctive_head_distributes() {
        let f = Formula::implies(v(1), Formula::and([v(2), v(3)]));
        let cnf = to_cnf(&f, &mut Counter(4));
        assert_eq!(cnf.clauses(), &[vec![-1, 2], vec![-1, 3]]);
    }

    #[test]
    fn shared_subformulas_reuse_one_variable() {
        let g = Formula::iff(v(1), v(2));
        let f = Formula::and([Formula::or([g.clone(), v(3)]), Formula::or([g, v(4)])]);
        let mut ctr = Counter(5);
        to_cnf(&f, &mut ctr);
        assert_eq!(ctr.0, 6);
    }

    #[test]
    fn false_yields_empty_clause() {
        let cnf = to_cnf(&Formula::False, &mut Counter(1));
        assert_eq!(cnf.clauses(), &[Vec::<i32>::new()]);
    }

    #[test]
    fn dimacs_round_trip() {
        let text = "c hi\np cnf 3 2\n1 -3 0\n2\n 3 0\n";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(cnf.clauses(), &[vec![1, -3], vec![2, 3]]);
        assert_eq!(parse_dimacs(&emit_dimacs(&cnf)).unwrap(), cnf);
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
    }

    #[test]
    fn qdimacs_merges_blocks_around_empty_ones() {
        let mut m = Cnf::new(3);
        m.add_clause([1, -2, 3]);
        let q = Qbf {
            prefix: vec![
                (Quantifier::Exists, vec![1]),
                (Quantifier::Forall, vec![]),
                (Quantifier::Exists, vec![2, 3]),
            ],
            matrix: m,
        };
        assert!(q.is_closed());
        assert_eq!(emit_qdimacs(&q), "p cnf 3 1\ne 1 2 3 0\n1 -2 3 0\n");
    }

    fn formula() -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![(1u32..=4).prop_map(Formula::var), any::<bool>().prop_map(Formula::constant)];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::and),
                prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::or),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        // for every assignment of the input variables, the clauses can be
        // extended exactly when the formula is true
        #[test]
        fn clausification_preserves_truth_per_assignment(f in formula()) {
            let base = to_cnf(&f, &mut Counter(5));
            for bits in 0u32..16 {
                let value = |v: Var| Some(bits >> (v - 1) & 1 == 1);
                let expected = f.eval(&value).unwrap();
                let mut cnf = base.clone();
                cnf.set_num_vars(cnf.num_vars().max(4));
                for v in 1..=4 {
                    cnf.add_clause([if value(v) == Some(true) { v as i32 } else { -(v as i32) }]);
                }
                let sat = matches!(sat_solve(&cnf, &SatConfig::default()).unwrap(), SatResult::Sat(_));
                prop_assert_eq!(sat, expected);
            }
        }
    }
}
