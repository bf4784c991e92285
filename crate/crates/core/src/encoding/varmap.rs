//! Registry of propositional variables and what they stand for.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::cnf::FreshVars;
use super::formula::Var;

/// Meaning of a variable. Indices are positions: supervisor states
/// `0..=n+1` (halt `n`, dump `n+1`), attacker states, observation indices,
/// event ids and automaton state ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarDesc {
    SupTrans { from: usize, event: usize, to: usize },
    Loop { state: usize, event: usize },
    AtkTrans { from: usize, obs: usize, to: usize },
    AtkEnable { state: usize, event: usize },
    ReachLeft { x: usize, q: usize, spec: usize },
    ReachRight { x: usize, q: usize, spec: usize },
    ReachSafe { copy: usize, y: usize, x: usize, q: usize, w: usize },
    /// One-hot run encoding: `component` is a short tag such as `"x"`.
    Run { step: usize, component: &'static str, value: usize },
    Aux(usize),
}

/// Bijection between descriptors and ids `1..=len`, with a printable label
/// per variable.
#[derive(Debug, Clone, Default)]
pub struct VarMap {
    descs: Vec<VarDesc>,
    labels: Vec<String>,
    index: HashMap<VarDesc, Var>,
    aux: usize,
}

impl VarMap {
    pub fn new() -> Self {
        VarMap::default()
    }

    /// Registers `desc`; panics if it is already present.
    pub fn push(&mut self, desc: VarDesc, label: String) -> Var {
        let v = self.descs.len() as Var + 1;
        let prev = self.index.insert(desc, v);
        assert!(prev.is_none(), "variable registered twice: {desc:?}");
        self.descs.push(desc);
        self.labels.push(label);
        v
    }

    pub fn len(&self) -> usize {
        self.descs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descs.is_empty()
    }

    pub fn get(&self, desc: &VarDesc) -> Option<Var> {
        self.index.get(desc).copied()
    }

    /// Like [`VarMap::get`] for descriptors known to be allocated.
    pub fn var(&self, desc: VarDesc) -> Var {
        match self.index.get(&desc) {
            Some(&v) => v,
            None => panic!("unallocated variable {desc:?}"),
        }
    }

    pub fn desc(&self, v: Var) -> VarDesc {
        self.descs[v as usize - 1]
    }

    pub fn label(&self, v: Var) -> &str {
        &self.labels[v as usize - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &VarDesc)> {
        self.descs.iter().enumerate().map(|(i, d)| (i as Var + 1, d))
    }

    /// Sidecar text: one `v <id> <label>` line per variable.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, l) in self.labels.iter().enumerate() {
            let _ = writeln!(out, "v {} {}", i + 1, l);
        }
        out
    }
}

impl FreshVars for VarMap {
    fn fresh(&mut self) -> Var {
        let k = self.aux;
        self.aux += 1;
        self.push(VarDesc::Aux(k), format!("aux {k}"))
    }
}
