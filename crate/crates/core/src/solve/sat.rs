//! SAT backend: a built-in CDCL search and an external DIMACS process.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::encoding::{emit_dimacs, Cnf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    /// Model indexed by variable; slot 0 is unused.
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverKind {
    Builtin,
    /// Command line of a solver that reads DIMACS on stdin.
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatConfig {
    pub solver: SolverKind,
    pub timeout: Duration,
}

impl Default for SatConfig {
    fn default() -> Self {
        SatConfig {
            solver: SolverKind::Builtin,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SatError {
    #[error("SAT call exceeded {0:?}")]
    Timeout(Duration),
    #[error("external solver: {0}")]
    External(String),
}

pub fn sat_solve(cnf: &Cnf, config: &SatConfig) -> Result<SatResult, SatError> {
    match &config.solver {
        SolverKind::Builtin => Cdcl::new(cnf).solve(Instant::now() + config.timeout, config.timeout),
        SolverKind::External(cmd) => external(cnf, cmd, config.timeout),
    }
}

const UNDEF: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Activity(f64, u32);

impl Eq for Activity {}

impl PartialOrd for Activity {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Activity {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// Literals are `2·var + sign` with zero-based variables; sign 1 is negative.
struct Cdcl {
    num_vars: usize,
    clauses: Vec<Vec<u32>>,
    watches: Vec<Vec<usize>>,
    assigns: Vec<i8>,
    level: Vec<usize>,
    reason: Vec<usize>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    heap: BinaryHeap<Activity>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    trivially_unsat: bool,
}

fn lit_value(assigns: &[i8], l: u32) -> i8 {
    let a = assigns[(l >> 1) as usize];
    if l & 1 == 1 {
        -a
    } else {
        a
    }
}

impl Cdcl {
    fn new(cnf: &Cnf) -> Self {
        let n = cnf.num_vars();
        let mut s = Cdcl {
            num_vars: n,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![0; n],
            level: vec![0; n],
            reason: vec![UNDEF; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            heap: (0..n as u32).map(|v| Activity(0.0, v)).collect(),
            phase: vec![false; n],
            seen: vec![false; n],
            trivially_unsat: false,
        };
        for c in cnf.clauses() {
            let mut lits: Vec<u32> = c
                .iter()
                .map(|&l| ((l.unsigned_abs() - 1) << 1) | (l < 0) as u32)
                .collect();
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
                continue;
            }
            match lits.len() {
                0 => s.trivially_unsat = true,
                1 => match lit_value(&s.assigns, lits[0]) {
                    0 => s.enqueue(lits[0], UNDEF),
                    -1 => s.trivially_unsat = true,
                    _ => {}
                },
                _ => {
                    let ci = s.clauses.len();
                    s.watches[lits[0] as usize].push(ci);
                    s.watches[lits[1] as usize].push(ci);
                    s.clauses.push(lits);
                }
            }
        }
        s
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: u32, reason: usize) {
        let v = (l >> 1) as usize;
        self.assigns[v] = if l & 1 == 1 { -1 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let (mut i, mut j) = (0, 0);
            let mut conflict = None;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let c = &mut self.clauses[ci];
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                if lit_value(&self.assigns, c[0]) == 1 {
                    ws[j] = ci;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..c.len() {
                    if lit_value(&self.assigns, c[k]) != -1 {
                        c.swap(1, k);
                        self.watches[c[1] as usize].push(ci);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = ci;
                j += 1;
                let first = c[0];
                if lit_value(&self.assigns, first) == -1 {
                    conflict = Some(ci);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, ci);
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
            self.rebuild_heap();
        } else if self.assigns[v] == 0 {
            self.heap.push(Activity(self.activity[v], v as u32));
        }
    }

    fn rebuild_heap(&mut self) {
        self.heap = (0..self.num_vars)
            .filter(|&v| self.assigns[v] == 0)
            .map(|v| Activity(self.activity[v], v as u32))
            .collect();
    }

    /// First-UIP learning; returns the learnt clause (asserting literal
    /// first) and the backjump level.
    fn analyze(&mut self, mut confl: usize) -> (Vec<u32>, usize) {
        let mut learnt = vec![0u32];
        let mut path = 0usize;
        let mut p: Option<u32> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].len() {
                let q = self.clauses[confl][k];
                let v = (q >> 1) as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] == self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[(self.trail[idx] >> 1) as usize] {
                    break;
                }
            }
            let lit = self.trail[idx];
            let v = (lit >> 1) as usize;
            self.seen[v] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[v];
        }
        learnt[0] = p.expect("conflict at a positive level") ^ 1;
        for &l in &learnt[1..] {
            self.seen[(l >> 1) as usize] = false;
        }
        let mut bt = 0;
        if learnt.len() > 1 {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[(learnt[k] >> 1) as usize] > self.level[(learnt[best] >> 1) as usize] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            bt = self.level[(learnt[1] >> 1) as usize];
        }
        (learnt, bt)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() <= lvl {
            return;
        }
        let start = self.trail_lim[lvl];
        for k in (start..self.trail.len()).rev() {
            let v = (self.trail[k] >> 1) as usize;
            self.phase[v] = self.assigns[v] == 1;
            self.assigns[v] = 0;
            self.reason[v] = UNDEF;
            self.heap.push(Activity(self.activity[v], v as u32));
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(lvl);
        self.qhead = self.trail.len();
        if self.heap.len() > 8 * self.num_vars + 64 {
            self.rebuild_heap();
        }
    }

    fn pick_branch(&mut self) -> Option<u32> {
        while let Some(Activity(_, v)) = self.heap.pop() {
            let v = v as usize;
            if self.assigns[v] == 0 {
                return Some(((v as u32) << 1) | (!self.phase[v]) as u32);
            }
        }
        None
    }

    fn solve(mut self, deadline: Instant, budget: Duration) -> Result<SatResult, SatError> {
        if self.trivially_unsat || self.propagate().is_some() {
            return Ok(SatResult::Unsat);
        }
        let mut restart = 0u32;
        let mut conflicts_left = 100 * luby(restart);
        let mut ticks = 0u64;
        loop {
            ticks += 1;
            if ticks.is_multiple_of(512) && Instant::now() > deadline {
                return Err(SatError::Timeout(budget));
            }
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    return Ok(SatResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], UNDEF);
                } else {
                    let ci = self.clauses.len();
                    self.watches[learnt[0] as usize].push(ci);
                    self.watches[learnt[1] as usize].push(ci);
                    let first = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(first, ci);
                }
                self.var_inc /= 0.95;
                conflicts_left = conflicts_left.saturating_sub(1);
                continue;
            }
            if conflicts_left == 0 {
                restart += 1;
                conflicts_left = 100 * luby(restart);
                self.cancel_until(0);
                continue;
            }
            match self.pick_branch() {
                None => {
                    let mut model = vec![false; self.num_vars + 1];
                    for v in 0..self.num_vars {
                        model[v + 1] = self.assigns[v] == 1;
                    }
                    return Ok(SatResult::Sat(model));
                }
                Some(l) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(l, UNDEF);
                }
            }
        }
    }
}

/// The Luby sequence 1,1,2,1,1,2,4,... at index `i`.
fn luby(i: u32) -> u64 {
    let mut x = u64::from(i);
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}

fn external(cnf: &Cnf, cmd: &str, timeout: Duration) -> Result<SatResult, SatError> {
    let mut parts = cmd.split_whitespace();
    let program = parts.next().ok_or_else(|| SatError::External("empty solver command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SatError::External(format!("cannot start `{program}`: {e}")))?;
    let input = emit_dimacs(cnf);
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = std::thread::spawn(move || {
        // a solver may exit before reading everything
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + timeout;
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() > deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(SatError::Timeout(timeout));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(2)),
            Err(e) => return Err(SatError::External(e.to_string())),
        }
    };
    let _ = writer.join();
    let output = reader.join().map_err(|_| SatError::External("reader thread panicked".into()))?;
    let result = parse_solver_output(&output, status.code(), cnf.num_vars())?;
    if let SatResult::Sat(model) = &result {
        if !cnf.satisfied_by(model) {
            return Err(SatError::External("reported model does not satisfy the formula".into()));
        }
    }
    Ok(result)
}

/// Interprets a solver's stdout (`s` and `v` lines) and exit code.
pub fn parse_solver_output(output: &str, code: Option<i32>, num_vars: usize) -> Result<SatResult, SatError> {
    let mut verdict = match code {
        Some(10) => Some(true),
        Some(20) => Some(false),
        _ => None,
    };
    let mut model = vec![false; num_vars + 1];
    let mut saw_values = false;
    for line in output.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            verdict = match rest.trim() {
                "SATISFIABLE" => Some(true),
                "UNSATISFIABLE" => Some(false),
                other => return Err(SatError::External(format!("solver answered `{other}`"))),
            };
        } else if let Some(rest) = line.strip_prefix('v') {
            saw_values = true;
            for tok in rest.split_whitespace() {
                let l: i64 = tok
                    .parse()
                    .map_err(|_| SatError::External(format!("bad model literal `{tok}`")))?;
                let v = l.unsigned_abs() as usize;
                if v > num_vars {
                    return Err(SatError::External(format!("model literal {l} out of range")));
                }
                if v > 0 {
                    model[v] = l > 0;
                }
            }
        }
    }
    match verdict {
        Some(true) if saw_values => Ok(SatResult::Sat(model)),
        Some(true) => Err(SatError::External("satisfiable but no model printed".into())),
        Some(false) => Ok(SatResult::Unsat),
        None => Err(SatError::External(format!("no verdict (exit code {code:?})"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cnf(n: usize, clauses: &[&[i32]]) -> Cnf {
        let mut c = Cnf::new(n);
        for cl in clauses {
            c.add_clause(cl.iter().copied());
        }
        c
    }

    fn builtin(c: &Cnf) -> SatResult {
        sat_solve(c, &SatConfig::default()).unwrap()
    }

    #[test]
    fn trivial_cases() {
        assert_eq!(builtin(&cnf(1, &[&[1], &[-1]])), SatResult::Unsat);
        match builtin(&cnf(2, &[&[1, 2], &[-1]])) {
            SatResult::Sat(m) => assert!(m[2] && !m[1]),
            SatResult::Unsat => panic!("satisfiable"),
        }
        assert_eq!(builtin(&cnf(0, &[&[]])), SatResult::Unsat);
        assert!(builtin(&Cnf::new(3)).is_sat());
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<u64> = (0..15).map(luby).collect();
        assert_eq!(seq, vec![1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]);
    }

    fn brute_force(c: &Cnf) -> bool {
        let n = c.num_vars();
        (0u32..1 << n).any(|bits| {
            let model: Vec<bool> = (0..=n).map(|v| v > 0 && bits & (1 << (v - 1)) != 0).collect();
            c.satisfied_by(&model)
        })
    }

    #[test]
    fn random_3cnf_matches_truth_table() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = rng.gen_range(3..=12);
            let m = rng.gen_range(1..=6 * n);
            let mut c = Cnf::new(n);
            for _ in 0..m {
                let cl: Vec<i32> = (0..3)
                    .map(|_| {
                        let v = rng.gen_range(1..=n as i32);
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                    .collect();
                c.add_clause(cl);
            }
            c.set_num_vars(n);
            let got = builtin(&c);
            assert_eq!(got.is_sat(), brute_force(&c));
            if let SatResult::Sat(model) = got {
                assert!(c.satisfied_by(&model));
            }
        }
    }

    #[test]
    fn pigeonhole_is_unsat() {
        // 5 pigeons, 4 holes
        let (p, h) = (5, 4);
        let var = |i: usize, j: usize| (i * h + j + 1) as i32;
        let mut c = Cnf::new(p * h);
        for i in 0..p {
            c.add_clause((0..h).map(|j| var(i, j)));
        }
        for j in 0..h {
            for a in 0..p {
                for b in a + 1..p {
                    c.add_clause([-var(a, j), -var(b, j)]);
                }
            }
        }
        assert_eq!(builtin(&c), SatResult::Unsat);
    }

    #[test]
    fn solver_output_parsing() {
        let r = parse_solver_output("c x\ns SATISFIABLE\nv 1 -2\nv 3 0\n", Some(10), 3).unwrap();
        assert_eq!(r, SatResult::Sat(vec![false, true, false, true]));
        assert_eq!(parse_solver_output("", Some(20), 3).unwrap(), SatResult::Unsat);
        assert!(parse_solver_output("s SATISFIABLE\n", Some(10), 3).is_err());
        assert!(parse_solver_output("", Some(1), 3).is_err());
        assert!(parse_solver_output("s SATISFIABLE\nv 9 0\n", None, 3).is_err());
    }

    #[test]
    fn missing_external_solver_is_an_error() {
        let cfg = SatConfig {
            solver: SolverKind::External("/nonexistent/solver-binary".into()),
            timeout: Duration::from_secs(5),
        };
        assert!(matches!(sat_solve(&cnf(1, &[&[1]]), &cfg), Err(SatError::External(_))));
    }
}
