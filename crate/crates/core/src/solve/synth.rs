//! Direct and counterexample-guided synthesis, and the bound schedule.

use crate::attack::{all_enable_attacker, MooreAttacker, Semantics};
use crate::encoding::{Encoder, Formula};
use crate::supervision::{check_range_control, Supervisor};

use super::bmc::{find_attacker, AttackSearch};
use super::decode::decode_supervisor;
use super::sat::{sat_solve, SatResult};
use super::{SolveError, SynthesisInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// One SAT call against the all-enable attacker.
    Direct,
    /// Candidate/counterexample alternation.
    Cegis,
}

#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    pub search: AttackSearch,
    /// Iteration limit for [`Method::Cegis`].
    pub max_iters: usize,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions {
            search: AttackSearch::default(),
            max_iters: 16,
        }
    }
}

/// Work done at one supervisor bound.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BoundStats {
    pub n: usize,
    pub sat_calls: usize,
    pub iterations: usize,
    pub vars: usize,
    pub clauses: usize,
}

#[derive(Debug, Clone)]
pub enum SynthesisOutcome {
    Found {
        supervisor: Supervisor,
        /// Counterexample attackers the supervisor was synthesized against.
        certificate: Vec<MooreAttacker>,
        n: usize,
        m: usize,
        stats: Vec<BoundStats>,
    },
    NotFoundAtBounds {
        n: usize,
        m: usize,
        stats: Vec<BoundStats>,
    },
}

impl SynthesisOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SynthesisOutcome::Found { .. })
    }

    pub fn supervisor(&self) -> Option<&Supervisor> {
        match self {
            SynthesisOutcome::Found { supervisor, .. } => Some(supervisor),
            SynthesisOutcome::NotFoundAtBounds { .. } => None,
        }
    }

    pub fn stats(&self) -> &[BoundStats] {
        match self {
            SynthesisOutcome::Found { stats, .. } | SynthesisOutcome::NotFoundAtBounds { stats, .. } => stats,
        }
    }

    pub fn sat_calls(&self) -> usize {
        self.stats().iter().map(|s| s.sat_calls).sum()
    }

    pub fn iterations(&self) -> usize {
        self.stats().iter().map(|s| s.iterations).sum()
    }
}

/// Outcome of checking a given supervisor against an instance.
#[derive(Debug, Clone)]
pub struct Verification {
    pub range_control: bool,
    pub attacker: Option<MooreAttacker>,
}

impl Verification {
    pub fn holds(&self) -> bool {
        self.range_control && self.attacker.is_none()
    }
}

/// Range control plus an explicit attacker search; the supervisor must be valid.
pub fn verify_supervisor(
    s: &Supervisor,
    inst: &SynthesisInstance,
    m: usize,
    search: &AttackSearch,
) -> Result<Verification, SolveError> {
    inst.setting().check_supervisor(s)?;
    let range_control = check_range_control(s, inst.plant(), inst.lower(), inst.upper());
    let attacker = find_attacker(s, inst, m, search)?;
    Ok(Verification { range_control, attacker })
}

fn require_risky(inst: &SynthesisInstance) -> Result<(), SolveError> {
    if inst.semantics == Semantics::Risky {
        Ok(())
    } else {
        Err(SolveError::CovertUnsupported)
    }
}

fn solve_formula(enc: &mut Encoder, f: &Formula, stats: &mut BoundStats, opts: &SynthesisOptions) -> Result<Option<Supervisor>, SolveError> {
    let cnf = enc.clausify(f);
    stats.sat_calls += 1;
    stats.vars = stats.vars.max(cnf.num_vars());
    stats.clauses = stats.clauses.max(cnf.clauses().len());
    match sat_solve(&cnf, &opts.search.sat)? {
        SatResult::Unsat => Ok(None),
        SatResult::Sat(model) => {
            let s = decode_supervisor(&model, enc.vars(), enc.n(), enc.instance().setting())?;
            Ok(Some(s))
        }
    }
}

/// One SAT call on `φ_n ∧ φ_left ∧ φ_right ∧ φ_safe[A_all]` at the
/// instance's bounds; a candidate is re-verified before it is returned.
pub fn synthesize_direct(inst: &SynthesisInstance, opts: &SynthesisOptions) -> Result<SynthesisOutcome, SolveError> {
    require_risky(inst)?;
    let (n, m) = (inst.n, inst.m);
    let mut enc = Encoder::new(inst, n, m)?;
    let a_all = all_enable_attacker(inst.setting()).padded(m);
    let safe = enc.safety_against(&a_all)?;
    let f = Formula::and([enc.outer_formula(), safe]);
    let mut stats = BoundStats {
        n,
        iterations: 1,
        ..BoundStats::default()
    };
    match solve_formula(&mut enc, &f, &mut stats, opts)? {
        None => Ok(SynthesisOutcome::NotFoundAtBounds { n, m, stats: vec![stats] }),
        Some(s) => {
            let v = verify_supervisor(&s, inst, m, &opts.search)?;
            if !v.holds() {
                return Err(SolveError::Verification(format!(
                    "candidate failed re-verification (range control: {}, attacker found: {})",
                    v.range_control,
                    v.attacker.is_some()
                )));
            }
            Ok(SynthesisOutcome::Found {
                supervisor: s,
                certificate: vec![a_all],
                n,
                m,
                stats: vec![stats],
            })
        }
    }
}

/// Alternates candidate synthesis against the counterexamples so far with
/// an attacker search on the candidate.
pub fn synthesize_cegis(inst: &SynthesisInstance, opts: &SynthesisOptions) -> Result<SynthesisOutcome, SolveError> {
    require_risky(inst)?;
    if opts.max_iters == 0 {
        return Err(SolveError::IterationLimit {
            iterations: 0,
            counterexamples: 0,
        });
    }
    let (n, m) = (inst.n, inst.m);
    let mut enc = Encoder::new(inst, n, m)?;
    let outer = enc.outer_formula();
    let mut safe_parts: Vec<Formula> = Vec::new();
    let mut counterexamples: Vec<MooreAttacker> = Vec::new();
    let mut stats = BoundStats {
        n,
        ..BoundStats::default()
    };
    for _ in 0..opts.max_iters {
        stats.iterations += 1;
        let f = Formula::and(std::iter::once(outer.clone()).chain(safe_parts.iter().cloned()));
        let Some(s) = solve_formula(&mut enc, &f, &mut stats, opts)? else {
            return Ok(SynthesisOutcome::NotFoundAtBounds { n, m, stats: vec![stats] });
        };
        if !check_range_control(&s, inst.plant(), inst.lower(), inst.upper()) {
            return Err(SolveError::Verification("candidate violates range control".into()));
        }
        match find_attacker(&s, inst, m, &opts.search)? {
            None => {
                return Ok(SynthesisOutcome::Found {
                    supervisor: s,
                    certificate: counterexamples,
                    n,
                    m,
                    stats: vec![stats],
                })
            }
            Some(a) => {
                let a = a.padded(m);
                if counterexamples.contains(&a) {
                    return Err(SolveError::Verification(
                        "candidate defeated by an attacker it was synthesized against".into(),
                    ));
                }
                safe_parts.push(enc.safety_against(&a)?);
                counterexamples.push(a);
            }
        }
    }
    Err(SolveError::IterationLimit {
        iterations: opts.max_iters,
        counterexamples: counterexamples.len(),
    })
}

/// Runs `method` for `n = inst.n ..= n_max` and stops at the first success.
pub fn bound_schedule(
    inst: &SynthesisInstance,
    n_max: usize,
    method: Method,
    opts: &SynthesisOptions,
) -> Result<SynthesisOutcome, SolveError> {
    let mut all_stats = Vec::new();
    let m = inst.m;
    let mut last_n = inst.n;
    for n in inst.n..=n_max.max(inst.n) {
        last_n = n;
        let at_n = inst.clone().with_bounds(n, m);
        let outcome = match method {
            Method::Direct => synthesize_direct(&at_n, opts)?,
            Method::Cegis => synthesize_cegis(&at_n, opts)?,
        };
        all_stats.extend(outcome.stats().iter().cloned());
        if let SynthesisOutcome::Found {
            supervisor,
            certificate,
            n,
            m,
            ..
        } = outcome
        {
            return Ok(SynthesisOutcome::Found {
                supervisor,
                certificate,
                n,
                m,
                stats: all_stats,
            });
        }
    }
    Ok(SynthesisOutcome::NotFoundAtBounds {
        n: last_n,
        m,
        stats: all_stats,
    })
}
