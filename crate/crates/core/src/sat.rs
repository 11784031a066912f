//! An incremental CDCL SAT solver.
//!
//! Two-literal watching with blocker literals, first-UIP learning with basic
//! clause minimization, VSIDS branching and optional Luby restarts.
//! Assumptions are decided first, one per decision level, so the clause
//! database and the learned clauses survive between calls. Unassigned
//! decision variables are set to false.
//!
//! Every satisfying model is re-checked against all added clauses and the
//! assumptions before it is returned; a failed re-check panics.

use std::time::{Duration, Instant};

use serde::Serialize;

use crate::formula::{Assignment, Clause, CnfFormula, Lit, Var};

/// Which resource budget ran out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceLimit {
    Conflicts,
    WallTime,
    Iterations,
}

impl std::fmt::Display for ResourceLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResourceLimit::Conflicts => "conflict budget",
            ResourceLimit::WallTime => "wall-time budget",
            ResourceLimit::Iterations => "iteration cap",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("resource limit reached: {0}")]
pub struct ResourceOut(pub ResourceLimit);

/// Budgets for one oracle session. Conflicts are counted over the lifetime of
/// the oracle; the wall-time budget starts when the oracle is created.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Limits {
    pub max_conflicts: Option<u64>,
    pub time_budget: Option<Duration>,
}

impl Limits {
    pub fn none() -> Limits {
        Limits::default()
    }

    pub fn conflicts(n: u64) -> Limits {
        Limits {
            max_conflicts: Some(n),
            ..Limits::default()
        }
    }

    pub fn time(budget: Duration) -> Limits {
        Limits {
            time_budget: Some(budget),
            ..Limits::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SatStats {
    pub total_calls: u64,
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned_deleted: u64,
}

impl std::ops::Add for SatStats {
    type Output = SatStats;

    fn add(self, o: SatStats) -> SatStats {
        SatStats {
            total_calls: self.total_calls + o.total_calls,
            conflicts: self.conflicts + o.conflicts,
            decisions: self.decisions + o.decisions,
            propagations: self.propagations + o.propagations,
            restarts: self.restarts + o.restarts,
            learned_deleted: self.learned_deleted + o.learned_deleted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// A model over every solver variable, extending the assumptions.
    Sat(Assignment),
    Unsat,
    ResourceOut(ResourceLimit),
}

impl SatOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SatOutcome::Unsat)
    }

    pub fn model(&self) -> Option<&Assignment> {
        match self {
            SatOutcome::Sat(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub restarts: bool,
    pub learned_deletion: bool,
    /// Base interval of the Luby restart sequence, in conflicts.
    pub restart_base: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: false,
            learned_deletion: true,
            restart_base: 100,
        }
    }
}

// Internal literal code: 2 * var_index + (1 if negative).
type ILit = u32;
type CRef = u32;

const UNDEF: u8 = 2;

fn ilit(lit: Lit) -> ILit {
    (lit.var().index() as u32) << 1 | (!lit.is_positive()) as u32
}

fn ivar(l: ILit) -> usize {
    (l >> 1) as usize
}

fn ext_lit(l: ILit) -> Lit {
    Var::from_index(ivar(l)).lit(l & 1 == 0)
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: CRef,
    blocker: ILit,
}

#[derive(Debug)]
struct ClauseData {
    // Literals live in `SatOracle::arena[start..start + len]`.
    start: u32,
    len: u32,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

/// Binary max-heap of variables keyed by activity, ties broken toward the
/// smaller variable index.
#[derive(Debug, Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn better(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn grow(&mut self, n: usize) {
        if self.pos.len() < n {
            self.pos.resize(n, None);
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.pos[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap.swap_remove(0);
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.pos[self.heap[0]] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::better(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let left = 2 * i + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let child = if right < n && Self::better(act, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            if !Self::better(act, self.heap[child], v) {
                break;
            }
            self.heap[i] = self.heap[child];
            self.pos[self.heap[i]] = Some(i);
            i = child;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

fn luby(y: f64, mut x: u64) -> f64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    y.powi(seq as i32)
}

/// An incremental SAT oracle. Single-threaded; distinct instances are
/// independent.
#[derive(Debug)]
pub struct SatOracle {
    config: SolverConfig,
    limits: Limits,
    deadline: Option<Instant>,
    stats: SatStats,

    // Clauses exactly as added, for dumps, and flattened for model re-checks.
    database: Vec<Clause>,
    db_lits: Vec<ILit>,
    db_ends: Vec<usize>,
    // Per clause, the literal that satisfied the last model. Empty clauses
    // make the oracle unsatisfiable, so they are never consulted.
    db_hint: Vec<ILit>,

    clauses: Vec<ClauseData>,
    arena: Vec<ILit>,
    learnts: Vec<CRef>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<u8>,
    level: Vec<u32>,
    reason: Vec<Option<CRef>>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    seen: Vec<bool>,
    ok: bool,
    max_learnts: f64,
    core: Vec<Lit>,
}

impl Default for SatOracle {
    fn default() -> Self {
        SatOracle::new()
    }
}

impl SatOracle {
    pub fn new() -> SatOracle {
        SatOracle::with_config(SolverConfig::default(), Limits::none())
    }

    pub fn with_limits(limits: Limits) -> SatOracle {
        SatOracle::with_config(SolverConfig::default(), limits)
    }

    pub fn with_config(config: SolverConfig, limits: Limits) -> SatOracle {
        SatOracle {
            config,
            limits,
            deadline: limits.time_budget.map(|b| Instant::now() + b),
            stats: SatStats::default(),
            database: Vec::new(),
            db_lits: Vec::new(),
            db_ends: Vec::new(),
            db_hint: Vec::new(),
            clauses: Vec::new(),
            arena: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::default(),
            seen: Vec::new(),
            ok: true,
            max_learnts: 2000.0,
            core: Vec::new(),
        }
    }

    pub fn from_formula(f: &CnfFormula, limits: Limits) -> SatOracle {
        let mut oracle = SatOracle::with_limits(limits);
        oracle.reserve_vars(f.num_vars());
        for c in f.clauses() {
            oracle.add_clause(c);
        }
        oracle
    }

    pub fn stats(&self) -> SatStats {
        self.stats
    }

    pub fn num_vars(&self) -> u32 {
        self.assigns.len() as u32
    }

    /// Replaces the conflict budget, still counted from the oracle's creation.
    pub fn set_conflict_limit(&mut self, max: Option<u64>) {
        self.limits.max_conflicts = max;
    }

    pub fn deadline(&self) -> Option<Instant> {
        self.deadline
    }

    /// Lets several oracles share one wall-clock budget.
    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    /// Clauses added so far, as a formula over all solver variables.
    pub fn database(&self) -> CnfFormula {
        let mut f = CnfFormula::from_clauses(self.database.clone());
        f.extend_num_vars(self.num_vars());
        f
    }

    /// After an `Unsat` answer: a subset of the assumptions that is already
    /// contradictory together with the database. Empty when the database is
    /// unsatisfiable on its own.
    pub fn failed_assumptions(&self) -> &[Lit] {
        &self.core
    }

    /// Makes sure variables `1..=n` exist.
    pub fn reserve_vars(&mut self, n: u32) {
        let n = n as usize;
        while self.assigns.len() < n {
            let v = self.assigns.len();
            self.assigns.push(UNDEF);
            self.level.push(0);
            self.reason.push(None);
            self.activity.push(0.0);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
            self.order.grow(v + 1);
            self.order.insert(v, &self.activity);
        }
    }

    /// A fresh variable not mentioned by any clause so far.
    pub fn new_var(&mut self) -> Var {
        self.reserve_vars(self.num_vars() + 1);
        Var::from_index(self.assigns.len() - 1)
    }

    pub fn add_clause(&mut self, c: &Clause) {
        self.database.push(c.clone());
        self.db_lits.extend(c.lits().iter().map(|&l| ilit(l)));
        self.db_ends.push(self.db_lits.len());
        self.db_hint.push(c.lits().first().map_or(0, |&l| ilit(l)));
        self.reserve_vars(c.max_var());
        if !self.ok {
            return;
        }
        debug_assert!(self.trail_lim.is_empty());
        let mut lits: Vec<ILit> = Vec::with_capacity(c.len());
        for &lit in c.lits() {
            let l = ilit(lit);
            match self.value(l) {
                1 => return,
                0 => {}
                _ => lits.push(l),
            }
        }
        match lits.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(lits[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(lits, false);
            }
        }
    }

    pub fn add_formula(&mut self, f: &CnfFormula) {
        self.reserve_vars(f.num_vars());
        for c in f.clauses() {
            self.add_clause(c);
        }
    }

    /// Solves under the assumptions given as a partial assignment.
    pub fn solve(&mut self, assumptions: &Assignment) -> SatOutcome {
        self.solve_lits(&assumptions.to_lits())
    }

    /// Solves under assumption literals, decided in the given order.
    pub fn solve_lits(&mut self, assumptions: &[Lit]) -> SatOutcome {
        self.stats.total_calls += 1;
        self.core.clear();
        if let Some(max) = assumptions.iter().map(|l| l.var().id()).max() {
            self.reserve_vars(max);
        }
        if !self.ok {
            return SatOutcome::Unsat;
        }
        if let Some(limit) = self.exhausted() {
            return SatOutcome::ResourceOut(limit);
        }
        let assumptions: Vec<ILit> = assumptions.iter().map(|&l| ilit(l)).collect();
        let outcome = self.search(&assumptions);
        self.cancel_until(0);
        outcome
    }

    fn exhausted(&self) -> Option<ResourceLimit> {
        if let Some(max) = self.limits.max_conflicts {
            if self.stats.conflicts >= max {
                return Some(ResourceLimit::Conflicts);
            }
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                return Some(ResourceLimit::WallTime);
            }
        }
        None
    }

    /// 1 when `l` is true, 0 when false, 2 or 3 when unassigned.
    fn value(&self, l: ILit) -> u8 {
        self.assigns[ivar(l)] ^ (l & 1) as u8
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: ILit, reason: Option<CRef>) {
        let v = ivar(l);
        debug_assert_eq!(self.assigns[v], UNDEF);
        self.assigns[v] = ((l & 1) ^ 1) as u8;
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool) -> CRef {
        let cref = self.clauses.len() as CRef;
        self.watches[lits[0] as usize].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1] as usize].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(ClauseData {
            start: self.arena.len() as u32,
            len: lits.len() as u32,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        self.arena.extend_from_slice(&lits);
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let start = self.trail_lim[level];
        for i in (start..self.trail.len()).rev() {
            let v = ivar(self.trail[i]);
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(start);
        self.trail_lim.truncate(level);
        self.qhead = start;
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<CRef> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref;
                let (start, len) = {
                    let c = &self.clauses[cref as usize];
                    (c.start as usize, c.len as usize)
                };
                let first = {
                    let lits = &mut self.arena[start..start + len];
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                    lits[0]
                };
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = Watcher {
                        cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let mut moved = false;
                for k in 2..len {
                    let candidate = self.arena[start + k];
                    if self.value(candidate) != 0 {
                        self.arena.swap(start + 1, start + k);
                        self.watches[candidate as usize].push(Watcher {
                            cref,
                            blocker: first,
                        });
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = Watcher {
                    cref,
                    blocker: first,
                };
                j += 1;
                if self.value(first) == 0 {
                    conflict = Some(cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
            if conflict.is_some() {
                break;
            }
        }
        conflict
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in self.activity.iter_mut() {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: CRef) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learnts {
                self.clauses[r as usize].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: CRef) -> (Vec<ILit>, usize) {
        let mut learnt: Vec<ILit> = vec![0];
        let mut path = 0usize;
        let mut p: Option<ILit> = None;
        let mut index = self.trail.len();
        let current = self.decision_level() as u32;

        loop {
            self.bump_clause(confl);
            let skip = usize::from(p.is_some());
            let (start, len) = self.span(confl);
            for k in skip..len {
                let q = self.arena[start + k];
                let v = ivar(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[ivar(self.trail[index])] {
                    break;
                }
            }
            let lit = self.trail[index];
            p = Some(lit);
            self.seen[ivar(lit)] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[ivar(lit)].expect("non-decision literal has a reason");
        }
        learnt[0] = p.unwrap() ^ 1;

        // Drop literals implied by other literals of the clause.
        let analyzed: Vec<ILit> = learnt.clone();
        let mut kept = 1;
        for i in 1..learnt.len() {
            let v = ivar(learnt[i]);
            let redundant = match self.reason[v] {
                None => false,
                Some(r) => self.lits(r)[1..].iter().all(|&q| {
                    let u = ivar(q);
                    self.seen[u] || self.level[u] == 0
                }),
            };
            if !redundant {
                learnt[kept] = learnt[i];
                kept += 1;
            }
        }
        learnt.truncate(kept);
        for l in analyzed {
            self.seen[ivar(l)] = false;
        }

        let mut bt = 0;
        if learnt.len() > 1 {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[ivar(learnt[i])] > self.level[ivar(learnt[max_i])] {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            bt = self.level[ivar(learnt[1])] as usize;
        }
        (learnt, bt)
    }

    /// Collects the assumptions responsible for `failed` (an assumption found
    /// false) into `self.core`.
    fn analyze_final(&mut self, failed: ILit) {
        self.core.clear();
        self.core.push(ext_lit(failed));
        if self.decision_level() == 0 {
            return;
        }
        self.seen[ivar(failed)] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = ivar(l);
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => self.core.push(ext_lit(l)),
                Some(r) => {
                    let (start, len) = self.span(r);
                    for k in 1..len {
                        let u = ivar(self.arena[start + k]);
                        if self.level[u] > 0 {
                            self.seen[u] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[ivar(failed)] = false;
    }

    fn span(&self, cref: CRef) -> (usize, usize) {
        let c = &self.clauses[cref as usize];
        (c.start as usize, c.len as usize)
    }

    fn lits(&self, cref: CRef) -> &[ILit] {
        let (start, len) = self.span(cref);
        &self.arena[start..start + len]
    }

    fn locked(&self, cref: CRef) -> bool {
        let first = self.lits(cref)[0];
        self.value(first) == 1 && self.reason[ivar(first)] == Some(cref)
    }

    /// Deletes the less active half of the long learned clauses.
    fn reduce_db(&mut self) {
        let mut candidates: Vec<CRef> = self
            .learnts
            .iter()
            .copied()
            .filter(|&r| self.clauses[r as usize].len > 2 && !self.locked(r))
            .collect();
        candidates.sort_by(|&a, &b| {
            self.clauses[a as usize]
                .activity
                .total_cmp(&self.clauses[b as usize].activity)
                .then(a.cmp(&b))
        });
        let remove = candidates.len() / 2;
        if remove == 0 {
            return;
        }
        for &r in &candidates[..remove] {
            self.clauses[r as usize].deleted = true;
        }
        let mut arena = Vec::with_capacity(self.arena.len());
        for c in self.clauses.iter_mut() {
            if c.deleted {
                c.len = 0;
            }
            let start = c.start as usize;
            c.start = arena.len() as u32;
            arena.extend_from_slice(&self.arena[start..start + c.len as usize]);
        }
        self.arena = arena;
        self.stats.learned_deleted += remove as u64;
        let clauses = &self.clauses;
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
        self.learnts.retain(|&r| !clauses[r as usize].deleted);
    }

    fn search(&mut self, assumptions: &[ILit]) -> SatOutcome {
        let mut restart_index = 0u64;
        let mut restart_at = self.next_restart(restart_index);
        let mut since_restart = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatOutcome::Unsat;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if let Some(limit) = self.exhausted() {
                    return SatOutcome::ResourceOut(limit);
                }
                if since_restart >= restart_at {
                    self.stats.restarts += 1;
                    restart_index += 1;
                    restart_at = self.next_restart(restart_index);
                    since_restart = 0;
                    self.cancel_until(0);
                }
                continue;
            }

            if self.config.learned_deletion
                && self.learnts.len() as f64 >= self.max_learnts + self.trail.len() as f64
            {
                self.reduce_db();
                self.max_learnts *= 1.1;
            }

            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value(a) {
                    1 => self.trail_lim.push(self.trail.len()),
                    0 => {
                        self.analyze_final(a ^ 1);
                        // Report the assumption itself, not its negation.
                        self.core[0] = ext_lit(a);
                        return SatOutcome::Unsat;
                    }
                    _ => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next {
                Some(a) => a,
                None => loop {
                    match self.order.pop(&self.activity) {
                        None => {
                            self.check_model(assumptions);
                            return SatOutcome::Sat(self.extract_model());
                        }
                        Some(v) if self.assigns[v] == UNDEF => {
                            self.stats.decisions += 1;
                            break (v as u32) << 1 | 1;
                        }
                        Some(_) => {}
                    }
                },
            };
            self.trail_lim.push(self.trail.len());
            self.enqueue(next, None);
        }
    }

    fn next_restart(&self, index: u64) -> u64 {
        if self.config.restarts {
            (luby(2.0, index) * self.config.restart_base as f64) as u64
        } else {
            u64::MAX
        }
    }

    fn extract_model(&self) -> Assignment {
        self.assigns
            .iter()
            .enumerate()
            .map(|(v, &a)| (Var::from_index(v), a == 1))
            .collect()
    }

    /// Re-evaluates the database and the assumptions under the full
    /// assignment on the trail.
    fn check_model(&mut self, assumptions: &[ILit]) {
        let assigns = &self.assigns;
        let holds = |l: ILit| assigns[ivar(l)] ^ (l & 1) as u8 == 1;
        for (i, hint) in self.db_hint.iter_mut().enumerate() {
            if holds(*hint) {
                continue;
            }
            let start = if i == 0 { 0 } else { self.db_ends[i - 1] };
            match self.db_lits[start..self.db_ends[i]]
                .iter()
                .find(|&&l| holds(l))
            {
                Some(&l) => *hint = l,
                None => panic!(
                    "internal error: SAT model falsifies clause {}",
                    self.database[i]
                ),
            }
        }
        for &a in assumptions {
            assert!(
                holds(a),
                "internal error: SAT model violates assumption {}",
                ext_lit(a)
            );
        }
    }
}

/// One-shot satisfiability of `f` on a fresh oracle.
pub fn solve_formula(f: &CnfFormula, limits: Limits) -> SatOutcome {
    SatOracle::from_formula(f, limits).solve(&Assignment::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cnf(clauses: &[&[i32]]) -> CnfFormula {
        CnfFormula::from_dimacs(clauses).unwrap()
    }

    fn clause(lits: &[i32]) -> Clause {
        Clause::from_dimacs(lits).unwrap()
    }

    fn small_example() -> CnfFormula {
        cnf(&[&[-3, 4], &[1, 3], &[1, -4], &[2, 4]])
    }

    #[test]
    fn unit_against_assumption() {
        let mut o = SatOracle::from_formula(&cnf(&[&[1]]), Limits::none());
        assert!(o.solve(&Assignment::from_pairs([(1, false)])).is_unsat());
        assert_eq!(o.failed_assumptions(), &[Var::new(1).unwrap().negative()]);
    }

    #[test]
    fn binary_clause_is_sat() {
        let mut o = SatOracle::from_formula(&cnf(&[&[1, 2]]), Limits::none());
        let out = o.solve(&Assignment::new());
        let model = out.model().unwrap();
        assert!(clause(&[1, 2]).is_satisfied_by(model));
    }

    #[test]
    fn small_example_under_removable_y() {
        let mut o = SatOracle::from_formula(&small_example(), Limits::none());
        assert!(o
            .solve(&Assignment::from_pairs([(1, false), (2, true)]))
            .is_unsat());
        assert!(o
            .solve(&Assignment::from_pairs([(1, true), (2, true)]))
            .is_sat());
    }

    #[test]
    fn added_clause_constrains_later_solves() {
        let mut o = SatOracle::new();
        o.add_clause(&clause(&[-1]));
        assert!(o.solve(&Assignment::from_pairs([(1, true)])).is_unsat());
        assert!(o.solve(&Assignment::new()).is_sat());

        let mut o = SatOracle::from_formula(&small_example(), Limits::none());
        o.add_clause(&clause(&[1, -2]));
        assert!(o
            .solve(&Assignment::from_pairs([(1, false), (2, true)]))
            .is_unsat());
    }

    #[test]
    fn empty_clause_poisons_database() {
        let mut o = SatOracle::from_formula(&cnf(&[&[1, 2]]), Limits::none());
        o.add_clause(&Clause::empty());
        assert!(o.solve(&Assignment::new()).is_unsat());
        assert!(o.failed_assumptions().is_empty());
        assert!(solve_formula(&cnf(&[&[]]), Limits::none()).is_unsat());
    }

    #[test]
    fn pigeonhole_three_into_two() {
        // p(i,j): pigeon i in hole j, var = 2*i + j + 1.
        let p = |i: i32, j: i32| 2 * i + j + 1;
        let mut clauses: Vec<Vec<i32>> = (0..3).map(|i| vec![p(i, 0), p(i, 1)]).collect();
        for j in 0..2 {
            for a in 0..3 {
                for b in a + 1..3 {
                    clauses.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
        let mut o = SatOracle::from_formula(&cnf(&refs), Limits::none());
        assert!(o.solve(&Assignment::new()).is_unsat());
        assert!(o.stats().conflicts > 0);
    }

    #[test]
    fn conflict_budget_trips() {
        let p = |i: i32, j: i32| 4 * i + j + 1;
        let mut clauses: Vec<Vec<i32>> =
            (0..5).map(|i| (0..4).map(|j| p(i, j)).collect()).collect();
        for j in 0..4 {
            for a in 0..5 {
                for b in a + 1..5 {
                    clauses.push(vec![-p(a, j), -p(b, j)]);
                }
            }
        }
        let refs: Vec<&[i32]> = clauses.iter().map(|c| c.as_slice()).collect();
        let mut o = SatOracle::from_formula(&cnf(&refs), Limits::conflicts(3));
        assert_eq!(
            o.solve(&Assignment::new()),
            SatOutcome::ResourceOut(ResourceLimit::Conflicts)
        );
    }

    #[test]
    fn zero_time_budget_is_resource_out() {
        let mut o = SatOracle::from_formula(&cnf(&[&[1, 2]]), Limits::time(Duration::ZERO));
        assert_eq!(
            o.solve(&Assignment::new()),
            SatOutcome::ResourceOut(ResourceLimit::WallTime)
        );
    }

    #[test]
    fn call_counter_counts_every_solve() {
        let mut o = SatOracle::from_formula(&small_example(), Limits::none());
        for _ in 0..5 {
            o.solve(&Assignment::new());
        }
        assert_eq!(o.stats().total_calls, 5);
    }

    #[test]
    fn failed_assumptions_are_a_core() {
        // x1 -> x2, x2 -> x3; assuming x1, !x3 and an irrelevant x4.
        let mut o = SatOracle::from_formula(&cnf(&[&[-1, 2], &[-2, 3], &[4, 5]]), Limits::none());
        let a = |d: i32| Lit::from_dimacs(d).unwrap();
        assert!(o.solve_lits(&[a(4), a(1), a(-3)]).is_unsat());
        let mut core: Vec<i32> = o
            .failed_assumptions()
            .iter()
            .map(|l| l.to_dimacs())
            .collect();
        core.sort();
        assert_eq!(core, vec![-3, 1]);
    }

    #[test]
    fn luby_prefix() {
        let seq: Vec<f64> = (0..7).map(|i| luby(2.0, i)).collect();
        assert_eq!(seq, vec![1.0, 1.0, 2.0, 1.0, 1.0, 2.0, 4.0]);
    }

    #[test]
    fn restarts_do_not_change_answers() {
        let config = SolverConfig {
            restarts: true,
            restart_base: 1,
            ..SolverConfig::default()
        };
        let mut o = SatOracle::with_config(config, Limits::none());
        o.add_formula(&small_example());
        assert!(o
            .solve(&Assignment::from_pairs([(1, false), (2, true)]))
            .is_unsat());
        assert!(o.solve(&Assignment::from_pairs([(1, true)])).is_sat());
    }
}
