//! Finite-domain satisfiability for path conditions.
//!
//! Conjuncts are split into groups with disjoint symbols. Each group is
//! searched by backtracking over symbols in first-occurrence order, values
//! ascending, with unit propagation on `symbol op constant` conjuncts and
//! three-valued partial evaluation to prune as soon as a conjunct is
//! decided false.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::model::{BinOp, UnOp, Value};
use crate::sym::{eval_under, simplify, Assignment, SymExpr, Symbol, SymbolId};

pub const DEFAULT_BUDGET: Duration = Duration::from_millis(100);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
    Timeout,
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverStats {
    pub queries: u64,
    pub timeouts: u64,
    pub max_query_micros: u64,
}

impl SolverStats {
    pub fn merge(&mut self, other: &SolverStats) {
        self.queries += other.queries;
        self.timeouts += other.timeouts;
        self.max_query_micros = self.max_query_micros.max(other.max_query_micros);
    }
}

/// A solver with a per-query budget that accumulates statistics.
#[derive(Debug, Clone)]
pub struct Solver {
    pub budget: Duration,
    pub stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(DEFAULT_BUDGET)
    }
}

impl Solver {
    pub fn new(budget: Duration) -> Self {
        Solver {
            budget,
            stats: SolverStats::default(),
        }
    }

    pub fn solve(&mut self, pc: &[SymExpr]) -> SolveResult {
        let start = Instant::now();
        let r = solve(pc, self.budget);
        let micros = start.elapsed().as_micros().min(u64::MAX as u128) as u64;
        self.stats.queries += 1;
        self.stats.max_query_micros = self.stats.max_query_micros.max(micros);
        if r == SolveResult::Timeout {
            self.stats.timeouts += 1;
        }
        r
    }
}

type N = usize;

enum Node {
    Sym(usize),
    Const(i64),
    Not(N),
    Neg(N),
    Bin(BinOp, N, N),
    Ite(N, N, N),
    Select(Vec<N>, N),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pv {
    Known(i64),
    Unknown,
    /// Out-of-range array index.
    Bad,
}

struct Domain {
    lo: i64,
    hi: i64,
    excluded: BTreeSet<i64>,
}

impl Domain {
    fn is_empty(&self) -> bool {
        if self.lo > self.hi {
            return true;
        }
        let size = (self.hi as i128 - self.lo as i128 + 1) as u128;
        let holes = self.excluded.range(self.lo..=self.hi).count() as u128;
        holes >= size
    }

    fn restrict(&mut self, op: BinOp, c: i64) {
        match op {
            BinOp::Eq => {
                self.lo = self.lo.max(c);
                self.hi = self.hi.min(c);
            }
            BinOp::Ne => {
                self.excluded.insert(c);
            }
            BinOp::Lt => self.hi = self.hi.min(c.saturating_sub(1)),
            BinOp::Le => self.hi = self.hi.min(c),
            BinOp::Gt => self.lo = self.lo.max(c.saturating_add(1)),
            BinOp::Ge => self.lo = self.lo.max(c),
            _ => {}
        }
    }
}

struct Problem {
    nodes: Vec<Node>,
    roots: Vec<N>,
    syms: Vec<Arc<Symbol>>,
    domains: Vec<Domain>,
    /// Conjuncts mentioning each symbol.
    watch: Vec<Vec<usize>>,
}

fn flatten(e: SymExpr, out: &mut Vec<SymExpr>) {
    match e {
        SymExpr::Binary(BinOp::And, a, b) => {
            flatten((*a).clone(), out);
            flatten((*b).clone(), out);
        }
        e => out.push(e),
    }
}

fn code(v: &Value) -> i64 {
    v.code().expect("scalar constant")
}

impl Problem {
    fn new(conjuncts: &[SymExpr]) -> Problem {
        let mut p = Problem {
            nodes: Vec::new(),
            roots: Vec::new(),
            syms: Vec::new(),
            domains: Vec::new(),
            watch: Vec::new(),
        };
        for c in conjuncts {
            c.collect_symbols(&mut p.syms);
        }
        for s in &p.syms {
            let (lo, hi) = s.ty.code_range().expect("scalar symbol");
            p.domains.push(Domain {
                lo,
                hi,
                excluded: BTreeSet::new(),
            });
        }
        p.watch = vec![Vec::new(); p.syms.len()];
        for (k, c) in conjuncts.iter().enumerate() {
            let root = p.compile(c);
            p.roots.push(root);
            for s in c.symbols() {
                let i = p.sym_index(&s);
                p.watch[i].push(k);
            }
            p.propagate(c, false);
        }
        p
    }

    fn sym_index(&self, s: &Symbol) -> usize {
        self.syms.iter().position(|x| x.id == s.id).unwrap()
    }

    fn push(&mut self, n: Node) -> N {
        self.nodes.push(n);
        self.nodes.len() - 1
    }

    fn compile(&mut self, e: &SymExpr) -> N {
        let node = match e {
            SymExpr::Sym(s) => Node::Sym(self.sym_index(s)),
            SymExpr::Const(v) => Node::Const(code(v)),
            SymExpr::Unary(UnOp::Not, x) => Node::Not(self.compile(x)),
            SymExpr::Unary(UnOp::Neg, x) => Node::Neg(self.compile(x)),
            SymExpr::Binary(op, a, b) => {
                let (a, b) = (self.compile(a), self.compile(b));
                Node::Bin(*op, a, b)
            }
            SymExpr::Ite(c, t, f) => {
                let (c, t, f) = (self.compile(c), self.compile(t), self.compile(f));
                Node::Ite(c, t, f)
            }
            SymExpr::Select(elems, i) => {
                let elems = elems.iter().map(|x| self.compile(x)).collect();
                Node::Select(elems, self.compile(i))
            }
        };
        self.push(node)
    }

    /// Narrows domains from a conjunct of the form `sym op const`, `sym`,
    /// `!sym` or their negations.
    fn propagate(&mut self, e: &SymExpr, negated: bool) {
        match e {
            SymExpr::Sym(s) => {
                let i = self.sym_index(s);
                self.domains[i].restrict(BinOp::Eq, if negated { 0 } else { 1 });
            }
            SymExpr::Unary(UnOp::Not, x) => self.propagate(x, !negated),
            SymExpr::Binary(op, a, b) if op.is_comparison() => {
                let (s, c, op) = match (&**a, &**b) {
                    (SymExpr::Sym(s), SymExpr::Const(c)) => (s, code(c), *op),
                    (SymExpr::Const(c), SymExpr::Sym(s)) => (s, code(c), mirror(*op)),
                    _ => return,
                };
                let op = if negated { negate(op) } else { op };
                let i = self.sym_index(s);
                self.domains[i].restrict(op, c);
            }
            _ => {}
        }
    }

    fn eval(&self, n: N, vals: &[Option<i64>]) -> Pv {
        use Pv::*;
        match &self.nodes[n] {
            Node::Sym(i) => vals[*i].map_or(Unknown, Known),
            Node::Const(c) => Known(*c),
            Node::Not(x) => match self.eval(*x, vals) {
                Known(v) => Known((v == 0) as i64),
                o => o,
            },
            Node::Neg(x) => match self.eval(*x, vals) {
                Known(v) => Known(-v),
                o => o,
            },
            Node::Bin(op, a, b) => {
                let x = self.eval(*a, vals);
                if x == Bad {
                    return Bad;
                }
                match (op, x) {
                    (BinOp::And, Known(0)) => return Known(0),
                    (BinOp::Or, Known(v)) if v != 0 => return Known(1),
                    (BinOp::Mul, Known(0)) => return Known(0),
                    _ => {}
                }
                let y = self.eval(*b, vals);
                match (op, x, y) {
                    (_, _, Bad) => Bad,
                    (BinOp::And, _, Known(0)) => Known(0),
                    (BinOp::Or, _, Known(v)) if v != 0 => Known(1),
                    (BinOp::Mul, _, Known(0)) => Known(0),
                    (_, Known(x), Known(y)) => Known(bin(*op, x, y)),
                    _ => Unknown,
                }
            }
            Node::Ite(c, t, f) => match self.eval(*c, vals) {
                Known(0) => self.eval(*f, vals),
                Known(_) => self.eval(*t, vals),
                Bad => Bad,
                Unknown => {
                    let (t, f) = (self.eval(*t, vals), self.eval(*f, vals));
                    if t == f {
                        t
                    } else {
                        Unknown
                    }
                }
            },
            Node::Select(elems, i) => match self.eval(*i, vals) {
                Known(k) => match usize::try_from(k).ok().and_then(|k| elems.get(k)) {
                    Some(e) => self.eval(*e, vals),
                    None => Bad,
                },
                Bad => Bad,
                Unknown => {
                    let first = self.eval(elems[0], vals);
                    if first != Unknown && elems[1..].iter().all(|e| self.eval(*e, vals) == first) {
                        first
                    } else {
                        Unknown
                    }
                }
            },
        }
    }
}

fn bin(op: BinOp, x: i64, y: i64) -> i64 {
    match op {
        BinOp::And => (x != 0 && y != 0) as i64,
        BinOp::Or => (x != 0 || y != 0) as i64,
        BinOp::Eq => (x == y) as i64,
        BinOp::Ne => (x != y) as i64,
        BinOp::Lt => (x < y) as i64,
        BinOp::Le => (x <= y) as i64,
        BinOp::Gt => (x > y) as i64,
        BinOp::Ge => (x >= y) as i64,
        BinOp::Add => x.wrapping_add(y),
        BinOp::Sub => x.wrapping_sub(y),
        BinOp::Mul => x.wrapping_mul(y),
    }
}

fn mirror(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        o => o,
    }
}

fn negate(op: BinOp) -> BinOp {
    match op {
        BinOp::Eq => BinOp::Ne,
        BinOp::Ne => BinOp::Eq,
        BinOp::Lt => BinOp::Ge,
        BinOp::Le => BinOp::Gt,
        BinOp::Gt => BinOp::Le,
        BinOp::Ge => BinOp::Lt,
        o => o,
    }
}

enum Search {
    Found,
    Exhausted,
    OutOfTime,
}

struct Searcher<'a> {
    p: &'a Problem,
    originals: &'a [SymExpr],
    vals: Vec<Option<i64>>,
    deadline: Option<Instant>,
    nodes: u64,
}

impl Searcher<'_> {
    fn consistent(&self, sym: usize) -> bool {
        self.p.watch[sym].iter().all(|&k| {
            matches!(
                self.p.eval(self.p.roots[k], &self.vals),
                Pv::Known(1) | Pv::Unknown
            )
        })
    }

    fn run(&mut self, depth: usize) -> Search {
        if depth == self.p.syms.len() {
            return if self.verify() {
                Search::Found
            } else {
                Search::Exhausted
            };
        }
        let d = &self.p.domains[depth];
        let mut v = d.lo;
        while v <= d.hi {
            if !d.excluded.contains(&v) {
                self.nodes += 1;
                if self.nodes.is_multiple_of(1024) {
                    if let Some(deadline) = self.deadline {
                        if Instant::now() >= deadline {
                            return Search::OutOfTime;
                        }
                    }
                }
                self.vals[depth] = Some(v);
                if self.consistent(depth) {
                    match self.run(depth + 1) {
                        Search::Exhausted => {}
                        other => return other,
                    }
                }
            }
            v += 1;
        }
        self.vals[depth] = None;
        Search::Exhausted
    }

    fn assignment(&self) -> Assignment {
        self.p
            .syms
            .iter()
            .zip(&self.vals)
            .map(|(s, v)| (s.id.clone(), Value::from_code(&s.ty, v.expect("complete"))))
            .collect()
    }

    fn verify(&self) -> bool {
        let a = self.assignment();
        self.originals
            .iter()
            .all(|c| eval_under(&a, c) == Ok(Value::Bool(true)))
    }
}

/// Decides the conjunction `pc`. Complete on bounded domains: `Unsat` means
/// no assignment exists. Deterministic for a given `pc`.
pub fn solve(pc: &[SymExpr], budget: Duration) -> SolveResult {
    let deadline = Instant::now().checked_add(budget);
    let mut conjuncts = Vec::new();
    for c in pc {
        flatten(simplify(c), &mut conjuncts);
    }
    if conjuncts.iter().any(|c| c.as_bool_const() == Some(false)) {
        return SolveResult::Unsat;
    }
    conjuncts.retain(|c| c.as_bool_const() != Some(true));
    let mut assignment = Assignment::new();
    for component in components(conjuncts) {
        let p = Problem::new(&component);
        if p.domains.iter().any(Domain::is_empty) {
            return SolveResult::Unsat;
        }
        let mut s = Searcher {
            p: &p,
            originals: &component,
            vals: vec![None; p.syms.len()],
            deadline,
            nodes: 0,
        };
        match s.run(0) {
            Search::Found => assignment.extend(s.assignment()),
            Search::Exhausted => return SolveResult::Unsat,
            Search::OutOfTime => return SolveResult::Timeout,
        }
    }
    debug_assert!(pc
        .iter()
        .all(|c| eval_under(&assignment, c) == Ok(Value::Bool(true))));
    SolveResult::Sat(assignment)
}

/// Groups conjuncts that share symbols, transitively. Groups are ordered by
/// their first conjunct and keep conjunct order, so each group's search
/// order is the same subsequence it would have in a single search.
fn components(conjuncts: Vec<SymExpr>) -> Vec<Vec<SymExpr>> {
    let syms: Vec<Vec<Arc<Symbol>>> = conjuncts.iter().map(SymExpr::symbols).collect();
    let mut parent: Vec<usize> = (0..conjuncts.len()).collect();
    fn find(parent: &mut [usize], mut k: usize) -> usize {
        while parent[k] != k {
            parent[k] = parent[parent[k]];
            k = parent[k];
        }
        k
    }
    let mut owner: HashMap<&SymbolId, usize> = HashMap::new();
    for (k, ss) in syms.iter().enumerate() {
        for s in ss {
            match owner.get(&s.id) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, j), find(&mut parent, k));
                    parent[a.max(b)] = a.min(b);
                }
                None => {
                    owner.insert(&s.id, k);
                }
            }
        }
    }
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut out: Vec<Vec<SymExpr>> = Vec::new();
    for (k, c) in conjuncts.into_iter().enumerate() {
        let root = find(&mut parent, k);
        let i = *slot.entry(root).or_insert_with(|| {
            out.push(Vec::new());
            out.len() - 1
        });
        out[i].push(c);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EnumDef, Ty};
    use crate::sym::Symbol;

    fn mirror_state() -> Ty {
        Ty::Enum(Arc::new(EnumDef {
            name: "MirrorState".into(),
            variants: vec!["OPEN".into(), "CLOSED".into()],
        }))
    }

    #[test]
    fn single_equality() {
        let lock = Ty::Enum(Arc::new(EnumDef {
            name: "Lock".into(),
            variants: vec!["UNLOCKED".into(), "LOCKED".into()],
        }));
        let ctrl = Symbol::new("inC.ctrl", lock, 1);
        let pc = [SymExpr::eq(
            SymExpr::sym(&ctrl),
            SymExpr::Const(Value::Enum(0)),
        )];
        match solve(&pc, DEFAULT_BUDGET) {
            SolveResult::Sat(a) => assert_eq!(a[&ctrl.id], Value::Enum(0)),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn contradiction_is_unsat() {
        let x = Symbol::new("inC.x", Ty::Int { lo: 0, hi: 9 }, 1);
        let pc = [
            SymExpr::eq(SymExpr::sym(&x), SymExpr::Const(Value::Int(5))),
            SymExpr::eq(SymExpr::sym(&x), SymExpr::Const(Value::Int(6))),
        ];
        assert_eq!(solve(&pc, DEFAULT_BUDGET), SolveResult::Unsat);
    }

    #[test]
    fn select_with_symbolic_index() {
        let m0 = Symbol::new("m[0]", mirror_state(), 1);
        let m1 = Symbol::new("m[1]", mirror_state(), 1);
        let i = Symbol::new("i", Ty::Int { lo: 0, hi: 1 }, 1);
        let pc = [
            SymExpr::eq(
                SymExpr::select(vec![SymExpr::sym(&m0), SymExpr::sym(&m1)], SymExpr::sym(&i)),
                SymExpr::Const(Value::Enum(1)),
            ),
            SymExpr::eq(SymExpr::sym(&i), SymExpr::Const(Value::Int(1))),
        ];
        match solve(&pc, DEFAULT_BUDGET) {
            SolveResult::Sat(a) => {
                assert_eq!(a[&i.id], Value::Int(1));
                assert_eq!(a[&m1.id], Value::Enum(1));
                assert_eq!(a[&m0.id], Value::Enum(0));
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn stats_merge() {
        let mut a = SolverStats {
            queries: 2,
            timeouts: 0,
            max_query_micros: 10,
        };
        a.merge(&SolverStats {
            queries: 3,
            timeouts: 1,
            max_query_micros: 4,
        });
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            r#"{"queries":5,"timeouts":1,"max_query_micros":10}"#
        );
    }
}
