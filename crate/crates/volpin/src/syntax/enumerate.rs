//! Deterministic enumeration of the closed formulas of bounded complexity
//! (the "m-CF" fragment): complexity ≤ m and every term of height ≤ m, over a
//! signature extended by a finite constant set.
//!
//! Order: ascending (complexity, lexicographic print form). Bound variables
//! are named canonically by binder nesting depth (`x0`, `x1`, …), so each
//! formula appears exactly once. The final items of a large complexity level
//! are produced by a lazy ordered merge, so a small `cap` never materializes
//! the whole level; the eager tables for the preceding levels still grow
//! roughly exponentially in `m` — the practical envelope is m ≤ 4 on lean
//! signatures, which is what saturation and the demos use.

use super::{Formula, Signature, Term};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeSet};

/// Result of [`enumerate_m_cf`]: the formulas in order, plus a flag telling
/// whether the cap cut the enumeration short.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub formulas: Vec<Formula>,
    pub truncated: bool,
}

/// Picks a binder prefix whose generated names (`x0`, `x1`, …) cannot
/// collide with any declared symbol.
pub(crate) fn binder_prefix(sig: &Signature, extra: &BTreeSet<String>) -> char {
    let clashes = |p: char| {
        let matches_scheme = |n: &str| {
            n.starts_with(p) && n.len() > 1 && n[1..].bytes().all(|b| b.is_ascii_digit())
        };
        sig.predicates.iter().any(|(n, _)| matches_scheme(n))
            || sig.functions.iter().any(|(n, _)| matches_scheme(n))
            || sig.constants.iter().any(|n| matches_scheme(n))
            || extra.iter().any(|n| matches_scheme(n))
    };
    for p in ['x', 'y', 'z', 'v', 'w', 'u'] {
        if !clashes(p) {
            return p;
        }
    }
    'x'
}

/// All terms of height ≤ `max_height` over the signature's constants plus
/// `extra`, with variables drawn from the first `n_vars` binder names.
fn terms_up_to(
    sig: &Signature,
    extra: &BTreeSet<String>,
    prefix: char,
    n_vars: usize,
    max_height: usize,
) -> Vec<Term> {
    let mut pool: BTreeSet<Term> = BTreeSet::new();
    if max_height == 0 {
        return Vec::new();
    }
    for c in sig.constants.iter().chain(extra.iter()) {
        pool.insert(Term::Const(c.clone()));
    }
    for i in 0..n_vars {
        pool.insert(Term::Var(format!("{prefix}{i}")));
    }
    for _ in 2..=max_height {
        let current: Vec<Term> = pool.iter().cloned().collect();
        if current.is_empty() {
            break;
        }
        for (f, arity) in &sig.functions {
            let mut tuple = vec![0usize; *arity];
            loop {
                let args: Vec<Term> = tuple.iter().map(|&i| current[i].clone()).collect();
                pool.insert(Term::App(f.clone(), args));
                // advance the mixed-radix counter over argument choices
                let mut k = 0;
                loop {
                    if k == *arity {
                        break;
                    }
                    tuple[k] += 1;
                    if tuple[k] < current.len() {
                        break;
                    }
                    tuple[k] = 0;
                    k += 1;
                }
                if k == *arity {
                    break;
                }
            }
        }
        if pool.len() == current.len() {
            break; // fixpoint: no new terms at this height
        }
    }
    let mut terms: Vec<Term> = pool.into_iter().collect();
    terms.sort_by_cached_key(|t| t.to_string());
    terms
}

/// A formula together with its cached print form (tables are sorted by it).
type Entry = (String, Formula);

struct Tables<'a> {
    sig: &'a Signature,
    prefix: char,
    m: usize,
    /// terms[v] = terms of height ≤ m over v binder variables
    terms: Vec<Vec<Term>>,
    /// at[v][h] = formulas of height exactly h, free vars among first v binders
    at: Vec<Vec<Option<Vec<Entry>>>>,
    /// le[v][h] = formulas of height ≤ h, merged print order
    le: Vec<Vec<Option<Vec<Entry>>>>,
}

impl<'a> Tables<'a> {
    fn new(sig: &'a Signature, extra: &BTreeSet<String>, m: usize) -> Self {
        let prefix = binder_prefix(sig, extra);
        let terms = (0..=m).map(|v| terms_up_to(sig, extra, prefix, v, m)).collect();
        Tables {
            sig,
            prefix,
            m,
            terms,
            at: vec![vec![None; m + 1]; m + 1],
            le: vec![vec![None; m + 1]; m + 1],
        }
    }

    fn atoms(&self, v: usize) -> Vec<Entry> {
        let mut out: Vec<Entry> = Vec::new();
        out.push(("false".to_string(), Formula::Falsum));
        let terms = &self.terms[v];
        for (p, arity) in &self.sig.predicates {
            if *arity == 0 {
                let f = Formula::Atom(p.clone(), Vec::new());
                out.push((f.to_string(), f));
                continue;
            }
            if terms.is_empty() {
                continue;
            }
            let mut tuple = vec![0usize; *arity];
            loop {
                let args: Vec<Term> = tuple.iter().map(|&i| terms[i].clone()).collect();
                let f = Formula::Atom(p.clone(), args);
                out.push((f.to_string(), f));
                let mut k = 0;
                loop {
                    if k == *arity {
                        break;
                    }
                    tuple[k] += 1;
                    if tuple[k] < terms.len() {
                        break;
                    }
                    tuple[k] = 0;
                    k += 1;
                }
                if k == *arity {
                    break;
                }
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Formulas of height exactly `h` with free variables among the first
    /// `v` binders, sorted by print form. Built eagerly and memoized.
    fn table_at(&mut self, v: usize, h: usize) -> &[Entry] {
        if self.at[v][h].is_none() {
            let built = if h == 1 {
                self.atoms(v)
            } else {
                let mut out: Vec<Entry> = Vec::new();
                let exact: Vec<Entry> = self.table_at(v, h - 1).to_vec();
                let below: Vec<Entry> = self.table_le(v, h - 2).to_vec();
                let any: Vec<Entry> = self.table_le(v, h - 1).to_vec();
                for (la, lf) in &exact {
                    for (ra, rf) in &any {
                        push_binaries(&mut out, la, lf, ra, rf);
                    }
                }
                for (la, lf) in &below {
                    for (ra, rf) in &exact {
                        push_binaries(&mut out, la, lf, ra, rf);
                    }
                }
                if v + 1 <= self.m {
                    let binder = format!("{}{}", self.prefix, v);
                    let bodies: Vec<Entry> = self.table_at(v + 1, h - 1).to_vec();
                    for (_, bf) in &bodies {
                        let e = Formula::exists(&binder, bf.clone());
                        out.push((e.to_string(), e));
                        let a = Formula::forall(&binder, bf.clone());
                        out.push((a.to_string(), a));
                    }
                }
                out.sort_by(|a, b| a.0.cmp(&b.0));
                out
            };
            self.at[v][h] = Some(built);
        }
        self.at[v][h].as_ref().unwrap()
    }

    /// Formulas of height ≤ `h` (0 → empty), sorted by print form.
    fn table_le(&mut self, v: usize, h: usize) -> &[Entry] {
        if h == 0 {
            return &[];
        }
        if self.le[v][h].is_none() {
            let mut merged: Vec<Entry> = self.table_le(v, h - 1).to_vec();
            merged.extend(self.table_at(v, h).iter().cloned());
            merged.sort_by(|a, b| a.0.cmp(&b.0));
            self.le[v][h] = Some(merged);
        }
        self.le[v][h].as_ref().unwrap()
    }
}

fn push_binaries(out: &mut Vec<Entry>, la: &str, lf: &Formula, ra: &str, rf: &Formula) {
    for (mid, build) in [
        (" & ", Formula::And as fn(_, _) -> _),
        (" | ", Formula::Or as fn(_, _) -> _),
        (" -> ", Formula::Implies as fn(_, _) -> _),
    ] {
        let mut s = String::with_capacity(la.len() + ra.len() + mid.len() + 2);
        s.push('(');
        s.push_str(la);
        s.push_str(mid);
        s.push_str(ra);
        s.push(')');
        out.push((s, build(Box::new(lf.clone()), Box::new(rf.clone()))));
    }
}

/// One lazily-advanced source of level-`h` closed formulas in print order.
enum Stream<'t> {
    /// Fixed left operand and connective; right operand walks a sorted table.
    Binary { op: usize, left: &'t Entry, rights: &'t [Entry], idx: usize },
    /// Fixed quantifier; body walks the one-variable table of height h−1.
    Quant { forall: bool, binder: String, bodies: &'t [Entry], idx: usize },
}

impl<'t> Stream<'t> {
    fn current(&self) -> Option<Entry> {
        match self {
            Stream::Binary { op, left, rights, idx } => rights.get(*idx).map(|(ra, rf)| {
                let mut tmp = Vec::with_capacity(1);
                let (la, lf) = left;
                push_binaries_single(&mut tmp, *op, la, lf, ra, rf);
                tmp.pop().unwrap()
            }),
            Stream::Quant { forall, binder, bodies, idx } => bodies.get(*idx).map(|(_, bf)| {
                let f = if *forall {
                    Formula::forall(binder, bf.clone())
                } else {
                    Formula::exists(binder, bf.clone())
                };
                (f.to_string(), f)
            }),
        }
    }

    fn advance(&mut self) {
        match self {
            Stream::Binary { idx, .. } | Stream::Quant { idx, .. } => *idx += 1,
        }
    }
}

fn push_binaries_single(out: &mut Vec<Entry>, op: usize, la: &str, lf: &Formula, ra: &str, rf: &Formula) {
    let (mid, f): (&str, Formula) = match op {
        0 => (" & ", Formula::and(lf.clone(), rf.clone())),
        1 => (" | ", Formula::or(lf.clone(), rf.clone())),
        _ => (" -> ", Formula::implies(lf.clone(), rf.clone())),
    };
    let mut s = String::with_capacity(la.len() + ra.len() + mid.len() + 2);
    s.push('(');
    s.push_str(la);
    s.push_str(mid);
    s.push_str(ra);
    s.push(')');
    out.push((s, f));
}

/// Enumerates closed formulas over `sig` extended by the constants in
/// `extra`, with complexity ≤ `m` and all terms of height ≤ `m`, in
/// ascending (complexity, print) order, stopping after `cap` formulas.
///
/// `m = 0` yields the empty enumeration. The result is identical across
/// runs; `result(m)` is an order-preserving subsequence of `result(m+1)`
/// (a literal prefix when the signature is function-free).
pub fn enumerate_m_cf(
    sig: &Signature,
    extra: &BTreeSet<String>,
    m: usize,
    cap: usize,
) -> Enumeration {
    let mut out: Vec<Formula> = Vec::new();
    if m == 0 {
        return Enumeration { formulas: out, truncated: false };
    }
    let mut tables = Tables::new(sig, extra, m);
    let mut truncated = false;

    'levels: for h in 1..=m {
        if out.len() >= cap {
            truncated = true; // every level is nonempty (falsum combinations)
            break;
        }
        if h == 1 {
            for (_, f) in tables.table_at(0, 1).to_vec() {
                if out.len() >= cap {
                    truncated = true;
                    break 'levels;
                }
                out.push(f);
            }
            continue;
        }

        // Lazy ordered merge for level h: one stream per (left, connective)
        // plus the two quantifier streams; collect the completed level so it
        // can serve as the table for level h+1.
        let any: Vec<Entry> = tables.table_le(0, h - 1).to_vec();
        let exact: Vec<Entry> = tables.table_at(0, h - 1).to_vec();
        let bodies: Vec<Entry> = tables.table_at(1, h - 1).to_vec();
        let binder = format!("{}0", tables.prefix);

        let mut streams: Vec<Stream> = Vec::with_capacity(any.len() * 3 + 2);
        for left in &any {
            let left_height = left.1.complexity();
            let rights: &[Entry] = if left_height == h - 1 { &any } else { &exact };
            for op in 0..3 {
                streams.push(Stream::Binary { op, left, rights, idx: 0 });
            }
        }
        streams.push(Stream::Quant { forall: false, binder: binder.clone(), bodies: &bodies, idx: 0 });
        streams.push(Stream::Quant { forall: true, binder, bodies: &bodies, idx: 0 });

        let mut heap: BinaryHeap<Reverse<(String, usize)>> = BinaryHeap::new();
        for (i, s) in streams.iter().enumerate() {
            if let Some((key, _)) = s.current() {
                heap.push(Reverse((key, i)));
            }
        }

        let mut level: Vec<Entry> = Vec::new();
        while let Some(Reverse((key, i))) = heap.pop() {
            if out.len() >= cap {
                truncated = true;
                break 'levels;
            }
            let (_, f) = streams[i].current().expect("stream head must exist");
            out.push(f.clone());
            level.push((key, f));
            streams[i].advance();
            if let Some((next_key, _)) = streams[i].current() {
                heap.push(Reverse((next_key, i)));
            }
        }
        tables.at[0][h] = Some(level);
    }

    Enumeration { formulas: out, truncated }
}
