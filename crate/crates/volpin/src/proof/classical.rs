//! A sound pruning filter for the bounded search.
//!
//! Every sequent provable in the intuitionistic calculus is classically
//! valid, so it is true in every finite structure under every valuation of
//! that structure's ground atoms.  The filter fixes one concrete structure
//! per instantiation pool: the domain is the pool plus a sink element, each
//! function maps a tuple to the pool term it spells if that term is in the
//! pool and to the sink otherwise, and constants denote themselves.  If some
//! valuation of the ground atoms makes the antecedent true and the succedent
//! false in that structure, the sequent has a classical countermodel and is
//! rejected without search.
//!
//! Truth tables are held as bitvectors indexed by valuation (one bit per
//! assignment of the ground atoms), which keeps the check to a few dozen
//! word operations per formula.  Structures with more than [`MAX_ATOMS`]
//! ground atoms are not checked at all — the filter simply abstains, so it
//! only ever prunes, never approves.

use super::Sequent;
use crate::syntax::{Formula, Signature, Term};
use std::collections::{BTreeMap, HashMap};

const MAX_ATOMS: usize = 14;
const MAX_TABLE_SETS: usize = 64;
const SINK: &str = "@sink";

pub(crate) struct ClassicalFilter {
    tables: HashMap<Vec<Term>, Tables>,
}

struct Tables {
    domain: Vec<Term>,
    term_index: BTreeMap<Term, usize>,
    atom_index: BTreeMap<(String, Vec<usize>), usize>,
    patterns: Vec<Vec<u64>>,
    words: usize,
    last_mask: u64,
    enabled: bool,
    cache: HashMap<Formula, Vec<u64>>,
}

impl ClassicalFilter {
    pub fn new() -> ClassicalFilter {
        ClassicalFilter {
            tables: HashMap::new(),
        }
    }

    pub fn reset(&mut self) {
        self.tables.clear();
    }

    /// True if `seq` is classically invalid in the structure over `pool`,
    /// hence certainly unprovable.  False means "no judgement".
    pub fn rejects(&mut self, signature: &Signature, pool: &[Term], seq: &Sequent) -> bool {
        // Forcing-side element literals have no standing interpretation here.
        if seq
            .antecedent()
            .chain(std::iter::once(seq.succedent()))
            .any(formula_mentions_element)
        {
            return false;
        }
        if self.tables.len() >= MAX_TABLE_SETS && !self.tables.contains_key(pool) {
            self.tables.clear();
        }
        let tables = self
            .tables
            .entry(pool.to_vec())
            .or_insert_with(|| Tables::build(signature, pool));
        if !tables.enabled {
            return false;
        }
        let mut antecedent_truth = vec![!0u64; tables.words];
        for g in seq.antecedent() {
            let truth = tables.truth(g);
            for (acc, word) in antecedent_truth.iter_mut().zip(truth.iter()) {
                *acc &= word;
            }
        }
        let succedent_truth = tables.truth(seq.succedent());
        let mut countermodel = false;
        for (i, (gamma, delta)) in antecedent_truth
            .iter()
            .zip(succedent_truth.iter())
            .enumerate()
        {
            let mut bad = gamma & !delta;
            if i + 1 == tables.words {
                bad &= tables.last_mask;
            }
            if bad != 0 {
                countermodel = true;
                break;
            }
        }
        countermodel
    }
}

impl Tables {
    fn build(signature: &Signature, pool: &[Term]) -> Tables {
        let domain: Vec<Term> = pool.to_vec();
        let sink = domain.len();
        let term_index: BTreeMap<Term, usize> = domain
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        let mut atom_count = 0usize;
        for (_, arity) in &signature.predicates {
            let tuples = (sink + 1).checked_pow(*arity as u32);
            atom_count = match tuples.and_then(|t| atom_count.checked_add(t)) {
                Some(n) => n,
                None => MAX_ATOMS + 1,
            };
            if atom_count > MAX_ATOMS {
                break;
            }
        }
        if atom_count > MAX_ATOMS {
            return Tables {
                domain,
                term_index,
                atom_index: BTreeMap::new(),
                patterns: Vec::new(),
                words: 0,
                last_mask: 0,
                enabled: false,
                cache: HashMap::new(),
            };
        }
        let mut atom_index = BTreeMap::new();
        let mut next_id = 0usize;
        for (name, arity) in &signature.predicates {
            let mut tuple = vec![0usize; *arity];
            loop {
                atom_index.insert((name.clone(), tuple.clone()), next_id);
                next_id += 1;
                let mut pos = 0;
                while pos < tuple.len() {
                    tuple[pos] += 1;
                    if tuple[pos] <= sink {
                        break;
                    }
                    tuple[pos] = 0;
                    pos += 1;
                }
                if pos == tuple.len() {
                    break;
                }
            }
        }
        let valuations = 1usize << next_id;
        let words = valuations.div_ceil(64);
        let last_mask = if valuations % 64 == 0 {
            !0u64
        } else {
            (1u64 << (valuations % 64)) - 1
        };
        let mut patterns = vec![vec![0u64; words]; next_id];
        for (id, pattern) in patterns.iter_mut().enumerate() {
            for valuation in 0..valuations {
                if (valuation >> id) & 1 == 1 {
                    pattern[valuation / 64] |= 1u64 << (valuation % 64);
                }
            }
        }
        Tables {
            domain,
            term_index,
            atom_index,
            patterns,
            words,
            last_mask,
            enabled: true,
            cache: HashMap::new(),
        }
    }

    /// Truth bitvector of `f`: bit `v` is the truth value of `f` in the
    /// structure under the `v`-th valuation of the ground atoms.
    fn truth(&mut self, f: &Formula) -> Vec<u64> {
        if let Some(cached) = self.cache.get(f) {
            return cached.clone();
        }
        let result = match f {
            Formula::Atom(name, args) => {
                let elems: Vec<usize> = args.iter().map(|t| self.eval_ground(t)).collect();
                let id = self.atom_index[&(name.clone(), elems)];
                self.patterns[id].clone()
            }
            Formula::Falsum => vec![0u64; self.words],
            Formula::And(a, b) => {
                let (va, vb) = (self.truth(a), self.truth(b));
                va.iter().zip(vb.iter()).map(|(x, y)| x & y).collect()
            }
            Formula::Or(a, b) => {
                let (va, vb) = (self.truth(a), self.truth(b));
                va.iter().zip(vb.iter()).map(|(x, y)| x | y).collect()
            }
            Formula::Implies(a, b) => {
                let (va, vb) = (self.truth(a), self.truth(b));
                va.iter().zip(vb.iter()).map(|(x, y)| !x | y).collect()
            }
            Formula::Exists(x, body) => {
                let mut acc = vec![0u64; self.words];
                for witness in self.domain_terms() {
                    let instance = self.truth(&body.substitute(x, &witness));
                    for (a, w) in acc.iter_mut().zip(instance.iter()) {
                        *a |= w;
                    }
                }
                acc
            }
            Formula::Forall(x, body) => {
                let mut acc = vec![!0u64; self.words];
                for witness in self.domain_terms() {
                    let instance = self.truth(&body.substitute(x, &witness));
                    for (a, w) in acc.iter_mut().zip(instance.iter()) {
                        *a &= w;
                    }
                }
                acc
            }
        };
        self.cache.insert(f.clone(), result.clone());
        result
    }

    /// Every domain element as a closed term: the pool terms themselves plus
    /// the sink constant.
    fn domain_terms(&self) -> Vec<Term> {
        let mut out = self.domain.clone();
        out.push(Term::Const(SINK.to_string()));
        out
    }

    /// Index of the element a closed term denotes; compositions that leave
    /// the pool land in the sink (index `domain.len()`).
    fn eval_ground(&self, t: &Term) -> usize {
        let sink = self.domain.len();
        match t {
            Term::Const(name) if name == SINK => sink,
            Term::Const(_) => self.term_index.get(t).copied().unwrap_or(sink),
            Term::App(name, args) => {
                let mut spelled = Vec::with_capacity(args.len());
                for arg in args {
                    let idx = self.eval_ground(arg);
                    if idx == sink {
                        return sink;
                    }
                    spelled.push(self.domain[idx].clone());
                }
                self.term_index
                    .get(&Term::App(name.clone(), spelled))
                    .copied()
                    .unwrap_or(sink)
            }
            Term::Var(_) | Term::Elem(_) => sink,
        }
    }
}

fn formula_mentions_element(f: &Formula) -> bool {
    match f {
        Formula::Atom(_, args) => args.iter().any(term_mentions_element),
        Formula::Falsum => false,
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            formula_mentions_element(a) || formula_mentions_element(b)
        }
        Formula::Exists(_, body) | Formula::Forall(_, body) => formula_mentions_element(body),
    }
}

fn term_mentions_element(t: &Term) -> bool {
    match t {
        Term::Elem(_) => true,
        Term::App(_, args) => args.iter().any(term_mentions_element),
        Term::Var(_) | Term::Const(_) => false,
    }
}
