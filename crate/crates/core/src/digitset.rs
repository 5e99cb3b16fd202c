//! p-automatic subsets of `Z^d`: complete minimal DFAs over sign-then-digit
//! tuple encodings (least significant digit first).
//!
//! A vector `z` is written as one sign letter (a tuple of `+`/`-`) followed
//! by digit letters (tuples of base-`p` digits), padded with zero digits to
//! the longest coordinate. Zero is `+0`. Every automaton accepts canonical
//! words only.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DigitError {
    #[error("automata over different (p, d): ({0}, {1}) vs ({2}, {3})")]
    Mismatch(u32, usize, u32, usize),
    #[error("non-canonical word: {0}")]
    NonCanonical(String),
    #[error("vector has length {0}, expected {1}")]
    Dimension(usize, usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// How much of an automaton's language has been certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Exact,
    /// Agrees with a brute-force baseline on the box `|z|_inf <= bound`.
    WindowVerified(i64),
}

impl Status {
    pub fn weakest(self, other: Status) -> Status {
        match (self, other) {
            (Status::Exact, s) | (s, Status::Exact) => s,
            (Status::WindowVerified(a), Status::WindowVerified(b)) => Status::WindowVerified(a.min(b)),
        }
    }

    pub fn is_exact(self) -> bool {
        self == Status::Exact
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Exact => write!(f, "exact"),
            Status::WindowVerified(b) => write!(f, "window {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    /// Bit `i` set means coordinate `i` is negative.
    Sign(u32),
    Digits(Vec<u32>),
}

/// Letter indexing for a fixed `(p, d)`: sign letters first, then digit
/// tuples in little-endian base-`p` order.
#[derive(Clone, Debug)]
pub struct Alphabet {
    pub p: u32,
    pub d: usize,
    letters: Vec<Letter>,
}

impl Alphabet {
    pub fn new(p: u32, d: usize) -> Alphabet {
        let nsign = 1usize << d;
        let ndig = (p as usize).pow(d as u32);
        let mut letters = Vec::with_capacity(nsign + ndig);
        for m in 0..nsign {
            letters.push(Letter::Sign(m as u32));
        }
        for mut x in 0..ndig {
            let mut ds = Vec::with_capacity(d);
            for _ in 0..d {
                ds.push((x % p as usize) as u32);
                x /= p as usize;
            }
            letters.push(Letter::Digits(ds));
        }
        Alphabet { p, d, letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, i: usize) -> &Letter {
        &self.letters[i]
    }

    pub fn nsign(&self) -> usize {
        1 << self.d
    }

    pub fn index(&self, l: &Letter) -> usize {
        match l {
            Letter::Sign(m) => *m as usize,
            Letter::Digits(ds) => {
                let mut x = 0usize;
                for dg in ds.iter().rev() {
                    x = x * self.p as usize + *dg as usize;
                }
                self.nsign() + x
            }
        }
    }

    pub fn zero_digits(&self) -> usize {
        self.nsign()
    }
}

/// A canonical encoding of a vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitWord {
    pub p: u32,
    pub d: usize,
    pub letters: Vec<Letter>,
}

pub fn encode(z: &[i64], p: u32) -> DigitWord {
    let d = z.len();
    let mut mask = 0u32;
    let mut digs: Vec<Vec<u32>> = Vec::with_capacity(d);
    for (i, x) in z.iter().enumerate() {
        if *x < 0 {
            mask |= 1 << i;
        }
        let mut a = x.unsigned_abs();
        let mut v = Vec::new();
        while a > 0 {
            v.push((a % p as u64) as u32);
            a /= p as u64;
        }
        if v.is_empty() {
            v.push(0);
        }
        digs.push(v);
    }
    let len = digs.iter().map(|v| v.len()).max().unwrap_or(1);
    let mut letters = vec![Letter::Sign(mask)];
    for l in 0..len {
        letters.push(Letter::Digits(digs.iter().map(|v| v.get(l).copied().unwrap_or(0)).collect()));
    }
    DigitWord { p, d, letters }
}

pub fn decode(w: &DigitWord) -> Result<Vec<i64>, DigitError> {
    let bad = || DigitError::NonCanonical(w.to_string());
    let Some(Letter::Sign(mask)) = w.letters.first() else {
        return Err(bad());
    };
    if w.letters.len() < 2 {
        return Err(bad());
    }
    let mut z = vec![0i64; w.d];
    let mut pw: i64 = 1;
    for (k, l) in w.letters[1..].iter().enumerate() {
        let Letter::Digits(ds) = l else { return Err(bad()) };
        if ds.len() != w.d || ds.iter().any(|x| *x >= w.p) {
            return Err(bad());
        }
        for (zi, dg) in z.iter_mut().zip(ds) {
            *zi = dg
                .checked_mul_i64(pw)
                .and_then(|t| zi.checked_add(t))
                .ok_or_else(bad)?;
        }
        if k + 2 < w.letters.len() {
            pw = pw.checked_mul(w.p as i64).ok_or_else(bad)?;
        }
    }
    let last_zero = matches!(w.letters.last(), Some(Letter::Digits(ds)) if ds.iter().all(|x| *x == 0));
    if last_zero && w.letters.len() > 2 {
        return Err(bad());
    }
    for (i, zi) in z.iter_mut().enumerate() {
        if mask & (1 << i) != 0 {
            if *zi == 0 {
                return Err(bad());
            }
            *zi = -*zi;
        }
    }
    Ok(z)
}

trait CheckedMulI64 {
    fn checked_mul_i64(&self, x: i64) -> Option<i64>;
}

impl CheckedMulI64 for u32 {
    fn checked_mul_i64(&self, x: i64) -> Option<i64> {
        (*self as i64).checked_mul(x)
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            let parts: Vec<String> = match l {
                Letter::Sign(m) => (0..self.d).map(|i| if m & (1 << i) != 0 { "-".into() } else { "+".into() }).collect(),
                Letter::Digits(ds) => ds.iter().map(|x| x.to_string()).collect(),
            };
            if self.d == 1 {
                write!(f, "{}", parts[0])?;
            } else {
                write!(f, "({})", parts.join(","))?;
            }
        }
        Ok(())
    }
}

// Canonical-word recognizer. State codes: 0 start, 1 dead, otherwise
// 2 + 4 * need + phase, where `need` holds negative coordinates that have
// not yet shown a nonzero digit and `phase` is 0 (one zero digit so far),
// 1 (last letter nonzero), 2 (last letter zero after >= 2 digits), 3 unused.
fn canon_step(cs: u32, l: &Letter) -> u32 {
    match (cs, l) {
        (0, Letter::Sign(m)) => 2 + 4 * m + 3,
        (0, _) | (1, _) | (_, Letter::Sign(_)) => 1,
        (c, Letter::Digits(ds)) => {
            let need = (c - 2) / 4;
            let phase = (c - 2) % 4;
            let mut nz = 0u32;
            for (i, x) in ds.iter().enumerate() {
                if *x != 0 {
                    nz |= 1 << i;
                }
            }
            let need2 = need & !nz;
            let phase2 = if nz != 0 {
                1
            } else if phase == 3 {
                0
            } else {
                2
            };
            2 + 4 * need2 + phase2
        }
    }
}

fn canon_accept(cs: u32) -> bool {
    cs >= 2 && (cs - 2) / 4 == 0 && matches!((cs - 2) % 4, 0 | 1)
}

/// Complete DFA accepting canonical encodings of a subset of `Z^d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DigitAutomaton {
    pub p: u32,
    pub d: usize,
    pub nstates: usize,
    /// Row-major `nstates x alphabet` table.
    pub trans: Vec<u32>,
    pub initial: u32,
    pub finals: Vec<bool>,
    pub status: Status,
}

impl DigitAutomaton {
    /// Explore the deterministic machine given by `step` from `init`, keep
    /// canonical words only and minimize. `None` from `step` means reject.
    pub fn build<K, F, A>(p: u32, d: usize, init: K, mut step: F, mut accept: A) -> DigitAutomaton
    where
        K: Hash + Eq + Clone,
        F: FnMut(&K, &Letter) -> Option<K>,
        A: FnMut(&K) -> bool,
    {
        let alpha = Alphabet::new(p, d);
        let k = alpha.len();
        // state 0 is the sink
        let mut ids: HashMap<(K, u32), u32> = HashMap::new();
        let mut keys: Vec<(K, u32)> = Vec::new();
        let mut trans: Vec<u32> = vec![0; k];
        let mut finals = vec![false];
        let start = (init, 0u32);
        ids.insert(start.clone(), 1);
        keys.push(start.clone());
        trans.extend(std::iter::repeat(0).take(k));
        finals.push(false);
        let mut q = VecDeque::new();
        q.push_back(1u32);
        while let Some(s) = q.pop_front() {
            let (key, cs) = keys[s as usize - 1].clone();
            finals[s as usize] = canon_accept(cs) && accept(&key);
            for li in 0..k {
                let l = alpha.letter(li);
                let cs2 = canon_step(cs, l);
                if cs2 == 1 {
                    continue;
                }
                let Some(k2) = step(&key, l) else { continue };
                let nk = (k2, cs2);
                let t = match ids.get(&nk) {
                    Some(t) => *t,
                    None => {
                        let t = keys.len() as u32 + 1;
                        ids.insert(nk.clone(), t);
                        keys.push(nk);
                        trans.extend(std::iter::repeat(0).take(k));
                        finals.push(false);
                        q.push_back(t);
                        t
                    }
                };
                trans[s as usize * k + li] = t;
            }
        }
        let raw = DigitAutomaton {
            p,
            d,
            nstates: finals.len(),
            trans,
            initial: 1,
            finals,
            status: Status::Exact,
        };
        raw.minimize()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.p, self.d)
    }

    pub fn nletters(&self) -> usize {
        (1usize << self.d) + (self.p as usize).pow(self.d as u32)
    }

    pub fn next(&self, q: u32, letter: usize) -> u32 {
        self.trans[q as usize * self.nletters() + letter]
    }

    pub fn empty(p: u32, d: usize) -> DigitAutomaton {
        DigitAutomaton::build(p, d, (), |_, _| None, |_| false)
    }

    pub fn full(p: u32, d: usize) -> DigitAutomaton {
        DigitAutomaton::build(p, d, (), |_, _| Some(()), |_| true)
    }

    /// Finite set of vectors.
    pub fn from_points(p: u32, d: usize, points: &[Vec<i64>]) -> DigitAutomaton {
        let alpha = Alphabet::new(p, d);
        let words: Vec<Vec<usize>> = points
            .iter()
            .map(|z| encode(z, p).letters.iter().map(|l| alpha.index(l)).collect())
            .collect();
        // key: set of (word index, position) still matching
        let init: Vec<(usize, usize)> = (0..words.len()).map(|i| (i, 0)).collect();
        DigitAutomaton::build(
            p,
            d,
            init,
            |st, l| {
                let li = alpha.index(l);
                let nx: Vec<(usize, usize)> = st
                    .iter()
                    .filter(|(w, pos)| words[*w].get(*pos) == Some(&li))
                    .map(|(w, pos)| (*w, pos + 1))
                    .collect();
                if nx.is_empty() {
                    None
                } else {
                    Some(nx)
                }
            },
            |st| st.iter().any(|(w, pos)| *pos == words[*w].len()),
        )
    }

    fn same_space(&self, o: &DigitAutomaton) -> Result<(), DigitError> {
        if self.p != o.p || self.d != o.d {
            return Err(DigitError::Mismatch(self.p, self.d, o.p, o.d));
        }
        Ok(())
    }

    fn product(&self, o: &DigitAutomaton, op: impl Fn(bool, bool) -> bool) -> Result<DigitAutomaton, DigitError> {
        self.same_space(o)?;
        let alpha = self.alphabet();
        let mut r = DigitAutomaton::build(
            self.p,
            self.d,
            (self.initial, o.initial),
            |&(a, b), l| {
                let li = alpha.index(l);
                Some((self.next(a, li), o.next(b, li)))
            },
            |&(a, b)| op(self.finals[a as usize], o.finals[b as usize]),
        );
        r.status = self.status.weakest(o.status);
        Ok(r)
    }

    pub fn intersect(&self, o: &DigitAutomaton) -> Result<DigitAutomaton, DigitError> {
        self.product(o, |a, b| a && b)
    }

    pub fn union(&self, o: &DigitAutomaton) -> Result<DigitAutomaton, DigitError> {
        self.product(o, |a, b| a || b)
    }

    pub fn difference(&self, o: &DigitAutomaton) -> Result<DigitAutomaton, DigitError> {
        self.product(o, |a, b| a && !b)
    }

    pub fn complement(&self) -> DigitAutomaton {
        let alpha = self.alphabet();
        let mut r = DigitAutomaton::build(
            self.p,
            self.d,
            self.initial,
            |&a, l| Some(self.next(a, alpha.index(l))),
            |&a| !self.finals[a as usize],
        );
        r.status = self.status;
        r
    }

    pub fn with_status(mut self, s: Status) -> DigitAutomaton {
        self.status = s;
        self
    }

    /// Same language (ignores status).
    pub fn equals(&self, o: &DigitAutomaton) -> Result<bool, DigitError> {
        Ok(self.product(o, |a, b| a != b)?.is_empty())
    }

    pub fn is_subset(&self, o: &DigitAutomaton) -> Result<bool, DigitError> {
        Ok(self.difference(o)?.is_empty())
    }

    fn coaccessible(&self) -> Vec<bool> {
        let k = self.nletters();
        let mut preds: Vec<Vec<u32>> = vec![Vec::new(); self.nstates];
        for s in 0..self.nstates {
            for li in 0..k {
                preds[self.trans[s * k + li] as usize].push(s as u32);
            }
        }
        let mut live = self.finals.clone();
        let mut stack: Vec<u32> = (0..self.nstates as u32).filter(|s| live[*s as usize]).collect();
        while let Some(s) = stack.pop() {
            for &q in &preds[s as usize] {
                if !live[q as usize] {
                    live[q as usize] = true;
                    stack.push(q);
                }
            }
        }
        live
    }

    pub fn is_empty(&self) -> bool {
        !self.coaccessible()[self.initial as usize]
    }

    pub fn member(&self, z: &[i64]) -> bool {
        if z.len() != self.d {
            return false;
        }
        let alpha = self.alphabet();
        let mut q = self.initial;
        for l in encode(z, self.p).letters {
            q = self.next(q, alpha.index(&l));
        }
        self.finals[q as usize]
    }

    /// All accepted vectors with `|z|_inf <= bound`, sorted.
    pub fn enumerate_window(&self, bound: i64) -> Vec<Vec<i64>> {
        let alpha = self.alphabet();
        let live = self.coaccessible();
        let mut out = Vec::new();
        let b = bound.max(0) as u64;
        let mut maxlen = 1usize;
        let mut t = b / self.p as u64;
        while t > 0 {
            maxlen += 1;
            t /= self.p as u64;
        }
        let p = self.p as u64;
        for m in 0..alpha.nsign() {
            let q = self.next(self.initial, m);
            if !live[q as usize] {
                continue;
            }
            let mut stack: Vec<(u32, Vec<u64>, u64, usize)> = vec![(q, vec![0; self.d], 1, 0)];
            while let Some((q, vals, pw, len)) = stack.pop() {
                if len > 0 && self.finals[q as usize] {
                    let z: Vec<i64> = vals
                        .iter()
                        .enumerate()
                        .map(|(i, v)| if m & (1 << i) != 0 { -(*v as i64) } else { *v as i64 })
                        .collect();
                    out.push(z);
                }
                if len == maxlen {
                    continue;
                }
                for di in 0..(alpha.len() - alpha.nsign()) {
                    let li = alpha.nsign() + di;
                    let q2 = self.next(q, li);
                    if !live[q2 as usize] {
                        continue;
                    }
                    let Letter::Digits(ds) = alpha.letter(li) else { unreachable!() };
                    let nv: Vec<u64> = vals.iter().zip(ds).map(|(v, x)| v + *x as u64 * pw).collect();
                    if nv.iter().any(|v| *v > b) {
                        continue;
                    }
                    stack.push((q2, nv, pw.saturating_mul(p), len + 1));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Hopcroft partition refinement; also drops unreachable states and
    /// renumbers in breadth-first order so equal languages give equal tables.
    pub fn minimize(&self) -> DigitAutomaton {
        let k = self.nletters();
        let n = self.nstates;
        // reachable part
        let mut reach = vec![false; n];
        reach[self.initial as usize] = true;
        let mut stack = vec![self.initial];
        while let Some(s) = stack.pop() {
            for li in 0..k {
                let t = self.trans[s as usize * k + li];
                if !reach[t as usize] {
                    reach[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        let mut inv: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); n]; k];
        for s in 0..n {
            if !reach[s] {
                continue;
            }
            for li in 0..k {
                inv[li][self.trans[s * k + li] as usize].push(s as u32);
            }
        }
        let mut block_of = vec![usize::MAX; n];
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        for want in [true, false] {
            let b: Vec<u32> = (0..n as u32).filter(|s| reach[*s as usize] && self.finals[*s as usize] == want).collect();
            if !b.is_empty() {
                for s in &b {
                    block_of[*s as usize] = blocks.len();
                }
                blocks.push(b);
            }
        }
        let mut in_work = vec![true; blocks.len()];
        let mut work: Vec<usize> = (0..blocks.len()).collect();
        let mut count = vec![0usize; 0];
        let mut mark = vec![false; n];
        while let Some(b) = work.pop() {
            in_work[b] = false;
            let splitter = blocks[b].clone();
            for li in 0..k {
                let mut hit: Vec<u32> = Vec::new();
                for s in &splitter {
                    for &q in &inv[li][*s as usize] {
                        if !mark[q as usize] {
                            mark[q as usize] = true;
                            hit.push(q);
                        }
                    }
                }
                if hit.is_empty() {
                    continue;
                }
                count.resize(blocks.len(), 0);
                let mut touched = Vec::new();
                for q in &hit {
                    let bl = block_of[*q as usize];
                    if count[bl] == 0 {
                        touched.push(bl);
                    }
                    count[bl] += 1;
                }
                for bl in touched {
                    let c = count[bl];
                    count[bl] = 0;
                    if c == blocks[bl].len() {
                        continue;
                    }
                    let (yes, no): (Vec<u32>, Vec<u32>) = blocks[bl].iter().partition(|s| mark[**s as usize]);
                    let nb = blocks.len();
                    for s in &yes {
                        block_of[*s as usize] = nb;
                    }
                    blocks[bl] = no;
                    blocks.push(yes);
                    in_work.push(false);
                    if in_work[bl] {
                        in_work[nb] = true;
                        work.push(nb);
                    } else {
                        let pick = if blocks[nb].len() <= blocks[bl].len() { nb } else { bl };
                        in_work[pick] = true;
                        work.push(pick);
                    }
                }
                for q in hit {
                    mark[q as usize] = false;
                }
            }
        }
        // renumber by BFS from the initial block
        let mut order: Vec<usize> = vec![usize::MAX; blocks.len()];
        let mut seq: Vec<usize> = Vec::new();
        let b0 = block_of[self.initial as usize];
        order[b0] = 0;
        seq.push(b0);
        let mut i = 0;
        while i < seq.len() {
            let rep = blocks[seq[i]][0] as usize;
            for li in 0..k {
                let tb = block_of[self.trans[rep * k + li] as usize];
                if order[tb] == usize::MAX {
                    order[tb] = seq.len();
                    seq.push(tb);
                }
            }
            i += 1;
        }
        let m = seq.len();
        let mut trans = vec![0u32; m * k];
        let mut finals = vec![false; m];
        for (ni, b) in seq.iter().enumerate() {
            let rep = blocks[*b][0] as usize;
            finals[ni] = self.finals[rep];
            for li in 0..k {
                trans[ni * k + li] = order[block_of[self.trans[rep * k + li] as usize]] as u32;
            }
        }
        DigitAutomaton {
            p: self.p,
            d: self.d,
            nstates: m,
            trans,
            initial: 0,
            finals,
            status: self.status,
        }
    }

    /// `{v in Z^N : phi(v) in S}` for an integer matrix `phi` with `d` rows.
    pub fn linear_preimage(&self, phi: &[Vec<i64>], ncols: usize) -> Result<DigitAutomaton, DigitError> {
        if phi.len() != self.d {
            return Err(DigitError::Dimension(phi.len(), self.d));
        }
        let p = self.p as i64;
        let alpha_s = self.alphabet();
        let zero_s = alpha_s.zero_digits();
        let live = self.coaccessible();
        let d = self.d;
        // branch: (guessed output signs, committed state, pending state,
        // carries, nonzero mask)
        type Branch = (u32, Option<u32>, u32, Vec<i64>, u32);
        #[derive(Clone, PartialEq, Eq, Hash)]
        enum St {
            Start,
            Run(u32, Vec<Branch>),
        }
        let out_letter = |digs: &[i64]| -> usize {
            let ds: Vec<u32> = digs.iter().map(|x| *x as u32).collect();
            alpha_s.index(&Letter::Digits(ds))
        };
        let feed = |br: &Branch, digs: &[i64]| -> Branch {
            let (sig, com, pend, carry, nz) = br.clone();
            let li = out_letter(digs);
            let mut nz2 = nz;
            for (i, x) in digs.iter().enumerate() {
                if *x != 0 {
                    nz2 |= 1 << i;
                }
            }
            if li == zero_s {
                (sig, com, self.next(pend, li), carry, nz2)
            } else {
                let t = self.next(pend, li);
                (sig, Some(t), t, carry, nz2)
            }
        };
        let q_signs: Vec<u32> = (0..(1u32 << d)).map(|m| self.next(self.initial, m as usize)).collect();
        let branch_alive = |br: &Branch| -> bool {
            let fallback = br.1.unwrap_or_else(|| self.next(q_signs[br.0 as usize], zero_s));
            live[br.2 as usize] || live[fallback as usize]
        };
        let mut r = DigitAutomaton::build(
            self.p,
            ncols,
            St::Start,
            |st, l| match (st, l) {
                (St::Start, Letter::Sign(s)) => {
                    let brs: Vec<Branch> = (0..(1u32 << d))
                        .filter(|sig| live[q_signs[*sig as usize] as usize])
                        .map(|sig| (sig, None, q_signs[sig as usize], vec![0; d], 0))
                        .collect();
                    if brs.is_empty() {
                        None
                    } else {
                        Some(St::Run(*s, brs))
                    }
                }
                (St::Run(s, brs), Letter::Digits(ds)) => {
                    let mut out = Vec::with_capacity(brs.len());
                    for br in brs {
                        let mut digs = vec![0i64; d];
                        let mut carry = br.3.clone();
                        for i in 0..d {
                            let mut acc: i64 = 0;
                            for (j, dj) in ds.iter().enumerate() {
                                let sj = if s & (1 << j) != 0 { -1 } else { 1 };
                                acc += phi[i][j] * sj * *dj as i64;
                            }
                            let si = if br.0 & (1 << i) != 0 { -1 } else { 1 };
                            let t = carry[i] + si * acc;
                            digs[i] = t.rem_euclid(p);
                            carry[i] = t.div_euclid(p);
                        }
                        let mut nb = feed(&br, &digs);
                        nb.3 = carry;
                        if branch_alive(&nb) {
                            out.push(nb);
                        }
                    }
                    if out.is_empty() {
                        None
                    } else {
                        Some(St::Run(*s, out))
                    }
                }
                _ => None,
            },
            |st| match st {
                St::Start => false,
                St::Run(_, brs) => brs.iter().any(|br| {
                    if br.3.iter().any(|c| *c < 0) {
                        return false;
                    }
                    let mut b = br.clone();
                    while b.3.iter().any(|c| *c > 0) {
                        let digs: Vec<i64> = b.3.iter().map(|c| c % p).collect();
                        let carry: Vec<i64> = b.3.iter().map(|c| c / p).collect();
                        b = feed(&b, &digs);
                        b.3 = carry;
                    }
                    if b.0 & !b.4 != 0 {
                        return false;
                    }
                    let fin = b.1.unwrap_or_else(|| self.next(q_signs[b.0 as usize], zero_s));
                    self.finals[fin as usize]
                }),
            },
        );
        r.status = self.status;
        Ok(r)
    }

    /// Image `{phi(z) : z in S}` for an integer matrix `phi` with `d`
    /// columns.
    pub fn linear_image(&self, phi: &[Vec<i64>]) -> Result<DigitAutomaton, DigitError> {
        let n = phi.len();
        if phi.iter().any(|r| r.len() != self.d) {
            return Err(DigitError::Dimension(phi.first().map(|r| r.len()).unwrap_or(0), self.d));
        }
        let d = self.d;
        // joint space (z, y)
        let proj: Vec<Vec<i64>> = (0..d)
            .map(|i| {
                let mut r = vec![0; d + n];
                r[i] = 1;
                r
            })
            .collect();
        let cyl = self.linear_preimage(&proj, d + n)?;
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                let mut r: Vec<i64> = phi[i].iter().map(|x| -x).collect();
                r.extend((0..n).map(|j| (i == j) as i64));
                r
            })
            .collect();
        let graph = from_linear_system(self.p, d + n, &rows, &vec![0; n], &[]);
        let joint = cyl.intersect(&graph)?;
        let keep: Vec<usize> = (d..d + n).collect();
        let mut r = joint.project(&keep);
        r.status = self.status;
        Ok(r)
    }

    /// Projection onto the listed coordinates (existential quantification of
    /// the others).
    pub fn project(&self, keep: &[usize]) -> DigitAutomaton {
        let d = self.d;
        let p = self.p;
        let alpha = self.alphabet();
        let drop: Vec<usize> = (0..d).filter(|i| !keep.contains(i)).collect();
        let full = |kept: &Letter, other: &Letter| -> usize {
            match (kept, other) {
                (Letter::Sign(a), Letter::Sign(b)) => {
                    let mut m = 0u32;
                    for (t, i) in keep.iter().enumerate() {
                        if a & (1 << t) != 0 {
                            m |= 1 << i;
                        }
                    }
                    for (t, i) in drop.iter().enumerate() {
                        if b & (1 << t) != 0 {
                            m |= 1 << i;
                        }
                    }
                    m as usize
                }
                (Letter::Digits(a), Letter::Digits(b)) => {
                    let mut ds = vec![0u32; d];
                    for (t, i) in keep.iter().enumerate() {
                        ds[*i] = a[t];
                    }
                    for (t, i) in drop.iter().enumerate() {
                        ds[*i] = b[t];
                    }
                    alpha.index(&Letter::Digits(ds))
                }
                _ => unreachable!(),
            }
        };
        let other = Alphabet::new(p, drop.len());
        let other_signs: Vec<&Letter> = (0..other.nsign()).map(|i| other.letter(i)).collect();
        let other_digits: Vec<&Letter> = (other.nsign()..other.len()).map(|i| other.letter(i)).collect();
        // states that reach a final reading letters whose kept digits are 0
        let zero_kept = Letter::Digits(vec![0; keep.len()]);
        let mut good = self.finals.clone();
        loop {
            let mut changed = false;
            for s in 0..self.nstates {
                if good[s] {
                    continue;
                }
                if other_digits.iter().any(|o| good[self.next(s as u32, full(&zero_kept, o)) as usize]) {
                    good[s] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let init: BTreeSet<u32> = [self.initial].into_iter().collect();
        let mut r = DigitAutomaton::build(
            p,
            keep.len(),
            init,
            |set, l| {
                let opts = match l {
                    Letter::Sign(_) => &other_signs,
                    Letter::Digits(_) => &other_digits,
                };
                let nx: BTreeSet<u32> = set
                    .iter()
                    .flat_map(|q| opts.iter().map(move |o| (*q, *o)))
                    .map(|(q, o)| self.next(q, full(l, o)))
                    .collect();
                Some(nx)
            },
            |set| set.iter().any(|q| good[*q as usize]),
        );
        r.status = self.status;
        r
    }

    // ---- text / DOT / JSON ----

    pub fn to_text(&self) -> String {
        let alpha = self.alphabet();
        let live = self.coaccessible();
        let sink = (0..self.nstates).find(|s| !live[*s]);
        let mut out = String::new();
        out.push_str("pautomaton v1\n");
        out.push_str(&format!("p={} d={}\n", self.p, self.d));
        let finals: Vec<String> = (0..self.nstates).filter(|s| self.finals[*s]).map(|s| s.to_string()).collect();
        out.push_str(&format!("states={} initial={} finals={}\n", self.nstates, self.initial, finals.join(",")));
        out.push_str(&format!("status={}\n", self.status));
        for s in 0..self.nstates {
            if Some(s) == sink {
                continue;
            }
            for li in 0..alpha.len() {
                let t = self.next(s as u32, li) as usize;
                if Some(t) == sink {
                    continue;
                }
                out.push_str(&format!("trans {} {} {}\n", s, letter_text(alpha.letter(li), self.d), t));
            }
        }
        out
    }

    pub fn from_text(src: &str) -> Result<DigitAutomaton, DigitError> {
        let err = |line: usize, msg: &str| DigitError::Parse { line, msg: msg.to_string() };
        let mut lines = src
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, head) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        if head != "pautomaton v1" {
            return Err(err(ln, "expected `pautomaton v1`"));
        }
        let kv = |ln: usize, l: &str| -> Result<HashMap<String, String>, DigitError> {
            l.split_whitespace()
                .map(|t| {
                    t.split_once('=')
                        .map(|(a, b)| (a.to_string(), b.to_string()))
                        .ok_or_else(|| err(ln, "expected key=value"))
                })
                .collect()
        };
        let num = |ln: usize, m: &HashMap<String, String>, k: &str| -> Result<u64, DigitError> {
            m.get(k)
                .ok_or_else(|| err(ln, &format!("missing `{k}`")))?
                .parse()
                .map_err(|_| err(ln, &format!("bad `{k}`")))
        };
        let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing `p= d=` line"))?;
        let m = kv(ln, l)?;
        let p = num(ln, &m, "p")? as u32;
        let d = num(ln, &m, "d")? as usize;
        if p < 2 || d > 8 {
            return Err(err(ln, "unsupported p or d"));
        }
        let (ln, l) = lines.next().ok_or_else(|| err(ln, "missing `states=` line"))?;
        let m = kv(ln, l)?;
        let n = num(ln, &m, "states")? as usize;
        let initial = num(ln, &m, "initial")? as u32;
        if n == 0 || initial as usize >= n {
            return Err(err(ln, "initial state out of range"));
        }
        let mut finals_v = vec![false; n + 1];
        if let Some(f) = m.get("finals") {
            for t in f.split(',').filter(|t| !t.is_empty()) {
                let s: usize = t.parse().map_err(|_| err(ln, "bad final state"))?;
                if s >= n {
                    return Err(err(ln, "final state out of range"));
                }
                finals_v[s] = true;
            }
        }
        let alpha = Alphabet::new(p, d);
        let k = alpha.len();
        let sink = n as u32;
        let mut trans = vec![sink; (n + 1) * k];
        let mut status = Status::Exact;
        for (ln, l) in lines {
            if let Some(rest) = l.strip_prefix("status=") {
                status = if rest == "exact" {
                    Status::Exact
                } else if let Some(b) = rest.strip_prefix("window ") {
                    Status::WindowVerified(b.trim().parse().map_err(|_| err(ln, "bad window bound"))?)
                } else {
                    return Err(err(ln, "bad status"));
                };
                continue;
            }
            let parts: Vec<&str> = l.split_whitespace().collect();
            if parts.len() != 4 || parts[0] != "trans" {
                return Err(err(ln, "expected `trans <from> <letter> <to>`"));
            }
            let from: usize = parts[1].parse().map_err(|_| err(ln, "bad state"))?;
            let to: u32 = parts[3].parse().map_err(|_| err(ln, "bad state"))?;
            if from >= n || to as usize >= n {
                return Err(err(ln, "state out of range"));
            }
            let letter = parse_letter(parts[2], p, d).ok_or_else(|| err(ln, "bad letter"))?;
            trans[from * k + alpha.index(&letter)] = to;
        }
        let raw = DigitAutomaton {
            p,
            d,
            nstates: n + 1,
            trans,
            initial,
            finals: finals_v,
            status,
        };
        // restrict to canonical words
        let mut r = DigitAutomaton::build(p, d, initial, |&q, l| Some(raw.next(q, alpha.index(l))), |&q| raw.finals[q as usize]);
        r.status = status;
        Ok(r)
    }

    pub fn to_dot(&self) -> String {
        let alpha = self.alphabet();
        let live = self.coaccessible();
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  start [shape=point];\n");
        for s in 0..self.nstates {
            if !live[s] {
                continue;
            }
            let shape = if self.finals[s] { "doublecircle" } else { "circle" };
            out.push_str(&format!("  q{s} [shape={shape}];\n"));
        }
        out.push_str(&format!("  start -> q{};\n", self.initial));
        for s in 0..self.nstates {
            if !live[s] {
                continue;
            }
            let mut by_target: std::collections::BTreeMap<u32, Vec<String>> = Default::default();
            for li in 0..alpha.len() {
                let t = self.next(s as u32, li);
                if live[t as usize] {
                    by_target.entry(t).or_default().push(letter_text(alpha.letter(li), self.d));
                }
            }
            for (t, ls) in by_target {
                out.push_str(&format!("  q{s} -> q{t} [label=\"{}\"];\n", ls.join(" ")));
            }
        }
        out.push_str("}\n");
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn letter_text(l: &Letter, d: usize) -> String {
    let parts: Vec<String> = match l {
        Letter::Sign(m) => (0..d).map(|i| if m & (1 << i) != 0 { "-".into() } else { "+".into() }).collect(),
        Letter::Digits(ds) => ds.iter().map(|x| x.to_string()).collect(),
    };
    format!("({})", parts.join(","))
}

fn parse_letter(s: &str, p: u32, d: usize) -> Option<Letter> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let parts: Vec<&str> = inner.split(',').collect();
    if parts.len() != d {
        return None;
    }
    if parts.iter().all(|t| *t == "+" || *t == "-") {
        let mut m = 0u32;
        for (i, t) in parts.iter().enumerate() {
            if *t == "-" {
                m |= 1 << i;
            }
        }
        return Some(Letter::Sign(m));
    }
    let ds: Option<Vec<u32>> = parts.iter().map(|t| t.parse::<u32>().ok().filter(|x| *x < p)).collect();
    ds.map(Letter::Digits)
}

/// A congruence `coeffs . z = residue (mod modulus)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Congruence {
    pub coeffs: Vec<i64>,
    pub residue: i64,
    pub modulus: i64,
}

/// `{z in Z^d : A z = b and every congruence holds}`.
pub fn from_linear_system(p: u32, d: usize, a: &[Vec<i64>], b: &[i64], congruences: &[Congruence]) -> DigitAutomaton {
    let pi = p as i64;
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum St {
        Start,
        Run { signs: u32, carry: Vec<i64>, acc: Vec<i64>, pw: Vec<i64> },
    }
    let init_carry: Vec<i64> = b.iter().map(|x| -x).collect();
    DigitAutomaton::build(
        p,
        d,
        St::Start,
        |st, l| match (st, l) {
            (St::Start, Letter::Sign(m)) => Some(St::Run {
                signs: *m,
                carry: init_carry.clone(),
                acc: vec![0; congruences.len()],
                pw: congruences.iter().map(|c| 1 % c.modulus).collect(),
            }),
            (St::Run { signs, carry, acc, pw }, Letter::Digits(ds)) => {
                let sv: Vec<i64> = (0..d)
                    .map(|j| if signs & (1 << j) != 0 { -(ds[j] as i64) } else { ds[j] as i64 })
                    .collect();
                let mut nc = Vec::with_capacity(a.len());
                for (row, c) in a.iter().zip(carry) {
                    let t = c + row.iter().zip(&sv).map(|(x, y)| x * y).sum::<i64>();
                    if t.rem_euclid(pi) != 0 {
                        return None;
                    }
                    nc.push(t.div_euclid(pi));
                }
                let mut na = Vec::with_capacity(congruences.len());
                let mut np = Vec::with_capacity(congruences.len());
                for ((cg, ac), w) in congruences.iter().zip(acc).zip(pw) {
                    let q = cg.modulus;
                    let dot: i64 = cg.coeffs.iter().zip(&sv).map(|(x, y)| x.rem_euclid(q) * y.rem_euclid(q) % q).sum();
                    na.push((ac + dot % q * w).rem_euclid(q));
                    np.push(w * (pi % q) % q);
                }
                Some(St::Run {
                    signs: *signs,
                    carry: nc,
                    acc: na,
                    pw: np,
                })
            }
            _ => None,
        },
        |st| match st {
            St::Start => false,
            St::Run { carry, acc, .. } => {
                carry.iter().all(|c| *c == 0)
                    && acc
                        .iter()
                        .zip(congruences)
                        .all(|(a, c)| *a == c.residue.rem_euclid(c.modulus))
            }
        },
    )
}

/// `{z in Z^d : (c_t . z mod q_t)_t in accepted}` for congruence forms
/// `(c_t, q_t)`; a residue vector lists `c_t . z` reduced into `[0, q_t)`.
pub fn from_residue_set(p: u32, d: usize, forms: &[(Vec<i64>, i64)], accepted: &HashSet<Vec<i64>>) -> DigitAutomaton {
    let pi = p as i64;
    #[derive(Clone, PartialEq, Eq, Hash)]
    enum St {
        Start,
        Run { signs: u32, acc: Vec<i64>, pw: Vec<i64> },
    }
    DigitAutomaton::build(
        p,
        d,
        St::Start,
        |st, l| match (st, l) {
            (St::Start, Letter::Sign(m)) => Some(St::Run {
                signs: *m,
                acc: vec![0; forms.len()],
                pw: forms.iter().map(|(_, q)| 1 % q).collect(),
            }),
            (St::Run { signs, acc, pw }, Letter::Digits(ds)) => {
                let sv: Vec<i64> = (0..d)
                    .map(|j| if signs & (1 << j) != 0 { -(ds[j] as i64) } else { ds[j] as i64 })
                    .collect();
                let mut na = Vec::with_capacity(forms.len());
                let mut np = Vec::with_capacity(forms.len());
                for (((c, q), ac), w) in forms.iter().zip(acc).zip(pw) {
                    let dot = c.iter().zip(&sv).map(|(x, y)| x.rem_euclid(*q) * y.rem_euclid(*q) % q).sum::<i64>() % q;
                    na.push((ac + dot * w).rem_euclid(*q));
                    np.push(w * (pi % q) % q);
                }
                Some(St::Run { signs: *signs, acc: na, pw: np })
            }
            _ => None,
        },
        |st| match st {
            St::Start => false,
            St::Run { acc, .. } => accepted.contains(acc),
        },
    )
}
