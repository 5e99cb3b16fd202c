//! Brute-force baselines: breadth-first search for submonoid witnesses and
//! exhaustive window scans for knapsack and S-unit equations.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::digitset::DigitAutomaton;
use crate::group::{GroupContext, GroupElement};
use crate::modcalc::{ModError, ModuleGb};
use crate::sunit::SUnitInstance;

/// Limits for [`bfs_submonoid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBudget {
    /// maximal word length
    pub max_len: usize,
    /// lamp exponents must stay in `[-support, support]`
    pub support: i64,
    /// translation parts must stay in `[-window, window]`
    pub window: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SearchOutcome {
    /// generator indices, left to right
    Found(Vec<usize>),
    NotFoundWithinBudget,
}

fn within(g: &GroupElement, b: &SearchBudget) -> bool {
    g.a.iter().all(|x| x.abs() <= b.window)
        && g.y.coords.iter().all(|c| c.terms().all(|(e, _)| e.iter().all(|x| x.abs() <= b.support)))
}

/// Breadth-first search over products of the generators.
pub fn bfs_submonoid(ctx: &GroupContext, gens: &[GroupElement], target: &GroupElement, budget: &SearchBudget) -> SearchOutcome {
    let start = ctx.identity();
    let mut parent: HashMap<GroupElement, Option<(GroupElement, usize)>> = HashMap::new();
    parent.insert(start.clone(), None);
    let mut q = VecDeque::new();
    q.push_back((start, 0usize));
    let mut hit = None;
    while let Some((g, len)) = q.pop_front() {
        if g == *target {
            hit = Some(g);
            break;
        }
        if len >= budget.max_len {
            continue;
        }
        for (i, h) in gens.iter().enumerate() {
            let next = ctx.mul(&g, h);
            if !within(&next, budget) || parent.contains_key(&next) {
                continue;
            }
            parent.insert(next.clone(), Some((g.clone(), i)));
            q.push_back((next, len + 1));
        }
    }
    let Some(mut g) = hit else { return SearchOutcome::NotFoundWithinBudget };
    let mut word = Vec::new();
    while let Some(Some((prev, i))) = parent.get(&g) {
        word.push(*i);
        g = prev.clone();
    }
    word.reverse();
    let check = word.iter().fold(ctx.identity(), |acc, i| ctx.mul(&acc, &gens[*i]));
    assert_eq!(check, *target, "witness word must evaluate to the target");
    SearchOutcome::Found(word)
}

/// All `n` with `|n|_inf <= bound` and `h_1^{n_1} ⋯ h_m^{n_m} = target`.
/// Tuples whose translation parts cannot add up to the target's are
/// skipped before any module arithmetic.
pub fn brute_knapsack(ctx: &GroupContext, factors: &[GroupElement], target: &GroupElement, bound: i64) -> Vec<Vec<i64>> {
    let m = factors.len();
    let n = ctx.n();
    // reach[i][j]: largest |Σ_{l >= i} n_l a_l[j]|
    let mut reach = vec![vec![0i64; n]; m + 1];
    for i in (0..m).rev() {
        for j in 0..n {
            reach[i][j] = reach[i + 1][j] + factors[i].a[j].abs() * bound;
        }
    }
    let mut out = Vec::new();
    let mut x = vec![0i64; m];
    fn rec(i: usize, x: &mut Vec<i64>, partial: &mut Vec<i64>, ctx_: &Ctx, out: &mut Vec<Vec<i64>>) {
        let m = ctx_.factors.len();
        if i == m {
            if partial.iter().zip(&ctx_.target.a).all(|(a, b)| a == b) {
                let g = x.iter().zip(ctx_.factors).fold(ctx_.ctx.identity(), |acc, (k, h)| ctx_.ctx.mul(&acc, &ctx_.ctx.power(h, *k)));
                if g == *ctx_.target {
                    out.push(x.clone());
                }
            }
            return;
        }
        for k in -ctx_.bound..=ctx_.bound {
            let a = &ctx_.factors[i].a;
            let ok = (0..partial.len()).all(|j| (ctx_.target.a[j] - partial[j] - k * a[j]).abs() <= ctx_.reach[i + 1][j]);
            if !ok {
                continue;
            }
            x[i] = k;
            for j in 0..partial.len() {
                partial[j] += k * a[j];
            }
            rec(i + 1, x, partial, ctx_, out);
            for j in 0..partial.len() {
                partial[j] -= k * a[j];
            }
        }
    }
    struct Ctx<'a> {
        ctx: &'a GroupContext,
        factors: &'a [GroupElement],
        target: &'a GroupElement,
        reach: Vec<Vec<i64>>,
        bound: i64,
    }
    let c = Ctx {
        ctx,
        factors,
        target,
        reach,
        bound,
    };
    let mut partial = vec![0i64; n];
    rec(0, &mut x, &mut partial, &c, &mut out);
    out.sort();
    out
}

/// All `x` with `|x|_inf <= bound` solving the S-unit equation, by direct
/// normal-form evaluation.
pub fn brute_sunit(inst: &SUnitInstance, bound: i64) -> Result<Vec<Vec<i64>>, ModError> {
    let gb = ModuleGb::new(&inst.module)?;
    let nx = inst.nx;
    let mut out = Vec::new();
    let mut x = vec![-bound; nx];
    if nx == 0 {
        if inst.holds_in(&gb, &inst.constants, &x)? {
            out.push(Vec::new());
        }
        return Ok(out);
    }
    loop {
        if inst.holds_in(&gb, &inst.constants, &x)? {
            out.push(x.clone());
        }
        let mut i = 0;
        loop {
            if i == nx {
                out.sort();
                return Ok(out);
            }
            if x[i] < bound {
                x[i] += 1;
                break;
            }
            x[i] = -bound;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    Pass,
    /// first disagreement and whether the automaton accepts it
    Fail { point: Vec<i64>, in_automaton: bool },
}

/// Compare an automaton with a baseline set on the box `|z|_inf <= bound`.
pub fn window_compare(automaton: &DigitAutomaton, baseline: &[Vec<i64>], bound: i64) -> Comparison {
    let mut base: Vec<Vec<i64>> = baseline.iter().filter(|z| z.iter().all(|x| x.abs() <= bound)).cloned().collect();
    base.sort();
    base.dedup();
    let got = automaton.enumerate_window(bound);
    let (mut i, mut j) = (0, 0);
    while i < got.len() || j < base.len() {
        match (got.get(i), base.get(j)) {
            (Some(a), Some(b)) if a == b => {
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => {
                return Comparison::Fail {
                    point: a.clone(),
                    in_automaton: true,
                }
            }
            (Some(a), None) => {
                return Comparison::Fail {
                    point: a.clone(),
                    in_automaton: true,
                }
            }
            (_, Some(b)) => {
                return Comparison::Fail {
                    point: b.clone(),
                    in_automaton: false,
                }
            }
            (None, None) => unreachable!(),
        }
    }
    Comparison::Pass
}
