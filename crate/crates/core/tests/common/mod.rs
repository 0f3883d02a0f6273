//! Independent oracles. Everything here works on plain count vectors and
//! brute force, sharing no code with the library beyond type conversions.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};

use itertools::Itertools;
use morphsynth::estimates::{MultisetEstimate, Scale};
use rand::Rng;

pub type Counts = Vec<u32>;

/// Every count vector of length `l` summing to `eta`.
pub fn all_multisets(l: usize, eta: u32) -> Vec<Counts> {
    fn rec(l: usize, left: u32, cur: &mut Counts, out: &mut Vec<Counts>) {
        if cur.len() == l - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(l, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(l, eta, &mut Vec::new(), &mut out);
    out
}

pub fn is_interval(c: &[u32]) -> bool {
    let nz: Vec<usize> = c.iter().positions(|&x| x > 0).collect();
    match (nz.first(), nz.last()) {
        (Some(&a), Some(&b)) => b - a + 1 == nz.len(),
        _ => false,
    }
}

/// Brute-force interval scale.
pub fn interval_scale(l: usize, eta: u32) -> Vec<Counts> {
    all_multisets(l, eta).into_iter().filter(|c| is_interval(c)).collect()
}

/// Neighbours by moving one element one level; `(target, is_improvement)`.
fn moves(c: &[u32]) -> Vec<(Counts, bool)> {
    let mut out = Vec::new();
    for k in 0..c.len() {
        if c[k] == 0 {
            continue;
        }
        if k > 0 {
            let mut n = c.to_vec();
            n[k] -= 1;
            n[k - 1] += 1;
            out.push((n, true));
        }
        if k + 1 < c.len() {
            let mut n = c.to_vec();
            n[k] -= 1;
            n[k + 1] += 1;
            out.push((n, false));
        }
    }
    out
}

/// Shortest number of one-level single-element moves from `a` to `b`.
pub fn bfs_distance(a: &[u32], b: &[u32]) -> u64 {
    let mut seen: HashMap<Counts, u64> = HashMap::from([(a.to_vec(), 0)]);
    let mut queue = VecDeque::from([a.to_vec()]);
    while let Some(c) = queue.pop_front() {
        let d = seen[&c];
        if c == b {
            return d;
        }
        for (n, _) in moves(&c) {
            if !seen.contains_key(&n) {
                seen.insert(n.clone(), d + 1);
                queue.push_back(n);
            }
        }
    }
    unreachable!("same cardinality is always connected")
}

/// Can `a` be turned into `b` using improvement moves only?
pub fn reachable_by_improvements(a: &[u32], b: &[u32]) -> bool {
    let mut seen = HashSet::from([a.to_vec()]);
    let mut stack = vec![a.to_vec()];
    while let Some(c) = stack.pop() {
        if c == b {
            return true;
        }
        for (n, up) in moves(&c) {
            if up && seen.insert(n.clone()) {
                stack.push(n);
            }
        }
    }
    false
}

/// Path-free distance: sum over element ranks of level differences.
pub fn rank_distance(a: &[u32], b: &[u32]) -> u64 {
    let expand = |c: &[u32]| -> Vec<i64> {
        c.iter()
            .enumerate()
            .flat_map(|(lvl, &n)| std::iter::repeat_n(lvl as i64, n as usize))
            .collect()
    };
    expand(a)
        .iter()
        .zip(expand(b))
        .map(|(x, y)| (x - y).unsigned_abs())
        .sum()
}

/// `a` at least as good as `b` on every rank.
pub fn weakly_better(a: &[u32], b: &[u32]) -> bool {
    reachable_by_improvements(b, a)
}

pub struct OracleMedian {
    pub medians: Vec<Counts>,
    pub deviation: u64,
}

/// Exhaustive minimisation over `candidates`.
pub fn median_over(candidates: &[Counts], inputs: &[Counts]) -> OracleMedian {
    let cost: Vec<u64> = candidates
        .iter()
        .map(|c| inputs.iter().map(|e| rank_distance(c, e)).sum())
        .collect();
    let best = *cost.iter().min().expect("non-empty");
    OracleMedian {
        medians: candidates
            .iter()
            .zip(&cost)
            .filter(|(_, &c)| c == best)
            .map(|(m, _)| m.clone())
            .collect(),
        deviation: best,
    }
}

/// Tie representative: maximal under the poset, then largest cumulative profile.
pub fn representative(ties: &[Counts]) -> Counts {
    let strictly = |a: &Counts, b: &Counts| a != b && rank_better_eq(a, b);
    let maximal: Vec<&Counts> = ties.iter().filter(|t| !ties.iter().any(|o| strictly(o, t))).collect();
    maximal
        .into_iter()
        .max_by_key(|c| cumulative(c))
        .expect("non-empty")
        .clone()
}

fn cumulative(c: &[u32]) -> Vec<u32> {
    c.iter()
        .scan(0, |s, &x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

/// Elementwise rank comparison, equivalent to improvement reachability.
pub fn rank_better_eq(a: &[u32], b: &[u32]) -> bool {
    cumulative(a).iter().zip(cumulative(b)).all(|(x, y)| *x >= y)
}

pub fn counts(e: &MultisetEstimate) -> Counts {
    e.counts().to_vec()
}

pub fn est(c: &[u32]) -> MultisetEstimate {
    MultisetEstimate::from_counts(c.to_vec()).expect("valid counts")
}

pub fn random_interval<R: Rng>(rng: &mut R, scale: &[Counts]) -> Counts {
    scale[rng.random_range(0..scale.len())].clone()
}

pub fn p43() -> Scale {
    Scale::new(4, 3).unwrap()
}

/// One oracle result of the choice problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleChoice {
    pub ids: Vec<String>,
    pub cost: f64,
    pub median: Counts,
    pub deviation: u64,
}

/// Brute force over every selection; best selection per poset-maximal
/// representative median under (higher cost, lower deviation, sorted ids).
pub fn choice_oracle(scale: &[Counts], groups: &[Vec<(String, Counts, f64)>], budget: f64) -> Vec<OracleChoice> {
    let mut all = Vec::new();
    for pick in groups.iter().map(|g| 0..g.len()).multi_cartesian_product() {
        let items: Vec<&(String, Counts, f64)> = pick.iter().zip(groups).map(|(&j, g)| &g[j]).collect();
        let cost: f64 = items.iter().map(|i| i.2).sum();
        if cost > budget + 1e-9 {
            continue;
        }
        let inputs: Vec<Counts> = items.iter().map(|i| i.1.clone()).collect();
        let m = median_over(scale, &inputs);
        all.push(OracleChoice {
            ids: items.iter().map(|i| i.0.clone()).collect(),
            cost,
            median: representative(&m.medians),
            deviation: m.deviation,
        });
    }
    let better = |a: &OracleChoice, b: &OracleChoice| -> bool {
        if (a.cost - b.cost).abs() > 1e-9 {
            return a.cost > b.cost;
        }
        if a.deviation != b.deviation {
            return a.deviation < b.deviation;
        }
        a.ids.iter().sorted().collect_vec() < b.ids.iter().sorted().collect_vec()
    };
    let mut best: Vec<OracleChoice> = Vec::new();
    for c in all {
        match best.iter_mut().find(|b| b.median == c.median) {
            Some(b) if better(&c, b) => *b = c,
            Some(_) => {}
            None => best.push(c),
        }
    }
    let snapshot = best.clone();
    best.retain(|b| {
        !snapshot
            .iter()
            .any(|o| o.median != b.median && rank_better_eq(&o.median, &b.median))
    });
    best
}

/// Flat O(n^2) Pareto front of a composite whose parts are leaves:
/// `(alternative ids, w, representative median)`.
pub fn flat_front(model: &morphsynth::model::MorphModel, composite: &str) -> Vec<(Vec<String>, u32, Counts)> {
    let scale = interval_scale(model.scale().levels(), model.scale().cardinality() as u32);
    let parts: Vec<&morphsynth::model::Component> = model
        .component(composite)
        .expect("composite")
        .children
        .iter()
        .map(|c| model.component(c).expect("part"))
        .collect();
    let mut scored = Vec::new();
    for pick in parts.iter().map(|p| p.alternatives.iter()).multi_cartesian_product() {
        let mut w = model.nu();
        for (a, b) in pick.iter().tuple_combinations() {
            w = w.min(model.compatibility(&a.id, &b.id).unwrap_or(model.nu()));
        }
        if w == 0 {
            continue;
        }
        let inputs: Vec<Counts> = pick.iter().map(|a| counts(&a.estimate)).collect();
        let m = median_over(&scale, &inputs);
        scored.push((
            pick.iter().map(|a| a.id.clone()).collect::<Vec<_>>(),
            w,
            representative(&m.medians),
        ));
    }
    let dominated = |x: &(Vec<String>, u32, Counts), y: &(Vec<String>, u32, Counts)| {
        y.1 >= x.1 && rank_better_eq(&y.2, &x.2) && (y.1 > x.1 || y.2 != x.2)
    };
    scored
        .iter()
        .filter(|x| !scored.iter().any(|y| dominated(x, y)))
        .cloned()
        .collect()
}
