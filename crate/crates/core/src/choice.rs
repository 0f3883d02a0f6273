//! Multiple-choice selection under a budget with a multiset-estimate objective.
//!
//! Exactly one item is taken from every group, the total cost must stay
//! within the budget, and the selection is judged by the generalized median
//! of the chosen estimates. Ranking chain, best first:
//!
//! 1. median, poset-maximal wins (incomparable medians are all reported);
//! 2. higher total cost, i.e. the budget is spent rather than left idle;
//! 3. lower median deviation;
//! 4. lexicographically smaller sorted item ids.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimates::{representative, strictly_dominates, EstimateError, MedianSolver, MultisetEstimate, Scale};

/// Costs closer than this are equal.
pub const COST_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChoiceError {
    #[error("cheapest selection costs {cheapest} which exceeds the budget {budget}")]
    Infeasible { cheapest: f64, budget: f64 },
    #[error("group {0} has no items")]
    EmptyGroup(usize),
    #[error("instance has no groups")]
    NoGroups,
    #[error("item {item}: estimate is on {found}, instance scale is {expected}")]
    ScaleMismatch {
        item: String,
        expected: Scale,
        found: Scale,
    },
    #[error("invalid cost or budget {value} for {subject}")]
    InvalidCost { subject: String, value: f64 },
    #[error("duplicate item id {0}")]
    DuplicateItem(String),
    #[error("invalid instance document: {0}")]
    Schema(String),
    #[error(transparent)]
    Estimate(#[from] EstimateError),
}

impl ChoiceError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Infeasible { .. } => "Infeasible",
            Self::EmptyGroup(_) => "EmptyGroup",
            Self::NoGroups => "NoGroups",
            Self::ScaleMismatch { .. } => "ScaleMismatch",
            Self::InvalidCost { .. } => "InvalidCost",
            Self::DuplicateItem(_) => "DuplicateItem",
            Self::Schema(_) => "SchemaError",
            Self::Estimate(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceItem {
    pub id: String,
    /// 0-based group position.
    pub group: usize,
    /// 0-based position within the group.
    pub index: usize,
    pub estimate: MultisetEstimate,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItemDocument {
    pub id: String,
    pub estimate: MultisetEstimate,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub scale: Scale,
    pub budget: f64,
    pub groups: Vec<Vec<ItemDocument>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceInstance {
    scale: Scale,
    budget: f64,
    groups: Vec<Vec<ChoiceItem>>,
}

fn check_cost(subject: &str, value: f64) -> Result<(), ChoiceError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ChoiceError::InvalidCost {
            subject: subject.to_string(),
            value,
        })
    }
}

impl ChoiceInstance {
    /// Validates and indexes `(id, estimate, cost)` groups.
    pub fn new(
        scale: Scale,
        budget: f64,
        groups: Vec<Vec<(String, MultisetEstimate, f64)>>,
    ) -> Result<Self, ChoiceError> {
        check_cost("budget", budget)?;
        if groups.is_empty() {
            return Err(ChoiceError::NoGroups);
        }
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(groups.len());
        for (g, items) in groups.into_iter().enumerate() {
            if items.is_empty() {
                return Err(ChoiceError::EmptyGroup(g));
            }
            let mut group = Vec::with_capacity(items.len());
            for (j, (id, estimate, cost)) in items.into_iter().enumerate() {
                if estimate.scale() != scale {
                    return Err(ChoiceError::ScaleMismatch {
                        item: id,
                        expected: scale,
                        found: estimate.scale(),
                    });
                }
                check_cost(&id, cost)?;
                if !seen.insert(id.clone()) {
                    return Err(ChoiceError::DuplicateItem(id));
                }
                group.push(ChoiceItem {
                    id,
                    group: g,
                    index: j,
                    estimate,
                    cost,
                });
            }
            out.push(group);
        }
        Ok(Self {
            scale,
            budget,
            groups: out,
        })
    }

    pub fn from_document(doc: InstanceDocument) -> Result<Self, ChoiceError> {
        let groups = doc
            .groups
            .into_iter()
            .map(|g| g.into_iter().map(|i| (i.id, i.estimate, i.cost)).collect())
            .collect();
        Self::new(doc.scale, doc.budget, groups)
    }

    pub fn parse(text: &str) -> Result<Self, ChoiceError> {
        let doc: InstanceDocument = serde_json::from_str(text).map_err(|e| ChoiceError::Schema(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            scale: self.scale,
            budget: self.budget,
            groups: self
                .groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|i| ItemDocument {
                            id: i.id.clone(),
                            estimate: i.estimate.clone(),
                            cost: i.cost,
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn groups(&self) -> &[Vec<ChoiceItem>] {
        &self.groups
    }

    /// Same items under another budget.
    pub fn with_budget(&self, budget: f64) -> Result<Self, ChoiceError> {
        check_cost("budget", budget)?;
        Ok(Self { budget, ..self.clone() })
    }

    /// Number of selections ignoring the budget.
    pub fn selection_count(&self) -> u128 {
        self.groups.iter().map(|g| g.len() as u128).product()
    }

    pub fn cheapest_cost(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.iter().map(|i| i.cost).fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Scores one item index per group; does not check the budget.
    pub fn evaluate(&self, indices: &[usize]) -> ChoiceSolution {
        assert_eq!(indices.len(), self.groups.len(), "one index per group");
        let items: Vec<&ChoiceItem> = indices.iter().zip(&self.groups).map(|(&j, g)| &g[j]).collect();
        let median = MedianSolver::new(self.scale).median(items.iter().map(|i| &i.estimate));
        ChoiceSolution {
            selection: items.iter().map(|i| i.id.clone()).collect(),
            indices: indices.to_vec(),
            total_cost: items.iter().map(|i| i.cost).sum(),
            median: median.representative().clone(),
            median_ties: median.medians,
            deviation: median.deviation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChoiceSolution {
    /// Chosen item ids in group order.
    pub selection: Vec<String>,
    /// Chosen item positions in group order.
    pub indices: Vec<usize>,
    pub total_cost: f64,
    pub median: MultisetEstimate,
    pub median_ties: Vec<MultisetEstimate>,
    pub deviation: u64,
}

impl ChoiceSolution {
    fn sorted_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.selection.iter().map(String::as_str).collect();
        ids.sort_unstable();
        ids
    }
}

/// Chain order after the median key.
fn rank_tail(a: &ChoiceSolution, b: &ChoiceSolution) -> Ordering {
    cost_order(a.total_cost, b.total_cost)
        .then(a.deviation.cmp(&b.deviation))
        .then_with(|| a.sorted_ids().cmp(&b.sorted_ids()))
}

/// Higher cost first, with tolerance.
fn cost_order(a: f64, b: f64) -> Ordering {
    if (a - b).abs() <= COST_EPSILON {
        Ordering::Equal
    } else if a > b {
        Ordering::Less
    } else {
        Ordering::Greater
    }
}

/// `Less` when `a` ranks ahead of `b`. Poset-incomparable medians tie on the
/// first key, so this is a preorder only where medians form a chain.
pub fn rank_selection(a: &ChoiceSolution, b: &ChoiceSolution) -> Ordering {
    if a.median != b.median {
        if strictly_dominates(&a.median, &b.median) {
            return Ordering::Less;
        }
        if strictly_dominates(&b.median, &a.median) {
            return Ordering::Greater;
        }
    }
    rank_tail(a, b)
}

/// Exhaustive depth-first search with cost pruning. Returns the best
/// selection for every poset-maximal median reachable within the budget,
/// ordered by the remaining keys of the chain.
pub fn solve(instance: &ChoiceInstance) -> Result<Vec<ChoiceSolution>, ChoiceError> {
    let cheapest = instance.cheapest_cost();
    if cheapest > instance.budget + COST_EPSILON {
        return Err(ChoiceError::Infeasible {
            cheapest,
            budget: instance.budget,
        });
    }
    let solver = MedianSolver::new(instance.scale);
    let distances: Vec<Vec<Vec<u64>>> = instance
        .groups
        .iter()
        .map(|g| g.iter().map(|i| solver.distances_to(&i.estimate)).collect())
        .collect();
    // min_rest[g] = cheapest completion of groups g..
    let mut min_rest = vec![0.0; instance.groups.len() + 1];
    for g in (0..instance.groups.len()).rev() {
        let m = instance.groups[g].iter().map(|i| i.cost).fold(f64::INFINITY, f64::min);
        min_rest[g] = min_rest[g + 1] + m;
    }
    let mut search = Search {
        instance,
        solver: &solver,
        distances: &distances,
        min_rest: &min_rest,
        best: HashMap::new(),
        path: Vec::with_capacity(instance.groups.len()),
    };
    let width = solver.candidates().len();
    search.extend(0.0, vec![0; width]);

    let found: Vec<ChoiceSolution> = search.best.into_values().collect();
    let mut maximal: Vec<ChoiceSolution> = found
        .iter()
        .filter(|s| !found.iter().any(|o| strictly_dominates(&o.median, &s.median)))
        .cloned()
        .collect();
    maximal.sort_by(|a, b| rank_tail(a, b).then_with(|| b.median.profile().cmp(&a.median.profile())));
    Ok(maximal)
}

/// Convenience: the first solution of [`solve`].
pub fn solve_best(instance: &ChoiceInstance) -> Result<ChoiceSolution, ChoiceError> {
    Ok(solve(instance)?.swap_remove(0))
}

struct Search<'a> {
    instance: &'a ChoiceInstance,
    solver: &'a MedianSolver,
    distances: &'a [Vec<Vec<u64>>],
    min_rest: &'a [f64],
    /// Best selection per representative median.
    best: HashMap<MultisetEstimate, ChoiceSolution>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn extend(&mut self, cost: f64, sums: Vec<u64>) {
        let depth = self.path.len();
        let groups = &self.instance.groups;
        if depth == groups.len() {
            self.record(cost, &sums);
            return;
        }
        for (j, item) in groups[depth].iter().enumerate() {
            let next_cost = cost + item.cost;
            if next_cost + self.min_rest[depth + 1] > self.instance.budget + COST_EPSILON {
                continue;
            }
            let next: Vec<u64> = sums.iter().zip(&self.distances[depth][j]).map(|(s, d)| s + d).collect();
            self.path.push(j);
            self.extend(next_cost, next);
            self.path.pop();
        }
    }

    fn record(&mut self, cost: f64, sums: &[u64]) {
        let median = self.solver.median_from_sums(sums);
        let rep = representative(&median.medians).clone();
        let candidate = ChoiceSolution {
            selection: self
                .path
                .iter()
                .zip(&self.instance.groups)
                .map(|(&j, g)| g[j].id.clone())
                .collect(),
            indices: self.path.clone(),
            total_cost: cost,
            median: rep.clone(),
            median_ties: median.medians,
            deviation: median.deviation,
        };
        match self.best.get(&rep) {
            Some(current) if rank_tail(&candidate, current) != Ordering::Less => {}
            _ => {
                self.best.insert(rep, candidate);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> MultisetEstimate {
        s.parse().unwrap()
    }

    fn p43() -> Scale {
        Scale::new(4, 3).unwrap()
    }

    fn f2_instance(budget: f64) -> ChoiceInstance {
        let g = |items: &[(&str, &str, f64)]| {
            items
                .iter()
                .map(|(id, est, c)| (id.to_string(), e(est), *c))
                .collect::<Vec<_>>()
        };
        ChoiceInstance::new(
            p43(),
            budget,
            vec![
                g(&[("y11", "(2,1,0,0)", 0.0), ("y12", "(3,0,0,0)", 17.0)]),
                g(&[("y21", "(2,1,0,0)", 0.0), ("y22", "(3,0,0,0)", 15.0)]),
                g(&[
                    ("y31", "(0,2,1,0)", 0.0),
                    ("y32", "(0,3,0,0)", 1.0),
                    ("y33", "(1,2,0,0)", 7.0),
                    ("y34", "(2,1,0,0)", 13.0),
                    ("y35", "(3,0,0,0)", 22.0),
                ]),
            ],
        )
        .unwrap()
    }

    fn solution(median: &str, cost: f64, deviation: u64, ids: &[&str]) -> ChoiceSolution {
        ChoiceSolution {
            selection: ids.iter().map(|s| s.to_string()).collect(),
            indices: vec![0; ids.len()],
            total_cost: cost,
            median: e(median),
            median_ties: vec![e(median)],
            deviation,
        }
    }

    #[test]
    fn f2_budgets() {
        let best = solve_best(&f2_instance(1.0)).unwrap();
        assert_eq!(best.selection, ["y11", "y21", "y32"]);
        assert_eq!(best.median, e("(2,1,0,0)"));
        assert_eq!(best.deviation, 2);

        let best = solve_best(&f2_instance(45.0)).unwrap();
        assert_eq!(best.selection, ["y12", "y22", "y34"]);
        assert_eq!(best.total_cost, 45.0);
        assert_eq!(best.median, e("(3,0,0,0)"));

        let best = solve_best(&f2_instance(0.0)).unwrap();
        assert_eq!(best.selection, ["y11", "y21", "y31"]);
    }

    #[test]
    fn rank_examples() {
        let a = solution("(3,0,0,0)", 0.0, 9, &["a"]);
        let b = solution("(2,1,0,0)", 0.0, 0, &["b"]);
        assert_eq!(rank_selection(&a, &b), Ordering::Less);
        assert_eq!(rank_selection(&b, &a), Ordering::Greater);

        let a = solution("(2,1,0,0)", 1.0, 2, &["y11", "y21", "y32"]);
        let b = solution("(2,1,0,0)", 1.0, 3, &["y11", "y21", "y31"]);
        assert_eq!(rank_selection(&a, &b), Ordering::Less);

        // spending more of the budget wins before deviation is consulted
        let a = solution("(3,0,0,0)", 45.0, 1, &["y12", "y22", "y34"]);
        let b = solution("(3,0,0,0)", 33.0, 3, &["y12", "y22", "y32"]);
        assert_eq!(rank_selection(&a, &b), Ordering::Less);

        let a = solution("(0,3,0,0)", 5.0, 1, &["p"]);
        let b = solution("(1,1,1,0)", 5.0, 1, &["q"]);
        assert_eq!(rank_selection(&a, &b), Ordering::Less);
        assert_eq!(rank_selection(&a, &a), Ordering::Equal);
    }

    #[test]
    fn errors() {
        let inst = f2_instance(0.0);
        let mut doc = inst.to_document();
        doc.groups[0][0].cost = 3.0;
        doc.groups[0][1].cost = 4.0;
        let inst = ChoiceInstance::from_document(doc).unwrap();
        assert!(matches!(solve(&inst), Err(ChoiceError::Infeasible { .. })));

        let err = ChoiceInstance::new(p43(), 1.0, vec![vec![]]).unwrap_err();
        assert_eq!(err.name(), "EmptyGroup");
        let err = ChoiceInstance::new(p43(), -1.0, vec![vec![("a".into(), e("(3,0,0,0)"), 0.0)]]).unwrap_err();
        assert_eq!(err.name(), "InvalidCost");
        let other = MultisetEstimate::from_counts(vec![1, 1, 0]).unwrap();
        let err = ChoiceInstance::new(p43(), 1.0, vec![vec![("a".into(), other, 0.0)]]).unwrap_err();
        assert_eq!(err.name(), "ScaleMismatch");
        let dup = vec![
            vec![("a".to_string(), e("(3,0,0,0)"), 0.0)],
            vec![("a".to_string(), e("(3,0,0,0)"), 0.0)],
        ];
        assert_eq!(
            ChoiceInstance::new(p43(), 1.0, dup).unwrap_err().name(),
            "DuplicateItem"
        );
    }

    #[test]
    fn incomparable_maxima_all_reported() {
        let inst = ChoiceInstance::new(
            p43(),
            10.0,
            vec![vec![
                ("p".to_string(), e("(0,3,0,0)"), 1.0),
                ("q".to_string(), e("(1,1,1,0)"), 2.0),
                ("r".to_string(), e("(0,2,1,0)"), 0.0),
            ]],
        )
        .unwrap();
        let out = solve(&inst).unwrap();
        let ids: Vec<&str> = out.iter().map(|s| s.selection[0].as_str()).collect();
        assert_eq!(ids, ["q", "p"]);
    }

    #[test]
    fn document_round_trip() {
        let inst = f2_instance(45.0);
        let text = serde_json::to_string(&inst.to_document()).unwrap();
        assert_eq!(ChoiceInstance::parse(&text).unwrap(), inst);
        assert_eq!(inst.selection_count(), 20);
        assert!(ChoiceInstance::parse("{\"scale\":{\"l\":4,\"eta\":3}}").is_err());
    }

    #[test]
    fn evaluate_matches_solve() {
        let inst = f2_instance(45.0);
        let best = solve_best(&inst).unwrap();
        assert_eq!(inst.evaluate(&best.indices), best);
    }
}
