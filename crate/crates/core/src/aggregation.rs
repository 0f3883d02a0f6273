//! Aggregation of several solutions over the same components.
//!
//! The supersolution is the per-component union of chosen DAs. The kernel
//! (subsolution) fixes the components where every solution agrees; the other
//! components stay open and are filled by a budgeted choice over candidate
//! DAs. Compatibility is ignored here, and kernel elements cost nothing and
//! do not enter the reported median.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::choice::{self, ChoiceError, ChoiceInstance, ChoiceSolution};
use crate::estimates::MultisetEstimate;
use crate::synthesis::Selection;

pub const AGGREGATION_JSON: &str = include_str!("../data/aggregation.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AggregationError {
    #[error("no solutions to aggregate")]
    EmptySet,
    #[error("solution {index} covers different components than the first")]
    ComponentMismatch { index: usize },
    #[error("open component {0} has no candidate")]
    MissingCandidate(String),
    #[error("candidate {id} names unknown component {component}")]
    UnknownComponent { component: String, id: String },
    #[error("kernel has no open components")]
    NothingOpen,
    #[error("invalid aggregation document: {0}")]
    Schema(String),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
}

impl AggregationError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::EmptySet => "EmptySet",
            Self::ComponentMismatch { .. } => "ComponentMismatch",
            Self::MissingCandidate(_) => "MissingCandidate",
            Self::UnknownComponent { .. } => "UnknownComponent",
            Self::NothingOpen => "NothingOpen",
            Self::Schema(_) => "SchemaError",
            Self::Choice(e) => e.name(),
        }
    }
}

/// Non-empty list of selections sharing one component set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionSet {
    solutions: Vec<Selection>,
}

impl SolutionSet {
    pub fn new(solutions: Vec<Selection>) -> Result<Self, AggregationError> {
        let first = solutions.first().ok_or(AggregationError::EmptySet)?;
        let keys: BTreeSet<&String> = first.keys().collect();
        for (index, s) in solutions.iter().enumerate().skip(1) {
            if s.keys().collect::<BTreeSet<_>>() != keys {
                return Err(AggregationError::ComponentMismatch { index });
            }
        }
        Ok(Self { solutions })
    }

    pub fn solutions(&self) -> &[Selection] {
        &self.solutions
    }

    /// Component ids in the first solution's order.
    pub fn components(&self) -> impl Iterator<Item = &String> {
        self.solutions[0].keys()
    }
}

pub type Variants = IndexMap<String, BTreeSet<String>>;

/// Per-component union of chosen DAs.
pub fn supersolution(set: &SolutionSet) -> Variants {
    set.components()
        .map(|c| {
            let das = set.solutions.iter().map(|s| s[c].clone()).collect();
            (c.clone(), das)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    /// All components in solution order.
    pub components: Vec<String>,
    pub fixed: IndexMap<String, String>,
    pub open: Variants,
}

/// Splits components into agreed (fixed) and disputed (open).
pub fn subsolution(set: &SolutionSet) -> Kernel {
    let mut kernel = Kernel {
        components: set.components().cloned().collect(),
        fixed: IndexMap::new(),
        open: IndexMap::new(),
    };
    for (c, das) in supersolution(set) {
        if das.len() == 1 {
            kernel.fixed.insert(c, das.into_iter().next().expect("one variant"));
        } else {
            kernel.open.insert(c, das);
        }
    }
    kernel
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Candidate {
    pub component: String,
    pub id: String,
    pub estimate: MultisetEstimate,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedSolution {
    /// Kernel plus chosen open DAs, in kernel component order.
    pub selection: Selection,
    /// Best choice result over the open components.
    pub choice: ChoiceSolution,
    /// Further choice results with incomparable medians.
    pub alternatives: Vec<ChoiceSolution>,
}

/// Fills the kernel's open components by solving a choice instance over the
/// candidates, one group per open component in kernel order.
pub fn extend_kernel(
    kernel: &Kernel,
    candidates: &[Candidate],
    budget: f64,
) -> Result<AggregatedSolution, AggregationError> {
    if kernel.open.is_empty() {
        return Err(AggregationError::NothingOpen);
    }
    if let Some(c) = candidates.iter().find(|c| !kernel.components.contains(&c.component)) {
        return Err(AggregationError::UnknownComponent {
            component: c.component.clone(),
            id: c.id.clone(),
        });
    }
    let groups: Vec<Vec<(String, MultisetEstimate, f64)>> = kernel
        .open
        .keys()
        .map(|comp| {
            let g: Vec<_> = candidates
                .iter()
                .filter(|c| &c.component == comp)
                .map(|c| (c.id.clone(), c.estimate.clone(), c.cost))
                .collect();
            if g.is_empty() {
                Err(AggregationError::MissingCandidate(comp.clone()))
            } else {
                Ok(g)
            }
        })
        .collect::<Result<_, _>>()?;
    let scale = groups[0][0].1.scale();
    let instance = ChoiceInstance::new(scale, budget, groups)?;
    let mut solutions = choice::solve(&instance)?;
    let best = solutions.remove(0);

    let chosen: IndexMap<&String, &String> = kernel.open.keys().zip(&best.selection).collect();
    let selection = kernel
        .components
        .iter()
        .map(|c| {
            let da = kernel
                .fixed
                .get(c)
                .or_else(|| chosen.get(c).copied())
                .expect("kernel covers its components");
            (c.clone(), da.clone())
        })
        .collect();
    Ok(AggregatedSolution {
        selection,
        choice: best,
        alternatives: solutions,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationDocument {
    #[serde(default)]
    pub solutions: Vec<Selection>,
    #[serde(default)]
    pub candidates: Vec<Candidate>,
    #[serde(default)]
    pub budget: Option<f64>,
}

impl AggregationDocument {
    pub fn parse(text: &str) -> Result<Self, AggregationError> {
        serde_json::from_str(text).map_err(|e| AggregationError::Schema(e.to_string()))
    }

    /// Eight solutions `A1..A8` and the twelve open-component candidates.
    pub fn builtin() -> Self {
        Self::parse(AGGREGATION_JSON).expect("bundled aggregation data is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthesis::selection;

    fn e(s: &str) -> MultisetEstimate {
        s.parse().unwrap()
    }

    fn builtin_set() -> (SolutionSet, Vec<Candidate>) {
        let doc = AggregationDocument::builtin();
        (SolutionSet::new(doc.solutions).unwrap(), doc.candidates)
    }

    #[test]
    fn supersolution_of_builtin() {
        let (set, _) = builtin_set();
        let sup = supersolution(&set);
        let render: Vec<String> = sup
            .iter()
            .map(|(c, v)| format!("{c}:{}", v.iter().cloned().collect::<Vec<_>>().join("/")))
            .collect();
        assert_eq!(
            render,
            ["X:X2/X3", "Y:Y2/Y3", "Z:Z2/Z3", "I:I1/I3", "Q:Q1/Q5", "G:G4", "H:H2/H3", "C:C1", "W:W2"]
        );
    }

    #[test]
    fn subsolution_of_builtin() {
        let (set, _) = builtin_set();
        let k = subsolution(&set);
        let fixed: Vec<&str> = k.fixed.values().map(String::as_str).collect();
        assert_eq!(fixed, ["G4", "C1", "W2"]);
        assert_eq!(k.open.len(), 6);
        assert!(k.open.values().all(|v| v.len() == 2));
    }

    #[test]
    fn trivial_sets() {
        let one = SolutionSet::new(vec![selection([("P", "P1"), ("R", "R2")])]).unwrap();
        let k = subsolution(&one);
        assert_eq!(k.fixed.len(), 2);
        assert!(k.open.is_empty());
        let two = SolutionSet::new(vec![selection([("P", "P1")]), selection([("P", "P2")])]).unwrap();
        assert_eq!(supersolution(&two)["P"].len(), 2);
        assert_eq!(subsolution(&two).open.len(), 1);
        assert_eq!(SolutionSet::new(vec![]).unwrap_err(), AggregationError::EmptySet);
        let bad = SolutionSet::new(vec![selection([("P", "P1")]), selection([("R", "R1")])]);
        assert_eq!(bad.unwrap_err().name(), "ComponentMismatch");
    }

    #[test]
    fn bundled_budgets() {
        let (set, cands) = builtin_set();
        let k = subsolution(&set);
        let ids = |a: &AggregatedSolution| a.choice.selection.join("");

        let a = extend_kernel(&k, &cands, 42.0).unwrap();
        assert_eq!(ids(&a), "X3Y3Z3I1Q1H3");
        assert_eq!((a.choice.total_cost, a.choice.median.clone()), (38.0, e("(0,2,1,0)")));

        let a = extend_kernel(&k, &cands, 53.0).unwrap();
        assert_eq!(ids(&a), "X2Y2Z3I1Q1H3");
        assert_eq!(a.choice.total_cost, 53.0);
        assert!(a.choice.median_ties.contains(&e("(1,2,0,0)")));
        assert!(a.choice.median_ties.contains(&e("(2,1,0,0)")));

        let a = extend_kernel(&k, &cands, 87.0).unwrap();
        assert_eq!(ids(&a), "X2Y2Z2I3Q5H2");
        assert_eq!((a.choice.total_cost, a.choice.median.clone()), (87.0, e("(2,1,0,0)")));
        let order: Vec<&str> = a.selection.keys().map(String::as_str).collect();
        assert_eq!(order, ["X", "Y", "Z", "I", "Q", "G", "H", "C", "W"]);
        assert_eq!(a.selection["G"], "G4");
    }

    #[test]
    fn missing_and_unknown_candidates() {
        let (set, cands) = builtin_set();
        let k = subsolution(&set);
        let no_h: Vec<Candidate> = cands.iter().filter(|c| c.component != "H").cloned().collect();
        assert_eq!(
            extend_kernel(&k, &no_h, 100.0).unwrap_err(),
            AggregationError::MissingCandidate("H".into())
        );
        let mut extra = cands.clone();
        extra.push(Candidate {
            component: "Nope".into(),
            id: "N1".into(),
            estimate: e("(3,0,0,0)"),
            cost: 0.0,
        });
        assert_eq!(extend_kernel(&k, &extra, 100.0).unwrap_err().name(), "UnknownComponent");
        assert_eq!(extend_kernel(&k, &cands, 1.0).unwrap_err().name(), "Infeasible");
    }
}
