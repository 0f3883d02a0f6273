//! Bottlenecks of a composite solution and budgeted improvement by elements.
//!
//! Improvement plans only touch element estimates. Compatibility bottlenecks
//! are reported but never planned, since the objective is the median of
//! element estimates and cannot see `w`.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::choice::{self, ChoiceError, ChoiceInstance, ChoiceSolution};
use crate::estimates::{proximity, MultisetEstimate};
use crate::model::MorphModel;
use crate::synthesis::{Catalog, CompositeSolution, Selection, SynthesisError};

pub const F2_IMPROVEMENT_JSON: &str = include_str!("../data/f2_improvement.json");

/// Id prefix of the implicit zero-cost item for elements without actions.
pub const KEEP_PREFIX: &str = "keep:";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImprovementError {
    #[error("unknown improvement target {0}")]
    UnknownTarget(String),
    #[error("more than one action group targets {0}")]
    DuplicateTarget(String),
    #[error("invalid solution reference {reference:?}: {detail}")]
    InvalidSolution { reference: String, detail: String },
    #[error("invalid actions document: {0}")]
    Schema(String),
    #[error(transparent)]
    Choice(#[from] ChoiceError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

impl ImprovementError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UnknownTarget(_) => "UnknownTarget",
            Self::DuplicateTarget(_) => "DuplicateTarget",
            Self::InvalidSolution { .. } => "InvalidSolution",
            Self::Schema(_) => "SchemaError",
            Self::Choice(e) => e.name(),
            Self::Synthesis(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BottleneckKind {
    Element,
    Compatibility,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BottleneckValue {
    Estimate(MultisetEstimate),
    Compatibility(u32),
}

impl std::fmt::Display for BottleneckValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Estimate(e) => write!(f, "{e}"),
            Self::Compatibility(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bottleneck {
    pub kind: BottleneckKind,
    /// One DA id for elements, a pair for compatibility.
    pub subject: Vec<String>,
    pub current: BottleneckValue,
    pub proposed: BottleneckValue,
}

impl Bottleneck {
    /// `W2` or `(H2,W2)`.
    pub fn subject_label(&self) -> String {
        match self.kind {
            BottleneckKind::Element => self.subject.join(","),
            BottleneckKind::Compatibility => format!("({})", self.subject.join(",")),
        }
    }
}

/// Every non-ideal selected DA (largest distance to ideal first), then every
/// selected pair below `nu` (smallest `w` first). Ties keep selection order.
pub fn find_bottlenecks(model: &MorphModel, solution: &CompositeSolution) -> Result<Vec<Bottleneck>, ImprovementError> {
    let catalog = Catalog::new(model);
    let ideal = model.scale().ideal();
    let ids: Vec<&String> = solution.selection.values().collect();
    let mut elements = Vec::new();
    for id in &ids {
        let est = catalog
            .estimate(id)
            .ok_or_else(|| ImprovementError::UnknownTarget(id.to_string()))?;
        if est.is_ideal() {
            continue;
        }
        let gap = proximity(est, &ideal).map_err(ChoiceError::from)?.magnitude();
        elements.push((
            gap,
            Bottleneck {
                kind: BottleneckKind::Element,
                subject: vec![id.to_string()],
                current: BottleneckValue::Estimate(est.clone()),
                proposed: BottleneckValue::Estimate(ideal.clone()),
            },
        ));
    }
    elements.sort_by_key(|e| std::cmp::Reverse(e.0));

    let mut pairs = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let w = catalog.compatibility(a, b);
            if w < model.nu() {
                pairs.push((
                    w,
                    Bottleneck {
                        kind: BottleneckKind::Compatibility,
                        subject: vec![a.to_string(), b.to_string()],
                        current: BottleneckValue::Compatibility(w),
                        proposed: BottleneckValue::Compatibility(model.nu()),
                    },
                ));
            }
        }
    }
    pairs.sort_by_key(|p| p.0);
    Ok(elements
        .into_iter()
        .map(|(_, b)| b)
        .chain(pairs.into_iter().map(|(_, b)| b))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementAction {
    pub id: String,
    pub target: String,
    pub new_estimate: MultisetEstimate,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDocument {
    pub id: String,
    pub estimate: MultisetEstimate,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionGroupDocument {
    pub target: String,
    pub actions: Vec<ActionDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsDocument {
    /// Selected DA ids joined by `*` or `,`.
    pub solution_ref: String,
    pub groups: Vec<ActionGroupDocument>,
    pub budget: f64,
}

impl ActionsDocument {
    pub fn parse(text: &str) -> Result<Self, ImprovementError> {
        serde_json::from_str(text).map_err(|e| ImprovementError::Schema(e.to_string()))
    }

    /// Bundled actions for `H3*C1*W2`.
    pub fn builtin() -> Self {
        Self::parse(F2_IMPROVEMENT_JSON).expect("bundled actions are valid")
    }

    pub fn actions(&self) -> Vec<ImprovementAction> {
        self.groups
            .iter()
            .flat_map(|g| {
                g.actions.iter().map(|a| ImprovementAction {
                    id: a.id.clone(),
                    target: g.target.clone(),
                    new_estimate: a.estimate.clone(),
                    cost: a.cost,
                })
            })
            .collect()
    }
}

/// Resolves `"H3*C1*W2"` to the composite whose parts the ids fill exactly.
pub fn resolve_solution_ref(model: &MorphModel, reference: &str) -> Result<(String, Selection), ImprovementError> {
    let invalid = |detail: String| ImprovementError::InvalidSolution {
        reference: reference.to_string(),
        detail,
    };
    let ids: Vec<&str> = reference
        .split(['*', ','])
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    let first = ids.first().ok_or_else(|| invalid("no alternatives".into()))?;
    let mut owners = Vec::with_capacity(ids.len());
    for id in &ids {
        let alt = model
            .alternative(id)
            .ok_or_else(|| invalid(format!("{id} is not a leaf alternative")))?;
        owners.push(alt.component.as_str());
    }
    let parent = model
        .component(owners[0])
        .and_then(|c| c.parent.clone())
        .ok_or_else(|| invalid(format!("{first} has no enclosing composite")))?;
    let parts = &model.component(&parent).expect("parent exists").children;
    let mut selection = Selection::new();
    for part in parts {
        let pos = owners
            .iter()
            .position(|o| o == part)
            .ok_or_else(|| invalid(format!("no alternative for part {part} of {parent}")))?;
        selection.insert(part.clone(), ids[pos].to_string());
    }
    if selection.len() != ids.len() {
        return Err(invalid(format!("alternatives do not form one selection for {parent}")));
    }
    Ok((parent, selection))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImprovementPlan {
    pub composite: String,
    pub budget: f64,
    pub before: CompositeSolution,
    pub after: CompositeSolution,
    pub choice: ChoiceSolution,
    /// Chosen actions, implicit keep items excluded.
    pub applied: Vec<ImprovementAction>,
    /// Post-action estimate of every selected element.
    pub estimates: IndexMap<String, MultisetEstimate>,
}

/// Builds one choice group per selected element (its actions, or a single
/// zero-cost keep item), solves it, and rescores the improved solution.
pub fn plan_improvement(
    model: &MorphModel,
    composite: &str,
    selection: &Selection,
    actions: &[ImprovementAction],
    budget: f64,
) -> Result<ImprovementPlan, ImprovementError> {
    let catalog = Catalog::new(model);
    let before = catalog.score(composite, selection)?;
    let mut by_target: IndexMap<&str, Vec<&ImprovementAction>> = IndexMap::new();
    for a in actions {
        if !selection.values().any(|v| v == &a.target) {
            return Err(ImprovementError::UnknownTarget(a.target.clone()));
        }
        by_target.entry(a.target.as_str()).or_default().push(a);
    }
    // action groups first, in document order, then untouched elements
    let mut order: Vec<&String> = by_target
        .keys()
        .map(|t| selection.values().find(|v| v == t).expect("checked above"))
        .collect();
    order.extend(selection.values().filter(|v| !by_target.contains_key(v.as_str())));
    let mut groups = Vec::with_capacity(order.len());
    for id in &order {
        let current = catalog.estimate(id).expect("scored selection resolves").clone();
        let group = match by_target.get(id.as_str()) {
            Some(items) => items
                .iter()
                .map(|a| (a.id.clone(), a.new_estimate.clone(), a.cost))
                .collect(),
            None => vec![(format!("{KEEP_PREFIX}{id}"), current, 0.0)],
        };
        groups.push(group);
    }
    let instance = ChoiceInstance::new(model.scale(), budget, groups)?;
    let choice = choice::solve_best(&instance)?;

    let mut applied = Vec::new();
    let mut chosen = IndexMap::new();
    for ((g, &j), id) in instance.groups().iter().zip(&choice.indices).zip(&order) {
        chosen.insert(id.as_str(), g[j].estimate.clone());
        if let Some(a) = by_target.get(id.as_str()).map(|v| v[j]) {
            applied.push(a.clone());
        }
    }
    let estimates = selection
        .values()
        .map(|id| (id.clone(), chosen[id.as_str()].clone()))
        .collect();
    let after = CompositeSolution {
        id: None,
        e: choice.median.clone(),
        e_ties: choice.median_ties.clone(),
        deviation: choice.deviation,
        ..before.clone()
    };
    Ok(ImprovementPlan {
        composite: composite.to_string(),
        budget,
        before,
        after,
        choice,
        applied,
        estimates,
    })
}

/// Runs [`plan_improvement`] for an actions document.
pub fn plan_from_document(
    model: &MorphModel,
    doc: &ActionsDocument,
    budget: Option<f64>,
) -> Result<ImprovementPlan, ImprovementError> {
    let mut seen = std::collections::HashSet::new();
    for g in &doc.groups {
        if !seen.insert(g.target.as_str()) {
            return Err(ImprovementError::DuplicateTarget(g.target.clone()));
        }
    }
    let (composite, selection) = resolve_solution_ref(model, &doc.solution_ref)?;
    plan_improvement(
        model,
        &composite,
        &selection,
        &doc.actions(),
        budget.unwrap_or(doc.budget),
    )
}
