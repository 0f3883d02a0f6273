//! Hierarchical morphological synthesis.
//!
//! A composite picks one alternative per part. Its quality is the pair
//! `N(S) = (w; e)`: `w` is the smallest pairwise compatibility among the
//! picked alternatives and `e` is the generalized median of their estimates.
//! Selections with `w = 0` are inadmissible; the rest are reduced to the
//! Pareto front under the product order on `(w, e)`. Fronts are computed
//! leaf-to-root, and each front member becomes an alternative (named
//! `<composite><k>`) of its composite for the level above.

use std::cmp::Reverse;
use std::collections::HashMap;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimates::{representative, strictly_dominates, MedianSolver, MultisetEstimate};
use crate::model::{DesignAlternative, MorphModel};

/// Part id to chosen alternative id, in part order.
pub type Selection = IndexMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("unknown component {0}")]
    UnknownComponent(String),
    #[error("component {0} is a leaf")]
    NotComposite(String),
    #[error("incomplete selection for {composite}: {detail}")]
    IncompleteSelection { composite: String, detail: String },
    #[error("{alternative} is not an alternative of {component}")]
    UnknownAlternative { component: String, alternative: String },
    #[error("component {0} has no admissible alternatives")]
    EmptyAlternatives(String),
}

impl SynthesisError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UnknownComponent(_) => "UnknownComponent",
            Self::NotComposite(_) => "NotComposite",
            Self::IncompleteSelection { .. } => "IncompleteSelection",
            Self::UnknownAlternative { .. } => "UnknownAlternative",
            Self::EmptyAlternatives(_) => "EmptyAlternatives",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositeSolution {
    /// Name given to the solution when it joins a front (`D1`, `D2`, ..).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub selection: Selection,
    /// Compatibility floor.
    pub w: u32,
    /// Representative generalized median.
    pub e: MultisetEstimate,
    pub e_ties: Vec<MultisetEstimate>,
    pub deviation: u64,
}

impl CompositeSolution {
    /// Product-order dominance on `(w, e)`.
    pub fn dominates(&self, other: &CompositeSolution) -> bool {
        let e_ge = self.e == other.e || strictly_dominates(&self.e, &other.e);
        self.w >= other.w && e_ge && (self.w > other.w || self.e != other.e)
    }

    /// `(w;(e))` quality label.
    pub fn quality_label(&self) -> String {
        format!("({};{})", self.w, self.e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub component: String,
    pub solutions: Vec<CompositeSolution>,
}

impl ParetoFront {
    pub fn get(&self, id: &str) -> Option<&CompositeSolution> {
        self.solutions.iter().find(|s| s.id.as_deref() == Some(id))
    }

    pub fn find(&self, selection: &[&str]) -> Option<&CompositeSolution> {
        self.solutions
            .iter()
            .find(|s| s.selection.values().map(String::as_str).eq(selection.iter().copied()))
    }
}

/// Keeps exactly the nondominated solutions, ordered by descending `w`, then
/// `e` best first, then the chosen alternative ids.
pub fn pareto_filter(solutions: Vec<CompositeSolution>) -> Vec<CompositeSolution> {
    let keep: Vec<bool> = solutions
        .iter()
        .map(|s| !solutions.iter().any(|o| o.dominates(s)))
        .collect();
    let mut front: Vec<CompositeSolution> = solutions
        .into_iter()
        .zip(keep)
        .filter_map(|(s, k)| k.then_some(s))
        .collect();
    sort_front(&mut front);
    front
}

fn sort_front(front: &mut [CompositeSolution]) {
    front.sort_by_cached_key(|s| {
        (
            Reverse(s.w),
            Reverse(s.e.profile()),
            s.selection.values().cloned().collect::<Vec<_>>(),
        )
    });
}

/// Alternatives available to every component: the model's leaf alternatives
/// plus those produced by synthesized composites.
#[derive(Debug, Clone)]
pub struct Catalog<'m> {
    model: &'m MorphModel,
    synthesized: HashMap<String, Vec<DesignAlternative>>,
    median: MedianSolver,
}

impl<'m> Catalog<'m> {
    pub fn new(model: &'m MorphModel) -> Self {
        Self {
            model,
            synthesized: HashMap::new(),
            median: MedianSolver::new(model.scale()),
        }
    }

    pub fn model(&self) -> &'m MorphModel {
        self.model
    }

    pub fn median_solver(&self) -> &MedianSolver {
        &self.median
    }

    /// Alternatives of a component, or `None` for an unsynthesized composite.
    pub fn alternatives(&self, component: &str) -> Option<&[DesignAlternative]> {
        let c = self.model.component(component)?;
        if c.is_leaf() {
            Some(&c.alternatives)
        } else {
            self.synthesized.get(component).map(Vec::as_slice)
        }
    }

    pub fn alternative(&self, id: &str) -> Option<&DesignAlternative> {
        if let Some(a) = self.model.alternative(id) {
            return Some(a);
        }
        let owner = self.model.owner_of(id)?;
        self.synthesized.get(owner)?.iter().find(|a| a.id == id)
    }

    pub fn estimate(&self, id: &str) -> Option<&MultisetEstimate> {
        self.alternative(id).map(|a| &a.estimate)
    }

    pub fn compatibility(&self, a: &str, b: &str) -> u32 {
        self.model.compatibility_or_default(a, b)
    }

    /// Registers a front's members as the alternatives of its composite.
    pub fn add_front(&mut self, front: &ParetoFront) {
        let alts = front
            .solutions
            .iter()
            .map(|s| DesignAlternative {
                id: s.id.clone().expect("front solutions are named"),
                component: front.component.clone(),
                estimate: s.e.clone(),
            })
            .collect();
        self.synthesized.insert(front.component.clone(), alts);
    }

    fn composite_parts(&self, composite: &str) -> Result<&'m [String], SynthesisError> {
        let c = self
            .model
            .component(composite)
            .ok_or_else(|| SynthesisError::UnknownComponent(composite.to_string()))?;
        if c.is_leaf() {
            return Err(SynthesisError::NotComposite(composite.to_string()));
        }
        Ok(&c.children)
    }

    fn resolve(&self, composite: &str, selection: &Selection) -> Result<Vec<&DesignAlternative>, SynthesisError> {
        let parts = self.composite_parts(composite)?;
        if let Some(extra) = selection.keys().find(|k| !parts.contains(k)) {
            return Err(SynthesisError::IncompleteSelection {
                composite: composite.to_string(),
                detail: format!("{extra} is not a part of {composite}"),
            });
        }
        parts
            .iter()
            .map(|part| {
                let chosen = selection.get(part).ok_or_else(|| SynthesisError::IncompleteSelection {
                    composite: composite.to_string(),
                    detail: format!("no alternative chosen for {part}"),
                })?;
                self.alternatives(part)
                    .and_then(|alts| alts.iter().find(|a| &a.id == chosen))
                    .ok_or_else(|| SynthesisError::UnknownAlternative {
                        component: part.clone(),
                        alternative: chosen.clone(),
                    })
            })
            .collect()
    }

    fn floor_of(&self, alts: &[&DesignAlternative]) -> u32 {
        let mut w = self.model.nu();
        for (i, a) in alts.iter().enumerate() {
            for b in &alts[i + 1..] {
                w = w.min(self.compatibility(&a.id, &b.id));
            }
        }
        w
    }

    /// Smallest pairwise compatibility in a full selection for `composite`.
    pub fn compatibility_floor(&self, composite: &str, selection: &Selection) -> Result<u32, SynthesisError> {
        let alts = self.resolve(composite, selection)?;
        Ok(self.floor_of(&alts))
    }

    /// Scores a full selection: compatibility floor and median estimate.
    pub fn score(&self, composite: &str, selection: &Selection) -> Result<CompositeSolution, SynthesisError> {
        let alts = self.resolve(composite, selection)?;
        let w = self.floor_of(&alts);
        let median = self.median.median(alts.iter().map(|a| &a.estimate));
        Ok(CompositeSolution {
            id: None,
            selection: alts.iter().map(|a| (a.component.clone(), a.id.clone())).collect(),
            w,
            e: median.representative().clone(),
            e_ties: median.medians,
            deviation: median.deviation,
        })
    }

    /// Pareto front of all admissible selections for `composite`, whose
    /// parts must already have alternatives.
    pub fn synthesize(&self, composite: &str) -> Result<ParetoFront, SynthesisError> {
        let parts = self.composite_parts(composite)?;
        let options: Vec<&[DesignAlternative]> = parts
            .iter()
            .map(|p| match self.alternatives(p) {
                Some(alts) if !alts.is_empty() => Ok(alts),
                _ => Err(SynthesisError::EmptyAlternatives(p.clone())),
            })
            .collect::<Result<_, _>>()?;
        let distances: Vec<Vec<Vec<u64>>> = options
            .iter()
            .map(|alts| alts.iter().map(|a| self.median.distances_to(&a.estimate)).collect())
            .collect();
        let search = Search {
            catalog: self,
            options: &options,
            distances: &distances,
        };
        let width = self.median.candidates().len();
        let admissible: Vec<CompositeSolution> = (0..options[0].len())
            .into_par_iter()
            .map(|first| {
                let mut found = Vec::new();
                let mut path = vec![first];
                let sums = distances[0][first].clone();
                debug_assert_eq!(sums.len(), width);
                search.extend(&mut path, self.model.nu(), sums, &mut found);
                found
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect();
        let mut solutions = pareto_filter(admissible);
        for (k, s) in solutions.iter_mut().enumerate() {
            s.id = Some(format!("{composite}{}", k + 1));
        }
        Ok(ParetoFront {
            component: composite.to_string(),
            solutions,
        })
    }
}

/// Depth-first enumeration over parts with a running compatibility floor and
/// running per-candidate median sums.
struct Search<'a, 'm> {
    catalog: &'a Catalog<'m>,
    options: &'a [&'a [DesignAlternative]],
    distances: &'a [Vec<Vec<u64>>],
}

impl Search<'_, '_> {
    fn extend(&self, path: &mut Vec<usize>, floor: u32, sums: Vec<u64>, found: &mut Vec<CompositeSolution>) {
        let depth = path.len();
        if depth == self.options.len() {
            let median = self.catalog.median.median_from_sums(&sums);
            found.push(CompositeSolution {
                id: None,
                selection: path
                    .iter()
                    .enumerate()
                    .map(|(p, &k)| {
                        let a = &self.options[p][k];
                        (a.component.clone(), a.id.clone())
                    })
                    .collect(),
                w: floor,
                e: representative(&median.medians).clone(),
                e_ties: median.medians,
                deviation: median.deviation,
            });
            return;
        }
        for (k, alt) in self.options[depth].iter().enumerate() {
            let mut w = floor;
            for (p, &j) in path.iter().enumerate() {
                w = w.min(self.catalog.compatibility(&self.options[p][j].id, &alt.id));
                if w == 0 {
                    break;
                }
            }
            if w == 0 {
                continue;
            }
            let next: Vec<u64> = sums.iter().zip(&self.distances[depth][k]).map(|(s, d)| s + d).collect();
            path.push(k);
            self.extend(path, w, next, found);
            path.pop();
        }
    }
}

/// Result of a leaf-to-root synthesis run.
#[derive(Debug, Clone)]
pub struct Hierarchy<'m> {
    pub catalog: Catalog<'m>,
    /// Fronts in the order they were computed (leaf-to-root).
    pub fronts: IndexMap<String, ParetoFront>,
    pub root: String,
}

impl Hierarchy<'_> {
    pub fn front(&self, component: &str) -> Option<&ParetoFront> {
        self.fronts.get(component)
    }

    pub fn root_front(&self) -> &ParetoFront {
        &self.fronts[&self.root]
    }

    /// Expands composite alternatives in a selection down to leaf
    /// alternatives, in model order.
    pub fn leaf_selection(&self, selection: &Selection) -> Selection {
        let mut out = Selection::new();
        for (part, alt) in selection {
            match self.fronts.get(part).and_then(|f| f.get(alt)) {
                Some(inner) => out.extend(self.leaf_selection(&inner.selection)),
                None => {
                    out.insert(part.clone(), alt.clone());
                }
            }
        }
        out
    }
}

/// Synthesizes every composite of the model, leaf-to-root.
pub fn bottom_up(model: &MorphModel) -> Result<Hierarchy<'_>, SynthesisError> {
    let root = model.root().id.clone();
    synthesize_subtree(model, &root)
}

fn synthesize_subtree<'m>(model: &'m MorphModel, top: &str) -> Result<Hierarchy<'m>, SynthesisError> {
    let subtree: Vec<&str> = model.subtree(top).iter().map(|c| c.id.as_str()).collect();
    let mut catalog = Catalog::new(model);
    let mut fronts = IndexMap::new();
    for comp in model.composites_bottom_up() {
        if !subtree.contains(&comp.id.as_str()) {
            continue;
        }
        let front = catalog.synthesize(&comp.id)?;
        catalog.add_front(&front);
        fronts.insert(comp.id.clone(), front);
    }
    Ok(Hierarchy {
        catalog,
        fronts,
        root: top.to_string(),
    })
}

/// Pareto front of one composite, synthesizing any composites below it first.
pub fn synthesize_component(model: &MorphModel, composite: &str) -> Result<ParetoFront, SynthesisError> {
    let c = model
        .component(composite)
        .ok_or_else(|| SynthesisError::UnknownComponent(composite.to_string()))?;
    if c.is_leaf() {
        return Err(SynthesisError::NotComposite(composite.to_string()));
    }
    let mut h = synthesize_subtree(model, composite)?;
    Ok(h.fronts.swap_remove(composite).expect("composite was synthesized"))
}

/// Compatibility floor of a selection of leaf alternatives.
pub fn compatibility_floor(model: &MorphModel, composite: &str, selection: &Selection) -> Result<u32, SynthesisError> {
    Catalog::new(model).compatibility_floor(composite, selection)
}

/// Scores a selection of leaf alternatives.
pub fn score(model: &MorphModel, composite: &str, selection: &Selection) -> Result<CompositeSolution, SynthesisError> {
    Catalog::new(model).score(composite, selection)
}

/// Builds a selection from `(part, alternative)` pairs.
pub fn selection<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Selection {
    pairs.into_iter().map(|(p, a)| (p.to_string(), a.to_string())).collect()
}
