//! Hierarchical morphological models: a tree of components, design
//! alternatives with estimates on the leaves, and pairwise compatibility
//! between alternatives of sibling components.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimates::{EstimateError, MultisetEstimate, Scale};

/// The on-board telemetry subsystem model, embedded at build time.
pub const ONBOARD_JSON: &str = include_str!("../data/onboard.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown reference: {0}")]
    UnknownReference(String),
    #[error("alternative {alternative}: {source}")]
    Estimate {
        alternative: String,
        #[source]
        source: EstimateError,
    },
    #[error("alternative {0} does not have an interval estimate")]
    NonIntervalEstimate(String),
    #[error("duplicate id {0}")]
    DuplicateId(String),
    #[error("compatibility ({a}, {b}) = {w} is outside 0..={nu}")]
    CompatibilityRange { a: String, b: String, w: u32, nu: u32 },
    #[error("compatibility ({a}, {b}) pairs alternatives of the same component")]
    SameComponentPair { a: String, b: String },
}

impl ModelError {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Schema(_) => "SchemaError",
            Self::UnknownReference(_) => "UnknownReference",
            Self::Estimate { .. } => "EstimateError",
            Self::NonIntervalEstimate(_) => "NonIntervalEstimate",
            Self::DuplicateId(_) => "DuplicateId",
            Self::CompatibilityRange { .. } => "CompatibilityRange",
            Self::SameComponentPair { .. } => "SameComponentPair",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignAlternative {
    pub id: String,
    pub component: String,
    pub estimate: MultisetEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Leaf,
    Composite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    pub parent: Option<String>,
    /// Child component ids (composites only), in declaration order.
    pub children: Vec<String>,
    /// Design alternatives (leaves only). Composites get theirs from synthesis.
    pub alternatives: Vec<DesignAlternative>,
}

impl Component {
    pub fn is_leaf(&self) -> bool {
        self.kind == ComponentKind::Leaf
    }
}

/// Symmetric compatibility levels keyed by unordered alternative pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CompatibilityTable {
    entries: BTreeMap<(String, String), u32>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl CompatibilityTable {
    pub fn get(&self, a: &str, b: &str) -> Option<u32> {
        self.entries.get(&pair_key(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, u32)> {
        self.entries.iter().map(|((a, b), &w)| (a.as_str(), b.as_str(), w))
    }

    /// Returns `false` if the pair was already present.
    pub fn insert(&mut self, a: &str, b: &str, w: u32) -> bool {
        self.entries.insert(pair_key(a, b), w).is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphModel {
    scale: Scale,
    nu: u32,
    root: String,
    /// Pre-order.
    components: Vec<Component>,
    index: HashMap<String, usize>,
    alternatives: HashMap<String, (usize, usize)>,
    compatibility: CompatibilityTable,
}

// ---------------------------------------------------------------------------
// File schema

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub scale: Scale,
    pub nu: u32,
    pub components: NodeDocument,
    #[serde(default)]
    pub compatibility: Vec<CompatibilityDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub children: Option<Vec<NodeDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<Vec<AlternativeDocument>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlternativeDocument {
    pub id: String,
    /// Raw counts; validated against the model scale on load.
    pub estimate: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatibilityDocument {
    pub a: String,
    pub b: String,
    pub w: u32,
}

/// Parses and validates a JSON model document.
pub fn parse_model(text: &str) -> Result<MorphModel, ModelError> {
    let doc: ModelDocument = serde_json::from_str(text).map_err(|e| ModelError::Schema(e.to_string()))?;
    MorphModel::from_document(doc)
}

/// The bundled on-board telemetry model: power supply `D = X*Y*Z`, sensors
/// `E = I*Q*G`, data processing `F = H*C*W`, system `A = D*E*F`.
pub fn builtin_dataset() -> MorphModel {
    parse_model(ONBOARD_JSON).expect("bundled dataset is valid")
}

impl MorphModel {
    pub fn from_document(doc: ModelDocument) -> Result<Self, ModelError> {
        if doc.nu == 0 {
            return Err(ModelError::Schema("nu must be at least 1".into()));
        }
        let mut model = MorphModel {
            scale: doc.scale,
            nu: doc.nu,
            root: doc.components.id.clone(),
            components: Vec::new(),
            index: HashMap::new(),
            alternatives: HashMap::new(),
            compatibility: CompatibilityTable::default(),
        };
        model.add_node(doc.components, None)?;
        model.check_generated_ids()?;
        for entry in doc.compatibility {
            model.add_compatibility(entry)?;
        }
        model.check_sibling_coverage()?;
        Ok(model)
    }

    fn add_node(&mut self, node: NodeDocument, parent: Option<&str>) -> Result<(), ModelError> {
        if node.id.is_empty() {
            return Err(ModelError::Schema("component id must not be empty".into()));
        }
        if self.index.contains_key(&node.id) || self.alternatives.contains_key(&node.id) {
            return Err(ModelError::DuplicateId(node.id));
        }
        let slot = self.components.len();
        self.index.insert(node.id.clone(), slot);
        match (node.children, node.alternatives) {
            (Some(_), Some(_)) => Err(ModelError::Schema(format!(
                "component {} has both children and alternatives",
                node.id
            ))),
            (None, None) => Err(ModelError::Schema(format!(
                "component {} has neither children nor alternatives",
                node.id
            ))),
            (Some(children), None) => {
                if children.is_empty() {
                    return Err(ModelError::Schema(format!("component {} has no children", node.id)));
                }
                self.components.push(Component {
                    id: node.id.clone(),
                    kind: ComponentKind::Composite,
                    parent: parent.map(str::to_string),
                    children: children.iter().map(|c| c.id.clone()).collect(),
                    alternatives: Vec::new(),
                });
                for child in children {
                    self.add_node(child, Some(&node.id))?;
                }
                Ok(())
            }
            (None, Some(alts)) => {
                if alts.is_empty() {
                    return Err(ModelError::Schema(format!(
                        "leaf component {} has no alternatives",
                        node.id
                    )));
                }
                let mut alternatives = Vec::with_capacity(alts.len());
                for (k, alt) in alts.into_iter().enumerate() {
                    if alt.id.is_empty() {
                        return Err(ModelError::Schema("alternative id must not be empty".into()));
                    }
                    if self.index.contains_key(&alt.id) || self.alternatives.contains_key(&alt.id) {
                        return Err(ModelError::DuplicateId(alt.id));
                    }
                    let estimate =
                        MultisetEstimate::new(self.scale, alt.estimate).map_err(|source| ModelError::Estimate {
                            alternative: alt.id.clone(),
                            source,
                        })?;
                    if !estimate.is_interval() {
                        return Err(ModelError::NonIntervalEstimate(alt.id));
                    }
                    self.alternatives.insert(alt.id.clone(), (slot, k));
                    alternatives.push(DesignAlternative {
                        id: alt.id,
                        component: node.id.clone(),
                        estimate,
                    });
                }
                self.components.push(Component {
                    id: node.id,
                    kind: ComponentKind::Leaf,
                    parent: parent.map(str::to_string),
                    children: Vec::new(),
                    alternatives,
                });
                Ok(())
            }
        }
    }

    /// Composite alternatives are named `<composite><k>` after synthesis, so
    /// leaf alternatives may not use that pattern.
    fn check_generated_ids(&self) -> Result<(), ModelError> {
        for id in self.alternatives.keys() {
            if let Some(owner) = self.generated_owner(id) {
                return Err(ModelError::DuplicateId(format!(
                    "{id} (clashes with synthesized alternatives of {owner})"
                )));
            }
        }
        Ok(())
    }

    /// Composite that would own `id` as a synthesized alternative.
    fn generated_owner(&self, id: &str) -> Option<&str> {
        self.components
            .iter()
            .filter(|c| !c.is_leaf())
            .find(|c| {
                id.strip_prefix(c.id.as_str()).is_some_and(|rest| {
                    !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) && !rest.starts_with('0')
                })
            })
            .map(|c| c.id.as_str())
    }

    /// Component owning an alternative id, either a leaf alternative or a
    /// synthesized composite alternative name.
    pub fn owner_of(&self, alternative: &str) -> Option<&str> {
        match self.alternatives.get(alternative) {
            Some(&(slot, _)) => Some(self.components[slot].id.as_str()),
            None => self.generated_owner(alternative),
        }
    }

    fn add_compatibility(&mut self, entry: CompatibilityDocument) -> Result<(), ModelError> {
        let CompatibilityDocument { a, b, w } = entry;
        let ca = self
            .owner_of(&a)
            .ok_or_else(|| ModelError::UnknownReference(format!("compatibility names unknown alternative {a}")))?
            .to_string();
        let cb = self
            .owner_of(&b)
            .ok_or_else(|| ModelError::UnknownReference(format!("compatibility names unknown alternative {b}")))?
            .to_string();
        if ca == cb {
            return Err(ModelError::SameComponentPair { a, b });
        }
        if w > self.nu {
            return Err(ModelError::CompatibilityRange { a, b, w, nu: self.nu });
        }
        if !self.compatibility.insert(&a, &b, w) {
            return Err(ModelError::DuplicateId(format!("compatibility ({a}, {b})")));
        }
        Ok(())
    }

    /// Every pair of alternatives drawn from two sibling leaves needs an entry.
    fn check_sibling_coverage(&self) -> Result<(), ModelError> {
        for comp in self.components.iter().filter(|c| !c.is_leaf()) {
            let leaves: Vec<&Component> = comp
                .children
                .iter()
                .map(|id| &self.components[self.index[id]])
                .filter(|c| c.is_leaf())
                .collect();
            for (i, left) in leaves.iter().enumerate() {
                for right in &leaves[i + 1..] {
                    for a in &left.alternatives {
                        for b in &right.alternatives {
                            if self.compatibility.get(&a.id, &b.id).is_none() {
                                return Err(ModelError::UnknownReference(format!(
                                    "missing compatibility entry ({}, {})",
                                    a.id, b.id
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// Best compatibility level.
    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn root(&self) -> &Component {
        &self.components[0]
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.index.get(id).map(|&i| &self.components[i])
    }

    /// All components in pre-order.
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn leaves(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| c.is_leaf())
    }

    /// Composites in leaf-to-root order: every composite appears after all
    /// composites below it.
    pub fn composites_bottom_up(&self) -> Vec<&Component> {
        self.components.iter().rev().filter(|c| !c.is_leaf()).collect()
    }

    /// Components in the subtree rooted at `id` (pre-order), including `id`.
    pub fn subtree(&self, id: &str) -> Vec<&Component> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            if let Some(c) = self.component(cur) {
                out.push(c);
                stack.extend(c.children.iter().rev().map(String::as_str));
            }
        }
        out
    }

    pub fn alternative(&self, id: &str) -> Option<&DesignAlternative> {
        self.alternatives
            .get(id)
            .map(|&(c, k)| &self.components[c].alternatives[k])
    }

    pub fn estimate(&self, alternative: &str) -> Option<&MultisetEstimate> {
        self.alternative(alternative).map(|a| &a.estimate)
    }

    /// Explicit compatibility entry for a pair, if the model has one.
    pub fn compatibility(&self, a: &str, b: &str) -> Option<u32> {
        self.compatibility.get(a, b)
    }

    /// Compatibility with the model default applied: pairs without an entry
    /// (only possible above the leaf level) are fully compatible.
    pub fn compatibility_or_default(&self, a: &str, b: &str) -> u32 {
        self.compatibility.get(a, b).unwrap_or(self.nu)
    }

    pub fn compatibility_table(&self) -> &CompatibilityTable {
        &self.compatibility
    }

    /// Number of distinct leaf-level configurations of the whole system.
    pub fn design_space_size(&self) -> u128 {
        self.subtree_size(&self.root)
    }

    fn subtree_size(&self, id: &str) -> u128 {
        let c = &self.components[self.index[id]];
        match c.kind {
            ComponentKind::Leaf => c.alternatives.len() as u128,
            ComponentKind::Composite => c.children.iter().map(|child| self.subtree_size(child)).product(),
        }
    }

    pub fn to_document(&self) -> ModelDocument {
        let order: HashMap<&str, usize> = self
            .components
            .iter()
            .flat_map(|c| c.alternatives.iter())
            .enumerate()
            .map(|(i, a)| (a.id.as_str(), i))
            .collect();
        let rank = |id: &str| order.get(id).copied().unwrap_or(usize::MAX);
        let mut compatibility: Vec<CompatibilityDocument> = self
            .compatibility
            .iter()
            .map(|(a, b, w)| {
                let (a, b) = if rank(a) <= rank(b) { (a, b) } else { (b, a) };
                CompatibilityDocument {
                    a: a.to_string(),
                    b: b.to_string(),
                    w,
                }
            })
            .collect();
        compatibility.sort_by(|x, y| (rank(&x.a), rank(&x.b), &x.a, &x.b).cmp(&(rank(&y.a), rank(&y.b), &y.a, &y.b)));
        ModelDocument {
            scale: self.scale,
            nu: self.nu,
            components: self.node_document(&self.root),
            compatibility,
        }
    }

    fn node_document(&self, id: &str) -> NodeDocument {
        let c = &self.components[self.index[id]];
        match c.kind {
            ComponentKind::Leaf => NodeDocument {
                id: c.id.clone(),
                children: None,
                alternatives: Some(
                    c.alternatives
                        .iter()
                        .map(|a| AlternativeDocument {
                            id: a.id.clone(),
                            estimate: a.estimate.counts().to_vec(),
                        })
                        .collect(),
                ),
            },
            ComponentKind::Composite => NodeDocument {
                id: c.id.clone(),
                children: Some(c.children.iter().map(|ch| self.node_document(ch)).collect()),
                alternatives: None,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("model document serializes")
    }

    /// Ids of all leaf alternatives, in model order.
    pub fn alternative_ids(&self) -> HashSet<&str> {
        self.alternatives.keys().map(String::as_str).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "scale": {"l": 4, "eta": 3},
        "nu": 3,
        "components": {"id": "S", "children": [
            {"id": "P", "alternatives": [{"id": "P1", "estimate": [3,0,0,0]}, {"id": "P2", "estimate": [0,1,2,0]}]},
            {"id": "R", "alternatives": [{"id": "R1", "estimate": [1,2,0,0]}]}
        ]},
        "compatibility": [{"a": "P1", "b": "R1", "w": 2}, {"a": "R1", "b": "P2", "w": 0}]
    }"#;

    #[test]
    fn builtin_shape() {
        let m = builtin_dataset();
        assert_eq!(m.root().id, "A");
        assert_eq!(m.leaves().count(), 9);
        assert_eq!(m.components().iter().filter(|c| !c.is_leaf()).count(), 4);
        assert_eq!(m.design_space_size(), 116_640);
        assert_eq!(m.estimate("I3").unwrap().to_string(), "(3,0,0,0)");
        assert_eq!(m.estimate("X2").unwrap().to_string(), "(2,1,0,0)");
        assert_eq!(m.estimate("Q5").unwrap().to_string(), "(3,0,0,0)");
        assert_eq!(m.estimate("W1").unwrap().to_string(), "(0,0,2,1)");
        assert_eq!(m.compatibility("H3", "C1"), Some(4));
        assert_eq!(m.compatibility("C1", "H3"), Some(4));
        assert_eq!(m.compatibility("I3", "G1"), Some(1));
        assert_eq!(m.compatibility("X1", "I1"), None);
        assert_eq!(m.compatibility_or_default("D1", "E1"), 4);
        assert_eq!(m.nu(), 4);
        assert_eq!(m.scale().to_string(), "P4,3");
        let order: Vec<&str> = m.composites_bottom_up().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(order.last(), Some(&"A"));
        assert_eq!(order.len(), 4);
    }

    #[test]
    fn small_model() {
        let m = parse_model(SMALL).unwrap();
        assert_eq!(m.design_space_size(), 2);
        assert_eq!(m.compatibility("P2", "R1"), Some(0));
        assert_eq!(m.owner_of("S7"), Some("S"));
        assert_eq!(m.owner_of("P2"), Some("P"));
        assert_eq!(m.owner_of("nope"), None);
    }

    #[test]
    fn missing_compatibility_rejected() {
        let text = SMALL.replace(r#"{"a": "P1", "b": "R1", "w": 2}, "#, "");
        let err = parse_model(&text).unwrap_err();
        assert_eq!(err.name(), "UnknownReference");
        assert!(err.to_string().contains("P1"));
    }

    #[test]
    fn builtin_missing_entry_rejected() {
        let text = ONBOARD_JSON.replace(r#"{ "a": "X1", "b": "Y1", "w": 3 },"#, "");
        assert_ne!(text, ONBOARD_JSON);
        let err = parse_model(&text).unwrap_err();
        assert!(matches!(err, ModelError::UnknownReference(ref s) if s.contains("X1") && s.contains("Y1")));
    }

    #[test]
    fn validation_errors() {
        let dup = SMALL.replace(r#""id": "R1""#, r#""id": "P1""#);
        assert!(matches!(parse_model(&dup), Err(ModelError::DuplicateId(_))));

        let missing = SMALL.replace(r#""nu": 3,"#, "");
        assert!(matches!(parse_model(&missing), Err(ModelError::Schema(_))));

        let bad_est = SMALL.replace("[3,0,0,0]", "[2,0,0,0]");
        assert!(matches!(
            parse_model(&bad_est),
            Err(ModelError::Estimate {
                source: EstimateError::CardinalityMismatch { .. },
                ..
            })
        ));

        let gap = SMALL.replace("[3,0,0,0]", "[2,0,1,0]");
        assert!(matches!(parse_model(&gap), Err(ModelError::NonIntervalEstimate(_))));

        let unknown = SMALL.replace(r#""b": "R1", "w": 2"#, r#""b": "R9", "w": 2"#);
        assert!(matches!(parse_model(&unknown), Err(ModelError::UnknownReference(_))));

        let range = SMALL.replace(r#""w": 2"#, r#""w": 9"#);
        assert!(matches!(
            parse_model(&range),
            Err(ModelError::CompatibilityRange { .. })
        ));

        let same = SMALL.replace(r#""a": "P1", "b": "R1""#, r#""a": "P1", "b": "P2""#);
        assert!(matches!(parse_model(&same), Err(ModelError::SameComponentPair { .. })));

        let clash = SMALL
            .replace(r#""id": "R1""#, r#""id": "S1""#)
            .replace(r#""R1""#, r#""S1""#);
        assert!(matches!(parse_model(&clash), Err(ModelError::DuplicateId(_))));

        let empty = SMALL.replace(r#"[{"id": "R1", "estimate": [1,2,0,0]}]"#, "[]");
        assert!(matches!(parse_model(&empty), Err(ModelError::Schema(_))));

        assert!(matches!(parse_model("{"), Err(ModelError::Schema(_))));
    }

    #[test]
    fn round_trip() {
        let m = builtin_dataset();
        let again = parse_model(&m.to_json()).unwrap();
        assert_eq!(m, again);
        assert_eq!(again.to_json(), m.to_json());
    }
}
