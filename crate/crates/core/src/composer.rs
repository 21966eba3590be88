//! Breadth-first composition of turn-pair templates into dialogue templates.
//!
//! The tree hangs off a synthetic root whose children are the bank's root
//! templates. Each level expands every node of the previous level with all
//! templates that may follow it. Root-to-leaf paths whose leaf is a terminal
//! template are the dialogue templates.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bank::{LabelSet, LinkSemantics, TemplateBank, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GrowthLimits {
    /// Maximum pairs per dialogue.
    pub max_depth: usize,
    /// Maximum number of tree nodes, synthetic root excluded.
    pub max_nodes: usize,
    /// Maximum uses of one template along a path.
    pub reuse: usize,
}

impl Default for GrowthLimits {
    fn default() -> Self {
        GrowthLimits {
            max_depth: 8,
            max_nodes: 200_000,
            reuse: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("growth limit {0} must be at least 1")]
    BadLimit(&'static str),
    #[error("no path reaches a closing template; the seed templates cannot finish a dialogue")]
    NoCompleteDialogue,
}

impl GrowthLimits {
    pub fn check(&self) -> Result<(), ComposeError> {
        if self.max_depth == 0 {
            return Err(ComposeError::BadLimit("max_depth"));
        }
        if self.max_nodes == 0 {
            return Err(ComposeError::BadLimit("max_nodes"));
        }
        if self.reuse == 0 {
            return Err(ComposeError::BadLimit("reuse"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub node_id: NodeId,
    pub parent_id: Option<NodeId>,
    pub template_id: TemplateId,
    pub depth: usize,
}

/// Why growth stopped before running out of active nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    DepthLimit,
    NodeBudget,
}

#[derive(Debug, Clone)]
pub struct TemplateTree {
    /// Breadth-first order; parents precede children.
    pub nodes: Vec<TreeNode>,
    pub truncated: Option<Truncation>,
}

impl TemplateTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.last().map_or(0, |n| n.depth)
    }

    /// Template ids from the top of the tree down to `node`.
    pub fn path(&self, node: NodeId) -> Vec<TemplateId> {
        let mut path = Vec::with_capacity(self.nodes[node.0].depth);
        let mut cursor = Some(node);
        while let Some(id) = cursor {
            let n = &self.nodes[id.0];
            path.push(n.template_id);
            cursor = n.parent_id;
        }
        path.reverse();
        path
    }

    fn uses(&self, node: NodeId, template: TemplateId) -> usize {
        let mut count = 0;
        let mut cursor = Some(node);
        while let Some(id) = cursor {
            let n = &self.nodes[id.0];
            if n.template_id == template {
                count += 1;
            }
            cursor = n.parent_id;
        }
        count
    }

    /// Line-delimited JSON records `{node_id, parent_id, template_id, depth}`.
    pub fn dump_jsonl(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str(&serde_json::to_string(n).expect("tree nodes serialize"));
            out.push('\n');
        }
        out
    }
}

/// Grows the template tree breadth first.
///
/// Budgets are checked once per level, so the result does not depend on how
/// the level was expanded. When a level would overflow `max_nodes`, only its
/// first children (in parent-then-template order) are kept.
pub fn grow_tree(
    bank: &TemplateBank,
    limits: &GrowthLimits,
    semantics: LinkSemantics,
) -> Result<TemplateTree, ComposeError> {
    limits.check()?;
    let mut tree = TemplateTree {
        nodes: Vec::new(),
        truncated: None,
    };
    let mut level: Vec<(Option<NodeId>, TemplateId)> =
        bank.roots.iter().map(|&t| (None, t)).collect();
    let mut depth = 1;
    loop {
        let room = limits.max_nodes - tree.nodes.len();
        if level.len() > room {
            level.truncate(room);
            tree.truncated = Some(Truncation::NodeBudget);
        }
        let first = tree.nodes.len();
        for (parent_id, template_id) in level.drain(..) {
            tree.nodes.push(TreeNode {
                node_id: NodeId(tree.nodes.len()),
                parent_id,
                template_id,
                depth,
            });
        }
        if tree.truncated.is_some() {
            break;
        }
        let active: Vec<NodeId> = (first..tree.nodes.len()).map(NodeId).collect();
        let children: Vec<Vec<TemplateId>> = active
            .par_iter()
            .map(|&node| {
                let template = bank.get(tree.nodes[node.0].template_id);
                bank.successors(template, semantics)
                    .into_iter()
                    .filter(|&s| tree.uses(node, s) < limits.reuse)
                    .collect()
            })
            .collect();
        if children.iter().all(Vec::is_empty) {
            break;
        }
        if depth == limits.max_depth {
            tree.truncated = Some(Truncation::DepthLimit);
            break;
        }
        level = active
            .iter()
            .zip(children)
            .flat_map(|(&parent, kids)| kids.into_iter().map(move |k| (Some(parent), k)))
            .collect();
        depth += 1;
    }
    Ok(tree)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DialogueTemplate {
    pub templates: Vec<TemplateId>,
    /// Union of current-state labels along the path.
    pub slot_labels: LabelSet,
    /// Source dialogue ids.
    pub provenance: BTreeSet<String>,
}

impl DialogueTemplate {
    pub fn from_path(bank: &TemplateBank, templates: Vec<TemplateId>) -> Self {
        let mut slot_labels = LabelSet::new();
        let mut provenance = BTreeSet::new();
        for &id in &templates {
            let t = bank.get(id);
            slot_labels.extend(t.function.cur.iter().cloned());
            provenance.insert(t.source.dialogue_id.clone());
        }
        DialogueTemplate {
            templates,
            slot_labels,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Keeps root-to-leaf paths that end on a terminal template, sorted by their
/// template-id sequence.
pub fn extract_dialogue_templates(
    tree: &TemplateTree,
    bank: &TemplateBank,
) -> Result<Vec<DialogueTemplate>, ComposeError> {
    let mut has_child = vec![false; tree.nodes.len()];
    for n in &tree.nodes {
        if let Some(p) = n.parent_id {
            has_child[p.0] = true;
        }
    }
    let mut paths: Vec<Vec<TemplateId>> = tree
        .nodes
        .iter()
        .filter(|n| !has_child[n.node_id.0] && bank.get(n.template_id).is_terminal())
        .map(|n| tree.path(n.node_id))
        .collect();
    if paths.is_empty() {
        return Err(ComposeError::NoCompleteDialogue);
    }
    paths.sort();
    Ok(paths
        .into_iter()
        .map(|p| DialogueTemplate::from_path(bank, p))
        .collect())
}
