//! The anatomy `partOf` tree.
//!
//! One abstract tree is canonical. Every structure carries the set of stages
//! it exists in, and the per-stage trees are derived from it by restriction,
//! so all views share a single sibling order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::id::{Namespace, StageNumber, StageSet, StructureId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    pub id: StructureId,
    pub name: String,
    pub abbreviation: Option<String>,
    pub parent: Option<StructureId>,
    pub stages: StageSet,
    /// Staged (`EMAP:`) id of this structure at each stage.
    pub aliases: BTreeMap<StageNumber, StructureId>,
    pub is_major_system: bool,
    /// `is_a` edges. Kept for display only; layout uses the `partOf` tree.
    pub isa: Vec<StructureId>,
}

impl Structure {
    pub fn new(id: StructureId, name: impl Into<String>, parent: Option<StructureId>, stages: StageSet) -> Self {
        Structure {
            id,
            name: name.into(),
            abbreviation: None,
            parent,
            stages,
            aliases: BTreeMap::new(),
            is_major_system: false,
            isa: Vec::new(),
        }
    }

    pub fn with_alias(mut self, stage: StageNumber, staged: StructureId) -> Self {
        self.aliases.insert(stage, staged);
        self
    }

    pub fn major_system(mut self, abbreviation: Option<&str>) -> Self {
        self.is_major_system = true;
        self.abbreviation = abbreviation.map(Into::into);
        self
    }

    /// Text used for labels: the abbreviation when there is one.
    pub fn label(&self) -> &str {
        self.abbreviation.as_deref().unwrap_or(&self.name)
    }
}

/// Alias for the input shape handed to [`Anatomy::assemble`].
pub type StructureRecord = Structure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnatomyError {
    #[error("{0} is not an abstract (EMAPA) id")]
    NotAbstract(StructureId),
    #[error("alias {alias} of {owner} is not a staged (EMAP) id")]
    AliasNotStaged { owner: StructureId, alias: StructureId },
    #[error("duplicate structure id {0}")]
    DuplicateId(StructureId),
    #[error("structure {child} names missing parent {parent}")]
    MissingParent { child: StructureId, parent: StructureId },
    #[error("declared root {0} is not among the structures")]
    UnknownRoot(StructureId),
    #[error("root {0} must not have a parent")]
    RootHasParent(StructureId),
    #[error("structure {0} has no parent but is not the root")]
    ExtraRoot(StructureId),
    #[error("cycle detected in parent chain through {0}")]
    Cycle(StructureId),
    #[error("unknown staged id {0}")]
    UnknownAlias(StructureId),
    #[error("structure {0} is not in this view")]
    NotInView(StructureId),
    #[error("unknown structure {0}")]
    UnknownStructure(StructureId),
    #[error("anatomy failed validation with {} error finding(s)", .0.error_count())]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FindingRule {
    /// An alias is keyed by a stage the structure does not exist in.
    AliasStageMismatch,
    DupSiblingName,
    /// A structure exists at a stage where its parent does not.
    OrphanAtStage,
    EmptyStages,
    /// One staged id claimed by two abstract structures.
    AliasCollision,
    UnknownIsa,
}

impl FindingRule {
    pub fn code(self) -> &'static str {
        match self {
            FindingRule::AliasStageMismatch => "ALIAS_STAGE_MISMATCH",
            FindingRule::DupSiblingName => "DUP_SIBLING_NAME",
            FindingRule::OrphanAtStage => "ORPHAN_AT_STAGE",
            FindingRule::EmptyStages => "EMPTY_STAGES",
            FindingRule::AliasCollision => "ALIAS_COLLISION",
            FindingRule::UnknownIsa => "UNKNOWN_ISA",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            FindingRule::UnknownIsa => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule: FindingRule,
    pub severity: Severity,
    pub structure: StructureId,
    pub detail: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{sev} {} {}: {}", self.rule.code(), self.structure, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn error_count(&self) -> usize {
        self.findings.iter().filter(|f| f.severity == Severity::Error).count()
    }

    pub fn has_rule(&self, rule: FindingRule) -> bool {
        self.findings.iter().any(|f| f.rule == rule)
    }

    fn push(&mut self, rule: FindingRule, structure: StructureId, detail: String) {
        self.findings.push(Finding { rule, severity: rule.severity(), structure, detail });
    }
}

/// Case-insensitive name ascending, ties by id number.
fn sibling_order(a: &Structure, b: &Structure) -> Ordering {
    let lower = |s: &str| s.chars().flat_map(char::to_lowercase).collect::<Vec<_>>();
    lower(&a.name)
        .cmp(&lower(&b.name))
        .then(a.id.number.cmp(&b.id.number))
}

/// The validated abstract anatomy.
///
/// Structures are stored in abstract preorder with siblings in
/// deterministic order; index 0 is the root.
#[derive(Debug, Clone)]
pub struct Anatomy {
    structures: Vec<Structure>,
    parent: Vec<Option<usize>>,
    depth: Vec<u32>,
    subtree_end: Vec<usize>,
    index: BTreeMap<StructureId, usize>,
    aliases: BTreeMap<StructureId, StructureId>,
}

impl Anatomy {
    /// Builds the tree and checks the structural rules (ids, parents,
    /// single root, no cycles). Content rules are left to [`Anatomy::validate`].
    pub fn assemble(root: StructureId, structures: Vec<Structure>) -> Result<Anatomy, AnatomyError> {
        let mut by_id: BTreeMap<StructureId, Structure> = BTreeMap::new();
        for s in structures {
            if !s.id.is_abstract() {
                return Err(AnatomyError::NotAbstract(s.id));
            }
            if let Some(p) = s.parent {
                if !p.is_abstract() {
                    return Err(AnatomyError::NotAbstract(p));
                }
            }
            if let Some(alias) = s.aliases.values().find(|a| a.namespace != Namespace::Staged) {
                return Err(AnatomyError::AliasNotStaged { owner: s.id, alias: *alias });
            }
            let id = s.id;
            if by_id.insert(id, s).is_some() {
                return Err(AnatomyError::DuplicateId(id));
            }
        }
        let root_rec = by_id.get(&root).ok_or(AnatomyError::UnknownRoot(root))?;
        if root_rec.parent.is_some() {
            return Err(AnatomyError::RootHasParent(root));
        }

        let mut children: BTreeMap<StructureId, Vec<StructureId>> = BTreeMap::new();
        for s in by_id.values() {
            match s.parent {
                None if s.id != root => return Err(AnatomyError::ExtraRoot(s.id)),
                None => {}
                Some(p) => {
                    if !by_id.contains_key(&p) {
                        return Err(AnatomyError::MissingParent { child: s.id, parent: p });
                    }
                    children.entry(p).or_default().push(s.id);
                }
            }
        }
        for kids in children.values_mut() {
            kids.sort_by(|a, b| sibling_order(&by_id[a], &by_id[b]));
        }

        // Preorder walk from the root; anything not reached sits on a cycle.
        let mut order: Vec<(StructureId, Option<usize>, u32)> = Vec::with_capacity(by_id.len());
        let mut stack = vec![(root, None, 0u32)];
        while let Some((id, parent, depth)) = stack.pop() {
            let here = order.len();
            order.push((id, parent, depth));
            if let Some(kids) = children.get(&id) {
                for k in kids.iter().rev() {
                    stack.push((*k, Some(here), depth + 1));
                }
            }
        }
        if order.len() != by_id.len() {
            let reached: BTreeSet<StructureId> = order.iter().map(|(id, _, _)| *id).collect();
            let stray = by_id.keys().find(|id| !reached.contains(id)).copied();
            return Err(AnatomyError::Cycle(stray.unwrap_or(root)));
        }

        let n = order.len();
        let mut structures = Vec::with_capacity(n);
        let mut parent = Vec::with_capacity(n);
        let mut depth = Vec::with_capacity(n);
        let mut index = BTreeMap::new();
        for (i, (id, p, d)) in order.into_iter().enumerate() {
            structures.push(by_id.remove(&id).expect("reached ids are present"));
            parent.push(p);
            depth.push(d);
            index.insert(id, i);
        }
        let subtree_end = subtree_ends(&parent);

        let mut aliases = BTreeMap::new();
        for s in &structures {
            for staged in s.aliases.values() {
                aliases.entry(*staged).or_insert(s.id);
            }
        }

        Ok(Anatomy { structures, parent, depth, subtree_end, index, aliases })
    }

    /// [`Anatomy::assemble`] followed by [`Anatomy::validate`]; any
    /// error-severity finding rejects the anatomy. Warnings are returned.
    pub fn from_structures(
        root: StructureId,
        structures: Vec<Structure>,
    ) -> Result<(Anatomy, ValidationReport), AnatomyError> {
        let anatomy = Anatomy::assemble(root, structures)?;
        let report = anatomy.validate();
        if report.error_count() > 0 {
            return Err(AnatomyError::Invalid(report));
        }
        Ok((anatomy, report))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut owners: BTreeMap<StructureId, StructureId> = BTreeMap::new();

        for (i, s) in self.structures.iter().enumerate() {
            if s.stages.is_empty() {
                report.push(FindingRule::EmptyStages, s.id, "structure exists at no stage".into());
            }
            for (stage, staged) in &s.aliases {
                if !s.stages.contains(*stage) {
                    report.push(
                        FindingRule::AliasStageMismatch,
                        s.id,
                        format!("alias {staged} keyed by TS{stage}, which is not in the stage set"),
                    );
                }
                match owners.get(staged) {
                    Some(owner) if *owner != s.id => report.push(
                        FindingRule::AliasCollision,
                        s.id,
                        format!("staged id {staged} already belongs to {owner}"),
                    ),
                    Some(_) => {}
                    None => {
                        owners.insert(*staged, s.id);
                    }
                }
            }
            if let Some(p) = self.parent[i] {
                let orphaned = s.stages.difference(&self.structures[p].stages);
                if !orphaned.is_empty() {
                    let stages: Vec<u8> = orphaned.iter().map(StageNumber::get).collect();
                    report.push(
                        FindingRule::OrphanAtStage,
                        s.id,
                        format!("exists at stages {stages:?} where parent {} does not", self.structures[p].id),
                    );
                }
            }
            for target in &s.isa {
                if !self.index.contains_key(target) {
                    report.push(FindingRule::UnknownIsa, s.id, format!("is_a target {target} is unknown"));
                }
            }
            let mut seen: BTreeSet<String> = BTreeSet::new();
            for c in self.children_of(i) {
                let name: String = self.structures[c].name.chars().flat_map(char::to_lowercase).collect();
                if !seen.insert(name) {
                    report.push(
                        FindingRule::DupSiblingName,
                        self.structures[c].id,
                        format!("name {:?} repeats among children of {}", self.structures[c].name, s.id),
                    );
                }
            }
        }
        report
    }

    pub fn root(&self) -> StructureId {
        self.structures[0].id
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    /// Structures in abstract preorder.
    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    pub fn get(&self, id: StructureId) -> Option<&Structure> {
        self.index.get(&id).map(|&i| &self.structures[i])
    }

    pub fn contains(&self, id: StructureId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn parent_of(&self, id: StructureId) -> Option<StructureId> {
        self.get(id).and_then(|s| s.parent)
    }

    pub fn exists_at(&self, id: StructureId, stage: StageNumber) -> bool {
        self.get(id).is_some_and(|s| s.stages.contains(stage))
    }

    /// Maps a staged `EMAP:` id to the abstract structure that owns it.
    pub fn resolve_alias(&self, staged: StructureId) -> Result<StructureId, AnatomyError> {
        self.aliases.get(&staged).copied().ok_or(AnatomyError::UnknownAlias(staged))
    }

    fn children_of(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        ChildIter { next: i + 1, end: self.subtree_end[i], ends: &self.subtree_end }
    }

    /// The tree restricted to structures that exist at `stage` and whose
    /// whole ancestor chain does too. Empty if the root is absent.
    pub fn staged_view(&self, stage: StageNumber) -> StagedTree {
        self.restrict(Some(stage), |s| s.stages.contains(stage))
    }

    /// The full abstract tree.
    pub fn abstract_view(&self) -> StagedTree {
        self.restrict(None, |_| true)
    }

    fn restrict(&self, stage: Option<StageNumber>, keep: impl Fn(&Structure) -> bool) -> StagedTree {
        let mut mapped: Vec<Option<usize>> = vec![None; self.structures.len()];
        let mut nodes: Vec<TreeNode> = Vec::new();
        for (i, s) in self.structures.iter().enumerate() {
            if !keep(s) {
                continue;
            }
            let parent = match self.parent[i] {
                None => None,
                Some(p) => match mapped[p] {
                    Some(vp) => Some(vp),
                    None => continue,
                },
            };
            let depth = parent.map_or(0, |vp| nodes[vp].depth + 1);
            mapped[i] = Some(nodes.len());
            nodes.push(TreeNode { id: s.id, depth, parent, subtree_end: 0, anatomy_index: i });
        }
        StagedTree::from_nodes(stage, nodes)
    }

    pub fn depth_of(&self, id: StructureId) -> Option<u32> {
        self.index.get(&id).map(|&i| self.depth[i])
    }
}

struct ChildIter<'a> {
    next: usize,
    end: usize,
    ends: &'a [usize],
}

impl Iterator for ChildIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.next >= self.end {
            return None;
        }
        let here = self.next;
        self.next = self.ends[here];
        Some(here)
    }
}

/// Exclusive end of each node's preorder range.
fn subtree_ends(parent: &[Option<usize>]) -> Vec<usize> {
    let mut end: Vec<usize> = (1..=parent.len()).collect();
    for i in (0..parent.len()).rev() {
        if let Some(p) = parent[i] {
            end[p] = end[p].max(end[i]);
        }
    }
    end
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub id: StructureId,
    pub depth: u32,
    /// Index of the parent within the same view.
    pub parent: Option<usize>,
    /// Exclusive end of this node's subtree in preorder.
    pub subtree_end: usize,
    /// Index of the structure in [`Anatomy::structures`].
    pub anatomy_index: usize,
}

/// A preorder tree over abstract ids: a single stage's anatomy, the
/// abstract anatomy (`stage` is `None`) or a re-rooted subtree of either.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagedTree {
    stage: Option<StageNumber>,
    nodes: Vec<TreeNode>,
    index: BTreeMap<StructureId, usize>,
}

impl StagedTree {
    fn from_nodes(stage: Option<StageNumber>, mut nodes: Vec<TreeNode>) -> StagedTree {
        let parents: Vec<Option<usize>> = nodes.iter().map(|n| n.parent).collect();
        for (n, end) in nodes.iter_mut().zip(subtree_ends(&parents)) {
            n.subtree_end = end;
        }
        let index = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        StagedTree { stage, nodes, index }
    }

    pub fn stage(&self) -> Option<StageNumber> {
        self.stage
    }

    pub fn root(&self) -> Option<StructureId> {
        self.nodes.first().map(|n| n.id)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn ids(&self) -> impl Iterator<Item = StructureId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn position(&self, id: StructureId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn contains(&self, id: StructureId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn parent_of(&self, id: StructureId) -> Option<StructureId> {
        let i = self.position(id)?;
        self.nodes[i].parent.map(|p| self.nodes[p].id)
    }

    /// View indices of the children of the node at `index`, in sibling order.
    pub fn children(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let ends: &[TreeNode] = &self.nodes;
        let mut next = index + 1;
        let end = self.nodes[index].subtree_end;
        core::iter::from_fn(move || {
            if next >= end {
                return None;
            }
            let here = next;
            next = ends[here].subtree_end;
            Some(here)
        })
    }

    pub fn is_leaf(&self, index: usize) -> bool {
        self.nodes[index].subtree_end == index + 1
    }

    /// True when the node at `descendant` lies in the subtree of `ancestor`
    /// (a node is in its own subtree).
    pub fn in_subtree(&self, ancestor: usize, descendant: usize) -> bool {
        ancestor <= descendant && descendant < self.nodes[ancestor].subtree_end
    }

    /// Strict descendants of `id` within this view.
    pub fn descendant_count(&self, id: StructureId) -> Result<usize, AnatomyError> {
        let i = self.position(id).ok_or(AnatomyError::NotInView(id))?;
        Ok(self.nodes[i].subtree_end - i - 1)
    }

    pub fn max_depth(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// The subtree rooted at `id`, depths rebased so `id` sits at depth 0.
    pub fn subtree(&self, id: StructureId) -> Result<StagedTree, AnatomyError> {
        let start = self.position(id).ok_or(AnatomyError::NotInView(id))?;
        let base = self.nodes[start].depth;
        let nodes = self.nodes[start..self.nodes[start].subtree_end]
            .iter()
            .map(|n| TreeNode {
                depth: n.depth - base,
                parent: if n.id == id { None } else { n.parent.map(|p| p - start) },
                ..*n
            })
            .collect();
        Ok(StagedTree::from_nodes(self.stage, nodes))
    }
}
