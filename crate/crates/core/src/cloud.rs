//! The gene cloud: one node per gene annotated at a stage, packed into a
//! square grid in alphabetical order so gene families sit together.

use alloc::vec::Vec;

use thiserror::Error;

use crate::anatomy::Anatomy;
use crate::expression::{AnnotationStore, GeneSymbol};
use crate::id::{StageNumber, StructureId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CloudError {
    #[error("filter structure {0} does not exist at TS{1}")]
    FilterAbsent(StructureId, StageNumber),
    #[error("gene {0} is not in the cloud")]
    NotInCloud(GeneSymbol),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudNode {
    pub gene: GeneSymbol,
    /// Annotations at the stage (within the filter subtree when filtered).
    pub count: usize,
    pub radius: f64,
    pub center: (f64, f64),
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloudModel {
    pub stage: StageNumber,
    pub filter: Option<StructureId>,
    /// Sorted alphabetically (case-insensitive) by gene.
    pub nodes: Vec<CloudNode>,
}

impl CloudModel {
    pub fn contains(&self, gene: &GeneSymbol) -> bool {
        self.position(gene).is_some()
    }

    fn position(&self, gene: &GeneSymbol) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.gene.cmp(gene)).ok()
    }

    /// Marks the nodes whose gene is in `selection`.
    pub fn apply_selection(&mut self, selection: &Selection) {
        for n in &mut self.nodes {
            n.selected = selection.contains(&n.gene);
        }
    }

    pub fn genes(&self) -> impl Iterator<Item = &GeneSymbol> {
        self.nodes.iter().map(|n| &n.gene)
    }
}

/// Builds the cloud for `stage`. With a filter, only annotations on the
/// filter structure or its descendants in the staged anatomy are counted.
pub fn build_cloud(
    store: &AnnotationStore,
    anatomy: &Anatomy,
    stage: StageNumber,
    filter: Option<StructureId>,
) -> Result<CloudModel, CloudError> {
    let annotations = store.at_stage(stage);
    let mut nodes: Vec<CloudNode> = Vec::new();
    let mut push = |gene: &GeneSymbol| match nodes.last_mut() {
        Some(last) if last.gene == *gene => last.count += 1,
        _ => nodes.push(CloudNode { gene: gene.clone(), count: 1, radius: 0.0, center: (0.0, 0.0), selected: false }),
    };
    match filter {
        None => annotations.iter().for_each(|a| push(&a.gene)),
        Some(f) => {
            let view = anatomy.staged_view(stage);
            let root = view.position(f).ok_or(CloudError::FilterAbsent(f, stage))?;
            for a in annotations {
                if view.position(a.structure).is_some_and(|i| view.in_subtree(root, i)) {
                    push(&a.gene);
                }
            }
        }
    }
    cloud_layout(&mut nodes);
    Ok(CloudModel { stage, filter, nodes })
}

/// Row-major square grid with `ceil(sqrt(n))` columns and square cells;
/// radius is half a cell scaled by `sqrt(count / max_count)`.
pub fn cloud_layout(nodes: &mut [CloudNode]) {
    if nodes.is_empty() {
        return;
    }
    let n = nodes.len();
    let mut columns = libm::sqrt(n as f64) as usize;
    while columns * columns < n {
        columns += 1;
    }
    let cell = 1.0 / columns as f64;
    let max_count = nodes.iter().map(|c| c.count).max().unwrap_or(1) as f64;
    for (i, node) in nodes.iter_mut().enumerate() {
        let (row, col) = (i / columns, i % columns);
        node.center = ((col as f64 + 0.5) * cell, (row as f64 + 0.5) * cell);
        node.radius = 0.5 * cell * libm::sqrt(node.count as f64 / max_count);
    }
}

/// Genes whose symbol starts with `prefix`, ignoring case, in cloud order.
pub fn search_prefix(cloud: &CloudModel, prefix: &str) -> Vec<GeneSymbol> {
    let prefix: alloc::string::String = prefix.chars().flat_map(char::to_lowercase).collect();
    cloud.nodes.iter().filter(|n| n.gene.key().starts_with(&prefix)).map(|n| n.gene.clone()).collect()
}

/// Genes picked for a query, in the order they were picked.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    genes: Vec<GeneSymbol>,
}

impl Selection {
    pub fn genes(&self) -> &[GeneSymbol] {
        &self.genes
    }

    pub fn contains(&self, gene: &GeneSymbol) -> bool {
        self.genes.contains(gene)
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    /// Adds `gene` if absent, removes it if present.
    pub fn toggle(&self, cloud: &CloudModel, gene: &GeneSymbol) -> Result<Selection, CloudError> {
        if !cloud.contains(gene) {
            return Err(CloudError::NotInCloud(gene.clone()));
        }
        let mut genes = self.genes.clone();
        match genes.iter().position(|g| g == gene) {
            Some(i) => {
                genes.remove(i);
            }
            None => genes.push(gene.clone()),
        }
        Ok(Selection { genes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anatomy::tests::{a, limb_fixture, ts};
    use crate::expression::{Annotation, Level};
    use alloc::vec;

    fn gene(s: &str) -> GeneSymbol {
        GeneSymbol::new(s).unwrap()
    }

    fn ann(g: &str, s: u64, stage: i64) -> Annotation {
        Annotation { gene: gene(g), structure: a(s), stage: ts(stage), level: Level::Weak, source_ref: None }
    }

    fn fixture() -> (Anatomy, AnnotationStore) {
        let anatomy = limb_fixture();
        let records = vec![
            ann("Shh", 4, 20),
            ann("Bmp4", 2, 20),
            ann("Bmp4", 3, 20),
            ann("Bmp4", 16105, 20),
            ann("Bmp2", 16105, 20),
            ann("Shh", 1, 12),
        ];
        let store = AnnotationStore::build(&anatomy, records).unwrap().0;
        (anatomy, store)
    }

    fn node(count: usize) -> CloudNode {
        CloudNode { gene: gene("x"), count, radius: 0.0, center: (0.0, 0.0), selected: false }
    }

    #[test]
    fn one_node_per_annotated_gene() {
        let (anatomy, store) = fixture();
        let cloud = build_cloud(&store, &anatomy, ts(20), None).unwrap();
        let genes: Vec<&str> = cloud.genes().map(|g| g.as_str()).collect();
        assert_eq!(genes, ["Bmp2", "Bmp4", "Shh"]);
        assert_eq!(cloud.nodes[1].count, 3);
        assert!(build_cloud(&store, &anatomy, ts(5), None).unwrap().nodes.is_empty());
    }

    #[test]
    fn filter_restricts_to_subtree() {
        let (anatomy, store) = fixture();
        let limb = build_cloud(&store, &anatomy, ts(20), Some(a(2))).unwrap();
        let genes: Vec<&str> = limb.genes().map(|g| g.as_str()).collect();
        assert_eq!(genes, ["Bmp4", "Shh"]);
        assert_eq!(limb.nodes[0].count, 2);
        assert_eq!(
            build_cloud(&store, &anatomy, ts(12), Some(a(3))),
            Err(CloudError::FilterAbsent(a(3), ts(12)))
        );
        assert!(build_cloud(&store, &anatomy, ts(20), Some(a(999))).is_err());
    }

    #[test]
    fn four_nodes_make_a_two_by_two_grid() {
        let mut nodes = vec![node(1), node(2), node(3), node(4)];
        cloud_layout(&mut nodes);
        let centers: Vec<(f64, f64)> = nodes.iter().map(|n| n.center).collect();
        assert_eq!(centers, [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)]);
        assert_eq!(nodes[3].radius, 0.25);
        assert_eq!(nodes[0].radius, 0.125);
    }

    #[test]
    fn single_node_fills_the_square() {
        let mut nodes = vec![node(7)];
        cloud_layout(&mut nodes);
        assert_eq!((nodes[0].center, nodes[0].radius), ((0.5, 0.5), 0.5));
    }

    #[test]
    fn grid_columns_round_up() {
        let mut nodes: Vec<CloudNode> = (1..=5).map(node).collect();
        cloud_layout(&mut nodes);
        // 3 columns
        assert!((nodes[3].center.0 - 1.0 / 6.0).abs() < 1e-15);
        assert!((nodes[3].center.1 - 0.5).abs() < 1e-15);
        let largest = nodes.iter().max_by(|a, b| a.radius.total_cmp(&b.radius)).unwrap();
        assert_eq!(largest.count, 5);
    }

    #[test]
    fn prefix_search() {
        let (anatomy, store) = fixture();
        let cloud = build_cloud(&store, &anatomy, ts(20), None).unwrap();
        assert_eq!(search_prefix(&cloud, "Bmp"), [gene("Bmp2"), gene("Bmp4")]);
        assert_eq!(search_prefix(&cloud, "bMP").len(), 2);
        assert_eq!(search_prefix(&cloud, "").len(), 3);
        assert!(search_prefix(&cloud, "Wnt").is_empty());
    }

    #[test]
    fn selection_toggles_in_order() {
        let (anatomy, store) = fixture();
        let mut cloud = build_cloud(&store, &anatomy, ts(20), None).unwrap();
        let empty = Selection::default();
        let one = empty.toggle(&cloud, &gene("Bmp2")).unwrap();
        let two = one.toggle(&cloud, &gene("Bmp4")).unwrap();
        assert_eq!(two.genes(), [gene("Bmp2"), gene("Bmp4")]);
        assert_eq!(one.toggle(&cloud, &gene("bmp2")).unwrap(), empty);
        assert_eq!(two.toggle(&cloud, &gene("Wnt1")), Err(CloudError::NotInCloud(gene("Wnt1"))));
        cloud.apply_selection(&two);
        assert_eq!(cloud.nodes.iter().filter(|n| n.selected).count(), 2);
    }
}
