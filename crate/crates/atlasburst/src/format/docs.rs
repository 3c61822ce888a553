//! JSON documents served by the HTTP API and written by the CLI.
//!
//! Geometry numbers are written with exactly nine decimals so equal
//! geometry always serializes to equal bytes.

use std::collections::BTreeMap;

use atlasburst_core::{
    Anatomy, CloudModel, ExpressionState, GeneSymbol, Geometry, Grid, LabelPlan, Orientation, RenderModel, StageNumber, StagedTree,
    StateMap, StructureId, SubsetResult, ViewMode, STAGE_COUNT,
};
use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// A float serialized with nine decimals (`-0` written as `0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed9(pub f64);

pub fn fixed9(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl Serialize for Fixed9 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("non-finite coordinate"));
        }
        RawValue::from_string(fixed9(self.0)).map_err(S::Error::custom)?.serialize(serializer)
    }
}

fn id_str<S: Serializer>(id: &StructureId, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(id)
}

fn opt_id_str<S: Serializer>(id: &Option<StructureId>, s: S) -> Result<S::Ok, S::Error> {
    match id {
        Some(id) => s.collect_str(id),
        None => s.serialize_none(),
    }
}

#[derive(Serialize)]
struct NodeDoc<'a> {
    #[serde(serialize_with = "id_str")]
    id: StructureId,
    depth: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    a0: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a1: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r0: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r1: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x0: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    x1: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y0: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y1: Option<Fixed9>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fill: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hover: Option<&'a str>,
}

fn geometry_nodes(geometry: &Geometry) -> Vec<NodeDoc<'static>> {
    let blank = |id, depth| NodeDoc {
        id,
        depth,
        a0: None,
        a1: None,
        r0: None,
        r1: None,
        x0: None,
        x1: None,
        y0: None,
        y1: None,
        fill: None,
        state: None,
        name: None,
        hover: None,
    };
    match geometry {
        Geometry::Sunburst(arcs) => arcs
            .iter()
            .map(|a| NodeDoc {
                a0: Some(Fixed9(a.start_angle)),
                a1: Some(Fixed9(a.end_angle)),
                r0: Some(Fixed9(a.inner_radius)),
                r1: Some(Fixed9(a.outer_radius)),
                ..blank(a.id, a.depth)
            })
            .collect(),
        Geometry::Icicle(rects) => rects
            .iter()
            .map(|r| NodeDoc {
                x0: Some(Fixed9(r.x0)),
                x1: Some(Fixed9(r.x1)),
                y0: Some(Fixed9(r.y0)),
                y1: Some(Fixed9(r.y1)),
                ..blank(r.id, r.depth)
            })
            .collect(),
    }
}

fn stage_field(mode: ViewMode, stage: StageNumber) -> Option<u8> {
    match mode {
        ViewMode::Staged => Some(stage.get()),
        ViewMode::Abstract => None,
    }
}

#[derive(Serialize)]
struct GeometryDoc<'a> {
    kind: &'static str,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<u8>,
    nodes: Vec<NodeDoc<'a>>,
}

fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string(doc).expect("document serializes")
}

/// `{"kind","mode","stage"?,"nodes":[...]}`. The stage is omitted in
/// abstract mode, where geometry does not depend on it.
pub fn geometry_doc(geometry: &Geometry, mode: ViewMode, stage: StageNumber) -> String {
    to_json(&geometry_value(geometry, mode, stage))
}

fn geometry_value(geometry: &Geometry, mode: ViewMode, stage: StageNumber) -> GeometryDoc<'static> {
    GeometryDoc {
        kind: geometry.kind().token(),
        mode: mode.token(),
        stage: stage_field(mode, stage),
        nodes: geometry_nodes(geometry),
    }
}

#[derive(Serialize)]
struct LabelDoc<'a> {
    #[serde(serialize_with = "id_str")]
    id: StructureId,
    text: &'a str,
    x: Fixed9,
    y: Fixed9,
    orientation: &'static str,
}

fn labels(plan: &LabelPlan) -> Vec<LabelDoc<'_>> {
    plan.iter()
        .map(|l| LabelDoc {
            id: l.id,
            text: &l.text,
            x: Fixed9(l.anchor.0),
            y: Fixed9(l.anchor.1),
            orientation: match l.orientation {
                Orientation::Horizontal => "horizontal",
            },
        })
        .collect()
}

#[derive(Serialize)]
struct RenderDoc<'a> {
    title: &'a str,
    gene: &'a str,
    stage: u8,
    kind: &'static str,
    mode: &'static str,
    nodes: Vec<NodeDoc<'a>>,
    labels: Vec<LabelDoc<'a>>,
}

fn render_value(model: &RenderModel) -> RenderDoc<'_> {
    let nodes = geometry_nodes(&model.geometry)
        .into_iter()
        .zip(&model.nodes)
        .map(|(g, n)| NodeDoc {
            fill: Some(&n.fill),
            state: Some(n.state.token()),
            name: Some(&n.name),
            hover: Some(&n.hover),
            ..g
        })
        .collect();
    RenderDoc {
        title: &model.title,
        gene: model.gene.as_str(),
        stage: model.stage.get(),
        kind: model.kind().token(),
        mode: model.mode.token(),
        nodes,
        labels: labels(&model.labels),
    }
}

/// The geometry document with fill, state, name and hover per node, plus
/// title, gene, stage and labels.
pub fn render_model_doc(model: &RenderModel) -> String {
    to_json(&render_value(model))
}

#[derive(Serialize)]
struct CellDoc<'a> {
    row: usize,
    col: usize,
    gene: &'a str,
    stage: u8,
    model: RenderDoc<'a>,
}

#[derive(Serialize)]
struct GridDoc<'a> {
    columns: usize,
    rows: usize,
    cells: Vec<CellDoc<'a>>,
}

pub fn grid_doc(grid: &Grid) -> String {
    let cells = grid
        .placements
        .iter()
        .zip(&grid.models)
        .map(|(p, m)| CellDoc { row: p.row, col: p.col, gene: m.gene.as_str(), stage: m.stage.get(), model: render_value(m) })
        .collect();
    to_json(&GridDoc { columns: grid.columns, rows: grid.rows, cells })
}

#[derive(Serialize)]
struct CloudNodeDoc<'a> {
    gene: &'a str,
    count: usize,
    x: Fixed9,
    y: Fixed9,
    r: Fixed9,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    selected: bool,
}

#[derive(Serialize)]
struct CloudDoc<'a> {
    stage: u8,
    #[serde(serialize_with = "opt_id_str", skip_serializing_if = "Option::is_none")]
    filter: Option<StructureId>,
    nodes: Vec<CloudNodeDoc<'a>>,
}

/// `{"stage","filter"?,"nodes":[{gene,count,x,y,r}]}`; selected nodes
/// also carry `"selected":true`.
pub fn cloud_doc(cloud: &CloudModel) -> String {
    let nodes = cloud
        .nodes
        .iter()
        .map(|n| CloudNodeDoc {
            gene: n.gene.as_str(),
            count: n.count,
            x: Fixed9(n.center.0),
            y: Fixed9(n.center.1),
            r: Fixed9(n.radius),
            selected: n.selected,
        })
        .collect();
    to_json(&CloudDoc { stage: cloud.stage.get(), filter: cloud.filter, nodes })
}

#[derive(Serialize)]
struct TreeNodeDoc<'a> {
    #[serde(serialize_with = "id_str")]
    id: StructureId,
    name: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    abbr: Option<&'a str>,
    #[serde(serialize_with = "opt_id_str", skip_serializing_if = "Option::is_none")]
    parent: Option<StructureId>,
    depth: u32,
}

#[derive(Serialize)]
struct TreeDoc<'a> {
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    stage: Option<u8>,
    nodes: Vec<TreeNodeDoc<'a>>,
}

/// Nodes of a view in preorder with id, name, abbreviation, parent, depth.
pub fn tree_doc(anatomy: &Anatomy, view: &StagedTree, mode: ViewMode, stage: StageNumber) -> String {
    let structures = anatomy.structures();
    let nodes = view
        .nodes()
        .iter()
        .map(|n| {
            let s = &structures[n.anatomy_index];
            TreeNodeDoc {
                id: n.id,
                name: &s.name,
                abbr: s.abbreviation.as_deref(),
                parent: n.parent.map(|p| view.nodes()[p].id),
                depth: n.depth,
            }
        })
        .collect();
    to_json(&TreeDoc { mode: mode.token(), stage: stage_field(mode, stage), nodes })
}

#[derive(Serialize)]
struct ExpressionDoc<'a> {
    gene: &'a str,
    stage: u8,
    mode: &'static str,
    states: BTreeMap<String, &'static str>,
    profile: Vec<String>,
}

/// `{"gene","stage","mode","states":{id:state},"profile":[ids]}`. `gene`
/// is echoed as requested; `states` may have been computed for another
/// spelling of the same symbol.
pub fn expression_doc<'a>(gene: &GeneSymbol, states: &StateMap, profile: impl IntoIterator<Item = &'a StructureId>) -> String {
    let doc = ExpressionDoc {
        gene: gene.as_str(),
        stage: states.stage.get(),
        mode: states.mode.token(),
        states: states.states.iter().map(|(id, s): (&StructureId, &ExpressionState)| (id.to_string(), s.token())).collect(),
        profile: profile.into_iter().map(ToString::to_string).collect(),
    };
    to_json(&doc)
}

#[derive(Serialize)]
struct SubsetDoc<'a> {
    g1: &'a str,
    g2: &'a str,
    stage: u8,
    subset: bool,
    #[serde(serialize_with = "opt_id_str", skip_serializing_if = "Option::is_none")]
    witness: Option<StructureId>,
}

pub fn subset_doc(g1: &str, g2: &str, stage: StageNumber, result: &SubsetResult) -> String {
    to_json(&SubsetDoc { g1, g2, stage: stage.get(), subset: result.subset, witness: result.witness })
}

#[derive(Serialize)]
struct Counts {
    structures: usize,
    annotations: usize,
    genes: usize,
}

#[derive(Serialize)]
struct MetaDoc<'a> {
    stages: u8,
    version: u64,
    hash: &'a str,
    counts: Counts,
}

pub fn meta_doc(version: u64, hash: &str, structures: usize, annotations: usize, genes: usize) -> String {
    to_json(&MetaDoc { stages: STAGE_COUNT, version, hash, counts: Counts { structures, annotations, genes } })
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    detail: &'a str,
}

pub fn error_doc(code: &str, detail: &str) -> String {
    to_json(&ErrorDoc { error: code, detail })
}

#[derive(Serialize)]
struct VersionDoc {
    version: u64,
}

pub fn version_doc(version: u64) -> String {
    to_json(&VersionDoc { version })
}

#[cfg(test)]
mod tests {
    use super::*;
    use atlasburst_core::{layout, DiagramKind, LayoutParams, NodeArc};

    #[test]
    fn nine_decimals() {
        assert_eq!(fixed9(1.0), "1.000000000");
        assert_eq!(fixed9(-0.0), "0.000000000");
        assert_eq!(fixed9(-1e-12), "0.000000000");
        assert_eq!(fixed9(std::f64::consts::PI), "3.141592654");
        assert_eq!(fixed9(-0.5), "-0.500000000");
    }

    #[test]
    fn one_arc_document() {
        let g = Geometry::Sunburst(vec![NodeArc {
            id: StructureId::abstract_id(1),
            depth: 0,
            start_angle: 0.0,
            end_angle: std::f64::consts::TAU,
            inner_radius: 0.0,
            outer_radius: 1.0,
        }]);
        let stage = StageNumber::new(17).unwrap();
        assert_eq!(
            geometry_doc(&g, ViewMode::Abstract, stage),
            r#"{"kind":"sunburst","mode":"abstract","nodes":[{"id":"EMAPA:1","depth":0,"a0":0.000000000,"a1":6.283185307,"r0":0.000000000,"r1":1.000000000}]}"#
        );
        assert!(geometry_doc(&g, ViewMode::Staged, stage).contains(r#""stage":17"#));
    }

    #[test]
    fn documents_are_valid_json() {
        let text = r#"{"format":"atlasburst-anatomy/1","root":"EMAPA:1","structures":[
            {"id":"EMAPA:1","name":"mouse","stages":["1-26"]},
            {"id":"EMAPA:2","name":"eye","abbr":"E","parent":"EMAPA:1","stages":["12-26"],"major_system":true}]}"#;
        let anatomy = crate::format::parse_anatomy(text.as_bytes(), Default::default()).unwrap().anatomy;
        let stage = StageNumber::new(12).unwrap();
        let view = anatomy.staged_view(stage);
        let g = layout(&view, &LayoutParams::new(DiagramKind::Icicle)).unwrap();
        for doc in [geometry_doc(&g, ViewMode::Staged, stage), tree_doc(&anatomy, &view, ViewMode::Staged, stage)] {
            let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
            assert_eq!(v["nodes"].as_array().unwrap().len(), 2);
        }
        let tree: serde_json::Value = serde_json::from_str(&tree_doc(&anatomy, &view, ViewMode::Staged, stage)).unwrap();
        assert_eq!(tree["nodes"][1]["parent"], "EMAPA:1");
        assert_eq!(tree["nodes"][1]["abbr"], "E");
        assert_eq!(error_doc("bad_stage", "x\"y"), r#"{"error":"bad_stage","detail":"x\"y"}"#);
    }
}
