//! Request routing and parameter handling, independent of the HTTP stack.

use std::collections::BTreeMap;
use std::sync::Arc;

use atlasburst_core::{
    build_cloud, compose_grid_with, compose_with_states, expression_profile, layout, profile_subset, propagate_in_view,
    reroot, search_prefix, view_for, CloudError, ComposeError, DiagramKind, GeneSymbol, Geometry,
    GridSpec, LayoutError, LayoutParams, StageNumber, StageSet, StagedTree, StateMap, StructureId, ViewMode,
};

use super::{Snapshot, StateCache};
use crate::format::docs;
use crate::svg::{render_grid_svg, render_svg};

pub const JSON: &str = "application/json";
pub const SVG: &str = "image/svg+xml";

const DEFAULT_SVG_SIZE: u32 = 400;
const MAX_SVG_SIZE: u32 = 10_000;
const MAX_CELLS: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub content_type: &'static str,
    /// Snapshot version the body was computed from.
    pub version: u64,
    pub body: String,
}

impl Response {
    pub fn json(status: u16, body: String, version: u64) -> Response {
        Response { status, content_type: JSON, version, body }
    }

    pub fn error(status: u16, code: &str, detail: &str, version: u64) -> Response {
        Response::json(status, docs::error_doc(code, detail), version)
    }
}

/// A failed request: status, error code, detail.
struct Fail(u16, &'static str, String);

fn bad(detail: impl Into<String>) -> Fail {
    Fail(400, "bad_parameter", detail.into())
}

fn unknown_structure(id: StructureId) -> Fail {
    Fail(404, "unknown_structure", format!("{id} is not in the anatomy"))
}

struct Query(BTreeMap<String, String>);

impl Query {
    fn parse(raw: &str) -> Query {
        let mut map = BTreeMap::new();
        for (k, v) in form_urlencoded::parse(raw.as_bytes()) {
            map.entry(k.into_owned()).or_insert_with(|| v.into_owned());
        }
        Query(map)
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    fn require(&self, key: &str) -> Result<&str, Fail> {
        self.get(key).ok_or_else(|| bad(format!("missing parameter {key:?}")))
    }

    fn stage_opt(&self) -> Result<Option<StageNumber>, Fail> {
        self.get("stage").map(parse_stage).transpose()
    }

    fn stage(&self) -> Result<StageNumber, Fail> {
        parse_stage(self.require("stage")?)
    }

    fn mode(&self) -> Result<ViewMode, Fail> {
        match self.get("mode") {
            None => Ok(ViewMode::Abstract),
            Some(m) => m.parse().map_err(|()| bad(format!("mode must be staged or abstract, got {m:?}"))),
        }
    }

    fn kind(&self) -> Result<DiagramKind, Fail> {
        match self.get("kind") {
            None => Ok(DiagramKind::Sunburst),
            Some(k) => k.parse().map_err(|()| bad(format!("kind must be sunburst or icicle, got {k:?}"))),
        }
    }

    fn gene(&self, key: &str) -> Result<GeneSymbol, Fail> {
        let raw = self.require(key)?;
        GeneSymbol::new(raw).map_err(|e| bad(e.to_string()))
    }

    fn structure(&self, key: &str) -> Result<Option<StructureId>, Fail> {
        self.get(key).map(|raw| raw.parse().map_err(|e: atlasburst_core::IdError| bad(e.to_string()))).transpose()
    }

    fn number<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, Fail> {
        self.get(key).map(|raw| raw.parse().map_err(|_| bad(format!("{key} must be a positive integer")))).transpose()
    }
}

fn parse_stage(raw: &str) -> Result<StageNumber, Fail> {
    let n: i64 = raw.parse().map_err(|_| bad(format!("stage must be an integer, got {raw:?}")))?;
    StageNumber::new(n).map_err(|e| Fail(400, "stage_out_of_range", e.to_string()))
}

/// In staged mode the stage picks the view; in abstract mode it only
/// affects colors, so it may be omitted where no colors are involved.
fn view_stage(q: &Query, mode: ViewMode) -> Result<StageNumber, Fail> {
    match (mode, q.stage_opt()?) {
        (_, Some(s)) => Ok(s),
        (ViewMode::Abstract, None) => Ok(StageNumber::FIRST),
        (ViewMode::Staged, None) => Err(bad("missing parameter \"stage\"")),
    }
}

struct Ctx<'a> {
    snapshot: &'a Snapshot,
    cache: Option<&'a StateCache>,
}

impl Ctx<'_> {
    /// States over the full view; re-rooted views are subtrees of it and
    /// whole subtrees see the same descendants.
    fn states(&self, view: &StagedTree, gene: &GeneSymbol, stage: StageNumber, mode: ViewMode) -> Arc<StateMap> {
        match self.cache {
            Some(cache) => cache.states(self.snapshot, gene, stage, mode),
            None => Arc::new(propagate_in_view(&self.snapshot.store, &self.snapshot.anatomy, view, gene, stage, mode)),
        }
    }

    /// The view after applying `root=` (subtree) or `clicked=` (zoom rule).
    fn zoomed_view(&self, q: &Query, stage: StageNumber, mode: ViewMode) -> Result<StagedTree, Fail> {
        let view = view_for(&self.snapshot.anatomy, stage, mode);
        let check = |id: StructureId| -> Result<(), Fail> {
            if !self.snapshot.anatomy.contains(id) {
                return Err(unknown_structure(id));
            }
            if !view.contains(id) {
                return Err(Fail(404, "not_in_view", format!("{id} does not exist at TS{stage}")));
            }
            Ok(())
        };
        match (q.structure("root")?, q.structure("clicked")?) {
            (Some(_), Some(_)) => Err(bad("root and clicked are mutually exclusive")),
            (Some(root), None) => {
                check(root)?;
                view.subtree(root).map_err(|e| Fail(404, "not_in_view", e.to_string()))
            }
            (None, Some(clicked)) => {
                check(clicked)?;
                reroot(&view, clicked).map_err(|e| Fail(404, "not_in_view", e.to_string()))
            }
            (None, None) => Ok(view),
        }
    }

    fn meta(&self) -> Result<String, Fail> {
        let s = self.snapshot;
        Ok(docs::meta_doc(s.version, &s.content_hash, s.anatomy.len(), s.store.len(), s.store.genes().len()))
    }

    fn anatomy(&self, q: &Query) -> Result<String, Fail> {
        let mode = q.mode()?;
        let stage = view_stage(q, mode)?;
        let view = view_for(&self.snapshot.anatomy, stage, mode);
        Ok(docs::tree_doc(&self.snapshot.anatomy, &view, mode, stage))
    }

    fn layout(&self, q: &Query) -> Result<String, Fail> {
        let (mode, kind) = (q.mode()?, q.kind()?);
        let stage = view_stage(q, mode)?;
        let view = self.zoomed_view(q, stage, mode)?;
        let geometry = match layout(&view, &LayoutParams::new(kind)) {
            Ok(g) => g,
            Err(LayoutError::EmptyView) => match kind {
                DiagramKind::Sunburst => Geometry::Sunburst(Vec::new()),
                DiagramKind::Icicle => Geometry::Icicle(Vec::new()),
            },
            Err(e) => return Err(Fail(404, "unknown_structure", e.to_string())),
        };
        Ok(docs::geometry_doc(&geometry, mode, stage))
    }

    fn expression(&self, q: &Query) -> Result<String, Fail> {
        let (gene, stage, mode) = (q.gene("gene")?, q.stage()?, q.mode()?);
        let view = view_for(&self.snapshot.anatomy, stage, mode);
        let states = self.states(&view, &gene, stage, mode);
        let profile = expression_profile(&self.snapshot.store, &self.snapshot.anatomy, &gene, stage);
        Ok(docs::expression_doc(&gene, &states, &profile))
    }

    fn subset(&self, q: &Query) -> Result<String, Fail> {
        let (g1, g2, stage) = (q.gene("g1")?, q.gene("g2")?, q.stage()?);
        let result = profile_subset(&self.snapshot.store, &self.snapshot.anatomy, &g1, &g2, stage);
        Ok(docs::subset_doc(g1.as_str(), g2.as_str(), stage, &result))
    }

    fn grid_spec(&self, q: &Query) -> Result<GridSpec, Fail> {
        let genes = q
            .require("genes")?
            .split(',')
            .map(|g| GeneSymbol::new(g.trim()).map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        let mut stages = Vec::new();
        for token in q.require("stages")?.split(',') {
            let set = StageSet::parse_token(token).map_err(|e| Fail(400, "stage_out_of_range", e.to_string()))?;
            stages.extend(set.iter());
        }
        let cells = genes.len() * stages.len();
        if cells > MAX_CELLS {
            return Err(bad(format!("{cells} cells requested, at most {MAX_CELLS} allowed")));
        }
        let columns = q.number::<usize>("columns")?.unwrap_or(stages.len());
        if columns == 0 {
            return Err(bad("columns must be a positive integer"));
        }
        Ok(GridSpec::product(&genes, &stages, columns, q.mode()?, q.kind()?))
    }

    fn grid(&self, spec: &GridSpec) -> Result<atlasburst_core::Grid, Fail> {
        let s = self.snapshot;
        compose_grid_with(&s.anatomy, &s.store, spec, &s.palette, |view, gene, stage| {
            self.states(view, gene, stage, spec.mode)
        })
        .map_err(|e| match e {
            ComposeError::Layout(LayoutError::EmptyView) => Fail(404, "empty_view", "nothing exists at that stage".into()),
            other => bad(other.to_string()),
        })
    }

    fn compose(&self, q: &Query) -> Result<String, Fail> {
        let spec = self.grid_spec(q)?;
        Ok(docs::grid_doc(&self.grid(&spec)?))
    }

    fn render(&self, q: &Query) -> Result<String, Fail> {
        let size = q.number::<u32>("size")?.unwrap_or(DEFAULT_SVG_SIZE);
        if size == 0 || size > MAX_SVG_SIZE {
            return Err(bad(format!("size must be 1..={MAX_SVG_SIZE}")));
        }
        let spec = self.grid_spec(q)?;
        let zoomed = q.get("root").is_some() || q.get("clicked").is_some();
        if spec.cells.len() == 1 {
            let (gene, stage) = &spec.cells[0];
            let s = self.snapshot;
            let view = if zoomed { self.zoomed_view(q, *stage, spec.mode)? } else { view_for(&s.anatomy, *stage, spec.mode) };
            let geometry = layout(&view, &LayoutParams::new(spec.kind))
                .map_err(|_| Fail(404, "empty_view", "nothing exists at that stage".into()))?;
            let states = self.states(&view, gene, *stage, spec.mode);
            let model = compose_with_states(&s.anatomy, &s.store, &view, geometry, &states, &s.palette);
            return render_svg(&model, size).map_err(|e| bad(e.to_string()));
        }
        if zoomed {
            return Err(bad("root and clicked apply to single diagrams only"));
        }
        render_grid_svg(&self.grid(&spec)?, size).map_err(|e| bad(e.to_string()))
    }

    fn cloud(&self, q: &Query) -> Result<String, Fail> {
        let stage = q.stage()?;
        let filter = q.structure("structure")?;
        if let Some(f) = filter {
            if !self.snapshot.anatomy.contains(f) {
                return Err(unknown_structure(f));
            }
        }
        let mut cloud = build_cloud(&self.snapshot.store, &self.snapshot.anatomy, stage, filter).map_err(|e| match e {
            CloudError::FilterAbsent(..) => Fail(404, "not_in_view", e.to_string()),
            other => bad(other.to_string()),
        })?;
        if let Some(prefix) = q.get("q") {
            let keep = search_prefix(&cloud, prefix);
            cloud.nodes.retain(|n| keep.binary_search(&n.gene).is_ok());
        }
        Ok(docs::cloud_doc(&cloud))
    }
}

/// Answers one request against `snapshot`. Identical requests against the
/// same snapshot give identical bodies, with or without `cache`.
pub fn handle_request(snapshot: &Snapshot, cache: Option<&StateCache>, method: &str, path: &str, query: &str) -> Response {
    let version = snapshot.version;
    let ctx = Ctx { snapshot, cache };
    let q = Query::parse(query);
    type Route = fn(&Ctx, &Query) -> Result<String, Fail>;
    let (route, content_type): (Route, _) = match path {
        "/api/v1/meta" => (|c, _| c.meta(), JSON),
        "/api/v1/anatomy" => (|c, q| c.anatomy(q), JSON),
        "/api/v1/layout" => (|c, q| c.layout(q), JSON),
        "/api/v1/expression" => (|c, q| c.expression(q), JSON),
        "/api/v1/subset" => (|c, q| c.subset(q), JSON),
        "/api/v1/compose" => (|c, q| c.compose(q), JSON),
        "/api/v1/cloud" => (|c, q| c.cloud(q), JSON),
        "/api/v1/render.svg" => (|c, q| c.render(q), SVG),
        _ => return Response::error(404, "not_found", &format!("no route {path}"), version),
    };
    if method != "GET" && method != "HEAD" {
        return Response::error(405, "method_not_allowed", "the API is read-only", version);
    }
    match route(&ctx, &q) {
        Ok(body) => Response { status: 200, content_type, version, body },
        Err(Fail(status, code, detail)) => Response::error(status, code, &detail, version),
    }
}
