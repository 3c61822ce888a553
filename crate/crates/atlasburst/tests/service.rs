mod common;

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use atlasburst::fixtures::ANNOTATIONS_FILE;
use atlasburst::format::docs::geometry_doc;
use atlasburst::service::{handle_request, serve_with_shutdown, AtlasService, ServiceConfig, StateCache, VERSION_HEADER};
use atlasburst_core::{layout, profile_subset, view_for, DiagramKind, LayoutParams, ViewMode};
use common::*;
use serde_json::Value;

fn service() -> (tempfile::TempDir, AtlasService) {
    let dir = data_dir(ANATOMY, ANNOTATIONS);
    let svc = AtlasService::start(ServiceConfig::new(dir.path())).unwrap();
    (dir, svc)
}

fn get(svc: &AtlasService, path: &str, query: &str) -> (u16, Value) {
    let r = svc.handle("GET", path, query);
    assert_eq!(r.content_type, "application/json", "{path}?{query}");
    (r.status, serde_json::from_str(&r.body).unwrap())
}

#[test]
fn layout_matches_library_geometry() {
    let (_dir, svc) = service();
    let snap = svc.snapshot();
    for (mode, kind, query) in [
        (ViewMode::Abstract, DiagramKind::Sunburst, "stage=17"),
        (ViewMode::Staged, DiagramKind::Sunburst, "mode=staged&stage=17"),
        (ViewMode::Staged, DiagramKind::Icicle, "mode=staged&stage=12&kind=icicle"),
    ] {
        let r = svc.handle("GET", "/api/v1/layout", query);
        assert_eq!(r.status, 200);
        let view = view_for(&snap.anatomy, stage(if query.contains("12") { 12 } else { 17 }), mode);
        let g = layout(&view, &LayoutParams::new(kind)).unwrap();
        let stage_n = stage(if query.contains("12") { 12 } else { 17 });
        assert_eq!(r.body, geometry_doc(&g, mode, stage_n), "{query}");
    }
}

#[test]
fn abstract_layout_ignores_stage() {
    let (_dir, svc) = service();
    let a = svc.handle("GET", "/api/v1/layout", "stage=3");
    let b = svc.handle("GET", "/api/v1/layout", "stage=20");
    assert_eq!(a.body, b.body);
    let staged = svc.handle("GET", "/api/v1/layout", "mode=staged&stage=3");
    assert_ne!(a.body, staged.body);
}

#[test]
fn unknown_gene_is_all_no_info() {
    let (_dir, svc) = service();
    let (status, doc) = get(&svc, "/api/v1/expression", "gene=Nope1&stage=12&mode=staged");
    assert_eq!(status, 200);
    let states = doc["states"].as_object().unwrap();
    assert_eq!(states.len(), anatomy().staged_view(stage(12)).len());
    assert!(states.values().all(|v| v == "no_info"));
    assert_eq!(doc["profile"], Value::Array(Vec::new()));
}

#[test]
fn expression_states() {
    let (_dir, svc) = service();
    let (_, doc) = get(&svc, "/api/v1/expression", "gene=pax6&stage=12&mode=staged");
    assert_eq!(doc["gene"], "pax6");
    assert_eq!(doc["states"]["EMAPA:16199"], "strong");
    assert_eq!(doc["states"]["EMAPA:16198"], "propagated");
    assert_eq!(doc["states"]["EMAPA:16846"], "no_info");
    let (_, wnt) = get(&svc, "/api/v1/expression", "gene=Wnt1&stage=12&mode=staged");
    assert_eq!(wnt["states"]["EMAPA:16846"], "not_detected");
    assert_eq!(wnt["states"]["EMAPA:16039"], "no_info");
}

#[test]
fn error_statuses() {
    let (_dir, svc) = service();
    let cases = [
        ("/api/v1/layout", "mode=staged&stage=27", 400, "stage_out_of_range"),
        ("/api/v1/layout", "mode=staged&stage=0", 400, "stage_out_of_range"),
        ("/api/v1/layout", "mode=staged", 400, "bad_parameter"),
        ("/api/v1/layout", "mode=sideways&stage=3", 400, "bad_parameter"),
        ("/api/v1/layout", "stage=12&root=EMAPA:99999", 404, "unknown_structure"),
        ("/api/v1/layout", "mode=staged&stage=3&root=EMAPA:16198", 404, "not_in_view"),
        ("/api/v1/layout", "stage=12&root=EMAPA:16198&clicked=EMAPA:16198", 400, "bad_parameter"),
        ("/api/v1/expression", "stage=12", 400, "bad_parameter"),
        ("/api/v1/cloud", "stage=12&structure=EMAPA:99999", 404, "unknown_structure"),
        ("/api/v1/cloud", "stage=3&structure=EMAPA:16198", 404, "not_in_view"),
        ("/api/v1/compose", "genes=Pax6&stages=12-27", 400, "stage_out_of_range"),
        ("/api/v1/nope", "", 404, "not_found"),
    ];
    for (path, query, status, code) in cases {
        let (s, doc) = get(&svc, path, query);
        assert_eq!((s, doc["error"].as_str().unwrap()), (status, code), "{path}?{query}");
        assert!(doc["detail"].is_string());
    }
    let r = svc.handle("POST", "/api/v1/meta", "");
    assert_eq!(r.status, 405);
    assert_eq!(svc.handle("GET", "/admin/reload", "").status, 405);
    assert_eq!(svc.handle("HEAD", "/api/v1/meta", "").status, 200);
}

#[test]
fn too_many_cells() {
    let (_dir, svc) = service();
    let genes: Vec<String> = (0..50).map(|i| format!("G{i}")).collect();
    let (s, doc) = get(&svc, "/api/v1/compose", &format!("genes={}&stages=1-26", genes.join(",")));
    assert_eq!(s, 400);
    assert_eq!(doc["error"], "bad_parameter");
}

#[test]
fn meta_counts() {
    let (_dir, svc) = service();
    let (s, doc) = get(&svc, "/api/v1/meta", "");
    assert_eq!(s, 200);
    assert_eq!(doc["stages"], 26);
    assert_eq!(doc["version"], 1);
    assert_eq!(doc["counts"]["structures"], 15);
    assert_eq!(doc["counts"]["annotations"], 18);
    assert_eq!(doc["counts"]["genes"], 11);
    assert_eq!(doc["hash"].as_str().unwrap().len(), 64);
}

#[test]
fn anatomy_tree() {
    let (_dir, svc) = service();
    let (_, doc) = get(&svc, "/api/v1/anatomy", "mode=staged&stage=1");
    let nodes = doc["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 5);
    assert_eq!(nodes[0]["id"], "EMAPA:25765");
    assert!(nodes[0].get("parent").is_none());
    assert!(nodes[1..].iter().all(|n| n["parent"] == "EMAPA:25765" && n["depth"] == 1));
    let (_, abs) = get(&svc, "/api/v1/anatomy", "");
    assert_eq!(abs["nodes"].as_array().unwrap().len(), 15);
    assert!(abs.get("stage").is_none());
    assert_eq!(abs["mode"], "abstract");
}

#[test]
fn subset_matches_library() {
    let (_dir, svc) = service();
    let snap = svc.snapshot();
    for a in FAMILY {
        for b in FAMILY {
            let (_, doc) = get(&svc, "/api/v1/subset", &format!("g1={a}&g2={b}&stage=17"));
            let expected = profile_subset(&snap.store, &snap.anatomy, &gene(a), &gene(b), stage(17));
            assert_eq!(doc["subset"], expected.subset);
            match expected.witness {
                Some(w) => assert_eq!(doc["witness"], w.to_string()),
                None => assert!(doc.get("witness").is_none()),
            }
        }
    }
}

#[test]
fn compose_grid_doc() {
    let (_dir, svc) = service();
    let (s, doc) = get(&svc, "/api/v1/compose", "genes=gA,gB&stages=16-17&columns=1&mode=staged");
    assert_eq!(s, 200);
    assert_eq!(doc["columns"], 1);
    assert_eq!(doc["rows"], 4);
    let cells = doc["cells"].as_array().unwrap();
    let order: Vec<_> = cells.iter().map(|c| (c["gene"].as_str().unwrap(), c["stage"].as_u64().unwrap())).collect();
    assert_eq!(order, [("gA", 16), ("gA", 17), ("gB", 16), ("gB", 17)]);
    assert!(cells.iter().enumerate().all(|(i, c)| c["row"] == i && c["col"] == 0));
}

#[test]
fn cloud_prefix_search() {
    let (_dir, svc) = service();
    let (_, all) = get(&svc, "/api/v1/cloud", "stage=12");
    assert_eq!(all["nodes"].as_array().unwrap().len(), 7);
    let (_, eye) = get(&svc, "/api/v1/cloud", "stage=12&structure=EMAPA:16198");
    let genes: Vec<_> = eye["nodes"].as_array().unwrap().iter().map(|n| n["gene"].clone()).collect();
    assert_eq!(genes, EYE_GENES);
    let (_, s) = get(&svc, "/api/v1/cloud", "stage=12&q=s");
    let genes: Vec<_> = s["nodes"].as_array().unwrap().iter().map(|n| n["gene"].as_str().unwrap().to_string()).collect();
    assert_eq!(genes, ["Shh", "Six3", "Sox2"]);
}

#[test]
fn render_svg_route() {
    let (_dir, svc) = service();
    let r = svc.handle("GET", "/api/v1/render.svg", "genes=Pax6&stages=12&mode=staged&size=200");
    assert_eq!((r.status, r.content_type), (200, "image/svg+xml"));
    assert!(r.body.starts_with("<svg") || r.body.starts_with("<?xml"));
    let zoom = svc.handle("GET", "/api/v1/render.svg", "genes=Pax6&stages=12&mode=staged&clicked=EMAPA:16198");
    assert_eq!(zoom.status, 200);
    assert_ne!(zoom.body, r.body);
    let grid = svc.handle("GET", "/api/v1/render.svg", "genes=Pax6,Sox2&stages=12");
    assert_eq!(grid.status, 200);
    assert!(grid.body.contains("class=\"cell\""));
    let bad = svc.handle("GET", "/api/v1/render.svg", "genes=Pax6&stages=12&size=0");
    assert_eq!((bad.status, bad.content_type), (400, "application/json"));
}

#[test]
fn cache_is_transparent() {
    let (_dir, svc) = service();
    let snap = svc.snapshot();
    let cache = StateCache::new(std::num::NonZeroUsize::new(2).unwrap());
    let queries = [
        ("/api/v1/expression", "gene=gD&stage=17&mode=staged"),
        ("/api/v1/expression", "gene=gD&stage=17"),
        ("/api/v1/compose", "genes=gA,gB,gC,gD&stages=16,17&mode=staged"),
        ("/api/v1/render.svg", "genes=Pax6&stages=12&root=EMAPA:16198"),
        ("/api/v1/expression", "gene=GD&stage=17&mode=staged"),
    ];
    for _ in 0..2 {
        for (path, q) in queries {
            let plain = handle_request(&snap, None, "GET", path, q);
            let cached = handle_request(&snap, Some(&cache), "GET", path, q);
            assert_eq!(plain.body, cached.body, "{path}?{q}");
        }
    }
    assert_eq!(cache.len(), 2);
}

#[test]
fn reload_bumps_version_and_failed_reload_keeps_old() {
    let (dir, svc) = service();
    let before = svc.handle("GET", "/api/v1/expression", "gene=Shh&stage=12&mode=staged");
    assert_eq!(before.version, 1);
    let extra = format!("{ANNOTATIONS}{}\n", r#"{"gene":"Shh","structure":"EMAPA:16199","stage":12,"level":"weak"}"#);
    std::fs::write(dir.path().join(ANNOTATIONS_FILE), extra).unwrap();
    // The loaded snapshot is immutable until reload.
    assert_eq!(svc.handle("GET", "/api/v1/expression", "gene=Shh&stage=12&mode=staged").body, before.body);

    let r = svc.handle("POST", "/admin/reload", "");
    assert_eq!(r.status, 200);
    assert_eq!(serde_json::from_str::<Value>(&r.body).unwrap()["version"], 2);
    let after = svc.handle("GET", "/api/v1/expression", "gene=Shh&stage=12&mode=staged");
    assert_eq!(after.version, 2);
    let doc: Value = serde_json::from_str(&after.body).unwrap();
    assert_eq!(doc["states"]["EMAPA:16199"], "weak");

    std::fs::write(dir.path().join(ANNOTATIONS_FILE), "{not json\n").unwrap();
    let failed = svc.handle("POST", "/admin/reload", "");
    assert_eq!(failed.status, 422);
    assert_eq!(failed.version, 2);
    assert_eq!(svc.handle("GET", "/api/v1/expression", "gene=Shh&stage=12&mode=staged").body, after.body);
    assert_eq!(svc.snapshot().version, 2);
}

fn raw_request(addr: std::net::SocketAddr, request: &str) -> String {
    let mut stream = TcpStream::connect(addr).unwrap();
    stream.write_all(request.as_bytes()).unwrap();
    let mut out = String::new();
    stream.read_to_string(&mut out).unwrap();
    out
}

#[test]
fn http_round_trip() {
    let (_dir, svc) = service();
    let svc = Arc::new(svc);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop_tx, stop_rx) = std::sync::mpsc::channel::<()>();
    let server = {
        let svc = Arc::clone(&svc);
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                let stop = async move {
                    tokio::task::spawn_blocking(move || stop_rx.recv()).await.ok();
                };
                serve_with_shutdown(svc, listener, stop).await.unwrap();
            });
        })
    };

    let reply = raw_request(addr, "GET /api/v1/meta HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n");
    let (head, body) = reply.split_once("\r\n\r\n").unwrap();
    assert!(head.starts_with("HTTP/1.1 200"));
    let head = head.to_ascii_lowercase();
    assert!(head.contains(&format!("{}: 1", VERSION_HEADER.to_ascii_lowercase())));
    assert!(head.contains("content-type: application/json"));
    let doc: Value = serde_json::from_str(body).unwrap();
    assert_eq!(doc["counts"]["structures"], 15);

    let reply = raw_request(addr, "POST /admin/reload HTTP/1.1\r\nHost: x\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 200"));
    let reply = raw_request(addr, "GET /api/v1/layout?mode=staged&stage=27 HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n");
    assert!(reply.starts_with("HTTP/1.1 400"));
    assert!(reply.to_ascii_lowercase().contains(&format!("{}: 2", VERSION_HEADER.to_ascii_lowercase())));

    stop_tx.send(()).unwrap();
    server.join().unwrap();
}
