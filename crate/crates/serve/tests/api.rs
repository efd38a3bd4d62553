use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use neicap::validate::{
    blinding_violations, merge_consensus, parse_annotations, AuditPacket, BlindedItem,
};
use neicap_serve::{router, AppState, ServeConfig, SessionSpec};
use serde_json::{json, Value};
use tower::ServiceExt;

fn packet(n: usize) -> AuditPacket {
    AuditPacket {
        packet_id: "demo".into(),
        items: (0..n)
            .map(|i| BlindedItem {
                item_id: format!("demo-{i:02}"),
                claim: format!("Kalo{i} increases bone density in mice."),
                evidence: format!("Bone density differed across sites in cohort {i}."),
            })
            .collect(),
    }
}

fn config(n: usize, dir: &tempfile::TempDir) -> ServeConfig {
    ServeConfig {
        packet: packet(n),
        sessions: vec![
            SessionSpec { session_id: "s-a".into(), annotator_id: "ann-a".into() },
            SessionSpec { session_id: "s-b".into(), annotator_id: "ann-b".into() },
        ],
        log_path: dir.path().join("labels.jsonl"),
    }
}

async fn call(state: &Arc<AppState>, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, String) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let text = String::from_utf8(bytes.to_vec()).unwrap();
    assert!(blinding_violations(&text).is_empty(), "{uri} leaked {:?}: {text}", blinding_violations(&text));
    (status, text)
}

fn parsed(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

async fn label(state: &Arc<AppState>, session: &str, item: &str, judgment: &str, subtype: Option<&str>) -> (StatusCode, Value) {
    let body = json!({ "item_id": item, "judgment": judgment, "subtype": subtype });
    let (s, t) = call(state, "POST", &format!("/session/{session}/label"), Some(body)).await;
    (s, parsed(&t))
}

#[tokio::test]
async fn fresh_session_starts_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(3, &dir)).unwrap();
    let (status, text) = call(&state, "GET", "/session/s-a/next", None).await;
    assert_eq!(status, StatusCode::OK);
    let v = parsed(&text);
    assert_eq!(v["position"], 0);
    assert_eq!(v["item"]["item_id"], "demo-00");
    let keys: Vec<&String> = v["item"].as_object().unwrap().keys().collect();
    assert_eq!(keys, vec!["claim", "evidence", "item_id"]);
}

#[tokio::test]
async fn labelling_advances_and_finishes() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(2, &dir)).unwrap();
    let (s, v) = label(&state, "s-a", "demo-00", "truly_insufficient", Some("near_miss")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["progress"]["labeled"], 1);
    let (_, t) = call(&state, "GET", "/session/s-a/next", None).await;
    assert_eq!(parsed(&t)["position"], 1);
    label(&state, "s-a", "demo-01", "ambiguous", None).await;
    let (_, t) = call(&state, "GET", "/session/s-a/next", None).await;
    let v = parsed(&t);
    assert_eq!(v["done"], true);
    assert_eq!(v["counts"]["truly_insufficient"], 1);
    assert_eq!(v["counts"]["ambiguous"], 1);
}

#[tokio::test]
async fn error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(2, &dir)).unwrap();
    label(&state, "s-a", "demo-00", "actually_supported", None).await;
    let (s, v) = label(&state, "s-a", "demo-00", "ambiguous", None).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::CONFLICT, Some("conflict")));
    let (s, v) = label(&state, "s-a", "demo-01", "actually_supported", Some("partial")).await;
    assert_eq!((s, v["error"]["code"].as_str()), (StatusCode::UNPROCESSABLE_ENTITY, Some("invalid_input")));
    let (_, v) = label(&state, "s-a", "demo-01", "SUPPORT", None).await;
    assert_eq!(v["error"]["code"], "invalid_input");
    let (s, t) = call(&state, "GET", "/session/nobody/next", None).await;
    assert_eq!((s, parsed(&t)["error"]["code"].as_str()), (StatusCode::NOT_FOUND, Some("not_found")));
    let (s, _) = call(&state, "GET", "/packet/other/export", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = label(&state, "s-a", "demo-99", "ambiguous", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    // the rejected submissions left nothing behind
    let (_, t) = call(&state, "GET", "/packet/demo/progress", None).await;
    assert_eq!(parsed(&t)["sessions"][0]["labeled"], 1);
}

#[tokio::test]
async fn empty_packet_exports_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(0, &dir)).unwrap();
    let (_, t) = call(&state, "GET", "/packet/demo/export", None).await;
    let v = parsed(&t);
    assert!(v["annotators"].as_array().unwrap().iter().all(|a| a["jsonl"] == ""));
    assert!(v["merged"].is_null());
    let (_, t) = call(&state, "GET", "/session/s-a/next", None).await;
    assert_eq!(parsed(&t)["done"], true);
}

const JUDGMENTS: [(&str, Option<&str>); 10] = [
    ("truly_insufficient", Some("near_miss")),
    ("truly_insufficient", Some("broad_topic")),
    ("actually_supported", None),
    ("truly_insufficient", Some("partial")),
    ("ambiguous", None),
    ("truly_insufficient", Some("topic_unrelated")),
    ("actually_contradicted", None),
    ("truly_insufficient", Some("near_miss")),
    ("invalid_or_unreadable", None),
    ("truly_insufficient", None),
];

async fn label_demo(state: &Arc<AppState>) {
    for (i, (j, s)) in JUDGMENTS.iter().enumerate() {
        let item = format!("demo-{i:02}");
        label(state, "s-a", &item, j, *s).await;
        // b splits near_miss/partial on item 0 and disagrees outright on item 2
        let (jb, sb) = match i {
            0 => ("truly_insufficient", Some("partial")),
            2 => ("truly_insufficient", Some("near_miss")),
            _ => (*j, *s),
        };
        label(state, "s-b", &item, jb, sb).await;
    }
}

#[tokio::test]
async fn export_round_trips_and_matches_merge() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(10, &dir)).unwrap();
    label_demo(&state).await;
    let (_, first) = call(&state, "GET", "/packet/demo/export", None).await;
    let (_, second) = call(&state, "GET", "/packet/demo/export", None).await;
    assert_eq!(first, second);

    let v = parsed(&first);
    let streams: Vec<_> = v["annotators"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| parse_annotations(a["jsonl"].as_str().unwrap().as_bytes()).unwrap())
        .collect();
    for (i, (j, s)) in JUDGMENTS.iter().enumerate() {
        let r = &streams[0][i];
        assert_eq!((r.item_id.as_str(), r.label.as_str()), (format!("demo-{i:02}").as_str(), *j));
        assert_eq!(r.subtype.map(|x| x.as_str()), *s);
    }
    let merged = merge_consensus(&streams[0], &streams[1], &[]).unwrap();
    assert_eq!(v["merged"]["raw_agreement"].as_f64().unwrap(), merged.raw_agreement);
    assert_eq!(v["merged"]["binary_agreement"].as_f64().unwrap(), merged.binary_agreement);
    assert_eq!(v["merged"]["disagreements"].as_array().unwrap().len(), merged.disagreements.len());
    assert_eq!((merged.raw_agreement, merged.binary_agreement), (0.8, 0.9));

    let (_, p) = call(&state, "GET", "/packet/demo/progress", None).await;
    assert_eq!(parsed(&p)["agreement"], v["merged"]);
}

#[tokio::test]
async fn labels_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(10, &dir)).unwrap();
    label_demo(&state).await;
    let (_, before) = call(&state, "GET", "/packet/demo/export", None).await;
    drop(state);
    let state = AppState::open(config(10, &dir)).unwrap();
    let (_, after) = call(&state, "GET", "/packet/demo/export", None).await;
    assert_eq!(before, after);
    let (_, t) = call(&state, "GET", "/session/s-b/next", None).await;
    assert_eq!(parsed(&t)["done"], true);
    let (s, _) = label(&state, "s-a", "demo-03", "ambiguous", None).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn duplicate_race_accepts_once() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::open(config(3, &dir)).unwrap();
    let tasks: Vec<_> = (0..16)
        .map(|_| {
            let state = state.clone();
            tokio::spawn(async move { label(&state, "s-a", "demo-01", "ambiguous", None).await.0 })
        })
        .collect();
    let mut ok = 0;
    for t in tasks {
        match t.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::CONFLICT => {}
            other => panic!("{other}"),
        }
    }
    assert_eq!(ok, 1);
    let log = std::fs::read_to_string(dir.path().join("labels.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 1);
}
