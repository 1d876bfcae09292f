mod support;

use std::sync::Arc;

use serde_json::{json, Value};
use support::{Fixture, TestServer, QUERY};
use titl_service::{restore_sessions, AppState, RestoreOutcome, ServiceConfig};

fn config_with_snapshot(path: &std::path::Path) -> ServiceConfig {
    ServiceConfig {
        snapshot_path: Some(path.to_path_buf()),
        ..ServiceConfig::default()
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn sessions_survive_restart() {
    let fx = Fixture::new(30);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sessions.json");
    let config = config_with_snapshot(&path);

    let server = TestServer::start(fx.engine(), config.clone()).await;
    let client = reqwest::Client::new();
    let body: Value = client
        .post(server.url("/api/sessions"))
        .json(&json!({ "query": QUERY, "k": 3 }))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let sid = body["session_id"].as_str().unwrap().to_string();
    let first = body["results"][0]["id"].as_u64().unwrap();
    client
        .post(server.url(&format!("/api/sessions/{sid}/feedback")))
        .json(&json!({ "judgments": [{ "sentence_id": first, "relevant": true }] }))
        .send()
        .await
        .unwrap();
    let before = server.state.store.snapshot_json(fx.index.len());
    server.stop().await.unwrap();
    assert!(path.exists(), "snapshot written on shutdown");

    let state = Arc::new(AppState::new(Arc::new(fx.engine()), &config).unwrap());
    assert_eq!(restore_sessions(&state, &config), RestoreOutcome::Restored(1));
    assert_eq!(state.store.snapshot_json(fx.index.len()), before);

    let server = TestServer::start_with_state(state, config).await;
    let export = client
        .get(server.url(&format!("/api/sessions/{sid}/export?format=json")))
        .send()
        .await
        .unwrap()
        .json::<Value>()
        .await
        .unwrap();
    assert_eq!(export[0]["id"], first);
    let more: Value = client
        .post(server.url(&format!("/api/sessions/{sid}/more")))
        .json(&json!({}))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let ids: Vec<u64> = more["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["id"].as_u64().unwrap())
        .collect();
    assert_eq!(ids.len(), 3);
    assert!(!ids.contains(&first));
    server.stop().await.unwrap();
}

#[test]
fn missing_corrupt_and_mismatched_snapshots_start_empty() {
    let fx = Fixture::new(20);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sessions.json");
    let config = config_with_snapshot(&path);
    let state = AppState::new(Arc::new(fx.engine()), &config).unwrap();

    assert_eq!(restore_sessions(&state, &config), RestoreOutcome::Missing);

    std::fs::write(&path, "{ definitely not json").unwrap();
    assert!(matches!(restore_sessions(&state, &config), RestoreOutcome::Rejected(_)));
    assert!(state.store.is_empty());

    let engine = fx.engine();
    let mut session = engine.create_session(QUERY, titl_core::SearchMode::Embedding, 2).unwrap();
    engine.next_results(&mut session);
    state.store.insert(session);
    state.store.write_snapshot(&path, fx.index.len() + 1).unwrap();
    let fresh = AppState::new(Arc::new(fx.engine()), &config).unwrap();
    match restore_sessions(&fresh, &config) {
        RestoreOutcome::Rejected(reason) => assert!(reason.contains("sentences"), "{reason}"),
        other => panic!("expected rejection, got {other:?}"),
    }
    assert!(fresh.store.is_empty());

    state.store.write_snapshot(&path, fx.index.len()).unwrap();
    assert_eq!(restore_sessions(&fresh, &config), RestoreOutcome::Restored(1));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn unwritable_snapshot_path_does_not_fail_shutdown() {
    let fx = Fixture::new(10);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing-dir").join("sessions.json");
    let server = TestServer::start(fx.engine(), config_with_snapshot(&path)).await;
    server.stop().await.unwrap();
    assert!(!path.exists());
}
