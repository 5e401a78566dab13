mod common;

use std::sync::{Arc, RwLock};

use common::*;
use triad_core::explain::ManualClock;
use triad_core::pipeline::DataDir;
use triad_service::api::Service;
use triad_service::runner::{score_cohort, RunRequest};
use triad_service::store::{read_log, Event, RunStatus, Store, StoreState};
use triad_service::ServiceError;

#[test]
fn scoring_is_idempotent_and_consistent() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_data_dir(tmp.path());
    let dir = DataDir::new(tmp.path());
    let clock = ManualClock::new(t0());
    let store = RwLock::new(Store::open(&dir.store(), cfg.snapshot_every).unwrap());

    let (run1, s1) = score_cohort(&store, &dir, &cfg, &RunRequest::default(), &clock).unwrap();
    assert!(s1.scored > 0);
    assert!(s1.flagged > 0, "some learner should cross 0.5");
    assert_eq!(s1.created, s1.flagged);
    let n_alerts = store.read().unwrap().state().alerts.len();
    assert_eq!(n_alerts, s1.flagged);

    // Every alert carries a rationale, an attribution and a plan.
    for a in store.read().unwrap().state().alerts.values() {
        assert!(a.risk >= 0.5);
        assert!(!a.rationale.text.is_empty());
        assert!(!a.attribution.features.is_empty());
        assert_eq!(a.run_id, run1);
    }

    let (run2, s2) = score_cohort(&store, &dir, &cfg, &RunRequest::default(), &clock).unwrap();
    assert_ne!(run1, run2);
    assert_eq!(s2.created, 0);
    assert_eq!(s2.unchanged + s2.updated, s2.flagged);
    assert_eq!(store.read().unwrap().state().alerts.len(), n_alerts);

    let st = store.read().unwrap();
    assert_eq!(st.state().runs[&run2].status, RunStatus::Finished);
    // Offline recount from the log.
    let (records, _) = read_log(&st.log_path()).unwrap();
    let replayed = StoreState::replay(&records).unwrap();
    assert_eq!(serde_json::to_vec(&replayed).unwrap(), serde_json::to_vec(st.state()).unwrap());
    let mut ids: Vec<&str> = records
        .iter()
        .filter_map(|r| match &r.event {
            Event::AlertScored { alert } => Some(alert.id.as_str()),
            _ => None,
        })
        .collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), n_alerts);
}

#[test]
fn threshold_above_one_flags_nobody() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_data_dir(tmp.path());
    let dir = DataDir::new(tmp.path());
    let store = RwLock::new(Store::open(&dir.store(), 100).unwrap());
    let req = RunRequest {
        threshold: Some(1.01),
        ..Default::default()
    };
    let (_, s) = score_cohort(&store, &dir, &cfg, &req, &ManualClock::new(t0())).unwrap();
    assert_eq!((s.flagged, s.created), (0, 0));
    assert!(store.read().unwrap().state().alerts.is_empty());
}

#[test]
fn missing_artifacts_fail_before_logging() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_data_dir(tmp.path());
    let dir = DataDir::new(tmp.path());
    let store = RwLock::new(Store::open(&dir.store(), 100).unwrap());
    let clock = ManualClock::new(t0());
    let req = RunRequest {
        cohort: tmp.path().join("nope.jsonl").display().to_string(),
        ..Default::default()
    };
    let e = score_cohort(&store, &dir, &cfg, &req, &clock).unwrap_err();
    assert_eq!(e.kind(), "CohortMissing");
    assert_eq!(e.exit_code(), 2);
    let req = RunRequest {
        model: Some("mlp".into()),
        ..Default::default()
    };
    let e = score_cohort(&store, &dir, &cfg, &req, &clock).unwrap_err();
    assert_eq!(e.kind(), "ModelMissing");
    let req = RunRequest {
        model: Some("../triad".into()),
        ..Default::default()
    };
    assert!(matches!(score_cohort(&store, &dir, &cfg, &req, &clock), Err(ServiceError::InvalidBody(_))));
    assert_eq!(store.read().unwrap().state().seq, 0);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn http_run_completes_in_background() {
    use axum::body::Body;
    use axum::http::{Request, StatusCode};
    use http_body_util::BodyExt;
    use tower::ServiceExt;

    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_data_dir(tmp.path());
    let svc = Service::open(cfg, Arc::new(ManualClock::new(t0()))).unwrap();
    let app = triad_service::api::router(svc.clone());
    let resp = app
        .clone()
        .oneshot(
            Request::post("/runs")
                .header("content-type", "application/json")
                .body(Body::from("{}"))
                .unwrap(),
        )
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::ACCEPTED);
    let v: serde_json::Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    let run_id = v["run_id"].as_str().unwrap().to_string();

    let mut status = String::new();
    for _ in 0..600 {
        let resp = app
            .clone()
            .oneshot(Request::get(format!("/runs/{run_id}")).body(Body::empty()).unwrap())
            .await
            .unwrap();
        assert_eq!(resp.status(), StatusCode::OK);
        let v: serde_json::Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
        status = v["status"].as_str().unwrap().to_string();
        if status != "running" {
            break;
        }
        tokio::time::sleep(std::time::Duration::from_millis(100)).await;
    }
    assert_eq!(status, "finished");
    assert!(!svc.store.read().unwrap().state().alerts.is_empty());
}
