mod common;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use blankcrack_core::RiddleId;
use blankcrack_service::http::router;
use blankcrack_service::Game;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use common::Harness;

struct Api {
    app: Router,
    game: Arc<Game>,
}

struct Reply {
    status: StatusCode,
    version: Option<String>,
    body: Value,
    text: String,
}

impl Api {
    fn new(h: &Harness) -> Api {
        Api {
            app: router(h.game.clone()),
            game: h.game.clone(),
        }
    }

    async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> Reply {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req
                .header("content-type", "application/json")
                .body(Body::from(b.to_string()))
                .unwrap(),
            None => req.body(Body::empty()).unwrap(),
        };
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        let version = res
            .headers()
            .get("x-api-version")
            .map(|v| v.to_str().unwrap().to_string());
        let bytes = res.into_body().collect().await.unwrap().to_bytes();
        let text = String::from_utf8(bytes.to_vec()).unwrap();
        let body = serde_json::from_str(&text).unwrap_or(Value::Null);
        Reply {
            status,
            version,
            body,
            text,
        }
    }

    async fn get(&self, uri: &str, token: Option<&str>) -> Reply {
        self.call(Method::GET, uri, token, None).await
    }

    async fn post(&self, uri: &str, token: Option<&str>, body: Value) -> Reply {
        self.call(Method::POST, uri, token, Some(body)).await
    }

    async fn signup(&self, name: &str) -> String {
        let r = self
            .post("/api/register", None, json!({"username": name, "password": "pw-123", "language": "en"}))
            .await;
        assert_eq!(r.status, StatusCode::CREATED, "{}", r.text);
        let r = self
            .post("/api/login", None, json!({"username": name, "password": "pw-123"}))
            .await;
        assert_eq!(r.status, StatusCode::OK);
        r.body["token"].as_str().unwrap().to_string()
    }

    fn target(&self, riddle: &Value) -> (String, String) {
        let id = RiddleId(riddle["riddle_id"].as_u64().unwrap());
        self.game.with_state(|s| {
            let r = &s.pending[&id].riddle;
            (r.target.clone(), r.foil.clone())
        })
    }
}

#[tokio::test]
async fn accounts_and_auth() {
    let h = Harness::new(21);
    let api = Api::new(&h);
    let token = api.signup("alice").await;

    let dup = api
        .post("/api/register", None, json!({"username": "Alice", "password": "pw-456", "language": "en"}))
        .await;
    assert_eq!(dup.status, StatusCode::CONFLICT);
    assert_eq!(dup.body["error"], "username_taken");

    let bad = api
        .post("/api/login", None, json!({"username": "alice", "password": "wrong"}))
        .await;
    assert_eq!(bad.status, StatusCode::UNAUTHORIZED);

    assert_eq!(api.get("/api/me", None).await.status, StatusCode::UNAUTHORIZED);
    assert_eq!(api.get("/api/me", Some("deadbeef")).await.status, StatusCode::UNAUTHORIZED);

    let me = api.get("/api/me", Some(&token)).await;
    assert_eq!(me.status, StatusCode::OK);
    assert_eq!(me.version.as_deref(), Some("1"));
    assert_eq!(me.body["username"], "alice");
    assert_eq!(me.body["k_setting"], 5);
}

#[tokio::test]
async fn settings_patch() {
    let h = Harness::new(22);
    let api = Api::new(&h);
    let token = api.signup("alice").await;
    let ok = api.call(Method::PATCH, "/api/me", Some(&token), Some(json!({"k_setting": 1}))).await;
    assert_eq!(ok.status, StatusCode::OK);
    assert_eq!(ok.body["k_setting"], 1);
    let bad = api.call(Method::PATCH, "/api/me", Some(&token), Some(json!({"k_setting": 2}))).await;
    assert_eq!(bad.status, StatusCode::UNPROCESSABLE_ENTITY);
    let opt = api
        .call(Method::PATCH, "/api/me", Some(&token), Some(json!({"opt_out_manual_pairs": true})))
        .await;
    assert_eq!(opt.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(opt.body["error"], "unsupported_setting");
    let r = api.get("/api/riddle", Some(&token)).await;
    assert_eq!(r.body["k"], 1);
    assert_eq!(r.body["sentences"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn riddle_answer_round_trip() {
    let h = Harness::new(23);
    let api = Api::new(&h);
    let token = api.signup("alice").await;

    let r = api.get("/api/riddle?lang=en", Some(&token)).await;
    assert_eq!(r.status, StatusCode::OK, "{}", r.text);
    let keys: Vec<&String> = r.body.as_object().unwrap().keys().collect();
    assert_eq!(keys.len(), 7);
    let id = r.body["riddle_id"].as_u64().unwrap();
    let (target, _) = api.target(&r.body);

    h.clock.advance(2_000);
    let uri = format!("/api/riddle/{id}/answer");
    let invalid = api.post(&uri, Some(&token), json!({"choice": "zebra"})).await;
    assert_eq!(invalid.status, StatusCode::UNPROCESSABLE_ENTITY);

    let first = api.post(&uri, Some(&token), json!({"choice": target})).await;
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.body["correct"], true);
    assert_eq!(first.body["answer"], target.as_str());
    assert_eq!(first.body["points"], 0.5);
    assert_eq!(first.body["elapsed_ms"], 2000);

    h.clock.advance(60_000);
    let again = api.post(&uri, Some(&token), json!({"choice": target})).await;
    assert_eq!(again.status, StatusCode::CONFLICT);
    assert_eq!(again.body, first.body);

    let scores = api.get("/api/scores/me", Some(&token)).await;
    assert_eq!(scores.body["cracker_points"], 0.5);

    let missing = api.post("/api/riddle/999999/answer", Some(&token), json!({"choice": "x"})).await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);

    let bad_lang = api.get("/api/riddle?lang=xx", Some(&token)).await;
    assert_eq!(bad_lang.status, StatusCode::UNPROCESSABLE_ENTITY);
    let unloaded = api.get("/api/riddle?lang=fr", Some(&token)).await;
    assert_eq!(unloaded.status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn exhausted_pool_is_no_content() {
    let h = Harness::new(24);
    let api = Api::new(&h);
    let token = api.signup("alice").await;
    for _ in 0..15 {
        let r = api.get("/api/riddle", Some(&token)).await;
        assert_eq!(r.status, StatusCode::OK);
        let (target, _) = api.target(&r.body);
        let id = r.body["riddle_id"].as_u64().unwrap();
        api.post(&format!("/api/riddle/{id}/answer"), Some(&token), json!({"choice": target}))
            .await;
    }
    let r = api.get("/api/riddle", Some(&token)).await;
    assert_eq!(r.status, StatusCode::NO_CONTENT);
    assert!(r.text.is_empty());
}

#[tokio::test]
async fn pair_proposals() {
    let h = Harness::new(25);
    let api = Api::new(&h);
    let token = api.signup("alice").await;
    let ok = api
        .post("/api/pairs", Some(&token), json!({"lang": "en", "word_a": "kitten", "word_b": "puppy"}))
        .await;
    assert_eq!(ok.status, StatusCode::CREATED, "{}", ok.text);
    assert!(ok.body["pair_id"].is_u64());

    let rejected = api
        .post("/api/pairs", Some(&token), json!({"lang": "en", "word_a": "run", "word_b": "running"}))
        .await;
    assert_eq!(rejected.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(rejected.body["error"], "pair_rejected");
    assert!(!rejected.body["reasons"].as_array().unwrap().is_empty());

    let mine = api.get("/api/pairs/mine", Some(&token)).await;
    assert_eq!(mine.body.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn leaderboard_and_stats() {
    let h = Harness::new(26);
    let api = Api::new(&h);
    let a = api.signup("alice").await;
    let b = api.signup("bob").await;
    for (token, n) in [(&a, 2), (&b, 1)] {
        for _ in 0..n {
            let r = api.get("/api/riddle", Some(token)).await;
            let (target, _) = api.target(&r.body);
            let id = r.body["riddle_id"].as_u64().unwrap();
            api.post(&format!("/api/riddle/{id}/answer"), Some(token), json!({"choice": target}))
                .await;
        }
    }
    let board = api.get("/api/leaderboard?lang=en&limit=5", None).await;
    let rows = board.body.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["username"], "alice");
    assert_eq!(rows[0]["cracker_points"], 1.0);
    let empty = api.get("/api/leaderboard?limit=0", None).await;
    assert_eq!(empty.body, json!([]));

    let summary = api.get("/api/stats/summary", None).await;
    assert_eq!(summary.status, StatusCode::OK, "{}", summary.text);
    let hist = api.get("/api/stats/histogram?min_annotations=1&bins=10", None).await;
    assert_eq!(hist.status, StatusCode::OK, "{}", hist.text);
    assert_eq!(api.get("/api/stats/histogram?bins=0", None).await.status, StatusCode::UNPROCESSABLE_ENTITY);

    let export = api.get("/api/export", None).await;
    assert_eq!(export.status, StatusCode::OK);
    let mut lines = export.text.lines();
    assert!(lines.next().unwrap().starts_with("id,riddle_id,player_id"));
    assert_eq!(lines.count(), 3);
}

#[tokio::test]
async fn friends_and_competitions() {
    let h = Harness::new(27);
    let api = Api::new(&h);
    let a = api.signup("alice").await;
    let b = api.signup("bob").await;
    api.post("/api/friends", Some(&a), json!({"username": "bob"})).await;
    let forbidden = api
        .post("/api/competitions", Some(&a), json!({"friend_usernames": ["bob"], "riddle_count": 1}))
        .await;
    assert_eq!(forbidden.status, StatusCode::FORBIDDEN);
    let f = api.post("/api/friends", Some(&b), json!({"username": "alice"})).await;
    assert_eq!(f.body["mutual"], true);
    let list = api.get("/api/friends", Some(&a)).await;
    assert_eq!(list.body[0]["username"], "bob");

    let created = api
        .post("/api/competitions", Some(&a), json!({"friend_usernames": ["bob"], "riddle_count": 1}))
        .await;
    assert_eq!(created.status, StatusCode::CREATED, "{}", created.text);
    let sid = created.body["session_id"].as_u64().unwrap();

    for token in [&a, &b] {
        let r = api.get(&format!("/api/riddle?session={sid}"), Some(token)).await;
        assert_eq!(r.body["session_id"], sid);
        let (target, _) = api.target(&r.body);
        let id = r.body["riddle_id"].as_u64().unwrap();
        api.post(&format!("/api/riddle/{id}/answer"), Some(token), json!({"choice": target}))
            .await;
    }
    let view = api.get(&format!("/api/competitions/{sid}"), Some(&b)).await;
    assert_eq!(view.body["state"], "finished");
    assert_eq!(view.body["standings"].as_array().unwrap().len(), 2);
    let closed = api.post(&format!("/api/competitions/{sid}/close"), Some(&a), json!({})).await;
    assert_eq!(closed.status, StatusCode::OK);
    let outsider = api.signup("carol").await;
    assert_eq!(
        api.get(&format!("/api/competitions/{sid}"), Some(&outsider)).await.status,
        StatusCode::NOT_FOUND
    );
}
