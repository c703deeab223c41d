//! HTTP+JSON API.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use blankcrack_core::{Language, PlayerId, RiddleId};
use serde::Deserialize;
use serde_json::json;

use crate::error::ServiceError;
use crate::game::Game;
use crate::state::SessionId;

pub const API_VERSION: &str = "1";

pub type AppState = Arc<Game>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let (status, code) = match &self {
            ServiceError::Unauthorized => (StatusCode::UNAUTHORIZED, "unauthorized"),
            ServiceError::InvalidCredentials => (StatusCode::UNAUTHORIZED, "invalid_credentials"),
            ServiceError::UsernameTaken(_) => (StatusCode::CONFLICT, "username_taken"),
            ServiceError::InvalidInput(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
            ServiceError::UnsupportedSetting(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "unsupported_setting")
            }
            ServiceError::LanguageNotLoaded(_) => (StatusCode::BAD_REQUEST, "language_not_loaded"),
            ServiceError::NoRiddles(_) => return StatusCode::NO_CONTENT.into_response(),
            ServiceError::NotFound(_) => (StatusCode::NOT_FOUND, "not_found"),
            ServiceError::Forbidden(_) => (StatusCode::FORBIDDEN, "forbidden"),
            ServiceError::Duplicate(first) => {
                return (StatusCode::CONFLICT, Json(first.as_ref())).into_response()
            }
            ServiceError::PairRejected(reasons) => {
                let body = json!({
                    "error": "pair_rejected",
                    "message": self.to_string(),
                    "reasons": reasons,
                });
                return (StatusCode::UNPROCESSABLE_ENTITY, Json(body)).into_response();
            }
            ServiceError::Journal(_) | ServiceError::State(_) | ServiceError::Corpus(_) => {
                tracing::error!(error = %self, "internal error");
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        let body = json!({ "error": code, "message": self.to_string() });
        (status, Json(body)).into_response()
    }
}

/// The authenticated player, from `Authorization: Bearer <token>`.
pub struct Auth(pub PlayerId);

impl FromRequestParts<AppState> for Auth {
    type Rejection = ServiceError;

    async fn from_request_parts(parts: &mut Parts, game: &AppState) -> Result<Self, Self::Rejection> {
        let token = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ServiceError::Unauthorized)?;
        game.authenticate(token.trim()).map(Auth)
    }
}

fn parse_language(code: &str) -> Result<Language, ServiceError> {
    code.parse()
        .map_err(|e: blankcrack_core::lang::UnsupportedLanguage| ServiceError::InvalidInput(e.to_string()))
}

pub fn router(game: AppState) -> Router {
    Router::new()
        .route("/api/register", post(register))
        .route("/api/login", post(login))
        .route("/api/me", get(me).patch(update_me))
        .route("/api/riddle", get(riddle))
        .route("/api/riddle/{id}/answer", post(answer))
        .route("/api/pairs", post(propose))
        .route("/api/pairs/mine", get(my_pairs))
        .route("/api/scores/me", get(my_scores))
        .route("/api/leaderboard", get(leaderboard))
        .route("/api/friends", get(friends).post(add_friend))
        .route("/api/competitions", post(create_competition))
        .route("/api/competitions/{id}", get(competition))
        .route("/api/competitions/{id}/close", post(close_competition))
        .route("/api/stats/summary", get(stats_summary))
        .route("/api/stats/histogram", get(stats_histogram))
        .route("/api/export", get(export))
        .layer(axum::middleware::map_response(|mut res: Response| async move {
            res.headers_mut()
                .insert("x-api-version", HeaderValue::from_static(API_VERSION));
            res
        }))
        .with_state(game)
}

/// Serve until Ctrl-C.
pub async fn serve(game: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(game))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[derive(Deserialize)]
struct RegisterBody {
    username: String,
    password: String,
    language: Language,
}

async fn register(
    State(game): State<AppState>,
    Json(body): Json<RegisterBody>,
) -> Result<impl IntoResponse, ServiceError> {
    let id = game.register(&body.username, &body.password, body.language)?;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "player_id": id, "username": body.username.trim() })),
    ))
}

#[derive(Deserialize)]
struct LoginBody {
    username: String,
    password: String,
}

async fn login(
    State(game): State<AppState>,
    Json(body): Json<LoginBody>,
) -> Result<impl IntoResponse, ServiceError> {
    let token = game.login(&body.username, &body.password)?;
    Ok(Json(json!({ "token": token })))
}

async fn me(State(game): State<AppState>, Auth(player): Auth) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.profile(player)?))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SettingsBody {
    k_setting: Option<usize>,
    language: Option<Language>,
    /// Reserved; not supported.
    #[serde(default)]
    opt_out_manual_pairs: Option<serde_json::Value>,
}

async fn update_me(
    State(game): State<AppState>,
    Auth(player): Auth,
    Json(body): Json<SettingsBody>,
) -> Result<impl IntoResponse, ServiceError> {
    if body.opt_out_manual_pairs.is_some() {
        return Err(ServiceError::UnsupportedSetting("opt_out_manual_pairs".into()));
    }
    Ok(Json(game.update_settings(player, body.k_setting, body.language)?))
}

#[derive(Deserialize)]
struct RiddleQuery {
    lang: Option<String>,
    session: Option<u64>,
}

async fn riddle(
    State(game): State<AppState>,
    Auth(player): Auth,
    Query(q): Query<RiddleQuery>,
) -> Result<impl IntoResponse, ServiceError> {
    let lang = q.lang.as_deref().map(parse_language).transpose()?;
    Ok(Json(game.serve_riddle(player, lang, q.session.map(SessionId))?))
}

#[derive(Deserialize)]
struct AnswerBody {
    choice: String,
}

async fn answer(
    State(game): State<AppState>,
    Auth(player): Auth,
    Path(id): Path<u64>,
    Json(body): Json<AnswerBody>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.submit_answer(player, RiddleId(id), &body.choice)?))
}

#[derive(Deserialize)]
struct ProposeBody {
    lang: String,
    word_a: String,
    word_b: String,
}

async fn propose(
    State(game): State<AppState>,
    Auth(player): Auth,
    Json(body): Json<ProposeBody>,
) -> Result<impl IntoResponse, ServiceError> {
    let lang = parse_language(&body.lang)?;
    let pair = game.propose_pair(player, lang, &body.word_a, &body.word_b)?;
    Ok((StatusCode::CREATED, Json(json!({ "pair_id": pair.id, "pair": pair }))))
}

async fn my_pairs(State(game): State<AppState>, Auth(player): Auth) -> impl IntoResponse {
    Json(game.my_pairs(player))
}

async fn my_scores(
    State(game): State<AppState>,
    Auth(player): Auth,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.scores(player)?))
}

#[derive(Deserialize)]
struct LeaderboardQuery {
    lang: Option<String>,
    limit: Option<usize>,
}

async fn leaderboard(
    State(game): State<AppState>,
    Query(q): Query<LeaderboardQuery>,
) -> Result<impl IntoResponse, ServiceError> {
    let lang = q.lang.as_deref().map(parse_language).transpose()?;
    Ok(Json(game.leaderboard(lang, q.limit.unwrap_or(10))))
}

#[derive(Deserialize)]
struct FriendBody {
    username: String,
}

async fn add_friend(
    State(game): State<AppState>,
    Auth(player): Auth,
    Json(body): Json<FriendBody>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.add_friend(player, &body.username)?))
}

async fn friends(State(game): State<AppState>, Auth(player): Auth) -> impl IntoResponse {
    Json(game.friends(player))
}

#[derive(Deserialize)]
struct CompetitionBody {
    friend_usernames: Vec<String>,
    riddle_count: usize,
}

async fn create_competition(
    State(game): State<AppState>,
    Auth(player): Auth,
    Json(body): Json<CompetitionBody>,
) -> Result<impl IntoResponse, ServiceError> {
    let view = game.create_session(player, &body.friend_usernames, body.riddle_count)?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn competition(
    State(game): State<AppState>,
    Auth(player): Auth,
    Path(id): Path<u64>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.session(player, SessionId(id))?))
}

async fn close_competition(
    State(game): State<AppState>,
    Auth(player): Auth,
    Path(id): Path<u64>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.close_session(player, SessionId(id))?))
}

async fn stats_summary(State(game): State<AppState>) -> impl IntoResponse {
    Json(game.stats_summary())
}

#[derive(Deserialize)]
struct HistogramQuery {
    min_annotations: Option<usize>,
    bins: Option<usize>,
}

async fn stats_histogram(
    State(game): State<AppState>,
    Query(q): Query<HistogramQuery>,
) -> Result<impl IntoResponse, ServiceError> {
    Ok(Json(game.stats_histogram(q.min_annotations, q.bins)?))
}

async fn export(State(game): State<AppState>) -> Result<impl IntoResponse, ServiceError> {
    let mut buf = Vec::new();
    game.export_log(&mut buf)?;
    Ok(([(CONTENT_TYPE, "text/csv; charset=utf-8")], buf))
}
