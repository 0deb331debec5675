use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use semaps_core::geo::GeoError;
use semaps_core::kb::KbError;
use semaps_core::lod::LodError;
use semaps_core::ontology::OntologyError;
use semaps_core::platform::PlatformError;
use semaps_core::sparql::QueryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    Validation,
    NotFound,
    Conflict,
    Upstream,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::Validation => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Upstream => StatusCode::BAD_GATEWAY,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Error body: `{"error": {"code", "message", "field"?, "position"?}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub position: Option<usize>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError {
            code,
            message: message.into(),
            field: None,
            position: None,
        }
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        ApiError {
            field: Some(field.to_string()),
            ..ApiError::new(ErrorCode::Validation, message)
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::NotFound, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        ApiError::new(ErrorCode::Internal, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.code == ErrorCode::Internal {
            tracing::error!(message = %self.message, "internal error");
        }
        let status = self.code.status();
        (status, Json(serde_json::json!({ "error": self }))).into_response()
    }
}

impl From<OntologyError> for ApiError {
    fn from(e: OntologyError) -> Self {
        let message = e.to_string();
        match e {
            OntologyError::Invalid { field, .. } => ApiError::validation(field, message),
            OntologyError::Geo(g) => ApiError::from(g),
            OntologyError::NotFound { .. } => ApiError::not_found(message),
            OntologyError::DuplicateLabel { .. }
            | OntologyError::DuplicateLogin(_)
            | OntologyError::DuplicateVote { .. } => ApiError::new(ErrorCode::Conflict, message),
            OntologyError::SelfVote(_) | OntologyError::SelfFriendship(_) => ApiError::new(ErrorCode::Validation, message),
            OntologyError::Store(_) | OntologyError::Hydration(_) => ApiError::internal(message),
        }
    }
}

impl From<GeoError> for ApiError {
    fn from(e: GeoError) -> Self {
        let field = match e {
            GeoError::Latitude(_) => "lat",
            GeoError::Longitude(_) => "lon",
            _ => "bbox",
        };
        ApiError::validation(field, e.to_string())
    }
}

impl From<PlatformError> for ApiError {
    fn from(e: PlatformError) -> Self {
        match e {
            PlatformError::Ontology(o) => o.into(),
            PlatformError::Turtle(t) => ApiError::validation("turtle", t.to_string()),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<KbError> for ApiError {
    fn from(e: KbError) -> Self {
        let message = e.to_string();
        match e {
            KbError::UnknownConcept(_) => ApiError::not_found(message),
            KbError::DepthOutOfRange(_) => ApiError::validation("depth", message),
            KbError::EmptyExpression => ApiError::validation("expression", message),
            _ => ApiError::internal(message),
        }
    }
}

impl From<LodError> for ApiError {
    fn from(e: LodError) -> Self {
        match e {
            LodError::Kb(k) => k.into(),
            LodError::Source { .. } => ApiError::new(ErrorCode::Upstream, e.to_string()),
        }
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        ApiError {
            position: e.position(),
            ..ApiError::validation("query", e.to_string())
        }
    }
}
