use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use serde_json::Value;

use crate::assets::AssetError;
use crate::session::SessionError;

/// Every error code the gateway can return. Clients may rely on this set.
pub const ERROR_CODES: &[&str] = &[
    "bad_request",
    "empty_input",
    "forbidden",
    "internal_error",
    "invalid_persona",
    "not_found",
    "payload_too_large",
    "provider_disabled",
    "range_not_satisfiable",
    "session_busy",
    "session_closed",
    "storage_error",
    "unknown_job",
    "unknown_persona",
    "unknown_session",
    "unsupported_media_type",
];

/// JSON error body: `{"error": {"code", "message", "detail"?}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub code: &'static str,
    pub status: StatusCode,
    pub message: String,
    pub detail: Option<Value>,
}

#[derive(Serialize)]
struct Body<'a> {
    error: Inner<'a>,
}

#[derive(Serialize)]
struct Inner<'a> {
    code: &'a str,
    message: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        debug_assert!(ERROR_CODES.contains(&code), "undocumented error code {code}");
        Self {
            code,
            status,
            message: message.into(),
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn forbidden() -> Self {
        Self::new(StatusCode::FORBIDDEN, "forbidden", "session token does not grant access")
    }

    pub fn unsupported(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media_type", message)
    }

    pub fn too_large(message: impl Into<String>) -> Self {
        Self::new(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", message)
    }

    pub fn internal() -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal_error", "internal error")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Body {
            error: Inner {
                code: self.code,
                message: &self.message,
                detail: self.detail.as_ref(),
            },
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let status = match &e {
            SessionError::UnknownPersona(_) | SessionError::UnknownSession | SessionError::UnknownJob(_) => {
                StatusCode::NOT_FOUND
            }
            SessionError::InvalidPersona { .. } | SessionError::EmptyInput => StatusCode::UNPROCESSABLE_ENTITY,
            SessionError::SessionBusy | SessionError::SessionClosed => StatusCode::CONFLICT,
            SessionError::ProviderDisabled => StatusCode::SERVICE_UNAVAILABLE,
            SessionError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let message = match &e {
            // storage messages can carry local paths
            SessionError::Storage(_) => "session storage failed".to_string(),
            other => other.to_string(),
        };
        Self::new(status, e.code(), message)
    }
}

impl From<AssetError> for ApiError {
    fn from(e: AssetError) -> Self {
        match e {
            AssetError::UnknownAsset { kind, id } => Self::not_found(format!("unknown {kind} `{id}`")),
            other => {
                tracing::error!(error = %other, "asset store failure");
                Self::new(StatusCode::INTERNAL_SERVER_ERROR, "storage_error", "asset store failure")
            }
        }
    }
}
