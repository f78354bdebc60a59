//! Media downloads with single-range support so players can seek.

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use serde::Deserialize;

use super::{ApiError, AppState, TOKEN_HEADER};
use crate::providers::content_type_for;

#[derive(Deserialize)]
pub(super) struct TokenQuery {
    token: Option<String>,
}

/// A rendered clip. Only the session whose turn produced it may fetch it.
pub(super) async fn clip(
    State(st): State<AppState>,
    Path(clip_id): Path<String>,
    Query(q): Query<TokenQuery>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let token = q
        .token
        .or_else(|| headers.get(TOKEN_HEADER).and_then(|v| v.to_str().ok()).map(str::to_string))
        .ok_or_else(ApiError::forbidden)?;
    if !st.sessions.owns_clip(&token, &clip_id) {
        return Err(ApiError::forbidden());
    }
    let (record, bytes) = st.assets.read_clip(&clip_id)?;
    Ok(ranged(bytes, record.content_type(), &record.checksum, &headers))
}

/// A persona's idle loop. Not session scoped: the learner sees it before
/// any turn.
pub(super) async fn base_video(
    State(st): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let (base, bytes) = st.assets.read_base_video(&id)?;
    Ok(ranged(bytes, content_type_for(&base.container), &base.checksum, &headers))
}

fn ranged(bytes: Vec<u8>, content_type: &str, checksum: &str, headers: &HeaderMap) -> Response {
    let len = bytes.len() as u64;
    let common = [
        (header::CONTENT_TYPE, HeaderValue::from_str(content_type).unwrap_or(HeaderValue::from_static("application/octet-stream"))),
        (header::ACCEPT_RANGES, HeaderValue::from_static("bytes")),
        (header::ETAG, HeaderValue::from_str(&format!("\"{checksum}\"")).expect("hex etag")),
        (header::CACHE_CONTROL, HeaderValue::from_static("private, max-age=31536000, immutable")),
    ];
    let Some(range) = headers.get(header::RANGE).and_then(|v| v.to_str().ok()) else {
        return (StatusCode::OK, common, bytes).into_response();
    };
    let ranges = http_range_header::parse_range_header(range).and_then(|r| r.validate(len));
    match ranges.as_deref() {
        Ok([one]) => {
            let (start, end) = (*one.start(), *one.end());
            let body = bytes[start as usize..=end as usize].to_vec();
            let content_range = HeaderValue::from_str(&format!("bytes {start}-{end}/{len}")).expect("ascii");
            (StatusCode::PARTIAL_CONTENT, common, [(header::CONTENT_RANGE, content_range)], body).into_response()
        }
        // several ranges: answer with the whole body, which is allowed
        Ok(_) => (StatusCode::OK, common, bytes).into_response(),
        Err(_) => {
            let mut r = ApiError::new(
                StatusCode::RANGE_NOT_SATISFIABLE,
                "range_not_satisfiable",
                format!("range `{range}` does not fit {len} bytes"),
            )
            .into_response();
            r.headers_mut().insert(
                header::CONTENT_RANGE,
                HeaderValue::from_str(&format!("bytes */{len}")).expect("ascii"),
            );
            r
        }
    }
}
