//! ISO-8601 UTC timestamps on the wire, epoch seconds in memory.

use chrono::{DateTime, NaiveDateTime, Utc};
use rangegov_core::Timestamp;

/// Accepts RFC 3339 (`2021-01-01T00:00:00Z`, any offset) or a naive
/// `YYYY-MM-DD[ T]HH:MM:SS` read as UTC.
pub fn parse(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.timestamp());
    }
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.and_utc().timestamp())
}

pub fn format(t: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp(t, 0)
        .map(|d| d.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| t.to_string())
}
