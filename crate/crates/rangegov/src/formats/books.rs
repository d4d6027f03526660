//! Order-book snapshots, one per line:
//!
//! ```text
//! 2021-01-01T04:00:00Z | 29990.5:12.3 29980:10.1 ... | 30000.5:11 30010:9.7 ...
//! ```
//!
//! Time, then bid levels best-first, then ask levels best-first, each as
//! `price:size`. Blank lines and lines starting with `#` are skipped.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rangegov_core::{BookLevel, BookSnapshot};

use super::time;
use crate::error::{Error, Result};

fn levels(path: &Path, line: usize, s: &str) -> Result<Vec<BookLevel>> {
    s.split_whitespace()
        .map(|pair| {
            let bad = || Error::schema(path, format!("line {line}: bad level `{pair}`"));
            let (p, q) = pair.split_once(':').ok_or_else(bad)?;
            Ok(BookLevel::new(p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?))
        })
        .collect()
}

pub fn parse(path: &Path, text: &str) -> Result<Vec<BookSnapshot>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = s.split('|').collect();
        let [t, bids, asks] = parts[..] else {
            return Err(Error::schema(path, format!("line {line}: expected `time | bids | asks`")));
        };
        out.push(BookSnapshot {
            time: time::parse(t)
                .ok_or_else(|| Error::schema(path, format!("line {line}: bad timestamp `{}`", t.trim())))?,
            bids: levels(path, line, bids)?,
            asks: levels(path, line, asks)?,
        });
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<BookSnapshot>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(path, &text)
}

pub fn render(books: &[BookSnapshot]) -> String {
    let mut s = String::new();
    for b in books {
        s.push_str(&time::format(b.time));
        for side in [&b.bids, &b.asks] {
            s.push_str(" |");
            for l in side {
                let _ = write!(s, " {}:{}", l.price, l.size);
            }
        }
        s.push('\n');
    }
    s
}

pub fn write(path: &Path, books: &[BookSnapshot]) -> Result<()> {
    fs::write(path, render(books)).map_err(|e| Error::io(path, e))
}
