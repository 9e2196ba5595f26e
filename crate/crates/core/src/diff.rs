//! Word-level diff between a resident draft and the attending final report.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    Equal,
    /// Present only in the final report.
    Added,
    /// Present only in the draft.
    Removed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffSpan {
    pub kind: SpanKind,
    pub text: String,
}

/// LCS alignment over whitespace-delimited tokens; adjacent spans of the same
/// kind are merged and their tokens joined with single spaces. At a
/// substitution, the removed run is emitted before the added run.
pub fn word_diff(draft: &str, final_text: &str) -> Vec<DiffSpan> {
    let a: Vec<&str> = draft.split_whitespace().collect();
    let b: Vec<&str> = final_text.split_whitespace().collect();
    let (n, m) = (a.len(), b.len());

    // suffix[i][j] = LCS length of a[i..] and b[j..]
    let width = m + 1;
    let mut suffix = vec![0u32; (n + 1) * width];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i * width + j] = if a[i] == b[j] {
                suffix[(i + 1) * width + j + 1] + 1
            } else {
                suffix[(i + 1) * width + j].max(suffix[i * width + j + 1])
            };
        }
    }

    let mut ops: Vec<(SpanKind, &str)> = Vec::with_capacity(n + m);
    let (mut i, mut j) = (0, 0);
    while i < n || j < m {
        if i < n && j < m && a[i] == b[j] {
            ops.push((SpanKind::Equal, a[i]));
            i += 1;
            j += 1;
        } else if j == m || (i < n && suffix[(i + 1) * width + j] >= suffix[i * width + j + 1]) {
            ops.push((SpanKind::Removed, a[i]));
            i += 1;
        } else {
            ops.push((SpanKind::Added, b[j]));
            j += 1;
        }
    }

    let mut spans: Vec<DiffSpan> = Vec::new();
    for (kind, token) in ops {
        match spans.last_mut() {
            Some(last) if last.kind == kind => {
                last.text.push(' ');
                last.text.push_str(token);
            }
            _ => spans.push(DiffSpan {
                kind,
                text: token.to_string(),
            }),
        }
    }
    spans
}
