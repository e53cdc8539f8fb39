//! The five per-function code metrics.
//!
//! Everything here is a linear scan with counters; no syntax tree is built.
//! The sub-metrics expect comment-stripped text, [`extract_metrics`] does the
//! stripping itself.

use serde::{Deserialize, Serialize};

use crate::lexer::{literal_end, strip_comments, tokenize};

/// Tokens that open an extra path through the function.
pub const DECISION_POINTS: [&str; 7] = ["if", "for", "while", "case", "&&", "||", "?"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricVector {
    pub nloc: u32,
    pub ccn: u32,
    pub token_count: u32,
    pub max_depth: u32,
    pub param_count: u32,
}

impl MetricVector {
    pub const LEN: usize = 5;

    /// Column order: nloc, ccn, token_count, max_depth, param_count.
    pub fn to_array(&self) -> [f64; Self::LEN] {
        [
            f64::from(self.nloc),
            f64::from(self.ccn),
            f64::from(self.token_count),
            f64::from(self.max_depth),
            f64::from(self.param_count),
        ]
    }
}

/// Strips comments, then computes all five metrics.
pub fn extract_metrics(source: &str) -> MetricVector {
    let stripped = strip_comments(source);
    let tokens = tokenize(&stripped);
    let decisions = tokens.iter().filter(|t| DECISION_POINTS.contains(t)).count();
    MetricVector {
        nloc: nloc(&stripped),
        ccn: saturate(1 + decisions),
        token_count: saturate(tokens.len()),
        max_depth: max_brace_depth(&stripped),
        param_count: param_count(&stripped),
    }
}

fn saturate(n: usize) -> u32 {
    u32::try_from(n).unwrap_or(u32::MAX)
}

/// Lines with at least one non-whitespace character.
pub fn nloc(stripped: &str) -> u32 {
    saturate(stripped.lines().filter(|l| !l.trim().is_empty()).count())
}

/// `1 +` the number of decision-point tokens.
///
/// Counting happens on the token stream, so `iffy` is not an `if`. Operators
/// inside string literals do count.
pub fn cyclomatic_approx(stripped: &str) -> u32 {
    let decisions = tokenize(stripped).iter().filter(|t| DECISION_POINTS.contains(t)).count();
    saturate(1 + decisions)
}

pub fn token_count(stripped: &str) -> u32 {
    saturate(tokenize(stripped).len())
}

/// Deepest `{` nesting, skipping braces in literals. A stray `}` clamps at 0.
pub fn max_brace_depth(stripped: &str) -> u32 {
    let bytes = stripped.as_bytes();
    let (mut depth, mut max) = (0u32, 0u32);
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => {
                i = literal_end(bytes, i);
                continue;
            }
            b'{' => {
                depth += 1;
                max = max.max(depth);
            }
            b'}' => depth = depth.saturating_sub(1),
            _ => {}
        }
        i += 1;
    }
    max
}

/// Parameters in the first parenthesised group.
///
/// Top-level commas plus one; `()` and `(void)` count as zero. Commas in
/// nested parentheses (function-pointer parameters) are ignored. A group
/// without its closing `)` runs to the end of input.
pub fn param_count(stripped: &str) -> u32 {
    let Some(open) = stripped.find('(') else {
        return 0;
    };
    let rest = &stripped[open + 1..];
    let mut depth = 0u32;
    let mut commas = 0u32;
    let mut end = rest.len();
    for (i, b) in rest.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' if depth == 0 => {
                end = i;
                break;
            }
            b')' => depth -= 1,
            b',' if depth == 0 => commas += 1,
            _ => {}
        }
    }
    let group = rest[..end].trim();
    if group.is_empty() || group == "void" {
        0
    } else {
        commas + 1
    }
}
