//! Seeded snippet generator and reference implementations used by the
//! acceptance suite. The references deliberately take different routes
//! (regular expressions, pairwise counting, dense matrices) from the crate
//! code they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;

/// A generated snippet and the string literals placed in its code regions.
pub struct Snippet {
    pub text: String,
    pub literals: Vec<String>,
}

const NAMES: [&str; 10] = ["a", "b", "buf", "len", "iffy", "forward", "p_1", "Node", "x9", "_tmp"];
const CALLS: [&str; 5] = ["memcpy", "strcpy", "free", "check", "g"];

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    out: String,
    literals: Vec<String>,
}

impl Gen<'_> {
    fn name(&mut self) -> &'static str {
        NAMES[self.rng.gen_range(0..NAMES.len())]
    }

    fn literal(&mut self) {
        const BODIES: [&str; 8] = ["//x", "/* no */", "{{", "}", "a \\\" b", "if && ||", "", "é ok"];
        let lit = if self.rng.gen_bool(0.8) {
            format!("\"{}\"", BODIES[self.rng.gen_range(0..BODIES.len())])
        } else {
            const CHARS: [&str; 5] = ["'{'", "'\\''", "'/'", "'\"'", "'a'"];
            CHARS[self.rng.gen_range(0..CHARS.len())].to_string()
        };
        self.out.push_str(&lit);
        self.literals.push(lit);
    }

    fn comment(&mut self) {
        const TEXT: [&str; 6] = ["if (x) {", "while && ||", "don't", "\"quoted", "case ?", "f(a, b)"];
        let t = TEXT[self.rng.gen_range(0..TEXT.len())];
        if self.rng.gen_bool(0.5) {
            self.out.push_str(&format!("// {t}\n"));
        } else if self.rng.gen_bool(0.5) {
            self.out.push_str(&format!("/* {t}\n {t} */"));
        } else {
            self.out.push_str(&format!("/*{t}*/"));
        }
    }

    fn expr(&mut self, depth: u32) {
        match self.rng.gen_range(0..7) {
            0 => self.literal(),
            1 => {
                let n = self.rng.gen_range(0..1000u32);
                let suffix = ["", "UL", ".5e3", "x1F"][self.rng.gen_range(0..4)];
                self.out.push_str(&format!("{n}{suffix}"));
            }
            2 if depth < 3 => {
                self.expr(depth + 1);
                let op = ["&&", "||", "+", "<<=", "->", "==", "!=", "&", "|"][self.rng.gen_range(0..9)];
                self.out.push_str(&format!(" {op} "));
                self.expr(depth + 1);
            }
            3 if depth < 3 => {
                self.expr(depth + 1);
                self.out.push_str(" ? ");
                self.expr(depth + 1);
                self.out.push_str(" : ");
                self.expr(depth + 1);
            }
            4 if depth < 3 => {
                let f = CALLS[self.rng.gen_range(0..CALLS.len())];
                self.out.push_str(f);
                self.out.push('(');
                let args = self.rng.gen_range(0..3);
                for k in 0..args {
                    if k > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(depth + 1);
                }
                self.out.push(')');
            }
            _ => {
                let n = self.name();
                self.out.push_str(n);
            }
        }
    }

    fn indent(&mut self, depth: u32) {
        for _ in 0..depth {
            self.out.push_str(if self.rng.gen_bool(0.9) { "  " } else { "\t" });
        }
    }

    fn stmt(&mut self, depth: u32) {
        self.indent(depth);
        match self.rng.gen_range(0..9) {
            0 | 1 if depth < 5 => {
                let kw = ["if", "while", "for"][self.rng.gen_range(0..3)];
                self.out.push_str(kw);
                self.out.push_str(" (");
                self.expr(0);
                self.out.push_str(") {\n");
                self.block(depth + 1);
                self.indent(depth);
                self.out.push_str("}\n");
            }
            2 if depth < 5 => {
                self.out.push_str("switch (");
                self.expr(2);
                self.out.push_str(") {\n");
                for _ in 0..self.rng.gen_range(1..4) {
                    self.indent(depth + 1);
                    self.out.push_str(&format!("case {}: ", self.rng.gen_range(0..9)));
                    self.expr(2);
                    self.out.push_str("; break;\n");
                }
                self.indent(depth);
                self.out.push_str("}\n");
            }
            3 => {
                self.comment();
                self.out.push('\n');
            }
            4 => self.out.push_str("\n   \n"),
            _ => {
                let n = self.name();
                self.out.push_str(n);
                self.out.push_str(" = ");
                self.expr(0);
                self.out.push(';');
                if self.rng.gen_bool(0.2) {
                    self.out.push(' ');
                    self.comment();
                }
                self.out.push('\n');
            }
        }
    }

    fn block(&mut self, depth: u32) {
        for _ in 0..self.rng.gen_range(0..4) {
            self.stmt(depth);
        }
    }
}

/// A function-shaped C snippet: signature, nested blocks, literals, comments.
pub fn c_snippet(rng: &mut ChaCha8Rng) -> Snippet {
    let mut g = Gen { rng, out: String::new(), literals: Vec::new() };
    if g.rng.gen_bool(0.2) {
        g.comment();
        g.out.push('\n');
    }
    let ret = ["int", "void", "static char *", "size_t"][g.rng.gen_range(0..4)];
    g.out.push_str(ret);
    g.out.push_str(" f(");
    match g.rng.gen_range(0..5) {
        0 => {}
        1 => g.out.push_str("void"),
        2 => g.out.push_str("int (*cb)(int, int), char *s"),
        _ => {
            let n = g.rng.gen_range(1..5);
            for k in 0..n {
                if k > 0 {
                    g.out.push_str(", ");
                }
                if g.rng.gen_bool(0.2) {
                    g.comment();
                }
                g.out.push_str(&format!("int a{k}"));
            }
        }
    }
    g.out.push_str(")\n{\n");
    g.block(1);
    if g.rng.gen_bool(0.3) {
        g.out.push_str("}}");
    }
    g.out.push_str("}\n");
    if g.rng.gen_bool(0.1) {
        g.out.push_str("/* unterminated {");
    }
    Snippet { text: g.out, literals: g.literals }
}

fn comment_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r#"(?s)"(?:\\.|[^"\\\n])*"?|'(?:\\.|[^'\\\n])*'?|//[^\n]*|/\*.*?\*/|/\*.*"#).unwrap()
    })
}

/// Comment stripping by regular expression: literals are matched and kept,
/// comment matches are blanked byte-for-byte except newlines.
pub fn strip_oracle(src: &str) -> String {
    let mut out = String::with_capacity(src.len());
    let mut last = 0;
    for m in comment_regex().find_iter(src) {
        out.push_str(&src[last..m.start()]);
        let text = m.as_str();
        if text.starts_with("//") || text.starts_with("/*") {
            for b in text.bytes() {
                out.push(if b == b'\n' { '\n' } else { ' ' });
            }
        } else {
            out.push_str(text);
        }
        last = m.end();
    }
    out.push_str(&src[last..]);
    out
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"<<=|>>=|\.\.\.|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||\+=|-=|\*=|/=|%=|&=|\|=|\^=|[A-Za-z_][A-Za-z0-9_]*|[0-9][0-9A-Za-z_.]*|\S",
        )
        .unwrap()
    })
}

pub fn tokenize_oracle(src: &str) -> Vec<&str> {
    token_regex().find_iter(src).map(|m| m.as_str()).collect()
}

/// (nloc, ccn, tokens, depth, params) computed without the crate's lexer.
pub fn metrics_oracle(src: &str) -> [u32; 5] {
    let stripped = strip_oracle(src);
    let nloc = stripped.split('\n').filter(|l| l.chars().any(|c| !c.is_whitespace())).count() as u32;
    let tokens = tokenize_oracle(&stripped);
    let ccn = 1 + tokens
        .iter()
        .filter(|t| matches!(**t, "if" | "for" | "while" | "case" | "&&" | "||" | "?"))
        .count() as u32;

    static LIT: OnceLock<Regex> = OnceLock::new();
    let lit = LIT.get_or_init(|| Regex::new(r#""(?:\\.|[^"\\\n])*"?|'(?:\\.|[^'\\\n])*'?"#).unwrap());
    let no_lits = lit.replace_all(&stripped, "");
    let mut depth = 0i64;
    let mut max = 0i64;
    for c in no_lits.chars() {
        if c == '{' {
            depth += 1;
            max = max.max(depth);
        } else if c == '}' {
            depth = (depth - 1).max(0);
        }
    }

    let params = match stripped.find('(') {
        None => 0,
        Some(open) => {
            static INNER: OnceLock<Regex> = OnceLock::new();
            let inner = INNER.get_or_init(|| Regex::new(r"\([^()]*\)").unwrap());
            let mut rest = stripped[open + 1..].to_string();
            loop {
                let next = inner.replace_all(&rest, "").into_owned();
                if next == rest {
                    break;
                }
                rest = next;
            }
            let group = rest.split(')').next().unwrap_or("").trim().to_string();
            if group.is_empty() || group == "void" {
                0
            } else {
                group.matches(',').count() as u32 + 1
            }
        }
    };
    [nloc, ccn, tokens.len() as u32, max as u32, params]
}

/// Dense TF-IDF matrix over `terms` (already filtered by min_df), straight
/// from the definitions.
pub fn dense_tfidf(docs: &[Vec<String>], n_max: usize, min_df: usize) -> (Vec<String>, Vec<Vec<f64>>) {
    let grams = |d: &Vec<String>| -> Vec<String> {
        let mut g = Vec::new();
        for n in 1..=n_max {
            if d.len() >= n {
                for i in 0..=d.len() - n {
                    g.push(d[i..i + n].join(" "));
                }
            }
        }
        g
    };
    let all: Vec<Vec<String>> = docs.iter().map(grams).collect();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for g in &all {
        for t in g.iter().collect::<BTreeSet<_>>() {
            *df.entry(t.clone()).or_default() += 1;
        }
    }
    let terms: Vec<String> = df.iter().filter(|(_, &c)| c >= min_df).map(|(t, _)| t.clone()).collect();
    let n = docs.len() as f64;
    let rows = all
        .iter()
        .map(|g| {
            let mut row: Vec<f64> = terms
                .iter()
                .map(|t| {
                    let tf = g.iter().filter(|x| *x == t).count() as f64;
                    tf * (((1.0 + n) / (1.0 + df[t] as f64)).ln() + 1.0)
                })
                .collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.iter_mut().for_each(|v| *v /= norm);
            }
            row
        })
        .collect();
    (terms, rows)
}

/// Average precision by pairwise counting: for each positive, the precision
/// of the prefix that ends at it.
pub fn ap_oracle(labels: &[u8], scores: &[f64], ids: &[usize]) -> f64 {
    let above = |i: usize, j: usize| scores[j] > scores[i] || (scores[j] == scores[i] && ids[j] <= ids[i]);
    let pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == 1).collect();
    let mut terms: Vec<(usize, f64)> = pos
        .iter()
        .map(|&i| {
            let prefix: Vec<usize> = (0..labels.len()).filter(|&j| above(i, j)).collect();
            let hits = prefix.iter().filter(|&&j| labels[j] == 1).count();
            (prefix.len(), hits as f64 / prefix.len() as f64)
        })
        .collect();
    terms.sort_by_key(|t| t.0);
    terms.iter().map(|t| t.1).sum::<f64>() / pos.len() as f64
}

pub fn recall_at_oracle(labels: &[u8], scores: &[f64], ids: &[usize], fraction: f64) -> f64 {
    let n = labels.len();
    let k = ((fraction * n as f64).floor() as usize).max(1);
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let found = (0..n)
        .filter(|&i| labels[i] == 1)
        .filter(|&i| {
            let rank = (0..n)
                .filter(|&j| scores[j] > scores[i] || (scores[j] == scores[i] && ids[j] < ids[i]))
                .count();
            rank < k
        })
        .count();
    found as f64 / pos as f64
}

pub fn auc_oracle(labels: &[u8], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..labels.len() {
        for j in 0..labels.len() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}
