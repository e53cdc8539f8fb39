//! Comment stripping, tokenization, n-grams and identifier renaming.
//!
//! All routines are single left-to-right scans over the UTF-8 bytes of the
//! input. Every delimiter the lexer cares about is ASCII, so multi-byte
//! characters are never split.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Deref;

/// Multi-character operators recognised as single tokens, longest first.
pub const MULTI_CHAR_OPERATORS: [&str; 22] = [
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=", "-=", "*=",
    "/=", "%=", "&=", "|=", "^=",
];

/// C89 keywords plus `inline` and `restrict`; never renamed.
pub const C_KEYWORDS: [&str; 34] = [
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum",
    "extern", "float", "for", "goto", "if", "int", "long", "register", "return", "short", "signed", "sizeof",
    "static", "struct", "switch", "typedef", "union", "unsigned", "void", "volatile", "while", "inline",
    "restrict",
];

/// Placeholder substituted for renamed identifiers.
pub const RENAME_PLACEHOLDER: &str = "ID";

/// Ordered lexemes borrowed from a source string.
///
/// No token is empty or contains whitespace, and case is preserved.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream<'a> {
    tokens: Vec<&'a str>,
}

impl<'a> TokenStream<'a> {
    pub fn as_slice(&self) -> &[&'a str] {
        &self.tokens
    }

    pub fn into_vec(self) -> Vec<&'a str> {
        self.tokens
    }
}

impl<'a> Deref for TokenStream<'a> {
    type Target = [&'a str];

    fn deref(&self) -> &Self::Target {
        &self.tokens
    }
}

impl<'a> AsRef<[&'a str]> for TokenStream<'a> {
    fn as_ref(&self) -> &[&'a str] {
        &self.tokens
    }
}

impl<'a> FromIterator<&'a str> for TokenStream<'a> {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        Self { tokens: iter.into_iter().collect() }
    }
}

#[inline]
fn is_ident_start(b: u8) -> bool {
    b.is_ascii_alphabetic() || b == b'_'
}

#[inline]
fn is_ident_continue(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

#[inline]
fn is_number_continue(b: u8) -> bool {
    is_ident_continue(b) || b == b'.'
}

/// Returns the index just past a string or character literal opened at
/// `start`.
///
/// The literal ends at the matching quote; a backslash escapes the following
/// byte. An unescaped newline or the end of input also terminates it (the
/// newline itself is not consumed), since C literals cannot span lines.
pub(crate) fn literal_end(bytes: &[u8], start: usize) -> usize {
    let quote = bytes[start];
    let mut i = start + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\n' => return i,
            b if b == quote => return i + 1,
            _ => i += 1,
        }
    }
    bytes.len()
}

/// Blanks out `//` and `/* ... */` comments.
///
/// Comment bytes become spaces except newlines inside block comments, so the
/// output has the same byte length and line structure as the input. Comment
/// openers inside string or character literals are left alone, and an
/// unterminated block comment runs to the end of input.
pub fn strip_comments(source: &str) -> String {
    let bytes = source.as_bytes();
    let mut out = bytes.to_vec();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' | b'\'' => i = literal_end(bytes, i),
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    out[i] = b' ';
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                out[i] = b' ';
                out[i + 1] = b' ';
                i += 2;
                loop {
                    if i >= bytes.len() {
                        break;
                    }
                    if bytes[i] == b'*' && bytes.get(i + 1) == Some(&b'/') {
                        out[i] = b' ';
                        out[i + 1] = b' ';
                        i += 2;
                        break;
                    }
                    if bytes[i] != b'\n' {
                        out[i] = b' ';
                    }
                    i += 1;
                }
            }
            _ => i += 1,
        }
    }
    // Only whole comment regions were blanked and their delimiters are ASCII,
    // so multi-byte sequences are either kept intact or fully replaced.
    String::from_utf8(out).expect("comment blanking preserves UTF-8")
}

fn operator_len(rest: &[u8]) -> Option<usize> {
    MULTI_CHAR_OPERATORS.iter().find(|op| rest.starts_with(op.as_bytes())).map(|op| op.len())
}

/// Splits source text into lexemes by maximal munch.
///
/// Token classes, in priority order: the fixed [`MULTI_CHAR_OPERATORS`],
/// identifiers `[A-Za-z_][A-Za-z0-9_]*`, numbers (a digit followed by the
/// longest run of `[0-9A-Za-z_.]`), and any other single non-whitespace
/// character. Comments are not removed.
pub fn tokenize(source: &str) -> TokenStream<'_> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::with_capacity(bytes.len() / 3);
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let len = if !b.is_ascii() {
            let ch = source[i..].chars().next().expect("char boundary");
            if ch.is_whitespace() {
                i += ch.len_utf8();
                continue;
            }
            ch.len_utf8()
        } else if let Some(len) = operator_len(&bytes[i..]) {
            len
        } else if is_ident_start(b) {
            1 + bytes[i + 1..].iter().take_while(|&&c| is_ident_continue(c)).count()
        } else if b.is_ascii_digit() {
            1 + bytes[i + 1..].iter().take_while(|&&c| is_number_continue(c)).count()
        } else {
            1
        };
        tokens.push(&source[i..i + len]);
        i += len;
    }
    TokenStream { tokens }
}

/// Calls `f` with every n-gram of `tokens` for `n` in `n_min..=n_max`.
///
/// Tokens in a window are joined by a single space. All unigrams come first,
/// then all bigrams, and so on. The string handed to `f` is a reused buffer.
pub fn for_each_ngram<F>(tokens: &[&str], n_min: usize, n_max: usize, mut f: F)
where
    F: FnMut(&str),
{
    let mut buf = String::new();
    for n in n_min.max(1)..=n_max {
        if n > tokens.len() {
            break;
        }
        for window in tokens.windows(n) {
            if n == 1 {
                f(window[0]);
                continue;
            }
            buf.clear();
            for (k, tok) in window.iter().enumerate() {
                if k > 0 {
                    buf.push(' ');
                }
                buf.push_str(tok);
            }
            f(&buf);
        }
    }
}

/// Every contiguous window of `n_min..=n_max` tokens, space-joined.
pub fn ngrams(tokens: &[&str], n_min: usize, n_max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for_each_ngram(tokens, n_min, n_max, |g| out.push(String::from(g)));
    out
}

/// Replaces every identifier-shaped run not in `keywords` with `placeholder`.
///
/// This is plain pattern replacement with no notion of comments or literals,
/// so names inside those are replaced too. Matches follow leftmost regex
/// semantics for `[A-Za-z_][A-Za-z0-9_]*`, which means the suffix of `10UL`
/// is also a match.
pub fn rename_identifiers<S: AsRef<str>>(source: &str, keywords: &[S], placeholder: &str) -> String {
    let bytes = source.as_bytes();
    let mut out = String::with_capacity(source.len());
    let mut copied = 0;
    let mut i = 0;
    while i < bytes.len() {
        if !is_ident_start(bytes[i]) {
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        while i < bytes.len() && is_ident_continue(bytes[i]) {
            i += 1;
        }
        let word = &source[start..i];
        if !keywords.iter().any(|k| k.as_ref() == word) {
            out.push_str(&source[copied..start]);
            out.push_str(placeholder);
            copied = i;
        }
    }
    out.push_str(&source[copied..]);
    out
}

/// [`rename_identifiers`] with the C keyword list and the `ID` placeholder.
///
/// The placeholder is treated as a keyword, which makes the operation
/// idempotent.
pub fn rename_c_identifiers(source: &str) -> String {
    let mut protected: Vec<&str> = C_KEYWORDS.to_vec();
    protected.push(RENAME_PLACEHOLDER);
    rename_identifiers(source, &protected, RENAME_PLACEHOLDER)
}
