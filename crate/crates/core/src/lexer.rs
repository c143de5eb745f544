//! Language-agnostic lexing of source code into tokens.
//!
//! A [`LanguageProfile`] describes comments, string literals, keywords and the
//! operator table of a language. Lexing is total: characters the profile does
//! not recognise become single-character [`TokenKind::Punct`] tokens, so messy
//! corpora never abort ingestion. Whitespace is never a token.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Identifier,
    Number,
    String,
    Operator,
    Punct,
    Keyword,
    CommentLine,
    CommentBlock,
}

impl TokenKind {
    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::CommentLine | TokenKind::CommentBlock)
    }
}

/// Half-open byte range into the lexed source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub kind: TokenKind,
    pub span: Span,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StringDelimiter {
    pub delim: char,
    pub escape: Option<char>,
}

/// Lexical rules for one language. Construct through [`LanguageProfile::new`],
/// [`LanguageProfile::from_json`] or one of the built-ins; all of them validate.
#[derive(Clone, Debug)]
pub struct LanguageProfile {
    name: String,
    line_comments: Vec<String>,
    block_comments: Vec<(String, String)>,
    strings: Vec<StringDelimiter>,
    keywords: HashSet<String>,
    /// Unique, longest first.
    operators: Vec<String>,
}

/// On-disk JSON shape of a profile.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub name: String,
    #[serde(default)]
    pub line_comments: Vec<String>,
    #[serde(default)]
    pub block_comments: Vec<(String, String)>,
    #[serde(default)]
    pub strings: Vec<StringSpec>,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub operators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StringSpec {
    pub delim: String,
    #[serde(default)]
    pub escape: String,
}

fn single_char(s: &str, what: &str) -> Result<char> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::InvalidProfile(format!(
            "{what} must be exactly one character, got {s:?}"
        ))),
    }
}

impl LanguageProfile {
    pub fn new(spec: ProfileSpec) -> Result<Self> {
        if spec.name.trim().is_empty() {
            return Err(Error::InvalidProfile("profile name is empty".into()));
        }
        if spec.line_comments.iter().any(|m| m.is_empty()) {
            return Err(Error::InvalidProfile("empty line comment marker".into()));
        }
        let mut opens = HashSet::new();
        for (open, close) in &spec.block_comments {
            if open.is_empty() || close.is_empty() {
                return Err(Error::InvalidProfile("empty block comment marker".into()));
            }
            if !opens.insert(open.as_str()) {
                return Err(Error::InvalidProfile(format!(
                    "duplicate block comment opener {open:?}"
                )));
            }
        }
        let mut strings = Vec::with_capacity(spec.strings.len());
        for s in &spec.strings {
            let delim = single_char(&s.delim, "string delimiter")?;
            let escape = if s.escape.is_empty() {
                None
            } else {
                Some(single_char(&s.escape, "string escape")?)
            };
            strings.push(StringDelimiter { delim, escape });
        }
        let mut seen = HashSet::new();
        for op in &spec.operators {
            if op.is_empty() || op.chars().any(char::is_whitespace) {
                return Err(Error::InvalidProfile(format!("bad operator {op:?}")));
            }
            if !seen.insert(op.as_str()) {
                return Err(Error::InvalidProfile(format!("duplicate operator {op:?}")));
            }
        }
        let mut operators = spec.operators.clone();
        operators.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));

        Ok(LanguageProfile {
            name: spec.name,
            line_comments: spec.line_comments,
            block_comments: spec.block_comments,
            strings,
            keywords: spec.keywords.into_iter().collect(),
            operators,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let spec: ProfileSpec = serde_json::from_str(json)
            .map_err(|e| Error::InvalidProfile(format!("malformed profile JSON: {e}")))?;
        Self::new(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }

    pub fn to_spec(&self) -> ProfileSpec {
        ProfileSpec {
            name: self.name.clone(),
            line_comments: self.line_comments.clone(),
            block_comments: self.block_comments.clone(),
            strings: self
                .strings
                .iter()
                .map(|s| StringSpec {
                    delim: s.delim.to_string(),
                    escape: s.escape.map(String::from).unwrap_or_default(),
                })
                .collect(),
            keywords: self
                .keywords
                .iter()
                .cloned()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect(),
            operators: self.operators.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_keyword(&self, word: &str) -> bool {
        self.keywords.contains(word)
    }

    pub fn operators(&self) -> &[String] {
        &self.operators
    }

    /// C-style comments, both quote styles and a broad operator table. Used
    /// whenever a record's language has no dedicated profile.
    pub fn generic() -> &'static LanguageProfile {
        static P: OnceLock<LanguageProfile> = OnceLock::new();
        P.get_or_init(|| {
            c_family(
                "generic",
                &["\"", "'", "`"],
                GENERIC_KEYWORDS,
                GENERIC_OPERATORS,
            )
        })
    }

    pub fn java() -> &'static LanguageProfile {
        static P: OnceLock<LanguageProfile> = OnceLock::new();
        P.get_or_init(|| c_family("java", &["\"", "'"], JAVA_KEYWORDS, JAVA_OPERATORS))
    }

    /// Rust has no single-quoted strings in the lexical sense: `'a` is usually
    /// a lifetime, so only `"` delimits strings here.
    pub fn rust() -> &'static LanguageProfile {
        static P: OnceLock<LanguageProfile> = OnceLock::new();
        P.get_or_init(|| c_family("rust", &["\""], RUST_KEYWORDS, RUST_OPERATORS))
    }

    pub fn builtin(name: &str) -> Option<&'static LanguageProfile> {
        match name.trim().to_ascii_lowercase().as_str() {
            "java" => Some(Self::java()),
            "rust" | "rs" => Some(Self::rust()),
            "generic" => Some(Self::generic()),
            _ => None,
        }
    }

    /// Built-in profile for `lang`, falling back to [`LanguageProfile::generic`].
    pub fn for_language(lang: &str) -> &'static LanguageProfile {
        Self::builtin(lang).unwrap_or_else(Self::generic)
    }
}

fn c_family(name: &str, quotes: &[&str], keywords: &[&str], operators: &[&str]) -> LanguageProfile {
    LanguageProfile::new(ProfileSpec {
        name: name.into(),
        line_comments: vec!["//".into()],
        block_comments: vec![("/*".into(), "*/".into())],
        strings: quotes
            .iter()
            .map(|q| StringSpec {
                delim: (*q).into(),
                escape: "\\".into(),
            })
            .collect(),
        keywords: keywords.iter().map(|s| s.to_string()).collect(),
        operators: operators.iter().map(|s| s.to_string()).collect(),
    })
    .expect("built-in profile is well formed")
}

const GENERIC_KEYWORDS: &[&str] = &[
    "abstract", "async", "await", "bool", "boolean", "break", "case", "catch", "char", "class",
    "const", "continue", "def", "default", "delete", "do", "double", "else", "enum", "export",
    "extends", "false", "final", "finally", "float", "fn", "for", "func", "function", "if",
    "impl", "implements", "import", "in", "int", "interface", "let", "long", "match", "mod",
    "mut", "namespace", "new", "nil", "null", "package", "private", "protected", "pub", "public",
    "return", "self", "short", "static", "struct", "super", "switch", "this", "throw", "throws",
    "trait", "true", "try", "type", "typedef", "unsigned", "use", "var", "void", "volatile",
    "while", "yield",
];

const GENERIC_OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "===", "!==", "**=", "->", "=>", "::", "==", "!=", "<=",
    ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
    "**", "??", "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~", "?", ":",
];

const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "false", "final", "finally",
    "float", "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "null", "package", "private", "protected", "public", "record", "return",
    "short", "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "true", "try", "var", "void", "volatile", "while", "yield",
];

const JAVA_OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++",
    "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%",
    "=", "<", ">", "!", "&", "|", "^", "~", "?", ":",
];

const RUST_KEYWORDS: &[&str] = &[
    "as", "async", "await", "break", "const", "continue", "crate", "dyn", "else", "enum",
    "extern", "false", "fn", "for", "if", "impl", "in", "let", "loop", "match", "mod", "move",
    "mut", "pub", "ref", "return", "self", "Self", "static", "struct", "super", "trait", "true",
    "type", "unsafe", "use", "where", "while",
];

const RUST_OPERATORS: &[&str] = &[
    "<<=", ">>=", "...", "..=", "->", "=>", "::", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=",
    "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "..", "+", "-", "*", "/", "%", "=", "<", ">",
    "!", "&", "|", "^", "?", ":",
];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Lex `source` with `profile`. Never fails.
pub fn tokenize(source: &str, profile: &LanguageProfile) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < source.len() {
        let rest = &source[pos..];
        let c = rest.chars().next().expect("pos is on a char boundary");
        if c.is_whitespace() {
            pos += c.len_utf8();
            continue;
        }
        let (len, kind) = lex_one(rest, c, profile);
        tokens.push(Token {
            text: rest[..len].to_string(),
            kind,
            span: Span {
                start: pos,
                end: pos + len,
            },
        });
        pos += len;
    }
    tokens
}

/// Length in bytes and kind of the token starting at `rest`, whose first char is `c`.
fn lex_one(rest: &str, c: char, profile: &LanguageProfile) -> (usize, TokenKind) {
    if profile.line_comments.iter().any(|m| rest.starts_with(m.as_str())) {
        let mut end = rest.find('\n').unwrap_or(rest.len());
        if rest[..end].ends_with('\r') {
            end -= 1;
        }
        return (end, TokenKind::CommentLine);
    }
    for (open, close) in &profile.block_comments {
        if rest.starts_with(open.as_str()) {
            let end = rest[open.len()..]
                .find(close.as_str())
                .map(|i| open.len() + i + close.len())
                .unwrap_or(rest.len());
            return (end, TokenKind::CommentBlock);
        }
    }
    if let Some(delim) = profile.strings.iter().find(|s| s.delim == c) {
        // An unterminated literal runs to the end of the input, so the
        // token re-lexes identically after rendering.
        return (scan_string(rest, delim).unwrap_or(rest.len()), TokenKind::String);
    }
    if c.is_ascii_digit() {
        return (scan_number(rest), TokenKind::Number);
    }
    if is_ident_start(c) {
        let len = rest
            .char_indices()
            .find(|&(_, ch)| !is_ident_continue(ch))
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let kind = if profile.is_keyword(&rest[..len]) {
            TokenKind::Keyword
        } else {
            TokenKind::Identifier
        };
        return (len, kind);
    }
    if let Some(op) = profile.operators.iter().find(|op| rest.starts_with(op.as_str())) {
        return (op.len(), TokenKind::Operator);
    }
    (c.len_utf8(), TokenKind::Punct)
}

/// String literals end at the matching delimiter, possibly on a later line; an
/// escape consumes the following char. Returns `None` when unterminated.
fn scan_string(rest: &str, delim: &StringDelimiter) -> Option<usize> {
    let mut chars = rest.char_indices().skip(1);
    while let Some((i, ch)) = chars.next() {
        if Some(ch) == delim.escape {
            chars.next();
        } else if ch == delim.delim {
            return Some(i + ch.len_utf8());
        }
    }
    None
}

fn scan_number(rest: &str) -> usize {
    let bytes = rest.as_bytes();
    let hex = bytes.len() > 1 && bytes[0] == b'0' && matches!(bytes[1], b'x' | b'X');
    let mut end = 1;
    while end < bytes.len() {
        let b = bytes[end];
        let next_is_digit = bytes.get(end + 1).is_some_and(u8::is_ascii_digit);
        let ok = b.is_ascii_alphanumeric()
            || b == b'_'
            || (b == b'.' && next_is_digit)
            || (!hex && matches!(b, b'+' | b'-') && matches!(bytes[end - 1], b'e' | b'E') && next_is_digit);
        if !ok {
            break;
        }
        end += 1;
    }
    end
}

/// Join token texts with single spaces, optionally dropping comments.
pub fn render(tokens: &[Token], drop_comments: bool) -> String {
    let mut out = String::new();
    for tok in tokens {
        if drop_comments && tok.kind.is_comment() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&tok.text);
    }
    out
}

/// CRLF (and lone CR) to LF.
pub fn normalize_line_endings(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Non-comment tokens of `source` after line-ending normalisation; the
/// sequence every sample is built from. Spans refer to the normalised text.
pub fn code_tokens(source: &str, profile: &LanguageProfile) -> Vec<Token> {
    let mut tokens = tokenize(&normalize_line_endings(source), profile);
    tokens.retain(|t| !t.kind.is_comment());
    tokens
}

/// Canonical one-line rendering of `source`: code tokens joined by single spaces.
pub fn canonical(source: &str, profile: &LanguageProfile) -> String {
    render(&code_tokens(source, profile), false)
}

/// Style-insensitive form used for exact-match comparison: comments removed,
/// every whitespace run (including the gap left by a comment) collapsed to one
/// space, lowercased.
pub fn normalize_for_match(source: &str, profile: &LanguageProfile) -> String {
    let mut out = String::with_capacity(source.len());
    let mut last_end: Option<usize> = None;
    for tok in tokenize(source, profile) {
        if tok.kind.is_comment() {
            continue;
        }
        if let Some(end) = last_end {
            if end < tok.span.start {
                out.push(' ');
            }
        }
        out.push_str(&tok.text);
        last_end = Some(tok.span.end);
    }
    out.to_lowercase()
}
