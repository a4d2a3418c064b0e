//! Reader and printer for the object language.
//!
//! Expressions are immutable trees of symbols, integers and proper lists.
//! The printed form is canonical: upper-case symbols, single spaces, the
//! empty list spelled `NIL`, and quote always spelled out as `(QUOTE x)`.
//! The reader accepts `'x` sugar and is case-insensitive; `print` followed
//! by `read` is the identity on every expression.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Characters allowed in symbol tokens besides ASCII alphanumerics.
const SYMBOL_PUNCT: &str = "-+*/.<>=?!";

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || SYMBOL_PUNCT.contains(c)
}

/// True when `text` lexes as an integer token: an optional sign followed by
/// one or more digits.
fn lexes_as_int(text: &str) -> bool {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

// ---------------------------------------------------------------------------
// Symbols
// ---------------------------------------------------------------------------

/// An interned-ish symbol name, canonically upper-case.
///
/// `NIL` is not a `Symbol`: the empty list, the token `nil` and the printed
/// form `()` are all the single value [`Expr::Nil`].
#[derive(Clone, Eq)]
pub struct Symbol(Arc<str>);

impl Symbol {
    /// Builds a symbol, upper-casing the name. Returns `None` when the name
    /// would not read back as the same symbol: empty, characters outside the
    /// token alphabet, a leading digit, an integer-shaped token, or `nil`.
    pub fn try_new(name: &str) -> Option<Symbol> {
        let canon = name.to_ascii_uppercase();
        let valid = !canon.is_empty()
            && canon.chars().all(is_symbol_char)
            && !canon.starts_with(|c: char| c.is_ascii_digit())
            && !lexes_as_int(&canon)
            && canon != "NIL";
        valid.then(|| Symbol(canon.into()))
    }

    /// Like [`Symbol::try_new`] but panics on an invalid name.
    pub fn new(name: &str) -> Symbol {
        Symbol::try_new(name).unwrap_or_else(|| panic!("invalid symbol name: {name:?}"))
    }

    /// Used by the reader once a token has already been validated.
    pub(crate) fn from_canonical(name: String) -> Symbol {
        debug_assert!(Symbol::try_new(&name).is_some(), "bad canonical symbol {name:?}");
        Symbol(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl PartialEq for Symbol {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbol({})", self.0)
    }
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

/// An s-expression: the empty list `NIL`, a symbol, an integer, or a
/// non-empty proper list. Program code and program data share this one type,
/// which is what lets the interpreter treat code under execution as data.
///
/// Values are immutable; clones share structure.
#[derive(Clone, Eq)]
pub enum Expr {
    Nil,
    Sym(Symbol),
    Int(i64),
    List(Arc<[Expr]>),
}

impl Expr {
    /// Builds a symbol expression; `nil` (any case) yields [`Expr::Nil`].
    /// Panics on names that would not round-trip through the reader.
    pub fn symbol(name: &str) -> Expr {
        if name.eq_ignore_ascii_case("nil") {
            Expr::Nil
        } else {
            Expr::Sym(Symbol::new(name))
        }
    }

    pub fn int(value: i64) -> Expr {
        Expr::Int(value)
    }

    /// Builds a list; the empty list is `NIL` itself.
    pub fn list(items: Vec<Expr>) -> Expr {
        if items.is_empty() {
            Expr::Nil
        } else {
            Expr::List(items.into())
        }
    }

    /// The truth symbol `T`.
    pub fn truth() -> Expr {
        static TRUTH: std::sync::LazyLock<Expr> =
            std::sync::LazyLock::new(|| Expr::Sym(Symbol::from_canonical("T".to_string())));
        TRUTH.clone()
    }

    /// Wraps an expression as `(QUOTE expr)`.
    pub fn quoted(expr: Expr) -> Expr {
        Expr::list(vec![Expr::symbol("QUOTE"), expr])
    }

    /// Symbols, integers and `NIL` are atoms; only non-empty lists are not.
    pub fn is_atom(&self) -> bool {
        !matches!(self, Expr::List(_))
    }

    /// Everything except `NIL` counts as true in `cond` tests.
    pub fn is_truthy(&self) -> bool {
        !matches!(self, Expr::Nil)
    }

    /// List elements; `NIL` is the empty list.
    pub fn elements(&self) -> &[Expr] {
        match self {
            Expr::List(items) => items,
            _ => &[],
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            Expr::Sym(s) => Some(s),
            _ => None,
        }
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Nil, Expr::Nil) => true,
            (Expr::Sym(a), Expr::Sym(b)) => a == b,
            (Expr::Int(a), Expr::Int(b)) => a == b,
            (Expr::List(a), Expr::List(b)) => Arc::ptr_eq(a, b) || a[..] == b[..],
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Nil => f.write_str("NIL"),
            Expr::Sym(s) => f.write_str(s.as_str()),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical printed form of an expression.
pub fn print(expr: &Expr) -> String {
    expr.to_string()
}

// ---------------------------------------------------------------------------
// Reading
// ---------------------------------------------------------------------------

/// Byte range in the source text, attached to read errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> SourceSpan {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bytes {}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReadErrorKind {
    EmptyInput,
    UnclosedList,
    UnexpectedClose,
    DanglingQuote,
    BadNumber,
    InvalidChar(char),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{} ({span})", self.describe())]
pub struct ReadError {
    pub kind: ReadErrorKind,
    pub span: SourceSpan,
}

impl ReadError {
    fn new(kind: ReadErrorKind, span: SourceSpan) -> ReadError {
        ReadError { kind, span }
    }

    fn describe(&self) -> String {
        match &self.kind {
            ReadErrorKind::EmptyInput => "no expression in input".to_string(),
            ReadErrorKind::UnclosedList => "unbalanced parentheses: list never closed".to_string(),
            ReadErrorKind::UnexpectedClose => "unbalanced parentheses: stray ')'".to_string(),
            ReadErrorKind::DanglingQuote => "quote is not followed by an expression".to_string(),
            ReadErrorKind::BadNumber => "token starts with a digit but is not an integer".to_string(),
            ReadErrorKind::InvalidChar(c) => format!("character {c:?} is not allowed"),
        }
    }
}

enum Token {
    Open,
    Close,
    Quote,
    Atom(String),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src, pos: 0 }
    }

    fn skip_blank(&mut self) {
        let mut chars = self.src[self.pos..].char_indices().peekable();
        while let Some(&(off, c)) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c == ';' {
                // comment runs to end of line
                chars.next();
                while let Some(&(_, c2)) = chars.peek() {
                    chars.next();
                    if c2 == '\n' {
                        break;
                    }
                }
            } else {
                self.pos += off;
                return;
            }
        }
        self.pos = self.src.len();
    }

    fn next_token(&mut self) -> Result<Option<(Token, SourceSpan)>, ReadError> {
        self.skip_blank();
        let rest = &self.src[self.pos..];
        let mut chars = rest.char_indices();
        let (_, c) = match chars.next() {
            Some(x) => x,
            None => return Ok(None),
        };
        let start = self.pos;
        match c {
            '(' => {
                self.pos += 1;
                Ok(Some((Token::Open, SourceSpan::new(start, start + 1))))
            }
            ')' => {
                self.pos += 1;
                Ok(Some((Token::Close, SourceSpan::new(start, start + 1))))
            }
            '\'' => {
                self.pos += 1;
                Ok(Some((Token::Quote, SourceSpan::new(start, start + 1))))
            }
            c if is_symbol_char(c) => {
                let len = rest
                    .char_indices()
                    .find(|&(_, c)| !is_symbol_char(c))
                    .map_or(rest.len(), |(i, _)| i);
                self.pos += len;
                let text = rest[..len].to_ascii_uppercase();
                Ok(Some((Token::Atom(text), SourceSpan::new(start, start + len))))
            }
            c => Err(ReadError::new(
                ReadErrorKind::InvalidChar(c),
                SourceSpan::new(start, start + c.len_utf8()),
            )),
        }
    }
}

/// Turns a validated atom token into an expression.
fn classify_atom(text: String, span: SourceSpan) -> Result<Expr, ReadError> {
    if lexes_as_int(&text) {
        return text
            .parse::<i64>()
            .map(Expr::Int)
            .map_err(|_| ReadError::new(ReadErrorKind::BadNumber, span));
    }
    if text.starts_with(|c: char| c.is_ascii_digit()) {
        return Err(ReadError::new(ReadErrorKind::BadNumber, span));
    }
    if text == "NIL" {
        return Ok(Expr::Nil);
    }
    Ok(Expr::Sym(Symbol::from_canonical(text)))
}

struct Frame {
    items: Vec<Expr>,
    open: SourceSpan,
    wrap: usize,
}

struct Parser<'a> {
    lexer: Lexer<'a>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { lexer: Lexer::new(src) }
    }

    /// Parses the next complete top-level expression, or `None` at end of
    /// input. Consumes exactly the tokens of that expression.
    fn next_expr(&mut self) -> Result<Option<Expr>, ReadError> {
        let mut frames: Vec<Frame> = Vec::new();
        let mut pending_quotes = 0usize;
        let mut quote_span = SourceSpan::new(0, 0);
        loop {
            let (token, span) = match self.lexer.next_token()? {
                Some(t) => t,
                None => {
                    return if let Some(frame) = frames.last() {
                        let end = self.lexer.src.len();
                        Err(ReadError::new(
                            ReadErrorKind::UnclosedList,
                            SourceSpan::new(frame.open.start, end),
                        ))
                    } else if pending_quotes > 0 {
                        Err(ReadError::new(ReadErrorKind::DanglingQuote, quote_span))
                    } else {
                        Ok(None)
                    };
                }
            };
            let completed = match token {
                Token::Quote => {
                    pending_quotes += 1;
                    quote_span = span;
                    continue;
                }
                Token::Open => {
                    frames.push(Frame {
                        items: Vec::new(),
                        open: span,
                        wrap: std::mem::take(&mut pending_quotes),
                    });
                    continue;
                }
                Token::Close => {
                    if pending_quotes > 0 {
                        return Err(ReadError::new(ReadErrorKind::DanglingQuote, quote_span));
                    }
                    let frame = frames
                        .pop()
                        .ok_or_else(|| ReadError::new(ReadErrorKind::UnexpectedClose, span))?;
                    let mut expr = Expr::list(frame.items);
                    for _ in 0..frame.wrap {
                        expr = Expr::quoted(expr);
                    }
                    expr
                }
                Token::Atom(text) => {
                    let mut expr = classify_atom(text, span)?;
                    for _ in 0..std::mem::take(&mut pending_quotes) {
                        expr = Expr::quoted(expr);
                    }
                    expr
                }
            };
            match frames.last_mut() {
                Some(frame) => frame.items.push(completed),
                None => return Ok(Some(completed)),
            }
        }
    }
}

/// Reads the first complete expression from `text`. Trailing input is
/// ignored; use [`read_all`] to consume everything.
pub fn read(text: &str) -> Result<Expr, ReadError> {
    let mut parser = Parser::new(text);
    match parser.next_expr()? {
        Some(expr) => Ok(expr),
        None => Err(ReadError::new(
            ReadErrorKind::EmptyInput,
            SourceSpan::new(0, text.len()),
        )),
    }
}

/// Reads every expression in `text`, skipping whitespace and `;` comments.
pub fn read_all(text: &str) -> Result<Vec<Expr>, ReadError> {
    let mut parser = Parser::new(text);
    let mut exprs = Vec::new();
    while let Some(expr) = parser.next_expr()? {
        exprs.push(expr);
    }
    Ok(exprs)
}
