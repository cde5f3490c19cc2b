//! Lexical tokenizer for Python source.
//!
//! Produces the logical token stream the interpreter would see, minus the
//! tokens that carry no content of their own: comments, non-logical line
//! breaks, dedents and the end marker. `NEWLINE` is emitted only for an
//! actual line-break character that ends a logical line, and `INDENT` for
//! every indentation increase.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Name,
    Keyword,
    Number,
    String,
    Op,
    Newline,
    Indent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte range into the tokenized source.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        &source[self.start..self.end]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tokenize error at byte {offset}: {message}")]
pub struct TokenizeError {
    pub offset: usize,
    pub message: String,
}

impl TokenizeError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest first so that a simple prefix scan yields maximal munch.
const OPERATORS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "!=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ";", ".", "=",
];

const TAB_SIZE: usize = 8;

/// Tokenize `source`. Deterministic; never panics on arbitrary input.
pub fn tokenize(source: &str) -> Result<Vec<Token>, TokenizeError> {
    Lexer::new(source).run()
}

/// Number of lexical tokens in `source` (see module docs for what counts).
pub fn count_tokens(source: &str) -> Result<usize, TokenizeError> {
    tokenize(source).map(|t| t.len())
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    indents: Vec<usize>,
    brackets: Vec<(u8, usize)>,
    tokens: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            indents: vec![0],
            brackets: Vec::new(),
            tokens: Vec::new(),
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize, end: usize) {
        self.tokens.push(Token { kind, start, end });
    }

    fn run(mut self) -> Result<Vec<Token>, TokenizeError> {
        while self.pos < self.bytes.len() {
            self.logical_line()?;
        }
        if let Some(&(_, offset)) = self.brackets.last() {
            return Err(TokenizeError::new(offset, "unclosed bracket at end of input"));
        }
        Ok(self.tokens)
    }

    /// Measure indentation at the start of a physical line. Returns `None`
    /// when the line is blank or comment-only (and consumes it).
    fn line_indent(&mut self) -> Option<usize> {
        let mut col = 0;
        while let Some(&b) = self.bytes.get(self.pos) {
            match b {
                b' ' => col += 1,
                b'\t' => col = (col / TAB_SIZE + 1) * TAB_SIZE,
                b'\x0c' => col = 0,
                _ => break,
            }
            self.pos += 1;
        }
        match self.bytes.get(self.pos) {
            None => None,
            Some(b'#') => {
                self.skip_comment();
                self.eat_line_break();
                None
            }
            Some(b'\n') | Some(b'\r') => {
                self.eat_line_break();
                None
            }
            Some(_) => Some(col),
        }
    }

    fn logical_line(&mut self) -> Result<(), TokenizeError> {
        let line_start = self.pos;
        let Some(col) = self.line_indent() else {
            return Ok(());
        };
        let top = *self.indents.last().expect("indent stack never empty");
        if col > top {
            self.indents.push(col);
            self.push(TokenKind::Indent, line_start, self.pos);
        } else if col < top {
            while *self.indents.last().unwrap() > col {
                self.indents.pop();
            }
            if *self.indents.last().unwrap() != col {
                return Err(TokenizeError::new(
                    self.pos,
                    "unindent does not match any outer indentation level",
                ));
            }
        }

        loop {
            let Some(&b) = self.bytes.get(self.pos) else {
                return Ok(());
            };
            match b {
                b' ' | b'\t' | b'\x0c' => self.pos += 1,
                b'#' => self.skip_comment(),
                b'\n' | b'\r' => {
                    let start = self.pos;
                    self.eat_line_break();
                    if self.brackets.is_empty() {
                        self.push(TokenKind::Newline, start, self.pos);
                        return Ok(());
                    }
                }
                b'\\' => {
                    if self.is_continuation(self.pos) {
                        self.pos += 1;
                        self.eat_line_break();
                    } else {
                        return Err(TokenizeError::new(
                            self.pos,
                            "unexpected character after line continuation",
                        ));
                    }
                }
                _ => self.token()?,
            }
        }
    }

    fn is_continuation(&self, at: usize) -> bool {
        matches!(self.bytes.get(at + 1), Some(b'\n') | Some(b'\r') | None)
    }

    fn skip_comment(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'\n' || b == b'\r' {
                break;
            }
            self.pos += 1;
        }
    }

    fn eat_line_break(&mut self) {
        match self.bytes.get(self.pos) {
            Some(b'\r') => {
                self.pos += 1;
                if self.bytes.get(self.pos) == Some(&b'\n') {
                    self.pos += 1;
                }
            }
            Some(b'\n') => self.pos += 1,
            _ => {}
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn token(&mut self) -> Result<(), TokenizeError> {
        let start = self.pos;
        let c = self.peek_char().expect("caller checked for input");

        if c.is_ascii_digit()
            || (c == '.' && self.bytes.get(start + 1).is_some_and(u8::is_ascii_digit))
        {
            self.number()?;
            self.push(TokenKind::Number, start, self.pos);
            return Ok(());
        }

        if is_ident_start(c) {
            let word_end = self.scan_ident(start);
            let word = &self.src[start..word_end];
            if let Some(&q) = self.bytes.get(word_end) {
                if (q == b'"' || q == b'\'') && is_string_prefix(word) {
                    self.pos = word_end;
                    self.string(start)?;
                    self.push(TokenKind::String, start, self.pos);
                    return Ok(());
                }
            }
            self.pos = word_end;
            let kind = if is_keyword(word) {
                TokenKind::Keyword
            } else {
                TokenKind::Name
            };
            self.push(kind, start, word_end);
            return Ok(());
        }

        if c == '"' || c == '\'' {
            self.string(start)?;
            self.push(TokenKind::String, start, self.pos);
            return Ok(());
        }

        let rest = &self.src[start..];
        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            self.pos += op.len();
            self.track_bracket(op.as_bytes()[0], start)?;
            self.push(TokenKind::Op, start, self.pos);
            return Ok(());
        }

        Err(TokenizeError::new(start, format!("invalid character {c:?}")))
    }

    fn track_bracket(&mut self, b: u8, offset: usize) -> Result<(), TokenizeError> {
        match b {
            b'(' | b'[' | b'{' => self.brackets.push((b, offset)),
            b')' | b']' | b'}' => {
                let expected = match b {
                    b')' => b'(',
                    b']' => b'[',
                    _ => b'{',
                };
                match self.brackets.pop() {
                    Some((open, _)) if open == expected => {}
                    _ => {
                        return Err(TokenizeError::new(
                            offset,
                            format!("unmatched '{}'", b as char),
                        ))
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn scan_ident(&self, start: usize) -> usize {
        let mut end = start;
        for (i, ch) in self.src[start..].char_indices() {
            if i == 0 || is_ident_continue(ch) {
                end = start + i + ch.len_utf8();
            } else {
                break;
            }
        }
        end
    }

    fn number(&mut self) -> Result<(), TokenizeError> {
        let start = self.pos;
        let b = self.bytes;
        let digits = |pos: &mut usize, pred: fn(u8) -> bool| {
            while let Some(&c) = b.get(*pos) {
                if pred(c) || c == b'_' {
                    *pos += 1;
                } else {
                    break;
                }
            }
        };

        if b[start] == b'0' && matches!(b.get(start + 1), Some(b'x' | b'X' | b'o' | b'O' | b'b' | b'B')) {
            let radix = b[start + 1].to_ascii_lowercase();
            self.pos += 2;
            let before = self.pos;
            match radix {
                b'x' => digits(&mut self.pos, |c| c.is_ascii_hexdigit()),
                b'o' => digits(&mut self.pos, |c| (b'0'..=b'7').contains(&c)),
                _ => digits(&mut self.pos, |c| c == b'0' || c == b'1'),
            }
            if self.pos == before {
                return Err(TokenizeError::new(start, "invalid numeric literal"));
            }
        } else {
            digits(&mut self.pos, |c| c.is_ascii_digit());
            if b.get(self.pos) == Some(&b'.') {
                self.pos += 1;
                digits(&mut self.pos, |c| c.is_ascii_digit());
            }
            if matches!(b.get(self.pos), Some(b'e' | b'E')) {
                let mut p = self.pos + 1;
                if matches!(b.get(p), Some(b'+' | b'-')) {
                    p += 1;
                }
                if b.get(p).is_some_and(u8::is_ascii_digit) {
                    self.pos = p;
                    digits(&mut self.pos, |c| c.is_ascii_digit());
                }
            }
            if matches!(b.get(self.pos), Some(b'j' | b'J')) {
                self.pos += 1;
            }
        }
        if self.peek_char().is_some_and(is_ident_continue) {
            return Err(TokenizeError::new(start, "invalid numeric literal"));
        }
        Ok(())
    }

    /// Scan a string literal whose prefix (if any) starts at `start` and whose
    /// opening quote is at `self.pos`.
    fn string(&mut self, start: usize) -> Result<(), TokenizeError> {
        let quote = self.bytes[self.pos];
        let triple = self.bytes.get(self.pos + 1) == Some(&quote)
            && self.bytes.get(self.pos + 2) == Some(&quote);
        self.pos += if triple { 3 } else { 1 };

        loop {
            let Some(&b) = self.bytes.get(self.pos) else {
                return Err(TokenizeError::new(start, "unterminated string literal"));
            };
            match b {
                b'\\' => {
                    // A backslash escapes the next character, raw or not.
                    self.pos += 1;
                    if self.pos < self.bytes.len() {
                        self.pos += self.peek_char().map_or(1, char::len_utf8);
                    }
                }
                b'\n' | b'\r' if !triple => {
                    return Err(TokenizeError::new(start, "unterminated string literal"));
                }
                _ if b == quote => {
                    if !triple {
                        self.pos += 1;
                        return Ok(());
                    }
                    if self.bytes.get(self.pos + 1) == Some(&quote)
                        && self.bytes.get(self.pos + 2) == Some(&quote)
                    {
                        self.pos += 3;
                        return Ok(());
                    }
                    self.pos += 1;
                }
                _ => self.pos += self.peek_char().map_or(1, char::len_utf8),
            }
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn is_string_prefix(word: &str) -> bool {
    matches!(
        word.to_ascii_lowercase().as_str(),
        "r" | "u" | "b" | "br" | "rb" | "f" | "fr" | "rf"
    )
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TokenKind::Name => "NAME",
            TokenKind::Keyword => "KEYWORD",
            TokenKind::Number => "NUMBER",
            TokenKind::String => "STRING",
            TokenKind::Op => "OP",
            TokenKind::Newline => "NEWLINE",
            TokenKind::Indent => "INDENT",
        };
        f.write_str(name)
    }
}
