//! Plain portable-bitmap (P1) codec for [`BitmapMessage`].
//!
//! Pixels store the logic bit directly: `1` is a white pixel carrying a
//! logic 1, `0` a black pixel carrying a logic 0. Encoded lines stay
//! within 70 characters. Only the plain text `P1` variant is handled;
//! `#` comments are allowed anywhere outside the magic number.

use thiserror::Error;

use crate::message::BitmapMessage;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PbmError {
    #[error("bad magic {found:?} at byte {at}; expected \"P1\"")]
    BadMagic { found: String, at: usize },
    #[error("unsupported portable-bitmap variant {magic:?}; only plain P1 is handled")]
    UnsupportedFormat { magic: String },
    #[error("missing {what} at byte {at}")]
    MissingHeaderField { what: &'static str, at: usize },
    #[error("invalid {what} {token:?} at byte {at}")]
    InvalidHeaderField {
        what: &'static str,
        token: String,
        at: usize,
    },
    #[error("zero image dimension at byte {at}")]
    ZeroDimension { at: usize },
    #[error("image dimensions {width} x {height} overflow the pixel count")]
    DimensionOverflow { width: usize, height: usize },
    #[error("invalid pixel character {found:?} at byte {at}")]
    InvalidPixel { found: char, at: usize },
    #[error("truncated pixel data at byte {at}: expected {expected} bits, found {got}")]
    TruncatedData {
        expected: usize,
        got: usize,
        at: usize,
    },
    #[error("trailing data at byte {at} after {expected} pixel bits")]
    TrailingData { expected: usize, at: usize },
}

const MAX_LINE: usize = 70;

/// Encode as plain P1 text, one `0`/`1` token per pixel, one image row
/// per line, wrapping rows longer than the 70-character limit.
pub fn encode(msg: &BitmapMessage) -> String {
    let mut out = String::with_capacity(msg.width() * msg.height() * 2 + 16);
    out.push_str("P1\n");
    out.push_str(&format!("{} {}\n", msg.width(), msg.height()));
    let mut line = String::with_capacity(MAX_LINE + 1);
    for y in 0..msg.height() {
        for x in 0..msg.width() {
            let token = if msg.get(x, y) { '1' } else { '0' };
            if line.is_empty() {
                line.push(token);
            } else if line.len() + 2 <= MAX_LINE {
                line.push(' ');
                line.push(token);
            } else {
                out.push_str(&line);
                out.push('\n');
                line.clear();
                line.push(token);
            }
        }
        out.push_str(&line);
        out.push('\n');
        line.clear();
    }
    out
}

struct Scanner<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    /// Skip whitespace and `#` comments; returns the next token offset.
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0b | 0x0c => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                _ => return,
            }
        }
    }

    fn next_token(&mut self) -> Option<(usize, &'a str)> {
        self.skip_separators();
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.bytes.len()
            && !self.bytes[self.pos].is_ascii_whitespace()
            && self.bytes[self.pos] != b'#'
        {
            self.pos += 1;
        }
        Some((
            start,
            std::str::from_utf8(&self.bytes[start..self.pos]).unwrap_or(""),
        ))
    }

    fn dimension(&mut self, what: &'static str) -> Result<(usize, usize), PbmError> {
        let (at, token) = self
            .next_token()
            .ok_or(PbmError::MissingHeaderField { what, at: self.pos })?;
        let value = token
            .parse::<usize>()
            .map_err(|_| PbmError::InvalidHeaderField {
                what,
                token: token.to_string(),
                at,
            })?;
        if value == 0 {
            return Err(PbmError::ZeroDimension { at });
        }
        Ok((at, value))
    }
}

/// Decode plain P1 text into a bitmap.
pub fn decode(text: &str) -> Result<BitmapMessage, PbmError> {
    let mut scanner = Scanner::new(text);
    let (at, magic) = scanner.next_token().ok_or(PbmError::MissingHeaderField {
        what: "magic number",
        at: 0,
    })?;
    if magic != "P1" {
        if magic.len() == 2 && magic.starts_with('P') && magic.as_bytes()[1].is_ascii_digit() {
            return Err(PbmError::UnsupportedFormat {
                magic: magic.to_string(),
            });
        }
        return Err(PbmError::BadMagic {
            found: magic.chars().take(8).collect(),
            at,
        });
    }

    let (_, width) = scanner.dimension("width")?;
    let (_, height) = scanner.dimension("height")?;
    let expected = width
        .checked_mul(height)
        .ok_or(PbmError::DimensionOverflow { width, height })?;

    let mut bits = Vec::with_capacity(expected);
    while bits.len() < expected {
        scanner.skip_separators();
        if scanner.pos >= scanner.bytes.len() {
            return Err(PbmError::TruncatedData {
                expected,
                got: bits.len(),
                at: scanner.pos,
            });
        }
        let at = scanner.pos;
        match scanner.bytes[at] {
            b'0' => bits.push(false),
            b'1' => bits.push(true),
            other => {
                return Err(PbmError::InvalidPixel {
                    found: other as char,
                    at,
                })
            }
        }
        scanner.pos += 1;
    }
    scanner.skip_separators();
    if scanner.pos < scanner.bytes.len() {
        return Err(PbmError::TrailingData {
            expected,
            at: scanner.pos,
        });
    }

    Ok(BitmapMessage::new(width, height, bits).expect("decoded bit count matches dimensions"))
}
