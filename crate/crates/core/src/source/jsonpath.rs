//! The JSONPath subset used by JSON sources: `$`, `.name`, `['name']`,
//! `[i]`, `[*]` (also `.*`) and `..name`. No filters, slices or unions.

use std::fmt;

use serde_json::Value as Json;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid JSONPath {path:?} at offset {offset}: {message}")]
pub struct JsonPathError {
    pub path: String,
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Child(String),
    Index(usize),
    Wildcard,
    Descendant(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonPath {
    rooted: bool,
    segments: Vec<Segment>,
}

impl JsonPath {
    /// Parses an absolute (`$`-prefixed) or relative path. A relative path
    /// may begin with a bare member name, e.g. `name.first` or `xs[*]`.
    pub fn parse(text: &str) -> Result<Self, JsonPathError> {
        Parser { text, pos: 0 }.parse()
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Matches of the path starting from `start`, in document order.
    pub fn select<'a>(&self, start: &'a Json) -> Vec<&'a Json> {
        let mut current = vec![start];
        for segment in &self.segments {
            let mut next = Vec::new();
            for node in current {
                apply(segment, node, &mut next);
            }
            current = next;
        }
        current
    }
}

fn apply<'a>(segment: &Segment, node: &'a Json, out: &mut Vec<&'a Json>) {
    match segment {
        Segment::Child(name) => {
            if let Some(v) = node.as_object().and_then(|o| o.get(name)) {
                out.push(v);
            }
        }
        Segment::Index(i) => {
            if let Some(v) = node.as_array().and_then(|a| a.get(*i)) {
                out.push(v);
            }
        }
        Segment::Wildcard => match node {
            Json::Object(o) => out.extend(o.values()),
            Json::Array(a) => out.extend(a.iter()),
            _ => {}
        },
        Segment::Descendant(name) => {
            if let Some(v) = node.as_object().and_then(|o| o.get(name)) {
                out.push(v);
            }
            match node {
                Json::Object(o) => o.values().for_each(|c| apply(segment, c, out)),
                Json::Array(a) => a.iter().for_each(|c| apply(segment, c, out)),
                _ => {}
            }
        }
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rooted {
            f.write_str("$")?;
        }
        for (i, s) in self.segments.iter().enumerate() {
            match s {
                Segment::Child(name) if i == 0 && !self.rooted && is_bare(name) => {
                    f.write_str(name)?
                }
                Segment::Child(name) => write!(f, "['{}']", name.replace('\\', "\\\\").replace('\'', "\\'"))?,
                Segment::Index(n) => write!(f, "[{n}]")?,
                Segment::Wildcard => f.write_str("[*]")?,
                Segment::Descendant(name) => write!(f, "..{name}")?,
            }
        }
        Ok(())
    }
}

fn is_bare(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with(['$', '*'])
        && !name.contains(['.', '[', '(', ')', '?', '@', ']', '\'', '"'])
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> JsonPathError {
        JsonPathError {
            path: self.text.to_owned(),
            offset: self.pos,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn eat(&mut self, prefix: &str) -> bool {
        if self.text[self.pos..].starts_with(prefix) {
            self.pos += prefix.len();
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<JsonPath, JsonPathError> {
        let rooted = self.eat("$");
        let mut segments = Vec::new();
        if !rooted && !self.text.is_empty() && !matches!(self.peek(), Some('[')) {
            segments.push(self.bare_member()?);
        }
        while self.pos < self.text.len() {
            if self.eat("..") {
                if self.eat("*") {
                    return Err(self.error("recursive wildcard is not supported"));
                }
                match self.name()? {
                    Segment::Child(name) => segments.push(Segment::Descendant(name)),
                    _ => unreachable!(),
                }
            } else if self.eat(".") {
                if self.eat("*") {
                    segments.push(Segment::Wildcard);
                } else {
                    segments.push(self.name()?);
                }
            } else if self.eat("[") {
                segments.push(self.bracket()?);
            } else {
                return Err(self.error("expected '.', '..' or '['"));
            }
        }
        Ok(JsonPath { rooted, segments })
    }

    fn bare_member(&mut self) -> Result<Segment, JsonPathError> {
        if self.peek() == Some('.') {
            return Err(self.error("relative path may not start with '.'"));
        }
        if self.eat("*") {
            return Ok(Segment::Wildcard);
        }
        self.name()
    }

    fn name(&mut self) -> Result<Segment, JsonPathError> {
        let rest = &self.text[self.pos..];
        let len = rest.find(['.', '[']).unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected member name"));
        }
        let name = &rest[..len];
        if name.contains(['(', ')', '?', '@', ']', '\'', '"']) {
            return Err(self.error(format!("unsupported characters in member name {name:?}")));
        }
        self.pos += len;
        Ok(Segment::Child(name.to_owned()))
    }

    fn bracket(&mut self) -> Result<Segment, JsonPathError> {
        let segment = match self.peek() {
            Some('*') => {
                self.pos += 1;
                Segment::Wildcard
            }
            Some(q @ ('\'' | '"')) => {
                self.pos += 1;
                let mut name = String::new();
                loop {
                    match self.peek() {
                        None => return Err(self.error("unterminated quoted name")),
                        Some('\\') => {
                            self.pos += 1;
                            match self.peek() {
                                Some(c) => {
                                    name.push(c);
                                    self.pos += c.len_utf8();
                                }
                                None => return Err(self.error("dangling escape")),
                            }
                        }
                        Some(c) if c == q => {
                            self.pos += 1;
                            break;
                        }
                        Some(c) => {
                            name.push(c);
                            self.pos += c.len_utf8();
                        }
                    }
                }
                Segment::Child(name)
            }
            Some(c) if c.is_ascii_digit() => {
                let rest = &self.text[self.pos..];
                let len = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
                let index = rest[..len]
                    .parse()
                    .map_err(|_| self.error("array index out of range"))?;
                self.pos += len;
                Segment::Index(index)
            }
            _ => {
                return Err(self.error(
                    "unsupported selector (filters, slices, unions and negative indices are not supported)",
                ))
            }
        };
        if !self.eat("]") {
            return Err(self.error("expected ']'"));
        }
        Ok(segment)
    }
}
