//! Splitting string templates into normal and query substrings.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplatePart {
    Text(String),
    Query(String),
}

impl fmt::Display for TemplatePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplatePart::Text(t) => f.write_str(t),
            TemplatePart::Query(q) => write!(f, "{{{q}}}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("template {template:?} at offset {offset}: {message}")]
pub struct TemplateError {
    pub template: String,
    pub offset: usize,
    pub message: &'static str,
}

/// Splits a template. The result always starts with a (possibly empty)
/// normal substring; empty normal substrings elsewhere are left out, and the
/// empty template gives a single empty normal substring.
///
/// `\{`, `\}` and `\\` stand for the literal characters. Braces must be
/// balanced and not nested.
pub fn split_template(template: &str) -> Result<Vec<TemplatePart>, TemplateError> {
    let err = |offset, message| TemplateError {
        template: template.to_owned(),
        offset,
        message,
    };
    let mut parts = Vec::new();
    let mut text = String::new();
    let mut query: Option<String> = None;
    let mut chars = template.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let buf = query.as_mut().unwrap_or(&mut text);
        match c {
            '\\' => match chars.peek() {
                Some(&(_, e @ ('{' | '}' | '\\'))) => {
                    buf.push(e);
                    chars.next();
                }
                _ => buf.push('\\'),
            },
            '{' => {
                if query.is_some() {
                    return Err(err(i, "nested '{'"));
                }
                if !text.is_empty() || parts.is_empty() {
                    parts.push(TemplatePart::Text(std::mem::take(&mut text)));
                }
                query = Some(String::new());
            }
            '}' => match query.take() {
                Some(q) => parts.push(TemplatePart::Query(q)),
                None => return Err(err(i, "'}' without matching '{'")),
            },
            c => buf.push(c),
        }
    }
    if query.is_some() {
        return Err(err(template.len(), "unterminated '{'"));
    }
    if !text.is_empty() || parts.is_empty() {
        parts.push(TemplatePart::Text(text));
    }
    Ok(parts)
}
