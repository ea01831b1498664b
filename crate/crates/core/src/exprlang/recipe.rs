//! Curated derived-feature recipes.
//!
//! File format, one entry per line:
//!
//! ```text
//! # comment
//! water_cement := water / cement   # lower w/c ratio means stronger concrete
//! "log age" := log(age)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Entry names follow
//! the same quoting rule as feature names in expressions.

use std::collections::HashSet;
use std::fmt;

use super::{is_plain_identifier, parse, write_identifier, ExprTree, ParseError};

#[derive(Debug, Clone, PartialEq)]
pub struct RecipeEntry {
    pub name: String,
    pub expression: ExprTree,
    /// Free text quoting the rationale the entry was transcribed from.
    pub provenance: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureRecipe {
    pub entries: Vec<RecipeEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RecipeError {
    Syntax { line: usize, message: String },
    Expression { line: usize, source: ParseError },
    DuplicateName { name: String },
    UnknownFeature { entry: String, feature: String },
    NameCollision { name: String },
}

impl fmt::Display for RecipeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecipeError::Syntax { line, message } => write!(f, "line {line}: {message}"),
            RecipeError::Expression { line, source } => write!(f, "line {line}: {source}"),
            RecipeError::DuplicateName { name } => write!(f, "duplicate recipe entry '{name}'"),
            RecipeError::UnknownFeature { entry, feature } => {
                write!(f, "recipe entry '{entry}' references unknown feature '{feature}'")
            }
            RecipeError::NameCollision { name } => {
                write!(f, "recipe entry '{name}' collides with an existing feature")
            }
        }
    }
}

impl std::error::Error for RecipeError {}

impl FeatureRecipe {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Parses recipe text. Only syntax is checked here; see [`FeatureRecipe::validate`].
    pub fn parse(text: &str) -> Result<FeatureRecipe, RecipeError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            entries.push(parse_line(trimmed, line)?);
        }
        Ok(FeatureRecipe { entries })
    }

    /// Checks entry names are unique and distinct from `schema`, and that
    /// every expression references only `schema` features. Returns every
    /// problem found, in file order.
    pub fn validate<S: AsRef<str>>(&self, schema: &[S]) -> Result<(), Vec<RecipeError>> {
        let known: HashSet<&str> = schema.iter().map(|s| s.as_ref()).collect();
        let mut seen = HashSet::new();
        let mut errors = Vec::new();
        for e in &self.entries {
            if !seen.insert(e.name.as_str()) {
                errors.push(RecipeError::DuplicateName { name: e.name.clone() });
            }
            if known.contains(e.name.as_str()) {
                errors.push(RecipeError::NameCollision { name: e.name.clone() });
            }
            let mut reported = HashSet::new();
            for feat in e.expression.features() {
                if !known.contains(feat) && reported.insert(feat) {
                    errors.push(RecipeError::UnknownFeature { entry: e.name.clone(), feature: feat.to_string() });
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(errors)
        }
    }

    /// Serializes back to the line format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            write_identifier(&e.name, &mut out);
            out.push_str(" := ");
            out.push_str(&e.expression.to_text());
            if !e.provenance.is_empty() {
                out.push_str("  # ");
                out.push_str(&e.provenance);
            }
            out.push('\n');
        }
        out
    }
}

/// Byte offset of `pat` in `s` outside double-quoted spans.
fn find_unquoted(s: &str, pat: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let mut quoted = false;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if quoted => i += 1,
            b'"' => quoted = !quoted,
            _ if !quoted && s[i..].starts_with(pat) => return Some(i),
            _ => {}
        }
        i += 1;
    }
    None
}

fn parse_name(raw: &str, line: usize) -> Result<String, RecipeError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(RecipeError::Syntax { line, message: "missing entry name before ':='".into() });
    }
    if is_plain_identifier(raw) {
        return Ok(raw.to_string());
    }
    // Quoted names share the expression tokenizer's rules.
    match parse(raw) {
        Ok(ExprTree::Feature(name)) if raw.starts_with('"') => Ok(name.to_string()),
        _ => Err(RecipeError::Syntax { line, message: format!("invalid entry name {raw}") }),
    }
}

fn parse_line(text: &str, line: usize) -> Result<RecipeEntry, RecipeError> {
    let assign = find_unquoted(text, ":=")
        .ok_or_else(|| RecipeError::Syntax { line, message: "expected 'name := expression'".into() })?;
    let name = parse_name(&text[..assign], line)?;
    let rest = &text[assign + 2..];
    let (expr_text, provenance) = match find_unquoted(rest, "#") {
        Some(h) => (&rest[..h], rest[h + 1..].trim()),
        None => (rest, ""),
    };
    let expression = parse(expr_text).map_err(|source| RecipeError::Expression { line, source })?;
    Ok(RecipeEntry { name, expression, provenance: provenance.to_string() })
}
