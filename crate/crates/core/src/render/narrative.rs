//! English narrative from per-type sentence patterns.
//!
//! A pattern is text with `{name}` placeholders. `{id}` and `{type}` give
//! the instance id and type name; any other name is an attribute of the
//! instance or, failing that, a zero-argument function. `{{` and `}}`
//! are literal braces.

use super::RenderError;
use crate::model::{ConceptInstance, Model, ModelError, Value};

/// One sentence per instance in registration order. Instances whose
/// pattern is empty contribute nothing.
pub fn narrative_sentences(model: &Model) -> Result<Vec<String>, RenderError> {
    let mut out = Vec::new();
    for inst in model.instances() {
        let Some(pattern) = model.effective_narrative(inst.type_name())? else {
            return Err(RenderError::MissingNarrativeTemplate {
                instance: inst.id().to_string(),
                type_name: inst.type_name().to_string(),
            });
        };
        if pattern.is_empty() {
            continue;
        }
        out.push(fill(model, inst, pattern)?);
    }
    Ok(out)
}

/// The sentences joined by newlines.
pub fn narrative(model: &Model) -> Result<String, RenderError> {
    Ok(narrative_sentences(model)?.join("\n"))
}

fn fill(model: &Model, inst: &ConceptInstance, pattern: &str) -> Result<String, ModelError> {
    let mut out = String::with_capacity(pattern.len());
    let mut rest = pattern;
    while let Some(pos) = rest.find(['{', '}']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            out.push_str(&tail[..1]);
            rest = &tail[2..];
            continue;
        }
        if tail.starts_with('}') {
            return Err(ModelError::Failed(format!("unmatched `}}` in pattern `{pattern}`")));
        }
        let end = tail
            .find('}')
            .ok_or_else(|| ModelError::Failed(format!("unclosed `{{` in pattern `{pattern}`")))?;
        out.push_str(&placeholder(model, inst, &tail[1..end])?);
        rest = &tail[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn placeholder(model: &Model, inst: &ConceptInstance, name: &str) -> Result<String, ModelError> {
    let name = name.trim();
    let value = match name {
        "id" => return Ok(inst.id().to_string()),
        "type" => return Ok(inst.type_name().to_string()),
        _ => match model.get_attribute(inst, name) {
            Ok(v) => v,
            Err(ModelError::UnknownAttribute { .. }) => model.invoke(inst, name, &[])?,
            Err(e) => return Err(e),
        },
    };
    Ok(match value {
        Value::Str(s) => s,
        other => other.to_string(),
    })
}
