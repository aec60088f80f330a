//! Visualization templates: property maps whose values are literals or
//! pure functions of the object being drawn (and, for animation, time).
//!
//! Applying a template walks it recursively. Lists and nested templates
//! are rebuilt element by element; a one-argument function is replaced by
//! its value on the object, a two-argument function by its value on the
//! object at the given time. Everything else is copied.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::model::{ConceptInstance, ConceptType, Model, ModelError, Value};

/// Property keys understood by the renderer. Other keys pass through.
pub mod keys {
    pub const TEXT: &str = "text";
    /// Shape kind: `Rectangle`, `Square`, `Circle`.
    pub const NAME: &str = "name";
    pub const CORNER_RADIUS: &str = "corner_radius";
    pub const GRADIENT_COLOR: &str = "gradient_color";
    pub const ORIGIN: &str = "origin";
    pub const POINT_LIST: &str = "point_list";
    /// Animation shape to create: `shape`, `circle`, `line`, `rectangle`.
    pub const NEW: &str = "new";
    pub const STROKE: &str = "stroke";
    pub const FILL: &str = "fill";
    pub const FONT_SIZE: &str = "font_size";
    /// Circle radius for animation shapes, in world units.
    pub const RADIUS: &str = "radius";
    /// `[width, height]` for animation rectangles, in world units.
    pub const SIZE: &str = "size";
    /// Attribute names whose structure an instance diagram should not draw.
    pub const HIDE: &str = "hide";
}

/// The object a template is applied to.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Instance(&'a ConceptInstance),
    Type(&'a ConceptType),
}

impl Target<'_> {
    pub fn instance(&self) -> Option<&ConceptInstance> {
        match self {
            Target::Instance(i) => Some(i),
            Target::Type(_) => None,
        }
    }

    pub fn concept_type(&self) -> Option<&ConceptType> {
        match self {
            Target::Type(t) => Some(t),
            Target::Instance(_) => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Target::Instance(i) => i.id().as_str(),
            Target::Type(t) => t.name(),
        }
    }
}

pub type Fn1 = Arc<dyn Fn(&Model, Target<'_>) -> Result<Value, ModelError> + Send + Sync>;
pub type Fn2 = Arc<dyn Fn(&Model, Target<'_>, f64) -> Result<Value, ModelError> + Send + Sync>;

#[derive(Clone)]
pub enum TemplateValue {
    Literal(Value),
    List(Vec<TemplateValue>),
    Nested(Template),
    Fn1(Fn1),
    Fn2(Fn2),
}

impl fmt::Debug for TemplateValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateValue::Literal(v) => write!(f, "Literal({v:?})"),
            TemplateValue::List(vs) => f.debug_list().entries(vs).finish(),
            TemplateValue::Nested(t) => write!(f, "Nested({t:?})"),
            TemplateValue::Fn1(_) => f.write_str("Fn1(..)"),
            TemplateValue::Fn2(_) => f.write_str("Fn2(..)"),
        }
    }
}

impl TemplateValue {
    pub fn text(s: &str) -> TemplateValue {
        TemplateValue::Literal(Value::str(s))
    }

    pub fn number(x: f64) -> TemplateValue {
        TemplateValue::Literal(Value::Float(x))
    }

    pub fn fn1<F>(f: F) -> TemplateValue
    where
        F: Fn(&Model, Target<'_>) -> Result<Value, ModelError> + Send + Sync + 'static,
    {
        TemplateValue::Fn1(Arc::new(f))
    }

    pub fn fn2<F>(f: F) -> TemplateValue
    where
        F: Fn(&Model, Target<'_>, f64) -> Result<Value, ModelError> + Send + Sync + 'static,
    {
        TemplateValue::Fn2(Arc::new(f))
    }

    fn needs_time(&self) -> bool {
        match self {
            TemplateValue::Fn2(_) => true,
            TemplateValue::List(vs) => vs.iter().any(TemplateValue::needs_time),
            TemplateValue::Nested(t) => t.needs_time(),
            _ => false,
        }
    }
}

impl From<Value> for TemplateValue {
    fn from(v: Value) -> Self {
        TemplateValue::Literal(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("template entry `{path}` depends on time but no time was given")]
    MissingTime { path: String },
    #[error("template entry `{path}` failed: {source}")]
    FnFailure { path: String, source: ModelError },
}

#[derive(Debug, Clone, Default)]
pub struct Template {
    entries: BTreeMap<String, TemplateValue>,
}

impl Template {
    pub fn new() -> Template {
        Template::default()
    }

    pub fn with(mut self, key: &str, value: TemplateValue) -> Template {
        self.entries.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<&TemplateValue> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn needs_time(&self) -> bool {
        self.entries.values().any(TemplateValue::needs_time)
    }

    /// Key union with `overlay` winning on conflicts. Nested templates are
    /// replaced whole, not merged.
    pub fn merge(&self, overlay: &Template) -> Template {
        let mut entries = self.entries.clone();
        for (k, v) in &overlay.entries {
            entries.insert(k.clone(), v.clone());
        }
        Template { entries }
    }

    /// Resolves every function in the template against `target`.
    pub fn apply(&self, model: &Model, target: Target<'_>, time: Option<f64>) -> Result<ResolvedProps, TemplateError> {
        apply_map(self, model, target, time, "")
    }
}

/// Free-function form of [`Template::apply`].
pub fn apply_template(
    t: &Template,
    model: &Model,
    target: Target<'_>,
    time: Option<f64>,
) -> Result<ResolvedProps, TemplateError> {
    t.apply(model, target, time)
}

/// Free-function form of [`Template::merge`].
pub fn merge_templates(base: &Template, overlay: &Template) -> Template {
    base.merge(overlay)
}

fn join(path: &str, seg: &str) -> String {
    if path.is_empty() {
        seg.to_string()
    } else {
        format!("{path}.{seg}")
    }
}

fn apply_map(
    t: &Template,
    model: &Model,
    target: Target<'_>,
    time: Option<f64>,
    path: &str,
) -> Result<ResolvedProps, TemplateError> {
    let mut entries = BTreeMap::new();
    for (k, v) in &t.entries {
        let p = join(path, k);
        entries.insert(k.clone(), apply_value(v, model, target, time, &p)?);
    }
    Ok(ResolvedProps { entries })
}

fn apply_value(
    v: &TemplateValue,
    model: &Model,
    target: Target<'_>,
    time: Option<f64>,
    path: &str,
) -> Result<Resolved, TemplateError> {
    let fail = |source| TemplateError::FnFailure {
        path: path.to_string(),
        source,
    };
    match v {
        TemplateValue::Literal(v) => Ok(Resolved::Value(v.clone())),
        TemplateValue::List(items) => items
            .iter()
            .enumerate()
            .map(|(i, x)| apply_value(x, model, target, time, &format!("{path}[{i}]")))
            .collect::<Result<_, _>>()
            .map(Resolved::List),
        TemplateValue::Nested(t) => apply_map(t, model, target, time, path).map(Resolved::Nested),
        TemplateValue::Fn1(f) => f(model, target).map(Resolved::Value).map_err(fail),
        TemplateValue::Fn2(f) => {
            let t = time.ok_or_else(|| TemplateError::MissingTime { path: path.to_string() })?;
            f(model, target, t).map(Resolved::Value).map_err(fail)
        }
    }
}

/// A template value with every function resolved.
#[derive(Debug, Clone, PartialEq)]
pub enum Resolved {
    Value(Value),
    List(Vec<Resolved>),
    Nested(ResolvedProps),
}

impl Resolved {
    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Resolved::Value(v) => Some(v),
            _ => None,
        }
    }

    /// Flattens into a plain value (nested maps are not representable).
    pub fn to_value(&self) -> Option<Value> {
        match self {
            Resolved::Value(v) => Some(v.clone()),
            Resolved::List(items) => items
                .iter()
                .map(Resolved::to_value)
                .collect::<Option<_>>()
                .map(Value::List),
            Resolved::Nested(_) => None,
        }
    }
}

/// Output of applying a template: same keys, no functions.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResolvedProps {
    entries: BTreeMap<String, Resolved>,
}

impl ResolvedProps {
    pub fn get(&self, key: &str) -> Option<&Resolved> {
        self.entries.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value(&self, key: &str) -> Option<Value> {
        self.get(key).and_then(Resolved::to_value)
    }

    pub fn text(&self, key: &str) -> Option<String> {
        match self.value(key)? {
            Value::Str(s) => Some(s),
            other => Some(other.to_string()),
        }
    }

    pub fn number(&self, key: &str) -> Option<f64> {
        self.value(key)?.as_f64()
    }

    /// A numeric point: vector, list, or tuple of numbers.
    pub fn point(&self, key: &str) -> Option<Vec<f64>> {
        self.value(key)?.as_vector()
    }

    /// A list of numeric points.
    pub fn points(&self, key: &str) -> Option<Vec<Vec<f64>>> {
        match self.value(key)? {
            Value::List(items) => items.iter().map(Value::as_vector).collect(),
            _ => None,
        }
    }

    /// Text lines: a string split on newlines, or a list of values.
    pub fn lines(&self, key: &str) -> Option<Vec<String>> {
        match self.value(key)? {
            Value::Str(s) => Some(s.lines().map(str::to_string).collect()),
            Value::List(items) => Some(
                items
                    .iter()
                    .map(|v| match v {
                        Value::Str(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect(),
            ),
            other => Some(vec![other.to_string()]),
        }
    }
}

impl From<&Resolved> for TemplateValue {
    fn from(r: &Resolved) -> Self {
        match r {
            Resolved::Value(v) => TemplateValue::Literal(v.clone()),
            Resolved::List(items) => TemplateValue::List(items.iter().map(Into::into).collect()),
            Resolved::Nested(p) => TemplateValue::Nested(p.into()),
        }
    }
}

impl From<&ResolvedProps> for Template {
    fn from(p: &ResolvedProps) -> Self {
        Template {
            entries: p
                .entries
                .iter()
                .map(|(k, v)| (k.clone(), TemplateValue::from(v)))
                .collect(),
        }
    }
}
