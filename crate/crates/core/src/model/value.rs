use std::fmt;

use crate::expr::Expr;

/// The closed set of attribute kinds a concept type may declare.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Int,
    Float,
    String,
    Bool,
    Vector(usize),
    ListOf(Box<AttributeKind>),
    TupleOf(Vec<AttributeKind>),
    RefTo(String),
    Expr,
    /// No stored value; produced on demand by the named getter.
    Computed {
        result: Box<AttributeKind>,
        getter: String,
    },
}

impl AttributeKind {
    pub fn list_of(k: AttributeKind) -> AttributeKind {
        AttributeKind::ListOf(Box::new(k))
    }

    pub fn tuple_of(ks: impl IntoIterator<Item = AttributeKind>) -> AttributeKind {
        AttributeKind::TupleOf(ks.into_iter().collect())
    }

    pub fn ref_to(name: impl Into<String>) -> AttributeKind {
        AttributeKind::RefTo(name.into())
    }

    pub fn computed(result: AttributeKind, getter: impl Into<String>) -> AttributeKind {
        AttributeKind::Computed {
            result: Box::new(result),
            getter: getter.into(),
        }
    }

    pub fn is_computed(&self) -> bool {
        matches!(self, AttributeKind::Computed { .. })
    }

    /// The kind of value this attribute yields, looking through `Computed`.
    pub fn value_kind(&self) -> &AttributeKind {
        match self {
            AttributeKind::Computed { result, .. } => result.value_kind(),
            k => k,
        }
    }

    /// Concept names referenced anywhere inside this kind.
    pub fn referenced_types(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            AttributeKind::RefTo(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            AttributeKind::ListOf(k) => k.collect_refs(out),
            AttributeKind::TupleOf(ks) => ks.iter().for_each(|k| k.collect_refs(out)),
            AttributeKind::Computed { result, .. } => result.collect_refs(out),
            _ => {}
        }
    }

    /// Whether a value of kind `other` may stand where `self` is declared.
    /// Only numeric widening (Int to Float) is allowed beyond equality.
    pub fn accepts_kind(&self, other: &AttributeKind) -> bool {
        match (self.value_kind(), other.value_kind()) {
            (AttributeKind::Float, AttributeKind::Int) => true,
            (AttributeKind::ListOf(a), AttributeKind::ListOf(b)) => a.accepts_kind(b),
            (AttributeKind::TupleOf(a), AttributeKind::TupleOf(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.accepts_kind(y))
            }
            (a, b) => a == b,
        }
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeKind::Int => f.write_str("Int"),
            AttributeKind::Float => f.write_str("Float"),
            AttributeKind::String => f.write_str("String"),
            AttributeKind::Bool => f.write_str("Bool"),
            AttributeKind::Vector(n) => write!(f, "Vector{n}"),
            AttributeKind::ListOf(k) => write!(f, "List({k})"),
            AttributeKind::TupleOf(ks) => {
                f.write_str("Tuple(")?;
                for (i, k) in ks.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}")?;
                }
                f.write_str(")")
            }
            AttributeKind::RefTo(name) => f.write_str(name),
            AttributeKind::Expr => f.write_str("Expr"),
            AttributeKind::Computed { result, .. } => write!(f, "Property({result})"),
        }
    }
}

/// Identifier of a concept instance, unique within a model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstanceId(pub String);

impl InstanceId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for InstanceId {
    fn from(s: &str) -> Self {
        InstanceId(s.to_string())
    }
}

impl From<String> for InstanceId {
    fn from(s: String) -> Self {
        InstanceId(s)
    }
}

/// A stored or computed attribute value. Equality is structural.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    Vector(Vec<f64>),
    List(Vec<Value>),
    Tuple(Vec<Value>),
    Ref(InstanceId),
    Expr(Expr),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    pub fn reference(id: impl Into<InstanceId>) -> Value {
        Value::Ref(id.into())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Value]> {
        match self {
            Value::Tuple(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_ref_id(&self) -> Option<&InstanceId> {
        match self {
            Value::Ref(id) => Some(id),
            _ => None,
        }
    }

    /// Numeric vector view: `Vector` values, or lists/tuples of numbers.
    pub fn as_vector(&self) -> Option<Vec<f64>> {
        match self {
            Value::Vector(v) => Some(v.clone()),
            Value::List(items) | Value::Tuple(items) => items.iter().map(Value::as_f64).collect(),
            _ => None,
        }
    }

    /// Short description of the value's shape, used in error messages.
    pub fn kind_name(&self) -> String {
        match self {
            Value::Int(_) => "Int".into(),
            Value::Float(_) => "Float".into(),
            Value::Str(_) => "String".into(),
            Value::Bool(_) => "Bool".into(),
            Value::Vector(v) => format!("Vector{}", v.len()),
            Value::List(_) => "List".into(),
            Value::Tuple(v) => format!("Tuple/{}", v.len()),
            Value::Ref(_) => "Ref".into(),
            Value::Expr(_) => "Expr".into(),
        }
    }

    /// Every instance id referenced anywhere inside this value.
    pub fn references(&self) -> Vec<&InstanceId> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a InstanceId>) {
        match self {
            Value::Ref(id) => out.push(id),
            Value::List(vs) | Value::Tuple(vs) => vs.iter().for_each(|v| v.collect_refs(out)),
            _ => {}
        }
    }

    /// Structural equality with relative tolerance on floats.
    pub fn approx_eq(&self, other: &Value, rel: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0);
        match (self, other) {
            (Value::Float(a), Value::Float(b)) => close(*a, *b),
            (Value::Vector(a), Value::Vector(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y)),
            (Value::List(a), Value::List(b)) | (Value::Tuple(a), Value::Tuple(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y, rel))
            }
            (a, b) => a == b,
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, open: &str, items: &[Value], close: &str) -> fmt::Result {
    f.write_str(open)?;
    for (i, v) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str(close)
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{}", format_number(*x)),
            Value::Str(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Vector(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    f.write_str(&format_number(*x))?;
                }
                f.write_str(")")
            }
            Value::List(vs) => write_seq(f, "[", vs, "]"),
            Value::Tuple(vs) => write_seq(f, "(", vs, ")"),
            Value::Ref(id) => write!(f, "{id}"),
            Value::Expr(e) => write!(f, "{e}"),
        }
    }
}

/// Human-facing number formatting: integral values print without a
/// fraction, others with up to 6 significant decimals trimmed.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{}", x as i64);
    }
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" || s == "0" {
        // very small magnitudes
        format!("{x:e}")
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(127.0), "127");
        assert_eq!(format_number(-9.8), "-9.8");
        assert_eq!(format_number(18.015), "18.015");
        assert_eq!(format_number(1.0 / 3.0), "0.333333");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1e-9), "1e-9");
    }

    #[test]
    fn display_of_composites() {
        let v = Value::List(vec![
            Value::Tuple(vec![Value::Int(1), Value::Int(10)]),
            Value::Tuple(vec![Value::Int(2), Value::Int(15)]),
        ]);
        assert_eq!(v.to_string(), "[(1, 10), (2, 15)]");
        assert_eq!(Value::Vector(vec![0.0, -9.8]).to_string(), "(0, -9.8)");
    }

    #[test]
    fn kind_acceptance_widens_ints_only() {
        let lf = AttributeKind::list_of(AttributeKind::Float);
        let li = AttributeKind::list_of(AttributeKind::Int);
        assert!(lf.accepts_kind(&li));
        assert!(!li.accepts_kind(&lf));
        assert!(li.accepts_kind(&AttributeKind::computed(li.clone(), "g")));
    }

    #[test]
    fn kind_display() {
        let k = AttributeKind::list_of(AttributeKind::tuple_of([
            AttributeKind::ref_to("Element"),
            AttributeKind::Int,
        ]));
        assert_eq!(k.to_string(), "List(Tuple(Element, Int))");
        assert_eq!(k.referenced_types(), vec!["Element"]);
    }
}
