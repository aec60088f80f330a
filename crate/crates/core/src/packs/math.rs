//! Function concepts: rule and table functions, inverses, graph
//! transforms, and numeric calculus operators.
//!
//! [`Function`] is the typed form used for evaluation. The concept types
//! registered by [`function_types`] and friends decode their instances
//! into it with [`function_of`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::expr::{Env, Expr};
use crate::model::{
    format_number, AttributeKind, ConceptInstance, ConceptType, DisplayDirective, FunctionDef, Model, ModelError, Value,
};
use crate::numeric::{simpson, SIMPSON_INTERVALS};
use crate::template::{keys, Template, TemplateValue};

/// Relative step for the central difference.
pub const DERIVATIVE_STEP: f64 = 1e-5;
/// Tolerance for successive limit estimates and for the two sides.
pub const LIMIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Function {
    Rule {
        rule: Expr,
        domain: Vec<i64>,
    },
    Table {
        points: Vec<(i64, i64)>,
    },
    /// Flips the `(x, f(x))` pairs of the source over its domain.
    Inverse(Arc<Function>),
    /// `source(x - by)`: positive `by` moves the graph right.
    ShiftX {
        source: Arc<Function>,
        by: f64,
    },
    /// `val` on the closed interval `[start, end]`, the source elsewhere.
    Bump {
        source: Arc<Function>,
        start: f64,
        end: f64,
        val: f64,
    },
    Derivative(Arc<Function>),
    /// `∫ source` from `from` to `x`.
    Integral {
        source: Arc<Function>,
        from: f64,
    },
}

fn not_in_domain(x: f64) -> ModelError {
    ModelError::NotInDomain(format_number(x))
}

impl Function {
    pub fn rule(rule: Expr, domain: Vec<i64>) -> Function {
        Function::Rule { rule, domain }
    }

    pub fn table(points: Vec<(i64, i64)>) -> Function {
        Function::Table { points }
    }

    pub fn inverse(self) -> Function {
        Function::Inverse(Arc::new(self))
    }

    pub fn shift_x(self, by: f64) -> Function {
        Function::ShiftX {
            source: Arc::new(self),
            by,
        }
    }

    /// Fails when `start > end`.
    pub fn bump(self, start: f64, end: f64, val: f64) -> Result<Function, ModelError> {
        if start > end {
            return Err(ModelError::Failed(format!("bump start {start} exceeds end {end}")));
        }
        Ok(Function::Bump {
            source: Arc::new(self),
            start,
            end,
            val,
        })
    }

    pub fn derivative(self) -> Function {
        Function::Derivative(Arc::new(self))
    }

    pub fn integral(self, from: f64) -> Function {
        Function::Integral {
            source: Arc::new(self),
            from,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64, ModelError> {
        match self {
            Function::Rule { rule, .. } => Ok(rule.eval(&Env::x(x))?),
            Function::Table { points } => points
                .iter()
                .find(|(x1, _)| *x1 as f64 == x)
                .map(|(_, y)| *y as f64)
                .ok_or_else(|| not_in_domain(x)),
            Function::Inverse(source) => {
                for x1 in source.domain()? {
                    if source.eval(x1)? == x {
                        return Ok(x1);
                    }
                }
                Err(not_in_domain(x))
            }
            Function::ShiftX { source, by } => source.eval(x - by),
            Function::Bump {
                source,
                start,
                end,
                val,
            } => {
                if *start <= x && x <= *end {
                    Ok(*val)
                } else {
                    source.eval(x)
                }
            }
            Function::Derivative(source) => {
                let h = DERIVATIVE_STEP * x.abs().max(1.0);
                Ok((source.eval(x + h)? - source.eval(x - h)?) / (2.0 * h))
            }
            Function::Integral { source, from } => simpson(|t| source.eval(t), *from, x, SIMPSON_INTERVALS),
        }
    }

    /// Points the function is defined on, as listed by its representation.
    pub fn domain(&self) -> Result<Vec<f64>, ModelError> {
        match self {
            Function::Rule { domain, .. } => Ok(domain.iter().map(|&x| x as f64).collect()),
            Function::Table { points } => Ok(points.iter().map(|&(x, _)| x as f64).collect()),
            Function::Inverse(source) => source.domain()?.into_iter().map(|x| source.eval(x)).collect(),
            Function::ShiftX { source, by } => Ok(source.domain()?.into_iter().map(|x| x + by).collect()),
            Function::Bump { source, .. } | Function::Derivative(source) | Function::Integral { source, .. } => {
                source.domain()
            }
        }
    }

    /// Diagnostics that do not stop evaluation: for an inverse, output
    /// values produced by more than one input (the first input wins).
    pub fn warnings(&self) -> Vec<String> {
        match self {
            Function::Inverse(source) => {
                let mut seen: BTreeMap<String, f64> = BTreeMap::new();
                let mut out = Vec::new();
                let Ok(domain) = source.domain() else {
                    return out;
                };
                for x in domain {
                    let Ok(y) = source.eval(x) else { continue };
                    let key = format_number(y);
                    match seen.get(&key) {
                        Some(first) => out.push(format!(
                            "value {key} is produced by {} and {}; inverse uses {}",
                            format_number(*first),
                            format_number(x),
                            format_number(*first)
                        )),
                        None => {
                            seen.insert(key, x);
                        }
                    }
                }
                out
            }
            Function::ShiftX { source, .. }
            | Function::Bump { source, .. }
            | Function::Derivative(source)
            | Function::Integral { source, .. } => source.warnings(),
            Function::Rule { .. } | Function::Table { .. } => Vec::new(),
        }
    }

    /// Two-sided numeric limit at `x0` with steps `10^-1 .. 10^-8`.
    pub fn limit(&self, x0: f64) -> Result<f64, ModelError> {
        let mut prev: Option<(f64, f64)> = None;
        for k in 1..=8 {
            let h = 10f64.powi(-k);
            let (left, right) = (self.eval(x0 - h)?, self.eval(x0 + h)?);
            if let Some((pl, pr)) = prev {
                let settled = (left - pl).abs() < LIMIT_TOLERANCE && (right - pr).abs() < LIMIT_TOLERANCE;
                if settled && (left - right).abs() < LIMIT_TOLERANCE {
                    return Ok((left + right) / 2.0);
                }
            }
            prev = Some((left, right));
        }
        Err(ModelError::NoConvergence(format_number(x0)))
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Function::Rule { rule, .. } => write!(f, "x -> {rule}"),
            Function::Table { points } => {
                f.write_str("table[")?;
                for (i, (x, y)) in points.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "({x}, {y})")?;
                }
                f.write_str("]")
            }
            Function::Inverse(s) => write!(f, "inverse({s})"),
            Function::ShiftX { source, by } => write!(f, "shift_x({source}, {})", format_number(*by)),
            Function::Bump {
                source,
                start,
                end,
                val,
            } => write!(
                f,
                "bump({source}, {}, {}, {})",
                format_number(*start),
                format_number(*end),
                format_number(*val)
            ),
            Function::Derivative(s) => write!(f, "d/dx({s})"),
            Function::Integral { source, from } => write!(f, "integral({source}, {})", format_number(*from)),
        }
    }
}

// ---- concept types -----------------------------------------------------

fn number_arg(args: &[Value], i: usize) -> Result<f64, ModelError> {
    args[i]
        .as_f64()
        .ok_or_else(|| ModelError::Failed(format!("expected a number, got {}", args[i].kind_name())))
}

fn number(model: &Model, inst: &ConceptInstance, name: &str) -> Result<f64, ModelError> {
    model
        .get_attribute(inst, name)?
        .as_f64()
        .ok_or_else(|| ModelError::Failed(format!("`{}.{name}` is not a number", inst.id())))
}

fn int_of(v: &Value) -> Result<i64, ModelError> {
    v.as_i64()
        .ok_or_else(|| ModelError::Failed(format!("expected an integer, got {v}")))
}

/// Integer list value; fails if any entry is not integral.
fn int_list(xs: &[f64]) -> Result<Value, ModelError> {
    xs.iter()
        .map(|&x| {
            if x.fract() == 0.0 && x.abs() < 9.0e15 {
                Ok(Value::Int(x as i64))
            } else {
                Err(ModelError::Failed(format!(
                    "domain value {} is not an integer",
                    format_number(x)
                )))
            }
        })
        .collect::<Result<_, _>>()
        .map(Value::List)
}

fn source_of(model: &Model, inst: &ConceptInstance, name: &str) -> Result<Function, ModelError> {
    let v = model.get_attribute(inst, name)?;
    function_of(model, model.deref(&v)?)
}

/// Decodes an instance of any registered function type.
pub fn function_of(model: &Model, inst: &ConceptInstance) -> Result<Function, ModelError> {
    let t = inst.type_name();
    if model.is_a(t, "RuleFunction") {
        let rule = match model.get_attribute(inst, "rule")? {
            Value::Expr(e) => e,
            other => return Err(ModelError::Failed(format!("rule must be an expression, got {other}"))),
        };
        let domain = match model.get_attribute(inst, "domain")? {
            Value::List(xs) => xs.iter().map(int_of).collect::<Result<_, _>>()?,
            other => return Err(ModelError::Failed(format!("domain must be a list, got {other}"))),
        };
        Ok(Function::rule(rule, domain))
    } else if model.is_a(t, "TableFunction") {
        let Value::List(items) = model.get_attribute(inst, "points")? else {
            return Err(ModelError::Failed("points must be a list".into()));
        };
        let points = items
            .iter()
            .map(|p| match p.as_tuple() {
                Some([x, y]) => Ok((int_of(x)?, int_of(y)?)),
                _ => Err(ModelError::Failed(format!("point {p} is not an (x, y) pair"))),
            })
            .collect::<Result<_, _>>()?;
        Ok(Function::table(points))
    } else if model.is_a(t, "InverseFunction") {
        Ok(source_of(model, inst, "inverts")?.inverse())
    } else if model.is_a(t, "ShiftX") {
        Ok(source_of(model, inst, "source")?.shift_x(number(model, inst, "by")?))
    } else if model.is_a(t, "Bump") {
        source_of(model, inst, "source")?.bump(
            number(model, inst, "start")?,
            number(model, inst, "end")?,
            number(model, inst, "val")?,
        )
    } else if model.is_a(t, "Derivative") {
        Ok(source_of(model, inst, "source")?.derivative())
    } else if model.is_a(t, "Integral") {
        Ok(source_of(model, inst, "source")?.integral(number(model, inst, "from")?))
    } else {
        Err(ModelError::Failed(format!(
            "`{}` of type {t} is not a known function",
            inst.id()
        )))
    }
}

fn eval_def(source_text: &str) -> FunctionDef {
    FunctionDef::native("eval", &["x"], source_text, |model, inst, args| {
        Ok(Value::Float(function_of(model, inst)?.eval(number_arg(args, 0)?)?))
    })
}

fn computed_domain() -> impl Fn(&Model, &ConceptInstance) -> Result<Value, ModelError> + Send + Sync {
    |model, inst| int_list(&function_of(model, inst)?.domain()?)
}

fn gradient(color: &str) -> Template {
    Template::new().with(keys::GRADIENT_COLOR, TemplateValue::text(color))
}

fn int_list_kind() -> AttributeKind {
    AttributeKind::list_of(AttributeKind::Int)
}

fn function_type() -> ConceptType {
    ConceptType::new("Function")
        .attribute("domain", int_list_kind())
        .function(FunctionDef::abstract_fn(
            "eval",
            &["x"],
            "def eval(self, x):\n    pass  # defined by each kind of function",
        ))
        .function(FunctionDef::native(
            "limit",
            &["x0"],
            "def limit(self, x0):\n    # two-sided estimates with h = 0.1, 0.01, ... 1e-8\n    return settle(self.eval(x0 - h), self.eval(x0 + h))",
            |model, inst, args| Ok(Value::Float(function_of(model, inst)?.limit(number_arg(args, 0)?)?)),
        ))
        .class_template(gradient("Green"))
        .narrative("{id} is a function on {domain}.")
}

fn rule_function_type() -> ConceptType {
    ConceptType::new("RuleFunction")
        .extends("Function")
        .attribute("rule", AttributeKind::Expr)
        .function(eval_def("def eval(self, x):\n    return self.rule(x)"))
        .class_template(gradient("Yellow"))
        .narrative("{id} is a RuleFunction computing {rule} on the domain {domain}.")
}

fn table_function_type() -> ConceptType {
    ConceptType::new("TableFunction")
        .extends("Function")
        .attribute(
            "points",
            AttributeKind::list_of(AttributeKind::tuple_of([AttributeKind::Int, AttributeKind::Int])),
        )
        .computed("domain", int_list_kind(), computed_domain())
        .function(eval_def(
            "def eval(self, x):\n    for x1, y1 in self.points:\n        if x1 == x:\n            return y1\n    raise NotInDomain(x)",
        ))
        .class_template(gradient("Maroon"))
        .instance_template(Template::new().with(keys::NAME, TemplateValue::text("Circle")))
        .narrative("{id} is a TableFunction with points {points}, so its domain is {domain}.")
}

fn inverse_function_type() -> ConceptType {
    ConceptType::new("InverseFunction")
        .extends("Function")
        .attribute("inverts", AttributeKind::ref_to("Function"))
        .computed("domain", int_list_kind(), computed_domain())
        .function(eval_def(
            "def eval(self, y):\n    for x in self.inverts.domain:\n        if self.inverts.eval(x) == y:\n            return x\n    raise NotInDomain(y)",
        ))
        .class_template(gradient("Blue"))
        .instance_template(Template::new().with(keys::NAME, TemplateValue::text("Square")))
        .narrative("{id} inverts {inverts}, so its domain is {domain}.")
}

/// Function, RuleFunction, and TableFunction.
pub fn function_types() -> Result<Model, ModelError> {
    Model::new()
        .register_type(function_type())?
        .register_type(rule_function_type())?
        .register_type(table_function_type())
}

/// The function types plus the table function `tf` with its method and
/// evaluation callouts.
pub fn function_instances() -> Result<Model, ModelError> {
    let points = [(1, 10), (2, 15)]
        .iter()
        .map(|&(x, y)| Value::Tuple(vec![Value::Int(x), Value::Int(y)]))
        .collect();
    Ok(function_types()?
        .with_instance("tf", "TableFunction", [("points", Value::List(points))])?
        .with_directive(DisplayDirective::ShowMethod {
            instance: "tf".into(),
            function: "eval".into(),
        })
        .with_directive(DisplayDirective::ShowEval {
            instance: "tf".into(),
            function: "eval".into(),
            args: vec![Value::Int(1)],
        }))
}

/// Extends [`function_instances`] with `inv`, the inverse of `tf`.
pub fn inverse_model() -> Result<Model, ModelError> {
    Ok(function_instances()?
        .register_type(inverse_function_type())?
        .with_instance("inv", "InverseFunction", [("inverts", Value::reference("tf"))])?
        .with_directive(DisplayDirective::ShowEval {
            instance: "inv".into(),
            function: "eval".into(),
            args: vec![Value::Int(15)],
        }))
}

fn source_eval(name: &str, source_text: &str, to_original: bool) -> FunctionDef {
    FunctionDef::native(name, &["x"], source_text, move |model, inst, args| {
        let x = number_arg(args, 0)?;
        let mut cur = model.deref(&model.get_attribute(inst, "source")?)?;
        if to_original {
            while model.is_a(cur.type_name(), "Transform") {
                cur = model.deref(&model.get_attribute(cur, "source")?)?;
            }
        }
        Ok(Value::Float(function_of(model, cur)?.eval(x)?))
    })
}

fn transform_types(model: Model) -> Result<Model, ModelError> {
    let transform = ConceptType::new("Transform")
        .extends("Function")
        .attribute("source", AttributeKind::ref_to("Function"))
        .computed("domain", int_list_kind(), computed_domain())
        .function(source_eval(
            "source_eval",
            "def source_eval(self, x):\n    return self.source.eval(x)",
            false,
        ))
        .function(source_eval(
            "original_eval",
            "def original_eval(self, x):\n    f = self.source\n    while isinstance(f, Transform):\n        f = f.source\n    return f.eval(x)",
            true,
        ))
        .class_template(gradient("LightGray"))
        .narrative("{id} transforms {source}.");
    let shift = ConceptType::new("ShiftX")
        .extends("Transform")
        .attribute("by", AttributeKind::Int)
        .computed("domain", int_list_kind(), computed_domain())
        .function(eval_def("def eval(self, x):\n    return self.source.eval(x - self.by)"))
        .class_template(gradient("Orange"))
        .narrative("{id} shifts {source} right by {by}.");
    let bump = ConceptType::new("Bump")
        .extends("Transform")
        .attribute("start", AttributeKind::Float)
        .attribute("end", AttributeKind::Float)
        .attribute("val", AttributeKind::Float)
        .function(eval_def(
            "def eval(self, x):\n    if self.start <= x <= self.end:\n        return self.val\n    return self.source.eval(x)",
        ))
        .class_template(gradient("Plum"))
        .narrative("{id} equals {val} on [{start}, {end}] and follows {source} elsewhere.");
    let derivative = ConceptType::new("Derivative")
        .extends("Transform")
        .function(eval_def(
            "def eval(self, x):\n    h = 1e-5 * max(1, abs(x))\n    return (self.source.eval(x + h) - self.source.eval(x - h)) / (2 * h)",
        ))
        .class_template(gradient("Teal"))
        .narrative("{id} is the derivative of {source}.");
    let integral = ConceptType::new("Integral")
        .extends("Transform")
        .attribute("from", AttributeKind::Float)
        .function(eval_def(
            "def eval(self, x):\n    return simpson(self.source.eval, self.from_, x, 200)",
        ))
        .class_template(gradient("Olive"))
        .narrative("{id} is the integral of {source} starting at {from}.");
    model
        .register_type(transform)?
        .register_type(shift)?
        .register_type(bump)?
        .register_type(derivative)?
        .register_type(integral)
}

/// A bump of a shift of `x^2`, with its derivative and integral.
pub fn transforms_model() -> Result<Model, ModelError> {
    let square = crate::expr::parse_expr("x^2").map_err(|e| ModelError::Failed(e.to_string()))?;
    let domain = Value::List((0..=5).map(Value::Int).collect());
    Ok(transform_types(function_types()?)?
        .with_instance(
            "square",
            "RuleFunction",
            [("rule", Value::Expr(square)), ("domain", domain)],
        )?
        .with_instance(
            "shifted",
            "ShiftX",
            [("source", Value::reference("square")), ("by", Value::Int(3))],
        )?
        .with_instance(
            "bumped",
            "Bump",
            [
                ("source", Value::reference("shifted")),
                ("start", Value::Int(0)),
                ("end", Value::Int(5)),
                ("val", Value::Int(100)),
            ],
        )?
        .with_instance("slope", "Derivative", [("source", Value::reference("square"))])?
        .with_instance(
            "area",
            "Integral",
            [("source", Value::reference("square")), ("from", Value::Int(0))],
        )?
        .with_directive(DisplayDirective::ShowGraph {
            instance: "bumped".into(),
            functions: vec!["original_eval".into(), "source_eval".into(), "eval".into()],
            range: (-1.0, 9.0),
        }))
}
