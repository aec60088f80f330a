use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use super::{AttributeKind, InstanceId, Model, ModelError, Value};
use crate::expr::{Env, Expr, Var};
use crate::template::Template;

/// Pure getter backing a computed attribute.
pub type Getter = Arc<dyn Fn(&Model, &ConceptInstance) -> Result<Value, ModelError> + Send + Sync>;

/// Pure native function body: receiver instance plus positional arguments.
pub type NativeFn = Arc<dyn Fn(&Model, &ConceptInstance, &[Value]) -> Result<Value, ModelError> + Send + Sync>;

#[derive(Clone)]
pub enum FunctionBody {
    Native(NativeFn),
    /// Single-expression body; parameters bind the expression variables.
    Expr(Expr),
    /// Declared on a base type, defined by subtypes.
    Abstract,
}

impl fmt::Debug for FunctionBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionBody::Native(_) => f.write_str("Native(..)"),
            FunctionBody::Expr(e) => write!(f, "Expr({e})"),
            FunctionBody::Abstract => f.write_str("Abstract"),
        }
    }
}

/// A pure function attached to a concept type.
#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: FunctionBody,
    /// Display text of the definition, shown by method callouts.
    pub source_text: String,
}

impl FunctionDef {
    pub fn native<F>(name: &str, params: &[&str], source_text: &str, body: F) -> FunctionDef
    where
        F: Fn(&Model, &ConceptInstance, &[Value]) -> Result<Value, ModelError> + Send + Sync + 'static,
    {
        FunctionDef {
            name: name.into(),
            params: params.iter().map(|p| p.to_string()).collect(),
            body: FunctionBody::Native(Arc::new(body)),
            source_text: source_text.into(),
        }
    }

    /// Expression body over the given variables; the source text is the
    /// printed definition.
    pub fn expr(name: &str, params: &[Var], body: Expr) -> FunctionDef {
        let params: Vec<String> = params.iter().map(|v| v.name().to_string()).collect();
        let source_text = format!("def {name}({}): return {body}", params.join(", "));
        FunctionDef {
            name: name.into(),
            params,
            body: FunctionBody::Expr(body),
            source_text,
        }
    }

    pub fn abstract_fn(name: &str, params: &[&str], source_text: &str) -> FunctionDef {
        FunctionDef {
            name: name.into(),
            params: params.iter().map(|p| p.to_string()).collect(),
            body: FunctionBody::Abstract,
            source_text: source_text.into(),
        }
    }

    /// `name(p1, p2)` signature line.
    pub fn signature(&self) -> String {
        format!("{}({})", self.name, self.params.join(", "))
    }

    pub(crate) fn call(
        &self,
        model: &Model,
        owner: &str,
        receiver: &ConceptInstance,
        args: &[Value],
    ) -> Result<Value, ModelError> {
        if args.len() != self.params.len() {
            return Err(ModelError::ArityMismatch {
                function: self.name.clone(),
                expected: self.params.len(),
                got: args.len(),
            });
        }
        match &self.body {
            FunctionBody::Native(f) => f(model, receiver, args),
            FunctionBody::Expr(e) => {
                let mut env = Env::default();
                for (param, arg) in self.params.iter().zip(args) {
                    let v = arg.as_f64().ok_or_else(|| {
                        ModelError::Failed(format!(
                            "argument `{param}` of `{}` must be a number, got {}",
                            self.name,
                            arg.kind_name()
                        ))
                    })?;
                    match Var::from_name(param) {
                        Some(Var::X) => env.x = Some(v),
                        Some(Var::T) => env.t = Some(v),
                        None => {
                            return Err(ModelError::Failed(format!(
                                "parameter `{param}` is not an expression variable"
                            )))
                        }
                    }
                }
                Ok(Value::Float(e.eval(&env)?))
            }
            FunctionBody::Abstract => Err(ModelError::AbstractFunction {
                type_name: owner.to_string(),
                function: self.name.clone(),
            }),
        }
    }
}

/// A concept schema node. Built with the chained constructors below and
/// registered into a [`Model`].
#[derive(Clone)]
pub struct ConceptType {
    pub(crate) name: String,
    pub(crate) parent: Option<String>,
    pub(crate) attributes: Vec<(String, AttributeKind)>,
    pub(crate) functions: Vec<FunctionDef>,
    pub(crate) getters: BTreeMap<String, Getter>,
    pub(crate) class_template: Template,
    pub(crate) instance_template: Template,
    pub(crate) narrative_template: Option<String>,
}

impl fmt::Debug for ConceptType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConceptType")
            .field("name", &self.name)
            .field("parent", &self.parent)
            .field("attributes", &self.attributes)
            .field("functions", &self.functions)
            .field("getters", &self.getters.keys().collect::<Vec<_>>())
            .field("narrative_template", &self.narrative_template)
            .finish_non_exhaustive()
    }
}

impl ConceptType {
    pub fn new(name: impl Into<String>) -> ConceptType {
        ConceptType {
            name: name.into(),
            parent: None,
            attributes: Vec::new(),
            functions: Vec::new(),
            getters: BTreeMap::new(),
            class_template: Template::new(),
            instance_template: Template::new(),
            narrative_template: None,
        }
    }

    pub fn extends(mut self, parent: impl Into<String>) -> Self {
        self.parent = Some(parent.into());
        self
    }

    pub fn attribute(mut self, name: impl Into<String>, kind: AttributeKind) -> Self {
        self.attributes.push((name.into(), kind));
        self
    }

    /// Declares a computed attribute together with its getter, registered
    /// under `_get_<name>`.
    pub fn computed<F>(mut self, name: &str, result: AttributeKind, getter: F) -> Self
    where
        F: Fn(&Model, &ConceptInstance) -> Result<Value, ModelError> + Send + Sync + 'static,
    {
        let getter_name = format!("_get_{name}");
        self.getters.insert(getter_name.clone(), Arc::new(getter));
        self.attributes
            .push((name.to_string(), AttributeKind::computed(result, getter_name)));
        self
    }

    pub fn getter<F>(mut self, name: impl Into<String>, getter: F) -> Self
    where
        F: Fn(&Model, &ConceptInstance) -> Result<Value, ModelError> + Send + Sync + 'static,
    {
        self.getters.insert(name.into(), Arc::new(getter));
        self
    }

    pub fn function(mut self, def: FunctionDef) -> Self {
        self.functions.push(def);
        self
    }

    pub fn class_template(mut self, t: Template) -> Self {
        self.class_template = t;
        self
    }

    pub fn instance_template(mut self, t: Template) -> Self {
        self.instance_template = t;
        self
    }

    /// Sentence pattern with `{attribute}` placeholders (and `{id}`).
    /// An empty pattern marks instances that contribute no sentence.
    pub fn narrative(mut self, pattern: impl Into<String>) -> Self {
        self.narrative_template = Some(pattern.into());
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parent(&self) -> Option<&str> {
        self.parent.as_deref()
    }

    /// Attributes declared directly on this type (not inherited).
    pub fn own_attributes(&self) -> &[(String, AttributeKind)] {
        &self.attributes
    }

    pub fn own_functions(&self) -> &[FunctionDef] {
        &self.functions
    }

    pub fn own_class_template(&self) -> &Template {
        &self.class_template
    }

    pub fn own_instance_template(&self) -> &Template {
        &self.instance_template
    }

    pub fn own_narrative_template(&self) -> Option<&str> {
        self.narrative_template.as_deref()
    }
}

/// An immutable individual conforming to a concept type.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptInstance {
    pub(crate) id: InstanceId,
    pub(crate) type_name: String,
    pub(crate) bindings: IndexMap<String, Value>,
}

impl ConceptInstance {
    pub fn id(&self) -> &InstanceId {
        &self.id
    }

    pub fn type_name(&self) -> &str {
        &self.type_name
    }

    /// Stored value of `name`; computed attributes go through
    /// [`Model::get_attribute`].
    pub fn stored(&self, name: &str) -> Option<&Value> {
        self.bindings.get(name)
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }
}
