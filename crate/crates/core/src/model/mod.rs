//! Concept schemas, immutable instances, reflection, and validation.
//!
//! A [`Model`] is a persistent value: every registering operation returns
//! a new model and leaves the receiver untouched. Types and instances are
//! held behind `Arc`, so cloning a model is cheap.

mod concept;
mod error;
mod value;

use std::sync::Arc;

use indexmap::IndexMap;

pub use concept::{ConceptInstance, ConceptType, FunctionBody, FunctionDef, Getter, NativeFn};
pub use error::{ModelError, Violation};
pub use value::{format_number, AttributeKind, InstanceId, Value};

use crate::template::Template;

/// A display request recorded alongside the model.
#[derive(Debug, Clone)]
pub enum DisplayDirective {
    ShowMethod {
        instance: InstanceId,
        function: String,
    },
    ShowEval {
        instance: InstanceId,
        function: String,
        args: Vec<Value>,
    },
    ShowGraph {
        instance: InstanceId,
        functions: Vec<String>,
        range: (f64, f64),
    },
    Animate {
        instance: InstanceId,
        range: (f64, f64),
        templates: Vec<Template>,
    },
}

impl DisplayDirective {
    pub fn instance(&self) -> &InstanceId {
        match self {
            DisplayDirective::ShowMethod { instance, .. }
            | DisplayDirective::ShowEval { instance, .. }
            | DisplayDirective::ShowGraph { instance, .. }
            | DisplayDirective::Animate { instance, .. } => instance,
        }
    }
}

/// One attribute as seen through inheritance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectedAttribute {
    pub name: String,
    pub kind: AttributeKind,
    /// Type that supplied the effective definition.
    pub declared_in: String,
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    types: IndexMap<String, Arc<ConceptType>>,
    instances: IndexMap<InstanceId, Arc<ConceptInstance>>,
    directives: Vec<DisplayDirective>,
}

enum Problem {
    Mismatch { expected: String, found: String },
    Dangling(String),
}

impl Model {
    pub fn new() -> Model {
        Model::default()
    }

    // ---- types -------------------------------------------------------

    /// Returns a new model that also contains `t`.
    pub fn register_type(&self, t: ConceptType) -> Result<Model, ModelError> {
        if self.types.contains_key(&t.name) {
            return Err(ModelError::DuplicateType(t.name));
        }
        let inherited = match &t.parent {
            Some(parent) => {
                if !self.types.contains_key(parent) {
                    return Err(ModelError::UnknownParent {
                        child: t.name.clone(),
                        parent: parent.clone(),
                    });
                }
                self.attributes(parent)?
            }
            None => Vec::new(),
        };

        for (i, (name, kind)) in t.attributes.iter().enumerate() {
            if t.attributes[..i].iter().any(|(n, _)| n == name) {
                return Err(ModelError::DuplicateAttribute {
                    type_name: t.name.clone(),
                    attribute: name.clone(),
                });
            }
            if let Some(base) = inherited.iter().find(|a| &a.name == name) {
                check_override(&t.name, name, &base.kind, kind)?;
            }
            if let AttributeKind::Computed { getter, .. } = kind {
                let known = t.getters.contains_key(getter)
                    || t.parent
                        .as_deref()
                        .is_some_and(|p| self.find_getter(p, getter).is_some());
                if !known {
                    return Err(ModelError::UnknownGetter {
                        type_name: t.name.clone(),
                        attribute: name.clone(),
                        getter: getter.clone(),
                    });
                }
            }
            for target in kind.referenced_types() {
                if target != t.name && !self.types.contains_key(target) {
                    return Err(ModelError::UnknownType(target.to_string()));
                }
            }
        }
        if let Some(f) = t.functions.iter().find(|f| f.source_text.trim().is_empty()) {
            return Err(ModelError::MissingSourceText {
                type_name: t.name.clone(),
                function: f.name.clone(),
            });
        }

        let mut next = self.clone();
        next.types.insert(t.name.clone(), Arc::new(t));
        Ok(next)
    }

    pub fn concept_type(&self, name: &str) -> Option<&ConceptType> {
        self.types.get(name).map(Arc::as_ref)
    }

    /// Types in registration order.
    pub fn types(&self) -> impl Iterator<Item = &ConceptType> {
        self.types.values().map(Arc::as_ref)
    }

    /// The type and its ancestors, root first.
    pub fn lineage(&self, name: &str) -> Result<Vec<&ConceptType>, ModelError> {
        let mut chain = Vec::new();
        let mut cur = Some(name);
        while let Some(n) = cur {
            let t = self
                .concept_type(n)
                .ok_or_else(|| ModelError::UnknownType(n.to_string()))?;
            chain.push(t);
            cur = t.parent.as_deref();
        }
        chain.reverse();
        Ok(chain)
    }

    /// True when `name` is `ancestor` or inherits from it.
    pub fn is_a(&self, name: &str, ancestor: &str) -> bool {
        self.lineage(name)
            .map(|chain| chain.iter().any(|t| t.name == ancestor))
            .unwrap_or(false)
    }

    /// Every attribute of the type, inherited ones first, each name once.
    /// A subtype override keeps the inherited position.
    pub fn attributes(&self, type_name: &str) -> Result<Vec<ReflectedAttribute>, ModelError> {
        let mut out: Vec<ReflectedAttribute> = Vec::new();
        for t in self.lineage(type_name)? {
            for (name, kind) in &t.attributes {
                let attr = ReflectedAttribute {
                    name: name.clone(),
                    kind: kind.clone(),
                    declared_in: t.name.clone(),
                };
                match out.iter_mut().find(|a| &a.name == name) {
                    Some(slot) => *slot = attr,
                    None => out.push(attr),
                }
            }
        }
        Ok(out)
    }

    /// Effective functions of the type, overrides replacing inherited ones
    /// in place. Pairs each definition with the type that declares it.
    pub fn functions(&self, type_name: &str) -> Result<Vec<(&str, &FunctionDef)>, ModelError> {
        let mut out: Vec<(&str, &FunctionDef)> = Vec::new();
        for t in self.lineage(type_name)? {
            for f in &t.functions {
                match out.iter_mut().find(|(_, g)| g.name == f.name) {
                    Some(slot) => *slot = (t.name.as_str(), f),
                    None => out.push((t.name.as_str(), f)),
                }
            }
        }
        Ok(out)
    }

    pub fn find_function(&self, type_name: &str, function: &str) -> Option<(&str, &FunctionDef)> {
        self.functions(type_name)
            .ok()?
            .into_iter()
            .find(|(_, f)| f.name == function)
    }

    fn find_getter(&self, type_name: &str, getter: &str) -> Option<&Getter> {
        let chain = self.lineage(type_name).ok()?;
        chain.iter().rev().find_map(|t| t.getters.get(getter))
    }

    /// Class template merged down the inheritance chain.
    pub fn effective_class_template(&self, type_name: &str) -> Result<Template, ModelError> {
        Ok(self
            .lineage(type_name)?
            .iter()
            .fold(Template::new(), |acc, t| acc.merge(&t.class_template)))
    }

    /// Instance template merged down the inheritance chain.
    pub fn effective_instance_template(&self, type_name: &str) -> Result<Template, ModelError> {
        Ok(self
            .lineage(type_name)?
            .iter()
            .fold(Template::new(), |acc, t| acc.merge(&t.instance_template)))
    }

    /// Nearest narrative pattern along the inheritance chain.
    pub fn effective_narrative(&self, type_name: &str) -> Result<Option<&str>, ModelError> {
        Ok(self
            .lineage(type_name)?
            .iter()
            .rev()
            .find_map(|t| t.narrative_template.as_deref()))
    }

    // ---- instances ---------------------------------------------------

    /// Builds a validated instance. The model itself is not changed; use
    /// [`Model::add_instance`] to include it.
    pub fn new_instance<I, S>(
        &self,
        id: impl Into<InstanceId>,
        type_name: &str,
        bindings: I,
    ) -> Result<ConceptInstance, ModelError>
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        let id = id.into();
        let given: IndexMap<String, Value> = bindings.into_iter().map(|(k, v)| (k.into(), v)).collect();
        let attrs = self.attributes(type_name)?;
        let mut stored = IndexMap::new();
        for attr in &attrs {
            let value = given.get(&attr.name);
            if attr.kind.is_computed() {
                if let Some(v) = value {
                    return Err(ModelError::KindMismatch {
                        instance: id.0,
                        attribute: attr.name.clone(),
                        expected: format!("no binding ({})", attr.kind),
                        found: v.kind_name(),
                    });
                }
                continue;
            }
            let Some(value) = value else {
                return Err(ModelError::MissingAttribute {
                    instance: id.0,
                    attribute: attr.name.clone(),
                });
            };
            let checked = self.check_value(&attr.kind, value).map_err(|p| match p {
                Problem::Mismatch { expected, found } => ModelError::KindMismatch {
                    instance: id.0.clone(),
                    attribute: attr.name.clone(),
                    expected,
                    found,
                },
                Problem::Dangling(target) => ModelError::DanglingReference {
                    instance: id.0.clone(),
                    attribute: attr.name.clone(),
                    target,
                },
            })?;
            stored.insert(attr.name.clone(), checked);
        }
        if let Some(extra) = given.keys().find(|k| !attrs.iter().any(|a| &a.name == *k)) {
            return Err(ModelError::UnknownAttribute {
                type_name: type_name.to_string(),
                attribute: extra.clone(),
            });
        }
        Ok(ConceptInstance {
            id,
            type_name: type_name.to_string(),
            bindings: stored,
        })
    }

    /// Returns a new model containing `instance`, re-checked against this
    /// model's types and instances.
    pub fn add_instance(&self, instance: ConceptInstance) -> Result<Model, ModelError> {
        if self.instances.contains_key(&instance.id) {
            return Err(ModelError::DuplicateInstance(instance.id.0));
        }
        let checked = self.new_instance(instance.id.clone(), &instance.type_name, instance.bindings.clone())?;
        let mut next = self.clone();
        next.instances.insert(checked.id.clone(), Arc::new(checked));
        Ok(next)
    }

    /// `new_instance` followed by `add_instance`.
    pub fn with_instance<I, S>(
        &self,
        id: impl Into<InstanceId>,
        type_name: &str,
        bindings: I,
    ) -> Result<Model, ModelError>
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        let inst = self.new_instance(id, type_name, bindings)?;
        self.add_instance(inst)
    }

    /// Inserts an instance without any checking. Intended for assembling
    /// models from external sources before calling [`Model::validate`].
    pub fn insert_unchecked<I, S>(&self, id: impl Into<InstanceId>, type_name: &str, bindings: I) -> Model
    where
        I: IntoIterator<Item = (S, Value)>,
        S: Into<String>,
    {
        let inst = ConceptInstance {
            id: id.into(),
            type_name: type_name.to_string(),
            bindings: bindings.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        };
        let mut next = self.clone();
        next.instances.insert(inst.id.clone(), Arc::new(inst));
        next
    }

    pub fn instance(&self, id: &str) -> Option<&ConceptInstance> {
        self.instances.get(&InstanceId::from(id)).map(Arc::as_ref)
    }

    pub fn require_instance(&self, id: &str) -> Result<&ConceptInstance, ModelError> {
        self.instance(id)
            .ok_or_else(|| ModelError::UnknownInstance(id.to_string()))
    }

    /// Instances in registration order.
    pub fn instances(&self) -> impl Iterator<Item = &ConceptInstance> {
        self.instances.values().map(Arc::as_ref)
    }

    // ---- directives ----------------------------------------------------

    pub fn with_directive(&self, d: DisplayDirective) -> Model {
        let mut next = self.clone();
        next.directives.push(d);
        next
    }

    pub fn directives(&self) -> &[DisplayDirective] {
        &self.directives
    }

    // ---- evaluation ----------------------------------------------------

    /// Stored value, or the getter result for a computed attribute.
    pub fn get_attribute(&self, instance: &ConceptInstance, name: &str) -> Result<Value, ModelError> {
        let attrs = self.attributes(&instance.type_name)?;
        let Some(attr) = attrs.iter().find(|a| a.name == name) else {
            return Err(ModelError::UnknownAttribute {
                type_name: instance.type_name.clone(),
                attribute: name.to_string(),
            });
        };
        match &attr.kind {
            AttributeKind::Computed { result, getter } => {
                let f = self
                    .find_getter(&instance.type_name, getter)
                    .ok_or_else(|| ModelError::UnknownGetter {
                        type_name: instance.type_name.clone(),
                        attribute: name.to_string(),
                        getter: getter.clone(),
                    })?;
                let value = f(self, instance)?;
                self.check_value(result, &value).map_err(|p| match p {
                    Problem::Mismatch { expected, found } => ModelError::KindMismatch {
                        instance: instance.id.0.clone(),
                        attribute: name.to_string(),
                        expected,
                        found,
                    },
                    Problem::Dangling(target) => ModelError::DanglingReference {
                        instance: instance.id.0.clone(),
                        attribute: name.to_string(),
                        target,
                    },
                })
            }
            _ => instance
                .bindings
                .get(name)
                .cloned()
                .ok_or_else(|| ModelError::MissingAttribute {
                    instance: instance.id.0.clone(),
                    attribute: name.to_string(),
                }),
        }
    }

    /// Calls a function of the instance's type (or nearest ancestor).
    pub fn invoke(&self, instance: &ConceptInstance, function: &str, args: &[Value]) -> Result<Value, ModelError> {
        let (owner, def) =
            self.find_function(&instance.type_name, function)
                .ok_or_else(|| ModelError::UnknownFunction {
                    type_name: instance.type_name.clone(),
                    function: function.to_string(),
                })?;
        def.call(self, owner, instance, args)
    }

    /// Resolves a `Ref` value to its instance.
    pub fn deref(&self, value: &Value) -> Result<&ConceptInstance, ModelError> {
        match value {
            Value::Ref(id) => self.require_instance(id.as_str()),
            other => Err(ModelError::Failed(format!(
                "expected a reference, got {}",
                other.kind_name()
            ))),
        }
    }

    // ---- validation ----------------------------------------------------

    /// Lists every kind or reference-integrity problem. Empty iff the
    /// model is consistent.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for t in self.types.values() {
            for (attr, kind) in &t.attributes {
                for target in kind.referenced_types() {
                    if !self.types.contains_key(target) {
                        out.push(Violation::UnresolvedRefType {
                            type_name: t.name.clone(),
                            attribute: attr.clone(),
                            target: target.to_string(),
                        });
                    }
                }
            }
        }
        for inst in self.instances.values() {
            let Ok(attrs) = self.attributes(&inst.type_name) else {
                out.push(Violation::UnknownType {
                    instance: inst.id.0.clone(),
                    type_name: inst.type_name.clone(),
                });
                continue;
            };
            for attr in &attrs {
                let bound = inst.bindings.get(&attr.name);
                match (attr.kind.is_computed(), bound) {
                    (true, None) => {}
                    (true, Some(v)) => out.push(Violation::KindMismatch {
                        instance: inst.id.0.clone(),
                        attribute: attr.name.clone(),
                        expected: format!("no binding ({})", attr.kind),
                        found: v.kind_name(),
                    }),
                    (false, None) => out.push(Violation::MissingAttribute {
                        instance: inst.id.0.clone(),
                        attribute: attr.name.clone(),
                    }),
                    (false, Some(v)) => match self.check_value(&attr.kind, v) {
                        Ok(_) => {}
                        Err(Problem::Mismatch { expected, found }) => out.push(Violation::KindMismatch {
                            instance: inst.id.0.clone(),
                            attribute: attr.name.clone(),
                            expected,
                            found,
                        }),
                        Err(Problem::Dangling(target)) => out.push(Violation::DanglingReference {
                            instance: inst.id.0.clone(),
                            attribute: attr.name.clone(),
                            target,
                        }),
                    },
                }
            }
            for name in inst.bindings.keys() {
                if !attrs.iter().any(|a| &a.name == name) {
                    out.push(Violation::UnexpectedAttribute {
                        instance: inst.id.0.clone(),
                        attribute: name.clone(),
                    });
                }
            }
        }
        out
    }

    /// Checks `value` against `kind`, returning the value with integers
    /// widened wherever a float is declared.
    fn check_value(&self, kind: &AttributeKind, value: &Value) -> Result<Value, Problem> {
        let mismatch = || Problem::Mismatch {
            expected: kind.to_string(),
            found: value.kind_name(),
        };
        match (kind.value_kind(), value) {
            (AttributeKind::Int, Value::Int(_))
            | (AttributeKind::Float, Value::Float(_))
            | (AttributeKind::String, Value::Str(_))
            | (AttributeKind::Bool, Value::Bool(_))
            | (AttributeKind::Expr, Value::Expr(_)) => Ok(value.clone()),
            (AttributeKind::Float, Value::Int(i)) => Ok(Value::Float(*i as f64)),
            (AttributeKind::Vector(n), Value::Vector(v)) if v.len() == *n => {
                if v.iter().all(|x| x.is_finite()) {
                    Ok(value.clone())
                } else {
                    Err(Problem::Mismatch {
                        expected: kind.to_string(),
                        found: "non-finite vector".into(),
                    })
                }
            }
            (AttributeKind::ListOf(elem), Value::List(items)) => items
                .iter()
                .map(|v| self.check_value(elem, v))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::List),
            (AttributeKind::TupleOf(kinds), Value::Tuple(items)) if kinds.len() == items.len() => kinds
                .iter()
                .zip(items)
                .map(|(k, v)| self.check_value(k, v))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Tuple),
            (AttributeKind::RefTo(target), Value::Ref(id)) => match self.instances.get(id) {
                Some(inst) if self.is_a(&inst.type_name, target) => Ok(value.clone()),
                _ => Err(Problem::Dangling(id.0.clone())),
            },
            _ => Err(mismatch()),
        }
    }
}

fn check_override(
    type_name: &str,
    attribute: &str,
    base: &AttributeKind,
    new: &AttributeKind,
) -> Result<(), ModelError> {
    let invalid = |reason: &str| ModelError::InvalidOverride {
        type_name: type_name.to_string(),
        attribute: attribute.to_string(),
        reason: reason.to_string(),
    };
    if !new.is_computed() {
        return Err(if base.is_computed() {
            invalid("a computed attribute cannot become stored")
        } else {
            ModelError::DuplicateAttribute {
                type_name: type_name.to_string(),
                attribute: attribute.to_string(),
            }
        });
    }
    if !base.accepts_kind(new) {
        return Err(invalid(&format!("{new} is not compatible with {base}")));
    }
    Ok(())
}
