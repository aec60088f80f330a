use thiserror::Error;

use crate::expr;

/// Failures raised by model construction, reflection, and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("concept type `{0}` is already registered")]
    DuplicateType(String),
    #[error("parent type `{parent}` of `{child}` is not registered")]
    UnknownParent { child: String, parent: String },
    #[error("unknown concept type `{0}`")]
    UnknownType(String),
    #[error("attribute `{attribute}` of `{type_name}` clashes with an inherited or earlier attribute")]
    DuplicateAttribute { type_name: String, attribute: String },
    #[error("attribute `{attribute}` of `{type_name}` cannot override the inherited definition: {reason}")]
    InvalidOverride {
        type_name: String,
        attribute: String,
        reason: String,
    },
    #[error("getter `{getter}` for `{type_name}.{attribute}` is not registered")]
    UnknownGetter {
        type_name: String,
        attribute: String,
        getter: String,
    },
    #[error("function `{function}` of `{type_name}` has empty source text")]
    MissingSourceText { type_name: String, function: String },
    #[error("instance `{0}` already exists")]
    DuplicateInstance(String),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("instance `{instance}` is missing attribute `{attribute}`")]
    MissingAttribute { instance: String, attribute: String },
    #[error("instance `{instance}`, attribute `{attribute}`: expected {expected}, found {found}")]
    KindMismatch {
        instance: String,
        attribute: String,
        expected: String,
        found: String,
    },
    #[error("instance `{instance}`, attribute `{attribute}` refers to missing or mistyped instance `{target}`")]
    DanglingReference {
        instance: String,
        attribute: String,
        target: String,
    },
    #[error("`{type_name}` has no attribute `{attribute}`")]
    UnknownAttribute { type_name: String, attribute: String },
    #[error("`{type_name}` has no function `{function}`")]
    UnknownFunction { type_name: String, function: String },
    #[error("`{function}` is abstract on `{type_name}`")]
    AbstractFunction { type_name: String, function: String },
    #[error("`{function}` expects {expected} argument(s), got {got}")]
    ArityMismatch {
        function: String,
        expected: usize,
        got: usize,
    },
    #[error("{0} is not in the function's domain")]
    NotInDomain(String),
    #[error("math domain error: {0}")]
    MathDomain(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("limit at {0} did not converge")]
    NoConvergence(String),
    #[error("{0}")]
    Failed(String),
}

impl From<expr::EvalError> for ModelError {
    fn from(e: expr::EvalError) -> Self {
        match e {
            expr::EvalError::UnboundVariable(v) => ModelError::UnboundVariable(v.to_string()),
            expr::EvalError::MathDomain(m) => ModelError::MathDomain(m),
        }
    }
}

/// A consistency problem found by [`crate::model::Model::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownType {
        instance: String,
        type_name: String,
    },
    UnresolvedRefType {
        type_name: String,
        attribute: String,
        target: String,
    },
    MissingAttribute {
        instance: String,
        attribute: String,
    },
    UnexpectedAttribute {
        instance: String,
        attribute: String,
    },
    KindMismatch {
        instance: String,
        attribute: String,
        expected: String,
        found: String,
    },
    DanglingReference {
        instance: String,
        attribute: String,
        target: String,
    },
}
