//! Executable concept models.
//!
//! Concept types declare typed attributes and pure functions; instances
//! are immutable. From one model the engine renders type and instance
//! diagrams, narratives, plots, and animation frames as SVG. Model packs
//! cover math functions, chemical reactions, point-mass kinematics, and
//! PVC-pipe engineering geometry.

// Error enums carry model context by value; NaN-rejecting `!(a < b)` checks are deliberate.
#![allow(clippy::result_large_err, clippy::neg_cmp_op_on_partial_ord)]

pub mod exec;
pub mod expr;
pub mod model;
pub mod numeric;
pub mod packs;
pub mod registry;
pub mod render;
pub mod template;

pub use exec::Exec;
pub use model::{
    AttributeKind, ConceptInstance, ConceptType, DisplayDirective, FunctionDef, InstanceId, Model, ModelError, Value,
    Violation,
};
pub use template::{keys, Target, Template, TemplateValue};
