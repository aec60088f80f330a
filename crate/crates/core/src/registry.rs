//! Built-in models by id, and helpers that turn display directives into
//! plot and animation specs.

use indexmap::IndexMap;
use thiserror::Error;

use crate::model::{DisplayDirective, Model, ModelError, Value};
use crate::packs::chem::{self, ElementTable};
use crate::packs::{eng, math, phys};
use crate::render::{AnimationSpec, DiagramDoc, PlotFunction, PlotSpec};

/// Inputs shared by every constructor.
#[derive(Debug, Clone, Default)]
pub struct BuildContext {
    pub elements: ElementTable,
}

pub type Constructor = fn(&BuildContext) -> Result<Model, ModelError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegistryError {
    #[error("unknown model `{id}` (available: {available})")]
    UnknownModel { id: String, available: String },
    #[error("model `{0}` is already registered")]
    Duplicate(String),
    #[error("building model `{id}`: {source}")]
    Build { id: String, source: ModelError },
}

#[derive(Clone)]
pub struct ModelRegistry {
    entries: IndexMap<String, Constructor>,
}

impl ModelRegistry {
    pub fn empty() -> ModelRegistry {
        ModelRegistry {
            entries: IndexMap::new(),
        }
    }

    /// functions, inverse, transforms, reactions, network, ball, rov.
    pub fn builtin() -> ModelRegistry {
        let mut r = ModelRegistry::empty();
        let builtins: [(&str, Constructor); 7] = [
            ("functions", |_| math::function_instances()),
            ("inverse", |_| math::inverse_model()),
            ("transforms", |_| math::transforms_model()),
            ("reactions", |ctx| chem::reactions_model(&ctx.elements)),
            ("network", |ctx| chem::network_model(&ctx.elements)),
            ("ball", |_| phys::ball_model()),
            ("rov", |_| eng::rov_model()),
        ];
        for (id, ctor) in builtins {
            r.register(id, ctor).expect("built-in ids are distinct");
        }
        r
    }

    pub fn register(&mut self, id: &str, ctor: Constructor) -> Result<(), RegistryError> {
        if self.entries.contains_key(id) {
            return Err(RegistryError::Duplicate(id.to_string()));
        }
        self.entries.insert(id.to_string(), ctor);
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.entries.contains_key(id)
    }

    pub fn build(&self, id: &str, ctx: &BuildContext) -> Result<Model, RegistryError> {
        let ctor = self.entries.get(id).ok_or_else(|| RegistryError::UnknownModel {
            id: id.to_string(),
            available: self.ids().collect::<Vec<_>>().join(", "),
        })?;
        ctor(ctx).map_err(|source| RegistryError::Build {
            id: id.to_string(),
            source,
        })
    }
}

impl Default for ModelRegistry {
    fn default() -> Self {
        ModelRegistry::builtin()
    }
}

/// Wireframe of the first ROV instance in the model.
pub fn wireframe(model: &Model) -> Result<DiagramDoc, ModelError> {
    let rov = model
        .instances()
        .find(|i| model.is_a(i.type_name(), "ROV"))
        .ok_or_else(|| ModelError::Failed("model has no ROV instance to project".into()))?;
    Ok(eng::project_wireframe(&eng::rov_of(model, rov)?))
}

/// Function names from the first `ShowGraph` directive on `instance`.
pub fn graph_functions(model: &Model, instance: &str) -> Option<(Vec<String>, (f64, f64))> {
    model.directives().iter().find_map(|d| match d {
        DisplayDirective::ShowGraph {
            instance: i,
            functions,
            range,
        } if i.as_str() == instance => Some((functions.clone(), *range)),
        _ => None,
    })
}

/// One plotted curve per named one-argument function of `instance`.
pub fn plot_spec(
    model: &Model,
    instance: &str,
    functions: &[String],
    range: (f64, f64),
    samples: usize,
) -> Result<PlotSpec, ModelError> {
    let inst = model.require_instance(instance)?;
    let mut curves = Vec::with_capacity(functions.len());
    for name in functions {
        let (_, def) = model
            .find_function(inst.type_name(), name)
            .ok_or_else(|| ModelError::UnknownFunction {
                type_name: inst.type_name().to_string(),
                function: name.clone(),
            })?;
        if def.params.len() != 1 {
            return Err(ModelError::Failed(format!(
                "`{name}` takes {} arguments; only one-argument functions can be plotted",
                def.params.len()
            )));
        }
        let m = model.clone();
        let id = inst.id().clone();
        let fname = name.clone();
        curves.push(PlotFunction::new(name.clone(), move |x| {
            let inst = m.require_instance(id.as_str())?;
            let v = m.invoke(inst, &fname, &[Value::Float(x)])?;
            v.as_f64()
                .ok_or_else(|| ModelError::Failed(format!("`{fname}` returned {v}, not a number")))
        }));
    }
    Ok(PlotSpec::new(curves, range, samples).with_labels(plot_x_label(model, inst.type_name()), ""))
}

fn plot_x_label(model: &Model, type_name: &str) -> &'static str {
    if model.is_a(type_name, "Ball") {
        "t"
    } else {
        "x"
    }
}

/// Templates and range from the first `Animate` directive on `instance`.
pub fn animation_spec(
    model: &Model,
    instance: &str,
    range: Option<(f64, f64)>,
    frame_count: usize,
) -> Option<AnimationSpec> {
    model.directives().iter().find_map(|d| match d {
        DisplayDirective::Animate {
            instance: i,
            range: r,
            templates,
        } if i.as_str() == instance => Some(AnimationSpec {
            subject: i.clone(),
            range: range.unwrap_or(*r),
            frame_count,
            templates: templates.clone(),
        }),
        _ => None,
    })
}
