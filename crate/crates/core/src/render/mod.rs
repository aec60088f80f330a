//! Diagram construction, narrative text, plots, and animation frames.

mod animate;
mod diagram;
mod layout;
mod narrative;
mod plot;
mod svg;

use thiserror::Error;

use crate::model::ModelError;
use crate::template::TemplateError;

pub use animate::{animate, animate_with, frame_times, AnimationSpec};
pub use diagram::{ArrowHead, Color, DiagramDoc, Item, Paint, Point, Shape, WorldBounds};
pub use layout::{instance_diagram, type_diagram};
pub use narrative::{narrative, narrative_sentences};
pub use plot::{plot, plot_with, sample_plot, sample_plot_with, PlotData, PlotFn, PlotFunction, PlotSpec, Series};
pub use svg::to_svg;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("template for `{target}`: {source}")]
    Template { target: String, source: TemplateError },
    #[error("invalid color `{0}`")]
    InvalidColor(String),
    #[error("invalid diagram: {0}")]
    InvalidDocument(String),
    #[error("directive {directive}: {source}")]
    Directive { directive: String, source: ModelError },
    #[error("instance `{instance}` of type `{type_name}` has no narrative template")]
    MissingNarrativeTemplate { instance: String, type_name: String },
    #[error("every sample of `{label}` failed to evaluate")]
    AllPointsInvalid { label: String },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("frame {index}: {source}")]
    Frame { index: usize, source: TemplateError },
}
