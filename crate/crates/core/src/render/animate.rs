//! Animation frames from time-dependent templates.
//!
//! Each template describes one shape through its `new` key (`circle` or
//! `shape`, `line`, `rectangle`, `text`). Frames share one set of world
//! bounds so the subject moves across a fixed background.

use super::diagram::{ArrowHead, Color, DiagramDoc, Item, Paint, Point, Shape, WorldBounds};
use super::RenderError;
use crate::exec::Exec;
use crate::model::{InstanceId, Model};
use crate::template::{keys, ResolvedProps, Target, Template};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const DEFAULT_RADIUS: f64 = 0.3;
const FONT: f64 = 12.0;

#[derive(Debug, Clone)]
pub struct AnimationSpec {
    pub subject: InstanceId,
    pub range: (f64, f64),
    pub frame_count: usize,
    pub templates: Vec<Template>,
}

impl AnimationSpec {
    fn check(&self) -> Result<(), RenderError> {
        let (t0, t1) = self.range;
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(RenderError::InvalidSpec(format!(
                "time range must satisfy t0 < t1, got {t0}:{t1}"
            )));
        }
        if self.frame_count < 2 {
            return Err(RenderError::InvalidSpec(format!(
                "need at least 2 frames, got {}",
                self.frame_count
            )));
        }
        if self.templates.is_empty() {
            return Err(RenderError::InvalidSpec("no shape templates".into()));
        }
        Ok(())
    }
}

/// `t0 + k·(t1−t0)/(n−1)` for `k` in `0..n`.
pub fn frame_times(range: (f64, f64), n: usize) -> Vec<f64> {
    let (t0, t1) = range;
    if n < 2 {
        return vec![t0; n];
    }
    (0..n).map(|k| t0 + k as f64 * (t1 - t0) / (n - 1) as f64).collect()
}

pub fn animate(model: &Model, spec: &AnimationSpec) -> Result<Vec<DiagramDoc>, RenderError> {
    animate_with(model, spec, Exec::default())
}

/// One document per frame; frames are resolved with `exec`.
pub fn animate_with(model: &Model, spec: &AnimationSpec, exec: Exec) -> Result<Vec<DiagramDoc>, RenderError> {
    spec.check()?;
    let subject = model.require_instance(spec.subject.as_str())?;
    let times = frame_times(spec.range, spec.frame_count);
    let frames: Vec<Result<Vec<Item>, RenderError>> = exec.map_indexed(times.len(), |k| {
        spec.templates
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let props = t
                    .apply(model, Target::Instance(subject), Some(times[k]))
                    .map_err(|source| RenderError::Frame { index: k, source })?;
                build_shape(&props)
                    .map(|shape| Item::new(format!("shape:{i}"), shape))
                    .map_err(|e| match e {
                        RenderError::InvalidSpec(m) => {
                            RenderError::InvalidSpec(format!("frame {k}, template {i}: {m}"))
                        }
                        other => other,
                    })
            })
            .collect()
    });
    let frames: Vec<Vec<Item>> = frames.into_iter().collect::<Result<_, _>>()?;
    let world = common_bounds(&frames);
    Ok(frames
        .into_iter()
        .zip(&times)
        .map(|(items, t)| {
            let mut doc = DiagramDoc::new(WIDTH, HEIGHT);
            doc.world = Some(world);
            doc.elements = items;
            doc.overlay.push(Item::new(
                "time",
                Shape::TextBlock {
                    origin: Point::new(10.0, 6.0),
                    lines: vec![format!("t = {t:.3}")],
                    font_size: FONT,
                    color: Color::named("black"),
                },
            ));
            doc
        })
        .collect())
}

fn color(props: &ResolvedProps, key: &str, default: &str) -> Result<Color, RenderError> {
    match props.text(key) {
        Some(c) => Color::parse(&c),
        None => Ok(Color::named(default)),
    }
}

fn point(props: &ResolvedProps, key: &str) -> Result<Point, RenderError> {
    match props.point(key).as_deref() {
        Some([x, y, ..]) => Ok(Point::new(*x, *y)),
        _ => Err(RenderError::InvalidSpec(format!("`{key}` must be a 2-D point"))),
    }
}

fn build_shape(props: &ResolvedProps) -> Result<Shape, RenderError> {
    let kind = props.text(keys::NEW).unwrap_or_else(|| "shape".into());
    match kind.as_str() {
        "shape" | "circle" => {
            let fill = match props.text(keys::GRADIENT_COLOR) {
                Some(c) => Paint::Gradient(Color::parse(&c)?),
                None => Paint::Solid(color(props, keys::FILL, "steelblue")?),
            };
            Ok(Shape::Circle {
                center: point(props, keys::ORIGIN)?,
                radius: props.number(keys::RADIUS).unwrap_or(DEFAULT_RADIUS),
                fill,
                label: props.lines(keys::TEXT).unwrap_or_default(),
                font_size: props.number(keys::FONT_SIZE).unwrap_or(FONT),
            })
        }
        "line" => {
            let pts = props
                .points(keys::POINT_LIST)
                .ok_or_else(|| RenderError::InvalidSpec("`point_list` must be a list of points".into()))?;
            let points: Vec<Point> = pts
                .iter()
                .map(|p| match p.as_slice() {
                    [x, y, ..] => Ok(Point::new(*x, *y)),
                    _ => Err(RenderError::InvalidSpec(
                        "`point_list` entries must be 2-D points".into(),
                    )),
                })
                .collect::<Result<_, _>>()?;
            if points.len() < 2 {
                return Err(RenderError::InvalidSpec("`point_list` needs at least 2 points".into()));
            }
            Ok(Shape::Line {
                points,
                stroke: color(props, keys::STROKE, "black")?,
                arrow: ArrowHead::Open,
                dashed: false,
            })
        }
        "rectangle" => {
            let size = props.point(keys::SIZE).unwrap_or_else(|| vec![1.0, 1.0]);
            let [w, h, ..] = size.as_slice() else {
                return Err(RenderError::InvalidSpec("`size` must be [width, height]".into()));
            };
            Ok(Shape::Box {
                origin: point(props, keys::ORIGIN)?,
                width: *w,
                height: *h,
                corner_radius: props.number(keys::CORNER_RADIUS).unwrap_or(0.0),
                fill: Paint::Solid(color(props, keys::FILL, "white")?),
                lines: props.lines(keys::TEXT).unwrap_or_default(),
                font_size: props.number(keys::FONT_SIZE).unwrap_or(FONT),
            })
        }
        "text" => Ok(Shape::TextBlock {
            origin: point(props, keys::ORIGIN)?,
            lines: props.lines(keys::TEXT).unwrap_or_default(),
            font_size: props.number(keys::FONT_SIZE).unwrap_or(FONT),
            color: color(props, keys::FILL, "black")?,
        }),
        other => Err(RenderError::InvalidSpec(format!("unknown shape kind `{other}`"))),
    }
}

fn common_bounds(frames: &[Vec<Item>]) -> WorldBounds {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for item in frames.iter().flatten() {
        let (a, b) = item.shape.bounds();
        lo = Point::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    if !(lo.x.is_finite() && hi.x.is_finite()) {
        return WorldBounds {
            min: Point::new(-1.0, -1.0),
            max: Point::new(1.0, 1.0),
        };
    }
    let pad_x = (0.05 * (hi.x - lo.x)).max(0.5);
    let pad_y = (0.05 * (hi.y - lo.y)).max(0.5);
    WorldBounds {
        min: Point::new(lo.x - pad_x, lo.y - pad_y),
        max: Point::new(hi.x + pad_x, hi.y + pad_y),
    }
}
