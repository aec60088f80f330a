//! Line plots of one-variable functions.

use std::fmt;
use std::sync::Arc;

use super::diagram::{ArrowHead, Color, DiagramDoc, Item, Paint, Point, Shape};
use super::RenderError;
use crate::exec::Exec;
use crate::model::{format_number, ModelError};

pub type PlotFn = Arc<dyn Fn(f64) -> Result<f64, ModelError> + Send + Sync>;

#[derive(Clone)]
pub struct PlotFunction {
    pub label: String,
    pub f: PlotFn,
}

impl PlotFunction {
    pub fn new<F>(label: impl Into<String>, f: F) -> PlotFunction
    where
        F: Fn(f64) -> Result<f64, ModelError> + Send + Sync + 'static,
    {
        PlotFunction {
            label: label.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for PlotFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlotFunction({})", self.label)
    }
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub functions: Vec<PlotFunction>,
    pub range: (f64, f64),
    pub samples: usize,
    pub x_label: String,
    pub y_label: String,
}

impl PlotSpec {
    pub fn new(functions: Vec<PlotFunction>, range: (f64, f64), samples: usize) -> PlotSpec {
        PlotSpec {
            functions,
            range,
            samples,
            x_label: "x".into(),
            y_label: String::new(),
        }
    }

    pub fn with_labels(mut self, x: impl Into<String>, y: impl Into<String>) -> PlotSpec {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }

    fn check(&self) -> Result<(), RenderError> {
        let (lo, hi) = self.range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(RenderError::InvalidSpec(format!(
                "plot range must satisfy lo < hi, got {lo}:{hi}"
            )));
        }
        if self.samples < 2 {
            return Err(RenderError::InvalidSpec(format!(
                "need at least 2 samples, got {}",
                self.samples
            )));
        }
        if self.functions.is_empty() {
            return Err(RenderError::InvalidSpec("no functions to plot".into()));
        }
        Ok(())
    }

    /// The uniform sample grid.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        let n = self.samples;
        (0..n).map(|i| lo + i as f64 * (hi - lo) / (n - 1) as f64).collect()
    }
}

/// Sampled curve in data coordinates. Failed samples split it into
/// separate segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub segments: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub series: Vec<Series>,
    pub x_range: (f64, f64),
    /// Fitted y range including the margin.
    pub y_range: (f64, f64),
}

pub fn sample_plot(spec: &PlotSpec) -> Result<PlotData, RenderError> {
    sample_plot_with(spec, Exec::default())
}

/// Samples every function on the grid; samples are evaluated with `exec`.
pub fn sample_plot_with(spec: &PlotSpec, exec: Exec) -> Result<PlotData, RenderError> {
    spec.check()?;
    let xs = spec.grid();
    let mut series = Vec::with_capacity(spec.functions.len());
    for pf in &spec.functions {
        let ys = exec.map_indexed(xs.len(), |i| (pf.f)(xs[i]).ok().filter(|y| y.is_finite()));
        let mut segments = Vec::new();
        let mut current = Vec::new();
        for (x, y) in xs.iter().zip(ys) {
            match y {
                Some(y) => current.push((*x, y)),
                None if !current.is_empty() => segments.push(std::mem::take(&mut current)),
                None => {}
            }
        }
        if !current.is_empty() {
            segments.push(current);
        }
        if segments.is_empty() {
            return Err(RenderError::AllPointsInvalid {
                label: pf.label.clone(),
            });
        }
        series.push(Series {
            label: pf.label.clone(),
            segments,
        });
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, y) in series.iter().flat_map(|s| s.segments.iter().flatten()) {
        lo = lo.min(*y);
        hi = hi.max(*y);
    }
    let pad = if hi > lo {
        0.05 * (hi - lo)
    } else if lo != 0.0 {
        0.05 * lo.abs()
    } else {
        1.0
    };
    Ok(PlotData {
        series,
        x_range: spec.range,
        y_range: (lo - pad, hi + pad),
    })
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const FONT: f64 = 11.0;
const PALETTE: [&str; 6] = [
    "steelblue",
    "crimson",
    "seagreen",
    "darkorange",
    "purple",
    "saddlebrown",
];

pub fn plot(spec: &PlotSpec) -> Result<DiagramDoc, RenderError> {
    plot_with(spec, Exec::default())
}

/// Axes, ticks, one polyline per curve segment, and a legend.
pub fn plot_with(spec: &PlotSpec, exec: Exec) -> Result<DiagramDoc, RenderError> {
    let data = sample_plot_with(spec, exec)?;
    let (x0, x1) = data.x_range;
    let (y0, y1) = data.y_range;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * plot_h;
    let black = Color::named("black");
    let gray = Color::named("gray");
    let text = |id: String, origin: Point, s: String| {
        Item::new(
            id,
            Shape::TextBlock {
                origin,
                lines: vec![s],
                font_size: FONT,
                color: Color::named("black"),
            },
        )
    };

    let mut doc = DiagramDoc::new(WIDTH, HEIGHT);
    let axis = |id: &str, a: Point, b: Point| {
        Item::new(
            id,
            Shape::Line {
                points: vec![a, b],
                stroke: black.clone(),
                arrow: ArrowHead::None,
                dashed: false,
            },
        )
    };
    doc.elements.push(axis(
        "axis:x",
        Point::new(LEFT, TOP + plot_h),
        Point::new(LEFT + plot_w, TOP + plot_h),
    ));
    doc.elements
        .push(axis("axis:y", Point::new(LEFT, TOP), Point::new(LEFT, TOP + plot_h)));

    for (i, xv) in nice_ticks(x0, x1).into_iter().enumerate() {
        let tx = px(xv);
        doc.elements.push(Item::new(
            format!("tick:x:{i}"),
            Shape::Line {
                points: vec![Point::new(tx, TOP + plot_h), Point::new(tx, TOP + plot_h + 5.0)],
                stroke: black.clone(),
                arrow: ArrowHead::None,
                dashed: false,
            },
        ));
        doc.elements.push(text(
            format!("tick:x:{i}:label"),
            Point::new(tx - 12.0, TOP + plot_h + 7.0),
            tick_label(xv),
        ));
    }
    for (i, yv) in nice_ticks(y0, y1).into_iter().enumerate() {
        let ty = py(yv);
        doc.elements.push(Item::new(
            format!("tick:y:{i}"),
            Shape::Line {
                points: vec![Point::new(LEFT - 5.0, ty), Point::new(LEFT, ty)],
                stroke: black.clone(),
                arrow: ArrowHead::None,
                dashed: false,
            },
        ));
        doc.elements.push(text(
            format!("tick:y:{i}:label"),
            Point::new(8.0, ty - FONT * 0.65),
            tick_label(yv),
        ));
    }
    if y0 < 0.0 && y1 > 0.0 {
        doc.elements.push(Item::new(
            "axis:zero",
            Shape::Line {
                points: vec![Point::new(LEFT, py(0.0)), Point::new(LEFT + plot_w, py(0.0))],
                stroke: gray.clone(),
                arrow: ArrowHead::None,
                dashed: true,
            },
        ));
    }
    doc.elements.push(text(
        "label:x".into(),
        Point::new(LEFT + plot_w / 2.0, HEIGHT - 22.0),
        spec.x_label.clone(),
    ));
    if !spec.y_label.is_empty() {
        doc.elements
            .push(text("label:y".into(), Point::new(8.0, 2.0), spec.y_label.clone()));
    }

    for (si, s) in data.series.iter().enumerate() {
        let color = Color::named(PALETTE[si % PALETTE.len()]);
        for (gi, seg) in s.segments.iter().enumerate() {
            let id = format!("series:{si}:seg:{gi}");
            if let [(x, y)] = seg.as_slice() {
                doc.elements.push(Item::new(
                    id,
                    Shape::Circle {
                        center: Point::new(px(*x), py(*y)),
                        radius: 2.5,
                        fill: Paint::Solid(color.clone()),
                        label: vec![],
                        font_size: FONT,
                    },
                ));
            } else {
                doc.elements.push(Item::new(
                    id,
                    Shape::Line {
                        points: seg.iter().map(|(x, y)| Point::new(px(*x), py(*y))).collect(),
                        stroke: color.clone(),
                        arrow: ArrowHead::None,
                        dashed: false,
                    },
                ));
            }
        }
        let ly = TOP + 10.0 + si as f64 * 20.0;
        let lx = WIDTH - RIGHT + 15.0;
        doc.elements.push(Item::new(
            format!("legend:{si}"),
            Shape::Line {
                points: vec![Point::new(lx, ly), Point::new(lx + 20.0, ly)],
                stroke: color,
                arrow: ArrowHead::None,
                dashed: false,
            },
        ));
        doc.elements.push(text(
            format!("legend:{si}:label"),
            Point::new(lx + 26.0, ly - FONT * 0.65),
            s.label.clone(),
        ));
    }
    Ok(doc)
}

/// Multiples of a 1, 2, 2.5, or 5 times a power of ten inside `[lo, hi]`,
/// about [`TICKS`] of them.
fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / (TICKS - 1) as f64;
    if !(raw.is_finite() && raw > 0.0) {
        return vec![lo];
    }
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw * (1.0 - 1e-9))
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    // round away float noise such as 0.30000000000000004
    let r = (v * 1e6).round() / 1e6;
    format_number(if r == 0.0 { 0.0 } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> PlotFunction {
        PlotFunction::new("x^2", |x| Ok(x * x))
    }

    #[test]
    fn samples_square_on_integer_grid() {
        let data = sample_plot(&PlotSpec::new(vec![square()], (0.0, 5.0), 6)).unwrap();
        assert_eq!(
            data.series[0].segments,
            vec![vec![
                (0.0, 0.0),
                (1.0, 1.0),
                (2.0, 4.0),
                (3.0, 9.0),
                (4.0, 16.0),
                (5.0, 25.0)
            ]]
        );
        assert!((data.y_range.0 + 1.25).abs() < 1e-12);
        assert!((data.y_range.1 - 26.25).abs() < 1e-12);
    }

    #[test]
    fn constant_range_is_padded() {
        let c = PlotFunction::new("c", |_| Ok(-9.8));
        let data = sample_plot(&PlotSpec::new(vec![c], (0.0, 10.0), 11)).unwrap();
        assert!((data.y_range.0 - (-9.8 - 0.49)).abs() < 1e-12);
        assert!((data.y_range.1 - (-9.8 + 0.49)).abs() < 1e-12);
        let z = PlotFunction::new("z", |_| Ok(0.0));
        let data = sample_plot(&PlotSpec::new(vec![z], (0.0, 1.0), 2)).unwrap();
        assert_eq!(data.y_range, (-1.0, 1.0));
    }

    #[test]
    fn failures_split_segments() {
        let recip = PlotFunction::new("1/x", |x| {
            if x == 0.0 {
                Err(ModelError::MathDomain("division by zero".into()))
            } else {
                Ok(1.0 / x)
            }
        });
        let data = sample_plot(&PlotSpec::new(vec![recip], (-2.0, 2.0), 5)).unwrap();
        assert_eq!(data.series[0].segments.len(), 2);
        let doc = plot(&PlotSpec::new(vec![square()], (0.0, 1.0), 2)).unwrap();
        doc.check().unwrap();
    }

    #[test]
    fn all_invalid_and_bad_specs() {
        let bad = PlotFunction::new("bad", |_| Err(ModelError::Failed("no".into())));
        assert!(matches!(
            sample_plot(&PlotSpec::new(vec![bad], (0.0, 1.0), 3)),
            Err(RenderError::AllPointsInvalid { .. })
        ));
        assert!(sample_plot(&PlotSpec::new(vec![square()], (1.0, 1.0), 3)).is_err());
        assert!(sample_plot(&PlotSpec::new(vec![square()], (0.0, 1.0), 1)).is_err());
    }
}
