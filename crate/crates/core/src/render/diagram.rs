//! Renderer-independent diagram IR.

use std::collections::HashSet;

use super::RenderError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A named CSS color or `#rrggbb`, stored lowercase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Color(String);

impl Color {
    pub fn parse(s: &str) -> Result<Color, RenderError> {
        let lower = s.trim().to_ascii_lowercase();
        let hex = lower.len() == 7 && lower.starts_with('#') && lower[1..].chars().all(|c| c.is_ascii_hexdigit());
        if hex || CSS_COLOR_NAMES.binary_search(&lower.as_str()).is_ok() {
            Ok(Color(lower))
        } else {
            Err(RenderError::InvalidColor(s.to_string()))
        }
    }

    /// For literals known to be valid.
    pub(crate) fn named(s: &str) -> Color {
        Color::parse(s).expect("built-in color name")
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Paint {
    Solid(Color),
    /// Vertical two-stop gradient from white to the color.
    Gradient(Color),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowHead {
    None,
    /// Open arrow, used for references.
    Open,
    /// Hollow triangle, used for inheritance.
    Hollow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Box {
        origin: Point,
        width: f64,
        height: f64,
        corner_radius: f64,
        fill: Paint,
        lines: Vec<String>,
        font_size: f64,
    },
    Circle {
        center: Point,
        radius: f64,
        fill: Paint,
        label: Vec<String>,
        font_size: f64,
    },
    Line {
        points: Vec<Point>,
        stroke: Color,
        arrow: ArrowHead,
        dashed: bool,
    },
    TextBlock {
        origin: Point,
        lines: Vec<String>,
        font_size: f64,
        color: Color,
    },
}

impl Shape {
    fn points(&self) -> Vec<Point> {
        match self {
            Shape::Box {
                origin, width, height, ..
            } => vec![*origin, Point::new(origin.x + width, origin.y + height)],
            Shape::Circle { center, radius, .. } => vec![
                Point::new(center.x - radius, center.y - radius),
                Point::new(center.x + radius, center.y + radius),
            ],
            Shape::Line { points, .. } => points.clone(),
            Shape::TextBlock { origin, .. } => vec![*origin],
        }
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let pts = self.points();
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: String,
    pub shape: Shape,
}

impl Item {
    pub fn new(id: impl Into<String>, shape: Shape) -> Item {
        Item { id: id.into(), shape }
    }
}

/// Data-space rectangle mapped onto the canvas, y pointing up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldBounds {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramDoc {
    pub width: f64,
    pub height: f64,
    /// When set, `elements` are in world coordinates.
    pub world: Option<WorldBounds>,
    pub elements: Vec<Item>,
    /// Always in pixel coordinates, drawn above `elements`.
    pub overlay: Vec<Item>,
}

impl DiagramDoc {
    pub fn new(width: f64, height: f64) -> DiagramDoc {
        DiagramDoc {
            width,
            height,
            world: None,
            elements: Vec::new(),
            overlay: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.overlay.is_empty()
    }

    pub fn find(&self, id: &str) -> Option<&Item> {
        self.elements.iter().chain(&self.overlay).find(|item| item.id == id)
    }

    /// Checks finite coordinates, unique ids, and line lengths.
    pub fn check(&self) -> Result<(), RenderError> {
        let bad = |m: String| Err(RenderError::InvalidDocument(m));
        if !(self.width.is_finite() && self.height.is_finite()) {
            return bad("non-finite canvas size".into());
        }
        if let Some(w) = &self.world {
            if !(w.min.is_finite() && w.max.is_finite()) {
                return bad("non-finite world bounds".into());
            }
        }
        let mut seen = HashSet::new();
        for item in self.elements.iter().chain(&self.overlay) {
            if !seen.insert(item.id.as_str()) {
                return bad(format!("duplicate element id `{}`", item.id));
            }
            if !item.shape.points().iter().all(Point::is_finite) {
                return bad(format!("non-finite coordinate in `{}`", item.id));
            }
            match &item.shape {
                Shape::Line { points, .. } if points.len() < 2 => {
                    return bad(format!("line `{}` has fewer than 2 points", item.id));
                }
                Shape::Box { width, height, .. } if !(width.is_finite() && height.is_finite()) => {
                    return bad(format!("non-finite size in `{}`", item.id));
                }
                Shape::Circle { radius, .. } if !radius.is_finite() => {
                    return bad(format!("non-finite radius in `{}`", item.id));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// CSS named colors, sorted for binary search.
const CSS_COLOR_NAMES: &[&str] = &[
    "aliceblue",
    "antiquewhite",
    "aqua",
    "aquamarine",
    "azure",
    "beige",
    "bisque",
    "black",
    "blanchedalmond",
    "blue",
    "blueviolet",
    "brown",
    "burlywood",
    "cadetblue",
    "chartreuse",
    "chocolate",
    "coral",
    "cornflowerblue",
    "cornsilk",
    "crimson",
    "cyan",
    "darkblue",
    "darkcyan",
    "darkgoldenrod",
    "darkgray",
    "darkgreen",
    "darkgrey",
    "darkkhaki",
    "darkmagenta",
    "darkolivegreen",
    "darkorange",
    "darkorchid",
    "darkred",
    "darksalmon",
    "darkseagreen",
    "darkslateblue",
    "darkslategray",
    "darkslategrey",
    "darkturquoise",
    "darkviolet",
    "deeppink",
    "deepskyblue",
    "dimgray",
    "dimgrey",
    "dodgerblue",
    "firebrick",
    "floralwhite",
    "forestgreen",
    "fuchsia",
    "gainsboro",
    "ghostwhite",
    "gold",
    "goldenrod",
    "gray",
    "green",
    "greenyellow",
    "grey",
    "honeydew",
    "hotpink",
    "indianred",
    "indigo",
    "ivory",
    "khaki",
    "lavender",
    "lavenderblush",
    "lawngreen",
    "lemonchiffon",
    "lightblue",
    "lightcoral",
    "lightcyan",
    "lightgoldenrodyellow",
    "lightgray",
    "lightgreen",
    "lightgrey",
    "lightpink",
    "lightsalmon",
    "lightseagreen",
    "lightskyblue",
    "lightslategray",
    "lightslategrey",
    "lightsteelblue",
    "lightyellow",
    "lime",
    "limegreen",
    "linen",
    "magenta",
    "maroon",
    "mediumaquamarine",
    "mediumblue",
    "mediumorchid",
    "mediumpurple",
    "mediumseagreen",
    "mediumslateblue",
    "mediumspringgreen",
    "mediumturquoise",
    "mediumvioletred",
    "midnightblue",
    "mintcream",
    "mistyrose",
    "moccasin",
    "navajowhite",
    "navy",
    "oldlace",
    "olive",
    "olivedrab",
    "orange",
    "orangered",
    "orchid",
    "palegoldenrod",
    "palegreen",
    "paleturquoise",
    "palevioletred",
    "papayawhip",
    "peachpuff",
    "peru",
    "pink",
    "plum",
    "powderblue",
    "purple",
    "rebeccapurple",
    "red",
    "rosybrown",
    "royalblue",
    "saddlebrown",
    "salmon",
    "sandybrown",
    "seagreen",
    "seashell",
    "sienna",
    "silver",
    "skyblue",
    "slateblue",
    "slategray",
    "slategrey",
    "snow",
    "springgreen",
    "steelblue",
    "tan",
    "teal",
    "thistle",
    "tomato",
    "turquoise",
    "violet",
    "wheat",
    "white",
    "whitesmoke",
    "yellow",
    "yellowgreen",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_table_is_sorted() {
        assert!(CSS_COLOR_NAMES.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn color_parsing() {
        assert_eq!(Color::parse("Maroon").unwrap().as_str(), "maroon");
        assert_eq!(Color::parse("#A0b0C0").unwrap().as_str(), "#a0b0c0");
        assert!(Color::parse("#abc").is_err());
        assert!(Color::parse("blurple").is_err());
    }

    #[test]
    fn document_checks() {
        let mut doc = DiagramDoc::new(100.0, 100.0);
        doc.elements.push(Item::new(
            "a",
            Shape::Line {
                points: vec![Point::new(0.0, 0.0)],
                stroke: Color::named("black"),
                arrow: ArrowHead::None,
                dashed: false,
            },
        ));
        assert!(doc.check().is_err());
        doc.elements[0].shape = Shape::Line {
            points: vec![Point::new(0.0, 0.0), Point::new(1.0, f64::NAN)],
            stroke: Color::named("black"),
            arrow: ArrowHead::None,
            dashed: false,
        };
        assert!(doc.check().is_err());
        doc.elements[0].shape = Shape::TextBlock {
            origin: Point::new(1.0, 1.0),
            lines: vec![],
            font_size: 12.0,
            color: Color::named("black"),
        };
        assert!(doc.check().is_ok());
        doc.elements.push(doc.elements[0].clone());
        assert!(doc.check().is_err());
    }
}
