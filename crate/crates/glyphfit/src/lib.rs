//! Vector glyph reconstruction through an implicit field of parabolic
//! pseudo-distance curves.
//!
//! The pipeline: parse an SVG outline into normalized quadratic-Bezier
//! contours ([`glyph_ir`]), compute exact signed-distance supervision
//! ([`exact_sdf`]), fit the learnable field against the rasterized target
//! and the SDF samples ([`pseudo_field`], [`fit`]), then clip and merge the
//! fitted primitives back into quadratic-Bezier outlines ([`vectorize`])
//! and score the reconstruction ([`metrics`]).

pub mod exact_sdf;
pub mod fit;
pub mod geom;
pub mod glyph_ir;
pub mod metrics;
pub mod pseudo_field;
pub mod raster;
pub mod roots;
pub mod vectorize;

pub use geom::{Point, Rect};
pub use glyph_ir::{Contour, GlyphOutline, QuadBezier};
pub use pseudo_field::{Field, ParabolicCurve, RenderConfig};
pub use raster::Image;
