//! Refined algebraic domains in the plane.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geom;
pub mod interval;
pub mod poly;
pub mod roots;
pub mod systems;
pub mod curvegeo;
pub mod domain;
pub mod reeb;
pub mod oracle;
pub mod surgery;
pub mod realize;
pub mod render;
pub mod cli;

pub use error::{Error, Result};
pub use geom::{Axis, Box2, Point};
pub use interval::Interval;
pub use poly::{Poly1, Poly2};
