//! Linear-size epsilon-nets for points and halfspaces in two and three
//! dimensions.

pub mod error;
pub mod experiments;
pub mod frac;
pub mod envelope;
pub mod hull;
pub mod io;
pub mod geometry;
pub mod mask;
pub mod builder;
pub mod dual;
pub mod oracle;
pub mod perturb;
pub mod pipeline;

pub use builder::{BuildConfig, Family, Mode, NetReport, SubnetMethod};
pub use error::{Error, Result};
pub use frac::Frac;
pub use geometry::{Halfspace, Hyperplane, Point, PointSet, Side, Sign};
pub use mask::PointMask;
pub use oracle::{RangeTrace, Verdict};
