//! Floating point abstraction for coordinate-side math.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Real scalar usable for atomic coordinates: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Number of snap units per grid unit applied before rounding to the grid.
    ///
    /// Scaled offsets are first rounded to `1 / SNAP_PER_UNIT` so that values that
    /// are a decimal half in exact arithmetic (e.g. `12.5`) are not split by
    /// floating point noise from a translation.
    const SNAP_PER_UNIT: i64;

    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const SNAP_PER_UNIT: i64 = 1_000_000;
}

impl Scalar for f32 {
    const SNAP_PER_UNIT: i64 = 1_000;
}

/// Three-component vector in ångström units.
pub type Vec3<T> = [T; 3];
