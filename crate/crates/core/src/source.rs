//! Source terms `f` of the Robin problem.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::point::Point;

/// Named source functions. All are nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Source {
    /// `f ≡ 0`
    Zero,
    /// `f ≡ 1`, the torsion problem
    One,
    /// `f ≡ c`
    Constant(f64),
    /// `f(x, y) = 1 + max(0, x)`: nonradial and nonnegative
    Nonradial,
    /// `f(x) = exp(-|x|^2)`: radial and radially decreasing
    Gaussian,
}

impl Source {
    pub fn eval(&self, p: Point) -> f64 {
        match *self {
            Source::Zero => 0.0,
            Source::One => 1.0,
            Source::Constant(c) => c,
            Source::Nonradial => 1.0 + p.x.max(0.0),
            Source::Gaussian => (-p.norm_sq()).exp(),
        }
    }

    pub fn as_fn(&self) -> impl Fn(Point) -> f64 + Sync + '_ {
        move |p| self.eval(p)
    }

    pub fn is_radial(&self) -> bool {
        !matches!(self, Source::Nonradial)
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "zero"),
            Source::One => write!(f, "one"),
            Source::Constant(c) => write!(f, "const:{c}"),
            Source::Nonradial => write!(f, "nonradial"),
            Source::Gaussian => write!(f, "gaussian"),
        }
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(Source::Zero),
            "one" | "1" => Ok(Source::One),
            "nonradial" => Ok(Source::Nonradial),
            "gaussian" | "radial" => Ok(Source::Gaussian),
            other => {
                let value = other
                    .strip_prefix("const:")
                    .ok_or_else(|| Error::Parse(format!("unknown source `{s}`")))?;
                let c: f64 = value
                    .parse()
                    .map_err(|e| Error::Parse(format!("source `{s}`: {e}")))?;
                if !(c >= 0.0 && c.is_finite()) {
                    return Err(Error::Parse(format!("source constant must be >= 0, got {c}")));
                }
                Ok(Source::Constant(c))
            }
        }
    }
}
