//! Decomposable losses `l(a, b)` with `a` the encoded label and `b` the
//! prediction, plus their first and second derivatives in `b`.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// `1/2 (a - b)^2` with labels in {0, 1}.
    Squared,
    /// `log(1 + exp(-ab))` with labels in {-1, +1}.
    Logistic,
    /// `max(0, 1 - ab)^2` with labels in {-1, +1}.
    L2Hinge,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Squared, LossKind::Logistic, LossKind::L2Hinge];

    pub fn tag(self) -> &'static str {
        match self {
            LossKind::Squared => "squared",
            LossKind::Logistic => "logistic",
            LossKind::L2Hinge => "l2hinge",
        }
    }

    /// Maps a stored 0/1 label to the encoding this loss expects.
    #[inline]
    pub fn encode_label(self, y01: f64) -> f64 {
        match self {
            LossKind::Squared => y01,
            LossKind::Logistic | LossKind::L2Hinge => 2.0 * y01 - 1.0,
        }
    }

    /// Natural decision threshold on this loss's output scale.
    pub fn default_threshold(self) -> f64 {
        match self {
            LossKind::Squared => 0.5,
            LossKind::Logistic | LossKind::L2Hinge => 0.0,
        }
    }

    #[inline]
    pub fn value(self, a: f64, b: f64) -> f64 {
        match self {
            LossKind::Squared => 0.5 * (a - b) * (a - b),
            LossKind::Logistic => softplus(-a * b),
            LossKind::L2Hinge => {
                let m = (1.0 - a * b).max(0.0);
                m * m
            }
        }
    }

    /// First derivative with respect to the prediction `b`.
    #[inline]
    pub fn grad(self, a: f64, b: f64) -> f64 {
        match self {
            LossKind::Squared => b - a,
            // d/db log(1 + e^{-ab}) = -a / (1 + e^{ab})
            LossKind::Logistic => -a * sigmoid(-a * b),
            LossKind::L2Hinge => -2.0 * a * (1.0 - a * b).max(0.0),
        }
    }

    /// Second derivative with respect to `b`; never negative.
    ///
    /// For the L2-hinge loss this is the generalized second derivative
    /// `2 a^2 [ab < 1]`, zero at the kink itself.
    #[inline]
    pub fn curv(self, a: f64, b: f64) -> f64 {
        match self {
            LossKind::Squared => 1.0,
            LossKind::Logistic => {
                let z = a * b;
                a * a * sigmoid(z) * sigmoid(-z)
            }
            LossKind::L2Hinge => {
                if a * b < 1.0 {
                    2.0 * a * a
                } else {
                    0.0
                }
            }
        }
    }
}

/// `log(1 + e^x)` without overflow for large `|x|`.
#[inline]
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "squared" => Ok(LossKind::Squared),
            "logistic" => Ok(LossKind::Logistic),
            "l2hinge" => Ok(LossKind::L2Hinge),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss '{other}', expected squared, logistic or l2hinge"
            ))),
        }
    }
}
