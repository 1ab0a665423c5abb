use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];

/// Cubic Hermite segment between two points with prescribed tangents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteSpec {
    pub p0: Vec2,
    pub p1: Vec2,
    /// Tangent at `p0`, in metres per unit parameter.
    pub m0: Vec2,
    /// Tangent at `p1`; its lateral component is zero for every generated action.
    pub m1: Vec2,
}

impl HermiteSpec {
    fn check(t: f64) -> Result<()> {
        if (0.0..=1.0).contains(&t) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfRange(t))
        }
    }

    fn combine(&self, w: [f64; 4]) -> Vec2 {
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            *o = w[0] * self.p0[i] + w[1] * self.m0[i] + w[2] * self.p1[i] + w[3] * self.m1[i];
        }
        out
    }

    /// `p(t) = h00 p0 + h10 m0 + h01 p1 + h11 m1` for `t` in `[0, 1]`.
    pub fn eval(&self, t: f64) -> Result<Vec2> {
        Self::check(t)?;
        let (t2, t3) = (t * t, t * t * t);
        Ok(self.combine([
            2.0 * t3 - 3.0 * t2 + 1.0,
            t3 - 2.0 * t2 + t,
            -2.0 * t3 + 3.0 * t2,
            t3 - t2,
        ]))
    }

    /// First derivative with respect to the curve parameter.
    pub fn derivative(&self, t: f64) -> Result<Vec2> {
        Self::check(t)?;
        let t2 = t * t;
        Ok(self.combine([
            6.0 * t2 - 6.0 * t,
            3.0 * t2 - 4.0 * t + 1.0,
            -6.0 * t2 + 6.0 * t,
            3.0 * t2 - 2.0 * t,
        ]))
    }

    pub fn second_derivative(&self, t: f64) -> Result<Vec2> {
        Self::check(t)?;
        Ok(self.combine([12.0 * t - 6.0, 6.0 * t - 4.0, -12.0 * t + 6.0, 6.0 * t - 2.0]))
    }
}
