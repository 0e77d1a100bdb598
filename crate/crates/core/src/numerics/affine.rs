use crate::error::{Error, Result};
use crate::scalar::Real;

const MIN_ABS_DET: f64 = 1e-8;

/// 2×3 matrix taking output coordinates `(x, y, 1)` to input coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTransform2D<T> {
    pub matrix: [[T; 3]; 2],
}

impl<T: Real> AffineTransform2D<T> {
    pub fn new(matrix: [[T; 3]; 2]) -> Self {
        Self { matrix }
    }

    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::new([[o, z, z], [z, o, z]])
    }

    pub fn translation(tx: T, ty: T) -> Self {
        let (o, z) = (T::one(), T::zero());
        Self::new([[o, z, tx], [z, o, ty]])
    }

    /// Linear part `[[a, b], [c, d]]` acting about `center`, followed by a
    /// translation: `p ↦ center + L (p − center) + t`.
    pub fn about_center(linear: [[T; 2]; 2], center: (T, T), t: (T, T)) -> Self {
        let [[a, b], [c, d]] = linear;
        let (cx, cy) = center;
        let tx = cx - (a * cx + b * cy) + t.0;
        let ty = cy - (c * cx + d * cy) + t.1;
        Self::new([[a, b, tx], [c, d, ty]])
    }

    pub fn det(&self) -> T {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_invertible(&self) -> bool {
        self.det().widen().abs() > MIN_ABS_DET
    }

    #[inline]
    pub fn apply(&self, x: T, y: T) -> (T, T) {
        let m = &self.matrix;
        (
            m[0][0] * x + m[0][1] * y + m[0][2],
            m[1][0] * x + m[1][1] * y + m[1][2],
        )
    }

    pub fn invert(&self) -> Result<Self> {
        let det = self.det();
        if det.widen().abs() <= MIN_ABS_DET {
            return Err(Error::DegenerateTransform { det: det.widen() });
        }
        let [[a, b, tx], [c, d, ty]] = self.matrix;
        let ia = d / det;
        let ib = -b / det;
        let ic = -c / det;
        let id = a / det;
        Ok(Self::new([
            [ia, ib, -(ia * tx + ib * ty)],
            [ic, id, -(ic * tx + id * ty)],
        ]))
    }

    /// `compose(a, b)` applies `b` first, then `a`.
    pub fn compose(a: &Self, b: &Self) -> Self {
        let [[a00, a01, a02], [a10, a11, a12]] = a.matrix;
        let [[b00, b01, b02], [b10, b11, b12]] = b.matrix;
        Self::new([
            [
                a00 * b00 + a01 * b10,
                a00 * b01 + a01 * b11,
                a00 * b02 + a01 * b12 + a02,
            ],
            [
                a10 * b00 + a11 * b10,
                a10 * b01 + a11 * b11,
                a10 * b02 + a11 * b12 + a12,
            ],
        ])
    }

    pub fn cast<U: Real>(&self) -> AffineTransform2D<U> {
        let m = self.matrix.map(|row| row.map(|v| U::narrow(v.widen())));
        AffineTransform2D::new(m)
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for r in 0..2 {
            for c in 0..3 {
                d = d.max((self.matrix[r][c].widen() - other.matrix[r][c].widen()).abs());
            }
        }
        d
    }
}
