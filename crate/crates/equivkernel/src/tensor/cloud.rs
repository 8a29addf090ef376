use crate::error::{Error, Result};
use crate::so3::Rotation;
use nalgebra::{Matrix3xX, Vector3};

/// A point cloud: a `3 x n` matrix whose columns are points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    m: Matrix3xX<f64>,
}

impl PointCloud {
    pub fn new(m: Matrix3xX<f64>) -> Result<Self> {
        if m.ncols() < 1 {
            return Err(Error::TooFewPoints { n: m.ncols(), min: 1 });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCloud);
        }
        Ok(PointCloud { m })
    }

    pub fn from_points(points: &[Vector3<f64>]) -> Result<Self> {
        let m = Matrix3xX::from_columns(points);
        PointCloud::new(m)
    }

    pub fn n(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &Matrix3xX<f64> {
        &self.m
    }

    pub fn point(&self, j: usize) -> Vector3<f64> {
        self.m.column(j).into_owned()
    }

    pub fn points(&self) -> impl Iterator<Item = Vector3<f64>> + '_ {
        self.m.column_iter().map(|c| c.into_owned())
    }

    /// Column mean.
    pub fn mean(&self) -> Vector3<f64> {
        let mut acc = Vector3::zeros();
        for c in self.m.column_iter() {
            acc += c;
        }
        acc / self.n() as f64
    }

    pub fn rotate(&self, r: &Rotation) -> PointCloud {
        PointCloud { m: r.matrix() * &self.m }
    }

    pub fn translate(&self, t: &Vector3<f64>) -> PointCloud {
        let mut m = self.m.clone();
        for mut c in m.column_iter_mut() {
            c += t;
        }
        PointCloud { m }
    }

    /// Reindexes columns: output column `j` is input column `src[j]`.
    pub fn permute(&self, src: &[usize]) -> PointCloud {
        assert_eq!(src.len(), self.n());
        let cols: Vec<_> = src.iter().map(|&s| self.m.column(s).into_owned()).collect();
        PointCloud { m: Matrix3xX::from_columns(&cols) }
    }
}

/// Subtracts the column mean from every point. Idempotent, and invariant to
/// translating the input.
pub fn centralize(xc: &PointCloud) -> PointCloud {
    let mean = xc.mean();
    xc.translate(&(-mean))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centralize_subtracts_the_mean() {
        let xc = PointCloud::from_points(&[
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(3.0, 0.0, 0.0),
        ])
        .unwrap();
        let c = centralize(&xc);
        assert_eq!(c.point(0), Vector3::new(-1.0, 0.0, 0.0));
        assert_eq!(c.point(1), Vector3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn centralize_is_idempotent() {
        let xc = PointCloud::from_points(&[
            Vector3::new(0.3, -1.0, 2.0),
            Vector3::new(-0.3, 1.0, -2.0),
            Vector3::new(0.9, 0.1, 0.4),
        ])
        .unwrap();
        let once = centralize(&xc);
        let twice = centralize(&once);
        assert!((once.matrix() - twice.matrix()).abs().max() < 1e-15);
    }

    #[test]
    fn centralize_kills_translations() {
        let xc = PointCloud::from_points(&[
            Vector3::new(0.3, -1.0, 2.0),
            Vector3::new(-0.5, 1.2, -2.0),
        ])
        .unwrap();
        let t = Vector3::new(10.0, -3.0, 0.25);
        let lhs = centralize(&xc.translate(&t));
        let rhs = centralize(&xc);
        assert!((lhs.matrix() - rhs.matrix()).abs().max() < 1e-14);
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(PointCloud::new(Matrix3xX::zeros(0)).is_err());
        let mut m = Matrix3xX::zeros(2);
        m[(0, 0)] = f64::NAN;
        assert!(matches!(PointCloud::new(m), Err(Error::NonFiniteCloud)));
    }
}
