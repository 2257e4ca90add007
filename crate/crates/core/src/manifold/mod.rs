//! Differential-geometric primitives for the four supported geometries.
//!
//! Points and tangent vectors are stored in ambient coordinates:
//! `Euclidean(n)` in R^n, `Sphere(n)` and `Hyperbolic(n)` in R^{n+1}
//! (unit sphere resp. upper hyperboloid), and `Spd(n)` as a dense
//! row-major n-by-n symmetric matrix. All operations are pure functions
//! of immutable inputs.

mod hyperbolic;
mod sphere;
pub(crate) mod spd;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GeoError, Result};

const POINT_TOL: f64 = 1e-10;
const SPD_SYM_TOL: f64 = 1e-12;

/// One of the four supported geometries; the parameter is the manifold dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    Euclidean(usize),
    Sphere(usize),
    Hyperbolic(usize),
    Spd(usize),
}

/// Dimension, curvature bounds and injectivity radius of a manifold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldDescriptor {
    pub dimension: usize,
    pub curvature_lower: f64,
    pub curvature_upper: f64,
    /// `f64::INFINITY` when the exponential map is globally invertible.
    pub injectivity_radius: f64,
}

/// A point on a manifold, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    pub manifold: Manifold,
    pub coords: Vec<f64>,
}

/// A tangent vector attached to a base point, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: ManifoldPoint,
    pub coords: Vec<f64>,
}

impl ManifoldPoint {
    /// Build a point and validate the manifold constraint.
    pub fn new(manifold: Manifold, coords: Vec<f64>) -> Result<Self> {
        manifold.check_point(&coords)?;
        Ok(ManifoldPoint { manifold, coords })
    }

    /// Build a point without validation; callers guarantee the invariant.
    pub(crate) fn new_unchecked(manifold: Manifold, coords: Vec<f64>) -> Self {
        ManifoldPoint { manifold, coords }
    }
}

impl TangentVector {
    pub fn new(base: ManifoldPoint, coords: Vec<f64>) -> Result<Self> {
        base.manifold.check_tangent(&base.coords, &coords)?;
        Ok(TangentVector { base, coords })
    }

    pub fn zero(base: ManifoldPoint) -> Self {
        let n = base.coords.len();
        TangentVector { base, coords: vec![0.0; n] }
    }

    /// Metric norm, i.e. `sqrt(inner(base, self, self))`.
    pub fn norm(&self) -> f64 {
        self.base
            .manifold
            .inner(&self.base, self, self)
            .expect("tangent vector has a consistent base")
            .max(0.0)
            .sqrt()
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            coords: self.coords.iter().map(|c| s * c).collect(),
        }
    }

    /// Linear combination `a*self + b*other` in the common tangent space.
    pub fn combine(&self, a: f64, other: &TangentVector, b: f64) -> Result<TangentVector> {
        if self.base != other.base {
            return Err(GeoError::ContractViolation(
                "tangent combination requires a common base point".into(),
            ));
        }
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(u, v)| a * u + b * v)
            .collect();
        Ok(TangentVector { base: self.base.clone(), coords })
    }

    pub fn sub(&self, other: &TangentVector) -> Result<TangentVector> {
        self.combine(1.0, other, -1.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minkowski form `-x0*y0 + sum_i xi*yi`.
pub(crate) fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    dot(&a[1..], &b[1..]) - a[0] * b[0]
}

impl Manifold {
    pub fn dimension(&self) -> usize {
        match *self {
            Manifold::Euclidean(n) | Manifold::Sphere(n) | Manifold::Hyperbolic(n) => n,
            Manifold::Spd(n) => n * (n + 1) / 2,
        }
    }

    /// Length of the ambient coordinate vector.
    pub fn ambient_len(&self) -> usize {
        match *self {
            Manifold::Euclidean(n) => n,
            Manifold::Sphere(n) | Manifold::Hyperbolic(n) => n + 1,
            Manifold::Spd(n) => n * n,
        }
    }

    pub fn descriptor(&self) -> ManifoldDescriptor {
        let (lo, hi) = self.curvature_bounds();
        ManifoldDescriptor {
            dimension: self.dimension(),
            curvature_lower: lo,
            curvature_upper: hi,
            injectivity_radius: self.injectivity_radius(),
        }
    }

    /// Sectional curvature bounds (lower, upper).
    pub fn curvature_bounds(&self) -> (f64, f64) {
        match self {
            Manifold::Euclidean(_) => (0.0, 0.0),
            Manifold::Sphere(_) => (1.0, 1.0),
            Manifold::Hyperbolic(_) => (-1.0, -1.0),
            Manifold::Spd(_) => (-0.5, 0.0),
        }
    }

    /// Magnitude bound K with |curvature| <= K.
    pub fn curvature_magnitude(&self) -> f64 {
        let (lo, hi) = self.curvature_bounds();
        lo.abs().max(hi.abs())
    }

    pub fn injectivity_radius(&self) -> f64 {
        match self {
            Manifold::Sphere(_) => std::f64::consts::PI,
            _ => f64::INFINITY,
        }
    }

    /// Validate the point invariant for this geometry.
    pub fn check_point(&self, coords: &[f64]) -> Result<()> {
        if coords.len() != self.ambient_len() {
            return Err(GeoError::ContractViolation(format!(
                "expected {} ambient coordinates, got {}",
                self.ambient_len(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(GeoError::Numerical("non-finite point coordinates".into()));
        }
        match *self {
            Manifold::Euclidean(_) => Ok(()),
            Manifold::Sphere(_) => {
                let norm = dot(coords, coords).sqrt();
                if (norm - 1.0).abs() > POINT_TOL {
                    return Err(GeoError::ContractViolation(format!(
                        "sphere point has norm {norm}, expected 1"
                    )));
                }
                Ok(())
            }
            Manifold::Hyperbolic(_) => {
                let q = minkowski_dot(coords, coords);
                if (q + 1.0).abs() > POINT_TOL || coords[0] <= 0.0 {
                    return Err(GeoError::ContractViolation(format!(
                        "hyperboloid constraint violated: <x,x>_M = {q}, x0 = {}",
                        coords[0]
                    )));
                }
                Ok(())
            }
            Manifold::Spd(n) => spd::check_point(coords, n, SPD_SYM_TOL),
        }
    }

    /// Validate the tangent-space invariant at `x`.
    pub fn check_tangent(&self, x: &[f64], v: &[f64]) -> Result<()> {
        if v.len() != self.ambient_len() {
            return Err(GeoError::ContractViolation(
                "tangent vector has wrong ambient length".into(),
            ));
        }
        match *self {
            Manifold::Euclidean(_) => Ok(()),
            Manifold::Sphere(_) => {
                let d = dot(x, v);
                if d.abs() > POINT_TOL * (1.0 + dot(v, v).sqrt()) {
                    return Err(GeoError::ContractViolation(format!(
                        "sphere tangent not orthogonal to base: <x,v> = {d}"
                    )));
                }
                Ok(())
            }
            Manifold::Hyperbolic(_) => {
                let d = minkowski_dot(x, v);
                let scale = 1.0 + minkowski_dot(v, v).abs().sqrt();
                if d.abs() > POINT_TOL * scale {
                    return Err(GeoError::ContractViolation(format!(
                        "hyperboloid tangent not Minkowski-orthogonal: <x,v>_M = {d}"
                    )));
                }
                Ok(())
            }
            Manifold::Spd(n) => spd::check_symmetric(v, n, SPD_SYM_TOL),
        }
    }

    fn check_same_point(&self, x: &ManifoldPoint, u: &TangentVector) -> Result<()> {
        if u.base.manifold != *self || x.manifold != *self {
            return Err(GeoError::ContractViolation("manifold mismatch".into()));
        }
        if u.base.coords != x.coords {
            return Err(GeoError::ContractViolation(
                "tangent vector based at a different point".into(),
            ));
        }
        Ok(())
    }

    /// Riemannian inner product of two tangent vectors at `x`.
    pub fn inner(&self, x: &ManifoldPoint, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        self.check_same_point(x, u)?;
        self.check_same_point(x, v)?;
        Ok(match *self {
            Manifold::Euclidean(_) => dot(&u.coords, &v.coords),
            Manifold::Sphere(_) => dot(&u.coords, &v.coords),
            Manifold::Hyperbolic(_) => minkowski_dot(&u.coords, &v.coords),
            Manifold::Spd(n) => spd::inner(&x.coords, &u.coords, &v.coords, n),
        })
    }

    /// Re-project ambient coordinates onto the constraint set.
    ///
    /// Applied after every exp/transport so that long optimizer runs do not
    /// accumulate floating-point constraint drift.
    pub fn project_point(&self, mut coords: Vec<f64>) -> Vec<f64> {
        match *self {
            Manifold::Euclidean(_) => coords,
            Manifold::Sphere(_) => {
                let norm = dot(&coords, &coords).sqrt();
                if norm > 0.0 {
                    for c in &mut coords {
                        *c /= norm;
                    }
                }
                coords
            }
            Manifold::Hyperbolic(_) => {
                let spatial: f64 = coords[1..].iter().map(|c| c * c).sum();
                coords[0] = (1.0 + spatial).sqrt();
                coords
            }
            Manifold::Spd(n) => spd::symmetrize(coords, n),
        }
    }

    /// Orthogonal projection of an ambient vector onto the tangent space at `x`.
    pub fn project_tangent(&self, x: &ManifoldPoint, mut coords: Vec<f64>) -> Vec<f64> {
        match *self {
            Manifold::Euclidean(_) => coords,
            Manifold::Sphere(_) => {
                let d = dot(&x.coords, &coords);
                for (c, xc) in coords.iter_mut().zip(&x.coords) {
                    *c -= d * xc;
                }
                coords
            }
            Manifold::Hyperbolic(_) => {
                let d = minkowski_dot(&x.coords, &coords);
                // <x,x>_M = -1, so adding d*x removes the component along x.
                for (c, xc) in coords.iter_mut().zip(&x.coords) {
                    *c += d * xc;
                }
                coords
            }
            Manifold::Spd(n) => spd::symmetrize(coords, n),
        }
    }

    /// Exponential map: follow the geodesic with initial velocity `v` for unit time.
    pub fn exp(&self, x: &ManifoldPoint, v: &TangentVector) -> Result<ManifoldPoint> {
        self.check_same_point(x, v)?;
        let coords = match *self {
            Manifold::Euclidean(_) => {
                x.coords.iter().zip(&v.coords).map(|(a, b)| a + b).collect()
            }
            Manifold::Sphere(_) => sphere::exp(&x.coords, &v.coords),
            Manifold::Hyperbolic(_) => hyperbolic::exp(&x.coords, &v.coords),
            Manifold::Spd(n) => spd::exp(&x.coords, &v.coords, n)?,
        };
        Ok(ManifoldPoint::new_unchecked(*self, self.project_point(coords)))
    }

    /// Inverse exponential map: the tangent vector at `x` pointing to `y`.
    pub fn log(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<TangentVector> {
        if x.manifold != *self || y.manifold != *self {
            return Err(GeoError::ContractViolation("manifold mismatch in log".into()));
        }
        let coords = match *self {
            Manifold::Euclidean(_) => {
                y.coords.iter().zip(&x.coords).map(|(a, b)| a - b).collect()
            }
            Manifold::Sphere(_) => sphere::log(&x.coords, &y.coords)?,
            Manifold::Hyperbolic(_) => hyperbolic::log(&x.coords, &y.coords),
            Manifold::Spd(n) => spd::log(&x.coords, &y.coords, n)?,
        };
        Ok(TangentVector { base: x.clone(), coords })
    }

    /// Parallel transport of `u` (based at `x`) along the geodesic to `y`.
    pub fn transport(
        &self,
        x: &ManifoldPoint,
        y: &ManifoldPoint,
        u: &TangentVector,
    ) -> Result<TangentVector> {
        self.check_same_point(x, u)?;
        if y.manifold != *self {
            return Err(GeoError::ContractViolation("manifold mismatch in transport".into()));
        }
        let coords = match *self {
            Manifold::Euclidean(_) => u.coords.clone(),
            Manifold::Sphere(_) => sphere::transport(&x.coords, &y.coords, &u.coords)?,
            Manifold::Hyperbolic(_) => hyperbolic::transport(&x.coords, &y.coords, &u.coords),
            Manifold::Spd(n) => spd::transport(&x.coords, &y.coords, &u.coords, n)?,
        };
        Ok(TangentVector {
            base: y.clone(),
            coords: self.project_tangent(y, coords),
        })
    }

    /// Geodesic distance.
    pub fn dist(&self, x: &ManifoldPoint, y: &ManifoldPoint) -> Result<f64> {
        if x.manifold != *self || y.manifold != *self {
            return Err(GeoError::ContractViolation("manifold mismatch in dist".into()));
        }
        Ok(match *self {
            Manifold::Euclidean(_) => x
                .coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Manifold::Sphere(_) => sphere::dist(&x.coords, &y.coords),
            Manifold::Hyperbolic(_) => hyperbolic::dist(&x.coords, &y.coords),
            Manifold::Spd(n) => spd::dist(&x.coords, &y.coords, n)?,
        })
    }

    /// Sample a point; deterministic for a fixed generator state.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> ManifoldPoint {
        let coords: Vec<f64> = match *self {
            Manifold::Euclidean(n) => (0..n).map(|_| rng.sample(StandardNormal)).collect(),
            Manifold::Sphere(n) => (0..=n).map(|_| rng.sample(StandardNormal)).collect(),
            Manifold::Hyperbolic(n) => {
                // Spatial Gaussian; project_point solves for the x0 coordinate.
                let mut c = vec![0.0; n + 1];
                for ci in c.iter_mut().skip(1) {
                    *ci = rng.sample::<f64, _>(StandardNormal) * 0.5;
                }
                c
            }
            Manifold::Spd(n) => {
                let mut s = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..=i {
                        let g: f64 = rng.sample::<f64, _>(StandardNormal) * 0.4;
                        s[i * n + j] = g;
                        s[j * n + i] = g;
                    }
                }
                return ManifoldPoint::new_unchecked(
                    *self,
                    spd::expm(&s, n).expect("matrix exponential of a symmetric matrix"),
                );
            }
        };
        ManifoldPoint::new_unchecked(*self, self.project_point(coords))
    }

    /// Sample a tangent vector at `x` with metric norm at most `norm_bound`.
    pub fn random_tangent<R: Rng>(
        &self,
        x: &ManifoldPoint,
        rng: &mut R,
        norm_bound: f64,
    ) -> TangentVector {
        let n = self.ambient_len();
        let ambient: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let coords = self.project_tangent(x, ambient);
        let v = TangentVector { base: x.clone(), coords };
        let norm = v.norm();
        // Uniform radius in [0, norm_bound]; degenerate directions map to zero.
        let target: f64 = rng.gen::<f64>() * norm_bound;
        if norm < 1e-300 || norm_bound == 0.0 {
            TangentVector::zero(x.clone())
        } else {
            v.scale(target / norm)
        }
    }
}
