//! The 1-jet space J^1(S^n) = R x T*S^n with contact form `dz + p.dq`.
//!
//! Points are stored in ambient coordinates: `q` is a unit vector in
//! R^{n+1} and `p` is orthogonal to it. Flat coordinate vectors use the
//! layout `[z, q(n+1), p(n+1)]`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::verifier::{CheckConfig, Report, Sample, DEGENERATE_NORM};
use crate::vecops::{complement_basis, dot, norm, norm_sq, normalized, reject};

const UNIT_TOL: f64 = 1e-12;
const ORTHO_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    q: Vec<f64>,
}

impl SpherePoint {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::Argument("a sphere point needs at least 2 coordinates".into()));
        }
        let defect = (norm_sq(&q) - 1.0).abs();
        if defect > UNIT_TOL {
            return Err(Error::Domain(format!("|q|^2 - 1 = {defect:e}")));
        }
        Ok(Self { q })
    }

    /// Radially project a non-zero vector onto the sphere.
    pub fn normalize(q: &[f64]) -> Result<Self> {
        if q.len() < 2 || norm(q) == 0.0 {
            return Err(Error::Argument("cannot normalize a zero or 1-dimensional vector".into()));
        }
        Ok(Self { q: normalized(q) })
    }

    /// Dimension of the sphere.
    pub fn n(&self) -> usize {
        self.q.len() - 1
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn north(n: usize) -> Self {
        let mut q = vec![0.0; n + 1];
        q[n] = 1.0;
        Self { q }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub z: f64,
    q: SpherePoint,
    p: Vec<f64>,
}

impl JetPoint {
    pub fn new(z: f64, q: SpherePoint, p: Vec<f64>) -> Result<Self> {
        if p.len() != q.q.len() {
            return Err(Error::DimensionMismatch { expected: q.q.len(), got: p.len() });
        }
        let pq = dot(&p, &q.q);
        if pq.abs() > ORTHO_TOL * norm(&p).max(1.0) {
            return Err(Error::Domain(format!("p.q = {pq:e}")));
        }
        Ok(Self { z, q, p })
    }

    /// Normalize `q` and project `p` onto its orthogonal complement.
    pub fn projected(z: f64, q: &[f64], p: &[f64]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch { expected: q.len(), got: p.len() });
        }
        let q = SpherePoint::normalize(q)?;
        let p = reject(p, &q.q);
        Ok(Self { z, q, p })
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn q(&self) -> &[f64] {
        &self.q.q
    }

    pub fn sphere_point(&self) -> &SpherePoint {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.q.q.len());
        v.push(self.z);
        v.extend_from_slice(&self.q.q);
        v.extend_from_slice(&self.p);
        v
    }

    /// Inverse of [`JetPoint::to_vec`], projecting onto the constraints.
    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() < 5 || v.len() % 2 == 0 {
            return Err(Error::Argument(format!("bad jet coordinate length {}", v.len())));
        }
        let m = (v.len() - 1) / 2;
        Self::projected(v[0], &v[1..1 + m], &v[1 + m..])
    }
}

/// A tangent vector `(dz, dq, dp)` at a jet point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSample {
    pub base: JetPoint,
    pub v: Vec<f64>,
}

impl TangentSample {
    pub fn new(base: JetPoint, v: Vec<f64>) -> Result<Self> {
        let m = base.q.q.len();
        if v.len() != 1 + 2 * m {
            return Err(Error::DimensionMismatch { expected: 1 + 2 * m, got: v.len() });
        }
        let dq = &v[1..1 + m];
        let dp = &v[1 + m..];
        let a = dot(dq, base.q());
        let b = dot(dp, base.q()) + dot(base.p(), dq);
        if a.abs() > TANGENT_TOL || b.abs() > TANGENT_TOL {
            return Err(Error::Domain(format!("not tangent to T*S^n: dq.q = {a:e}, d(p.q) = {b:e}")));
        }
        Ok(Self { base, v })
    }
}

/// `dz + p.dq` evaluated on `v` at `pt`.
pub fn contact_form_j1(pt: &JetPoint, v: &TangentSample) -> Result<f64> {
    if v.base.q.q.len() != pt.q.q.len() {
        return Err(Error::DimensionMismatch { expected: pt.q.q.len(), got: v.base.q.q.len() });
    }
    if v.base != *pt {
        return Err(Error::Argument("tangent sample is based at a different point".into()));
    }
    let m = pt.q.q.len();
    Ok(v.v[0] + dot(pt.p(), &v.v[1..1 + m]))
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type DomainFn = dyn Fn(&[f64]) -> bool + Send + Sync;

/// A smooth function on (a region of) S^n with its ambient gradient.
#[derive(Clone)]
pub struct ScalarField {
    pub name: String,
    n: usize,
    value: Arc<ValueFn>,
    gradient: Arc<GradFn>,
    domain: Arc<DomainFn>,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField").field("name", &self.name).field("n", &self.n).finish()
    }
}

impl ScalarField {
    pub fn new<V, G>(name: &str, n: usize, value: V, gradient: G) -> Self
    where
        V: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Self {
            name: name.to_string(),
            n,
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            domain: Arc::new(|_| true),
        }
    }

    pub fn with_domain<D>(mut self, domain: D) -> Self
    where
        D: Fn(&[f64]) -> bool + Send + Sync + 'static,
    {
        self.domain = Arc::new(domain);
        self
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(&format!("const({c})"), n, move |_| c, move |_| vec![0.0; n + 1])
    }

    /// `q -> q_i`, zero-based index.
    pub fn coordinate(n: usize, i: usize) -> Self {
        Self::new(&format!("q{}", i + 1), n, move |q| q[i], move |_| {
            let mut g = vec![0.0; n + 1];
            g[i] = 1.0;
            g
        })
    }

    /// `q -> q_i q_j`, zero-based indices.
    pub fn product(n: usize, i: usize, j: usize) -> Self {
        Self::new(&format!("q{}*q{}", i + 1, j + 1), n, move |q| q[i] * q[j], move |q| {
            let mut g = vec![0.0; n + 1];
            g[i] += q[j];
            g[j] += q[i];
            g
        })
    }

    /// The same value function with a gradient perturbed by `delta` in
    /// component `i`. Used as a negative control.
    pub fn corrupted(&self, i: usize, delta: f64) -> Self {
        let g = self.gradient.clone();
        Self {
            name: format!("{}+corrupt", self.name),
            n: self.n,
            value: self.value.clone(),
            gradient: Arc::new(move |q| {
                let mut v = g(q);
                v[i] += delta;
                v
            }),
            domain: self.domain.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, q: &[f64]) -> f64 {
        (self.value)(q)
    }

    pub fn gradient(&self, q: &[f64]) -> Vec<f64> {
        (self.gradient)(q)
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        (self.domain)(q)
    }

    /// Worst relative disagreement between the analytic gradient and central
    /// differences of the value, over the points of `grid` in the domain.
    pub fn gradient_check(&self, grid: &[Vec<f64>], h: f64) -> f64 {
        grid.par_iter()
            .filter(|q| self.contains(q))
            .map(|q| {
                let g = self.gradient(q);
                let scale = norm(&g).max(1.0);
                (0..q.len())
                    .map(|i| {
                        let mut a = q.clone();
                        let mut b = q.clone();
                        a[i] += h;
                        b[i] -= h;
                        let fd = (self.value(&a) - self.value(&b)) / (2.0 * h);
                        (fd - g[i]).abs() / scale
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

/// The 1-jet `(f(q), q, -df + (df.q) q)`.
pub fn jet_lift(f: &ScalarField, q: &SpherePoint) -> Result<JetPoint> {
    if q.q.len() != f.n + 1 {
        return Err(Error::DimensionMismatch { expected: f.n + 1, got: q.q.len() });
    }
    if !f.contains(&q.q) {
        return Err(Error::Domain(format!("{} is not defined at {:?}", f.name, q.q)));
    }
    let df = f.gradient(&q.q);
    let p: Vec<f64> = df.iter().map(|d| -d).collect();
    Ok(JetPoint { z: f.value(&q.q), q: q.clone(), p: reject(&p, &q.q) })
}

/// Lifts of great circles through each grid point in `n` orthogonal
/// directions are differentiated and fed to `dz + p.dq`.
pub fn verify_jet_lift_legendrian(f: &ScalarField, grid: &[SpherePoint], cfg: &CheckConfig) -> Report {
    let h = cfg.fd_step;
    let samples: Vec<Vec<Sample>> = grid
        .par_iter()
        .map(|q| {
            if !f.contains(&q.q) {
                return vec![Sample::Excluded];
            }
            let Ok(base) = jet_lift(f, q) else {
                return vec![Sample::Excluded];
            };
            complement_basis(&q.q)
                .into_iter()
                .map(|e| {
                    let along = |s: f64| -> Option<JetPoint> {
                        let c: Vec<f64> = q.q.iter().zip(&e).map(|(a, b)| s.cos() * a + s.sin() * b).collect();
                        let c = SpherePoint::normalize(&c).ok()?;
                        if !f.contains(&c.q) {
                            return None;
                        }
                        jet_lift(f, &c).ok()
                    };
                    let (Some(a), Some(b)) = (along(h), along(-h)) else {
                        return Sample::Excluded;
                    };
                    let v: Vec<f64> =
                        a.to_vec().iter().zip(b.to_vec()).map(|(x, y)| (x - y) / (2.0 * h)).collect();
                    let nv = norm(&v);
                    if nv < DEGENERATE_NORM {
                        return Sample::Excluded;
                    }
                    let m = q.q.len();
                    let form = v[0] + dot(base.p(), &v[1..1 + m]);
                    Sample::Residual(form.abs() / nv, q.q.clone())
                })
                .collect()
        })
        .collect();
    Report::from_samples(
        &format!("jet lift of {} is Legendrian", f.name),
        "lift of a function is tangent to ker(dz + p dq)",
        cfg.tol,
        samples.into_iter().flatten().collect(),
    )
}

/// The ten test functions used by the jet-lift suite in dimension `n`.
pub fn standard_fields(n: usize) -> Vec<ScalarField> {
    let last = n;
    vec![
        ScalarField::constant(n, 0.0),
        ScalarField::constant(n, 1.5),
        ScalarField::constant(n, -2.0),
        ScalarField::coordinate(n, 0),
        ScalarField::coordinate(n, last),
        ScalarField::coordinate(n, n.min(1)),
        ScalarField::product(n, 0, last),
        ScalarField::product(n, 0, 0),
        ScalarField::product(n, last, last),
        ScalarField::product(n, 0, n.min(1)),
    ]
}
