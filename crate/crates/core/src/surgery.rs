//! The flat Weinstein model in R^{2n+2} with symplectic form `dz ^ dw`,
//! Liouville field `X = 2z d_z - w d_w`, and the hypersurfaces
//! `S_-1 = {|w| = 1}`, `S_1 = {f(|w|^2) = g(|z|^2)}` and the cylinder
//! `S_1^st = {|z|^2 = 1 + eps}`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::jetspace::JetPoint;
use crate::smooth::{smoothstep, smoothstep_d1};
use crate::vecops::{dot, norm_sq, scale};

/// Off-surface tolerance for the inverse charts.
pub const SURFACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryPoint {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

impl SurgeryPoint {
    pub fn new(z: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if z.len() != w.len() {
            return Err(Error::DimensionMismatch { expected: z.len(), got: w.len() });
        }
        Ok(Self { z, w })
    }

    pub fn n(&self) -> usize {
        self.z.len() - 1
    }

    /// Flat layout `[z, w]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.z.clone();
        v.extend_from_slice(&self.w);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::Argument(format!("odd flat length {}", v.len())));
        }
        let (z, w) = v.split_at(v.len() / 2);
        Ok(Self { z: z.to_vec(), w: w.to_vec() })
    }
}

/// The shape functions `f` and `g` cutting out `S_1`.
///
/// `f` is 1 up to `1 - eps` and `x + eps` from `1 - eps/2` on; `g` is the
/// identity up to 1 and `1 + eps` from `1 + eps` on. Both transitions are
/// quintic smoothstep blends, so the profiles are C^2 and monotone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePair {
    pub eps: f64,
}

impl ProfilePair {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Argument(format!("eps = {eps} outside (0, 0.5)")));
        }
        Ok(Self { eps })
    }

    fn f_window(&self, x: f64) -> f64 {
        (x - (1.0 - self.eps)) / (0.5 * self.eps)
    }

    pub fn f(&self, x: f64) -> f64 {
        let u = self.f_window(x);
        if u <= 0.0 {
            1.0
        } else if u >= 1.0 {
            x + self.eps
        } else {
            1.0 + smoothstep(u) * (x + self.eps - 1.0)
        }
    }

    pub fn f_d1(&self, x: f64) -> f64 {
        let u = self.f_window(x);
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            smoothstep_d1(u) / (0.5 * self.eps) * (x + self.eps - 1.0) + smoothstep(u)
        }
    }

    pub fn g(&self, x: f64) -> f64 {
        let u = (x - 1.0) / self.eps;
        if u <= 0.0 {
            x
        } else if u >= 1.0 {
            1.0 + self.eps
        } else {
            let s = smoothstep(u);
            (1.0 - s) * x + s * (1.0 + self.eps)
        }
    }

    pub fn g_d1(&self, x: f64) -> f64 {
        let u = (x - 1.0) / self.eps;
        if u <= 0.0 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            1.0 - smoothstep(u) + smoothstep_d1(u) / self.eps * (1.0 + self.eps - x)
        }
    }
}

/// `X = (2z, -w)`.
pub fn liouville_x(pt: &SurgeryPoint) -> Vec<f64> {
    let mut v = scale(&pt.z, 2.0);
    v.extend(pt.w.iter().map(|w| -w));
    v
}

/// `iota_X (dz ^ dw) = sum(2 z_i dw_i + w_i dz_i)` evaluated at a flat point.
pub fn liouville_form(point: &[f64], v: &[f64]) -> f64 {
    crate::verifier::OneForm::eval(&crate::verifier::SurgeryForm { n: point.len() / 2 - 1 }, point, v)
}

/// `dz ^ dw` on flat vectors.
pub fn omega(u: &[f64], v: &[f64]) -> f64 {
    let m = u.len() / 2;
    (0..m).map(|i| u[i] * v[m + i] - u[m + i] * v[i]).sum()
}

/// `|d(iota_X omega)(u, v) - omega(u, v)|` with the exterior derivative
/// taken by central differences of the coefficient functions.
pub fn liouville_defect(point: &[f64], u: &[f64], v: &[f64], h: f64) -> f64 {
    let shift = |d: &[f64], s: f64| -> Vec<f64> { point.iter().zip(d).map(|(p, x)| p + s * x).collect() };
    let deriv = |along: &[f64], of: &[f64]| {
        (liouville_form(&shift(along, h), of) - liouville_form(&shift(along, -h), of)) / (2.0 * h)
    };
    (deriv(u, v) - deriv(v, u) - omega(u, v)).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    SMinus,
    SPlus,
    SStd,
    Intersection,
}

/// Signed residual of `pt` against the given hypersurface (unsigned for
/// the intersection locus).
pub fn membership(pt: &SurgeryPoint, surface: Surface, profiles: &ProfilePair) -> f64 {
    let w2 = norm_sq(&pt.w);
    let z2 = norm_sq(&pt.z);
    match surface {
        Surface::SMinus => w2 - 1.0,
        Surface::SPlus => profiles.f(w2) - profiles.g(z2),
        Surface::SStd => z2 - (1.0 + profiles.eps),
        Surface::Intersection => (w2 - 1.0).abs().max((1.0 + profiles.eps - z2).max(0.0)),
    }
}

/// `(z, q, p) -> (z q + p, q)`, a strict contactomorphism onto `S_-1`.
pub fn psi_w(pt: &JetPoint) -> SurgeryPoint {
    let z: Vec<f64> = pt.q().iter().zip(pt.p()).map(|(q, p)| pt.z * q + p).collect();
    SurgeryPoint { z, w: pt.q().to_vec() }
}

pub fn psi_w_inv(pt: &SurgeryPoint) -> Result<JetPoint> {
    let r = norm_sq(&pt.w) - 1.0;
    if r.abs() > SURFACE_TOL {
        return Err(Error::Domain(format!("point is off S_-1 by {r:e}")));
    }
    let zw = dot(&pt.z, &pt.w);
    let p: Vec<f64> = pt.z.iter().zip(&pt.w).map(|(z, w)| z - zw * w).collect();
    JetPoint::projected(zw, &pt.w, &p)
}

/// The chart of the cylinder `S_1^st` onto J^1(S^n).
pub fn psi(pt: &SurgeryPoint, eps: f64) -> Result<JetPoint> {
    let c = 1.0 + eps;
    let r = norm_sq(&pt.z) - c;
    if r.abs() > SURFACE_TOL * c {
        return Err(Error::Domain(format!("point is off the cylinder by {r:e}")));
    }
    let sc = c.sqrt();
    let zw = dot(&pt.z, &pt.w);
    let q: Vec<f64> = pt.z.iter().map(|z| -z / sc).collect();
    let p: Vec<f64> = pt.w.iter().zip(&pt.z).map(|(w, z)| w - zw * z / c).collect();
    JetPoint::projected(2.0 * zw / sc, &q, &p)
}

pub fn psi_inv(pt: &JetPoint, eps: f64) -> SurgeryPoint {
    let sc = (1.0 + eps).sqrt();
    let z = pt.q().iter().map(|q| -sc * q).collect();
    let w = pt.p().iter().zip(pt.q()).map(|(p, q)| p - 0.5 * pt.z * q).collect();
    SurgeryPoint { z, w }
}

/// `psi_inv` on flat jet coordinates, without constraint projection.
pub fn psi_inv_flat(v: &[f64], eps: f64) -> Vec<f64> {
    let m = (v.len() - 1) / 2;
    let sc = (1.0 + eps).sqrt();
    let (q, p) = (&v[1..1 + m], &v[1 + m..]);
    let mut out: Vec<f64> = q.iter().map(|q| -sc * q).collect();
    out.extend(p.iter().zip(q).map(|(p, q)| p - 0.5 * v[0] * q));
    out
}

/// `psi_w_inv` on flat surgery coordinates, without the surface check.
pub fn psi_w_inv_flat(v: &[f64]) -> Vec<f64> {
    let m = v.len() / 2;
    let (z, w) = v.split_at(m);
    let zw = dot(z, w);
    let mut out = vec![zw];
    out.extend_from_slice(w);
    out.extend(z.iter().zip(w).map(|(z, w)| z - zw * w));
    out
}

/// `psi_w` on flat jet coordinates.
pub fn psi_w_flat(v: &[f64]) -> Vec<f64> {
    let m = (v.len() - 1) / 2;
    let (q, p) = (&v[1..1 + m], &v[1 + m..]);
    let mut out: Vec<f64> = q.iter().zip(p).map(|(q, p)| v[0] * q + p).collect();
    out.extend_from_slice(q);
    out
}

/// `psi` on flat surgery coordinates, without the surface check.
pub fn psi_flat(v: &[f64], eps: f64) -> Vec<f64> {
    let m = v.len() / 2;
    let (z, w) = v.split_at(m);
    let c = 1.0 + eps;
    let sc = c.sqrt();
    let zw = dot(z, w);
    let mut out = vec![2.0 * zw / sc];
    out.extend(z.iter().map(|z| -z / sc));
    out.extend(w.iter().zip(z).map(|(w, z)| w - zw * z / c));
    out
}

/// The linear homotopy from the cylinder to `S_1`:
/// `f_t = (1-t)(1+eps) + t f`, `g_t = (1-t) x + t g`, restricted to
/// `|z|^2 <= 1 + eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S1tFamily {
    pub profiles: ProfilePair,
    pub t: f64,
}

impl S1tFamily {
    pub fn new(profiles: ProfilePair, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Argument(format!("t = {t} outside [0, 1]")));
        }
        Ok(Self { profiles, t })
    }

    pub fn f_t(&self, x: f64) -> f64 {
        (1.0 - self.t) * (1.0 + self.profiles.eps) + self.t * self.profiles.f(x)
    }

    pub fn f_t_d1(&self, x: f64) -> f64 {
        self.t * self.profiles.f_d1(x)
    }

    pub fn g_t(&self, x: f64) -> f64 {
        (1.0 - self.t) * x + self.t * self.profiles.g(x)
    }

    pub fn g_t_d1(&self, x: f64) -> f64 {
        (1.0 - self.t) + self.t * self.profiles.g_d1(x)
    }

    /// `f_t(|w|^2) - g_t(|z|^2)`; `None` outside `|z|^2 <= 1 + eps`.
    pub fn residual(&self, pt: &SurgeryPoint) -> Option<f64> {
        let z2 = norm_sq(&pt.z);
        if z2 > 1.0 + self.profiles.eps + SURFACE_TOL {
            return None;
        }
        Some(self.f_t(norm_sq(&pt.w)) - self.g_t(z2))
    }

    pub fn gradient(&self, pt: &SurgeryPoint) -> Vec<f64> {
        let gz = -2.0 * self.g_t_d1(norm_sq(&pt.z));
        let fw = 2.0 * self.f_t_d1(norm_sq(&pt.w));
        let mut v: Vec<f64> = pt.z.iter().map(|z| gz * z).collect();
        v.extend(pt.w.iter().map(|w| fw * w));
        v
    }

    /// `X . grad(residual)`; non-vanishing means the level set is transverse to X.
    pub fn transversality(&self, pt: &SurgeryPoint) -> f64 {
        dot(&liouville_x(pt), &self.gradient(pt))
    }

    /// Draw a point on the surface: pick `|z|^2 = a`, then solve
    /// `f_t(|w|^2) = g_t(a)` by bisection. Returns `None` if `a` is not
    /// realised on this slice.
    pub fn sample<R: Rng>(&self, rng: &mut R, n: usize) -> Option<SurgeryPoint> {
        let c = 1.0 + self.profiles.eps;
        let zdir = crate::grids::random_unit_vec(rng, n + 1);
        let wdir = crate::grids::random_unit_vec(rng, n + 1);
        let (a, big_w) = if self.t == 0.0 {
            (c, rng.gen_range(0.0..2.0))
        } else {
            let a = rng.gen_range(0.0..=c);
            let target = self.g_t(a);
            let lo0 = 1.0 - self.profiles.eps;
            if target < self.f_t(lo0) {
                return None;
            }
            let (mut lo, mut hi) = (lo0, target + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if self.f_t(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (a, 0.5 * (lo + hi))
        };
        Some(SurgeryPoint { z: scale(&zdir, a.sqrt()), w: scale(&wdir, big_w.sqrt()) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::rng;
    use crate::jetspace::SpherePoint;

    fn e(m: usize, i: usize) -> Vec<f64> {
        crate::vecops::basis(m, i)
    }

    #[test]
    fn liouville_examples() {
        let pt = SurgeryPoint::new(vec![0.0, 0.0], e(2, 0)).unwrap();
        assert_eq!(liouville_x(&pt), vec![0.0, 0.0, -1.0, 0.0]);
        let pt = SurgeryPoint::new(e(2, 0), vec![0.0, 0.0]).unwrap();
        assert_eq!(liouville_x(&pt), vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn liouville_form_differential_is_omega() {
        let mut r = rng(3);
        for _ in 0..10 {
            let p = crate::grids::random_gaussian_vec(&mut r, 6);
            let u = crate::grids::random_gaussian_vec(&mut r, 6);
            let v = crate::grids::random_gaussian_vec(&mut r, 6);
            assert!(liouville_defect(&p, &u, &v, 1e-4) < 1e-8);
        }
    }

    #[test]
    fn membership_examples() {
        let pr = ProfilePair::new(0.1).unwrap();
        let on = SurgeryPoint::new(vec![1.1f64.sqrt(), 0.0], e(2, 1)).unwrap();
        assert_eq!(membership(&on, Surface::SMinus, &pr), 0.0);
        assert!(membership(&on, Surface::SPlus, &pr).abs() < 1e-15);
        let origin = SurgeryPoint::new(vec![0.0; 2], vec![0.0; 2]).unwrap();
        assert_eq!(membership(&origin, Surface::SPlus, &pr), 1.0);
    }

    #[test]
    fn profile_shape() {
        let pr = ProfilePair::new(0.1).unwrap();
        assert_eq!(pr.f(0.5), 1.0);
        assert!((pr.f(0.97) - 1.07).abs() < 1e-15);
        assert_eq!(pr.g(0.7), 0.7);
        assert_eq!(pr.g(1.3), 1.1);
        for k in 0..=10_000 {
            let x = 2.0 * k as f64 / 10_000.0;
            if x >= 0.9 {
                assert!(pr.f_d1(x) >= 0.0);
            }
            if x > 0.0 && x < 1.1 {
                assert!(pr.g_d1(x) > 0.0);
            }
        }
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let pr = ProfilePair::new(0.2).unwrap();
        let h = 1e-6;
        for k in 0..400 {
            let x = 0.5 + k as f64 / 400.0;
            assert!(((pr.f(x + h) - pr.f(x - h)) / (2.0 * h) - pr.f_d1(x)).abs() < 1e-6);
            assert!(((pr.g(x + h) - pr.g(x - h)) / (2.0 * h) - pr.g_d1(x)).abs() < 1e-6);
        }
    }

    #[test]
    fn psi_w_examples() {
        let j = JetPoint::new(0.0, SpherePoint::new(e(2, 0)).unwrap(), vec![0.0; 2]).unwrap();
        assert_eq!(psi_w(&j), SurgeryPoint::new(vec![0.0; 2], e(2, 0)).unwrap());
        let j = JetPoint::new(1.0, SpherePoint::new(e(2, 0)).unwrap(), vec![0.0; 2]).unwrap();
        assert_eq!(psi_w(&j), SurgeryPoint::new(e(2, 0), e(2, 0)).unwrap());
        let back = psi_w_inv(&SurgeryPoint::new(vec![1.0, 1.0], e(2, 0)).unwrap()).unwrap();
        assert_eq!((back.z, back.q(), back.p()), (1.0, &[1.0, 0.0][..], &[0.0, 1.0][..]));
        assert!(psi_w_inv(&SurgeryPoint::new(vec![0.0; 2], vec![1.1, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn psi_examples() {
        let eps = 0.1;
        let sc = 1.1f64.sqrt();
        // z orthogonal to w.
        let pt = SurgeryPoint::new(vec![sc, 0.0], vec![0.0, 0.7]).unwrap();
        let j = psi(&pt, eps).unwrap();
        assert_eq!(j.z, 0.0);
        assert!((j.q()[0] + 1.0).abs() < 1e-15);
        assert_eq!(j.p(), &[0.0, 0.7]);
        // C_eps point goes to (2, -q, 0) and back.
        let q = vec![0.6, -0.8];
        let c = SurgeryPoint::new(scale(&q, sc), q.clone()).unwrap();
        let j = psi(&c, eps).unwrap();
        assert!((j.z - 2.0).abs() < 1e-14);
        assert!((j.q()[0] + 0.6).abs() < 1e-14 && (j.q()[1] - 0.8).abs() < 1e-14);
        assert!(j.p().iter().all(|p| p.abs() < 1e-14));
        let back = psi_inv(&j, eps);
        assert!(crate::vecops::dist_inf(&back.to_vec(), &c.to_vec()) < 1e-14);
        let off = SurgeryPoint::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(psi(&off, eps).is_err());
    }

    #[test]
    fn psi_inv_boundary_lands_in_intersection() {
        let pr = ProfilePair::new(0.1).unwrap();
        let mut r = rng(11);
        for _ in 0..200 {
            let z: f64 = r.gen_range(-2.0..2.0);
            let q = SpherePoint::normalize(&crate::grids::random_gaussian_vec(&mut r, 3)).unwrap();
            let dir = crate::vecops::reject(&crate::grids::random_gaussian_vec(&mut r, 3), q.as_slice());
            let p = scale(&crate::vecops::normalized(&dir), (1.0 - z * z / 4.0).sqrt());
            let j = JetPoint::new(z, q, p).unwrap();
            assert!(membership(&psi_inv(&j, 0.1), Surface::Intersection, &pr) < 1e-10);
        }
    }

    #[test]
    fn s1t_endpoints_and_transversality() {
        let pr = ProfilePair::new(0.1).unwrap();
        let s0 = S1tFamily::new(pr, 0.0).unwrap();
        let s1 = S1tFamily::new(pr, 1.0).unwrap();
        let pt = SurgeryPoint::new(vec![0.3, 0.4], vec![0.9, 0.1]).unwrap();
        let z2 = 0.25;
        assert!((s0.residual(&pt).unwrap() - (1.1 - z2)).abs() < 1e-15);
        let direct = pr.f(0.82) - pr.g(z2);
        assert!((s1.residual(&pt).unwrap() - direct).abs() < 1e-15);
        let mut r = rng(5);
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let fam = S1tFamily::new(pr, t).unwrap();
            let mut got = 0;
            while got < 100 {
                if let Some(p) = fam.sample(&mut r, 2) {
                    assert!(fam.residual(&p).unwrap().abs() < 1e-9);
                    assert!(fam.transversality(&p).abs() > 1e-3);
                    got += 1;
                }
            }
        }
    }
}
