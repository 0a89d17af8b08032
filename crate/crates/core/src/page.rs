//! Coordinates on the page `D(T*S^n)` near the Lagrangian disk
//! `{q_{n+1} > 0, p = 0}`, the boundary function `b`, the neighbourhood
//! families of `L` and `dL`, the binding-collar contact form and the
//! gluing map between the two relative open books.

use crate::error::{Error, Result};
use crate::jetspace::JetPoint;
use crate::smooth::{smoothstep, smoothstep_d1};
use crate::vecops::{dot, norm_sq};
use crate::verifier::{check_pullback, CheckConfig, Curve, JetForm, OneForm, PullbackMode, Report};

#[derive(Debug, Clone, PartialEq)]
pub struct PagePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PagePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        Ok(Self { x, y })
    }

    pub fn swapped(&self) -> Self {
        Self { x: self.y.clone(), y: self.x.clone() }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.extend_from_slice(&self.y);
        v
    }
}

/// `x_i = q_{n+1} p_i`, `y_i = q_i / q_{n+1}` for `i <= n`.
pub fn page_chart(pt: &JetPoint) -> Result<(f64, PagePoint)> {
    let q = pt.q();
    let n = pt.n();
    let qn = q[n];
    if qn <= 0.0 {
        return Err(Error::Domain(format!("q_(n+1) = {qn} is not positive")));
    }
    let x = pt.p()[..n].iter().map(|p| qn * p).collect();
    let y = q[..n].iter().map(|q| q / qn).collect();
    Ok((pt.z, PagePoint { x, y }))
}

pub fn page_chart_inv(z: f64, pt: &PagePoint) -> Result<JetPoint> {
    let n = pt.x.len();
    let r = (1.0 + norm_sq(&pt.y)).sqrt();
    let qn = 1.0 / r;
    let mut q: Vec<f64> = pt.y.iter().map(|y| y * qn).collect();
    q.push(qn);
    let mut p: Vec<f64> = pt.x.iter().map(|x| x / qn).collect();
    let pq = dot(&p, &q[..n]);
    p.push(-pq / qn);
    JetPoint::projected(z, &q, &p)
}

/// Chart on flat jet coordinates `[z, q, p] -> [x, y]`, optionally with the
/// `q_{n+1}` factor in `x` dropped (a deliberately wrong chart).
pub fn page_chart_flat(v: &[f64], corrupt: bool) -> Vec<f64> {
    let m = (v.len() - 1) / 2;
    let n = m - 1;
    let (q, p) = (&v[1..1 + m], &v[1 + m..]);
    let qn = q[n];
    let mut out: Vec<f64> = p[..n].iter().map(|p| if corrupt { *p } else { qn * p }).collect();
    out.extend(q[..n].iter().map(|q| q / qn));
    out
}

/// `sum x_i dy_i` on flat `[x, y]` coordinates.
#[derive(Debug, Clone, Copy)]
pub struct PageForm {
    pub n: usize,
}

impl OneForm for PageForm {
    fn eval(&self, point: &[f64], v: &[f64]) -> f64 {
        dot(&point[..self.n], &v[self.n..2 * self.n])
    }
}

/// A curve in T*S^n (as flat jet coordinates with `z = 0`) through `base`
/// with initial velocity roughly `(dq, dp)`, kept on the constraint set.
pub fn cotangent_curve(base: &JetPoint, dq: Vec<f64>, dp: Vec<f64>) -> Curve {
    let q0 = base.q().to_vec();
    let p0 = base.p().to_vec();
    Box::new(move |s: f64| {
        let q: Vec<f64> = q0.iter().zip(&dq).map(|(a, b)| a + s * b).collect();
        let p: Vec<f64> = p0.iter().zip(&dp).map(|(a, b)| a + s * b).collect();
        let j = JetPoint::projected(0.0, &q, &p).expect("curve stays near the sphere");
        j.to_vec()
    })
}

/// Compares `chart^*(sum x dy)` with `sum p dq` on sampled tangent vectors.
pub fn verify_chart_symplecto(points: &[Vec<Curve>], n: usize, corrupt: bool, cfg: &CheckConfig) -> Report {
    let map = move |v: &[f64]| page_chart_flat(v, corrupt);
    let mut r = check_pullback(
        if corrupt { "page chart (corrupted) preserves p dq" } else { "page chart preserves p dq" },
        points,
        &map,
        &JetForm { n },
        &PageForm { n },
        PullbackMode::Strict,
        cfg,
    );
    r.note = "the page chart pulls back sum x dy to sum p dq".into();
    r
}

/// `b(x, y) = (|x|^2 + (x.y)^2)(|y|^2 + 1)`; equals `|p|^2` under the chart.
pub fn b_fn(pt: &PagePoint) -> f64 {
    let xy = dot(&pt.x, &pt.y);
    (norm_sq(&pt.x) + xy * xy) * (norm_sq(&pt.y) + 1.0)
}

/// Cutoff equal to 1 where `max(b(x,y), b(y,x)) <= inner` and 0 where it is
/// at least `outer`; in particular 0 on the corner `b(x,y) = b(y,x) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffRho {
    pub inner: f64,
    pub outer: f64,
}

impl Default for CutoffRho {
    fn default() -> Self {
        Self { inner: 0.25, outer: 1.0 }
    }
}

impl CutoffRho {
    pub fn eval(&self, pt: &PagePoint) -> f64 {
        let m = b_fn(pt).max(b_fn(&pt.swapped()));
        1.0 - smoothstep((m - self.inner) / (self.outer - self.inner))
    }

    /// Derivative along the ray `s -> (s x, s y)` at `s = 1`; never positive.
    pub fn radial_derivative(&self, pt: &PagePoint, h: f64) -> f64 {
        let at = |s: f64| {
            let p = PagePoint { x: pt.x.iter().map(|v| s * v).collect(), y: pt.y.iter().map(|v| s * v).collect() };
            self.eval(&p)
        };
        (at(1.0 + h) - at(1.0 - h)) / (2.0 * h)
    }

}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbourhood {
    L,
    BoundaryL,
}

/// Signed residual of membership in `nu_t(L)` or `nu_t(dL)`; `<= 0` is inside.
///
/// `nu_t(L) = {b(x,y) <= 1, b(y,x) <= b(x,y) + rho t}` and
/// `nu_t(dL) = {b(x,y) <= 1, b(x,y) <= b(y,x) + rho t}`.
pub fn nu_t(pt: &PagePoint, t: f64, rho: &CutoffRho, which: Neighbourhood) -> Result<f64> {
    if !(t > 0.0 && t < 0.5) {
        return Err(Error::Argument(format!("t = {t} outside (0, 0.5)")));
    }
    let bxy = b_fn(pt);
    let byx = b_fn(&pt.swapped());
    let r = rho.eval(pt);
    let c = match which {
        Neighbourhood::L => byx - bxy - r * t,
        Neighbourhood::BoundaryL => bxy - byx - r * t,
    };
    Ok((bxy - 1.0).max(c))
}

/// `beta(t) = sin(2 pi t) / 2`.
pub fn beta(t: f64) -> f64 {
    0.5 * (2.0 * std::f64::consts::PI * t).sin()
}

/// `(x, y, t, s) -> (-y, x, t + 1/2 mod 1, -s)`.
pub fn glue_f(x: &[f64], y: &[f64], t: f64, s: f64) -> (Vec<f64>, Vec<f64>, f64, f64) {
    let t2 = (t + 0.5).rem_euclid(1.0);
    (y.iter().map(|v| -v).collect(), x.to_vec(), t2, -s)
}

/// Radial profiles of the binding-collar form `e^s h1(r) sum x dy + h2(r) dt`.
/// Here `h1 = 2 - S(r)` and `h2 = r^2`, so both equal 1 at `r = 1` and
/// `h1 h2' - h2 h1' > 0` for `r > 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BindingProfiles;

impl BindingProfiles {
    pub fn h1(&self, r: f64) -> f64 {
        2.0 - smoothstep(r)
    }
    pub fn h1_d1(&self, r: f64) -> f64 {
        -smoothstep_d1(r)
    }
    pub fn h2(&self, r: f64) -> f64 {
        r * r
    }
    pub fn h2_d1(&self, r: f64) -> f64 {
        2.0 * r
    }
    pub fn contact_quantity(&self, r: f64) -> f64 {
        self.h1(r) * self.h2_d1(r) - self.h2(r) * self.h1_d1(r)
    }
}

/// Binding point `(x, y, r, t)` and tangent `(dx, dy, dr, dt)`.
pub fn binding_form(x: &[f64], v: &[f64], profiles: &BindingProfiles, s: f64) -> Result<f64> {
    if x.len() != v.len() || x.len() < 4 || x.len() % 2 != 0 {
        return Err(Error::DimensionMismatch { expected: x.len(), got: v.len() });
    }
    let n = (x.len() - 2) / 2;
    let r = x[2 * n];
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::Argument(format!("r = {r} outside [0, 1]")));
    }
    let xdy = dot(&x[..n], &v[n..2 * n]);
    Ok(s.exp() * profiles.h1(r) * xdy + profiles.h2(r) * v[2 * n + 1])
}

/// `alpha ^ d alpha` on the three coordinate vectors of a 3-dimensional
/// chart, with `d alpha` from central differences of the coefficients.
pub fn alpha_wedge_dalpha_3d<F>(coef: F, at: &[f64; 3], h: f64) -> f64
where
    F: Fn(&[f64; 3]) -> [f64; 3],
{
    let a = coef(at);
    let mut d = [[0.0; 3]; 3];
    for (j, row) in d.iter_mut().enumerate() {
        let mut p = *at;
        let mut m = *at;
        p[j] += h;
        m[j] -= h;
        let (cp, cm) = (coef(&p), coef(&m));
        for k in 0..3 {
            row[k] = (cp[k] - cm[k]) / (2.0 * h);
        }
    }
    // d alpha(e_j, e_k) = d_j a_k - d_k a_j
    let da = |j: usize, k: usize| d[j][k] - d[k][j];
    a[0] * da(1, 2) + a[1] * da(2, 0) + a[2] * da(0, 1)
}

/// The n = 1 binding collar in coordinates `(y, r, t)`, with `x` solving
/// `b(x, y) = 1` on the positive branch.
pub fn binding_coefficients_n1(profiles: BindingProfiles, s: f64) -> impl Fn(&[f64; 3]) -> [f64; 3] {
    move |c: &[f64; 3]| {
        let (y, r) = (c[0], c[1]);
        let x = 1.0 / (1.0 + y * y);
        [s.exp() * profiles.h1(r) * x, 0.0, profiles.h2(r)]
    }
}
