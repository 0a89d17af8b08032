//! The isotopy between the join and stabilisation spheres.
//!
//! A sphere `S(t)` is assembled from two disks. The inner disk `D_t` lives in
//! J^1(S^n) through the cylinder chart and is the 1-jet of an explicit
//! function `F_t`; the outer disk is the 1-jet of a function `H_t` of
//! `q_{n+1}` alone. Both meet along `S_1 n S_-1`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jetspace::{JetPoint, ScalarField};
use crate::smooth::{smoothstep, smoothstep_d1};
use crate::surgery::{psi_inv_flat, psi_w_inv_flat};
use crate::vecops::{dot, norm, norm_sq};
use crate::verifier::Sampler;

/// `1 - x^2` without cancellation near `|x| = 1`.
fn one_minus_sq(x: f64) -> f64 {
    ((1.0 - x) * (1.0 + x)).max(0.0)
}

fn sign(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotopyParams {
    pub n: usize,
    pub eps: f64,
    /// Plateau offset at `t = 0`; the offset at `t` is `delta0 (1 - t^2)`.
    pub delta0: f64,
    /// Width in `q_{n+1}` of the blend from the quadratic piece to the plateau.
    pub blend_width: f64,
}

impl IsotopyParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        Self::with_delta(n, eps, eps / 8.0)
    }

    pub fn with_delta(n: usize, eps: f64, delta0: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Argument("dimension must be at least 1".into()));
        }
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Argument(format!("eps = {eps} outside (0, 0.5)")));
        }
        if !(delta0 > 0.0 && delta0 <= eps / 4.0) {
            return Err(Error::Argument(format!("delta0 = {delta0} outside (0, eps/4]")));
        }
        Ok(Self { n, eps, delta0, blend_width: 0.25 })
    }

    pub fn r(&self) -> f64 {
        (1.0 + self.eps).sqrt()
    }
}

fn check_t(t: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::Argument(format!("t = {t} outside [-1, 1]")))
    }
}

/// `eps_t = (eps - 1)|t| + 1`.
pub fn eps_t(t: f64, eps: f64) -> f64 {
    (eps - 1.0) * t.abs() + 1.0
}

/// The boundary constant `K_eps(t)`, the positive root of `K^2 = eps_t^2`.
pub fn k_eps(t: f64, eps: f64) -> f64 {
    eps_t(t, eps)
}

/// The generating function `F_t` on the cap `q_{n+1} >= eps_t`, `t != 0`,
/// with its ambient gradient. `x` is the model-disk coordinate of `q`.
struct FData {
    value: f64,
    grad: Vec<f64>,
}

fn f_t(t: f64, x: &[f64], qn: f64, params: &IsotopyParams) -> FData {
    let n = x.len();
    let s = sign(t);
    let e = eps_t(t, params.eps);
    let a = one_minus_sq(t).sqrt();
    let b = one_minus_sq(e).sqrt();
    let x2 = norm_sq(x);
    // sigma A |q'|^2 / 2 + R_t with A = a / (b e), |q'|^2 = b^2 |x|^2.
    let quad = 2.0 * t - s * a * b / (2.0 * e) * (1.0 - x2);
    let plateau = 2.0 * t - s * params.delta0 * a * a;
    let u = (qn - e) / params.blend_width;
    let w = smoothstep(u);
    let value = (1.0 - w) * quad + w * plateau;
    // d/dq_i of the quadratic piece is sigma A q_i = a x_i / e.
    let mut grad: Vec<f64> = x.iter().map(|xi| (1.0 - w) * a * xi / e).collect();
    grad.push(smoothstep_d1(u) / params.blend_width * (plateau - quad));
    debug_assert_eq!(grad.len(), n + 1);
    FData { value, grad }
}

fn validate_disk_x(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if norm(x) > 1.0 + 1e-12 {
        return Err(Error::Domain(format!("|x| = {} exceeds 1", norm(x))));
    }
    Ok(())
}

/// The disk `D_t` at model coordinate `x`, as flat jet coordinates.
pub fn disk_d_flat(t: f64, x: &[f64], params: &IsotopyParams) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; 3 + 2 * n];
    if t == 0.0 {
        out[1 + n] = 1.0;
        for i in 0..n {
            out[2 + n + i] = -x[i];
        }
        return out;
    }
    let s = sign(t);
    let e = eps_t(t, params.eps);
    let b = one_minus_sq(e).sqrt();
    let bx = b * norm(x);
    let qn = ((1.0 - bx) * (1.0 + bx)).max(0.0).sqrt();
    let mut q: Vec<f64> = x.iter().map(|xi| s * b * xi).collect();
    q.push(qn);
    let f = f_t(t, x, qn, params);
    let dq = dot(&f.grad, &q);
    out[0] = f.value;
    for i in 0..=n {
        out[1 + i] = q[i];
        out[2 + n + i] = -f.grad[i] + dq * q[i];
    }
    out
}

pub fn disk_d(t: f64, x: &[f64], params: &IsotopyParams) -> Result<JetPoint> {
    check_t(t)?;
    validate_disk_x(x, params.n)?;
    JetPoint::from_slice(&disk_d_flat(t, x, params))
}

/// `F_t` as a scalar field on its cap, for `t != 0`.
pub fn f_t_field(t: f64, params: IsotopyParams) -> Result<ScalarField> {
    check_t(t)?;
    if t == 0.0 {
        return Err(Error::Argument("the t = 0 disk is not a 1-jet graph".into()));
    }
    let n = params.n;
    let e = eps_t(t, params.eps);
    let b = one_minus_sq(e).sqrt();
    let s = sign(t);
    let to_x = move |q: &[f64]| -> Vec<f64> { q[..n].iter().map(|qi| s * qi / b).collect() };
    Ok(ScalarField::new(
        &format!("F_t(t={t})"),
        n,
        move |q| f_t(t, &to_x(q), q[n], &params).value,
        move |q| f_t(t, &to_x(q), q[n], &params).grad,
    )
    .with_domain(move |q| q[n] >= e - 1e-12))
}

/// Closed-form boundary of `D_t` at `|x| = 1`.
pub fn boundary_d(t: f64, x: &[f64], eps: f64) -> Result<JetPoint> {
    check_t(t)?;
    if (norm(x) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("boundary point needs |x| = 1".into()));
    }
    let s = sign(t);
    let e = eps_t(t, eps);
    let a = one_minus_sq(t).sqrt();
    let b = one_minus_sq(e).sqrt();
    let mut q: Vec<f64> = x.iter().map(|xi| s * b * xi).collect();
    q.push(e);
    let mut p: Vec<f64> = x.iter().map(|xi| -e * a * xi).collect();
    p.push(s * a * b);
    JetPoint::projected(2.0 * t, &q, &p)
}

/// Closed-form image of `dD_t` under `psi_w^-1 o psi^-1`, one block per sign of `t`.
pub fn pulled_back_boundary(t: f64, x: &[f64], eps: f64) -> Result<JetPoint> {
    check_t(t)?;
    if (norm(x) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("boundary point needs |x| = 1".into()));
    }
    let r = (1.0 + eps).sqrt();
    let e = eps_t(t, eps);
    let a = one_minus_sq(t).sqrt();
    let b = one_minus_sq(e).sqrt();
    let (qc, qn, pc, pn) = if t >= 0.0 {
        let qc = -e * a - t * b;
        let qn = a * b - t * e;
        (qc, qn, r * (-b - t * qc), r * (-e - t * qn))
    } else {
        let qc = -e * a + t * b;
        let qn = -a * b - t * e;
        (qc, qn, r * (b - t * qc), r * (-e - t * qn))
    };
    let mut q: Vec<f64> = x.iter().map(|xi| qc * xi).collect();
    q.push(qn);
    let mut p: Vec<f64> = x.iter().map(|xi| pc * xi).collect();
    p.push(pn);
    JetPoint::projected(t * r, &q, &p)
}

/// `psi_w^-1 o psi^-1` applied to flat jet coordinates.
pub fn pull_back_flat(v: &[f64], eps: f64) -> Vec<f64> {
    psi_w_inv_flat(&psi_inv_flat(v, eps))
}

/// `q_{n+1,t}`: `+` branch for `t >= 0`, `-` branch for `t < 0`.
pub fn q_n1_t(t: f64, eps: f64) -> f64 {
    let e = eps_t(t, eps);
    let ab = (one_minus_sq(t) * one_minus_sq(e)).sqrt();
    if t >= 0.0 {
        ab - t * e
    } else {
        -ab - t * e
    }
}

/// The plotted slope curve `sqrt(1-t^2) / (eps_t sqrt(1-t^2) + |t| sqrt(1-eps_t^2))`.
pub fn slope_h(t: f64, eps: f64) -> f64 {
    let e = eps_t(t, eps);
    let a = one_minus_sq(t).sqrt();
    let b = one_minus_sq(e).sqrt();
    a / (e * a + t.abs() * b)
}

/// The slope of `H_t` at `q_{n+1,t}` that matches `dD_t` exactly: the plotted
/// curve times `sqrt(1 + eps)`.
pub fn exact_boundary_slope(t: f64, eps: f64) -> f64 {
    (1.0 + eps).sqrt() * slope_h(t, eps)
}

/// Closed-form branch of an `H_t` profile.
#[derive(Debug, Clone, Copy, PartialEq)]
enum HBranch {
    /// `H = R` (t = 1).
    Constant,
    /// `H = R cos(phi(s))`, `phi(s) = s + k B(s / theta_0)`, `k >= 0`.
    Winding { k: f64 },
    /// `H = rho(psi) cos(psi)` along `s(psi) = psi + mu K(psi)`.
    Amplitude { mu: f64 },
}

/// Odd cubic with `B(0) = 0`, `B(1) = 1`, `B'(1) = 0`, `B' >= 0` on `[0, 1]`.
fn wind_b(x: f64) -> (f64, f64) {
    ((3.0 * x - x * x * x) / 2.0, 1.5 * (1.0 - x * x))
}

/// `max(cos psi, 0)^4`.
fn c4(psi: f64) -> f64 {
    psi.cos().max(0.0).powi(4)
}

/// `K(psi) = int_0^psi max(cos, 0)^4`.
fn c4_integral(psi: f64) -> f64 {
    let p = psi.min(PI / 2.0);
    3.0 * p / 8.0 + (2.0 * p).sin() / 4.0 + (4.0 * p).sin() / 32.0
}

/// `H_t` as a function of the polar angle `s` from the pole `q = e_{n+1}`,
/// defined on the cap `s <= theta_0`, i.e. `q_{n+1} >= q_{n+1,t}`.
///
/// With `Phi = arccos t` the boundary data `H = t R`, `dH/ds = -R sqrt(1-t^2)`
/// put `(H, dH/ds)` at angle `Phi` on the circle of radius `R` in the phase
/// plane, and `H^2 + (dH/ds)^2 >= R^2` asks the curve to stay outside that
/// circle while it travels to `(H, 0)` at the pole.
///
/// If `Phi >= theta_0` the phase winds at least as fast as `s`:
/// `H = R cos(phi)` with `phi' >= 1`, so `|H| <= R`.
/// Otherwise the radius grows towards the pole, `rho = R exp(mu/4 (C(psi) -
/// C(Phi)))` with `C = max(cos, 0)^4`, `H = rho cos psi`, `dH/ds = -rho sin psi`,
/// and `mu` makes `psi` cover `[0, Phi]` while `s` covers `[0, theta_0]`.
/// Both branches reduce to `R cos s` when `Phi = theta_0`; `t -> 1` tends to
/// the constant `R`.
#[derive(Debug, Clone)]
pub struct HProfile {
    pub t: f64,
    pub r: f64,
    pub q0: f64,
    pub theta0: f64,
    /// `arccos t`.
    pub phase_end: f64,
    branch: HBranch,
}

impl HProfile {
    pub fn build(t: f64, eps: f64) -> Result<Self> {
        check_t(t)?;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::Argument(format!("eps = {eps} outside (0, 0.5)")));
        }
        let r = (1.0 + eps).sqrt();
        let q0 = q_n1_t(t, eps);
        let theta0 = q0.clamp(-1.0, 1.0).acos();
        let phase_end = t.clamp(-1.0, 1.0).acos();
        let gap = phase_end - theta0;
        let branch = if t == 1.0 {
            HBranch::Constant
        } else if gap >= 0.0 {
            HBranch::Winding { k: gap }
        } else {
            HBranch::Amplitude { mu: -gap / c4_integral(phase_end) }
        };
        Ok(Self { t, r, q0, theta0, phase_end, branch })
    }

    /// `psi(s)` on the amplitude branch: Newton on the increasing map
    /// `psi + mu K(psi)`, safeguarded by bisection.
    fn amplitude_phase(&self, s: f64, mu: f64) -> f64 {
        let target = s.clamp(0.0, self.theta0);
        let f = |p: f64| p + mu * c4_integral(p) - target;
        let (mut lo, mut hi) = (0.0, self.phase_end);
        let mut p = self.phase_end * target / self.theta0;
        for _ in 0..200 {
            let v = f(p);
            if v == 0.0 {
                break;
            }
            if v > 0.0 {
                hi = p
            } else {
                lo = p
            }
            let next = p - v / (1.0 + mu * c4(p));
            let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if (next - p).abs() <= 1e-16 * (1.0 + p) {
                p = next;
                break;
            }
            p = next;
        }
        p
    }

    /// `(H, dH/ds)` at polar angle `s` from the pole.
    pub fn eval_s(&self, s: f64) -> (f64, f64) {
        let r = self.r;
        match self.branch {
            HBranch::Constant => (r, 0.0),
            HBranch::Winding { k } => {
                let (b, db) = wind_b(s / self.theta0);
                let phi = s + k * b;
                let dphi = 1.0 + k * db / self.theta0;
                (r * phi.cos(), -r * phi.sin() * dphi)
            }
            HBranch::Amplitude { mu } => {
                let psi = self.amplitude_phase(s, mu);
                let rho = r * (0.25 * mu * (c4(psi) - c4(self.phase_end))).exp();
                (rho * psi.cos(), -rho * psi.sin())
            }
        }
    }

    /// Largest value of `H` on the cap (at the pole).
    pub fn peak(&self) -> f64 {
        self.eval_s(0.0).0
    }

    /// `(H, dH/dtau)` at polar angle `tau = theta_0 - s` from the boundary.
    pub fn eval_tau(&self, tau: f64) -> (f64, f64) {
        let (h, dh) = self.eval_s(self.theta0 - tau);
        (h, -dh)
    }

    /// `(H, dH/dq_{n+1})` at `q_{n+1} = q`.
    pub fn eval_q(&self, q: f64) -> (f64, f64) {
        let q = q.clamp(-1.0, 1.0);
        let s = q.acos();
        let (h, dh) = self.eval_s(s);
        let sin = one_minus_sq(q).sqrt();
        // dH/dq = (dH/ds) / (dq/ds) = -(dH/ds) / sin(s); both vanish at the pole.
        (h, if sin < 1e-300 { 0.0 } else { -dh / sin })
    }

    /// The 1-jet of `H_t` at cap coordinate `m` in the closed unit disk:
    /// `theta = |m| theta_0`, `q = (-sin(theta) m/|m|, cos(theta))`.
    pub fn lift_flat(&self, m: &[f64]) -> Vec<f64> {
        let n = m.len();
        let rm = norm(m);
        let theta = rm * self.theta0;
        let (hv, dh) = self.eval_tau(self.theta0 - theta);
        // sin(theta) / |m| without dividing by zero at the pole.
        let sinc = if rm < 1e-8 { self.theta0 * (1.0 - theta * theta / 6.0) } else { theta.sin() / rm };
        let mut out = Vec::with_capacity(3 + 2 * n);
        out.push(hv);
        out.extend(m.iter().map(|mi| -sinc * mi));
        out.push(theta.cos());
        // p = (dH/dtau / sin theta)(-e_{n+1} + cos(theta) q)
        let unit = if rm > 0.0 { 1.0 / rm } else { 0.0 };
        out.extend(m.iter().map(|mi| -dh * theta.cos() * mi * unit));
        out.push(-dh * theta.sin());
        out
    }

    /// `z^2 + |p|^2` along the lift, i.e. `H^2 + (dH/dtau)^2`.
    pub fn energy(&self, tau: f64) -> f64 {
        let (h, dh) = self.eval_tau(tau);
        h * h + dh * dh
    }

    /// Checks the boundary value, the boundary slope and `H^2 + H_tau^2 >= R^2`
    /// on `samples` points of the cap. Returns the worst violation.
    pub fn validate(&self, samples: usize, tol: f64) -> Result<f64> {
        let (v, d) = self.eval_q(self.q0);
        let t = self.t;
        let eps = self.r * self.r - 1.0;
        let mut worst = (v - t * self.r).abs().max((d - exact_boundary_slope(t, eps)).abs());
        for k in 0..=samples {
            let tau = self.theta0 * k as f64 / samples as f64;
            worst = worst.max(self.r * self.r - self.energy(tau));
        }
        if worst > tol {
            return Err(Error::Construction(format!("H_t(t={t}) violates its constraints by {worst:.3e}")));
        }
        Ok(worst.max(0.0))
    }

    pub fn field(self: &Arc<Self>, n: usize) -> ScalarField {
        let a = self.clone();
        let b = self.clone();
        let q0 = self.q0;
        ScalarField::new(
            &format!("H_t(t={})", self.t),
            n,
            move |q| a.eval_q(q[n]).0,
            move |q| {
                let mut g = vec![0.0; n + 1];
                g[n] = b.eval_q(q[n]).1;
                g
            },
        )
        .with_domain(move |q| q[n] >= q0 - 1e-12)
    }
}

/// Profiles `H_t` built once per grid value of `t`; other values are built on demand.
#[derive(Debug, Clone)]
pub struct HFamily {
    pub eps: f64,
    cache: BTreeMap<u64, Arc<HProfile>>,
}

impl HFamily {
    pub fn build(eps: f64, t_grid: &[f64]) -> Result<Self> {
        let built: Result<Vec<(u64, Arc<HProfile>)>> =
            t_grid.iter().map(|&t| HProfile::build(t, eps).map(|p| (t.to_bits(), Arc::new(p)))).collect();
        Ok(Self { eps, cache: built?.into_iter().collect() })
    }

    pub fn profile(&self, t: f64) -> Result<Arc<HProfile>> {
        match self.cache.get(&t.to_bits()) {
            Some(p) => Ok(p.clone()),
            None => HProfile::build(t, self.eps).map(Arc::new),
        }
    }
}

pub fn build_h_family(eps: f64, t_grid: &[f64]) -> Result<HFamily> {
    HFamily::build(eps, t_grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiskKind {
    /// `D_t` in J^1(S^n) seen through the cylinder chart.
    Inner,
    /// The 1-jet of `H_t` in J^1(S^n) seen through the `S_-1` chart.
    Outer,
}

/// A one-parameter family of disks `(t, x) -> JetPoint`, `x` in the closed unit disk.
#[derive(Debug, Clone)]
pub struct DiskFamily {
    pub kind: DiskKind,
    pub params: IsotopyParams,
    h: Option<HFamily>,
}

impl DiskFamily {
    pub fn inner(params: IsotopyParams) -> Self {
        Self { kind: DiskKind::Inner, params, h: None }
    }

    pub fn outer(params: IsotopyParams, h: HFamily) -> Self {
        Self { kind: DiskKind::Outer, params, h: Some(h) }
    }

    pub fn eval_flat(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_t(t)?;
        validate_disk_x(x, self.params.n)?;
        match (&self.kind, &self.h) {
            (DiskKind::Inner, _) => Ok(disk_d_flat(t, x, &self.params)),
            (DiskKind::Outer, Some(h)) => Ok(h.profile(t)?.lift_flat(x)),
            (DiskKind::Outer, None) => Err(Error::Construction("outer family without profiles".into())),
        }
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<JetPoint> {
        JetPoint::from_slice(&self.eval_flat(t, x)?)
    }
}

/// The sphere `S(t)`: the outer disk in the `S_-1` chart and the inner disk
/// in the cylinder chart, both in J^1(S^n) coordinates.
#[derive(Debug, Clone)]
pub struct AssembledSphere {
    pub t: f64,
    pub params: IsotopyParams,
    pub profile: Arc<HProfile>,
}

pub fn assemble_sphere(t: f64, params: IsotopyParams, family: &HFamily) -> Result<AssembledSphere> {
    check_t(t)?;
    Ok(AssembledSphere { t, params, profile: family.profile(t)? })
}

impl AssembledSphere {
    /// Inner disk carried to the `S_-1` chart by `psi_W^-1 psi^-1`. Only
    /// meaningful where the disk lies in both charts, e.g. at `t = +-1`.
    pub fn inner_pulled_back(&self, x: &[f64]) -> Vec<f64> {
        pull_back_flat(&self.inner(x), self.params.eps)
    }

    /// Outer disk point (J^1 coordinates in the `S_-1` chart).
    pub fn outer(&self, m: &[f64]) -> Vec<f64> {
        self.profile.lift_flat(m)
    }

    /// Inner disk point (J^1 coordinates in the cylinder chart).
    pub fn inner(&self, x: &[f64]) -> Vec<f64> {
        disk_d_flat(self.t, x, &self.params)
    }

    /// The whole sphere in R^{2n+2}: `psi_w` of the outer disk, `psi^-1` of the inner.
    pub fn ambient(&self, m: &[f64], outer: bool) -> Vec<f64> {
        if outer {
            crate::surgery::psi_w_flat(&self.outer(m))
        } else {
            psi_inv_flat(&self.inner(m), self.params.eps)
        }
    }

    /// Point of the sphere indexed by `P` on the unit n-sphere: the outer disk
    /// for `P_{n+1} >= 0` and the inner disk below, both via `x = P[..n]`.
    pub fn at_sphere_param(&self, p: &[f64]) -> Vec<f64> {
        let n = self.params.n;
        let x = &p[..n];
        let scale = norm(x).max(1.0);
        let x: Vec<f64> = x.iter().map(|v| v / scale).collect();
        self.ambient(&x, p[n] >= 0.0)
    }

    /// `max |outer(x) - pulled_back_boundary(t, x)|_inf` over boundary points.
    pub fn boundary_mismatch(&self, boundary: &[Vec<f64>]) -> Result<f64> {
        let mut worst = 0.0_f64;
        for x in boundary {
            let a = self.outer(x);
            let b = pulled_back_boundary(self.t, x, self.params.eps)?.to_vec();
            worst = worst.max(crate::vecops::dist_inf(&a, &b));
        }
        Ok(worst)
    }
}

/// Samples one half of `S(t)` on a disk grid shrunk by `margin` so that the
/// central differences stay inside the closed disk.
pub struct DiskSampler<'a> {
    pub sphere: &'a AssembledSphere,
    pub outer: bool,
    pub ambient: bool,
    pub grid: Vec<Vec<f64>>,
}

impl<'a> DiskSampler<'a> {
    pub fn new(sphere: &'a AssembledSphere, outer: bool, ambient: bool, count: usize, margin: f64) -> Self {
        let grid = crate::grids::disk_grid(sphere.params.n, count)
            .into_iter()
            .map(|x| x.iter().map(|v| v * (1.0 - margin)).collect())
            .collect();
        Self { sphere, outer, ambient, grid }
    }
}

impl Sampler for DiskSampler<'_> {
    fn param_dim(&self) -> usize {
        self.sphere.params.n
    }

    fn params(&self) -> Vec<Vec<f64>> {
        self.grid.clone()
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        match (self.outer, self.ambient) {
            (true, false) => self.sphere.outer(x),
            (false, false) => self.sphere.inner(x),
            (o, true) => self.sphere.ambient(x, o),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::{disk_boundary_grid, linspace};

    const EPS: f64 = 0.1;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn scalar_examples() {
        assert_eq!(eps_t(0.0, EPS), 1.0);
        assert!(close(eps_t(1.0, EPS), 0.1, 1e-15) && close(eps_t(-1.0, EPS), 0.1, 1e-15));
        assert!(close(eps_t(0.5, EPS), 0.55, 1e-15));
        assert!(close(k_eps(1.0, EPS), 0.1, 1e-15));
        assert!(close(q_n1_t(1.0, EPS), -0.1, 1e-15));
        assert!(close(q_n1_t(-1.0, EPS), 0.1, 1e-15));
        assert_eq!(q_n1_t(0.0, EPS), 0.0);
        assert_eq!(slope_h(1.0, EPS), 0.0);
        assert_eq!(slope_h(-1.0, EPS), 0.0);
        assert_eq!(slope_h(0.0, EPS), 1.0);
    }

    #[test]
    fn disk_endpoints() {
        let p = IsotopyParams::new(2, EPS).unwrap();
        for x in [vec![0.0, 0.0], vec![0.3, -0.5], vec![0.6, 0.8]] {
            let d1 = disk_d(1.0, &x, &p).unwrap();
            assert!(close(d1.z, 2.0, 1e-12));
            assert!(d1.p().iter().all(|v| v.abs() < 1e-12));
            assert!(d1.q()[2] >= EPS - 1e-12);
            let dm = disk_d(-1.0, &x, &p).unwrap();
            assert!(close(dm.z, -2.0, 1e-12));
            assert!(dm.p().iter().all(|v| v.abs() < 1e-12));
        }
        let d0 = disk_d(0.0, &[0.6, 0.8], &p).unwrap();
        assert_eq!(d0.z, 0.0);
        assert_eq!(d0.q(), &[0.0, 0.0, 1.0]);
        assert_eq!(d0.p(), &[-0.6, -0.8, 0.0]);
    }

    #[test]
    fn boundary_examples() {
        let x = [0.6, 0.8];
        let b0 = boundary_d(0.0, &x, EPS).unwrap();
        assert_eq!(b0.to_vec(), vec![0.0, 0.0, 0.0, 1.0, -0.6, -0.8, 0.0]);
        let b1 = boundary_d(1.0, &x, EPS).unwrap();
        assert!(close(b1.z, 2.0, 1e-15) && close(b1.q()[2], EPS, 1e-15));
        assert!(b1.p().iter().all(|v| v.abs() < 1e-15));
        let r = (1.0 + EPS).sqrt();
        let c = (1.0 - EPS * EPS).sqrt();
        let pb = pulled_back_boundary(1.0, &x, EPS).unwrap();
        assert!(close(pb.z, r, 1e-15));
        assert!(close(pb.q()[0], -c * 0.6, 1e-15) && close(pb.q()[2], -EPS, 1e-15));
        assert!(pb.p().iter().all(|v| v.abs() < 1e-15));
        let pb = pulled_back_boundary(-1.0, &x, EPS).unwrap();
        assert!(close(pb.z, -r, 1e-15) && close(pb.q()[2], EPS, 1e-15));
        assert!(pb.p().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn boundary_closure_and_agreement() {
        let p = IsotopyParams::new(2, EPS).unwrap();
        for t in linspace(-1.0, 1.0, 41) {
            for x in disk_boundary_grid(2, 24) {
                let b = boundary_d(t, &x, EPS).unwrap();
                assert!(close(norm_sq(b.p()), 1.0 - t * t, 1e-12));
                assert!(close(b.z * b.z / 4.0 + norm_sq(b.p()), 1.0, 1e-12));
                let d = disk_d(t, &x, &p).unwrap();
                assert!(crate::vecops::dist_inf(&d.to_vec(), &b.to_vec()) < 1e-12, "t={t}");
                let composed = pull_back_flat(&b.to_vec(), EPS);
                let closed = pulled_back_boundary(t, &x, EPS).unwrap().to_vec();
                assert!(crate::vecops::dist_inf(&composed, &closed) < 1e-12);
            }
        }
    }

    #[test]
    fn h_profile_boundary_and_energy() {
        let r = (1.0 + EPS).sqrt();
        for t in linspace(-1.0, 1.0, 21) {
            let h = HProfile::build(t, EPS).unwrap();
            let (v, d) = h.eval_q(h.q0);
            assert!(close(v, t * r, 1e-12), "t={t}");
            assert!(close(d, exact_boundary_slope(t, EPS), 1e-9), "t={t} {d}");
            for k in 0..=400 {
                let tau = h.theta0 * k as f64 / 400.0;
                assert!(h.energy(tau) >= r * r - 1e-9, "t={t} tau={tau}");
            }
            assert_eq!(h.eval_tau(h.theta0).1, 0.0);
            if h.phase_end >= h.theta0 {
                for k in 0..=400 {
                    let v = h.eval_tau(h.theta0 * k as f64 / 400.0).0;
                    assert!(v.abs() <= r + 1e-15, "t={t}");
                }
            }
        }
        let one = HProfile::build(1.0, EPS).unwrap();
        for k in 0..=50 {
            assert_eq!(one.eval_tau(one.theta0 * k as f64 / 50.0), (r, 0.0));
        }
        let minus = HProfile::build(-1.0, EPS).unwrap();
        assert!(close(minus.q0, EPS, 1e-15));
        let (v, d) = minus.eval_q(EPS);
        assert!(close(v, -r, 1e-15) && d.abs() < 1e-12);
        let zero = HProfile::build(0.0, EPS).unwrap();
        for q in linspace(0.0, 1.0, 11) {
            assert!(close(zero.eval_q(q).0, r * q, 1e-15));
        }
    }

    #[test]
    fn assembled_boundary_matches() {
        let params = IsotopyParams::new(2, EPS).unwrap();
        let ts = linspace(-1.0, 1.0, 11);
        let fam = build_h_family(EPS, &ts).unwrap();
        let bd = disk_boundary_grid(2, 32);
        for &t in &ts {
            let s = assemble_sphere(t, params, &fam).unwrap();
            assert!(s.boundary_mismatch(&bd).unwrap() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn halves_are_legendrian() {
        use crate::verifier::{check_legendrian, CheckConfig, JetForm, SurgeryForm};
        let n = 2;
        let params = IsotopyParams::new(n, EPS).unwrap();
        let ts = [-1.0, -0.7, -0.3, -1e-3, 0.0, 1e-3, 0.2, 0.5, 0.9, 1.0];
        let fam = build_h_family(EPS, &ts).unwrap();
        let cfg = CheckConfig::default();
        let mut worst = 0.0_f64;
        for &t in &ts {
            let s = assemble_sphere(t, params, &fam).unwrap();
            for outer in [true, false] {
                let sm = DiskSampler::new(&s, outer, false, 600, 1e-3);
                let r = check_legendrian("half", &sm, &JetForm { n }, &cfg);
                let sa = DiskSampler::new(&s, outer, true, 600, 1e-3);
                let ra = check_legendrian("half", &sa, &SurgeryForm { n }, &cfg);
                eprintln!("t={t} outer={outer} jet={:.3e} ambient={:.3e}", r.max_residual, ra.max_residual);
                worst = worst.max(r.max_residual).max(ra.max_residual);
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }
}

#[cfg(test)]
mod feasibility {
    use super::*;

    #[test]
    fn h_family_builds_across_eps() {
        let ts = crate::grids::t_grid(101);
        for eps in [0.05, 0.1, 0.2, 0.3, 0.45] {
            let fam = build_h_family(eps, &ts).unwrap_or_else(|e| panic!("eps={eps}: {e}"));
            let r = (1.0 + eps).sqrt();
            for &t in &ts {
                let h = fam.profile(t).unwrap();
                for k in 0..=200 {
                    assert!(h.energy(h.theta0 * k as f64 / 200.0) >= r * r - 1e-9);
                }
            }
        }
    }
}
