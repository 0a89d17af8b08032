//! Desk-scale models of three Legendrian spheres: the spun standard unknot in
//! R^{2n+1}, the join and stabilisation spheres in J^1(S^n), and the double of
//! an exact Lagrangian disk over the hypersurface `W_rho`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grids::{disk_boundary_grid, disk_grid, linspace, sphere_grid};
use crate::isotopy::{disk_d_flat, AssembledSphere, HProfile, IsotopyParams};
use crate::smooth::{smoothstep, smoothstep_d1};
use crate::vecops::{basis, complement_basis, dist_inf, gram_det, norm, norm_sq};
use crate::verifier::{
    check_agreement, check_legendrian, check_legendrian_sphere, curve_velocity, great_circle, pushforward,
    pushforward4, CheckConfig, DarbouxForm, JetForm, OneForm, Report, Sample, Sampler,
};

/// Height constant of the unknot front `(cos s w, a sin^3 s)`.
pub const UNKNOT_A: f64 = 2.0 / 3.0;
/// Gram-determinant ratio below which a front sample is flagged as a cusp.
pub const CUSP_THRESHOLD: f64 = 1e-8;
/// Bound on the primitive-gradient identity of an exact disk.
pub const EXACTNESS_TOL: f64 = 1e-8;
/// Bound on `|x_n|, |y_n|` along the boundary of a disk to be doubled.
pub const SEAM_TOL: f64 = 1e-9;

const RANK_STEP: f64 = 1e-6;

/// One sample of a Legendrian with its front projection.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FrontSample {
    /// Point of S^n parametrising the sphere.
    pub base: Vec<f64>,
    /// Base coordinates followed by z.
    pub front: Vec<f64>,
    pub cusp: bool,
    /// Full contact-manifold coordinates.
    pub point: Vec<f64>,
}

/// Coordinate layout of a sampled Legendrian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    /// J^1(S^n), `[z, q(n+1), p(n+1)]`, form `dz + p dq`.
    Jet,
    /// R^{2n+1}, `[x(n), y(n), z]`, form `dz - y dx`.
    Darboux,
}

impl Ambient {
    pub fn front(self, n: usize, v: &[f64]) -> Vec<f64> {
        match self {
            Ambient::Jet => {
                let mut f = v[1..n + 2].to_vec();
                f.push(v[0]);
                f
            }
            Ambient::Darboux => {
                let mut f = v[..n].to_vec();
                f.push(v[2 * n]);
                f
            }
        }
    }

    pub fn form(self, n: usize) -> Box<dyn OneForm> {
        match self {
            Ambient::Jet => Box::new(JetForm { n }),
            Ambient::Darboux => Box::new(DarbouxForm { n }),
        }
    }
}

/// `det(front Gram) / det(full Gram)` for tangent vectors `vel`.
/// Degenerate parametrisations report 1 so they are never taken for cusps.
fn front_rank_ratio(vel: &[Vec<f64>], ambient: Ambient, n: usize) -> f64 {
    let full = gram_det(vel);
    if full <= 0.0 {
        return 1.0;
    }
    let fr: Vec<Vec<f64>> = vel.iter().map(|v| ambient.front(n, v)).collect();
    gram_det(&fr) / full
}

fn sphere_front_sample(map: &(dyn Fn(&[f64]) -> Vec<f64> + Sync), p: &[f64], ambient: Ambient) -> FrontSample {
    let n = p.len() - 1;
    let point = map(p);
    let vel: Vec<Vec<f64>> = complement_basis(p)
        .iter()
        .map(|e| curve_velocity(|s| map(&great_circle(p, e, s)), RANK_STEP))
        .collect();
    FrontSample {
        base: p.to_vec(),
        front: ambient.front(n, &point),
        cusp: front_rank_ratio(&vel, ambient, n) < CUSP_THRESHOLD,
        point,
    }
}

/// Number of direction reversals of front coordinate `coord` along a closed
/// loop of samples. Each cusp of a generic front reverses the direction.
pub fn count_cusps(samples: &[FrontSample], coord: usize) -> usize {
    let mut pts: Vec<f64> = samples.iter().map(|s| s.front[coord]).collect();
    if pts.len() > 1 && dist_inf(&samples[0].point, &samples[samples.len() - 1].point) < 1e-12 {
        pts.pop();
    }
    let m = pts.len();
    let signs: Vec<f64> = (0..m)
        .map(|k| pts[(k + 1) % m] - pts[k])
        .filter(|d| d.abs() > 1e-14)
        .map(f64::signum)
        .collect();
    (0..signs.len()).filter(|&k| signs[k] != signs[(k + 1) % signs.len()]).count()
}

/// Distance between the first and last full points of a sampled loop.
pub fn closure_gap(samples: &[FrontSample]) -> f64 {
    dist_inf(&samples[0].point, &samples[samples.len() - 1].point)
}

// ---------------------------------------------------------------------------
// Spun unknot

/// Legendrian lift of the spun front at `p` in S^n: the front is
/// `(p[..n], a p_n^3)` and `y = dz/dx` along the meridian.
pub fn unknot_point(p: &[f64]) -> Vec<f64> {
    corrupted_unknot_point(p, 0.0)
}

/// `unknot_point` with `y` scaled by `1 + delta`; a negative control.
pub fn corrupted_unknot_point(p: &[f64], delta: f64) -> Vec<f64> {
    let n = p.len() - 1;
    let h = p[n];
    let mut out = Vec::with_capacity(2 * n + 1);
    out.extend_from_slice(&p[..n]);
    out.extend(p[..n].iter().map(|x| -3.0 * UNKNOT_A * h * x * (1.0 + delta)));
    out.push(UNKNOT_A * h.powi(3));
    out
}

/// Grid of `(cos s w, sin s)`, `s` in `[-pi/2, pi/2]` (always containing the
/// cusp latitude `s = 0` when `meridian` is odd) and `w` on S^{n-1}.
pub fn spin_grid(n: usize, meridian: usize, spin: usize) -> Vec<Vec<f64>> {
    let mut s_vals = linspace(-PI / 2.0, PI / 2.0, meridian);
    if meridian % 2 == 1 {
        s_vals[meridian / 2] = 0.0;
    }
    let omegas = sphere_grid(n - 1, spin);
    let mut out = Vec::with_capacity(s_vals.len() * omegas.len());
    for w in &omegas {
        for &s in &s_vals {
            let (sn, c) = s.sin_cos();
            let mut p: Vec<f64> = w.iter().map(|x| c * x).collect();
            p.push(sn);
            out.push(p);
        }
    }
    out
}

pub fn spun_unknot_front(n: usize, grid: &[Vec<f64>]) -> Result<Vec<FrontSample>> {
    if n == 0 {
        return Err(Error::Argument("the unknot front needs n >= 1".into()));
    }
    for p in grid {
        if p.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: p.len() });
        }
        if (norm_sq(p) - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("{p:?} is not on the unit sphere")));
        }
    }
    Ok(grid.par_iter().map(|p| sphere_front_sample(&unknot_point, p, Ambient::Darboux)).collect())
}

/// Closed meridian through `e_n`: `(0, .., cos s, sin s)`, `s` in `[0, 2 pi]`,
/// both endpoints included. Cusps sit at `s = 0` and `s = pi` when `count`
/// is even.
pub fn unknot_meridian(n: usize, count: usize) -> Vec<FrontSample> {
    (0..=count)
        .map(|k| {
            let s = 2.0 * PI * k as f64 / count as f64;
            let mut p = vec![0.0; n + 1];
            p[n - 1] = s.cos();
            p[n] = s.sin();
            sphere_front_sample(&unknot_point, &p, Ambient::Darboux)
        })
        .collect()
}

/// Legendrian check of the spun unknot on points of S^n, skipping the cusp
/// collar `|p_n| < collar`.
pub fn unknot_legendrian(points: &[Vec<f64>], delta: f64, cfg: &CheckConfig) -> Report {
    let n = points[0].len() - 1;
    let collar = cfg.collar;
    check_legendrian_sphere(
        "unknot: Legendrian lift",
        points,
        &move |p: &[f64]| corrupted_unknot_point(p, delta),
        &DarbouxForm { n },
        &move |p: &[f64]| p[n].abs() < collar,
        cfg,
    )
}

// ---------------------------------------------------------------------------
// Spheres glued from two disks

pub type DiskMap = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A sphere made of two disk maps on the closed unit n-disk that agree along
/// the boundary. The base point `(m, +-sqrt(1 - |m|^2))` of S^n selects the
/// upper or lower disk.
#[derive(Clone)]
pub struct TwoDiskSphere {
    pub name: String,
    pub n: usize,
    pub ambient: Ambient,
    upper: DiskMap,
    lower: DiskMap,
}

impl fmt::Debug for TwoDiskSphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TwoDiskSphere")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("ambient", &self.ambient)
            .finish()
    }
}

struct PieceSampler {
    map: DiskMap,
    grid: Vec<Vec<f64>>,
    n: usize,
}

impl Sampler for PieceSampler {
    fn param_dim(&self) -> usize {
        self.n
    }

    fn params(&self) -> Vec<Vec<f64>> {
        self.grid.clone()
    }

    fn eval(&self, m: &[f64]) -> Vec<f64> {
        (self.map)(m)
    }
}

fn shrunk_disk_grid(n: usize, count: usize, margin: f64) -> Vec<Vec<f64>> {
    disk_grid(n, count).into_iter().map(|m| m.iter().map(|v| v * (1.0 - margin)).collect()).collect()
}

impl TwoDiskSphere {
    pub fn new(name: &str, n: usize, ambient: Ambient, upper: DiskMap, lower: DiskMap) -> Self {
        Self { name: name.to_string(), n, ambient, upper, lower }
    }

    pub fn upper(&self, m: &[f64]) -> Vec<f64> {
        (self.upper)(m)
    }

    pub fn lower(&self, m: &[f64]) -> Vec<f64> {
        (self.lower)(m)
    }

    pub fn at_base(&self, b: &[f64]) -> Vec<f64> {
        let m = &b[..self.n];
        if b[self.n] >= 0.0 {
            self.upper(m)
        } else {
            self.lower(m)
        }
    }

    /// `max |upper - lower|_inf` along the common boundary sphere.
    pub fn seam_gap(&self, count: usize) -> f64 {
        disk_boundary_grid(self.n, count)
            .iter()
            .map(|m| dist_inf(&self.upper(m), &self.lower(m)))
            .fold(0.0, f64::max)
    }

    /// Legendrian residual of both disks on a grid shrunk by `collar`.
    pub fn legendrian(&self, cfg: &CheckConfig, count: usize) -> Report {
        let form = self.ambient.form(self.n);
        let grid = shrunk_disk_grid(self.n, count, cfg.collar);
        let parts: Vec<Report> = [&self.upper, &self.lower]
            .iter()
            .map(|map| {
                let s = PieceSampler { map: (*map).clone(), grid: grid.clone(), n: self.n };
                check_legendrian(&self.name, &s, form.as_ref(), cfg)
            })
            .collect();
        Report::merge(&format!("{}: Legendrian", self.name), &parts)
    }

    /// Pointwise agreement with `other` on both disks.
    pub fn agreement(&self, other: &TwoDiskSphere, count: usize, tol: f64) -> Report {
        let grid = disk_grid(self.n, count);
        let a = check_agreement(&self.name, &grid, &|m: &[f64]| self.upper(m), &|m: &[f64]| other.upper(m), tol);
        let b = check_agreement(&self.name, &grid, &|m: &[f64]| self.lower(m), &|m: &[f64]| other.lower(m), tol);
        Report::merge(&format!("{} = {}", self.name, other.name), &[a, b])
    }

    fn disk_front(&self, m: &[f64], upper: bool) -> FrontSample {
        let map = if upper { &self.upper } else { &self.lower };
        let point = map(m);
        let r = norm(m);
        let cusp = if r <= 1.0 - 100.0 * RANK_STEP {
            let vel: Vec<Vec<f64>> =
                (0..self.n).map(|k| pushforward(|x| map(x), m, &basis(self.n, k), RANK_STEP)).collect();
            front_rank_ratio(&vel, self.ambient, self.n) < CUSP_THRESHOLD
        } else {
            false
        };
        let h = (1.0 - r * r).max(0.0).sqrt();
        let mut base = m.to_vec();
        base.push(if upper { h } else { -h });
        FrontSample { base, front: self.ambient.front(self.n, &point), cusp, point }
    }

    pub fn front_samples(&self, count: usize) -> Vec<FrontSample> {
        let grid = disk_grid(self.n, count);
        let mut out: Vec<FrontSample> = grid.par_iter().map(|m| self.disk_front(m, true)).collect();
        out.extend(grid.par_iter().map(|m| self.disk_front(m, false)).collect::<Vec<_>>());
        out
    }

    /// Closed loop over the base meridian `(0, .., sin s, cos s)`, `s` in
    /// `[0, 2 pi]`. Cusp flags use the rank of the loop's own front.
    pub fn meridian(&self, count: usize) -> Vec<FrontSample> {
        let n = self.n;
        let at = |s: f64| -> Vec<f64> {
            let mut b = vec![0.0; n + 1];
            b[n - 1] = s.sin();
            b[n] = s.cos();
            b
        };
        (0..=count)
            .map(|k| {
                let s = 2.0 * PI * k as f64 / count as f64;
                let base = at(s);
                let point = self.at_base(&base);
                let v = curve_velocity(|d| self.at_base(&at(s + d)), RANK_STEP);
                let cusp = front_rank_ratio(&[v], self.ambient, n) < CUSP_THRESHOLD;
                FrontSample { base, front: self.ambient.front(n, &point), cusp, point }
            })
            .collect()
    }

    /// Extremes of z over both disks.
    pub fn z_range(&self, count: usize) -> (f64, f64) {
        let idx = match self.ambient {
            Ambient::Jet => 0,
            Ambient::Darboux => 2 * self.n,
        };
        disk_grid(self.n, count)
            .iter()
            .flat_map(|m| [self.upper(m)[idx], self.lower(m)[idx]])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), z| (lo.min(z), hi.max(z)))
    }
}

// ---------------------------------------------------------------------------
// Join and stabilisation models in J^1(S^n)

/// Polar-cap point `q` at model coordinate `m` with opening angle `theta0`,
/// in the same parametrisation as the `H_t` lifts.
pub fn cap_q(m: &[f64], theta0: f64) -> Vec<f64> {
    let rm = norm(m);
    let theta = rm * theta0;
    let sinc = if rm < 1e-8 { theta0 * (1.0 - theta * theta / 6.0) } else { theta.sin() / rm };
    let mut q: Vec<f64> = m.iter().map(|v| -sinc * v).collect();
    q.push(theta.cos());
    q
}

fn flat_jet(z: f64, q: Vec<f64>) -> Vec<f64> {
    let n1 = q.len();
    let mut out = Vec::with_capacity(1 + 2 * n1);
    out.push(z);
    out.extend(q);
    out.extend(std::iter::repeat(0.0).take(n1));
    out
}

/// `(c, (s b x, sqrt(1 - b^2 |x|^2)) * orient, 0)` with `b = sqrt(1 - eps^2)`.
fn flat_disk(m: &[f64], eps: f64, z: f64, sx: f64, orient: f64) -> Vec<f64> {
    let b = (1.0 - eps * eps).sqrt();
    let bx = b * norm(m);
    let mut q: Vec<f64> = m.iter().map(|v| orient * sx * b * v).collect();
    q.push(orient * ((1.0 - bx) * (1.0 + bx)).max(0.0).sqrt());
    flat_jet(z, q)
}

/// `L_{2,eps}`: the flat disk `q_{n+1} >= eps` at height `-sqrt(1+eps)`.
pub fn l2_eps(m: &[f64], eps: f64) -> Vec<f64> {
    flat_disk(m, eps, -(1.0 + eps).sqrt(), -1.0, 1.0)
}

/// `C_eps`: the flat disk `q_{n+1} <= -eps` at height `+sqrt(1+eps)`.
pub fn c_eps(m: &[f64], eps: f64) -> Vec<f64> {
    flat_disk(m, eps, (1.0 + eps).sqrt(), 1.0, -1.0)
}

/// `L_eps`: the flat cap `q_{n+1} >= -eps` at height `+sqrt(1+eps)`.
pub fn l_eps(m: &[f64], eps: f64) -> Vec<f64> {
    flat_jet((1.0 + eps).sqrt(), cap_q(m, (-eps).acos()))
}

/// The join sphere: `j^1 H` over the cap `q_{n+1} >= eps` joined to `L_{2,eps}`.
pub fn s_join_model(h: Arc<HProfile>, n: usize, eps: f64) -> Result<TwoDiskSphere> {
    if (h.r * h.r - 1.0 - eps).abs() > 1e-12 || (h.q0 - eps).abs() > 1e-12 {
        return Err(Error::Argument(format!("profile does not live on the cap q_(n+1) >= {eps}")));
    }
    h.validate(400, 1e-9)?;
    Ok(TwoDiskSphere::new(
        "S_join",
        n,
        Ambient::Jet,
        Arc::new(move |m: &[f64]| h.lift_flat(m)),
        Arc::new(move |m: &[f64]| l2_eps(m, eps)),
    ))
}

/// The stabilised sphere `L_eps` union `C_eps`: the zero section at height
/// `sqrt(1+eps)`, split along `q_{n+1} = -eps`.
pub fn s_stab_model(n: usize, eps: f64) -> Result<TwoDiskSphere> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Argument(format!("eps = {eps} outside (0, 0.5)")));
    }
    Ok(TwoDiskSphere::new(
        "S_stab",
        n,
        Ambient::Jet,
        Arc::new(move |m: &[f64]| l_eps(m, eps)),
        Arc::new(move |m: &[f64]| c_eps(m, eps)),
    ))
}

/// `S(+-1)` seen entirely in the `S_-1` chart: the outer disk together with
/// the inner disk carried over by `psi_W^-1 psi^-1`.
pub fn endpoint_sphere(s: &AssembledSphere) -> Result<TwoDiskSphere> {
    if s.t.abs() != 1.0 {
        return Err(Error::Argument(format!("t = {} is not an endpoint", s.t)));
    }
    let a = s.clone();
    let b = s.clone();
    Ok(TwoDiskSphere::new(
        &format!("S({})", s.t),
        s.params.n,
        Ambient::Jet,
        Arc::new(move |m: &[f64]| a.outer(m)),
        Arc::new(move |m: &[f64]| b.inner_pulled_back(m)),
    ))
}

/// Front samples of the disk `D_t` in J^1(S^n).
pub fn disk_front(t: f64, params: &IsotopyParams, count: usize) -> Vec<FrontSample> {
    let n = params.n;
    let p = *params;
    let map: DiskMap = Arc::new(move |x: &[f64]| disk_d_flat(t, x, &p));
    let s = TwoDiskSphere::new("D_t", n, Ambient::Jet, map.clone(), map);
    disk_grid(n, count).par_iter().map(|m| s.disk_front(m, true)).collect()
}

// ---------------------------------------------------------------------------
// W_rho and the doubling construction

/// A profile `rho` on `[0, 1]` with its first two derivatives.
pub trait Rho: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
}

/// `1 - x` on `[delta, 1 - delta]`. Near each end `rho'` is the quintic
/// smoothstep ramp, so `rho' < 0` on `(0, 1)` and `rho > 0` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerRho {
    pub delta: f64,
}

impl Default for CornerRho {
    fn default() -> Self {
        Self { delta: 0.05 }
    }
}

/// Antiderivative of the quintic smoothstep with value 0 at 0.
fn smoothstep_integral(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u.powi(4) * (u * u - 3.0 * u + 2.5)
}

impl Rho for CornerRho {
    fn value(&self, x: f64) -> f64 {
        let d = self.delta;
        if x < d {
            1.0 - d / 2.0 - d * smoothstep_integral(x / d)
        } else if x > 1.0 - d {
            d / 2.0 + d * smoothstep_integral((1.0 - x) / d)
        } else {
            1.0 - x
        }
    }

    fn d1(&self, x: f64) -> f64 {
        let d = self.delta;
        if x < d {
            -smoothstep(x / d)
        } else if x > 1.0 - d {
            -smoothstep((1.0 - x) / d)
        } else {
            -1.0
        }
    }

    fn d2(&self, x: f64) -> f64 {
        let d = self.delta;
        if x < d {
            -smoothstep_d1(x / d) / d
        } else if x > 1.0 - d {
            smoothstep_d1((1.0 - x) / d) / d
        } else {
            0.0
        }
    }
}

fn rho_ratio(x_n: f64, rho: &dyn Rho) -> Result<(f64, f64)> {
    if !(x_n > 0.0 && x_n < 1.0) {
        return Err(Error::Domain(format!("x_n = {x_n} outside (0, 1)")));
    }
    let d1 = rho.d1(x_n);
    if d1 == 0.0 {
        return Err(Error::Singular(format!("rho'({x_n}) = 0")));
    }
    let v = rho.value(x_n);
    Ok((v / d1, 1.0 - v * rho.d2(x_n) / (d1 * d1)))
}

/// Height of `W_rho = {z = (rho / rho')(x_n) y_n}` over `(x_n, y_n)`.
pub fn w_rho_surface(x_n: f64, y_n: f64, rho: &dyn Rho) -> Result<f64> {
    Ok(rho_ratio(x_n, rho)?.0 * y_n)
}

/// Cosine of the angle between the Reeb field `d/dz` and the normal of the
/// graph `W_rho` at `(x_n, y_n)`; positive exactly when transverse.
pub fn w_rho_reeb_margin(x_n: f64, y_n: f64, rho: &dyn Rho) -> Result<f64> {
    let (g, g1) = rho_ratio(x_n, rho)?;
    Ok(1.0 / (1.0 + (g1 * y_n).powi(2) + g * g).sqrt())
}

pub type PrimitiveFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A Lagrangian disk in `(R^{2n}, dx ^ dy)` parametrised by the closed unit
/// n-disk, `m -> [x(n), y(n)]`, with a primitive `phi` of `y dx` on it.
#[derive(Clone)]
pub struct ExactLagrangianDisk {
    pub name: String,
    pub n: usize,
    map: DiskMap,
    primitive: PrimitiveFn,
    primitive_grad: DiskMap,
}

impl fmt::Debug for ExactLagrangianDisk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactLagrangianDisk").field("name", &self.name).field("n", &self.n).finish()
    }
}

impl ExactLagrangianDisk {
    pub fn new(name: &str, n: usize, map: DiskMap, primitive: PrimitiveFn, primitive_grad: DiskMap) -> Self {
        Self { name: name.to_string(), n, map, primitive, primitive_grad }
    }

    /// The standard filling of the (n-1)-dimensional unknot: the half
    /// `x_n >= 0` of the exact Lagrangian traced by the unknot lift, scaled by
    /// `kappa` in `x` so that it sits inside `0 < x_n < 1`.
    pub fn standard_filling(n: usize, kappa: f64) -> Result<Self> {
        if n == 0 || !(kappa > 0.0 && kappa < 1.0) {
            return Err(Error::Argument(format!("standard filling needs n >= 1 and kappa in (0, 1), got {n}, {kappa}")));
        }
        let map: DiskMap = Arc::new(move |m: &[f64]| {
            let h = m[n - 1];
            let mut p = m[..n - 1].to_vec();
            // Rounding in |m|^2 near the boundary is amplified by the square root.
            let rem = 1.0 - norm_sq(m);
            p.push(if rem < 1e-14 { 0.0 } else { rem.sqrt() });
            let mut out: Vec<f64> = p.iter().map(|v| kappa * v).collect();
            out.extend(p.iter().map(|v| -3.0 * UNKNOT_A * h * v));
            out
        });
        let primitive: PrimitiveFn = Arc::new(move |m: &[f64]| kappa * UNKNOT_A * m[n - 1].powi(3));
        let grad: DiskMap = Arc::new(move |m: &[f64]| {
            let mut g = vec![0.0; n];
            g[n - 1] = 3.0 * kappa * UNKNOT_A * m[n - 1] * m[n - 1];
            g
        });
        Ok(Self::new("standard filling", n, map, primitive, grad))
    }

    /// The same disk with `y_1` shifted by `delta` and the primitive left
    /// untouched; a negative control.
    pub fn corrupted(&self, delta: f64) -> Self {
        let map = self.map.clone();
        let n = self.n;
        let mut out = self.clone();
        out.name = format!("{} (corrupted)", self.name);
        out.map = Arc::new(move |m: &[f64]| {
            let mut v = map(m);
            v[n] += delta;
            v
        });
        out
    }

    pub fn eval(&self, m: &[f64]) -> Vec<f64> {
        (self.map)(m)
    }

    pub fn primitive(&self, m: &[f64]) -> f64 {
        (self.primitive)(m)
    }

    /// Legendrian lift `[x, y, phi]` in R^{2n+1}.
    pub fn lift(&self, m: &[f64]) -> Vec<f64> {
        let mut v = self.eval(m);
        v.push(self.primitive(m));
        v
    }

    /// `max |y . d_k x - d_k phi|` over samples and model directions.
    pub fn exactness_defect(&self, grid: &[Vec<f64>], h: f64) -> f64 {
        let n = self.n;
        grid.par_iter()
            .map(|m| {
                let v = self.eval(m);
                let g = (self.primitive_grad)(m);
                (0..n)
                    .map(|k| {
                        let dx = pushforward4(|a| self.eval(a), m, &basis(n, k), h);
                        let ydx: f64 = (0..n).map(|i| v[n + i] * dx[i]).sum();
                        (ydx - g[k]).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// `max(|x_n|, |y_n|)` on the boundary sphere of the model disk.
    pub fn seam_defect(&self, count: usize) -> f64 {
        let n = self.n;
        disk_boundary_grid(n, count)
            .iter()
            .map(|m| {
                let v = self.eval(m);
                v[n - 1].abs().max(v[2 * n - 1].abs())
            })
            .fold(0.0, f64::max)
    }
}

/// `(x_n, y_n) -> (-x_n, -y_n)`, a strict contactomorphism of `dz - y dx`.
pub fn reflect_n(v: &[f64], n: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out[n - 1] = -out[n - 1];
    out[2 * n - 1] = -out[2 * n - 1];
    out
}

/// The doubled sphere together with the data it was built from.
#[derive(Clone)]
pub struct LambdaDouble {
    pub sphere: TwoDiskSphere,
    pub disk: ExactLagrangianDisk,
    pub rho: Arc<dyn Rho>,
}

/// Lifts `disk` to R^{2n+1}, reflects the lift in `(x_n, y_n)` and joins the
/// two copies along their common boundary in `{x_n = y_n = 0}`.
pub fn lambda_double(disk: ExactLagrangianDisk, rho: Arc<dyn Rho>) -> Result<LambdaDouble> {
    let n = disk.n;
    let grid = shrunk_disk_grid(n, 400, 1e-2);
    let defect = disk.exactness_defect(&grid, 1e-4);
    if !(defect <= EXACTNESS_TOL) {
        return Err(Error::Construction(format!("{} is not exact: defect {defect:.3e}", disk.name)));
    }
    let seam = disk.seam_defect(64);
    if !(seam <= SEAM_TOL) {
        return Err(Error::Construction(format!("{} does not end on x_n = y_n = 0: {seam:.3e}", disk.name)));
    }
    for m in &grid {
        let x_n = disk.eval(m)[n - 1];
        rho_ratio(x_n, rho.as_ref())
            .map_err(|e| Error::Construction(format!("{} leaves the domain of W_rho: {e}", disk.name)))?;
    }
    let up = disk.clone();
    let down = disk.clone();
    let sphere = TwoDiskSphere::new(
        "Lambda(L,L)",
        n,
        Ambient::Darboux,
        Arc::new(move |m: &[f64]| up.lift(m)),
        Arc::new(move |m: &[f64]| reflect_n(&down.lift(m), n)),
    );
    Ok(LambdaDouble { sphere, disk, rho })
}

impl LambdaDouble {
    /// The disk embedded in `W_rho` over its `(x, y)` image.
    pub fn w_point(&self, m: &[f64]) -> Result<Vec<f64>> {
        let n = self.disk.n;
        let mut v = self.disk.eval(m);
        let z = w_rho_surface(v[n - 1], v[2 * n - 1], self.rho.as_ref())?;
        v.push(z);
        Ok(v)
    }

    /// Reeb transversality of `W_rho` at the embedded disk and on a uniform
    /// `(x_n, y_n)` grid. The residual is the negated margin, so the check
    /// passes exactly when every margin is positive.
    pub fn transversality(&self, count: usize) -> Report {
        let n = self.disk.n;
        let mut pts: Vec<(f64, f64)> = shrunk_disk_grid(n, count, 1e-2)
            .iter()
            .map(|m| {
                let v = self.disk.eval(m);
                (v[n - 1], v[2 * n - 1])
            })
            .collect();
        let k = (count as f64).sqrt().ceil() as usize;
        for i in 0..k {
            for j in 0..k {
                pts.push(((i as f64 + 0.5) / k as f64, -2.0 + 4.0 * j as f64 / (k - 1).max(1) as f64));
            }
        }
        let samples: Vec<Sample> = pts
            .iter()
            .map(|&(x, y)| match w_rho_reeb_margin(x, y, self.rho.as_ref()) {
                Ok(mg) => Sample::Residual(-mg, vec![x, y]),
                Err(_) => Sample::Residual(f64::INFINITY, vec![x, y]),
            })
            .collect();
        let r = Report::from_samples("W_rho: Reeb transversality", "d/dz is transverse to W_rho", 0.0, samples);
        let min_margin = -r.max_residual;
        r.with_extra("min_margin", min_margin)
    }

    /// `max |alpha(v) - d(G y_n - phi)(v)|` for the embedding into `W_rho`,
    /// i.e. the restricted form on the embedded disk is exact with the
    /// primitive carried over from the disk.
    pub fn w_primitive_defect(&self, count: usize, h: f64) -> f64 {
        let n = self.disk.n;
        let form = DarbouxForm { n };
        let emb = |m: &[f64]| self.w_point(m).unwrap_or_else(|_| vec![f64::NAN; 2 * n + 1]);
        let prim = |m: &[f64]| vec![emb(m)[2 * n] - self.disk.primitive(m)];
        shrunk_disk_grid(n, count, 1e-2)
            .par_iter()
            .map(|m| {
                let at = emb(m);
                (0..n)
                    .map(|k| {
                        let dir = basis(n, k);
                        let v = pushforward(emb, m, &dir, h);
                        let dp = pushforward(prim, m, &dir, h)[0];
                        (form.eval(&at, &v) - dp).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}
