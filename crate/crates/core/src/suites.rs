//! Check batteries grouped by module, as run by the command-line `verify`.
//!
//! Every suite returns plain [`Report`]s. Negative controls are reported as
//! passing when the corrupted input is rejected: their residual is the
//! negated observed residual and their tolerance the negated threshold, so
//! `pass ⇔ residual < tol` still holds.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{
    closure_gap, count_cusps, endpoint_sphere, lambda_double, s_join_model, s_stab_model, unknot_legendrian,
    unknot_meridian, CornerRho, ExactLagrangianDisk, EXACTNESS_TOL,
};
use crate::error::{Error, Result};
use crate::grids::{disk_boundary_grid, disk_grid, linspace, random_cotangent, random_gaussian_vec, random_unit_vec, rng, sphere_grid, t_grid};
use crate::isotopy::{
    assemble_sphere, boundary_d, build_h_family, disk_d_flat, exact_boundary_slope, pull_back_flat, pulled_back_boundary,
    HFamily, IsotopyParams,
};
use crate::jetspace::{contact_form_j1, jet_lift, standard_fields, verify_jet_lift_legendrian, JetPoint, SpherePoint, TangentSample};
use crate::openbook::{
    check_identity_outside_support, check_twist_symplectic, check_zero_section_involution, glue, OpenBookDesc,
    RelativeOpenBook, TwistProfile,
};
use crate::page::{
    b_fn, binding_coefficients_n1, cotangent_curve, glue_f, nu_t, page_chart, page_chart_inv, verify_chart_symplecto,
    alpha_wedge_dalpha_3d, BindingProfiles, CutoffRho, Neighbourhood, PagePoint,
};
use crate::surgery::{
    liouville_defect, membership, psi, psi_flat, psi_inv, psi_w, psi_w_flat, psi_w_inv, ProfilePair, S1tFamily, Surface,
    SurgeryPoint,
};
use crate::vecops::{dist_inf, norm_sq, normalized, reject, scale};
use crate::verifier::{
    check_injectivity, check_legendrian, check_pullback, check_scalar, continuity_modulus, CheckConfig, Curve, JetForm,
    PullbackMode, Report, Sample, Sampler, SurgeryForm, TOL_MEMBERSHIP, TOL_STRICT_PULLBACK,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Jet,
    Surgery,
    Chart,
    Isotopy,
    Constructions,
    Openbook,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["jet", "surgery", "chart", "isotopy", "constructions", "openbook", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jet" => Suite::Jet,
            "surgery" => Suite::Surgery,
            "chart" => Suite::Chart,
            "isotopy" => Suite::Isotopy,
            "constructions" => Suite::Constructions,
            "openbook" => Suite::Openbook,
            "all" => Suite::All,
            other => return Err(Error::Argument(format!("unknown suite {other:?}"))),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = *self as usize;
        f.write_str(Self::NAMES[i])
    }
}

/// Run parameters shared by all suites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub eps: f64,
    pub t_count: usize,
    pub seed: u64,
    /// Tolerance of the finite-difference Legendrian checks.
    pub tol: f64,
    /// Samples per parameter grid.
    pub grid: usize,
}

impl SuiteConfig {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        let cfg = Self { n, eps, t_count: 101, seed: 7, tol: crate::verifier::TOL_LEGENDRIAN, grid: 1000 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.n) {
            return Err(Error::Argument(format!("n = {} outside [1, 4]", self.n)));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::Argument(format!("eps = {} outside (0, 0.5)", self.eps)));
        }
        if self.t_count < 3 {
            return Err(Error::Argument(format!("t-grid needs at least 3 points, got {}", self.t_count)));
        }
        if self.grid < 16 {
            return Err(Error::Argument(format!("grid needs at least 16 samples, got {}", self.grid)));
        }
        self.check_config().validate()
    }

    pub fn check_config(&self) -> CheckConfig {
        CheckConfig { tol: self.tol, grid_size: self.grid, t_count: self.t_count, seed: self.seed, ..CheckConfig::default() }
    }

    pub fn t_grid(&self) -> Vec<f64> {
        t_grid(self.t_count)
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<Report>> {
    cfg.validate()?;
    Ok(match suite {
        Suite::Jet => jet_suite(cfg),
        Suite::Surgery => surgery_suite(cfg)?,
        Suite::Chart => chart_suite(cfg)?,
        Suite::Isotopy => isotopy_suite(cfg)?,
        Suite::Constructions => constructions_suite(cfg)?,
        Suite::Openbook => openbook_suite(cfg)?,
        Suite::All => {
            let mut out = jet_suite(cfg);
            out.extend(surgery_suite(cfg)?);
            out.extend(chart_suite(cfg)?);
            out.extend(isotopy_suite(cfg)?);
            out.extend(constructions_suite(cfg)?);
            out.extend(openbook_suite(cfg)?);
            out
        }
    })
}

// ---------------------------------------------------------------------------
// Report helpers

/// Passes when `observed` exceeds `threshold`.
pub fn negative_control(name: &str, observed: &Report, threshold: f64) -> Report {
    let mut r = observed.clone();
    r.check = format!("negative control: {name}");
    r.note = format!("corrupted input must give residual > {threshold:e}");
    r.max_residual = -observed.max_residual;
    r.tol = -threshold;
    r.pass = observed.samples > 0 && r.max_residual < r.tol;
    r.extra.insert("observed_residual".into(), observed.max_residual);
    r
}

/// Passes when every value exceeds `bound`; the residual is minus the smallest value.
pub fn lower_bound(name: &str, note: &str, values: Vec<(f64, Vec<f64>)>, bound: f64) -> Report {
    let samples = values.into_iter().map(|(v, loc)| Sample::Residual(-v, loc)).collect();
    let mut r = Report::from_samples(name, note, -bound, samples);
    // from_samples tracks the largest residual, which is minus the smallest value.
    r.pass = r.samples > 0 && r.max_residual < r.tol;
    r
}

/// A single yes/no check.
pub fn boolean(name: &str, note: &str, ok: bool) -> Report {
    Report::from_samples(name, note, 0.5, vec![Sample::Residual(if ok { 0.0 } else { 1.0 }, vec![])])
}

/// A single scalar residual.
pub fn scalar(name: &str, note: &str, value: f64, tol: f64) -> Report {
    Report::from_samples(name, note, tol, vec![Sample::Residual(value, vec![])])
}

/// Sampler over an explicit parameter list.
pub struct FnSampler<F: Fn(&[f64]) -> Vec<f64> + Sync> {
    pub dim: usize,
    pub params: Vec<Vec<f64>>,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64> + Sync> Sampler for FnSampler<F> {
    fn param_dim(&self) -> usize {
        self.dim
    }
    fn params(&self) -> Vec<Vec<f64>> {
        self.params.clone()
    }
    fn eval(&self, param: &[f64]) -> Vec<f64> {
        (self.f)(param)
    }
}

/// Disk grid pulled in to radius `1 - margin`.
fn inner_disk_grid(n: usize, count: usize, margin: f64) -> Vec<Vec<f64>> {
    disk_grid(n, count).into_iter().map(|x| scale(&x, 1.0 - margin)).collect()
}

fn random_jet_point<R: Rng>(r: &mut R, n: usize, z_max: f64, p_max: f64) -> JetPoint {
    let (q, p) = random_cotangent(r, n, p_max);
    JetPoint::projected(r.gen_range(-z_max..=z_max), &q, &p).expect("random point is on the constraint set")
}

/// Curve in J^1(S^n) through `base`, kept on the constraint set.
fn jet_curve(base: &JetPoint, dz: f64, dq: Vec<f64>, dp: Vec<f64>) -> Curve {
    let (z0, q0, p0) = (base.z, base.q().to_vec(), base.p().to_vec());
    Box::new(move |s: f64| {
        let q: Vec<f64> = q0.iter().zip(&dq).map(|(a, b)| a + s * b).collect();
        let p: Vec<f64> = p0.iter().zip(&dp).map(|(a, b)| a + s * b).collect();
        JetPoint::projected(z0 + s * dz, &q, &p).expect("curve stays near the sphere").to_vec()
    })
}

/// Curve on the cylinder `|z|^2 = 1 + eps` through `(z0, w0)`.
fn cylinder_curve(z0: Vec<f64>, w0: Vec<f64>, a: Vec<f64>, b: Vec<f64>, eps: f64) -> Curve {
    let r = (1.0 + eps).sqrt();
    Box::new(move |s: f64| {
        let z: Vec<f64> = z0.iter().zip(&a).map(|(x, y)| x + s * y).collect();
        let mut v = scale(&normalized(&z), r);
        v.extend(w0.iter().zip(&b).map(|(x, y)| x + s * y));
        v
    })
}

// ---------------------------------------------------------------------------
// Jet space

pub fn jet_suite(cfg: &SuiteConfig) -> Vec<Report> {
    let n = cfg.n;
    let cc = cfg.check_config();
    let grid: Vec<SpherePoint> = sphere_grid(n, cfg.grid).into_iter().map(|q| SpherePoint::new(q).unwrap()).collect();
    let raw: Vec<Vec<f64>> = grid.iter().map(|q| q.as_slice().to_vec()).collect();
    let fields = standard_fields(n);
    let mut out = Vec::new();

    let lifts: Vec<Report> = fields.iter().map(|f| verify_jet_lift_legendrian(f, &grid, &cc)).collect();
    out.push(Report::merge(&format!("jet: Legendrian lifts of {} standard fields", fields.len()), &lifts));

    let grads: Vec<Report> = fields
        .iter()
        .map(|f| scalar("gradient", "", f.gradient_check(&raw, 1e-5), 1e-6))
        .collect();
    let mut g = Report::merge("jet: analytic gradients match central differences", &grads);
    g.note = "relative gradient error at step 1e-5".into();
    out.push(g);

    let orth: Vec<Report> = fields
        .iter()
        .map(|f| {
            check_scalar("", "", &raw, &|q| {
                let j = jet_lift(f, &SpherePoint::new(q.to_vec()).unwrap()).unwrap();
                crate::vecops::dot(j.p(), j.q())
            }, 1e-12)
        })
        .collect();
    let mut o = Report::merge("jet: lifted p is orthogonal to q", &orth);
    o.note = "|p.q| after projection".into();
    out.push(o);

    let mut r = rng(cfg.seed);
    let lin: Vec<Sample> = (0..200)
        .map(|_| {
            let pt = random_jet_point(&mut r, n, 2.0, 1.0);
            let mk = |r: &mut rand_chacha::ChaCha8Rng| {
                let dq = reject(&random_gaussian_vec(r, n + 1), pt.q());
                let dp = random_gaussian_vec(r, n + 1);
                let dp = crate::vecops::axpy(&reject(&dp, pt.q()), -crate::vecops::dot(pt.p(), &dq), pt.q());
                let mut v = vec![r.gen_range(-1.0..1.0)];
                v.extend(dq);
                v.extend(dp);
                v
            };
            let (v1, v2) = (mk(&mut r), mk(&mut r));
            let (a, b) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
            let comb: Vec<f64> = v1.iter().zip(&v2).map(|(x, y)| a * x + b * y).collect();
            let f = |v: Vec<f64>| contact_form_j1(&pt, &TangentSample::new(pt.clone(), v).unwrap()).unwrap();
            let res = (f(comb) - a * f(v1) - b * f(v2)).abs();
            Sample::Residual(res, pt.to_vec())
        })
        .collect();
    out.push(Report::from_samples("jet: contact form is linear", "form(a u + b v) = a form(u) + b form(v)", 1e-12, lin));

    let corrupted = fields[n + 1].corrupted(0, 0.1);
    let bad = verify_jet_lift_legendrian(&corrupted, &grid, &cc);
    out.push(negative_control("jet lift of a field with corrupted gradient", &bad, 1e-2));

    let q0 = SpherePoint::north(n);
    let params: Vec<Vec<f64>> = linspace(-1.0, 1.0, 50).into_iter().map(|t| vec![t]).collect();
    let transverse = FnSampler {
        dim: 1,
        params,
        f: |t: &[f64]| {
            let mut v = vec![t[0]];
            v.extend_from_slice(q0.as_slice());
            v.extend(vec![0.0; n + 1]);
            v
        },
    };
    let bad = check_legendrian("transverse curve", &transverse, &JetForm { n }, &cc);
    out.push(negative_control("transverse curve z = t", &bad, 0.5));
    out
}

// ---------------------------------------------------------------------------
// Surgery model

pub fn surgery_suite(cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let n = cfg.n;
    let eps = cfg.eps;
    let m = n + 1;
    let cc = cfg.check_config();
    let pr = ProfilePair::new(eps)?;
    let c = 1.0 + eps;
    let sc = c.sqrt();
    let mut out = Vec::new();
    let mut r = rng(cfg.seed);

    // psi_W is a strict contactomorphism onto S_-1.
    let bundles: Vec<Vec<Curve>> = (0..cfg.grid)
        .map(|_| {
            let base = random_jet_point(&mut r, n, 2.0, 1.0);
            (0..2 * n + 1)
                .map(|_| {
                    let dz = r.gen_range(-1.0..1.0);
                    jet_curve(&base, dz, random_gaussian_vec(&mut r, m), random_gaussian_vec(&mut r, m))
                })
                .collect()
        })
        .collect();
    let strict = cc.with_tol(TOL_STRICT_PULLBACK);
    out.push(check_pullback(
        "surgery: psi_W pulls back the S_-1 form to dz + p dq",
        &bundles,
        &psi_w_flat,
        &JetForm { n },
        &SurgeryForm { n },
        PullbackMode::Strict,
        &strict,
    ));
    let doubled = |v: &[f64]| scale(&psi_w_flat(v), 2.0);
    let bad = check_pullback("scaled psi_W", &bundles, &doubled, &JetForm { n }, &SurgeryForm { n }, PullbackMode::Strict, &strict);
    out.push(negative_control("2 psi_W is not strict", &bad, 0.5));

    // psi is a conformal contactomorphism from the cylinder.
    let cyl: Vec<Vec<Curve>> = (0..cfg.grid.min(400))
        .map(|_| {
            let z0 = scale(&random_unit_vec(&mut r, m), sc);
            let w0 = random_gaussian_vec(&mut r, m);
            (0..2 * n + 1)
                .map(|_| cylinder_curve(z0.clone(), w0.clone(), random_gaussian_vec(&mut r, m), random_gaussian_vec(&mut r, m), eps))
                .collect()
        })
        .collect();
    let psi_map = move |v: &[f64]| psi_flat(v, eps);
    out.push(check_pullback(
        "surgery: psi is conformal from the cylinder",
        &cyl,
        &psi_map,
        &SurgeryForm { n },
        &JetForm { n },
        PullbackMode::Conformal,
        &cc.with_tol(1e-8),
    ));

    // Round trips.
    let jets: Vec<JetPoint> = (0..cfg.grid).map(|_| random_jet_point(&mut r, n, 2.0, 1.0)).collect();
    let rt: Vec<Sample> = jets
        .iter()
        .map(|j| {
            let back = psi_w_inv(&psi_w(j)).map(|b| dist_inf(&b.to_vec(), &j.to_vec())).unwrap_or(f64::INFINITY);
            Sample::Residual(back, j.to_vec())
        })
        .collect();
    out.push(Report::from_samples("surgery: psi_W^-1 psi_W = id", "algebraic inverse", 1e-12, rt));
    let rt: Vec<Sample> = (0..cfg.grid)
        .map(|_| {
            let pt = SurgeryPoint::new(scale(&random_unit_vec(&mut r, m), sc), random_gaussian_vec(&mut r, m)).unwrap();
            let back = psi(&pt, eps).map(|j| dist_inf(&psi_inv(&j, eps).to_vec(), &pt.to_vec())).unwrap_or(f64::INFINITY);
            Sample::Residual(back, pt.to_vec())
        })
        .collect();
    out.push(Report::from_samples("surgery: psi^-1 psi = id on the cylinder", "algebraic inverse", 1e-10, rt));

    // Endpoint identities: psi psi_W(C_eps) = (2, -q, 0), psi psi_W(L_2eps) = (-2, q, 0).
    let caps: Vec<Sample> = (0..cfg.grid)
        .map(|_| {
            let mut q = random_unit_vec(&mut r, m);
            let lower = q[n] <= -eps;
            let upper = q[n] >= eps;
            if !lower && !upper {
                q[n] = -q[n].abs() - eps;
                q = normalized(&q);
            }
            let lower = q[n] <= -eps;
            let (z, want) = if lower {
                let mut w = vec![2.0];
                w.extend(q.iter().map(|x| -x));
                w.extend(vec![0.0; m]);
                (sc, w)
            } else {
                let mut w = vec![-2.0];
                w.extend_from_slice(&q);
                w.extend(vec![0.0; m]);
                (-sc, w)
            };
            let mut v = vec![z];
            v.extend_from_slice(&q);
            v.extend(vec![0.0; m]);
            Sample::Residual(dist_inf(&psi_flat(&psi_w_flat(&v), eps), &want), v)
        })
        .collect();
    out.push(Report::from_samples(
        "surgery: psi psi_W endpoint identities",
        "C_eps -> (2, -q, 0) and L_2eps -> (-2, q, 0)",
        1e-12,
        caps,
    ));

    // Boundary locus z^2/4 + |p|^2 = 1 lands in S_1 cap S_-1.
    let locus: Vec<Sample> = (0..cfg.grid)
        .map(|_| {
            let z: f64 = r.gen_range(-2.0..2.0);
            let q = random_unit_vec(&mut r, m);
            let p = scale(&normalized(&reject(&random_gaussian_vec(&mut r, m), &q)), (1.0 - z * z / 4.0).sqrt());
            let j = JetPoint::new(z, SpherePoint::new(q).unwrap(), p).unwrap();
            Sample::Residual(membership(&psi_inv(&j, eps), Surface::Intersection, &pr).abs(), j.to_vec())
        })
        .collect();
    out.push(Report::from_samples(
        "surgery: psi^-1 of the boundary locus lies in S_1 cap S_-1",
        "z^2/4 + |p|^2 = 1",
        1e-10,
        locus,
    ));

    // d(iota_X omega) = omega.
    let lv: Vec<Sample> = (0..10)
        .map(|_| {
            let p = random_gaussian_vec(&mut r, 2 * m);
            let u = random_gaussian_vec(&mut r, 2 * m);
            let v = random_gaussian_vec(&mut r, 2 * m);
            Sample::Residual(liouville_defect(&p, &u, &v, 1e-4), p)
        })
        .collect();
    out.push(Report::from_samples("surgery: X is Liouville", "d(iota_X omega) = omega", 1e-8, lv));

    // Profile shape on a scan of [0, 2].
    let bad_shape = (0..=10_000)
        .filter(|k| {
            let x = 2.0 * *k as f64 / 10_000.0;
            let f_ok = (x > 1.0 - eps || pr.f(x) == 1.0)
                && (x < 1.0 - eps / 2.0 || (pr.f(x) - (x + eps)).abs() < 1e-14)
                && (x < 1.0 - eps || pr.f_d1(x) >= 0.0);
            let g_ok = (x > 1.0 || pr.g(x) == x)
                && (x < 1.0 + eps || (pr.g(x) - (1.0 + eps)).abs() < 1e-14)
                && (x <= 0.0 || x >= 1.0 + eps || pr.g_d1(x) > 0.0);
            !(f_ok && g_ok)
        })
        .count();
    out.push(scalar("surgery: profile pair shape on [0, 2]", "violations of the f, g shape constraints", bad_shape as f64, 0.5));

    // S_1 and S_-1 meet exactly where |w| = 1 and |z|^2 >= 1 + eps.
    let mismatches = (0..=2000)
        .filter(|k| {
            let a = 2.0 * *k as f64 / 2000.0;
            let pt = SurgeryPoint::new(scale(&random_unit_vec(&mut r, m), a.sqrt()), random_unit_vec(&mut r, m)).unwrap();
            let res = membership(&pt, Surface::SPlus, &pr);
            if a >= c + 1e-12 {
                res.abs() > 1e-12
            } else if a <= c - 1e-12 {
                res <= 0.0
            } else {
                false
            }
        })
        .count();
    out.push(scalar("surgery: S_1 cap S_-1 = {|w| = 1, |z|^2 >= 1 + eps}", "scan mismatches", mismatches as f64, 0.5));

    // S_{1,t} lies transverse to X.
    let mut on_surface = Vec::new();
    let mut transverse = Vec::new();
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let fam = S1tFamily::new(pr, t)?;
        let mut got = 0;
        while got < cfg.grid / 5 {
            if let Some(p) = fam.sample(&mut r, n) {
                let mut loc = p.to_vec();
                loc.push(t);
                on_surface.push(Sample::Residual(fam.residual(&p).unwrap_or(f64::INFINITY).abs(), loc.clone()));
                transverse.push((fam.transversality(&p).abs(), loc));
                got += 1;
            }
        }
    }
    out.push(Report::from_samples("surgery: S_1,t samples lie on the surface", "membership residual", TOL_MEMBERSHIP, on_surface));
    let fam = S1tFamily::new(pr, 0.5)?;
    let mut off = Vec::new();
    while off.len() < 200 {
        if let Some(p) = fam.sample(&mut r, n) {
            let v = p.to_vec();
            let pushed = SurgeryPoint::new(v[..m].to_vec(), scale(&v[m..], 1.1)).unwrap();
            off.push(Sample::Residual(fam.residual(&pushed).unwrap_or(f64::INFINITY).abs(), pushed.to_vec()));
        }
    }
    let bad = Report::from_samples("off surface", "", TOL_MEMBERSHIP, off);
    out.push(negative_control("S_1,t samples with w scaled by 1.1", &bad, 1e-2));
    out.push(lower_bound("surgery: S_1,t transverse to X", "|X . grad| > 1e-3", transverse, 1e-3));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Page chart

pub fn chart_suite(cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let n = cfg.n;
    let m = n + 1;
    let cc = cfg.check_config().with_tol(1e-7);
    let mut r = rng(cfg.seed);
    let mut out = Vec::new();

    let upper_point = |r: &mut rand_chacha::ChaCha8Rng, p_max: f64| loop {
        let j = random_jet_point(r, n, 0.0, p_max);
        if j.q()[n] > 0.1 {
            return j;
        }
    };
    let bundles: Vec<Vec<Curve>> = (0..cfg.grid)
        .map(|_| {
            let base = upper_point(&mut r, 1.0);
            (0..2 * n)
                .map(|_| cotangent_curve(&base, random_gaussian_vec(&mut r, m), random_gaussian_vec(&mut r, m)))
                .collect()
        })
        .collect();
    out.push(verify_chart_symplecto(&bundles, n, false, &cc));
    let bad = verify_chart_symplecto(&bundles, n, true, &cc);
    out.push(negative_control("page chart without the q_{n+1} factor", &bad, 1e-2));

    let pts: Vec<JetPoint> = (0..cfg.grid).map(|_| upper_point(&mut r, 1.0)).collect();
    let rt: Vec<Sample> = pts
        .iter()
        .map(|j| {
            let res = page_chart(j)
                .and_then(|(z, pp)| page_chart_inv(z, &pp))
                .map(|back| dist_inf(&back.to_vec(), &j.to_vec()))
                .unwrap_or(f64::INFINITY);
            Sample::Residual(res, j.to_vec())
        })
        .collect();
    out.push(Report::from_samples("chart: inverse o chart = id", "q_{n+1} > 0.1", 1e-10, rt));

    let unit: Vec<Sample> = pts
        .iter()
        .map(|j| {
            let p = normalized(j.p());
            let u = JetPoint::projected(0.0, j.q(), &p).unwrap();
            let res = page_chart(&u).map(|(_, pp)| (b_fn(&pp) - 1.0).abs()).unwrap_or(f64::INFINITY);
            Sample::Residual(res, u.to_vec())
        })
        .collect();
    out.push(Report::from_samples("chart: |p| = 1 maps to b = 1", "unit cotangent sphere is the level b = 1", 1e-10, unit));

    let nonneg: Vec<Sample> = (0..cfg.grid)
        .map(|_| {
            let x = random_gaussian_vec(&mut r, n);
            let y = random_gaussian_vec(&mut r, n);
            let b = b_fn(&PagePoint::new(x.clone(), y.clone()).unwrap());
            let at_zero = b_fn(&PagePoint::new(vec![0.0; n], y.clone()).unwrap());
            let mut loc = x;
            loc.extend(y);
            Sample::Residual((-b).max(0.0) + at_zero.abs(), loc)
        })
        .collect();
    out.push(Report::from_samples("chart: b >= 0 and b(0, y) = 0", "", 1e-15, nonneg));

    // nu_t(L) and nu_t(dL) cover the page at n = 1.
    let rho = CutoffRho::default();
    let mut cover = Vec::new();
    let mut overlaps = 0usize;
    for t in [0.05, 0.2, 0.35, 0.45] {
        for i in 0..60 {
            for k in 0..60 {
                let x = -1.0 + 2.0 * i as f64 / 59.0;
                let y = -2.0 + 4.0 * k as f64 / 59.0;
                let pp = PagePoint::new(vec![x], vec![y]).unwrap();
                if b_fn(&pp) > 1.0 {
                    continue;
                }
                let a = nu_t(&pp, t, &rho, Neighbourhood::L)?;
                let b = nu_t(&pp, t, &rho, Neighbourhood::BoundaryL)?;
                if a <= 0.0 && b <= 0.0 {
                    overlaps += 1;
                }
                cover.push(Sample::Residual(a.min(b).max(0.0), vec![x, y, t]));
            }
        }
    }
    out.push(Report::from_samples("chart: nu_t(L) and nu_t(dL) cover the page", "n = 1 scan", 1e-15, cover).with_extra("overlap_points", overlaps as f64));
    out.push(boolean("chart: nu_t(L) and nu_t(dL) overlap", "n = 1 scan", overlaps > 0));

    let inv: Vec<Sample> = (0..cfg.grid)
        .map(|_| {
            let x = random_gaussian_vec(&mut r, n);
            let y = random_gaussian_vec(&mut r, n);
            let (t, s) = (r.gen_range(0.0..1.0), r.gen_range(-1.0..1.0));
            let (x1, y1, t1, s1) = glue_f(&x, &y, t, s);
            let (x2, y2, t2, s2) = glue_f(&x1, &y1, t1, s1);
            let dt = (t2 - t).rem_euclid(1.0);
            let dt = dt.min(1.0 - dt);
            let res = dist_inf(&x2, &scale(&x, -1.0)).max(dist_inf(&y2, &scale(&y, -1.0))).max(dt).max((s2 - s).abs());
            Sample::Residual(res, vec![t, s])
        })
        .collect();
    out.push(Report::from_samples("chart: F^2 = (-x, -y, t, s)", "gluing map squared", 1e-12, inv));

    let coef = binding_coefficients_n1(BindingProfiles, 0.3);
    let mut dets = Vec::new();
    for i in 0..10 {
        for k in 0..10 {
            let y = -2.0 + 4.0 * i as f64 / 9.0;
            let rr = 0.05 + 0.95 * k as f64 / 9.0;
            dets.push((alpha_wedge_dalpha_3d(&coef, &[y, rr, 0.2], 1e-5).abs(), vec![y, rr]));
        }
    }
    out.push(lower_bound("chart: binding form is contact (n = 1)", "|alpha ^ d alpha| > 1e-6", dets, 1e-6));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Isotopy

/// The inner disks `D_t` on a shrunk disk grid, in jet coordinates.
struct DtSampler {
    t: f64,
    params: IsotopyParams,
    grid: Vec<Vec<f64>>,
}

impl Sampler for DtSampler {
    fn param_dim(&self) -> usize {
        self.params.n
    }
    fn params(&self) -> Vec<Vec<f64>> {
        self.grid.clone()
    }
    fn eval(&self, x: &[f64]) -> Vec<f64> {
        disk_d_flat(self.t, x, &self.params)
    }
}

/// `D_t` with the sign of `p` flipped for `t < 0`; a negative control for
/// the one-sided limit at `t = 0`.
pub fn mis_signed_disk(t: f64, x: &[f64], params: &IsotopyParams) -> Vec<f64> {
    let mut v = disk_d_flat(t, x, params);
    if t < 0.0 {
        let m = params.n + 1;
        for p in &mut v[1 + m..] {
            *p = -*p;
        }
    }
    v
}

/// Probe used for the one-sided limits at `t = 0`. `D_t` approaches `D_0`
/// like `sqrt(|t|)`, so the gap at this probe is about `2e-7`.
pub const ZERO_PROBE: f64 = 1e-14;

pub fn isotopy_suite(cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let n = cfg.n;
    let eps = cfg.eps;
    let params = IsotopyParams::new(n, eps)?;
    let cc = cfg.check_config();
    let ts = cfg.t_grid();
    let bd = disk_boundary_grid(n, 64);
    let rr = (1.0 + eps).sqrt();
    let mut out = Vec::new();

    let tb: Vec<(f64, Vec<f64>)> = ts.iter().flat_map(|&t| bd.iter().map(move |x| (t, x.clone()))).collect();
    let loc = |t: f64, x: &[f64]| {
        let mut l = vec![t];
        l.extend_from_slice(x);
        l
    };
    let k: Vec<Sample> = tb
        .par_iter()
        .map(|(t, x)| {
            let b = boundary_d(*t, x, eps).map(|b| (norm_sq(b.p()) - (1.0 - t * t)).abs()).unwrap_or(f64::INFINITY);
            Sample::Residual(b, loc(*t, x))
        })
        .collect();
    out.push(Report::from_samples("isotopy: sum p^2 = 1 - t^2 on dD_t", "K_eps derivation", 1e-9, k));

    let on: Vec<Sample> = tb
        .par_iter()
        .map(|(t, x)| {
            let d = disk_d_flat(*t, x, &params);
            Sample::Residual((d[0] * d[0] / 4.0 + norm_sq(&d[2 + n..]) - 1.0).abs(), loc(*t, x))
        })
        .collect();
    out.push(Report::from_samples("isotopy: dD_t lies on z^2/4 + |p|^2 = 1", "boundary of every slice", 1e-9, on));

    let pr = ProfilePair::new(eps)?;
    let mem: Vec<Sample> = tb
        .par_iter()
        .map(|(t, x)| {
            let b = boundary_d(*t, x, eps).unwrap();
            Sample::Residual(membership(&psi_inv(&b, eps), Surface::Intersection, &pr).abs(), loc(*t, x))
        })
        .collect();
    out.push(Report::from_samples("isotopy: psi^-1(dD_t) lies in S_1 cap S_-1", "boundary invariance", 1e-9, mem));

    let agree: Vec<Sample> = tb
        .par_iter()
        .map(|(t, x)| {
            let b = boundary_d(*t, x, eps).unwrap();
            let composed = pull_back_flat(&b.to_vec(), eps);
            let closed = pulled_back_boundary(*t, x, eps).unwrap().to_vec();
            Sample::Residual(dist_inf(&composed, &closed), loc(*t, x))
        })
        .collect();
    out.push(Report::from_samples("isotopy: pulled-back boundary matches the composed maps", "closed form vs psi_W^-1 psi^-1", 1e-10, agree));

    let grid = inner_disk_grid(n, cfg.grid, 1e-3);
    let slices: Vec<Report> = ts
        .iter()
        .map(|&t| check_legendrian("slice", &DtSampler { t, params, grid: grid.clone() }, &JetForm { n }, &cc))
        .collect();
    out.push(Report::merge(&format!("isotopy: every D_t slice is Legendrian ({} t-values)", ts.len()), &slices));

    let full = disk_grid(n, cfg.grid);
    let ends: Vec<Sample> = full
        .par_iter()
        .map(|x| {
            let d1 = disk_d_flat(1.0, x, &params);
            let q: Vec<f64> = d1[1..2 + n].to_vec();
            let mut c = vec![rr];
            c.extend(q.iter().map(|v| -v));
            c.extend(vec![0.0; n + 1]);
            let via_c = psi_flat(&psi_w_flat(&c), eps);
            let dm = disk_d_flat(-1.0, x, &params);
            let mut l2 = vec![-rr];
            l2.extend_from_slice(&dm[1..2 + n]);
            l2.extend(vec![0.0; n + 1]);
            let via_l2 = psi_flat(&psi_w_flat(&l2), eps);
            let cap = (eps - d1[1 + n]).max(0.0).max((eps - dm[1 + n]).max(0.0));
            Sample::Residual(dist_inf(&d1, &via_c).max(dist_inf(&dm, &via_l2)).max(cap), x.clone())
        })
        .collect();
    out.push(Report::from_samples("isotopy: D_1 = psi psi_W(C_eps), D_-1 = psi psi_W(L_2eps)", "pointwise", 1e-12, ends));

    let fam = |t: f64, x: &[f64]| disk_d_flat(t, x, &params);
    let gap = continuity_modulus("isotopy: D_t one-sided limits at t = 0", &fam, &ts, &full, 0.0, ZERO_PROBE, 1e-6);
    let coarse = continuity_modulus("", &fam, &ts[..2], &full, 0.0, 1e4 * ZERO_PROBE, 1e-6);
    let exponent = (coarse.max_residual / gap.max_residual).ln() / 1e4f64.ln();
    out.push(gap.with_extra("gap_exponent", exponent));
    let bad = |t: f64, x: &[f64]| mis_signed_disk(t, x, &params);
    let bad = continuity_modulus("mis-signed", &bad, &ts, &full, 0.0, ZERO_PROBE, 1e-6);
    out.push(negative_control("D_t with a mis-signed t < 0 branch", &bad, 1e-1));

    let inj: Vec<(Vec<f64>, Vec<f64>)> = disk_grid(n, 400).into_iter().map(|x| (x.clone(), disk_d_flat(0.5, &x, &params))).collect();
    out.push(check_injectivity("isotopy: D_0.5 is embedded at sampling resolution", &inj, &cc));
    let folded: Vec<(Vec<f64>, Vec<f64>)> = inj
        .iter()
        .flat_map(|(x, _)| {
            let mut mirror = x.clone();
            mirror[0] = -mirror[0];
            let mut f = x.clone();
            f[0] = f[0].abs();
            let image = disk_d_flat(0.5, &f, &params);
            [(x.clone(), image.clone()), (mirror, image)]
        })
        .collect();
    let bad = check_injectivity("folded", &folded, &cc);
    out.push(negative_control("D_0.5 precomposed with a fold", &bad, 0.5));

    let h = build_h_family(eps, &ts)?;
    out.extend(h_family_checks(&h, &ts, params, cfg)?);
    Ok(out)
}

fn h_family_checks(h: &HFamily, ts: &[f64], params: IsotopyParams, cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let n = params.n;
    let eps = params.eps;
    let rr = params.r();
    let mut out = Vec::new();
    let mut bv = Vec::new();
    let mut energy = Vec::new();
    for &t in ts {
        let p = h.profile(t)?;
        let (v, d) = p.eval_q(p.q0);
        bv.push(Sample::Residual((v - t * rr).abs().max((d - exact_boundary_slope(t, eps)).abs()), vec![t]));
        for k in 0..=400 {
            let tau = p.theta0 * k as f64 / 400.0;
            energy.push(Sample::Residual((rr * rr - p.energy(tau)).max(0.0), vec![t, tau]));
        }
    }
    out.push(Report::from_samples("isotopy: H_t boundary value and slope", "H = t sqrt(1+eps), H' = exact slope at q_{n+1,t}", 1e-9, bv));
    out.push(Report::from_samples("isotopy: H_t lifts satisfy z^2 + |p|^2 >= 1 + eps", "shortfall below 1 + eps", 1e-9, energy));

    let bd = disk_boundary_grid(n, 64);
    let mism: Vec<Sample> = ts
        .par_iter()
        .map(|&t| {
            let m = assemble_sphere(t, params, h).and_then(|s| s.boundary_mismatch(&bd)).unwrap_or(f64::INFINITY);
            Sample::Residual(m, vec![t])
        })
        .collect();
    out.push(Report::from_samples("isotopy: assembled spheres close up", "outer and inner boundaries agree", 1e-8, mism));

    let count = cfg.grid.min(500);
    let s1 = endpoint_sphere(&assemble_sphere(1.0, params, h)?)?;
    let stab = s_stab_model(n, eps)?;
    out.push(rename(stab.agreement(&s1, count, 1e-9), "isotopy: S(+1) = S_stab"));
    let sm1 = endpoint_sphere(&assemble_sphere(-1.0, params, h)?)?;
    let join = s_join_model(h.profile(-1.0)?, n, eps)?;
    out.push(rename(join.agreement(&sm1, count, 1e-9), "isotopy: S(-1) = S_join"));
    let bad = join.agreement(&s1, count, 1e-9);
    out.push(negative_control("S(+1) compared with S_join", &bad, 1e-2));
    Ok(out)
}

fn rename(mut r: Report, name: &str) -> Report {
    r.check = name.to_string();
    r
}

// ---------------------------------------------------------------------------
// Constructions

pub fn constructions_suite(cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let n = cfg.n;
    let eps = cfg.eps;
    let cc = cfg.check_config();
    let mut out = Vec::new();

    let pts = sphere_grid(n, cfg.grid);
    out.push(unknot_legendrian(&pts, 0.0, &cc));
    let bad = unknot_legendrian(&pts, 0.5, &cc);
    out.push(negative_control("unknot with scaled y", &bad, 1e-2));
    let unknot = unknot_meridian(n, 400);
    out.push(scalar("constructions: unknot meridian closes up", "first to last point", closure_gap(&unknot), 1e-9));
    let unknot_cusps = count_cusps(&unknot, n - 1);
    out.push(scalar("constructions: unknot has two cusps per meridian", "|cusps - 2|", (unknot_cusps as f64 - 2.0).abs(), 0.5));

    let disk = ExactLagrangianDisk::standard_filling(n, 0.9)?;
    let grid = inner_disk_grid(n, cfg.grid, 1e-2);
    out.push(scalar("constructions: standard filling is exact", "primitive-gradient identity", disk.exactness_defect(&grid, 1e-4), EXACTNESS_TOL));
    let corrupted = disk.corrupted(0.1);
    let bad = scalar("non-exact disk", "", corrupted.exactness_defect(&grid, 1e-4), EXACTNESS_TOL);
    out.push(negative_control("non-exact disk", &bad, 1e-2));
    let rejected = lambda_double(corrupted, Arc::new(CornerRho::default())).is_err();
    out.push(boolean("negative control: doubling rejects a non-exact disk", "construction error", rejected));

    let double = lambda_double(disk, Arc::new(CornerRho::default()))?;
    out.push(scalar("constructions: Lambda(L, L) halves meet", "seam gap", double.sphere.seam_gap(128), 1e-9));
    out.push(rename(double.sphere.legendrian(&cc, cfg.grid), "constructions: Lambda(L, L) is Legendrian"));
    let meridian = double.sphere.meridian(400);
    out.push(scalar("constructions: Lambda(L, L) meridian closes up", "first to last point", closure_gap(&meridian), 1e-9));
    let dc = count_cusps(&meridian, n - 1);
    out.push(scalar(
        "constructions: Lambda(L, L) and unknot cusp counts match",
        "|cusps(double) - cusps(unknot)|",
        (dc as f64 - unknot_cusps as f64).abs(),
        0.5,
    ));
    out.push(double.transversality(cfg.grid));

    let params = IsotopyParams::new(n, eps)?;
    let h = build_h_family(eps, &[-1.0, 1.0])?;
    let rr = params.r();
    let count = cfg.grid.min(500);
    let join = s_join_model(h.profile(-1.0)?, n, eps)?;
    out.push(rename(join.legendrian(&cc, count), "constructions: S_join is Legendrian"));
    let (lo, hi) = join.z_range(count);
    out.push(scalar("constructions: S_join z-range within +-sqrt(1+eps)", "overshoot", (lo.abs() - rr).max(hi.abs() - rr).max(0.0), 1e-12));
    out.push(scalar("constructions: S_join halves meet", "seam gap", join.seam_gap(64), 1e-9));
    let stab = s_stab_model(n, eps)?;
    out.push(rename(stab.legendrian(&cc.with_tol(1e-12), count), "constructions: S_stab is Legendrian"));
    out.push(scalar("constructions: S_stab halves meet", "seam gap", stab.seam_gap(64), 1e-12));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Open books

pub fn openbook_suite(cfg: &SuiteConfig) -> Result<Vec<Report>> {
    let n = cfg.n;
    let g = TwistProfile::default();
    let mut out = Vec::new();
    let trivial = OpenBookDesc::trivial(n);
    let st = trivial.stabilize("L")?;
    out.push(boolean(
        "openbook: stabilising Open(D^{2n}, id) gives Open(D(T*S^n), tau_S)",
        &st.canonical_text(),
        st.equivalent(&OpenBookDesc::cotangent_sphere(n)),
    ));
    out.push(boolean(
        "openbook: stabilisation adds one handle and one twist",
        "",
        st.page.handles.len() == trivial.page.handles.len() + 1
            && st.monodromy.len() == trivial.monodromy.len() + 1
            && st.binding_labels() == trivial.binding_labels(),
    ));
    let sphere = OpenBookDesc::cotangent_sphere(n);
    let back = sphere.surgery_rewrite("S")?.twist("S", -1)?;
    out.push(boolean("openbook: surgery then inverse twist reduces to the original", "", back.equivalent(&sphere)));
    let glued = glue(&RelativeOpenBook::ball().shifted()?, &RelativeOpenBook::ball_complement())?;
    out.push(boolean("openbook: ball and complement glue to monodromy tau_S", "", glued.monodromy == sphere.monodromy));
    out.push(boolean(
        "negative control: unshifted ball does not glue",
        "",
        glue(&RelativeOpenBook::ball(), &RelativeOpenBook::ball_complement()).is_err(),
    ));
    out.push(check_zero_section_involution(n, cfg.grid, cfg.seed, &g));
    out.push(check_identity_outside_support(n, cfg.grid, cfg.seed, &g));
    out.push(check_twist_symplectic(n, cfg.grid, cfg.seed, &g, 0.0, 1e-5));
    let bad = check_twist_symplectic(n, cfg.grid, cfg.seed, &g, 0.5, 1e-5);
    out.push(negative_control("Dehn twist with scaled p", &bad, 1e-2));
    let bad = check_identity_outside_support(n, cfg.grid, cfg.seed, &TwistProfile::new(0.1, 2.5)?);
    out.push(negative_control("twist profile with wide support", &bad, 1e-2));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().to_string(), name);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SuiteConfig::new(2, 0.1).is_ok());
        assert!(SuiteConfig::new(0, 0.1).is_err());
        assert!(SuiteConfig::new(5, 0.1).is_err());
        assert!(SuiteConfig::new(2, 0.9).is_err());
        assert!(SuiteConfig::new(2, 0.0).is_err());
    }

    #[test]
    fn report_helpers() {
        let r = scalar("x", "", 0.5, 1e-2);
        assert!(!r.pass);
        let nc = negative_control("x", &r, 1e-2);
        assert!(nc.pass && nc.max_residual < nc.tol);
        assert!(!negative_control("y", &scalar("y", "", 1e-3, 1.0), 1e-2).pass);
        let lb = lower_bound("m", "", vec![(0.5, vec![]), (0.2, vec![])], 0.1);
        assert!(lb.pass && (lb.max_residual + 0.2).abs() < 1e-15);
        assert!(!lower_bound("m", "", vec![(0.05, vec![])], 0.1).pass);
        assert!(boolean("b", "", true).pass && !boolean("b", "", false).pass);
    }
}
