//! Numerical certification engine.
//!
//! Every geometric claim is checked the same way: sample a parametrised
//! object, push parameter directions forward by central differences, and
//! evaluate the relevant 1-form (or compare two of them). Reports carry the
//! worst normalised residual and where it occurred. Reductions are max/count
//! only, computed sequentially over an index-ordered buffer, so the outcome
//! does not depend on how rayon schedules the evaluations.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::vecops::{dist, dot, norm, sub};

/// Pushforward norms below this are treated as degenerate.
pub const DEGENERATE_NORM: f64 = 1e-10;

/// Default thresholds.
pub const TOL_STRICT_PULLBACK: f64 = 1e-9;
pub const TOL_LEGENDRIAN: f64 = 1e-6;
pub const TOL_MEMBERSHIP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub fd_step: f64,
    pub tol: f64,
    /// Target number of samples per parameter grid.
    pub grid_size: usize,
    /// Number of points in the isotopy parameter grid.
    pub t_count: usize,
    /// Half-width of excluded collars around cusps and corners, in parameter units.
    pub collar: f64,
    /// Injectivity thresholds: output distance / parameter distance.
    pub eta_out: f64,
    pub eta_in: f64,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-5,
            tol: TOL_LEGENDRIAN,
            grid_size: 1000,
            t_count: 101,
            collar: 1e-2,
            eta_out: 1e-4,
            eta_in: 1e-1,
            seed: 7,
        }
    }
}

impl CheckConfig {
    pub fn with_tol(&self, tol: f64) -> Self {
        Self { tol, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fd_step > 1e-9 && self.fd_step < 1e-2) {
            return Err(Error::Argument(format!(
                "fd_step {} outside (1e-9, 1e-2)",
                self.fd_step
            )));
        }
        if self.tol <= 10.0 * self.fd_step * self.fd_step {
            return Err(Error::Argument(format!(
                "tol {} below the finite-difference floor 10*h^2 = {}",
                self.tol,
                10.0 * self.fd_step * self.fd_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub check: String,
    pub max_residual: f64,
    pub argmax: Vec<f64>,
    pub samples: usize,
    pub excluded: usize,
    pub tol: f64,
    pub pass: bool,
    pub note: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

/// Outcome of evaluating one sample.
#[derive(Debug, Clone)]
pub enum Sample {
    Residual(f64, Vec<f64>),
    Excluded,
}

impl Report {
    /// Reduce an index-ordered list of sample outcomes. Ties keep the first
    /// occurrence; a NaN residual counts as an infinite one.
    pub fn from_samples(check: &str, note: &str, tol: f64, samples: Vec<Sample>) -> Self {
        let mut max_residual = 0.0_f64;
        let mut argmax = Vec::new();
        let mut count = 0;
        let mut excluded = 0;
        for s in samples {
            match s {
                Sample::Residual(r, loc) => {
                    count += 1;
                    let r = if r.is_nan() { f64::INFINITY } else { r };
                    if r > max_residual || argmax.is_empty() {
                        if r > max_residual || count == 1 {
                            max_residual = r;
                            argmax = loc;
                        }
                    }
                }
                Sample::Excluded => excluded += 1,
            }
        }
        Self {
            check: check.to_string(),
            max_residual,
            argmax,
            samples: count,
            excluded,
            tol,
            pass: count > 0 && max_residual < tol,
            note: note.to_string(),
            extra: BTreeMap::new(),
        }
    }

    /// Combine reports over disjoint sample sets. Tolerance and note come from
    /// the first part.
    pub fn merge(check: &str, parts: &[Report]) -> Self {
        let mut out = parts[0].clone();
        out.check = check.to_string();
        for p in &parts[1..] {
            if p.max_residual > out.max_residual || p.max_residual.is_nan() {
                out.max_residual = p.max_residual;
                out.argmax = p.argmax.clone();
            }
            out.samples += p.samples;
            out.excluded += p.excluded;
            for (k, v) in &p.extra {
                let e = out.extra.entry(k.clone()).or_insert(*v);
                *e = e.max(*v);
            }
        }
        out.pass = out.samples > 0 && out.max_residual < out.tol;
        out
    }

    pub fn with_extra(mut self, key: &str, value: f64) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }

    /// One-line human summary.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:<48} max={:.3e} tol={:.1e} n={} excl={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.check,
            self.max_residual,
            self.tol,
            self.samples,
            self.excluded
        )
    }
}

/// A 1-form on a coordinate space, evaluated on a tangent vector at a point.
pub trait OneForm: Sync {
    fn eval(&self, point: &[f64], v: &[f64]) -> f64;
}

impl<F> OneForm for F
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    fn eval(&self, point: &[f64], v: &[f64]) -> f64 {
        self(point, v)
    }
}

/// `dz + p.dq` on J^1(S^n), coordinates laid out as `[z, q(n+1), p(n+1)]`.
#[derive(Debug, Clone, Copy)]
pub struct JetForm {
    pub n: usize,
}

impl OneForm for JetForm {
    fn eval(&self, point: &[f64], v: &[f64]) -> f64 {
        let m = self.n + 1;
        let p = &point[1 + m..1 + 2 * m];
        let dq = &v[1..1 + m];
        v[0] + dot(p, dq)
    }
}

/// `sum(2 z_i dw_i + w_i dz_i)` on R^{2n+2}, coordinates `[z(n+1), w(n+1)]`.
/// This is the contraction of `dz ^ dw` with the Liouville field `2z d_z - w d_w`.
#[derive(Debug, Clone, Copy)]
pub struct SurgeryForm {
    pub n: usize,
}

impl OneForm for SurgeryForm {
    fn eval(&self, point: &[f64], v: &[f64]) -> f64 {
        let m = self.n + 1;
        let (z, w) = point.split_at(m);
        let (dz, dw) = v.split_at(m);
        2.0 * dot(z, dw) + dot(w, dz)
    }
}

/// `dz - y.dx` on J^1(R^n) = R^{2n+1}, coordinates `[x(n), y(n), z]`.
#[derive(Debug, Clone, Copy)]
pub struct DarbouxForm {
    pub n: usize,
}

impl OneForm for DarbouxForm {
    fn eval(&self, point: &[f64], v: &[f64]) -> f64 {
        let n = self.n;
        let y = &point[n..2 * n];
        let dx = &v[..n];
        v[2 * n] - dot(y, dx)
    }
}

/// A parametrised object sampled on a flat parameter chart.
pub trait Sampler: Sync {
    fn param_dim(&self) -> usize;
    fn params(&self) -> Vec<Vec<f64>>;
    fn eval(&self, param: &[f64]) -> Vec<f64>;
    /// Parameters inside cusp or corner collars are skipped.
    fn excluded(&self, _param: &[f64]) -> bool {
        false
    }
}

/// Central-difference derivative of `f` at `at` along `dir`.
pub fn pushforward<F>(f: F, at: &[f64], dir: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let plus: Vec<f64> = at.iter().zip(dir).map(|(a, d)| a + h * d).collect();
    let minus: Vec<f64> = at.iter().zip(dir).map(|(a, d)| a - h * d).collect();
    let fp = f(&plus);
    let fm = f(&minus);
    fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

/// Fourth-order central-difference derivative of `f` at `at` along `dir`.
pub fn pushforward4<F>(f: F, at: &[f64], dir: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let shifted = |c: f64| -> Vec<f64> { at.iter().zip(dir).map(|(a, d)| a + c * h * d).collect() };
    let (p2, p1, m1, m2) = (f(&shifted(2.0)), f(&shifted(1.0)), f(&shifted(-1.0)), f(&shifted(-2.0)));
    (0..p1.len()).map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h)).collect()
}

/// Central-difference velocity of a curve at s = 0.
pub fn curve_velocity<F>(curve: F, h: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let a = curve(h);
    let b = curve(-h);
    a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
}

/// Fourth-order central-difference velocity of a curve at s = 0.
pub fn curve_velocity4<F>(curve: F, h: f64) -> Vec<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    let (p2, p1, m1, m2) = (curve(2.0 * h), curve(h), curve(-h), curve(-2.0 * h));
    (0..p1.len()).map(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h)).collect()
}

/// Max over samples and parameter directions of `|alpha(v)| / |v|` where `v`
/// is the finite-difference pushforward of a coordinate direction.
pub fn check_legendrian(
    name: &str,
    sampler: &dyn Sampler,
    form: &dyn OneForm,
    cfg: &CheckConfig,
) -> Report {
    let d = sampler.param_dim();
    let params = sampler.params();
    let h = cfg.fd_step;
    let per_sample: Vec<Vec<Sample>> = params
        .par_iter()
        .map(|m| {
            if sampler.excluded(m) {
                return vec![Sample::Excluded];
            }
            let point = sampler.eval(m);
            (0..d)
                .map(|k| {
                    let dir = crate::vecops::basis(d, k);
                    let v = pushforward(|x| sampler.eval(x), m, &dir, h);
                    let nv = norm(&v);
                    if nv < DEGENERATE_NORM {
                        Sample::Excluded
                    } else {
                        Sample::Residual(form.eval(&point, &v).abs() / nv, m.clone())
                    }
                })
                .collect()
        })
        .collect();
    Report::from_samples(
        name,
        "tangent spaces lie in the contact hyperplane field",
        cfg.tol,
        per_sample.into_iter().flatten().collect(),
    )
}

/// Legendrian check for a map defined on the unit sphere S^n, using
/// great-circle differences along an orthonormal tangent frame at each point.
pub fn check_legendrian_sphere(
    name: &str,
    points: &[Vec<f64>],
    map: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    form: &dyn OneForm,
    excluded: &(dyn Fn(&[f64]) -> bool + Sync),
    cfg: &CheckConfig,
) -> Report {
    let h = cfg.fd_step;
    let per_sample: Vec<Vec<Sample>> = points
        .par_iter()
        .map(|p| {
            if excluded(p) {
                return vec![Sample::Excluded];
            }
            let point = map(p);
            crate::vecops::complement_basis(p)
                .into_iter()
                .map(|e| {
                    let v = curve_velocity(|s| map(&great_circle(p, &e, s)), h);
                    let nv = norm(&v);
                    if nv < DEGENERATE_NORM {
                        Sample::Excluded
                    } else {
                        Sample::Residual(form.eval(&point, &v).abs() / nv, p.clone())
                    }
                })
                .collect()
        })
        .collect();
    Report::from_samples(
        name,
        "tangent spaces lie in the contact hyperplane field",
        cfg.tol,
        per_sample.into_iter().flatten().collect(),
    )
}

/// `cos(s) p + sin(s) e` for unit `p` and unit `e` orthogonal to it.
pub fn great_circle(p: &[f64], e: &[f64], s: f64) -> Vec<f64> {
    let (sn, c) = s.sin_cos();
    p.iter().zip(e).map(|(a, b)| c * a + sn * b).collect()
}

pub type Curve = Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullbackMode {
    /// `map^* target == source` exactly.
    Strict,
    /// `map^* target == c * source` with one positive `c` per point.
    Conformal,
}

/// Compare `map^* target` with `source` on tangent vectors given as curves
/// through sample points. Each entry of `points` is a bundle of curves
/// through a common base point.
pub fn check_pullback(
    name: &str,
    points: &[Vec<Curve>],
    map: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    source: &dyn OneForm,
    target: &dyn OneForm,
    mode: PullbackMode,
    cfg: &CheckConfig,
) -> Report {
    let h = cfg.fd_step;
    let results: Vec<Vec<Sample>> = points
        .par_iter()
        .map(|curves| {
            let base = curves[0](0.0);
            let image = map(&base);
            let pairs: Vec<(f64, f64, f64)> = curves
                .iter()
                .map(|c| {
                    let v = curve_velocity4(|s| c(s), h);
                    let w = curve_velocity4(|s| map(&c(s)), h);
                    (source.eval(&base, &v), target.eval(&image, &w), norm(&v))
                })
                .collect();
            match mode {
                PullbackMode::Strict => pairs
                    .iter()
                    .map(|&(a, b, nv)| {
                        if nv < DEGENERATE_NORM {
                            Sample::Excluded
                        } else {
                            Sample::Residual((b - a).abs() / nv, base.clone())
                        }
                    })
                    .collect(),
                PullbackMode::Conformal => {
                    // Ratio from the vector with the largest source value,
                    // then the defect of every vector against that ratio.
                    let best = pairs
                        .iter()
                        .filter(|p| p.2 > DEGENERATE_NORM)
                        .max_by(|a, b| (a.0 / a.2).abs().partial_cmp(&(b.0 / b.2).abs()).unwrap());
                    let Some(&(a0, b0, _)) = best else {
                        return vec![Sample::Excluded];
                    };
                    if a0.abs() < 1e-8 {
                        return vec![Sample::Excluded];
                    }
                    let ratio = b0 / a0;
                    if ratio <= 0.0 {
                        return vec![Sample::Residual(f64::INFINITY, base.clone())];
                    }
                    pairs
                        .iter()
                        .map(|&(a, b, nv)| {
                            if nv < DEGENERATE_NORM {
                                Sample::Excluded
                            } else {
                                Sample::Residual((b - ratio * a).abs() / nv, base.clone())
                            }
                        })
                        .collect()
                }
            }
        })
        .collect();
    let note = match mode {
        PullbackMode::Strict => "pulled-back form equals the model form",
        PullbackMode::Conformal => "pulled-back form is a positive multiple of the model form",
    };
    Report::from_samples(name, note, cfg.tol, results.into_iter().flatten().collect())
}

/// Flags pairs of samples that land closer than `eta_out` in the output
/// while lying further than `eta_in` apart in the parameter domain. The
/// residual is the number of flagged pairs; the argmax holds the first pair
/// of parameters found.
pub fn check_injectivity(name: &str, samples: &[(Vec<f64>, Vec<f64>)], cfg: &CheckConfig) -> Report {
    let hits: Vec<Option<(usize, usize)>> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            for j in i + 1..samples.len() {
                let (pi, oi) = &samples[i];
                let (pj, oj) = &samples[j];
                if dist(oi, oj) < cfg.eta_out && dist(pi, pj) > cfg.eta_in {
                    return Some((i, j));
                }
            }
            None
        })
        .collect();
    let flagged: Vec<(usize, usize)> = hits.into_iter().flatten().collect();
    let argmax = flagged
        .first()
        .map(|&(i, j)| {
            let mut v = samples[i].0.clone();
            v.extend_from_slice(&samples[j].0);
            v
        })
        .unwrap_or_default();
    Report {
        check: name.to_string(),
        max_residual: flagged.len() as f64,
        argmax,
        samples: samples.len(),
        excluded: 0,
        tol: 1.0,
        pass: flagged.is_empty(),
        note: "no two distant parameters map to nearby points".into(),
        extra: BTreeMap::new(),
    }
}

/// Step sizes of a one-parameter family over a t-grid, plus the one-sided
/// gaps between the slice at `t0` and the slices at `t0 +- probe`.
///
/// The residual is the larger one-sided gap; the report also records the
/// largest adjacent-slice step and the empirical Lipschitz estimate.
pub fn continuity_modulus(
    name: &str,
    family: &(dyn Fn(f64, &[f64]) -> Vec<f64> + Sync),
    t_grid: &[f64],
    x_grid: &[Vec<f64>],
    t0: f64,
    probe: f64,
    tol: f64,
) -> Report {
    let steps: Vec<(f64, f64)> = t_grid
        .par_windows(2)
        .map(|w| {
            let sup = x_grid
                .iter()
                .map(|x| dist(&family(w[1], x), &family(w[0], x)))
                .fold(0.0, f64::max);
            (sup, sup / (w[1] - w[0]))
        })
        .collect();
    let max_step = steps.iter().map(|s| s.0).fold(0.0, f64::max);
    let lipschitz = steps.iter().map(|s| s.1).fold(0.0, f64::max);
    let samples: Vec<Sample> = x_grid
        .iter()
        .map(|x| {
            let at = family(t0, x);
            let left = dist(&family(t0 - probe, x), &at);
            let right = dist(&family(t0 + probe, x), &at);
            Sample::Residual(left.max(right), x.clone())
        })
        .collect();
    Report::from_samples(name, "family is continuous across the branch switch", tol, samples)
        .with_extra("max_adjacent_step", max_step)
        .with_extra("lipschitz_estimate", lipschitz)
}

/// Max over samples of an absolute scalar residual.
pub fn check_scalar(
    name: &str,
    note: &str,
    points: &[Vec<f64>],
    residual: &(dyn Fn(&[f64]) -> f64 + Sync),
    tol: f64,
) -> Report {
    let samples: Vec<Sample> = points
        .par_iter()
        .map(|p| Sample::Residual(residual(p).abs(), p.clone()))
        .collect();
    Report::from_samples(name, note, tol, samples)
}

/// Max distance between two samplers evaluated on the same parameters.
pub fn check_agreement(
    name: &str,
    params: &[Vec<f64>],
    a: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    b: &(dyn Fn(&[f64]) -> Vec<f64> + Sync),
    tol: f64,
) -> Report {
    let samples: Vec<Sample> = params
        .par_iter()
        .map(|m| Sample::Residual(crate::vecops::dist_inf(&a(m), &b(m)), m.clone()))
        .collect();
    Report::from_samples(name, "two construction routes agree pointwise", tol, samples)
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let one_way = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.par_iter()
            .map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .reduce(|| 0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    crate::vecops::dist_inf(a, b)
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

pub fn vector_relative_error(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b)) / norm(a).max(norm(b)).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Line;
    impl Sampler for Line {
        fn param_dim(&self) -> usize {
            1
        }
        fn params(&self) -> Vec<Vec<f64>> {
            (0..10).map(|k| vec![k as f64 / 10.0]).collect()
        }
        fn eval(&self, m: &[f64]) -> Vec<f64> {
            // A curve (x, y, z) = (0, 0, s) in J^1(R): pure Reeb direction.
            vec![0.0, 0.0, m[0]]
        }
    }

    #[test]
    fn reeb_curve_is_maximally_non_legendrian() {
        let r = check_legendrian("reeb", &Line, &DarbouxForm { n: 1 }, &CheckConfig::default());
        assert!((r.max_residual - 1.0).abs() < 1e-9);
        assert!(!r.pass);
    }

    #[test]
    fn config_validation() {
        assert!(CheckConfig::default().validate().is_ok());
        let bad = CheckConfig { fd_step: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = CheckConfig { tol: 1e-11, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn report_pass_iff_below_tol() {
        let r = Report::from_samples(
            "x",
            "",
            1e-3,
            vec![Sample::Residual(1e-4, vec![0.0]), Sample::Residual(2e-3, vec![1.0]), Sample::Excluded],
        );
        assert!(!r.pass);
        assert_eq!(r.argmax, vec![1.0]);
        assert_eq!(r.excluded, 1);
        assert_eq!(r.samples, 2);
    }

    #[test]
    fn figure_eight_is_flagged() {
        // Lemniscate x = sin(2s), y = sin(s): s = 0 and s = pi hit the origin.
        let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..400)
            .map(|k| {
                let s = 2.0 * std::f64::consts::PI * k as f64 / 400.0;
                (vec![s.cos(), s.sin()], vec![(2.0 * s).sin(), s.sin()])
            })
            .collect();
        let r = check_injectivity("fig8", &samples, &CheckConfig::default());
        assert!(!r.pass);
        assert_eq!(r.argmax.len(), 4);
    }

    #[test]
    fn constant_family_has_zero_modulus() {
        let fam = |_t: f64, x: &[f64]| x.to_vec();
        let xs = vec![vec![0.1], vec![0.5]];
        let r = continuity_modulus("const", &fam, &[-1.0, 0.0, 1.0], &xs, 0.0, 1e-13, 1e-6);
        assert_eq!(r.max_residual, 0.0);
        assert_eq!(r.extra["lipschitz_estimate"], 0.0);
    }
}
