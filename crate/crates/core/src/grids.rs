//! Sample sets on spheres, disks and tangent spaces.
//!
//! Grid choice is configuration: the checks only need reasonably uniform
//! coverage. Spheres use a uniform angle for S^1, a Fibonacci lattice for
//! S^2 and tensor latitude grids above that; disks use the same idea one
//! dimension down.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::vecops::{normalized, reject};

const GOLDEN: f64 = 1.618_033_988_749_895;

/// Roughly `count` points on the unit sphere S^n in R^{n+1}.
pub fn sphere_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        0 => vec![vec![1.0], vec![-1.0]],
        1 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        2 => fibonacci_s2(count),
        _ => latitude_grid(n, count),
    }
}

fn fibonacci_s2(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * PI * i as f64 / GOLDEN;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Tensor grid in the last coordinate times a grid on S^{n-1}.
fn latitude_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    let lat = ((count as f64).powf(1.0 / n as f64)).ceil().max(2.0) as usize;
    let inner = (count / lat).max(2);
    let mut out = Vec::with_capacity(lat * inner);
    for k in 0..lat {
        let theta = PI * (k as f64 + 0.5) / lat as f64;
        let (s, c) = theta.sin_cos();
        for w in sphere_grid(n - 1, inner) {
            let mut p: Vec<f64> = w.iter().map(|x| x * s).collect();
            p.push(c);
            out.push(p);
        }
    }
    out
}

/// Roughly `count` points in the closed unit n-disk, including points on the
/// boundary sphere.
pub fn disk_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => (0..count)
            .map(|k| vec![-1.0 + 2.0 * k as f64 / (count - 1) as f64])
            .collect(),
        _ => {
            // Radial shells times sphere grids, radius spaced to keep the
            // density roughly uniform.
            let shells = ((count as f64).powf(1.0 / n as f64)).ceil() as usize + 1;
            let mut out = vec![vec![0.0; n]];
            let total_weight: f64 = (1..shells).map(|s| (s as f64).powi(n as i32 - 1)).sum();
            for s in 1..shells {
                let r = s as f64 / (shells - 1) as f64;
                let w = (s as f64).powi(n as i32 - 1) / total_weight;
                let m = ((count as f64 * w).round() as usize).max(n + 1);
                for d in sphere_grid(n - 1, m) {
                    out.push(d.iter().map(|x| x * r).collect());
                }
            }
            out
        }
    }
}

/// Points on the boundary sphere of the n-disk.
pub fn disk_boundary_grid(n: usize, count: usize) -> Vec<Vec<f64>> {
    sphere_grid(n - 1, count)
}

/// Uniform `count`-point grid on `[a, b]` including both endpoints.
pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    (0..count)
        .map(|k| {
            if k == count - 1 {
                b
            } else {
                a + (b - a) * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// The symmetric t-grid on [-1, 1]; for odd counts it contains 0 exactly.
pub fn t_grid(count: usize) -> Vec<f64> {
    let mut g = linspace(-1.0, 1.0, count);
    if count % 2 == 1 {
        g[count / 2] = 0.0;
    }
    g
}

/// Seeded random source shared by the samplers.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_gaussian_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    // Box-Muller.
    (0..dim)
        .map(|_| {
            let u1: f64 = rng.gen_range(1e-12..1.0);
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
        })
        .collect()
}

pub fn random_unit_vec<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    normalized(&random_gaussian_vec(rng, dim))
}

/// Random cotangent point (q, p) of S^n with |p| <= `p_max`.
pub fn random_cotangent<R: Rng>(rng: &mut R, n: usize, p_max: f64) -> (Vec<f64>, Vec<f64>) {
    let q = random_unit_vec(rng, n + 1);
    let p = reject(&random_gaussian_vec(rng, n + 1), &q);
    let target = p_max * rng.gen::<f64>();
    let np = crate::vecops::norm(&p);
    let p = if np > 0.0 {
        p.iter().map(|x| x * target / np).collect()
    } else {
        p
    };
    (q, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecops::norm;

    #[test]
    fn sphere_grids_lie_on_sphere() {
        for n in 1..=4 {
            let g = sphere_grid(n, 500);
            assert!(g.len() >= 250, "n={n} len={}", g.len());
            for p in &g {
                assert_eq!(p.len(), n + 1);
                assert!((norm(p) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn disk_grid_inside_and_touches_boundary() {
        for n in 1..=3 {
            let g = disk_grid(n, 1000);
            assert!(g.iter().all(|x| norm(x) <= 1.0 + 1e-12));
            assert!(g.iter().any(|x| (norm(x) - 1.0).abs() < 1e-12));
            assert!(g.len() >= 500, "n={n} len={}", g.len());
        }
    }

    #[test]
    fn t_grid_contains_anchors() {
        let g = t_grid(101);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[50], 0.0);
        assert_eq!(g[100], 1.0);
    }
}
