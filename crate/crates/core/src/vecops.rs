//! Small dense-vector helpers. Everything here works on plain slices; the
//! dimensions involved are tiny (at most 2n+3 with n <= 4).

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn normalized(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    scale(a, 1.0 / n)
}

/// Component of `v` orthogonal to the unit vector `u`.
pub fn reject(v: &[f64], u: &[f64]) -> Vec<f64> {
    let c = dot(v, u);
    axpy(v, -c, u)
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

pub fn basis(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Orthonormal basis of the orthogonal complement of the unit vector `u`
/// (Gram-Schmidt against the standard basis).
pub fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let dim = u.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    // Try standard basis vectors in order of least alignment with u.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| u[a].abs().partial_cmp(&u[b].abs()).unwrap());
    for i in order {
        let mut v = reject(&basis(dim, i), u);
        for w in &out {
            v = reject(&v, w);
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            out.push(scale(&v, 1.0 / nv));
        }
        if out.len() == dim - 1 {
            break;
        }
    }
    out
}

/// Determinant of the Gram matrix of `cols`, by Gaussian elimination with
/// partial pivoting.
pub fn gram_det(cols: &[Vec<f64>]) -> f64 {
    let k = cols.len();
    let mut m: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| dot(&cols[i], &cols[j])).collect()).collect();
    let mut det = 1.0;
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap()).unwrap();
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for j in c..k {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    det
}
