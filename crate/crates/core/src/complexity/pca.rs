//! First principal component by power iteration on the sample covariance.

use super::ComplexityError;

pub const TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 10_000;

/// Dominant direction of a set of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    /// Unit vector, oriented so the uncentered inputs project onto it with a
    /// nonnegative sum.
    pub direction: Vec<f64>,
    /// Mean of the inputs, subtracted before the covariance.
    pub mean: Vec<f64>,
    /// Variance of the centered inputs along `direction`.
    pub variance: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let h = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i * h..(i + 1) * h].iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

/// Normalised all-ones vector with a small index-dependent tilt, so the
/// start is not orthogonal to axis-aligned components.
fn start_vector(h: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..h).map(|i| 1.0 + 1e-3 * (i + 1) as f64 / h as f64).collect();
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

/// Computes the first principal component of `rows` (n x h).
///
/// Rows are mean-centered, the dominant eigenvector of the sample covariance
/// is found by power iteration (stop when the direction moves less than
/// 1e-10, at most 10 000 steps), and the sign is fixed so the sum of
/// projections of the raw rows is nonnegative.
pub fn first_principal_component<R: AsRef<[f64]>>(rows: &[R]) -> Result<Component, ComplexityError> {
    let n = rows.len();
    if n < 2 {
        return Err(ComplexityError::Degenerate(format!("need at least 2 vectors, got {n}")));
    }
    let h = rows[0].as_ref().len();
    if h == 0 || rows.iter().any(|r| r.as_ref().len() != h) {
        return Err(ComplexityError::Degenerate("vectors must share a positive dimension".into()));
    }

    let mut mean = vec![0.0; h];
    for r in rows {
        for (m, x) in mean.iter_mut().zip(r.as_ref()) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![0.0; h * h];
    let mut centered = vec![0.0; h];
    let mut scale = 0.0;
    for r in rows {
        for ((c, x), m) in centered.iter_mut().zip(r.as_ref()).zip(&mean) {
            *c = x - m;
            scale += x * x;
        }
        for i in 0..h {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            for j in i..h {
                cov[i * h + j] += ci * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..h {
        for j in i..h {
            let v = cov[i * h + j] / denom;
            cov[i * h + j] = v;
            cov[j * h + i] = v;
        }
    }
    let trace: f64 = (0..h).map(|i| cov[i * h + i]).sum();
    scale /= (n * h) as f64;
    if trace.is_nan() || trace <= 1e-20 * scale {
        return Err(ComplexityError::Degenerate("inputs have zero variance".into()));
    }

    let mut next = vec![0.0; h];
    let mut v = start_vector(h);
    mat_vec(&cov, &v, &mut next);
    if norm(&next) == 0.0 {
        // start landed in the null space; fall back to the largest-variance axis
        let axis = (0..h)
            .max_by(|&a, &b| cov[a * h + a].total_cmp(&cov[b * h + b]))
            .unwrap();
        v = vec![0.0; h];
        v[axis] = 1.0;
    }

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        mat_vec(&cov, &v, &mut next);
        let len = norm(&next);
        next.iter_mut().for_each(|x| *x /= len);
        let moved = next.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        std::mem::swap(&mut v, &mut next);
        if moved < TOLERANCE {
            break;
        }
    }

    let total_projection: f64 = rows
        .iter()
        .map(|r| r.as_ref().iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    if total_projection < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    // renormalise after the last division to keep the norm within 1e-12
    let len = norm(&v);
    v.iter_mut().for_each(|x| *x /= len);

    mat_vec(&cov, &v, &mut next);
    let variance = next.iter().zip(&v).map(|(a, b)| a * b).sum();
    Ok(Component {
        direction: v,
        mean,
        variance,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, SymmetricEigen};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    /// Dominant eigenvector of the centered covariance from a dense solver,
    /// with the same sign rule applied.
    fn oracle(rows: &[Vec<f64>]) -> Vec<f64> {
        let n = rows.len();
        let h = rows[0].len();
        let x = DMatrix::from_fn(n, h, |i, j| rows[i][j]);
        let mean = x.row_mean();
        let centered = DMatrix::from_fn(n, h, |i, j| x[(i, j)] - mean[j]);
        let cov = centered.transpose() * &centered / (n as f64 - 1.0);
        let eig = SymmetricEigen::new(cov);
        let top = eig.eigenvalues.imax();
        let mut u: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
        let total: f64 = rows.iter().map(|r| dot(r, &u)).sum();
        if total < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        u
    }

    fn random_rows(rng: &mut ChaCha8Rng, n: usize, h: usize) -> Vec<Vec<f64>> {
        (0..n).map(|_| (0..h).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn axis_aligned_variance() {
        let rows: Vec<Vec<f64>> = [1.0, 2.0, 3.5, 5.0].iter().map(|&a| vec![a, 0.0, 0.0]).collect();
        let c = first_principal_component(&rows).unwrap();
        assert!((c.direction[0] - 1.0).abs() < 1e-12, "{:?}", c.direction);
        assert!(c.direction[1].abs() < 1e-12 && c.direction[2].abs() < 1e-12);
        // negated inputs flip the orientation
        let neg: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        let c = first_principal_component(&neg).unwrap();
        assert!((c.direction[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn matches_dense_eigensolver_on_random_20x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows = random_rows(&mut rng, 20, 8);
        let c = first_principal_component(&rows).unwrap();
        let want = oracle(&rows);
        for (a, b) in c.direction.iter().zip(&want) {
            assert!((a - b).abs() < 1e-6, "{:?} vs {:?}", c.direction, want);
        }
        assert!((norm(&c.direction) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            first_principal_component(&[vec![0.1, 0.2], vec![0.1, 0.2]]),
            Err(ComplexityError::Degenerate(_))
        ));
        assert!(first_principal_component(&[vec![1.0, 2.0]]).is_err());
        assert!(first_principal_component::<Vec<f64>>(&[]).is_err());
        assert!(first_principal_component(&vec![vec![0.0; 3]; 4]).is_err());
        assert!(first_principal_component(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn projection_variance_beats_random_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows = random_rows(&mut rng, 30, 6);
        let c = first_principal_component(&rows).unwrap();
        let var_along = |u: &[f64]| {
            let proj: Vec<f64> = rows
                .iter()
                .map(|r| r.iter().zip(&c.mean).map(|(x, m)| x - m).zip(u).map(|(a, b)| a * b).sum())
                .collect();
            proj.iter().map(|p| p * p).sum::<f64>() / (rows.len() - 1) as f64
        };
        let best = var_along(&c.direction);
        assert!((best - c.variance).abs() < 1e-9);
        for _ in 0..1000 {
            let mut u: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let len = norm(&u);
            u.iter_mut().for_each(|x| *x /= len);
            assert!(var_along(&u) <= best + 1e-12);
        }
    }
}
