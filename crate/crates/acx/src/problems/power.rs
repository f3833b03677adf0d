//! Power iteration for the dominant eigenpair of a sparse symmetric matrix:
//! the mapping x -> Qx / |Qx|_inf has the dominant eigenvector (scaled to
//! unit max norm) as its fixed point.

use super::{CatalogError, MappingProblem, ProblemInstance, ProblemKind};
use crate::solver::Norm;
use crate::vecmath::{dot, norm_inf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Compressed sparse rows; only the matrix-vector product is needed.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k] as usize];
            }
            *o = acc;
        }
    }

    /// Symmetric sparse generator: off-diagonal entries are present with the
    /// given density and drawn uniform on [0,1]; the diagonal gets uniform
    /// [0,100] shifts, giving a wide spectrum with a narrow dominant gap.
    pub fn random_symmetric(n: usize, density: f64, diag_shift: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for (i, row) in rows.iter_mut().enumerate() {
            let d = rng.random_range(0.0..diag_shift);
            row.push((i as u32, d));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_range(0.0..1.0) < density {
                    let v = rng.random_range(0.0..1.0);
                    rows[i].push((j as u32, v));
                    rows[j].push((i as u32, v));
                }
            }
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_unstable_by_key(|&(j, _)| j);
            for &(j, v) in row.iter() {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self {
            n,
            indptr,
            indices,
            values,
        }
    }
}

/// A power-iteration instance exposing the matrix for residual checks.
pub struct PowerProblem {
    pub matrix: Arc<CsrMatrix>,
}

impl PowerProblem {
    pub fn new(matrix: CsrMatrix) -> Self {
        Self {
            matrix: Arc::new(matrix),
        }
    }

    /// Rayleigh quotient x'Qx / x'x, the eigenvalue estimate at `x`.
    pub fn rayleigh(&self, x: &[f64]) -> f64 {
        let mut qx = vec![0.0; self.matrix.n];
        self.matrix.matvec(x, &mut qx);
        dot(x, &qx) / dot(x, x)
    }

    /// Residual |Qx - lambda x|_inf with lambda the Rayleigh estimate.
    pub fn eigen_residual(&self, x: &[f64]) -> f64 {
        let mut qx = vec![0.0; self.matrix.n];
        self.matrix.matvec(x, &mut qx);
        let lambda = dot(x, &qx) / dot(x, x);
        qx.iter()
            .zip(x)
            .fold(0.0f64, |m, (q, v)| m.max((q - lambda * v).abs()))
    }

    /// The normalized iteration map. A zero product (possible only from the
    /// zero vector for these generators) poisons the output, which the
    /// driver treats as a failure.
    pub fn mapping_problem(&self) -> MappingProblem {
        let q = Arc::clone(&self.matrix);
        let q2 = Arc::clone(&self.matrix);
        MappingProblem::new(self.matrix.n, move |x, out| {
            q.matvec(x, out);
            let m = norm_inf(out);
            if m == 0.0 {
                out.fill(f64::NAN);
            } else {
                for v in out.iter_mut() {
                    *v /= m;
                }
            }
        })
        .with_objective(move |x| {
            let mut qx = vec![0.0; q2.n];
            q2.matvec(x, &mut qx);
            dot(x, &qx) / dot(x, x)
        })
    }
}

/// Builds the paper-scale generator instance at the given size.
pub fn power_method(n: usize, seed: u64) -> PowerProblem {
    PowerProblem::new(CsrMatrix::random_symmetric(n, 0.1, 100.0, seed))
}

pub(super) fn instantiate(dim: Option<usize>, seed: u64) -> Result<ProblemInstance, CatalogError> {
    let n = dim.unwrap_or(1000);
    if n < 2 {
        return Err(CatalogError::BadDimension {
            name: "power".into(),
            dim: n,
            reason: "needs at least two rows".into(),
        });
    }
    let problem = power_method(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let x0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    Ok(ProblemInstance {
        name: "power",
        kind: ProblemKind::Mapping(problem.mapping_problem()),
        x0,
        bounds: None,
        stabilize: false,
        tol: 1e-7,
        norm: Norm::Inf,
        quadratic: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Mapping;

    fn diag_matrix(values: &[f64]) -> CsrMatrix {
        let n = values.len();
        CsrMatrix {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n as u32).collect(),
            values: values.to_vec(),
        }
    }

    #[test]
    fn one_step_on_diagonal() {
        let p = PowerProblem::new(diag_matrix(&[2.0, 1.0]));
        let mut m = p.mapping_problem();
        let mut out = [0.0; 2];
        m.apply(&[1.0, 1.0], &mut out);
        assert_eq!(out, [1.0, 0.5]);
    }

    #[test]
    fn fixed_point_is_dominant_eigenvector() {
        let p = PowerProblem::new(diag_matrix(&[2.0, 1.0]));
        let mut m = p.mapping_problem();
        let rep =
            crate::solver::fixed_point_iterate(&mut m, &[1.0, 1.0], 1e-12, Norm::Inf, 10_000);
        assert!(rep.converged());
        assert!((rep.x_final[0].abs() - 1.0).abs() < 1e-10);
        assert!(rep.x_final[1].abs() < 1e-10);
        assert!((p.rayleigh(&rep.x_final) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_vector_poisons_the_map() {
        let p = PowerProblem::new(diag_matrix(&[2.0, 1.0]));
        let mut m = p.mapping_problem();
        let mut out = [0.0; 2];
        m.apply(&[0.0, 0.0], &mut out);
        assert!(out.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn map_output_always_has_unit_max_norm() {
        use rand::{Rng, SeedableRng};
        let p = power_method(60, 5);
        let mut m = p.mapping_problem();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut out = vec![0.0; 60];
        for _ in 0..20 {
            let x: Vec<f64> = (0..60).map(|_| rng.random_range(-1.0..1.0)).collect();
            m.apply(&x, &mut out);
            assert!((norm_inf(&out) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn double_application_is_scale_invariant() {
        // F(F(c x)) equals F(F(x)) for positive c: the first application
        // already normalizes away the magnitude.
        let p = power_method(40, 9);
        let mut m = p.mapping_problem();
        let x: Vec<f64> = (0..40).map(|i| 0.1 + (i as f64) * 0.01).collect();
        let xc: Vec<f64> = x.iter().map(|v| 4.0 * v).collect();
        let mut a = vec![0.0; 40];
        let mut b = vec![0.0; 40];
        let mut tmp = vec![0.0; 40];
        m.apply(&x, &mut tmp);
        let t2 = tmp.clone();
        m.apply(&t2, &mut a);
        m.apply(&xc, &mut tmp);
        let t2 = tmp.clone();
        m.apply(&t2, &mut b);
        for j in 0..40 {
            assert!((a[j] - b[j]).abs() < 1e-14);
        }
    }
}
