//! Dense symmetric matrices for the small (d <= 5) Hessians used in the
//! curvature diagnostics, with a cyclic Jacobi eigenvalue solver.

/// Symmetric matrix stored row-major at full density.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    /// Outer product v v^T.
    pub fn outer(v: &[f64]) -> Self {
        let n = v.len();
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(v[i] * v[j]);
            }
        }
        Self { n, a }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.a {
            *v *= c;
        }
    }

    /// self += c * other.
    pub fn add_scaled(&mut self, other: &SymMatrix, c: f64) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        for (s, o) in self.a.iter_mut().zip(&other.a) {
            *s += c * o;
        }
    }

    /// self += e_idx v^T + v e_idx^T (symmetric rank-two update).
    pub fn add_sym_basis_outer(&mut self, idx: usize, v: &[f64]) {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        for (k, &vk) in v.iter().enumerate() {
            self.add(idx, k, vk);
            self.add(k, idx, vk);
        }
    }

    /// Largest |a_ij - a_ji| over all pairs.
    pub fn max_asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// Eigenvalues in ascending order, via cyclic Jacobi rotations.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut a = self.a.clone();
        if n == 1 {
            return vec![a[0]];
        }
        let scale: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let at = |a: &[f64], i: usize, j: usize| a[i * n + j];
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += at(&a, i, j).powi(2);
                }
            }
            if off.sqrt() <= 1e-15 * scale {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = at(&a, p, q);
                    if apq.abs() <= 1e-18 * scale {
                        continue;
                    }
                    let theta = (at(&a, q, q) - at(&a, p, p)) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = at(&a, k, p);
                        let akq = at(&a, k, q);
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = at(&a, p, k);
                        let aqk = at(&a, q, k);
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| at(&a, i, i)).collect();
        eig.sort_by(|x, y| x.total_cmp(y));
        eig
    }
}
