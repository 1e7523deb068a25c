//! Cyclic complex Jacobi diagonalization for the 4x4 manifold Hamiltonians.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Hamiltonian = Matrix4<Complex64>;

const HERMITIAN_TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of one orbital manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldEigensystem {
    /// Ascending, GHz.
    pub energies: [f64; 4],
    /// Column `i` is the eigenvector of `energies[i]` in the
    /// `{e_x dn, e_x up, e_y dn, e_y up}` basis.
    pub states: Matrix4<Complex64>,
}

impl ManifoldEigensystem {
    pub fn state(&self, i: usize) -> Vector4<Complex64> {
        self.states.column(i).into_owned()
    }

    /// `<i| op |j>` between eigenstates.
    pub fn matrix_element(&self, op: &Hamiltonian, i: usize, j: usize) -> Complex64 {
        (self.state(i).adjoint() * op * self.state(j))[(0, 0)]
    }

    /// Energy difference between the centres of the upper and lower pairs.
    pub fn branch_splitting(&self) -> f64 {
        0.5 * (self.energies[2] + self.energies[3] - self.energies[0] - self.energies[1])
    }
}

fn frobenius(m: &Hamiltonian) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn off_diagonal(m: &Hamiltonian) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += m[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Fixes the free phase of each eigenvector: the component of largest
/// magnitude is made real and positive, ties going to the lowest basis index.
pub fn apply_phase_convention(states: &mut Matrix4<Complex64>) {
    for mut col in states.column_iter_mut() {
        let max = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            continue;
        }
        let pivot = col.iter().position(|c| c.norm() >= max * (1.0 - 1e-9)).unwrap_or(0);
        let c = col[pivot];
        let phase = c.conj() / c.norm();
        for v in col.iter_mut() {
            *v *= phase;
        }
    }
}

/// Diagonalizes a Hermitian 4x4 matrix.
///
/// Returns ascending energies and orthonormal eigenvectors under the
/// deterministic phase convention of [`apply_phase_convention`]. Degenerate
/// subspaces come back in whatever (deterministic) basis the sweep produces.
pub fn diagonalize_manifold(h: &Hamiltonian) -> Result<ManifoldEigensystem> {
    if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("Hamiltonian"));
    }
    let scale = frobenius(h);
    let deviation = frobenius(&(h - h.adjoint()));
    let tolerance = HERMITIAN_TOLERANCE * scale;
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }

    let mut a = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = Hamiltonian::identity();
    let target = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&a) <= target {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let mut energies = [0.0; 4];
    let mut states = Hamiltonian::zeros();
    for (k, &i) in order.iter().enumerate() {
        energies[k] = a[(i, i)].re;
        states.set_column(k, &v.column(i));
    }
    apply_phase_convention(&mut states);
    Ok(ManifoldEigensystem { energies, states })
}

/// One Jacobi rotation annihilating `a[(p, q)]`, accumulated into `v`.
fn rotate(a: &mut Hamiltonian, v: &mut Hamiltonian, p: usize, q: usize) {
    let apq = a[(p, q)];
    let magnitude = apq.norm();
    if magnitude == 0.0 {
        return;
    }
    let phase = apq / magnitude;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * magnitude);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = 1 except G_pp = G_qq = c, G_pq = s e^{i phi}, G_qp = -s e^{-i phi}
    let g_pq = phase * s;
    let g_qp = -phase.conj() * s;

    // A <- A G (columns p, q)
    for k in 0..4 {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * c;
    }
    // A <- G^H A (rows p, q)
    for k in 0..4 {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * g_qp.conj();
        a[(q, k)] = apk * g_pq.conj() + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..4 {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn check(h: &Hamiltonian, sys: &ManifoldEigensystem) {
        let norm = frobenius(h);
        for i in 0..4 {
            let r = h * sys.state(i) - sys.state(i) * c(sys.energies[i], 0.0);
            assert!(r.norm() < 1e-12 * norm.max(1.0), "residual {}", r.norm());
        }
        let gram = sys.states.adjoint() * sys.states;
        assert!((gram - Hamiltonian::identity()).norm() < 1e-12);
        assert!(sys.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn scalar_matrix() {
        let h = Hamiltonian::identity() * c(3.5, 0.0);
        let sys = diagonalize_manifold(&h).unwrap();
        assert_eq!(sys.energies, [3.5; 4]);
        check(&h, &sys);
    }

    #[test]
    fn dense_complex_matrix() {
        let mut h = Hamiltonian::zeros();
        let entries = [
            (0, 1, c(1.0, 2.0)),
            (0, 2, c(-0.5, 0.3)),
            (0, 3, c(0.0, -1.1)),
            (1, 2, c(2.2, 0.0)),
            (1, 3, c(0.4, 0.9)),
            (2, 3, c(-1.3, -0.7)),
        ];
        for (i, j, z) in entries {
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
        for (i, d) in [4.0, -1.0, 0.5, 2.0].into_iter().enumerate() {
            h[(i, i)] = c(d, 0.0);
        }
        let sys = diagonalize_manifold(&h).unwrap();
        check(&h, &sys);
        let trace: f64 = sys.energies.iter().sum();
        assert!((trace - 5.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = Hamiltonian::identity();
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(diagonalize_manifold(&h), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn phase_convention_makes_pivot_real_positive() {
        let mut h = Hamiltonian::zeros();
        h[(0, 2)] = c(0.0, -1.0);
        h[(2, 0)] = c(0.0, 1.0);
        h[(1, 3)] = c(0.0, 1.0);
        h[(3, 1)] = c(0.0, -1.0);
        let sys = diagonalize_manifold(&h).unwrap();
        for col in sys.states.column_iter() {
            let pivot = col.iter().find(|z| z.norm() > 1e-9).unwrap();
            assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        }
    }
}
