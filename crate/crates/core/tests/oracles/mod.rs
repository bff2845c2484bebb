//! Independent dense reference computations built on nalgebra.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::PI;

use poslab_core::linalg::CMatrix;
use poslab_core::spectral::SimulationParams;

pub type C = Complex64;

pub fn to_na(m: &CMatrix) -> DMatrix<C> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

pub fn max_diff(a: &DMatrix<C>, b: &DMatrix<C>) -> f64 {
    (a - b).iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn vec_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Momenta `2 pi j / L`, `j = -N/2 .. N/2 - 1`.
pub fn momenta(params: &SimulationParams) -> Vec<f64> {
    let n = params.points() as i64;
    (-n / 2..n / 2)
        .map(|j| 2.0 * PI * j as f64 / params.length())
        .collect()
}

/// `2 x 2` symbol `c0 + (p sx + m sz) c1`, written out by hand.
fn symbol(p: f64, m: f64, c0: C, c1: C) -> [[C; 2]; 2] {
    [[c0 + c1 * m, c1 * p], [c1 * p, c0 - c1 * m]]
}

/// Position-space matrix of a translation-invariant operator, summed mode by
/// mode: `K[x, y] = (1/N) sum_p s(p) exp(i p (x - y) dx)`.
pub fn dense_from_symbol(params: &SimulationParams, s: impl Fn(f64) -> [[C; 2]; 2]) -> DMatrix<C> {
    let n = params.points();
    let dx = params.dx();
    let ps = momenta(params);
    let syms: Vec<_> = ps.iter().map(|&p| s(p)).collect();
    let mut kernel = vec![[[C::new(0.0, 0.0); 2]; 2]; n];
    for (d, k) in kernel.iter_mut().enumerate() {
        for (p, sy) in ps.iter().zip(&syms) {
            let ph = C::from_polar(1.0 / n as f64, p * d as f64 * dx);
            for a in 0..2 {
                for b in 0..2 {
                    k[a][b] += sy[a][b] * ph;
                }
            }
        }
    }
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (a, x) = (i / n, i % n);
        let (b, y) = (j / n, j % n);
        kernel[(x + n - y) % n][a][b]
    })
}

pub fn dense_projector(params: &SimulationParams, sign: f64) -> DMatrix<C> {
    let m = params.mass();
    dense_from_symbol(params, |p| {
        let e = (p * p + m * m).sqrt();
        symbol(p, m, C::new(0.5, 0.0), C::new(0.5 * sign / e, 0.0))
    })
}

pub fn dense_hamiltonian(params: &SimulationParams) -> DMatrix<C> {
    let m = params.mass();
    dense_from_symbol(params, |p| symbol(p, m, C::new(0.0, 0.0), C::new(1.0, 0.0)))
}

/// `exp(-i H t)` by Pade scaling and squaring.
pub fn expm(h: &DMatrix<C>, t: f64) -> DMatrix<C> {
    (h * C::new(0.0, -t)).exp()
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(h: &DMatrix<C>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn spectral_norm(a: &DMatrix<C>) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

/// Adaptive Dormand-Prince 5(4) integration of `i dpsi/dt = H psi`.
pub fn rk45_schrodinger(h: &DMatrix<C>, psi0: &[C], t_end: f64, tol: f64) -> Vec<C> {
    let f = |y: &DVector<C>| -> DVector<C> { (h * y) * C::new(0.0, -1.0) };
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mut y = DVector::from_column_slice(psi0);
    let mut t = 0.0;
    let mut step: f64 = 1e-3;
    while t < t_end {
        step = step.min(t_end - t);
        let mut k: Vec<DVector<C>> = vec![f(&y)];
        for row in A.iter() {
            let mut yi = y.clone();
            for (j, a) in row.iter().enumerate().take(k.len()) {
                if *a != 0.0 {
                    yi += &k[j] * C::new(a * step, 0.0);
                }
            }
            k.push(f(&yi));
        }
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for j in 0..7 {
            y5 += &k[j] * C::new(B5[j] * step, 0.0);
            y4 += &k[j] * C::new(B4[j] * step, 0.0);
        }
        let err = (&y5 - &y4).iter().fold(0.0, |a: f64, z| a.max(z.norm()));
        if err <= tol || step < 1e-12 {
            t += step;
            y = y5;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            0.9 * (tol / err).powf(0.2)
        };
        step *= factor.clamp(0.2, 5.0);
    }
    y.iter().copied().collect()
}

/// Bell-type rate matrix `R[to][from]` built from a wave function and `H`.
pub fn bell_rates(h: &DMatrix<C>, psi: &[C]) -> DMatrix<f64> {
    let k = psi.len();
    DMatrix::from_fn(k, k, |to, from| {
        let w = psi[from].norm_sqr();
        if to == from || w == 0.0 {
            return 0.0;
        }
        let j = 2.0 * (psi[to].conj() * h[(to, from)] * psi[from]).im;
        j.max(0.0) / w
    })
}

/// Wave function `exp(-i H t) psi0` by eigendecomposition.
pub struct ExactFlow {
    vectors: DMatrix<C>,
    values: Vec<f64>,
    coeffs: DVector<C>,
}

impl ExactFlow {
    pub fn new(h: &DMatrix<C>, psi0: &[C]) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let coeffs = eig.eigenvectors.adjoint() * DVector::from_column_slice(psi0);
        Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues.iter().copied().collect(),
            coeffs,
        }
    }

    pub fn at(&self, t: f64) -> Vec<C> {
        let phased = DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs
                .iter()
                .zip(&self.values)
                .map(|(c, e)| c * C::from_polar(1.0, -e * t)),
        );
        (&self.vectors * phased).iter().copied().collect()
    }
}

/// Continuous-time master equation `drho/dt = R(t) rho - diag(sum R) rho`
/// integrated by classical RK4 with step `h_step`. Also returns the expected
/// number of jumps `int sum_q rho(q) sum_q' R(q'|q) dt`.
pub fn master_equation(
    h: &DMatrix<C>,
    psi0: &[C],
    rho0: &[f64],
    t_end: f64,
    h_step: f64,
) -> (Vec<f64>, f64, f64) {
    let flow = ExactFlow::new(h, psi0);
    let k = rho0.len();
    // returns (drho, jump intensity)
    let rhs = |t: f64, rho: &[f64]| -> (Vec<f64>, f64) {
        let r = bell_rates(h, &flow.at(t));
        let mut d = vec![0.0; k];
        let mut intensity = 0.0;
        for from in 0..k {
            for to in 0..k {
                let flux = r[(to, from)] * rho[from];
                d[to] += flux;
                d[from] -= flux;
                intensity += flux;
            }
        }
        (d, intensity)
    };
    let steps = (t_end / h_step).round() as usize;
    let mut rho = rho0.to_vec();
    let mut jumps = 0.0;
    let mut max_drift: f64 = 0.0;
    for s in 0..steps {
        let t = s as f64 * h_step;
        let axpy = |y: &[f64], d: &[f64], c: f64| -> Vec<f64> {
            y.iter().zip(d).map(|(a, b)| a + c * b).collect()
        };
        let (k1, j1) = rhs(t, &rho);
        let (k2, j2) = rhs(t + 0.5 * h_step, &axpy(&rho, &k1, 0.5 * h_step));
        let (k3, j3) = rhs(t + 0.5 * h_step, &axpy(&rho, &k2, 0.5 * h_step));
        let (k4, j4) = rhs(t + h_step, &axpy(&rho, &k3, h_step));
        for q in 0..k {
            rho[q] += h_step / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
        jumps += h_step / 6.0 * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
        max_drift = max_drift.max((rho.iter().sum::<f64>() - rho0.iter().sum::<f64>()).abs());
    }
    (rho, jumps, max_drift)
}

/// Brute-force hard-core lattice Hamiltonian over an explicit list of
/// configurations (each a sorted site list).
pub fn brute_force_hamiltonian(
    sites: usize,
    max_particles: usize,
    kappa: f64,
    g: f64,
    source: usize,
) -> (Vec<Vec<usize>>, DMatrix<f64>) {
    let mut configs: Vec<Vec<usize>> = Vec::new();
    for n in 0..=max_particles {
        let mut sector: Vec<Vec<usize>> = (0u64..1 << sites)
            .filter(|m| m.count_ones() as usize == n)
            .map(|m| (0..sites).filter(|s| m & (1 << s) != 0).collect())
            .collect();
        sector.sort();
        configs.extend(sector);
    }
    let k = configs.len();
    let adjacent = |a: usize, b: usize| (a + 1) % sites == b || (b + 1) % sites == a;
    let h = DMatrix::from_fn(k, k, |i, j| {
        let (a, b) = (&configs[i], &configs[j]);
        if a.len() == b.len() {
            let only_a: Vec<_> = a.iter().filter(|s| !b.contains(s)).collect();
            let only_b: Vec<_> = b.iter().filter(|s| !a.contains(s)).collect();
            if only_a.len() == 1 && adjacent(*only_a[0], *only_b[0]) {
                return -kappa;
            }
            0.0
        } else {
            let (small, big) = if a.len() < b.len() { (a, b) } else { (b, a) };
            let mut grown = small.clone();
            grown.push(source);
            grown.sort();
            if big.len() == small.len() + 1 && !small.contains(&source) && grown == *big {
                g
            } else {
                0.0
            }
        }
    });
    (configs, h)
}

/// `int f(p) exp(i p x) dp / 2 pi` on `[-pmax, pmax]` by the trapezoid rule.
pub fn fourier_quadrature(f: impl Fn(f64) -> C, x: f64, pmax: f64, dp: f64) -> C {
    let n = (pmax / dp).ceil() as i64;
    let mut acc = C::new(0.0, 0.0);
    for j in -n..=n {
        let p = j as f64 * dp;
        let w = if j.abs() == n { 0.5 } else { 1.0 };
        acc += f(p) * C::from_polar(w * dp, p * x);
    }
    acc / (2.0 * PI)
}
