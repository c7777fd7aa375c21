//! Test problems: the two null-recurrent QBDs, the factorized complex family
//! `A(z) = (zR - I) P (zI - G)`, and seeded random instances of the same shape.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{c, eye, norm_inf, re, zeros, Matrix, C64};
use crate::poly::{Field, QuadMatrixPolynomial};
use crate::{QmeError, Result};

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub polynomial: QuadMatrixPolynomial,
    /// Number of distinct unimodular eigenvalues, each double.
    pub ell: usize,
    pub known_g: Option<Matrix>,
    pub known_r: Option<Matrix>,
    pub label: String,
    pub seed: Option<u64>,
}

impl ProblemInstance {
    /// Residuals of the attached solutions relative to `||A0||`.
    pub fn self_check(&self) -> Result<(Option<f64>, Option<f64>)> {
        let p = &self.polynomial;
        let scale = norm_inf(&p.a0).max(f64::MIN_POSITIVE);
        let g = self.known_g.as_ref().map(|g| p.residual_g(g)).transpose()?;
        let r = self.known_r.as_ref().map(|r| p.residual_r(r)).transpose()?;
        Ok((g.map(|x| x / scale), r.map(|x| x / scale)))
    }
}

/// Builds `A0 = -E0`, `A1 = I - E1`, `A2 = -E2`.
pub fn qbd(e0: &Matrix, e1: &Matrix, e2: &Matrix) -> Result<QuadMatrixPolynomial> {
    let m = e0.nrows();
    QuadMatrixPolynomial::with_field(-e0, eye(m) - e1, -e2, Field::Real)
}

type Q = Ratio<i64>;

fn rational_matrix(rows: [[Q; 4]; 4]) -> Matrix {
    Matrix::from_fn(4, 4, |i, j| re(*rows[i][j].numer() as f64 / *rows[i][j].denom() as f64))
}

fn example1_rational() -> [[[Q; 4]; 4]; 3] {
    let z = Q::from_integer(0);
    let q = Q::new(1, 4);
    let t = Q::new(3, 4);
    let a = Q::new(33, 160);
    let b = Q::new(7, 160);
    [
        [[z, z, z, q], [a, z, z, z], [q, z, z, z], [z, q, z, z]],
        [[z, z, z, z], [z, z, t, z], [z, t, z, z], [z, z, z, z]],
        [[z, t, z, z], [z, z, z, b], [z, z, z, z], [t, z, z, z]],
    ]
}

/// A 4x4 null-recurrent QBD with eigenvalues `0`, the cube roots of unity
/// (each double) and `inf`; `ell = 3`.
pub fn example1() -> ProblemInstance {
    let [e0, e1, e2] = example1_rational();
    debug_assert!((0..4).all(|i| (0..4).map(|j| e0[i][j] + e1[i][j] + e2[i][j]).sum::<Q>() == Q::from_integer(1)));
    let polynomial = qbd(&rational_matrix(e0), &rational_matrix(e1), &rational_matrix(e2)).expect("4x4 blocks");
    ProblemInstance {
        polynomial,
        ell: 3,
        known_g: None,
        known_r: None,
        label: "example1".into(),
        seed: None,
    }
}

/// `scale * tridiag(1, [ends, inner, ..., inner, ends], 1)` of order `p`.
fn tridiag_sym(p: usize, ends: f64, inner: f64, scale: f64) -> Matrix {
    Matrix::from_fn(p, p, |i, j| {
        let v = if i == j {
            if i == 0 || i == p - 1 {
                ends
            } else {
                inner
            }
        } else if i.abs_diff(j) == 1 {
            1.0
        } else {
            0.0
        };
        re(v * scale)
    })
}

/// The QBD with `E0 = [[0, S1], [S2, 0]]`, `E1 = 0`, `E2 = [[0, S2], [S1, 0]]`,
/// `m = 2p`, double eigenvalues at `1` and `-1`.
pub fn example2(p: usize) -> Result<ProblemInstance> {
    if p < 2 {
        return Err(QmeError::InvalidArgument(format!("example2 needs p >= 2, got {p}")));
    }
    let s1 = tridiag_sym(p, 3.0, 2.0, 1.0 / 8.0);
    let s2 = tridiag_sym(p, 4.0, 3.0, 1.0 / 10.0);
    let z = zeros(p, p);
    let e0 = crate::dense::block2(&z, &s1, &s2, &z);
    let e2 = crate::dense::block2(&z, &s2, &s1, &z);
    let polynomial = qbd(&e0, &zeros(2 * p, 2 * p), &e2)?;
    Ok(ProblemInstance {
        polynomial,
        ell: 2,
        known_g: None,
        known_r: None,
        label: format!("example2-p{p}"),
        seed: None,
    })
}

/// Unimodular eigenvalues of `G` for the three cases of the factorized family.
pub fn example3_mu(case: u32) -> Result<Vec<C64>> {
    let base = [c(0.6, 0.8), re(1.0), c(-0.8, -0.6), re(-1.0)];
    match case {
        1 => Ok(vec![c(0.6, 0.8), re(-1.0)]),
        2 => Ok(base.to_vec()),
        3 => Ok(base
            .into_iter()
            .chain([c(-0.6, 0.8), re(1.0), c(0.6, -0.8), re(-1.0)])
            .collect()),
        other => Err(QmeError::BadCase(other)),
    }
}

fn tridiag_p(m: usize) -> Matrix {
    Matrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
        0 => re(4.0),
        1 => re(-1.0),
        _ => re(0.0),
    })
}

/// `A0 = P G`, `A1 = -R P G - P`, `A2 = R P`.
pub fn factorized(p: &Matrix, g: &Matrix, r: &Matrix, field: Field) -> Result<QuadMatrixPolynomial> {
    let pg = p * g;
    let a1 = -(r * &pg) - p;
    QuadMatrixPolynomial::with_field(pg, a1, r * p, field)
}

fn upper_block(d11: &[C64], d22: &[C64], off: Matrix) -> Matrix {
    let l = d11.len();
    let m = l + d22.len();
    let mut a = zeros(m, m);
    for (i, &x) in d11.iter().enumerate() {
        a[(i, i)] = x;
    }
    for (k, &x) in d22.iter().enumerate() {
        a[(l + k, l + k)] = x;
    }
    a.view_mut((0, l), (l, m - l)).copy_from(&off);
    a
}

/// The factorized complex family with `P = tridiag(-1, 4, -1)`.
///
/// `G = [[diag(mu), G12], [0, diag(lambda)]]` with `lambda_k = 1/3 + 1/(ell + k)`
/// and `R = [[diag(mu)^-1, R12], [0, (2/3) diag(lambda)]]`. The off-diagonal blocks
/// are uniform on `[0, 1)`, drawn row by row from a `ChaCha8` stream seeded with
/// `seed`, `G12` first.
pub fn example3(m: usize, case: u32, seed: u64) -> Result<ProblemInstance> {
    let mu = example3_mu(case)?;
    let ell = mu.len();
    if m <= ell {
        return Err(QmeError::InvalidArgument(format!("example3 case {case} needs m > {ell}, got {m}")));
    }
    let lambda: Vec<C64> = (1..=m - ell).map(|k| re(1.0 / 3.0 + 1.0 / (ell + k) as f64)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows, cols| Matrix::from_row_iterator(rows, cols, (0..rows * cols).map(|_| re(rng.random::<f64>())));
    let g12 = draw(ell, m - ell);
    let r12 = draw(ell, m - ell);
    let g = upper_block(&mu, &lambda, g12);
    let mu_inv: Vec<C64> = mu.iter().map(|z| z.inv()).collect();
    let l22: Vec<C64> = lambda.iter().map(|x| x * (2.0 / 3.0)).collect();
    let r = upper_block(&mu_inv, &l22, r12);
    let polynomial = factorized(&tridiag_p(m), &g, &r, Field::Complex)?;
    Ok(ProblemInstance {
        polynomial,
        ell,
        known_g: Some(g),
        known_r: Some(r),
        label: format!("example3-m{m}-case{case}"),
        seed: Some(seed),
    })
}

/// Random member of the factorized family: `ell` distinct unimodular
/// eigenvalues (conjugate pairs realized as rotation blocks when `field` is
/// real), interior eigenvalues of `G` and `R` uniform on `(0, 0.9)`.
pub fn random_split_instance(m: usize, ell: usize, seed: u64, field: Field) -> Result<ProblemInstance> {
    if ell == 0 || ell >= m {
        return Err(QmeError::InvalidArgument(format!("need 1 <= ell < m, got ell = {ell}, m = {m}")));
    }
    if field == Field::Real && ell % 2 == 1 {
        return Err(QmeError::InvalidArgument("real instances need an even ell".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = zeros(m, m);
    let mut r = zeros(m, m);
    let interior = |rng: &mut ChaCha8Rng| 0.05 + 0.85 * rng.random::<f64>();
    match field {
        Field::Complex => {
            // Evenly spread angles with jitter keep the values well separated.
            let phase = rng.random::<f64>();
            for i in 0..ell {
                let t = std::f64::consts::TAU * (i as f64 + phase + 0.4 * rng.random::<f64>()) / ell as f64;
                let mu = C64::from_polar(1.0, t);
                g[(i, i)] = mu;
                r[(i, i)] = mu.inv();
            }
        }
        Field::Real => {
            let pairs = ell / 2;
            for k in 0..pairs {
                let lo = 0.15 + (k as f64) * (std::f64::consts::PI - 0.3) / pairs as f64;
                let t = lo + 0.6 * rng.random::<f64>() * (std::f64::consts::PI - 0.3) / pairs as f64;
                let (s, co) = t.sin_cos();
                let i = 2 * k;
                g[(i, i)] = re(co);
                g[(i, i + 1)] = re(-s);
                g[(i + 1, i)] = re(s);
                g[(i + 1, i + 1)] = re(co);
                r[(i, i)] = re(co);
                r[(i, i + 1)] = re(s);
                r[(i + 1, i)] = re(-s);
                r[(i + 1, i + 1)] = re(co);
            }
        }
    }
    for k in ell..m {
        g[(k, k)] = re(interior(&mut rng));
        r[(k, k)] = re(interior(&mut rng));
    }
    let entry = |rng: &mut ChaCha8Rng| match field {
        Field::Real => re(rng.random::<f64>()),
        Field::Complex => c(rng.random::<f64>(), rng.random::<f64>()),
    };
    for i in 0..ell {
        for j in ell..m {
            g[(i, j)] = entry(&mut rng);
        }
    }
    for i in 0..ell {
        for j in ell..m {
            r[(i, j)] = entry(&mut rng);
        }
    }
    let polynomial = factorized(&tridiag_p(m), &g, &r, field)?;
    Ok(ProblemInstance {
        polynomial,
        ell,
        known_g: Some(g),
        known_r: Some(r),
        label: format!("random-m{m}-l{ell}-s{seed}"),
        seed: Some(seed),
    })
}
