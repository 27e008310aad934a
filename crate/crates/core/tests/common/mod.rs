//! Random matrices, states and channels for the integration tests.
#![allow(dead_code)]

use qmengine::channels::KrausSet;
use qmengine::qlinalg::{adjoint, matmul, trace, SquareMatrix, C64};
use qmengine::qstate::DensityMatrix;
use rand::Rng;

pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize) -> SquareMatrix {
    SquareMatrix::from_row_major(dim, (0..dim * dim).map(|_| random_complex(rng)).collect()).unwrap()
}

/// `G G† / Tr(G G†)` for a random `G`: full rank, Hermitian, unit trace.
pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = random_matrix(rng, dim);
    let gg = matmul(&g, &adjoint(&g)).unwrap();
    let tr = trace(&gg).re;
    DensityMatrix::new(gg.scale_real(1.0 / tr)).unwrap()
}

/// Random Kraus set with `outcomes` operators: random contractions stacked
/// into an `(outcomes·dim) × dim` block and completed to an isometry by
/// modified Gram–Schmidt, so that `Σ A†A = V†V = I`.
pub fn random_kraus<R: Rng>(rng: &mut R, dim: usize, outcomes: usize) -> KrausSet {
    let rows = outcomes * dim;
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| (0..rows).map(|_| random_complex(rng)).collect())
        .collect();
    for j in 0..dim {
        for k in 0..j {
            let proj: C64 = (0..rows).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            let (done, rest) = cols.split_at_mut(j);
            for (z, v) in rest[0].iter_mut().zip(&done[k]) {
                *z -= proj * v;
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in cols[j].iter_mut() {
            *z /= norm;
        }
    }
    let ops = (0..outcomes)
        .map(|n| {
            let mut op = SquareMatrix::zeros(dim);
            for i in 0..dim {
                for j in 0..dim {
                    op[(i, j)] = cols[j][n * dim + i];
                }
            }
            op
        })
        .collect();
    KrausSet::new("random", ops).unwrap()
}

/// Product of `count` random complex Givens rotations.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize, count: usize) -> SquareMatrix {
    let mut u = SquareMatrix::identity(dim);
    if dim < 2 {
        return u;
    }
    for _ in 0..count {
        let p = rng.gen_range(0..dim - 1);
        let q = rng.gen_range(p + 1..dim);
        let (s, c) = rng.gen_range(0.0..std::f64::consts::TAU).sin_cos();
        let phase = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
        let mut g = SquareMatrix::identity(dim);
        g[(p, p)] = C64::new(c, 0.0);
        g[(q, q)] = C64::new(c, 0.0);
        g[(p, q)] = -phase * s;
        g[(q, p)] = phase.conj() * s;
        u = matmul(&u, &g).unwrap();
    }
    u
}
