//! Seeded random generators for states, unitaries, instruments and POVMs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::discrimination::{Instrument, Povm, Subchannel};
use crate::linalg::eigen::eig_matrix;
use crate::linalg::hermitian::QuantumState;
use crate::linalg::matrix::{normalized, ComplexMatrix, C64};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite gaussian entries")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    random_complex_matrix(rng, d, d).hermitian_part()
}

/// Haar-random unit vector.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> QuantumState {
    QuantumState::from_ket(&random_ket(rng, d)).expect("unit vector")
}

/// Ginibre-distributed mixed state `G G† / Tr(G G†)`.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R, d: usize) -> QuantumState {
    let g = random_complex_matrix(rng, d, d);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    QuantumState::from_trusted(&m.scale(1.0 / tr), false)
}

/// Matrix with orthonormal columns, `rows >= cols`, from Gram-Schmidt on Gaussian columns.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols);
    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut v: Vec<C64> = (0..rows).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for q in &columns {
                let overlap = crate::linalg::matrix::inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= qi * overlap;
                }
            }
        }
        if let Some(u) = normalized(&v) {
            columns.push(u);
        }
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (j, c) in columns.iter().enumerate() {
        for (i, z) in c.iter().enumerate() {
            m[(i, j)] = *z;
        }
    }
    m
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    random_isometry(rng, d, d)
}

/// Instrument with `outcomes` subchannels of `kraus_per` Kraus operators each,
/// cut from the blocks of one random isometry.
pub fn random_instrument<R: Rng + ?Sized>(rng: &mut R, outcomes: usize, kraus_per: usize, d_in: usize, d_out: usize) -> Instrument {
    let v = random_isometry(rng, outcomes * kraus_per * d_out, d_in);
    let subchannels = (0..outcomes)
        .map(|i| {
            let kraus = (0..kraus_per)
                .map(|j| {
                    let offset = (i * kraus_per + j) * d_out;
                    let mut k = ComplexMatrix::zeros(d_out, d_in);
                    for r in 0..d_out {
                        for c in 0..d_in {
                            k[(r, c)] = v[(offset + r, c)];
                        }
                    }
                    k
                })
                .collect();
            Subchannel::new(kraus, format!("random_{i}")).expect("isometry blocks are trace-nonincreasing")
        })
        .collect();
    Instrument::new(subchannels).expect("isometry blocks sum to a channel")
}

/// `M_i = S^{-1/2} A_i†A_i S^{-1/2}` with `S = Σ A_i†A_i` for Gaussian `A_i`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, outcomes: usize, d: usize) -> Povm {
    let grams: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let a = random_complex_matrix(rng, d, d);
            a.adjoint().matmul(&a)
        })
        .collect();
    let mut s = ComplexMatrix::zeros(d, d);
    for g in &grams {
        s += g;
    }
    let inv_sqrt = eig_matrix(&s).expect("finite Gram sum").map(|x| 1.0 / x.sqrt());
    Povm::new(grams.iter().map(|g| inv_sqrt.matmul(g).matmul(&inv_sqrt).hermitian_part()).collect()).expect("normalized Gram elements form a POVM")
}
