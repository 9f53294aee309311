//! Dense complex matrices: a fixed 2×2 type for single-qubit work and a
//! square row-major matrix for whole-circuit unitaries.

use std::ops::Mul;

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Mat2 {
        Mat2([[a, b], [c, d]])
    }

    pub fn dagger(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn scale(&self, s: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }

    /// Max-abs deviation of U†U from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.dagger() * *self).max_abs_diff(&Mat2::IDENTITY)
    }

    /// `2 − |tr(U†V)|`: zero iff the matrices agree up to a global phase.
    pub fn phase_distance(&self, other: &Mat2) -> f64 {
        (2.0 - (self.dagger() * *other).trace().norm()).max(0.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl UnitaryMatrix {
    pub fn identity(dim: usize) -> UnitaryMatrix {
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = ONE;
        }
        UnitaryMatrix { dim, data }
    }

    pub fn zeros(dim: usize) -> UnitaryMatrix {
        UnitaryMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    /// Build from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_rows(dim: usize, entries: Vec<C64>) -> Option<UnitaryMatrix> {
        (entries.len() == dim * dim).then_some(UnitaryMatrix { dim, data: entries })
    }

    pub fn from_mat2(m: &Mat2) -> UnitaryMatrix {
        UnitaryMatrix {
            dim: 2,
            data: vec![m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]],
        }
    }

    pub fn to_mat2(&self) -> Option<Mat2> {
        (self.dim == 2).then(|| Mat2::new(self.data[0], self.data[1], self.data[2], self.data[3]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> UnitaryMatrix {
        let n = self.dim;
        let mut out = UnitaryMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &UnitaryMatrix) -> UnitaryMatrix {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = UnitaryMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> UnitaryMatrix {
        UnitaryMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn max_abs_diff(&self, other: &UnitaryMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "comparison dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn unitarity_error(&self) -> f64 {
        self.dagger()
            .matmul(self)
            .max_abs_diff(&UnitaryMatrix::identity(self.dim))
    }
}
