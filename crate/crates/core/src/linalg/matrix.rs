//! Dense complex matrices in row-major order.
//!
//! This is the universal numeric carrier of the library: operators are
//! `n x m` matrices, kets are the `n x 1` case. Dimensions stay small
//! (tens, not thousands), so everything is straightforward dense
//! arithmetic with no blocking or sparsity.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::Error;

pub type Complex64 = Complex<f64>;

pub const ONE: Complex64 = Complex { re: 1.0, im: 0.0 };
pub const ZERO: Complex64 = Complex { re: 0.0, im: 0.0 };
pub const I: Complex64 = Complex { re: 0.0, im: 1.0 };

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from row-major data. Panics if the data length does not match.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::new(rows, cols, data)
    }

    /// Real-valued convenience constructor.
    pub fn from_real(rows: usize, cols: usize, reals: &[f64]) -> Self {
        assert_eq!(reals.len(), rows * cols);
        Self::new(rows, cols, reals.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    /// Computational basis ket |i> of dimension `dim`.
    pub fn basis_ket(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index out of range");
        let mut m = Self::zeros(dim, 1);
        m.set(index, 0, ONE);
        m
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-vector check (kets are rows x 1).
    pub fn is_ket(&self) -> bool {
        self.cols == 1
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    /// Entrywise complex conjugate in the fixed computational basis.
    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn add_m(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "add: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub_m(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "sub: shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul: inner dimensions differ");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                let row_base = k * other.cols;
                let out_base = i * other.cols;
                for j in 0..other.cols {
                    out.data[out_base + j] += a * other.data[row_base + j];
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean norm; identical to the Frobenius norm, named for kets.
    pub fn norm(&self) -> f64 {
        self.frobenius_norm()
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn dist(&self, other: &Self) -> f64 {
        self.sub_m(other).frobenius_norm()
    }

    /// Normalized copy (zero vectors are returned unchanged).
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.scale_re(1.0 / n)
        } else {
            self.clone()
        }
    }

    /// Inner product <self|other> for kets.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert!(self.is_ket() && other.is_ket(), "inner product expects kets");
        assert_eq!(self.rows, other.rows, "inner: dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// Outer product |self><other|.
    pub fn outer(&self, other: &Self) -> Self {
        assert!(self.is_ket() && other.is_ket(), "outer product expects kets");
        Self::from_fn(self.rows, other.rows, |r, c| self.data[r] * other.data[c].conj())
    }

    /// Projector |self><self| for a ket.
    pub fn projector(&self) -> Self {
        self.outer(self)
    }

    /// Kronecker product.
    pub fn tensor(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// |A - A\u{2020}|_F, zero exactly when Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut sum = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self.get(i, j) - self.get(j, i).conj();
                sum += d.norm_sqr();
            }
        }
        sum.sqrt()
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tolerance
    }

    /// |V\u{2020}V - I|_F, zero exactly for isometries.
    pub fn isometry_defect(&self) -> f64 {
        self.dagger().matmul(self).dist(&Self::identity(self.cols))
    }

    /// Flatten row-major into a column vector: vec(M)[r*cols + c] = M[r, c].
    pub fn vec(&self) -> Self {
        Self::new(self.rows * self.cols, 1, self.data.clone())
    }

    /// Inverse of [`vec`](Self::vec): reshape a column vector back into a
    /// `rows_out x cols_out` matrix with M[b, i] = v[b*cols_out + i].
    pub fn unvec(&self, rows_out: usize, cols_out: usize) -> Result<Self, Error> {
        if !self.is_ket() || self.rows != rows_out * cols_out {
            return Err(Error::dims(
                "unvec input",
                format!("{}x{}", self.rows, self.cols),
                format!("{}x1", rows_out * cols_out),
            ));
        }
        Ok(Self::new(rows_out, cols_out, self.data.clone()))
    }

    /// Partial trace over the complement of `keep`, for a square matrix on a
    /// tensor product with factor dimensions `dims` (first factor is the
    /// slowest index). `keep` lists the factor positions to retain, in order.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self, Error> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total {
            return Err(Error::dims(
                "partial_trace input",
                format!("{}x{}", self.rows, self.cols),
                format!("{total}x{total}"),
            ));
        }
        if keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::InvalidArgument("partial_trace keep index out of range".into()));
        }
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() || sorted != keep {
            return Err(Error::InvalidArgument(
                "partial_trace keep set must be strictly increasing".into(),
            ));
        }

        let traced: Vec<usize> = (0..dims.len()).filter(|p| !keep.contains(p)).collect();
        let keep_dim: usize = keep.iter().map(|&k| dims[k]).product();
        let trace_dim: usize = traced.iter().map(|&k| dims[k]).product();

        // Strides of each factor in the flattened index.
        let mut strides = vec![1usize; dims.len()];
        for p in (0..dims.len().saturating_sub(1)).rev() {
            strides[p] = strides[p + 1] * dims[p + 1];
        }
        let flat = |positions: &[usize], multi: &[usize]| -> usize {
            positions.iter().zip(multi).map(|(&p, &x)| strides[p] * x).sum()
        };
        let unrank = |positions: &[usize], mut rank: usize| -> Vec<usize> {
            let mut multi = vec![0usize; positions.len()];
            for (slot, &p) in positions.iter().enumerate().rev() {
                multi[slot] = rank % dims[p];
                rank /= dims[p];
            }
            multi
        };

        let mut out = Self::zeros(keep_dim.max(1), keep_dim.max(1));
        for row_keep in 0..keep_dim.max(1) {
            let row_k = unrank(&sorted, row_keep);
            for col_keep in 0..keep_dim.max(1) {
                let col_k = unrank(&sorted, col_keep);
                let mut sum = ZERO;
                for t in 0..trace_dim.max(1) {
                    let tm = unrank(&traced, t);
                    let r = flat(&sorted, &row_k) + flat(&traced, &tm);
                    let c = flat(&sorted, &col_k) + flat(&traced, &tm);
                    sum += self.get(r, c);
                }
                out.set(row_keep, col_keep, sum);
            }
        }
        Ok(out)
    }
}

/// Maximally entangled ket on d x d: sum_i |ii> / sqrt(d).
pub fn bell_state(d: usize) -> ComplexMatrix {
    assert!(d >= 1, "bell_state dimension must be positive");
    let mut v = ComplexMatrix::zeros(d * d, 1);
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v.set(i * d + i, 0, amp);
    }
    v
}

/// Projector onto [`bell_state`].
pub fn bell_projector(d: usize) -> ComplexMatrix {
    let b = bell_state(d);
    b.projector()
}

/// Swap operator from X (x) X' to X' (x) X, where the factors may have
/// different dimensions. S |x, x'> = |x', x>.
pub fn swap(dim_x: usize, dim_xp: usize) -> ComplexMatrix {
    let n = dim_x * dim_xp;
    let mut s = ComplexMatrix::zeros(n, n);
    for x in 0..dim_x {
        for xp in 0..dim_xp {
            s.set(xp * dim_x + x, x * dim_xp + xp, ONE);
        }
    }
    s
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.add_m(rhs)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.sub_m(rhs)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// Wire format shared by every module:
// {"rows":n,"cols":m,"data":[[re,im],...]} with row-major doubles.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("ComplexMatrix", 3)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("cols", &self.cols)?;
        let pairs: Vec<[f64; 2]> = self.data.iter().map(|z| [z.re, z.im]).collect();
        st.serialize_field("data", &pairs)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            rows: usize,
            cols: usize,
            data: Vec<[f64; 2]>,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.rows == 0 || raw.cols == 0 {
            return Err(de::Error::custom("matrix dimensions must be positive"));
        }
        if raw.data.len() != raw.rows * raw.cols {
            return Err(de::Error::custom(format!(
                "matrix data length {} does not match {}x{}",
                raw.data.len(),
                raw.rows,
                raw.cols
            )));
        }
        let data: Vec<Complex64> = raw.data.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(de::Error::custom("matrix entries must be finite"));
        }
        Ok(ComplexMatrix::new(raw.rows, raw.cols, data))
    }
}
