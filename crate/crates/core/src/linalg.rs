//! Dense matrices, LU factorization with partial pivoting and determinants.
//!
//! Written against [`Field`] so the same code serves real and complex
//! floats (kernel determinants) and exact rationals (dimer partition
//! functions).

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::scalar::Field;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

/// Square complex matrix; hosts the kernel determinants.
pub type ComplexMatrix<T> = Matrix<Complex<T>>;

impl<S: Field> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row vectors. Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Self {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<R: Field>(&self, f: impl Fn(&S) -> R) -> Matrix<R> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Determinant. Closed form for dimension up to two, LU otherwise.
    /// A singular matrix yields zero. The empty matrix has determinant one.
    pub fn det(&self) -> S {
        assert!(
            self.is_square(),
            "determinant of a {}x{} matrix",
            self.rows,
            self.cols
        );
        match self.rows {
            0 => S::one(),
            1 => self.data[0].clone(),
            2 => {
                self.data[0].clone() * self.data[3].clone()
                    - self.data[1].clone() * self.data[2].clone()
            }
            _ => Lu::new(self.clone()).det(),
        }
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization `P A = L U` with unit lower triangular `L`.
#[derive(Debug, Clone)]
pub struct Lu<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
    odd: bool,
    singular: bool,
}

impl<S: Field> Lu<S> {
    pub fn new(mut a: Matrix<S>) -> Self {
        assert!(a.is_square(), "LU of a non-square matrix");
        let n = a.rows;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        let mut singular = false;
        for col in 0..n {
            let (pivot, best) =
                (col..n)
                    .map(|r| (r, a[(r, col)].magnitude()))
                    .fold(
                        (col, 0.0_f64),
                        |acc, cur| if cur.1 > acc.1 { cur } else { acc },
                    );
            if best == 0.0 {
                singular = true;
                continue;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                perm.swap(pivot, col);
                odd = !odd;
            }
            let p = a[(col, col)].clone();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone() / p.clone();
                for j in col + 1..n {
                    let v = factor.clone() * a[(col, j)].clone();
                    a[(r, j)] = a[(r, j)].clone() - v;
                }
                a[(r, col)] = factor;
            }
        }
        Self {
            lu: a,
            perm,
            odd,
            singular,
        }
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn det(&self) -> S {
        if self.singular {
            return S::zero();
        }
        let mut d = S::one();
        for i in 0..self.dim() {
            d = d * self.lu[(i, i)].clone();
        }
        if self.odd {
            -d
        } else {
            d
        }
    }

    /// Solves `A x = b`. Returns `None` for a singular matrix.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        if self.singular {
            return None;
        }
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for j in 0..i {
                let v = self.lu[(i, j)].clone() * x[j].clone();
                x[i] = x[i].clone() - v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = self.lu[(i, j)].clone() * x[j].clone();
                x[i] = x[i].clone() - v;
            }
            x[i] = x[i].clone() / self.lu[(i, i)].clone();
        }
        Some(x)
    }

    /// Column `j` of the inverse.
    pub fn inverse_column(&self, j: usize) -> Option<Vec<S>> {
        let mut e = vec![S::zero(); self.dim()];
        e[j] = S::one();
        self.solve(&e)
    }
}
