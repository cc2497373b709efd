//! Interval vectors and matrices (boxes and matrix sets), plus their point
//! (plain binary64) counterparts used for midpoints, QR factors and
//! approximate inverses.
//!
//! Matrix products use the direct triple-loop scheme on purpose: the cost
//! accounting for the stepper assumes exactly `n^3` interval multiplications
//! per product, and the dimensions in scope are small.

use super::Interval;
use crate::error::Error;
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// A box in R^n: the Cartesian product of its interval entries.
#[derive(Clone, PartialEq)]
pub struct IVector(Vec<Interval>);

/// An interval matrix, identified with a set of real matrices.
#[derive(Clone, PartialEq)]
pub struct IMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

/// A plain vector of binary64 values.
#[derive(Clone, PartialEq, Debug)]
pub struct PVector(pub Vec<f64>);

/// A plain binary64 matrix (row-major).
#[derive(Clone, PartialEq, Debug)]
pub struct PMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl IVector {
    pub fn from_entries(entries: Vec<Interval>) -> Self {
        IVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        IVector(vec![Interval::ZERO; n])
    }

    pub fn from_points(vals: &[f64]) -> Self {
        IVector(vals.iter().map(|&v| Interval::point(v)).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Interval> {
        self.0.iter()
    }

    pub fn mid(&self) -> PVector {
        PVector(self.0.iter().map(|e| e.mid()).collect())
    }

    /// Maximum entrywise width.
    pub fn diam(&self) -> f64 {
        self.0.iter().map(|e| e.diam()).fold(0.0, f64::max)
    }

    /// Max-norm of the magnitude.
    pub fn mag(&self) -> f64 {
        self.0.iter().map(|e| e.mag()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|e| e.is_finite())
    }

    pub fn contains_point(&self, p: &[f64]) -> bool {
        self.len() == p.len() && self.0.iter().zip(p).all(|(e, &v)| e.contains(v))
    }

    pub fn contains_vector(&self, other: &IVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a.contains_interval(b))
    }

    pub fn subset_of(&self, other: &IVector) -> bool {
        other.contains_vector(self)
    }

    pub fn strict_subset_of(&self, other: &IVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a.strict_subset_of(b))
    }

    pub fn intersect(&self, other: &IVector) -> Result<IVector, Error> {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.intersect(b))
            .collect::<Result<Vec<_>, _>>()
            .map(IVector)
    }

    pub fn hull(&self, other: &IVector) -> IVector {
        debug_assert_eq!(self.len(), other.len());
        IVector(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn scale(&self, c: &Interval) -> IVector {
        IVector(self.0.iter().map(|e| *e * *c).collect())
    }

    pub fn inflate(&self, eps: f64) -> IVector {
        IVector(self.0.iter().map(|e| e.inflate(eps)).collect())
    }

    /// Entrywise symmetric hull `[-|x|max, |x|max]`.
    pub fn sym_hull(&self) -> IVector {
        IVector(self.0.iter().map(|e| e.sym_hull()).collect())
    }

    /// Drop entry `j` (projection used by Poincaré sections).
    pub fn drop_coord(&self, j: usize) -> IVector {
        let mut out = Vec::with_capacity(self.len() - 1);
        for (i, e) in self.0.iter().enumerate() {
            if i != j {
                out.push(*e);
            }
        }
        IVector(out)
    }
}

impl Index<usize> for IVector {
    type Output = Interval;
    #[inline]
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl Add for &IVector {
    type Output = IVector;
    fn add(self, rhs: &IVector) -> IVector {
        debug_assert_eq!(self.len(), rhs.len());
        IVector(self.0.iter().zip(&rhs.0).map(|(a, b)| *a + *b).collect())
    }
}

impl Sub for &IVector {
    type Output = IVector;
    fn sub(self, rhs: &IVector) -> IVector {
        debug_assert_eq!(self.len(), rhs.len());
        IVector(self.0.iter().zip(&rhs.0).map(|(a, b)| *a - *b).collect())
    }
}

impl Neg for &IVector {
    type Output = IVector;
    fn neg(self) -> IVector {
        IVector(self.0.iter().map(|a| -*a).collect())
    }
}

impl fmt::Debug for IVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl IMatrix {
    pub fn from_rows(rows: Vec<Vec<Interval>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        IMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IMatrix { rows, cols, data: vec![Interval::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
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

    pub fn transpose(&self) -> IMatrix {
        let mut t = IMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mid(&self) -> PMatrix {
        PMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| e.mid()).collect(),
        }
    }

    pub fn diam(&self) -> f64 {
        self.data.iter().map(|e| e.diam()).fold(0.0, f64::max)
    }

    pub fn mag(&self) -> f64 {
        self.data.iter().map(|e| e.mag()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|e| e.is_finite())
    }

    pub fn contains_matrix(&self, other: &IMatrix) -> bool {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).all(|(a, b)| a.contains_interval(b))
    }

    pub fn contains_point(&self, p: &PMatrix) -> bool {
        debug_assert_eq!((self.rows, self.cols), (p.rows, p.cols));
        self.data.iter().zip(&p.data).all(|(a, &v)| a.contains(v))
    }

    pub fn subset_of(&self, other: &IMatrix) -> bool {
        other.contains_matrix(self)
    }

    pub fn intersect(&self, other: &IMatrix) -> Result<IMatrix, Error> {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.intersect(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: &Interval) -> IMatrix {
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| *e * *c).collect(),
        }
    }

    /// Entrywise convex hull.
    pub fn hull(&self, other: &IMatrix) -> IMatrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.hull(b)).collect(),
        }
    }

    /// Entrywise symmetric hull `[-|a|max, |a|max]`.
    pub fn sym_hull(&self) -> IMatrix {
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| e.sym_hull()).collect(),
        }
    }

    pub fn row(&self, i: usize) -> IVector {
        IVector((0..self.cols).map(|j| self[(i, j)]).collect())
    }

    pub fn col(&self, j: usize) -> IVector {
        IVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    /// Delete row `i` and column `j` (section restriction of a derivative).
    pub fn minor(&self, i: usize, j: usize) -> IMatrix {
        let mut out = IMatrix::zeros(self.rows - 1, self.cols - 1);
        let mut r = 0;
        for ri in 0..self.rows {
            if ri == i {
                continue;
            }
            let mut c = 0;
            for cj in 0..self.cols {
                if cj == j {
                    continue;
                }
                out[(r, c)] = self[(ri, cj)];
                c += 1;
            }
            r += 1;
        }
        out
    }

    /// Determinant by cofactor expansion; intended for the small matrices
    /// (n <= 4) that show up in volume checks.
    pub fn det(&self) -> Interval {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        match n {
            0 => Interval::ONE,
            1 => self[(0, 0)],
            2 => self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)],
            _ => {
                let mut acc = Interval::ZERO;
                for j in 0..n {
                    let term = self[(0, j)] * self.minor(0, j).det();
                    acc = if j % 2 == 0 { acc + term } else { acc - term };
                }
                acc
            }
        }
    }
}

impl Index<(usize, usize)> for IMatrix {
    type Output = Interval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &IMatrix {
    type Output = IMatrix;
    fn add(self, rhs: &IMatrix) -> IMatrix {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl Sub for &IMatrix {
    type Output = IMatrix;
    fn sub(self, rhs: &IMatrix) -> IMatrix {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl Mul<&IVector> for &IMatrix {
    type Output = IVector;
    fn mul(self, v: &IVector) -> IVector {
        debug_assert_eq!(self.cols, v.len());
        let mut out = IVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Interval::ZERO;
            for j in 0..self.cols {
                acc = acc + self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }
}

impl Mul<&IMatrix> for &IMatrix {
    type Output = IMatrix;
    fn mul(self, rhs: &IMatrix) -> IMatrix {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = IMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Interval::ZERO;
                for k in 0..self.cols {
                    acc = acc + self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl fmt::Debug for IMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl PVector {
    pub fn zeros(n: usize) -> Self {
        PVector(vec![0.0; n])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Exact embedding into a degenerate box.
    pub fn to_interval(&self) -> IVector {
        IVector::from_points(&self.0)
    }
}

impl Index<usize> for PVector {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for PVector {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl PMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = PMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        PMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn transpose(&self) -> PMatrix {
        let mut t = PMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Approximate (round-to-nearest) matrix product.
    pub fn matmul(&self, rhs: &PMatrix) -> PMatrix {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = PMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = 0.0;
                for k in 0..self.cols {
                    acc += self[(i, k)] * rhs[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> PVector {
        debug_assert_eq!(self.cols, v.len());
        let mut out = PVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Exact embedding into a degenerate interval matrix.
    pub fn to_interval(&self) -> IMatrix {
        IMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| Interval::point(v)).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// `max_i sum_j |a_ij|` (row-sum norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for PMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for PMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}
