//! Square matrices over truncated Novikov series.

use std::fmt;

use super::series::{Coeff, NovikovElement};
use super::NovikovError;

#[derive(Debug, Clone)]
pub struct NovikovMatrix<K: Coeff> {
    k: usize,
    cutoff: f64,
    /// Row-major.
    entries: Vec<NovikovElement<K>>,
}

impl<K: Coeff> PartialEq for NovikovMatrix<K> {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 0.0)
    }
}

/// Side of a wall a path crosses from, relative to the wall's orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// From the right of the wall to its left.
    Positive,
    Negative,
}

impl Crossing {
    pub fn sign(self) -> i64 {
        match self {
            Crossing::Positive => 1,
            Crossing::Negative => -1,
        }
    }
}

impl<K: Coeff> NovikovMatrix<K> {
    pub fn zero(k: usize, cutoff: f64) -> Self {
        Self {
            k,
            cutoff,
            entries: vec![NovikovElement::zero(cutoff); k * k],
        }
    }

    pub fn identity(k: usize, cutoff: f64) -> Self {
        let mut m = Self::zero(k, cutoff);
        for i in 0..k {
            m.entries[i * k + i] = NovikovElement::one(cutoff);
        }
        m
    }

    /// Builds a matrix from rows of elements sharing one cutoff.
    pub fn from_rows(rows: Vec<Vec<NovikovElement<K>>>) -> Result<Self, NovikovError> {
        let k = rows.len();
        let cutoff = rows
            .first()
            .and_then(|r| r.first())
            .map_or(f64::INFINITY, |e| e.cutoff());
        let mut entries = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(NovikovError::Shape(format!(
                    "row of length {} in a {k}x{k} matrix",
                    row.len()
                )));
            }
            for e in row {
                if e.cutoff() != cutoff {
                    return Err(NovikovError::TruncationMismatch {
                        left: cutoff,
                        right: e.cutoff(),
                    });
                }
                entries.push(e);
            }
        }
        Ok(Self { k, cutoff, entries })
    }

    /// `diag(d)`.
    pub fn diagonal(d: Vec<NovikovElement<K>>, cutoff: f64) -> Self {
        let k = d.len();
        let mut m = Self::zero(k, cutoff);
        for (i, e) in d.into_iter().enumerate() {
            m.entries[i * k + i] = NovikovElement::new(e.terms().to_vec(), cutoff);
        }
        m
    }

    /// The matrix sending basis vector `i` to basis vector `perm[i]`.
    pub fn permutation(perm: &[usize], cutoff: f64) -> Self {
        let k = perm.len();
        let mut m = Self::zero(k, cutoff);
        for (i, &j) in perm.iter().enumerate() {
            m.entries[j * k + i] = NovikovElement::one(cutoff);
        }
        m
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn get(&self, i: usize, j: usize) -> &NovikovElement<K> {
        &self.entries[i * self.k + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: NovikovElement<K>) -> Result<(), NovikovError> {
        if v.cutoff() != self.cutoff {
            return Err(NovikovError::TruncationMismatch {
                left: self.cutoff,
                right: v.cutoff(),
            });
        }
        self.entries[i * self.k + j] = v;
        Ok(())
    }

    fn check(&self, other: &Self) -> Result<(), NovikovError> {
        if self.k != other.k {
            return Err(NovikovError::Shape(format!(
                "{}x{} against {}x{}",
                self.k, self.k, other.k, other.k
            )));
        }
        if self.cutoff != other.cutoff {
            return Err(NovikovError::TruncationMismatch {
                left: self.cutoff,
                right: other.cutoff,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, NovikovError> {
        self.check(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            k: self.k,
            cutoff: self.cutoff,
            entries,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, NovikovError> {
        self.check(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            k: self.k,
            cutoff: self.cutoff,
            entries,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, NovikovError> {
        self.check(other)?;
        let k = self.k;
        let mut out = Self::zero(k, self.cutoff);
        for i in 0..k {
            for j in 0..k {
                let mut acc = NovikovElement::zero(self.cutoff);
                for l in 0..k {
                    let a = self.get(i, l);
                    let b = other.get(l, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b)?)?;
                    }
                }
                out.entries[i * k + j] = acc;
            }
        }
        Ok(out)
    }

    /// Row `i` += `x` · row `j`.
    pub fn add_row_multiple(&mut self, i: usize, j: usize, x: &NovikovElement<K>) -> Result<(), NovikovError> {
        let k = self.k;
        for col in 0..k {
            let b = &self.entries[j * k + col];
            if b.is_zero() {
                continue;
            }
            let v = self.entries[i * k + col].add(&x.mul(b)?)?;
            self.entries[i * k + col] = v;
        }
        Ok(())
    }

    pub fn truncate(&self, c: f64) -> Result<Self, NovikovError> {
        let entries = self.entries.iter().map(|e| e.truncate(c)).collect::<Result<_, _>>()?;
        Ok(Self {
            k: self.k,
            cutoff: c,
            entries,
        })
    }

    pub fn trace(&self) -> NovikovElement<K> {
        let mut acc = NovikovElement::zero(self.cutoff);
        for i in 0..self.k {
            acc = acc.add(self.get(i, i)).expect("entries share the cutoff");
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&Self::identity(self.k, self.cutoff), 0.0)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.k == other.k
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Entries of `self − I` with a nonzero series, as `(i, j, entry)`.
    pub fn defect(&self) -> Vec<(usize, usize, NovikovElement<K>)> {
        let id = Self::identity(self.k, self.cutoff);
        let d = self.sub(&id).expect("same shape");
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in 0..self.k {
                if !d.get(i, j).is_zero() {
                    out.push((i, j, d.get(i, j).clone()));
                }
            }
        }
        out
    }
}

impl<K: Coeff> fmt::Display for NovikovMatrix<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.k {
            let row: Vec<String> = (0..self.k).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `I ± α T^m E_ij`, the identity once `m` reaches the cutoff.
pub fn wall_matrix<K: Coeff>(
    k: usize,
    pair: (usize, usize),
    mass: f64,
    alpha: &K,
    crossing: Crossing,
    cutoff: f64,
) -> Result<NovikovMatrix<K>, NovikovError> {
    let (i, j) = pair;
    if i == j || i >= k || j >= k {
        return Err(NovikovError::Shape(format!("pair ({i}, {j}) in rank {k}")));
    }
    let mut m = NovikovMatrix::identity(k, cutoff);
    let coeff = alpha.mul(&K::from_i64(crossing.sign()));
    m.set(i, j, NovikovElement::monomial(mass, coeff, cutoff))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64) -> Q {
        Q::from_i64(n)
    }

    fn int_matrix(rows: &[&[i64]]) -> NovikovMatrix<Q> {
        NovikovMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| NovikovElement::monomial(0.0, q(v), 1.0)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn six_matrix_identity() {
        let a = int_matrix(&[&[1, 1], &[0, 1]]);
        let s = int_matrix(&[&[0, 1], &[-1, 0]]);
        let f = a.mul(&s).unwrap();
        let p = f.mul(&f).unwrap().mul(&f).unwrap();
        assert!(p.is_identity());
    }

    #[test]
    fn wall_matrices_are_inverse() {
        let a = q(3);
        let p = wall_matrix(3, (0, 2), 0.5, &a, Crossing::Positive, 2.0).unwrap();
        let n = wall_matrix(3, (0, 2), 0.5, &a, Crossing::Negative, 2.0).unwrap();
        assert!(p.mul(&n).unwrap().is_identity());
    }

    #[test]
    fn heavy_wall_is_trivial() {
        let p = wall_matrix(2, (0, 1), 2.5, &q(1), Crossing::Positive, 2.0).unwrap();
        assert!(p.is_identity());
    }

    #[test]
    fn permutation_matrix_moves_basis() {
        let p: NovikovMatrix<Q> = NovikovMatrix::permutation(&[1, 2, 0], 1.0);
        assert!(p.get(1, 0).is_one() && p.get(2, 1).is_one() && p.get(0, 2).is_one());
    }
}
