//! Coding vectors and subspaces over GF(q).
//!
//! A [`Subspace`] keeps its basis in reduced row-echelon form, which is
//! canonical: two subspaces are equal exactly when their stored rows are.

use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::field::FieldSpec;

/// Coefficients of a linear combination of the `n` packets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CodingVector(pub Vec<u32>);

impl CodingVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The unit vector with a one at (0-based) coordinate `index`.
    pub fn unit(n: usize, index: usize) -> Self {
        let mut v = vec![0; n];
        v[index] = 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Index of the first nonzero coordinate.
    pub fn leading(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }

    /// Inner product with a payload vector.
    pub fn dot(&self, field: FieldSpec, payload: &[u32]) -> u32 {
        self.0
            .iter()
            .zip(payload)
            .fold(0, |acc, (&c, &x)| field.add(acc, field.mul(c, x)))
    }

    /// `self + scale * other`.
    pub fn axpy(&self, field: FieldSpec, scale: u32, other: &CodingVector) -> CodingVector {
        CodingVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| field.add(a, field.mul(scale, b)))
                .collect(),
        )
    }

    fn check(&self, field: FieldSpec, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(usage(format!(
                "coding vector has length {}, expected {n}",
                self.0.len()
            )));
        }
        if let Some(&c) = self.0.iter().find(|&&c| c >= field.q()) {
            return Err(usage(format!("coefficient {c} not in {field}")));
        }
        Ok(())
    }
}

impl From<Vec<u32>> for CodingVector {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

/// A subspace of GF(q)^n stored as an RREF basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    field: FieldSpec,
    n: usize,
    rows: Vec<CodingVector>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Self {
            field,
            n,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: FieldSpec, n: usize) -> Self {
        Self {
            field,
            n,
            rows: (0..n).map(|i| CodingVector::unit(n, i)).collect(),
            pivots: (0..n).collect(),
        }
    }

    /// Span of the unit vectors `e_l` for the given 0-based coordinates.
    pub fn coordinate<I>(field: FieldSpec, n: usize, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut cols: Vec<usize> = indices.into_iter().collect();
        if let Some(&bad) = cols.iter().find(|&&i| i >= n) {
            return Err(usage(format!("packet index {bad} out of range for n={n}")));
        }
        cols.sort_unstable();
        cols.dedup();
        Ok(Self {
            field,
            n,
            rows: cols.iter().map(|&i| CodingVector::unit(n, i)).collect(),
            pivots: cols,
        })
    }

    /// Span of an arbitrary list of vectors.
    pub fn span<'a, I>(field: FieldSpec, n: usize, vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a CodingVector>,
    {
        let mut s = Self::zero(field, n);
        for v in vectors {
            s.insert_mut(v)?;
        }
        Ok(s)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.n
    }

    pub fn rows(&self) -> &[CodingVector] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    fn check_vector(&self, v: &CodingVector) -> Result<()> {
        v.check(self.field, self.n)
    }

    fn check_compatible(&self, other: &Subspace) -> Result<()> {
        if self.field != other.field || self.n != other.n {
            return Err(usage(format!(
                "subspace mismatch: {}^{} vs {}^{}",
                self.field, self.n, other.field, other.n
            )));
        }
        Ok(())
    }

    /// Residue of `v` after eliminating every pivot column.
    fn reduce(&self, v: &CodingVector) -> CodingVector {
        let f = self.field;
        let mut r = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let c = r.0[p];
            if c != 0 {
                let neg = f.sub(0, c);
                for (x, &y) in r.0.iter_mut().zip(&row.0).skip(p) {
                    *x = f.add(*x, f.mul(neg, y));
                }
            }
        }
        r
    }

    pub fn contains(&self, v: &CodingVector) -> Result<bool> {
        self.check_vector(v)?;
        Ok(self.reduce(v).is_zero())
    }

    /// `self ⊆ other`.
    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.rows.iter().all(|r| other.reduce(r).is_zero()))
    }

    pub fn equals(&self, other: &Subspace) -> Result<bool> {
        self.check_compatible(other)?;
        Ok(self.pivots == other.pivots && self.rows == other.rows)
    }

    /// Adds `v` to the span in place. Returns whether the dimension grew.
    pub fn insert_mut(&mut self, v: &CodingVector) -> Result<bool> {
        self.check_vector(v)?;
        let f = self.field;
        let mut r = self.reduce(v);
        let Some(p) = r.leading() else {
            return Ok(false);
        };
        let inv = f.inv(r.0[p])?;
        for x in r.0.iter_mut().skip(p) {
            *x = f.mul(*x, inv);
        }
        // clear the new pivot column from the existing rows
        for row in &mut self.rows {
            let c = row.0[p];
            if c != 0 {
                let neg = f.sub(0, c);
                for (x, &y) in row.0.iter_mut().zip(&r.0).skip(p) {
                    *x = f.add(*x, f.mul(neg, y));
                }
            }
        }
        let at = self.pivots.partition_point(|&q| q < p);
        self.pivots.insert(at, p);
        self.rows.insert(at, r);
        Ok(true)
    }

    /// Returns the span of `self ∪ {v}` and whether it grew.
    pub fn insert(&self, v: &CodingVector) -> Result<(Subspace, bool)> {
        let mut s = self.clone();
        let grew = s.insert_mut(v)?;
        Ok((s, grew))
    }
}

/// Picks a vector of `source` lying outside every obstacle subspace.
///
/// Starts from the first basis row of `source` missing from the first
/// obstacle, then for each later obstacle that still captures the candidate
/// adds the smallest multiple of a basis row the obstacle lacks that keeps
/// all obstacles seen so far avoided. Each earlier obstacle rules out at most
/// one multiplier, so `q > obstacles.len()` always leaves a valid choice.
pub fn find_avoiding_vector(source: &Subspace, obstacles: &[&Subspace]) -> Result<CodingVector> {
    let f = source.field();
    for o in obstacles {
        source.check_compatible(o)?;
    }
    if f.order() < obstacles.len() + 1 {
        return Err(Error::FieldTooSmall {
            q: f.q(),
            required: obstacles.len() + 1,
        });
    }
    let escape_row = |o: &Subspace| -> Result<&CodingVector> {
        source
            .rows()
            .iter()
            .find(|r| !o.reduce(r).is_zero())
            .ok_or_else(|| Error::Infeasible("an obstacle contains the source subspace".into()))
    };

    let Some((first, rest)) = obstacles.split_first() else {
        return source
            .rows()
            .first()
            .cloned()
            .ok_or_else(|| Error::Infeasible("source subspace is zero".into()));
    };
    let mut b = escape_row(first)?.clone();
    for (j, o) in rest.iter().enumerate() {
        let w = escape_row(o)?;
        if o.reduce(&b).is_zero() {
            let seen = &obstacles[..j + 2];
            b = (0..f.q())
                .map(|lambda| b.axpy(f, lambda, w))
                .find(|cand| seen.iter().all(|s| !s.reduce(cand).is_zero()))
                .ok_or_else(|| Error::Infeasible("no multiplier avoids all obstacles".into()))?;
        }
    }
    Ok(b)
}

/// Recovers the `n` packet payloads from coded rows spanning GF(q)^n.
pub fn solve_packets(
    field: FieldSpec,
    n: usize,
    rows: &[(CodingVector, u32)],
) -> Result<Vec<u32>> {
    let f = field;
    // augmented rows: coefficients followed by the payload
    let mut m: Vec<Vec<u32>> = Vec::with_capacity(rows.len());
    for (v, y) in rows {
        v.check(f, n)?;
        if *y >= f.q() {
            return Err(usage(format!("payload {y} not in {f}")));
        }
        let mut r = v.0.clone();
        r.push(*y);
        m.push(r);
    }
    let mut rank = 0;
    for col in 0..n {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = f.inv(m[rank][col])?;
        for x in m[rank].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = m[rank].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != rank && row[col] != 0 {
                let neg = f.sub(0, row[col]);
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.add(*x, f.mul(neg, y));
                }
            }
        }
        rank += 1;
    }
    if m[rank..].iter().any(|r| r[n] != 0) {
        return Err(Error::Inconsistent);
    }
    if rank < n {
        return Err(Error::Underdetermined { rank, n });
    }
    Ok(m[..n].iter().map(|r| r[n]).collect())
}
