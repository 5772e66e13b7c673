//! Integer lattices in Z^r via Hermite normal form.

use crate::error::{Error, Result};

/// A sublattice of Z^rank stored as its row-style Hermite normal form: rows are
/// in echelon form, pivots are positive, and entries above a pivot lie in
/// `[0, pivot)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    rank: usize,
    rows: Vec<Vec<i64>>,
    pivots: Vec<usize>,
}

fn to_i64(x: i128) -> Result<i64> {
    i64::try_from(x).map_err(|_| Error::Unsupported("lattice entry overflows i64".into()))
}

impl Lattice {
    pub fn new(rank: usize, gens: &[Vec<i64>]) -> Result<Self> {
        for g in gens {
            if g.len() != rank {
                return Err(Error::Malformed(format!(
                    "lattice vector {g:?} has length {}, expected {rank}",
                    g.len()
                )));
            }
        }
        let mut m: Vec<Vec<i128>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| x as i128).collect())
            .collect();
        let mut rows: Vec<Vec<i128>> = Vec::new();
        let mut pivots = Vec::new();
        for col in 0..rank {
            // Euclid on column `col` among the remaining rows.
            loop {
                m.retain(|r| r.iter().any(|&x| x != 0));
                let nz: Vec<usize> = (0..m.len()).filter(|&i| m[i][col] != 0).collect();
                if nz.len() <= 1 {
                    break;
                }
                let piv = *nz.iter().min_by_key(|&&i| m[i][col].abs()).unwrap();
                let p = m[piv][col];
                for &i in &nz {
                    if i != piv {
                        let q = m[i][col].div_euclid(p);
                        let (src, dst) = (m[piv].clone(), &mut m[i]);
                        for k in 0..rank {
                            dst[k] -= q * src[k];
                        }
                    }
                }
            }
            if let Some(i) = (0..m.len()).find(|&i| m[i][col] != 0) {
                let mut r = m.remove(i);
                if r[col] < 0 {
                    r.iter_mut().for_each(|x| *x = -*x);
                }
                rows.push(r);
                pivots.push(col);
            }
        }
        // Reduce entries above pivots.
        for j in 0..rows.len() {
            let (pc, pv) = (pivots[j], rows[j][pivots[j]]);
            for i in 0..j {
                let q = rows[i][pc].div_euclid(pv);
                if q != 0 {
                    let src = rows[j].clone();
                    for k in 0..rank {
                        rows[i][k] -= q * src[k];
                    }
                }
            }
        }
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(to_i64).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Lattice { rank, rows, pivots })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Canonical representative of `v + L`: each pivot coordinate lands in
    /// `[0, pivot)`.
    pub fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let mut v: Vec<i64> = v.to_vec();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let q = v[pc].div_euclid(row[pc]);
            if q != 0 {
                for k in 0..self.rank {
                    v[k] -= q * row[k];
                }
            }
        }
        v
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Index in Z^rank, or `None` when the lattice is not of full rank.
    pub fn index(&self) -> Option<u64> {
        if self.rows.len() < self.rank {
            return None;
        }
        Some(
            self.rows
                .iter()
                .zip(&self.pivots)
                .map(|(r, &p)| r[p] as u64)
                .product(),
        )
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        let r = self.rank;
        let mut gens = Vec::new();
        for row in &self.rows {
            let mut v = row.clone();
            v.extend_from_slice(row);
            gens.push(v);
        }
        for row in &other.rows {
            let mut v = row.clone();
            v.extend(std::iter::repeat_n(0, r));
            gens.push(v);
        }
        let big = Lattice::new(2 * r, &gens)?;
        let inter: Vec<Vec<i64>> = big
            .rows
            .iter()
            .filter(|row| row[..r].iter().all(|&x| x == 0))
            .map(|row| row[r..].to_vec())
            .collect();
        Lattice::new(r, &inter)
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.rows.iter().all(|r| self.contains(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnf_of_diagonal() {
        let l = Lattice::new(2, &[vec![0, 1], vec![2, 0]]).unwrap();
        assert_eq!(l.basis(), &[vec![2, 0], vec![0, 1]]);
        assert_eq!(l.index(), Some(2));
        assert_eq!(l.reduce(&[5, -7]), vec![1, 0]);
    }

    #[test]
    fn membership_matches_solvability() {
        // L = <(2,1), (0,3)>; index 6.
        let l = Lattice::new(2, &[vec![2, 1], vec![0, 3]]).unwrap();
        assert_eq!(l.index(), Some(6));
        for x in -6i64..=6 {
            for y in -6i64..=6 {
                // (x,y) = s(2,1)+t(0,3) iff x even and (y - x/2) divisible by 3.
                let expect = x % 2 == 0 && (y - x / 2) % 3 == 0;
                assert_eq!(l.contains(&[x, y]), expect, "({x},{y})");
            }
        }
    }

    #[test]
    fn intersection_of_axes_is_trivial() {
        let h = Lattice::new(2, &[vec![1, 0]]).unwrap();
        let k = Lattice::new(2, &[vec![0, 1]]).unwrap();
        assert_eq!(h.intersect(&k).unwrap().dimension(), 0);
        let l2 = Lattice::new(2, &[vec![2, 0], vec![0, 1]]).unwrap();
        let l3 = Lattice::new(2, &[vec![3, 0], vec![0, 1]]).unwrap();
        assert_eq!(l2.intersect(&l3).unwrap().basis(), &[vec![6, 0], vec![0, 1]]);
    }
}
