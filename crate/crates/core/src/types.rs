//! Shared domain types: permutations, relevance and score vectors, top-k
//! feedback, and query feature matrices.
//!
//! Conventions: items and ranks are 0-based in memory and in every external
//! file format. Doc comments use 1-based phrasing ("rank 1" is index 0) where
//! it reads more naturally.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// A ranking of `m` items: `rank_to_item[r]` is the item placed at rank `r`.
///
/// The inverse view (`item -> rank`) is obtained with [`Permutation::inverse`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    rank_to_item: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from its rank-to-item array, validating that the
    /// entries are a bijection on `0..m`.
    pub fn from_rank_to_item(rank_to_item: Vec<usize>) -> Result<Self> {
        let m = rank_to_item.len();
        let mut seen = vec![false; m];
        for &item in &rank_to_item {
            if item >= m || seen[item] {
                return Err(Error::InvalidInput(format!(
                    "rank_to_item {rank_to_item:?} is not a bijection on 0..{m}"
                )));
            }
            seen[item] = true;
        }
        Ok(Self { rank_to_item })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            rank_to_item: (0..m).collect(),
        }
    }

    /// Number of items.
    pub fn len(&self) -> usize {
        self.rank_to_item.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_to_item.is_empty()
    }

    /// Item placed at `rank` (0-based).
    pub fn item_at_rank(&self, rank: usize) -> usize {
        self.rank_to_item[rank]
    }

    /// The rank-to-item array.
    pub fn rank_to_item(&self) -> &[usize] {
        &self.rank_to_item
    }

    /// Items in the top `k` ranks, in rank order.
    pub fn top_k(&self, k: usize) -> &[usize] {
        &self.rank_to_item[..k]
    }

    /// The item-to-rank view: `inverse()[i]` is the rank of item `i`.
    /// An involution: `p.inverse().inverse() == p`.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0usize; self.rank_to_item.len()];
        for (rank, &item) in self.rank_to_item.iter().enumerate() {
            inv[item] = rank;
        }
        Self { rank_to_item: inv }
    }

    /// Item-to-rank array as plain ranks (same data as [`inverse`](Self::inverse)).
    pub fn ranks_of_items(&self) -> Vec<usize> {
        self.inverse().rank_to_item
    }
}

/// Graded relevance of `m` items: every grade lies in `0..=max_grade`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelevanceVector {
    grades: Vec<u8>,
    max_grade: u8,
}

impl RelevanceVector {
    pub fn new(grades: Vec<u8>, max_grade: u8) -> Result<Self> {
        if max_grade == 0 {
            return Err(Error::InvalidInput(
                "max_grade must be at least 1".to_string(),
            ));
        }
        if let Some(&g) = grades.iter().find(|&&g| g > max_grade) {
            return Err(Error::Domain(format!(
                "grade {g} exceeds declared maximum {max_grade}"
            )));
        }
        Ok(Self { grades, max_grade })
    }

    /// Binary relevance vector (grades in {0, 1}).
    pub fn binary(grades: Vec<u8>) -> Result<Self> {
        Self::new(grades, 1)
    }

    pub fn len(&self) -> usize {
        self.grades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn grade(&self, item: usize) -> u8 {
        self.grades[item]
    }

    pub fn grades(&self) -> &[u8] {
        &self.grades
    }

    pub fn max_grade(&self) -> u8 {
        self.max_grade
    }

    /// True when every grade is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.grades.iter().all(|&g| g <= 1)
    }

    /// Number of items with grade >= 1 (for binary vectors, the number of
    /// relevant items).
    pub fn ones(&self) -> usize {
        self.grades.iter().filter(|&&g| g >= 1).count()
    }
}

/// Real-valued scores for `m` items; all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(
                "score vector contains a non-finite entry".to_string(),
            ));
        }
        Ok(Self { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.scores
    }
}

/// What the learner observes after showing a ranking: the relevance grades of
/// the top `k` ranked items, `revealed[j] = R(perm.item_at_rank(j))`.
#[derive(Debug, Clone)]
pub struct TopKFeedback {
    pub perm: Permutation,
    pub k: usize,
    pub revealed: Vec<u8>,
}

impl TopKFeedback {
    /// Observes the top `k` grades of `rel` under `perm`.
    pub fn observe(perm: Permutation, rel: &RelevanceVector, k: usize) -> Result<Self> {
        if k == 0 || k > perm.len() {
            return Err(Error::InvalidInput(format!(
                "feedback depth {k} outside 1..={}",
                perm.len()
            )));
        }
        if perm.len() != rel.len() {
            return Err(Error::InvalidInput(format!(
                "permutation over {} items but relevance has {}",
                perm.len(),
                rel.len()
            )));
        }
        let revealed = perm.top_k(k).iter().map(|&i| rel.grade(i)).collect();
        Ok(Self { perm, k, revealed })
    }
}

/// One query's document list: an `m x d` feature matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "feature matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "feature matrix contains a non-finite entry".to_string(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `X w`: scores for every document (length `rows`).
    pub fn times_vec(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `X^T v` for a score-space vector `v` (length `rows`), yielding a
    /// parameter-space vector (length `cols`).
    pub fn transpose_times_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (j, &x) in self.row(i).iter().enumerate() {
                out[j] += x * vi;
            }
        }
        out
    }

    /// Maximum row 2-norm.
    pub fn max_row_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

/// Sorts items by score, descending, breaking ties uniformly at random.
///
/// Equal scores carry no ordering information, so each maximal group of tied
/// items is permuted uniformly using `rng`; with a fixed seed the result is
/// deterministic. The returned ranking also minimizes `sum_r (r+1) * y[item]`
/// over all permutations (largest scores get smallest ranks), which is how
/// the perturbed-leader oracle uses it.
///
/// ```
/// use toprank::{argsort_desc, Rng, ScoreVector};
///
/// let scores = ScoreVector::new(vec![0.5, 2.0, 1.0]).unwrap();
/// let perm = argsort_desc(&scores, &mut Rng::new(0));
/// assert_eq!(perm.rank_to_item(), &[1, 2, 0]);
/// assert_eq!(perm.inverse().rank_to_item(), &[2, 0, 1]);
/// ```
pub fn argsort_desc(scores: &ScoreVector, rng: &mut Rng) -> Permutation {
    let m = scores.len();
    let keys: Vec<u64> = (0..m).map(|_| rng.next_u64()).collect();
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&a, &b| {
        scores.values()[b]
            .partial_cmp(&scores.values()[a])
            .expect("scores validated finite")
            .then(keys[a].cmp(&keys[b]))
            .then(a.cmp(&b))
    });
    Permutation { rank_to_item: idx }
}

/// Largest list size accepted by [`enumerate_permutations`] (8! = 40320).
pub const MAX_ENUMERATION_ITEMS: usize = 8;

/// All `m!` permutations of `0..m`, in lexicographic order of their
/// rank-to-item arrays. Guarded to `m <= 8`.
pub fn enumerate_permutations(m: usize) -> Result<Vec<Permutation>> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".to_string()));
    }
    if m > MAX_ENUMERATION_ITEMS {
        return Err(Error::Capacity(format!(
            "refusing to enumerate {m}! permutations (limit m <= {MAX_ENUMERATION_ITEMS})"
        )));
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(Permutation {
            rank_to_item: cur.clone(),
        });
        if !next_lexicographic(&mut cur) {
            break;
        }
    }
    Ok(out)
}

/// Advances `v` to its lexicographic successor; false at the last arrangement.
fn next_lexicographic(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_rank_to_item(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::from_rank_to_item(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_rank_to_item(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn inverse_matches_definition() {
        // rank_to_item (2,3,1) in 1-based terms has inverse (3,1,2).
        let p = perm(&[1, 2, 0]);
        assert_eq!(p.inverse().rank_to_item(), &[2, 0, 1]);
        let id = Permutation::identity(4);
        assert_eq!(id.inverse(), id);
    }

    #[test]
    fn inverse_is_an_involution() {
        let mut rng = Rng::new(5);
        for _ in 0..50 {
            let scores =
                ScoreVector::new((0..7).map(|_| rng.next_f64()).collect()).unwrap();
            let p = argsort_desc(&scores, &mut rng);
            assert_eq!(p.inverse().inverse(), p);
        }
    }

    #[test]
    fn argsort_unique_scores() {
        let mut rng = Rng::new(0);
        let s = ScoreVector::new(vec![0.5, 2.0, 1.0]).unwrap();
        let p = argsort_desc(&s, &mut rng);
        assert_eq!(p.rank_to_item(), &[1, 2, 0]);
    }

    #[test]
    fn argsort_two_items_matches_brute_force_minimizer() {
        // argmin over sigma of sum (rank+1) * y[item] for y = (1, 0).
        let mut rng = Rng::new(3);
        let s = ScoreVector::new(vec![1.0, 0.0]).unwrap();
        let p = argsort_desc(&s, &mut rng);
        let mut best: Option<(f64, Permutation)> = None;
        for cand in enumerate_permutations(2).unwrap() {
            let inv = cand.ranks_of_items();
            let cost: f64 = (0..2).map(|i| (inv[i] + 1) as f64 * s.values()[i]).sum();
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, cand));
            }
        }
        assert_eq!(p, best.unwrap().1);
    }

    #[test]
    fn argsort_ties_are_deterministic_per_seed_and_uniform() {
        let s = ScoreVector::new(vec![7.0, 7.0, 7.0]).unwrap();
        let a = argsort_desc(&s, &mut Rng::new(9));
        let b = argsort_desc(&s, &mut Rng::new(9));
        assert_eq!(a, b);

        let mut rng = Rng::new(17);
        let mut counts = std::collections::HashMap::new();
        let reps = 60_000;
        for _ in 0..reps {
            let p = argsort_desc(&s, &mut rng);
            *counts.entry(p.rank_to_item().to_vec()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expect = reps as f64 / 6.0;
        let three_sigma = 3.0 * (reps as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (_, c) in counts {
            assert!((c as f64 - expect).abs() <= three_sigma);
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let one = enumerate_permutations(1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].rank_to_item(), &[0]);

        let three = enumerate_permutations(3).unwrap();
        assert_eq!(three.len(), 6);
        assert_eq!(three[0].rank_to_item(), &[0, 1, 2]);
        assert_eq!(three[5].rank_to_item(), &[2, 1, 0]);

        assert_eq!(enumerate_permutations(5).unwrap().len(), 120);
        assert!(matches!(
            enumerate_permutations(9),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn score_vector_rejects_non_finite() {
        assert!(ScoreVector::new(vec![1.0, f64::NAN]).is_err());
        assert!(ScoreVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn relevance_vector_guards_grades() {
        assert!(RelevanceVector::new(vec![0, 2, 1], 2).is_ok());
        assert!(RelevanceVector::new(vec![0, 3], 2).is_err());
        assert!(RelevanceVector::binary(vec![0, 1, 1]).is_ok());
        assert!(RelevanceVector::binary(vec![2]).is_err());
    }

    #[test]
    fn feedback_reveals_top_k_grades_in_rank_order() {
        let p = perm(&[2, 0, 1]);
        let r = RelevanceVector::new(vec![1, 0, 2], 2).unwrap();
        let fb = TopKFeedback::observe(p, &r, 2).unwrap();
        assert_eq!(fb.revealed, vec![2, 1]);
        assert!(TopKFeedback::observe(perm(&[0, 1]), &r, 1).is_err());
    }

    #[test]
    fn feature_matrix_products() {
        let x = FeatureMatrix::new(2, 3, vec![1.0, 0.0, 2.0, 0.0, 1.0, -1.0]).unwrap();
        assert_eq!(x.times_vec(&[1.0, 1.0, 1.0]), vec![3.0, 0.0]);
        assert_eq!(x.transpose_times_vec(&[1.0, 2.0]), vec![1.0, 2.0, 0.0]);
        assert!((x.max_row_norm() - 5.0f64.sqrt()).abs() < 1e-15);
    }
}
