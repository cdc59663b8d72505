//! Ranking measures: SumLoss, PairwiseLoss, DCG, NDCG (with cutoff),
//! Precision@n, AP and AUC, evaluated exactly in double precision.
//!
//! Orientation matters downstream: SumLoss, PairwiseLoss and AUC are losses
//! (smaller is better); the rest are gains. PairwiseLoss, Precision@n, AP and
//! AUC are defined only on binary relevance and reject graded vectors.
//!
//! Degenerate normalizers follow fixed conventions: NDCG and AP of the
//! all-zero relevance vector are 1 (every ranking is vacuously perfect), and
//! AUC with no comparable pair (all-zero or all-one relevance) is 0.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::types::{Permutation, RelevanceVector};

/// Identifies a ranking measure, including any cutoff parameter.
///
/// ```
/// use toprank::{MeasureId, Permutation, RelevanceVector};
///
/// let perm = Permutation::from_rank_to_item(vec![1, 0, 2]).unwrap();
/// let rel = RelevanceVector::binary(vec![0, 1, 1]).unwrap();
/// let m: MeasureId = "sumloss".parse().unwrap();
/// assert_eq!(m.evaluate(&perm, &rel).unwrap(), 4.0);
/// assert!(!m.is_gain());
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureId {
    SumLoss,
    PairwiseLoss,
    Dcg,
    Ndcg,
    PrecisionAt(usize),
    Ap,
    Auc,
    NdcgAt(usize),
}

impl MeasureId {
    /// True for gain measures (larger is better).
    pub fn is_gain(&self) -> bool {
        match self {
            MeasureId::SumLoss | MeasureId::PairwiseLoss | MeasureId::Auc => false,
            MeasureId::Dcg
            | MeasureId::Ndcg
            | MeasureId::PrecisionAt(_)
            | MeasureId::Ap
            | MeasureId::NdcgAt(_) => true,
        }
    }

    /// True when the measure is only defined on binary relevance.
    pub fn requires_binary(&self) -> bool {
        matches!(
            self,
            MeasureId::PairwiseLoss | MeasureId::PrecisionAt(_) | MeasureId::Ap | MeasureId::Auc
        )
    }

    /// True for the normalized measures (NDCG, AP, AUC and NDCG@n), whose
    /// value depends on the relevance vector through a nonlinear normalizer.
    pub fn is_normalized(&self) -> bool {
        matches!(
            self,
            MeasureId::Ndcg | MeasureId::Ap | MeasureId::Auc | MeasureId::NdcgAt(_)
        )
    }

    pub fn evaluate(&self, perm: &Permutation, rel: &RelevanceVector) -> Result<f64> {
        match *self {
            MeasureId::SumLoss => Ok(sum_loss(perm, rel)),
            MeasureId::PairwiseLoss => pairwise_loss(perm, rel),
            MeasureId::Dcg => Ok(dcg(perm, rel)),
            MeasureId::Ndcg => Ok(ndcg(perm, rel)),
            MeasureId::PrecisionAt(n) => precision_at(perm, rel, n),
            MeasureId::Ap => ap(perm, rel),
            MeasureId::Auc => auc(perm, rel),
            MeasureId::NdcgAt(n) => Ok(ndcg_at(perm, rel, n)),
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureId::SumLoss => write!(f, "sumloss"),
            MeasureId::PairwiseLoss => write!(f, "pairwiseloss"),
            MeasureId::Dcg => write!(f, "dcg"),
            MeasureId::Ndcg => write!(f, "ndcg"),
            MeasureId::PrecisionAt(n) => write!(f, "precision@{n}"),
            MeasureId::Ap => write!(f, "ap"),
            MeasureId::Auc => write!(f, "auc"),
            MeasureId::NdcgAt(n) => write!(f, "ndcg@{n}"),
        }
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Some(n) = s.strip_prefix("precision@") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad cutoff in '{s}'")))?;
            return Ok(MeasureId::PrecisionAt(n));
        }
        if let Some(n) = s.strip_prefix("ndcg@") {
            let n: usize = n
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad cutoff in '{s}'")))?;
            return Ok(MeasureId::NdcgAt(n));
        }
        match s.as_str() {
            "sumloss" => Ok(MeasureId::SumLoss),
            "pairwiseloss" | "pl" => Ok(MeasureId::PairwiseLoss),
            "dcg" => Ok(MeasureId::Dcg),
            "ndcg" => Ok(MeasureId::Ndcg),
            "ap" => Ok(MeasureId::Ap),
            "auc" => Ok(MeasureId::Auc),
            other => Err(Error::InvalidInput(format!("unknown measure '{other}'"))),
        }
    }
}

/// Base-2 logarithm via the natural-log ratio, the convention every measure
/// here shares (tests pin values at 1e-12 absolute tolerance).
#[inline]
pub fn log2(x: f64) -> f64 {
    x.ln() / std::f64::consts::LN_2
}

/// Position discount `1 / log2(rank + 2)` for a 0-based rank.
#[inline]
pub fn rank_discount(rank: usize) -> f64 {
    1.0 / log2(rank as f64 + 2.0)
}

/// Grade gain `2^g - 1`.
#[inline]
pub fn grade_gain(grade: u8) -> f64 {
    2f64.powi(grade as i32) - 1.0
}

fn check_lengths(perm: &Permutation, rel: &RelevanceVector) {
    assert_eq!(
        perm.len(),
        rel.len(),
        "permutation and relevance vector sizes differ"
    );
}

fn require_binary(rel: &RelevanceVector, measure: &str) -> Result<()> {
    if !rel.is_binary() {
        return Err(Error::Domain(format!(
            "{measure} is only defined on binary relevance"
        )));
    }
    Ok(())
}

/// `sum_i rank(i) * R(i)` with 1-based ranks. A loss: relevant items at the
/// top make it small.
pub fn sum_loss(perm: &Permutation, rel: &RelevanceVector) -> f64 {
    check_lengths(perm, rel);
    let inv = perm.ranks_of_items();
    (0..perm.len())
        .map(|i| (inv[i] + 1) as f64 * rel.grade(i) as f64)
        .sum()
}

/// Number of misordered pairs: item `i` ranked above `j` while `R(i) < R(j)`.
pub fn pairwise_loss(perm: &Permutation, rel: &RelevanceVector) -> Result<f64> {
    require_binary(rel, "pairwise loss")?;
    check_lengths(perm, rel);
    Ok(misordered_pairs(perm, rel) as f64)
}

fn misordered_pairs(perm: &Permutation, rel: &RelevanceVector) -> usize {
    let inv = perm.ranks_of_items();
    let m = perm.len();
    let mut count = 0;
    for i in 0..m {
        for j in 0..m {
            if inv[i] < inv[j] && rel.grade(i) < rel.grade(j) {
                count += 1;
            }
        }
    }
    count
}

/// Discounted cumulative gain `sum_i (2^{R(i)} - 1) / log2(1 + rank(i))`.
pub fn dcg(perm: &Permutation, rel: &RelevanceVector) -> f64 {
    check_lengths(perm, rel);
    let inv = perm.ranks_of_items();
    (0..perm.len())
        .map(|i| grade_gain(rel.grade(i)) * rank_discount(inv[i]))
        .sum()
}

/// Best achievable DCG for `rel`: grades sorted descending.
pub fn ideal_dcg(rel: &RelevanceVector) -> f64 {
    let mut grades = rel.grades().to_vec();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    grades
        .iter()
        .enumerate()
        .map(|(rank, &g)| grade_gain(g) * rank_discount(rank))
        .sum()
}

/// DCG normalized by the best achievable value; 1 for all-zero relevance.
pub fn ndcg(perm: &Permutation, rel: &RelevanceVector) -> f64 {
    let z = ideal_dcg(rel);
    if z == 0.0 {
        return 1.0;
    }
    dcg(perm, rel) / z
}

/// NDCG truncated to the top `n` positions; 1 for all-zero relevance.
pub fn ndcg_at(perm: &Permutation, rel: &RelevanceVector, n: usize) -> f64 {
    check_lengths(perm, rel);
    let n = n.min(perm.len());
    let num: f64 = (0..n)
        .map(|rank| grade_gain(rel.grade(perm.item_at_rank(rank))) * rank_discount(rank))
        .sum();
    let mut grades = rel.grades().to_vec();
    grades.sort_unstable_by(|a, b| b.cmp(a));
    let z: f64 = grades
        .iter()
        .take(n)
        .enumerate()
        .map(|(rank, &g)| grade_gain(g) * rank_discount(rank))
        .sum();
    if z == 0.0 {
        return 1.0;
    }
    num / z
}

/// Relevant items within the top `n` ranks (binary relevance, `1 <= n <= m`).
pub fn precision_at(perm: &Permutation, rel: &RelevanceVector, n: usize) -> Result<f64> {
    require_binary(rel, "precision@n")?;
    check_lengths(perm, rel);
    if n == 0 || n > perm.len() {
        return Err(Error::InvalidInput(format!(
            "cutoff {n} outside 1..={}",
            perm.len()
        )));
    }
    Ok((0..n)
        .filter(|&rank| rel.grade(perm.item_at_rank(rank)) == 1)
        .count() as f64)
}

/// Average precision over the relevant items; 1 when nothing is relevant.
pub fn ap(perm: &Permutation, rel: &RelevanceVector) -> Result<f64> {
    require_binary(rel, "average precision")?;
    check_lengths(perm, rel);
    let total = rel.ones();
    if total == 0 {
        return Ok(1.0);
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for rank in 0..perm.len() {
        if rel.grade(perm.item_at_rank(rank)) == 1 {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / total as f64)
}

/// Misordered-pair count normalized by `ones * (m - ones)`; 0 when there is
/// no relevant/irrelevant pair to compare. A loss.
pub fn auc(perm: &Permutation, rel: &RelevanceVector) -> Result<f64> {
    require_binary(rel, "auc")?;
    check_lengths(perm, rel);
    let ones = rel.ones();
    let zeros = perm.len() - ones;
    if ones == 0 || zeros == 0 {
        return Ok(0.0);
    }
    Ok(misordered_pairs(perm, rel) as f64 / (ones * zeros) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::types::{argsort_desc, enumerate_permutations, ScoreVector};

    const TOL: f64 = 1e-12;

    fn perm(v: &[usize]) -> Permutation {
        Permutation::from_rank_to_item(v.to_vec()).unwrap()
    }

    fn binary(bits: &[u8]) -> RelevanceVector {
        RelevanceVector::binary(bits.to_vec()).unwrap()
    }

    #[test]
    fn sum_loss_matches_game_table_entries() {
        let id3 = Permutation::identity(3);
        assert_eq!(sum_loss(&id3, &binary(&[0, 0, 0])), 0.0);
        // Ranking with item 2 on top, then 1, then 3; relevance 011 costs 4.
        assert_eq!(sum_loss(&perm(&[1, 0, 2]), &binary(&[0, 1, 1])), 4.0);
        assert_eq!(sum_loss(&perm(&[2, 1, 0]), &binary(&[1, 1, 1])), 6.0);
    }

    #[test]
    fn pairwise_loss_counts_misordered_pairs() {
        let id3 = Permutation::identity(3);
        assert_eq!(pairwise_loss(&id3, &binary(&[1, 1, 0])).unwrap(), 0.0);
        // Item 1 outranks both relevant items: pairs (1,2) and (1,3).
        assert_eq!(pairwise_loss(&id3, &binary(&[0, 1, 1])).unwrap(), 2.0);
        let graded = RelevanceVector::new(vec![0, 2, 1], 2).unwrap();
        assert!(pairwise_loss(&id3, &graded).is_err());
    }

    #[test]
    fn pairwise_and_sum_loss_differences_agree() {
        // Exhaustive over every ranking pair and every binary relevance
        // vector up to m = 5:
        // PL(a,R) - PL(b,R) = SumLoss(a,R) - SumLoss(b,R).
        for m in [2usize, 3, 4, 5] {
            let perms = enumerate_permutations(m).unwrap();
            for bits in 0..(1u32 << m) {
                let grades: Vec<u8> = (0..m).map(|i| ((bits >> i) & 1) as u8).collect();
                let rel = binary(&grades);
                let pl: Vec<f64> = perms.iter().map(|p| pairwise_loss(p, &rel).unwrap()).collect();
                let sl: Vec<f64> = perms.iter().map(|p| sum_loss(p, &rel)).collect();
                for a in 0..perms.len() {
                    for b in 0..perms.len() {
                        assert!(
                            ((pl[a] - pl[b]) - (sl[a] - sl[b])).abs() < TOL,
                            "m={m} bits={bits:b} pair ({a},{b})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dcg_known_values() {
        let id3 = Permutation::identity(3);
        assert!((dcg(&id3, &binary(&[0, 0, 1])) - 0.5).abs() < TOL);
        let expected = 0.5 + 1.0 / log2(3.0);
        assert!((dcg(&id3, &binary(&[0, 1, 1])) - expected).abs() < TOL);
        // Graded: (2^2 - 1) / log2(2) = 3.
        let r = RelevanceVector::new(vec![2, 0], 2).unwrap();
        assert!((dcg(&Permutation::identity(2), &r) - 3.0).abs() < TOL);
    }

    #[test]
    fn ndcg_known_values_and_conventions() {
        let id3 = Permutation::identity(3);
        let l3 = log2(3.0);
        let expected = (1.0 + l3 / 2.0) / (1.0 + l3);
        assert!((ndcg(&id3, &binary(&[0, 1, 1])) - expected).abs() < TOL);
        assert!((expected - 0.69343).abs() < 1e-5);

        for p in enumerate_permutations(3).unwrap() {
            assert_eq!(ndcg(&p, &binary(&[0, 0, 0])), 1.0);
            assert!((ndcg(&p, &binary(&[1, 1, 1])) - 1.0).abs() < TOL);
            let graded = RelevanceVector::new(vec![2, 2, 2], 2).unwrap();
            assert!((ndcg(&p, &graded) - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn precision_at_known_values() {
        let id3 = Permutation::identity(3);
        assert_eq!(precision_at(&id3, &binary(&[0, 1, 1]), 2).unwrap(), 1.0);
        // n = m counts every relevant item regardless of order.
        for p in enumerate_permutations(3).unwrap() {
            assert_eq!(precision_at(&p, &binary(&[0, 1, 1]), 3).unwrap(), 2.0);
        }
        // Ranking (3,2,1) puts item 3 on top; item 1 is the only relevant one.
        assert_eq!(precision_at(&perm(&[2, 1, 0]), &binary(&[1, 0, 0]), 1).unwrap(), 0.0);
        assert!(precision_at(&id3, &binary(&[0, 1, 1]), 0).is_err());
        assert!(precision_at(&id3, &binary(&[0, 1, 1]), 4).is_err());
    }

    #[test]
    fn ap_known_values() {
        let id3 = Permutation::identity(3);
        assert!((ap(&id3, &binary(&[0, 0, 1])).unwrap() - 1.0 / 3.0).abs() < TOL);
        assert!((ap(&id3, &binary(&[0, 1, 1])).unwrap() - 7.0 / 12.0).abs() < TOL);
        // All relevant items first.
        assert!((ap(&perm(&[2, 1, 0]), &binary(&[0, 1, 1])).unwrap() - 1.0).abs() < TOL);
        assert_eq!(ap(&id3, &binary(&[0, 0, 0])).unwrap(), 1.0);
    }

    #[test]
    fn auc_known_values() {
        let id4 = Permutation::identity(4);
        assert!((auc(&id4, &binary(&[0, 0, 0, 1])).unwrap() - 1.0).abs() < TOL);
        assert!((auc(&id4, &binary(&[0, 1, 0, 1])).unwrap() - 0.75).abs() < TOL);
        assert_eq!(auc(&id4, &binary(&[1, 1, 0, 0])).unwrap(), 0.0);
        // Degenerate: no comparable pairs.
        assert_eq!(auc(&id4, &binary(&[0, 0, 0, 0])).unwrap(), 0.0);
        assert_eq!(auc(&id4, &binary(&[1, 1, 1, 1])).unwrap(), 0.0);
    }

    #[test]
    fn ndcg_cutoff_matches_full_when_n_is_m() {
        let mut rng = Rng::new(4);
        for _ in 0..50 {
            let grades: Vec<u8> = (0..6).map(|_| (rng.next_u64() % 5) as u8).collect();
            let rel = RelevanceVector::new(grades, 4).unwrap();
            let scores = ScoreVector::new((0..6).map(|_| rng.next_f64()).collect()).unwrap();
            let p = argsort_desc(&scores, &mut rng);
            assert!((ndcg_at(&p, &rel, 6) - ndcg(&p, &rel)).abs() < TOL);
            let at2 = ndcg_at(&p, &rel, 2);
            assert!((0.0..=1.0 + TOL).contains(&at2));
        }
    }

    #[test]
    fn sorting_by_relevance_is_optimal_for_every_measure() {
        // Ranking by true relevance attains NDCG = 1 and the brute-force best
        // value for SumLoss, DCG and precision.
        let mut rng = Rng::new(8);
        let perms = enumerate_permutations(5).unwrap();
        for _ in 0..30 {
            let grades: Vec<u8> = (0..5).map(|_| (rng.next_u64() % 3) as u8).collect();
            let rel = RelevanceVector::new(grades.clone(), 2).unwrap();
            let scores = ScoreVector::new(grades.iter().map(|&g| g as f64).collect()).unwrap();
            let sorted = argsort_desc(&scores, &mut rng);
            assert!((ndcg(&sorted, &rel) - 1.0).abs() < TOL);

            let best_sum = perms
                .iter()
                .map(|p| sum_loss(p, &rel))
                .fold(f64::INFINITY, f64::min);
            assert!((sum_loss(&sorted, &rel) - best_sum).abs() < TOL);

            let best_dcg = perms.iter().map(|p| dcg(p, &rel)).fold(f64::MIN, f64::max);
            assert!((dcg(&sorted, &rel) - best_dcg).abs() < TOL);
        }
    }

    #[test]
    fn dcg_factors_into_discount_and_gain_parts() {
        let mut rng = Rng::new(12);
        for _ in 0..40 {
            let grades: Vec<u8> = (0..6).map(|_| (rng.next_u64() % 4) as u8).collect();
            let rel = RelevanceVector::new(grades, 3).unwrap();
            let scores = ScoreVector::new((0..6).map(|_| rng.next_f64()).collect()).unwrap();
            let p = argsort_desc(&scores, &mut rng);
            let inv = p.ranks_of_items();
            let factored: f64 = (0..6)
                .map(|i| rank_discount(inv[i]) * grade_gain(rel.grade(i)))
                .sum();
            assert!((factored - dcg(&p, &rel)).abs() < TOL);
        }
    }

    #[test]
    fn normalized_measures_stay_in_unit_interval() {
        let mut rng = Rng::new(30);
        for _ in 0..200 {
            let m = 2 + rng.index(5);
            let bits: Vec<u8> = (0..m).map(|_| (rng.next_u64() & 1) as u8).collect();
            let rel = binary(&bits);
            let scores = ScoreVector::new((0..m).map(|_| rng.next_f64()).collect()).unwrap();
            let p = argsort_desc(&scores, &mut rng);
            for v in [
                ndcg(&p, &rel),
                ap(&p, &rel).unwrap(),
                auc(&p, &rel).unwrap(),
            ] {
                assert!((0.0..=1.0 + TOL).contains(&v), "value {v} out of range");
            }
            assert!(dcg(&p, &rel) >= 0.0);
        }
    }

    #[test]
    fn measure_id_round_trips_through_strings() {
        for m in [
            MeasureId::SumLoss,
            MeasureId::PairwiseLoss,
            MeasureId::Dcg,
            MeasureId::Ndcg,
            MeasureId::PrecisionAt(3),
            MeasureId::Ap,
            MeasureId::Auc,
            MeasureId::NdcgAt(10),
        ] {
            assert_eq!(m.to_string().parse::<MeasureId>().unwrap(), m);
        }
        assert!("xdcg".parse::<MeasureId>().is_err());
    }
}
