use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{BackendError, Similarity};
use crate::real::Real;
use crate::text::normalize_whitespace;

/// Similarity value clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore<F>(F);

impl<F: Real> SimilarityScore<F> {
    pub fn new(value: F) -> Self {
        let v = if value.is_nan() { F::zero() } else { value.max(F::zero()).min(F::one()) };
        SimilarityScore(v)
    }

    pub fn one() -> Self {
        SimilarityScore(F::one())
    }

    pub fn zero() -> Self {
        SimilarityScore(F::zero())
    }

    pub fn value(self) -> F {
        self.0
    }
}

type Gram = [char; 3];

/// Cosine similarity over character 3-gram count vectors of the
/// whitespace-normalized inputs.
///
/// Inputs shorter than three characters contribute a single padded gram, so
/// `"ab"` still matches itself. Identical normalized inputs score exactly 1;
/// if exactly one side is empty the score is 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharNgramCosine;

struct GramProfile {
    counts: HashMap<Gram, u32>,
    norm_sq: u64,
}

impl GramProfile {
    fn new(normalized: &str) -> Self {
        let chars: Vec<char> = normalized.chars().collect();
        let mut counts: HashMap<Gram, u32> = HashMap::new();
        if chars.len() >= 3 {
            for w in chars.windows(3) {
                *counts.entry([w[0], w[1], w[2]]).or_default() += 1;
            }
        } else if !chars.is_empty() {
            let mut g = ['\0'; 3];
            g[..chars.len()].copy_from_slice(&chars);
            counts.insert(g, 1);
        }
        let norm_sq = counts.values().map(|&c| u64::from(c) * u64::from(c)).sum();
        GramProfile { counts, norm_sq }
    }

    fn dot(&self, other: &GramProfile) -> u64 {
        let (small, large) = if self.counts.len() <= other.counts.len() { (self, other) } else { (other, self) };
        small.counts.iter().filter_map(|(g, &a)| large.counts.get(g).map(|&b| u64::from(a) * u64::from(b))).sum()
    }
}

impl CharNgramCosine {
    fn score_profiles<F: Real>(a_norm: &str, a: &GramProfile, b_norm: &str, b: &GramProfile) -> SimilarityScore<F> {
        if a_norm == b_norm {
            return SimilarityScore::one();
        }
        if a.norm_sq == 0 || b.norm_sq == 0 {
            return SimilarityScore::zero();
        }
        let dot = F::lit(a.dot(b) as f64);
        let denom = F::lit(a.norm_sq as f64).sqrt() * F::lit(b.norm_sq as f64).sqrt();
        SimilarityScore::new(dot / denom)
    }
}

impl<F: Real> Similarity<F> for CharNgramCosine {
    fn name(&self) -> &str {
        "char3-cosine"
    }

    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore<F>, BackendError> {
        let (an, bn) = (normalize_whitespace(a), normalize_whitespace(b));
        Ok(Self::score_profiles(&an, &GramProfile::new(&an), &bn, &GramProfile::new(&bn)))
    }

    fn score_matrix(&self, candidates: &[&str], target: &str) -> Result<Vec<SimilarityScore<F>>, BackendError> {
        let tn = normalize_whitespace(target);
        let tp = GramProfile::new(&tn);
        Ok(candidates
            .iter()
            .map(|c| {
                let cn = normalize_whitespace(c);
                Self::score_profiles(&cn, &GramProfile::new(&cn), &tn, &tp)
            })
            .collect())
    }
}

/// 1 when the whitespace-normalized inputs are equal, else 0.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMatchSimilarity;

impl<F: Real> Similarity<F> for ExactMatchSimilarity {
    fn name(&self) -> &str {
        "exact"
    }

    fn similarity(&self, a: &str, b: &str) -> Result<SimilarityScore<F>, BackendError> {
        Ok(if normalize_whitespace(a) == normalize_whitespace(b) {
            SimilarityScore::one()
        } else {
            SimilarityScore::zero()
        })
    }
}
