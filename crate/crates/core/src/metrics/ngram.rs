//! ROUGE-N, ROUGE-L and BLEU-4 over token sequences.
//!
//! Corpus scores are built from summed counts, never from averaged
//! sentence scores.

use std::collections::HashMap;

use super::TokenSeq;
use crate::error::{Error, Result};

pub const BLEU_ORDER: usize = 4;
pub const BLEU_FLOOR: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Clipped overlap of candidate n-grams against reference n-grams.
pub fn clipped_overlap(candidate: &[String], reference: &[String], n: usize) -> usize {
    let r = ngram_counts(reference, n);
    ngram_counts(candidate, n)
        .iter()
        .map(|(g, &c)| c.min(r.get(g).copied().unwrap_or(0)))
        .sum()
}

pub fn ngram_total(tokens: &[String], n: usize) -> usize {
    (tokens.len() + 1).saturating_sub(n)
}

/// Length of the longest common subsequence.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(cur[j])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Additive per-pair counts from which every corpus score is derived.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NgramStats {
    /// Clipped matches for n = 1..=4.
    pub matches: [usize; BLEU_ORDER],
    pub candidate_ngrams: [usize; BLEU_ORDER],
    pub reference_ngrams: [usize; BLEU_ORDER],
    pub lcs: usize,
    pub candidate_len: usize,
    pub reference_len: usize,
}

impl NgramStats {
    pub fn of_pair(candidate: &TokenSeq, reference: &TokenSeq) -> NgramStats {
        let (c, r) = (&candidate.tokens, &reference.tokens);
        let mut s = NgramStats {
            lcs: lcs_len(c, r),
            candidate_len: c.len(),
            reference_len: r.len(),
            ..Default::default()
        };
        for n in 1..=BLEU_ORDER {
            s.matches[n - 1] = clipped_overlap(c, r, n);
            s.candidate_ngrams[n - 1] = ngram_total(c, n);
            s.reference_ngrams[n - 1] = ngram_total(r, n);
        }
        s
    }

    pub fn merge(mut self, o: NgramStats) -> NgramStats {
        for i in 0..BLEU_ORDER {
            self.matches[i] += o.matches[i];
            self.candidate_ngrams[i] += o.candidate_ngrams[i];
            self.reference_ngrams[i] += o.reference_ngrams[i];
        }
        self.lcs += o.lcs;
        self.candidate_len += o.candidate_len;
        self.reference_len += o.reference_len;
        self
    }

    /// ROUGE-N recall for `n ∈ 1..=4`.
    pub fn rouge_n(&self, n: usize) -> f64 {
        let (m, c, r) = (
            self.matches[n - 1],
            self.candidate_ngrams[n - 1],
            self.reference_ngrams[n - 1],
        );
        match (c, r) {
            (0, 0) => 1.0,
            (_, 0) => 0.0,
            _ => m as f64 / r as f64,
        }
    }

    /// LCS F-measure with β = 1.
    pub fn rouge_l(&self) -> f64 {
        if self.candidate_len == 0 && self.reference_len == 0 {
            return 1.0;
        }
        if self.lcs == 0 {
            return 0.0;
        }
        let recall = self.lcs as f64 / self.reference_len as f64;
        let precision = self.lcs as f64 / self.candidate_len as f64;
        2.0 * precision * recall / (precision + recall)
    }

    /// Corpus BLEU with uniform weights over n = 1..=4. An order with no
    /// n-grams in candidates and none in references is left out of the
    /// geometric mean; an order with zero matches counts as [`BLEU_FLOOR`].
    pub fn bleu_4(&self) -> f64 {
        let mut product = 1.0f64;
        let mut orders = 0;
        for i in 0..BLEU_ORDER {
            let (m, c, r) = (
                self.matches[i],
                self.candidate_ngrams[i],
                self.reference_ngrams[i],
            );
            if c == 0 && r == 0 {
                continue;
            }
            let p = if m == 0 {
                BLEU_FLOOR
            } else {
                m as f64 / c as f64
            };
            product *= p;
            orders += 1;
        }
        if orders == 0 {
            return 1.0;
        }
        let (c, r) = (self.candidate_len as f64, self.reference_len as f64);
        let bp = if c >= r {
            1.0
        } else if c == 0.0 {
            0.0
        } else {
            (1.0 - r / c).exp()
        };
        bp * product.powf(1.0 / orders as f64)
    }
}

/// Clipped n-gram recall of one candidate against one reference.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> Result<f64> {
    if !(1..=BLEU_ORDER).contains(&n) {
        return Err(Error::Config(format!("ROUGE order {n} not in 1..=4")));
    }
    Ok(NgramStats::of_pair(candidate, reference).rouge_n(n))
}

pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> f64 {
    NgramStats::of_pair(candidate, reference).rouge_l()
}

pub fn bleu_4(candidates: &[TokenSeq], references: &[TokenSeq]) -> Result<f64> {
    if candidates.len() != references.len() || candidates.is_empty() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    Ok(candidates
        .iter()
        .zip(references)
        .map(|(c, r)| NgramStats::of_pair(c, r))
        .fold(NgramStats::default(), NgramStats::merge)
        .bleu_4())
}
