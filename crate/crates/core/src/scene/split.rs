//! Train/test splitting stratified by panel class.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{corpus_stats, Corpus, SceneRecord};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::seed;

/// Largest admissible gap between the two subsets' relative panel-class
/// frequencies.
pub const DEFAULT_SPLIT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Corpus,
    pub test: Corpus,
    /// Per panel class, |train frequency − test frequency|.
    pub gaps: BTreeMap<u8, f64>,
    pub warnings: Vec<String>,
}

/// Stratum of a scene: its most frequent panel class (ties to the smaller
/// class), `0` for scenes without panels.
fn stratum(scene: &SceneRecord) -> u8 {
    let mut counts = [0usize; 256];
    for p in &scene.panels {
        counts[p.panel_class as usize] += 1;
    }
    let mut best = 0u8;
    for c in 1..=255u8 {
        if counts[c as usize] > counts[best as usize] {
            best = c;
        }
    }
    if counts[best as usize] == 0 {
        0
    } else {
        best
    }
}

/// Splits `corpus` into disjoint train/test parts with
/// `|test| = round(test_fraction · N)`. Test seats are shared among strata
/// by largest remainder; members inside a stratum are drawn by a seeded
/// shuffle. If some class gap still exceeds `tolerance`, test and train
/// scenes are swapped while that lowers the worst gap. Both parts keep the
/// original scene order.
pub fn split_corpus(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
    tolerance: f64,
) -> Result<SplitOutcome> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} must lie in (0, 1)"
        )));
    }
    let n = corpus.scenes.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "cannot split a corpus of {n} scene(s); need at least 2"
        )));
    }
    let target = (test_fraction * n as f64).round() as usize;

    let mut strata: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, s) in corpus.scenes.iter().enumerate() {
        strata.entry(stratum(s)).or_default().push(i);
    }

    let mut seats: BTreeMap<u8, usize> = BTreeMap::new();
    let mut remainders: Vec<(f64, u8)> = Vec::new();
    for (&key, members) in &strata {
        let quota = test_fraction * members.len() as f64;
        seats.insert(key, quota.floor() as usize);
        remainders.push((quota - quota.floor(), key));
    }
    let assigned: usize = seats.values().sum();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut missing = target.saturating_sub(assigned);
    for (_, key) in remainders.iter().cycle() {
        if missing == 0 {
            break;
        }
        let cap = strata[key].len();
        let s = seats.get_mut(key).expect("seat per stratum");
        if *s < cap {
            *s += 1;
            missing -= 1;
        }
    }

    let mut in_test = vec![false; n];
    for (&key, members) in &strata {
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut seed::rng(seed::mix(seed, key as u64)));
        for &i in shuffled.iter().take(seats[&key]) {
            in_test[i] = true;
        }
    }
    rebalance(corpus, &mut in_test, tolerance, seed);

    let pick = |want: bool| -> Corpus {
        Corpus::with_vocab(
            corpus
                .scenes
                .iter()
                .zip(&in_test)
                .filter(|(_, &t)| t == want)
                .map(|(s, _)| s.clone())
                .collect(),
            corpus.symbol_vocab.clone(),
            corpus.panel_vocab.clone(),
        )
    };
    let train = pick(false);
    let test = pick(true);

    let f_train = corpus_stats(&train, Exec::Sequential).panel_frequencies();
    let f_test = corpus_stats(&test, Exec::Sequential).panel_frequencies();
    let mut gaps = BTreeMap::new();
    for class in f_train.keys().chain(f_test.keys()) {
        let a = f_train.get(class).copied().unwrap_or(0.0);
        let b = f_test.get(class).copied().unwrap_or(0.0);
        gaps.insert(*class, (a - b).abs());
    }
    let offending: Vec<String> = gaps
        .iter()
        .filter(|(_, &g)| g > tolerance)
        .map(|(c, g)| format!("panel_class {c} (gap {g:.4})"))
        .collect();
    let mut warnings = Vec::new();
    if !offending.is_empty() {
        let w = format!(
            "split tolerance {tolerance} not achieved for: {}",
            offending.join(", ")
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok(SplitOutcome {
        train,
        test,
        gaps,
        warnings,
    })
}

/// Worst gap first, then the sum of squared gaps.
fn imbalance(test: &[i64], train: &[i64]) -> (f64, f64) {
    let (st, sr) = (test.iter().sum::<i64>(), train.iter().sum::<i64>());
    let freq = |c: i64, total: i64| {
        if total == 0 {
            0.0
        } else {
            c as f64 / total as f64
        }
    };
    test.iter()
        .zip(train)
        .fold((0.0f64, 0.0f64), |(max, sq), (&a, &b)| {
            let g = (freq(a, st) - freq(b, sr)).abs();
            (max.max(g), sq + g * g)
        })
}

/// First-improvement swap search over seeded-order pairs; runs only while
/// the worst panel-class gap exceeds `tolerance`.
fn rebalance(corpus: &Corpus, in_test: &mut [bool], tolerance: f64, seed: u64) {
    const MAX_PASSES: usize = 50;
    let classes: Vec<u8> = {
        let mut c: Vec<u8> = corpus
            .scenes
            .iter()
            .flat_map(|s| s.panels.iter().map(|p| p.panel_class))
            .collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let k = classes.len();
    let vectors: Vec<Vec<i64>> = corpus
        .scenes
        .iter()
        .map(|s| {
            let mut v = vec![0i64; k];
            for p in &s.panels {
                v[classes.binary_search(&p.panel_class).expect("collected")] += 1;
            }
            v
        })
        .collect();
    let mut test = vec![0i64; k];
    let mut train = vec![0i64; k];
    for (v, &t) in vectors.iter().zip(in_test.iter()) {
        let side = if t { &mut test } else { &mut train };
        for (a, b) in side.iter_mut().zip(v) {
            *a += b;
        }
    }
    let mut current = imbalance(&test, &train);
    if current.0 <= tolerance {
        return;
    }
    let mut order: Vec<usize> = (0..in_test.len()).collect();
    order.shuffle(&mut seed::rng(seed::mix(seed, u64::MAX)));
    let (mut t2, mut r2) = (vec![0i64; k], vec![0i64; k]);
    for _ in 0..MAX_PASSES {
        let mut improved = false;
        for &i in &order {
            if !in_test[i] {
                continue;
            }
            for &j in &order {
                if in_test[j] || vectors[i] == vectors[j] {
                    continue;
                }
                for c in 0..k {
                    t2[c] = test[c] - vectors[i][c] + vectors[j][c];
                    r2[c] = train[c] + vectors[i][c] - vectors[j][c];
                }
                let next = imbalance(&t2, &r2);
                if next.0 < current.0 || (next.0 == current.0 && next.1 < current.1) {
                    in_test[i] = false;
                    in_test[j] = true;
                    test.copy_from_slice(&t2);
                    train.copy_from_slice(&r2);
                    current = next;
                    improved = true;
                    break;
                }
            }
            if current.0 <= tolerance {
                return;
            }
        }
        if !improved {
            return;
        }
    }
}
