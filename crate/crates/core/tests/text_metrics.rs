use std::collections::HashMap;

use proptest::prelude::*;

use tsi_core::interp::Grammar;
use tsi_core::metrics::{
    bleu_4, extract_frame, frame_match, lcs_len, rouge_l, rouge_n, tokenize, SlotRules, TokenSeq,
    TokenizerMode,
};
use tsi_core::synth::Vocab;

fn seq(s: &str) -> TokenSeq {
    tokenize(s, TokenizerMode::Whitespace)
}

fn rules() -> SlotRules {
    let g = Grammar::english();
    Vocab::bundled(&g).slot_rules(&g).unwrap()
}

#[test]
fn reordered_destination_bigrams_by_hand() {
    let a = seq("Go straight along G70 to Xi'an, Xianyang");
    let b = seq("Go straight along G70 to Xianyang, Xi'an");
    // The comma is its own token. Reference bigrams: Go straight, straight
    // along, along G70, G70 to, to Xianyang, `Xianyang ,`, `, Xi'an`. The
    // candidate shares the first four.
    assert_eq!(b.tokens.len(), 8);
    assert_eq!(rouge_n(&a, &b, 2).unwrap(), 4.0 / 7.0);
    assert_eq!(rouge_n(&a, &b, 1).unwrap(), 1.0);
}

#[test]
fn lcs_against_quadratic_dp() {
    fn dp(a: &[String], b: &[String]) -> usize {
        let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in (0..a.len()).rev() {
            for j in (0..b.len()).rev() {
                t[i][j] = if a[i] == b[j] {
                    1 + t[i + 1][j + 1]
                } else {
                    t[i + 1][j].max(t[i][j + 1])
                };
            }
        }
        t[0][0]
    }
    let mut rng = tsi_core::seed::rng(2);
    use rand::Rng;
    for _ in 0..500 {
        let mut draw = || -> Vec<String> {
            let n = rng.random_range(0..15);
            (0..n)
                .map(|_| ["x", "y", "z", "w"][rng.random_range(0..4)].to_string())
                .collect()
        };
        let (a, b) = (draw(), draw());
        assert_eq!(lcs_len(&a, &b), dp(&a, &b), "{a:?} {b:?}");
    }
}

/// Corpus BLEU-4 from raw n-gram counts.
fn counting_bleu(pairs: &[(&str, &str)]) -> f64 {
    fn count(t: &[String], n: usize) -> HashMap<&[String], usize> {
        let mut m: HashMap<&[String], usize> = HashMap::new();
        for w in t.windows(n) {
            *m.entry(w).or_default() += 1;
        }
        m
    }
    let toks: Vec<(Vec<String>, Vec<String>)> = pairs
        .iter()
        .map(|(c, r)| (seq(c).tokens, seq(r).tokens))
        .collect();
    let mut logs = Vec::new();
    for n in 1..=4 {
        let (mut hit, mut total, mut rtotal) = (0usize, 0usize, 0usize);
        for (c, r) in &toks {
            let (cc, rc) = (count(c, n), count(r, n));
            hit += cc
                .iter()
                .map(|(g, k)| (*k).min(rc.get(g).copied().unwrap_or(0)))
                .sum::<usize>();
            total += cc.values().sum::<usize>();
            rtotal += rc.values().sum::<usize>();
        }
        if total == 0 && rtotal == 0 {
            continue;
        }
        logs.push(if hit == 0 {
            1e-9f64.ln()
        } else {
            (hit as f64 / total as f64).ln()
        });
    }
    let c: usize = toks.iter().map(|(c, _)| c.len()).sum();
    let r: usize = toks.iter().map(|(_, r)| r.len()).sum();
    let bp = if c >= r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    bp * (logs.iter().sum::<f64>() / logs.len() as f64).exp()
}

#[test]
fn bleu_matches_counting_oracle() {
    let pairs = [
        (
            "Go straight along G70 to Xi'an, Xianyang",
            "Go straight along G70 to Xianyang, Xi'an",
        ),
        ("Turn left to Baoji", "Turn left along G30 to Baoji"),
        ("Speed limited to 60 km/h", "Speed limited to 80 km/h"),
        ("Caution, sharp curve ahead", "Caution, sharp curve ahead"),
        ("No trucks", "No entry for trucks"),
    ];
    let c: Vec<TokenSeq> = pairs.iter().map(|(c, _)| seq(c)).collect();
    let r: Vec<TokenSeq> = pairs.iter().map(|(_, r)| seq(r)).collect();
    let got = bleu_4(&c, &r).unwrap();
    assert!((got - counting_bleu(&pairs)).abs() <= 1e-9, "{got}");
    let no_overlap = bleu_4(&[seq("a b c d")], &[seq("e f g h")]).unwrap();
    assert!(no_overlap <= 1e-9);
}

#[test]
fn guidance_frames() {
    let r = rules();
    let ws = TokenizerMode::Whitespace;
    let a = extract_frame("Go straight along G70 to Xi'an, Xianyang", &r, ws).unwrap();
    assert_eq!(
        a.labels(),
        ["Go", "straight", "along", "SLOT:route", "to", "SLOT:dest"]
    );
    let b = extract_frame("Go straight along G70 to Xianyang, Xi'an", &r, ws).unwrap();
    assert_eq!(a, b);
    let c = extract_frame("Turn left to Baoji", &r, ws).unwrap();
    assert_eq!(c.labels(), ["Turn", "left", "to", "SLOT:dest"]);
    assert_ne!(a, c);
}

fn words() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["go", "to", "G70", "left", "Baoji", "60"]),
        0..12,
    )
    .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn scores_are_bounded(c in words(), r in words()) {
        let (c, r) = (TokenSeq::from_tokens(c), TokenSeq::from_tokens(r));
        for n in 1..=4 {
            let v = rouge_n(&c, &r, n).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }
        let l = rouge_l(&c, &r);
        prop_assert!((0.0..=1.0).contains(&l));
        prop_assert!((l - rouge_l(&r, &c)).abs() <= 1e-12);
        let b = bleu_4(std::slice::from_ref(&c), std::slice::from_ref(&r)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
    }

    #[test]
    fn identity_scores_one(c in words()) {
        let c = TokenSeq::from_tokens(c);
        prop_assert_eq!(rouge_n(&c, &c, 1).unwrap(), 1.0);
        prop_assert_eq!(rouge_l(&c, &c), 1.0);
        prop_assert!((bleu_4(std::slice::from_ref(&c), std::slice::from_ref(&c)).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn destination_order_never_changes_the_frame(
        dests in prop::collection::vec(prop::sample::select(vec!["Xi'an", "Xianyang", "Baoji", "Beijing"]), 1..4),
        shift in 0usize..4,
    ) {
        let r = rules();
        let mut rotated = dests.clone();
        rotated.rotate_left(shift % dests.len());
        let a = format!("Go straight along G70 to {}", dests.join(", "));
        let b = format!("Go straight along G70 to {}", rotated.join(", "));
        prop_assert!(frame_match(&a, &b, &r, TokenizerMode::Auto));
    }

    #[test]
    fn cjk_tokens_are_never_empty(s in "[限速西安 a-z0-9]{0,20}") {
        let t = tokenize(&s, TokenizerMode::Cjk);
        prop_assert!(t.tokens.iter().all(|x| !x.is_empty() && !x.contains(' ')));
    }
}
