use pitchfuse::mono::viterbi::{viterbi, Transitions};
use proptest::prelude::*;

/// Every state sequence, scored directly from linear probabilities.
fn brute_force(init: &[f64], trans: &[Vec<f64>], emis: &[Vec<f64>]) -> (f64, Vec<Vec<usize>>) {
    let n = init.len();
    let frames = emis.len();
    let mut best = f64::NEG_INFINITY;
    let mut argbest = Vec::new();
    for code in 0..n.pow(frames as u32) {
        let path: Vec<usize> = (0..frames).map(|t| code / n.pow(t as u32) % n).collect();
        let mut score = init[path[0]].ln() + emis[0][path[0]].ln();
        for t in 1..frames {
            score += trans[path[t - 1]][path[t]].ln() + emis[t][path[t]].ln();
        }
        if score > best + 1e-9 {
            best = score;
            argbest = vec![path];
        } else if (score - best).abs() <= 1e-9 {
            argbest.push(path);
        }
    }
    (best, argbest)
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    (1usize..=8, 1usize..=3).prop_flat_map(|(n, frames)| {
        let weight = prop_oneof![1 => Just(0.0), 4 => 0.01f64..1.0];
        (
            prop::collection::vec(0.01f64..1.0, n),
            prop::collection::vec(prop::collection::vec(weight, n), n),
            prop::collection::vec(prop::collection::vec(0.001f64..1.0, n), frames),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn matches_exhaustive_enumeration((init, trans, emis) in instance()) {
        let log_init: Vec<f64> = init.iter().map(|p| p.ln()).collect();
        let log_emis: Vec<Vec<f64>> = emis.iter().map(|r| r.iter().map(|p| p.ln()).collect()).collect();
        let (path, score) = viterbi(&log_init, &log_emis, &Transitions::from_dense(&trans));
        let (best, winners) = brute_force(&init, &trans, &emis);
        if best == f64::NEG_INFINITY {
            prop_assert_eq!(score, f64::NEG_INFINITY);
        } else {
            prop_assert!((score - best).abs() <= 1e-9, "{} vs {}", score, best);
            prop_assert!(winners.contains(&path));
        }
    }
}
