//! Log-space Viterbi decoding over a sparse transition structure.

/// Incoming transitions per destination state, as `(source, log_prob)` pairs
/// sorted by source. Impossible transitions are simply absent.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    incoming: Vec<Vec<(usize, f64)>>,
}

impl Transitions {
    pub fn from_incoming(mut incoming: Vec<Vec<(usize, f64)>>) -> Self {
        for list in &mut incoming {
            list.sort_by_key(|&(src, _)| src);
        }
        Transitions { incoming }
    }

    /// `probs[from][to]` in linear probability; zeros are dropped.
    pub fn from_dense(probs: &[Vec<f64>]) -> Self {
        let n = probs.len();
        let incoming = (0..n)
            .map(|to| {
                (0..n)
                    .filter(|&from| probs[from][to] > 0.0)
                    .map(|from| (from, probs[from][to].ln()))
                    .collect()
            })
            .collect();
        Transitions { incoming }
    }

    pub fn num_states(&self) -> usize {
        self.incoming.len()
    }

    pub fn incoming(&self, to: usize) -> &[(usize, f64)] {
        &self.incoming[to]
    }

    /// Log probability of `from -> to`, `-inf` when absent.
    pub fn log_prob(&self, from: usize, to: usize) -> f64 {
        self.incoming[to]
            .iter()
            .find(|&&(src, _)| src == from)
            .map_or(f64::NEG_INFINITY, |&(_, lp)| lp)
    }
}

/// Most likely state path and its log score.
///
/// `log_emissions[t][s]` is the log likelihood of frame `t` under state `s`.
/// Ties go to the lowest-numbered state. Returns an empty path for zero frames.
pub fn viterbi(
    log_init: &[f64],
    log_emissions: &[Vec<f64>],
    transitions: &Transitions,
) -> (Vec<usize>, f64) {
    let n = transitions.num_states();
    assert_eq!(log_init.len(), n, "initial distribution size");
    let Some(first) = log_emissions.first() else {
        return (Vec::new(), 0.0);
    };
    let mut score: Vec<f64> = log_init.iter().zip(first).map(|(a, b)| a + b).collect();
    let mut next = vec![f64::NEG_INFINITY; n];
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(log_emissions.len().saturating_sub(1));

    for emissions in &log_emissions[1..] {
        let mut ptr = vec![0u32; n];
        for to in 0..n {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0usize;
            for &(from, lp) in transitions.incoming(to) {
                let s = score[from] + lp;
                if s > best {
                    best = s;
                    arg = from;
                }
            }
            next[to] = best + emissions[to];
            ptr[to] = arg as u32;
        }
        std::mem::swap(&mut score, &mut next);
        back.push(ptr);
    }

    let mut state = 0;
    for (s, &v) in score.iter().enumerate() {
        if v > score[state] {
            state = s;
        }
    }
    let total = score[state];
    let mut path = vec![state; log_emissions.len()];
    for (t, ptr) in back.iter().enumerate().rev() {
        state = ptr[state] as usize;
        path[t] = state;
    }
    (path, total)
}
