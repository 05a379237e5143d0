use rayon::prelude::*;
use serde::{Serialize, Serializer};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::tables::AES_SBOX;
use crate::Scalar;

/// Traces between successive rank checks.
pub const CHECKPOINT_STEP: usize = 250;

/// Hamming weight of the first-round S-box output.
pub fn sbox_hw(input: u8, guess: u8) -> f64 {
    AES_SBOX[(input ^ guess) as usize].count_ones() as f64
}

/// Pearson correlation, two-pass. A constant column gives 0.
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> T {
    let n = T::of(x.len() as f64);
    let mx = x.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = y.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if sxx == T::zero() || syy == T::zero() {
        return T::zero();
    }
    sxy / (sxx * syy).sqrt()
}

/// Two-sided p-value of a correlation under the Fisher z approximation.
pub fn fisher_p_value(r: f64, n: usize) -> f64 {
    let r = r.abs().min(1.0);
    if r == 1.0 {
        return 0.0;
    }
    let z = r.atanh() * ((n as f64) - 3.0).sqrt();
    erfc(z / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Family-wise p-value for the smallest of `m` independent tests.
pub fn sidak(p: f64, m: usize) -> f64 {
    (-(m as f64 * (-p).ln_1p()).exp_m1()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CpaReport<T> {
    pub n_traces: usize,
    /// max |r| over samples, per key guess.
    pub guess_correlations: Vec<T>,
    /// Per-guess p-values, adjusted over all guesses and samples.
    pub guess_p_values: Vec<f64>,
    pub best_guess: u8,
    pub best_correlation: T,
    /// Adjusted p-value of the best guess.
    pub p_value: f64,
    pub true_key: Option<u8>,
    pub true_key_rank: Option<usize>,
    /// p-value of the true key's correlation, adjusted over samples only.
    pub true_key_p_value: Option<f64>,
    #[serde(serialize_with = "recovery")]
    pub min_traces_to_rank1: Option<usize>,
}

fn recovery<S: Serializer>(v: &Option<usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(n) => s.serialize_u64(*n as u64),
        None => s.serialize_str("not recovered"),
    }
}

/// Rank of `key` when guesses are ordered by score, ties going to the lower guess.
fn rank_of<T: Scalar>(scores: &[T], key: usize) -> usize {
    1 + scores.iter().enumerate().filter(|&(g, &s)| s > scores[key] || (s == scores[key] && g < key)).count()
}

fn best<T: Scalar>(scores: &[T]) -> usize {
    (0..scores.len()).fold(0, |b, g| if scores[g] > scores[b] { g } else { b })
}

/// Correlation power analysis over 256 key-byte guesses.
pub fn cpa<T: Scalar, R: AsRef<[T]> + Sync>(
    traces: &[R],
    inputs: &[u8],
    hypothesis: impl Fn(u8, u8) -> f64 + Sync,
    true_key: Option<u8>,
) -> Result<CpaReport<T>> {
    let n = traces.len();
    if n < 4 {
        return Err(Error::Statistics(format!("CPA needs at least 4 traces, got {n}")));
    }
    if inputs.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: inputs.len() });
    }
    let len = traces[0].as_ref().len();
    if len == 0 || traces.iter().any(|t| t.as_ref().len() != len) {
        return Err(Error::Statistics("traces must be non-empty and of equal length".into()));
    }
    let columns: Vec<Vec<T>> = (0..len).map(|j| traces.iter().map(|t| t.as_ref()[j]).collect()).collect();
    let hyps: Vec<Vec<T>> =
        (0..=255u8).into_par_iter().map(|g| inputs.iter().map(|&x| T::of(hypothesis(x, g))).collect()).collect();

    let scores: Vec<T> = hyps
        .par_iter()
        .map(|h| columns.iter().map(|c| pearson(c, h).abs()).fold(T::zero(), |m, r| if r > m { r } else { m }))
        .collect();
    let tests = 256 * len;
    let raw: Vec<f64> = scores.iter().map(|r| fisher_p_value(r.as_f64(), n)).collect();
    let guess_p_values: Vec<f64> = raw.iter().map(|&p| sidak(p, tests)).collect();
    let b = best(&scores);

    let (true_key_rank, true_key_p_value, min_traces) = match true_key {
        None => (None, None, None),
        Some(k) => {
            let k = k as usize;
            let rank = rank_of(&scores, k);
            let min_traces = min_traces_to_rank1(&columns, &hyps, k);
            (Some(rank), Some(sidak(raw[k], len)), min_traces)
        }
    };

    Ok(CpaReport {
        n_traces: n,
        best_guess: b as u8,
        best_correlation: scores[b],
        p_value: guess_p_values[b],
        guess_correlations: scores,
        guess_p_values,
        true_key,
        true_key_rank,
        true_key_p_value,
        min_traces_to_rank1: min_traces,
    })
}

/// Running sums for one (guess, sample) pair.
#[derive(Clone, Copy, Default)]
struct Acc {
    x: f64,
    xx: f64,
    y: f64,
    yy: f64,
    xy: f64,
}

impl Acc {
    fn r(&self, n: f64) -> f64 {
        let cov = self.xy - self.x * self.y / n;
        let vx = self.xx - self.x * self.x / n;
        let vy = self.yy - self.y * self.y / n;
        if vx <= 0.0 || vy <= 0.0 {
            0.0
        } else {
            cov / (vx * vy).sqrt()
        }
    }
}

/// Smallest checkpoint from which the key stays at rank 1 through all traces.
fn min_traces_to_rank1<T: Scalar>(columns: &[Vec<T>], hyps: &[Vec<T>], key: usize) -> Option<usize> {
    let n = columns[0].len();
    let mut accs = vec![vec![Acc::default(); columns.len()]; hyps.len()];
    let mut checkpoints: Vec<usize> = (1..).map(|i| i * CHECKPOINT_STEP).take_while(|&c| c < n).collect();
    checkpoints.push(n);
    let mut first_stable = None;
    let mut done = 0;
    for &cp in &checkpoints {
        accs.par_iter_mut().zip(hyps).for_each(|(row, h)| {
            for (acc, col) in row.iter_mut().zip(columns) {
                for i in done..cp {
                    let (x, y) = (col[i].as_f64(), h[i].as_f64());
                    acc.x += x;
                    acc.xx += x * x;
                    acc.y += y;
                    acc.yy += y * y;
                    acc.xy += x * y;
                }
            }
        });
        done = cp;
        let scores: Vec<f64> =
            accs.iter().map(|row| row.iter().map(|a| a.r(cp as f64).abs()).fold(0.0, f64::max)).collect();
        if best(&scores) == key {
            first_stable.get_or_insert(cp);
        } else {
            first_stable = None;
        }
    }
    first_stable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcu::{derive_seed, Stream};
    use crate::power::gaussian;

    #[test]
    fn perfect_hypothesis() {
        let inputs: Vec<u8> = (0..=255).collect();
        let traces: Vec<Vec<f64>> = inputs.iter().map(|&x| vec![sbox_hw(x, 0x3c)]).collect();
        let rep = cpa(&traces, &inputs, sbox_hw, Some(0x3c)).unwrap();
        assert_eq!(rep.best_guess, 0x3c);
        assert!((rep.best_correlation - 1.0).abs() < 1e-12);
        assert_eq!(rep.true_key_rank, Some(1));
        assert_eq!(rep.p_value, 0.0);
        assert_eq!(rep.min_traces_to_rank1, Some(250));
    }

    #[test]
    fn pure_noise_is_insignificant() {
        let mut r = derive_seed(1000, Stream::Noise);
        let mut q = derive_seed(1000, Stream::Input);
        let traces: Vec<Vec<f64>> = (0..1000).map(|_| vec![gaussian(&mut r), gaussian(&mut r)]).collect();
        let inputs: Vec<u8> = (0..1000).map(|_| q.next_u64() as u8).collect();
        let rep = cpa(&traces, &inputs, sbox_hw, Some(7)).unwrap();
        assert!(rep.guess_p_values.iter().all(|&p| p > 0.05), "min p {}", rep.p_value);
        assert!(rep.true_key_p_value.unwrap() > 0.05);
    }

    #[test]
    fn preconditions() {
        let t = vec![vec![1.0f64]; 3];
        assert!(cpa(&t, &[0, 1, 2], sbox_hw, None).is_err());
        let t = vec![vec![1.0f64]; 4];
        assert!(cpa(&t, &[0, 1, 2], sbox_hw, None).is_err());
    }

    #[test]
    fn constant_column_is_zero() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
        let t = vec![vec![5.0f64]; 8];
        let rep = cpa(&t, &[0, 1, 2, 3, 4, 5, 6, 7], sbox_hw, Some(0)).unwrap();
        assert!(rep.guess_correlations.iter().all(|&r| r == 0.0));
        assert_eq!(rep.best_guess, 0);
    }

    #[test]
    fn fisher_and_sidak() {
        assert_eq!(fisher_p_value(0.0, 100), 1.0);
        assert_eq!(fisher_p_value(1.0, 100), 0.0);
        // z = atanh(0.2) * sqrt(97) ≈ 1.99668, two-sided p ≈ 0.045860
        assert!((fisher_p_value(0.2, 100) - 0.045860).abs() < 1e-6);
        assert!((sidak(0.01, 1) - 0.01).abs() < 1e-15);
        assert!((sidak(0.01, 2) - (1.0 - 0.99f64 * 0.99)).abs() < 1e-15);
        assert_eq!(sidak(0.0, 256), 0.0);
    }

    #[test]
    fn rank_ties_prefer_lower_guess() {
        let s = [0.5, 0.9, 0.9, 0.1];
        assert_eq!(rank_of(&s, 1), 1);
        assert_eq!(rank_of(&s, 2), 2);
        assert_eq!(rank_of(&s, 3), 4);
        assert_eq!(best(&s), 1);
    }
}
