use crate::error::{Error, Result};
use crate::Scalar;

fn mean_var<T: Scalar>(xs: impl Iterator<Item = T> + Clone) -> (T, T, usize) {
    let n = xs.clone().count();
    let nf = T::of(n as f64);
    let mean = xs.clone().fold(T::zero(), |s, x| s + x) / nf;
    let ss = xs.fold(T::zero(), |s, x| s + (x - mean) * (x - mean));
    (mean, ss / T::of((n - 1) as f64), n)
}

/// Welch's t for one column. Zero variance in both groups gives 0 when the
/// means agree and a signed `T::max_value()` sentinel when they differ.
pub fn welch_t_column<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Statistics("Welch's t needs at least two traces per group".into()));
    }
    let (ma, va, na) = mean_var(a.iter().copied());
    let (mb, vb, nb) = mean_var(b.iter().copied());
    let se2 = va / T::of(na as f64) + vb / T::of(nb as f64);
    let diff = ma - mb;
    if se2 == T::zero() {
        return Ok(if diff == T::zero() { T::zero() } else { T::max_value().copysign(diff) });
    }
    Ok(diff / se2.sqrt())
}

/// Per-sample t statistic between two groups of equal-length traces.
pub fn welch_t<T: Scalar, R: AsRef<[T]>>(a: &[R], b: &[R]) -> Result<Vec<T>> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Statistics("Welch's t needs at least two traces per group".into()));
    }
    let len = a[0].as_ref().len();
    if a.iter().chain(b).any(|r| r.as_ref().len() != len) {
        return Err(Error::Statistics("traces differ in length".into()));
    }
    (0..len)
        .map(|j| {
            let ca: Vec<T> = a.iter().map(|r| r.as_ref()[j]).collect();
            let cb: Vec<T> = b.iter().map(|r| r.as_ref()[j]).collect();
            welch_t_column(&ca, &cb)
        })
        .collect()
}
