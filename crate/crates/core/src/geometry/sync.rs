use crate::error::{Error, Result};

/// Anything carrying a sampling timestamp in seconds.
pub trait Timestamped {
    fn timestamp(&self) -> f64;
}

impl Timestamped for f64 {
    fn timestamp(&self) -> f64 {
        *self
    }
}

impl Timestamped for super::GaussianScalarEstimate {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }
}

fn check_sorted<T: Timestamped>(items: &[T], name: &str) -> Result<()> {
    for (i, w) in items.windows(2).enumerate() {
        let (t0, t1) = (w[0].timestamp(), w[1].timestamp());
        if !(t0 <= t1) {
            return Err(Error::domain(format!(
                "stream {name} not sorted at index {}: {t0} then {t1}",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Pairs every element of `a` with its nearest-in-time element of `b`.
///
/// Pairs whose skew exceeds `max_skew` are dropped. When several elements of
/// `a` share the same nearest `b`, only the closest one keeps it (the
/// earlier `a` on ties). Nearest-`b` ties go to the earlier `b`. The result
/// is returned as index pairs `(i_a, i_b)` in increasing order.
pub fn match_streams<A: Timestamped, B: Timestamped>(
    a: &[A],
    b: &[B],
    max_skew: f64,
) -> Result<Vec<(usize, usize)>> {
    check_sorted(a, "a")?;
    check_sorted(b, "b")?;
    if b.is_empty() {
        return Ok(Vec::new());
    }

    // First index of each run of equal timestamps in b.
    let mut run_start = vec![0usize; b.len()];
    for j in 1..b.len() {
        run_start[j] = if b[j].timestamp() == b[j - 1].timestamp() {
            run_start[j - 1]
        } else {
            j
        };
    }

    // Nearest b for each a, by a monotone sweep over the first b >= t.
    let mut nearest = Vec::with_capacity(a.len());
    let mut k = 0;
    for item in a {
        let t = item.timestamp();
        while k < b.len() && b[k].timestamp() < t {
            k += 1;
        }
        let j = match (k.checked_sub(1), k < b.len()) {
            (None, _) => k,
            (Some(below), false) => run_start[below],
            (Some(below), true) => {
                let below = run_start[below];
                if t - b[below].timestamp() <= b[k].timestamp() - t {
                    below
                } else {
                    k
                }
            }
        };
        nearest.push(j);
    }

    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, &j) in nearest.iter().enumerate() {
        let skew = (a[i].timestamp() - b[j].timestamp()).abs();
        if skew > max_skew {
            continue;
        }
        match out.last() {
            Some(&(pi, pj)) if pj == j => {
                let prev = (a[pi].timestamp() - b[j].timestamp()).abs();
                if skew < prev {
                    out.pop();
                    out.push((i, j));
                }
            }
            _ => out.push((i, j)),
        }
    }
    Ok(out)
}
