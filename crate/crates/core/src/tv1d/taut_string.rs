use crate::error::{Error, Result};

/// `½Σ(u−f)² + λΣ|u[i+1]−u[i]|`
pub fn tv_energy(u: &[f64], f: &[f64], lambda: f64) -> f64 {
    let data: f64 = u.iter().zip(f).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
    let tv: f64 = u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    data + lambda * tv
}

/// Exact minimizer of [`tv_energy`] on the same domain as `f`.
///
/// String pulling on the cumulative sum: the solution is the derivative of the shortest
/// path through the tube `[R − λ, R + λ]` pinned at both ends. Knots are found greedily
/// by narrowing the feasible slope window from the current knot.
pub fn tv_denoise(f: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("signal has non-finite values".into()));
    }
    let n = f.len();
    if n <= 1 || lambda == 0.0 {
        return Ok(f.to_vec());
    }
    let mut r = Vec::with_capacity(n + 1);
    r.push(0.0);
    for v in f {
        r.push(r.last().unwrap() + v);
    }
    let lo = |j: usize| if j == 0 || j == n { r[j] } else { r[j] - lambda };
    let hi = |j: usize| if j == 0 || j == n { r[j] } else { r[j] + lambda };

    let mut s = vec![0.0; n + 1];
    let (mut k, mut sk) = (0usize, 0.0f64);
    while k < n {
        let (mut a, mut b) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut ia, mut ib) = (k, k);
        let mut knot = (n, r[n]);
        for j in k + 1..=n {
            let dj = (j - k) as f64;
            let la = (lo(j) - sk) / dj;
            let ua = (hi(j) - sk) / dj;
            if ua < a {
                knot = (ia, lo(ia));
                break;
            }
            if la > b {
                knot = (ib, hi(ib));
                break;
            }
            if la >= a {
                a = la;
                ia = j;
            }
            if ua <= b {
                b = ua;
                ib = j;
            }
        }
        let (nk, nv) = knot;
        let span = (nk - k) as f64;
        for (t, st) in s.iter_mut().enumerate().take(nk + 1).skip(k + 1) {
            *st = sk + (nv - sk) * (t - k) as f64 / span;
        }
        k = nk;
        sk = nv;
    }
    Ok(s.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Adds one replicated sample at each end.
pub fn extend_replicate(u: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(u.len() + 2);
    if let (Some(&a), Some(&b)) = (u.first(), u.last()) {
        out.push(a);
        out.extend_from_slice(u);
        out.push(b);
    }
    out
}

/// TV denoising of `f` followed by one replicated sample per side, so the output lives
/// on the domain of the signal that `f` was blurred from (length `n + 2`).
pub fn taut_string_denoise(f: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if f.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    Ok(extend_replicate(&tv_denoise(f, lambda)?))
}
