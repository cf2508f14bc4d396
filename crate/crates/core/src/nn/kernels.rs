//! Plain-slice kernels shared by the tape and the cached inference path.
//!
//! The matrix products are naive triple loops ordered for contiguous inner
//! access. An optimized backend would slot in here.

/// `out = a · b` with `a: [n, k]`, `b: [k, j]`.
pub fn matmul(a: &[f64], b: &[f64], n: usize, k: usize, j: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * k);
    debug_assert_eq!(b.len(), k * j);
    debug_assert_eq!(out.len(), n * j);
    out.fill(0.0);
    for r in 0..n {
        let o = &mut out[r * j..(r + 1) * j];
        for (p, &av) in a[r * k..(r + 1) * k].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (ov, bv) in o.iter_mut().zip(&b[p * j..(p + 1) * j]) {
                *ov += av * bv;
            }
        }
    }
}

/// `out += aᵀ · g` with `a: [n, k]`, `g: [n, j]`, `out: [k, j]`.
pub fn matmul_at_acc(a: &[f64], g: &[f64], n: usize, k: usize, j: usize, out: &mut [f64]) {
    for r in 0..n {
        let gr = &g[r * j..(r + 1) * j];
        for (p, &av) in a[r * k..(r + 1) * k].iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            for (ov, gv) in out[p * j..(p + 1) * j].iter_mut().zip(gr) {
                *ov += av * gv;
            }
        }
    }
}

/// `out += g · bᵀ` with `g: [n, j]`, `b: [k, j]`, `out: [n, k]`.
pub fn matmul_bt_acc(g: &[f64], b: &[f64], n: usize, k: usize, j: usize, out: &mut [f64]) {
    for r in 0..n {
        let gr = &g[r * j..(r + 1) * j];
        for p in 0..k {
            out[r * k + p] += dot(gr, &b[p * j..(p + 1) * j]);
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub const LN_EPS: f64 = 1e-5;

/// Row-wise layer norm over the last `d` entries. Optionally records the
/// normalized rows and inverse standard deviations for the backward pass.
pub fn layer_norm(
    x: &[f64],
    gain: &[f64],
    bias: &[f64],
    d: usize,
    out: &mut [f64],
    mut saved: Option<(&mut [f64], &mut [f64])>,
) {
    for (r, (xr, or)) in x.chunks_exact(d).zip(out.chunks_exact_mut(d)).enumerate() {
        let mean = xr.iter().sum::<f64>() / d as f64;
        let var = xr.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let inv = 1.0 / (var + LN_EPS).sqrt();
        for c in 0..d {
            let xh = (xr[c] - mean) * inv;
            or[c] = gain[c] * xh + bias[c];
            if let Some((xhat, _)) = saved.as_mut() {
                xhat[r * d + c] = xh;
            }
        }
        if let Some((_, invs)) = saved.as_mut() {
            invs[r] = inv;
        }
    }
}

/// Numerically stable softmax of `row` in place over the entries where
/// `allowed` holds; the rest become 0. Returns false for a fully masked row,
/// which is left all zero.
pub fn softmax_masked(row: &mut [f64], allowed: impl Fn(usize) -> bool) -> bool {
    let mut max = f64::NEG_INFINITY;
    for (i, v) in row.iter().enumerate() {
        if allowed(i) && *v > max {
            max = *v;
        }
    }
    if max == f64::NEG_INFINITY {
        row.fill(0.0);
        return false;
    }
    let mut sum = 0.0;
    for (i, v) in row.iter_mut().enumerate() {
        if allowed(i) {
            *v = (*v - max).exp();
            sum += *v;
        } else {
            *v = 0.0;
        }
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
    true
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Geometry of a fused multi-head attention call over `batch` independent
/// sequences whose rows are stacked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttnShape {
    pub batch: usize,
    pub q_len: usize,
    pub kv_len: usize,
    pub width: usize,
    pub heads: usize,
    /// Query `i` sees key `j` only when `j ≤ i + (kv_len − q_len)`.
    pub causal: bool,
}

impl AttnShape {
    pub fn head_dim(&self) -> usize {
        self.width / self.heads
    }

    pub fn scale(&self) -> f64 {
        1.0 / (self.head_dim() as f64).sqrt()
    }

    /// Number of visible keys for query `i`.
    #[inline]
    pub fn visible(&self, i: usize) -> usize {
        if self.causal {
            (i + 1 + self.kv_len - self.q_len).min(self.kv_len)
        } else {
            self.kv_len
        }
    }

    pub fn probs_len(&self) -> usize {
        self.batch * self.heads * self.q_len * self.kv_len
    }
}

/// Scaled dot-product attention per head on already projected `q`, `k`, `v`.
/// `probs`, when given, receives the attention weights laid out as
/// `[batch, heads, q_len, kv_len]`.
pub fn attention(q: &[f64], k: &[f64], v: &[f64], s: AttnShape, out: &mut [f64], mut probs: Option<&mut [f64]>) {
    let (w, dh, scale) = (s.width, s.head_dim(), s.scale());
    let mut row = vec![0.0; s.kv_len];
    out.fill(0.0);
    for b in 0..s.batch {
        for h in 0..s.heads {
            let off = h * dh;
            for i in 0..s.q_len {
                let qi = &q[(b * s.q_len + i) * w + off..][..dh];
                let vis = s.visible(i);
                for (j, r) in row.iter_mut().enumerate().take(vis) {
                    let kj = &k[(b * s.kv_len + j) * w + off..][..dh];
                    *r = dot(qi, kj) * scale;
                }
                softmax_masked(&mut row, |j| j < vis);
                let oi = &mut out[(b * s.q_len + i) * w + off..][..dh];
                for (j, &p) in row.iter().enumerate().take(vis) {
                    let vj = &v[(b * s.kv_len + j) * w + off..][..dh];
                    for (o, vv) in oi.iter_mut().zip(vj) {
                        *o += p * vv;
                    }
                }
                if let Some(pr) = probs.as_deref_mut() {
                    let base = ((b * s.heads + h) * s.q_len + i) * s.kv_len;
                    pr[base..base + s.kv_len].copy_from_slice(&row);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_hand_example() {
        let mut out = [0.0; 2];
        matmul(&[1.0, 2.0, 3.0, 4.0], &[5.0, 6.0], 2, 2, 1, &mut out);
        assert_eq!(out, [17.0, 39.0]);
    }

    #[test]
    fn transposed_products_agree_with_naive() {
        let a = [1.0, -2.0, 0.5, 3.0, 4.0, -1.0]; // 2x3
        let g = [2.0, 1.0, -1.0, 0.5]; // 2x2
        let mut at_g = [0.0; 6];
        matmul_at_acc(&a, &g, 2, 3, 2, &mut at_g);
        for p in 0..3 {
            for c in 0..2 {
                let want: f64 = (0..2).map(|r| a[r * 3 + p] * g[r * 2 + c]).sum();
                assert_eq!(at_g[p * 2 + c], want);
            }
        }
        let b = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]; // 3x2
        let mut g_bt = [0.0; 6];
        matmul_bt_acc(&g, &b, 2, 3, 2, &mut g_bt);
        for r in 0..2 {
            for p in 0..3 {
                let want: f64 = (0..2).map(|c| g[r * 2 + c] * b[p * 2 + c]).sum();
                assert_eq!(g_bt[r * 3 + p], want);
            }
        }
    }

    #[test]
    fn softmax_cases() {
        let mut r = [0.0, 0.0];
        assert!(softmax_masked(&mut r, |_| true));
        assert_eq!(r, [0.5, 0.5]);
        let mut r = [1000.0, 0.0];
        softmax_masked(&mut r, |_| true);
        assert_eq!(r[0], 1.0);
        assert!(r[1] < 1e-300);
        let mut r = [1.0, 1.0, 1.0];
        softmax_masked(&mut r, |i| i != 2);
        assert_eq!(r, [0.5, 0.5, 0.0]);
        let mut r = [1.0, 2.0];
        assert!(!softmax_masked(&mut r, |_| false));
        assert_eq!(r, [0.0, 0.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
    }
}
