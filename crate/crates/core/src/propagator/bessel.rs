//! Bessel functions of the first kind `J_0(x) ..= J_n(x)` by Miller's
//! backward recurrence, normalized with `J_0 + 2 Σ J_{2k} = 1`.

/// `[J_0(x), J_1(x), ..., J_n(x)]` for `x ≥ 0`.
pub fn bessel_j_sequence(x: f64, n: usize) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "argument must be finite and non-negative");
    let mut out = vec![0.0; n + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let big = n.max(x.ceil() as usize);
    let start = 2 * ((big + 16 + (160.0 * big as f64).sqrt() as usize) / 2);
    let mut values = vec![0.0; start + 2];
    let (mut next, mut current) = (0.0f64, 1e-300f64);
    values[start] = current;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * current - next;
        next = current;
        current = prev;
        values[k - 1] = current;
        if current.abs() > 1e250 {
            for v in &mut values[k - 1..] {
                *v *= 1e-250;
            }
            next *= 1e-250;
            current *= 1e-250;
        }
    }
    let norm = values[0] + 2.0 * values.iter().skip(2).step_by(2).sum::<f64>();
    for (o, v) in out.iter_mut().zip(&values) {
        *o = v / norm;
    }
    out
}
