use ndarray::Array2;

/// Probability floor inside the logarithm.
pub const P_CLAMP: f64 = 1e-12;

/// Mean of `-α_y (1 - p_y)^γ ln p_y` over rows, with `p_y` clamped to
/// `[1e-12, 1]`.
pub fn focal_loss(p: &Array2<f64>, y: &[usize], gamma: f64, alpha: &[f64; 3]) -> f64 {
    let n = y.len().max(1) as f64;
    y.iter()
        .enumerate()
        .map(|(i, &c)| {
            let py = p[[i, c]].clamp(P_CLAMP, 1.0);
            -alpha[c] * (1.0 - py).powf(gamma) * py.ln()
        })
        .sum::<f64>()
        / n
}

/// Focal loss of a single probability, `α = 1`.
pub fn focal_term(p_y: f64, gamma: f64) -> f64 {
    let py = p_y.clamp(P_CLAMP, 1.0);
    -(1.0 - py).powf(gamma) * py.ln()
}

/// Gradient of [`focal_loss`] with respect to the logits that produced `p`
/// through a softmax:
/// `∂FL/∂z_j = α_y [γ p_y (1-p_y)^(γ-1) ln p_y - (1-p_y)^γ] (δ_jy - p_j) / n`.
pub fn focal_grad_logits(p: &Array2<f64>, y: &[usize], gamma: f64, alpha: &[f64; 3]) -> Array2<f64> {
    let n = y.len().max(1) as f64;
    let mut d = Array2::zeros(p.dim());
    for (i, &c) in y.iter().enumerate() {
        let py = p[[i, c]].clamp(P_CLAMP, 1.0);
        let q = 1.0 - py;
        let log_term = if gamma == 0.0 { 0.0 } else { gamma * py * q.powf(gamma - 1.0) * py.ln() };
        let coef = alpha[c] * (log_term - q.powf(gamma)) / n;
        for j in 0..p.ncols() {
            let delta = if j == c { 1.0 } else { 0.0 };
            d[[i, j]] = coef * (delta - p[[i, j]]);
        }
    }
    d
}

/// Class weights `n / (3 · n_c)`; an empty class gets weight 1.
pub fn balanced_alpha(histogram: [usize; 3]) -> [f64; 3] {
    let n: usize = histogram.iter().sum();
    histogram.map(|c| if c == 0 { 1.0 } else { n as f64 / (3.0 * c as f64) })
}
