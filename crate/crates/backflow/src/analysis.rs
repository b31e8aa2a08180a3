//! Post-processing of scan curves.

/// Abscissae where a sampled curve has a slope discontinuity.
///
/// Second differences of a smooth curve vary slowly, while a kink produces
/// an isolated spike in one or two adjacent ones. A point is flagged when
/// its second difference departs from the trend of its neighbours by more
/// than `ratio` times the median departure. The kink is then located at the
/// intersection of the straight lines through the samples on either side.
pub fn slope_breaks(xs: &[f64], ys: &[f64], ratio: f64) -> Vec<f64> {
    let m = xs.len().min(ys.len());
    if m < 8 {
        return Vec::new();
    }
    let slope: Vec<f64> = (0..m - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
    // d[i] sits at xs[i + 1]
    let d: Vec<f64> = slope.windows(2).map(|w| w[1] - w[0]).collect();
    let nd = d.len();
    // departure of d from the trend of samples 2 and 3 away, which a kink
    // spread over d[i], d[i+1] does not reach
    let mut anomaly = vec![0.0; nd];
    for i in 3..nd.saturating_sub(3) {
        anomaly[i] = d[i] - 0.25 * (d[i - 3] + d[i - 2] + d[i + 2] + d[i + 3]);
    }
    let score: Vec<f64> = anomaly.iter().map(|a| a.abs()).collect();
    let mut sorted: Vec<f64> = score[3..nd - 3].to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2].max(f64::MIN_POSITIVE);

    let mut out = Vec::new();
    for i in 3..nd - 3 {
        // strict on the left so equal neighbours yield one peak
        let is_peak = score[i] > ratio * median
            && score[i - 3..i].iter().all(|&s| s < score[i])
            && score[i + 1..(i + 4).min(nd)].iter().all(|&s| s <= score[i]);
        if !is_peak {
            continue;
        }
        // a kink between two samples shows up in two adjacent d's of one sign
        let partner = |j: usize| anomaly[j].signum() == anomaly[i].signum() && score[j] > 0.2 * score[i];
        let x = if partner(i + 1) && (!partner(i - 1) || score[i + 1] >= score[i - 1]) {
            // kink in [xs[i+1], xs[i+2]]
            intersect(xs, ys, i + 1, i + 2)
        } else if partner(i - 1) {
            intersect(xs, ys, i, i + 1)
        } else {
            intersect(xs, ys, i + 1, i + 1)
        };
        out.push(x);
    }
    out
}

/// Crossing of the line through samples `l-1, l` and the line through
/// samples `r, r+1`, clamped to `[xs[l], xs[r]]`.
fn intersect(xs: &[f64], ys: &[f64], l: usize, r: usize) -> f64 {
    let r = r.min(xs.len() - 2);
    let l = l.max(1);
    let sl = (ys[l] - ys[l - 1]) / (xs[l] - xs[l - 1]);
    let sr = (ys[r + 1] - ys[r]) / (xs[r + 1] - xs[r]);
    let (lo, hi) = (xs[l].min(xs[r]), xs[l].max(xs[r]));
    if (sl - sr).abs() < 1e-300 {
        return 0.5 * (lo + hi);
    }
    let x = (ys[r] - ys[l] + sl * xs[l] - sr * xs[r]) / (sl - sr);
    x.clamp(lo, hi)
}
