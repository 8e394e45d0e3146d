//! Peak, extremum and zero-crossing location on sampled spectra.

/// A local maximum refined to sub-grid precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// Refined position (cm^-1).
    pub position: f64,
    /// Refined height.
    pub height: f64,
    /// Grid index of the sampled maximum.
    pub index: usize,
}

/// Vertex of the parabola through three equally spaced samples centred on `i`.
fn parabolic(grid: &[f64], y: &[f64], i: usize) -> (f64, f64) {
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    let denom = a - 2.0 * b + c;
    if denom == 0.0 {
        return (grid[i], b);
    }
    let offset = 0.5 * (a - c) / denom;
    let h = grid[i + 1] - grid[i];
    (grid[i] + offset * h, b - 0.25 * (a - c) * offset)
}

/// Strict interior local maxima, refined by a three-point parabola.
pub fn local_maxima(grid: &[f64], y: &[f64]) -> Vec<Peak> {
    let mut out = Vec::new();
    if y.len() < 3 {
        return out;
    }
    for i in 1..y.len() - 1 {
        if y[i] > y[i - 1] && y[i] > y[i + 1] {
            let (position, height) = parabolic(grid, y, i);
            out.push(Peak {
                position,
                height,
                index: i,
            });
        }
    }
    out
}

/// Local maxima whose height is at least `fraction` of the tallest one.
pub fn prominent_maxima(grid: &[f64], y: &[f64], fraction: f64) -> Vec<Peak> {
    let peaks = local_maxima(grid, y);
    let top = peaks.iter().map(|p| p.height).fold(f64::NEG_INFINITY, f64::max);
    peaks
        .into_iter()
        .filter(|p| p.height >= fraction * top)
        .collect()
}

/// Local minima, refined like [`local_maxima`].
pub fn local_minima(grid: &[f64], y: &[f64]) -> Vec<Peak> {
    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
    local_maxima(grid, &neg)
        .into_iter()
        .map(|p| Peak {
            height: -p.height,
            ..p
        })
        .collect()
}

/// Sign changes of `y` inside `[lo, hi]`, located by linear interpolation.
pub fn zero_crossings(grid: &[f64], y: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..grid.len().saturating_sub(1) {
        if grid[i] < lo || grid[i + 1] > hi {
            continue;
        }
        let (a, b) = (y[i], y[i + 1]);
        if a == 0.0 {
            if i > 0 && y[i - 1] * b < 0.0 {
                out.push(grid[i]);
            }
            continue;
        }
        if a * b < 0.0 {
            out.push(grid[i] + (grid[i + 1] - grid[i]) * a / (a - b));
        }
    }
    out
}

/// Signed sample with the largest magnitude in `[lo, hi]`, as `(position, value)`.
pub fn extremum_in(grid: &[f64], y: &[f64], lo: f64, hi: f64) -> Option<(f64, f64)> {
    grid.iter()
        .zip(y)
        .filter(|(x, _)| **x >= lo && **x <= hi)
        .fold(None, |best: Option<(f64, f64)>, (&x, &v)| match best {
            Some((_, bv)) if bv.abs() >= v.abs() => best,
            _ => Some((x, v)),
        })
}

/// Full width at half maximum of the peak at grid index `index`, using linear
/// interpolation of the half-height crossings. `None` if either side never
/// drops below half height.
pub fn fwhm(grid: &[f64], y: &[f64], index: usize) -> Option<f64> {
    let half = 0.5 * y[index];
    let mut right = None;
    for i in index..y.len() - 1 {
        if y[i + 1] < half {
            right = Some(grid[i] + (grid[i + 1] - grid[i]) * (y[i] - half) / (y[i] - y[i + 1]));
            break;
        }
    }
    let mut left = None;
    for i in (1..=index).rev() {
        if y[i - 1] < half {
            left = Some(grid[i] - (grid[i] - grid[i - 1]) * (y[i] - half) / (y[i] - y[i - 1]));
            break;
        }
    }
    Some(right? - left?)
}

/// Tallest maximum strictly below and at-or-above `center` within
/// `center +/- half_window`, ignoring maxima lower than `floor` times the
/// tallest one in the window.
pub fn bracketing_maxima(
    grid: &[f64],
    y: &[f64],
    center: f64,
    half_window: f64,
    floor: f64,
) -> (Option<Peak>, Option<Peak>) {
    let candidates: Vec<Peak> = local_maxima(grid, y)
        .into_iter()
        .filter(|p| (p.position - center).abs() <= half_window)
        .collect();
    let top = candidates.iter().map(|p| p.height).fold(0.0, f64::max);
    let tallest = |below: bool| {
        candidates
            .iter()
            .filter(|p| p.height >= floor * top && (p.position < center) == below)
            .max_by(|a, b| a.height.total_cmp(&b.height))
            .copied()
    };
    (tallest(true), tallest(false))
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the bracket is narrower than `tol`.
pub fn refine_maximum(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
