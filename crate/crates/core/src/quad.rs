//! Gauss–Legendre rules on dyadically graded meshes over `(0, π]`.
//!
//! The spectral integrands in this crate have a `|λ|^{1-2H}` (and, for
//! H-derivatives, `log|λ|`) singularity at the origin. Panels
//! `[π 2^{-k}, π 2^{-k+1}]` keep a fixed ratio between the panel width and
//! the distance to the singularity, so a 16-point rule converges on every
//! panel. Panels are further split so that an oscillating factor
//! `cos(ω λ)` never advances by more than [`MAX_PHASE`] radians per panel.

use std::f64::consts::PI;
use std::sync::OnceLock;

pub const GL_POINTS: usize = 16;
pub const LEVELS: u32 = 40;
pub const MAX_PHASE: f64 = 6.0;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// Quadrature nodes on `(inner, π]`; the piece `(0, inner)` is left to the
/// caller (usually an analytic correction).
#[derive(Debug, Clone)]
pub struct GradedMesh {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub inner: f64,
}

impl GradedMesh {
    /// Mesh resolving `cos(max_freq · λ)` with at most `max_phase` radians per panel.
    pub fn new(max_freq: f64, levels: u32, max_phase: f64) -> Self {
        Self::with_max_width(max_freq, levels, max_phase, f64::INFINITY)
    }

    /// As [`GradedMesh::new`], additionally splitting panels wider than `max_width`.
    pub fn with_max_width(max_freq: f64, levels: u32, max_phase: f64, max_width: f64) -> Self {
        let (x, w) = gl16();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for k in (1..=levels).rev() {
            let lo = PI * 0.5f64.powi(k as i32);
            let hi = 2.0 * lo;
            let width = hi - lo;
            let pieces = ((width * max_freq.abs()) / max_phase)
                .max(width / max_width)
                .ceil()
                .max(1.0) as usize;
            let h = width / pieces as f64;
            for p in 0..pieces {
                let a = lo + p as f64 * h;
                let mid = a + 0.5 * h;
                for (xi, wi) in x.iter().zip(w) {
                    nodes.push(mid + 0.5 * h * xi);
                    weights.push(0.5 * h * wi);
                }
            }
        }
        GradedMesh {
            nodes,
            weights,
            inner: PI * 0.5f64.powi(levels as i32),
        }
    }

    /// Default mesh for integrands oscillating up to `max_freq`.
    pub fn for_frequency(max_freq: f64) -> Self {
        Self::new(max_freq, LEVELS, MAX_PHASE)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `∫_0^ε x^a dx` for `a > -1`.
pub fn power_head(eps: f64, a: f64) -> f64 {
    eps.powf(a + 1.0) / (a + 1.0)
}

/// `∫_0^ε x^a log x dx` for `a > -1`.
pub fn power_log_head(eps: f64, a: f64) -> f64 {
    let b = a + 1.0;
    eps.powf(b) * (eps.ln() / b - 1.0 / (b * b))
}
