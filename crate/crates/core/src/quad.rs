//! Gauss-Legendre quadrature helpers.
//!
//! Nodes and weights are generated at first use by Newton iteration on the
//! Legendre recurrence, so no coefficient tables are carried around. The
//! adaptive driver bisects panels until a 12-point and a 24-point rule agree.

use std::sync::OnceLock;

type Rule = (Vec<f64>, Vec<f64>);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
fn legendre_rule(n: usize) -> Rule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess for the i-th positive root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn cached_rule(n: usize) -> &'static Rule {
    static RULES: OnceLock<[(usize, Rule); 4]> = OnceLock::new();
    let rules = RULES.get_or_init(|| [5, 12, 24, 30].map(|m| (m, legendre_rule(m))));
    &rules
        .iter()
        .find(|(m, _)| *m == n)
        .expect("uncached rule size")
        .1
}

/// Fixed n-point Gauss-Legendre integral of `f` over `[a, b]`.
pub fn gauss(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (nodes, weights) = cached_rule(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Adaptive panel integration to absolute tolerance `tol`.
///
/// Each panel is accepted when the 12- and 24-point rules agree to the
/// panel's share of the budget; otherwise it is bisected (depth-limited).
pub fn adaptive(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &mut dyn FnMut(f64) -> f64,
        a: f64,
        b: f64,
        tol: f64,
        coarse: f64,
        depth: u32,
    ) -> f64 {
        let fine = gauss(f, a, b, 24);
        if (fine - coarse).abs() <= tol || depth >= 28 {
            return fine;
        }
        let mid = 0.5 * (a + b);
        let left = gauss(f, a, mid, 12);
        let right = gauss(f, mid, b, 12);
        recurse(f, a, mid, 0.5 * tol, left, depth + 1)
            + recurse(f, mid, b, 0.5 * tol, right, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let coarse = gauss(f, a, b, 12);
    recurse(f, a, b, tol, coarse, 0)
}
