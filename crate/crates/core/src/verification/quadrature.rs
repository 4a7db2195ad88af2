//! Gauss–Hermite rules for expectations over a standard normal variable.

use std::f64::consts::PI;

/// Nodes and weights for `int f(x) e^{-x^2} dx ~ sum w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// `n`-point rule. Roots of the orthonormal Hermite polynomial are found
    /// by Newton iteration from asymptotic starting guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let pim4 = PI.powf(-0.25);
        let half = n.div_ceil(2);
        let nf = n as f64;
        let mut z = 0.0f64;
        for i in 0..half {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let (p1, d) = orthonormal_hermite(n, z, pim4);
                pp = d;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = orthonormal_hermite(n, z, pim4);
            pp = if d != 0.0 { d } else { pp };
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Self { nodes, weights }
    }

    /// `E f(alpha)` for `alpha ~ N(0, 1)`.
    pub fn expect_normal(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let s2 = std::f64::consts::SQRT_2;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(s2 * x))
            .sum::<f64>()
            / PI.sqrt()
    }

    /// Normal-law nodes `sqrt(2) x_i` with probability weights `w_i / sqrt(pi)`.
    pub fn normal_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let s2 = std::f64::consts::SQRT_2;
        let sp = PI.sqrt();
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (s2 * x, w / sp))
    }
}

/// Value of the degree-`n` orthonormal Hermite function and its derivative at `z`.
fn orthonormal_hermite(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 1..=n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_of_the_normal() {
        let gh = GaussHermite::new(64);
        assert!((gh.weights.iter().sum::<f64>() - PI.sqrt()).abs() < 1e-13);
        assert!((gh.expect_normal(|x| x * x) - 1.0).abs() < 1e-13);
        assert!((gh.expect_normal(|x| x.powi(4)) - 3.0).abs() < 1e-12);
        assert!(gh.expect_normal(|x| x.powi(3)).abs() < 1e-13);
        assert!((gh.expect_normal(f64::exp) - 0.5f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn small_rules() {
        let gh = GaussHermite::new(2);
        assert!((gh.nodes[0] - 0.5f64.sqrt()).abs() < 1e-14);
        let gh = GaussHermite::new(5);
        assert!((gh.expect_normal(|x| x.powi(8)) - 105.0).abs() < 1e-10);
    }
}
