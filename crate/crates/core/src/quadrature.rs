//! Quadrature rules used by the element kernels.

/// Point in barycentric coordinates with a weight normalised to the triangle area
/// (weights sum to 1).
#[derive(Debug, Clone, Copy)]
pub struct TrianglePoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const A1: f64 = 0.445_948_490_915_965;
const B1: f64 = 0.108_103_018_168_070;
const W1: f64 = 0.223_381_589_678_011;
const A2: f64 = 0.091_576_213_509_771;
const B2: f64 = 0.816_847_572_980_459;
const W2: f64 = 0.109_951_743_655_322;

/// Six-point Dunavant rule, exact for polynomials of total degree 4.
pub const TRIANGLE_DEGREE4: [TrianglePoint; 6] = [
    TrianglePoint { bary: [B1, A1, A1], weight: W1 },
    TrianglePoint { bary: [A1, B1, A1], weight: W1 },
    TrianglePoint { bary: [A1, A1, B1], weight: W1 },
    TrianglePoint { bary: [B2, A2, A2], weight: W2 },
    TrianglePoint { bary: [A2, B2, A2], weight: W2 },
    TrianglePoint { bary: [A2, A2, B2], weight: W2 },
];

/// Three-point Gauss–Legendre rule on `[0, 1]` (exact to degree 5), as `(s, weight)`.
pub fn segment_gauss3() -> [(f64, f64); 3] {
    let d = 0.5 * (0.6f64).sqrt();
    [(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn triangle_rule_is_exact_to_degree_four() {
        // Reference triangle (0,0),(1,0),(0,1): integral of x^i y^j is i! j! / (i+j+2)!.
        for i in 0..=4u32 {
            for j in 0..=(4 - i) {
                let exact = factorial(i) * factorial(j) / factorial(i + j + 2);
                let approx: f64 = TRIANGLE_DEGREE4
                    .iter()
                    .map(|p| 0.5 * p.weight * p.bary[1].powi(i as i32) * p.bary[2].powi(j as i32))
                    .sum();
                assert!((approx - exact).abs() < 1e-14, "x^{i} y^{j}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn segment_rule_is_exact_to_degree_five() {
        for k in 0..=5 {
            let approx: f64 = segment_gauss3().iter().map(|&(s, w)| w * s.powi(k)).sum();
            assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-15);
        }
    }
}
