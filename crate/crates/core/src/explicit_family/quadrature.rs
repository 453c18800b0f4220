const NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Eight-point Gauss–Legendre rule on `[a, b]`.
pub fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        s += w * (f(mid - half * x) + f(mid + half * x));
    }
    s * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_degree_fifteen() {
        let f = |x: f64| x.powi(15) + 3.0 * x.powi(4);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 3.0 * (32.0 - 1.0) / 5.0;
        assert!((gauss_legendre(&f, 1.0, 2.0) - exact).abs() < 1e-9);
    }
}
