use super::{compose, AffineLayer, ReluNet};

/// The tent map `x -> 2x` on `[0,1/2]`, `2 - 2x` on `[1/2,1]`, zero outside `[0,1]`.
pub fn triangle() -> ReluNet {
    let first = AffineLayer::from_dense(&[vec![1.0], vec![1.0], vec![1.0]], vec![0.0, -0.5, -1.0])
        .expect("static shape");
    let second = AffineLayer::from_dense(&[vec![2.0, -4.0, 2.0]], vec![0.0]).expect("static shape");
    ReluNet::new(vec![first, second]).expect("static shape")
}

/// `s`-fold composition of [`triangle`]: `2^s` pieces of slope `+-2^s`,
/// size `3s + 1`, depth `s + 1`.
pub fn sawtooth(s: usize) -> ReluNet {
    assert!(s >= 1, "sawtooth needs s >= 1");
    let mut net = triangle();
    for _ in 1..s {
        net = compose(&triangle(), &net, 1.0, 0.0).expect("scalar nets compose");
    }
    net
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape() {
        for s in 1..=6 {
            let g = sawtooth(s);
            assert_eq!((g.size(), g.depth()), (3 * s + 1, s + 1));
        }
    }

    #[test]
    fn values() {
        let g = sawtooth(1);
        assert_eq!(g.eval1(0.25), vec![0.5]);
        assert_eq!(g.eval1(0.5), vec![1.0]);
        assert_eq!(g.eval1(0.75), vec![0.5]);
        let g2 = sawtooth(2);
        assert_eq!(g2.eval1(0.25), vec![1.0]);
        assert_eq!(g2.eval1(0.5), vec![0.0]);
    }

    #[test]
    fn vanishes_off_the_unit_interval() {
        for s in 1..=8 {
            let g = sawtooth(s);
            for x in [-10.0, -1.0, -1e-6, 1.0 + 1e-6, 2.0, 10.0, 1e6] {
                assert_eq!(g.eval1(x), vec![0.0], "s={s} x={x}");
            }
        }
    }
}
