//! Heisenberg fusion rules through the block computation, cross-checked
//! against charge conservation and the independently assembled axiom
//! system.

use std::sync::Arc;

use logvoa_core::blocks::{blocks_dimension, Triple};
use logvoa_core::heisenberg::{partitions, Heisenberg};
use logvoa_core::intertwiner::{AxiomSystem, IntwFrame};
use logvoa_core::Scalar;

fn triple(h: &Heisenberg, l: usize, charges: [Scalar; 3]) -> Triple {
    let [a, b, c] = charges.map(|x| Arc::new(h.fock_module(&x, l).unwrap()));
    Triple::new(a, b, c).unwrap()
}

#[test]
fn charge_conservation_at_level_three() {
    let h = Heisenberg::new(5).unwrap();
    let half = Scalar::new(1, 2);
    for lam in [0i64, 1, -1] {
        for mu in [0i64, 2] {
            let s = -(lam + mu);
            for nu in [Scalar::integer(s), Scalar::integer(s + 1), half.clone()] {
                let expect = usize::from(nu == Scalar::integer(s));
                let tr = triple(&h, 3, [Scalar::integer(lam), Scalar::integer(mu), nu.clone()]);
                let d = blocks_dimension(&tr, 3).unwrap();
                assert_eq!(d.estimate, expect, "{lam} {mu} {nu}");
                assert!(d.stabilized);
                let sys = AxiomSystem::solve(IntwFrame::new(&tr, 3).unwrap()).unwrap();
                assert_eq!(sys.dimension(), expect);
            }
        }
    }
}

#[test]
fn window_dimensions_follow_partition_counts() {
    let h = Heisenberg::new(5).unwrap();
    let p: Vec<usize> = (0..=3).map(|n| partitions(n).len()).collect();
    let tr = triple(&h, 3, [Scalar::ONE, Scalar::ONE, Scalar::integer(-2)]);
    let d = blocks_dimension(&tr, 3).unwrap();
    for s in &d.levels {
        let mut expect = 0;
        for a in 0..=s.level {
            for b in 0..=s.level - a {
                for c in 0..=s.level - a - b {
                    expect += p[a] * p[b] * p[c];
                }
            }
        }
        assert_eq!(s.window_dim, expect);
        assert_eq!(s.rank + s.estimate, s.window_dim);
    }
}
