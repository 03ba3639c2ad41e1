//! Blocks on a triple with two logarithmic modules, their operators and
//! the round trips between them.

use std::sync::Arc;

use logvoa_core::blocks::{blocks_dimension, Triple};
use logvoa_core::correspondence::{block_from_intw, intw_from_block_in, roundtrip_block, roundtrip_intw};
use logvoa_core::heisenberg::{partitions, Heisenberg};
use logvoa_core::intertwiner::{axiom_suite, AxiomSystem, IntwFrame};
use logvoa_core::Scalar;

fn log_triple(h: &Heisenberg, l: usize) -> Triple {
    let m1 = h.log_fock_module(&Scalar::ONE, l).unwrap();
    let m2 = h.fock_module(&Scalar::ONE, l).unwrap();
    let m3 = h.log_fock_module(&Scalar::integer(-2), l).unwrap();
    Triple::new(Arc::new(m1), Arc::new(m2), Arc::new(m3)).unwrap()
}

#[test]
fn log_blocks_and_operators_agree() {
    let h = Heisenberg::new(5).unwrap();
    let tr = log_triple(&h, 3);
    assert_eq!(tr.depth(), 2);
    let d = blocks_dimension(&tr, 3).unwrap();
    assert_eq!(d.estimate, 2);
    assert!(d.stabilized);
    let p: Vec<usize> = (0..=3).map(|n| partitions(n).len()).collect();
    let mut window = 0;
    for a in 0..=3 {
        for b in 0..=3 - a {
            for c in 0..=3 - a - b {
                window += 2 * p[a] * p[b] * 2 * p[c];
            }
        }
    }
    assert_eq!(d.space.window.dim(), window);

    let frame = IntwFrame::new(&tr, 3).unwrap();
    let mut logarithmic = false;
    for x in &d.space.basis {
        let op = intw_from_block_in(x, frame.clone()).unwrap();
        logarithmic |= op.entries().any(|(k, v)| k.n == 1 && !v.is_zero());
        assert!(axiom_suite(&op, 2).unwrap().passed());
        assert!(roundtrip_block(x).unwrap().passed());
        assert!(roundtrip_intw(&op).unwrap().passed());
        assert_eq!(block_from_intw(&op).unwrap().values, x.values);
    }
    assert!(logarithmic);

    let sys = AxiomSystem::solve(frame).unwrap();
    assert_eq!(sys.dimension(), d.estimate);
    for op in &sys.basis {
        assert!(roundtrip_intw(op).unwrap().passed());
    }
}
