//! The two maps between conformal blocks and logarithmic intertwining
//! operators of type `(M2 M1 → D(M3))`, and exact round-trip checks.
//!
//! Evaluating an operator at `z = 1` kills every log power and, by weight
//! bookkeeping, every exponent except `|u1| + |u2| - |u3| - 1`, so the block
//! of an operator is read off the `n = 0` table directly. In the other
//! direction the block is evaluated on the `z^{∓L_0}` expansions of the three
//! inputs; nilpotent parts preserve levels, so a window of level `L` supplies
//! every value needed for a table of level `L`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::blocks::{BlockFunctional, TriVector};
use crate::error::{Error, Result};
use crate::intertwiner::{check_weights, IntwFrame, LogIntwOperator, NilpotentSymbol};
use crate::linear::{factorial, Scalar};
use crate::module::{LogModule, ModuleVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `z^{±L_0} u = Σ_j (±1)^j/j! (L_0 - |u|)^j u · z^{±|u|} (log z)^j` for a
/// basis vector `u`; `terms[j]` is the vector multiplying `(log z)^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightExpansion {
    pub sign: Sign,
    pub weight: Scalar,
    pub terms: Vec<ModuleVector>,
}

impl WeightExpansion {
    pub fn new(m: &LogModule, u: usize, sign: Sign) -> Self {
        let mut terms = Vec::new();
        let mut cur = ModuleVector::unit(u);
        let mut j = 0u64;
        while !cur.is_zero() && j as usize <= m.depth() {
            let s = match sign {
                Sign::Plus => Scalar::ONE,
                Sign::Minus => Scalar::sign(j as i64),
            };
            terms.push(cur.scaled(&(s / factorial(j))));
            cur = m.nilpotent(&cur);
            j += 1;
        }
        WeightExpansion {
            sign,
            weight: m.weight(u),
            terms,
        }
    }

    /// Highest log power present.
    pub fn log_degree(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }
}

fn tensor(v1: &ModuleVector, v2: &ModuleVector, v3: &ModuleVector) -> TriVector {
    let mut t = TriVector::default();
    for (a, ca) in v1.iter() {
        for (b, cb) in v2.iter() {
            for (c, cc) in v3.iter() {
                t.add_term((a, b, c), &(&(ca * cb) * cc));
            }
        }
    }
    t
}

/// Operator table of a block on the block's own window.
pub fn intw_from_block(x: &BlockFunctional) -> Result<LogIntwOperator> {
    let frame = IntwFrame::new(&x.triple, x.window.level())?;
    intw_from_block_in(x, frame)
}

/// Operator table of a block on a given frame, which must use the same
/// modules and a window no larger than the block's.
pub fn intw_from_block_in(x: &BlockFunctional, frame: Arc<IntwFrame>) -> Result<LogIntwOperator> {
    if frame.level() > x.window.level() {
        return Err(Error::WindowTooSmall {
            required: frame.level(),
            available: x.window.level(),
        });
    }
    let same = frame.triple.modules.iter().zip(&x.triple.modules).all(|(a, b)| Arc::ptr_eq(a, b));
    if !same {
        return Err(Error::Invalid("block and frame use different modules".into()));
    }
    let [m1, m2, m3] = &frame.triple.modules;
    let mut op = LogIntwOperator::zero(frame.clone());
    for col in 0..frame.window.dim() {
        let ((u1, u2, u3), _) = frame.window.triple(col);
        let e1 = WeightExpansion::new(m1, u1, Sign::Minus);
        let e2 = WeightExpansion::new(m2, u2, Sign::Minus);
        let e3 = WeightExpansion::new(m3, u3, Sign::Plus);
        let mut coeffs = alloc::vec![Scalar::ZERO; frame.depth() + 1];
        for (j1, v1) in e1.terms.iter().enumerate() {
            for (j2, v2) in e2.terms.iter().enumerate() {
                for (j3, v3) in e3.terms.iter().enumerate() {
                    coeffs[j1 + j2 + j3] += x.evaluate(&tensor(v1, v2, v3))?;
                }
            }
        }
        for (n, c) in coeffs.into_iter().enumerate() {
            op.set(n, u1, u2, u3, c)?;
        }
    }
    Ok(op)
}

/// `x(u1 ⊗ u2 ⊗ u3) = <(u2)^0_(|u1|+|u2|-|u3|-1) u1, u3>`.
pub fn block_from_intw(op: &LogIntwOperator) -> Result<BlockFunctional> {
    let frame = op.frame();
    let mut x = BlockFunctional::zero(frame.triple.clone(), frame.window.clone());
    for col in 0..frame.window.dim() {
        let ((u1, u2, u3), _) = frame.window.triple(col);
        x.values[col] = op.coefficient(0, u1, u2, u3)?;
    }
    Ok(x)
}

/// Outcome of an exact comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundTrip {
    pub compared: usize,
    pub mismatches: usize,
}

/// Tracks the largest absolute difference seen while comparing.
#[derive(Default)]
struct Comparison {
    compared: usize,
    mismatches: usize,
    max: Scalar,
}

impl Comparison {
    fn push(&mut self, a: &Scalar, b: &Scalar) {
        self.compared += 1;
        let d = (a - b).abs();
        if !d.is_zero() {
            self.mismatches += 1;
            if d > self.max {
                self.max = d;
            }
        }
    }

    fn finish(self) -> (RoundTrip, Scalar) {
        (
            RoundTrip {
                compared: self.compared,
                mismatches: self.mismatches,
            },
            self.max,
        )
    }
}

impl RoundTrip {
    pub fn passed(&self) -> bool {
        self.mismatches == 0
    }
}

/// Block → operator → block, compared on the whole window.
pub fn roundtrip_block(x: &BlockFunctional) -> Result<RoundTrip> {
    Ok(roundtrip_block_residual(x)?.0)
}

/// [`roundtrip_block`] together with the largest absolute difference.
pub fn roundtrip_block_residual(x: &BlockFunctional) -> Result<(RoundTrip, Scalar)> {
    let back = block_from_intw(&intw_from_block(x)?)?;
    let mut c = Comparison::default();
    for (a, b) in x.values.iter().zip(&back.values) {
        c.push(a, b);
    }
    Ok(c.finish())
}

/// Operator → block → operator, compared entry by entry for every log
/// degree.
pub fn roundtrip_intw(op: &LogIntwOperator) -> Result<RoundTrip> {
    Ok(roundtrip_intw_residual(op)?.0)
}

/// [`roundtrip_intw`] together with the largest absolute difference.
pub fn roundtrip_intw_residual(op: &LogIntwOperator) -> Result<(RoundTrip, Scalar)> {
    let back = intw_from_block_in(&block_from_intw(op)?, op.frame().clone())?;
    let frame = op.frame();
    let mut c = Comparison::default();
    for col in 0..frame.window.dim() {
        let ((u1, u2, u3), _) = frame.window.triple(col);
        for n in 0..=frame.depth() {
            c.push(&op.coefficient(n, u1, u2, u3)?, &back.coefficient(n, u1, u2, u3)?);
        }
    }
    // Entries off the bookkeeping exponent never survive the round trip.
    for k in check_weights(op).violations {
        c.push(&op.get(&k), &Scalar::ZERO);
    }
    Ok(c.finish())
}

/// `Σ_{n1+n2+n3=k} (-1)^{n1+n2}/(n1! n2! n3!) x3^{n3} x1^{n1} x2^{n2} (u)^0`
/// collapses to the single token `(u)^k` when the log bound is `k`.
pub fn telescoping_verify(k: usize) -> bool {
    let free = [usize::MAX; 2];
    let mut total = NilpotentSymbol::zero(k, free);
    for n1 in 0..=k {
        for n2 in 0..=k - n1 {
            let n3 = k - n1 - n2;
            let mut t = NilpotentSymbol::token(k, free, n1, n2, 0);
            for _ in 0..n3 {
                t = t.apply_third();
            }
            let c = Scalar::sign((n1 + n2) as i64) / (factorial(n1 as u64) * factorial(n2 as u64) * factorial(n3 as u64));
            total.add_scaled(&c, &t);
        }
    }
    total == NilpotentSymbol::token(k, free, 0, 0, k)
}
