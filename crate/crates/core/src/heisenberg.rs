//! The rank-one Heisenberg vertex algebra and its Fock modules, including
//! logarithmic self-extensions where the zero mode has a Jordan block.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::error::{Error, Result};
use crate::linear::{binomial, DenseMatrix, Scalar};
use crate::module::{LogModule, ModuleBuilder, ModuleVector};
use crate::voa::{GradedVector, TruncatedVoa, VoaBuilder};

/// Nonincreasing positive parts.
pub type Partition = Vec<u32>;

/// Partitions of `n`, largest first part first.
pub fn partitions(n: usize) -> Vec<Partition> {
    fn go(n: u32, max: u32, prefix: &mut Partition, out: &mut Vec<Partition>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            prefix.push(k);
            go(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n as u32, n as u32, &mut Vec::new(), &mut out);
    out
}

fn mode_name(p: &[u32]) -> String {
    let parts: Vec<String> = p.iter().map(|k| format!("a-{k}")).collect();
    parts.join(".")
}

/// Fock space state: `(partition, zero-mode index) -> coefficient`.
type State = BTreeMap<(Partition, usize), Scalar>;

fn add_to(s: &mut State, key: (Partition, usize), c: Scalar) {
    if c.is_zero() {
        return;
    }
    let e = s.entry(key.clone()).or_insert(Scalar::ZERO);
    *e += c;
    if e.is_zero() {
        s.remove(&key);
    }
}

/// Oscillator algebra acting on `Sym(α_{-1}, α_{-2}, ...) ⊗ W`, where the
/// zero mode acts on `W` through `zero`.
type FieldKey = (Partition, i64, (Partition, usize));

struct FockEngine {
    zero: DenseMatrix,
    memo: RefCell<BTreeMap<FieldKey, State>>,
}

impl FockEngine {
    fn new(zero: DenseMatrix) -> Self {
        FockEngine {
            zero,
            memo: RefCell::new(BTreeMap::new()),
        }
    }

    fn level(p: &[u32]) -> i64 {
        p.iter().map(|k| *k as i64).sum()
    }

    fn alpha(&self, j: i64, s: &State) -> State {
        let mut out = State::new();
        for ((p, w), c) in s {
            match j {
                j if j < 0 => {
                    let mut q = p.clone();
                    let k = (-j) as u32;
                    let pos = q.iter().position(|x| *x < k).unwrap_or(q.len());
                    q.insert(pos, k);
                    add_to(&mut out, (q, *w), c.clone());
                }
                0 => {
                    for v in 0..self.zero.nrows() {
                        add_to(&mut out, (p.clone(), v), c * self.zero.get(v, *w));
                    }
                }
                j => {
                    let k = j as u32;
                    let mult = p.iter().filter(|x| **x == k).count() as i64;
                    if mult > 0 {
                        let mut q = p.clone();
                        let pos = q.iter().position(|x| *x == k).unwrap_or_default();
                        q.remove(pos);
                        add_to(&mut out, (q, *w), c * &Scalar::integer(j * mult));
                    }
                }
            }
        }
        out
    }

    /// `(α_{-a_0} α_{-a_1} ... 1)_(m)` applied to a homogeneous state of level `lu`.
    fn field(&self, a: &[u32], m: i64, s: &State, lu: i64) -> State {
        let mut out = State::new();
        for (key, c) in s {
            let memo_key = (a.to_vec(), m, key.clone());
            let cached = self.memo.borrow().get(&memo_key).cloned();
            let img = match cached {
                Some(img) => img,
                None => {
                    let img = self.field_basis(a, m, key, lu);
                    self.memo.borrow_mut().insert(memo_key, img.clone());
                    img
                }
            };
            for (k, v) in img {
                add_to(&mut out, k, v * c);
            }
        }
        out
    }

    fn field_basis(&self, a: &[u32], m: i64, key: &(Partition, usize), lu: i64) -> State {
        let s: State = [(key.clone(), Scalar::ONE)].into_iter().collect();
        let Some((&n, rest)) = a.split_first() else {
            return if m == -1 { s } else { State::new() };
        };
        let n = n as i64;
        let wr = Self::level(rest);
        let mut out = State::new();
        // Creation part: j <= -n, inner mode m - j - n acting first.
        let j_min = m - n - wr - lu + 1;
        for j in j_min.min(-n)..=-n {
            let c = binomial(-j - 1, n - 1);
            if c.is_zero() {
                continue;
            }
            let inner = self.field(rest, m - j - n, &s, lu);
            for (k, v) in self.alpha(j, &inner) {
                add_to(&mut out, k, v * &c);
            }
        }
        // Annihilation part: j >= 0 acting first.
        for j in 0..=lu {
            let c = binomial(-j - 1, n - 1);
            let lowered = self.alpha(j, &s);
            for (k, v) in self.field(rest, m - j - n, &lowered, lu - j) {
                add_to(&mut out, k, v * &c);
            }
        }
        out
    }
}

/// The Heisenberg algebra at a cutoff together with its partition basis.
#[derive(Clone, Debug)]
pub struct Heisenberg {
    voa: Arc<TruncatedVoa>,
    parts: Vec<Partition>,
}

/// The rank-one free boson truncated at weight `l_max` (at least 2), with
/// `ω = α_{-1}^2 1 / 2` and central charge 1.
pub fn heisenberg_voa(l_max: usize) -> Result<TruncatedVoa> {
    Ok((*Heisenberg::new(l_max)?.voa).clone())
}

impl Heisenberg {
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max < 2 {
            return Err(Error::Invalid("the Heisenberg cutoff must be at least 2".into()));
        }
        let by_weight: Vec<Vec<Partition>> = (0..=l_max).map(partitions).collect();
        let names = by_weight
            .iter()
            .enumerate()
            .map(|(w, ps)| {
                ps.iter()
                    .map(|p| if w == 0 { "vac".into() } else { mode_name(p) })
                    .collect()
            })
            .collect();
        let parts: Vec<Partition> = by_weight.into_iter().flatten().collect();
        let index: BTreeMap<&Partition, usize> = parts.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut b = VoaBuilder::new(l_max, names)?;
        let engine = FockEngine::new(DenseMatrix::zeros(1, 1));
        for (ia, pa) in parts.iter().enumerate() {
            for (ib, pb) in parts.iter().enumerate() {
                let wab = FockEngine::level(pa) + FockEngine::level(pb);
                let state: State = [((pb.clone(), 0), Scalar::ONE)].into_iter().collect();
                for t in 0..=l_max as i64 {
                    let n = wab - 1 - t;
                    let out = engine.field(pa, n, &state, FockEngine::level(pb));
                    let v: GradedVector = out.into_iter().map(|((p, _), c)| (index[&p], c)).collect();
                    b.set_product(ia, n, ib, v)?;
                }
            }
        }
        let omega = GradedVector::unit(index[&vec![1, 1]]).scaled(&Scalar::new(1, 2));
        let voa = b.build(0, omega, Scalar::ONE)?;
        Ok(Heisenberg {
            voa: Arc::new(voa),
            parts,
        })
    }

    pub fn voa(&self) -> &Arc<TruncatedVoa> {
        &self.voa
    }

    /// Index of the weight-one generator.
    pub fn alpha(&self) -> usize {
        1
    }

    /// Ordinary Fock module of charge `λ`: lowest weight `λ²/2`, depth 0.
    pub fn fock_module(&self, lambda: &Scalar, l_mod: usize) -> Result<LogModule> {
        let mut z = DenseMatrix::zeros(1, 1);
        z.set(0, 0, lambda.clone());
        self.module(z, &["top"], &(lambda * lambda / Scalar::integer(2)), 0, l_mod)
    }

    /// Two copies of the Fock space with zero mode `λ + N`, `N top1 = top0`.
    /// Then `L_0 - λ²/2 = λN` on the lowest level, so the depth is 1 exactly
    /// when `λ != 0`; for `λ = 0` construction fails with a depth mismatch.
    pub fn log_fock_module(&self, lambda: &Scalar, l_mod: usize) -> Result<LogModule> {
        let mut z = DenseMatrix::zeros(2, 2);
        z.set(0, 0, lambda.clone());
        z.set(1, 1, lambda.clone());
        z.set(0, 1, Scalar::ONE);
        self.module(z, &["top0", "top1"], &(lambda * lambda / Scalar::integer(2)), 1, l_mod)
    }

    fn module(&self, zero: DenseMatrix, tops: &[&str], h: &Scalar, depth: usize, l_mod: usize) -> Result<LogModule> {
        let engine = FockEngine::new(zero);
        let mut keys: Vec<(Partition, usize)> = Vec::new();
        let mut levels = Vec::new();
        for n in 0..=l_mod {
            let mut names = Vec::new();
            for p in partitions(n) {
                for (w, top) in tops.iter().enumerate() {
                    names.push(if n == 0 { String::from(*top) } else { format!("{}.{top}", mode_name(&p)) });
                    keys.push((p.clone(), w));
                }
            }
            levels.push(names);
        }
        let index: BTreeMap<&(Partition, usize), usize> = keys.iter().enumerate().map(|(i, k)| (k, i)).collect();
        let mut b = ModuleBuilder::new(self.voa.clone(), h.clone(), depth, l_mod, levels)?;
        for (ia, pa) in self.parts.iter().enumerate() {
            let wa = FockEngine::level(pa);
            for (iu, key) in keys.iter().enumerate() {
                let lu = FockEngine::level(&key.0);
                let state: State = [(key.clone(), Scalar::ONE)].into_iter().collect();
                for t in 0..=l_mod as i64 {
                    let m = wa + lu - 1 - t;
                    let out = engine.field(pa, m, &state, lu);
                    let v: ModuleVector = out.into_iter().map(|(k, c)| (index[&k], c)).collect();
                    b.set_action(ia, m, iu, v)?;
                }
            }
        }
        b.l0_from_actions()?;
        b.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (0..8).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, [1, 1, 2, 3, 5, 7, 11, 15]);
        assert_eq!(partitions(3), [vec![3], vec![2, 1], vec![1, 1, 1]]);
    }

    #[test]
    fn free_boson_products() {
        let h = Heisenberg::new(4).unwrap();
        let voa = h.voa();
        let dims: Vec<usize> = (0..=4).map(|k| voa.weight_range(k).len()).collect();
        assert_eq!(dims, [1, 1, 2, 3, 5]);
        let a = GradedVector::unit(h.alpha());
        let vac = GradedVector::unit(voa.vacuum());
        assert_eq!(voa.mode_apply(&a, 1, &a).unwrap(), vac);
        for m in 2..5 {
            assert!(voa.mode_apply(&a, m, &a).unwrap().is_zero());
        }
        assert!(voa.mode_apply(&a, 0, &a).unwrap().is_zero());
        assert_eq!(voa.mode_apply(&a, -1, &vac).unwrap(), a);
        for b in 0..voa.dim() {
            let bv = GradedVector::unit(b);
            assert_eq!(voa.mode_apply(&vac, -1, &bv).unwrap(), bv);
            for n in 0..3 {
                assert!(voa.mode_apply(&vac, n, &bv).unwrap().is_zero());
            }
        }
        let w = voa.omega();
        assert_eq!(voa.virasoro(0, w).unwrap(), w.scaled(&Scalar::integer(2)));
        assert!(voa.virasoro(1, w).unwrap().is_zero());
        assert_eq!(voa.virasoro(2, w).unwrap(), vac.scaled(&Scalar::new(1, 2)));
    }

    #[test]
    fn fock_lowest_weights() {
        let h = Heisenberg::new(4).unwrap();
        let lambda = Scalar::new(-3, 2);
        let m = h.fock_module(&lambda, 3).unwrap();
        assert_eq!(m.depth(), 0);
        assert_eq!(m.h(), &Scalar::new(9, 8));
        let top = ModuleVector::unit(0);
        assert_eq!(m.l0(&top), top.scaled(&Scalar::new(9, 8)));
        let v0 = h.fock_module(&Scalar::ZERO, 4).unwrap();
        let dims: Vec<usize> = (0..=4).map(|n| v0.level_dim(n)).collect();
        assert_eq!(dims, [1, 1, 2, 3, 5]);
    }

    #[test]
    fn log_fock_jordan_block() {
        let h = Heisenberg::new(4).unwrap();
        let m = h.log_fock_module(&Scalar::integer(2), 3).unwrap();
        assert_eq!(m.depth(), 1);
        let dims: Vec<usize> = (0..=3).map(|n| m.level_dim(n)).collect();
        assert_eq!(dims, [2, 2, 4, 6]);
        let (t0, t1) = (m.index_of("top0").unwrap(), m.index_of("top1").unwrap());
        let n1 = m.nilpotent(&ModuleVector::unit(t1));
        assert_eq!(n1, ModuleVector::unit(t0).scaled(&Scalar::integer(2)));
        assert!(m.nilpotent(&n1).is_zero());
        assert!(m.nilpotent(&ModuleVector::unit(t0)).is_zero());
        assert_eq!(
            h.log_fock_module(&Scalar::ZERO, 2).unwrap_err(),
            Error::DepthMismatch { declared: 1, actual: 0 }
        );
    }
}
