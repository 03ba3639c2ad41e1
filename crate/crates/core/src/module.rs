//! Graded modules with a possibly non-semisimple `L_0`: each level carries an
//! explicit `L_0` matrix whose nilpotent part has a validated depth.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::current::{CurrentAlgebra, CurrentElement};
use crate::error::{truncated, Error, Result};
use crate::linear::{binomial, DenseMatrix, Scalar, SparseVec};
use crate::voa::{graded_basis, BasisVector, GradedVector, SweepReport, TruncatedVoa};

/// Element of a module, as coefficients over its global basis index.
pub type ModuleVector = SparseVec;

#[derive(Clone, Debug)]
pub struct LogModule {
    voa: Arc<TruncatedVoa>,
    h: Scalar,
    depth: usize,
    l_mod: usize,
    basis: Vec<BasisVector>,
    offsets: Vec<usize>,
    names: BTreeMap<String, usize>,
    l0: Vec<DenseMatrix>,
    /// `actions[a * dim + u][t]` is `a_(m)u` landing on level `t`.
    actions: Vec<Vec<ModuleVector>>,
}

#[derive(Clone, Debug)]
pub struct ModuleBuilder {
    inner: LogModule,
}

impl ModuleBuilder {
    /// `levels[n]` lists the basis names of level `n`, for `n = 0..=l_mod`.
    pub fn new(voa: Arc<TruncatedVoa>, h: Scalar, depth: usize, l_mod: usize, levels: Vec<Vec<String>>) -> Result<Self> {
        let (basis, offsets, names) = graded_basis(l_mod, levels)?;
        let l0 = (0..=l_mod)
            .map(|n| {
                let d = offsets[n + 1] - offsets[n];
                DenseMatrix::zeros(d, d)
            })
            .collect();
        let actions = vec![vec![ModuleVector::new(); l_mod + 1]; voa.dim() * basis.len()];
        Ok(ModuleBuilder {
            inner: LogModule {
                voa,
                h,
                depth,
                l_mod,
                basis,
                offsets,
                names,
                l0,
                actions,
            },
        })
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.inner.index_of(name)
    }

    pub fn level(&self, u: usize) -> usize {
        self.inner.level(u)
    }

    /// Records `a_(m)u = result`; the result must lie on level `|a| + ℓ(u) - 1 - m`.
    pub fn set_action(&mut self, a: usize, m: i64, u: usize, result: ModuleVector) -> Result<()> {
        let md = &mut self.inner;
        if a >= md.voa.dim() {
            return Err(Error::UnknownBasis(format!("algebra index {a}")));
        }
        if u >= md.basis.len() {
            return Err(Error::UnknownBasis(format!("module index {u}")));
        }
        let t = (md.voa.weight(a) + md.level(u)) as i64 - 1 - m;
        if t > md.l_mod as i64 {
            return Err(truncated("module action", t, md.l_mod));
        }
        if t < 0 {
            return if result.is_zero() {
                Ok(())
            } else {
                Err(Error::Invalid(format!("{}_({m}){} lands below level 0", md.voa.name(a), md.basis[u].name)))
            };
        }
        for (i, _) in result.iter() {
            if i >= md.basis.len() || md.level(i) as i64 != t {
                return Err(Error::Invalid(format!(
                    "{}_({m}){} must lie on level {t}",
                    md.voa.name(a),
                    md.basis[u].name
                )));
            }
        }
        let dim = md.basis.len();
        md.actions[a * dim + u][t as usize] = result;
        Ok(())
    }

    /// Sets the `L_0` matrix of a level: entry `(i, j)` is the coefficient of
    /// the `i`-th basis vector in `L_0` of the `j`-th.
    pub fn set_l0(&mut self, level: usize, m: DenseMatrix) -> Result<()> {
        let d = self.inner.level_dim(level);
        if level > self.inner.l_mod || m.nrows() != d || m.ncols() != d {
            return Err(Error::Invalid(format!("L0 matrix for level {level} must be {d}x{d}")));
        }
        self.inner.l0[level] = m;
        Ok(())
    }

    /// Derives every `L_0` matrix from the action of the conformal vector.
    pub fn l0_from_actions(&mut self) -> Result<()> {
        for level in 0..=self.inner.l_mod {
            let m = self.inner.l0_from_actions(level)?;
            self.inner.l0[level] = m;
        }
        Ok(())
    }

    /// Validates `L_0` against the conformal vector and the declared depth.
    pub fn build(self) -> Result<LogModule> {
        let md = self.inner;
        for level in 0..=md.l_mod {
            if md.l0_from_actions(level)? != md.l0[level] {
                return Err(Error::Invalid(format!(
                    "stored L0 on level {level} disagrees with the conformal vector's action"
                )));
            }
        }
        let actual = md.nilpotency_depth()?;
        if actual != md.depth {
            return Err(Error::DepthMismatch {
                declared: md.depth,
                actual,
            });
        }
        Ok(md)
    }
}

impl LogModule {
    pub fn voa(&self) -> &Arc<TruncatedVoa> {
        &self.voa
    }

    pub fn h(&self) -> &Scalar {
        &self.h
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn l_mod(&self) -> usize {
        self.l_mod
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn name(&self, u: usize) -> &str {
        &self.basis[u].name
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownBasis(name.into()))
    }

    pub fn level(&self, u: usize) -> usize {
        self.basis[u].weight
    }

    pub fn level_range(&self, level: usize) -> Range<usize> {
        if level > self.l_mod {
            return self.basis.len()..self.basis.len();
        }
        self.offsets[level]..self.offsets[level + 1]
    }

    pub fn level_dim(&self, level: usize) -> usize {
        self.level_range(level).len()
    }

    /// Conformal weight `h + level` of a basis vector's generalized eigenspace.
    pub fn weight(&self, u: usize) -> Scalar {
        &self.h + &Scalar::from(self.level(u))
    }

    pub fn l0_matrix(&self, level: usize) -> &DenseMatrix {
        &self.l0[level]
    }

    pub fn check_vector(&self, u: &ModuleVector) -> Result<()> {
        match u.iter().find(|(i, _)| *i >= self.basis.len()) {
            Some((i, _)) => Err(Error::UnknownBasis(format!("module index {i}"))),
            None => Ok(()),
        }
    }

    /// `a_(m)u` for basis vectors; `None` when it vanishes by grading.
    pub fn act(&self, a: usize, m: i64, u: usize) -> Result<Option<&ModuleVector>> {
        let t = (self.voa.weight(a) + self.level(u)) as i64 - 1 - m;
        if t < 0 {
            return Ok(None);
        }
        if t > self.l_mod as i64 {
            return Err(truncated("module action", t, self.l_mod));
        }
        Ok(Some(&self.actions[a * self.basis.len() + u][t as usize]))
    }

    /// Nonzero stored actions as `(a, m, u, a_(m)u)`.
    pub fn actions(&self) -> impl Iterator<Item = (usize, i64, usize, &ModuleVector)> + '_ {
        let dim = self.basis.len();
        self.actions.iter().enumerate().flat_map(move |(au, row)| {
            let (a, u) = (au / dim, au % dim);
            let top = (self.voa.weight(a) + self.level(u)) as i64 - 1;
            row.iter()
                .enumerate()
                .filter(|(_, r)| !r.is_zero())
                .map(move |(t, r)| (a, top - t as i64, u, r))
        })
    }

    /// A copy with one action entry replaced, skipping validation.
    pub fn with_action_unchecked(&self, a: usize, m: i64, u: usize, result: ModuleVector) -> LogModule {
        let mut b = ModuleBuilder { inner: self.clone() };
        b.set_action(a, m, u, result).ok();
        b.inner
    }

    /// `acc += coeff * a_(m) u` for a basis vector `a`.
    pub(crate) fn add_action(&self, acc: &mut ModuleVector, coeff: &Scalar, a: usize, m: i64, u: &ModuleVector) -> Result<()> {
        if coeff.is_zero() {
            return Ok(());
        }
        for (j, cj) in u.iter() {
            if let Some(r) = self.act(a, m, j)? {
                acc.add_scaled(&(coeff * cj), r);
            }
        }
        Ok(())
    }

    pub fn mode_apply(&self, a: &GradedVector, m: i64, u: &ModuleVector) -> Result<ModuleVector> {
        self.voa.check_vector(a)?;
        self.check_vector(u)?;
        let mut out = ModuleVector::new();
        for (i, ci) in a.iter() {
            self.add_action(&mut out, ci, i, m, u)?;
        }
        Ok(out)
    }

    /// `L_0` through the stored per-level matrices.
    pub fn l0(&self, u: &ModuleVector) -> ModuleVector {
        let mut out = ModuleVector::new();
        for (j, c) in u.iter() {
            let level = self.level(j);
            let base = self.offsets[level];
            let m = &self.l0[level];
            for i in 0..m.nrows() {
                out.add_term(base + i, &(c * m.get(i, j - base)));
            }
        }
        out
    }

    /// Nilpotent part `(L_0 - h - level)` applied levelwise.
    pub fn nilpotent(&self, u: &ModuleVector) -> ModuleVector {
        let mut out = self.l0(u);
        for (j, c) in u.iter() {
            out.add_term(j, &(-&(c * &self.weight(j))));
        }
        out
    }

    /// `J_n(a) u = a_(|a|-1+n) u`, extended linearly.
    pub fn act_current(&self, x: &CurrentElement, u: &ModuleVector) -> Result<ModuleVector> {
        self.check_vector(u)?;
        let mut out = ModuleVector::new();
        for (n, a, c) in x.iter() {
            self.add_action(&mut out, c, a, self.voa.weight(a) as i64 - 1 + n, u)?;
        }
        Ok(out)
    }

    fn l0_from_actions(&self, level: usize) -> Result<DenseMatrix> {
        let range = self.level_range(level);
        let mut m = DenseMatrix::zeros(range.len(), range.len());
        for (j, u) in range.clone().enumerate() {
            let img = self.mode_apply(self.voa.omega(), 1, &ModuleVector::unit(u))?;
            for (i, c) in img.iter() {
                m.set(i - range.start, j, c.clone());
            }
        }
        Ok(m)
    }

    /// Smallest `k` with `(L_0 - h - n)^{k+1} = 0` on every level `n`.
    pub fn nilpotency_depth(&self) -> Result<usize> {
        let mut depth = 0;
        for level in 0..=self.l_mod {
            let shift = &self.h + &Scalar::from(level);
            let idx = self.l0[level].shift(&shift).nilpotency_index().ok_or_else(|| {
                Error::Invalid(format!("L0 - h - {level} is not nilpotent on level {level}"))
            })?;
            depth = depth.max(idx.saturating_sub(1));
        }
        Ok(depth)
    }

    /// Residual of the Borcherds identity with the third argument in the module.
    pub fn check_module_borcherds(
        &self,
        p: i64,
        q: i64,
        r: i64,
        a: &GradedVector,
        b: &GradedVector,
        u: &ModuleVector,
    ) -> Result<ModuleVector> {
        self.voa.check_vector(a)?;
        self.voa.check_vector(b)?;
        self.check_vector(u)?;
        let mut out = ModuleVector::new();
        for (ia, ca) in a.iter() {
            for (ib, cb) in b.iter() {
                for (iu, cu) in u.iter() {
                    let res = self.borcherds_basis(p, q, r, ia, ib, iu)?;
                    out.add_scaled(&(&(ca * cb) * cu), &res);
                }
            }
        }
        Ok(out)
    }

    /// Module Borcherds identity on all basis `a`, `b`, `u` with
    /// `|p|, |q|, |r| <= bound`; instances above the cutoff are skipped.
    pub fn borcherds_sweep(&self, bound: i64) -> SweepReport {
        let mut report = SweepReport::default();
        let dim = self.voa.dim();
        for a in 0..dim {
            for b in 0..dim {
                for u in 0..self.dim() {
                    for p in -bound..=bound {
                        for q in -bound..=bound {
                            for r in -bound..=bound {
                                match self.borcherds_basis(p, q, r, a, b, u) {
                                    Ok(res) => {
                                        report.checked += 1;
                                        if !res.is_zero() {
                                            report.failures.push((p, q, r, a, b, u));
                                        }
                                    }
                                    Err(_) => report.skipped += 1,
                                }
                            }
                        }
                    }
                }
            }
        }
        report
    }

    fn borcherds_basis(&self, p: i64, q: i64, r: i64, a: usize, b: usize, u: usize) -> Result<ModuleVector> {
        let voa = &*self.voa;
        let (wa, wb, lu) = (voa.weight(a) as i64, voa.weight(b) as i64, self.level(u) as i64);
        let target = wa + wb + lu - 2 - p - q - r;
        if target > self.l_mod as i64 {
            return Err(truncated("module Borcherds target", target, self.l_mod));
        }
        let mut out = ModuleVector::new();
        if target < 0 {
            return Ok(out);
        }
        let uv = ModuleVector::unit(u);
        for i in 0..=(wa + wb - 1 - r).max(-1) {
            let coeff = binomial(p, i);
            if coeff.is_zero() {
                continue;
            }
            if let Some(ab) = voa.product(a, r + i, b)? {
                for (x, cx) in ab.iter() {
                    self.add_action(&mut out, &(&coeff * cx), x, p + q - i, &uv)?;
                }
            }
        }
        let sr = Scalar::sign(r);
        for i in 0..=(wb + lu - 1 - q).max(wa + lu - 1 - p).max(-1) {
            let coeff = Scalar::sign(i) * binomial(r, i);
            if coeff.is_zero() {
                continue;
            }
            if let Some(bu) = self.act(b, q + i, u)? {
                self.add_action(&mut out, &(-&coeff), a, p + r - i, bu)?;
            }
            if let Some(au) = self.act(a, p + i, u)? {
                self.add_action(&mut out, &(&coeff * &sr), b, q + r - i, au)?;
            }
        }
        Ok(out)
    }
}

fn dual_name(name: &str) -> String {
    match name.strip_suffix('*') {
        Some(base) => base.into(),
        None => format!("{name}*"),
    }
}

/// The contragredient module on levelwise dual bases, with
/// `<a_(m)φ, u> = <φ, θ(J_{m-|a|+1}(a)) u>`.
pub fn dual_module(m: &LogModule) -> Result<LogModule> {
    let alg = CurrentAlgebra::new(m.voa.clone())?;
    dual_module_with(m, &alg)
}

pub fn dual_module_with(m: &LogModule, alg: &CurrentAlgebra) -> Result<LogModule> {
    let voa = m.voa.clone();
    let levels = (0..=m.l_mod)
        .map(|n| m.level_range(n).map(|u| dual_name(m.name(u))).collect())
        .collect();
    let mut b = ModuleBuilder::new(voa.clone(), m.h.clone(), m.depth, m.l_mod, levels)?;
    let dim = m.dim();
    for a in 0..voa.dim() {
        let k = voa.weight(a) as i64;
        for source in 0..=m.l_mod {
            for target in 0..=m.l_mod {
                let mode = k + source as i64 - 1 - target as i64;
                let flipped = alg.anti_involution_raw(&CurrentElement::basis(mode - k + 1, a));
                for u in m.level_range(target) {
                    let w = m.act_current(&flipped, &ModuleVector::unit(u))?;
                    for (v, c) in w.iter() {
                        b.inner.actions[a * dim + v][target].add_term(u, c);
                    }
                }
            }
        }
    }
    for level in 0..=m.l_mod {
        b.set_l0(level, m.l0[level].transpose())?;
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg::Heisenberg;

    #[test]
    fn dual_pairing_and_involution() {
        let h = Heisenberg::new(5).unwrap();
        let m = h.log_fock_module(&Scalar::new(3, 2), 3).unwrap();
        let d = dual_module(&m).unwrap();
        let dd = dual_module(&d).unwrap();
        for n in 0..=3 {
            assert_eq!(d.level_dim(n), m.level_dim(n));
        }
        assert_eq!(dd.basis(), m.basis());
        assert_eq!(dd.actions().count(), m.actions().count());
        for (x, y) in dd.actions().zip(m.actions()) {
            assert_eq!((x.0, x.1, x.2, x.3), (y.0, y.1, y.2, y.3));
        }
        let voa = h.voa();
        for n in -2..=2i64 {
            for u in 0..m.dim() {
                for phi in 0..d.dim() {
                    let lhs = d.mode_apply(voa.omega(), n + 1, &ModuleVector::unit(phi));
                    let rhs = m.mode_apply(voa.omega(), -n + 1, &ModuleVector::unit(u));
                    if let (Ok(l), Ok(r)) = (lhs, rhs) {
                        assert_eq!(l.get(u), r.get(phi), "n={n} u={u} phi={phi}");
                    }
                }
            }
        }
    }

    #[test]
    fn dual_of_fock_negates_charge() {
        let h = Heisenberg::new(4).unwrap();
        let m = h.fock_module(&Scalar::integer(2), 2).unwrap();
        let d = dual_module(&m).unwrap();
        let alpha = GradedVector::unit(h.alpha());
        let top = d.level_range(0).start;
        let img = d.mode_apply(&alpha, 0, &ModuleVector::unit(top)).unwrap();
        assert_eq!(img, ModuleVector::unit(top).scaled(&Scalar::integer(-2)));
    }

    #[test]
    fn current_action_is_a_representation() {
        let h = Heisenberg::new(6).unwrap();
        let alg = CurrentAlgebra::new(h.voa().clone()).unwrap();
        let m = h.log_fock_module(&Scalar::integer(-1), 3).unwrap();
        for a in 0..7 {
            for b in 0..7 {
                for (i, j) in [(-1, 1), (0, 0), (1, -2), (2, -1), (0, -1)] {
                    let x = CurrentElement::basis(i, a);
                    let y = CurrentElement::basis(j, b);
                    let xy = alg.bracket(&x, &y).unwrap();
                    for u in m.level_range(0).chain(m.level_range(1)) {
                        let uv = ModuleVector::unit(u);
                        let lhs = m.act_current(&xy, &uv);
                        let first = m.act_current(&y, &uv).and_then(|v| m.act_current(&x, &v));
                        let second = m.act_current(&x, &uv).and_then(|v| m.act_current(&y, &v));
                        if let (Ok(l), Ok(f), Ok(s)) = (lhs, first, second) {
                            assert_eq!(l, f.sub(&s), "a={a} b={b} i={i} j={j} u={u}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn corrupted_table_breaks_borcherds() {
        let h = Heisenberg::new(4).unwrap();
        let m = h.fock_module(&Scalar::integer(1), 3).unwrap();
        let alpha = h.alpha();
        let top = m.level_range(0).start;
        let bad = m.act(alpha, -1, top).unwrap().unwrap().scaled(&Scalar::integer(2));
        let corrupted = m.with_action_unchecked(alpha, -1, top, bad);
        let av = GradedVector::unit(alpha);
        let mut found = false;
        for (p, q, r) in [(0, -1, 0), (-1, 0, 0), (1, -1, -1), (0, 0, -1)] {
            for u in 0..3 {
                if let Ok(res) = corrupted.check_module_borcherds(p, q, r, &av, &av, &ModuleVector::unit(u)) {
                    found |= !res.is_zero();
                }
            }
        }
        assert!(found);
    }

    #[test]
    fn built_in_modules_pass_the_sweep() {
        let h = crate::fixtures::heisenberg(4);
        for m in [
            h.fock_module(&Scalar::new(-3, 2), 3).unwrap(),
            h.log_fock_module(&Scalar::integer(2), 3).unwrap(),
        ] {
            let r = m.borcherds_sweep(2);
            assert!(r.passed(), "{:?}", &r.failures[..r.failures.len().min(3)]);
            assert!(r.checked > 1000);
            let d = dual_module(&m).unwrap();
            assert!(d.borcherds_sweep(2).passed());
        }
        let m = h.fock_module(&Scalar::integer(1), 2).unwrap();
        let a = h.alpha();
        let bad = m.act(a, -1, 0).unwrap().unwrap().scaled(&Scalar::integer(3));
        assert!(!m.with_action_unchecked(a, -1, 0, bad).borcherds_sweep(1).passed());
    }
}
