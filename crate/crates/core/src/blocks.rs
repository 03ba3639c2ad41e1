//! Global forms `a ⊗ z^p (z-1)^q (dz)^{1-|a|}` on the projective line with
//! poles at 0, 1 and ∞, their expansions into currents at each pole, and
//! the coinvariant computation of three-point conformal blocks on a finite
//! level window.
//!
//! A relation built from a form and a generator `u1 ⊗ u2 ⊗ u3` is admitted
//! only if every component it can have lies inside the window; partially
//! visible relations are discarded rather than projected, since dropping
//! their out-of-window part would impose false constraints.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::current::{CurrentAlgebra, CurrentElement};
use crate::error::{truncated, Error, Result};
use crate::linear::{binomial, RowReducer, Scalar};
use crate::module::{LogModule, ModuleVector};
use crate::voa::{GradedVector, TruncatedVoa};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    Zero,
    One,
    Infinity,
}

pub const POINTS: [Point; 3] = [Point::Zero, Point::One, Point::Infinity];

/// `a ⊗ z^p (z-1)^q (dz)^{1-k}` with `a` homogeneous of weight `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct P1Form {
    pub a: GradedVector,
    pub p: i64,
    pub q: i64,
}

impl P1Form {
    pub fn new(voa: &TruncatedVoa, a: GradedVector, p: i64, q: i64) -> Result<Self> {
        voa.check_vector(&a)?;
        if !a.is_zero() && voa.homogeneous_weight(&a).is_none() {
            return Err(Error::Invalid("form coefficient must be homogeneous".into()));
        }
        Ok(P1Form { a, p, q })
    }

    pub fn basis(a: usize, p: i64, q: i64) -> Self {
        P1Form {
            a: GradedVector::unit(a),
            p,
            q,
        }
    }
}

/// Finite sum of forms, keyed by the exponent pair `(p, q)`. Coefficients
/// need not be homogeneous; each homogeneous part carries its own
/// differential degree.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct P1Current {
    terms: BTreeMap<(i64, i64), GradedVector>,
}

impl From<&P1Form> for P1Current {
    fn from(f: &P1Form) -> Self {
        let mut x = P1Current::default();
        x.add_scaled(&Scalar::ONE, f.p, f.q, &f.a);
        x
    }
}

impl P1Current {
    pub fn add_scaled(&mut self, c: &Scalar, p: i64, q: i64, a: &GradedVector) {
        let e = self.terms.entry((p, q)).or_default();
        e.add_scaled(c, a);
        if e.is_zero() {
            self.terms.remove(&(p, q));
        }
    }

    pub fn add(&mut self, c: &Scalar, other: &P1Current) {
        for ((p, q), a) in &other.terms {
            self.add_scaled(c, *p, *q, a);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, i64, &GradedVector)> + '_ {
        self.terms.iter().map(|((p, q), a)| (*p, *q, a))
    }
}

/// Bracket of forms: `Σ_m a_(m)b ⊗ f^{(m)} g / m!`, with the `m`-th derivative
/// of `z^p (z-1)^q` expanded by Leibniz.
pub fn bracket_forms(voa: &TruncatedVoa, x: &P1Current, y: &P1Current) -> Result<P1Current> {
    let mut out = P1Current::default();
    for (p1, q1, va) in x.iter() {
        for (p2, q2, vb) in y.iter() {
            for (a, ca) in va.iter() {
                for (b, cb) in vb.iter() {
                    let top = (voa.weight(a) + voa.weight(b)) as i64 - 1;
                    for m in 0..=top {
                        let Some(ab) = voa.product(a, m, b)? else {
                            continue;
                        };
                        for i in 0..=m {
                            let c = binomial(p1, i) * binomial(q1, m - i);
                            if c.is_zero() {
                                continue;
                            }
                            let coeff = &(&c * ca) * cb;
                            out.add_scaled(&coeff, p1 - i + p2, q1 - (m - i) + q2, ab);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `∇(v ⊗ f) = L_{-1}v ⊗ f + v ⊗ f'` for `f = z^p (z-1)^q`.
pub fn exact_form(voa: &TruncatedVoa, v: &GradedVector, p: i64, q: i64) -> Result<P1Current> {
    let mut out = P1Current::default();
    out.add_scaled(&Scalar::ONE, p, q, &voa.virasoro(-1, v)?);
    out.add_scaled(&Scalar::integer(p), p - 1, q, v);
    out.add_scaled(&Scalar::integer(q), p, q - 1, v);
    Ok(out)
}

/// Expansion of a form at a pole as a sum of graded currents, keeping the
/// terms of index at most `max_index` (the rest act by zero on vectors of
/// level at most `max_index`). Not reduced modulo translation.
pub fn expand_at_raw(alg: &CurrentAlgebra, x: &P1Current, point: Point, max_index: i64) -> CurrentElement {
    let voa = alg.voa();
    let mut out = CurrentElement::new();
    for (p, q, v) in x.iter() {
        for (b, c) in v.iter() {
            let k = voa.weight(b) as i64;
            match point {
                Point::Zero => {
                    let mut i = 0;
                    while p + i - k < max_index && !(q >= 0 && i > q) {
                        let coeff = Scalar::sign(q - i) * binomial(q, i) * c;
                        out.add_term(p + i - k + 1, b, &coeff);
                        i += 1;
                    }
                }
                Point::One => {
                    let mut i = 0;
                    while q + i - k < max_index && !(p >= 0 && i > p) {
                        out.add_term(q + i - k + 1, b, &(binomial(p, i) * c));
                        i += 1;
                    }
                }
                Point::Infinity => {
                    let mut i = 0;
                    while i + k - 1 - p - q <= max_index && !(q >= 0 && i > q) {
                        let coeff = -(Scalar::sign(i) * binomial(q, i) * c);
                        let flipped = alg.anti_involution_raw(&CurrentElement::basis(p + q - i - k + 1, b));
                        out.add_scaled(&coeff, &flipped);
                        i += 1;
                    }
                }
            }
        }
    }
    out
}

/// [`expand_at_raw`] followed by reduction to normal form.
pub fn expand_at(alg: &CurrentAlgebra, x: &P1Current, point: Point, max_index: i64) -> Result<CurrentElement> {
    alg.reduce(&expand_at_raw(alg, x, point, max_index))
}

/// Element of `M1 ⊗ M2 ⊗ M3`, keyed by global basis indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TriVector {
    terms: BTreeMap<(usize, usize, usize), Scalar>,
}

impl TriVector {
    pub fn basis(u1: usize, u2: usize, u3: usize) -> Self {
        let mut t = TriVector::default();
        t.add_term((u1, u2, u3), &Scalar::ONE);
        t
    }

    pub fn add_term(&mut self, key: (usize, usize, usize), c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key).or_insert(Scalar::ZERO);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), &Scalar)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }
}

/// The three modules of a block computation.
#[derive(Clone, Debug)]
pub struct Triple {
    pub modules: [Arc<LogModule>; 3],
}

impl Triple {
    pub fn new(m1: Arc<LogModule>, m2: Arc<LogModule>, m3: Arc<LogModule>) -> Result<Self> {
        let same = |a: &LogModule, b: &LogModule| {
            Arc::ptr_eq(a.voa(), b.voa()) || a.voa().basis() == b.voa().basis()
        };
        if !same(&m1, &m2) || !same(&m1, &m3) {
            return Err(Error::VoaMismatch);
        }
        Ok(Triple { modules: [m1, m2, m3] })
    }

    pub fn voa(&self) -> &Arc<TruncatedVoa> {
        self.modules[0].voa()
    }

    /// Sum of the three depths, the largest possible logarithmic degree.
    pub fn depth(&self) -> usize {
        self.modules.iter().map(|m| m.depth()).sum()
    }
}

/// `j_0` on slot 1, `j_1` on slot 2 and `j_∞` on slot 3, summed.
pub fn relation_vector(alg: &CurrentAlgebra, triple: &Triple, form: &P1Current, t: &TriVector) -> Result<TriVector> {
    let [m1, m2, m3] = &triple.modules;
    let mut out = TriVector::default();
    for ((u1, u2, u3), c) in t.iter() {
        let e0 = expand_at_raw(alg, form, Point::Zero, m1.level(u1) as i64);
        for (v, cv) in m1.act_current(&e0, &ModuleVector::unit(u1))?.iter() {
            out.add_term((v, u2, u3), &(c * cv));
        }
        let e1 = expand_at_raw(alg, form, Point::One, m2.level(u2) as i64);
        for (v, cv) in m2.act_current(&e1, &ModuleVector::unit(u2))?.iter() {
            out.add_term((u1, v, u3), &(c * cv));
        }
        let ei = expand_at_raw(alg, form, Point::Infinity, m3.level(u3) as i64);
        for (v, cv) in m3.act_current(&ei, &ModuleVector::unit(u3))?.iter() {
            out.add_term((u1, u2, v), &(c * cv));
        }
    }
    Ok(out)
}

/// Largest level increase a form `(k, p, q)` can cause in any slot.
pub fn level_reach(k: i64, p: i64, q: i64) -> i64 {
    (k - 1 - p).max(k - 1 - q).max(p + q - k + 1)
}

/// Forms `(a, p, q)` used at window level `level`: every basis vector `a` and
/// `|p|, |q| <= level + |a| + 1`, restricted to those that admit at least one
/// generator.
pub fn form_window(voa: &TruncatedVoa, level: usize) -> Vec<(usize, i64, i64)> {
    let mut out = Vec::new();
    for a in 0..voa.dim() {
        let k = voa.weight(a) as i64;
        let r = level as i64 + k + 1;
        for p in -r..=r {
            for q in -r..=r {
                if level_reach(k, p, q) <= level as i64 {
                    out.push((a, p, q));
                }
            }
        }
    }
    out
}

/// Tri-graded basis of `M1 ⊗ M2 ⊗ M3` restricted to total level `<= level`,
/// ordered by total level so that each level bound is a prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TriWindow {
    level: usize,
    starts: [Vec<usize>; 3],
    dims: [Vec<usize>; 3],
    blocks: Vec<((usize, usize, usize), usize)>,
    block_of: BTreeMap<(usize, usize, usize), usize>,
    prefix: Vec<usize>,
    dim: usize,
}

impl TriWindow {
    pub fn new(triple: &Triple, level: usize) -> Result<Self> {
        for m in &triple.modules {
            if level > m.l_mod() {
                return Err(truncated("window", level as i64, m.l_mod()));
            }
        }
        let starts = triple.modules.each_ref().map(|m| (0..=level).map(|n| m.level_range(n).start).collect());
        let dims: [Vec<usize>; 3] = triple.modules.each_ref().map(|m| (0..=level).map(|n| m.level_dim(n)).collect());
        let mut blocks = Vec::new();
        let mut block_of = BTreeMap::new();
        let mut prefix = Vec::new();
        let mut dim = 0;
        for total in 0..=level {
            for l1 in 0..=total {
                for l2 in 0..=total - l1 {
                    let l3 = total - l1 - l2;
                    block_of.insert((l1, l2, l3), blocks.len());
                    blocks.push(((l1, l2, l3), dim));
                    dim += dims[0][l1] * dims[1][l2] * dims[2][l3];
                }
            }
            prefix.push(dim);
        }
        Ok(TriWindow {
            level,
            starts,
            dims,
            blocks,
            block_of,
            prefix,
            dim,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of columns of total level at most `total`.
    pub fn prefix_len(&self, total: i64) -> usize {
        if total < 0 {
            0
        } else {
            self.prefix[(total as usize).min(self.level)]
        }
    }

    fn locate(&self, slot: usize, u: usize) -> (usize, usize) {
        let s = &self.starts[slot];
        let level = s.partition_point(|x| *x <= u) - 1;
        (level, u - s[level])
    }

    /// Column of a basis triple, or `None` outside the window.
    pub fn index(&self, u1: usize, u2: usize, u3: usize) -> Option<usize> {
        let (l1, j1) = self.locate_checked(0, u1)?;
        let (l2, j2) = self.locate_checked(1, u2)?;
        let (l3, j3) = self.locate_checked(2, u3)?;
        let b = *self.block_of.get(&(l1, l2, l3))?;
        let start = self.blocks[b].1;
        Some(start + (j1 * self.dims[1][l2] + j2) * self.dims[2][l3] + j3)
    }

    fn locate_checked(&self, slot: usize, u: usize) -> Option<(usize, usize)> {
        let s = &self.starts[slot];
        if u < s[0] {
            return None;
        }
        let (level, j) = self.locate(slot, u);
        (j < self.dims[slot][level]).then_some((level, j))
    }

    /// Basis triple and its levels at a column.
    pub fn triple(&self, col: usize) -> ((usize, usize, usize), (usize, usize, usize)) {
        let b = self.blocks.partition_point(|(_, s)| *s <= col) - 1;
        let ((l1, l2, l3), start) = self.blocks[b];
        let local = col - start;
        let (d2, d3) = (self.dims[1][l2], self.dims[2][l3]);
        let (j1, rest) = (local / (d2 * d3), local % (d2 * d3));
        let (j2, j3) = (rest / d3, rest % d3);
        (
            (self.starts[0][l1] + j1, self.starts[1][l2] + j2, self.starts[2][l3] + j3),
            (l1, l2, l3),
        )
    }
}

/// Linear functional on a window, given by its values on basis triples.
#[derive(Clone, Debug)]
pub struct BlockFunctional {
    pub triple: Triple,
    pub window: Arc<TriWindow>,
    pub values: Vec<Scalar>,
}

impl BlockFunctional {
    pub fn zero(triple: Triple, window: Arc<TriWindow>) -> Self {
        let values = vec![Scalar::ZERO; window.dim()];
        BlockFunctional { triple, window, values }
    }

    pub fn value(&self, u1: usize, u2: usize, u3: usize) -> Result<&Scalar> {
        match self.window.index(u1, u2, u3) {
            Some(c) => Ok(&self.values[c]),
            None => Err(truncated("functional argument", self.window.level() as i64 + 1, self.window.level())),
        }
    }

    pub fn evaluate(&self, t: &TriVector) -> Result<Scalar> {
        let mut s = Scalar::ZERO;
        for ((u1, u2, u3), c) in t.iter() {
            s += c * self.value(u1, u2, u3)?;
        }
        Ok(s)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Scalar::is_zero)
    }

    /// `a * self + b * other` on a common window.
    pub fn combine(&self, a: &Scalar, other: &BlockFunctional, b: &Scalar) -> BlockFunctional {
        assert_eq!(self.window, other.window);
        let values = self.values.iter().zip(&other.values).map(|(x, y)| &(a * x) + &(b * y)).collect();
        BlockFunctional {
            triple: self.triple.clone(),
            window: self.window.clone(),
            values,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockOptions {
    /// Largest admissible window dimension.
    pub budget: usize,
}

impl Default for BlockOptions {
    fn default() -> Self {
        BlockOptions { budget: 20_000 }
    }
}

/// Conformal blocks on one window: the relation span and its annihilator.
#[derive(Clone, Debug)]
pub struct BlockSpace {
    pub triple: Triple,
    pub window: Arc<TriWindow>,
    pub forms: usize,
    pub relations: usize,
    pub rank: usize,
    pub basis: Vec<BlockFunctional>,
}

impl BlockSpace {
    pub fn compute(triple: &Triple, level: usize, opts: BlockOptions) -> Result<Self> {
        let window = Arc::new(TriWindow::new(triple, level)?);
        if window.dim() > opts.budget {
            return Err(Error::BudgetExceeded {
                needed: window.dim(),
                budget: opts.budget,
            });
        }
        let alg = CurrentAlgebra::new(triple.voa().clone())?;
        let voa = triple.voa();
        let [m1, m2, m3] = &triple.modules;
        let mut red = RowReducer::new(window.dim());
        let forms = form_window(voa, level);
        let mut relations = 0;
        for &(a, p, q) in &forms {
            if red.is_full() {
                break;
            }
            let k = voa.weight(a) as i64;
            let generators = window.prefix_len(level as i64 - level_reach(k, p, q));
            if generators == 0 {
                continue;
            }
            let form = P1Current::from(&P1Form::basis(a, p, q));
            let lv = level as i64;
            let e0 = expand_at_raw(&alg, &form, Point::Zero, lv);
            let e1 = expand_at_raw(&alg, &form, Point::One, lv);
            let ei = expand_at_raw(&alg, &form, Point::Infinity, lv);
            let [mut c1, mut c2, mut c3]: [BTreeMap<usize, ModuleVector>; 3] = Default::default();
            for col in 0..generators {
                let ((u1, u2, u3), _) = window.triple(col);
                let s1 = slot_image(&mut c1, m1, &e0, u1)?;
                let s2 = slot_image(&mut c2, m2, &e1, u2)?;
                let s3 = slot_image(&mut c3, m3, &ei, u3)?;
                let mut row: Vec<(usize, Scalar)> = Vec::with_capacity(s1.len() + s2.len() + s3.len());
                let at = |x, y, z| window.index(x, y, z).ok_or_else(|| truncated("relation", lv + 1, level));
                for (v, c) in s1.iter() {
                    row.push((at(v, u2, u3)?, c.clone()));
                }
                for (v, c) in s2.iter() {
                    row.push((at(u1, v, u3)?, c.clone()));
                }
                for (v, c) in s3.iter() {
                    row.push((at(u1, u2, v)?, c.clone()));
                }
                if row.is_empty() {
                    continue;
                }
                relations += 1;
                red.insert(row);
            }
        }
        let basis = red
            .kernel_basis()
            .into_iter()
            .map(|values| BlockFunctional {
                triple: triple.clone(),
                window: window.clone(),
                values,
            })
            .collect();
        Ok(BlockSpace {
            triple: triple.clone(),
            window,
            forms: forms.len(),
            relations,
            rank: red.rank(),
            basis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

fn slot_image<'c>(
    cache: &'c mut BTreeMap<usize, ModuleVector>,
    m: &LogModule,
    e: &CurrentElement,
    u: usize,
) -> Result<&'c ModuleVector> {
    Ok(match cache.entry(u) {
        alloc::collections::btree_map::Entry::Occupied(o) => o.into_mut(),
        alloc::collections::btree_map::Entry::Vacant(v) => v.insert(m.act_current(e, &ModuleVector::unit(u))?),
    })
}

/// Statistics for one window level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSummary {
    pub level: usize,
    pub window_dim: usize,
    pub forms: usize,
    pub relations: usize,
    pub rank: usize,
    pub estimate: usize,
}

/// Dimension estimate at a level, with a stabilization flag comparing to
/// the level below. Stabilization is a heuristic, not a certificate.
#[derive(Clone, Debug)]
pub struct BlockDimension {
    pub estimate: usize,
    pub stabilized: bool,
    pub levels: Vec<LevelSummary>,
    pub space: BlockSpace,
}

pub fn blocks_dimension(triple: &Triple, level: usize) -> Result<BlockDimension> {
    blocks_dimension_with(triple, level, BlockOptions::default())
}

pub fn blocks_dimension_with(triple: &Triple, level: usize, opts: BlockOptions) -> Result<BlockDimension> {
    let mut levels = Vec::new();
    let mut last = None;
    for l in level.saturating_sub(1)..=level {
        let space = BlockSpace::compute(triple, l, opts)?;
        levels.push(LevelSummary {
            level: l,
            window_dim: space.window.dim(),
            forms: space.forms,
            relations: space.relations,
            rank: space.rank,
            estimate: space.dimension(),
        });
        last = Some(space);
    }
    let space = last.ok_or_else(|| Error::Invalid("empty level range".into()))?;
    let estimate = space.dimension();
    let stabilized = levels.len() == 2 && levels[0].estimate == estimate;
    Ok(BlockDimension {
        estimate,
        stabilized,
        levels,
        space,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup(l: usize) -> (Arc<TruncatedVoa>, CurrentAlgebra) {
        let voa = crate::fixtures::heisenberg(l).voa().clone();
        let alg = CurrentAlgebra::new(voa.clone()).unwrap();
        (voa, alg)
    }

    use crate::fixtures::fock_triple;

    fn homomorphism_residual(
        alg: &CurrentAlgebra,
        x: &P1Current,
        y: &P1Current,
        point: Point,
        n: i64,
    ) -> CurrentElement {
        let lo = |f: &P1Current| expand_at_raw(alg, f, point, n).min_index().unwrap_or(n);
        let (lx, ly) = (lo(x), lo(y));
        let ex = expand_at_raw(alg, x, point, n - ly);
        let ey = expand_at_raw(alg, y, point, n - lx);
        let lhs = alg.bracket(&ex, &ey).unwrap().truncate_above(n);
        let xy = bracket_forms(alg.voa(), x, y).unwrap();
        let rhs = expand_at(alg, &xy, point, n).unwrap();
        let mut r = lhs;
        r.add_scaled(&-Scalar::ONE, &rhs);
        r
    }

    #[test]
    fn vacuum_form_residues_sum_to_zero() {
        let (voa, alg) = setup(4);
        let vac = voa.vacuum();
        for (p, q) in [(2, -3), (-1, -1), (-3, 0), (0, -1), (1, 1)] {
            let f = P1Current::from(&P1Form::basis(vac, p, q));
            let mut total = Scalar::ZERO;
            for pt in POINTS {
                let e = expand_at(&alg, &f, pt, 6).unwrap();
                for (n, a, c) in e.iter() {
                    assert_eq!((n, a), (0, vac));
                    total += c;
                }
            }
            assert!(total.is_zero(), "{p} {q}");
        }
    }

    #[test]
    fn simple_expansions() {
        let (voa, alg) = setup(4);
        let a = voa.index_of("a-1").unwrap();
        // a ⊗ z^{-1}: a single current at 0, a tail at 1.
        let f = P1Current::from(&P1Form::basis(a, -1, 0));
        assert_eq!(expand_at(&alg, &f, Point::Zero, 5).unwrap(), CurrentElement::basis(-1, a));
        let at_one = expand_at(&alg, &f, Point::One, 2).unwrap();
        let mut expect = CurrentElement::new();
        for (i, n) in (0..=2).enumerate() {
            expect.add_term(n, a, &Scalar::sign(i as i64));
        }
        assert_eq!(at_one, expect);
        let at_inf = expand_at(&alg, &f, Point::Infinity, 5).unwrap();
        assert_eq!(at_inf, CurrentElement::basis(1, a));
    }

    #[test]
    fn single_term_expansions() {
        let (voa, alg) = setup(5);
        for a in 0..voa.dim() {
            let k = voa.weight(a) as i64;
            if k == 0 {
                continue;
            }
            for p in -3..=3 {
                let f = P1Current::from(&P1Form::basis(a, p, 0));
                let raw = expand_at_raw(&alg, &f, Point::Zero, 10);
                assert_eq!(raw, CurrentElement::basis(p - k + 1, a));
                let g = P1Current::from(&P1Form::basis(a, 0, p));
                assert_eq!(expand_at_raw(&alg, &g, Point::One, 10), CurrentElement::basis(p - k + 1, a));
            }
        }
        let w = voa.index_of("a-1.a-1").unwrap();
        let f = P1Current::from(&P1Form::new(&voa, voa.omega().clone(), 0, 0).unwrap());
        let at_inf = expand_at(&alg, &f, Point::Infinity, 5).unwrap();
        let expect = alg.reduce(&CurrentElement::graded(1, voa.omega()).scaled(&-Scalar::ONE)).unwrap();
        assert_eq!(at_inf, expect);
        assert_eq!(at_inf.iter().map(|(n, a, _)| (n, a)).collect::<Vec<_>>(), [(1, w)]);
    }

    #[test]
    fn relation_vector_examples() {
        let (voa, alg) = setup(5);
        let tr = fock_triple(5, 3, [1, 2, -3]);
        let a = voa.index_of("a-1").unwrap();
        let form = P1Current::from(&P1Form::basis(a, -3, 2));
        assert!(relation_vector(&alg, &tr, &form, &TriVector::default()).unwrap().is_zero());
        // Poles of high order at 0 only: the other two slots see modes that
        // kill lowest-weight vectors.
        let rel = relation_vector(&alg, &tr, &form, &TriVector::basis(0, 0, 0)).unwrap();
        let e0 = expand_at_raw(&alg, &form, Point::Zero, 0);
        let slot1 = tr.modules[0].act_current(&e0, &ModuleVector::unit(0)).unwrap();
        let mut expect = TriVector::default();
        for (v, c) in slot1.iter() {
            expect.add_term((v, 0, 0), c);
        }
        assert_eq!(rel, expect);
        assert!(!rel.is_zero());
        // The vacuum with p = q = 0 has no pole anywhere.
        let vac = P1Current::from(&P1Form::basis(voa.vacuum(), 0, 0));
        assert!(relation_vector(&alg, &tr, &vac, &TriVector::basis(0, 0, 0)).unwrap().is_zero());
    }

    #[test]
    fn estimate_is_monotone_in_the_window() {
        let tr = crate::fixtures::log_triple(5, 3);
        let dims: Vec<_> = (0..=3)
            .map(|l| BlockSpace::compute(&tr, l, BlockOptions::default()).unwrap().dimension())
            .collect();
        assert!(dims.windows(2).all(|w| w[0] >= w[1]), "{dims:?}");
    }

    #[test]
    fn exact_forms_expand_to_zero() {
        let (voa, alg) = setup(5);
        for a in 0..voa.dim() {
            if voa.weight(a) > 3 {
                continue;
            }
            for (p, q) in [(0, 0), (-2, 1), (1, -2), (-1, -1), (2, 3)] {
                let f = exact_form(&voa, &GradedVector::unit(a), p, q).unwrap();
                for pt in POINTS {
                    let e = expand_at(&alg, &f, pt, 4).unwrap();
                    assert!(e.is_zero(), "{} {p} {q} {pt:?}: {}", voa.name(a), e.render(&voa));
                }
            }
        }
    }

    #[test]
    fn brackets_of_forms_match_brackets_of_currents() {
        let (voa, alg) = setup(6);
        let a = voa.index_of("a-1").unwrap();
        let w = voa.index_of("a-1.a-1").unwrap();
        for (x, y) in [((a, -1, 0), (a, 0, -1)), ((w, 1, -2), (a, -2, 1)), ((w, 0, 0), (w, -1, -1))] {
            let fx = P1Current::from(&P1Form::basis(x.0, x.1, x.2));
            let fy = P1Current::from(&P1Form::basis(y.0, y.1, y.2));
            for pt in POINTS {
                assert!(homomorphism_residual(&alg, &fx, &fy, pt, 3).is_zero());
            }
        }
    }

    #[test]
    fn window_indexing_round_trips() {
        let tr = fock_triple(4, 3, [0, 1, -1]);
        let w = TriWindow::new(&tr, 3).unwrap();
        assert_eq!(w.prefix_len(3), w.dim());
        for col in 0..w.dim() {
            let ((u1, u2, u3), (l1, l2, l3)) = w.triple(col);
            let m = &tr.modules;
            assert_eq!((m[0].level(u1), m[1].level(u2), m[2].level(u3)), (l1, l2, l3));
            assert_eq!(w.index(u1, u2, u3), Some(col));
        }
        let top = tr.modules[0].level_range(3).start;
        let deep = tr.modules[1].level_range(1).start;
        assert_eq!(w.index(top, deep, 0), None);
    }

    #[test]
    fn window_beyond_module_cutoff_is_an_error() {
        let tr = fock_triple(4, 2, [0, 0, 0]);
        assert!(matches!(TriWindow::new(&tr, 3), Err(Error::Truncated { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let tr = fock_triple(4, 3, [0, 0, 0]);
        let r = BlockSpace::compute(&tr, 3, BlockOptions { budget: 10 });
        assert_eq!(r.unwrap_err(), Error::BudgetExceeded { needed: 35, budget: 10 });
    }

    #[test]
    fn heisenberg_fusion_small_window() {
        for (c, expect) in [([1, 1, -2], 1), ([0, 0, 0], 1), ([1, 0, 0], 0), ([2, -1, 0], 0)] {
            let d = blocks_dimension(&fock_triple(5, 3, c), 3).unwrap();
            assert_eq!(d.estimate, expect, "{c:?}");
            assert!(d.stabilized);
        }
    }

    #[test]
    fn blocks_annihilate_relations() {
        let (voa, alg) = setup(5);
        let tr = fock_triple(5, 3, [1, -1, 0]);
        let space = BlockSpace::compute(&tr, 3, BlockOptions::default()).unwrap();
        assert_eq!(space.dimension(), 1);
        let x = &space.basis[0];
        let w = voa.index_of("a-1.a-1").unwrap();
        let form = P1Current::from(&P1Form::basis(w, -1, -1));
        for col in 0..space.window.prefix_len(3 - level_reach(2, -1, -1)) {
            let (t, _) = space.window.triple(col);
            let rel = relation_vector(&alg, &tr, &form, &TriVector::basis(t.0, t.1, t.2)).unwrap();
            assert!(x.evaluate(&rel).unwrap().is_zero());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn expansion_is_a_homomorphism(
            a in 0usize..7, b in 0usize..7,
            p1 in -3i64..3, q1 in -3i64..3, p2 in -3i64..3, q2 in -3i64..3,
            pt in 0usize..3,
        ) {
            let (_, alg) = setup(6);
            let fx = P1Current::from(&P1Form::basis(a, p1, q1));
            let fy = P1Current::from(&P1Form::basis(b, p2, q2));
            prop_assert!(homomorphism_residual(&alg, &fx, &fy, POINTS[pt], 2).is_zero());
        }

        #[test]
        fn reduction_does_not_change_the_action(a in 0usize..7, p in -3i64..3, q in -3i64..3, u in 0usize..7, pt in 0usize..3) {
            let (_, alg) = setup(6);
            let m = crate::fixtures::heisenberg(6).fock_module(&Scalar::new(1, 2), 4).unwrap();
            let f = P1Current::from(&P1Form::basis(a, p, q));
            let lv = m.level(u) as i64;
            let raw = expand_at_raw(&alg, &f, POINTS[pt], lv);
            let red = expand_at(&alg, &f, POINTS[pt], lv).unwrap();
            let v = ModuleVector::unit(u);
            match (m.act_current(&raw, &v), m.act_current(&red, &v)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(Error::Truncated { .. }), _) | (_, Err(Error::Truncated { .. })) => {}
                (x, y) => prop_assert!(false, "{:?} {:?}", x, y),
            }
        }
    }
}
