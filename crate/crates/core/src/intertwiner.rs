//! Logarithmic intertwining operators of type `(M2 M1 → D(M3))` stored as
//! coefficient tables on a tri-graded window, their axiom checkers, the
//! linear axiom system whose solutions are all such tables, and the
//! nilpotent operator calculus on log-degree tokens.
//!
//! A table entry `(n, s, u1, u2, u3)` holds `<(u2)^n_(α) u1, u3>` with
//! `α = h1 + h2 - h3 + s`. Weight bookkeeping forces
//! `s = ℓ1 + ℓ2 - 1 - ℓ3`, so a well-formed table has one exponent per
//! basis triple; entries violating this are kept so the checkers can report
//! them.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::blocks::{form_window, level_reach, TriWindow, Triple};
use crate::error::{truncated, Error, Result};
use crate::linear::{binomial, factorial, RowReducer, Scalar, SparseVec};
use crate::module::{dual_module, LogModule, ModuleVector};

/// Shared context for operators on one triple and window: the modules, the
/// dual target `D(M3)` and the window.
#[derive(Clone, Debug)]
pub struct IntwFrame {
    pub triple: Triple,
    pub target: Arc<LogModule>,
    pub window: Arc<TriWindow>,
}

impl IntwFrame {
    pub fn new(triple: &Triple, level: usize) -> Result<Arc<Self>> {
        let window = Arc::new(TriWindow::new(triple, level)?);
        let target = Arc::new(dual_module(&triple.modules[2])?);
        Ok(Arc::new(IntwFrame {
            triple: triple.clone(),
            target,
            window,
        }))
    }

    /// Same triple, smaller window; the dual target is reused.
    pub fn restricted(&self, level: usize) -> Result<Arc<Self>> {
        if level > self.window.level() {
            return Err(Error::WindowTooSmall {
                required: level,
                available: self.window.level(),
            });
        }
        Ok(Arc::new(IntwFrame {
            triple: self.triple.clone(),
            target: self.target.clone(),
            window: Arc::new(TriWindow::new(&self.triple, level)?),
        }))
    }

    pub fn level(&self) -> usize {
        self.window.level()
    }

    /// Log-degree bound `k1 + k2 + k3`.
    pub fn depth(&self) -> usize {
        self.triple.depth()
    }

    /// `h1 + h2 - h3`, the coset of every exponent.
    pub fn exponent_base(&self) -> Scalar {
        let [m1, m2, m3] = &self.triple.modules;
        &(m1.h() + m2.h()) - m3.h()
    }

    fn levels(&self, u1: usize, u2: usize, u3: usize) -> (i64, i64, i64) {
        let [m1, m2, m3] = &self.triple.modules;
        (m1.level(u1) as i64, m2.level(u2) as i64, m3.level(u3) as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntwKey {
    pub n: usize,
    pub shift: i64,
    pub u1: usize,
    pub u2: usize,
    pub u3: usize,
}

/// Coefficient table of a logarithmic intertwining operator.
#[derive(Clone, Debug)]
pub struct LogIntwOperator {
    frame: Arc<IntwFrame>,
    entries: BTreeMap<IntwKey, Scalar>,
}

impl PartialEq for LogIntwOperator {
    fn eq(&self, other: &Self) -> bool {
        self.frame.window == other.frame.window && self.entries == other.entries
    }
}

impl LogIntwOperator {
    pub fn zero(frame: Arc<IntwFrame>) -> Self {
        LogIntwOperator {
            frame,
            entries: BTreeMap::new(),
        }
    }

    pub fn frame(&self) -> &Arc<IntwFrame> {
        &self.frame
    }

    pub fn depth(&self) -> usize {
        self.frame.depth()
    }

    /// Exponent `α` of a shift.
    pub fn exponent(&self, shift: i64) -> Scalar {
        &self.frame.exponent_base() + &Scalar::integer(shift)
    }

    /// Stores an entry as given. Keys outside the window or above the
    /// log-degree bound are rejected; bookkeeping is not enforced here.
    pub fn insert(&mut self, key: IntwKey, value: Scalar) -> Result<()> {
        if key.n > self.depth() {
            return Err(Error::Invalid(alloc::format!(
                "log degree {} exceeds the bound {}",
                key.n,
                self.depth()
            )));
        }
        if self.frame.window.index(key.u1, key.u2, key.u3).is_none() {
            return Err(truncated("intertwiner entry", self.frame.level() as i64 + 1, self.frame.level()));
        }
        if value.is_zero() {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, value);
        }
        Ok(())
    }

    /// Stores `<(u2)^n_(α) u1, u3>` at the exponent fixed by bookkeeping.
    pub fn set(&mut self, n: usize, u1: usize, u2: usize, u3: usize, value: Scalar) -> Result<()> {
        let shift = bookkeeping_shift(&self.frame, u1, u2, u3);
        self.insert(IntwKey { n, shift, u1, u2, u3 }, value)
    }

    pub fn get(&self, key: &IntwKey) -> Scalar {
        self.entries.get(key).cloned().unwrap_or(Scalar::ZERO)
    }

    /// `<(u2)^n_(α) u1, u3>` at `α = |u1| + |u2| - |u3| - 1`; the only
    /// exponent that can pair nontrivially with `u3`.
    pub fn coefficient(&self, n: usize, u1: usize, u2: usize, u3: usize) -> Result<Scalar> {
        if self.frame.window.index(u1, u2, u3).is_none() {
            return Err(truncated("intertwiner lookup", self.frame.level() as i64 + 1, self.frame.level()));
        }
        let shift = bookkeeping_shift(&self.frame, u1, u2, u3);
        Ok(self.get(&IntwKey { n, shift, u1, u2, u3 }))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&IntwKey, &Scalar)> + '_ {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// `a * self + b * other` on a common frame.
    pub fn combine(&self, a: &Scalar, other: &LogIntwOperator, b: &Scalar) -> LogIntwOperator {
        let mut out = LogIntwOperator::zero(self.frame.clone());
        for (k, v) in &self.entries {
            add_entry(&mut out.entries, *k, &(a * v));
        }
        for (k, v) in &other.entries {
            add_entry(&mut out.entries, *k, &(b * v));
        }
        out
    }

    fn source(&self) -> impl Fn(usize, usize, usize, usize) -> Result<Scalar> + '_ {
        move |n, u1, u2, u3| self.coefficient(n, u1, u2, u3)
    }
}

fn add_entry(map: &mut BTreeMap<IntwKey, Scalar>, k: IntwKey, v: &Scalar) {
    let e = map.entry(k).or_insert(Scalar::ZERO);
    *e += v;
    if e.is_zero() {
        map.remove(&k);
    }
}

fn bookkeeping_shift(frame: &IntwFrame, u1: usize, u2: usize, u3: usize) -> i64 {
    let (l1, l2, l3) = frame.levels(u1, u2, u3);
    l1 + l2 - 1 - l3
}

/// Values an axiom residual can take: numbers for a concrete table, sparse
/// vectors over the unknowns when assembling the axiom system.
pub trait Linear: Clone {
    fn zero() -> Self;
    fn add_scaled(&mut self, c: &Scalar, x: &Self);
    fn is_zero(&self) -> bool;
}

impl Linear for Scalar {
    fn zero() -> Self {
        Scalar::ZERO
    }
    fn add_scaled(&mut self, c: &Scalar, x: &Self) {
        *self += c * x;
    }
    fn is_zero(&self) -> bool {
        Scalar::is_zero(self)
    }
}

impl Linear for SparseVec {
    fn zero() -> Self {
        SparseVec::new()
    }
    fn add_scaled(&mut self, c: &Scalar, x: &Self) {
        SparseVec::add_scaled(self, c, x);
    }
    fn is_zero(&self) -> bool {
        SparseVec::is_zero(self)
    }
}

/// `(n, u1, u2, u3) ↦ <(u2)^n u1, u3>` on basis triples.
pub type Source<'a, V> = dyn Fn(usize, usize, usize, usize) -> Result<V> + 'a;

fn lin<V: Linear>(src: &Source<V>, n: usize, v1: &ModuleVector, v2: &ModuleVector, v3: &ModuleVector) -> Result<V> {
    let mut acc = V::zero();
    for (u1, c1) in v1.iter() {
        for (u2, c2) in v2.iter() {
            for (u3, c3) in v3.iter() {
                acc.add_scaled(&(&(c1 * c2) * c3), &src(n, u1, u2, u3)?);
            }
        }
    }
    Ok(acc)
}

fn unit(u: usize) -> ModuleVector {
    ModuleVector::unit(u)
}

/// `Σ_{u3'} <φ, u3'> <a_(m) u3'^*, u3>` where `φ` ranges over the level
/// `l3'` components, i.e. `<a_(m) (u2)^n u1, u3>` through `D(M3)`.
#[allow(clippy::too_many_arguments)]
fn target_action<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    n: usize,
    a: usize,
    m: i64,
    u1: usize,
    u2: usize,
    u3: usize,
    source_level: i64,
) -> Result<V> {
    let mut acc = V::zero();
    if source_level < 0 {
        return Ok(acc);
    }
    let m3 = &frame.triple.modules[2];
    for w in m3.level_range(source_level as usize) {
        if let Some(img) = frame.target.act(a, m, w)? {
            if let Some(c) = img.coeff(u3) {
                acc.add_scaled(c, &src(n, u1, u2, w)?);
            }
        }
    }
    Ok(acc)
}

/// Borcherds identity for the operator, paired with `u3`:
/// `Σ C(p,i) (a_(q+i)u2)^n_(α+p-i) u1
///   - Σ (-1)^i C(q,i) (a_(p+q-i) (u2)^n_(α+i) u1 - (-1)^q (u2)^n_(α+q-i) a_(p+i) u1)`
/// at the exponent `α` for which the terms pair with `u3`.
#[allow(clippy::too_many_arguments)]
pub fn borcherds_residual<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    a: usize,
    p: i64,
    q: i64,
    n: usize,
    u1: usize,
    u2: usize,
    u3: usize,
) -> Result<V> {
    let [m1, m2, _] = &frame.triple.modules;
    let k = m1.voa().weight(a) as i64;
    let (l1, l2, l3) = frame.levels(u1, u2, u3);
    let mut acc = V::zero();
    let mut i = 0;
    while l2 + k - q - i > 0 && !(p >= 0 && i > p) {
        if let Some(w) = m2.act(a, q + i, u2)? {
            acc.add_scaled(&binomial(p, i), &lin(src, n, &unit(u1), w, &unit(u3))?);
        }
        i += 1;
    }
    let mut i = 0;
    while l3 - k + 1 + p + q - i >= 0 && !(q >= 0 && i > q) {
        let c = -(Scalar::sign(i) * binomial(q, i));
        let t = target_action(frame, src, n, a, p + q - i, u1, u2, u3, l3 - k + 1 + p + q - i)?;
        acc.add_scaled(&c, &t);
        i += 1;
    }
    let mut i = 0;
    while l1 + k - p - i > 0 && !(q >= 0 && i > q) {
        if let Some(v) = m1.act(a, p + i, u1)? {
            let c = Scalar::sign(q + i) * binomial(q, i);
            acc.add_scaled(&c, &lin(src, n, v, &unit(u2), &unit(u3))?);
        }
        i += 1;
    }
    Ok(acc)
}

/// Commutator formula `[a_(p), (u2)^n] = Σ C(p,i) (a_(i)u2)^n_(α+p-i)`,
/// evaluated directly; equals minus the Borcherds residual at `q = 0`.
#[allow(clippy::too_many_arguments)]
pub fn com_residual<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    a: usize,
    p: i64,
    n: usize,
    u1: usize,
    u2: usize,
    u3: usize,
) -> Result<V> {
    let [m1, m2, _] = &frame.triple.modules;
    let k = m1.voa().weight(a) as i64;
    let (_, _, l3) = frame.levels(u1, u2, u3);
    let mut acc = target_action(frame, src, n, a, p, u1, u2, u3, l3 - k + 1 + p)?;
    if let Some(v) = m1.act(a, p, u1)? {
        acc.add_scaled(&-Scalar::ONE, &lin(src, n, v, &unit(u2), &unit(u3))?);
    }
    let (_, l2, _) = frame.levels(u1, u2, u3);
    let mut i = 0;
    while l2 + k - i > 0 && !(p >= 0 && i > p) {
        if let Some(w) = m2.act(a, i, u2)? {
            acc.add_scaled(&-binomial(p, i), &lin(src, n, &unit(u1), w, &unit(u3))?);
        }
        i += 1;
    }
    Ok(acc)
}

/// Associativity formula
/// `(a_(q)u2)^n_(α) = Σ (-1)^i C(q,i) {a_(q-i) (u2)^n_(α+i) - (-1)^q (u2)^n_(α+q-i) a_(i)}`,
/// evaluated directly; equals the Borcherds residual at `p = 0`.
#[allow(clippy::too_many_arguments)]
pub fn ass_residual<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    a: usize,
    q: i64,
    n: usize,
    u1: usize,
    u2: usize,
    u3: usize,
) -> Result<V> {
    let [m1, m2, _] = &frame.triple.modules;
    let k = m1.voa().weight(a) as i64;
    let (l1, _, l3) = frame.levels(u1, u2, u3);
    let mut acc = match m2.act(a, q, u2)? {
        Some(w) => lin(src, n, &unit(u1), w, &unit(u3))?,
        None => V::zero(),
    };
    let mut i = 0;
    while l3 - k + 1 + q - i >= 0 && !(q >= 0 && i > q) {
        let c = Scalar::sign(i) * binomial(q, i);
        let t = target_action(frame, src, n, a, q - i, u1, u2, u3, l3 - k + 1 + q - i)?;
        acc.add_scaled(&-c, &t);
        i += 1;
    }
    let mut i = 0;
    while l1 + k - i > 0 && !(q >= 0 && i > q) {
        if let Some(v) = m1.act(a, i, u1)? {
            let c = Scalar::sign(q + i) * binomial(q, i);
            acc.add_scaled(&c, &lin(src, n, v, &unit(u2), &unit(u3))?);
        }
        i += 1;
    }
    Ok(acc)
}

/// Coefficient form of the `L_{-1}`-derivative property:
/// `(L_{-1}u2)^n_(β) + β (u2)^n_(β-1) - (n+1) (u2)^{n+1}_(β-1)`, with the last
/// term absent at `n = d`.
pub fn derivative_residual<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    n: usize,
    u1: usize,
    u2: usize,
    u3: usize,
) -> Result<V> {
    let [m1, m2, m3] = &frame.triple.modules;
    let omega = m1.voa().omega();
    let lw = m2.mode_apply(omega, 0, &unit(u2))?;
    let mut acc = lin(src, n, &unit(u1), &lw, &unit(u3))?;
    let beta = &(&m1.weight(u1) + &m2.weight(u2)) - &m3.weight(u3);
    acc.add_scaled(&beta, &src(n, u1, u2, u3)?);
    if n < frame.depth() {
        acc.add_scaled(&-Scalar::from(n + 1), &src(n + 1, u1, u2, u3)?);
    }
    Ok(acc)
}

/// `[L_{-1}, (u2)^n] - (L_{-1}u2)^n`, paired with `u3`.
pub fn derivation_residual<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    n: usize,
    u1: usize,
    u2: usize,
    u3: usize,
) -> Result<V> {
    let [m1, m2, m3] = &frame.triple.modules;
    let omega = m1.voa().omega();
    let mut acc = lin(src, n, &unit(u1), &unit(u2), &m3.mode_apply(omega, 2, &unit(u3))?)?;
    acc.add_scaled(&-Scalar::ONE, &lin(src, n, &m1.mode_apply(omega, 0, &unit(u1))?, &unit(u2), &unit(u3))?);
    acc.add_scaled(&-Scalar::ONE, &lin(src, n, &unit(u1), &m2.mode_apply(omega, 0, &unit(u2))?, &unit(u3))?);
    Ok(acc)
}

/// `(L_0u2)^n - [L_0, (u2)^n] - (α+1)(u2)^n + (n+1)(u2)^{n+1}`, the last term
/// absent at `n = d`.
pub fn fund_residual<V: Linear>(
    frame: &IntwFrame,
    src: &Source<V>,
    n: usize,
    u1: usize,
    u2: usize,
    u3: usize,
) -> Result<V> {
    let [m1, m2, m3] = &frame.triple.modules;
    let mut acc = lin(src, n, &unit(u1), &m2.l0(&unit(u2)), &unit(u3))?;
    acc.add_scaled(&-Scalar::ONE, &lin(src, n, &unit(u1), &unit(u2), &m3.l0(&unit(u3)))?);
    acc.add_scaled(&Scalar::ONE, &lin(src, n, &m1.l0(&unit(u1)), &unit(u2), &unit(u3))?);
    let alpha1 = &(&m1.weight(u1) + &m2.weight(u2)) - &m3.weight(u3);
    acc.add_scaled(&-alpha1, &src(n, u1, u2, u3)?);
    if n < frame.depth() {
        acc.add_scaled(&Scalar::from(n + 1), &src(n + 1, u1, u2, u3)?);
    }
    Ok(acc)
}

/// One instance of an axiom with a nonzero residual.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub n: usize,
    pub u1: usize,
    pub u2: usize,
    pub u3: usize,
    /// Vertex-algebra element and mode pair for Borcherds instances.
    pub form: Option<(usize, i64, i64)>,
    pub residual: Scalar,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ResidualReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
}

impl ResidualReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn record(&mut self, r: Scalar, n: usize, (u1, u2, u3): (usize, usize, usize), form: Option<(usize, i64, i64)>) {
        self.checked += 1;
        if !r.is_zero() {
            self.failures.push(Failure {
                n,
                u1,
                u2,
                u3,
                form,
                residual: r,
            });
        }
    }
}

/// Entries flagged by a structural check.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EntryReport {
    pub checked: usize,
    pub violations: Vec<IntwKey>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Entries at exponents above the truncation bound `α <= |u1| + |u2| - h3 - 1`.
pub fn check_truncation(op: &LogIntwOperator) -> EntryReport {
    let mut r = EntryReport::default();
    for (k, _) in op.entries() {
        r.checked += 1;
        let (l1, l2, _) = op.frame.levels(k.u1, k.u2, k.u3);
        if k.shift > l1 + l2 - 1 {
            r.violations.push(*k);
        }
    }
    r
}

/// Entries whose target level disagrees with `|u1| + |u2| - 1 - α`.
pub fn check_weights(op: &LogIntwOperator) -> EntryReport {
    let mut r = EntryReport::default();
    for (k, _) in op.entries() {
        r.checked += 1;
        if k.shift != bookkeeping_shift(&op.frame, k.u1, k.u2, k.u3) {
            r.violations.push(*k);
        }
    }
    r
}

fn window_triples(frame: &IntwFrame, max_total: i64) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
    let w = &frame.window;
    (0..w.prefix_len(max_total)).map(move |c| w.triple(c).0)
}

/// Derivative residuals on every triple whose translate stays in the window.
pub fn check_derivative(op: &LogIntwOperator) -> Result<ResidualReport> {
    let frame = &*op.frame;
    let src = op.source();
    let mut r = ResidualReport::default();
    for t in window_triples(frame, frame.level() as i64 - 1) {
        for n in 0..=frame.depth() {
            r.record(derivative_residual(frame, &src, n, t.0, t.1, t.2)?, n, t, None);
        }
    }
    Ok(r)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FundReport {
    pub derivation: ResidualReport,
    pub fund: ResidualReport,
}

impl FundReport {
    pub fn passed(&self) -> bool {
        self.derivation.passed() && self.fund.passed()
    }
}

/// The derivation and `L_0` relations on every representable triple.
pub fn fund_relations_check(op: &LogIntwOperator) -> Result<FundReport> {
    let frame = &*op.frame;
    let src = op.source();
    let mut r = FundReport::default();
    for t in window_triples(frame, frame.level() as i64 - 1) {
        for n in 0..=frame.depth() {
            r.derivation.record(derivation_residual(frame, &src, n, t.0, t.1, t.2)?, n, t, None);
        }
    }
    for t in window_triples(frame, frame.level() as i64) {
        for n in 0..=frame.depth() {
            r.fund.record(fund_residual(frame, &src, n, t.0, t.1, t.2)?, n, t, None);
        }
    }
    Ok(r)
}

/// Residual of the Borcherds identity for `a`, `u1`, `u2`, modes `p`, `q`,
/// exponent `h1 + h2 - h3 + shift` and log degree `n`, as a vector in the
/// dual basis of `D(M3)`.
#[allow(clippy::too_many_arguments)]
pub fn check_borcherds_intw(
    op: &LogIntwOperator,
    a: usize,
    u1: usize,
    u2: usize,
    p: i64,
    q: i64,
    shift: i64,
    n: usize,
) -> Result<ModuleVector> {
    let frame = &*op.frame;
    let [m1, m2, m3] = &frame.triple.modules;
    let k = m1.voa().weight(a) as i64;
    let (l1, l2) = (m1.level(u1) as i64, m2.level(u2) as i64);
    let l3 = l1 + l2 + k - 2 - p - q - shift;
    let mut out = ModuleVector::new();
    if l3 < 0 {
        return Ok(out);
    }
    if l1 + l2 + l3 + level_reach(k, p, q) > frame.level() as i64 {
        return Err(truncated("Borcherds instance", l1 + l2 + l3 + level_reach(k, p, q), frame.level()));
    }
    let src = op.source();
    for u3 in m3.level_range(l3 as usize) {
        out.add_term(u3, &borcherds_residual(frame, &src, a, p, q, n, u1, u2, u3)?);
    }
    Ok(out)
}

/// Borcherds residuals for every `a`, every `|p|, |q| <= bound` and every
/// window triple on which the instance is representable.
pub fn borcherds_sweep(op: &LogIntwOperator, bound: i64) -> Result<ResidualReport> {
    let frame = &*op.frame;
    let voa = frame.triple.voa();
    let src = op.source();
    let mut r = ResidualReport::default();
    for a in 0..voa.dim() {
        let k = voa.weight(a) as i64;
        for p in -bound..=bound {
            for q in -bound..=bound {
                let room = frame.level() as i64 - level_reach(k, p, q);
                for t in window_triples(frame, room) {
                    for n in 0..=frame.depth() {
                        let res = borcherds_residual(frame, &src, a, p, q, n, t.0, t.1, t.2)?;
                        r.record(res, n, t, Some((a, p, q)));
                    }
                }
            }
        }
    }
    Ok(r)
}

/// Every axiom check on one operator.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub truncation: EntryReport,
    pub weights: EntryReport,
    pub derivative: ResidualReport,
    pub fund: FundReport,
    pub borcherds: ResidualReport,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.truncation.passed()
            && self.weights.passed()
            && self.derivative.passed()
            && self.fund.passed()
            && self.borcherds.passed()
    }
}

pub fn axiom_suite(op: &LogIntwOperator, borcherds_bound: i64) -> Result<AxiomReport> {
    Ok(AxiomReport {
        truncation: check_truncation(op),
        weights: check_weights(op),
        derivative: check_derivative(op)?,
        fund: fund_relations_check(op)?,
        borcherds: borcherds_sweep(op, borcherds_bound)?,
    })
}

/// Solution space of the linear axiom system on a window: unknowns are the
/// coefficients `<(u2)^n u1, u3>` for `n <= d` and window triples;
/// constraints are the Borcherds identity over the same forms and
/// generators as the block computation, the derivative property and the
/// `L_0` relation.
#[derive(Clone, Debug)]
pub struct AxiomSystem {
    pub frame: Arc<IntwFrame>,
    pub unknowns: usize,
    pub constraints: usize,
    pub rank: usize,
    pub basis: Vec<LogIntwOperator>,
}

impl AxiomSystem {
    pub fn solve(frame: Arc<IntwFrame>) -> Result<Self> {
        let f = &*frame;
        let w = f.window.dim();
        let d = f.depth();
        let unknowns = (d + 1) * w;
        let window = f.window.clone();
        let src = move |n: usize, u1: usize, u2: usize, u3: usize| -> Result<SparseVec> {
            match window.index(u1, u2, u3) {
                Some(c) => Ok(SparseVec::unit(n * w + c)),
                None => Err(truncated("axiom unknown", window.level() as i64 + 1, window.level())),
            }
        };
        let mut red = RowReducer::new(unknowns);
        let mut constraints = 0;
        let mut push = |v: SparseVec, red: &mut RowReducer| {
            if !v.is_zero() {
                constraints += 1;
                red.insert(v.to_pairs());
            }
        };
        let level = f.level() as i64;
        for t in window_triples(f, level) {
            for n in 0..=d {
                push(fund_residual(f, &src, n, t.0, t.1, t.2)?, &mut red);
            }
        }
        for t in window_triples(f, level - 1) {
            for n in 0..=d {
                push(derivative_residual(f, &src, n, t.0, t.1, t.2)?, &mut red);
            }
        }
        let voa = f.triple.voa();
        for (a, p, q) in form_window(voa, f.level()) {
            if red.is_full() {
                break;
            }
            let room = level - level_reach(voa.weight(a) as i64, p, q);
            for t in window_triples(f, room) {
                for n in 0..=d {
                    push(borcherds_residual(f, &src, a, p, q, n, t.0, t.1, t.2)?, &mut red);
                }
            }
        }
        let basis = red
            .kernel_basis()
            .into_iter()
            .map(|values| {
                let mut op = LogIntwOperator::zero(frame.clone());
                for (i, v) in values.into_iter().enumerate() {
                    if !v.is_zero() {
                        let (t, _) = frame.window.triple(i % w);
                        op.set(i / w, t.0, t.1, t.2, v).expect("window entry");
                    }
                }
                op
            })
            .collect();
        Ok(AxiomSystem {
            frame,
            unknowns,
            constraints,
            rank: red.rank(),
            basis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.unknowns - self.rank
    }
}

/// Polynomial in commuting nilpotent operators `x1`, `x2` applied to
/// log-degree tokens `(u)^ℓ`; keys are `(i1, i2, ℓ)` for `x1^i1 x2^i2 (u)^ℓ`.
/// Tokens above the log bound `d` vanish, as do powers of `x1`, `x2` above
/// their nilpotency bounds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilpotentSymbol {
    pub log_bound: usize,
    pub x_bounds: [usize; 2],
    terms: BTreeMap<(usize, usize, usize), Scalar>,
}

impl NilpotentSymbol {
    /// The zero symbol; `x_bounds` of `usize::MAX` means no nilpotency.
    pub fn zero(log_bound: usize, x_bounds: [usize; 2]) -> Self {
        NilpotentSymbol {
            log_bound,
            x_bounds,
            terms: BTreeMap::new(),
        }
    }

    /// `x1^i1 x2^i2 (u)^ℓ`.
    pub fn token(log_bound: usize, x_bounds: [usize; 2], i1: usize, i2: usize, l: usize) -> Self {
        let mut s = Self::zero(log_bound, x_bounds);
        s.add_term((i1, i2, l), &Scalar::ONE);
        s
    }

    pub fn add_term(&mut self, (i1, i2, l): (usize, usize, usize), c: &Scalar) {
        if l > self.log_bound || i1 > self.x_bounds[0] || i2 > self.x_bounds[1] || c.is_zero() {
            return;
        }
        let e = self.terms.entry((i1, i2, l)).or_insert(Scalar::ZERO);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(i1, i2, l));
        }
    }

    pub fn add_scaled(&mut self, c: &Scalar, other: &NilpotentSymbol) {
        for (k, v) in &other.terms {
            self.add_term(*k, &(c * v));
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize, usize), &Scalar)> + '_ {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn mul_first(&self) -> Self {
        self.map_terms(|(i1, i2, l), c, out| out.add_term((i1 + 1, i2, l), c))
    }

    pub fn mul_second(&self) -> Self {
        self.map_terms(|(i1, i2, l), c, out| out.add_term((i1, i2 + 1, l), c))
    }

    /// `(x1 + x2)`.
    pub fn mul_sum(&self) -> Self {
        let mut out = self.mul_first();
        out.add_scaled(&Scalar::ONE, &self.mul_second());
        out
    }

    /// `x3 (u)^ℓ = (x1 + x2)(u)^ℓ + (ℓ+1)(u)^{ℓ+1}`, commuting with `x1`, `x2`.
    pub fn apply_third(&self) -> Self {
        let mut out = self.mul_sum();
        for ((i1, i2, l), c) in self.iter() {
            out.add_term((i1, i2, l + 1), &(c * &Scalar::from(l + 1)));
        }
        out
    }

    fn map_terms(&self, f: impl Fn((usize, usize, usize), &Scalar, &mut Self)) -> Self {
        let mut out = Self::zero(self.log_bound, self.x_bounds);
        for (k, c) in self.iter() {
            f(k, c, &mut out);
        }
        out
    }
}

/// Compares `x3^p (u)^q` with
/// `Σ_{ℓ<=min(p, d-q)} C(p,ℓ) (q+ℓ)!/q! (x1+x2)^{p-ℓ} (u)^{q+ℓ}` in the free
/// nilpotent calculus. Inputs with `q > d` are reported as failures.
pub fn nilpotent_identity_verify(p: usize, q: usize, d: usize) -> bool {
    if q > d {
        return false;
    }
    let free = [usize::MAX; 2];
    let mut lhs = NilpotentSymbol::token(d, free, 0, 0, q);
    for _ in 0..p {
        lhs = lhs.apply_third();
    }
    let mut rhs = NilpotentSymbol::zero(d, free);
    for l in 0..=p.min(d - q) {
        let mut t = NilpotentSymbol::token(d, free, 0, 0, q + l);
        for _ in 0..p - l {
            t = t.mul_sum();
        }
        let c = binomial(p as i64, l as i64) * factorial((q + l) as u64) / factorial(q as u64);
        rhs.add_scaled(&c, &t);
    }
    lhs == rhs
}
