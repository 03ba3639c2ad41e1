//! The Lie algebra of currents `J(a, f)` modulo the translation relation
//! `J(L_{-1}a, f) = -J(a, f')`. Elements are sums of graded currents
//! `J_n(a) = J(a, ξ^{n+|a|-1})`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::error::Result;
use crate::linear::{binomial, factorial, RowReducer, Scalar};
use crate::voa::{GradedVector, TruncatedVoa};

/// Finite sum `Σ c J_n(a)` over basis vectors `a`, keyed by `(n, a)`.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct CurrentElement {
    terms: BTreeMap<(i64, usize), Scalar>,
}

impl CurrentElement {
    pub fn new() -> Self {
        CurrentElement::default()
    }

    /// The graded current `J_n(a)` of a basis vector.
    pub fn basis(n: i64, a: usize) -> Self {
        let mut x = CurrentElement::new();
        x.add_term(n, a, &Scalar::ONE);
        x
    }

    /// `J_n(v)` for an arbitrary vector `v`.
    pub fn graded(n: i64, v: &GradedVector) -> Self {
        let mut x = CurrentElement::new();
        for (a, c) in v.iter() {
            x.add_term(n, a, c);
        }
        x
    }

    pub fn add_term(&mut self, n: i64, a: usize, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((n, a)).or_insert(Scalar::ZERO);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(n, a));
        }
    }

    pub fn add_scaled(&mut self, c: &Scalar, other: &CurrentElement) {
        for ((n, a), v) in &other.terms {
            self.add_term(*n, *a, &(c * v));
        }
    }

    pub fn scaled(&self, c: &Scalar) -> Self {
        let mut out = CurrentElement::new();
        out.add_scaled(c, self);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms as `(n, a, coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, usize, &Scalar)> + '_ {
        self.terms.iter().map(|((n, a), c)| (*n, *a, c))
    }

    pub fn min_index(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.0).min()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.terms.keys().map(|k| k.0).max()
    }

    /// Drops every term with index above `max`.
    pub fn truncate_above(&self, max: i64) -> Self {
        CurrentElement {
            terms: self
                .terms
                .iter()
                .filter(|((n, _), _)| *n <= max)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Renders as `J(a, c·ξ^e + ...) + ...` with basis names from `voa`.
    pub fn render(&self, voa: &TruncatedVoa) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut by_basis: BTreeMap<usize, Vec<(i64, &Scalar)>> = BTreeMap::new();
        for ((n, a), c) in &self.terms {
            by_basis.entry(*a).or_default().push((n + voa.weight(*a) as i64 - 1, c));
        }
        let parts: Vec<String> = by_basis
            .iter()
            .map(|(a, fs)| {
                let f: Vec<String> = fs.iter().map(|(e, c)| format!("{c}·ξ^{e}")).collect();
                format!("J({}, {})", voa.name(*a), f.join(" + "))
            })
            .collect();
        parts.join(" + ")
    }
}

impl core::fmt::Debug for CurrentElement {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_map()
            .entries(self.terms.iter().map(|((n, a), c)| (format!("J_{n}(#{a})"), c)))
            .finish()
    }
}

/// Context for reduction, bracket and involution over one algebra. Normal
/// forms are cached per current index; the cache makes this type `!Sync`,
/// so concurrent workers each hold their own context.
#[derive(Debug)]
pub struct CurrentAlgebra {
    voa: Arc<TruncatedVoa>,
    /// Column position of each basis vector: weights in decreasing order, so
    /// that translation images are eliminated in favour of lower weights.
    column: Vec<usize>,
    basis_of_column: Vec<usize>,
    exp_l1: Vec<GradedVector>,
    reducers: RefCell<BTreeMap<i64, RowReducer>>,
}

impl CurrentAlgebra {
    pub fn new(voa: Arc<TruncatedVoa>) -> Result<Self> {
        let dim = voa.dim();
        let mut basis_of_column: Vec<usize> = (0..dim).collect();
        basis_of_column.sort_by_key(|b| (core::cmp::Reverse(voa.weight(*b)), *b));
        let mut column = alloc::vec![0; dim];
        for (c, b) in basis_of_column.iter().enumerate() {
            column[*b] = c;
        }
        let mut exp_l1 = Vec::with_capacity(dim);
        for a in 0..dim {
            let mut term = GradedVector::unit(a);
            let mut sum = term.clone();
            for j in 1..=voa.weight(a) as u64 {
                term = voa.virasoro(1, &term)?;
                sum.add_scaled(&factorial(j).inv(), &term);
            }
            exp_l1.push(sum);
        }
        Ok(CurrentAlgebra {
            voa,
            column,
            basis_of_column,
            exp_l1,
            reducers: RefCell::new(BTreeMap::new()),
        })
    }

    pub fn voa(&self) -> &Arc<TruncatedVoa> {
        &self.voa
    }

    /// `Σ_j L_1^j a / j!` for a basis vector `a`.
    pub fn exp_l1(&self, a: usize) -> &GradedVector {
        &self.exp_l1[a]
    }

    fn build_reducer(&self, n: i64) -> Result<RowReducer> {
        let voa = &*self.voa;
        let mut red = RowReducer::new(voa.dim());
        for v in 0..voa.dim() {
            let w = voa.weight(v);
            if w + 1 > voa.l_max() {
                continue;
            }
            let mut rel = voa.virasoro(-1, &GradedVector::unit(v))?;
            rel.add_term(v, &Scalar::integer(n + w as i64));
            red.insert(rel.iter().map(|(b, c)| (self.column[b], c.clone())));
        }
        Ok(red)
    }

    /// Canonical representative modulo the translation relations.
    pub fn reduce(&self, x: &CurrentElement) -> Result<CurrentElement> {
        let mut by_index: BTreeMap<i64, Vec<(usize, Scalar)>> = BTreeMap::new();
        for ((n, a), c) in &x.terms {
            by_index.entry(*n).or_default().push((self.column[*a], c.clone()));
        }
        let mut out = CurrentElement::new();
        for (n, row) in by_index {
            if !self.reducers.borrow().contains_key(&n) {
                let red = self.build_reducer(n)?;
                self.reducers.borrow_mut().insert(n, red);
            }
            let cache = self.reducers.borrow();
            for (col, c) in cache[&n].reduce(row) {
                out.add_term(n, self.basis_of_column[col], &c);
            }
        }
        Ok(out)
    }

    /// Bracket of two elements, unreduced:
    /// `[J_m(a), J_n(b)] = Σ_j C(m+|a|-1, j) J_{m+n}(a_(j)b)`.
    pub fn bracket_raw(&self, x: &CurrentElement, y: &CurrentElement) -> Result<CurrentElement> {
        let voa = &*self.voa;
        let mut out = CurrentElement::new();
        for ((m, a), ca) in &x.terms {
            for ((n, b), cb) in &y.terms {
                let top = (voa.weight(*a) + voa.weight(*b)) as i64 - 1;
                let cab = ca * cb;
                for j in 0..=top {
                    let coeff = binomial(m + voa.weight(*a) as i64 - 1, j);
                    if coeff.is_zero() {
                        continue;
                    }
                    if let Some(p) = voa.product(*a, j, *b)? {
                        out.add_scaled(&(&coeff * &cab), &CurrentElement::graded(m + n, p));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn bracket(&self, x: &CurrentElement, y: &CurrentElement) -> Result<CurrentElement> {
        self.reduce(&self.bracket_raw(x, y)?)
    }

    /// `θ(J_n(a)) = (-1)^{|a|} Σ_j J_{-n}(L_1^j a)/j!`, unreduced.
    pub fn anti_involution_raw(&self, x: &CurrentElement) -> CurrentElement {
        let mut out = CurrentElement::new();
        for ((n, a), c) in &x.terms {
            let s = Scalar::sign(self.voa.weight(*a) as i64) * c;
            out.add_scaled(&s, &CurrentElement::graded(-n, &self.exp_l1[*a]));
        }
        out
    }

    pub fn anti_involution(&self, x: &CurrentElement) -> Result<CurrentElement> {
        self.reduce(&self.anti_involution_raw(x))
    }
}
