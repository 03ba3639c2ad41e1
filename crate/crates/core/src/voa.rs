//! Vertex operator algebras truncated at a weight cutoff: a graded basis, a
//! complete table of mode products up to the cutoff, and axiom checkers.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{truncated, Error, Result};
use crate::linear::{binomial, Scalar, SparseVec};

/// Element of V, as coefficients over the global basis index.
pub type GradedVector = SparseVec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisVector {
    pub name: String,
    pub weight: usize,
}

/// Products `a_(n)b` for one ordered pair of basis vectors, for every `n` whose
/// target weight lies in `0..=l_max`.
#[derive(Clone, Debug)]
struct PairTable {
    n_min: i64,
    results: Vec<GradedVector>,
}

#[derive(Clone, Debug)]
pub struct TruncatedVoa {
    l_max: usize,
    basis: Vec<BasisVector>,
    offsets: Vec<usize>,
    names: BTreeMap<String, usize>,
    vacuum: usize,
    omega: GradedVector,
    central_charge: Scalar,
    table: Vec<PairTable>,
}

/// Accumulates structure constants before validation.
#[derive(Clone, Debug)]
pub struct VoaBuilder {
    l_max: usize,
    basis: Vec<BasisVector>,
    offsets: Vec<usize>,
    names: BTreeMap<String, usize>,
    table: Vec<PairTable>,
}

pub(crate) type GradedBasis = (Vec<BasisVector>, Vec<usize>, BTreeMap<String, usize>);

pub(crate) fn graded_basis(
    cutoff: usize,
    levels: Vec<Vec<String>>,
) -> Result<GradedBasis> {
    if levels.len() != cutoff + 1 {
        return Err(Error::Invalid(format!(
            "expected {} graded pieces, found {}",
            cutoff + 1,
            levels.len()
        )));
    }
    let mut basis = Vec::new();
    let mut offsets = Vec::with_capacity(cutoff + 2);
    let mut names = BTreeMap::new();
    for (w, level) in levels.into_iter().enumerate() {
        offsets.push(basis.len());
        for name in level {
            if names.insert(name.clone(), basis.len()).is_some() {
                return Err(Error::Invalid(format!("duplicate basis name {name}")));
            }
            basis.push(BasisVector { name, weight: w });
        }
    }
    offsets.push(basis.len());
    Ok((basis, offsets, names))
}

impl VoaBuilder {
    /// `weights[k]` lists the basis names of weight `k`, for `k = 0..=l_max`.
    pub fn new(l_max: usize, weights: Vec<Vec<String>>) -> Result<Self> {
        let (basis, offsets, names) = graded_basis(l_max, weights)?;
        let dim = basis.len();
        let mut table = Vec::with_capacity(dim * dim);
        for a in &basis {
            for b in &basis {
                let n_min = (a.weight + b.weight) as i64 - 1 - l_max as i64;
                table.push(PairTable {
                    n_min,
                    results: alloc::vec![GradedVector::new(); l_max + 1],
                });
            }
        }
        Ok(VoaBuilder {
            l_max,
            basis,
            offsets,
            names,
            table,
        })
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownBasis(name.into()))
    }

    pub fn weight(&self, i: usize) -> usize {
        self.basis[i].weight
    }

    /// Records `a_(n)b = result`. The result must be homogeneous of weight
    /// `|a| + |b| - 1 - n`, which must lie within the cutoff.
    pub fn set_product(&mut self, a: usize, n: i64, b: usize, result: GradedVector) -> Result<()> {
        let dim = self.basis.len();
        if a >= dim || b >= dim {
            return Err(Error::UnknownBasis(format!("index {}", a.max(b))));
        }
        let t = (self.basis[a].weight + self.basis[b].weight) as i64 - 1 - n;
        if t > self.l_max as i64 {
            return Err(truncated("product", t, self.l_max));
        }
        if t < 0 {
            if result.is_zero() {
                return Ok(());
            }
            return Err(Error::Invalid(format!(
                "{}_({n}){} has negative weight but a nonzero value",
                self.basis[a].name, self.basis[b].name
            )));
        }
        for (i, _) in result.iter() {
            if i >= dim {
                return Err(Error::UnknownBasis(format!("index {i}")));
            }
            if self.basis[i].weight as i64 != t {
                return Err(Error::Invalid(format!(
                    "{}_({n}){} must have weight {t}, found {} in the result",
                    self.basis[a].name, self.basis[b].name, self.basis[i].name
                )));
            }
        }
        let pt = &mut self.table[a * dim + b];
        let slot = (n - pt.n_min) as usize;
        pt.results[slot] = result;
        Ok(())
    }

    pub fn build(self, vacuum: usize, omega: GradedVector, central_charge: Scalar) -> Result<TruncatedVoa> {
        if self.l_max < 2 {
            return Err(Error::Invalid("the cutoff must be at least 2 to hold the conformal vector".into()));
        }
        if vacuum >= self.basis.len() || self.basis[vacuum].weight != 0 {
            return Err(Error::Invalid("the vacuum must be a weight-0 basis vector".into()));
        }
        if omega.is_zero() || omega.iter().any(|(i, _)| i >= self.basis.len() || self.basis[i].weight != 2) {
            return Err(Error::Invalid("the conformal vector must be a nonzero weight-2 vector".into()));
        }
        Ok(TruncatedVoa {
            l_max: self.l_max,
            basis: self.basis,
            offsets: self.offsets,
            names: self.names,
            vacuum,
            omega,
            central_charge,
            table: self.table,
        })
    }
}

/// Outcome of the grading and translation checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GradingReport {
    pub instances: usize,
    pub l0_violations: Vec<usize>,
    /// `(a, n, b)` with `(L_{-1}a)_(n) b != -n a_(n-1) b`.
    pub translation_violations: Vec<(usize, i64, usize)>,
}

impl GradingReport {
    pub fn passed(&self) -> bool {
        self.l0_violations.is_empty() && self.translation_violations.is_empty()
    }
}

/// Outcome of a Borcherds sweep; instances needing weights above the cutoff
/// are counted as skipped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SweepReport {
    pub checked: usize,
    pub skipped: usize,
    /// `(p, q, r, a, b, c)` with a nonzero residual.
    pub failures: Vec<(i64, i64, i64, usize, usize, usize)>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl TruncatedVoa {
    /// Borcherds identity on all basis triples with `|p|, |q|, |r| <= bound`.
    pub fn borcherds_sweep(&self, bound: i64) -> SweepReport {
        let mut report = SweepReport::default();
        let dim = self.dim();
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for p in -bound..=bound {
                        for q in -bound..=bound {
                            for r in -bound..=bound {
                                match self.borcherds_basis(p, q, r, a, b, c) {
                                    Ok(res) => {
                                        report.checked += 1;
                                        if !res.is_zero() {
                                            report.failures.push((p, q, r, a, b, c));
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

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisVector] {
        &self.basis
    }

    pub fn name(&self, i: usize) -> &str {
        &self.basis[i].name
    }

    pub fn weight(&self, i: usize) -> usize {
        self.basis[i].weight
    }

    pub fn weight_range(&self, k: usize) -> Range<usize> {
        if k > self.l_max {
            return self.basis.len()..self.basis.len();
        }
        self.offsets[k]..self.offsets[k + 1]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownBasis(name.into()))
    }

    pub fn vacuum(&self) -> usize {
        self.vacuum
    }

    pub fn omega(&self) -> &GradedVector {
        &self.omega
    }

    pub fn central_charge(&self) -> &Scalar {
        &self.central_charge
    }

    /// Weight of a nonzero homogeneous vector.
    pub fn homogeneous_weight(&self, v: &GradedVector) -> Option<usize> {
        let mut it = v.iter().map(|(i, _)| self.basis.get(i).map(|b| b.weight));
        let w = it.next()??;
        it.all(|x| x == Some(w)).then_some(w)
    }

    pub fn check_vector(&self, v: &GradedVector) -> Result<()> {
        match v.iter().find(|(i, _)| *i >= self.basis.len()) {
            Some((i, _)) => Err(Error::UnknownBasis(format!("index {i}"))),
            None => Ok(()),
        }
    }

    /// `a_(n)b` for basis vectors; `None` when the product vanishes by grading.
    pub fn product(&self, a: usize, n: i64, b: usize) -> Result<Option<&GradedVector>> {
        let t = (self.basis[a].weight + self.basis[b].weight) as i64 - 1 - n;
        if t < 0 {
            return Ok(None);
        }
        if t > self.l_max as i64 {
            return Err(truncated("product", t, self.l_max));
        }
        let pt = &self.table[a * self.basis.len() + b];
        Ok(Some(&pt.results[(n - pt.n_min) as usize]))
    }

    /// Nonzero stored products as `(a, n, b, a_(n)b)`.
    pub fn products(&self) -> impl Iterator<Item = (usize, i64, usize, &GradedVector)> + '_ {
        let dim = self.basis.len();
        self.table.iter().enumerate().flat_map(move |(ab, pt)| {
            pt.results
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.is_zero())
                .map(move |(k, r)| (ab / dim, pt.n_min + k as i64, ab % dim, r))
        })
    }

    /// A copy with one product replaced; used to build perturbed tables.
    pub fn with_product(&self, a: usize, n: i64, b: usize, result: GradedVector) -> Result<TruncatedVoa> {
        let mut builder = VoaBuilder {
            l_max: self.l_max,
            basis: self.basis.clone(),
            offsets: self.offsets.clone(),
            names: self.names.clone(),
            table: self.table.clone(),
        };
        builder.set_product(a, n, b, result)?;
        builder.build(self.vacuum, self.omega.clone(), self.central_charge.clone())
    }

    /// `acc += coeff * a_(n) v` for a basis vector `a`.
    pub(crate) fn add_left(&self, acc: &mut GradedVector, coeff: &Scalar, a: usize, n: i64, v: &GradedVector) -> Result<()> {
        if coeff.is_zero() {
            return Ok(());
        }
        for (j, cj) in v.iter() {
            if let Some(p) = self.product(a, n, j)? {
                acc.add_scaled(&(coeff * cj), p);
            }
        }
        Ok(())
    }

    /// `acc += coeff * x_(n) b` for a basis vector `b`.
    pub(crate) fn add_right(&self, acc: &mut GradedVector, coeff: &Scalar, x: &GradedVector, n: i64, b: usize) -> Result<()> {
        if coeff.is_zero() {
            return Ok(());
        }
        for (j, cj) in x.iter() {
            if let Some(p) = self.product(j, n, b)? {
                acc.add_scaled(&(coeff * cj), p);
            }
        }
        Ok(())
    }

    /// Bilinear extension of the product table.
    pub fn mode_apply(&self, a: &GradedVector, n: i64, b: &GradedVector) -> Result<GradedVector> {
        self.check_vector(a)?;
        self.check_vector(b)?;
        let mut out = GradedVector::new();
        for (i, ci) in a.iter() {
            self.add_left(&mut out, ci, i, n, b)?;
        }
        Ok(out)
    }

    /// `L_m v = ω_(m+1) v`.
    pub fn virasoro(&self, m: i64, v: &GradedVector) -> Result<GradedVector> {
        self.mode_apply(&self.omega, m + 1, v)
    }

    /// Residual of the Borcherds identity; zero iff it holds.
    pub fn check_borcherds(
        &self,
        p: i64,
        q: i64,
        r: i64,
        a: &GradedVector,
        b: &GradedVector,
        c: &GradedVector,
    ) -> Result<GradedVector> {
        self.check_vector(a)?;
        self.check_vector(b)?;
        self.check_vector(c)?;
        let mut out = GradedVector::new();
        for (ia, ca) in a.iter() {
            for (ib, cb) in b.iter() {
                for (ic, cc) in c.iter() {
                    let res = self.borcherds_basis(p, q, r, ia, ib, ic)?;
                    out.add_scaled(&(&(ca * cb) * cc), &res);
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn borcherds_basis(&self, p: i64, q: i64, r: i64, a: usize, b: usize, c: usize) -> Result<GradedVector> {
        let (wa, wb, wc) = (self.weight(a) as i64, self.weight(b) as i64, self.weight(c) as i64);
        let target = wa + wb + wc - 2 - p - q - r;
        if target > self.l_max as i64 {
            return Err(truncated("Borcherds target", target, self.l_max));
        }
        let mut out = GradedVector::new();
        if target < 0 {
            return Ok(out);
        }
        let lhs_top = wa + wb - 1 - r;
        for i in 0..=lhs_top.max(-1) {
            let coeff = binomial(p, i);
            if coeff.is_zero() {
                continue;
            }
            if let Some(ab) = self.product(a, r + i, b)? {
                self.add_right(&mut out, &coeff, ab, p + q - i, c)?;
            }
        }
        let rhs_top = (wb + wc - 1 - q).max(wa + wc - 1 - p);
        let sr = Scalar::sign(r);
        for i in 0..=rhs_top.max(-1) {
            let coeff = Scalar::sign(i) * binomial(r, i);
            if coeff.is_zero() {
                continue;
            }
            if let Some(bc) = self.product(b, q + i, c)? {
                self.add_left(&mut out, &(-&coeff), a, p + r - i, bc)?;
            }
            if let Some(ac) = self.product(a, p + i, c)? {
                self.add_left(&mut out, &(&coeff * &sr), b, q + r - i, ac)?;
            }
        }
        Ok(out)
    }

    /// Residual of `[L_m, L_n] - (m-n)L_{m+n} - (c/12)(m^3-m)δ_{m+n,0}` on every
    /// basis vector for which all intermediate weights are representable.
    pub fn check_virasoro(&self, m: i64, n: i64) -> Result<Vec<(usize, GradedVector)>> {
        let slack = 0.max(-m).max(-n).max(-m - n);
        let top = self.l_max as i64 - slack;
        let central = if m + n == 0 {
            &self.central_charge * &Scalar::new(m * m * m - m, 12)
        } else {
            Scalar::ZERO
        };
        let mut out = Vec::new();
        for b in 0..self.dim() {
            if self.weight(b) as i64 > top {
                continue;
            }
            let v = GradedVector::unit(b);
            let mut res = self.virasoro(m, &self.virasoro(n, &v)?)?;
            res.add_scaled(&Scalar::integer(-1), &self.virasoro(n, &self.virasoro(m, &v)?)?);
            res.add_scaled(&Scalar::integer(-(m - n)), &self.virasoro(m + n, &v)?);
            res.add_term(b, &(-&central));
            out.push((b, res));
        }
        Ok(out)
    }

    /// Residual of `[L_0, a_(n)] - (|a|-n-1) a_(n)` on every basis vector with
    /// a representable image.
    pub fn check_l0_commutator(&self, a: usize, n: i64) -> Result<Vec<(usize, GradedVector)>> {
        let wa = self.weight(a) as i64;
        let av = GradedVector::unit(a);
        let mut out = Vec::new();
        for b in 0..self.dim() {
            let t = wa + self.weight(b) as i64 - 1 - n;
            if t > self.l_max as i64 {
                continue;
            }
            let v = GradedVector::unit(b);
            let anb = self.mode_apply(&av, n, &v)?;
            let mut res = self.virasoro(0, &anb)?;
            res.add_scaled(&Scalar::integer(-1), &self.mode_apply(&av, n, &self.virasoro(0, &v)?)?);
            res.add_scaled(&Scalar::integer(-(wa - n - 1)), &anb);
            out.push((b, res));
        }
        Ok(out)
    }

    /// `L_0` acts by the weight on every basis vector, and
    /// `(L_{-1}a)_(n) = -n a_(n-1)` on every representable instance.
    pub fn check_grading_translation(&self) -> Result<GradingReport> {
        let mut report = GradingReport::default();
        for b in 0..self.dim() {
            let v = GradedVector::unit(b);
            let l0 = self.virasoro(0, &v)?;
            report.instances += 1;
            if l0 != v.scaled(&Scalar::from(self.weight(b))) {
                report.l0_violations.push(b);
            }
        }
        for a in 0..self.dim() {
            let wa = self.weight(a) as i64;
            if wa + 1 > self.l_max as i64 {
                continue;
            }
            let la = self.virasoro(-1, &GradedVector::unit(a))?;
            let av = GradedVector::unit(a);
            for b in 0..self.dim() {
                let wb = self.weight(b) as i64;
                let bv = GradedVector::unit(b);
                for n in (wa + wb - self.l_max as i64)..=(wa + wb) {
                    let lhs = self.mode_apply(&la, n, &bv)?;
                    let rhs = self.mode_apply(&av, n - 1, &bv)?.scaled(&Scalar::integer(-n));
                    report.instances += 1;
                    if lhs != rhs {
                        report.translation_violations.push((a, n, b));
                    }
                }
            }
        }
        Ok(report)
    }
}
