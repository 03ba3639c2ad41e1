//! JSON file formats for algebras, modules and intertwining operators.
//!
//! Scalars are written as `"p/q"` strings (`"p"` for integers) so that files
//! round-trip bit-exactly. Basis vectors are referred to by name.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use logvoa_core::blocks::Triple;
use logvoa_core::intertwiner::{IntwFrame, IntwKey, LogIntwOperator};
use logvoa_core::linear::DenseMatrix;
use logvoa_core::module::{LogModule, ModuleBuilder};
use logvoa_core::voa::{TruncatedVoa, VoaBuilder};
use logvoa_core::{Scalar, SparseVec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Invalid {
        path: PathBuf,
        #[source]
        source: logvoa_core::Error,
    },
    #[error("{path}: {message}")]
    Shape { path: PathBuf, message: String },
}

/// An exact scalar that serializes as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarText(pub Scalar);

impl Serialize for ScalarText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ScalarText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map(ScalarText).map_err(serde::de::Error::custom)
    }
}

impl From<&Scalar> for ScalarText {
    fn from(s: &Scalar) -> Self {
        ScalarText(s.clone())
    }
}

impl fmt::Display for ScalarText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub basis: String,
    pub coeff: ScalarText,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub a: String,
    pub n: i64,
    pub b: String,
    pub result: Vec<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub a: String,
    pub m: i64,
    pub u: String,
    pub result: Vec<Term>,
}

/// A truncated vertex algebra. Products not listed are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoaFile {
    pub l_max: usize,
    pub weights: Vec<Vec<String>>,
    pub vacuum: String,
    pub omega: Vec<Term>,
    pub central_charge: ScalarText,
    pub products: Vec<ProductEntry>,
}

/// A module over a vertex algebra given separately. Actions not listed are
/// zero; when `l0` is omitted it is derived from the conformal vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleFile {
    pub h: ScalarText,
    pub depth: usize,
    pub l_mod: usize,
    pub levels: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<Vec<Vec<Vec<ScalarText>>>>,
    pub actions: Vec<ActionEntry>,
}

/// One level block of an intertwiner table: `matrix[i1][i2][i3]` is the
/// coefficient for the `i1`-th, `i2`-th and `i3`-th basis vectors of the
/// given levels of the three modules.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelBlock {
    pub level1: usize,
    pub level2: usize,
    pub level3: usize,
    pub matrix: Vec<Vec<Vec<ScalarText>>>,
}

/// The coefficients of one log degree `n` and one exponent offset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntwTable {
    pub n: usize,
    pub alpha_offset: i64,
    pub blocks: Vec<LevelBlock>,
}

/// An intertwining operator on a window. Only blocks with a nonzero entry
/// are written.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntertwinerFile {
    pub level: usize,
    pub depth: usize,
    pub alpha_base: ScalarText,
    pub tables: Vec<IntwTable>,
}

fn terms(v: &SparseVec, name: impl Fn(usize) -> String) -> Vec<Term> {
    v.iter()
        .map(|(i, c)| Term {
            basis: name(i),
            coeff: c.into(),
        })
        .collect()
}

fn vector(ts: &[Term], index: impl Fn(&str) -> logvoa_core::Result<usize>) -> logvoa_core::Result<SparseVec> {
    let mut v = SparseVec::new();
    for t in ts {
        v.add_term(index(&t.basis)?, &t.coeff.0);
    }
    Ok(v)
}

impl VoaFile {
    pub fn from_voa(voa: &TruncatedVoa) -> Self {
        let name = |i: usize| voa.name(i).to_string();
        let weights = (0..=voa.l_max())
            .map(|k| voa.weight_range(k).map(name).collect())
            .collect();
        let products = voa
            .products()
            .map(|(a, n, b, r)| ProductEntry {
                a: name(a),
                n,
                b: name(b),
                result: terms(r, name),
            })
            .collect();
        VoaFile {
            l_max: voa.l_max(),
            weights,
            vacuum: name(voa.vacuum()),
            omega: terms(voa.omega(), name),
            central_charge: voa.central_charge().into(),
            products,
        }
    }

    pub fn build(&self) -> logvoa_core::Result<TruncatedVoa> {
        let mut b = VoaBuilder::new(self.l_max, self.weights.clone())?;
        for p in &self.products {
            let result = vector(&p.result, |s| b.index_of(s))?;
            b.set_product(b.index_of(&p.a)?, p.n, b.index_of(&p.b)?, result)?;
        }
        let vacuum = b.index_of(&self.vacuum)?;
        let omega = vector(&self.omega, |s| b.index_of(s))?;
        b.build(vacuum, omega, self.central_charge.0.clone())
    }
}

impl ModuleFile {
    pub fn from_module(m: &LogModule) -> Self {
        let voa = m.voa();
        let name = |u: usize| m.name(u).to_string();
        let levels = (0..=m.l_mod())
            .map(|n| m.level_range(n).map(name).collect())
            .collect();
        let l0 = (0..=m.l_mod())
            .map(|n| {
                m.l0_matrix(n)
                    .to_rows()
                    .iter()
                    .map(|row| row.iter().map(ScalarText::from).collect())
                    .collect()
            })
            .collect();
        let actions = m
            .actions()
            .map(|(a, k, u, r)| ActionEntry {
                a: voa.name(a).to_string(),
                m: k,
                u: name(u),
                result: terms(r, name),
            })
            .collect();
        ModuleFile {
            h: m.h().into(),
            depth: m.depth(),
            l_mod: m.l_mod(),
            levels,
            l0: Some(l0),
            actions,
        }
    }

    pub fn build(&self, voa: Arc<TruncatedVoa>) -> logvoa_core::Result<LogModule> {
        let mut b = ModuleBuilder::new(voa.clone(), self.h.0.clone(), self.depth, self.l_mod, self.levels.clone())?;
        for e in &self.actions {
            let result = vector(&e.result, |s| b.index_of(s))?;
            b.set_action(voa.index_of(&e.a)?, e.m, b.index_of(&e.u)?, result)?;
        }
        match &self.l0 {
            Some(mats) => {
                if mats.len() != self.l_mod + 1 {
                    return Err(logvoa_core::Error::Invalid(format!(
                        "expected {} L0 matrices, found {}",
                        self.l_mod + 1,
                        mats.len()
                    )));
                }
                for (level, rows) in mats.iter().enumerate() {
                    let rows = rows.iter().map(|r| r.iter().map(|x| x.0.clone()).collect()).collect();
                    b.set_l0(level, DenseMatrix::from_rows(rows)?)?;
                }
            }
            None => b.l0_from_actions()?,
        }
        b.build()
    }
}

impl IntertwinerFile {
    pub fn from_operator(op: &LogIntwOperator) -> Self {
        let frame = op.frame();
        let ms = &frame.triple.modules;
        // (n, offset) -> (levels) -> entries
        type Blocks = BTreeMap<(usize, usize, usize), Vec<(usize, usize, usize, Scalar)>>;
        let mut grouped: BTreeMap<(usize, i64), Blocks> = BTreeMap::new();
        for (k, v) in op.entries() {
            let ls = (ms[0].level(k.u1), ms[1].level(k.u2), ms[2].level(k.u3));
            grouped
                .entry((k.n, k.shift))
                .or_default()
                .entry(ls)
                .or_default()
                .push((k.u1, k.u2, k.u3, v.clone()));
        }
        let tables = grouped
            .into_iter()
            .map(|((n, alpha_offset), blocks)| IntwTable {
                n,
                alpha_offset,
                blocks: blocks
                    .into_iter()
                    .map(|((l1, l2, l3), entries)| {
                        let (r1, r2, r3) = (ms[0].level_range(l1), ms[1].level_range(l2), ms[2].level_range(l3));
                        let mut matrix = vec![vec![vec![ScalarText(Scalar::ZERO); r3.len()]; r2.len()]; r1.len()];
                        for (u1, u2, u3, v) in entries {
                            matrix[u1 - r1.start][u2 - r2.start][u3 - r3.start] = ScalarText(v);
                        }
                        LevelBlock {
                            level1: l1,
                            level2: l2,
                            level3: l3,
                            matrix,
                        }
                    })
                    .collect(),
            })
            .collect();
        IntertwinerFile {
            level: frame.level(),
            depth: frame.depth(),
            alpha_base: ScalarText(frame.exponent_base()),
            tables,
        }
    }

    /// Rebuilds the operator on the window of `triple` at the stored level.
    /// Fails when the level, depth, exponent or block shapes disagree with
    /// the modules.
    pub fn to_operator(&self, triple: &Triple) -> Result<LogIntwOperator, String> {
        let frame = IntwFrame::new(triple, self.level).map_err(|e| e.to_string())?;
        if frame.depth() != self.depth {
            return Err(format!("depth {} does not match the modules' depth {}", self.depth, frame.depth()));
        }
        if frame.exponent_base() != self.alpha_base.0 {
            return Err(format!(
                "alpha_base {} does not match the modules' {}",
                self.alpha_base,
                frame.exponent_base()
            ));
        }
        let ms = triple.modules.clone();
        let mut op = LogIntwOperator::zero(frame);
        for t in &self.tables {
            for b in &t.blocks {
                let ranges = [(b.level1, &ms[0]), (b.level2, &ms[1]), (b.level3, &ms[2])].map(|(l, m)| {
                    if l <= m.l_mod() {
                        Ok(m.level_range(l))
                    } else {
                        Err(format!("level {l} exceeds the module cutoff {}", m.l_mod()))
                    }
                });
                let [r1, r2, r3] = ranges;
                let (r1, r2, r3) = (r1?, r2?, r3?);
                let shape_ok = b.matrix.len() == r1.len()
                    && b.matrix.iter().all(|row| {
                        row.len() == r2.len() && row.iter().all(|cell| cell.len() == r3.len())
                    });
                if !shape_ok {
                    return Err(format!(
                        "block ({}, {}, {}) must have shape {}x{}x{}",
                        b.level1,
                        b.level2,
                        b.level3,
                        r1.len(),
                        r2.len(),
                        r3.len()
                    ));
                }
                for (i1, row) in b.matrix.iter().enumerate() {
                    for (i2, cell) in row.iter().enumerate() {
                        for (i3, v) in cell.iter().enumerate() {
                            if v.0.is_zero() {
                                continue;
                            }
                            let key = IntwKey {
                                n: t.n,
                                shift: t.alpha_offset,
                                u1: r1.start + i1,
                                u2: r2.start + i2,
                                u3: r3.start + i3,
                            };
                            op.insert(key, v.0.clone()).map_err(|e| e.to_string())?;
                        }
                    }
                }
            }
        }
        Ok(op)
    }
}

/// Reads and deserializes a JSON file, reporting parse errors with their
/// line and column.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.into(),
        source,
    })?;
    parse_json(path, &text)
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.into(),
        source,
    })
}

pub fn load_voa(path: &Path) -> Result<TruncatedVoa, FormatError> {
    let f: VoaFile = read_json(path)?;
    f.build().map_err(|source| FormatError::Invalid {
        path: path.into(),
        source,
    })
}

pub fn load_module(path: &Path, voa: Arc<TruncatedVoa>) -> Result<LogModule, FormatError> {
    let f: ModuleFile = read_json(path)?;
    f.build(voa).map_err(|source| FormatError::Invalid {
        path: path.into(),
        source,
    })
}

pub fn load_intertwiner(path: &Path, triple: &Triple) -> Result<LogIntwOperator, FormatError> {
    let f: IntertwinerFile = read_json(path)?;
    f.to_operator(triple).map_err(|message| FormatError::Shape {
        path: path.into(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use logvoa_core::heisenberg::Heisenberg;
    use proptest::prelude::*;

    fn text_round_trip<T: Serialize + DeserializeOwned>(x: &T) -> T {
        parse_json(Path::new("mem"), &serde_json::to_string(x).unwrap()).unwrap()
    }

    proptest! {
        #[test]
        fn scalars_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
            let s = ScalarText(Scalar::new(n, d));
            prop_assert_eq!(text_round_trip(&s), s);
        }
    }

    #[test]
    fn integers_have_no_denominator() {
        assert_eq!(serde_json::to_string(&ScalarText(Scalar::integer(-3))).unwrap(), "\"-3\"");
        assert_eq!(serde_json::to_string(&ScalarText(Scalar::new(2, -4))).unwrap(), "\"-1/2\"");
    }

    #[test]
    fn heisenberg_round_trips_through_json() {
        let h = Heisenberg::new(4).unwrap();
        let f = VoaFile::from_voa(h.voa());
        let back = text_round_trip(&f).build().unwrap();
        assert_eq!(VoaFile::from_voa(&back), f);
        assert_eq!(back.dim(), h.voa().dim());
    }

    #[test]
    fn log_module_round_trips_through_json() {
        let h = Heisenberg::new(4).unwrap();
        let m = h.log_fock_module(&Scalar::new(1, 2), 3).unwrap();
        let f = ModuleFile::from_module(&m);
        let back = text_round_trip(&f).build(h.voa().clone()).unwrap();
        assert_eq!(ModuleFile::from_module(&back), f);
        assert_eq!(back.depth(), 1);

        let mut derived = f.clone();
        derived.l0 = None;
        assert_eq!(ModuleFile::from_module(&derived.build(h.voa().clone()).unwrap()), f);
    }

    #[test]
    fn inconsistent_module_is_rejected() {
        let h = Heisenberg::new(4).unwrap();
        let mut f = ModuleFile::from_module(&h.fock_module(&Scalar::ONE, 2).unwrap());
        f.depth = 1;
        assert!(matches!(
            f.build(h.voa().clone()),
            Err(logvoa_core::Error::DepthMismatch { declared: 1, actual: 0 })
        ));
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = parse_json::<VoaFile>(Path::new("x.json"), "{\n  \"l_max\": 4,\n  oops\n}").unwrap_err();
        match err {
            FormatError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_json::<ScalarText>(Path::new("x"), "\"1/0\"").is_err());
    }

    #[test]
    fn operator_tables_round_trip() {
        let h = Heisenberg::new(4).unwrap();
        let one = Scalar::ONE;
        let m1 = Arc::new(h.log_fock_module(&one, 2).unwrap());
        let m2 = Arc::new(h.fock_module(&one, 2).unwrap());
        let m3 = Arc::new(h.log_fock_module(&Scalar::integer(-2), 2).unwrap());
        let triple = Triple::new(m1, m2, m3).unwrap();
        let frame = IntwFrame::new(&triple, 2).unwrap();
        let mut op = LogIntwOperator::zero(frame);
        op.set(0, 0, 1, 2, Scalar::new(3, 7)).unwrap();
        op.set(1, 1, 1, 3, Scalar::integer(-2)).unwrap();
        // An entry off the bookkeeping exponent survives thanks to level3.
        op.insert(
            IntwKey {
                n: 0,
                shift: -1,
                u1: 0,
                u2: 1,
                u3: 0,
            },
            Scalar::ONE,
        )
        .unwrap();
        let f = IntertwinerFile::from_operator(&op);
        let back = text_round_trip(&f).to_operator(&triple).unwrap();
        assert_eq!(back, op);

        let mut bad = f.clone();
        bad.tables[0].blocks[0].matrix.pop();
        assert!(bad.to_operator(&triple).is_err());
        let mut bad = f;
        bad.depth = 0;
        assert!(bad.to_operator(&triple).is_err());
    }
}
