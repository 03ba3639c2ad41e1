//! The subcommands. Each one returns a serializable report that knows
//! whether it passed and how to render itself as text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use logvoa_core::blocks::{blocks_dimension, BlockFunctional, LevelSummary, Triple};
use logvoa_core::correspondence::{
    block_from_intw, intw_from_block, roundtrip_block_residual, roundtrip_intw_residual, telescoping_verify,
};
use logvoa_core::intertwiner::{axiom_suite, nilpotent_identity_verify, AxiomReport, LogIntwOperator, ResidualReport};
use logvoa_core::module::{dual_module, LogModule};
use logvoa_core::voa::{SweepReport, TruncatedVoa};
use logvoa_core::Scalar;
use serde::Serialize;

use crate::format::{self, IntertwinerFile, ModuleFile, ScalarText};
use crate::instances::{Algebra, CliError, ModuleArg};

/// Failure lists in reports are cut to this many entries.
const LISTED: usize = 20;

pub trait Report: Serialize {
    fn passed(&self) -> bool;
    fn text(&self, verbose: bool) -> String;
}

/// A rendered report.
pub struct Output {
    pub passed: bool,
    pub json: String,
    pub text: String,
}

impl Output {
    pub fn new<R: Report>(r: &R, verbose: bool) -> Self {
        let mut json = serde_json::to_string_pretty(r).expect("reports serialize");
        json.push('\n');
        Output {
            passed: r.passed(),
            json,
            text: r.text(verbose),
        }
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn list_failures(out: &mut String, failures: &[String], verbose: bool) {
    if verbose {
        for f in failures {
            let _ = writeln!(out, "    {f}");
        }
    }
}

#[derive(Serialize)]
pub struct SweepSummary {
    pub bound: i64,
    pub checked: usize,
    pub skipped: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

impl SweepSummary {
    fn new(bound: i64, r: &SweepReport, a_name: impl Fn(usize) -> String, c_name: impl Fn(usize) -> String) -> Self {
        SweepSummary {
            bound,
            checked: r.checked,
            skipped: r.skipped,
            failure_count: r.failures.len(),
            failures: r
                .failures
                .iter()
                .take(LISTED)
                .map(|&(p, q, r, a, b, c)| format!("p={p} q={q} r={r} a={} b={} c={}", a_name(a), a_name(b), c_name(c)))
                .collect(),
        }
    }

    fn line(&self, what: &str, out: &mut String, verbose: bool) {
        let _ = writeln!(
            out,
            "{what} (|p|,|q|,|r| <= {}): {} checked, {} skipped, {} failures",
            self.bound, self.checked, self.skipped, self.failure_count
        );
        list_failures(out, &self.failures, verbose);
    }
}

#[derive(Serialize)]
pub struct CheckCount {
    pub checked: usize,
    pub failure_count: usize,
    pub failures: Vec<String>,
}

impl CheckCount {
    fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

fn residual_count(r: &ResidualReport) -> CheckCount {
    CheckCount {
        checked: r.checked,
        failure_count: r.failures.len(),
        failures: r
            .failures
            .iter()
            .take(LISTED)
            .map(|f| {
                let form = f
                    .form
                    .map(|(a, p, q)| format!(" form=({a},{p},{q})"))
                    .unwrap_or_default();
                format!("n={} u=({},{},{}){form} residual={}", f.n, f.u1, f.u2, f.u3, f.residual)
            })
            .collect(),
    }
}

// ---- check-voa

#[derive(Serialize)]
pub struct VoaCheck {
    pub command: &'static str,
    pub l_max: usize,
    pub dim: usize,
    pub graded_dims: Vec<usize>,
    pub central_charge: ScalarText,
    pub borcherds: SweepSummary,
    pub virasoro_range: i64,
    pub virasoro: CheckCount,
    pub grading: CheckCount,
    pub passed: bool,
}

pub fn check_voa(voa: &TruncatedVoa, bound: i64, virasoro_range: i64) -> Result<VoaCheck, CliError> {
    let name = |i: usize| voa.name(i).to_string();
    let borcherds = SweepSummary::new(bound, &voa.borcherds_sweep(bound), name, name);

    let mut virasoro = CheckCount {
        checked: 0,
        failure_count: 0,
        failures: Vec::new(),
    };
    for m in -virasoro_range..=virasoro_range {
        for n in -virasoro_range..=virasoro_range {
            for (b, res) in voa.check_virasoro(m, n)? {
                virasoro.checked += 1;
                if !res.is_zero() {
                    virasoro.failure_count += 1;
                    if virasoro.failures.len() < LISTED {
                        virasoro.failures.push(format!("m={m} n={n} on {}", voa.name(b)));
                    }
                }
            }
        }
    }

    let g = voa.check_grading_translation()?;
    let mut failures: Vec<String> = g
        .l0_violations
        .iter()
        .map(|&b| format!("L0 on {}", voa.name(b)))
        .collect();
    failures.extend(
        g.translation_violations
            .iter()
            .map(|&(a, n, b)| format!("translation a={} n={n} b={}", voa.name(a), voa.name(b))),
    );
    let grading = CheckCount {
        checked: g.instances,
        failure_count: failures.len(),
        failures: failures.into_iter().take(LISTED).collect(),
    };

    let passed = borcherds.failure_count == 0 && virasoro.passed() && grading.passed();
    Ok(VoaCheck {
        command: "check-voa",
        l_max: voa.l_max(),
        dim: voa.dim(),
        graded_dims: (0..=voa.l_max()).map(|k| voa.weight_range(k).len()).collect(),
        central_charge: voa.central_charge().into(),
        borcherds,
        virasoro_range,
        virasoro,
        grading,
        passed,
    })
}

impl Report for VoaCheck {
    fn passed(&self) -> bool {
        self.passed
    }

    fn text(&self, verbose: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "check-voa: l_max {}, dim {}, graded dims {:?}, central charge {}",
            self.l_max, self.dim, self.graded_dims, self.central_charge
        );
        self.borcherds.line("borcherds", &mut s, verbose);
        let _ = writeln!(
            s,
            "virasoro (|m|,|n| <= {}): {} checked, {} failures",
            self.virasoro_range, self.virasoro.checked, self.virasoro.failure_count
        );
        list_failures(&mut s, &self.virasoro.failures, verbose);
        let _ = writeln!(
            s,
            "grading and translation: {} checked, {} failures",
            self.grading.checked, self.grading.failure_count
        );
        list_failures(&mut s, &self.grading.failures, verbose);
        let _ = writeln!(s, "result: {}", verdict(self.passed));
        s
    }
}

// ---- check-module

#[derive(Serialize)]
pub struct ModuleCheck {
    pub command: &'static str,
    pub module: String,
    pub h: ScalarText,
    pub depth: usize,
    pub nilpotency_depth: usize,
    pub l_mod: usize,
    pub level_dims: Vec<usize>,
    pub borcherds: SweepSummary,
    pub dual_borcherds: SweepSummary,
    pub double_dual_matches: bool,
    pub passed: bool,
}

pub fn check_module(arg: &ModuleArg, m: &LogModule, bound: i64) -> Result<ModuleCheck, CliError> {
    let voa = m.voa();
    let a_name = |i: usize| voa.name(i).to_string();
    let borcherds = SweepSummary::new(bound, &m.borcherds_sweep(bound), a_name, |u| m.name(u).to_string());
    let dual = dual_module(m)?;
    let dual_borcherds = SweepSummary::new(bound, &dual.borcherds_sweep(bound), a_name, |u| dual.name(u).to_string());
    let double_dual_matches = ModuleFile::from_module(&dual_module(&dual)?) == ModuleFile::from_module(m);
    let nilpotency_depth = m.nilpotency_depth()?;
    let passed = borcherds.failure_count == 0
        && dual_borcherds.failure_count == 0
        && double_dual_matches
        && nilpotency_depth == m.depth();
    Ok(ModuleCheck {
        command: "check-module",
        module: arg.to_string(),
        h: m.h().into(),
        depth: m.depth(),
        nilpotency_depth,
        l_mod: m.l_mod(),
        level_dims: (0..=m.l_mod()).map(|n| m.level_dim(n)).collect(),
        borcherds,
        dual_borcherds,
        double_dual_matches,
        passed,
    })
}

impl Report for ModuleCheck {
    fn passed(&self) -> bool {
        self.passed
    }

    fn text(&self, verbose: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "check-module {}: h {}, depth {} (L0 nilpotency {}), level dims {:?}",
            self.module, self.h, self.depth, self.nilpotency_depth, self.level_dims
        );
        self.borcherds.line("borcherds", &mut s, verbose);
        self.dual_borcherds.line("dual borcherds", &mut s, verbose);
        let _ = writeln!(s, "double dual matches: {}", self.double_dual_matches);
        let _ = writeln!(s, "result: {}", verdict(self.passed));
        s
    }
}

// ---- blocks-dim

#[derive(Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub window_dim: usize,
    pub forms: usize,
    pub relations: usize,
    pub rank: usize,
    pub estimate: usize,
}

impl From<&LevelSummary> for LevelRow {
    fn from(s: &LevelSummary) -> Self {
        LevelRow {
            level: s.level,
            window_dim: s.window_dim,
            forms: s.forms,
            relations: s.relations,
            rank: s.rank,
            estimate: s.estimate,
        }
    }
}

#[derive(Serialize)]
pub struct BlocksDim {
    pub command: &'static str,
    pub modules: Vec<String>,
    pub levels: Vec<LevelRow>,
    pub estimate: usize,
    pub stabilized: bool,
    pub note: &'static str,
}

const STABILITY_NOTE: &str = "agreement with the level below is a heuristic, not a proof";

fn names(args: &[ModuleArg; 3]) -> Vec<String> {
    args.iter().map(ToString::to_string).collect()
}

pub fn blocks_dim(args: &[ModuleArg; 3], triple: &Triple, level: usize) -> Result<BlocksDim, CliError> {
    let d = blocks_dimension(triple, level)?;
    Ok(BlocksDim {
        command: "blocks-dim",
        modules: names(args),
        levels: d.levels.iter().map(LevelRow::from).collect(),
        estimate: d.estimate,
        stabilized: d.stabilized,
        note: STABILITY_NOTE,
    })
}

impl Report for BlocksDim {
    fn passed(&self) -> bool {
        true
    }

    fn text(&self, _verbose: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "blocks-dim {}", self.modules.join(" "));
        let _ = writeln!(s, "{:>5} {:>8} {:>7} {:>10} {:>7} {:>8}", "level", "window", "forms", "relations", "rank", "estimate");
        for r in &self.levels {
            let _ = writeln!(
                s,
                "{:>5} {:>8} {:>7} {:>10} {:>7} {:>8}",
                r.level, r.window_dim, r.forms, r.relations, r.rank, r.estimate
            );
        }
        let _ = writeln!(
            s,
            "estimate {}, {} ({})",
            self.estimate,
            if self.stabilized { "stabilized" } else { "not stabilized" },
            self.note
        );
        s
    }
}

// ---- extract-intw

#[derive(Serialize)]
pub struct AxiomSummary {
    pub truncation: CheckCount,
    pub weights: CheckCount,
    pub derivative: CheckCount,
    pub derivation: CheckCount,
    pub fund: CheckCount,
    pub borcherds_bound: i64,
    pub borcherds: CheckCount,
    pub passed: bool,
}

impl AxiomSummary {
    fn new(r: &AxiomReport, bound: i64) -> Self {
        let entries = |e: &logvoa_core::intertwiner::EntryReport| CheckCount {
            checked: e.checked,
            failure_count: e.violations.len(),
            failures: e
                .violations
                .iter()
                .take(LISTED)
                .map(|k| format!("n={} shift={} u=({},{},{})", k.n, k.shift, k.u1, k.u2, k.u3))
                .collect(),
        };
        AxiomSummary {
            truncation: entries(&r.truncation),
            weights: entries(&r.weights),
            derivative: residual_count(&r.derivative),
            derivation: residual_count(&r.fund.derivation),
            fund: residual_count(&r.fund.fund),
            borcherds_bound: bound,
            borcherds: residual_count(&r.borcherds),
            passed: r.passed(),
        }
    }

    fn lines(&self, out: &mut String, verbose: bool) {
        for (what, c) in [
            ("truncation", &self.truncation),
            ("weights", &self.weights),
            ("derivative", &self.derivative),
            ("derivation", &self.derivation),
            ("L0 relation", &self.fund),
            ("borcherds", &self.borcherds),
        ] {
            let _ = writeln!(out, "    {what}: {} checked, {} failures", c.checked, c.failure_count);
            if verbose {
                for f in &c.failures {
                    let _ = writeln!(out, "      {f}");
                }
            }
        }
    }
}

#[derive(Serialize)]
pub struct ExtractedOperator {
    pub index: usize,
    pub nonzero_entries: usize,
    pub log_entries: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_file: Option<PathBuf>,
    pub axioms: AxiomSummary,
}

#[derive(Serialize)]
pub struct Extraction {
    pub command: &'static str,
    pub modules: Vec<String>,
    pub level: usize,
    pub depth: usize,
    pub estimate: usize,
    pub stabilized: bool,
    pub operators: Vec<ExtractedOperator>,
    pub passed: bool,
}

fn log_entries(op: &LogIntwOperator) -> usize {
    op.entries().filter(|(k, v)| k.n >= 1 && !v.is_zero()).count()
}

/// Extracts one operator per basis block, checks every axiom on it and
/// optionally writes its table to `tables/operator_<i>.json`.
pub fn extract_intw(
    args: &[ModuleArg; 3],
    triple: &Triple,
    level: usize,
    bound: i64,
    tables: Option<&Path>,
) -> Result<Extraction, CliError> {
    let d = blocks_dimension(triple, level)?;
    if let Some(dir) = tables {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.into(),
            source,
        })?;
    }
    let mut operators = Vec::new();
    for (index, x) in d.space.basis.iter().enumerate() {
        let op = intw_from_block(x)?;
        let table_file = match tables {
            Some(dir) => {
                let path = dir.join(format!("operator_{index}.json"));
                format::write_json(&path, &IntertwinerFile::from_operator(&op))?;
                Some(path)
            }
            None => None,
        };
        operators.push(ExtractedOperator {
            index,
            nonzero_entries: op.nnz(),
            log_entries: log_entries(&op),
            table_file,
            axioms: AxiomSummary::new(&axiom_suite(&op, bound)?, bound),
        });
    }
    let passed = operators.iter().all(|o| o.axioms.passed);
    Ok(Extraction {
        command: "extract-intw",
        modules: names(args),
        level,
        depth: triple.depth(),
        estimate: d.estimate,
        stabilized: d.stabilized,
        operators,
        passed,
    })
}

impl Report for Extraction {
    fn passed(&self) -> bool {
        self.passed
    }

    fn text(&self, verbose: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "extract-intw {} at level {}: depth {}, {} operators ({})",
            self.modules.join(" "),
            self.level,
            self.depth,
            self.estimate,
            if self.stabilized { "stabilized" } else { "not stabilized" }
        );
        for o in &self.operators {
            let _ = writeln!(
                s,
                "  operator {}: {} nonzero entries, {} with log degree >= 1, axioms {}",
                o.index,
                o.nonzero_entries,
                o.log_entries,
                verdict(o.axioms.passed)
            );
            if let Some(p) = &o.table_file {
                let _ = writeln!(s, "    table written to {}", p.display());
            }
            o.axioms.lines(&mut s, verbose);
        }
        let _ = writeln!(s, "result: {}", verdict(self.passed));
        s
    }
}

// ---- roundtrip

#[derive(Serialize)]
pub struct RoundTripRow {
    pub id: String,
    pub level: usize,
    pub window: usize,
    pub compared: usize,
    pub mismatches: usize,
    pub max_residual: ScalarText,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct RoundTrips {
    pub command: &'static str,
    pub modules: Vec<String>,
    pub instances: Vec<RoundTripRow>,
    pub passed: bool,
}

fn row(id: String, level: usize, window: usize, (rt, max): (logvoa_core::correspondence::RoundTrip, Scalar)) -> RoundTripRow {
    RoundTripRow {
        id,
        level,
        window,
        compared: rt.compared,
        mismatches: rt.mismatches,
        max_residual: ScalarText(max),
        passed: rt.passed(),
    }
}

fn block_rows(id: &str, x: &BlockFunctional, op: &LogIntwOperator) -> Result<[RoundTripRow; 2], CliError> {
    let (level, window) = (x.window.level(), x.window.dim());
    Ok([
        row(format!("{id}/block"), level, window, roundtrip_block_residual(x)?),
        row(format!("{id}/operator"), level, window, roundtrip_intw_residual(op)?),
    ])
}

/// Round trips every basis block at `level`, or the operator stored in
/// `intw` when given.
pub fn roundtrip(args: &[ModuleArg; 3], triple: &Triple, level: usize, intw: Option<&Path>) -> Result<RoundTrips, CliError> {
    let mut instances = Vec::new();
    match intw {
        Some(path) => {
            let op = format::load_intertwiner(path, triple)?;
            let x = block_from_intw(&op)?;
            instances.extend(block_rows(&path.display().to_string(), &x, &op)?);
        }
        None => {
            let d = blocks_dimension(triple, level)?;
            for (i, x) in d.space.basis.iter().enumerate() {
                let op = intw_from_block(x)?;
                instances.extend(block_rows(&format!("basis-{i}"), x, &op)?);
            }
        }
    }
    let passed = instances.iter().all(|r| r.passed);
    Ok(RoundTrips {
        command: "roundtrip",
        modules: names(args),
        instances,
        passed,
    })
}

impl Report for RoundTrips {
    fn passed(&self) -> bool {
        self.passed
    }

    fn text(&self, _verbose: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "roundtrip {}", self.modules.join(" "));
        if self.instances.is_empty() {
            let _ = writeln!(s, "  no blocks in the window");
        }
        for r in &self.instances {
            let _ = writeln!(
                s,
                "  {}: level {}, window {}, {} compared, max residual {} {}",
                r.id,
                r.level,
                r.window,
                r.compared,
                r.max_residual,
                verdict(r.passed)
            );
        }
        let _ = writeln!(s, "result: {}", verdict(self.passed));
        s
    }
}

// ---- identities

#[derive(Serialize)]
pub struct Identities {
    pub command: &'static str,
    pub max: usize,
    pub nilpotent_checked: usize,
    pub nilpotent_failures: Vec<[usize; 3]>,
    pub telescoping_checked: usize,
    pub telescoping_failures: Vec<usize>,
    pub passed: bool,
}

/// The nilpotent symbol identity for `0 <= p <= max`, `0 <= q <= d <= max`,
/// and the telescoping sum for `k = 0..=max`.
pub fn identities(max: usize) -> Identities {
    let mut nilpotent_checked = 0;
    let mut nilpotent_failures = Vec::new();
    for p in 0..=max {
        for d in 0..=max {
            for q in 0..=d {
                nilpotent_checked += 1;
                if !nilpotent_identity_verify(p, q, d) {
                    nilpotent_failures.push([p, q, d]);
                }
            }
        }
    }
    let telescoping_failures: Vec<usize> = (0..=max).filter(|&k| !telescoping_verify(k)).collect();
    let passed = nilpotent_failures.is_empty() && telescoping_failures.is_empty();
    Identities {
        command: "identities",
        max,
        nilpotent_checked,
        nilpotent_failures,
        telescoping_checked: max + 1,
        telescoping_failures,
        passed,
    }
}

impl Report for Identities {
    fn passed(&self) -> bool {
        self.passed
    }

    fn text(&self, _verbose: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "nilpotent symbol identity: {} cases, failures {:?}",
            self.nilpotent_checked, self.nilpotent_failures
        );
        let _ = writeln!(
            s,
            "telescoping sums: {} cases, failures {:?}",
            self.telescoping_checked, self.telescoping_failures
        );
        let _ = writeln!(s, "result: {}", verdict(self.passed));
        s
    }
}

// ---- export

/// The JSON file of the algebra or of one module.
pub fn export(alg: &Algebra, module: Option<(&ModuleArg, usize)>) -> Result<String, CliError> {
    let mut text = match module {
        Some((arg, l_mod)) => serde_json::to_string_pretty(&ModuleFile::from_module(&alg.module(arg, l_mod)?)),
        None => serde_json::to_string_pretty(&format::VoaFile::from_voa(alg.voa())),
    }
    .expect("files serialize");
    text.push('\n');
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_pass_up_to_three() {
        let r = identities(3);
        assert!(r.passed);
        assert_eq!(r.nilpotent_checked, 4 * 10);
        assert!(r.text(false).ends_with("result: PASS\n"));
    }

    #[test]
    fn small_voa_check_passes() {
        let alg = Algebra::heisenberg(3).unwrap();
        let r = check_voa(alg.voa(), 1, 2).unwrap();
        assert!(r.passed, "{}", r.text(true));
        assert_eq!(r.graded_dims, [1, 1, 2, 3]);
    }

    #[test]
    fn module_check_covers_the_dual() {
        let alg = Algebra::heisenberg(3).unwrap();
        let arg = ModuleArg::LogFock(Scalar::ONE);
        let m = alg.module(&arg, 2).unwrap();
        let r = check_module(&arg, &m, 1).unwrap();
        assert!(r.passed, "{}", r.text(true));
        assert!(r.double_dual_matches);
        assert_eq!(r.level_dims, [2, 2, 4]);
    }
}
