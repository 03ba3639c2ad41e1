//! Resolving the algebra and module arguments of a command.
//!
//! A module argument is `fock:<charge>`, `logfock:<charge>` or the path of a
//! module file. The built-in kinds need the built-in Heisenberg algebra.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use logvoa_core::blocks::Triple;
use logvoa_core::heisenberg::Heisenberg;
use logvoa_core::module::LogModule;
use logvoa_core::voa::TruncatedVoa;
use logvoa_core::Scalar;

use crate::format::{self, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] logvoa_core::Error),
    #[error("bad module argument {arg:?}: {reason}")]
    Arg { arg: String, reason: String },
    #[error("built-in module {0:?} needs the built-in Heisenberg algebra, drop --voa or pass a module file")]
    NeedsHeisenberg(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModuleArg {
    Fock(Scalar),
    LogFock(Scalar),
    File(PathBuf),
}

impl FromStr for ModuleArg {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let charge = |t: &str| {
            t.parse::<Scalar>().map_err(|e| CliError::Arg {
                arg: s.into(),
                reason: e.to_string(),
            })
        };
        if let Some(t) = s.strip_prefix("fock:") {
            Ok(ModuleArg::Fock(charge(t)?))
        } else if let Some(t) = s.strip_prefix("logfock:") {
            Ok(ModuleArg::LogFock(charge(t)?))
        } else if s.is_empty() {
            Err(CliError::Arg {
                arg: s.into(),
                reason: "empty".into(),
            })
        } else {
            Ok(ModuleArg::File(s.into()))
        }
    }
}

impl fmt::Display for ModuleArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleArg::Fock(c) => write!(f, "fock:{c}"),
            ModuleArg::LogFock(c) => write!(f, "logfock:{c}"),
            ModuleArg::File(p) => write!(f, "{}", p.display()),
        }
    }
}

/// The algebra every module of a run is built over.
pub struct Algebra {
    voa: Arc<TruncatedVoa>,
    heisenberg: Option<Heisenberg>,
}

impl Algebra {
    pub fn heisenberg(l_max: usize) -> Result<Self, CliError> {
        let h = Heisenberg::new(l_max)?;
        Ok(Algebra {
            voa: h.voa().clone(),
            heisenberg: Some(h),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        Ok(Algebra {
            voa: Arc::new(format::load_voa(path)?),
            heisenberg: None,
        })
    }

    pub fn voa(&self) -> &Arc<TruncatedVoa> {
        &self.voa
    }

    /// Builds a module; built-in kinds are cut off at level `l_mod`.
    pub fn module(&self, arg: &ModuleArg, l_mod: usize) -> Result<LogModule, CliError> {
        let builtin = |f: fn(&Heisenberg, &Scalar, usize) -> logvoa_core::Result<LogModule>, c: &Scalar| {
            let h = self
                .heisenberg
                .as_ref()
                .ok_or_else(|| CliError::NeedsHeisenberg(arg.to_string()))?;
            Ok(f(h, c, l_mod)?)
        };
        match arg {
            ModuleArg::Fock(c) => builtin(Heisenberg::fock_module, c),
            ModuleArg::LogFock(c) => builtin(Heisenberg::log_fock_module, c),
            ModuleArg::File(p) => Ok(format::load_module(p, self.voa.clone())?),
        }
    }

    pub fn triple(&self, args: &[ModuleArg; 3], l_mod: usize) -> Result<Triple, CliError> {
        let [a, b, c] = [&args[0], &args[1], &args[2]].map(|s| self.module(s, l_mod).map(Arc::new));
        Ok(Triple::new(a?, b?, c?)?)
    }
}
