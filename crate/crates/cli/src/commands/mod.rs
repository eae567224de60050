pub mod coherence;
pub mod farfield;
pub mod optimize;
pub mod phase;
pub mod recover;
pub mod sample;

use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use crate::config::Overrides;

/// Flag overrides plus the global output directory.
fn overrides<S: Serialize>(flags: &S, out_dir: Option<PathBuf>) -> Result<Overrides> {
    let mut o = Overrides::from_flags(flags)?;
    o.set("out_dir", out_dir.map(|p| p.to_string_lossy().into_owned()));
    Ok(o)
}

/// `[bp]` section; unset keys keep the solver defaults.
#[derive(Clone, Copy, Debug, Default, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BpSection {
    pub tol_primal: Option<f64>,
    pub tol_dual: Option<f64>,
    pub max_iters: Option<usize>,
    pub rho: Option<f64>,
}

impl BpSection {
    pub fn options(&self) -> snfcs::BpOptions {
        let d = snfcs::BpOptions::default();
        snfcs::BpOptions {
            tol_primal: self.tol_primal.unwrap_or(d.tol_primal),
            tol_dual: self.tol_dual.unwrap_or(d.tol_dual),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            rho: self.rho.unwrap_or(d.rho),
        }
    }
}
