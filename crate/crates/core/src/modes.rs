//! Expansion modes and the flat column index.
//!
//! Every matrix builder uses the ordering defined here: degree ascending,
//! then `m` ascending, then `mu` ascending. For [`ModeKind::SnfMuPm1`] the
//! whole `s = 1` block (sum combination) precedes the `s = 2` block
//! (difference combination). Degrees start at 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Family of basis functions spanning the sensing-matrix columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    /// All `D^n_{mu m}` with `|mu|, |m| <= n`.
    WignerGeneral,
    /// `Y_n^m`, the `mu = 0` slice.
    SphericalHarmonics,
    /// First-order probe: columns `D_{1m} + D_{-1m}` then `D_{1m} - D_{-1m}`.
    SnfMuPm1,
}

impl ModeKind {
    pub const ALL: [ModeKind; 3] = [
        ModeKind::WignerGeneral,
        ModeKind::SphericalHarmonics,
        ModeKind::SnfMuPm1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModeKind::WignerGeneral => "wigner_general",
            ModeKind::SphericalHarmonics => "spherical_harmonics",
            ModeKind::SnfMuPm1 => "snf_mu_pm1",
        }
    }

    /// Whether matrix entries depend on the polarization angle.
    pub fn uses_chi(self) -> bool {
        !matches!(self, ModeKind::SphericalHarmonics)
    }
}

impl fmt::Display for ModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "wigner_general" | "wigner" | "general" => Ok(ModeKind::WignerGeneral),
            "spherical_harmonics" | "sh" | "harmonics" => Ok(ModeKind::SphericalHarmonics),
            "snf_mu_pm1" | "snf" | "probe" => Ok(ModeKind::SnfMuPm1),
            other => Err(Error::Parse(format!("unknown mode kind '{other}'"))),
        }
    }
}

/// One column of a sensing matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Wigner { n: i32, m: i32, mu: i32 },
    Harmonic { n: i32, m: i32 },
    /// `block` is 1 for the sum combination and 2 for the difference.
    Probe { block: u8, n: i32, m: i32 },
}

impl Mode {
    pub fn degree(&self) -> i32 {
        match *self {
            Mode::Wigner { n, .. } | Mode::Harmonic { n, .. } | Mode::Probe { n, .. } => n,
        }
    }

    pub fn m(&self) -> i32 {
        match *self {
            Mode::Wigner { m, .. } | Mode::Harmonic { m, .. } | Mode::Probe { m, .. } => m,
        }
    }

    /// Integer triple used in the JSON export: `(n, m, mu)`, `(n, m, 0)` or `(n, m, block)`.
    pub fn triple(&self) -> [i32; 3] {
        match *self {
            Mode::Wigner { n, m, mu } => [n, m, mu],
            Mode::Harmonic { n, m } => [n, m, 0],
            Mode::Probe { block, n, m } => [n, m, block as i32],
        }
    }
}

fn check_degree(degree: u32) -> Result<()> {
    if degree < 1 {
        return Err(Error::invalid("maximum degree must be at least 1"));
    }
    Ok(())
}

fn wigner_prefix(n: usize) -> usize {
    // sum_{k=1}^{n} (2k+1)^2
    (4 * n * n * n + 12 * n * n + 11 * n) / 3
}

/// Number of columns for `kind` truncated at `degree`.
pub fn mode_count(kind: ModeKind, degree: u32) -> Result<usize> {
    check_degree(degree)?;
    let n = degree as usize;
    Ok(match kind {
        ModeKind::WignerGeneral => wigner_prefix(n),
        ModeKind::SphericalHarmonics => n * (n + 2),
        ModeKind::SnfMuPm1 => 2 * n * (n + 2),
    })
}

/// Ordered list of modes with an O(1) inverse map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeTable {
    kind: ModeKind,
    degree: u32,
    modes: Vec<Mode>,
}

pub fn mode_table(kind: ModeKind, degree: u32) -> Result<ModeTable> {
    let len = mode_count(kind, degree)?;
    let nmax = degree as i32;
    let mut modes = Vec::with_capacity(len);
    match kind {
        ModeKind::WignerGeneral => {
            for n in 1..=nmax {
                for m in -n..=n {
                    for mu in -n..=n {
                        modes.push(Mode::Wigner { n, m, mu });
                    }
                }
            }
        }
        ModeKind::SphericalHarmonics => {
            for n in 1..=nmax {
                for m in -n..=n {
                    modes.push(Mode::Harmonic { n, m });
                }
            }
        }
        ModeKind::SnfMuPm1 => {
            for block in 1..=2u8 {
                for n in 1..=nmax {
                    for m in -n..=n {
                        modes.push(Mode::Probe { block, n, m });
                    }
                }
            }
        }
    }
    debug_assert_eq!(modes.len(), len);
    Ok(ModeTable { kind, degree, modes })
}

impl ModeTable {
    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn get(&self, q: usize) -> Option<Mode> {
        self.modes.get(q).copied()
    }

    /// Flat index of `mode`, or `None` if it is not part of this table.
    pub fn index_of(&self, mode: Mode) -> Option<usize> {
        let nmax = self.degree as i32;
        let in_range = |n: i32, m: i32| (1..=nmax).contains(&n) && m.abs() <= n;
        match (self.kind, mode) {
            (ModeKind::WignerGeneral, Mode::Wigner { n, m, mu }) if in_range(n, m) && mu.abs() <= n => {
                let width = (2 * n + 1) as usize;
                Some(wigner_prefix(n as usize - 1) + (m + n) as usize * width + (mu + n) as usize)
            }
            (ModeKind::SphericalHarmonics, Mode::Harmonic { n, m }) if in_range(n, m) => {
                Some((n * n - 1 + m + n) as usize)
            }
            (ModeKind::SnfMuPm1, Mode::Probe { block, n, m }) if in_range(n, m) && (1..=2).contains(&block) => {
                let half = (nmax * (nmax + 2)) as usize;
                Some((block as usize - 1) * half + (n * n - 1 + m + n) as usize)
            }
            _ => None,
        }
    }

    /// Serializable form: header plus integer triples.
    pub fn to_export(&self) -> ModeTableExport {
        ModeTableExport {
            kind: self.kind,
            degree: self.degree,
            third: match self.kind {
                ModeKind::WignerGeneral => "mu",
                ModeKind::SphericalHarmonics => "none",
                ModeKind::SnfMuPm1 => "block",
            }
            .to_string(),
            entries: self.modes.iter().map(Mode::triple).collect(),
        }
    }
}

/// JSON layout of a mode table; `third` names the meaning of the last
/// element of each triple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTableExport {
    pub kind: ModeKind,
    pub degree: u32,
    pub third: String,
    pub entries: Vec<[i32; 3]>,
}

/// Truncation rule `N = ceil(k r_min) + N0`.
pub fn truncation_degree(wavenumber: f64, r_min: f64, n0: u32) -> Result<u32> {
    if !(wavenumber > 0.0 && r_min > 0.0) || !wavenumber.is_finite() || !r_min.is_finite() {
        return Err(Error::invalid("wavenumber and r_min must be positive and finite"));
    }
    Ok((wavenumber * r_min).ceil() as u32 + n0)
}
