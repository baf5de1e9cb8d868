//! Scenario files: TOML with one table per block, atomic units throughout.
//!
//! ```toml
//! [grid]
//! a = -1.0
//! b = 1.0
//! n_points = 128
//! closure = "open"            # or "endpoint_inclusive"
//!
//! [time]
//! t0 = 0.0
//! t_final = 0.5
//! n_steps = 1000
//! keep_every = 1
//!
//! [initial_state]
//! preset = "bump_ring"        # "plane_wave" (with k), "custom_table" (with path)
//!
//! [potential]
//! preset = "sin2_sin"         # "zero", "custom_table" (with path)
//!
//! [inversion]                 # all keys optional
//! alpha = 10.0
//! p = 1
//! max_iterations = 1000
//! tolerance = 1e-10
//! v0 = "zero"                 # or "true"
//! refine = 1
//! target = "density.csv"      # otherwise generated from [potential]
//! mode_cutoff = 4             # off unless set
//!
//! [spectrum]
//! n_eigs = 5
//! stride = 1
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Relative paths resolve against the scenario file's directory.

use std::path::{Path, PathBuf};

use densinv_core::{Grid1D, TimeGrid};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{config_err, CliResult};

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClosureSpec {
    #[default]
    Open,
    EndpointInclusive,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub a: f64,
    pub b: f64,
    pub n_points: usize,
    #[serde(default)]
    pub closure: ClosureSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    #[serde(default)]
    pub t0: f64,
    pub t_final: f64,
    pub n_steps: usize,
    #[serde(default = "one")]
    pub keep_every: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPreset {
    BumpRing,
    PlaneWave { k: f64 },
    /// First row of a density table; `psi0 = sqrt(n)`.
    CustomTable { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialPreset {
    Zero,
    Sin2Sin,
    CustomTable { path: PathBuf },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "snake_case")]
pub enum StartGuess {
    #[default]
    Zero,
    True,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InversionSpec {
    pub alpha: f64,
    pub p: u32,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub v0: StartGuess,
    pub refine: usize,
    pub target: Option<PathBuf>,
    pub mode_cutoff: Option<usize>,
}

impl Default for InversionSpec {
    fn default() -> Self {
        use densinv_core::fixedpoint as fp;
        Self {
            alpha: fp::DEFAULT_ALPHA,
            p: 1,
            max_iterations: fp::DEFAULT_MAX_ITERATIONS,
            tolerance: fp::DEFAULT_TOLERANCE,
            v0: StartGuess::Zero,
            refine: 1,
            target: None,
            mode_cutoff: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSpec {
    pub n_eigs: usize,
    pub stride: usize,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        Self { n_eigs: 5, stride: 1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub initial_state: InitialPreset,
    pub potential: PotentialPreset,
    #[serde(default)]
    pub inversion: InversionSpec,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Hex sha256 of the scenario file bytes.
    #[serde(skip)]
    pub hash: String,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn load(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut s = Self::parse(text)?;
        s.hash = format!("{:x}", Sha256::digest(&bytes));
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let s: Self = toml::from_str(text).map_err(config_err)?;
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> CliResult<()> {
        self.grid()?;
        self.times()?;
        if self.time.keep_every == 0 || self.time.n_steps % self.time.keep_every != 0 {
            return Err(config_err(format!(
                "keep_every = {} must divide n_steps = {}",
                self.time.keep_every, self.time.n_steps
            )));
        }
        let inv = &self.inversion;
        if !(inv.alpha >= 0.0) || !(inv.tolerance > 0.0) || inv.refine == 0 || !matches!(inv.p, 1 | 2) {
            return Err(config_err("inversion needs alpha >= 0, tolerance > 0, refine >= 1, p in {1, 2}"));
        }
        if self.spectrum.n_eigs < 3 || self.spectrum.stride == 0 {
            return Err(config_err("spectrum needs n_eigs >= 3 and stride >= 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> CliResult<Grid1D> {
        let g = &self.grid;
        match g.closure {
            ClosureSpec::Open => Grid1D::new(g.a, g.b, g.n_points),
            ClosureSpec::EndpointInclusive => Grid1D::endpoint_inclusive(g.a, g.b, g.n_points),
        }
        .map_err(config_err)
    }

    pub fn times(&self) -> CliResult<TimeGrid> {
        TimeGrid::new(self.time.t0, self.time.t_final, self.time.n_steps).map_err(config_err)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        match override_dir {
            Some(d) => d.to_path_buf(),
            None => self.resolve(&self.output.dir),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = r#"
[grid]
a = -1.0
b = 1.0
n_points = 64

[time]
t_final = 0.1
n_steps = 200

[initial_state]
preset = "bump_ring"

[potential]
preset = "sin2_sin"
"#;

    #[test]
    fn defaults_fill_in() {
        let s = Scenario::parse(PAPER).unwrap();
        assert_eq!(s.grid.closure, ClosureSpec::Open);
        assert_eq!(s.time.keep_every, 1);
        assert_eq!(s.inversion.alpha, 10.0);
        assert_eq!(s.inversion.v0, StartGuess::Zero);
        assert_eq!(s.spectrum.n_eigs, 5);
        assert!(s.inversion.mode_cutoff.is_none());
    }

    #[test]
    fn presets_with_parameters() {
        let text = PAPER.replace("preset = \"bump_ring\"", "preset = \"plane_wave\"\nk = 3.14");
        match Scenario::parse(&text).unwrap().initial_state {
            InitialPreset::PlaneWave { k } => assert_eq!(k, 3.14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Scenario::parse(&PAPER.replace("bump_ring", "gaussian")).is_err());
        assert!(Scenario::parse(&PAPER.replace("n_points = 64", "n_points = 4")).is_err());
        assert!(Scenario::parse(&format!("{PAPER}\n[spectrum]\nn_eigs = 2\n")).is_err());
        assert!(Scenario::parse(&format!("{PAPER}\n[inversion]\np = 3\n")).is_err());
        assert!(Scenario::parse(&format!("{PAPER}\n[extra]\nx = 1\n")).is_err());
        let e = Scenario::parse(&PAPER.replace("n_steps = 200", "n_steps = 200\nkeep_every = 3")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
