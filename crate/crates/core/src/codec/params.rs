use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stretch::StretchConfig;
use crate::tempo::{TempoConfig, MIN_ESTIMATE_SECONDS};

/// Tempo offset direction of a data slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    /// Tempo multiplier for an offset of `delta` in this direction.
    pub fn ratio(self, delta: f64) -> f64 {
        match self {
            Direction::Up => 1.0 + delta,
            Direction::Down => 1.0 - delta,
        }
    }
}

/// How the decoder places analysis windows after the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryMode {
    /// Slice `i` starts at `i * phi`, ignoring the length change that encoding
    /// introduced. Drift accumulates with runs of equal bits.
    Static,
    /// Each decided slice advances the next boundary by the stretched slice
    /// length implied by the decision.
    Tracked,
}

/// Channel geometry and classifier settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StegoParams {
    /// Slice length in seconds.
    pub phi_s: f64,
    /// Relative tempo offset per slice (0.01 = ±1%).
    pub delta: f64,
    /// Fraction of `phi_s` dropped from each edge of a slice before analysis.
    pub trim_frac: f64,
    /// Pairwise tempo differences larger than this (in percent) are ignored.
    pub discard_pct: f64,
    pub bit_one_direction: Direction,
    pub boundary_mode: BoundaryMode,
    /// Resolve undecidable slices as `Down` instead of emitting an erasure.
    pub force_decide: bool,
    pub tempo: TempoConfig,
    pub stretch: StretchConfig,
}

impl Default for StegoParams {
    fn default() -> Self {
        Self {
            phi_s: 10.0,
            delta: 0.01,
            trim_frac: 0.05,
            discard_pct: 4.0,
            bit_one_direction: Direction::Up,
            boundary_mode: BoundaryMode::Tracked,
            force_decide: false,
            tempo: TempoConfig::default(),
            stretch: StretchConfig::default(),
        }
    }
}

impl StegoParams {
    pub fn with_mode(mut self, mode: BoundaryMode) -> Self {
        self.boundary_mode = mode;
        self
    }

    pub fn with_phi(mut self, phi_s: f64) -> Self {
        self.phi_s = phi_s;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.phi_s >= 10.0) {
            return fail(format!("phi_s = {} must be at least 10 s", self.phi_s));
        }
        if !(self.delta > 0.0 && self.delta <= 0.03) {
            return fail(format!("delta = {} must lie in (0, 0.03]", self.delta));
        }
        if !(self.trim_frac >= 0.0 && self.trim_frac < 0.5) {
            return fail(format!("trim_frac = {} must lie in [0, 0.5)", self.trim_frac));
        }
        if !(self.discard_pct > 0.0) {
            return fail(format!("discard_pct = {} must be positive", self.discard_pct));
        }
        if self.analysis_window_s() + 1e-9 < MIN_ESTIMATE_SECONDS {
            return fail(format!(
                "trimmed slice of {:.3} s is shorter than the {MIN_ESTIMATE_SECONDS} s analysis minimum",
                self.analysis_window_s()
            ));
        }
        self.tempo.validate()?;
        self.stretch.validate()
    }

    /// Seconds of each slice left after both edge trims.
    pub fn analysis_window_s(&self) -> f64 {
        self.phi_s * (1.0 - 2.0 * self.trim_frac)
    }

    pub fn trim_s(&self) -> f64 {
        self.phi_s * self.trim_frac
    }

    pub fn direction_for_bit(&self, one: bool) -> Direction {
        if one {
            self.bit_one_direction
        } else {
            self.bit_one_direction.opposite()
        }
    }
}
