//! Synthetic carriers, channel perturbations, error-rate evaluation and
//! silence-based stream splitting.

mod eval;
pub mod generate;
mod perturb;
mod split;

pub use eval::{evaluate, score, Carrier, EvalResult, FileResult, Totals};
pub use generate::{generate_click_track, ClickTrack};
pub use perturb::{perturb, Perturbation};
pub use split::{split_on_silence, SilenceSplit};
