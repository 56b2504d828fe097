//! Encode, optionally degrade, decode and score a batch of carriers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::perturb::{perturb, Perturbation};
use crate::audio::PcmBuffer;
use crate::bits::{Bit, BitString};
use crate::codec::{capacity, decode, encode, StegoParams};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Carrier {
    pub id: String,
    pub audio: PcmBuffer,
}

impl Carrier {
    pub fn new(id: impl Into<String>, audio: PcmBuffer) -> Self {
        Self {
            id: id.into(),
            audio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileResult {
    pub id: String,
    pub duration_s: f64,
    /// Message bits this carrier was asked to hold.
    pub expected: BitString,
    pub decoded: BitString,
    pub errors: usize,
    pub erasures: usize,
    /// Error name if encoding or decoding refused the carrier.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub compared: usize,
    pub errors: usize,
    pub erasures: usize,
    pub failed_files: usize,
}

impl Totals {
    /// `None` when nothing was compared.
    pub fn ber(&self) -> Option<f64> {
        (self.compared > 0).then(|| self.errors as f64 / self.compared as f64)
    }

    pub fn erasure_rate(&self) -> Option<f64> {
        (self.compared > 0).then(|| self.erasures as f64 / self.compared as f64)
    }

    pub fn ber_display(&self) -> String {
        match self.ber() {
            Some(b) => format!("{}/{} = {b:.4}", self.errors, self.compared),
            None => "0/0".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub message: BitString,
    pub per_file: Vec<FileResult>,
    pub totals: Totals,
    pub params_used: StegoParams,
}

/// Counts `(errors, erasures)` of `decoded` against `expected`, position by
/// position. Missing decoded positions count as erasures.
pub fn score(expected: &BitString, decoded: &BitString) -> (usize, usize) {
    let mut errors = 0;
    let mut erasures = 0;
    for (i, want) in expected.iter().enumerate() {
        match decoded.get(i) {
            None | Some(Bit::Erasure) => erasures += 1,
            Some(got) if got != want => errors += 1,
            Some(_) => {}
        }
    }
    (errors, erasures)
}

/// Every carrier gets the prefix of `message` that fits its own capacity.
pub fn evaluate(
    carriers: &[Carrier],
    message: &BitString,
    params: &StegoParams,
    perturbation: Option<&Perturbation>,
) -> Result<EvalResult> {
    params.validate()?;
    let per_file: Vec<FileResult> = carriers
        .par_iter()
        .map(|c| evaluate_one(c, message, params, perturbation))
        .collect();

    let mut totals = Totals {
        compared: 0,
        errors: 0,
        erasures: 0,
        failed_files: 0,
    };
    for f in &per_file {
        if f.failure.is_some() {
            totals.failed_files += 1;
            continue;
        }
        totals.compared += f.expected.len();
        totals.errors += f.errors;
        totals.erasures += f.erasures;
    }
    Ok(EvalResult {
        message: message.clone(),
        per_file,
        totals,
        params_used: params.clone(),
    })
}

fn evaluate_one(
    carrier: &Carrier,
    message: &BitString,
    params: &StegoParams,
    perturbation: Option<&Perturbation>,
) -> FileResult {
    let duration_s = carrier.audio.duration_s();
    let expected = message.prefix(capacity(duration_s, params));
    let outcome = (|| {
        let stego = encode(&carrier.audio, &expected, params)?;
        let received = match perturbation {
            Some(p) => perturb(&stego, p)?,
            None => stego,
        };
        decode(&received, params, Some(expected.len()))
    })();
    match outcome {
        Ok(report) => {
            let (errors, erasures) = score(&expected, &report.bits);
            FileResult {
                id: carrier.id.clone(),
                duration_s,
                expected,
                decoded: report.bits,
                errors,
                erasures,
                failure: None,
            }
        }
        Err(e) => {
            log::warn!("{}: {e}", carrier.id);
            FileResult {
                id: carrier.id.clone(),
                duration_s,
                expected,
                decoded: BitString::new(),
                errors: 0,
                erasures: 0,
                failure: Some(e.name().to_string()),
            }
        }
    }
}

fn mm_ss(seconds: f64) -> String {
    let s = seconds.round() as u64;
    format!("{}:{:02}", s / 60, s % 60)
}

impl EvalResult {
    /// Plain-text results table: the original bit string as row 0, then one
    /// row per carrier with `x` marking positions it could not hold.
    pub fn render_table(&self) -> String {
        let width = self.message.len();
        let mut rows = vec![(
            "0".to_string(),
            "original".to_string(),
            mm_ss(width as f64 * self.params_used.phi_s),
            self.message.to_string(),
            "X".to_string(),
        )];
        for (i, f) in self.per_file.iter().enumerate() {
            let (bits, errs) = match &f.failure {
                Some(name) => (format!("failed: {name}"), "-".to_string()),
                None => (f.decoded.to_padded_string(width), f.errors.to_string()),
            };
            rows.push(((i + 1).to_string(), f.id.clone(), mm_ss(f.duration_s), bits, errs));
        }
        let w_id = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max(7);
        let w_bits = rows.iter().map(|r| r.3.len()).max().unwrap_or(0).max(18);
        let mut out = format!(
            "{:>3} | {:<w_id$} | {:>8} | {:<w_bits$} | #Errors\n",
            "#", "carrier", "duration", "decoded bit string"
        );
        for (n, id, dur, bits, errs) in rows {
            out.push_str(&format!("{n:>3} | {id:<w_id$} | {dur:>8} | {bits:<w_bits$} | {errs}\n"));
        }
        out.push_str(&format!("BER: {}", self.totals.ber_display()));
        out
    }
}
