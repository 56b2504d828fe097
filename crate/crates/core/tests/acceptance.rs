//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line; the process exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use tempo_stego::audio::{concat, slice, PcmBuffer};
use tempo_stego::bits::{parse_bitstring, Bit, BitString};
use tempo_stego::codec::{
    capacity, classify_slice, decode, decode_with, encode, Classification, DecodeOptions, Direction,
    StegoParams, Undecidable,
};
use tempo_stego::harness::{generate_click_track, perturb, split_on_silence, Perturbation};
use tempo_stego::stretch::{stretch_tempo, StretchConfig};
use tempo_stego::tempo::{estimate_tempo, TempoCandidates, TempoConfig};
use tempo_stego::Error;

const ROW0: &str = "1 1 0 1 1 0 1 1 1 1 0 0 1 1 1 1 0 0 1 1 1";
const SR: u32 = 44100;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn clicks(bpm: f64, seconds: f64) -> PcmBuffer {
    generate_click_track(bpm, seconds, SR).unwrap()
}

fn zero_ber_round_trip() -> Outcome {
    let params = StegoParams::default();
    let message = parse_bitstring(ROW0).unwrap().prefix(20);
    let started = Instant::now();
    let results: Vec<(f64, BitString)> = [90.0, 110.0, 120.0, 128.0, 140.0, 174.0]
        .into_par_iter()
        .map(|bpm| {
            let stego = encode(&clicks(bpm, 240.0), &message, &params).unwrap();
            (bpm, decode(&stego, &params, Some(message.len())).unwrap().bits)
        })
        .collect();
    let elapsed = started.elapsed().as_secs_f64();
    let bad: Vec<String> = results
        .iter()
        .filter(|(_, got)| *got != message)
        .map(|(bpm, got)| format!("{bpm} BPM -> {got}"))
        .collect();
    check(
        bad.is_empty() && elapsed <= 120.0,
        format!("6 tracks x 20 bits, mismatches {bad:?}, {elapsed:.1} s (budget 120 s)"),
    )
}

fn capacity_ledger() -> Outcome {
    let params = StegoParams::default();
    let table = [(194.0, 17), (222.0, 20), (171.0, 15), (143.0, 12), (357.0, 33)];
    let got: Vec<(f64, usize)> = table.iter().map(|&(d, _)| (d, capacity(d, &params))).collect();
    let ok = table.iter().zip(&got).all(|(want, got)| want.1 == got.1) && got[4].1 >= 21;
    check(ok, format!("{got:?}"))
}

fn fft_peak_hz(buf: &PcmBuffer) -> f64 {
    let size = 1 << 20;
    let mut data: Vec<Complex<f64>> = buf
        .samples()
        .iter()
        .take(size)
        .map(|&s| Complex::new(f64::from(s), 0.0))
        .collect();
    data.resize(size, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(size).process(&mut data);
    let (bin, _) = data[..size / 2]
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .unwrap();
    bin as f64 * f64::from(buf.sample_rate()) / size as f64
}

fn stretch_length_and_pitch() -> Outcome {
    let cfg = StretchConfig::default();
    let input = clicks(120.0, 60.0);
    let n = input.len() as f64;
    let mut worst: f64 = 0.0;
    for ratio in [0.99, 1.00, 1.01] {
        let out = stretch_tempo(&input, ratio, &cfg).unwrap();
        worst = worst.max((out.len() as f64 * ratio - n).abs() / n);
    }
    let sine = PcmBuffer::new(
        (0..10 * SR as usize)
            .map(|i| (0.5 * (2.0 * PI * 440.0 * i as f64 / f64::from(SR)).sin()) as f32)
            .collect(),
        SR,
    )
    .unwrap();
    let peak = fft_peak_hz(&stretch_tempo(&sine, 1.01, &cfg).unwrap());
    check(
        worst <= 0.005 && (peak - 440.0).abs() <= 2.0,
        format!("max relative length error {worst:.2e} (<= 5e-3), 440 Hz at 1.01 peaks at {peak:.2} Hz"),
    )
}

fn direction_detectability() -> Outcome {
    let params = StegoParams::default();
    let tempo_cfg = TempoConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    let trials: Vec<(f64, Direction)> = (0..100)
        .map(|_| {
            let dir = if rng.gen_bool(0.5) { Direction::Up } else { Direction::Down };
            (rng.gen_range(80.0..180.0), dir)
        })
        .collect();
    let outcomes: Vec<Result<Classification, Undecidable>> = trials
        .par_iter()
        .map(|&(bpm, dir)| {
            let track = clicks(bpm, 20.0);
            let stretched = stretch_tempo(&track, dir.ratio(params.delta), &params.stretch).unwrap();
            let reference = estimate_tempo(&slice(&track, 0.5, 9.5).unwrap(), &tempo_cfg).unwrap();
            let sample = estimate_tempo(&slice(&stretched, 0.5, 9.5).unwrap(), &tempo_cfg).unwrap();
            classify_slice(&reference, &sample, &params)
        })
        .collect();
    let mut correct = 0;
    let mut confident_wrong = 0;
    let mut undecided = 0;
    for ((_, dir), out) in trials.iter().zip(&outcomes) {
        match out {
            Ok(c) if c.direction == *dir => correct += 1,
            Ok(c) if c.confidence > 0.5 => confident_wrong += 1,
            Ok(_) => {}
            Err(_) => undecided += 1,
        }
    }
    check(
        correct >= 99 && confident_wrong == 0,
        format!("{correct}/100 correct, {confident_wrong} wrong above confidence 0.5, {undecided} undecidable"),
    )
}

fn silent_reference_guard() -> Outcome {
    let params = StegoParams::default();
    let song = clicks(120.0, 115.0);
    let quiet = concat(&[PcmBuffer::silence(5.0, SR).unwrap(), song.clone()]).unwrap();
    let refused_encode = matches!(
        encode(&quiet, &parse_bitstring("1 0").unwrap(), &params),
        Err(Error::ReferenceSilent { .. })
    );
    let refused_decode = matches!(decode(&quiet, &params, None), Err(Error::ReferenceSilent { .. }));

    let message = parse_bitstring(ROW0).unwrap().prefix(capacity(song.duration_s(), &params));
    let stego = encode(&song, &message, &params).unwrap();
    let reference = estimate_tempo(&slice(&stego, 0.5, 9.5).unwrap(), &params.tempo)
        .unwrap()
        .scaled(1.0 + params.delta);
    let opts = DecodeOptions {
        max_bits: Some(message.len()),
        reference_override: Some(reference),
    };
    let got = decode_with(&stego, &params, &opts).unwrap().bits;
    let want = message.complement();
    check(
        refused_encode && refused_decode && got == want,
        format!(
            "ReferenceSilent on encode {refused_encode}, on decode {refused_decode}; \
             (1+delta) reference decodes {got}, complement is {want}"
        ),
    )
}

#[derive(Debug, PartialEq)]
enum Verdict {
    Decided(Direction, f64, usize),
    Undecided(Undecidable),
}

/// Straight transcription of the rule: every reference/sample pair, drop
/// pairs whose relative difference exceeds the gate, decide on the sign of
/// the sum.
fn brute_force(reference: &[f64], sample: &[f64], gate_pct: f64) -> Verdict {
    if reference.is_empty() || sample.is_empty() {
        return Verdict::Undecided(Undecidable::NoCandidates);
    }
    let mut sum = 0.0;
    let mut kept = 0;
    for r in reference {
        for s in sample {
            let d = (s - r) / r * 100.0;
            if d.abs() <= gate_pct {
                sum += d;
                kept += 1;
            }
        }
    }
    if kept == 0 {
        Verdict::Undecided(Undecidable::AllDiscarded)
    } else if sum == 0.0 {
        Verdict::Undecided(Undecidable::ZeroSum)
    } else if sum > 0.0 {
        Verdict::Decided(Direction::Up, sum.abs(), kept)
    } else {
        Verdict::Decided(Direction::Down, sum.abs(), kept)
    }
}

fn random_set(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let k = rng.gen_range(0..=5);
    (0..k).map(|_| rng.gen_range(40.0..240.0)).collect()
}

fn classifier_oracle() -> Outcome {
    let params = StegoParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = Vec::new();
    let mut tally = [0usize; 4];
    for trial in 0..1000 {
        let reference = random_set(&mut rng);
        let sample: Vec<f64> = match trial % 4 {
            0 => random_set(&mut rng),
            1 => reference.clone(),
            2 => reference.iter().map(|b| b * rng.gen_range(0.97..1.03)).collect(),
            _ => reference.iter().map(|b| b * [0.5, 2.0, 1.5][rng.gen_range(0..3)]).collect(),
        };
        let want = brute_force(&reference, &sample, params.discard_pct);
        let got = match classify_slice(
            &TempoCandidates::from_bpms(&reference),
            &TempoCandidates::from_bpms(&sample),
            &params,
        ) {
            Ok(c) => Verdict::Decided(c.direction, c.confidence, c.pairs_used),
            Err(u) => Verdict::Undecided(u),
        };
        tally[match &want {
            Verdict::Decided(..) => 0,
            Verdict::Undecided(Undecidable::NoCandidates) => 1,
            Verdict::Undecided(Undecidable::AllDiscarded) => 2,
            Verdict::Undecided(Undecidable::ZeroSum) => 3,
        }] += 1;
        let same = match (&got, &want) {
            (Verdict::Decided(d1, c1, n1), Verdict::Decided(d2, c2, n2)) => {
                d1 == d2 && n1 == n2 && (c1 - c2).abs() <= 1e-9 * c2.max(1.0)
            }
            _ => got == want,
        };
        if !same {
            mismatches.push(trial);
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "1000 sets: {} decided, {} NoCandidates, {} AllDiscarded, {} ZeroSum; mismatching trials {mismatches:?}",
            tally[0], tally[1], tally[2], tally[3]
        ),
    )
}

fn broadcast_pipeline() -> Outcome {
    let params = StegoParams::default();
    let segments = ["1 1 0 1 1 0", "1 1 1 1 0 0 1 1 1", "1 0 0 1 1 1 0 1 1 0 1 0"]
        .map(|s| parse_bitstring(s).unwrap());
    let songs = [(110.0, 95.0), (128.0, 120.0), (96.0, 150.0)];
    let gap = PcmBuffer::silence(3.0, SR).unwrap();
    let encoded: Vec<PcmBuffer> = songs
        .par_iter()
        .zip(segments.par_iter())
        .map(|(&(bpm, dur), seg)| encode(&clicks(bpm, dur), seg, &params).unwrap())
        .collect();
    let stream = concat(&[
        encoded[0].clone(),
        gap.clone(),
        encoded[1].clone(),
        gap,
        encoded[2].clone(),
    ])
    .unwrap();
    let pieces = split_on_silence(&stream, 2.0, -50.0);
    if pieces.len() != 3 {
        return Err(format!("split produced {} segments, expected 3", pieces.len()));
    }
    let decoded: Vec<BitString> = pieces
        .par_iter()
        .zip(segments.par_iter())
        .map(|(p, seg)| decode(p, &params, Some(seg.len())).map(|r| r.bits).unwrap_or_default())
        .collect();
    let errors: usize = decoded
        .iter()
        .zip(&segments)
        .map(|(got, want)| {
            (0..want.len())
                .filter(|&i| got.get(i) != want.get(i) || got.get(i) == Some(Bit::Erasure))
                .count()
        })
        .sum();
    check(errors == 0, format!("3 segments, {errors} bit errors or erasures"))
}

fn scale_invariance() -> Outcome {
    let params = StegoParams::default();
    let message = parse_bitstring(ROW0).unwrap().prefix(10);
    let stego = encode(&clicks(140.0, 130.0), &message, &params).unwrap();
    let base = decode(&stego, &params, None).unwrap().bits;
    let mut detail = format!("unperturbed {base}");
    let mut ok = true;
    for g in [0.5, 0.1] {
        let quieter = perturb(&stego, &Perturbation::Gain(g)).unwrap();
        match decode(&quieter, &params, None) {
            Ok(r) => {
                ok &= r.bits == base;
                detail.push_str(&format!(", gain {g} {}", r.bits));
            }
            Err(e) => {
                ok = false;
                detail.push_str(&format!(", gain {g} failed: {}", e.name()));
            }
        }
    }
    check(ok, detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 zero-BER round trip", zero_ber_round_trip),
        ("2 capacity ledger", capacity_ledger),
        ("3 stretch length law and pitch", stretch_length_and_pitch),
        ("4 direction detectability", direction_detectability),
        ("5 silent-reference guard", silent_reference_guard),
        ("6 classifier oracle", classifier_oracle),
        ("7 broadcast pipeline", broadcast_pipeline),
        ("8 scale invariance", scale_invariance),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
