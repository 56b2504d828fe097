use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tempo_stego::audio::{read_wav, slice, write_wav};
use tempo_stego::bits::{hex_to_bits, parse_bitstring, text_to_bits, BitString};
use tempo_stego::codec::{self, capacity, BoundaryMode, StegoParams};
use tempo_stego::harness::{self, Carrier, Perturbation};
use tempo_stego::tempo::estimate_tempo;

#[derive(Parser, Debug)]
#[command(author, version, about = "Hide bit strings in constant-tempo music", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hide a payload in a WAV carrier
    Encode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        output: PathBuf,
        #[command(flatten)]
        payload: Payload,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Recover the hidden bits from a steganogram
    Decode {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        max_bits: Option<usize>,
        /// Write the full decode report (JSON) here
        #[arg(long)]
        report: Option<PathBuf>,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Print how many bits a carrier can hold
    Capacity {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Print tempo candidates as "bpm strength" lines
    Tempo {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
    },
    /// Encode, optionally degrade, decode and score a set of carriers
    Evaluate {
        /// Directory of WAV carriers
        #[arg(long, conflicts_with = "generate", required_unless_present = "generate")]
        carriers: Option<PathBuf>,
        /// Generated click tracks, e.g. "120:194,128:222" (bpm:seconds)
        #[arg(long)]
        generate: Option<String>,
        #[arg(long)]
        bits: String,
        /// gain:<factor>, noise:<snr_db> or resample:<rate>
        #[arg(long)]
        perturb: Option<String>,
        #[arg(long, default_value_t = 44100)]
        sample_rate: u32,
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Write a click-track carrier
    MakeCarrier {
        #[arg(long)]
        bpm: f64,
        #[arg(long)]
        duration: f64,
        #[arg(long = "out")]
        output: PathBuf,
        #[arg(long, default_value_t = 44100)]
        sample_rate: u32,
    },
    /// Split a recorded stream into files at silent gaps
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        min_silence: f64,
        #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
        threshold_dbfs: f64,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Payload {
    #[arg(long)]
    text: Option<String>,
    #[arg(long)]
    bits: Option<String>,
    #[arg(long)]
    hex: Option<String>,
}

impl Payload {
    fn to_bits(&self) -> Result<BitString> {
        Ok(match (&self.text, &self.bits, &self.hex) {
            (Some(t), _, _) => text_to_bits(t),
            (_, Some(b), _) => parse_bitstring(b)?,
            (_, _, Some(h)) => hex_to_bits(h)?,
            _ => bail!("no payload given"),
        })
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Tracked,
    Static,
}

#[derive(Args, Debug)]
struct ChannelArgs {
    /// Slice length in seconds
    #[arg(long, default_value_t = 10.0)]
    phi: f64,
    /// Relative tempo offset per slice
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Mode::Tracked)]
    mode: Mode,
    /// Resolve undecidable slices instead of reporting erasures
    #[arg(long)]
    force_decide: bool,
}

impl ChannelArgs {
    fn params(&self) -> Result<StegoParams> {
        let params = StegoParams {
            phi_s: self.phi,
            delta: self.delta,
            boundary_mode: match self.mode {
                Mode::Tracked => BoundaryMode::Tracked,
                Mode::Static => BoundaryMode::Static,
            },
            force_decide: self.force_decide,
            ..StegoParams::default()
        };
        params.validate()?;
        Ok(params)
    }
}

fn parse_perturbation(spec: &str) -> Result<Perturbation> {
    let (kind, value) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("perturbation must look like kind:value, got {spec:?}"))?;
    Ok(match kind {
        "gain" => Perturbation::Gain(value.parse()?),
        "noise" => Perturbation::noise(value.parse()?),
        "resample" => Perturbation::ResampleRoundTrip {
            intermediate_rate: value.parse()?,
        },
        other => bail!("unknown perturbation {other:?}"),
    })
}

fn parse_generate(spec: &str, sample_rate: u32) -> Result<Vec<Carrier>> {
    spec.split(',')
        .map(|item| {
            let (bpm, dur) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("expected bpm:seconds, got {item:?}"))?;
            let (bpm, dur): (f64, f64) = (bpm.parse()?, dur.parse()?);
            let audio = harness::generate_click_track(bpm, dur, sample_rate)?;
            Ok(Carrier::new(format!("clicks-{bpm}bpm-{dur}s"), audio))
        })
        .collect()
}

fn load_dir(dir: &Path) -> Result<Vec<Carrier>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let id = p.file_name().unwrap_or_default().to_string_lossy().into_owned();
            Ok(Carrier::new(id, read_wav(&p)?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode {
            input,
            output,
            payload,
            channel,
        } => {
            let params = channel.params()?;
            let carrier = read_wav(&input)?;
            let message = payload.to_bits()?;
            let stego = codec::encode(&carrier, &message, &params)?;
            let summary = write_wav(&stego, &output)?;
            if summary.clipping_warning() {
                eprintln!("warning: ClippingWarning: {} samples saturated", summary.clipped);
            }
            println!("{message}");
        }
        Command::Decode {
            input,
            max_bits,
            report,
            channel,
        } => {
            let params = channel.params()?;
            let stego = read_wav(&input)?;
            let decoded = codec::decode(&stego, &params, max_bits)?;
            if let Some(path) = report {
                std::fs::write(&path, decoded.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            println!("{}", decoded.bits);
        }
        Command::Capacity { input, channel } => {
            let params = channel.params()?;
            let carrier = read_wav(&input)?;
            println!("{}", capacity(carrier.duration_s(), &params));
        }
        Command::Tempo { input, from, to } => {
            let audio = read_wav(&input)?;
            let window = match (from, to) {
                (None, None) => audio,
                (f, t) => slice(&audio, f.unwrap_or(0.0), t.unwrap_or(audio.duration_s()))?,
            };
            let cands = estimate_tempo(&window, &StegoParams::default().tempo)?;
            println!("{}", cands.to_lines());
        }
        Command::Evaluate {
            carriers,
            generate,
            bits,
            perturb,
            sample_rate,
            channel,
        } => {
            let params = channel.params()?;
            let carriers = match (carriers, generate) {
                (Some(dir), _) => load_dir(&dir)?,
                (None, Some(spec)) => parse_generate(&spec, sample_rate)?,
                (None, None) => bail!("either --carriers or --generate is required"),
            };
            let message = parse_bitstring(&bits)?;
            let perturbation = perturb.as_deref().map(parse_perturbation).transpose()?;
            let result = harness::evaluate(&carriers, &message, &params, perturbation.as_ref())?;
            println!("{}", result.render_table());
        }
        Command::MakeCarrier {
            bpm,
            duration,
            output,
            sample_rate,
        } => {
            let audio = harness::generate_click_track(bpm, duration, sample_rate)?;
            write_wav(&audio, &output)?;
        }
        Command::Split {
            input,
            out_dir,
            min_silence,
            threshold_dbfs,
        } => {
            let stream = read_wav(&input)?;
            std::fs::create_dir_all(&out_dir)?;
            let parts = harness::split_on_silence(&stream, min_silence, threshold_dbfs);
            for (i, part) in parts.iter().enumerate() {
                let path = out_dir.join(format!("segment_{:03}.wav", i + 1));
                write_wav(part, &path)?;
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

/// Machine-readable name for the failure, used as the first token on stderr.
fn error_name(err: &anyhow::Error) -> &'static str {
    if let Some(e) = err.downcast_ref::<tempo_stego::Error>() {
        return e.name();
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return "IoError";
    }
    "UsageError"
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}: {err:#}", error_name(&err));
            ExitCode::from(2)
        }
    }
}

#[test]
fn verify_args() {
    use clap::CommandFactory;
    Cli::command().debug_assert()
}

#[test]
fn perturbation_specs() {
    assert_eq!(parse_perturbation("gain:0.5").unwrap(), Perturbation::Gain(0.5));
    assert_eq!(
        parse_perturbation("resample:22050").unwrap(),
        Perturbation::ResampleRoundTrip {
            intermediate_rate: 22050
        }
    );
    assert!(parse_perturbation("echo:1").is_err());
    assert!(parse_perturbation("gain").is_err());
}
