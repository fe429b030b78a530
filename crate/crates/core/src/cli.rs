//! `hbci` command line: simulate → decode → evaluate, plus diagnostics.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decoder::{Dispatcher, LineProtocolSink};
use crate::erp::{baseline_correct, extract_epoch, EpochLayout, P300Channel, Threshold, TimedValue};
use crate::eval::{self, aggregate, itr_bits_per_selection, itr_bpm, score, table2};
use crate::filters::{design_bandpass, design_lowpass, design_notch, FilterDesign, FilterState, DEFAULT_NOTCH_Q};
use crate::io::{self, DataError, RecordingReader, RunManifest};
use crate::pipeline::{DecoderOptions, FrontEnd, StreamingDecoder, SSVEP_CHANNELS};
use crate::spectral::{welch_psd, Window, DEFAULT_OVERLAP, DEFAULT_SEGMENT_LEN};
use crate::stimulus::{self, SynthConfig};
use crate::types::{Channel, Command, ConfigError, MarkerCode, SampleFrame, StimulusConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "hbci", version, about = "Hybrid SSVEP + P300 BCI: simulate, decode and evaluate")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Print biquad coefficients and a 0.1 Hz magnitude table for one filter.
    FilterDesign(FilterDesignArgs),
    /// Welch PSD of a recording channel.
    Psd(PsdArgs),
    /// Averaged marker-locked epoch on the P300 branch.
    Erp(ErpArgs),
    /// Generate a synthetic session: recording, markers and ground truth.
    Simulate(SimulateArgs),
    /// Replay a recording through the streaming decoder.
    Decode(DecodeArgs),
    /// Accuracy report, bundled study fixture, or ITR.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FilterKind {
    Bandpass,
    Lowpass,
    Notch,
}

#[derive(Debug, Args)]
struct FilterDesignArgs {
    kind: FilterKind,
    #[arg(long)]
    fs: f64,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[arg(long)]
    freq: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_NOTCH_Q)]
    q: f64,
    /// Write sos.csv, response.csv and manifest.json here instead of stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConfigArg {
    /// Stimulus configuration (TOML). Defaults to the built-in LED table.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> CliResult<StimulusConfig> {
        Ok(match &self.config {
            Some(p) => StimulusConfig::load(p)?,
            None => StimulusConfig::default(),
        })
    }
}

#[derive(Debug, Args)]
struct PsdArgs {
    #[arg(long)]
    recording: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// `ssvep` (mean of PO7, PO8, Oz) or a channel name.
    #[arg(long, default_value = "ssvep")]
    channel: String,
    #[arg(long)]
    start_ms: Option<f64>,
    #[arg(long)]
    end_ms: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
    segment: usize,
    #[arg(long, default_value_t = DEFAULT_OVERLAP)]
    overlap: f64,
    /// Skip the notch and bandpass stages.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ErpArgs {
    #[arg(long)]
    recording: PathBuf,
    #[arg(long)]
    markers: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    /// Only average epochs for this marker code.
    #[arg(long)]
    code: Option<String>,
    /// Only average flashes of the LED attended in each epoch.
    #[arg(long)]
    intents: Option<PathBuf>,
    #[arg(long, default_value = "midline")]
    p300_channel: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    ssvep_amplitude: f64,
    #[arg(long, default_value_t = 0.5)]
    harmonic_ratio: f64,
    #[arg(long, default_value_t = 5.0)]
    p300_amplitude: f64,
    #[arg(long, default_value_t = 350.0)]
    p300_latency: f64,
    #[arg(long, default_value_t = 200.0)]
    p300_width: f64,
    #[arg(long, default_value_t = 2.0)]
    noise_sigma: f64,
    #[arg(long, default_value_t = 5.0)]
    line_noise: f64,
    #[arg(long, default_value_t = 600)]
    tail_ms: u32,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    recording: PathBuf,
    #[arg(long)]
    markers: PathBuf,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    out_dir: PathBuf,
    /// Diagnostic: issue the SSVEP winner without P300 confirmation.
    #[arg(long)]
    no_p300_gate: bool,
    #[arg(long)]
    no_notch: bool,
    /// Absolute P300 validity threshold, µV.
    #[arg(long, conflicts_with = "relative_threshold")]
    threshold: Option<f64>,
    /// Relative threshold: k times the baseline standard deviation.
    #[arg(long)]
    relative_threshold: Option<f64>,
    #[arg(long, default_value = "midline")]
    p300_channel: String,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_LEN)]
    segment: usize,
    /// Also write the `SEQ,COMMAND` line protocol to this file.
    #[arg(long)]
    commands: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Fixture {
    Table2,
}

#[derive(Debug, Args)]
#[group(id = "mode", required = true, multiple = true)]
struct EvaluateArgs {
    #[arg(long, requires = "intents", group = "mode")]
    decisions: Option<PathBuf>,
    #[arg(long, requires = "decisions")]
    intents: Option<PathBuf>,
    #[arg(long, group = "mode", conflicts_with_all = ["decisions", "itr"])]
    fixture: Option<Fixture>,
    /// Accuracy (0-1), number of targets and selection time in seconds.
    #[arg(long, num_args = 3, value_names = ["P", "N", "T"], group = "mode", conflicts_with = "decisions")]
    itr: Option<Vec<String>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI with `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = write!(stderr, "{text}");
            }
            return code;
        }
    };
    let raw: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let result = match cli.command {
        Cmd::FilterDesign(a) => filter_design(a, &raw, stdout),
        Cmd::Psd(a) => psd(a, &raw, stdout),
        Cmd::Erp(a) => erp(a, &raw, stdout),
        Cmd::Simulate(a) => simulate(a, &raw, stdout),
        Cmd::Decode(a) => decode(a, &raw, stdout),
        Cmd::Evaluate(a) => evaluate(a, &raw, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Data(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_DATA
        }
    }
}

fn out_err(e: std::io::Error) -> CliError {
    CliError::Data(format!("writing output: {e}"))
}

fn ensure_dir(dir: &Path) -> CliResult {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(text: &str, path: Option<&Path>, stdout: &mut dyn Write) -> CliResult {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(out_err),
    }
}

fn sidecar_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn sos_csv(design: &FilterDesign) -> String {
    let mut s = String::from("section,b0,b1,b2,a0,a1,a2\n");
    for (i, sec) in design.sections().iter().enumerate() {
        s.push_str(&format!("{i},{},{},{},1,{},{}\n", sec.b[0], sec.b[1], sec.b[2], sec.a[0], sec.a[1]));
    }
    s
}

/// Magnitude/phase table on a 0.1 Hz grid from 0 Hz to Nyquist.
pub fn response_csv(design: &FilterDesign) -> String {
    let mut s = String::from("freq_hz,magnitude_db,phase_rad\n");
    let steps = (design.sample_rate_hz() / 2.0 * 10.0).floor() as usize;
    for i in 0..=steps {
        let f = i as f64 / 10.0;
        let r = design.frequency_response(f).expect("grid stays within Nyquist");
        s.push_str(&format!("{f:.1},{:.6},{:.6}\n", r.magnitude_db, r.phase_rad));
    }
    s
}

fn filter_design(a: FilterDesignArgs, raw: &[String], stdout: &mut dyn Write) -> CliResult {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("{flag} is required for this filter")));
    let design = match a.kind {
        FilterKind::Bandpass => design_bandpass(need(a.lo, "--lo")?, need(a.hi, "--hi")?, a.order, a.fs),
        FilterKind::Lowpass => design_lowpass(need(a.cutoff, "--cutoff")?, a.order, a.fs),
        FilterKind::Notch => design_notch(need(a.freq, "--freq")?, a.fs, a.q),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;

    let sos = sos_csv(&design);
    let response = response_csv(&design);
    match &a.out_dir {
        Some(dir) => {
            ensure_dir(dir)?;
            let (sos_path, resp_path) = (dir.join("sos.csv"), dir.join("response.csv"));
            emit(&sos, Some(&sos_path), stdout)?;
            emit(&response, Some(&resp_path), stdout)?;
            let mut m = RunManifest::new("filter-design", raw);
            m.outputs = vec![sos_path, resp_path];
            m.write(&dir.join("manifest.json"))?;
            writeln!(stdout, "{}", design.description()).map_err(out_err)
        }
        None => emit(&format!("{sos}\n{response}"), None, stdout),
    }
}

fn psd(a: PsdArgs, raw: &[String], stdout: &mut dyn Write) -> CliResult {
    let config = a.config.load()?;
    let fs = config.sample_rate_hz;
    let pick: Box<dyn Fn(&SampleFrame) -> f64> = if a.channel.eq_ignore_ascii_case("ssvep") {
        Box::new(|f: &SampleFrame| SSVEP_CHANNELS.iter().map(|&c| f.get(c)).sum::<f64>() / SSVEP_CHANNELS.len() as f64)
    } else {
        let ch: Channel = a.channel.parse().map_err(CliError::Usage)?;
        Box::new(move |f: &SampleFrame| f.get(ch))
    };
    let design_err = |e: crate::filters::DesignError| CliError::Usage(e.to_string());
    let mut stages: Vec<FilterState> = Vec::new();
    if !a.raw {
        stages.push(FilterState::new(design_notch(50.0, fs, DEFAULT_NOTCH_Q).map_err(design_err)?.into()));
        stages.push(FilterState::new(design_bandpass(6.5, 30.0, 4, fs).map_err(design_err)?.into()));
    }
    let start_us = a.start_ms.map(|ms| (ms * 1000.0).round() as i64);
    let end_us = a.end_ms.map(|ms| (ms * 1000.0).round() as i64);

    let mut values = Vec::new();
    let mut guard = crate::types::FrameGuard::new();
    for row in RecordingReader::open(&a.recording)? {
        let (line, frame) = row?;
        guard.admit(&frame).map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        let v = stages.iter_mut().fold(pick(&frame), |x, st| st.apply(x));
        if start_us.is_none_or(|s| frame.t_us >= s) && end_us.is_none_or(|e| frame.t_us < e) {
            values.push(v);
        }
    }
    let est = welch_psd(&values, fs, a.segment, a.overlap, Window::Hamming).map_err(|e| CliError::Data(e.to_string()))?;
    let mut text = String::from("freq_hz,power\n");
    for (f, p) in est.frequencies.iter().zip(&est.power) {
        text.push_str(&format!("{f},{p}\n"));
    }
    emit(&text, a.out.as_deref(), stdout)?;
    if let Some(out) = &a.out {
        let mut m = RunManifest::new("psd", raw);
        m.config = a.config.config.clone();
        m.inputs = vec![a.recording.clone()];
        m.outputs = vec![out.clone()];
        m.write(&sidecar_manifest(out))?;
    }
    Ok(())
}

fn erp(a: ErpArgs, raw: &[String], stdout: &mut dyn Write) -> CliResult {
    let config = a.config.load()?;
    let channel: P300Channel = a.p300_channel.parse().map_err(CliError::Usage)?;
    let code: Option<MarkerCode> = a.code.as_deref().map(str::parse).transpose().map_err(CliError::Usage)?;
    let options = DecoderOptions { p300_channel: channel, ..Default::default() };
    let mut front = FrontEnd::new(config.sample_rate_hz, &options).map_err(|e| CliError::Usage(e.to_string()))?;

    let mut stream = Vec::new();
    let mut guard = crate::types::FrameGuard::new();
    for row in RecordingReader::open(&a.recording)? {
        let (line, frame) = row?;
        guard.admit(&frame).map_err(|e| CliError::Data(format!("line {line}: {e}")))?;
        let (_, p) = front.process(&frame);
        stream.push(TimedValue { t_us: frame.t_us, value: p });
    }
    let markers = io::read_markers(&a.markers)?;
    let attended: Option<Vec<(u64, Command)>> = a.intents.as_deref().map(io::read_intents).transpose()?;

    let layout = EpochLayout::for_config(&config);
    let mut sum = vec![0.0; layout.len()];
    let mut count = 0usize;
    for m in &markers {
        if code.is_some_and(|c| c != m.code) {
            continue;
        }
        if let Some(intents) = &attended {
            let Some(k) = config.epoch_index_of(m.t_us) else { continue };
            let led_command = config.by_marker(m.code).map(|l| l.command);
            if !intents.iter().any(|&(i, c)| i == k && Some(c) == led_command) {
                continue;
            }
        }
        if let Ok(epoch) = extract_epoch(&stream, m, layout) {
            for (s, v) in sum.iter_mut().zip(baseline_correct(&epoch).samples) {
                *s += v;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(CliError::Data("no complete epochs matched the selection".into()));
    }
    let mut text = String::from("time_ms,value_uV\n");
    for (i, s) in sum.iter().enumerate() {
        text.push_str(&format!("{},{}\n", layout.latency_ms(i), s / count as f64));
    }
    emit(&text, a.out.as_deref(), stdout)?;
    if let Some(out) = &a.out {
        let mut m = RunManifest::new("erp", raw);
        m.config = a.config.config.clone();
        m.inputs = [Some(a.recording.clone()), Some(a.markers.clone()), a.intents.clone()].into_iter().flatten().collect();
        m.outputs = vec![out.clone()];
        m.write(&sidecar_manifest(out))?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs, raw: &[String], stdout: &mut dyn Write) -> CliResult {
    if a.epochs == 0 {
        return Err(CliError::Usage("--epochs must be at least 1".into()));
    }
    let config = a.config.load()?;
    let synth = SynthConfig {
        attended: stimulus::random_intents(a.epochs, &config, a.seed),
        ssvep_amplitude_uv: a.ssvep_amplitude,
        harmonic_ratio: a.harmonic_ratio,
        p300_amplitude_uv: a.p300_amplitude,
        p300_latency_ms: a.p300_latency,
        p300_width_ms: a.p300_width,
        noise_sigma_uv: a.noise_sigma,
        line_noise_uv: a.line_noise,
        tail_ms: a.tail_ms,
        seed: a.seed,
        ..Default::default()
    };
    let session = stimulus::simulate_session(&config, &synth).map_err(|e| CliError::Usage(e.to_string()))?;

    ensure_dir(&a.out_dir)?;
    let rec = a.out_dir.join("recording.csv");
    let mk = a.out_dir.join("markers.csv");
    let intents = a.out_dir.join("intents.csv");
    let serial = a.out_dir.join("markers.serial");
    io::write_recording(&rec, &session.frames)?;
    io::write_markers(&mk, &session.markers)?;
    io::write_intents(&intents, &session.intents)?;
    std::fs::write(&serial, stimulus::encode_serial_markers(&session.markers))
        .map_err(|e| CliError::Data(format!("{}: {e}", serial.display())))?;

    let mut m = RunManifest::new("simulate", raw);
    m.config = a.config.config.clone();
    m.seed = Some(a.seed);
    m.rng = Some(format!(
        "{}; serial markers: 1 byte each at {} baud",
        stimulus::RNG_ALGORITHM,
        stimulus::SERIAL_BAUD
    ));
    m.outputs = vec![rec, mk, intents, serial];
    m.write(&a.out_dir.join("manifest.json"))?;
    writeln!(
        stdout,
        "simulated {} epochs: {} frames, {} markers -> {}",
        a.epochs,
        session.frames.len(),
        session.markers.len(),
        a.out_dir.display()
    )
    .map_err(out_err)
}

fn decode(a: DecodeArgs, raw: &[String], stdout: &mut dyn Write) -> CliResult {
    let config = a.config.load()?;
    let threshold = match (a.threshold, a.relative_threshold) {
        (_, Some(k)) => Threshold::Relative(k),
        (Some(uv), None) => Threshold::Absolute(uv),
        (None, None) => Threshold::default(),
    };
    let options = DecoderOptions {
        notch_q: (!a.no_notch).then_some(DEFAULT_NOTCH_Q),
        p300_gate: !a.no_p300_gate,
        p300_channel: a.p300_channel.parse().map_err(CliError::Usage)?,
        threshold,
        segment_len: a.segment,
        ..Default::default()
    };
    let mut decoder = StreamingDecoder::new(config, options).map_err(|e| CliError::Usage(e.to_string()))?;
    let markers = io::read_markers(&a.markers)?;
    let mut pending = markers.iter().peekable();
    let data = |line: u64| move |e: crate::pipeline::PipelineError| CliError::Data(format!("line {line}: {e}"));

    let mut decisions = Vec::new();
    for row in RecordingReader::open(&a.recording)? {
        let (line, frame) = row?;
        while let Some(m) = pending.next_if(|m| m.t_us <= frame.t_us) {
            decoder.push_marker(*m).map_err(data(line))?;
        }
        decisions.extend(decoder.push_frame(&frame).map_err(data(line))?);
    }
    for m in pending {
        decoder.push_marker(*m).map_err(|e| CliError::Data(e.to_string()))?;
    }
    decisions.extend(decoder.finish().map_err(|e| CliError::Data(e.to_string()))?);

    ensure_dir(&a.out_dir)?;
    let log_path = a.out_dir.join("decisions.csv");
    io::write_decisions(&log_path, &decisions)?;
    let mut outputs = vec![log_path];

    if let Some(path) = &a.commands {
        let mut sink = LineProtocolSink::new(io::create(path)?);
        let mut dispatcher = Dispatcher::new();
        for d in &decisions {
            dispatcher.dispatch(&d.decision, &mut sink);
        }
        if let Some(e) = dispatcher.transport_errors().first() {
            return Err(CliError::Data(format!("{}: {e}", path.display())));
        }
        outputs.push(path.clone());
    }

    let mut m = RunManifest::new("decode", raw);
    m.config = a.config.config.clone();
    m.inputs = vec![a.recording.clone(), a.markers.clone()];
    m.outputs = outputs;
    m.write(&a.out_dir.join("manifest.json"))?;
    let issued = decisions.iter().filter(|d| d.decision.command.is_some()).count();
    writeln!(stdout, "decoded {} epochs, {} commands issued", decisions.len(), issued).map_err(out_err)
}

fn evaluate(a: EvaluateArgs, raw: &[String], stdout: &mut dyn Write) -> CliResult {
    if let Some(itr) = &a.itr {
        let p: f64 = itr[0].parse().map_err(|_| CliError::Usage(format!("invalid accuracy '{}'", itr[0])))?;
        let n: u32 = itr[1].parse().map_err(|_| CliError::Usage(format!("invalid target count '{}'", itr[1])))?;
        let t: f64 = itr[2].parse().map_err(|_| CliError::Usage(format!("invalid selection time '{}'", itr[2])))?;
        let usage = |e: eval::EvalError| CliError::Usage(e.to_string());
        let bits = itr_bits_per_selection(p, n).map_err(usage)?;
        let bpm = itr_bpm(p, n, t).map_err(usage)?;
        let text = format!("bits/selection: {bits:.4}\nITR: {bpm:.2} bpm\n");
        return emit(&text, a.out.as_deref(), stdout);
    }

    let (report, note) = match (&a.fixture, &a.decisions, &a.intents) {
        (Some(Fixture::Table2), _, _) => {
            let report = aggregate(&table2::records()).expect("fixture is non-empty");
            let note = format!(
                "note: published mean {:.2}% differs from the flag recount {}%; printed per-row accuracy column averages {:.2}%\n",
                table2::PUBLISHED_MEAN_PERCENT,
                report.overall.percent_string(),
                table2::printed_accuracy_mean()
            );
            (report, note)
        }
        (None, Some(dec_path), Some(int_path)) => {
            let rows = io::read_decisions(dec_path)?;
            let intents = io::read_intents(int_path)?;
            let idx_d: Vec<u64> = rows.iter().map(|r| r.epoch_index).collect();
            let idx_i: Vec<u64> = intents.iter().map(|i| i.0).collect();
            if idx_d != idx_i {
                return Err(CliError::Data(format!(
                    "decision log covers {} epochs but intents cover {}; epochs must align",
                    idx_d.len(),
                    idx_i.len()
                )));
            }
            let decided: Vec<Option<Command>> = rows.iter().map(|r| r.command).collect();
            let wanted: Vec<Command> = intents.iter().map(|i| i.1).collect();
            let records = score(&decided, &wanted, "sim", 1).map_err(|e| CliError::Data(e.to_string()))?;
            let report = aggregate(&records).map_err(|e| CliError::Data(e.to_string()))?;
            (report, String::new())
        }
        _ => return Err(CliError::Usage("give --decisions with --intents, --fixture or --itr".into())),
    };

    write!(stdout, "{}{}", report.to_text(), note).map_err(out_err)?;
    if let Some(out) = &a.out {
        emit(&report.to_csv(), Some(out), stdout)?;
        let mut m = RunManifest::new("evaluate", raw);
        m.inputs = [a.decisions.clone(), a.intents.clone()].into_iter().flatten().collect();
        m.outputs = vec![out.clone()];
        m.write(&sidecar_manifest(out))?;
    }
    Ok(())
}
