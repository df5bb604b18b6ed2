use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use txdiv::channel::ChannelSpec;
use txdiv::detect::DetectorKind;
use txdiv::harq::{self, ChannelMode, HarqConfig, Stages};
use txdiv::numerics::Modulation;
use txdiv::sim::{self, SimConfig, Simulator};
use txdiv::stbc::SchemeId;
use txdiv::turbo::CodeRate;
use txdiv::{Error, Result};

#[derive(Parser)]
#[command(name = "txdivsim", version, about = "Transmit-diversity link-level simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coded FER/BER sweep for one scheme.
    Run(RunArgs),
    /// Incremental-diversity HARQ statistics.
    Harq(HarqArgs),
    /// Oracle checks; exits nonzero if any fails.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration to replay; the scheme/link flags below are then ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "mdc-qostbc")]
    scheme: SchemeId,
    #[arg(long, default_value = "8/9")]
    rate: CodeRate,
    #[arg(long = "mod", default_value = "qpsk")]
    modulation: Modulation,
    #[arg(long, default_value_t = 2)]
    nr: usize,
    /// `lo:step:hi` in dB (inclusive) or a single value.
    #[arg(long, default_value = "0:1:10", allow_hyphen_values = true)]
    snr: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 20000)]
    max_frames: u64,
    /// mld | lmmse | maxlog-mld (default: lmmse for qostbc, mld otherwise).
    #[arg(long)]
    detector: Option<DetectorKind>,
    /// Comma-separated cyclic delays in samples.
    #[arg(long, default_value = "0,64,128,192")]
    cdd_delays: String,
    /// tu6 | flat | file:<path>
    #[arg(long, default_value = "tu6")]
    channel: ChannelSpec,
    #[arg(long)]
    block_len: Option<usize>,
    #[arg(long, default_value_t = 8)]
    iterations: usize,
    #[arg(long)]
    noiseless: bool,
    /// CSV output; a companion `<out>.json` records the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append to an existing CSV instead of replacing it.
    #[arg(long)]
    append: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct HarqArgs {
    #[arg(long, default_value = "10", allow_hyphen_values = true)]
    snr: String,
    #[arg(long, default_value_t = 10000)]
    sessions: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    nr: usize,
    #[arg(long = "mod", default_value = "qpsk")]
    modulation: Modulation,
    /// 3 (rows 3-4 bundled) or 4.
    #[arg(long, default_value = "3")]
    stages: Stages,
    /// static | independent
    #[arg(long, default_value = "static")]
    channel_mode: ChannelMode,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_delays(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad cyclic delay '{t}'")))
        })
        .collect()
}

fn companion(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    p.into()
}

fn run(a: RunArgs) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => sim::read_config(p)?,
        None => SimConfig {
            nr: a.nr,
            modulation: a.modulation,
            block_len: a.block_len,
            cdd_delays: parse_delays(&a.cdd_delays)?,
            channel: a.channel.clone(),
            min_errors: a.min_errors,
            max_frames: a.max_frames,
            seed: a.seed,
            detector: a.detector,
            iterations: a.iterations,
            noiseless: a.noiseless,
            ..SimConfig::new(a.scheme, a.rate, sim::parse_snr_grid(&a.snr)?)
        },
    };
    let simulator = Simulator::new(cfg)?;
    if let Some(out) = &a.out {
        if a.append {
            sim::append_records(out, &[])?;
        } else {
            sim::write_records(out, &[])?;
        }
        sim::write_config(&companion(out), simulator.config())?;
    } else {
        println!("{}", sim::CSV_HEADER);
    }
    sim::with_threads(a.threads, || {
        simulator.sweep(|r| {
            eprintln!(
                "{} {} snr={:.2} frames={} fer={:.4e} ber={:.4e} ({:.1}s)",
                r.scheme, r.rate, r.snr_db, r.frames, r.fer, r.ber, r.wall_seconds
            );
            match &a.out {
                Some(out) => sim::append_records(out, std::slice::from_ref(r)),
                None => {
                    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(std::io::stdout());
                    w.serialize(r)?;
                    w.flush()?;
                    Ok(())
                }
            }
        })
    })??;
    Ok(())
}

fn run_harq(a: HarqArgs) -> Result<()> {
    let cfg = HarqConfig {
        nr: a.nr,
        modulation: a.modulation,
        stages: a.stages,
        channel_mode: a.channel_mode,
    };
    let grid = sim::parse_snr_grid(&a.snr)?;
    let mut buf = Vec::new();
    for (i, &snr) in grid.iter().enumerate() {
        let rep = sim::with_threads(a.threads, || harq::simulate(&cfg, snr, a.sessions, a.seed))??;
        let mut one = Vec::new();
        harq::write_csv(&rep, &mut one)?;
        let text = String::from_utf8(one).expect("ascii CSV");
        for (j, line) in text.lines().enumerate() {
            if j == 0 {
                if i == 0 {
                    writeln!(buf, "snr_db,{line}")?;
                }
            } else {
                writeln!(buf, "{snr},{line}")?;
            }
        }
        eprintln!("harq snr={snr:.2} throughput={:.4}", rep.throughput);
    }
    match &a.out {
        Some(p) => std::fs::write(p, &buf)?,
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(a) => run(a),
        Cmd::Harq(a) => run_harq(a),
        Cmd::Selftest => {
            let checks = txdiv::selftest::run_all();
            let mut ok = true;
            for c in &checks {
                println!("{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                ok &= c.passed;
            }
            if ok {
                Ok(())
            } else {
                eprintln!("selftest failed");
                return ExitCode::FAILURE;
            }
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
