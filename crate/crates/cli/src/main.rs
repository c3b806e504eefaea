use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twoshare::adversary::{
    monte_carlo_attack, optimal_attack_x, optimal_attack_y, AttackResult, Target,
};
use twoshare::blockwise::{self, BlockRandomness, BlockShare, BlockwiseParams};
use twoshare::harness::{emit_report, run_experiment, ExperimentConfig, ModeSpec, ReportFormat};
use twoshare::prob::Pmf;
use twoshare::rng::RandomStream;
use twoshare::symbolwise::{validate_base, ModularScheme, SymbolwiseCodec};
use twoshare::typicality::GammaSchedule;
use twoshare::{DecodeOutcome, Error};

const EXIT_CONFIG: u8 = 1;
const EXIT_VIOLATED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "twoshare",
    version,
    about = "Simulate (2,2)-threshold schemes with impersonation detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random choice (keys, Monte Carlo trials). Defaults to
    /// 0, or to the config file's seed for `experiment`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Exact enumeration or Monte Carlo estimation.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Monte Carlo trials per estimate.
    #[arg(long, global = true, default_value_t = 100_000)]
    trials: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeKind {
    Blockwise,
    Symbolwise,
}

#[derive(Subcommand)]
enum Command {
    /// Split a secret sequence into two shares.
    Encode {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Secret symbols, e.g. "0,1,1,0".
        #[arg(long)]
        secret: String,
        /// Key: "u_l:u_m" for blockwise, "u1,u2,..." for symbolwise. Drawn
        /// from the seed when absent.
        #[arg(long)]
        key: Option<String>,
    },
    /// Recover the secret from two shares, or report a rejection.
    Decode {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// First share: "tag:index" for blockwise, "a,b,c" for symbolwise.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Success probability of the best impersonation attack on each share.
    Attack {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Check the one-shot modular scheme against the base-scheme requirements.
    ValidateScheme {
        /// Source distribution, e.g. "0.7,0.3".
        #[arg(long)]
        source: String,
        #[arg(long)]
        modulus: usize,
    },
    /// Run a blocklength sweep from a TOML config and emit the report.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_enum)]
    scheme: SchemeKind,
    /// Source distribution, e.g. "0.7,0.3".
    #[arg(long)]
    source: String,
    /// Blocklength.
    #[arg(long)]
    n: usize,
    /// Correlation level (blockwise).
    #[arg(long)]
    ell: Option<f64>,
    /// Share alphabet size (symbolwise).
    #[arg(long)]
    modulus: Option<usize>,
    /// Constant typicality slack; overrides the power-law schedule.
    #[arg(long)]
    gamma: Option<f64>,
    /// Power-law schedule gamma_n = n^(-a).
    #[arg(long, default_value_t = 1.0 / 3.0)]
    gamma_exponent: f64,
}

enum Scheme {
    Block(BlockwiseParams),
    Symbol(SymbolwiseCodec<ModularScheme>),
}

impl SchemeArgs {
    fn gamma(&self) -> Result<f64, Error> {
        let schedule = match self.gamma {
            Some(g) => GammaSchedule::constant(g)?,
            None => GammaSchedule::power_law(self.gamma_exponent)?,
        };
        Ok(schedule.gamma_at(self.n))
    }

    fn build(&self) -> Result<Scheme, Error> {
        let source = Pmf::parse(&self.source)?;
        let gamma = self.gamma()?;
        match self.scheme {
            SchemeKind::Blockwise => {
                let ell = self
                    .ell
                    .ok_or_else(|| Error::InvalidInput("--ell is required for blockwise".into()))?;
                Ok(Scheme::Block(BlockwiseParams::new(
                    &source, self.n, ell, gamma,
                )?))
            }
            SchemeKind::Symbolwise => {
                let m = self.modulus.ok_or_else(|| {
                    Error::InvalidInput("--modulus is required for symbolwise".into())
                })?;
                let base = ModularScheme::new(m, source.support_size())?;
                Ok(Scheme::Symbol(SymbolwiseCodec::new(
                    base, source, self.n, gamma,
                )?))
            }
        }
    }
}

fn parse_seq(text: &str) -> Result<Vec<usize>, Error> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidInput(format!("bad symbol {t:?}: {e}")))
        })
        .collect()
}

fn seq_text(seq: &[usize]) -> String {
    seq.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Flat key/value rows, written as a CSV table or one JSON object per line.
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => {
                writeln!(out, "{}", self.columns.join(","))?;
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    writeln!(out, "{}", cells.join(","))?;
                }
            }
            Format::Jsonl => {
                for row in &self.rows {
                    let fields: Vec<String> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, v)| format!("{}:{}", Value::from(*k), v))
                        .collect();
                    writeln!(out, "{{{}}}", fields.join(","))?;
                }
            }
        }
        Ok(())
    }
}

fn csv_cell(v: &Value) -> String {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text
    }
}

fn float(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(twoshare::harness::format_float(v))
    }
}

fn outcome_text(o: &DecodeOutcome) -> String {
    match o {
        DecodeOutcome::Secret(s) => seq_text(s),
        DecodeOutcome::Reject => "reject".into(),
    }
}

fn encode(cli: &Cli, args: &SchemeArgs, secret: &str, key: Option<&str>) -> Result<Table, Error> {
    let secret = parse_seq(secret)?;
    let mut rng = RandomStream::new(cli.seed.unwrap_or(0));
    let mut table = Table::new(&["secret", "key", "x", "y"]);
    match args.build()? {
        Scheme::Block(p) => {
            let key = match key {
                Some(k) => {
                    let s: BlockShare = k.parse()?;
                    BlockRandomness::new(s.l_idx, s.m_idx)
                }
                None => BlockRandomness::sample(&p, &mut rng),
            };
            let (x, y) = blockwise::encode(&p, &secret, key)?;
            table.push(vec![
                json!(seq_text(&secret)),
                json!(format!("{}:{}", key.u_l, key.u_m)),
                json!(x.to_string()),
                json!(y.to_string()),
            ]);
        }
        Scheme::Symbol(c) => {
            let m = c.base().modulus() as u64;
            let key = match key {
                Some(k) => parse_seq(k)?,
                None => (0..c.n()).map(|_| rng.below(m) as usize).collect(),
            };
            let (x, y) = c.encode_n(&secret, &key)?;
            table.push(vec![
                json!(seq_text(&secret)),
                json!(seq_text(&key)),
                json!(seq_text(&x)),
                json!(seq_text(&y)),
            ]);
        }
    }
    Ok(table)
}

fn decode(args: &SchemeArgs, x: &str, y: &str) -> Result<Table, Error> {
    let (outcome, llr) = match args.build()? {
        Scheme::Block(p) => {
            let (x, y): (BlockShare, BlockShare) = (x.parse()?, y.parse()?);
            (blockwise::decode(&p, &x, &y), Value::Null)
        }
        Scheme::Symbol(c) => {
            let (x, y) = (parse_seq(x)?, parse_seq(y)?);
            (c.decode_n(&x, &y)?, float(c.llr_score(&x, &y)))
        }
    };
    let mut table = Table::new(&["accepted", "secret", "llr_score"]);
    table.push(vec![
        json!(!outcome.is_reject()),
        json!(outcome_text(&outcome)),
        llr,
    ]);
    Ok(table)
}

fn attack_row<S: ToString>(target: &str, r: &AttackResult<S>, n: usize) -> Vec<Value> {
    let half = r.interval.map_or(0.0, |i| i.half_width);
    vec![
        json!(target),
        float(r.success_prob),
        float(half),
        float(-r.success_prob.log2() / n as f64),
        r.optimal_forgery
            .as_ref()
            .map_or(Value::Null, |f| json!(f.to_string())),
    ]
}

struct SeqShare(Vec<usize>);

impl std::fmt::Display for SeqShare {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&seq_text(&self.0))
    }
}

fn relabel(r: AttackResult<Vec<usize>>) -> AttackResult<SeqShare> {
    AttackResult {
        success_prob: r.success_prob,
        optimal_forgery: r.optimal_forgery.map(SeqShare),
        mode: r.mode,
        interval: r.interval,
    }
}

fn attack(cli: &Cli, args: &SchemeArgs) -> Result<Table, Error> {
    let mc = cli.mode == Some(Mode::Mc);
    let rng = RandomStream::new(cli.seed.unwrap_or(0));
    let mut table = Table::new(&[
        "target",
        "success_prob",
        "half_width",
        "exponent",
        "forgery",
    ]);
    let n = args.n;
    match args.build()? {
        Scheme::Block(p) => {
            let (ax, ay) = if mc {
                let forge =
                    |r: &mut RandomStream| BlockShare::new(r.below(p.l_n()), r.below(p.modulus()));
                (
                    monte_carlo_attack(&p, Target::X, forge, cli.trials, &rng.substream(1)),
                    monte_carlo_attack(&p, Target::Y, forge, cli.trials, &rng.substream(2)),
                )
            } else {
                let q = blockwise::exact_quantities(&p)?;
                let model = q.attack_model(&p);
                (optimal_attack_x(&model)?, optimal_attack_y(&model)?)
            };
            table.push(attack_row("x", &ax, n));
            table.push(attack_row("y", &ay, n));
        }
        Scheme::Symbol(c) => {
            let (ax, ay) = if mc {
                let m = c.base().modulus() as u64;
                let forge = |r: &mut RandomStream| (0..n).map(|_| r.below(m) as usize).collect();
                (
                    monte_carlo_attack(&c, Target::X, forge, cli.trials, &rng.substream(1)),
                    monte_carlo_attack(&c, Target::Y, forge, cli.trials, &rng.substream(2)),
                )
            } else {
                let model = c.fstar_attack_model();
                (optimal_attack_x(&model)?, optimal_attack_y(&model)?)
            };
            table.push(attack_row("x", &relabel(ax), n));
            table.push(attack_row("y", &relabel(ay), n));
        }
    }
    Ok(table)
}

fn validate_scheme(source: &str, modulus: usize) -> Result<(Table, bool), Error> {
    let source = Pmf::parse(source)?;
    let base = ModularScheme::new(modulus, source.support_size())?;
    let v = validate_base(&base, &source)?;
    let mut table = Table::new(&[
        "passed",
        "failures",
        "h_s",
        "h_s_given_x",
        "h_s_given_y",
        "h_s_given_xy",
        "ell",
    ]);
    let failures: Vec<&str> = v.failures.iter().map(|c| c.name()).collect();
    table.push(vec![
        json!(v.passed()),
        json!(failures.join(";")),
        float(v.h_s),
        float(v.h_s_given_x),
        float(v.h_s_given_y),
        float(v.h_s_given_xy),
        float(v.ell),
    ]);
    Ok((table, v.passed()))
}

fn open_out(path: Option<&PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Returns `true` when every verdict or validation condition holds.
fn run(cli: &Cli) -> Result<bool, Error> {
    let mut out = open_out(cli.out.as_ref())?;
    let ok = match &cli.command {
        Command::Encode {
            scheme,
            secret,
            key,
        } => {
            encode(cli, scheme, secret, key.as_deref())?.write(cli.format, &mut out)?;
            true
        }
        Command::Decode { scheme, x, y } => {
            decode(scheme, x, y)?.write(cli.format, &mut out)?;
            true
        }
        Command::Attack { scheme } => {
            attack(cli, scheme)?.write(cli.format, &mut out)?;
            true
        }
        Command::ValidateScheme { source, modulus } => {
            let (table, passed) = validate_scheme(source, *modulus)?;
            table.write(cli.format, &mut out)?;
            passed
        }
        Command::Experiment { config } => {
            let mut cfg = ExperimentConfig::load(config)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            match cli.mode {
                Some(Mode::Exact) => cfg.mode = ModeSpec::Exact,
                Some(Mode::Mc) => cfg.mode = ModeSpec::MonteCarlo { trials: cli.trials },
                None => {}
            }
            let report = run_experiment(&cfg)?;
            let format = match cli.format {
                Format::Csv => ReportFormat::Csv,
                Format::Jsonl => ReportFormat::JsonLines,
            };
            emit_report(&report, format, &mut out)?;
            !report.has_violation()
        }
    };
    out.flush()?;
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VIOLATED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
