//! `polarforge` command-line tool.
//!
//! Exit codes: 0 success, 1 configuration error, 2 validation failure, 3 I/O error.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use polarforge::coding::{monte_carlo, sim_csv, SimConfig, SimManifest, StopRule};
use polarforge::designer::{
    compare_rules, comparison_csv, design, histogram_vector, weight_histogram, DesignFile, DesignMethod, DesignSpec,
    PwAnchor,
};
use polarforge::ga::{self, geometry_check, reliability_csv, reliability_rows, ChannelParam, ReliabilityFile};
use polarforge::index::{count_with_11, fibonacci, AttractorFile};
use polarforge::order::{comparable_with_budget, max_order_at, PosetRelation, DEFAULT_SEARCH_BUDGET, EXHAUSTIVE_LIMIT};
use polarforge::soundness::soundness_sweep;
use polarforge::{AttractorCase, AttractorSpec, ChannelIndex, GaMethod};

#[derive(Debug, Parser)]
#[command(name = "polarforge", version, about = "Polar code construction toolkit")]
struct Cli {
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "POLARFORGE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a frozen set and write it as JSON.
    Design(DesignArgs),
    /// List the no-11 attractor.
    Attractor(AttractorArgs),
    /// Export the operator partial order, or compare one pair.
    Poset(PosetArgs),
    /// Dump GA mean LLRs and error probabilities.
    Evolve(EvolveArgs),
    /// Monte-Carlo FER/BER of a design file.
    Simulate(SimulateArgs),
    /// Union bounds of GA and polarization-weight designs over a noise grid.
    Compare(CompareArgs),
    /// Run the built-in consistency checks.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output file; stdout when omitted. A manifest is written next to it as `<out>.manifest.json`.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long)]
    n: u32,
    /// Information length K.
    #[arg(long)]
    k: u64,
    /// ga, pw or fastga.
    #[arg(long)]
    method: String,
    /// Design noise variance.
    #[arg(long, conflicts_with = "ebn0")]
    sigma2: Option<f64>,
    /// Design Eb/N0 in dB, converted with the code rate K / 2^n.
    #[arg(long)]
    ebn0: Option<f64>,
    /// PW exponent: beta = 2^beta_exp.
    #[arg(long)]
    beta_exp: Option<f64>,
    /// Operator ceiling for fastga.
    #[arg(long)]
    max_order: Option<u32>,
    /// Transfer function for ga: simplified or chung.
    #[arg(long, default_value = "simplified")]
    ga: String,
    /// Bit that carries exponent 0 in PW: lsb0 or msb1.
    #[arg(long, default_value = "lsb0")]
    pw_anchor: String,
    /// Fail instead of falling back to full GA when the pre-frozen set does not fit.
    #[arg(long)]
    no_fallback: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct AttractorArgs {
    #[arg(long)]
    n: u32,
    /// half_pi or pi.
    #[arg(long, default_value = "half_pi")]
    case: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PosetArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 3)]
    max_order: u32,
    /// Compare two indices, e.g. `6,9` or `0110,1001`.
    #[arg(long)]
    pair: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    sigma2: f64,
    /// simplified or chung.
    #[arg(long, default_value = "simplified")]
    method: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Design file written by `design`.
    #[arg(long)]
    design: PathBuf,
    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', required = true)]
    snr: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    min_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    /// Transmit the all-zero codeword.
    #[arg(long)]
    all_zero: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u64,
    /// Comma-separated noise variances.
    #[arg(long, value_delimiter = ',', required = true)]
    sigma2: Vec<f64>,
    /// Comma-separated PW exponents.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.2])]
    beta_exp: Vec<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Largest depth of the operator soundness sweep.
    #[arg(long, default_value_t = 6)]
    soundness_depth: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Validation(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<polarforge::Error> for CliError {
    fn from(e: polarforge::Error) -> Self {
        match e {
            polarforge::Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Echo of the resolved command line, written next to every output file.
#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    tool_version: &'a str,
    threads: Option<usize>,
    config: C,
}

fn write_output(out: &Option<PathBuf>, data: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, data).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(data.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest<C: Serialize>(out: &Option<PathBuf>, command: &str, threads: Option<usize>, config: C) -> CliResult {
    let Some(out) = out else { return Ok(()) };
    let m = Manifest { command, tool_version: env!("CARGO_PKG_VERSION"), threads, config };
    let path = manifest_path(out);
    let json = serde_json::to_string_pretty(&m).map_err(|e| CliError::Config(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> CliResult<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Config(e.to_string()))
}

fn parse<T: std::str::FromStr<Err = polarforge::Error>>(s: &str) -> CliResult<T> {
    s.parse().map_err(CliError::from)
}

/// Reports go to stderr when data goes to stdout, so piping stays clean.
fn report(to_stdout: bool, line: &str) {
    if to_stdout {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn cmd_design(a: &DesignArgs, threads: Option<usize>) -> CliResult {
    let method: DesignMethod = parse(&a.method)?;
    let block = 1u64.checked_shl(a.n).ok_or_else(|| CliError::Config(format!("n = {} too large", a.n)))?;
    let sigma2 = match (a.sigma2, a.ebn0) {
        (Some(s), _) => Some(s),
        (None, Some(db)) => {
            let rate = if a.k == 0 { 1.0 } else { a.k as f64 / block as f64 };
            Some(ChannelParam::from_ebn0_db(db, rate)?.sigma2())
        }
        (None, None) => None,
    };
    let spec = DesignSpec {
        n: a.n,
        k: a.k,
        method,
        sigma2,
        beta_exponent: a.beta_exp,
        max_order: a.max_order,
        ga: parse(&a.ga)?,
        pw_anchor: parse::<PwAnchor>(&a.pw_anchor)?,
        allow_fallback: !a.no_fallback,
    };
    spec.validate()?;
    let d = design(&spec)?;
    let file = DesignFile::from_design(&d);
    write_output(&a.output.out, &to_json(&file)?)?;
    write_manifest(&a.output.out, "design", threads, &spec)?;

    let to_stdout = a.output.out.is_some();
    let hist = histogram_vector(&weight_histogram(&d), a.n as usize + 1);
    let last = hist.iter().rposition(|&c| c > 0).map_or(0, |i| i + 1);
    let line: Vec<String> = hist[..last].iter().map(|c| c.to_string()).collect();
    report(to_stdout, &format!("frozen: {}", d.frozen.len()));
    report(to_stdout, &format!("weight_histogram: {}", line.join(",")));
    if let Some(f) = &d.fast {
        report(to_stdout, &format!("pre_frozen: {}", f.pre_frozen));
        report(to_stdout, &format!("ga_evaluations_saved: {}", f.ga_evaluations_saved));
        if f.fallback {
            report(to_stdout, "fallback: full GA");
        }
    }
    Ok(())
}

fn cmd_attractor(a: &AttractorArgs, threads: Option<usize>) -> CliResult {
    let case: AttractorCase = parse(&a.case)?;
    let spec = AttractorSpec::new(a.n, case)?;
    if a.n > 40 {
        return Err(CliError::Config(format!("listing the attractor at n = {} is too large; use n <= 40", a.n)));
    }
    let file = AttractorFile::from_spec(spec);
    write_output(&a.output.out, &to_json(&file)?)?;
    #[derive(Serialize)]
    struct Cfg {
        n: u32,
        case: AttractorCase,
    }
    write_manifest(&a.output.out, "attractor", threads, Cfg { n: a.n, case })?;
    report(a.output.out.is_some(), &format!("count: {}", file.indices.len()));
    Ok(())
}

fn parse_index(n: u32, s: &str) -> CliResult<ChannelIndex> {
    let s = s.trim();
    let value = if let Some(b) = s.strip_prefix("0b") {
        u64::from_str_radix(b, 2)
    } else if s.len() == n as usize && s.len() > 1 && s.chars().all(|c| c == '0' || c == '1') {
        u64::from_str_radix(s, 2)
    } else {
        s.parse::<u64>()
    }
    .map_err(|e| CliError::Config(format!("bad index '{s}': {e}")))?;
    Ok(ChannelIndex::new(n, value)?)
}

fn cmd_poset(a: &PosetArgs, threads: Option<usize>) -> CliResult {
    if a.max_order == 0 || (a.n > 0 && a.max_order > max_order_at(a.n)) {
        return Err(polarforge::Error::InvalidOrder { order: a.max_order, n: a.n }.into());
    }
    if let Some(pair) = &a.pair {
        let (l, k) = pair
            .split_once(',')
            .ok_or_else(|| CliError::Config(format!("--pair expects 'a,b', got '{pair}'")))?;
        let (l, k) = (parse_index(a.n, l)?, parse_index(a.n, k)?);
        let result = if a.n <= EXHAUSTIVE_LIMIT {
            PosetRelation::build(a.n, a.max_order)?.compare(l.value(), k.value())
        } else {
            comparable_with_budget(l, k, a.max_order, DEFAULT_SEARCH_BUDGET)?
        };
        println!("{result}");
        return Ok(());
    }
    let relation = PosetRelation::build(a.n, a.max_order)?;
    write_output(&a.output.out, &to_json(&relation.to_file())?)?;
    #[derive(Serialize)]
    struct Cfg {
        n: u32,
        max_order: u32,
    }
    write_manifest(&a.output.out, "poset", threads, Cfg { n: a.n, max_order: a.max_order })?;
    report(a.output.out.is_some(), &format!("edges: {}", relation.edges().len()));
    report(a.output.out.is_some(), &format!("incomparable_pairs: {}", relation.incomparable_pairs()));
    Ok(())
}

fn cmd_evolve(a: &EvolveArgs, threads: Option<usize>) -> CliResult {
    let method: GaMethod = parse(&a.method)?;
    if a.n > 24 {
        return Err(CliError::Config(format!("n = {} too large for a full dump (max 24)", a.n)));
    }
    let param = ChannelParam::new(a.sigma2)?;
    let means = match method {
        GaMethod::Simplified => ga::evolve(a.n, param),
        GaMethod::Chung => ga::chung::evolve(a.n, param)?,
    };
    let rows = reliability_rows(&means);
    let data = match a.format {
        Format::Csv => reliability_csv(&rows),
        Format::Json => to_json(&ReliabilityFile { n: a.n, sigma2: a.sigma2, method, channels: rows })?,
    };
    write_output(&a.output.out, &data)?;
    #[derive(Serialize)]
    struct Cfg {
        n: u32,
        sigma2: f64,
        method: GaMethod,
        format: Format,
    }
    write_manifest(&a.output.out, "evolve", threads, Cfg { n: a.n, sigma2: a.sigma2, method, format: a.format })
}

fn cmd_simulate(a: &SimulateArgs, threads: Option<usize>) -> CliResult {
    let text = fs::read_to_string(&a.design).map_err(|e| CliError::Io(format!("{}: {e}", a.design.display())))?;
    let file: DesignFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{} is not a design file: {e}", a.design.display())))?;
    let d = file.to_design()?;
    if a.max_frames == 0 {
        return Err(CliError::Config("--max-frames must be positive".into()));
    }
    let config = SimConfig {
        seed: a.seed,
        stop: StopRule { min_frame_errors: a.min_errors, max_frames: a.max_frames, ..StopRule::default() },
        all_zero: a.all_zero,
    };
    let result = monte_carlo(&d, &a.snr, &config)?;
    write_output(&a.output.out, &sim_csv(&result))?;
    write_manifest(&a.output.out, "simulate", threads, SimManifest::new(&d, &a.snr, &config))
}

fn cmd_compare(a: &CompareArgs, threads: Option<usize>) -> CliResult {
    DesignSpec::ga(a.n, a.k, 1.0).validate()?;
    let rows = compare_rules(a.n, a.k, &a.sigma2, &a.beta_exp)?;
    write_output(&a.output.out, &comparison_csv(&rows))?;
    #[derive(Serialize)]
    struct Cfg<'a> {
        n: u32,
        k: u64,
        sigma2: &'a [f64],
        beta_exp: &'a [f64],
    }
    write_manifest(&a.output.out, "compare", threads, Cfg { n: a.n, k: a.k, sigma2: &a.sigma2, beta_exp: &a.beta_exp })
}

#[derive(Debug, Serialize)]
struct Check {
    name: String,
    passed: bool,
    /// Informational checks are reported but do not affect the exit code.
    gating: bool,
    detail: String,
}

fn cmd_validate(a: &ValidateArgs, threads: Option<usize>) -> CliResult {
    let mut checks = Vec::new();

    let g = geometry_check();
    checks.push(Check {
        name: "minus update below x/2 on (0, pi)".into(),
        passed: g.origin_ok && g.below_ok,
        gating: true,
        detail: format!("worst margin {:.3e} at x = {:.4}", g.below_worst_margin, g.below_worst_x),
    });
    checks.push(Check {
        name: "minus update above x/2 on (pi, 40]".into(),
        passed: g.above_ok,
        gating: true,
        detail: format!("worst margin {:.3e} at x = {:.4}", g.above_worst_margin, g.above_worst_x),
    });
    checks.push(Check {
        name: "fixed point at (pi, pi/2)".into(),
        passed: g.fixed_point_ok,
        gating: false,
        detail: format!(
            "deviation {:.4e}; the curves actually cross at x = {:.9}",
            g.fixed_point_deviation, g.crossing
        ),
    });

    let mut counts_ok = true;
    for n in 1..=20u32 {
        let with_11 = count_with_11(n)?;
        let no_11 = fibonacci(n + 2)?;
        counts_ok &= with_11 + no_11 == 1u128 << n;
        if n <= 16 {
            let listed = AttractorSpec::new(n, AttractorCase::BelowHalfPi)?.iter().count() as u128;
            counts_ok &= listed == no_11;
        }
    }
    checks.push(Check {
        name: "Fibonacci counts".into(),
        passed: counts_ok,
        gating: true,
        detail: "2^n - F_(n+2) strings contain 11 (n <= 20); listing matches (n <= 16)".into(),
    });

    for n in 1..=a.soundness_depth.min(EXHAUSTIVE_LIMIT) {
        let r = soundness_sweep(n, None, n <= 6)?;
        checks.push(Check {
            name: format!("operator soundness n={n}"),
            passed: r.passed(),
            gating: true,
            detail: format!(
                "max_order {}, {} ordered pairs, violations ga {} bec {}",
                r.max_order, r.ordered_pairs, r.ga_violations, r.bec_violations
            ),
        });
    }

    let to_stdout = a.output.out.is_some();
    for c in &checks {
        let tag = match (c.passed, c.gating) {
            (true, _) => "ok  ",
            (false, true) => "FAIL",
            (false, false) => "note",
        };
        report(to_stdout, &format!("[{tag}] {}: {}", c.name, c.detail));
    }
    if a.output.out.is_some() {
        write_output(&a.output.out, &to_json(&checks)?)?;
        #[derive(Serialize)]
        struct Cfg {
            soundness_depth: u32,
        }
        write_manifest(&a.output.out, "validate", threads, Cfg { soundness_depth: a.soundness_depth })?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| c.gating && !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}

fn run(cli: Cli) -> CliResult {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let threads = cli.threads;
    match &cli.command {
        Command::Design(a) => cmd_design(a, threads),
        Command::Attractor(a) => cmd_attractor(a, threads),
        Command::Poset(a) => cmd_poset(a, threads),
        Command::Evolve(a) => cmd_evolve(a, threads),
        Command::Simulate(a) => cmd_simulate(a, threads),
        Command::Compare(a) => cmd_compare(a, threads),
        Command::Validate(a) => cmd_validate(a, threads),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polarforge: {e}");
            ExitCode::from(e.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_forms() {
        assert_eq!(parse_index(4, "6").unwrap().value(), 6);
        assert_eq!(parse_index(4, "0b0110").unwrap().value(), 6);
        assert_eq!(parse_index(4, "0110").unwrap().value(), 6);
        assert_eq!(parse_index(4, "10").unwrap().value(), 10);
        assert!(parse_index(4, "16").is_err());
        assert!(parse_index(4, "x").is_err());
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("out/d.json")), PathBuf::from("out/d.json.manifest.json"));
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
