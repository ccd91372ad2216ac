use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cpda::analysis::{
    check_dominance, compare_table, comparison_csv, decimal, params_construction1,
    params_construction2, params_csv, params_scheme2, params_scheme3, parse_grid, rate_from_array,
    CompareOptions, MatchMode, SchemeParams,
};
use cpda::construct::{
    construction1_variant, construction2, mn_pda, Construction1Params, Construction2Params, Variant,
};
use cpda::format::{read_array, write_array};
use cpda::model::PdaArray;
use cpda::sim::{simulate, DemandVector, SimError, SimulationConfig, DEFAULT_UNIT_BYTES};
use cpda::validate::validate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(
    name = "cpda",
    version,
    about = "Build, check and simulate coded placement delivery arrays"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an array and write it in the text format.
    Build {
        #[arg(long, value_enum)]
        family: BuildFamily,
        #[command(flatten)]
        shape: Shape,
        /// Users of the MN array.
        #[arg(long)]
        k: Option<usize>,
        /// Caching parameter of the MN array.
        #[arg(long)]
        t: Option<usize>,
        /// Output file; the array goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an array file against the axioms.
    Validate {
        path: PathBuf,
        /// Also require every symbol's column labels to share a relay.
        #[arg(long)]
        cpda: bool,
    },
    /// Run placement and delivery on random files and decode every demand.
    Simulate {
        path: PathBuf,
        /// Number of files (default: one per user).
        #[arg(long)]
        files: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated 1-based file indices, `distinct` or `random`.
        #[arg(long, default_value = "random")]
        demands: String,
        /// Bytes per minimal unit; files are F_rows * lcm(w_s) units long.
        #[arg(long, default_value_t = DEFAULT_UNIT_BYTES)]
        unit: usize,
        /// Print one row per sub-signal instead of the plan listing.
        #[arg(long)]
        table: bool,
    },
    /// Closed-form parameters of one scheme.
    Params {
        #[arg(long, value_enum)]
        family: ParamsFamily,
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        csv: bool,
    },
    /// Memory-rate table of Scheme1 against the grouped baselines, as CSV.
    Compare {
        #[arg(long = "H")]
        h: usize,
        #[arg(long)]
        r: usize,
        /// Memory ratios: `a,b,c` or `start:stop:step` (e.g. `0:1:1/20`).
        #[arg(long)]
        grid: Option<String>,
        /// Match Scheme1 to grid points exactly instead of by nearest ratio.
        #[arg(long)]
        exact: bool,
        /// Exit 1 unless Scheme1 beats both baselines as claimed.
        #[arg(long)]
        check_dominance: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Shape {
    #[arg(long = "H")]
    h: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildFamily {
    Mn,
    C1p,
    C1pp,
    C2,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamsFamily {
    C1p,
    C1pp,
    C2,
    Scheme2,
    Scheme3,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn semantic(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type CmdResult = Result<(), Failure>;

fn need(value: Option<usize>, flag: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| usage(format!("--{flag} is required for this family")))
}

impl Shape {
    fn four(&self) -> Result<(usize, usize, usize, usize), Failure> {
        Ok((
            need(self.h, "H")?,
            need(self.r, "r")?,
            need(self.b, "b")?,
            need(self.lambda, "lambda")?,
        ))
    }
}

fn cmd_build(
    family: BuildFamily,
    shape: &Shape,
    k: Option<usize>,
    t: Option<usize>,
    out: Option<&Path>,
) -> CmdResult {
    let (array, require_cpda): (PdaArray<u32>, bool) = match family {
        BuildFamily::Mn => {
            let arr = mn_pda(need(k, "k")?, need(t, "t")?).map_err(|e| usage(e.0))?;
            (arr.canonical_relabel(), false)
        }
        BuildFamily::C1p | BuildFamily::C1pp => {
            let (h, r, b, lambda) = shape.four()?;
            let params = Construction1Params::new(h, r, b, lambda).map_err(|e| usage(e.0))?;
            let variant = if matches!(family, BuildFamily::C1p) {
                Variant::P
            } else {
                Variant::PPrime
            };
            (
                construction1_variant(&params, variant).canonical_relabel(),
                true,
            )
        }
        BuildFamily::C2 => {
            let (h, r, b, lambda) = shape.four()?;
            let params = Construction2Params::new(h, r, b, lambda).map_err(|e| usage(e.0))?;
            (construction2(&params).canonical_relabel(), true)
        }
    };
    let report = validate(&array, require_cpda);
    let text = write_array(&array);
    match out {
        Some(path) => {
            fs::write(path, &text)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
            println!("{}", report.summary());
        }
        None => {
            print!("{text}");
            eprintln!("{}", report.summary());
        }
    }
    Ok(())
}

fn load(path: &Path) -> Result<PdaArray<u32>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    read_array(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_validate(path: &Path, cpda: bool) -> CmdResult {
    let array = load(path)?;
    let report = validate(&array, cpda);
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(semantic(format!(
            "{} is not a valid {}",
            path.display(),
            if cpda { "CPDA" } else { "PDA" }
        )))
    }
}

fn parse_demands(
    text: &str,
    users: usize,
    n_files: usize,
    seed: u64,
) -> Result<DemandVector, Failure> {
    match text {
        "distinct" => {
            if n_files < users {
                return Err(usage(format!(
                    "distinct demands need at least {users} files"
                )));
            }
            Ok(DemandVector::distinct(users))
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_d3a4);
            Ok(DemandVector::random(users, n_files, &mut rng))
        }
        list => {
            let demands = list
                .split(',')
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| usage(format!("demand {tok:?} is not a file index")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if demands.len() != users {
                return Err(usage(format!(
                    "{} demands given for {users} users",
                    demands.len()
                )));
            }
            DemandVector::new(demands, n_files).map_err(|e| usage(e.to_string()))
        }
    }
}

fn cmd_simulate(
    path: &Path,
    files: Option<usize>,
    seed: u64,
    demands: &str,
    unit: usize,
    table: bool,
) -> CmdResult {
    let array = load(path)?;
    let n_files = files.unwrap_or(array.k());
    if n_files == 0 || unit == 0 {
        return Err(usage("--files and --unit must be positive"));
    }
    let demands = parse_demands(demands, array.k(), n_files, seed)?;
    let config = SimulationConfig {
        n_files,
        unit_bytes: unit,
        seed,
    };
    let report = simulate(&array, &demands, config).map_err(|e| match e {
        SimError::DemandLength { .. } | SimError::DemandOutOfRange { .. } => usage(e.to_string()),
        other => semantic(other.to_string()),
    })?;

    let mut out = String::new();
    out.push_str(&format!(
        "DEMANDS={}\n",
        demands
            .as_slice()
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    ));
    if table {
        out.push_str(&report.table());
    } else {
        for entry in &report.plan.entries {
            let relays: Vec<String> = entry.routing.iter().map(|h| format!("h_{h}")).collect();
            out.push_str(&format!(
                "X_{} = {} via {}\n",
                entry.symbol,
                entry.composition(),
                relays.join(",")
            ));
        }
    }
    for line in report.machine_lines() {
        out.push_str(&line);
        out.push('\n');
    }
    if let Ok(expected) = rate_from_array(&array) {
        let agree = expected == report.rates;
        out.push_str(&format!("RATES_MATCH_ARRAY={agree}\n"));
    }
    print!("{out}");
    if report.decode_ok() {
        Ok(())
    } else {
        Err(semantic("decoding failed"))
    }
}

fn scheme_params(
    family: ParamsFamily,
    shape: &Shape,
    t: Option<usize>,
) -> Result<SchemeParams, Failure> {
    let result = match family {
        ParamsFamily::C1p | ParamsFamily::C1pp => {
            let (h, r, b, lambda) = shape.four()?;
            let variant = if matches!(family, ParamsFamily::C1p) {
                Variant::P
            } else {
                Variant::PPrime
            };
            params_construction1(h, r, b, lambda, variant)
        }
        ParamsFamily::C2 => {
            let (h, r, b, lambda) = shape.four()?;
            params_construction2(h, r, b, lambda)
        }
        ParamsFamily::Scheme2 => {
            params_scheme2(need(shape.h, "H")?, need(shape.r, "r")?, need(t, "t")?)
        }
        ParamsFamily::Scheme3 => {
            let (h, r, b, lambda) = shape.four()?;
            params_scheme3(h, r, b, lambda)
        }
    };
    result.map_err(|e| usage(e.to_string()))
}

fn cmd_params(family: ParamsFamily, shape: &Shape, t: Option<usize>, csv: bool) -> CmdResult {
    let p = scheme_params(family, shape, t)?;
    if csv {
        print!("{}", params_csv(&p));
        return Ok(());
    }
    println!("family={} {}", p.family, p.params);
    println!("source={}", p.source);
    println!("K={} H={} r={}", p.k, p.h, p.r);
    if let Some(c) = &p.counts {
        println!("(K,F,Z,S)=({},{},{},{})", c.k, c.f, c.z, c.s);
    }
    println!("M/N={} ({})", p.memory_ratio, decimal(&p.memory_ratio, 6));
    println!("R_h={} ({})", p.rate, decimal(&p.rate, 6));
    println!("F_eff={}", p.f_eff);
    println!("rows={} H*rows={}", p.rows, p.relay_split_packets());
    Ok(())
}

fn cmd_compare(
    h: usize,
    r: usize,
    grid: Option<&str>,
    exact: bool,
    check: bool,
    out: Option<&Path>,
) -> CmdResult {
    if r == 0 || r >= h || h > 64 {
        return Err(usage(format!("need 0 < r < H <= 64, got H = {h}, r = {r}")));
    }
    let grid = grid
        .map(parse_grid)
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let options = CompareOptions {
        grid,
        scheme1_mode: if exact {
            MatchMode::Exact
        } else {
            MatchMode::Closest
        },
        ..CompareOptions::default()
    };
    let rows = compare_table(h, r, &options);
    let csv = comparison_csv(h, r, &rows);
    match out {
        Some(path) => fs::write(path, &csv)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{csv}"),
    }
    if !check {
        return Ok(());
    }
    let report = check_dominance(&rows);
    let mut err = std::io::stderr().lock();
    let _ = writeln!(
        err,
        "dominance: {} rows vs scheme2, {} matched rows vs scheme3, {} violation(s)",
        report.scheme2_rows,
        report.scheme3_rows,
        report.violations.len()
    );
    if let Some(q) = &report.max_rate_over_scheme2 {
        let _ = writeln!(
            err,
            "max R_h(scheme1)/R_h(scheme2) = {} ({})",
            q,
            decimal(q, 3)
        );
    }
    for v in &report.violations {
        let _ = writeln!(err, "VIOLATION {v}");
    }
    if report.holds() {
        Ok(())
    } else {
        Err(semantic("dominance check failed"))
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Build {
            family,
            shape,
            k,
            t,
            out,
        } => cmd_build(family, &shape, k, t, out.as_deref()),
        Command::Validate { path, cpda } => cmd_validate(&path, cpda),
        Command::Simulate {
            path,
            files,
            seed,
            demands,
            unit,
            table,
        } => cmd_simulate(&path, files, seed, &demands, unit, table),
        Command::Params {
            family,
            shape,
            t,
            csv,
        } => cmd_params(family, &shape, t, csv),
        Command::Compare {
            h,
            r,
            grid,
            exact,
            check_dominance,
            out,
        } => cmd_compare(
            h,
            r,
            grid.as_deref(),
            exact,
            check_dominance,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
