//! Command table, argv parsing and the `key=value` configuration file.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches};

use crate::error::CliError;

/// One parameter of a subcommand.
#[derive(Debug, Clone, Copy)]
pub struct ParamSpec {
    /// Config-file key; the long flag is the same with `-` for `_`.
    pub key: &'static str,
    /// `None` for optional parameters without a default.
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn p(key: &'static str, default: Option<&'static str>, help: &'static str) -> ParamSpec {
    ParamSpec { key, default, help }
}

/// Subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sums,
    Ansatz,
    Nodal,
    Kernels,
    EnergyLandscape,
    EnergyMinimize,
    Verify,
}

const SUMS: &[ParamSpec] = &[
    p("variant", Some("alt_hat"), "odd, even, even_hat, alt or alt_hat (comma list)"),
    p("k", Some("1"), "odd exponent (comma list)"),
    p("n", Some("1024"), "even number of terms, at least 4 (comma list)"),
    p("x", Some("0"), "nonnegative offset (comma list)"),
];

const ANSATZ: &[ParamSpec] = &[
    p("m", Some("16"), "number of crown bubbles (even, at least 8)"),
    p("bbox", Some("2"), "half-width of the sampled square or cube"),
    p("res", Some("33"), "grid points per side of the planar grid"),
    p("z3", Some("0"), "height of the planar grid"),
    p("random", Some("0"), "if positive, sample this many seeded points in the cube instead"),
];

const NODAL: &[ParamSpec] = &[
    p("m", Some("16"), "number of crown bubbles (even, at least 8)"),
    p("bbox", Some("2.5"), "half-width of the scanned cube"),
    p("res", Some("96"), "grid cells per axis (at least 16)"),
    p("profile", Some("u_star"), "u_star, u_star_corrected or talenti"),
    p("obj", None, "also write an OBJ vertex list to this path"),
];

const KERNELS: &[ParamSpec] = &[
    p("k", Some("64"), "number of sectors (even, comma list)"),
    p("d", Some("auto"), "boundary offset d, or auto for log K/K (comma list)"),
    p("alpha_b", Some("0"), "angle of b (comma list)"),
    p("alpha_w", Some("0"), "angle of w (comma list)"),
    p("w", Some("1"), "|w| for gradient and Hessian reports"),
    p("samples", Some("0"), "if positive, draw this many seeded admissible (d, alpha_b, alpha_w, |w|) per K"),
    p("delta", Some("0.1"), "box parameter used for sampling"),
];

const ENERGY_COMMON: [ParamSpec; 7] = [
    p("k", Some("64"), "number of sectors (even, at least 16)"),
    p("lambda", Some("1"), "coefficient of the linear term"),
    p("delta", Some("0.1"), "box parameter in (0, 1)"),
    p("mode", Some("leading"), "leading or full"),
    p("m", Some("16"), "crown size for the proxy constants"),
    p("gnorm", None, "|grad q| at the nodal point; computed from the proxy if omitted"),
    p("cstar", None, "C_* at the nodal point; computed from the proxy if omitted"),
];

const LANDSCAPE_EXTRA: [ParamSpec; 7] = [
    p("axis", Some("eps"), "eps, a, d, alpha_b or alpha_w"),
    p("points", Some("101"), "number of sweep points (at least 2)"),
    p("eps", None, "base value of eps (default: critical eps at the reference d, clamped)"),
    p("a", None, "base value of a (default 0)"),
    p("d", None, "base value of d (default (log K - log log K / 2)/K)"),
    p("alpha_b", None, "base value of alpha_b (default 0)"),
    p("alpha_w", None, "base value of alpha_w (default 0)"),
];

const MINIMIZE_EXTRA: [ParamSpec; 2] = [
    p("grid", Some("9"), "seeding grid points per axis (at least 9)"),
    p("tol", Some("1e-4"), "golden-section tolerance per axis width"),
];

const VERIFY: &[ParamSpec] = &[];

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Sums,
        Command::Ansatz,
        Command::Nodal,
        Command::Kernels,
        Command::EnergyLandscape,
        Command::EnergyMinimize,
        Command::Verify,
    ];

    /// Space-separated subcommand path.
    pub fn name(self) -> &'static str {
        match self {
            Command::Sums => "sums",
            Command::Ansatz => "ansatz",
            Command::Nodal => "nodal",
            Command::Kernels => "kernels",
            Command::EnergyLandscape => "energy landscape",
            Command::EnergyMinimize => "energy minimize",
            Command::Verify => "verify",
        }
    }

    pub fn params(self) -> Vec<ParamSpec> {
        match self {
            Command::Sums => SUMS.to_vec(),
            Command::Ansatz => ANSATZ.to_vec(),
            Command::Nodal => NODAL.to_vec(),
            Command::Kernels => KERNELS.to_vec(),
            Command::EnergyLandscape => ENERGY_COMMON.iter().chain(&LANDSCAPE_EXTRA).copied().collect(),
            Command::EnergyMinimize => ENERGY_COMMON.iter().chain(&MINIMIZE_EXTRA).copied().collect(),
            Command::Verify => VERIFY.to_vec(),
        }
    }

    fn about(self) -> &'static str {
        match self {
            Command::Sums => "Finite cosecant-type sums: direct, contour and asymptotic values",
            Command::Ansatz => "Sample the crown profile U_* and its correction psi_{d,1}",
            Command::Nodal => "Point cloud of the nodal set of a profile",
            Command::Kernels => "Interaction kernel reports: direct sums, closed forms, asymptotics",
            Command::EnergyLandscape => "Reduced energy along one axis of the parameter box",
            Command::EnergyMinimize => "Minimise the reduced energy over the parameter box",
            Command::Verify => "Run the acceptance criteria and emit a pass/fail table",
        }
    }

    /// Output format used when neither a flag nor the config file sets one.
    pub fn default_format(self) -> Format {
        match self {
            Command::EnergyMinimize => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Output serialisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Usage(format!("unknown format '{s}' (expected csv or json)"))),
        }
    }
}

/// Fully merged configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Every declared parameter that has a value, after merging.
    pub params: BTreeMap<String, String>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    /// `verify --quick`.
    pub quick: bool,
}

/// Keys accepted in a config file besides the subcommand parameters.
const GLOBAL_KEYS: [&str; 3] = ["output", "format", "seed"];

/// Parses a `key=value` file. Blank lines and `#` comments are skipped;
/// keys may use `-` or `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Usage(format!("config line {}: expected key=value", i + 1)));
        };
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!("config line {}: duplicate key '{key}'", i + 1)));
        }
    }
    Ok(out)
}

fn load_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}

fn param_arg(spec: &ParamSpec) -> Arg {
    Arg::new(spec.key).long(spec.key.replace('_', "-")).value_name("VALUE").help(match spec.default {
        Some(d) => format!("{} [default: {d}]", spec.help),
        None => spec.help.to_string(),
    })
}

fn subcommand(c: Command, name: &'static str) -> clap::Command {
    let mut cmd = clap::Command::new(name).about(c.about());
    for spec in c.params() {
        cmd = cmd.arg(param_arg(&spec));
    }
    if c == Command::Verify {
        cmd = cmd.arg(
            Arg::new("quick").long("quick").action(ArgAction::SetTrue).help("run criteria 1-8 only (skips 9 and 10)"),
        );
    }
    cmd
}

/// The clap command tree.
pub fn cli() -> clap::Command {
    let global = |a: Arg| a.global(true);
    clap::Command::new("necklace")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical toolkit for crown-bubble necklace configurations")
        .subcommand_required(true)
        .arg(global(Arg::new("config").long("config").value_name("FILE").help("key=value file merged under the flags")))
        .arg(global(
            Arg::new("output").long("output").short('o').value_name("PATH").help("output file (default: stdout)"),
        ))
        .arg(global(Arg::new("format").long("format").value_name("FORMAT").help("csv or json")))
        .arg(global(Arg::new("seed").long("seed").value_name("N").help("seed for all random sampling [default: 2024]")))
        .subcommand(subcommand(Command::Sums, "sums"))
        .subcommand(subcommand(Command::Ansatz, "ansatz"))
        .subcommand(subcommand(Command::Nodal, "nodal"))
        .subcommand(subcommand(Command::Kernels, "kernels"))
        .subcommand(
            clap::Command::new("energy")
                .about("Reduced energy: landscape sweeps and minimisation")
                .subcommand_required(true)
                .subcommand(subcommand(Command::EnergyLandscape, "landscape"))
                .subcommand(subcommand(Command::EnergyMinimize, "minimize")),
        )
        .subcommand(subcommand(Command::Verify, "verify"))
}

fn from_flag(m: &ArgMatches, id: &str) -> Option<String> {
    match m.value_source(id) {
        Some(ValueSource::CommandLine) => m.get_one::<String>(id).cloned(),
        _ => None,
    }
}

/// Parses argv (including the program name) into a [`RunConfig`].
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = cli().try_get_matches_from(argv)?;
    let (command, sub) = match matches.subcommand() {
        Some(("sums", m)) => (Command::Sums, m),
        Some(("ansatz", m)) => (Command::Ansatz, m),
        Some(("nodal", m)) => (Command::Nodal, m),
        Some(("kernels", m)) => (Command::Kernels, m),
        Some(("verify", m)) => (Command::Verify, m),
        Some(("energy", m)) => match m.subcommand() {
            Some(("landscape", s)) => (Command::EnergyLandscape, s),
            Some(("minimize", s)) => (Command::EnergyMinimize, s),
            _ => return Err(CliError::Usage("energy needs a subcommand: landscape or minimize".into())),
        },
        _ => return Err(CliError::Usage("missing subcommand".into())),
    };
    // Global flags are propagated to the innermost subcommand.
    let file = match sub.get_one::<String>("config") {
        Some(path) => load_config(Path::new(path))?,
        None => BTreeMap::new(),
    };
    let specs = command.params();
    for key in file.keys() {
        if !GLOBAL_KEYS.contains(&key.as_str()) && !specs.iter().any(|s| s.key == key) {
            return Err(CliError::Usage(format!("unknown config key '{key}' for '{}'", command.name())));
        }
    }
    let mut params = BTreeMap::new();
    for spec in &specs {
        let value = from_flag(sub, spec.key)
            .or_else(|| file.get(spec.key).cloned())
            .or_else(|| spec.default.map(str::to_string));
        if let Some(v) = value {
            params.insert(spec.key.to_string(), v);
        }
    }
    let global = |key: &str| from_flag(sub, key).or_else(|| file.get(key).cloned());
    let format = match global("format") {
        Some(f) => Format::parse(&f)?,
        None => command.default_format(),
    };
    let seed = match global("seed") {
        Some(s) => s.parse().map_err(|_| CliError::Usage(format!("seed must be a nonnegative integer, got '{s}'")))?,
        None => necklace_verify::DEFAULT_SEED,
    };
    let output = global("output").filter(|s| !s.is_empty() && s != "-").map(PathBuf::from);
    let quick = command == Command::Verify && sub.get_flag("quick");
    Ok(RunConfig { command, params, output, format, seed, quick })
}

impl RunConfig {
    fn raw(&self, key: &str) -> Result<&str, CliError> {
        self.params.get(key).map(String::as_str).ok_or_else(|| CliError::Usage(format!("missing value for '{key}'")))
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    pub fn str(&self, key: &str) -> Result<String, CliError> {
        self.raw(key).map(str::to_string)
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key)?;
        parse_value(key, raw)
    }

    pub fn opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.params.get(key).map(|raw| parse_value(key, raw)).transpose()
    }

    /// Comma-separated list.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, CliError> {
        self.raw(key)?.split(',').map(|s| parse_value(key, s.trim())).collect()
    }

    /// Comma-separated list of raw strings.
    pub fn str_list(&self, key: &str) -> Result<Vec<String>, CliError> {
        Ok(self.raw(key)?.split(',').map(|s| s.trim().to_string()).collect())
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.parse().map_err(|_| CliError::Usage(format!("invalid value '{raw}' for '{key}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        std::iter::once("necklace").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn config_text_parsing() {
        let m = parse_config_text("# header\nk = 3\n\nalpha-b=0.1 # trailing\n").unwrap();
        assert_eq!(m.get("k").unwrap(), "3");
        assert_eq!(m.get("alpha_b").unwrap(), "0.1");
        assert!(parse_config_text("k=1\nk=2\n").is_err());
        assert!(parse_config_text("just words\n").is_err());
        assert!(parse_config_text("=4\n").is_err());
    }

    #[test]
    fn defaults_and_flags() {
        let c = parse_args(args("sums --n 64,128")).unwrap();
        assert_eq!(c.command, Command::Sums);
        assert_eq!(c.params["n"], "64,128");
        assert_eq!(c.params["variant"], "alt_hat");
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.seed, necklace_verify::DEFAULT_SEED);
        assert_eq!(c.list::<usize>("n").unwrap(), vec![64, 128]);
        let c = parse_args(args("energy minimize --alpha-w 0.01 --seed 9")).unwrap_err();
        assert_eq!(c.exit_code(), 2);
        let c = parse_args(args("energy landscape --alpha-w 0.01 --seed 9 --format json")).unwrap();
        assert_eq!(c.params["alpha_w"], "0.01");
        assert!(!c.has("gnorm"));
        assert_eq!((c.seed, c.format), (9, Format::Json));
        assert_eq!(parse_args(args("energy minimize")).unwrap().format, Format::Json);
        assert!(parse_args(args("verify --quick")).unwrap().quick);
    }

    #[test]
    fn usage_errors_exit_two() {
        for s in ["", "sums --bogus 1", "energy", "sums --format xml", "sums --seed -1", "nodal --obj"] {
            assert_eq!(parse_args(args(s)).unwrap_err().exit_code(), 2, "{s:?}");
        }
        assert_eq!(parse_args(args("--help")).unwrap_err().exit_code(), 0);
    }

    #[test]
    fn every_command_has_distinct_keys() {
        for c in Command::ALL {
            let specs = c.params();
            for (i, a) in specs.iter().enumerate() {
                assert!(!GLOBAL_KEYS.contains(&a.key));
                assert!(specs[i + 1..].iter().all(|b| b.key != a.key), "{} {}", c.name(), a.key);
            }
        }
    }
}
