//! Run configuration: defaults, flat key=value config file, command-line
//! flags. Precedence is flags over config file over built-in defaults.

use std::collections::HashMap;
use std::path::PathBuf;

use cfc_core::NoiseParams64;

use crate::UsageError;

pub const USAGE: &str = "\
cfc - chained-MZI counterfactual communication experiments

USAGE:
  cfc --command <theory|sweep|transmit|image> [FLAGS]

COMMANDS:
  theory     closed-form error and violation curves over the (n, m) grid
  sweep      seeded Monte Carlo bit-error rates over the (n, m, bit) grid
  transmit   send a seed-derived random bit string, report one CSV row
  image      send a plain P1 bitmap (--in), write the received image
             (--out) and report one CSV row on stdout

FLAGS (flag > config file > default):
  --command NAME       command to run (required)
  --n LIST             beamsplitter counts, e.g. 6 or 2,3,4 or 2..6  [6]
  --m LIST             photons per bit, e.g. 320 or 10,50,320,500    [320]
  --m-range A..B[..S]  photons per bit as a range with optional step
  --trials K           Monte Carlo trials per sweep cell             [1000]
  --seed U64           base seed; all randomness derives from it     [1]
  --bits K             message length for transmit                   [256]
  --heralding H        heralding efficiency in [0,1]                 [0.03]
  --det-eff ETA        detector efficiency in (0,1]                  [0.9]
  --visibility V       per-MZI visibility in (0.5,1]                 [0.9994]
  --backscatter EPS    SWAP backscatter probability in [0,1]         [0.01]
  --dark-prob D        dark-count probability per window in [0,1]    [1e-6]
  --in PATH            input image (plain P1) for image
  --out PATH           output file: CSV for theory/sweep/transmit,
                       received image for image (required there);
                       stdout when omitted
  --config PATH        flat key=value file ('#' comments); keys are the
                       flag names without the leading dashes
  --help               this text

EXIT CODES:
  0 success, 2 usage error, 3 input-data error
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Theory,
    Sweep,
    Transmit,
    Image,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub n_list: Vec<usize>,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub bits: usize,
    pub noise: NoiseParams64,
    pub input_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

const KEYS: &[&str] = &[
    "command",
    "n",
    "m",
    "m-range",
    "trials",
    "seed",
    "bits",
    "heralding",
    "det-eff",
    "visibility",
    "backscatter",
    "dark-prob",
    "in",
    "out",
];

/// Flat key=value settings, later sources overriding earlier ones.
#[derive(Debug, Default)]
struct Settings {
    map: HashMap<String, String>,
}

impl Settings {
    fn set(&mut self, key: &str, value: String) -> Result<(), UsageError> {
        if !KEYS.contains(&key) {
            return Err(usage(format!("unknown setting {key:?}")));
        }
        self.map.insert(key.to_string(), value);
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(String::as_str)
    }

    fn parse_config_file(&mut self, path: &str) -> Result<(), UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config file {path:?}: {e}")))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                usage(format!(
                    "config file {path:?} line {}: expected key=value, got {raw:?}",
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim().to_string())?;
        }
        Ok(())
    }
}

fn parse_flags(args: &[String]) -> Result<Settings, UsageError> {
    let mut flags = Settings::default();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(stripped) = arg.strip_prefix("--") else {
            return Err(usage(format!("unexpected argument {arg:?}")));
        };
        let (key, value) = match stripped.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let value = it
                    .next()
                    .ok_or_else(|| usage(format!("missing value for --{stripped}")))?;
                (stripped.to_string(), value.clone())
            }
        };
        if key == "config" {
            // Handled in a first pass; skip here.
            continue;
        }
        flags.set(&key, value)?;
    }
    Ok(flags)
}

fn config_file_path(args: &[String]) -> Result<Option<String>, UsageError> {
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        if let Some(v) = arg.strip_prefix("--config=") {
            return Ok(Some(v.to_string()));
        }
        if arg == "--config" {
            return Ok(Some(
                it.next()
                    .ok_or_else(|| usage("missing value for --config"))?
                    .clone(),
            ));
        }
    }
    Ok(None)
}

fn parse_count(settings: &Settings, key: &str, default: usize) -> Result<usize, UsageError> {
    match settings.get(key) {
        None => Ok(default),
        Some(v) => v
            .parse::<usize>()
            .map_err(|_| usage(format!("invalid {key} {v:?}: expected a positive integer"))),
    }
}

fn parse_prob(
    settings: &Settings,
    key: &str,
    default: f64,
    field: &str,
) -> Result<f64, UsageError> {
    let value = match settings.get(key) {
        None => default,
        Some(v) => v
            .parse::<f64>()
            .map_err(|_| usage(format!("invalid {key} {v:?}: expected a number")))?,
    };
    if !(0.0..=1.0).contains(&value) {
        return Err(usage(format!("{field} {value} is outside [0, 1]")));
    }
    Ok(value)
}

/// Parse `a`, `a,b,c` and `a..b` (inclusive) items into a sorted list.
fn parse_list(spec: &str, key: &str) -> Result<Vec<usize>, UsageError> {
    let mut out = Vec::new();
    for item in spec.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(usage(format!("empty item in {key} list {spec:?}")));
        }
        if let Some((a, b)) = item.split_once("..") {
            let lo: usize = a
                .trim()
                .parse()
                .map_err(|_| usage(format!("invalid range start in {key} {item:?}")))?;
            let hi: usize = b
                .trim()
                .parse()
                .map_err(|_| usage(format!("invalid range end in {key} {item:?}")))?;
            if hi < lo {
                return Err(usage(format!("range {item:?} in {key} is reversed")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                item.parse()
                    .map_err(|_| usage(format!("invalid {key} entry {item:?}")))?,
            );
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Parse `a..b` or `a..b..step` (inclusive).
fn parse_range(spec: &str) -> Result<Vec<usize>, UsageError> {
    let parts: Vec<&str> = spec.split("..").collect();
    let bad = || {
        usage(format!(
            "invalid m-range {spec:?}: expected a..b or a..b..step"
        ))
    };
    if parts.len() != 2 && parts.len() != 3 {
        return Err(bad());
    }
    let lo: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: usize = parts[1].trim().parse().map_err(|_| bad())?;
    let step: usize = if parts.len() == 3 {
        parts[2].trim().parse().map_err(|_| bad())?
    } else {
        1
    };
    if hi < lo || step == 0 {
        return Err(bad());
    }
    Ok((lo..=hi).step_by(step).collect())
}

impl RunConfig {
    pub fn from_args(args: &[String]) -> Result<Self, UsageError> {
        let mut settings = Settings::default();
        if let Some(path) = config_file_path(args)? {
            settings.parse_config_file(&path)?;
        }
        let flags = parse_flags(args)?;
        // A photon-count flag overrides either photon-count file key.
        if flags.map.contains_key("m") {
            settings.map.remove("m-range");
        }
        if flags.map.contains_key("m-range") {
            settings.map.remove("m");
        }
        for (k, v) in flags.map {
            settings.map.insert(k, v);
        }

        let command = match settings.get("command") {
            None => return Err(usage("--command is required")),
            Some("theory") => Command::Theory,
            Some("sweep") => Command::Sweep,
            Some("transmit") => Command::Transmit,
            Some("image") => Command::Image,
            Some(other) => {
                return Err(usage(format!(
                    "unknown command {other:?}: expected theory, sweep, transmit or image"
                )))
            }
        };

        let n_list = parse_list(settings.get("n").unwrap_or("6"), "n")?;
        if n_list.is_empty() {
            return Err(usage("the n list is empty"));
        }
        for &n in &n_list {
            if n < 2 {
                return Err(usage(format!(
                    "n = {n} is below the minimum chain length 2"
                )));
            }
        }

        let m_list = match (settings.get("m"), settings.get("m-range")) {
            (Some(_), Some(_)) => return Err(usage("--m and --m-range are mutually exclusive")),
            (Some(spec), None) => parse_list(spec, "m")?,
            (None, Some(spec)) => parse_range(spec)?,
            (None, None) => vec![320],
        };
        if m_list.is_empty() {
            return Err(usage("the m list is empty"));
        }
        if m_list.contains(&0) {
            return Err(usage("m = 0: a bit needs at least one photon"));
        }

        let trials = parse_count(&settings, "trials", 1000)?;
        if trials == 0 {
            return Err(usage("trials must be at least 1"));
        }
        let bits = parse_count(&settings, "bits", 256)?;
        if bits == 0 {
            return Err(usage("bits must be at least 1"));
        }
        let seed = match settings.get("seed") {
            None => 1,
            Some(v) => v
                .parse::<u64>()
                .map_err(|_| usage(format!("invalid seed {v:?}: expected a 64-bit integer")))?,
        };

        let defaults = NoiseParams64::device_defaults();
        let noise = NoiseParams64 {
            heralding_efficiency: parse_prob(
                &settings,
                "heralding",
                defaults.heralding_efficiency,
                "heralding efficiency",
            )?,
            detector_efficiency: parse_prob(
                &settings,
                "det-eff",
                defaults.detector_efficiency,
                "detector efficiency",
            )?,
            dark_prob: parse_prob(
                &settings,
                "dark-prob",
                defaults.dark_prob,
                "dark probability",
            )?,
            coincidence_window_ns: defaults.coincidence_window_ns,
            visibility: parse_prob(&settings, "visibility", defaults.visibility, "visibility")?,
            swap_backscatter: parse_prob(
                &settings,
                "backscatter",
                defaults.swap_backscatter,
                "swap backscatter",
            )?,
        };
        if noise.detector_efficiency == 0.0 {
            return Err(usage("detector efficiency must be positive"));
        }
        if noise.visibility <= 0.5 {
            return Err(usage(format!(
                "visibility {} is at or below 0.5; the noise model does not apply",
                noise.visibility
            )));
        }

        let input_path = settings.get("in").map(PathBuf::from);
        let output_path = settings.get("out").map(PathBuf::from);
        if command == Command::Image {
            if input_path.is_none() {
                return Err(usage("image needs --in <path to a plain P1 bitmap>"));
            }
            if output_path.is_none() {
                return Err(usage("image needs --out <path for the received bitmap>"));
            }
        }

        Ok(Self {
            command,
            n_list,
            m_list,
            trials,
            seed,
            bits,
            noise,
            input_path,
            output_path,
        })
    }

    /// Single-value accessors for commands that take one n and one m.
    pub fn single_n(&self) -> Result<usize, UsageError> {
        match self.n_list[..] {
            [n] => Ok(n),
            _ => Err(usage("this command takes a single --n")),
        }
    }

    pub fn single_m(&self) -> Result<usize, UsageError> {
        match self.m_list[..] {
            [m] => Ok(m),
            _ => Err(usage("this command takes a single --m")),
        }
    }
}
