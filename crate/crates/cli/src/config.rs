use std::fmt;
use std::path::PathBuf;

/// A problem in a `key = value` source, located by line and column (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: {}",
            self.source, self.line, self.column, self.message
        )
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinePreset {
    Custom,
    /// Base point and slope putting the binary Champernowne digits on the
    /// even crossings.
    Champernowne,
}

/// Every setting any subcommand reads. Line parameters stay as text so they
/// can be parsed into exact or named reals.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub line: LinePreset,
    pub p_re: String,
    pub p_im: String,
    pub alpha: String,
    pub guard_bits: u32,
    pub k_min: i64,
    pub k_max: i64,
    pub count: u64,
    pub radius: f64,
    pub n_logr: usize,
    pub n_theta: usize,
    pub eps: f64,
    pub target_re: f64,
    pub target_im: f64,
    pub targets: usize,
    pub seed: u64,
    pub alpha0: f64,
    pub alpha1: f64,
    pub cap: usize,
    pub depth: usize,
    pub n_min: Option<u32>,
    pub tree_in: Option<PathBuf>,
    pub verify: bool,
    pub fixture_depth: Option<u32>,
    pub beta: f64,
    pub mdp_eps: Option<f64>,
    pub t: Vec<f64>,
    pub samples: usize,
    pub m_threshold: f64,
    pub eta: f64,
    pub lines: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub curve: String,
    /// `xmin, xmax, ymin, ymax`; each curve has its own default.
    pub window: Option<[f64; 4]>,
    pub resolution: usize,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            line: LinePreset::Custom,
            p_re: "0".into(),
            p_im: "0".into(),
            alpha: "0.25".into(),
            guard_bits: 48,
            k_min: 0,
            k_max: 63,
            count: 1000,
            radius: std::f64::consts::E,
            n_logr: 64,
            n_theta: 64,
            eps: 1e-3,
            target_re: -1.0,
            target_im: 0.0,
            targets: 0,
            seed: 1,
            alpha0: 0.2,
            alpha1: 0.3,
            cap: 16,
            depth: 3,
            n_min: None,
            tree_in: None,
            verify: false,
            fixture_depth: None,
            beta: 1.01,
            mdp_eps: None,
            t: vec![500.0],
            samples: 1_000_000,
            m_threshold: 20.0,
            eta: 0.1,
            lines: 50,
            alpha_min: 0.05,
            alpha_max: 1.0,
            curve: "spiral".into(),
            window: None,
            resolution: 4000,
            t_min: -20.0,
            t_max: 20.0,
        }
    }
}

pub const KEYS: &[&str] = &[
    "line",
    "p_re",
    "p_im",
    "alpha",
    "guard_bits",
    "k_min",
    "k_max",
    "count",
    "radius",
    "n_logr",
    "n_theta",
    "eps",
    "target_re",
    "target_im",
    "targets",
    "seed",
    "alpha0",
    "alpha1",
    "cap",
    "depth",
    "n_min",
    "tree_in",
    "verify",
    "fixture_depth",
    "beta",
    "mdp_eps",
    "t",
    "samples",
    "m_threshold",
    "eta",
    "lines",
    "alpha_min",
    "alpha_max",
    "curve",
    "window",
    "resolution",
    "t_min",
    "t_max",
];

fn num<T: std::str::FromStr>(v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("{v:?} is not a valid number"))
}

fn finite(v: &str) -> Result<f64, String> {
    let x: f64 = num(v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("{v:?} is not finite"))
    }
}

fn list(v: &str) -> Result<Vec<f64>, String> {
    v.split(',').map(|s| finite(s.trim())).collect()
}

fn boolean(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("{v:?} is not a boolean")),
    }
}

impl RunConfig {
    /// Defaults tuned to the named subcommand.
    pub fn for_command(command: &str) -> Self {
        let mut c = RunConfig::default();
        match command {
            "fracs" => c.count = 64,
            "theta" => c.count = 10,
            "gaps" => c.count = 5000,
            "coverage" => c.count = 20_000,
            "witness" => c.count = 100_000,
            "sample-thm1" => {
                c.count = 10_000;
                c.n_logr = 32;
                c.n_theta = 32;
                c.guard_bits = 32;
            }
            _ => {}
        }
        c
    }

    /// Applies one setting, returning a message for unknown keys and bad values.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "line" => {
                self.line = match value {
                    "custom" => LinePreset::Custom,
                    "champernowne" => LinePreset::Champernowne,
                    _ => {
                        return Err(format!(
                            "unknown line preset {value:?} (custom, champernowne)"
                        ))
                    }
                }
            }
            "p_re" => self.p_re = value.into(),
            "p_im" => self.p_im = value.into(),
            "alpha" => self.alpha = value.into(),
            "guard_bits" => self.guard_bits = num(value)?,
            "k_min" => self.k_min = num(value)?,
            "k_max" => self.k_max = num(value)?,
            "count" => self.count = num(value)?,
            "radius" => self.radius = finite(value)?,
            "n_logr" => self.n_logr = num(value)?,
            "n_theta" => self.n_theta = num(value)?,
            "eps" => self.eps = finite(value)?,
            "target_re" => self.target_re = finite(value)?,
            "target_im" => self.target_im = finite(value)?,
            "targets" => self.targets = num(value)?,
            "seed" => self.seed = num(value)?,
            "alpha0" => self.alpha0 = finite(value)?,
            "alpha1" => self.alpha1 = finite(value)?,
            "cap" => self.cap = num(value)?,
            "depth" => self.depth = num(value)?,
            "n_min" => self.n_min = Some(num(value)?),
            "tree_in" => self.tree_in = Some(PathBuf::from(value)),
            "verify" => self.verify = boolean(value)?,
            "fixture_depth" => self.fixture_depth = Some(num(value)?),
            "beta" => self.beta = finite(value)?,
            "mdp_eps" => self.mdp_eps = Some(finite(value)?),
            "t" => self.t = list(value)?,
            "samples" => self.samples = num(value)?,
            "m_threshold" => self.m_threshold = finite(value)?,
            "eta" => self.eta = finite(value)?,
            "lines" => self.lines = num(value)?,
            "alpha_min" => self.alpha_min = finite(value)?,
            "alpha_max" => self.alpha_max = finite(value)?,
            "curve" => self.curve = value.into(),
            "window" => {
                let w = list(value)?;
                let w: [f64; 4] = w
                    .try_into()
                    .map_err(|_| "window needs four numbers: xmin,xmax,ymin,ymax".to_string())?;
                if !(w[0] < w[1] && w[2] < w[3]) {
                    return Err("window needs xmin < xmax and ymin < ymax".into());
                }
                self.window = Some(w);
            }
            "resolution" => self.resolution = num(value)?,
            "t_min" => self.t_min = finite(value)?,
            "t_max" => self.t_max = finite(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn is_key(key: &str) -> bool {
        KEYS.contains(&key)
    }

    /// Applies a `key = value` text. `#` starts a comment; blank lines are skipped.
    pub fn apply_text(&mut self, source: &str, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let err = |column: usize, message: String| ConfigError {
                source: source.into(),
                line: i + 1,
                column,
                message,
            };
            let indent = content.len() - content.trim_start().len();
            let Some(eq) = content.find('=') else {
                return Err(err(indent + 1, "expected key = value".into()));
            };
            let key = content[..eq].trim();
            if key.is_empty() {
                return Err(err(indent + 1, "missing key before '='".into()));
            }
            if !Self::is_key(key) {
                return Err(err(indent + 1, format!("unknown key {key:?}")));
            }
            let after = &content[eq + 1..];
            let value = after.trim();
            let value_col = eq + 2 + (after.len() - after.trim_start().len());
            if value.is_empty() {
                return Err(err(value_col, format!("missing value for {key:?}")));
            }
            self.set(key, value).map_err(|m| err(value_col, m))?;
        }
        Ok(())
    }

    /// Applies a single `key=value` override.
    pub fn apply_override(&mut self, text: &str) -> Result<(), ConfigError> {
        self.apply_text("--set", text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_with_comments() {
        let mut c = RunConfig::default();
        c.apply_text(
            "f",
            "# header\n\nalpha = 0.1   # slope\np_im=pi/2\nt = 50, 200,800\n",
        )
        .unwrap();
        assert_eq!(c.alpha, "0.1");
        assert_eq!(c.p_im, "pi/2");
        assert_eq!(c.t, vec![50.0, 200.0, 800.0]);
    }

    #[test]
    fn unknown_key_reports_position() {
        let mut c = RunConfig::default();
        let e = c
            .apply_text("run.cfg", "alpha = 0.1\n  colour = red\n")
            .unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert_eq!(e.to_string(), "run.cfg:2:3: unknown key \"colour\"");
    }

    #[test]
    fn bad_value_points_at_value() {
        let mut c = RunConfig::default();
        let e = c.apply_text("f", "count =  12x\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 10));
        let e = c.apply_text("f", "window = 1,2,3\n").unwrap_err();
        assert!(e.message.contains("four numbers"));
        let e = c.apply_text("f", "just words\n").unwrap_err();
        assert_eq!(e.column, 1);
    }

    #[test]
    fn every_listed_key_is_settable() {
        for key in KEYS {
            let mut c = RunConfig::default();
            let value = match *key {
                "line" => "champernowne",
                "curve" | "p_re" | "p_im" | "alpha" | "tree_in" => "x",
                "verify" => "true",
                "window" => "0,1,0,1",
                _ => "2",
            };
            c.set(key, value).unwrap_or_else(|e| panic!("{key}: {e}"));
        }
        assert!(RunConfig::default().set("nope", "1").is_err());
    }
}
