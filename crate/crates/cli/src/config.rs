//! The run manifest: a flat `key = value` text format.
//!
//! ```text
//! # comment, to the end of the line
//! seed = 42                  # keys before the first `experiment` apply to every block
//! experiment = exp-operator  # opens a block
//! n = 1000, 10000
//! eps = 0.1, 0.05, 0.01
//! experiment = fermat-torricelli
//! n = 50
//! m = 10
//! N = 20
//! lambda_radius = 10
//! ```
//!
//! Keys: `experiment`, `n`, `p`, `q`, `m`, `N`, `eps`, `seed`, `trials`,
//! `search_factor`, `m_init` (`quotient` or a positive number),
//! `lambda_radius`, `max_iterations`. Hyphens and underscores in keys are
//! interchangeable. List values are comma-separated; a block runs the
//! cartesian product of its dimension lists. Missing keys take the desk-scale
//! defaults of the experiment.

use std::fmt::{self, Write as _};

use vi_bench::{Dims, ExperimentConfig, ExperimentKind};
use vi_core::MInit;

/// One problem found in a manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    /// 1-based line, when the problem is tied to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn issue(line: usize, message: impl Into<String>) -> Issue {
    Issue {
        line: Some(line),
        message: message.into(),
    }
}

/// Values set for one experiment; `None` means "use the default".
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub experiment: Option<ExperimentKind>,
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub q: Option<Vec<usize>>,
    pub m: Option<Vec<usize>>,
    pub big_n: Option<Vec<usize>>,
    pub eps: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub search_factor: Option<f64>,
    pub m_init: Option<MInit>,
    pub lambda_radius: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl Block {
    /// Fills unset fields from `other`.
    pub fn inherit(&mut self, other: &Block) {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if self.$f.is_none() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(experiment, n, p, q, m, big_n, eps, seed, trials, search_factor, m_init, lambda_radius, max_iterations);
    }

    /// Overwrites every field set in `other`.
    pub fn override_with(&mut self, other: &Block) {
        macro_rules! put {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        put!(n, p, q, m, big_n, eps, seed, trials, search_factor, m_init, lambda_radius, max_iterations);
    }

    /// A copy without the dimension keys that `kind` does not take.
    pub fn restricted_to(&self, kind: ExperimentKind) -> Block {
        let allowed = allowed_dims(kind);
        let keep = |key: &str, v: &Option<Vec<usize>>| if allowed.contains(&key) { v.clone() } else { None };
        Block {
            n: keep("n", &self.n),
            p: keep("p", &self.p),
            q: keep("q", &self.q),
            m: keep("m", &self.m),
            big_n: keep("N", &self.big_n),
            ..self.clone()
        }
    }

    fn dimension_keys(&self) -> [(&'static str, bool); 5] {
        [
            ("n", self.n.is_some()),
            ("p", self.p.is_some()),
            ("q", self.q.is_some()),
            ("m", self.m.is_some()),
            ("N", self.big_n.is_some()),
        ]
    }
}

/// Dimension keys of `kind`.
pub fn allowed_dims(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::ExpOperator => &["n"],
        ExperimentKind::NonsmoothSaddle => &["p", "q"],
        ExperimentKind::FermatTorricelli => &["n", "m", "N"],
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Option<Vec<T>> {
    v.split(',').map(|s| s.trim().parse().ok()).collect()
}

fn parse_m_init(v: &str) -> Option<MInit> {
    match v {
        "quotient" => Some(MInit::DifferenceQuotient),
        _ => v.parse().ok().map(MInit::Fixed),
    }
}

fn set_key(block: &mut Block, key: &str, value: &str, line: usize, seen: &mut Vec<String>) -> Result<(), Issue> {
    let key = if key == "N" { "N".to_string() } else { key.replace('-', "_") };
    if seen.contains(&key) {
        return Err(issue(line, format!("{key}: set twice in the same block")));
    }
    seen.push(key.clone());
    let bad = |what: &str| issue(line, format!("{key}: cannot parse {value:?} as {what}"));
    match key.as_str() {
        "n" => block.n = Some(parse_list(value).ok_or_else(|| bad("a list of integers"))?),
        "p" => block.p = Some(parse_list(value).ok_or_else(|| bad("a list of integers"))?),
        "q" => block.q = Some(parse_list(value).ok_or_else(|| bad("a list of integers"))?),
        "m" => block.m = Some(parse_list(value).ok_or_else(|| bad("a list of integers"))?),
        "N" => block.big_n = Some(parse_list(value).ok_or_else(|| bad("a list of integers"))?),
        "eps" => block.eps = Some(parse_list(value).ok_or_else(|| bad("a list of numbers"))?),
        "seed" => block.seed = Some(value.parse().map_err(|_| bad("an unsigned 64-bit integer"))?),
        "trials" => block.trials = Some(value.parse().map_err(|_| bad("an integer"))?),
        "search_factor" => block.search_factor = Some(value.parse().map_err(|_| bad("a number"))?),
        "m_init" => block.m_init = Some(parse_m_init(value).ok_or_else(|| bad("`quotient` or a number"))?),
        "lambda_radius" => block.lambda_radius = Some(value.parse().map_err(|_| bad("a number"))?),
        "max_iterations" => block.max_iterations = Some(value.parse().map_err(|_| bad("an integer"))?),
        _ => return Err(issue(line, format!("unknown key {key:?}"))),
    }
    Ok(())
}

/// Splits a manifest into the shared block and one block per experiment.
/// Every malformed line is reported.
pub fn parse_blocks(text: &str) -> Result<(Block, Vec<Block>), Vec<Issue>> {
    let mut issues = Vec::new();
    let mut shared = Block::default();
    let mut shared_seen = Vec::new();
    let mut blocks: Vec<(Block, Vec<String>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(issue(line, format!("expected `key = value`, found {content:?}")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if key == "experiment" {
            match value.parse::<ExperimentKind>() {
                Ok(kind) => blocks.push((
                    Block {
                        experiment: Some(kind),
                        ..Block::default()
                    },
                    Vec::new(),
                )),
                Err(e) => issues.push(issue(line, format!("experiment: {e}"))),
            }
            continue;
        }
        let (block, seen) = match blocks.last_mut() {
            Some((b, s)) => (b, s),
            None => (&mut shared, &mut shared_seen),
        };
        if let Err(e) = set_key(block, key, value, line, seen) {
            issues.push(e);
        }
    }
    if blocks.is_empty() && issues.is_empty() {
        issues.push(Issue {
            line: None,
            message: "missing experiment".into(),
        });
    }
    if issues.is_empty() {
        Ok((shared, blocks.into_iter().map(|(b, _)| b).collect()))
    } else {
        Err(issues)
    }
}

/// Resolves a block with every field set into an experiment configuration,
/// listing each violated constraint.
pub fn resolve(block: &Block) -> Result<ExperimentConfig, Vec<Issue>> {
    let kind = block.experiment.ok_or_else(|| {
        vec![Issue {
            line: None,
            message: "missing experiment".into(),
        }]
    })?;
    let mut issues: Vec<Issue> = Vec::new();
    let allowed = allowed_dims(kind);
    for (key, set) in block.dimension_keys() {
        if set && !allowed.contains(&key) {
            issues.push(Issue {
                line: None,
                message: format!("{key}: not a dimension of {}", kind.id()),
            });
        }
    }
    let mut cfg = ExperimentConfig::new(kind);
    let first = cfg.dims[0];
    let list = |v: &Option<Vec<usize>>, d: usize| v.clone().unwrap_or_else(|| vec![d]);
    cfg.dims = match kind {
        ExperimentKind::ExpOperator => match &block.n {
            Some(ns) => ns.iter().map(|&n| Dims::exp(n)).collect(),
            None => cfg.dims,
        },
        ExperimentKind::NonsmoothSaddle => {
            let (ps, qs) = (list(&block.p, first.a), list(&block.q, first.b));
            ps.iter().flat_map(|&p| qs.iter().map(move |&q| Dims::saddle(p, q))).collect()
        }
        ExperimentKind::FermatTorricelli => {
            let (ns, ms, bs) = (list(&block.n, first.a), list(&block.m, first.b), list(&block.big_n, first.c));
            let mut d = Vec::new();
            for &n in &ns {
                for &m in &ms {
                    for &b in &bs {
                        d.push(Dims::fts(n, m, b));
                    }
                }
            }
            d
        }
    };
    if let Some(e) = &block.eps {
        cfg.eps = e.clone();
    }
    if let Some(s) = block.seed {
        cfg.seed = s;
    }
    if let Some(t) = block.trials {
        cfg.trials = t;
    }
    if let Some(a) = block.search_factor {
        cfg.search_factor = a;
    }
    if let Some(m) = block.m_init {
        cfg.m_init = m;
    }
    if let Some(r) = block.lambda_radius {
        cfg.lambda_radius = r;
    }
    if let Some(k) = block.max_iterations {
        cfg.max_iterations = k;
    }
    issues.extend(cfg.violations().into_iter().map(|message| Issue {
        line: None,
        message: format!("{}: {message}", kind.id()),
    }));
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(issues)
    }
}

fn join<T: fmt::Display>(v: impl IntoIterator<Item = T>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn unique(v: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Writes a configuration back in manifest form. Parsing the result yields
/// the same configuration.
pub fn render(configs: &[ExperimentConfig]) -> String {
    let mut s = String::new();
    for cfg in configs {
        let _ = writeln!(s, "experiment = {}", cfg.experiment.flag_name());
        let a = unique(cfg.dims.iter().map(|d| d.a));
        let b = unique(cfg.dims.iter().map(|d| d.b));
        let c = unique(cfg.dims.iter().map(|d| d.c));
        match cfg.experiment {
            ExperimentKind::ExpOperator => {
                let _ = writeln!(s, "n = {}", join(a));
            }
            ExperimentKind::NonsmoothSaddle => {
                let _ = writeln!(s, "p = {}\nq = {}", join(a), join(b));
            }
            ExperimentKind::FermatTorricelli => {
                let _ = writeln!(s, "n = {}\nm = {}\nN = {}", join(a), join(b), join(c));
            }
        }
        let m_init = match cfg.m_init {
            MInit::DifferenceQuotient => "quotient".to_string(),
            MInit::Fixed(m) => m.to_string(),
        };
        let _ = writeln!(s, "eps = {}", join(cfg.eps.iter()));
        let _ = writeln!(s, "seed = {}", cfg.seed);
        let _ = writeln!(s, "trials = {}", cfg.trials);
        let _ = writeln!(s, "search_factor = {}", cfg.search_factor);
        let _ = writeln!(s, "m_init = {m_init}");
        if cfg.experiment == ExperimentKind::FermatTorricelli {
            let _ = writeln!(s, "lambda_radius = {}", cfg.lambda_radius);
        }
        let _ = writeln!(s, "max_iterations = {}", cfg.max_iterations);
    }
    s
}

/// Resolves experiment blocks: each inherits the unset keys of `shared`,
/// then takes the applicable values of `overrides`; a seed missing from all
/// of them falls back to `fallback_seed`.
pub fn resolve_all(
    shared: &Block,
    blocks: Vec<Block>,
    overrides: &Block,
    fallback_seed: Option<u64>,
) -> Result<Vec<ExperimentConfig>, Vec<Issue>> {
    let mut out = Vec::new();
    let mut issues = Vec::new();
    for mut b in blocks {
        b.inherit(shared);
        if let Some(kind) = b.experiment {
            b.override_with(&overrides.restricted_to(kind));
        }
        if b.seed.is_none() {
            b.seed = fallback_seed;
        }
        match resolve(&b) {
            Ok(c) => out.push(c),
            Err(e) => issues.extend(e),
        }
    }
    if issues.is_empty() {
        Ok(out)
    } else {
        Err(issues)
    }
}

/// Parses a manifest into fully resolved configurations.
pub fn load(text: &str, overrides: &Block, fallback_seed: Option<u64>) -> Result<Vec<ExperimentConfig>, Vec<Issue>> {
    let (shared, blocks) = parse_blocks(text)?;
    resolve_all(&shared, blocks, overrides, fallback_seed)
}
