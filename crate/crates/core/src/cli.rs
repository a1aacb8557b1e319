//! Command-line front end: subcommands over the library modules, config
//! resolution (flags > JSON config file > defaults), and bit-stable
//! output (sorted keys, fixed decimal formatting, big integers as
//! decimal strings).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Map, Value};

use crate::census;
use crate::config::Caps;
use crate::count;
use crate::dist::{self, MomentSource};
use crate::error::{Error, Result};
use crate::formulas::{self, ModelParams};
use crate::graph::Graph;
use crate::logreal::LogReal;
use crate::switching::{self, Transition};

/// Fixed 12-significant-digit decimal formatting for reals.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() {
        format!("{x:.11e}")
    } else {
        format!("{x}")
    }
}

fn real(x: f64) -> Value {
    Value::String(fmt_real(x))
}

fn big(x: &BigUint) -> Value {
    Value::String(x.to_string())
}

fn rational(x: &BigRational) -> Value {
    Value::String(format!("{}/{}", x.numer(), x.denom()))
}

fn log_real(x: LogReal) -> Value {
    json!({
        "ln": real(x.ln_magnitude()),
        "sign": x.sign(),
        "value": real(x.to_f64()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Gnp,
    Gnm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SourceArg {
    Exact,
    Mc,
}

#[derive(Parser, Debug)]
#[command(
    name = "matchstat",
    version,
    about = "Exact matching counts and distribution experiments for random graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// JSON config file; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format (each subcommand has a natural default).
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,

    /// Cap on worker threads; never affects results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Master seed for all randomized subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override: vertex cap of the polynomial counting kernel.
    #[arg(long, global = true)]
    poly_n_cap: Option<u32>,

    /// Override: cap on enumerated matchings.
    #[arg(long, global = true)]
    enum_cap: Option<u64>,

    /// Override: cap on visited ordered pairs.
    #[arg(long, global = true)]
    pair_cap: Option<u64>,

    /// Override: cap on visited tuples.
    #[arg(long, global = true)]
    tuple_cap: Option<u64>,

    /// Override: regime threshold constant c.
    #[arg(long, global = true)]
    regime_c: Option<f64>,

    /// Override: regime boundary tolerance.
    #[arg(long, global = true)]
    regime_tol: Option<f64>,

    /// Override: tail cut fraction delta.
    #[arg(long, global = true)]
    delta: Option<f64>,

    /// Override: hard limit on the zero-count exclusion fraction.
    #[arg(long, global = true)]
    max_zero_frac: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Read a graph file and emit its exact matching-count vector.
    Count {
        /// Graph file path, or "-" for stdin.
        #[arg(long)]
        input: String,
        /// Also write the parsed graph back in canonical text form.
        #[arg(long)]
        write_canonical: Option<PathBuf>,
    },
    /// Closed-form statistics for (n, l, p[, m]).
    Formulas {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        m: Option<u64>,
    },
    /// Exact pair census table f(i, n2) of K_n.
    Pairs {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: usize,
    },
    /// Tuple class counts and exact central-moment tuple sums.
    Tuples {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        k: usize,
        /// Rational probability ("2/5" or a decimal string).
        #[arg(long)]
        p: Option<String>,
    },
    /// Double-counting identity for one switching transition.
    VerifySwitching {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: usize,
        /// "i:A-B" for shared-edge A->B, "n2:I,A-B" for shared-vertex.
        #[arg(long)]
        transition: String,
    },
    /// Monte Carlo distribution experiment.
    McDist {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Central moments vs the predicted values.
    Moments {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: u32,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        #[arg(long, value_enum, default_value_t = SourceArg::Exact)]
        source: SourceArg,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Scan matching sizes and report both normalizations per l.
    TransitionScan {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        lmin: u32,
        #[arg(long)]
        lmax: u32,
        #[arg(long)]
        trials: Option<usize>,
        /// Directory for (x,y) series files.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Exact distribution by exhaustive graph enumeration.
    ExactDist {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        l: usize,
        /// Rational probability ("1/2" or a decimal string).
        #[arg(long)]
        p: String,
    },
}

/// Fully resolved run configuration; echoed in every output.
struct Resolved {
    caps: Caps,
    seed: u64,
    trials: usize,
    format: Option<OutFormat>,
    out: Option<PathBuf>,
}

fn load_config_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("bad config file {}: {e}", path.display())))
}

fn resolve(cli: &Cli) -> Result<Resolved> {
    let file = match &cli.config {
        Some(path) => load_config_file(path)?,
        None => Value::Null,
    };
    let mut caps = Caps::default();
    if let Some(obj) = file.get("caps") {
        caps = serde_json::from_value(obj.clone())
            .map_err(|e| Error::invalid(format!("bad caps in config file: {e}")))?;
    }
    if let Some(v) = cli.poly_n_cap {
        caps.poly_n_cap = v;
    }
    if let Some(v) = cli.enum_cap {
        caps.enum_cap = v;
    }
    if let Some(v) = cli.pair_cap {
        caps.pair_cap = v;
    }
    if let Some(v) = cli.tuple_cap {
        caps.tuple_cap = v;
    }
    if let Some(v) = cli.regime_c {
        caps.regime_c = v;
    }
    if let Some(v) = cli.regime_tol {
        caps.regime_tol = v;
    }
    if let Some(v) = cli.delta {
        caps.delta = v;
    }
    if let Some(v) = cli.max_zero_frac {
        caps.zero_exclusion_max = v;
    }
    let defaults = file.get("defaults").cloned().unwrap_or(Value::Null);
    let seed = cli
        .seed
        .or_else(|| defaults.get("seed").and_then(Value::as_u64))
        .unwrap_or(0);
    let trials = defaults
        .get("trials")
        .and_then(Value::as_u64)
        .unwrap_or(1000) as usize;
    Ok(Resolved {
        caps,
        seed,
        trials,
        format: cli.format,
        out: cli.out.clone(),
    })
}

/// Parse "a/b" or a decimal string into an exact rational in (0,1).
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let r = if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad rational numerator: {a}")))?;
        let den: BigInt = b
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad rational denominator: {b}")))?;
        if den.is_zero() {
            return Err(Error::invalid("rational denominator is zero"));
        }
        BigRational::new(num, den)
    } else if let Some((whole, frac)) = s.split_once('.') {
        let digits = format!("{whole}{frac}");
        let num: BigInt = digits
            .parse()
            .map_err(|_| Error::invalid(format!("bad decimal: {s}")))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        BigRational::new(num, den)
    } else {
        let num: BigInt = s
            .parse()
            .map_err(|_| Error::invalid(format!("bad rational: {s}")))?;
        BigRational::from_integer(num)
    };
    Ok(r)
}

fn probability_rational(s: &str) -> Result<BigRational> {
    let r = parse_rational(s)?;
    if r <= BigRational::zero() || r >= BigRational::one() {
        return Err(Error::invalid(format!("need 0 < p < 1, got {s}")));
    }
    Ok(r)
}

fn parse_transition(spec: &str) -> Result<Transition> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("bad transition spec: {spec}")))?;
    let parse_step = |s: &str| -> Result<(usize, usize)> {
        let (a, b) = s
            .split_once('-')
            .ok_or_else(|| Error::invalid(format!("bad transition step: {s}")))?;
        let from: usize = a
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad transition step: {s}")))?;
        let to: usize = b
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("bad transition step: {s}")))?;
        if from != to + 1 {
            return Err(Error::invalid(format!(
                "transition must decrease by one, got {from}-{to}"
            )));
        }
        Ok((from, to))
    };
    match kind {
        "i" => {
            let (from, _) = parse_step(rest)?;
            Ok(Transition::SharedEdge { i: from })
        }
        "n2" => {
            let (i_part, step) = rest
                .split_once(',')
                .ok_or_else(|| Error::invalid(format!("bad n2 transition: {spec}")))?;
            let i: usize = i_part
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad n2 transition: {spec}")))?;
            let (from, _) = parse_step(step)?;
            Ok(Transition::SharedVertex { i, n2: from })
        }
        other => Err(Error::invalid(format!("unknown transition kind: {other}"))),
    }
}

/// A finished report: JSON results plus an optional CSV rendering.
struct Report {
    results: Value,
    csv: Option<(Vec<String>, Vec<Vec<String>>)>,
    default_format: OutFormat,
}

fn config_echo(cli: &Cli, res: &Resolved) -> Value {
    // threads are deliberately excluded: they cannot affect results
    let mut cfg = Map::new();
    cfg.insert("subcommand".into(), json!(subcommand_name(&cli.cmd)));
    cfg.insert(
        "caps".into(),
        serde_json::to_value(&res.caps).expect("caps serialize"),
    );
    cfg.insert("seed".into(), json!(res.seed));
    cfg.insert("args".into(), args_echo(&cli.cmd, res));
    Value::Object(cfg)
}

fn subcommand_name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Count { .. } => "count",
        Cmd::Formulas { .. } => "formulas",
        Cmd::Pairs { .. } => "pairs",
        Cmd::Tuples { .. } => "tuples",
        Cmd::VerifySwitching { .. } => "verify-switching",
        Cmd::McDist { .. } => "mc-dist",
        Cmd::Moments { .. } => "moments",
        Cmd::TransitionScan { .. } => "transition-scan",
        Cmd::ExactDist { .. } => "exact-dist",
    }
}

fn args_echo(cmd: &Cmd, res: &Resolved) -> Value {
    match cmd {
        Cmd::Count {
            input,
            write_canonical,
        } => json!({
            "input": input,
            "write_canonical": write_canonical.as_ref().map(|d| d.display().to_string()),
        }),
        Cmd::Formulas { n, l, p, m } => json!({ "n": n, "l": l, "p": real(*p), "m": m }),
        Cmd::Pairs { n, l } => json!({ "n": n, "l": l }),
        Cmd::Tuples { n, l, k, p } => json!({ "n": n, "l": l, "k": k, "p": p }),
        Cmd::VerifySwitching { n, l, transition } => {
            json!({ "n": n, "l": l, "transition": transition })
        }
        Cmd::McDist {
            model,
            n,
            l,
            p,
            m,
            trials,
        } => json!({
            "model": format!("{model:?}").to_lowercase(),
            "n": n, "l": l,
            "p": p.map(real), "m": m,
            "trials": trials.unwrap_or(res.trials),
        }),
        Cmd::Moments {
            n,
            l,
            p,
            kmax,
            source,
            trials,
        } => json!({
            "n": n, "l": l, "p": real(*p), "kmax": kmax,
            "source": format!("{source:?}").to_lowercase(),
            "trials": trials,
        }),
        Cmd::TransitionScan {
            n,
            p,
            lmin,
            lmax,
            trials,
            plot_data,
        } => json!({
            "n": n, "p": real(*p), "lmin": lmin, "lmax": lmax,
            "trials": trials.unwrap_or(res.trials),
            "plot_data": plot_data.as_ref().map(|d| d.display().to_string()),
        }),
        Cmd::ExactDist { n, l, p } => json!({ "n": n, "l": l, "p": p }),
    }
}

fn emit(report: &Report, envelope: &Value, res: &Resolved) -> Result<()> {
    let format = res.format.unwrap_or(report.default_format);
    let text = match format {
        OutFormat::Json => {
            let mut doc = Map::new();
            doc.insert("config".into(), envelope.clone());
            doc.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            doc.insert("results".into(), report.results.clone());
            let mut s = serde_json::to_string_pretty(&Value::Object(doc))
                .expect("json serialization");
            s.push('\n');
            s
        }
        OutFormat::Csv => {
            let (header, rows) = report.csv.as_ref().ok_or_else(|| {
                Error::invalid("this subcommand has no CSV rendering; use --format json")
            })?;
            let mut s = String::new();
            s.push_str(&format!(
                "# config: {}\n# version: {}\n",
                serde_json::to_string(envelope).expect("json serialization"),
                env!("CARGO_PKG_VERSION")
            ));
            s.push_str(&header.join(","));
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    };
    match &res.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(text.as_bytes())?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}


fn ks_value(ks: &dist::KsResult) -> Value {
    json!({
        "statistic": real(ks.statistic),
        "n_samples": ks.n_samples,
        "p_value": real(ks.p_value),
        "reference": ks.reference,
    })
}

fn regime_value(r: &formulas::RegimeReport) -> Value {
    json!({
        "ratio": real(r.ratio),
        "classification": format!("{:?}", r.classification).to_lowercase(),
        "c": real(r.c),
        "tol": real(r.tol),
    })
}

fn run_count(input: &str, write_canonical: Option<&Path>, res: &Resolved) -> Result<Report> {
    let text = if input == "-" {
        let mut buf = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin().lock(), &mut buf)?;
        buf
    } else {
        std::fs::read_to_string(input)?
    };

    let g = Graph::from_text(&text)?;
    if let Some(path) = write_canonical {
        std::fs::write(path, g.to_text())?;
    }

    // optional result cache keyed by the graph text and kernel cap
    let cache_path = std::env::var_os("MATCHSTAT_CACHE_DIR").map(|dir| {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        text.hash(&mut h);
        res.caps.poly_n_cap.hash(&mut h);
        PathBuf::from(dir).join(format!("count-{:016x}.json", h.finish()))
    });
    if let Some(path) = &cache_path {
        if let Ok(cached) = std::fs::read_to_string(path) {
            if let Ok(results) = serde_json::from_str::<Value>(&cached) {
                return Ok(Report {
                    results,
                    csv: None,
                    default_format: OutFormat::Json,
                });
            }
        }
    }

    let cv = count::count_matchings(&g, res.caps.poly_n_cap)?;
    let counts: Vec<Value> = cv.counts().iter().map(big).collect();
    let results = json!({ "n": g.n(), "edges": g.edge_count(), "counts": counts });
    if let Some(path) = &cache_path {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string(&results).expect("json"))?;
    }
    Ok(Report {
        results,
        csv: None,
        default_format: OutFormat::Json,
    })
}

fn run_formulas(n: u32, l: u32, p: f64, m: Option<u64>, res: &Resolved) -> Result<Report> {
    let mut params = ModelParams::new(n, l, p)?;
    if let Some(m) = m {
        params = params.with_m(m)?;
    }
    let lam = formulas::gnp_mean(&params);
    let sig = formulas::sigma_bar(&params);
    let b = formulas::beta(&params);
    let regime = formulas::regime_classify(&params, res.caps.regime_c, res.caps.regime_tol);

    let mut z_table = Vec::new();
    for i in 0..=(l as u64) {
        if 2 * i < n as u64 {
            z_table.push(json!({
                "i": i,
                "z": real(formulas::mode_excess(n as u64, l as u64, i)?),
            }));
        }
    }

    let mut results = Map::new();
    results.insert("lambda".into(), log_real(lam));
    results.insert("sigma_bar".into(), log_real(sig));
    results.insert("beta".into(), real(b));
    results.insert("z_table".into(), Value::Array(z_table));
    results.insert(
        "regime".into(),
        regime_value(&regime),
    );
    if m.is_some() {
        let s = count::matchings_complete(n as u64, l as u64)?;
        results.insert(
            "mu_exact".into(),
            log_real(formulas::gnm_mean(&params, &s, l as u64)?),
        );
        results.insert(
            "mu_approx".into(),
            log_real(formulas::gnm_mean_approx(&params, &s, l as u64)?),
        );
    }
    Ok(Report {
        results: Value::Object(results),
        csv: None,
        default_format: OutFormat::Json,
    })
}

fn run_pairs(n: u32, l: usize, res: &Resolved) -> Result<Report> {
    let table = census::pair_census(n, l, &res.caps)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for (i, n2, c) in table.rows() {
        rows.push(vec![i.to_string(), n2.to_string(), c.to_string()]);
        json_rows.push(json!({ "i": i, "n2": n2, "count": big(&c) }));
    }
    let marginals: Vec<Value> = table.marginals().iter().map(big).collect();
    Ok(Report {
        results: json!({
            "s": big(&table.s),
            "rows": json_rows,
            "marginals": marginals,
        }),
        csv: Some((
            vec!["i".into(), "n2".into(), "count".into()],
            rows,
        )),
        default_format: OutFormat::Csv,
    })
}

fn run_tuples(n: u32, l: usize, k: usize, p: Option<&str>, res: &Resolved) -> Result<Report> {
    let caps = &res.caps;
    let linked = census::count_linked_tuples(n, l, k, caps)?;
    let leading = census::count_leading_tuples(n, l, k, caps)?;
    let mut results = Map::new();
    results.insert("k".into(), json!(k));
    results.insert(
        "s".into(),
        big(&count::matchings_complete(n as u64, l as u64)?),
    );
    results.insert("linked".into(), big(&linked));
    results.insert("leading".into(), big(&leading));
    if k % 2 == 0 {
        let seqs = census::count_disjoint_pair_sequences(n, l, k, caps)?;
        let df = count::double_factorial(k as i64 - 1)?;
        results.insert("pair_sequences".into(), big(&seqs));
        results.insert("identity_holds".into(), json!(leading == df * &seqs));
    }
    if let Some(p) = p {
        let p = probability_rational(p)?;
        let moment = census::central_moment_tuple_sum(n, l, &p, k, caps)?;
        results.insert("central_moment".into(), rational(&moment));
        results.insert(
            "central_moment_value".into(),
            real(LogReal::from_rational(&moment).to_f64()),
        );
    }
    Ok(Report {
        results: Value::Object(results),
        csv: None,
        default_format: OutFormat::Json,
    })
}

fn run_verify_switching(n: u32, l: usize, spec: &str, res: &Resolved) -> Result<Report> {
    let transition = parse_transition(spec)?;
    let out = switching::double_count_check(n, l, transition, &res.caps)?;
    let hist = |h: &BTreeMap<u64, u64>| {
        Value::Object(
            h.iter()
                .map(|(moves, states)| (moves.to_string(), json!(states)))
                .collect(),
        )
    };
    Ok(Report {
        results: json!({
            "transition": spec,
            "lhs": big(&out.lhs),
            "rhs": big(&out.rhs),
            "equal": out.is_equal(),
            "source_size": big(&out.source_size),
            "target_size": big(&out.target_size),
            "fwd_moves_histogram": hist(&out.fwd_histogram),
            "inv_moves_histogram": hist(&out.inv_histogram),
        }),
        csv: None,
        default_format: OutFormat::Json,
    })
}

fn run_mc_dist(
    model: ModelArg,
    n: u32,
    l: usize,
    p: Option<f64>,
    m: Option<u64>,
    trials: usize,
    res: &Resolved,
) -> Result<Report> {
    match model {
        ModelArg::Gnp => {
            let p = p.ok_or_else(|| Error::invalid("gnp model needs --p"))?;
            let params = ModelParams::new(n, l as u32, p)?;
            let out = dist::limit_law_experiment(&params, trials, res.seed, &res.caps)?;
            Ok(Report {
                results: json!({
                    "model": "gnp",
                    "trials": trials,
                    "lambda": log_real(formulas::gnp_mean(&params)),
                    "sigma_bar": log_real(formulas::sigma_bar(&params)),
                    "beta": real(formulas::beta(&params)),
                    "regime": regime_value(&out.regime),
                    "ks_normal": ks_value(&out.ks_normal),
                    "ks_lognormal": ks_value(&out.ks_lognormal),
                    "excluded_zero_fraction": real(out.excluded_zero_fraction),
                }),
                csv: None,
                default_format: OutFormat::Json,
            })
        }
        ModelArg::Gnm => {
            let m = m.ok_or_else(|| Error::invalid("gnm model needs --m"))?;
            let out = dist::gnm_mean_experiment(n, l, m, trials, res.seed, &res.caps)?;
            Ok(Report {
                results: json!({
                    "model": "gnm",
                    "trials": trials,
                    "mu_ln": real(out.mu_ln),
                    "mean_ratio": real(out.mean_ratio),
                    "std_err": real(out.std_err),
                    "zero_count": out.zero_count,
                }),
                csv: None,
                default_format: OutFormat::Json,
            })
        }
    }
}

fn run_moments(
    n: u32,
    l: u32,
    p: f64,
    kmax: usize,
    source: SourceArg,
    trials: Option<usize>,
    res: &Resolved,
) -> Result<Report> {
    let params = ModelParams::new(n, l, p)?;
    let src = match source {
        SourceArg::Exact => MomentSource::Exact,
        SourceArg::Mc => MomentSource::Mc {
            trials: trials.unwrap_or(res.trials),
            seed: res.seed,
        },
    };
    let rep = dist::moment_report(&params, kmax, src, &res.caps)?;
    let mut rows = Vec::new();
    let mut json_rows = Vec::new();
    for r in &rep.rows {
        rows.push(vec![
            r.k.to_string(),
            fmt_real(r.measured),
            fmt_real(r.theory),
            fmt_real(r.comparison),
            r.std_err.map(fmt_real).unwrap_or_default(),
        ]);
        json_rows.push(json!({
            "k": r.k,
            "measured": real(r.measured),
            "measured_exact": r.measured_exact.as_ref().map(rational),
            "theory": real(r.theory),
            "comparison": real(r.comparison),
            "std_err": r.std_err.map(real),
        }));
    }
    Ok(Report {
        results: json!({ "source": rep.source, "rows": json_rows }),
        csv: Some((
            vec![
                "k".into(),
                "measured".into(),
                "theory".into(),
                "comparison".into(),
                "std_err".into(),
            ],
            rows,
        )),
        default_format: OutFormat::Csv,
    })
}

fn run_transition_scan(
    n: u32,
    p: f64,
    lmin: u32,
    lmax: u32,
    trials: usize,
    plot_data: Option<&Path>,
    res: &Resolved,
) -> Result<Report> {
    if lmin < 1 || lmax < lmin || 2 * lmax as u64 > n as u64 {
        return Err(Error::invalid(format!(
            "need 1 <= lmin <= lmax <= n/2, got lmin={lmin} lmax={lmax} n={n}"
        )));
    }
    let rows = dist::transition_scan(n, p, lmin..=lmax, trials, res.seed, &res.caps)?;
    let mut csv_rows = Vec::new();
    let mut json_rows = Vec::new();
    for r in &rows {
        csv_rows.push(vec![
            r.l.to_string(),
            fmt_real(r.skewness),
            fmt_real(r.ks_normal),
            fmt_real(r.ks_normal_p),
            r.ks_lognormal.map(fmt_real).unwrap_or_default(),
            fmt_real(r.excluded_zero_fraction),
            format!("{:?}", r.regime).to_lowercase(),
            fmt_real(r.regime_ratio),
        ]);
        json_rows.push(json!({
            "l": r.l,
            "skewness": real(r.skewness),
            "ks_normal": real(r.ks_normal),
            "ks_normal_p": real(r.ks_normal_p),
            "ks_lognormal": r.ks_lognormal.map(real),
            "excluded_zero_fraction": real(r.excluded_zero_fraction),
            "regime": format!("{:?}", r.regime).to_lowercase(),
            "regime_ratio": real(r.regime_ratio),
        }));
    }
    if let Some(dir) = plot_data {
        std::fs::create_dir_all(dir)?;
        let series: [(&str, Box<dyn Fn(&dist::TransitionRow) -> Option<f64>>); 3] = [
            ("ks_normal", Box::new(|r| Some(r.ks_normal))),
            ("ks_lognormal", Box::new(|r| r.ks_lognormal)),
            ("skewness", Box::new(|r| Some(r.skewness))),
        ];
        for (name, get) in series {
            let mut s = String::from("x,y\n");
            for r in &rows {
                if let Some(y) = get(r) {
                    s.push_str(&format!("{},{}\n", r.l, fmt_real(y)));
                }
            }
            std::fs::write(dir.join(format!("{name}.csv")), s)?;
        }
    }
    Ok(Report {
        results: json!({ "rows": json_rows }),
        csv: Some((
            vec![
                "l".into(),
                "skewness".into(),
                "ks_normal".into(),
                "ks_normal_p".into(),
                "ks_lognormal".into(),
                "excluded_zero_fraction".into(),
                "regime".into(),
                "regime_ratio".into(),
            ],
            csv_rows,
        )),
        default_format: OutFormat::Csv,
    })
}

fn run_exact_dist(n: u32, l: usize, p: &str, res: &Resolved) -> Result<Report> {
    let p = probability_rational(p)?;
    let d = dist::exact_distribution(n, l, &p, &res.caps)?;
    let support: Map<String, Value> = d
        .support()
        .iter()
        .map(|(x, pr)| (x.to_string(), rational(pr)))
        .collect();
    let var = d.central_moment(2);
    Ok(Report {
        results: json!({
            "support": support,
            "mean": rational(&d.mean()),
            "variance": rational(&var),
            "total_probability": rational(&d.total_probability()),
        }),
        csv: None,
        default_format: OutFormat::Json,
    })
}

fn dispatch(cli: &Cli, res: &Resolved) -> Result<Report> {
    match &cli.cmd {
        Cmd::Count {
            input,
            write_canonical,
        } => run_count(input, write_canonical.as_deref(), res),
        Cmd::Formulas { n, l, p, m } => run_formulas(*n, *l, *p, *m, res),
        Cmd::Pairs { n, l } => run_pairs(*n, *l, res),
        Cmd::Tuples { n, l, k, p } => run_tuples(*n, *l, *k, p.as_deref(), res),
        Cmd::VerifySwitching { n, l, transition } => {
            run_verify_switching(*n, *l, transition, res)
        }
        Cmd::McDist {
            model,
            n,
            l,
            p,
            m,
            trials,
        } => run_mc_dist(*model, *n, *l, *p, *m, trials.unwrap_or(res.trials), res),
        Cmd::Moments {
            n,
            l,
            p,
            kmax,
            source,
            trials,
        } => run_moments(*n, *l, *p, *kmax, *source, *trials, res),
        Cmd::TransitionScan {
            n,
            p,
            lmin,
            lmax,
            trials,
            plot_data,
        } => run_transition_scan(
            *n,
            *p,
            *lmin,
            *lmax,
            trials.unwrap_or(res.trials),
            plot_data.as_deref(),
            res,
        ),
        Cmd::ExactDist { n, l, p } => run_exact_dist(*n, *l, p, res),
    }
}

/// Entry point: parse argv, resolve config, run the subcommand, emit the
/// report. Returns a process exit code: 0 ok, 2 validation, 3 cap
/// exceeded, 4 i/o failure.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success codes
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(threads) = cli.threads {
        // only the first initialization wins; later calls are no-ops
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let res = match resolve(&cli) {
        Ok(res) => res,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let envelope = config_echo(&cli, &res);
    match dispatch(&cli, &res).and_then(|report| emit(&report, &envelope, &res)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
