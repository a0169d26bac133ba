use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use toricsod::bundle::verify_theorem;
use toricsod::cache::Store;
use toricsod::cech::Engine;
use toricsod::ext::{ext_checked, ext_formula, gram};
use toricsod::ktheory::{check_base_twist, check_pairing_preservation, KClass, WallCrossingScenario};
use toricsod::objects::decode;
use toricsod::report::{Format, Report};
use toricsod::schema::{parse_input, parse_object, Input};
use toricsod::sod::{check_sod, line_bundle_family, spanning_detect, stratum_probes, window, OrderRule};
use toricsod::space::Space;
use toricsod::Error;

#[derive(Parser)]
#[command(name = "toricsod", version, about = "Exact Ext tables, exceptional windows and wall-crossing checks on toric stacks")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Space, bundle or scenario file (JSON).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Label window: `lo..hi` for every axis, or a comma-separated range per axis.
    #[arg(long, global = true, allow_hyphen_values = true)]
    window: Option<String>,

    /// Fraction of table entries recomputed by the independent Koszul route.
    #[arg(long, global = true, default_value_t = 0.1)]
    oracle_fraction: f64,

    /// Persistent cohomology cache directory.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Remove cache entries not used by this run.
    #[arg(long, global = true)]
    cache_gc: bool,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Machine,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Pair,
    LabelDescending,
    LabelAscending,
}

#[derive(Subcommand)]
enum Command {
    /// Ext table of two objects.
    Ext {
        /// Source object: `{"I": [...], "p": [...], "shift"?}` or `{"a": [...]}`.
        #[arg(long = "A", allow_hyphen_values = true)]
        a: String,
        /// Target object, same format.
        #[arg(long = "B", allow_hyphen_values = true)]
        b: String,
    },
    /// Ext tables of all decoded labels in the window.
    Gram,
    /// Exceptionality and ordered vanishing on the window.
    SodCheck {
        #[arg(long, value_enum, default_value_t = OrderArg::Pair)]
        order: OrderArg,
    },
    /// Vanishing and block comparison on a bundle, fiber labels from the window.
    BundleCheck {
        /// Base twists: a range for the first base coordinate, or one range per base coordinate.
        #[arg(long, allow_hyphen_values = true, default_value = "-2..2")]
        base_window: String,
    },
    /// Detection of every stratum probe by line bundles in the window.
    SpanCheck,
    /// Crepancy, pairing preservation and base-twist compatibility of a scenario.
    FmCheck {
        /// Use this many seeded pairs instead of all pairs from the window.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Base twist for the compatibility check on bundle scenarios.
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        base_twist: String,
    },
    /// Parse and validate an input file.
    Validate,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Ext { .. } => "ext",
            Command::Gram => "gram",
            Command::SodCheck { .. } => "sod-check",
            Command::BundleCheck { .. } => "bundle-check",
            Command::SpanCheck => "span-check",
            Command::FmCheck { .. } => "fm-check",
            Command::Validate => "validate",
        }
    }
}

/// Failures that map to an exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_range(s: &str) -> Result<(i64, i64), Failure> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| usage(format!("range `{s}` is not of the form lo..hi")))?;
    let lo: i64 = lo.trim().parse().map_err(|_| usage(format!("bad lower bound in `{s}`")))?;
    let hi: i64 = hi.trim().parse().map_err(|_| usage(format!("bad upper bound in `{s}`")))?;
    if lo > hi {
        return Err(usage(format!("empty range `{s}`")));
    }
    Ok((lo, hi))
}

/// A single range is repeated on every axis.
fn parse_window(s: &str, n: usize) -> Result<Vec<(i64, i64)>, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.len() {
        1 => Ok(vec![parse_range(parts[0])?; n]),
        k if k == n => parts.into_iter().map(parse_range).collect(),
        k => Err(usage(format!("window has {k} ranges for {n} axes"))),
    }
}

/// A single range varies the first axis only.
fn parse_base_window(s: &str, n: usize) -> Result<Vec<(i64, i64)>, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() == 1 && n > 0 {
        let mut out = vec![(0, 0); n];
        out[0] = parse_range(parts[0])?;
        return Ok(out);
    }
    parse_window(s, n)
}

fn parse_ints(s: &str) -> Result<Vec<i64>, Failure> {
    s.split(',').map(|x| x.trim().parse().map_err(|_| usage(format!("bad integer list `{s}`")))).collect()
}

fn format_window(w: &[(i64, i64)]) -> String {
    w.iter().map(|(lo, hi)| format!("{lo}..{hi}")).collect::<Vec<_>>().join(",")
}

struct Run<'a> {
    cli: &'a Cli,
    engine: &'a Engine,
    input: Input,
    input_name: String,
}

impl Run<'_> {
    fn space(&self) -> Result<&Space, Failure> {
        self.input.space().ok_or_else(|| usage("this command needs a space or bundle input"))
    }

    fn window(&self, n: usize) -> Result<Vec<(i64, i64)>, Failure> {
        let w = self.cli.window.as_deref().ok_or_else(|| usage("--window is required"))?;
        parse_window(w, n)
    }

    fn report(&self, extra: &[(&str, String)]) -> Report {
        let mut options = vec![("oracle-fraction", self.cli.oracle_fraction.to_string())];
        if let Some(w) = &self.cli.window {
            options.push(("window", w.clone()));
        }
        options.extend(extra.iter().cloned());
        Report::new(self.cli.command.name(), &self.input_name, &options)
    }

    fn execute(&self) -> Result<Report, Failure> {
        match &self.cli.command {
            Command::Validate => self.validate(),
            Command::Ext { a, b } => self.ext(a, b),
            Command::Gram => self.gram(),
            Command::SodCheck { order } => self.sod(*order),
            Command::BundleCheck { base_window } => self.bundle(base_window),
            Command::SpanCheck => self.span(),
            Command::FmCheck { samples, seed, base_twist } => self.fm(*samples, *seed, base_twist),
        }
    }

    fn validate(&self) -> Result<Report, Failure> {
        let mut r = self.report(&[]);
        let (kind, summary) = match &self.input {
            Input::Space(s) => ("space", json!({ "n": s.n(), "complex": s.complex.to_string(), "selector": s.selector.to_string() })),
            Input::Bundle(b) => (
                "bundle",
                json!({ "n_base": b.n_base, "n_fiber": b.n_fiber, "complex": b.space.complex.to_string(), "selector": b.space.selector.to_string() }),
            ),
            Input::Scenario(s) => ("scenario", json!({ "n": s.n, "extra": s.extra(), "bundle": s.bundle.is_some() })),
        };
        r.record(kind, json!({ "name": self.input.name() }), &summary, format!("{kind} {}: valid", self.input.name()));
        r.verdict(true, json!({}));
        Ok(r)
    }

    fn ext(&self, a: &str, b: &str) -> Result<Report, Failure> {
        let space = self.space()?;
        let n = space.n();
        let ea = parse_object(a, n)?;
        let eb = parse_object(b, n)?;
        let zero = vec![0; n];
        let table = if self.cli.oracle_fraction > 0.0 {
            ext_checked(self.engine, space, &ea, &eb, &zero)?
        } else {
            ext_formula(self.engine, space, &ea, &eb, &zero)?
        };
        let mut r = self.report(&[]);
        r.record(
            "ext",
            json!({ "A": ea, "B": eb }),
            json!({ "table": table, "euler": table.euler() }),
            format!("Ext({ea}, {eb}) = {table}"),
        );
        r.verdict(true, json!({ "oracle_checked": self.cli.oracle_fraction > 0.0 }));
        Ok(r)
    }

    fn gram(&self) -> Result<Report, Failure> {
        let space = self.space()?;
        let labels = window(&self.window(space.n())?);
        let objects: Vec<_> = labels.iter().map(decode).collect();
        let g = gram(self.engine, space, &objects, self.cli.oracle_fraction)?;
        let mut r = self.report(&[]);
        for (i, a) in labels.iter().enumerate() {
            for (j, b) in labels.iter().enumerate() {
                let t = &g.tables[i][j];
                r.record("ext", json!({ "a": a, "b": b }), json!({ "table": t }), format!("{a} -> {b}: {t}"));
            }
        }
        r.verdict(true, json!({ "objects": labels.len(), "oracle_checked": g.checked_count() }));
        Ok(r)
    }

    fn sod(&self, order: OrderArg) -> Result<Report, Failure> {
        let space = self.space()?;
        let rule = match order {
            OrderArg::Pair => OrderRule::Pair,
            OrderArg::LabelDescending => OrderRule::LabelDescending,
            OrderArg::LabelAscending => OrderRule::LabelAscending,
        };
        let labels = window(&self.window(space.n())?);
        let s = check_sod(self.engine, space, &labels, rule, self.cli.oracle_fraction)?;
        let mut r = self.report(&[("order", format!("{rule:?}"))]);
        for o in &s.objects {
            let endo = if o.zero {
                None
            } else {
                let i = labels.iter().position(|l| l == &o.label).expect("window label");
                Some(s.exceptionality_failures.iter().all(|f| f.source != labels[i]))
            };
            let text = match endo {
                None => format!("{}: {} zero object", o.label, o.object),
                Some(true) => format!("{}: {} exceptional", o.label, o.object),
                Some(false) => format!("{}: {} NOT exceptional", o.label, o.object),
            };
            r.record("object", json!({ "a": o.label }), json!({ "pair": o.object, "zero": o.zero, "exceptional": endo }), text);
        }
        for f in &s.exceptionality_failures {
            r.record("exceptionality-failure", json!({ "a": f.source }), json!({ "table": f.table }), format!("End{} = {}", f.source, f.table));
        }
        for f in &s.vanishing_failures {
            r.record(
                "vanishing-failure",
                json!({ "a": f.source, "b": f.target }),
                json!({ "table": f.table }),
                format!("Ext({}, {}) = {} but asserted zero", f.source, f.target, f.table),
            );
        }
        for f in &s.ties {
            r.record("tie", json!({ "a": f.source, "b": f.target }), json!({ "table": f.table }), String::new());
        }
        r.record(
            "summary",
            json!({}),
            json!({
                "exceptional_checked": s.exceptional_checked,
                "vanishing_checked": s.vanishing_checked,
                "ties": s.ties.len(),
                "label_only_nonzero": s.label_only_nonzero.len(),
                "degree_histogram": s.degree_histogram,
                "euler_ascending": s.euler_ascending,
                "unitriangular": s.unitriangular,
                "oracle_checked": s.oracle_checked,
            }),
            format!(
                "{} objects, {} exceptional checks, {} vanishing checks, {} ties, unitriangular: {}",
                s.objects.len(),
                s.exceptional_checked,
                s.vanishing_checked,
                s.ties.len(),
                s.unitriangular
            ),
        );
        let passed = s.passed();
        r.verdict(
            passed,
            json!({ "exceptionality_failures": s.exceptionality_failures.len(), "vanishing_failures": s.vanishing_failures.len() }),
        );
        Ok(r)
    }

    fn bundle(&self, base_window: &str) -> Result<Report, Failure> {
        let Input::Bundle(total) = &self.input else {
            return Err(usage("bundle-check needs a bundle input"));
        };
        let labels = window(&self.window(total.n_fiber)?);
        let bw = parse_base_window(base_window, total.n_base)?;
        let twists: Vec<Vec<i64>> = window(&bw).into_iter().rev().map(|l| l.0).collect();
        let b = verify_theorem(self.engine, total, &labels, &twists, self.cli.oracle_fraction)?;
        let mut r = self.report(&[("base-window", format_window(&bw))]);
        for (f, twist) in &b.vanishing_failures {
            r.record(
                "vanishing-failure",
                json!({ "a": f.source, "b": f.target, "base_twist": twist }),
                json!({ "table": f.table }),
                format!("Ext({}, {} ⊗ O{twist:?}) = {}", f.source, f.target, f.table),
            );
        }
        for f in &b.block_failures {
            r.record(
                "block-failure",
                json!({ "a": f.label, "first": f.first, "second": f.second }),
                json!({ "total": f.total, "base": f.base }),
                format!("block {} {:?} -> {:?}: {} vs base {}", f.label, f.first, f.second, f.total, f.base),
            );
        }
        r.record(
            "summary",
            json!({}),
            json!({
                "vanishing_checked": b.vanishing_checked,
                "block_checked": b.block_checked,
                "ties": b.ties.len(),
                "zero_objects": b.zero_objects,
                "base_euler": b.base_euler,
                "block_euler": b.block_euler,
                "oracle_checked": b.oracle_checked,
            }),
            format!(
                "{} vanishing checks, {} block checks, base Euler matrix {:?}",
                b.vanishing_checked, b.block_checked, b.base_euler
            ),
        );
        let passed = b.passed();
        r.verdict(passed, json!({ "vanishing_failures": b.vanishing_failures.len(), "block_failures": b.block_failures.len() }));
        Ok(r)
    }

    fn span(&self) -> Result<Report, Failure> {
        let space = self.space()?;
        let family = line_bundle_family(&self.window(space.n())?);
        let s = spanning_detect(self.engine, space, &family, &stratum_probes(space.n()))?;
        let mut r = self.report(&[]);
        for p in &s.probes {
            r.record("probe", json!({ "probe": p.probe }), &p.detection, format!("{}: {:?}", p.probe, p.detection));
        }
        let passed = s.passed();
        r.verdict(passed, json!({ "family_size": s.family_size, "probes": s.probes.len() }));
        Ok(r)
    }

    fn fm(&self, samples: Option<usize>, seed: u64, base_twist: &str) -> Result<Report, Failure> {
        let Input::Scenario(s) = &self.input else {
            return Err(usage("fm-check needs a scenario input"));
        };
        let s: &WallCrossingScenario = s;
        let (lo, hi) = parse_range(self.cli.window.as_deref().ok_or_else(|| usage("--window is required"))?)?;
        let mut r = self.report(&[("samples", samples.map_or("all".into(), |k| k.to_string())), ("seed", seed.to_string())]);
        let crepancy = s.check_crepant()?;
        r.record(
            "crepancy",
            json!({ "canonical": s.canonical }),
            &crepancy,
            format!("crepant: {} (minus {:?}, plus {:?})", crepancy.crepant, crepancy.minus, crepancy.plus),
        );
        let lines: Vec<KClass> = s.twist_window(lo, hi).into_iter().map(KClass::line).collect();
        let pairs = pick_pairs(&lines, samples, seed);
        let p = check_pairing_preservation(self.engine, s, &pairs)?;
        for f in &p.failures {
            r.record("pairing-failure", json!({ "x": f.x, "y": f.y }), json!({ "minus": f.minus, "plus": f.plus }), format!("<{}, {}>: {} vs {}", f.x, f.y, f.minus, f.plus));
        }
        r.record(
            "pairing",
            json!({ "weights": lines.len() }),
            json!({ "checked": p.checked, "failures": p.failures.len(), "solution": p.solution }),
            format!("pairing preservation: {} pairs, {} failures (window radius {})", p.checked, p.failures.len(), p.solution.radius),
        );
        let mut passed = crepancy.crepant && p.passed();
        if s.bundle.is_some() {
            let n_base = s.total(toricsod::ktheory::Side::Minus).map_or(0, |t| t.n_base);
            let mut d = parse_ints(base_twist)?;
            if d.len() == 1 {
                d.resize(n_base, 0);
            }
            let classes: Vec<KClass> = pick_pairs(&lines, Some(samples.unwrap_or(lines.len()).min(lines.len())), seed ^ 1)
                .into_iter()
                .map(|(x, _)| x)
                .collect();
            let t = check_base_twist(self.engine, s, &classes, &d)?;
            for f in &t.failures {
                r.record(
                    "base-twist-failure",
                    json!({ "x": f.x }),
                    json!({ "twisted_image": f.twisted_image, "image_twisted": f.image_twisted }),
                    format!("{}: {} vs {}", f.x, f.twisted_image, f.image_twisted),
                );
            }
            r.record(
                "base-twist",
                json!({ "base_twist": d }),
                json!({ "checked": t.checked, "failures": t.failures.len() }),
                format!("base-twist compatibility: {} classes, {} failures", t.checked, t.failures.len()),
            );
            passed &= t.passed();
        }
        r.verdict(passed, json!({ "crepant": crepancy.crepant, "pairing_failures": p.failures.len() }));
        Ok(r)
    }
}

/// All ordered pairs, or `k` pairs drawn by a seeded splitmix generator.
fn pick_pairs(lines: &[KClass], samples: Option<usize>, seed: u64) -> Vec<(KClass, KClass)> {
    let n = lines.len();
    match samples {
        None => lines.iter().flat_map(|x| lines.iter().map(move |y| (x.clone(), y.clone()))).collect(),
        Some(k) => {
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
                let mut z = state;
                z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
                z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
                ((z ^ (z >> 31)) % n.max(1) as u64) as usize
            };
            (0..k.min(n * n)).map(|_| (lines[next()].clone(), lines[next()].clone())).collect()
        }
    }
}

fn read_input(path: &Path) -> Result<Input, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok(parse_input(&text)?)
}

fn run(cli: &Cli) -> Result<(String, bool), Failure> {
    let path = cli.input.as_ref().ok_or_else(|| usage("--input is required"))?;
    if !(0.0..=1.0).contains(&cli.oracle_fraction) {
        return Err(usage("--oracle-fraction must lie in [0, 1]"));
    }
    let input = read_input(path)?;
    let engine = match &cli.cache_dir {
        Some(dir) => Engine::with_store(Store::open(dir)),
        None => Engine::new(),
    };
    let input_name = path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned());
    let report = Run { cli, engine: &engine, input, input_name }.execute()?;
    if let Some(store) = engine.store() {
        let stats = store.stats();
        eprintln!("cache: {} hits, {} misses, {} recomputed", stats.hits, stats.misses, stats.recomputed);
        if cli.cache_gc {
            eprintln!("cache: removed {} unused entries", store.gc());
        }
    }
    let format = match cli.format {
        FormatArg::Table => Format::Table,
        FormatArg::Machine => Format::Machine,
    };
    Ok((report.render(format), report.passed().unwrap_or(false)))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = run(&cli).and_then(|(text, passed)| {
        match &cli.report {
            Some(path) => std::fs::write(path, &text)
                .with_context(|| format!("writing {}", path.display()))
                .map_err(|e| Failure::Io(format!("{e:#}")))?,
            None => print!("{text}"),
        }
        Ok(passed)
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            eprintln!("witness: {e:?}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
