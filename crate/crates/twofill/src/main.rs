//! Command-line front end: builds tracks and complexes, traces leaves, runs
//! censuses and the verification suite, and writes JSON, SVG and DOT.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twofill::carrying::{induced_weight, missing_path_window, weight_table, zeta_listing, CarryingMap};
use twofill::flatdyn::{build_f, build_iet, build_sigma, hitting_histogram, render_svg, singular_orbit, trace_leaf, trace_separatrix, Dir};
use twofill::numerics::{format_rational, parse_rational, rat, Rational};
use twofill::raycalc::{
    alpha_seq, crosses_loop, default_sequences, fixed_word_prefix, gamma_family, monotonicity_check, order_compare, substitution_f, Crossing, RayLike,
    RayLimit, Word,
};
use twofill::rectcomplex::{
    alpha_entries, boundary_paths, cut_candidates, entry_shift, saddle_connection_census, search_red_set, BoundaryOptions, Leaf, LeafLimit, RectComplex,
    Terminal,
};
use twofill::traintrack::pieces::{enumerate_paths_through_piece, Piece};
use twofill::traintrack::{build_t, build_t1, build_t_star, cyclic_cover, to_dot, to_svg, TrainTrack, WeightSystem};
use twofill::verify::{run_suite, Config, VerificationReport};

#[derive(Parser)]
#[command(name = "twofill", version, about = "Train tracks, foliated complexes, a flat automorphism and the word calculus of rays")]
struct Cli {
    /// Directory for reports and drawings; the variable TWOFILL_OUT_DIR overrides the default.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Train tracks and their weights.
    #[command(subcommand)]
    Track(TrackCmd),
    /// Foliated rectangle complexes.
    #[command(subcommand)]
    Complex(ComplexCmd),
    /// The square foliation, the flat sphere and the interval exchange.
    #[command(subcommand)]
    Flat(FlatCmd),
    /// The carrying map from T to T*.
    #[command(subcommand)]
    Carry(CarryCmd),
    /// Words, rays and the circular order.
    #[command(subcommand)]
    Ray(RayCmd),
    /// Verification suites.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    T,
    TStar,
    T1,
}

#[derive(Args, Clone)]
struct TrackSel {
    /// Which track.
    #[arg(long, value_enum, default_value_t = Which::T)]
    track: Which,
    /// Truncation depth.
    #[arg(long, default_value_t = 16)]
    depth: usize,
    /// Degree of a cyclic cover of T1.
    #[arg(long)]
    cover: Option<usize>,
}

#[derive(Subcommand)]
enum TrackCmd {
    /// Branches, endpoints and weights.
    Build(TrackSel),
    /// Switch conditions.
    Check(TrackSel),
    /// Train paths through a piece of T*.
    Paths {
        #[arg(long, value_enum)]
        piece: PieceArg,
        /// List the paths as well as counting them.
        #[arg(long)]
        list: bool,
    },
    /// Drawing of the track.
    Render {
        #[command(flatten)]
        sel: TrackSel,
        #[arg(long, value_enum, default_value_t = Drawing::Svg)]
        kind: Drawing,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PieceArg {
    #[value(name = "V")]
    V,
    #[value(name = "U")]
    U,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Drawing {
    Svg,
    Dot,
}

#[derive(Subcommand)]
enum ComplexCmd {
    /// Traces the leaf through a point of a rectangle.
    Trace {
        #[command(flatten)]
        sel: TrackSel,
        #[arg(long)]
        branch: String,
        #[arg(long)]
        height: String,
        /// Travel against the orientation of the branch.
        #[arg(long)]
        backward: bool,
        #[arg(long, default_value_t = 256)]
        max_steps: usize,
    },
    /// Boundary paths.
    Boundary {
        #[command(flatten)]
        sel: TrackSel,
    },
    /// Saddle connections between singular points up to a level.
    Saddles {
        #[command(flatten)]
        sel: TrackSel,
        #[arg(long, default_value_t = 10)]
        max_level: u32,
    },
    /// Entry pattern of the rays alpha_i and the search for a quartering cut set in a cover of T1.
    Unzip {
        #[arg(long, default_value_t = 2)]
        cover: usize,
        #[arg(long, default_value_t = 2)]
        max_cut: usize,
        #[arg(long, default_value_t = 16)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum FlatCmd {
    /// Orbit of a marked point of the flat sphere.
    Orbit {
        start: String,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        level: usize,
    },
    /// A leaf of the square foliation.
    Leaf {
        /// Separatrix of the 1-pronged point p_i.
        #[arg(long, conflicts_with = "height")]
        separatrix: Option<usize>,
        #[arg(long)]
        height: Option<String>,
        #[arg(long)]
        left: bool,
        #[arg(long, default_value_t = 64)]
        max_segments: usize,
        #[arg(long, default_value_t = 16)]
        level: usize,
    },
    /// Pieces of the interval exchange, or its value at a point.
    Iet {
        #[arg(long)]
        at: Option<String>,
        #[arg(long, default_value_t = 8)]
        level: usize,
    },
    /// Histogram of returns to the transversal.
    Histogram {
        #[arg(long, default_value = "1/7")]
        seed: String,
        #[arg(long, default_value_t = 100_000)]
        returns: usize,
        #[arg(long, default_value_t = 8)]
        bins: usize,
        #[arg(long, default_value_t = 40)]
        level: usize,
    },
    /// Drawing of the square with its marked points.
    Render {
        #[arg(long, default_value_t = 8)]
        level: usize,
        #[arg(long, default_value_t = 512)]
        size: u32,
    },
}

#[derive(Subcommand)]
enum CarryCmd {
    /// The image of a branch of T.
    Zeta { branch: String },
    /// Induced weights on T*.
    Weights {
        /// One branch, with or without the trailing star.
        #[arg(long)]
        branch: Option<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// Translates a train path of T into T*.
    Translate {
        /// Branch names, a trailing ' for reversed traversal.
        path: Vec<String>,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// The window of the path of T* that is not an image.
    Missing {
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum RayCmd {
    /// The loop alpha_k.
    Alpha {
        #[arg(short)]
        k: u32,
    },
    /// The loops gamma^(i)_j of the two-step family with p_k = q_k = n k.
    Gamma {
        #[arg(short)]
        n: usize,
        #[arg(short)]
        j: usize,
    },
    /// Compares two words.
    Order { a: String, b: String },
    /// Iterates the substitution.
    Subst {
        /// Start word; defaults to r1.
        word: Option<String>,
        #[arg(long, default_value_t = 1)]
        iter: usize,
    },
    /// Searches for a lift of a loop crossing the fixed word ray.
    Crosses {
        #[arg(name = "loop")]
        lp: String,
        #[arg(long, default_value_t = 64)]
        depth: usize,
    },
    /// Order statements for one family.
    Verify {
        #[arg(short, default_value_t = 2)]
        n: usize,
        #[arg(short, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1024)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Every check.
    All {
        #[arg(long, default_value_t = 16)]
        depth: usize,
        /// Leave wall-clock times out of the report.
        #[arg(long)]
        no_timing: bool,
    },
    /// Checks whose id starts with a prefix, such as `ray.` or `flat.iet`.
    Some {
        prefix: String,
        #[arg(long, default_value_t = 16)]
        depth: usize,
        #[arg(long)]
        no_timing: bool,
    },
}

type CliResult = Result<Value, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn select(sel: &TrackSel) -> Result<(TrainTrack, WeightSystem), String> {
    let (t, w) = match sel.track {
        Which::T => build_t(sel.depth),
        Which::TStar => build_t_star(sel.depth),
        Which::T1 => build_t1(sel.depth),
    }
    .map_err(err)?;
    match sel.cover {
        Some(n) => cyclic_cover(&t, &w, n).map_err(err),
        None => Ok((t, w)),
    }
}

fn complex(sel: &TrackSel) -> Result<RectComplex, String> {
    let (t, w) = select(sel)?;
    RectComplex::new(&t, &w).map_err(err)
}

fn parse_q(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(err)
}

fn terminal(g: &RectComplex, t: &Terminal) -> String {
    match t {
        Terminal::SingularityHit(s) => format!("singularity {}", g.singular[*s].name),
        Terminal::FrontierHit(s) => format!("frontier {}", g.track.switch(*s).name),
        other => format!("{other:?}"),
    }
}

fn track_json(t: &TrainTrack, w: &WeightSystem) -> Value {
    let branches: Vec<Value> = t
        .branches()
        .iter()
        .enumerate()
        .map(|(i, b)| json!({"name": b.name, "from": t.switch(b.from).name, "to": t.switch(b.to).name, "weight": format_rational(w.get(i))}))
        .collect();
    json!({"switches": t.num_switches(), "branches": branches, "notes": t.notes})
}

fn run_track(cmd: TrackCmd, cli: &Cli) -> CliResult {
    match cmd {
        TrackCmd::Build(sel) => {
            let (t, w) = select(&sel)?;
            Ok(track_json(&t, &w))
        }
        TrackCmd::Check(sel) => {
            let (t, w) = select(&sel)?;
            let v = t.check_switch_conditions(&w);
            let bad: Vec<Value> =
                v.iter().map(|x| json!({"switch": x.switch, "in": format_rational(&x.incoming), "out": format_rational(&x.outgoing)})).collect();
            Ok(json!({"switches": t.num_switches(), "violations": bad}))
        }
        TrackCmd::Paths { piece, list } => {
            let p = match piece {
                PieceArg::V => Piece::V,
                PieceArg::U => Piece::U,
            };
            let paths = enumerate_paths_through_piece(p).map_err(err)?;
            if cli.format == Format::Text && !list {
                return Ok(json!(paths.len()));
            }
            let rows: Vec<Value> = paths
                .iter()
                .map(|x| json!({"branches": x.branches.join(" "), "entry": x.entry, "exit": x.exit, "self_returning": x.self_returning()}))
                .collect();
            Ok(json!({"count": paths.len(), "paths": rows}))
        }
        TrackCmd::Render { sel, kind } => {
            let (t, w) = select(&sel)?;
            let (body, ext) = match kind {
                Drawing::Svg => (to_svg(&t, &w), "svg"),
                Drawing::Dot => (to_dot(&t, &w), "dot"),
            };
            write_artifact(cli, &format!("track.{ext}"), &body)
        }
    }
}

fn run_complex(cmd: ComplexCmd) -> CliResult {
    match cmd {
        ComplexCmd::Trace { sel, branch, height, backward, max_steps } => {
            let g = complex(&sel)?;
            let b = g.track.branch_id(&branch).map_err(err)?;
            let leaf = Leaf::new(b, parse_q(&height)?, !backward, LeafLimit::Exact);
            let it = g.trace_leaf(&leaf, max_steps).map_err(err)?;
            let names = it.path().names(&g.track);
            Ok(json!({"path": names.join(" "), "length": names.len(), "terminal": terminal(&g, &it.terminal)}))
        }
        ComplexCmd::Boundary { sel } => {
            let g = complex(&sel)?;
            let bp = boundary_paths(&g, &BoundaryOptions::default());
            let rows: Vec<Value> = bp.iter().map(|p| json!({"corners": p.corners.len(), "singular": p.singular_names.join(" ")})).collect();
            Ok(json!({"count": bp.len(), "paths": rows}))
        }
        ComplexCmd::Saddles { sel, max_level } => {
            let g = complex(&sel)?;
            let sc = saddle_connection_census(&g, max_level, 100_000);
            let rows: Vec<String> =
                sc.iter().map(|c| format!("{} -> {} ({} rectangles)", g.singular[c.from].name, g.singular[c.to].name, c.itinerary.steps.len())).collect();
            Ok(json!({"count": sc.len(), "connections": rows}))
        }
        ComplexCmd::Unzip { cover, max_cut, depth } => {
            let sel = TrackSel { track: Which::T1, depth, cover: Some(cover) };
            let g = complex(&sel)?;
            let entries = alpha_entries(&g, cover, 4096);
            let root = g.track.branch_id("e1.0").map_err(err)?;
            let cands = cut_candidates(&g, 2, 256);
            let s = search_red_set(&g, &cands, root, &rat(1, 4), max_cut, 4);
            Ok(json!({"entries": entries, "shift": entry_shift(&entries), "search": s}))
        }
    }
}

fn run_flat(cmd: FlatCmd, cli: &Cli) -> CliResult {
    match cmd {
        FlatCmd::Orbit { start, steps, level } => {
            let sys = build_sigma(level).map_err(err)?;
            Ok(json!(singular_orbit(&sys, &start, steps).map_err(err)?))
        }
        FlatCmd::Leaf { separatrix, height, left, max_segments, level } => {
            let sys = build_f(level).map_err(err)?;
            let leaf = match (separatrix, height) {
                (Some(i), _) => trace_separatrix(&sys, i, max_segments),
                (None, Some(h)) => trace_leaf(&sys, &parse_q(&h)?, if left { Dir::Left } else { Dir::Right }, max_segments),
                (None, None) => return Err("give --separatrix or --height".into()),
            };
            serde_json::to_value(&leaf).map_err(err)
        }
        FlatCmd::Iet { at, level } => {
            let f = build_iet(level).map_err(err)?;
            match at {
                Some(x) => Ok(json!(format_rational(&f.apply(&parse_q(&x)?).map_err(err)?))),
                None => serde_json::to_value(&f.pieces).map_err(err),
            }
        }
        FlatCmd::Histogram { seed, returns, bins, level } => {
            let sys = build_f(level).map_err(err)?;
            serde_json::to_value(hitting_histogram(&sys, &parse_q(&seed)?, returns, bins)).map_err(err)
        }
        FlatCmd::Render { level, size } => {
            let sys = build_f(level).map_err(err)?;
            write_artifact(cli, "square.svg", &render_svg(&sys, size))
        }
    }
}

fn star_name(b: &str) -> String {
    if b.ends_with('*') {
        b.to_string()
    } else {
        format!("{b}*")
    }
}

fn run_carry(cmd: CarryCmd) -> CliResult {
    match cmd {
        CarryCmd::Zeta { branch } => Ok(json!(zeta_listing(&branch).map_err(err)?.join(" "))),
        CarryCmd::Weights { branch: Some(b), .. } => Ok(json!(format_rational(&induced_weight(&star_name(&b)).map_err(err)?))),
        CarryCmd::Weights { branch: None, depth } => {
            let c = CarryingMap::new(depth).map_err(err)?;
            serde_json::to_value(weight_table(&c.t_star).map_err(err)?).map_err(err)
        }
        CarryCmd::Translate { path, depth } => {
            let c = CarryingMap::new(depth).map_err(err)?;
            let refs: Vec<&str> = path.iter().map(|s| s.as_str()).collect();
            let p = c.t.parse_path(&refs).map_err(err)?;
            Ok(json!(c.xi_translate(&p).map_err(err)?.names(&c.t_star).join(" ")))
        }
        CarryCmd::Missing { depth } => {
            let c = CarryingMap::new(depth + 2).map_err(err)?;
            let m = missing_path_window(depth, &c.t_star).map_err(err)?;
            Ok(json!({"window": m.window.join(" "), "train_path": m.is_train_path, "only_f": m.only_f}))
        }
    }
}

fn parse_word(s: &str) -> Result<Word, String> {
    Word::parse(s).map_err(err)
}

fn run_ray(cmd: RayCmd) -> CliResult {
    match cmd {
        RayCmd::Alpha { k } => {
            let a = alpha_seq(k.max(1));
            Ok(json!({"length": a.len(), "word": a.display_rl()}))
        }
        RayCmd::Gamma { n, j } => {
            let (p, q) = default_sequences(n, j / 2 + 2);
            let f = gamma_family(n, &p, &q, j).map_err(err)?;
            let rows: Vec<Value> = (1..=n).map(|i| json!({"i": i, "length": f.gamma(i, j).len(), "word": f.gamma(i, j).display_rl()})).collect();
            Ok(json!(rows))
        }
        RayCmd::Order { a, b } => {
            let (a, b) = (parse_word(&a)?, parse_word(&b)?);
            Ok(json!(format!("{:?}", order_compare(&RayLike::Loop(a), &RayLike::Loop(b), usize::MAX))))
        }
        RayCmd::Subst { word, iter } => {
            let mut w = match word {
                Some(s) => parse_word(&s)?,
                None => parse_word("r1")?,
            };
            for _ in 0..iter {
                w = substitution_f(&w);
            }
            Ok(json!({"length": w.len(), "word": w.display_rl()}))
        }
        RayCmd::Crosses { lp, depth } => {
            let lp = parse_word(&lp)?;
            let gamma = fixed_word_prefix(1 << 12);
            let ray = RayLimit::new("gamma", move |j| gamma.prefix((j * 64).min(1 << 12)));
            Ok(match crosses_loop(&ray, &lp, depth).map_err(err)? {
                Crossing::Crosses { prefix, lift } => json!({"crosses": true, "prefix_length": prefix.len(), "lift": lift.to_string()}),
                Crossing::NoCrossingFound => json!({"crosses": false}),
            })
        }
        RayCmd::Verify { n, k, depth } => {
            let (p, q) = default_sequences(n, k + 2);
            let f = gamma_family(n, &p, &q, 2 * k + 1).map_err(err)?;
            serde_json::to_value(monotonicity_check(&f, k, depth)).map_err(err)
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir.clone().or_else(|| std::env::var_os("TWOFILL_OUT_DIR").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("twofill-out"))
}

fn write_artifact(cli: &Cli, name: &str, body: &str) -> CliResult {
    let dir = out_dir(cli);
    fs::create_dir_all(&dir).map_err(err)?;
    let path = dir.join(name);
    fs::write(&path, body).map_err(err)?;
    Ok(json!(path.display().to_string()))
}

fn run_verify(cmd: VerifyCmd, cli: &Cli) -> Result<VerificationReport, String> {
    let (name, prefix, depth, no_timing) = match cmd {
        VerifyCmd::All { depth, no_timing } => ("all".to_string(), String::new(), depth, no_timing),
        VerifyCmd::Some { prefix, depth, no_timing } => (prefix.clone(), prefix, depth, no_timing),
    };
    let report = run_suite(&name, &prefix, &Config { depth }, !no_timing);
    let body = serde_json::to_string_pretty(&report).map_err(err)?;
    write_artifact(cli, "report.json", &body)?;
    Ok(report)
}

fn emit(text: &str) {
    // A closed pipe downstream is not an error of this program.
    let _ = writeln!(std::io::stdout(), "{}", text.trim_end());
}

/// Plain text for a value: scalars as they are, arrays of single-token
/// scalars on one line, other arrays one item per line, objects one
/// `key: value` per line.
fn to_text(v: &Value, indent: usize) -> String {
    let pad = " ".repeat(indent);
    let scalar = |v: &Value| match v {
        Value::String(s) if s.contains(char::is_whitespace) => None,
        Value::String(s) => Some(s.clone()),
        Value::Array(_) | Value::Object(_) => None,
        other => Some(other.to_string()),
    };
    match v {
        Value::Array(items) if items.iter().all(|x| scalar(x).is_some()) => items.iter().filter_map(scalar).collect::<Vec<_>>().join(" "),
        Value::Array(items) => items.iter().map(|x| format!("{pad}- {}", to_text(x, indent + 2).trim_start())).collect::<Vec<_>>().join("\n"),
        Value::String(s) => s.clone(),
        Value::Object(map) => map
            .iter()
            .map(|(k, x)| {
                match scalar(x)
                    .or_else(|| x.as_str().map(str::to_string))
                    .or_else(|| matches!(x, Value::Array(a) if a.iter().all(|y| scalar(y).is_some())).then(|| to_text(x, 0)))
                {
                    Some(s) => format!("{pad}{k}: {s}"),
                    None => format!("{pad}{k}:\n{}", to_text(x, indent + 2)),
                }
            })
            .collect::<Vec<_>>()
            .join("\n"),
        other => scalar(other).unwrap_or_default(),
    }
}

fn print(cli: &Cli, v: &Value) {
    match cli.format {
        Format::Text => emit(&to_text(v, 0)),
        Format::Json => emit(&serde_json::to_string_pretty(v).unwrap_or_default()),
    }
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    let command = std::mem::replace(&mut cli.command, Command::Verify(VerifyCmd::All { depth: 0, no_timing: true }));
    let result = match command {
        Command::Track(c) => run_track(c, &cli),
        Command::Complex(c) => run_complex(c),
        Command::Flat(c) => run_flat(c, &cli),
        Command::Carry(c) => run_carry(c),
        Command::Ray(c) => run_ray(c),
        Command::Verify(c) => match run_verify(c, &cli) {
            Ok(report) => {
                match cli.format {
                    Format::Text => emit(&report.to_text()),
                    Format::Json => emit(&serde_json::to_string_pretty(&report).unwrap_or_default()),
                }
                return if report.ok() { ExitCode::SUCCESS } else { ExitCode::FAILURE };
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(v) => {
            print(&cli, &v);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
