//! Command-line driver. Exit codes: 0 pass, 1 report-level failure,
//! 2 malformed input or violated precondition, 64 usage error.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use ggl::bratteli::{af_ball_check, af_groupoid_truncation, af_length, BratteliDiagram};
use ggl::coarse::{
    coarse_growth, conflict_degree_bound, controlled_set_from_metric, decompose_orthogonal, union_equals,
    verify_orthogonality, ControlledSet, Metric,
};
use ggl::convolution::{nc_torus_cocycle, nc_torus_translation, twisted_convolve, validate_cocycle, BoxGroup, GroupoidFunction, TwoCocycle};
use ggl::graph::{exponential_witness, graph_fiber_ball, has_polynomial_growth, BoundaryPath, DirectedGraph};
use ggl::groupoid::{validate_groupoid, validate_length};
use ggl::growth::{check_rd_inequality, check_rd_inheritance, function_corpus, growth_profile, rd_constants_from_growth, RdCheckOptions};
use ggl::par::Exec;
use ggl::rep::{reduced_norm, twisted_reduced_norm, NormOptions};
use ggl::{Error, FiniteGroupoid, LengthFunction};

#[derive(Parser)]
#[command(name = "ggl", version, about = "Finite groupoid convolution algebras, growth and rapid decay checks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for randomized routines; GGL_SEED overrides it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Exponent of the L^p norms.
    #[arg(long, global = true, default_value_t = 2.0)]
    p: f64,
    /// Random restarts of the power method.
    #[arg(long, global = true, default_value_t = 8)]
    restarts: usize,
    /// Power-method iterations per start.
    #[arg(long, global = true, default_value_t = 200)]
    iters: usize,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run library routines sequentially.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check groupoid, length and cocycle files.
    Validate {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        length: Option<PathBuf>,
        #[arg(long)]
        cocycle: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Directed-graph groupoids.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Bratteli diagram truncations.
    Bratteli {
        #[command(subcommand)]
        command: BratteliCommand,
    },
    /// Ball growth profile and polynomial fit.
    Balls {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        length: PathBuf,
        /// Largest radius; radii run from 0.
        #[arg(long, default_value_t = 12)]
        max_radius: u64,
    },
    /// Reduced L^p norm interval of a function.
    Norm {
        #[arg(long)]
        groupoid: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        cocycle: Option<PathBuf>,
    },
    /// Rapid decay checks.
    Rd {
        #[command(subcommand)]
        command: RdCommand,
    },
    /// Controlled sets.
    Coarse {
        #[command(subcommand)]
        command: CoarseCommand,
    },
    /// Noncommutative torus relations.
    Torus {
        #[command(subcommand)]
        command: TorusCommand,
    },
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Decide polynomial growth from simple cycles.
    Growth {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Emit the ball model of a fiber as groupoid and length files.
    Groupoid {
        #[arg(long)]
        graph: PathBuf,
        /// File with a `path <root> <edges> [cycle <edges>]` line.
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        radius: usize,
        #[arg(long)]
        out_groupoid: PathBuf,
        #[arg(long)]
        out_length: PathBuf,
    },
}

#[derive(Subcommand)]
enum BratteliCommand {
    /// Truncate at a level, validate, and check balls at integer radii.
    Groupoid {
        #[arg(long)]
        diagram: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out_groupoid: Option<PathBuf>,
        #[arg(long)]
        out_length: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RdInput {
    #[arg(long)]
    groupoid: PathBuf,
    #[arg(long)]
    length: PathBuf,
    /// Corpus size.
    #[arg(long, default_value_t = 100)]
    functions: usize,
    /// Largest radius used to fit the growth constants.
    #[arg(long, default_value_t = 12)]
    max_radius: u64,
}

#[derive(Subcommand)]
enum RdCommand {
    /// `‖f‖_I ≤ C ‖f‖_{p,k}` with constants from the fitted growth.
    Check {
        #[command(flatten)]
        input: RdInput,
        /// Also compare with certified operator-norm lower bounds.
        #[arg(long)]
        strict: bool,
    },
    /// Derive RD at `p` from RD at `d ≥ p`.
    Inherit {
        #[command(flatten)]
        input: RdInput,
        #[arg(long)]
        d: f64,
    },
}

#[derive(Subcommand)]
enum CoarseCommand {
    /// Split a relation into orthogonal partial bijections.
    Decompose {
        #[arg(long)]
        relation: PathBuf,
    },
    /// `|(E^n)_x|` for n = 1..=steps.
    Growth {
        #[arg(long, conflicts_with = "metric")]
        relation: Option<PathBuf>,
        #[arg(long, requires = "radius")]
        metric: Option<PathBuf>,
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        point: usize,
        #[arg(long, default_value_t = 5)]
        steps: u32,
    },
}

#[derive(Subcommand)]
enum TorusCommand {
    /// Validate the cocycle and the commutation relation on a box.
    Demo {
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        #[arg(long, default_value_t = 2)]
        radius: i64,
    },
}

/// A report to print and whether it passed.
struct Outcome {
    text: String,
    json: String,
    pass: bool,
}

impl Outcome {
    fn new(text: String, json: impl Serialize, pass: bool) -> Self {
        Outcome {
            text,
            json: serde_json::to_string(&json).expect("plain data"),
            pass,
        }
    }
}

fn read(path: &FsPath) -> Result<String, Error> {
    Ok(fs::read_to_string(path)?)
}

fn load_groupoid(path: &FsPath) -> Result<FiniteGroupoid, Error> {
    FiniteGroupoid::from_json(&read(path)?)
}

fn load_length(path: &FsPath, g: &FiniteGroupoid) -> Result<LengthFunction, Error> {
    let l = LengthFunction::from_json(&read(path)?)?;
    if l.len() != g.n_elements() {
        return Err(Error::Structural(format!(
            "length has {} values for {} elements",
            l.len(),
            g.n_elements()
        )));
    }
    Ok(l)
}

fn norm_options(g: &Global, seed: u64) -> NormOptions {
    NormOptions {
        p: g.p,
        restarts: g.restarts,
        iters: g.iters,
        seed,
        exec: exec(g),
        ..NormOptions::default()
    }
}

fn exec(g: &Global) -> Exec {
    if g.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn run(cli: &Cli, seed: u64) -> Result<Outcome, Error> {
    let global = &cli.global;
    match &cli.command {
        Command::Validate {
            groupoid,
            length,
            cocycle,
            tol,
        } => {
            let g = load_groupoid(groupoid)?;
            let mut text = String::new();
            let gr = validate_groupoid(&g);
            text += &format!("groupoid: {} elements, {} units, ok={}\n", g.n_elements(), g.units().len(), gr.ok);
            let mut pass = gr.ok;
            let mut reports = vec![("groupoid", gr)];
            if let Some(path) = length {
                let r = validate_length(&g, &load_length(path, &g)?, *tol)?;
                text += &format!("length: ok={}\n", r.ok);
                pass &= r.ok;
                reports.push(("length", r));
            }
            if let Some(path) = cocycle {
                let r = validate_cocycle(&g, &TwoCocycle::parse(&read(path)?)?, *tol)?;
                text += &format!("cocycle: ok={}\n", r.ok);
                pass &= r.ok;
                reports.push(("cocycle", r));
            }
            for (name, r) in &reports {
                for v in r.violations.iter().take(5) {
                    text += &format!("  {name} violation {} at {:?}\n", v.axiom, v.witness);
                }
            }
            let json: serde_json::Map<String, serde_json::Value> = reports
                .iter()
                .map(|(n, r)| (n.to_string(), serde_json::to_value(r).unwrap()))
                .collect();
            Ok(Outcome::new(text, json, pass))
        }
        Command::Graph { command } => match command {
            GraphCommand::Growth { graph } => {
                let e = DirectedGraph::parse(&read(graph)?)?;
                let verdict = has_polynomial_growth(&e);
                let mut text = format!("{}\n", if verdict.polynomial { "polynomial" } else { "exponential" });
                if let Some(w) = exponential_witness(&e, &verdict) {
                    text += &format!(
                        "vertex {}: cycles [{}] and [{}], K = {}\n",
                        e.vertex_name(w.vertex),
                        w.alpha.display(&e),
                        w.beta.display(&e),
                        w.k
                    );
                } else {
                    for c in &verdict.census {
                        if let Some(cycle) = &c.cycle {
                            text += &format!("vertex {}: cycle [{}]\n", e.vertex_name(c.vertex), cycle.display(&e));
                        }
                    }
                }
                Ok(Outcome::new(text, &verdict, true))
            }
            GraphCommand::Groupoid {
                graph,
                base,
                radius,
                out_groupoid,
                out_length,
            } => {
                let e = DirectedGraph::parse(&read(graph)?)?;
                let x = BoundaryPath::parse(&e, &read(base)?)?;
                let ball = graph_fiber_ball(&e, &x, *radius)?;
                let g = ball.groupoid();
                let l = ball.length();
                fs::write(out_groupoid, g.to_json())?;
                fs::write(out_length, l.to_json())?;
                let ok = validate_groupoid(&g).ok && validate_length(&g, &l, 0.0)?.ok;
                let profile = ball.profile();
                let text = format!("ball elements: {}\nprofile: {:?}\nvalid: {ok}\n", ball.len(), profile);
                Ok(Outcome::new(
                    text,
                    serde_json::json!({"elements": ball.len(), "profile": profile, "valid": ok}),
                    ok,
                ))
            }
        },
        Command::Bratteli {
            command:
                BratteliCommand::Groupoid {
                    diagram,
                    level,
                    out_groupoid,
                    out_length,
                },
        } => {
            let b = BratteliDiagram::parse(&read(diagram)?)?;
            let t = af_groupoid_truncation(&b, *level)?;
            let len = af_length(&t, None)?;
            let g = t.groupoid();
            if let Some(p) = out_groupoid {
                fs::write(p, g.to_json())?;
            }
            if let Some(p) = out_length {
                fs::write(p, len.length.to_json())?;
            }
            let gv = validate_groupoid(g).ok;
            let lv = validate_length(g, &len.length, 0.0)?.ok;
            let top = len.weights.iter().sum::<u64>();
            let mut balls_ok = true;
            let mut guarded = Vec::new();
            for r in 0..=top {
                let rep = af_ball_check(&t, r as f64, exec(global))?;
                balls_ok &= rep.pass;
                if rep.radius_guard {
                    guarded.push(r);
                }
            }
            let text = format!(
                "paths: {}\nelements: {}\nweights: {:?}{}\ngroupoid valid: {gv}\nlength valid: {lv}\nball bound holds for R in 0..={top}: {balls_ok}\n{}",
                t.paths().len(),
                g.n_elements(),
                len.weights,
                if len.fallback { " (0/1 length)" } else { "" },
                if guarded.is_empty() {
                    String::new()
                } else {
                    format!("truncation may hide elements at R >= {}\n", guarded[0])
                }
            );
            let json = serde_json::json!({
                "paths": t.paths().len(), "elements": g.n_elements(), "weights": len.weights,
                "fallback": len.fallback, "groupoid_valid": gv, "length_valid": lv, "balls_ok": balls_ok,
                "guarded_from": guarded.first(),
            });
            Ok(Outcome::new(text, json, gv && lv && balls_ok))
        }
        Command::Balls {
            groupoid,
            length,
            max_radius,
        } => {
            let g = load_groupoid(groupoid)?;
            let l = load_length(length, &g)?;
            let radii: Vec<u64> = (0..=*max_radius).collect();
            let fit = growth_profile(&g, &l, &radii)?;
            let mut text = String::from("radius  sup_ball\n");
            for (m, b) in fit.radii.iter().zip(&fit.sup_counts) {
                text += &format!("{m:>6}  {b:>8}\n");
            }
            text += &format!(
                "fit: c = {:.6}, r = {}, slope = {:.4}, residual = {:.4}{}{}\n",
                fit.c,
                fit.r,
                fit.ls_slope,
                fit.residual,
                if fit.degenerate { ", degenerate" } else { "" },
                if fit.polynomial { "" } else { ", non-polynomial" }
            );
            Ok(Outcome::new(text, &fit, true))
        }
        Command::Norm {
            groupoid,
            function,
            cocycle,
        } => {
            let g = load_groupoid(groupoid)?;
            let f = GroupoidFunction::parse(&read(function)?, g.n_elements())?;
            let opts = norm_options(global, seed);
            let iv = match cocycle {
                Some(path) => twisted_reduced_norm(&g, &f, &TwoCocycle::parse(&read(path)?)?, &opts)?,
                None => reduced_norm(&g, &f, &opts)?,
            };
            let text = format!(
                "p = {}\nlower = {:.12} ({})\nupper = {:.12} ({})\n",
                global.p, iv.lower, iv.lower_method, iv.upper, iv.upper_method
            );
            Ok(Outcome::new(text, &iv, true))
        }
        Command::Rd { command } => {
            let input = match command {
                RdCommand::Check { input, .. } | RdCommand::Inherit { input, .. } => input,
            };
            let g = load_groupoid(&input.groupoid)?;
            let l = load_length(&input.length, &g)?;
            let radii: Vec<u64> = (0..=input.max_radius).collect();
            let fit = growth_profile(&g, &l, &radii)?;
            let corpus = function_corpus(&g, &l, input.functions, seed);
            match command {
                RdCommand::Check { strict, .. } => {
                    let c = rd_constants_from_growth(fit.c, fit.r, global.p)?;
                    let opts = RdCheckOptions {
                        strict: *strict,
                        norm: norm_options(global, seed),
                        exec: exec(global),
                    };
                    let name = input.groupoid.file_name().map_or("corpus".into(), |n| n.to_string_lossy().into_owned());
                    let rep = check_rd_inequality(&g, &l, global.p, c.k, c.constant, &corpus, &name, &opts)?;
                    let pass = rep.pass && rep.strict.is_none_or(|s| s.pass);
                    Ok(Outcome {
                        text: rep.to_table(),
                        json: rep.to_json(),
                        pass,
                    })
                }
                RdCommand::Inherit { d, .. } => {
                    let c = rd_constants_from_growth(fit.c, fit.r, *d)?;
                    let vectors = function_corpus(&g, &l, 8, seed.wrapping_add(1));
                    let rep = check_rd_inheritance(&g, &l, *d, global.p, c.k, c.constant, &corpus, &vectors, &norm_options(global, seed))?;
                    let text = format!(
                        "d = {}, p = {}\nk_d = {}, C_d = {:.9}\nk_p = {}, C_p = {:.9}\npointwise: {}\npower step: {}\nrd step: {}\nworst ratio: {:.9}\npass: {}\n",
                        rep.d, rep.p, rep.k_d, rep.constant_d, rep.k_p, rep.constant_p, rep.pointwise_ok,
                        rep.power_step_ok, rep.rd_step_ok, rep.worst_ratio, rep.pass
                    );
                    let pass = rep.pass;
                    Ok(Outcome::new(text, &rep, pass))
                }
            }
        }
        Command::Coarse { command } => match command {
            CoarseCommand::Decompose { relation } => {
                let e = ControlledSet::parse(&read(relation)?)?;
                let d = decompose_orthogonal(&e);
                let orth = verify_orthogonality(&d.parts).ok;
                let union = union_equals(&d, &e);
                let (degree, degree_bound) = conflict_degree_bound(&e);
                let pass = orth && union && (d.colors <= d.bound || e.is_empty());
                let text = format!(
                    "N = {}\nparts: {} (bound {})\nconflict degree: {degree} (bound {degree_bound})\northogonal: {orth}\nunion exact: {union}\n",
                    e.bound(),
                    d.colors,
                    d.bound
                );
                let json = serde_json::json!({
                    "N": e.bound(), "parts": d.colors, "bound": d.bound, "degree": degree,
                    "degree_bound": degree_bound, "orthogonal": orth, "union_exact": union,
                });
                Ok(Outcome::new(text, json, pass))
            }
            CoarseCommand::Growth {
                relation,
                metric,
                radius,
                point,
                steps,
            } => {
                let e = match (relation, metric) {
                    (Some(r), _) => ControlledSet::parse(&read(r)?)?,
                    (None, Some(m)) => controlled_set_from_metric(&Metric::parse(&read(m)?)?, radius.expect("required by clap"))?,
                    (None, None) => return Err(Error::Precondition("give --relation or --metric".into())),
                };
                let counts = (1..=*steps).map(|n| coarse_growth(&e, *point, n)).collect::<Result<Vec<_>, _>>()?;
                let mut text = String::from("n  |(E^n)_x|\n");
                for (n, c) in counts.iter().enumerate() {
                    text += &format!("{:<2} {c}\n", n + 1);
                }
                Ok(Outcome::new(text, serde_json::json!({"point": point, "growth": counts}), true))
            }
        },
        Command::Torus {
            command: TorusCommand::Demo { theta, radius },
        } => {
            let b = BoxGroup::new(2, *radius)?;
            let th = vec![vec![0.0, *theta], vec![-*theta, 0.0]];
            let sigma = nc_torus_cocycle(&th, &b)?;
            let mut cocycle_ok = validate_cocycle(&b, &sigma, 1e-12)?.ok;
            let (tg, tsigma) = nc_torus_translation(&th, &b)?;
            cocycle_ok &= validate_cocycle(&tg, &tsigma, 1e-12)?.ok;
            let missing = Error::Precondition("box radius must be at least 1".into());
            let e1 = GroupoidFunction::delta(b.basis(0).ok_or(missing)?);
            let e2 = GroupoidFunction::delta(b.basis(1).expect("same radius"));
            let lhs = twisted_convolve(&b, &e1, &e2, &sigma);
            let rhs = twisted_convolve(&b, &e2, &e1, &sigma);
            let phase = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * theta);
            let diff = lhs.max_abs_diff(&rhs.scale(phase));
            let relation_ok = diff <= 1e-12 && lhs.support_len() == 1;
            let text = format!(
                "theta = {theta}\nbox radius = {radius}\ncocycle valid: {cocycle_ok}\ncommutation defect: {diff:.3e}\n"
            );
            Ok(Outcome::new(
                text,
                serde_json::json!({"theta": theta, "cocycle_valid": cocycle_ok, "commutation_defect": diff}),
                cocycle_ok && relation_ok,
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let seed = std::env::var("GGL_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(cli.global.seed);
    match run(&cli, seed) {
        Ok(out) => {
            match cli.global.format {
                Format::Text => print!("{}", out.text),
                Format::Json => println!("{}", out.json),
            }
            ExitCode::from(if out.pass { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
