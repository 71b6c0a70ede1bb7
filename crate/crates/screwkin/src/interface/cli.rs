//! Command-line driver. Exit codes: 0 success, 1 numerical verification
//! failure, 2 parse/validation failure, 3 usage error.

use super::model_format::{parse_model_with_params, LoadedModel};
use super::result_doc::{
    self, matrix_csv, matrix_rows, to_json_string, BodyPoseOut, JacobianOut, RatesOut,
    ResultDocument, SystemOut, TwistOut,
};
use crate::invkin;
use crate::kinematics::{
    self, convert_twist, fk, fk_variant, jacobian_with_poses, twists_counted, BodyTwists,
    FkVariant, OpCount, TwistRep,
};
use crate::liegroup::Screw;
use crate::mbsmodel::MbsModel;
use crate::oracle::{self, FdScheme};
use crate::sysjac;
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Default absolute tolerance of `verify` residual checks; the
/// `SCREWKIN_TOL` environment variable overrides it.
pub const DEFAULT_VERIFY_TOL: f64 = 1e-10;

pub const RCM_MODEL_TEXT: &str = include_str!("../../data/rcm.model");

#[derive(Parser)]
#[command(
    name = "screwkin",
    version,
    about = "Screw-theory kinematics for tree-topology multibody systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Body poses at a configuration.
    Fk {
        #[arg(long)]
        model: String,
        /// Joint values, comma separated (default: zeros).
        #[arg(long)]
        q: Option<String>,
        /// Algorithm: spatial | body | jfr.
        #[arg(long, default_value = "spatial")]
        variant: String,
        /// Parameter overrides name=value,...
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Geometric Jacobians of one body or all bodies.
    Jacobian {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: Option<String>,
        /// body | spatial | hybrid | mixed.
        #[arg(long)]
        rep: String,
        /// Body index 1..=n (default: all bodies).
        #[arg(long)]
        body: Option<usize>,
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recursive body twists with operation counts.
    Twists {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        qdot: String,
        #[arg(long)]
        rep: String,
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// System Jacobian with its factorization.
    Sysjac {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: Option<String>,
        #[arg(long)]
        rep: String,
        /// json (full document) or csv (the 6n x n Jacobian only).
        #[arg(long, default_value = "json")]
        format: String,
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Joint rates from a twist document (output of `twists`).
    Ikrates {
        #[arg(long)]
        model: String,
        #[arg(long)]
        q: Option<String>,
        /// Path to a result document containing twists.
        #[arg(long)]
        twists: PathBuf,
        #[arg(long)]
        params: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Oracle suite: exits nonzero if any check fails.
    Verify {
        /// Model path, or the literal `random`.
        #[arg(long)]
        model: String,
        /// Body count for random models.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        params: Option<String>,
    },
    /// Chain-length sweep of the four twist recursions; CSV output.
    Bench {
        /// Chain lengths, comma separated.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluations per timing sample.
        #[arg(long, default_value_t = 200)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the bundled remote-center-of-motion model and a walkthrough
    /// result set.
    ExampleRcm {
        #[arg(long, default_value = ".")]
        dir: PathBuf,
    },
}

pub fn run_from_env() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "{}", failure.message);
            failure.code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }

    fn parse(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_PARSE,
            message: msg.into(),
        }
    }
}

fn parse_csv_f64(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Failure::usage(format!("bad number '{t}'")))
        })
        .collect()
}

fn parse_param_overrides(s: &Option<String>) -> Result<BTreeMap<String, f64>, Failure> {
    let mut map = BTreeMap::new();
    if let Some(s) = s {
        for piece in s.split(',') {
            let (k, v) = piece.split_once('=').ok_or_else(|| {
                Failure::usage(format!(
                    "bad parameter override '{piece}' (want name=value)"
                ))
            })?;
            let value = super::expr::eval_expr(v.trim(), &BTreeMap::new())
                .map_err(|e| Failure::usage(format!("bad value in '{piece}': {}", e.message)))?;
            map.insert(k.trim().to_string(), value);
        }
    }
    Ok(map)
}

/// Loads a model from a path, or builds a random tree for the literal
/// `random`.
fn load_model(
    spec: &str,
    n: Option<usize>,
    seed: u64,
    params: &Option<String>,
    err: &mut dyn Write,
) -> Result<(MbsModel, Option<String>), Failure> {
    if spec == "random" {
        let n = n.unwrap_or(6);
        if n == 0 {
            return Err(Failure::usage("--n must be at least 1"));
        }
        return Ok((MbsModel::random_tree(n, seed), None));
    }
    let overrides = parse_param_overrides(params)?;
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Failure::parse(format!("cannot read model '{spec}': {e}")))?;
    match parse_model_with_params(&text, &overrides) {
        Ok(LoadedModel { model, doc, .. }) => Ok((model, doc.name)),
        Err(diags) => {
            for d in &diags {
                let _ = writeln!(err, "{spec}:{d}");
            }
            Err(Failure::parse(format!(
                "{} error(s) in model '{spec}'",
                diags.len()
            )))
        }
    }
}

fn q_or_zeros(q: &Option<String>, n: usize) -> Result<Vec<f64>, Failure> {
    let q = match q {
        Some(s) => parse_csv_f64(s)?,
        None => vec![0.0; n],
    };
    if q.len() != n {
        return Err(Failure::usage(format!(
            "expected {n} joint values, got {}",
            q.len()
        )));
    }
    Ok(q)
}

fn emit(doc: &ResultDocument, out: &mut dyn Write, path: &Option<PathBuf>) -> Result<(), Failure> {
    let text = to_json_string(doc);
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::parse(format!("cannot write '{}': {e}", p.display()))),
        None => {
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn emit_text(text: &str, out: &mut dyn Write, path: &Option<PathBuf>) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::parse(format!("cannot write '{}': {e}", p.display()))),
        None => {
            let _ = out.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn body_names(model: &MbsModel) -> Vec<String> {
    model.topology().names().to_vec()
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Fk {
            model,
            q,
            variant,
            params,
            out: out_path,
        } => {
            let (m, name) = load_model(&model, None, 0, &params, err)?;
            let q = q_or_zeros(&q, m.n())?;
            let var: FkVariant = variant.parse().map_err(Failure::usage)?;
            let t0 = Instant::now();
            let poses = fk_variant(&m, &q, var).map_err(|e| Failure::usage(e.to_string()))?;
            let names = body_names(&m);
            let mut doc = ResultDocument::new("fk", m.n());
            doc.model_name = name;
            doc.q = Some(q);
            doc.variant = Some(variant);
            doc.bodies = Some(
                (1..=m.n())
                    .map(|i| BodyPoseOut::from_pose(i, &names[i - 1], &poses.pose(i)))
                    .collect(),
            );
            doc.timing_s = Some(t0.elapsed().as_secs_f64());
            emit(&doc, out, &out_path)?;
            Ok(EXIT_OK)
        }
        Command::Jacobian {
            model,
            q,
            rep,
            body,
            params,
            out: out_path,
        } => {
            let (m, name) = load_model(&model, None, 0, &params, err)?;
            let q = q_or_zeros(&q, m.n())?;
            let rep: TwistRep = rep.parse().map_err(Failure::usage)?;
            if let Some(b) = body {
                if b == 0 || b > m.n() {
                    return Err(Failure::usage(format!(
                        "body index {b} out of range 1..={}",
                        m.n()
                    )));
                }
            }
            let t0 = Instant::now();
            let poses = fk(&m, &q).map_err(|e| Failure::usage(e.to_string()))?;
            let to_out = |j: &kinematics::BodyJacobian| JacobianOut {
                body: j.body,
                rep: rep.to_string(),
                support: j.support(),
                matrix: matrix_rows(&j.to_matrix()),
            };
            let jacobians: Vec<JacobianOut> = match body {
                Some(b) => {
                    vec![to_out(
                        &jacobian_with_poses(&m, &poses, b, rep).expect("body checked"),
                    )]
                }
                // The batch path shares the per-joint screws across bodies.
                None => kinematics::all_jacobians(&m, &poses, rep)
                    .iter()
                    .map(to_out)
                    .collect(),
            };
            let mut doc = ResultDocument::new("jacobian", m.n());
            doc.model_name = name;
            doc.q = Some(q);
            doc.rep = Some(rep.to_string());
            doc.jacobians = Some(jacobians);
            doc.timing_s = Some(t0.elapsed().as_secs_f64());
            emit(&doc, out, &out_path)?;
            Ok(EXIT_OK)
        }
        Command::Twists {
            model,
            q,
            qdot,
            rep,
            params,
            out: out_path,
        } => {
            let (m, name) = load_model(&model, None, 0, &params, err)?;
            let q = q_or_zeros(&q, m.n())?;
            let qdot = parse_csv_f64(&qdot)?;
            let rep: TwistRep = rep.parse().map_err(Failure::usage)?;
            let t0 = Instant::now();
            let (v, ops) =
                twists_counted(&m, &q, &qdot, rep).map_err(|e| Failure::usage(e.to_string()))?;
            let names = body_names(&m);
            let mut doc = ResultDocument::new("twists", m.n());
            doc.model_name = name;
            doc.q = Some(q);
            doc.qdot = Some(qdot);
            doc.rep = Some(rep.to_string());
            doc.twists = Some(
                (1..=m.n())
                    .map(|i| TwistOut::from_screw(i, &names[i - 1], &v.twist(i)))
                    .collect(),
            );
            doc.op_counts = Some(vec![(rep.to_string(), ops.into())]);
            doc.timing_s = Some(t0.elapsed().as_secs_f64());
            emit(&doc, out, &out_path)?;
            Ok(EXIT_OK)
        }
        Command::Sysjac {
            model,
            q,
            rep,
            format,
            params,
            out: out_path,
        } => {
            let (m, name) = load_model(&model, None, 0, &params, err)?;
            let q = q_or_zeros(&q, m.n())?;
            let rep: TwistRep = rep.parse().map_err(Failure::usage)?;
            let t0 = Instant::now();
            let (j, f) =
                sysjac::system_jacobian(&m, &q, rep).map_err(|e| Failure::usage(e.to_string()))?;
            match format.as_str() {
                "csv" => {
                    emit_text(&matrix_csv(&j), out, &out_path)?;
                }
                "json" => {
                    let mut doc = ResultDocument::new("sysjac", m.n());
                    doc.model_name = name;
                    doc.q = Some(q);
                    doc.rep = Some(rep.to_string());
                    doc.system = Some(SystemOut {
                        rep: rep.to_string(),
                        j: matrix_rows(&j),
                        a: matrix_rows(&f.a.to_dense()),
                        x: matrix_rows(&f.x.to_dense()),
                        d_or_t: f.d_or_t.as_ref().map(|d| matrix_rows(&d.to_dense())),
                    });
                    doc.timing_s = Some(t0.elapsed().as_secs_f64());
                    emit(&doc, out, &out_path)?;
                }
                other => return Err(Failure::usage(format!("unknown format '{other}'"))),
            }
            Ok(EXIT_OK)
        }
        Command::Ikrates {
            model,
            q,
            twists: twists_path,
            params,
            out: out_path,
        } => {
            let (m, name) = load_model(&model, None, 0, &params, err)?;
            let q = q_or_zeros(&q, m.n())?;
            let text = std::fs::read_to_string(&twists_path).map_err(|e| {
                Failure::parse(format!("cannot read '{}': {e}", twists_path.display()))
            })?;
            let twist_doc = result_doc::from_json_str(&text)
                .map_err(|e| Failure::parse(format!("bad twist document: {e}")))?;
            let rep: TwistRep = twist_doc
                .rep
                .as_deref()
                .ok_or_else(|| Failure::parse("twist document carries no rep"))?
                .parse()
                .map_err(Failure::parse)?;
            let twist_list = twist_doc
                .twists
                .as_ref()
                .ok_or_else(|| Failure::parse("twist document carries no twists"))?;
            if twist_list.len() != m.n() {
                return Err(Failure::parse(format!(
                    "twist document has {} bodies, model has {}",
                    twist_list.len(),
                    m.n()
                )));
            }
            let mut screws = vec![Screw::zero(); m.n()];
            for t in twist_list {
                if t.body == 0 || t.body > m.n() {
                    return Err(Failure::parse(format!(
                        "twist body index {} out of range",
                        t.body
                    )));
                }
                screws[t.body - 1] = t.to_screw();
            }
            let v = BodyTwists::new(rep, screws);
            let t0 = Instant::now();
            let sol =
                invkin::rates_from_twists(&m, &q, &v).map_err(|e| Failure::usage(e.to_string()))?;
            let gap =
                invkin::lsq_discrepancy(&m, &q, &v).map_err(|e| Failure::usage(e.to_string()))?;
            let names = body_names(&m);
            let mut doc = ResultDocument::new("ikrates", m.n());
            doc.model_name = name;
            doc.q = Some(q);
            doc.rep = Some(rep.to_string());
            doc.rates = Some(RatesOut {
                qdot: sol.qdot.clone(),
                residual_norm: sol.residual_norm,
                consistent: sol.consistent,
                lsq_discrepancy: gap,
                residual: sol
                    .residual
                    .iter()
                    .enumerate()
                    .map(|(k, r)| TwistOut::from_screw(k + 1, &names[k], r))
                    .collect(),
            });
            doc.timing_s = Some(t0.elapsed().as_secs_f64());
            emit(&doc, out, &out_path)?;
            Ok(EXIT_OK)
        }
        Command::Verify {
            model,
            n,
            seed,
            params,
        } => {
            let (m, _) = load_model(&model, n, seed, &params, err)?;
            let tol = verify_tolerance();
            let report = verify_model(&m, seed, tol);
            for line in &report.lines {
                let _ = writeln!(out, "{line}");
            }
            if report.passed {
                let _ = writeln!(out, "verify: all checks passed (tol {tol:.1e})");
                Ok(EXIT_OK)
            } else {
                let _ = writeln!(out, "verify: FAILED");
                Ok(EXIT_NUMERICAL)
            }
        }
        Command::Bench {
            n,
            seed,
            iters,
            out: out_path,
        } => {
            let ns: Vec<usize> = n
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Failure::usage(format!("bad length '{t}'")))
                })
                .collect::<Result<_, _>>()?;
            if ns.contains(&0) {
                return Err(Failure::usage("chain lengths must be positive"));
            }
            let rows = bench_chains(&ns, seed, iters);
            let mut csv = String::from(
                "n,rep,wall_ns,prep_adjoint,prep_rot,sweep_adjoint,sweep_shift,sweep_block,screw_scale,screw_add\n",
            );
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{:.1},{},{},{},{},{},{},{}\n",
                    r.n,
                    r.rep,
                    r.wall_ns,
                    r.ops.prep_adjoint,
                    r.ops.prep_rot,
                    r.ops.sweep_adjoint,
                    r.ops.sweep_shift,
                    r.ops.sweep_block,
                    r.ops.screw_scale,
                    r.ops.screw_add
                ));
            }
            emit_text(&csv, out, &out_path)?;
            Ok(EXIT_OK)
        }
        Command::ExampleRcm { dir } => {
            std::fs::create_dir_all(&dir)
                .map_err(|e| Failure::parse(format!("cannot create '{}': {e}", dir.display())))?;
            let model_path = dir.join("rcm.model");
            std::fs::write(&model_path, RCM_MODEL_TEXT)
                .map_err(|e| Failure::parse(format!("cannot write model: {e}")))?;
            let _ = writeln!(out, "wrote {}", model_path.display());

            let loaded = parse_model_with_params(RCM_MODEL_TEXT, &BTreeMap::new())
                .expect("bundled model is valid");
            let m = loaded.model;
            let names = body_names(&m);
            let q = vec![0.1, 0.2, 0.3, 0.4, 0.5];
            let qdot = vec![0.5, -0.25, 1.0, 0.75, -0.5];

            let poses = fk(&m, &q).expect("dimensions fixed");
            let mut fk_doc = ResultDocument::new("fk", m.n());
            fk_doc.model_name = Some("rcm".into());
            fk_doc.q = Some(q.clone());
            fk_doc.variant = Some("spatial".into());
            fk_doc.bodies = Some(
                (1..=m.n())
                    .map(|i| BodyPoseOut::from_pose(i, &names[i - 1], &poses.pose(i)))
                    .collect(),
            );
            let p = dir.join("rcm_fk.json");
            std::fs::write(&p, to_json_string(&fk_doc))
                .map_err(|e| Failure::parse(e.to_string()))?;
            let _ = writeln!(out, "wrote {}", p.display());

            let mut jac_doc = ResultDocument::new("jacobian", m.n());
            jac_doc.model_name = Some("rcm".into());
            jac_doc.q = Some(q.clone());
            jac_doc.jacobians = Some(
                TwistRep::ALL
                    .iter()
                    .flat_map(|&rep| {
                        let poses = &poses;
                        let m = &m;
                        (1..=m.n()).map(move |i| {
                            let j = jacobian_with_poses(m, poses, i, rep).expect("valid body");
                            JacobianOut {
                                body: i,
                                rep: rep.to_string(),
                                support: j.support(),
                                matrix: matrix_rows(&j.to_matrix()),
                            }
                        })
                    })
                    .collect(),
            );
            let p = dir.join("rcm_jacobians.json");
            std::fs::write(&p, to_json_string(&jac_doc))
                .map_err(|e| Failure::parse(e.to_string()))?;
            let _ = writeln!(out, "wrote {}", p.display());

            let mut tw_doc = ResultDocument::new("twists", m.n());
            tw_doc.model_name = Some("rcm".into());
            tw_doc.q = Some(q.clone());
            tw_doc.qdot = Some(qdot.clone());
            let mut all = Vec::new();
            let mut op_counts = Vec::new();
            for rep in TwistRep::ALL {
                let (v, ops) = twists_counted(&m, &q, &qdot, rep).expect("dimensions fixed");
                op_counts.push((rep.to_string(), ops.into()));
                for i in 1..=m.n() {
                    let mut t = TwistOut::from_screw(i, &names[i - 1], &v.twist(i));
                    t.name = format!("{}:{}", rep, t.name);
                    all.push(t);
                }
            }
            tw_doc.twists = Some(all);
            tw_doc.op_counts = Some(op_counts);
            let p = dir.join("rcm_twists.json");
            std::fs::write(&p, to_json_string(&tw_doc))
                .map_err(|e| Failure::parse(e.to_string()))?;
            let _ = writeln!(out, "wrote {}", p.display());
            Ok(EXIT_OK)
        }
    }
}

pub fn verify_tolerance() -> f64 {
    std::env::var("SCREWKIN_TOL")
        .ok()
        .and_then(|s| s.parse::<f64>().ok())
        .unwrap_or(DEFAULT_VERIFY_TOL)
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub passed: bool,
    /// Max |sweep - least-squares| joint rate gap on perturbed twists.
    pub lsq_gap: f64,
    pub lines: Vec<String>,
}

struct Checker {
    lines: Vec<String>,
    passed: bool,
}

impl Checker {
    fn record(&mut self, name: &str, max_err: f64, tol: f64) {
        if max_err <= tol {
            self.lines.push(format!(
                "ok   {name}: max err {max_err:.3e} (tol {tol:.1e})"
            ));
        } else {
            self.lines.push(format!(
                "FAIL {name}: max err {max_err:.3e} exceeds tol {tol:.1e}"
            ));
            self.passed = false;
        }
    }
}

/// Runs the oracle suite against a model: forward-kinematics variants and
/// the 4x4 chain oracle, finite-difference Jacobians in all four
/// representations, twist/Jacobian consistency, conversion round trips,
/// factorization identities, and joint-rate recovery. The least-squares
/// comparison on perturbed twists is reported, not asserted: the sweep
/// solution need not minimize the residual for inconsistent data.
pub fn verify_model(model: &MbsModel, seed: u64, tol: f64) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c3e_77aa);
    let n = model.n();
    let mut c = Checker {
        lines: Vec::new(),
        passed: true,
    };

    let random_q = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n)
            .map(|_| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect()
    };

    // Forward kinematics: three variants and the naive chain oracle.
    let mut worst_var = 0.0f64;
    let mut worst_naive = 0.0f64;
    for _ in 0..10 {
        let q = random_q(&mut rng);
        let a = fk_variant(model, &q, FkVariant::SpatialPoe).unwrap();
        let b = fk_variant(model, &q, FkVariant::BodyPoe).unwrap();
        let cjfr = fk_variant(model, &q, FkVariant::Jfr).unwrap();
        let naive = oracle::naive_fk(model, &q).unwrap();
        for i in 1..=n {
            worst_var = worst_var
                .max(a.pose(i).max_abs_diff(&b.pose(i)))
                .max(a.pose(i).max_abs_diff(&cjfr.pose(i)));
            worst_naive = worst_naive.max(a.pose(i).max_abs_diff(&naive.pose(i)));
        }
    }
    c.record("fk variants agree", worst_var, tol);
    c.record("fk matches 4x4 chain oracle", worst_naive, tol);

    // Finite-difference Jacobians, relative scale.
    let q = random_q(&mut rng);
    let poses = fk(model, &q).unwrap();
    let mut worst_fd = 0.0f64;
    for rep in TwistRep::ALL {
        for i in 1..=n {
            let analytic = jacobian_with_poses(model, &poses, i, rep).unwrap();
            let fd = oracle::fd_body_jacobian(model, &q, i, rep, FdScheme::default()).unwrap();
            for j in 1..=n {
                let scale = 1.0 + analytic.column(j).max_abs();
                worst_fd = worst_fd.max(analytic.column(j).max_abs_diff(&fd[j - 1]) / scale);
            }
        }
    }
    c.record("jacobians match finite differences", worst_fd, 1e-6);

    // Twist recursions against Jacobian contraction.
    let qdot: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut worst_twist = 0.0f64;
    for rep in TwistRep::ALL {
        let v = kinematics::twists(model, &q, &qdot, rep).unwrap();
        for i in 1..=n {
            let ji = jacobian_with_poses(model, &poses, i, rep).unwrap();
            worst_twist = worst_twist.max(v.twist(i).max_abs_diff(&ji.mul_rates(&qdot)));
        }
    }
    c.record("twist recursions match jacobians", worst_twist, tol);

    // Conversion round trips on random twists.
    let mut worst_conv = 0.0f64;
    for _ in 0..20 {
        let i = rng.random_range(1..=n);
        let pose = poses.pose(i);
        let v = Screw::new(
            nalgebra::Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ),
            nalgebra::Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ),
        );
        for from in TwistRep::ALL {
            for to in TwistRep::ALL {
                let back = convert_twist(&convert_twist(&v, from, to, &pose), to, from, &pose);
                worst_conv = worst_conv.max(back.max_abs_diff(&v));
            }
        }
    }
    c.record("twist conversions round-trip", worst_conv, tol);

    // Factorizations.
    let mut worst_fact = 0.0f64;
    for rep in TwistRep::ALL {
        let f = sysjac::factorization_with_poses(model, &poses, rep);
        let j = f.a.to_dense() * f.x.to_dense();
        for i in 1..=n {
            let ji = jacobian_with_poses(model, &poses, i, rep)
                .unwrap()
                .to_matrix();
            worst_fact = worst_fact.max((j.view((6 * (i - 1), 0), (6, n)) - ji).abs().max());
        }
        let inv = sysjac::closed_form_inverse(&f);
        worst_fact = worst_fact.max(
            f.a.mul(&inv)
                .max_abs_diff(&sysjac::BlockMatrix::identity(n)),
        );
        if let Some(d) = &f.d_or_t {
            worst_fact = worst_fact.max(sysjac::nilpotent_expand(d).max_abs_diff(&f.a));
        }
    }
    let sf = sysjac::spatial_factorizations(model, &q).unwrap();
    let j1 = sf.a_s.to_dense() * sf.y.to_dense();
    let j2 = sf.a_sb.to_dense() * sf.x_b.to_dense();
    let j3 = sf.a_sh.to_dense() * sf.x_h.to_dense();
    worst_fact = worst_fact
        .max((&j1 - &j2).abs().max())
        .max((&j1 - &j3).abs().max());
    c.record("system factorizations consistent", worst_fact, tol);

    // Rate recovery from consistent twists.
    let mut worst_ik = 0.0f64;
    for rep in [TwistRep::BodyFixed, TwistRep::Spatial, TwistRep::Hybrid] {
        let v = kinematics::twists(model, &q, &qdot, rep).unwrap();
        let sol = invkin::rates_from_twists(model, &q, &v).unwrap();
        for (a, b) in sol.qdot.iter().zip(&qdot) {
            worst_ik = worst_ik.max((a - b).abs());
        }
    }
    c.record(
        "joint-rate recovery exact on consistent twists",
        worst_ik,
        tol.max(1e-10),
    );

    // Least-squares comparison on perturbed twists: reported, not asserted.
    let clean = kinematics::twists(model, &q, &qdot, TwistRep::BodyFixed).unwrap();
    let sigma = 1e-3;
    let noisy: Vec<Screw> = clean
        .as_slice()
        .iter()
        .map(|s| {
            *s + Screw::new(
                nalgebra::Vector3::new(
                    rng.random_range(-sigma..sigma),
                    rng.random_range(-sigma..sigma),
                    rng.random_range(-sigma..sigma),
                ),
                nalgebra::Vector3::new(
                    rng.random_range(-sigma..sigma),
                    rng.random_range(-sigma..sigma),
                    rng.random_range(-sigma..sigma),
                ),
            )
        })
        .collect();
    let noisy = BodyTwists::new(TwistRep::BodyFixed, noisy);
    let gap = invkin::lsq_discrepancy(model, &q, &noisy).unwrap();
    if gap > 1e-8 {
        c.lines.push(format!(
            "note ik sweep vs dense least squares on perturbed twists: max |dqdot| = {gap:.3e} \
             (the projection sweep does not minimize the residual for inconsistent twists)"
        ));
    } else {
        c.lines.push(format!(
            "note ik sweep vs dense least squares on perturbed twists: max |dqdot| = {gap:.3e}"
        ));
    }

    VerifyReport {
        passed: c.passed,
        lsq_gap: gap,
        lines: c.lines,
    }
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub n: usize,
    pub rep: TwistRep,
    /// Wall time per full twist evaluation (fk + sweep), nanoseconds.
    pub wall_ns: f64,
    pub ops: OpCount,
}

/// Times the recursive twist evaluation on random chains of the given
/// lengths; `iters` evaluations per sample, best of three samples.
pub fn bench_chains(ns: &[usize], seed: u64, iters: usize) -> Vec<BenchRow> {
    let mut rows = Vec::new();
    for &n in ns {
        let model = MbsModel::random_chain(n, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let qdot: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        for rep in TwistRep::ALL {
            let (_, ops) = twists_counted(&model, &q, &qdot, rep).unwrap();
            let mut best = f64::INFINITY;
            for _ in 0..3 {
                let t0 = Instant::now();
                for _ in 0..iters.max(1) {
                    let v = kinematics::twists(&model, &q, &qdot, rep).unwrap();
                    std::hint::black_box(v.twist(n));
                }
                let per = t0.elapsed().as_nanos() as f64 / iters.max(1) as f64;
                best = best.min(per);
            }
            rows.push(BenchRow {
                n,
                rep,
                wall_ns: best,
                ops,
            });
        }
    }
    rows
}
