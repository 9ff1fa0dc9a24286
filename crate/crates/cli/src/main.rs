//! `lpa` — exact computation in Leavitt path algebras from the command line.

use clap::{Args, Parser, Subcommand};
use lpa_core::chenmod::{self, ModuleVector};
use lpa_core::morphism::{extract_matrix, unit_of_endo};
use lpa_core::parse::{parse_element, parse_matrix};
use lpa_core::script::run_script;
use lpa_core::twist::{
    check_iso_criterion, image_membership, IsoVerdict, Membership, ThetaMap, TwistContext,
};
use lpa_core::verify::verify_paper;
use lpa_core::{
    Automorphism, Endo, FieldMode, Frame, Graph, InvertiblePair, LpaError, VertexId,
};
use std::process::ExitCode;
use std::sync::Arc;

#[derive(Parser)]
#[command(
    name = "lpa",
    about = "Exact symbolic computation in Leavitt path algebras",
    version
)]
struct Cli {
    /// Scalar field: `rational` or `fp:<prime>`; overrides LPA_FIELD.
    #[arg(long, global = true)]
    field: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GraphChoice {
    /// Graph file to load.
    #[arg(short = 'g', long)]
    graph: Option<String>,

    /// Use the rose graph R_n instead of a file.
    #[arg(long, default_value_t = 2)]
    rose: usize,
}

impl GraphChoice {
    fn build(&self) -> Result<Arc<Graph>, LpaError> {
        match &self.graph {
            Some(path) => Graph::parse(&std::fs::read_to_string(path)?),
            None => Graph::rose(self.rose),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a graph file and print its summary.
    Graph { file: String },

    /// Normalize an element expression.
    Eval {
        #[command(flatten)]
        graph: GraphChoice,
        /// Element expression, e.g. "e1*e2' + e2*e1'".
        #[arg(short = 'e', long)]
        expr: String,
    },

    /// Build an endomorphism from a matrix or a unit and print its images.
    Endo {
        #[command(flatten)]
        graph: GraphChoice,
        #[command(flatten)]
        endo: EndoArgs,
        /// Witness matrix Q certifying the automorphism (phi_P(Q) = P^-1).
        #[arg(long)]
        certify: Option<String>,
        /// Inverse of the witness (defaults to the scalar fast path).
        #[arg(long)]
        certify_inv: Option<String>,
    },

    /// Zhang twist operations.
    Twist {
        #[command(subcommand)]
        cmd: TwistCommand,
    },

    /// Chen module operations.
    Module {
        #[command(subcommand)]
        cmd: ModuleCommand,
    },

    /// Replay every worked identity as a machine check.
    VerifyPaper {
        /// Run a single named check.
        #[arg(long)]
        only: Option<String>,
    },

    /// Execute a script of bindings and assertions.
    Run { file: String },
}

#[derive(Args, Clone)]
struct EndoArgs {
    /// Matrix literal for phi_P, e.g. `[0,v;v,0]`.
    #[arg(long, conflicts_with = "fu")]
    phi: Option<String>,

    /// Inverse matrix (defaults to the scalar fast path).
    #[arg(long, requires = "phi")]
    phi_inv: Option<String>,

    /// Unit expression for f_u.
    #[arg(long)]
    fu: Option<String>,

    /// Inverse of the unit (defaults to trying the unit itself).
    #[arg(long, requires = "fu")]
    fu_inv: Option<String>,
}

#[derive(Subcommand)]
enum TwistCommand {
    /// Evaluate a twisted product a (*) b.
    Eval {
        #[command(flatten)]
        graph: GraphChoice,
        #[command(flatten)]
        endo: EndoArgs,
        #[arg(long)]
        expr: String,
        #[arg(long)]
        star: String,
    },

    /// Build theta_P and test the isomorphism criterion or a membership.
    Theta {
        #[command(flatten)]
        graph: GraphChoice,
        #[command(flatten)]
        endo: EndoArgs,
        /// Witness matrix when the fixed-point shortcut does not apply.
        #[arg(long)]
        witness: Option<String>,
        #[arg(long)]
        witness_inv: Option<String>,
        /// Check the isomorphism criterion.
        #[arg(long)]
        check_iso: bool,
        /// Levels m = 1..m_max of the criterion.
        #[arg(long, default_value_t = 2)]
        mmax: usize,
        /// Path length bound for membership searches.
        #[arg(long, default_value_t = 4)]
        bound: usize,
        /// Test a single element for membership in Im(theta).
        #[arg(long)]
        member: Option<String>,
    },
}

#[derive(Subcommand)]
enum ModuleCommand {
    /// Act an element on a module basis path.
    Act {
        #[command(flatten)]
        graph: GraphChoice,
        /// Path literal: `(e1 e2)^inf`, `e2 (e1 e2)^inf`,
        /// `oracle:thue-morse[e1,e2]`.
        #[arg(long)]
        path: String,
        #[arg(long)]
        expr: String,
        /// Twist by an invertible scalar matrix, e.g. `[0,1;1,0]`.
        #[arg(long)]
        twist: Option<String>,
    },
}

fn field_mode(cli_flag: &Option<String>) -> Result<FieldMode, LpaError> {
    if let Some(s) = cli_flag {
        return FieldMode::parse(s);
    }
    match std::env::var("LPA_FIELD") {
        Ok(s) => FieldMode::parse(&s),
        Err(_) => Ok(FieldMode::Rational),
    }
}

fn build_pair(
    graph: &Arc<Graph>,
    field: FieldMode,
    mat: &str,
    inv: &Option<String>,
) -> Result<InvertiblePair, LpaError> {
    let p = parse_matrix(mat, graph, field, VertexId(0))?;
    match inv {
        Some(pi) => InvertiblePair::new(p, parse_matrix(pi, graph, field, VertexId(0))?),
        None => match p.to_scalar(field) {
            Some(km) => InvertiblePair::from_scalar_matrix(graph, VertexId(0), &km, field),
            None => Err(LpaError::CheckFailed(
                "matrix is not scalar; supply the inverse explicitly".into(),
            )),
        },
    }
}

fn build_endo(graph: &Arc<Graph>, field: FieldMode, args: &EndoArgs) -> Result<Endo, LpaError> {
    match (&args.phi, &args.fu) {
        (Some(mat), None) => {
            let pair = build_pair(graph, field, mat, &args.phi_inv)?;
            Endo::mk_phi_rose(graph, pair)
        }
        (None, Some(unit)) => {
            let u = parse_element(unit, graph, field)?;
            let uinv = match &args.fu_inv {
                Some(s) => parse_element(s, graph, field)?,
                None => u.clone(),
            };
            Endo::mk_fu(&u, &uinv)
        }
        _ => Err(LpaError::CheckFailed(
            "exactly one of --phi or --fu is required".into(),
        )),
    }
}

fn certified(
    graph: &Arc<Graph>,
    field: FieldMode,
    endo: &Endo,
    witness: &Option<String>,
    witness_inv: &Option<String>,
) -> Result<Automorphism, LpaError> {
    match witness {
        Some(q) => {
            let pair = build_pair(graph, field, q, witness_inv)?;
            Automorphism::certify(endo, &pair)
        }
        None => Automorphism::try_fixed_point_shortcut(endo)?.ok_or_else(|| {
            LpaError::CheckFailed(
                "the fixed-point shortcut does not apply; supply --witness".into(),
            )
        }),
    }
}

fn print_endo(graph: &Arc<Graph>, endo: &Endo) {
    for e in graph.edge_ids() {
        println!("{} -> {}", graph.edge_name(e), endo.images().edge(e));
    }
    for e in graph.edge_ids() {
        println!("{}' -> {}", graph.edge_name(e), endo.images().ghost(e));
    }
    println!("graded: {}", endo.is_graded());
}

fn run(cli: Cli) -> Result<i32, LpaError> {
    let field = field_mode(&cli.field)?;
    match cli.command {
        Command::Graph { file } => {
            let g = Graph::parse(&std::fs::read_to_string(&file)?)?;
            println!("{} vertices, {} edges", g.vertex_count(), g.edge_count());
            for v in g.vertex_ids() {
                let kind = match g.classify_vertex(v) {
                    lpa_core::VertexKind::Regular => "regular",
                    lpa_core::VertexKind::Sink => "sink",
                };
                println!("vertex {} ({kind})", g.vertex_name(v));
            }
            for e in g.edge_ids() {
                println!(
                    "edge {} : {} -> {}",
                    g.edge_name(e),
                    g.vertex_name(g.source(e)),
                    g.vertex_name(g.range(e))
                );
            }
            Ok(0)
        }
        Command::Eval { graph, expr } => {
            let g = graph.build()?;
            println!("{}", parse_element(&expr, &g, field)?);
            Ok(0)
        }
        Command::Endo {
            graph,
            endo,
            certify,
            certify_inv,
        } => {
            let g = graph.build()?;
            let f = build_endo(&g, field, &endo)?;
            print_endo(&g, &f);
            if let Some(prov) = f.provenance() {
                println!("matrix: {}", prov.pair.mat());
            }
            if g.is_rose() {
                println!("unit: {}", unit_of_endo(&f)?);
                let frame = Frame::rose(&g)?;
                let pair = extract_matrix(&f, &frame)?;
                println!("extracted: {}", pair.mat());
            }
            if certify.is_some() {
                let auto = certified(&g, field, &f, &certify, &certify_inv)?;
                println!("automorphism certified; inverse images:");
                print_endo(&g, auto.inverse());
            }
            Ok(0)
        }
        Command::Twist { cmd } => match cmd {
            TwistCommand::Eval {
                graph,
                endo,
                expr,
                star,
            } => {
                let g = graph.build()?;
                let f = build_endo(&g, field, &endo)?;
                let auto = certified(&g, field, &f, &None, &None)?;
                let ctx = TwistContext::new(auto)?;
                let a = parse_element(&expr, &g, field)?;
                let b = parse_element(&star, &g, field)?;
                println!("{}", ctx.twist_mul(&a, &b)?);
                Ok(0)
            }
            TwistCommand::Theta {
                graph,
                endo,
                witness,
                witness_inv,
                check_iso,
                mmax,
                bound,
                member,
            } => {
                let g = graph.build()?;
                let f = build_endo(&g, field, &endo)?;
                let auto = certified(&g, field, &f, &witness, &witness_inv)?;
                let theta = ThetaMap::new(Arc::new(TwistContext::new(auto)?))?;
                for e in g.edge_ids() {
                    println!("theta({}') = {}", g.edge_name(e), theta.ghost_image(e));
                }
                let mut failed = false;
                if let Some(target) = member {
                    let target = parse_element(&target, &g, field)?;
                    match image_membership(&theta, &target, bound)? {
                        Membership::InImage(w) => println!("in image: witness {w}"),
                        Membership::NotFoundUpTo(b) => {
                            println!("not found up to length {b}");
                            failed = true;
                        }
                    }
                }
                if check_iso {
                    match check_iso_criterion(&theta, mmax, bound)? {
                        IsoVerdict::IsomorphismCertified => {
                            println!("isomorphism certified")
                        }
                        IsoVerdict::FailsAt {
                            m,
                            entry,
                            matrix,
                            bound,
                        } => {
                            println!(
                                "fails at m = {m}: entry ({}, {}) of {matrix} has no preimage up to length {bound}",
                                entry.0, entry.1
                            );
                            failed = true;
                        }
                        IsoVerdict::InconclusiveUpTo { m_max, bound } => {
                            println!("inconclusive up to m = {m_max}, length {bound}")
                        }
                    }
                }
                Ok(if failed { 1 } else { 0 })
            }
        },
        Command::Module { cmd } => match cmd {
            ModuleCommand::Act {
                graph,
                path,
                expr,
                twist,
            } => {
                let g = graph.build()?;
                let alpha = chenmod::parse_infinite_path(&path, &g)?;
                let a = parse_element(&expr, &g, field)?;
                let out = match twist {
                    None => chenmod::act(&a, &ModuleVector::basis(&alpha, field))?,
                    Some(m) => {
                        let km = parse_matrix(&m, &g, field, VertexId(0))?
                            .to_scalar(field)
                            .ok_or(LpaError::Singular)?;
                        let v = ModuleVector::twisted_basis(&alpha, &km, field);
                        chenmod::twisted_act(&km, &a, &v)?
                    }
                };
                println!("{out}");
                Ok(0)
            }
        },
        Command::VerifyPaper { only } => {
            let report = verify_paper(field, only.as_deref())?;
            println!("{report}");
            Ok(report.exit_code())
        }
        Command::Run { file } => {
            let src = std::fs::read_to_string(&file)?;
            let report = run_script(&src, field)?;
            println!("{report}");
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
