use std::fmt::Write as _;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diagflat::cert::{self, Certificate};
use diagflat::diffuse::{classify, deltap_witness, nondiffuse_pipeline, PipelineStep};
use diagflat::matrix::element_label;
use diagflat::reduction::{deletable_columns, minimality_certificate, reduce_fully};
use diagflat::search::enumerate_bieberbach;
use diagflat::vasquez::{n_d_report_with, ReportOptions};
use diagflat::{parse_matrix, serialize_matrix, validate, Error, ExampleId, GenMatrix};

/// Bieberbach groups of diagonal type from characteristic matrices.
///
/// MATRIX arguments are a file path, `-` for standard input, or
/// `example:<name>` for an embedded example.
#[derive(Parser)]
#[command(name = "diagflat", version)]
struct Cli {
    /// Print a JSON certificate instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Worker threads for searches.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check torsion-freeness and faithfulness.
    Validate { matrix: String },
    /// Print all nontrivial holonomy rows.
    Closure { matrix: String },
    /// Reduce by column-deletion quotients until nothing is deletable.
    Reduce { matrix: String },
    /// Certify that no column can be deleted and kernels are distinct.
    CertifyMin { matrix: String },
    /// Bounds on the diagonal Vasquez invariant of C2^k.
    Vasquez {
        #[arg(long)]
        k: usize,
        /// Random valid (4, 11) matrices tested for k = 4.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Decide diffuseness where a criterion applies.
    Classify { matrix: String },
    /// Delta_P witness for a C2^2 group with b1 = 0.
    Witness { matrix: String },
    /// Chain of quotients and index-2 restrictions ending in a Delta_P witness.
    Pipeline { matrix: String },
    /// List valid matrices of a given shape.
    Enumerate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        /// Keep every matrix instead of one per equivalence class.
        #[arg(long)]
        all: bool,
    },
    /// Print an embedded example, or list the names (always as text).
    Example { name: Option<String> },
}

enum Failure {
    /// Exit status 2.
    Usage(String),
    /// Exit status 1.
    Predicate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::UnknownExample(_)
            | Error::ResourceGuard(_)
            | Error::TooManyGenerators { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Predicate(e.to_string()),
        }
    }
}

struct Outcome {
    text: String,
    cert: Certificate,
    /// Checks reported in the certificate but not part of the exit status.
    informational: &'static [&'static str],
}

impl Outcome {
    fn ok(&self) -> bool {
        self.cert
            .checks
            .iter()
            .filter(|c| !self.informational.contains(&c.name.as_str()))
            .all(|c| c.pass)
    }
}

fn load(arg: &str) -> Result<GenMatrix, Failure> {
    if let Some(name) = arg.strip_prefix("example:") {
        return Ok(diagflat::example(name)?);
    }
    let text = if arg == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(arg).map_err(|e| Failure::Usage(format!("{arg}: {e}")))?
    };
    parse_matrix(&text).map_err(|e| Failure::Usage(format!("{arg}: {e}")))
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn labels(elements: &[u32]) -> String {
    elements
        .iter()
        .map(|&v| element_label(v))
        .collect::<Vec<_>>()
        .join(", ")
}

fn indented(a: &GenMatrix) -> String {
    a.to_string().lines().map(|l| format!("  {l}\n")).collect()
}

fn run_validate(a: &GenMatrix) -> Outcome {
    let r = validate(a);
    let mut text = format!(
        "torsion-free: {}, faithful: {}, holonomy: C2^{}, dim {}\n",
        yes(r.torsion_free),
        yes(r.faithful),
        r.k,
        r.n
    );
    if !r.torsion_rows.is_empty() {
        let _ = writeln!(text, "rows without a 1: {}", labels(&r.torsion_rows));
    }
    if !r.trivial_rows.is_empty() {
        let _ = writeln!(text, "rows acting trivially: {}", labels(&r.trivial_rows));
    }
    Outcome {
        text,
        cert: cert::validity(a),
        informational: &[],
    }
}

fn run_closure(a: &GenMatrix) -> Outcome {
    Outcome {
        text: format!("{}\n", a.closure()),
        cert: cert::closure(a),
        informational: &[],
    }
}

fn run_reduce(a: &GenMatrix) -> Result<Outcome, Failure> {
    let trace = reduce_fully(a)?;
    let mut text = String::new();
    for (i, s) in trace.steps.iter().enumerate() {
        let _ = write!(
            text,
            "step {}: delete column {} (input column {}) -> k = {}, n = {}",
            i + 1,
            s.deleted_column + 1,
            s.original_column + 1,
            s.k,
            s.n
        );
        if s.renormalized {
            let _ = write!(
                text,
                ", holonomy kernel {{{}}} absorbed",
                labels(&s.holonomy_kernel)
            );
        } else if !s.faithful {
            let _ = write!(
                text,
                ", holonomy kernel {{{}}} not absorbed",
                labels(&s.holonomy_kernel)
            );
        }
        text.push('\n');
    }
    let exact = validate(&trace.final_matrix).is_valid()
        && minimality_certificate(&trace.final_matrix)?.is_some();
    let _ = writeln!(
        text,
        "final matrix (holonomy C2^{}):\n{}dimension {} ({})",
        trace.final_holonomy_rank,
        indented(&trace.final_matrix),
        trace.final_dimension(),
        if exact { "minimal" } else { "upper bound" }
    );
    if !trace.final_diagonal {
        text.push_str("final matrix is not faithful: no diagonal quotient was reached\n");
    } else if trace.final_holonomy_rank == 0 {
        text.push_str("holonomy acts trivially: the quotient is a torus\n");
    }
    Ok(Outcome {
        text,
        cert: cert::reduction(a)?,
        informational: &["final-diagonal"],
    })
}

fn run_certify_min(a: &GenMatrix) -> Result<Outcome, Failure> {
    let deletable = deletable_columns(a)?;
    let c = cert::minimality(a)?;
    let mut text = String::new();
    if deletable.is_empty() {
        text.push_str("col-irreducible: yes\n");
    } else {
        let cols: Vec<String> = deletable.iter().map(|j| (j + 1).to_string()).collect();
        let _ = writeln!(
            text,
            "col-irreducible: no (deletable columns {})",
            cols.join(", ")
        );
    }
    match minimality_certificate(a)? {
        Some(m) => {
            let _ = writeln!(text, "kernels distinct: yes\nminimal: yes");
            for (j, v) in m.row_assignment.iter().enumerate() {
                let _ = writeln!(text, "  column {} private to {}", j + 1, element_label(*v));
            }
        }
        None => {
            let _ = writeln!(
                text,
                "kernels distinct: {}\nminimal: no",
                yes(diagflat::reduction::kernels_distinct(a))
            );
        }
    }
    Ok(Outcome {
        text,
        cert: c,
        informational: &[],
    })
}

fn run_vasquez(k: usize, samples: u64, seed: u64, jobs: Option<usize>) -> Result<Outcome, Failure> {
    let opts = ReportOptions {
        jobs,
        sweep_samples: samples,
        seed,
    };
    let report = n_d_report_with(k, &opts)?;
    Ok(Outcome {
        text: format!("{report}\n"),
        cert: cert::vasquez(&report),
        informational: &["exact"],
    })
}

fn run_classify(a: &GenMatrix) -> Result<Outcome, Failure> {
    let c = classify(a)?;
    let mut text = format!("{} (b1 = {})\n", c.verdict, c.center_rank);
    if let Some(w) = &c.witness {
        let _ = writeln!(
            text,
            "Delta_P witness on:\n{}",
            indented(&w.matrix).trim_end()
        );
    }
    if let Some(p) = &c.pipeline {
        let _ = writeln!(text, "structure certificate with {} step(s)", p.steps.len());
    }
    Ok(Outcome {
        text,
        cert: cert::classification(a)?,
        informational: &["verdict-certified"],
    })
}

fn render_witness(w: &diagflat::diffuse::DeltaPWitness) -> String {
    let mut text = format!("alpha = {}\nbeta  = {}\n", w.alpha, w.beta);
    for r in &w.relation_checks {
        let _ = writeln!(text, "{} = 1: {}", r.word, yes(r.holds));
    }
    let _ = writeln!(text, "translation rank: {}", w.independence_rank);
    text
}

fn run_witness(a: &GenMatrix) -> Result<Outcome, Failure> {
    let w = deltap_witness(a)?;
    Ok(Outcome {
        text: render_witness(&w),
        cert: cert::witness(a)?,
        informational: &[],
    })
}

fn run_pipeline(a: &GenMatrix) -> Result<Outcome, Failure> {
    let trace = nondiffuse_pipeline(a)?;
    let mut text = String::new();
    for (i, step) in trace.steps.iter().enumerate() {
        match step {
            PipelineStep::Quotient {
                deleted_columns,
                matrix,
                ..
            } => {
                let cols: Vec<String> = deleted_columns
                    .iter()
                    .map(|j| (j + 1).to_string())
                    .collect();
                let _ = writeln!(
                    text,
                    "step {}: quotient deleting columns {}",
                    i + 1,
                    cols.join(", ")
                );
                text.push_str(&indented(matrix));
            }
            PipelineStep::HyperplaneRestriction(h) => {
                let _ = writeln!(
                    text,
                    "step {}: restrict to ker {:0width$b}, basis {}",
                    i + 1,
                    h.functional,
                    labels(&h.basis),
                    width = a.k().max(1)
                );
                text.push_str(&indented(&h.matrix));
            }
        }
    }
    text.push_str(&render_witness(&trace.terminal));
    Ok(Outcome {
        text,
        cert: cert::pipeline(a)?,
        informational: &[],
    })
}

fn run_enumerate(k: usize, n: usize, all: bool) -> Result<Outcome, Failure> {
    let found: Vec<GenMatrix> = enumerate_bieberbach(k, n, !all)?.collect();
    let mut text = String::new();
    for m in &found {
        text.push_str(&serialize_matrix(m));
        text.push('\n');
    }
    let _ = writeln!(text, "# {} matrices", found.len());
    Ok(Outcome {
        text,
        cert: cert::enumeration(k, n, !all, &found),
        informational: &[],
    })
}

fn run_example(name: Option<&str>) -> Result<Option<Outcome>, Failure> {
    let Some(name) = name else {
        return Ok(None);
    };
    let id: ExampleId = name.parse()?;
    Ok(Some(Outcome {
        text: format!("# {}\n{}", id.name(), serialize_matrix(&id.matrix())),
        cert: cert::example(id),
        informational: &[],
    }))
}

fn dispatch(cli: &Cli) -> Result<Option<Outcome>, Failure> {
    let jobs = cli.jobs.map(|j| j as usize);
    let out = match &cli.command {
        Command::Validate { matrix } => run_validate(&load(matrix)?),
        Command::Closure { matrix } => run_closure(&load(matrix)?),
        Command::Reduce { matrix } => run_reduce(&load(matrix)?)?,
        Command::CertifyMin { matrix } => run_certify_min(&load(matrix)?)?,
        Command::Vasquez { k, samples, seed } => run_vasquez(*k, *samples, *seed, jobs)?,
        Command::Classify { matrix } => run_classify(&load(matrix)?)?,
        Command::Witness { matrix } => run_witness(&load(matrix)?)?,
        Command::Pipeline { matrix } => run_pipeline(&load(matrix)?)?,
        Command::Enumerate { k, n, all } => run_enumerate(*k, *n, *all)?,
        Command::Example { name } => return run_example(name.as_deref()),
    };
    Ok(Some(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(Some(out)) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out.cert).expect("certificates serialize")
                );
            } else {
                print!("{}", out.text);
            }
            if out.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Ok(None) => {
            for id in ExampleId::ALL {
                println!("{id}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Predicate(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
