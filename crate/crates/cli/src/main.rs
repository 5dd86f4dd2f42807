use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torbun_core::document::{self, Document};
use torbun_core::{
    check_unipotent_trivial, enumerate_line_bundles, equivalent_with_base, reduce_to_torus, split_affine_toric,
    trivialize_affine, validate_fan, weight_invariants, AdmissibleCollection, Equivalence, GroupTag, IntVector,
    Sublattice, ToricSplit,
};

const EXIT_OK: u8 = 0;
const EXIT_SEMANTIC: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "torbun",
    version,
    about = "Classify torus-equivariant principal bundles on toric varieties"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the admissibility conditions of each collection
    Validate(Selection),
    /// Decide whether two collections are equivalent
    Equiv {
        file: PathBuf,
        first: String,
        second: String,
        /// Base maximal cone for the gauge reduction
        #[arg(long)]
        base_cone: Option<usize>,
        #[command(flatten)]
        splitting: Splitting,
    },
    /// Print the transition functions ρ_τ P(τ,σ) ρ_σ^{-1}
    Cocycle(Selection),
    /// Product structure of a collection over a single-cone fan
    Trivialize(Selection),
    /// Decompose a single-cone toric variety as Y × O
    Split { file: PathBuf },
    /// Reduce an upper-triangular or unipotent collection to the diagonal torus
    Reduce {
        #[command(flatten)]
        selection: Selection,
        #[arg(long)]
        base_cone: Option<usize>,
    },
    /// List equivalence classes of GL(1) collections with weights in [-B, B]
    Enumerate {
        file: PathBuf,
        #[arg(long)]
        bound: u32,
    },
}

#[derive(Args)]
struct Selection {
    file: PathBuf,
    /// Restrict to one named collection
    #[arg(long)]
    collection: Option<String>,
    #[command(flatten)]
    splitting: Splitting,
}

#[derive(Args)]
struct Splitting {
    /// Override the complement N' at a maximal cone, e.g. `0=1,1` or `2=1,0;0,1`
    #[arg(long, value_name = "CONE=BASIS")]
    splitting: Vec<String>,
}

enum Failure {
    Input(String),
    Semantic(String),
}

type Outcome = Result<u8, Failure>;

fn load(path: &Path) -> Result<Document, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    document::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_splitting(arg: &str, rank: usize) -> Result<(usize, Sublattice), Failure> {
    let bad = |m: &str| Failure::Input(format!("--splitting {arg}: {m}"));
    let (cone, basis) = arg.split_once('=').ok_or_else(|| bad("expected CONE=BASIS"))?;
    let cone: usize = cone.trim().parse().map_err(|_| bad("cone index is not a number"))?;
    let mut vectors: Vec<IntVector> = Vec::new();
    for v in basis.split(';').filter(|v| !v.trim().is_empty()) {
        let v = v
            .split(',')
            .map(|x| x.trim().parse::<torbun_core::BigInt>())
            .collect::<Result<IntVector, _>>()
            .map_err(|_| bad("basis entries must be integers"))?;
        vectors.push(v);
    }
    if vectors.iter().any(|v| v.len() != rank) {
        return Err(bad(&format!("basis vectors must have {rank} entries")));
    }
    let lattice = Sublattice::new(rank, vectors).map_err(|e| bad(&e.to_string()))?;
    Ok((cone, lattice))
}

fn apply_splittings(c: AdmissibleCollection, splitting: &Splitting) -> Result<AdmissibleCollection, Failure> {
    let mut c = c;
    for arg in &splitting.splitting {
        let (cone, lattice) = parse_splitting(arg, c.fan().ambient_rank())?;
        eprintln!(
            "warning: overriding the canonical complement N' at cone {cone}; \
             condition (1) depends on this choice and results may differ from the canonical splitting"
        );
        c = c
            .with_splitting(cone, lattice)
            .map_err(|e| Failure::Input(format!("--splitting {arg}: {e}")))?;
    }
    Ok(c)
}

fn select(doc: &Document, sel: &Selection) -> Result<Vec<(String, AdmissibleCollection)>, Failure> {
    let chosen: Vec<(String, AdmissibleCollection)> = match &sel.collection {
        Some(name) => {
            let c = doc
                .collections
                .get(name)
                .ok_or_else(|| Failure::Input(format!("no collection named `{name}`")))?;
            vec![(name.clone(), c.clone())]
        }
        None => doc.collections.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
    };
    if chosen.is_empty() {
        return Err(Failure::Input("document contains no collections".into()));
    }
    chosen
        .into_iter()
        .map(|(k, c)| apply_splittings(c, &sel.splitting).map(|c| (k, c)))
        .collect()
}

fn weights_text(ws: &[IntVector]) -> String {
    ws.iter()
        .map(|w| format!("({})", w.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

fn validate(sel: &Selection) -> Outcome {
    let doc = load(&sel.file)?;
    let mut code = EXIT_OK;
    let fan_report = validate_fan(&doc.fan);
    if !fan_report.ok() {
        println!("fan: {} violation(s)", fan_report.violations.len());
        for v in &fan_report.violations {
            println!("  {v}");
        }
        code = EXIT_SEMANTIC;
    }
    for (name, c) in select(&doc, sel)? {
        let report = c.validate();
        if report.ok {
            println!("{name}: admissible");
        } else {
            println!("{name}: {} violation(s)", report.violations.len());
            for v in &report.violations {
                println!("  {v}");
            }
            code = EXIT_SEMANTIC;
        }
    }
    Ok(code)
}

fn equiv(file: &Path, first: &str, second: &str, base: Option<usize>, splitting: &Splitting) -> Outcome {
    let doc = load(file)?;
    let get = |name: &str| {
        doc.collections
            .get(name)
            .cloned()
            .ok_or_else(|| Failure::Input(format!("no collection named `{name}`")))
            .and_then(|c| apply_splittings(c, splitting))
    };
    let (a, b) = (get(first)?, get(second)?);
    match equivalent_with_base(&a, &b, base).map_err(|e| Failure::Semantic(e.to_string()))? {
        Equivalence::Equivalent(w) => {
            println!("EQUIVALENT");
            println!("{w}");
            Ok(EXIT_OK)
        }
        Equivalence::WeightsDiffer { cone } => {
            let (wa, wb) = (weight_invariants(&a), weight_invariants(&b));
            println!("NOT EQUIVALENT (weight invariants differ)");
            println!(
                "  cone {cone}: {first} {{{}}} vs {second} {{{}}}",
                weights_text(&wa[&cone]),
                weights_text(&wb[&cone])
            );
            Ok(EXIT_SEMANTIC)
        }
        Equivalence::NoWitnessInFamily => {
            println!("NO WITNESS IN REDUCED FAMILY");
            Ok(EXIT_UNDECIDED)
        }
    }
}

fn cocycle(sel: &Selection) -> Outcome {
    let doc = load(&sel.file)?;
    for (name, c) in select(&doc, sel)? {
        let cocycles = c
            .transition_cocycles()
            .map_err(|e| Failure::Semantic(format!("{name}: {e}")))?;
        println!("{name}:");
        for ((t, s), m) in cocycles {
            println!("  g({t},{s}) = {m}");
        }
    }
    Ok(EXIT_OK)
}

fn print_split(split: &ToricSplit) {
    let y = split.y_fan.cone(split.y_fan.maximal()[0]);
    println!("  Y: rank {} cone {y}", split.y_fan.ambient_rank());
    println!("  orbit rank: {}", split.orbit_rank);
    println!(
        "  N_sigma basis: {}",
        weights_text(&split.split.n_sigma.basis().row_vectors())
    );
    println!(
        "  N' basis: {}",
        weights_text(&split.split.n_prime.basis().row_vectors())
    );
    println!("  projection to N_sigma: {}", split.split.projection);
}

fn trivialize(sel: &Selection) -> Outcome {
    let doc = load(&sel.file)?;
    for (name, c) in select(&doc, sel)? {
        let ps = trivialize_affine(&c).map_err(|e| Failure::Semantic(e.to_string()))?;
        let sigma = c.maximal()[0];
        println!("{name}:");
        println!("  rho: {}", ps.rho);
        println!("  base gauge: {}", ps.base_gauge);
        let cone = c.fan().cone(sigma);
        if cone.dim() < c.fan().ambient_rank() {
            println!(
                "  note: cone {sigma} is not full-dimensional, so X has no torus-fixed point; \
                 the product structure comes from X = Y × O"
            );
        }
    }
    Ok(EXIT_OK)
}

fn split(file: &Path) -> Outcome {
    let doc = load(file)?;
    let s = split_affine_toric(&doc.fan).map_err(|e| Failure::Semantic(e.to_string()))?;
    println!("split:");
    print_split(&s);
    Ok(EXIT_OK)
}

fn reduce(sel: &Selection, base: Option<usize>) -> Outcome {
    let doc = load(&sel.file)?;
    let mut code = EXIT_OK;
    for (name, c) in select(&doc, sel)? {
        if matches!(c.group(), GroupTag::Unipotent(_)) && base.is_none() {
            let w = check_unipotent_trivial(&c).map_err(|e| Failure::Semantic(format!("{name}: {e}")))?;
            println!("{name}: TRIVIAL (gauge to the trivial collection)");
            println!("{w}");
            continue;
        }
        match reduce_to_torus(&c, base).map_err(|e| Failure::Semantic(format!("{name}: {e}")))? {
            Some(r) => {
                println!("{name}: REDUCED to {}", r.reduced.group());
                println!("{}", r.witness);
                for (s, ws) in weight_invariants(&r.reduced) {
                    println!("rho[{s}] = diag {}", weights_text(&ws));
                }
            }
            None => {
                println!("{name}: NO REDUCTION TO THE DIAGONAL TORUS");
                code = EXIT_SEMANTIC;
            }
        }
    }
    Ok(code)
}

fn enumerate(file: &Path, bound: u32) -> Outcome {
    let doc = load(file)?;
    let reps = enumerate_line_bundles(&doc.fan, bound).map_err(|e| Failure::Semantic(e.to_string()))?;
    println!("{} classes", reps.len());
    for c in &reps {
        let inv: BTreeMap<usize, Vec<IntVector>> = weight_invariants(c);
        let line = inv
            .iter()
            .map(|(s, w)| format!("{s}: {}", weights_text(w)))
            .collect::<Vec<_>>()
            .join(", ");
        println!("  {line}");
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Validate(sel) => validate(sel),
        Command::Equiv {
            file,
            first,
            second,
            base_cone,
            splitting,
        } => equiv(file, first, second, *base_cone, splitting),
        Command::Cocycle(sel) => cocycle(sel),
        Command::Trivialize(sel) => trivialize(sel),
        Command::Split { file } => split(file),
        Command::Reduce { selection, base_cone } => reduce(selection, *base_cone),
        Command::Enumerate { file, bound } => enumerate(file, *bound),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Semantic(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_SEMANTIC)
        }
    }
}
