//! `innerlab`: deterministic command-line reports over boundary sets,
//! singular measures, and zero-placement constructions.
//!
//! Every invocation prints one self-describing JSON document to stdout
//! (or `--out`); `--format csv` additionally writes the bare table to
//! `--out` for external plotting. Exit codes: 0 success, 1 computation
//! refusal or I/O failure, 2 usage or input-format error.

mod report;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use innerlab::disk::{DiskPoint, DyadicArc};
use innerlab::eval::{
    carleson_hit_sum_lemma1c, condition2_sums, eta_profile, InnerSpec,
};
use innerlab::measure::{
    build_endpoint_measure, build_gadget, build_spread_measure,
    modulus_envelope_constant, tail_ratio_kl5, AtomicMeasure, GadgetParams,
    ModulusFunction,
};
use innerlab::sets::CircleSet;
use innerlab::wepify::{
    anti_wepable_atomic, anti_wepable_nonporous, easy_wepify_atomic,
    easy_wepify_porous, kl2_check, mainest_check, wepify_finite_entropy,
    AntiWepable, WepifyResult, HIT_SUM_DECAY,
};

use report::{int, num, Document, Provenance};

const DEFAULT_MAX_CELLS: u64 = 1 << 22;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

#[derive(Debug)]
enum Failure {
    Lib(innerlab::Error),
    Io(std::io::Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Lib(innerlab::Error::Refused(_)) => 1,
            Failure::Lib(innerlab::Error::InvalidInput(_)) => 2,
            Failure::Io(_) => 1,
        }
    }
}

impl From<innerlab::Error> for Failure {
    fn from(e: innerlab::Error) -> Self {
        Failure::Lib(e)
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Lib(innerlab::Error::InvalidInput(msg.into()))
}

type CliResult = Result<(), Failure>;

#[derive(Parser)]
#[command(
    name = "innerlab",
    version,
    about = "Deterministic diagnostics for inner functions on the unit disk"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Boundary-set diagnostics: entropy, porosity, hit sums, families.
    #[command(subcommand)]
    Set(SetCmd),
    /// Singular-measure builders and mass-sequence diagnostics.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Zero-placement constructions and their counterexamples.
    #[command(subcommand)]
    Wepify(WepifyCmd),
    /// Bound checks and certificates over finished constructions.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Re-export a stored report document.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum SetCmd {
    /// Complementary-arc entropy with its truncation tail bound.
    Entropy(SetArgs),
    /// Free-fraction and covering-count constants per depth.
    Porosity(SetArgs),
    /// Dyadic hit sums per level with a convergence verdict.
    HitSums(SetArgs),
    /// Maximal dyadic arcs whose doubles avoid the set.
    FamilyG(SetArgs),
    /// Dyadic arcs not contained in any maximal member.
    FamilyF(SetArgs),
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Measure spread along a modulus profile, one generation per level.
    Spread(SpreadArgs),
    /// Endpoint masses on the complementary arcs of a set.
    Endpoint(EndpointArgs),
    /// Column-gadget measure inside one dyadic arc.
    Gadget(GadgetArgs),
    /// Tail-to-term ratio of a mass sequence.
    Kl5(MassesArgs),
}

#[derive(Subcommand)]
enum WepifyCmd {
    /// Correct a measure on a finite-entropy set.
    FiniteEntropy(FiniteEntropyArgs),
    /// Correct a measure with porous support.
    Porous(MeasureInputArgs),
    /// Correct an atomic measure with regular mass decay.
    Atomic(AtomicArgs),
    /// Build the counterexample measure for irregular mass decay.
    AntiAtomic(AntiAtomicArgs),
    /// Build the counterexample measure inside a non-porous set.
    AntiNonporous(AntiNonporousArgs),
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// Sampled modulus floor away from the zero set.
    Eta(EtaArgs),
    /// Small-modulus level sums of an inner function.
    Condition2(Condition2Args),
    /// Covering-count constants across depths.
    LemporC(SetArgs),
    /// Thresholded hit sums of a measure with a convergence verdict.
    Lemma1C(Lemma1CArgs),
    /// Weighted class-sum constant of a top-half placement.
    Mainest(CheckArgs),
    /// Pair-sum constant of a class-rule placement.
    Kl2(CheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GeneratorKind {
    Cantor,
    Gap,
    Point,
    Points,
    FullCircle,
    Subtree,
}

#[derive(Args)]
struct GeneratorArgs {
    /// Boundary set family.
    #[arg(long, value_enum)]
    generator: Option<GeneratorKind>,
    /// Kept-end ratio for the cantor generator.
    #[arg(long)]
    ratio: Option<f64>,
    /// Gap count for the gap generator.
    #[arg(long)]
    count: Option<u32>,
    /// Turn coordinate for the point generator.
    #[arg(long)]
    point: Option<f64>,
    /// Comma-separated turn coordinates for the points generator.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<f64>>,
    /// Root arc level for the subtree generator.
    #[arg(long)]
    subtree_level: Option<u32>,
    /// Root arc index for the subtree generator.
    #[arg(long)]
    subtree_index: Option<u64>,
}

impl GeneratorArgs {
    fn build(&self, depth: u32) -> Result<(CircleSet, String), Failure> {
        let kind = self
            .generator
            .ok_or_else(|| invalid("--generator is required here"))?;
        let set = match kind {
            GeneratorKind::Cantor => {
                let ratio = require(self.ratio, "ratio")?;
                (CircleSet::cantor(ratio, depth)?, format!("cantor({ratio})"))
            }
            GeneratorKind::Gap => {
                let count = require(self.count, "count")?;
                (CircleSet::gap_sequence(count, depth), format!("gap({count})"))
            }
            GeneratorKind::Point => {
                let point = require(self.point, "point")?;
                (CircleSet::single_point(point, depth), format!("point({point})"))
            }
            GeneratorKind::Points => {
                let points = self
                    .points
                    .clone()
                    .ok_or_else(|| invalid("--points is required for this generator"))?;
                let label = format!("points({})", points.len());
                (CircleSet::finite_points(&points, depth), label)
            }
            GeneratorKind::FullCircle => {
                (CircleSet::full_circle(depth), "full-circle".to_owned())
            }
            GeneratorKind::Subtree => {
                let level = require(self.subtree_level, "subtree-level")?;
                let index = require(self.subtree_index, "subtree-index")?;
                let root = checked_arc(level, index)?;
                let label = format!("subtree({level},{index})");
                (CircleSet::full_subtree(root, depth), label)
            }
        };
        Ok(set)
    }
}

fn require<T: Copy>(opt: Option<T>, flag: &str) -> Result<T, Failure> {
    opt.ok_or_else(|| invalid(format!("--{flag} is required for this generator")))
}

fn checked_arc(level: u32, index: u64) -> Result<DyadicArc, Failure> {
    if level > 52 || index >= (1u64 << level.min(63)) {
        return Err(invalid(format!(
            "arc index {index} does not exist at level {level}"
        )));
    }
    Ok(DyadicArc::new(level, index))
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Destination file; stdout when omitted (JSON only).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format. CSV writes the table to --out while stdout keeps
    /// the JSON document.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SetArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    /// Working dyadic depth.
    #[arg(long, default_value_t = 12)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SpreadArgs {
    /// Modulus profile for the generation masses.
    #[arg(long, value_enum, default_value_t = ModulusKind::Sqrt)]
    modulus: ModulusKind,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModulusKind {
    Sqrt,
}

#[derive(Args)]
struct EndpointArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    #[arg(long, default_value_t = 12)]
    depth: u32,
    /// Mass scale per unit arc length.
    #[arg(long, default_value_t = 12.0)]
    scale: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct GadgetArgs {
    /// Level of the carrier arc.
    #[arg(long)]
    level: u32,
    /// Index of the carrier arc.
    #[arg(long)]
    index: u64,
    /// Poisson threshold the columns must clear.
    #[arg(long, default_value_t = 2.0)]
    amplitude: f64,
    /// Column spacing parameter q.
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Column count exponent n (2^n columns of 2^n slots).
    #[arg(long, default_value_t = 2)]
    n: u32,
    /// Slot level offset m, with 2^(m-1) <= q 4^n < 2^m.
    #[arg(long, default_value_t = 6)]
    m: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MassesArgs {
    /// JSON file: [m1, m2, ...] or {"masses": [...]}.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct FiniteEntropyArgs {
    /// Measure JSON: [[pos, mass], ...], a full measure object, or a
    /// measure report document.
    #[arg(long)]
    input: PathBuf,
    /// Carrier set; defaults to the support of the input measure.
    #[command(flatten)]
    gen: GeneratorArgs,
    /// Construction depth.
    #[arg(long, default_value_t = 8)]
    depth: u32,
    /// Set resolution for the entropy verdict; defaults to
    /// max(depth, 14).
    #[arg(long)]
    resolution: Option<u32>,
    /// Zero-count budget per placement family.
    #[arg(long, default_value_t = 10.0)]
    budget: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct MeasureInputArgs {
    /// Measure JSON: [[pos, mass], ...], a full measure object, or a
    /// measure report document.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AtomicArgs {
    /// JSON file: {"masses": [...], "positions": [...]}.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AntiAtomicArgs {
    /// JSON file: [m1, m2, ...] or {"masses": [...]}.
    #[arg(long)]
    input: PathBuf,
    /// Depth budget for the gadget groups.
    #[arg(long, default_value_t = 24)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct AntiNonporousArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct EtaArgs {
    /// Inner-function JSON: {"zeros": [...], "measure": ...}.
    #[arg(long)]
    input: PathBuf,
    /// Exclusion radii, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5])]
    eps: Vec<f64>,
    /// Sample lattice depth.
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct Condition2Args {
    /// Inner-function JSON: {"zeros": [...], "measure": ...}.
    #[arg(long)]
    input: PathBuf,
    /// Modulus threshold; defaults to 1/e.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, default_value_t = 16)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct Lemma1CArgs {
    /// Measure JSON: [[pos, mass], ...], a full measure object, or a
    /// measure report document.
    #[arg(long)]
    input: PathBuf,
    /// Poisson threshold defining the hit family.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(long, default_value_t = 14)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct CheckArgs {
    /// Measure JSON: [[pos, mass], ...], a full measure object, or a
    /// measure report document.
    #[arg(long)]
    input: PathBuf,
    /// Placement JSON: a construction result or its report document.
    #[arg(long)]
    result: PathBuf,
    /// Sweep depth.
    #[arg(long, default_value_t = 10)]
    depth: u32,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Stored report document (JSON).
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

fn run(cli: Cli) -> CliResult {
    match cli.verb {
        Verb::Set(cmd) => run_set(cmd),
        Verb::Measure(cmd) => run_measure(cmd),
        Verb::Wepify(cmd) => run_wepify(cmd),
        Verb::Certify(cmd) => run_certify(cmd),
        Verb::Report(args) => {
            let doc: Document = read_json(&args.input)?;
            emit(&doc, &args.out)
        }
    }
}

fn run_set(cmd: SetCmd) -> CliResult {
    match cmd {
        SetCmd::Entropy(args) => {
            let (e, label) = build_set(&args)?;
            let (entropy, tail_bound) = e.entropy()?;
            let mut doc = Document::new(
                "entropy",
                Provenance::new(&[("depth", args.depth)]),
                &["entropy", "tail_bound"],
            )
            .with_meta("generator", &label)
            .with_meta("set_length", e.set_length())
            .with_meta("entropy", entropy)
            .with_meta("tail_bound", tail_bound);
            doc.push_row(vec![num(entropy), num(tail_bound)]);
            emit(&doc, &args.out)
        }
        SetCmd::Porosity(args) => {
            let (e, label) = build_set(&args)?;
            let mut doc = Document::new(
                "porosity",
                Provenance::new(&[("depth", args.depth)]),
                &["depth", "free_fraction", "covering_ratio"],
            )
            .with_meta("generator", &label);
            let report = e.porosity(args.depth);
            doc = doc
                .with_meta("free_fraction_arc", report.c_n_arc)
                .with_meta("covering_ratio_arc", report.lempor_arc);
            for n in 1..=args.depth {
                let r = e.porosity(n);
                doc.push_row(vec![
                    int(u64::from(n)),
                    num(r.c_n),
                    num(r.lempor_ratio),
                ]);
            }
            emit(&doc, &args.out)
        }
        SetCmd::HitSums(args) => {
            let (e, label) = build_set(&args)?;
            let sums = e.dyadic_hit_sum(args.depth);
            let mut doc = Document::new(
                "hit_sums",
                Provenance::new(&[("depth", args.depth)]),
                &["level", "partial_sum"],
            )
            .with_meta("generator", &label)
            .with_meta("verdict", sum_verdict(&sums, 1e-3));
            for (n, s) in sums.iter().enumerate() {
                doc.push_row(vec![int(n as u64), num(*s)]);
            }
            emit(&doc, &args.out)
        }
        SetCmd::FamilyG(args) => {
            let (e, label) = build_set(&args)?;
            let family = e.maximal_family_g(args.depth);
            let check = match e.check_maximal_family(&family, args.depth) {
                Ok(()) => "ok".to_owned(),
                Err(err) => err.to_string(),
            };
            let doc = family_document(
                "family_g",
                args.depth,
                &label,
                &family.arcs,
            )
            .with_meta("structure_check", check);
            emit(&doc, &args.out)
        }
        SetCmd::FamilyF(args) => {
            let (e, label) = build_set(&args)?;
            let family = e.family_f(args.depth);
            let doc =
                family_document("family_f", args.depth, &label, &family.arcs);
            emit(&doc, &args.out)
        }
    }
}

fn build_set(args: &SetArgs) -> Result<(CircleSet, String), Failure> {
    check_depth("depth", args.depth)?;
    args.gen.build(args.depth)
}

fn family_document(
    kind: &str,
    depth: u32,
    label: &str,
    arcs: &[DyadicArc],
) -> Document {
    let mut doc = Document::new(
        kind,
        Provenance::new(&[("depth", depth)]),
        &["level", "index", "start", "length"],
    )
    .with_meta("generator", label)
    .with_meta("count", arcs.len());
    for arc in arcs {
        doc.push_row(vec![
            int(u64::from(arc.level)),
            int(arc.index),
            num(arc.start()),
            num(arc.len()),
        ]);
    }
    doc
}

fn run_measure(cmd: MeasureCmd) -> CliResult {
    match cmd {
        MeasureCmd::Spread(args) => {
            check_depth("depth", args.depth)?;
            let w = match args.modulus {
                ModulusKind::Sqrt => ModulusFunction::sqrt_table(args.depth),
            };
            let mu = build_spread_measure(&w, args.depth)?;
            let doc = measure_document(
                "spread_measure",
                args.depth,
                &mu,
            )
            .with_meta(
                "envelope_constant",
                modulus_envelope_constant(&mu, &w, args.depth),
            );
            emit(&doc, &args.out)
        }
        MeasureCmd::Endpoint(args) => {
            check_depth("depth", args.depth)?;
            let (e, label) = args.gen.build(args.depth)?;
            let mu = build_endpoint_measure(&e, args.scale)?;
            let doc = measure_document("endpoint_measure", args.depth, &mu)
                .with_meta("generator", label)
                .with_meta("scale", args.scale);
            emit(&doc, &args.out)
        }
        MeasureCmd::Gadget(args) => {
            let arc = checked_arc(args.level, args.index)?;
            if args.n > 16 || args.m > 60 {
                return Err(invalid(format!(
                    "gadget shape out of range: need n <= 16 and m <= 60, \
                     got n = {}, m = {}",
                    args.n, args.m
                )));
            }
            check_depth("level+m", args.level + args.m)?;
            let params = GadgetParams::desk(args.q, args.n, args.m);
            let mu = build_gadget(args.amplitude, arc, &params)?;
            let doc = measure_document("gadget_measure", args.level, &mu)
                .with_meta("carrier_arc", arc)
                .with_meta("params", params)
                .with_meta("amplitude", args.amplitude);
            emit(&doc, &args.out)
        }
        MeasureCmd::Kl5(args) => {
            let masses = read_masses(&args.input)?;
            let ratio = tail_ratio_kl5(&masses)?;
            let mut doc = Document::new(
                "tail_ratio",
                Provenance::new(&[]),
                &["tail_ratio"],
            )
            .with_meta("terms", masses.len());
            doc.push_row(vec![num(ratio)]);
            emit(&doc, &args.out)
        }
    }
}

fn measure_document(kind: &str, depth: u32, mu: &AtomicMeasure) -> Document {
    let mut doc = Document::new(
        kind,
        Provenance::new(&[("depth", depth)]),
        &["pos", "mass"],
    )
    .with_meta("atom_count", mu.atoms.len())
    .with_meta("total_mass", mu.total_mass())
    .with_meta("builder", &mu.meta.builder);
    for atom in &mu.atoms {
        doc.push_row(vec![num(atom.pos), num(atom.mass)]);
    }
    doc
}

fn run_wepify(cmd: WepifyCmd) -> CliResult {
    match cmd {
        WepifyCmd::FiniteEntropy(args) => {
            let resolution = args.resolution.unwrap_or(args.depth.max(14));
            check_depth("depth", args.depth)?;
            check_depth("resolution", resolution)?;
            let mu = read_measure(&args.input)?;
            let (e, label) = if args.gen.generator.is_some() {
                args.gen.build(resolution)?
            } else {
                let positions: Vec<f64> =
                    mu.atoms.iter().map(|a| a.pos).collect();
                let label = format!("support({} atoms)", positions.len());
                (CircleSet::finite_points(&positions, resolution), label)
            };
            let result = wepify_finite_entropy(&mu, &e, args.depth, args.budget)?;
            let doc = placement_document(
                "wepify_finite_entropy",
                args.depth,
                &result,
            )
            .with_meta("generator", label)
            .with_meta("resolution", resolution)
            .with_meta("budget", args.budget);
            emit(&doc, &args.out)
        }
        WepifyCmd::Porous(args) => {
            check_depth("depth", args.depth)?;
            let mu = read_measure(&args.input)?;
            let result = easy_wepify_porous(&mu, args.depth)?;
            let doc =
                placement_document("wepify_porous", args.depth, &result);
            emit(&doc, &args.out)
        }
        WepifyCmd::Atomic(args) => {
            check_depth("depth", args.depth)?;
            let (masses, positions) = read_mass_positions(&args.input)?;
            let result = easy_wepify_atomic(&masses, &positions, args.depth)?;
            let doc =
                placement_document("wepify_atomic", args.depth, &result);
            emit(&doc, &args.out)
        }
        WepifyCmd::AntiAtomic(args) => {
            let masses = read_masses(&args.input)?;
            let anti = anti_wepable_atomic(&masses, args.depth)?;
            let doc = anti_document("anti_wepable_atomic", args.depth, &anti);
            emit(&doc, &args.out)
        }
        WepifyCmd::AntiNonporous(args) => {
            check_depth("depth", args.depth)?;
            let (e, label) = args.gen.build(args.depth)?;
            let anti = anti_wepable_nonporous(&e, args.depth)?;
            let doc = anti_document("anti_wepable_nonporous", args.depth, &anti)
                .with_meta("generator", label);
            emit(&doc, &args.out)
        }
    }
}

fn placement_document(
    kind: &str,
    depth: u32,
    result: &WepifyResult,
) -> Document {
    let mut doc = Document::new(
        kind,
        Provenance::new(&[("depth", depth)]),
        &["re", "im"],
    )
    .with_meta("result", result)
    .with_meta("zero_count", result.zeros.len())
    .with_meta("blaschke_sum", result.blaschke_sum);
    for z in &result.zeros {
        doc.push_row(vec![num(z.re), num(z.im)]);
    }
    doc
}

fn anti_document(kind: &str, depth: u32, anti: &AntiWepable) -> Document {
    let mut doc = Document::new(
        kind,
        Provenance::new(&[("depth", depth)]),
        &["pos", "mass"],
    )
    .with_meta("result", anti)
    .with_meta("witness_count", anti.witnesses.len())
    .with_meta("total_mass", anti.measure.total_mass());
    for atom in &anti.measure.atoms {
        doc.push_row(vec![num(atom.pos), num(atom.mass)]);
    }
    doc
}

fn run_certify(cmd: CertifyCmd) -> CliResult {
    match cmd {
        CertifyCmd::Eta(args) => {
            check_depth("depth", args.depth)?;
            let spec = read_spec(&args.input)?;
            let profile = eta_profile(&spec, &args.eps, args.depth)?;
            let mut doc = Document::new(
                "eta_profile",
                Provenance::new(&[("depth", args.depth)]),
                &["eps", "eta_hat"],
            )
            .with_meta("sample_count", profile.sample_count)
            .with_meta("threshold", profile.threshold)
            .with_meta("delta_tilde_hat", profile.delta_tilde_hat)
            .with_meta("admissible", &profile.admissible);
            for (eps, eta) in profile.eps_grid.iter().zip(&profile.eta_hat) {
                let cell = match eta {
                    Some(v) => num(*v),
                    None => Value::Null,
                };
                doc.push_row(vec![num(*eps), cell]);
            }
            emit(&doc, &args.out)
        }
        CertifyCmd::Condition2(args) => {
            check_depth("depth", args.depth)?;
            let spec = read_spec(&args.input)?;
            let eps = args.eps.unwrap_or_else(|| (-1.0f64).exp());
            let sums = condition2_sums(&spec, eps, args.depth)?;
            let mut doc = Document::new(
                "condition2",
                Provenance::new(&[("depth", args.depth)]),
                &["level", "partial_sum"],
            )
            .with_meta("eps", eps)
            .with_meta("verdict", sum_verdict(&sums, 1e-3));
            for (n, s) in sums.iter().enumerate() {
                doc.push_row(vec![int(n as u64), num(*s)]);
            }
            emit(&doc, &args.out)
        }
        CertifyCmd::LemporC(args) => {
            let (e, label) = build_set(&args)?;
            let mut doc = Document::new(
                "covering_ratio",
                Provenance::new(&[("depth", args.depth)]),
                &["depth", "covering_ratio"],
            )
            .with_meta("generator", &label);
            let report = e.porosity(args.depth);
            doc = doc.with_meta("covering_ratio_arc", report.lempor_arc);
            for n in 1..=args.depth {
                doc.push_row(vec![
                    int(u64::from(n)),
                    num(e.porosity(n).lempor_ratio),
                ]);
            }
            emit(&doc, &args.out)
        }
        CertifyCmd::Lemma1C(args) => {
            check_depth("depth", args.depth)?;
            let mu = read_measure(&args.input)?;
            let sums =
                carleson_hit_sum_lemma1c(&mu, args.threshold, args.depth)?;
            let mut doc = Document::new(
                "thresholded_hit_sums",
                Provenance::new(&[("depth", args.depth)]),
                &["level", "partial_sum"],
            )
            .with_meta("threshold", args.threshold)
            .with_meta("verdict", sum_verdict(&sums, 1e-3));
            for (n, s) in sums.iter().enumerate() {
                doc.push_row(vec![int(n as u64), num(*s)]);
            }
            emit(&doc, &args.out)
        }
        CertifyCmd::Mainest(args) => {
            check_depth("depth", args.depth)?;
            let mu = read_measure(&args.input)?;
            let result = read_result(&args.result)?;
            let (constant, worst) = mainest_check(&mu, &result, args.depth)?;
            let mut doc = Document::new(
                "class_sum_constant",
                Provenance::new(&[("depth", args.depth)]),
                &["constant"],
            )
            .with_meta("worst_arc", worst);
            doc.push_row(vec![num(constant)]);
            emit(&doc, &args.out)
        }
        CertifyCmd::Kl2(args) => {
            check_depth("depth", args.depth)?;
            let mu = read_measure(&args.input)?;
            let result = read_result(&args.result)?;
            let (constant, worst) = kl2_check(&mu, &result, args.depth)?;
            let mut doc = Document::new(
                "pair_sum_constant",
                Provenance::new(&[("depth", args.depth)]),
                &["constant"],
            )
            .with_meta("worst_arc", worst);
            doc.push_row(vec![num(constant)]);
            emit(&doc, &args.out)
        }
    }
}

/// Decay ratio above which the final increments count as non-shrinking.
const DIVERGENCE_RATIO: f64 = 0.95;
/// Per-level increment below which a non-shrinking tail is still too
/// small to call divergent.
const DIVERGENCE_SLOPE: f64 = 0.05;

/// Finite-depth verdict on nondecreasing partial sums, following the
/// three-word vocabulary: certify convergence on a Cauchy tail or on
/// four-level geometric decay, certify divergence on a flat tail with
/// real slope, say "undetermined" otherwise.
fn sum_verdict(sums: &[f64], tol: f64) -> String {
    let d = sums.len() - 1;
    if d < 8 {
        return "undetermined (need eight levels)".into();
    }
    let last = sums[d] - sums[d - 1];
    if last < tol {
        return format!("converges (Cauchy at {tol:e} by depth {d})");
    }
    let late = sums[d] - sums[d - 4];
    let early = sums[d - 4] - sums[d - 8];
    let ratio = late / early;
    if ratio <= HIT_SUM_DECAY {
        return format!(
            "converges (four-level decay ratio {ratio:.3} <= \
             {HIT_SUM_DECAY} at depth {d})"
        );
    }
    if ratio >= DIVERGENCE_RATIO && late / 4.0 >= DIVERGENCE_SLOPE {
        return format!(
            "diverges (increments hold at {:.3} per level, four-level \
             decay ratio {ratio:.3} at depth {d})",
            late / 4.0
        );
    }
    format!("undetermined (four-level decay ratio {ratio:.3} at depth {d})")
}

fn max_cells() -> Result<u64, Failure> {
    match std::env::var("INNERLAB_MAX_CELLS") {
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_CELLS),
        Err(std::env::VarError::NotUnicode(_)) => {
            Err(invalid("INNERLAB_MAX_CELLS is not valid unicode"))
        }
        Ok(s) => s.trim().parse().map_err(|_| {
            invalid(format!("INNERLAB_MAX_CELLS must be an integer, got {s:?}"))
        }),
    }
}

fn check_depth(name: &str, depth: u32) -> Result<(), Failure> {
    let cap = max_cells()?;
    let cells = if depth >= 63 {
        u64::MAX
    } else {
        (1u64 << (depth + 1)) - 1
    };
    if cells > cap {
        return Err(invalid(format!(
            "--{name} {depth} spans {cells} dyadic cells, above the \
             INNERLAB_MAX_CELLS cap {cap}"
        )));
    }
    Ok(())
}

fn emit(doc: &Document, out: &OutputArgs) -> CliResult {
    match out.format {
        Format::Json => match &out.out {
            Some(path) => fs::write(path, doc.to_json()).map_err(Failure::Io),
            None => {
                print!("{}", doc.to_json());
                Ok(())
            }
        },
        Format::Csv => {
            let path = out.out.as_ref().ok_or_else(|| {
                invalid("--format csv requires --out; stdout keeps the JSON document")
            })?;
            fs::write(path, doc.to_csv()).map_err(Failure::Io)?;
            print!("{}", doc.to_json());
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| {
        Failure::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        ))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn read_value(path: &Path) -> Result<Value, Failure> {
    read_json(path)
}

/// Accepts a bare `[[pos, mass], ...]` array, a full measure object, or a
/// measure report document with `pos,mass` columns.
fn read_measure(path: &Path) -> Result<AtomicMeasure, Failure> {
    let value = read_value(path)?;
    measure_from_value(&value).ok_or_else(|| {
        invalid(format!(
            "{}: expected a measure ([[pos, mass], ...], a measure object, \
             or a pos/mass report document)",
            path.display()
        ))
    })
}

fn measure_from_value(value: &Value) -> Option<AtomicMeasure> {
    if let Ok(mu) = serde_json::from_value::<AtomicMeasure>(value.clone()) {
        let sound = mu
            .atoms
            .iter()
            .all(|a| a.pos.is_finite() && a.mass.is_finite() && a.mass > 0.0);
        return if sound { Some(mu) } else { None };
    }
    if let Some(rows) = value.as_array() {
        let pairs = pairs_from_rows(rows)?;
        return Some(AtomicMeasure::new(pairs, "cli-input", 0));
    }
    let obj = value.as_object()?;
    let columns = obj.get("columns")?.as_array()?;
    if columns.len() != 2 || columns[0] != "pos" || columns[1] != "mass" {
        return None;
    }
    let rows = obj.get("rows")?.as_array()?;
    let pairs = pairs_from_rows(rows)?;
    let depth = obj
        .get("provenance")
        .and_then(|p| p.get("depths"))
        .and_then(|d| d.get("depth"))
        .and_then(Value::as_u64)
        .unwrap_or(0) as u32;
    Some(AtomicMeasure::new(pairs, "cli-input", depth))
}

fn pairs_from_rows(rows: &[Value]) -> Option<Vec<(f64, f64)>> {
    rows.iter()
        .map(|row| {
            let cells = row.as_array()?;
            if cells.len() != 2 {
                return None;
            }
            let pos = cells[0].as_f64()?;
            let mass = cells[1].as_f64()?;
            if !pos.is_finite() || !mass.is_finite() || mass <= 0.0 {
                return None;
            }
            Some((pos, mass))
        })
        .collect()
}

/// Accepts `[m1, m2, ...]` or `{"masses": [...]}`.
fn read_masses(path: &Path) -> Result<Vec<f64>, Failure> {
    let value = read_value(path)?;
    let arr = value
        .as_array()
        .or_else(|| value.get("masses").and_then(Value::as_array));
    arr.and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
        .ok_or_else(|| {
            invalid(format!(
                "{}: expected [m1, m2, ...] or {{\"masses\": [...]}}",
                path.display()
            ))
        })
}

/// Requires `{"masses": [...], "positions": [...]}` of equal length.
fn read_mass_positions(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let value = read_value(path)?;
    let field = |name: &str| -> Option<Vec<f64>> {
        value
            .get(name)?
            .as_array()?
            .iter()
            .map(Value::as_f64)
            .collect()
    };
    match (field("masses"), field("positions")) {
        (Some(m), Some(p)) => Ok((m, p)),
        _ => Err(invalid(format!(
            "{}: expected {{\"masses\": [...], \"positions\": [...]}}",
            path.display()
        ))),
    }
}

/// Accepts a full inner-function object or `{"zeros": ..., "measure": ...}`
/// with either part optional.
fn read_spec(path: &Path) -> Result<InnerSpec, Failure> {
    let value = read_value(path)?;
    if let Ok(spec) = serde_json::from_value::<InnerSpec>(value.clone()) {
        return Ok(spec);
    }
    let bad = || {
        invalid(format!(
            "{}: expected an inner-function spec ({{\"zeros\": [...], \
             \"measure\": ...}})",
            path.display()
        ))
    };
    let obj = value.as_object().ok_or_else(bad)?;
    let zeros: Vec<DiskPoint> = match obj.get("zeros") {
        Some(z) => serde_json::from_value(z.clone()).map_err(|_| bad())?,
        None => Vec::new(),
    };
    let measure = match obj.get("measure") {
        Some(m) => measure_from_value(m).ok_or_else(bad)?,
        None => AtomicMeasure::new(Vec::new(), "empty", 0),
    };
    if zeros.is_empty() && measure.atoms.is_empty() {
        return Err(bad());
    }
    Ok(InnerSpec::new(zeros, measure))
}

/// Accepts a placement result object or a report document carrying one
/// under `meta.result`.
fn read_result(path: &Path) -> Result<WepifyResult, Failure> {
    let value = read_value(path)?;
    if let Ok(result) = serde_json::from_value::<WepifyResult>(value.clone()) {
        return Ok(result);
    }
    let nested = value
        .get("meta")
        .and_then(|m| m.get("result"))
        .cloned()
        .and_then(|v| serde_json::from_value::<WepifyResult>(v).ok());
    nested.ok_or_else(|| {
        invalid(format!(
            "{}: expected a placement result (zeros, placement_log, \
             sequences, blaschke_sum)",
            path.display()
        ))
    })
}
