//! Demiclosedness experiments: build an instance from a scenario, generate a
//! hypothesis sequence, check both hypotheses and the conclusion at the
//! candidate limit, and run the structural checks of the partition engine.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::duality::{default_norming_family, lp_norm_l0, weak_convergence_diagnostics, FunctionalDiagnostic};
use crate::dynamics::{certify, mann_iterate, residual, AsymptoticMap};
use crate::element::{glue, RNElement};
use crate::error::{Error, Result};
use crate::exec::{item_rng, Exec};
use crate::measure::{L0Real, Partition};
use crate::partition::{
    induced_lipschitz_check, lemma31_partition, pieces_partition, recomposition_check, verify_piece,
};
use crate::scenario::{Instance, ScenarioConfig, SequenceConfig};

/// Relative step size below which an iterate counts as stationary.
pub const PLATEAU_TOL: f64 = 1e-10;
/// Consecutive stationary steps that make a plateau.
pub const PLATEAU_RUN: usize = 10;

const START_STREAM: u64 = 0x5747_4152;
const RECOMPOSE_STREAM: u64 = 0x5245_434f;
const SIGMA_STREAM: u64 = 0x5349_474d;

/// Conjugates `f` so that its domain contains θ.
///
/// Returns f′(u) = f(u + u₀) − u₀ on G − u₀ together with u₀. When θ ∈ G
/// already, u₀ = θ and `f` is returned unchanged; otherwise u₀ is the body
/// center.
pub fn translate_to_origin(f: &AsymptoticMap) -> Result<(AsymptoticMap, RNElement)> {
    let g = f.domain();
    let origin = RNElement::zero(g.space().clone(), g.spec());
    if g.contains(&origin, 0.0) {
        return Ok((f.clone(), origin));
    }
    let offset = g.center();
    Ok((f.translated(&offset)?, offset))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    /// At least one hypothesis failed, so the instance says nothing.
    HypothesesNotMet,
    /// Both hypotheses hold and the conclusion residual exceeds tolerance.
    Violated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::HypothesesNotMet => "hypotheses-not-met",
            Verdict::Violated => "violated",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum LimitSource {
    /// Fixed point known from the map constructor.
    FixedPoint,
    /// Declared by a prescribed sequence.
    Prescribed,
    /// Last iterate, after a plateau starting at `index`.
    Plateau { index: usize },
    /// Last iterate; no plateau was found.
    LastIterate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakHypothesis {
    pub holds: bool,
    pub tail_start: usize,
    pub functionals: Vec<FunctionalDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualHypothesis {
    pub holds: bool,
    /// Worst P{‖x_n − f(x_n)‖ ≥ ε} over the tail.
    pub worst_exceedance: f64,
    /// Lᵖ norms of x_n − f(x_n) over the tail.
    pub tail_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conclusion {
    /// ‖x − f(x)‖ at the candidate limit.
    pub residual: L0Real,
    pub lp_norm: f64,
    pub sup_norm: f64,
    pub tolerance: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateSummary {
    pub horizon: usize,
    pub samples: usize,
    pub violation_count: usize,
    pub escapes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PieceSummary {
    pub atoms: Vec<usize>,
    pub norm_bound: u64,
    pub beta_first: f64,
    pub beta_last: f64,
    pub invariants_hold: bool,
    pub lipschitz_checks: usize,
    pub lipschitz_violations: usize,
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    /// Sup-norm of the offset u₀ moving the body onto θ.
    pub offset_sup: f64,
    pub partition_valid: bool,
    pub pieces: Vec<PieceSummary>,
    pub recomposition_samples: usize,
    pub recomposition_failures: usize,
    pub sigma_samples: usize,
    pub sigma_failures: usize,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemiclosednessReport {
    pub name: String,
    pub map: String,
    pub steps: usize,
    pub limit: LimitSource,
    pub certificate: CertificateSummary,
    pub hypothesis_weak: WeakHypothesis,
    pub hypothesis_residual: ResidualHypothesis,
    pub conclusion: Conclusion,
    pub structure: StructureReport,
    pub verdict: Verdict,
    pub provenance: Provenance,
}

impl DemiclosednessReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.hypothesis_weak.holds && self.hypothesis_residual.holds
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    /// Flattened `field,value` rows.
    pub fn to_csv(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(["field", "value"]).expect("in-memory write");
        for (field, value) in rows {
            writer.write_record([field, value]).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf-8")
    }
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    use serde_json::Value;
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items
            .iter()
            .enumerate()
            .for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Runs one scenario.
pub fn run_demiclosedness(config: &ScenarioConfig) -> Result<DemiclosednessReport> {
    config.validate()?;
    let instance = config.build()?;
    let checks = &config.checks;
    let f = &instance.map;
    let steps = config.sequence.steps();

    let cert = certify(f, checks.horizon, checks.samples, checks.seed);
    if !cert.passed() || cert.escapes > 0 {
        return Err(Error::Generator(format!(
            "map fails its own certificate: {} violations, {} escapes",
            cert.violation_count, cert.escapes
        )));
    }

    let (sequence, limit, source) = generate(config, &instance)?;
    let tail = config.tail_start();

    let family = default_norming_family(&instance.space, instance.spec);
    let functionals =
        weak_convergence_diagnostics(&sequence, &limit, &family, checks.epsilon, checks.lambda, tail)?;
    let hypothesis_weak = WeakHypothesis {
        holds: functionals.iter().all(|d| d.converged),
        tail_start: tail,
        functionals,
    };

    let space = &instance.space;
    let residuals: Vec<L0Real> = sequence.iter().map(|x| residual(f, x)).collect();
    let zero = L0Real::zeros(space.atom_count());
    let worst = space.tail_exceedance(&residuals, &zero, checks.epsilon, tail)?;
    let tail_norms = residuals[tail..]
        .iter()
        .map(|r| lp_norm_l0(space, r, checks.p))
        .collect::<Result<_>>()?;
    let hypothesis_residual = ResidualHypothesis {
        holds: space.converges_in_probability(&residuals, &zero, checks.epsilon, checks.lambda, tail)?,
        worst_exceedance: worst,
        tail_norms,
    };

    let at_limit = residual(f, &limit);
    let sup_norm = at_limit.max_value();
    let conclusion = Conclusion {
        lp_norm: lp_norm_l0(space, &at_limit, checks.p)?,
        sup_norm,
        tolerance: checks.conclusion_tolerance,
        within_tolerance: sup_norm <= checks.conclusion_tolerance,
        residual: at_limit,
    };

    let verdict = if !(hypothesis_weak.holds && hypothesis_residual.holds) {
        Verdict::HypothesesNotMet
    } else if conclusion.within_tolerance {
        Verdict::Pass
    } else {
        Verdict::Violated
    };

    Ok(DemiclosednessReport {
        name: config.name.clone(),
        map: f.kind().name().to_string(),
        steps,
        limit: source,
        certificate: CertificateSummary {
            horizon: cert.horizon,
            samples: cert.samples,
            violation_count: cert.violation_count,
            escapes: cert.escapes,
        },
        hypothesis_weak,
        hypothesis_residual,
        conclusion,
        structure: structure_checks(f, config),
        verdict,
        provenance: Provenance {
            config_hash: config.hash(),
            seed: checks.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn generate(
    config: &ScenarioConfig,
    instance: &Instance,
) -> Result<(Vec<RNElement>, RNElement, LimitSource)> {
    let f = &instance.map;
    let g = f.domain();
    match &config.sequence {
        SequenceConfig::Mann { steps, .. } => {
            let start = match &instance.start {
                Some(s) => s.clone(),
                None => g.sample(&mut item_rng(config.checks.seed ^ START_STREAM, 0)),
            };
            let schedule = config.schedule().expect("mann sequence has a schedule");
            let trace = mann_iterate(f, &start, &schedule, *steps).map_err(|e| match e {
                Error::Precondition(msg) => Error::Generator(msg),
                other => other,
            })?;
            let iterates = trace.iterates;
            let (limit, source) = match f.known_fixed_point() {
                Some(p) => (p, LimitSource::FixedPoint),
                None => {
                    let last = iterates.last().expect("steps >= 1").clone();
                    match plateau_index(&iterates) {
                        Some(index) => (last, LimitSource::Plateau { index }),
                        None => (last, LimitSource::LastIterate),
                    }
                }
            };
            Ok((iterates, limit, source))
        }
        SequenceConfig::Prescribed {
            steps,
            decay,
            alternating,
            ..
        } => {
            let (limit, direction) = instance.prescribed.clone().expect("prescribed points");
            let mut seq = Vec::with_capacity(steps + 1);
            for n in 0..=*steps {
                let mut s = decay.powi(n as i32);
                if *alternating && n % 2 == 1 {
                    s = -s;
                }
                let x = &limit + &direction.scale(s);
                if !g.contains(&x, 1e-9) {
                    return Err(Error::Generator(format!("prescribed term {n} lies outside the body")));
                }
                seq.push(x);
            }
            Ok((seq, limit, LimitSource::Prescribed))
        }
    }
}

/// First index n such that the PLATEAU_RUN steps from n on all move by less
/// than PLATEAU_TOL relative to the iterate size.
fn plateau_index(iterates: &[RNElement]) -> Option<usize> {
    let still: Vec<bool> = iterates
        .windows(2)
        .map(|w| {
            let scale = w[1].data().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            w[0].max_abs_diff(&w[1]) < PLATEAU_TOL * scale
        })
        .collect();
    still
        .windows(PLATEAU_RUN)
        .position(|run| run.iter().all(|&s| s))
}

fn structure_checks(f: &AsymptoticMap, config: &ScenarioConfig) -> StructureReport {
    let checks = &config.checks;
    let mut report = StructureReport {
        offset_sup: 0.0,
        partition_valid: false,
        pieces: Vec::new(),
        recomposition_samples: checks.samples,
        recomposition_failures: 0,
        sigma_samples: checks.samples,
        sigma_failures: 0,
        error: None,
        passed: false,
    };
    if let Err(e) = structure_inner(f, config, &mut report) {
        report.error = Some(e.to_string());
        return report;
    }
    report.passed = report.partition_valid
        && report
            .pieces
            .iter()
            .all(|p| p.invariants_hold && p.lipschitz_violations == 0)
        && report.recomposition_failures == 0
        && report.sigma_failures == 0;
    report
}

fn structure_inner(f: &AsymptoticMap, config: &ScenarioConfig, report: &mut StructureReport) -> Result<()> {
    let checks = &config.checks;
    let (shifted, offset) = translate_to_origin(f)?;
    report.offset_sup = offset.data().iter().fold(0.0, |m, v| m.max(v.abs()));

    let pieces = lemma31_partition(&shifted, checks.horizon)?;
    report.partition_valid = pieces_partition(&pieces).is_ok();
    for pd in &pieces {
        let lip = induced_lipschitz_check(&shifted, pd, checks.p, checks.horizon, checks.samples, checks.seed)?;
        report.pieces.push(PieceSummary {
            atoms: pd.piece.atoms(),
            norm_bound: pd.norm_bound,
            beta_first: pd.beta[0],
            beta_last: *pd.beta.last().expect("horizon >= 1"),
            invariants_hold: verify_piece(&shifted, pd).is_ok(),
            lipschitz_checks: lip.checks,
            lipschitz_violations: lip.violation_count,
            worst_ratio: lip.worst_ratio,
        });
    }

    let g = shifted.domain();
    let outcomes = Exec::default().map_indexed(checks.samples, |i| {
        let x = g.sample(&mut item_rng(checks.seed ^ RECOMPOSE_STREAM, i));
        recomposition_check(&shifted, &pieces, &x)
    });
    for ok in outcomes {
        if !ok? {
            report.recomposition_failures += 1;
        }
    }

    let n = g.atom_count();
    report.sigma_failures = Exec::default()
        .map_indexed(checks.samples, |i| {
            let mut rng = item_rng(checks.seed ^ SIGMA_STREAM, i);
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let partition = Partition::from_labels(&labels).expect("nonempty labels");
            let family: Vec<RNElement> = (0..partition.len()).map(|_| g.sample(&mut rng)).collect();
            let glued = glue(&partition, &family).expect("same shapes");
            let images: Vec<RNElement> = family.iter().map(|x| shifted.apply(x)).collect();
            shifted.apply(&glued) != glue(&partition, &images).expect("same shapes")
        })
        .into_iter()
        .filter(|&failed| failed)
        .count();
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        }
    }

    pub fn render(self, report: &DemiclosednessReport) -> String {
        match self {
            ReportFormat::Json => report.to_json(),
            ReportFormat::Csv => report.to_csv(),
        }
    }
}

/// Overrides applied to every scenario before it runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut ScenarioConfig) {
        if let Some(seed) = self.seed {
            config.checks.seed = seed;
        }
        if let Some(horizon) = self.horizon {
            config.checks.horizon = horizon;
        }
    }
}

/// Loads a scenario file, applies overrides and runs it.
pub fn run_file(path: &Path, overrides: &Overrides) -> Result<DemiclosednessReport> {
    let mut config = ScenarioConfig::from_file(path)?;
    overrides.apply(&mut config);
    run_demiclosedness(&config)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub name: String,
    /// "met", "not-met", or empty when the scenario errored.
    pub hypotheses: String,
    pub conclusion_residual: Option<f64>,
    /// A verdict, "structure-failed", or "error".
    pub verdict: String,
    pub wall_time_ms: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub rows: Vec<SummaryRow>,
}

impl SuiteSummary {
    pub fn count(&self, verdict: &str) -> usize {
        self.rows.iter().filter(|r| r.verdict == verdict).count()
    }

    /// True iff no scenario violated the theorem, failed a structural check,
    /// or errored.
    pub fn success(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == "pass" || r.verdict == "hypotheses-not-met")
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Json => {
                let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
                text.push('\n');
                text
            }
            ReportFormat::Csv => {
                let mut writer = csv::Writer::from_writer(Vec::new());
                writer
                    .write_record(["name", "hypotheses", "conclusion_residual", "verdict", "wall_time_ms"])
                    .expect("in-memory write");
                for row in &self.rows {
                    writer
                        .write_record([
                            row.name.clone(),
                            row.hypotheses.clone(),
                            row.conclusion_residual.map(|v| format!("{v:e}")).unwrap_or_default(),
                            row.verdict.clone(),
                            row.wall_time_ms.to_string(),
                        ])
                        .expect("in-memory write");
                }
                String::from_utf8(writer.into_inner().expect("in-memory write")).expect("utf-8")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub overrides: Overrides,
    pub format: ReportFormat,
    /// Directory receiving one report per scenario and the summary.
    pub report_dir: PathBuf,
}

/// Scenario files (`*.toml`) in `dir`, sorted by file name.
pub fn scenario_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "toml") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Runs every scenario in `dir`, writes the reports and the summary, and
/// returns the summary. Per-file failures become error rows.
pub fn run_suite(dir: &Path, options: &SuiteOptions) -> Result<SuiteSummary> {
    let files = scenario_files(dir)?;
    fs::create_dir_all(&options.report_dir).map_err(|e| Error::io(&options.report_dir, e))?;

    let outcomes = Exec::default().map_indexed(files.len(), |i| {
        let started = Instant::now();
        let outcome = run_file(&files[i], &options.overrides);
        (outcome, started.elapsed().as_millis())
    });

    let mut rows = Vec::with_capacity(files.len());
    for (path, (outcome, wall_time_ms)) in files.iter().zip(outcomes) {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let row = match outcome {
            Ok(report) => {
                let target = options
                    .report_dir
                    .join(format!("{stem}.{}", options.format.extension()));
                fs::write(&target, options.format.render(&report)).map_err(|e| Error::io(&target, e))?;
                let verdict = if report.structure.passed {
                    report.verdict.as_str().to_string()
                } else {
                    "structure-failed".to_string()
                };
                SummaryRow {
                    name: report.name.clone(),
                    hypotheses: if report.hypotheses_hold() { "met" } else { "not-met" }.to_string(),
                    conclusion_residual: Some(report.conclusion.sup_norm),
                    verdict,
                    wall_time_ms,
                    error: None,
                }
            }
            Err(e) => SummaryRow {
                name: stem,
                hypotheses: String::new(),
                conclusion_residual: None,
                verdict: "error".to_string(),
                wall_time_ms,
                error: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    let summary = SuiteSummary { rows };
    let target = options
        .report_dir
        .join(format!("summary.{}", options.format.extension()));
    fs::write(&target, summary.render(options.format)).map_err(|e| Error::io(&target, e))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::ConvexBody;
    use crate::dynamics::MapKind;
    use crate::element::FiberSpec;
    use crate::measure::AtomicSpace;
    use std::sync::Arc;

    fn scenario(map: &str, sequence: &str) -> ScenarioConfig {
        ScenarioConfig::from_toml(&format!(
            r#"
name = "t"
[space]
weights = [0.5, 0.3, 0.2]
[fiber]
dim = 2
[body]
kind = "ball"
radius = 1.0
[map]
{map}
[sequence]
{sequence}
[checks]
samples = 16
horizon = 8
"#
        ))
        .unwrap()
    }

    #[test]
    fn identity_passes() {
        let config = scenario("kind = \"identity\"", "generator = \"mann\"\nsteps = 20");
        let report = run_demiclosedness(&config).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.conclusion.sup_norm, 0.0);
        assert_eq!(report.limit, LimitSource::Plateau { index: 0 });
        assert!(report.structure.passed);
    }

    #[test]
    fn halving_converges_to_origin() {
        let config = scenario(
            "kind = \"homothety\"\nfactor = 0.5",
            "generator = \"mann\"\nsteps = 80\nstart = [0.6, -0.7]",
        );
        let report = run_demiclosedness(&config).unwrap();
        assert_eq!(report.limit, LimitSource::FixedPoint);
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.conclusion.sup_norm, 0.0);
        assert_eq!(report.to_json(), run_demiclosedness(&config).unwrap().to_json());
        assert!(report.to_csv().starts_with("field,value\n"));
    }

    #[test]
    fn non_fixed_limit_is_vacuous() {
        let config = scenario(
            "kind = \"homothety\"\nfactor = 0.5",
            "generator = \"prescribed\"\nsteps = 60\nlimit = [0.5, 0.0]\ndirection = [0.1, 0.1]",
        );
        let report = run_demiclosedness(&config).unwrap();
        assert!(report.hypothesis_weak.holds);
        assert!(!report.hypothesis_residual.holds);
        assert_eq!(report.verdict, Verdict::HypothesesNotMet);
    }

    #[test]
    fn generator_errors() {
        let outside = scenario(
            "kind = \"identity\"",
            "generator = \"mann\"\nsteps = 20\nstart = [2.0, 0.0]",
        );
        assert!(matches!(run_demiclosedness(&outside), Err(Error::Generator(_))));
        let uncertified = ScenarioConfig::from_toml(
            &toml::to_string(&scenario("kind = \"rotation\"\nangle = 0.5\ngain = 1.0", "generator = \"mann\"\nsteps = 10"))
                .unwrap()
                .replace("kind = \"natural\"", "kind = \"decaying\"\namplitude = -0.5\nratio = 0.5"),
        )
        .unwrap();
        assert!(matches!(run_demiclosedness(&uncertified), Err(Error::Generator(_))));
    }

    #[test]
    fn translation_examples() {
        let s = Arc::new(AtomicSpace::uniform(2));
        let spec = FiberSpec::euclidean(2);
        let c = RNElement::constant(s.clone(), spec, &[3.0, -1.0]).unwrap();
        let body = ConvexBody::ball(c.clone(), L0Real::constant(2, 1.0)).unwrap();
        let f = AsymptoticMap::with_natural_certificate(
            body,
            MapKind::RotationProjection {
                angle: L0Real::constant(2, 0.4),
                gain: 1.0,
            },
        )
        .unwrap();
        let (g, offset) = translate_to_origin(&f).unwrap();
        assert_eq!(offset, c);
        let origin = RNElement::zero(s.clone(), spec);
        assert!(g.domain().contains(&origin, 0.0));
        let x = RNElement::constant(s.clone(), spec, &[3.5, -0.5]).unwrap();
        let lhs = g.apply(&(&x - &c));
        let rhs = &f.apply(&x) - &c;
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        assert!(g.apply(&origin).max_abs_diff(&origin) < 1e-15);

        let (again, zero) = translate_to_origin(&g).unwrap();
        assert!(zero.is_zero());
        assert_eq!(again, g);
    }
}
