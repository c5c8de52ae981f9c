use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use detqpe::determinant::DeterminantSpace;
use detqpe::hamiltonian::{TermCounts, DEFAULT_DROP_THRESHOLD};
use detqpe::oracle::{build_dense_hamiltonian, exact_eigensolve, trotter_error};
use detqpe::qpe::{self, load_ansatz, memory_estimate, Ansatz, MemoryEstimate, PhaseDistribution, QpeConfig, QpeMode};
use detqpe::readout::{find_peaks, phase_to_energy, resolution, resolve_alias, weighted_average, EnergyEstimate};
use detqpe::{expand_and_classify, parse_fcidump, ClassifiedHamiltonian, TrotterConfig, TrotterEngine};
use serde::Serialize;

use crate::manifest::{self, Outputs, RunManifest};
use crate::{InspectArgs, OracleArgs, RunArgs};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_hamiltonian(path: &Path) -> Result<ClassifiedHamiltonian<f64>> {
    let ints = parse_fcidump::<f64>(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    Ok(expand_and_classify(&ints, DEFAULT_DROP_THRESHOLD)?)
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn parse_space(s: &str) -> Result<DeterminantSpace> {
    let parts: Vec<&str> = s.split(':').collect();
    let [n, ka, kb] = parts.as_slice() else { bail!("space {s:?} is not N:KA:KB") };
    let num = |x: &str| x.trim().parse::<u32>().with_context(|| format!("bad space field {x:?}"));
    Ok(DeterminantSpace::new(num(n)?, num(ka)?, num(kb)?)?)
}

#[derive(Serialize)]
struct InspectReport {
    n_orbitals: u32,
    n_alpha: u32,
    n_beta: u32,
    term_counts: Option<TermCounts>,
    offset: Option<f64>,
    one_norm: Option<f64>,
    dimension: u64,
    precision_bits: u32,
    memory: Vec<MemoryEstimate>,
}

pub fn inspect(args: InspectArgs) -> Result<()> {
    let (space, ham) = match (&args.fcidump, &args.space) {
        (Some(path), _) => {
            let ham = load_hamiltonian(path)?;
            (ham.space()?, Some(ham))
        }
        (None, Some(s)) => (parse_space(s)?, None),
        (None, None) => bail!("give an FCIDUMP file or --space"),
    };
    if let (Some(path), Some(ham)) = (&args.dump_terms, &ham) {
        fs::write(path, to_json(ham)?).with_context(|| format!("writing {}", path.display()))?;
    }
    let report = InspectReport {
        n_orbitals: space.n,
        n_alpha: space.k_alpha,
        n_beta: space.k_beta,
        term_counts: ham.as_ref().map(|h| h.counts()),
        offset: ham.as_ref().map(|h| h.offset),
        one_norm: ham.as_ref().map(|h| h.one_norm()),
        dimension: space.dimension,
        precision_bits: args.precision_bits,
        memory: [QpeMode::Overlap, QpeMode::Layered]
            .into_iter()
            .map(|mode| memory_estimate(&space, args.precision_bits, mode))
            .collect(),
    };
    if args.json {
        print!("{}", to_json(&report)?);
        return Ok(());
    }
    println!("orbitals       {}", report.n_orbitals);
    println!("electrons      {} alpha, {} beta", report.n_alpha, report.n_beta);
    if let Some(c) = report.term_counts {
        println!("terms          pp {} pqqp {} pq {} pqqr {} pqrs {}", c.pp, c.pqqp, c.pq, c.pqqr, c.pqrs);
    }
    if let Some(offset) = report.offset {
        println!("offset         {offset}");
    }
    if let Some(norm) = report.one_norm {
        println!("one-norm       {norm}");
    }
    println!("dimension      {}", report.dimension);
    for est in &report.memory {
        println!(
            "memory {:<8} {} bytes at p={} (reduction {:.2}x over 2^{})",
            format!("{:?}", est.mode).to_lowercase(),
            est.bytes,
            report.precision_bits,
            est.reduction_factor,
            2 * space.n
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct DistributionFile<'a> {
    manifest: &'a RunManifest,
    distribution: &'a PhaseDistribution,
}

#[derive(Serialize)]
struct PeakReport {
    m: usize,
    probability: f64,
    neighbors_merged: bool,
    phase: f64,
    /// Alias candidates inside the window, or the `k = 0` reading without one.
    energies: Vec<EnergyEstimate>,
}

#[derive(Serialize)]
struct ReadoutReport<'a> {
    manifest: &'a RunManifest,
    offset: f64,
    resolution: f64,
    alias_period: f64,
    peaks: Vec<PeakReport>,
    /// Probability-weighted energy over the top peak and its above-threshold neighbors.
    top_cluster_energy: Option<f64>,
}

fn energies_for(m: usize, manifest: &RunManifest, offset: f64) -> Result<Vec<EnergyEstimate>> {
    let (p, r, t) = (manifest.precision_bits, manifest.trotter_steps, manifest.time);
    Ok(match manifest.window {
        Some(w) => resolve_alias(m, p, r, t, (w.lo, w.hi), offset)?,
        None => vec![phase_to_energy(m, p, r, t, 0, offset)],
    })
}

fn readout<'a>(manifest: &'a RunManifest, dist: &PhaseDistribution, offset: f64) -> Result<ReadoutReport<'a>> {
    let peaks = find_peaks(dist, manifest.threshold)?;
    let mut reports = Vec::with_capacity(peaks.len());
    for peak in &peaks {
        reports.push(PeakReport {
            m: peak.m,
            probability: peak.prob,
            neighbors_merged: peak.neighbors_merged,
            phase: peak.m as f64 / dist.len() as f64,
            energies: energies_for(peak.m, manifest, offset)?,
        });
    }
    let top_cluster_energy = match reports.first() {
        Some(top) if !top.energies.is_empty() => {
            let len = dist.len();
            let mut entries = vec![(top.energies[0].energy, top.probability)];
            for step in [1, len - 1] {
                let mut m = (top.m + step) % len;
                while m != top.m && dist.probs[m] >= manifest.threshold {
                    if let Some(e) = energies_for(m, manifest, offset)?.first() {
                        entries.push((e.energy, dist.probs[m]));
                    }
                    m = (m + step) % len;
                }
            }
            Some(weighted_average(&entries)?)
        }
        _ => None,
    };
    Ok(ReadoutReport {
        manifest,
        offset,
        resolution: resolution(manifest.precision_bits, manifest.trotter_steps, manifest.time),
        alias_period: 2.0 * PI * manifest.trotter_steps as f64 / manifest.time,
        peaks: reports,
        top_cluster_energy,
    })
}

fn manifest_from_args(args: &RunArgs) -> Result<RunManifest> {
    if let Some(path) = &args.manifest {
        let mut m = manifest::load(path)?;
        if let Some(dir) = &args.out {
            m.outputs = Outputs::in_dir(dir);
        }
        return Ok(m);
    }
    let input = args.fcidump.clone().context("missing FCIDUMP path")?;
    Ok(RunManifest {
        input,
        ansatz: args.ansatz.clone(),
        precision_bits: args.precision_bits,
        trotter_steps: args.trotter_steps,
        time: args.time,
        mode: args.mode,
        ordering: args.ordering,
        threshold: args.threshold,
        window: args.window,
        outputs: Outputs::in_dir(args.out.as_deref().unwrap_or(Path::new("."))),
        seed: args.seed,
    })
}

pub fn run(args: RunArgs) -> Result<()> {
    let manifest = manifest_from_args(&args)?;
    let ham = load_hamiltonian(&manifest.input)?;
    let space = ham.space()?;
    let ansatz = match &manifest.ansatz {
        Some(path) => load_ansatz(&read(path)?, space).with_context(|| format!("parsing {}", path.display()))?,
        None => Ansatz::hartree_fock(space),
    };
    let mut trotter = TrotterConfig::new(manifest.time, manifest.trotter_steps);
    trotter.ordering = manifest.ordering;
    let cfg = QpeConfig::new(manifest.precision_bits, trotter).with_mode(manifest.mode);
    let dist = qpe::run(&ham, &ansatz, &cfg)?;
    let offset = TrotterEngine::new(&ham, trotter)?.tracked_offset();
    let report = readout(&manifest, &dist, offset)?;

    // everything is computed before the first write, so failures leave no partial outputs
    let csv = dist.to_csv();
    let dist_json = to_json(&DistributionFile { manifest: &manifest, distribution: &dist })?;
    let report_json = to_json(&report)?;
    let outputs = &manifest.outputs;
    for path in [&outputs.csv, &outputs.distribution, &outputs.report] {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    write(&outputs.csv, &csv)?;
    write(&outputs.distribution, &dist_json)?;
    write(&outputs.report, &report_json)?;

    match report.peaks.first() {
        Some(top) => {
            let energy = top.energies.first().map(|e| format!("{:.10}", e.energy)).unwrap_or_else(|| "none in window".into());
            println!("top peak m={} probability={:.6} energy={energy}", top.m, top.probability);
        }
        None => println!("no peak above threshold {}", manifest.threshold),
    }
    if let Some(e) = report.top_cluster_energy {
        println!("top cluster weighted energy {e:.10}");
    }
    println!("resolution {:.6e}", report.resolution);
    println!("wrote {}, {}, {}", outputs.csv.display(), outputs.distribution.display(), outputs.report.display());
    Ok(())
}

fn write(path: &PathBuf, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct TrotterRow {
    r: u32,
    error: f64,
    ratio_to_previous: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport {
    dimension: u64,
    eigenvalues: Vec<f64>,
    time: f64,
    trotter_errors: Vec<TrotterRow>,
}

pub fn oracle(args: OracleArgs) -> Result<()> {
    let ham = load_hamiltonian(&args.fcidump)?;
    let space = ham.space()?;
    let dense = build_dense_hamiltonian(&ham, &space, args.cap)?;
    let eig = exact_eigensolve(&dense)?;
    if let Some(path) = &args.ground_ansatz {
        let ansatz = Ansatz::from_state(&eig.ground_state(space))?;
        write(path, &ansatz.to_text())?;
    }
    let mut rows: Vec<TrotterRow> = Vec::new();
    for &r in &args.trotter_steps {
        let error = trotter_error(&ham, &TrotterConfig::new(args.time, r), args.cap)?;
        let ratio_to_previous = rows.last().map(|prev| error / prev.error);
        rows.push(TrotterRow { r, error, ratio_to_previous });
    }
    let report = OracleReport {
        dimension: space.dimension,
        eigenvalues: eig.values.iter().copied().take(args.eigenvalues).collect(),
        time: args.time,
        trotter_errors: rows,
    };
    if args.json {
        print!("{}", to_json(&report)?);
        return Ok(());
    }
    let mut out = String::new();
    writeln!(out, "dimension {}", report.dimension)?;
    writeln!(out, "eigenvalues")?;
    for (i, e) in report.eigenvalues.iter().enumerate() {
        writeln!(out, "  {i:>4} {e:.12}")?;
    }
    writeln!(out, "trotter error at t={}", report.time)?;
    writeln!(out, "  {:>6} {:>14} {:>8}", "r", "error", "ratio")?;
    for row in &report.trotter_errors {
        let ratio = row.ratio_to_previous.map(|q| format!("{q:.4}")).unwrap_or_else(|| "-".into());
        writeln!(out, "  {:>6} {:>14.6e} {:>8}", row.r, row.error, ratio)?;
    }
    print!("{out}");
    Ok(())
}
