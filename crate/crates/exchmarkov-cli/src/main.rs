//! Command-line front end: simulate discrete and continuous-time processes
//! on finite structures, check class and kernel properties, classify
//! kernels and rate measures, and project trajectories to densities.
//!
//! Exit codes: 0 on pass/success, 1 on FAIL results, 2 on input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use exchmarkov::chain::{check_exchangeability, check_projectivity, run_chain, Trajectory};
use exchmarkov::classes::{
    check_dap, check_hp, check_jep, check_ndap, DapCase, DapReport, FiniteClass, HpReport,
    JepReport, NdapReport,
};
use exchmarkov::ctprocess::{jump_rates, simulate_ct, CTTrajectory};
use exchmarkov::io::{
    build_kernel, build_measure, build_sampler, class_from_arg, sampler_shorthand, KernelDesc,
    MeasureDesc, SamplerDesc, StructureFile,
};
use exchmarkov::kernels::{
    check_conjugation_invariance, check_consistency, CheckRegime, ConjInvReport,
    ConsistencyReport, Kernel, KernelSampler,
};
use exchmarkov::levyito::{classify_measure, delta_f, DeltaF};
use exchmarkov::limits::{density, project_chain, project_ct, DensityMethod, ProjRecord};
use exchmarkov::structures::{FiniteStructure, Signature};

#[derive(Parser)]
#[command(
    name = "exchmarkov",
    version,
    about = "Exchangeable combinatorial Markov processes: simulation, checks, classification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ClassProp {
    Hp,
    Jep,
    Dap,
    Ndap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KernelProp {
    Consistency,
    Conjugation,
    Exchangeability,
    Projectivity,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate i.i.d. kernels from a sampler, one JSON structure per line.
    SimulateChain {
        /// Sampler descriptor file, or a builtin name: identity,
        /// complement, pin-first, size-parity.
        #[arg(long)]
        mu: String,
        /// Initial structure file.
        #[arg(long)]
        init: PathBuf,
        /// Number of steps; the output has steps+1 lines.
        #[arg(long)]
        steps: usize,
        /// Master seed.
        #[arg(long)]
        seed: u64,
        /// Trajectory file (JSONL); states print to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a continuous-time process; records {"t":..,"state":..}
    /// starting with the initial state at t=0.
    SimulateCt {
        /// Rate-measure descriptor file.
        #[arg(long)]
        lambda: PathBuf,
        /// Initial structure file.
        #[arg(long)]
        init: PathBuf,
        /// Time horizon.
        #[arg(long)]
        tmax: f64,
        /// Master seed.
        #[arg(long)]
        seed: u64,
        /// Trajectory file (JSONL); records print to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the jump-rate decomposition of a rate measure at a state.
    Rates {
        /// Rate-measure descriptor file.
        #[arg(long)]
        lambda: PathBuf,
        /// State structure file.
        #[arg(long)]
        state: PathBuf,
        /// Monte Carlo samples for non-closed-form atoms.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a structural property of a class of finite structures.
    CheckClass {
        /// Builtin class identifier or user-class file.
        #[arg(long)]
        class: String,
        /// Property to check.
        #[arg(long)]
        prop: ClassProp,
        /// Size bound (hp/jep/dap) or family size (ndap).
        #[arg(long)]
        n: usize,
        /// Host-size search bound for jep/dap; defaults to 2n.
        #[arg(long)]
        search_bound: Option<usize>,
    },
    /// Check a kernel or sampler property.
    CheckKernel {
        /// Kernel descriptor file (consistency, conjugation).
        #[arg(long)]
        kernel: Option<PathBuf>,
        /// Sampler descriptor file or builtin name (exchangeability,
        /// projectivity).
        #[arg(long)]
        mu: Option<String>,
        /// Property to check.
        #[arg(long)]
        prop: KernelProp,
        /// Size the check runs at.
        #[arg(long)]
        n: usize,
        /// Initial structure over n+1 elements (projectivity only).
        #[arg(long)]
        init: Option<PathBuf>,
        /// Steps to follow (projectivity only).
        #[arg(long, default_value_t = 3)]
        steps: usize,
        /// Replicas per histogram (exchangeability, projectivity).
        #[arg(long, default_value_t = 2_000)]
        replicas: usize,
        /// Total-variation tolerance (exchangeability, projectivity).
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        /// Master seed (exchangeability, projectivity).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify a kernel by its locality core.
    ClassifyKernel {
        /// Kernel descriptor file.
        #[arg(long)]
        kernel: PathBuf,
        /// Truncation size the locality profile is computed at.
        #[arg(long)]
        n: usize,
        /// Locality-fraction threshold.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Classify every atom and family of a rate measure.
    ClassifyMeasure {
        /// Rate-measure descriptor file.
        #[arg(long)]
        lambda: PathBuf,
        /// Truncation size the locality profiles are computed at.
        #[arg(long)]
        n: usize,
        /// Locality-fraction threshold.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Kernels sampled per atom.
        #[arg(long, default_value_t = 3)]
        samples: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Density of a probe structure in a host structure.
    Density {
        /// Probe structure file.
        #[arg(long)]
        probe: PathBuf,
        /// Host structure file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Injections sampled when not exact.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Evaluation method.
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Project a trajectory file to probe densities as CSV.
    Project {
        /// Trajectory file (JSONL from simulate-chain or simulate-ct).
        #[arg(long)]
        traj: PathBuf,
        /// JSON array of probe structures.
        #[arg(long)]
        probes: PathBuf,
        /// Output CSV: time,probe_id,estimate,stderr.
        #[arg(long)]
        out: PathBuf,
        /// Injections sampled per (state, probe) pair.
        #[arg(long, default_value_t = 2_000)]
        samples: usize,
        /// Master seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Sampled,
    Auto,
}

fn main() {
    // Restore the default SIGPIPE disposition so piping into head or less
    // ends the process quietly instead of panicking on a closed stdout.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_structure(path: &Path) -> Result<FiniteStructure> {
    let file: StructureFile = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    file.to_structure()
        .with_context(|| format!("validating {}", path.display()))
}

fn read_measure(path: &Path) -> Result<exchmarkov::ctprocess::RateMeasure> {
    let desc: MeasureDesc = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    build_measure(&desc).with_context(|| format!("building measure from {}", path.display()))
}

fn read_kernel(path: &Path) -> Result<Kernel> {
    let desc: KernelDesc = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("parsing {}", path.display()))?;
    build_kernel(&desc).with_context(|| format!("building kernel from {}", path.display()))
}

fn resolve_sampler(arg: &str, sig: Option<&Arc<Signature>>) -> Result<KernelSampler> {
    let path = Path::new(arg);
    if path.is_file() {
        let desc: SamplerDesc = serde_json::from_str(&read_text(path)?)
            .with_context(|| format!("parsing {arg}"))?;
        return build_sampler(&desc).with_context(|| format!("building sampler from {arg}"));
    }
    match sampler_shorthand(arg, sig) {
        Some(result) => Ok(result?),
        None => bail!("--mu {arg}: not a readable file or a builtin sampler name"),
    }
}

fn resolve_class(arg: &str) -> Result<FiniteClass> {
    let path = Path::new(arg);
    let contents = if path.is_file() {
        Some(read_text(path)?)
    } else {
        None
    };
    Ok(class_from_arg(arg, contents.as_deref())?)
}

fn structure_value(m: &FiniteStructure) -> serde_json::Value {
    serde_json::to_value(StructureFile::from_structure(m)).expect("plain data serializes")
}

fn meta(command: &str, config: serde_json::Value) -> serde_json::Value {
    json!({
        "tool": {"name": "exchmarkov", "version": env!("CARGO_PKG_VERSION")},
        "command": command,
        "config": config,
    })
}

fn regime_value(regime: &CheckRegime) -> serde_json::Value {
    match regime {
        CheckRegime::Exhaustive => json!("exhaustive"),
        CheckRegime::Sampled { trials } => json!({"sampled": trials}),
    }
}

fn emit_lines(out: Option<&Path>, lines: &[String], summary: serde_json::Value) -> Result<()> {
    match out {
        Some(path) => {
            let mut text = lines.join("\n");
            text.push('\n');
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => {
            for line in lines {
                println!("{line}");
            }
        }
    }
    Ok(())
}

fn dap_case_value(case: &DapCase) -> serde_json::Value {
    json!({
        "base": structure_value(&case.base),
        "left": structure_value(&case.left),
        "right": structure_value(&case.right),
        "phi_left": case.phi_left,
        "phi_right": case.phi_right,
    })
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::SimulateChain {
            mu,
            init,
            steps,
            seed,
            out,
        } => {
            let m0 = read_structure(&init)?;
            let sampler = resolve_sampler(&mu, Some(m0.signature()))?;
            let traj = run_chain(&sampler, &m0, steps, seed)?;
            let lines: Vec<String> = traj
                .states
                .iter()
                .map(|s| serde_json::to_string(&StructureFile::from_structure(s)))
                .collect::<std::result::Result<_, _>>()?;
            let summary = json!({
                "meta": meta("simulate-chain", json!({
                    "mu": mu, "init": init.display().to_string(),
                    "steps": steps, "seed": seed,
                })),
                "states": lines.len(),
                "out": out.as_ref().map(|p| p.display().to_string()),
            });
            emit_lines(out.as_deref(), &lines, summary)?;
            Ok(0)
        }
        Command::SimulateCt {
            lambda,
            init,
            tmax,
            seed,
            out,
        } => {
            let measure = read_measure(&lambda)?;
            let m0 = read_structure(&init)?;
            let traj = simulate_ct(&measure, &m0, tmax, seed)?;
            let mut lines = vec![serde_json::to_string(&json!({
                "t": 0.0,
                "state": structure_value(&traj.initial),
            }))?];
            for (t, state) in &traj.jumps {
                lines.push(serde_json::to_string(&json!({
                    "t": t,
                    "state": structure_value(state),
                }))?);
            }
            let summary = json!({
                "meta": meta("simulate-ct", json!({
                    "lambda": lambda.display().to_string(),
                    "init": init.display().to_string(),
                    "tmax": tmax, "seed": seed,
                })),
                "jumps": traj.jump_count(),
                "out": out.as_ref().map(|p| p.display().to_string()),
            });
            emit_lines(out.as_deref(), &lines, summary)?;
            Ok(0)
        }
        Command::Rates {
            lambda,
            state,
            samples,
            seed,
        } => {
            let measure = read_measure(&lambda)?;
            let m = read_structure(&state)?;
            let rates = jump_rates(&measure, &m, samples, seed)?;
            let components: Vec<serde_json::Value> = rates
                .components
                .iter()
                .map(|c| json!({"label": c.label, "rate": c.rate, "stderr": c.stderr}))
                .collect();
            let report = json!({
                "meta": meta("rates", json!({
                    "lambda": lambda.display().to_string(),
                    "state": state.display().to_string(),
                    "samples": samples, "seed": seed,
                })),
                "components": components,
                "total": rates.total,
                "total_stderr": rates.total_stderr,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(0)
        }
        Command::CheckClass {
            class,
            prop,
            n,
            search_bound,
        } => {
            let the_class = resolve_class(&class)?;
            let bound = search_bound.unwrap_or(2 * n);
            let (status, witness) = match prop {
                ClassProp::Hp => match check_hp(&the_class, n)? {
                    HpReport::Pass => ("PASS", json!(null)),
                    HpReport::Fail {
                        member,
                        injection,
                        image,
                    } => (
                        "FAIL",
                        json!({
                            "member": structure_value(&member),
                            "injection": injection,
                            "image": structure_value(&image),
                        }),
                    ),
                },
                ClassProp::Jep => match check_jep(&the_class, n, bound)? {
                    JepReport::Pass => ("PASS", json!(null)),
                    JepReport::Fail { left, right } => (
                        "FAIL",
                        json!({
                            "left": structure_value(&left),
                            "right": structure_value(&right),
                        }),
                    ),
                    JepReport::Unknown { left, right } => (
                        "UNKNOWN",
                        json!({
                            "left": structure_value(&left),
                            "right": structure_value(&right),
                            "search_bound": bound,
                        }),
                    ),
                },
                ClassProp::Dap => match check_dap(&the_class, n, bound)? {
                    DapReport::Pass => ("PASS", json!(null)),
                    DapReport::Fail(case) => ("FAIL", dap_case_value(&case)),
                    DapReport::Unknown(case) => ("UNKNOWN", dap_case_value(&case)),
                },
                ClassProp::Ndap => match check_ndap(&the_class, n)? {
                    NdapReport::Pass => ("PASS", json!(null)),
                    NdapReport::Fail { family } => (
                        "FAIL",
                        json!({
                            "family": family.iter().map(structure_value).collect::<Vec<_>>(),
                        }),
                    ),
                },
            };
            let report = json!({
                "meta": meta("check-class", json!({
                    "class": class, "prop": format!("{prop:?}").to_lowercase(), "n": n,
                })),
                "status": status,
                "witness": witness,
            });
            println!("{status}");
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if status == "FAIL" { 1 } else { 0 })
        }
        Command::CheckKernel {
            kernel,
            mu,
            prop,
            n,
            init,
            steps,
            replicas,
            tol,
            seed,
        } => {
            let config = json!({
                "prop": format!("{prop:?}").to_lowercase(), "n": n,
                "replicas": replicas, "tol": tol, "seed": seed,
            });
            let (status, detail) = match prop {
                KernelProp::Consistency | KernelProp::Conjugation => {
                    let Some(kernel) = kernel else {
                        bail!("--kernel is required for this property");
                    };
                    let f = read_kernel(&kernel)?;
                    match prop {
                        KernelProp::Consistency => match check_consistency(&f, n)? {
                            ConsistencyReport::Pass { regime } => {
                                ("PASS", json!({"regime": regime_value(&regime)}))
                            }
                            ConsistencyReport::Fail { witness } => (
                                "FAIL",
                                json!({"witness": structure_value(&witness)}),
                            ),
                        },
                        _ => match check_conjugation_invariance(&f, n)? {
                            ConjInvReport::Pass { regime } => {
                                ("PASS", json!({"regime": regime_value(&regime)}))
                            }
                            ConjInvReport::Fail { regime, witnesses } => (
                                "FAIL",
                                json!({
                                    "regime": regime_value(&regime),
                                    "witnesses": witnesses.iter().map(|w| json!({
                                        "subset": w.subset,
                                        "left": structure_value(&w.left),
                                        "right": structure_value(&w.right),
                                    })).collect::<Vec<_>>(),
                                }),
                            ),
                        },
                    }
                }
                KernelProp::Exchangeability => {
                    let Some(mu) = &mu else {
                        bail!("--mu is required for this property");
                    };
                    let init_sig = init.as_deref().map(read_structure).transpose()?;
                    let sampler =
                        resolve_sampler(mu, init_sig.as_ref().map(|m| m.signature()))?;
                    let report = check_exchangeability(&sampler, n, replicas, tol, seed)?;
                    (
                        if report.pass { "PASS" } else { "FAIL" },
                        json!({
                            "threshold": report.threshold,
                            "comparisons": report.comparisons,
                            "replicas": report.replicas,
                            "worst": {
                                "input": structure_value(&report.worst.input),
                                "sigma": report.worst.sigma,
                                "tv": report.worst.tv,
                            },
                        }),
                    )
                }
                KernelProp::Projectivity => {
                    let Some(mu) = &mu else {
                        bail!("--mu is required for this property");
                    };
                    let Some(init) = &init else {
                        bail!("--init (over n+1 elements) is required for projectivity");
                    };
                    let m0 = read_structure(init)?;
                    let sampler = resolve_sampler(mu, Some(m0.signature()))?;
                    let report = check_projectivity(&sampler, &m0, steps, replicas, tol, seed)?;
                    (
                        if report.pass { "PASS" } else { "FAIL" },
                        json!({
                            "threshold": report.threshold,
                            "per_step": report.per_step,
                            "worst_step": report.worst_step,
                            "replicas": report.replicas,
                        }),
                    )
                }
            };
            let report = json!({
                "meta": meta("check-kernel", config),
                "status": status,
                "detail": detail,
            });
            println!("{status}");
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if status == "FAIL" { 1 } else { 0 })
        }
        Command::ClassifyKernel { kernel, n, eps } => {
            let f = read_kernel(&kernel)?;
            let report = delta_f(&f, n, eps)?;
            let type_label = match &report.delta {
                DeltaF::Global => "global".to_string(),
                DeltaF::Core(s) => s.ranked_type().to_string(),
            };
            let family: Vec<serde_json::Value> = report
                .family
                .iter()
                .map(|(s, frac)| json!([s.to_string(), frac]))
                .collect();
            let out = json!({
                "meta": meta("classify-kernel", json!({
                    "kernel": kernel.display().to_string(), "n": n, "eps": eps,
                })),
                "deltaF": report.delta.to_string(),
                "type": type_label,
                "regime": regime_value(&report.regime),
                "lhat": family,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Command::ClassifyMeasure {
            lambda,
            n,
            eps,
            samples,
            seed,
        } => {
            let measure = read_measure(&lambda)?;
            let report = classify_measure(&measure, n, eps, samples, seed)?;
            let atoms: Vec<serde_json::Value> = report
                .atoms
                .iter()
                .map(|a| {
                    json!({
                        "label": a.label,
                        "type": a.majority.to_string(),
                        "disagreements": a.disagreements,
                        "samples": a.samples.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let out = json!({
                "meta": meta("classify-measure", json!({
                    "lambda": lambda.display().to_string(),
                    "n": n, "eps": eps, "samples": samples, "seed": seed,
                })),
                "atoms": atoms,
                "ndap_warning": report.ndap_warning,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Command::Density {
            probe,
            input,
            samples,
            method,
            seed,
        } => {
            let pattern = read_structure(&probe)?;
            let host = read_structure(&input)?;
            let method_used = match method {
                MethodArg::Exact => DensityMethod::Exact,
                MethodArg::Sampled => DensityMethod::Sampled(samples),
                MethodArg::Auto => DensityMethod::Auto(samples),
            };
            let est = density(&pattern, &host, method_used, seed)?;
            let out = json!({
                "meta": meta("density", json!({
                    "probe": probe.display().to_string(),
                    "in": input.display().to_string(),
                    "samples": samples, "seed": seed,
                })),
                "value": est.value,
                "stderr": est.stderr,
                "exact": est.samples == 0,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(0)
        }
        Command::Project {
            traj,
            probes,
            out,
            samples,
            seed,
        } => {
            let probe_files: Vec<StructureFile> = serde_json::from_str(&read_text(&probes)?)
                .with_context(|| format!("parsing {}", probes.display()))?;
            let probe_structures: Vec<FiniteStructure> = probe_files
                .iter()
                .map(|f| f.to_structure())
                .collect::<exchmarkov::Result<_>>()?;
            let records = project_trajectory_file(&traj, &probe_structures, samples, seed)?;
            let mut csv = String::from("time,probe_id,estimate,stderr\n");
            for r in &records {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    r.time, r.probe, r.estimate, r.stderr
                ));
            }
            fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
            let summary = json!({
                "meta": meta("project", json!({
                    "traj": traj.display().to_string(),
                    "probes": probes.display().to_string(),
                    "samples": samples, "seed": seed,
                })),
                "rows": records.len(),
                "out": out.display().to_string(),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(0)
        }
    }
}

fn project_trajectory_file(
    path: &Path,
    probes: &[FiniteStructure],
    samples: usize,
    seed: u64,
) -> Result<Vec<ProjRecord>> {
    let text = read_text(path)?;
    let mut ct_records: Vec<(f64, FiniteStructure)> = Vec::new();
    let mut chain_states: Vec<FiniteStructure> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
        if value.get("t").is_some() {
            let t = value["t"]
                .as_f64()
                .with_context(|| format!("{}:{}: non-numeric t", path.display(), idx + 1))?;
            let state: StructureFile = serde_json::from_value(value["state"].clone())
                .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
            ct_records.push((t, state.to_structure()?));
        } else {
            let state: StructureFile = serde_json::from_value(value)
                .with_context(|| format!("{}:{}", path.display(), idx + 1))?;
            chain_states.push(state.to_structure()?);
        }
    }
    if !ct_records.is_empty() && !chain_states.is_empty() {
        bail!(
            "{}: mixes timed records and bare states",
            path.display()
        );
    }
    if !ct_records.is_empty() {
        let initial = ct_records[0].1.clone();
        let traj = CTTrajectory {
            n: initial.n(),
            initial,
            jumps: ct_records[1..].to_vec(),
        };
        return Ok(project_ct(&traj, probes, samples, seed)?);
    }
    if chain_states.is_empty() {
        bail!("{}: empty trajectory", path.display());
    }
    let traj = Trajectory {
        n: chain_states[0].n(),
        states: chain_states,
    };
    Ok(project_chain(&traj, probes, samples, seed)?)
}
