use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use chaos_stein::bernoulli::OutcomeSpace;
use chaos_stein::graph::{
    asymptotic_normality_check, closed_form_bound, standardized_count_functional, subgraph_count_kernels,
    variance_exact, EdgeIndexing, Family, GraphBoundReport, GraphSpec, PRule, SubgraphProfile,
};
use chaos_stein::montecarlo::{
    default_moment_mode, empirical_dk, format_float, scaling_study, simulate_counts, standardize_counts,
    write_scaling_csv, write_simulate_csv, SampleConfig, ScalingConfig,
};
use chaos_stein::par::configure_threads;
use chaos_stein::verify::{run_suite, Suite, VerifyConfig};

use crate::plot;
use crate::{BoundArgs, DecomposeArgs, Failure, PatternArgs, ScalingArgs, SimulateArgs, VerifyArgs};

type Outcome = Result<(), Failure>;

/// Largest `m` accepted by `verify`.
const VERIFY_MAX_M: usize = 24;

/// Sizes over which the normality verdict is evaluated, as multiples of `n`.
const VERDICT_SCALES: [usize; 6] = [1, 2, 4, 8, 16, 32];

fn load_pattern(args: &PatternArgs) -> Result<(GraphSpec, Option<Family>), Failure> {
    match (&args.graph, &args.family, args.size) {
        (Some(path), None, _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            Ok((GraphSpec::parse(&text)?, None))
        }
        (None, Some(name), Some(size)) => {
            let family = Family::parse(name, size)?;
            Ok((family.graph()?, Some(family)))
        }
        _ => Err(Failure::new(2, "a pattern is required: --graph FILE or --family NAME --size R")),
    }
}

fn check_p(p: f64) -> Result<(), Failure> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Failure::new(2, format!("--p must lie in (0, 1), got {p}")))
    }
}

fn set_threads(threads: Option<usize>) -> Result<(), Failure> {
    match threads {
        Some(0) => Err(Failure::new(2, "--threads must be positive")),
        Some(t) => configure_threads(t).map_err(|e| Failure::new(2, e)),
        None => Ok(()),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(path, e))
}

fn emit<F>(out: Option<&Path>, write: F) -> Outcome
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write(&mut w).and_then(|_| w.flush()).map_err(|e| Failure::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w).map_err(|e| Failure::io(Path::new("<stdout>"), e))
        }
    }
}

pub fn bound(args: &BoundArgs) -> Outcome {
    check_p(args.p)?;
    let (graph, family) = load_pattern(&args.pattern)?;
    let profile = SubgraphProfile::compute(&graph, args.approx)?;
    let mut report = GraphBoundReport::from_profile(&profile, args.n, args.p)?;
    report.variance_exact = variance_exact(&graph, args.n, args.p).ok();
    let (bn, bd) = profile.beta();

    println!("pattern: v={} e={}", graph.vertex_count(), graph.edge_count());
    println!("profile: {}", if profile.is_exact() { "exact" } else { "approximate" });
    println!("n: {}", report.n);
    println!("p: {}", format_float(report.p));
    println!("variance_asymptotic: {}", format_float(report.variance_asymptotic));
    match report.variance_exact {
        Some(v) => println!("variance_exact: {}", format_float(v)),
        None => println!("variance_exact: unavailable"),
    }
    println!("min_subgraph: v={} e={}", report.min_subgraph.0, report.min_subgraph.1);
    println!("ln_min_term: {}", format_float(report.ln_min_term));
    println!("bound: {}", format_float(report.bound));
    println!("regime: {}", report.regime);
    println!("beta: {bn}/{bd} = {}", format_float(profile.beta_value()));
    if let Some(family) = family {
        let (regime, b) = closed_form_bound(family, args.n, args.p)?;
        println!("closed_form: {} regime {}", format_float(b), regime);
    }

    // p_k = p (n_k / n)^{-alpha}, so p_n = p at the requested size.
    let alpha = args.alpha.unwrap_or_else(|| if args.n > 1 { -args.p.ln() / (args.n as f64).ln() } else { 0.0 });
    let ns: Vec<usize> = VERDICT_SCALES.iter().map(|s| s * args.n).collect();
    let rule = PRule::Power {
        c: args.p * (args.n as f64).powf(alpha),
        alpha,
    };
    let verdict = asymptotic_normality_check(&profile, &ns, &rule)?;
    println!(
        "normality: {} along p = c n^-{} (alpha threshold {}; n p^beta diverges: {}; n^2 (1-p) diverges: {})",
        if verdict.normal { "normal" } else { "not normal" },
        format_float(alpha),
        format_float(verdict.alpha_threshold),
        verdict.np_beta_diverges,
        verdict.n2_complement_diverges
    );
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Outcome {
    check_p(args.p)?;
    set_threads(args.threads)?;
    let (graph, _) = load_pattern(&args.pattern)?;
    let config = SampleConfig::new(&graph, args.n, args.p, args.reps, args.seed);
    let counts = simulate_counts(&graph, &config)?;
    let mode = default_moment_mode(&graph, args.n, args.p);
    let std = standardize_counts(&counts, &graph, args.n, args.p, mode)?;
    let dk = empirical_dk(&std.values)?;
    emit(args.out.as_deref(), |w| write_simulate_csv(w, &counts, &std.values))?;
    if let Some(path) = &args.plot {
        let data = args.out.as_deref().unwrap_or(Path::new("-"));
        let mut w = create(path)?;
        plot::simulate_script(&mut w, data)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::io(path, e))?;
    }
    let summary = format!(
        "counter {} moments {} mean {} sd {} dk_hat {} dkw_radius {}",
        config.counter.name(),
        mode.name(),
        format_float(std.mean),
        format_float(std.sd),
        format_float(dk.dk_hat),
        format_float(dk.dkw_radius)
    );
    // Keep stdout a clean CSV when it carries the table.
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

pub fn scaling(args: &ScalingArgs) -> Outcome {
    if !(args.p > 0.0) {
        return Err(Failure::new(2, format!("--p (the prefactor c) must be positive, got {}", args.p)));
    }
    set_threads(args.threads)?;
    let (graph, _) = load_pattern(&args.pattern)?;
    let config = ScalingConfig {
        alpha: args.alpha,
        c: args.p,
        n_list: args.n_list.clone(),
        reps: args.reps,
        seed: args.seed,
        counter: None,
    };
    let study = scaling_study(&graph, &config)?;
    emit(args.out.as_deref(), |w| write_scaling_csv(w, &study))?;
    if let Some(path) = &args.plot {
        let data = args.out.as_deref().unwrap_or(Path::new("-"));
        let mut w = create(path)?;
        plot::scaling_script(&mut w, data, &study)
            .and_then(|_| w.flush())
            .map_err(|e| Failure::io(path, e))?;
    }
    let summary = format!(
        "fitted_slope {} predicted_slope {}",
        format_float(study.fitted_slope),
        format_float(study.predicted_slope)
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let suite = Suite::parse(&args.suite)?;
    if args.n > VERIFY_MAX_M {
        return Err(Failure::new(2, format!("--n (m) must be at most {VERIFY_MAX_M}, got {}", args.n)));
    }
    check_p(args.p)?;
    set_threads(args.threads)?;
    let config = VerifyConfig {
        m: args.n,
        p: args.p,
        seed: args.seed,
        trials: args.reps,
    };
    let report = run_suite(suite, &config)?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(1, format!("suite {} failed", suite.name())))
    }
}

pub fn decompose(args: &DecomposeArgs) -> Outcome {
    check_p(args.p)?;
    let (graph, _) = load_pattern(&args.pattern)?;
    let m = EdgeIndexing::new(args.n).len();
    // Validates the cap before any enumeration.
    let space = OutcomeSpace::with_cap(m, args.p, args.max_m)?;
    let chaos = subgraph_count_kernels(&graph, args.n, args.p)?;
    let target = standardized_count_functional(&graph, args.n, args.p, args.max_m)?;
    let residual = chaos.evaluate(space)?.sup_distance(&target)?;

    let stdout = io::stdout();
    let mut w = stdout.lock();
    let io_err = |e| Failure::io(Path::new("<stdout>"), e);
    writeln!(w, "0 {}", format_float(chaos.constant())).map_err(io_err)?;
    for kernel in chaos.kernels() {
        for line in kernel.dump_lines() {
            writeln!(w, "{line}").map_err(io_err)?;
        }
    }
    writeln!(w, "residual {}", format_float(residual)).map_err(io_err)?;
    Ok(())
}
