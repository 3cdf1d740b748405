use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use randrk::harness::{
    adversarial_demo, as_rate_check, error_constants, level_seed, quadrature_bias, quadrature_lp_error, ConstantInputs,
    ReseedEvent,
};
use randrk::report::{emit_plot, write_csv};
use randrk::rng::mix_seed;
use randrk::{
    fit_order, run_convergence, solve, ConvergenceRow, ConvergenceTable, Error, ExperimentConfig, Method, Problem,
    RandomStream, TimeGrid,
};

#[derive(Parser, Debug)]
#[command(
    name = "randrk",
    version,
    about = "Randomized quadrature and Runge-Kutta experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Randomized Riemann sum of the problem's time coefficient
    Quad(Opts),
    /// One sample path at step size --h
    Solve(Opts),
    /// Monte Carlo L^p errors on h = 2^-n, n = n-min..=n-max, and the fitted order
    Converge(Opts),
    /// Pathwise check of error <= h^(exponent - margin) on coupled paths
    AsCheck {
        #[command(flatten)]
        opts: Opts,
        #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
        exponent: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        margin: f64,
    },
    /// Classical versus randomized Euler on the grid-node indicator
    Adversarial(Opts),
    /// Closed-form error constants of the selected problem
    Constants(Opts),
    /// Log-log plot of a convergence CSV
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Output file; defaults to the input with extension .svg
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum ProblemName {
    Singular,
    Jump,
    SingularLip,
    Manufactured,
    Adversarial,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    #[arg(long, value_enum, default_value = "jump")]
    problem: ProblemName,
    /// Singularity exponent (singular, default 2) or Hölder exponent (manufactured, default 0.5)
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    lambda: f64,
    #[arg(long = "T", default_value_t = 1.0, allow_negative_numbers = true)]
    final_time: f64,
    /// euler, rand-euler or rand-rk2
    #[arg(long, default_value = "rand-euler")]
    method: Method,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    p: f64,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 3)]
    n_min: u32,
    #[arg(long, default_value_t = 10)]
    n_max: u32,
    #[arg(long, allow_negative_numbers = true)]
    h: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads; 0 uses all cores
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Moment-inequality constant C_p
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    cp: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_usage() { 2 } else { 3 };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn flag(name: &'static str) -> impl Fn(Error) -> Failure {
    move |e| {
        if e.is_usage() {
            Failure::usage(format!("invalid {name}: {e}"))
        } else {
            e.into()
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

impl Opts {
    fn step(&self) -> f64 {
        self.h.unwrap_or(1.0 / 16.0)
    }

    fn samples(&self) -> usize {
        self.samples.unwrap_or(1000)
    }

    fn check(&self) -> Outcome {
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            return Err(Failure::usage(format!(
                "invalid --T: must be positive and finite, got {}",
                self.final_time
            )));
        }
        if let Some(h) = self.h {
            if !(h > 0.0 && h < 1.0) {
                return Err(Failure::usage(format!("invalid --h: must lie in (0, 1), got {h}")));
            }
        }
        if !(self.p.is_finite() && self.p >= 2.0) {
            return Err(Failure::usage(format!(
                "invalid --p: must be a finite number >= 2, got {}",
                self.p
            )));
        }
        if self.samples() < 2 {
            return Err(Failure::usage(format!(
                "invalid --samples: need at least 2, got {}",
                self.samples()
            )));
        }
        if self.n_min == 0 || self.n_min >= self.n_max || self.n_max > 30 {
            return Err(Failure::usage(format!(
                "invalid --n-min/--n-max: need 1 <= n-min < n-max <= 30, got {} and {}",
                self.n_min, self.n_max
            )));
        }
        if !(self.cp.is_finite() && self.cp > 0.0) {
            return Err(Failure::usage(format!(
                "invalid --cp: must be positive, got {}",
                self.cp
            )));
        }
        Ok(())
    }

    fn problem(&self) -> Outcome<Problem> {
        let t = self.final_time;
        match self.problem {
            ProblemName::Singular => Problem::singular_time(self.gamma.unwrap_or(2.0), t).map_err(flag("--gamma")),
            ProblemName::Jump => Problem::jump_linear(t).map_err(flag("--T")),
            ProblemName::SingularLip => Problem::singular_lipschitz(self.alpha, t).map_err(flag("--alpha")),
            ProblemName::Manufactured => {
                if !self.lambda.is_finite() {
                    return Err(Failure::usage(format!(
                        "invalid --lambda: must be finite, got {}",
                        self.lambda
                    )));
                }
                Problem::manufactured_hoelder(self.gamma.unwrap_or(0.5), self.lambda, t).map_err(flag("--gamma"))
            }
            ProblemName::Adversarial => {
                let grid = TimeGrid::new(t, self.step()).map_err(flag("--h"))?;
                Problem::adversarial_indicator(grid).map_err(flag("--h"))
            }
        }
    }

    fn config(&self) -> Outcome<ExperimentConfig> {
        let config = ExperimentConfig::new(self.problem()?, self.method)
            .with_p(self.p)
            .with_samples(self.samples())
            .with_levels(self.n_min, self.n_max)
            .with_seed(self.seed)
            .with_threads(self.threads);
        config.validate()?;
        Ok(config)
    }
}

fn log_reseeds(events: &[ReseedEvent]) {
    for e in events {
        eprintln!(
            "reseed: sample {} at h = {:e}, attempt {}, t = {}",
            e.sample, e.h, e.attempt, e.t
        );
    }
}

fn print_table(table: &ConvergenceTable) {
    println!("problem  {}", table.problem);
    println!(
        "method   {}  p = {}  seed = {}",
        table.method, table.p, table.master_seed
    );
    println!(
        "{:>4} {:>12} {:>14} {:>12} {:>8}",
        "n", "h", "error", "stderr", "samples"
    );
    for row in &table.rows {
        println!(
            "{:>4} {:>12.6e} {:>14.6e} {:>12.3e} {:>8}",
            row.level(),
            row.h,
            row.error,
            row.std_error(),
            row.samples
        );
    }
}

fn print_slope(table: &ConvergenceTable) {
    match fit_order(table) {
        Ok(fit) => println!("fitted order {:.4} (r^2 = {:.4})", fit.slope, fit.r_squared),
        Err(e) => println!("fitted order unavailable: {e}"),
    }
}

fn quad(opts: &Opts) -> Outcome {
    let problem = opts.problem()?;
    let g = problem.coefficient();
    let samples = opts.samples();
    let mut rows = Vec::new();
    let mut reseeds = Vec::new();
    for n in opts.n_min..=opts.n_max {
        let h = (-(n as f64)).exp2();
        let grid = TimeGrid::new(opts.final_time, h).map_err(flag("--n-min"))?;
        let est = quadrature_lp_error(
            g,
            |t, out: &mut [f64]| out[0] = g.integral(t),
            &grid,
            opts.p,
            samples,
            level_seed(opts.seed, h),
            opts.threads,
        )?;
        log_reseeds(&est.reseeds);
        reseeds.extend(est.reseeds);
        rows.push(ConvergenceRow {
            h,
            error: est.error,
            sample_std: est.sample_std,
            samples: est.samples,
        });
    }
    let table = ConvergenceTable {
        problem: format!("quad:{}", problem.label()),
        method: Method::RandEuler,
        p: opts.p,
        master_seed: opts.seed,
        rows,
        reseeds,
    };
    println!("integrand {}", g.describe());
    print_table(&table);
    print_slope(&table);

    let h = opts.h.unwrap_or((-(opts.n_max as f64)).exp2());
    let grid = TimeGrid::new(opts.final_time, h).map_err(flag("--h"))?;
    let bias = quadrature_bias(
        g,
        |t| g.integral(t),
        &grid,
        samples,
        level_seed(opts.seed, h),
        opts.threads,
    )?;
    log_reseeds(&bias.reseeds);
    println!(
        "bias at h = {h:e}: exact {:.12e}, mean deviation {:.3e}, std {:.3e}, z = {:.3}",
        bias.exact,
        bias.mean_deviation,
        bias.sample_std,
        bias.z_score()
    );
    if let Some(out) = &opts.out {
        write_csv(&[&table], out)?;
    }
    Ok(())
}

fn solve_path(opts: &Opts) -> Outcome {
    const MAX_RESEEDS: u64 = 3;
    let problem = opts.problem()?;
    let h = opts.h.unwrap_or(1.0 / 256.0);
    let grid = TimeGrid::new(problem.final_time(), h).map_err(flag("--h"))?;
    let mut attempt = 0;
    let traj = loop {
        let seed = if attempt == 0 {
            opts.seed
        } else {
            mix_seed(opts.seed, attempt)
        };
        let mut stream = RandomStream::derive(seed, 0);
        let stream = opts.method.is_randomized().then_some(&mut stream);
        match solve(problem.field(), problem.u0(), &grid, opts.method, stream) {
            Ok(traj) => break traj,
            Err(Error::Eval { t, .. }) if opts.method.is_randomized() && attempt < MAX_RESEEDS => {
                attempt += 1;
                eprintln!("reseed: sample 0 at h = {h:e}, attempt {attempt}, t = {t}");
            }
            Err(e) => {
                return Err(Error::Sample {
                    sample: 0,
                    h,
                    source: Box::new(e),
                }
                .into())
            }
        }
    };
    println!("problem  {}", problem.label());
    println!("method   {}  h = {h:e}  steps = {}", opts.method, grid.n_steps());
    let t_end = grid.node(grid.n_steps());
    println!("U(t_N) = {:?} at t_N = {t_end}", traj.last());
    if problem.has_exact() {
        let exact = problem.exact(t_end);
        let err = randrk::path_error_max(&traj, |t, out: &mut [f64]| problem.exact_into(t, out));
        println!("u(t_N) = {:?}", exact.as_slice());
        println!("max path error {err:e}");
    }
    if let Some(out) = &opts.out {
        let mut text = String::from("j,t");
        for i in 0..problem.dim() {
            let _ = write!(text, ",u{i}");
        }
        if problem.has_exact() {
            for i in 0..problem.dim() {
                let _ = write!(text, ",exact{i}");
            }
        }
        text.push('\n');
        let mut exact = vec![0.0; problem.dim()];
        for j in 0..=grid.n_steps() {
            let t = grid.node(j);
            let _ = write!(text, "{j},{t:.16e}");
            for x in traj.state(j) {
                let _ = write!(text, ",{x:.16e}");
            }
            if problem.has_exact() {
                problem.exact_into(t, &mut exact);
                for x in &exact {
                    let _ = write!(text, ",{x:.16e}");
                }
            }
            text.push('\n');
        }
        fs::write(out, text).map_err(Error::from)?;
    }
    Ok(())
}

fn converge(opts: &Opts) -> Outcome {
    let table = run_convergence(&opts.config()?)?;
    log_reseeds(&table.reseeds);
    print_table(&table);
    print_slope(&table);
    if let Some(out) = &opts.out {
        write_csv(&[&table], out)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn as_check(opts: &Opts, exponent: f64, margin: f64) -> Outcome {
    if !exponent.is_finite() {
        return Err(Failure::usage(format!(
            "invalid --exponent: must be finite, got {exponent}"
        )));
    }
    if !(margin >= 0.0 && margin.is_finite()) {
        return Err(Failure::usage(format!(
            "invalid --margin: must be finite and >= 0, got {margin}"
        )));
    }
    let config = opts.config()?;
    let report = as_rate_check(&config, exponent, margin)?;
    log_reseeds(&report.reseeds);
    println!("problem  {}", config.problem.label());
    println!(
        "method   {}  paths = {}  threshold h^{}",
        config.method,
        report.paths(),
        exponent - margin
    );
    println!("{:>4} {:>12} {:>10}", "m", "h", "violating");
    for (m, frac) in report.levels.iter().zip(&report.violation_fraction) {
        println!("{m:>4} {:>12.6e} {frac:>10.4}", (-(*m as f64)).exp2());
    }
    println!("last violating level (paths):");
    for (level, count) in report.last_violation_histogram() {
        match level {
            Some(m) => println!("  m = {m}: {count}"),
            None => println!("  never: {count}"),
        }
    }
    if let Some(out) = &opts.out {
        let mut text = String::from("m,h,violation_fraction\n");
        for (m, frac) in report.levels.iter().zip(&report.violation_fraction) {
            let _ = writeln!(text, "{m},{:.16e},{frac:.16e}", (-(*m as f64)).exp2());
        }
        fs::write(out, text).map_err(Error::from)?;
    }
    Ok(())
}

fn adversarial(opts: &Opts) -> Outcome {
    let h = opts.step();
    let report = adversarial_demo(opts.final_time, h, opts.samples(), opts.seed, opts.threads).map_err(flag("--h"))?;
    log_reseeds(&report.collisions);
    println!("h = {h:e}, T = {}", opts.final_time);
    println!("classical error {:?}", report.classical_error);
    println!("randomized error {:?}", report.randomized_max_error);
    println!(
        "randomized paths with zero error: {} of {} ({} before re-seeding)",
        report.zero_after_reseed, report.samples, report.zero_first_attempt
    );
    Ok(())
}

fn constants(opts: &Opts) -> Outcome {
    let problem = opts.problem()?;
    let inputs = ConstantInputs::from_problem(&problem, opts.p, opts.cp)?;
    let report = error_constants(&inputs)?;
    let show = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6e}"));
    println!("problem  {}  p = {}  C_p = {}", problem.label(), opts.p, opts.cp);
    println!("sup |u| bound {:.6e}", inputs.sup_u);
    println!("C   {}", show(report.c));
    println!("C_U {}", show(report.c_u));
    println!("C_V {}", show(report.c_v));
    Ok(())
}

fn plot(input: &Path, out: Option<&Path>) -> Outcome {
    let out = out.map_or_else(|| input.with_extension("svg"), Path::to_path_buf);
    emit_plot(input, &out).map_err(|e| match e {
        Error::Io(io) => Failure {
            code: 3,
            message: format!("cannot write {}: {io}", out.display()),
        },
        other => other.into(),
    })?;
    let rows = randrk::report::read_csv(input)?;
    for s in randrk::report::series(&rows) {
        match s.slope {
            Some(k) => println!("{} {}: slope={k:.4}", s.problem, s.method),
            None => println!("{} {}: slope=n/a", s.problem, s.method),
        }
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match &cli.command {
        Command::Plot { input, out } => plot(input, out.as_deref()),
        Command::AsCheck { opts, exponent, margin } => {
            opts.check()?;
            as_check(opts, *exponent, *margin)
        }
        Command::Quad(o)
        | Command::Solve(o)
        | Command::Converge(o)
        | Command::Adversarial(o)
        | Command::Constants(o) => {
            o.check()?;
            match cli.command {
                Command::Quad(_) => quad(o),
                Command::Solve(_) => solve_path(o),
                Command::Converge(_) => converge(o),
                Command::Adversarial(_) => adversarial(o),
                _ => constants(o),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
