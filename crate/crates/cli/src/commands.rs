use std::fs;
use std::io::{self, Write};
use std::path::Path;

use ehcap_core::capacity::fixed_sleep_rate;
use ehcap_core::policy::SymbolLaw;
use ehcap_core::sim::{self, SimReport};
use ehcap_core::{
    awgn_capacity, budget, hu_capacity, hus_budget, pe_capacity, peak_average_capacity, rate_table,
    AwgnChannel, Backoff, BudgetFamily, BudgetInputs, BufferConfig, HarvestModel, Policy, RateQuery,
    SolverOptions,
};
use rayon::prelude::*;

use crate::format::{Cell, Table};
use crate::spec::{parse_harvest, Sweep, SweepVar};
use crate::{
    ArchitecturesArgs, CapacityArgs, Cli, CliError, Command, Mode, OutputArgs, PolicyKind, SimulateArgs,
};

const SLEEP_COMPARE_SWEEP: &str = "ey:0.1:10:25:log";
const SLEEP_COMPARE_FIXED: f64 = 0.25;

/// A command's CSV plus what a plot script needs to draw it.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub table: Table,
    /// Columns drawn against column 0.
    pub plot_columns: Vec<usize>,
    pub log_x: bool,
    pub y_label: String,
}

/// Parameters of one evaluation.
#[derive(Clone, Debug)]
struct Point {
    harvest: HarvestModel,
    ez: f64,
    sigma2: f64,
    gamma: Option<f64>,
    beta1: f64,
    beta2: f64,
}

impl Point {
    fn ey(&self) -> f64 {
        self.harvest.mean()
    }

    fn with_mean(harvest: &HarvestModel, ey: f64) -> Result<HarvestModel, CliError> {
        let mean = harvest.mean();
        if !(ey >= 0.0 && ey.is_finite()) {
            return Err(CliError::Spec(format!("mean harvest {ey} must be finite and >= 0")));
        }
        if mean == 0.0 {
            return Err(CliError::Spec("cannot rescale a harvest with mean 0".into()));
        }
        Ok(harvest.scaled(ey / mean)?)
    }

    fn set(&self, var: SweepVar, v: f64) -> Result<Point, CliError> {
        let mut p = self.clone();
        match var {
            SweepVar::Ey => p.harvest = Self::with_mean(&self.harvest, v)?,
            SweepVar::Ez => p.ez = v,
            SweepVar::Sigma2 => p.sigma2 = v,
            SweepVar::Gamma => p.gamma = Some(v),
            SweepVar::Beta1 => p.beta1 = v,
            SweepVar::Beta2 => p.beta2 = v,
        }
        Ok(p)
    }

    fn get(&self, var: SweepVar) -> f64 {
        match var {
            SweepVar::Ey => self.ey(),
            SweepVar::Ez => self.ez,
            SweepVar::Sigma2 => self.sigma2,
            SweepVar::Gamma => self.gamma.unwrap_or(f64::INFINITY),
            SweepVar::Beta1 => self.beta1,
            SweepVar::Beta2 => self.beta2,
        }
    }

    fn channel(&self) -> Result<AwgnChannel, CliError> {
        Ok(AwgnChannel::new(self.sigma2)?)
    }
}

fn solver_options(grid_points: usize) -> Result<SolverOptions, CliError> {
    if grid_points < 3 {
        return Err(CliError::Spec("--grid-points must be at least 3".into()));
    }
    Ok(SolverOptions { grid_points, ..SolverOptions::default() })
}

/// Rates and certificate gap in nats.
struct Row {
    rates: Vec<f64>,
    p_sleep: f64,
    gap: f64,
}

impl Row {
    fn closed_form(rate: f64) -> Self {
        Row { rates: vec![rate], p_sleep: 0.0, gap: 0.0 }
    }
}

fn evaluate(mode: Mode, p: &Point, no_sleep: bool, opts: &SolverOptions) -> Result<Row, CliError> {
    let ch = p.channel()?;
    let ey = p.ey();
    Ok(match mode {
        Mode::Ideal => Row::closed_form(awgn_capacity(ey, &ch)),
        Mode::Hu => {
            let r = hu_capacity(&p.harvest, &ch, opts)?;
            let sleep = r.per_value.iter().map(|s| s.prob * s.result.sleep_probability()).sum();
            Row { rates: vec![r.rate], p_sleep: sleep, gap: r.certificate_gap() }
        }
        Mode::Pe => {
            let r = pe_capacity(ey, p.ez, &ch, !no_sleep, opts)?;
            Row { rates: vec![r.rate], p_sleep: r.sleep_probability(), gap: r.certificate_gap }
        }
        Mode::Finite => {
            let gamma = p.gamma.ok_or_else(|| CliError::Spec("finite mode needs --gamma".into()))?;
            if !(gamma >= 0.0) {
                return Err(CliError::Spec(format!("buffer size {gamma} must be >= 0")));
            }
            let r = peak_average_capacity(gamma.sqrt(), ey, &ch, opts)?;
            Row { rates: vec![r.rate], p_sleep: r.sleep_probability(), gap: r.certificate_gap }
        }
        Mode::Hsu => {
            Row::closed_form(rate_table(&RateQuery::Hsu { ey, beta1: p.beta1, beta2: p.beta2 }, &ch, opts)?)
        }
        Mode::Hus => {
            let q = RateQuery::Hus { model: &p.harvest, beta1: p.beta1, beta2: p.beta2 };
            Row::closed_form(rate_table(&q, &ch, opts)?)
        }
        Mode::SleepCompare => {
            let never = pe_capacity(ey, p.ez, &ch, false, opts)?.rate;
            let fixed = fixed_sleep_rate(ey, p.ez, SLEEP_COMPARE_FIXED, &ch)?;
            let best = pe_capacity(ey, p.ez, &ch, true, opts)?;
            Row {
                rates: vec![never, fixed, best.rate],
                p_sleep: best.sleep_probability(),
                gap: best.certificate_gap,
            }
        }
    })
}

pub fn capacity(args: &CapacityArgs) -> Result<Output, CliError> {
    let opts = solver_options(args.grid_points)?;
    let mut harvest = parse_harvest(&args.harvest)?;
    if let Some(ey) = args.ey {
        harvest = Point::with_mean(&harvest, ey)?;
    }
    let base = Point {
        harvest,
        ez: args.ez,
        sigma2: args.output.sigma2,
        gamma: args.gamma,
        beta1: args.beta1,
        beta2: args.beta2,
    };
    let sweep = match (&args.sweep, args.mode) {
        (Some(s), _) => Some(s.parse::<Sweep>()?),
        (None, Mode::SleepCompare) => Some(SLEEP_COMPARE_SWEEP.parse::<Sweep>()?),
        (None, _) => None,
    };
    let var = sweep.as_ref().map_or(SweepVar::Ey, |s| s.var);
    let points: Vec<Point> = match &sweep {
        Some(s) => s.points().into_iter().map(|v| base.set(s.var, v)).collect::<Result<_, _>>()?,
        None => vec![base],
    };
    let rows = points
        .par_iter()
        .map(|p| evaluate(args.mode, p, args.no_sleep, &opts))
        .collect::<Result<Vec<_>, _>>()?;

    let unit = args.output.unit;
    let header = match args.mode {
        Mode::SleepCompare => {
            vec![var.name(), "rate_p0", "rate_p025", "rate_opt", "p_opt", "certificate_gap"]
        }
        _ => vec![var.name(), "rate", "p_sleep", "certificate_gap"],
    };
    let mut table = Table::new(&header);
    let mut rate_cols = 0;
    for (p, row) in points.iter().zip(rows) {
        rate_cols = row.rates.len();
        let mut cells = vec![Cell::Num(p.get(var))];
        cells.extend(row.rates.iter().map(|r| Cell::Num(unit.convert(*r))));
        cells.push(Cell::Num(row.p_sleep));
        cells.push(Cell::Num(unit.convert(row.gap)));
        table.push(cells);
    }
    Ok(Output {
        table,
        plot_columns: (1..=rate_cols).collect(),
        log_x: sweep.is_some_and(|s| s.log),
        y_label: format!("rate ({})", unit_name(unit)),
    })
}

fn unit_name(unit: crate::Unit) -> &'static str {
    match unit {
        crate::Unit::Nats => "nats",
        crate::Unit::Bits => "bits",
    }
}

pub fn architectures(args: &ArchitecturesArgs) -> Result<Output, CliError> {
    let opts = solver_options(args.grid_points)?;
    let harvest = parse_harvest(&args.harvest)?;
    let sweep: Sweep = args.sweep.parse()?;
    if sweep.var != SweepVar::Beta1 {
        return Err(CliError::Spec("the architectures sweep must be over beta1".into()));
    }
    let ch = AwgnChannel::new(args.output.sigma2)?;
    let ey = harvest.mean();
    // The harvest-use rate does not involve the buffer at all.
    let hu = hu_capacity(&harvest, &ch, &opts)?.rate;
    let rows = sweep
        .points()
        .into_par_iter()
        .map(|b1| -> Result<[f64; 4], CliError> {
            let hsu = rate_table(&RateQuery::Hsu { ey, beta1: b1, beta2: args.beta2 }, &ch, &opts)?;
            let hus =
                rate_table(&RateQuery::Hus { model: &harvest, beta1: b1, beta2: args.beta2 }, &ch, &opts)?;
            Ok([b1, hu, hsu, hus])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let unit = args.output.unit;
    let mut table = Table::new(&["beta1", "r_hu", "r_hsu", "r_hus"]);
    for [b1, hu, hsu, hus] in rows {
        table.push(vec![
            Cell::Num(b1),
            Cell::Num(unit.convert(hu)),
            Cell::Num(unit.convert(hsu)),
            Cell::Num(unit.convert(hus)),
        ]);
    }
    Ok(Output {
        table,
        plot_columns: vec![1, 2, 3],
        log_x: sweep.log,
        y_label: format!("rate ({})", unit_name(unit)),
    })
}

fn sustainable_budget(args: &SimulateArgs, harvest: &HarvestModel) -> Result<f64, CliError> {
    let inputs =
        BudgetInputs { ey: harvest.mean(), ez: args.ez, beta1: args.beta1, beta2: args.beta2, c: 0.0 };
    let eps = Backoff::default();
    Ok(match args.arch {
        crate::Architecture::Hsu => budget(BudgetFamily::Hsu, inputs, eps),
        crate::Architecture::Hu => budget(BudgetFamily::Ideal, inputs, eps),
        crate::Architecture::Hus => {
            let c = hus_budget(harvest, args.beta1, args.beta2)?;
            budget(BudgetFamily::Hus, BudgetInputs { c, ..inputs }, eps)
        }
    })
}

fn build_policy(args: &SimulateArgs, harvest: &HarvestModel, ch: &AwgnChannel) -> Result<Policy, CliError> {
    let power = match args.power {
        Some(p) => p,
        None => sustainable_budget(args, harvest)?,
    };
    Ok(match args.policy {
        PolicyKind::Truncated => Policy::truncated_gaussian(power)?,
        PolicyKind::Budgeted => Policy::budgeted_gaussian(power)?,
        PolicyKind::Peak => Policy::HarvestPeak,
        PolicyKind::HarvestUse => {
            let solved = hu_capacity(harvest, ch, &SolverOptions::default())?;
            Policy::HarvestUse {
                laws: solved.per_value.into_iter().map(|s| (s.harvest, s.result.dist)).collect(),
            }
        }
        PolicyKind::SleepWake => {
            let variance = match args.power {
                Some(p) => p,
                None if args.sleep_p < 1.0 => (power / (1.0 - args.sleep_p) - args.ez).max(0.0),
                None => 0.0,
            };
            Policy::sleep_wake(
                args.sleep_p,
                SymbolLaw::Gaussian { variance },
                HarvestModel::constant(args.ez)?,
            )?
        }
        PolicyKind::Silent => Policy::always_sleep(),
    })
}

/// The trace, and a one-row summary.
pub fn simulate(args: &SimulateArgs) -> Result<(Output, Table, SimReport), CliError> {
    let harvest = parse_harvest(&args.harvest)?;
    let ch = AwgnChannel::new(args.output.sigma2)?;
    let arch = match args.arch {
        crate::Architecture::Hsu => ehcap_core::Architecture::Hsu,
        crate::Architecture::Hu => ehcap_core::Architecture::Hu,
        crate::Architecture::Hus => ehcap_core::Architecture::Hus,
    };
    let cfg = BufferConfig::new(arch, args.beta1, args.beta2, args.gamma)?;
    let policy = build_policy(args, &harvest, &ch)?;
    if args.n == 0 {
        return Err(CliError::Spec("--n must be at least 1".into()));
    }
    let trace = sim::run(&harvest, &cfg, &policy, &ch, args.n, args.seed)?;
    let report = sim::report(&trace, &ch, args.bins)?;

    let mut table = Table::new(&["k", "e", "y", "t", "x", "w", "slept", "truncated"]);
    for k in 0..trace.len() {
        table.push(vec![
            Cell::Int(k as u64),
            Cell::Num(trace.e[k]),
            Cell::Num(trace.y[k]),
            Cell::Num(trace.t[k]),
            Cell::Num(trace.x[k]),
            Cell::Num(trace.w[k]),
            Cell::Bool(trace.slept[k]),
            Cell::Bool(trace.truncated[k]),
        ]);
    }
    let mut summary = Table::new(&[
        "n",
        "mean_t",
        "mean_y",
        "drift",
        "truncation_rate",
        "sleep_rate",
        "empirical_rate",
        "feasible",
    ]);
    summary.push(vec![
        Cell::Int(args.n as u64),
        Cell::Num(report.mean_t),
        Cell::Num(report.mean_y),
        Cell::Num(report.drift),
        Cell::Num(report.truncation_rate),
        Cell::Num(report.sleep_rate),
        Cell::Num(args.output.unit.convert(report.empirical_rate)),
        Cell::Bool(report.feasible),
    ]);
    let output = Output { table, plot_columns: vec![1], log_x: false, y_label: "buffer energy".into() };
    Ok((output, summary, report))
}

fn gnuplot_script(output: &Output, csv: &Path) -> String {
    let path = csv.display().to_string().replace('\'', "''");
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str(&format!("set xlabel '{}'\n", output.table.header[0]));
    s.push_str(&format!("set ylabel '{}'\n", output.y_label));
    if output.log_x {
        s.push_str("set logscale x\n");
    }
    let curves: Vec<String> = output
        .plot_columns
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let file = if i == 0 { format!("'{path}'") } else { "''".to_string() };
            format!("{file} using 1:{} with linespoints", c + 1)
        })
        .collect();
    s.push_str(&format!("plot {}\n", curves.join(", \\\n     ")));
    s
}

fn emit(output: &Output, args: &OutputArgs) -> Result<(), CliError> {
    if args.plot.is_some() && args.out.is_none() {
        return Err(CliError::Spec("--plot needs --out so the script can refer to the CSV".into()));
    }
    output.table.emit(args.out.as_deref())?;
    if let (Some(plot), Some(out)) = (&args.plot, &args.out) {
        fs::write(plot, gnuplot_script(output, out))?;
    }
    Ok(())
}

/// Runs a parsed command line, writing its outputs.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Capacity(a) => emit(&capacity(a)?, &a.output),
        Command::Architectures(a) => emit(&architectures(a)?, &a.output),
        Command::Simulate(a) => {
            let (output, summary, report) = simulate(a)?;
            emit(&output, &a.output)?;
            match &a.summary {
                Some(p) => summary.emit(Some(p.as_path()))?,
                None => {
                    let mut err = io::stderr().lock();
                    summary.write_to(&mut err)?;
                    err.flush()?;
                }
            }
            if !report.feasible {
                return Err(CliError::Infeasible("a slot spent more than its available energy".into()));
            }
            Ok(())
        }
    }
}
