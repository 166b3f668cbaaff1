//! Mode orchestration and exit codes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver non-convergence,
//! 4 oracle failure.

use std::path::{Path, PathBuf};

use rbe_slab_core::collision::{
    coercivity_scan, continuity_check, eval_qplus, loss_field, moment_residuals, MomentumSlice,
};
use rbe_slab_core::norms::compute_norm_report;
use rbe_slab_core::steady::{compatibility_check, lower_envelope, solve};
use rbe_slab_core::Error;

use crate::config::RunConfig;
use crate::dump::{read_field, write_csv, write_field};
use crate::oracle::{closed_form_rows, monte_carlo_rows};
use crate::report::{write_report, Coercivity, RunReport, Timings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Solve,
    CheckBoundary,
    Norms,
    Oracle,
    Bench,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "solve" => Ok(Mode::Solve),
            "check-boundary" => Ok(Mode::CheckBoundary),
            "norms" => Ok(Mode::Norms),
            "oracle" => Ok(Mode::Oracle),
            "bench" => Ok(Mode::Bench),
            other => Err(format!(
                "unknown mode {other:?}; expected solve, check-boundary, norms, oracle, or bench"
            )),
        }
    }
}

/// Thread count resolution: command-line flag, then `RBE_SLAB_THREADS`,
/// then the config file; 0 at every level means "next source".
pub fn resolve_threads(flag: Option<usize>, cfg: &RunConfig) -> usize {
    if let Some(n) = flag {
        if n > 0 {
            return n;
        }
    }
    if let Ok(v) = std::env::var("RBE_SLAB_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                return n;
            }
        }
    }
    cfg.threads
}

pub fn init_thread_pool(n: usize) {
    if n > 0 {
        // ignore the error when a global pool already exists (tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub struct RunArgs {
    pub mode: Mode,
    pub config: RunConfig,
    pub out: PathBuf,
}

/// Runs one mode end to end and returns the process exit code.
pub fn run(args: &RunArgs) -> i32 {
    match run_inner(args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_CONFIG
        }
    }
}

fn run_inner(args: &RunArgs) -> Result<i32, String> {
    std::fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    match args.mode {
        Mode::Solve => run_solve(&args.config, &args.out),
        Mode::CheckBoundary => run_check_boundary(&args.config, &args.out),
        Mode::Norms => run_norms(&args.config, &args.out),
        Mode::Oracle => run_oracle(&args.config, &args.out),
        Mode::Bench => run_bench(&args.config, &args.out),
    }
}

fn run_solve(cfg: &RunConfig, out: &Path) -> Result<i32, String> {
    let mut timings = Timings::default();
    let grid = cfg.grid()?;
    let squad = cfg.sphere_quadrature()?;
    let kernel = cfg.kernel()?;
    let bp = cfg.boundary(&grid.quad)?;
    let mut report = RunReport::new("solve", cfg.clone());

    report.compatibility = Some(compatibility_check(&bp, &grid.quad));
    let (lo_l, lo_r) = bp.loss_floor(&grid.quad, &kernel);
    report.boundary_loss_floor = Some([lo_l, lo_r]);

    let solved = timings.time("solve", || solve(&grid, &squad, &kernel, &bp, &cfg.solver_config()));
    let (field, trace) = match solved {
        Ok(ok) => ok,
        Err(Error::NonConvergence { max_iter, residual }) => {
            report.error = Some(format!(
                "no convergence after {max_iter} iterations, residual {residual:e}"
            ));
            write_report(&out.join("report.json"), &report)?;
            timings.write(&out.join("timings.json"))?;
            return Ok(EXIT_NO_CONVERGENCE);
        }
        Err(e) => return Err(e.to_string()),
    };
    report.trace = Some(trace);

    write_field(&out.join("field.bin"), &grid, &field)?;
    if cfg.csv {
        write_csv(&out.join("field.csv"), &grid, &field)?;
    }

    let (c_l_hat, c_u_hat) =
        timings.time("coercivity", || coercivity_scan(&field, &grid, &kernel))
            .map_err(|e| e.to_string())?;
    report.coercivity = Some(Coercivity { c_l_hat, c_u_hat });

    let env = lower_envelope(&bp, &grid, cfg.c1);
    report.continuity =
        Some(timings.time("continuity", || continuity_check(&field, &env, &grid, &kernel, cfg.k)));

    report.norms = Some(
        timings
            .time("norms", || {
                compute_norm_report(&field, &grid, &squad, &kernel, cfg.k, &cfg.k_list, cfg.n_normals)
            })
            .map_err(|e| e.to_string())?,
    );

    let mid = field.n_x / 2;
    let slice: Vec<f64> = (0..field.n_p).map(|ip| field.get(mid, ip)).collect();
    report.moment_residuals = Some(timings.time("moments", || {
        moment_residuals(&MomentumSlice::new(&slice), &grid.quad, &squad, &kernel)
    }));

    write_report(&out.join("report.json"), &report)?;
    timings.write(&out.join("timings.json"))?;
    Ok(EXIT_OK)
}

fn run_check_boundary(cfg: &RunConfig, out: &Path) -> Result<i32, String> {
    let grid = cfg.grid()?;
    let kernel = cfg.kernel()?;
    let bp = cfg.boundary(&grid.quad)?;
    let mut report = RunReport::new("check-boundary", cfg.clone());

    report.compatibility = Some(compatibility_check(&bp, &grid.quad));
    let (lo_l, lo_r) = bp.loss_floor(&grid.quad, &kernel);
    report.boundary_loss_floor = Some([lo_l, lo_r]);

    // the boundary data define an admissible problem when the loss floor is
    // positive and the envelope built from them has finite norms
    let env = lower_envelope(&bp, &grid, cfg.c1);
    let squad = cfg.sphere_quadrature()?;
    let norms = compute_norm_report(&env, &grid, &squad, &kernel, cfg.k, &cfg.k_list, cfg.n_normals)
        .map_err(|e| e.to_string())?;
    let finite = norms.norm_main.is_finite()
        && norms.norm_inv.is_finite()
        && norms.norm_hyp.is_finite();
    report.norms = Some(norms);

    write_report(&out.join("report.json"), &report)?;
    if lo_l > 0.0 && lo_r > 0.0 && finite {
        Ok(EXIT_OK)
    } else {
        eprintln!("boundary check failed: loss floor ({lo_l:e}, {lo_r:e}), finite: {finite}");
        Ok(EXIT_CONFIG)
    }
}

fn run_norms(cfg: &RunConfig, out: &Path) -> Result<i32, String> {
    let grid = cfg.grid()?;
    let squad = cfg.sphere_quadrature()?;
    let kernel = cfg.kernel()?;
    let (header, field) = read_field(&out.join("field.bin"))?;
    let matches = header.n_x as usize == cfg.n_x
        && header.n_radial as usize == cfg.n_radial
        && header.n_polar as usize == cfg.n_polar
        && header.n_azimuth as usize == cfg.n_azimuth
        && header.pmax == cfg.pmax;
    if !matches {
        eprintln!("error: field.bin grid {header:?} does not match the configuration");
        return Ok(EXIT_CONFIG);
    }
    let mut report = RunReport::new("norms", cfg.clone());
    report.norms = Some(
        compute_norm_report(&field, &grid, &squad, &kernel, cfg.k, &cfg.k_list, cfg.n_normals)
            .map_err(|e| e.to_string())?,
    );
    write_report(&out.join("report.json"), &report)?;
    Ok(EXIT_OK)
}

fn run_oracle(cfg: &RunConfig, out: &Path) -> Result<i32, String> {
    let quad = cfg.momentum_quadrature()?;
    let squad = cfg.sphere_quadrature()?;
    let kernel = cfg.kernel()?;
    let mut rows = closed_form_rows();
    rows.extend(monte_carlo_rows(&quad, &squad, &kernel, cfg.n_mc, cfg.seed));
    let all_pass = rows.iter().all(|r| r.pass);
    for r in &rows {
        println!(
            "{:<42} value {:>18.12e}  reference {:>18.12e}  tol {:.3e}  {}",
            r.name,
            r.value,
            r.reference,
            r.tol,
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    let mut report = RunReport::new("oracle", cfg.clone());
    report.oracle = Some(rows);
    write_report(&out.join("report.json"), &report)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_ORACLE })
}

fn run_bench(cfg: &RunConfig, out: &Path) -> Result<i32, String> {
    let grid = cfg.grid()?;
    let squad = cfg.sphere_quadrature()?;
    let kernel = cfg.kernel()?;
    let bp = cfg.boundary(&grid.quad)?;
    let field = lower_envelope(&bp, &grid, cfg.c1);
    let mut timings = Timings::default();

    timings.time("loss_field", || loss_field(&field, &grid, &kernel));
    let slice: Vec<f64> = (0..field.n_p).map(|ip| field.get(0, ip)).collect();
    let ms = MomentumSlice::new(&slice);
    let probe = &grid.quad.nodes[field.n_p / 2];
    timings.time("eval_qplus (one momentum, one slice)", || {
        eval_qplus(&ms, &ms, probe, &grid.quad, &squad, &kernel)
    });
    let _ = timings.time("norm report", || {
        compute_norm_report(&field, &grid, &squad, &kernel, cfg.k, &cfg.k_list, cfg.n_normals)
    });

    for (name, secs) in &timings.phases {
        println!("{name:<40} {secs:>10.3} s");
    }
    timings.write(&out.join("timings.json"))?;
    Ok(EXIT_OK)
}
