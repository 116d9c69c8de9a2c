use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use opseries::diffusion::{ball_series, heat_closed_form, heat_series};
use opseries::evolution::{detect_closed_form, solve_series, DEFAULT_ORDER};
use opseries::flow::{solve_flow, QuadratureSettings};
use opseries::funcalg::{laplacian_eigenvalue, to_display, Point};
use opseries::verify::{fd_residual_evolution, fd_residual_heat, fd_residual_heat_1d, Axis, VerifyError};
use opseries::{GridSpec, InverseLaplacianMode, ResidualReport, SeriesSolution, VectorField};

use crate::problem::{parse_problem, Problem, ProblemFileError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Problem(#[from] ProblemFileError),
    #[error("bad --sample spec `{0}`: expected `var:lo:hi:n` items separated by commas")]
    Sample(String),
    #[error("bad --query `{0}`: expected `x,y,z,t`")]
    Query(String),
    #[error("{0}")]
    Solver(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("writing output: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    /// Input problems exit with 2, solver failures with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) | CliError::Verify(_) => 1,
            _ => 2,
        }
    }
}

fn solver(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

/// One axis of a `--sample` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleAxis {
    pub var: usize,
    pub axis: Axis,
}

/// Parses `x:lo:hi:n,t:lo:hi:n`; unnamed variables stay at 0.
pub fn parse_sample(spec: &str) -> Result<Vec<SampleAxis>, CliError> {
    let bad = || CliError::Sample(spec.to_string());
    let mut out: Vec<SampleAxis> = Vec::new();
    for item in spec.split(',') {
        let fields: Vec<&str> = item.trim().split(':').collect();
        let [name, lo, hi, n] = fields.as_slice() else {
            return Err(bad());
        };
        let var = match *name {
            "x" | "r" => 0,
            "y" => 1,
            "z" => 2,
            "t" => 3,
            _ => return Err(bad()),
        };
        let lo: f64 = lo.parse().map_err(|_| bad())?;
        let hi: f64 = hi.parse().map_err(|_| bad())?;
        let n: usize = n.parse().map_err(|_| bad())?;
        if n == 0 || hi < lo || out.iter().any(|a| a.var == var) {
            return Err(bad());
        }
        out.push(SampleAxis {
            var,
            axis: Axis::new(lo, hi, n),
        });
    }
    Ok(out)
}

/// Tensor-product points of the sample axes.
pub fn sample_points(axes: &[SampleAxis]) -> Vec<Point> {
    let mut points = vec![[0.0; 4]];
    for a in axes {
        let values = a.axis.points();
        points = points
            .iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = *p;
                    q[a.var] = v;
                    q
                })
            })
            .collect();
    }
    points
}

pub fn parse_query(text: &str) -> Result<Point, CliError> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Query(text.to_string()))?;
    match values.as_slice() {
        [x, y, z] => Ok([*x, *y, *z, 0.0]),
        [x, y, z, t] => Ok([*x, *y, *z, *t]),
        _ => Err(CliError::Query(text.to_string())),
    }
}

/// Writes `x,y,z,t,value_re,value_im` rows with 17 significant digits.
pub fn write_csv(out: &mut dyn Write, rows: &[(Point, Complex64)]) -> io::Result<()> {
    writeln!(out, "x,y,z,t,value_re,value_im")?;
    for (p, v) in rows {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p[0], p[1], p[2], p[3], v.re, v.im
        )?;
    }
    Ok(())
}

fn emit_csv(rows: &[(Point, Complex64)], csv: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    match csv {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path).map_err(|source| CliError::Read {
                path: path.to_path_buf(),
                source,
            })?);
            write_csv(&mut file, rows)?;
            file.flush()?;
        }
        None => write_csv(out, rows)?,
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub order: usize,
    pub verify: bool,
    pub tolerance: f64,
    pub sample: Option<Vec<SampleAxis>>,
    pub csv: Option<PathBuf>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            order: DEFAULT_ORDER,
            verify: false,
            tolerance: 1e-5,
            sample: None,
            csv: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowOptions {
    pub mode: InverseLaplacianMode,
    pub quadrature: bool,
    pub sample: Option<Vec<SampleAxis>>,
    pub csv: Option<PathBuf>,
    pub query: Option<Point>,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            mode: InverseLaplacianMode::Standard,
            quadrature: false,
            sample: None,
            csv: None,
            query: None,
        }
    }
}

pub fn read_problem(path: &Path) -> Result<Problem, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_problem(&text)?)
}

fn print_table(out: &mut dyn Write, name: &str, series: &SeriesSolution) -> io::Result<()> {
    for (n, w) in series.coefficients().iter().enumerate() {
        writeln!(out, "{name}{n} = {}", to_display(w))?;
    }
    Ok(())
}

fn print_report(out: &mut dyn Write, label: &str, r: &ResidualReport) -> io::Result<()> {
    let q = r.worst_point;
    writeln!(
        out,
        "residual ({label}): max {:.3e}, rms {:.3e}, worst at ({}, {}, {}, {}), stencil order {}",
        r.max_abs, r.rms, q[0], q[1], q[2], q[3], r.order_used
    )
}

fn default_sample(kind: &str) -> Vec<SampleAxis> {
    let spec = match kind {
        "ball" => "x:0.1:1:10,t:0:0.1:5",
        "flow" => "x:-1:1:3,y:-1:1:3,z:-1:1:3,t:0.1:0.1:1",
        _ => "x:-1:1:11,t:0:0.2:5",
    };
    parse_sample(spec).expect("built-in sample spec")
}

/// Pointwise evaluator of a solution.
type Evaluator = Box<dyn Fn(&Point) -> Complex64 + Sync>;

/// Process exit code of a command.
pub type Exit = i32;

/// `solve`: coefficient table, closed form, optional residual and samples.
pub fn cmd_solve(problem: &Problem, opts: &SolveOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    let order = opts.order;
    // the solution as a pointwise function, plus the verification grid
    let (eval, check): (Evaluator, Option<ResidualReport>) = match problem {
        Problem::Evolution(prob) => {
            let series = solve_series(prob, order).map_err(solver)?;
            print_table(out, "w", &series)?;
            let cf = detect_closed_form(&series);
            match cf.to_display() {
                Some(s) => writeln!(out, "closed form: u = {s}")?,
                None => writeln!(out, "closed form: none detected")?,
            }
            let eval: Evaluator = if cf.is_some() {
                Box::new(move |p| cf.eval(p).expect("detected closed form"))
            } else {
                Box::new(move |p| series.partial_sum_at(p, order))
            };
            let check = if opts.verify {
                let grid = GridSpec::one_dimensional(Axis::new(-1.0, 1.0, 21), Axis::new(0.05, 0.25, 11));
                Some(fd_residual_evolution(&eval, prob, &grid)?)
            } else {
                None
            };
            (eval, check)
        }
        Problem::Heat(prob) => {
            let series = heat_series(prob, order).map_err(solver)?;
            print_table(out, "w", &series)?;
            let eval: Evaluator = match heat_closed_form(prob) {
                Ok(closed) => {
                    writeln!(out, "closed form: u = {}", to_display(&closed))?;
                    Box::new(move |p| closed.eval(p))
                }
                Err(e) => {
                    writeln!(out, "closed form: none ({e})")?;
                    Box::new(move |p| series.partial_sum_at(p, order))
                }
            };
            let check = if opts.verify {
                Some(fd_residual_heat(&eval, prob.diffusivity(), &GridSpec::default())?)
            } else {
                None
            };
            (eval, check)
        }
        Problem::Ball(prob) => {
            let sol = ball_series(prob, order).map_err(solver)?;
            print_table(out, "w", &sol.series)?;
            let scaled: Evaluator = match sol.scaled_closed_form() {
                Ok(v) => {
                    writeln!(out, "closed form: V = {}", to_display(&v))?;
                    writeln!(out, "temperature: T = V/r")?;
                    Box::new(move |p| v.eval(p))
                }
                Err(e) => {
                    writeln!(out, "closed form: none ({e})")?;
                    let series = sol.series.clone();
                    Box::new(move |p| series.partial_sum_at(p, order))
                }
            };
            if let Some(defect) = sol.boundary_defect(0.0, order) {
                writeln!(out, "boundary defect at t = 0: {defect:.3e} (diagnosed, not enforced)")?;
            }
            let check = if opts.verify {
                let grid = GridSpec::one_dimensional(Axis::new(0.1, 1.0, 19), Axis::new(0.01, 0.1, 10));
                Some(fd_residual_heat_1d(&scaled, prob.diffusivity(), &grid)?)
            } else {
                None
            };
            let eval: Evaluator = Box::new(move |p| scaled(p) / p[0]);
            (eval, check)
        }
        Problem::Flow(_) => {
            return Err(CliError::Solver("flow problems are handled by the `flow` command".into()));
        }
    };

    let mut code = 0;
    if let Some(r) = check {
        print_report(out, problem.kind(), &r)?;
        if !(r.max_abs < opts.tolerance) {
            writeln!(err, "residual {:.3e} exceeds tolerance {:.3e}", r.max_abs, opts.tolerance)?;
            code = 1;
        }
    }
    if opts.sample.is_some() || opts.csv.is_some() {
        let axes = opts.sample.clone().unwrap_or_else(|| default_sample(problem.kind()));
        let rows: Vec<(Point, Complex64)> = sample_points(&axes).into_iter().map(|p| (p, eval(&p))).collect();
        emit_csv(&rows, opts.csv.as_deref(), out)?;
    }
    Ok(code)
}

fn print_field(out: &mut dyn Write, name: &str, f: &VectorField) -> io::Result<()> {
    for (k, c) in f.components().iter().enumerate() {
        writeln!(out, "{name}_{} = {}", k + 1, to_display(c))?;
    }
    Ok(())
}

fn component_path(csv: &Path, k: usize) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("velocity");
    let ext = csv.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    csv.with_file_name(format!("{stem}.u{k}.{ext}"))
}

/// `flow`: vorticity, its curl, velocity, pressure and optional quadrature.
pub fn cmd_flow(problem: &Problem, opts: &FlowOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<Exit, CliError> {
    let Problem::Flow(prob) = problem else {
        return Err(CliError::Solver(format!(
            "`flow` needs a flow problem, got {}",
            problem.kind()
        )));
    };
    let sol = solve_flow(prob).map_err(solver)?;
    print_field(out, "psi", &sol.psi)?;
    print_field(out, "curl_psi", &sol.curl_psi)?;
    match (&sol.velocity, &sol.vortical) {
        (Some(u), _) => print_field(out, "u", u)?,
        (None, Ok(v)) => {
            print_field(out, "u_vortical", v)?;
            writeln!(out, "u = u_vortical + grad({})", prob.potential().to_display())?;
        }
        (None, Err(e)) => writeln!(out, "u: no symbolic form ({e}); use --quadrature")?,
    }
    let mut code = 0;
    match sol.pressure.formula() {
        Ok(f) => writeln!(out, "{f}")?,
        Err(e) => writeln!(err, "pressure formula unavailable ({e}); set `ref` away from the singularity")?,
    }
    if let Some(q) = opts.query {
        let at = format!("({}, {}, {}, {})", q[0], q[1], q[2], q[3]);
        match sol.velocity_at(&q) {
            Ok(u) => writeln!(out, "u{at} = ({}, {}, {})", u[0].re, u[1].re, u[2].re)?,
            Err(e) => {
                writeln!(err, "velocity at {at}: {e}")?;
                code = 1;
            }
        }
        match sol.pressure_at(&q) {
            Ok(p) => writeln!(out, "p{at} = {p}")?,
            Err(e) => {
                writeln!(err, "pressure at {at}: {e}")?;
                code = 1;
            }
        }
    }
    if opts.quadrature {
        let axes = opts.sample.clone().unwrap_or_else(|| default_sample("flow"));
        let points = sample_points(&axes);
        let settings = QuadratureSettings::for_mode(opts.mode);
        let growing = sol
            .curl_psi
            .components()
            .iter()
            .flat_map(|c| c.atoms())
            .filter(|a| laplacian_eigenvalue(a).is_ok_and(|mu| mu.re >= 0.0 && a.coeff.norm() > 0.0))
            .count();
        if growing > 0 {
            writeln!(
                err,
                "warning: {growing} term(s) of curl psi have non-negative Laplacian eigenvalue; the heat-kernel quadrature diverges on them"
            )?;
        }
        let values = sol.velocity_quadrature(&points, &settings).map_err(solver)?;
        if let (InverseLaplacianMode::Standard, Some(u)) = (opts.mode, &sol.velocity) {
            let (mut diff, mut scale) = (0.0f64, 0.0f64);
            for (p, v) in points.iter().zip(&values) {
                let exact = u.eval(p);
                for k in 0..3 {
                    diff = diff.max((v[k] - exact[k]).norm());
                    scale = scale.max(exact[k].norm());
                }
            }
            writeln!(err, "quadrature vs symbolic velocity: max difference {diff:.3e} (scale {scale:.3e})")?;
        }
        for k in 0..3 {
            let rows: Vec<(Point, Complex64)> = points.iter().zip(&values).map(|(p, v)| (*p, v[k])).collect();
            match &opts.csv {
                Some(csv) => emit_csv(&rows, Some(&component_path(csv, k + 1)), out)?,
                None => {
                    writeln!(out, "# u{}", k + 1)?;
                    write_csv(out, &rows)?;
                }
            }
        }
    }
    Ok(code)
}
