//! glyphfit: deterministic command-line pipeline around the glyph
//! reconstruction library.
//!
//! Exit codes: 0 success, 2 input error, 3 fit divergence,
//! 4 vectorization failure.

mod config;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use glyphfit::exact_sdf::{
    compute_grid_sdf, read_contour_samples, read_sdf_grid, sample_contour_sdf,
    write_contour_samples, write_sdf_grid,
};
use glyphfit::fit::{fit, init_field, FitError};
use glyphfit::glyph_ir::{normalize, parse_svg, write_svg};
use glyphfit::metrics::compare;
use glyphfit::pseudo_field::{raster_intensity, read_field, render, write_field, RenderConfig};
use glyphfit::raster::Image;
use glyphfit::vectorize::{vectorize, VectorizeError};
use glyphfit::Field;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "glyphfit",
    about = "Reconstruct vector glyphs by fitting a parabolic-curve implicit field",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// key=value config file (defaults < file < flags)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Grid resolution for SDF supervision and fitting
    #[arg(long)]
    grid: Option<usize>,
    /// Number of primitives
    #[arg(long)]
    np: Option<usize>,
    /// Curves per primitive
    #[arg(long)]
    na: Option<usize>,
    /// Render transition half-width
    #[arg(long)]
    gamma: Option<f64>,
    /// Optimization steps
    #[arg(long)]
    steps: Option<usize>,
    /// Initial learning rate (cosine-decays to lr-final)
    #[arg(long)]
    lr: Option<f64>,
    /// Final learning rate of the cosine schedule
    #[arg(long = "lr-final")]
    lr_final: Option<f64>,
    /// PRNG seed (sampling, initialization)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "lambda-image")]
    lambda_image: Option<f64>,
    #[arg(long = "lambda-grid")]
    lambda_grid: Option<f64>,
    #[arg(long = "lambda-contour")]
    lambda_contour: Option<f64>,
    #[arg(long = "lambda-regular")]
    lambda_regular: Option<f64>,
    #[arg(long = "lambda-ksq")]
    lambda_ksq: Option<f64>,
    /// Floor for k^2 in the regularizer
    #[arg(long = "kmin-sq")]
    kmin_sq: Option<f64>,
    /// Half-width of the near-contour sampling band
    #[arg(long)]
    band: Option<f64>,
    /// Number of near-contour samples
    #[arg(long)]
    mc: Option<usize>,
    /// Output raster/canvas size in pixels
    #[arg(long)]
    size: Option<usize>,
    /// Parallel workers for multi-glyph fitting
    #[arg(long)]
    jobs: Option<usize>,
}

impl CommonFlags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.load_file(path).map_err(CliError::Input)?;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        take!(
            grid,
            np,
            na,
            gamma,
            steps,
            lr,
            lr_final,
            seed,
            lambda_image,
            lambda_grid,
            lambda_contour,
            lambda_regular,
            lambda_ksq,
            kmin_sq,
            band,
            mc,
            size,
            jobs
        );
        cfg.validate().map_err(CliError::Input)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute SDF supervision (.sdf, .sdc) and the raster target (.pgm)
    /// from an SVG glyph
    SdfGen {
        /// Input SVG file
        svg: PathBuf,
        /// Output prefix (writes <prefix>.sdf, <prefix>.sdc, <prefix>.pgm)
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Fit a field to one or more sdf-gen outputs
    Fit {
        /// Input prefixes (each must have .sdf, .sdc and .pgm files)
        prefixes: Vec<PathBuf>,
        /// Output field path (single input only; defaults to <prefix>.pfd)
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Render a field file to a PGM image
    Render {
        field: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Convert a field file to an SVG outline
    Vectorize {
        field: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write per-primitive outlines to <out>.debug.svg
        #[arg(long)]
        debug: bool,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Blend two fields elementwise: (1-lambda) A + lambda B
    Interp {
        field_a: PathBuf,
        field_b: PathBuf,
        lambda: f64,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
}

enum CliError {
    Input(String),
    Divergence(String),
    Vectorize(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Divergence(_) => 3,
            CliError::Vectorize(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Divergence(m) | CliError::Vectorize(m) => m,
        }
    }
}

fn input_err<E: std::fmt::Display>(ctx: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{ctx}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::SdfGen { svg, out, flags } => cmd_sdf_gen(&svg, &out, &flags.resolve()?),
        Command::Fit {
            prefixes,
            out,
            flags,
        } => cmd_fit(&prefixes, out.as_deref(), &flags.resolve()?),
        Command::Render { field, out, flags } => cmd_render(&field, &out, &flags.resolve()?),
        Command::Vectorize {
            field,
            out,
            debug,
            flags,
        } => cmd_vectorize(&field, &out, debug, &flags.resolve()?),
        Command::Interp {
            field_a,
            field_b,
            lambda,
            out,
            ..
        } => cmd_interp(&field_a, &field_b, lambda, &out),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))
}

fn cmd_sdf_gen(svg: &Path, out_prefix: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let bytes = std::fs::read(svg)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", svg.display())))?;
    let outline = parse_svg(&bytes).map_err(input_err(&format!("{}", svg.display())))?;
    let outline =
        normalize(&outline, outline.source_bbox).map_err(input_err("normalization"))?;

    let grid = compute_grid_sdf(&outline, cfg.grid, cfg.grid);
    let samples = sample_contour_sdf(&outline, cfg.mc, cfg.band, cfg.seed);
    // raster target: exact signed distance through the render transfer
    let target = Image {
        width: grid.width,
        height: grid.height,
        data: grid
            .samples
            .iter()
            .map(|&d| raster_intensity(d, cfg.gamma))
            .collect(),
    };

    write_sdf_grid(&grid, create(&out_prefix.with_extension("sdf"))?)
        .map_err(input_err("writing .sdf"))?;
    write_contour_samples(&samples, create(&out_prefix.with_extension("sdc"))?)
        .map_err(input_err("writing .sdc"))?;
    target
        .write_pgm(create(&out_prefix.with_extension("pgm"))?)
        .map_err(input_err("writing .pgm"))?;
    Ok(())
}

fn fit_one(prefix: &Path, out: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let grid = read_sdf_grid(open(&prefix.with_extension("sdf"))?)
        .map_err(input_err("reading .sdf"))?;
    let contour = read_contour_samples(open(&prefix.with_extension("sdc"))?)
        .map_err(input_err("reading .sdc"))?;
    let target = Image::read_pgm(open(&prefix.with_extension("pgm"))?)
        .map_err(input_err("reading .pgm"))?;

    let init = init_field(&grid, cfg.np, cfg.na, cfg.seed).map_err(input_err("init"))?;
    let report_path = out.with_extension("report");
    match fit(
        &init,
        &target,
        &grid,
        &contour,
        &cfg.weights(),
        &cfg.fit_config(),
    ) {
        Ok((field, report)) => {
            write_field(&field, create(out)?).map_err(input_err("writing field"))?;
            report
                .write_text(create(&report_path)?)
                .map_err(input_err("writing report"))?;
            let rendered = render(
                &field,
                &RenderConfig {
                    gamma: cfg.gamma,
                    width: grid.width,
                    height: grid.height,
                },
            );
            let metrics = compare(&rendered, &target).map_err(input_err("metrics"))?;
            println!("{}: {}", prefix.display(), metrics.to_csv());
            Ok(())
        }
        Err(FitError::Divergence { step, report }) => {
            let _ = report.write_text(create(&report_path)?);
            Err(CliError::Divergence(format!(
                "{}: loss diverged at step {step} (partial report written)",
                prefix.display()
            )))
        }
        Err(e) => Err(CliError::Input(e.to_string())),
    }
}

fn cmd_fit(prefixes: &[PathBuf], out: Option<&Path>, cfg: &RunConfig) -> Result<(), CliError> {
    if prefixes.is_empty() {
        return Err(CliError::Input("no input prefixes given".into()));
    }
    if prefixes.len() == 1 {
        let out = out
            .map(Path::to_path_buf)
            .unwrap_or_else(|| prefixes[0].with_extension("pfd"));
        return fit_one(&prefixes[0], &out, cfg);
    }
    if out.is_some() {
        return Err(CliError::Input(
            "-o is only valid with a single input prefix".into(),
        ));
    }
    // fan out over glyphs, one fit per worker
    let jobs = cfg.jobs.max(1);
    let results: Vec<Result<(), CliError>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for chunk in prefixes.chunks(prefixes.len().div_ceil(jobs)) {
            handles.push(scope.spawn(move || {
                chunk
                    .iter()
                    .map(|prefix| fit_one(prefix, &prefix.with_extension("pfd"), cfg))
                    .collect::<Vec<_>>()
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("fit worker panicked"))
            .collect()
    });
    for r in results {
        r?;
    }
    Ok(())
}

fn cmd_render(field_path: &Path, out: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let field = read_field(open(field_path)?).map_err(input_err("reading field"))?;
    let img = render(
        &field,
        &RenderConfig {
            gamma: cfg.gamma,
            width: cfg.size,
            height: cfg.size,
        },
    );
    img.write_pgm(create(out)?).map_err(input_err("writing .pgm"))?;
    Ok(())
}

fn cmd_vectorize(field_path: &Path, out: &Path, debug: bool, cfg: &RunConfig) -> Result<(), CliError> {
    let field = read_field(open(field_path)?).map_err(input_err("reading field"))?;
    let result = vectorize(&field).map_err(|e| match e {
        VectorizeError::StitchFailure(_) | VectorizeError::NonManifoldBoundary(_) => {
            let dump = out.with_extension("debug.svg");
            let _ = write_debug_layers(&field, &dump, cfg.size);
            CliError::Vectorize(format!("{e}; debug dump at {}", dump.display()))
        }
        other => CliError::Vectorize(other.to_string()),
    })?;
    let doc = write_svg(&result.merged, cfg.size as u32);
    let mut w = create(out)?;
    w.write_all(doc.as_bytes())
        .map_err(input_err("writing svg"))?;
    if debug {
        write_debug_layers(&field, &out.with_extension("debug.svg"), cfg.size)?;
    }
    Ok(())
}

/// Writes each primitive's clipped outline as a separate stroked path.
fn write_debug_layers(field: &Field, path: &Path, size: usize) -> Result<(), CliError> {
    use glyphfit::glyph_ir::path_data;
    use glyphfit::vectorize::{arc_to_bezier, clip_primitive};
    let normalized = field.normalized();
    let mut paths = String::new();
    for (i, curves) in normalized.primitives().iter().enumerate() {
        let Ok(outline) = clip_primitive(curves) else {
            continue;
        };
        let mut contours = Vec::new();
        for lp in &outline.loops {
            let mut quads = Vec::new();
            for seg in lp {
                match seg.as_parabola_arc() {
                    Some(arc) => {
                        if let Ok(pieces) = arc_to_bezier(&arc) {
                            quads.extend(pieces);
                        }
                    }
                    None => quads.push(glyphfit::QuadBezier::from_line(seg.a, seg.b)),
                }
            }
            if !quads.is_empty() {
                contours.push(glyphfit::Contour::new(quads));
            }
        }
        if contours.is_empty() {
            continue;
        }
        let d = path_data(&contours, size as u32);
        let hue = (i * 47) % 360;
        paths.push_str(&format!(
            "  <path d=\"{d}\" fill=\"none\" stroke=\"hsl({hue},80%,40%)\" stroke-width=\"1\"/>\n"
        ));
    }
    let doc = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" \
         viewBox=\"0 0 {size} {size}\">\n{paths}</svg>\n"
    );
    let mut w = create(path)?;
    w.write_all(doc.as_bytes())
        .map_err(input_err("writing debug svg"))?;
    Ok(())
}

fn cmd_interp(a: &Path, b: &Path, lambda: f64, out: &Path) -> Result<(), CliError> {
    let fa = read_field(open(a)?).map_err(input_err("reading field A"))?;
    let fb = read_field(open(b)?).map_err(input_err("reading field B"))?;
    if fa.n_primitives() != fb.n_primitives()
        || fa.curves_per_primitive() != fb.curves_per_primitive()
    {
        return Err(CliError::Input(format!(
            "shape mismatch: {}x{} vs {}x{}",
            fa.n_primitives(),
            fa.curves_per_primitive(),
            fb.n_primitives(),
            fb.curves_per_primitive()
        )));
    }
    let blended: Vec<f64> = fa
        .flat_params()
        .iter()
        .zip(fb.flat_params())
        .map(|(x, y)| (1.0 - lambda) * x + lambda * y)
        .collect();
    let field = Field::from_flat(fa.n_primitives(), fa.curves_per_primitive(), &blended);
    write_field(&field, create(out)?).map_err(input_err("writing field"))?;
    Ok(())
}
