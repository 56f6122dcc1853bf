use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use spdreg::analysis::{column_eigen_profile, render_svg, snr, EigenvalueRank};
use spdreg::field::io::{read_dtf, read_mask, write_dtf, write_mask};
use spdreg::field::{Mask, TensorField};
use spdreg::optim::{solve as run_solver, SolveReport};
use spdreg::synth::io::write_dwi;
use spdreg::synth::{
    default_directions, fit_field, make_main_direction_phantom, make_staircase_phantom, simulate_dwis, NoiseSpec,
};

use crate::settings::{PhantomArg, Settings};
use crate::{CliError, EvaluateArgs, GenerateArgs, RenderArgs, SolveArgs};

type CliResult<T> = Result<T, CliError>;

/// Record written next to every output so the run can be repeated exactly.
#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    inputs: Vec<String>,
    settings: Settings,
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: spdreg::Result<T>) -> CliResult<T> {
    r.map_err(|e| match CliError::from(e) {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        CliError::Runtime(m) => CliError::Runtime(format!("{}: {m}", path.display())),
    })
}

fn load_field(path: &Path) -> CliResult<TensorField> {
    with_path(path, read_dtf(open(path)?))
}

fn load_mask(path: &Path) -> CliResult<Mask> {
    with_path(path, read_mask(open(path)?))
}

fn create(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> spdreg::Result<()>) -> CliResult<()> {
    let file = File::create(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    with_path(path, body(&mut out))?;
    out.flush()
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    create(path, |out| Ok(writeln!(out, "{text}")?))
}

fn provenance_path(output: &Path) -> PathBuf {
    output.with_extension("provenance.json")
}

pub fn generate(args: &GenerateArgs, settings: &Settings) -> CliResult<()> {
    let params = settings.params();
    params.validate()?;
    let n = settings.n();
    let phantom = match settings.phantom() {
        PhantomArg::Staircase => make_staircase_phantom(n)?,
        PhantomArg::MainDirection => make_main_direction_phantom(n)?,
    };
    let noise = NoiseSpec::new(settings.sigma2(), settings.seed())?;
    let dwis = simulate_dwis(
        &phantom,
        settings.b(),
        settings.a0(),
        &default_directions(),
        Some(&noise),
    )?;
    let noisy = fit_field(&dwis, params.epsilon, params.z)?;

    let mask = match &args.hole {
        Some(h) => {
            let (col, row, w, hh) = (h[0], h[1], h[2], h[3]);
            if col + w > n || row + hh > n {
                return Err(CliError::Usage(format!(
                    "hole {col},{row},{w},{hh} does not fit a {n}×{n} grid"
                )));
            }
            Some(Mask::with_hole(n, n, col, row, w, hh))
        }
        None => None,
    };

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", args.out_dir.display())))?;
    let dir = &args.out_dir;
    create(&dir.join("phantom.dtf"), |o| write_dtf(&phantom, o))?;
    create(&dir.join("noisy.dtf"), |o| write_dtf(&noisy, o))?;
    if args.dwi {
        create(&dir.join("dwi.txt"), |o| write_dwi(&dwis, o))?;
    }
    if let Some(mask) = &mask {
        create(&dir.join("mask.msk"), |o| write_mask(mask, o))?;
    }
    write_json(
        &dir.join("provenance.json"),
        &Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: "generate",
            inputs: Vec::new(),
            settings: settings.resolved(),
        },
    )
}

/// Parses `name=v1,v2,...`.
fn parse_sweep(spec: &str) -> CliResult<(String, Vec<f64>)> {
    let (name, values) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--sweep expects NAME=V1,V2,..., got '{spec}'")))?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("--sweep value '{v}' is not a number")))
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((name.trim().to_string(), values))
}

/// `out.dtf` with sweep entry `alpha=0.5` becomes `out_alpha0.5.dtf`.
fn suffixed(path: &Path, name: &str, value: f64) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let file = match path.extension() {
        Some(ext) => format!("{stem}_{name}{value}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{name}{value}"),
    };
    path.with_file_name(file)
}

pub fn solve(args: &SolveArgs, mask_path: Option<&PathBuf>, settings: &Settings) -> CliResult<()> {
    let data = load_field(&args.input)?;
    let mask = match mask_path {
        Some(p) => load_mask(p)?,
        None => Mask::full(data.width(), data.height()),
    };
    if !mask.matches(data.width(), data.height()) {
        return Err(CliError::Usage(format!(
            "mask is {}×{} but the field is {}×{}",
            mask.width(),
            mask.height(),
            data.width(),
            data.height()
        )));
    }
    let command = if mask_path.is_some() { "inpaint" } else { "denoise" };
    let mut inputs = vec![args.input.display().to_string()];
    if let Some(p) = mask_path {
        inputs.push(p.display().to_string());
    }

    let runs: Vec<(Settings, PathBuf, Option<PathBuf>)> = match &args.sweep {
        None => vec![(settings.clone(), args.output.clone(), args.report.clone())],
        Some(spec) => {
            let (name, values) = parse_sweep(spec)?;
            values
                .iter()
                .map(|&v| {
                    Ok((
                        settings.with_value(&name, v)?,
                        suffixed(&args.output, &name, v),
                        args.report.as_ref().map(|r| suffixed(r, &name, v)),
                    ))
                })
                .collect::<CliResult<_>>()?
        }
    };

    for (s, output, report) in runs {
        let started = Instant::now();
        let (rec, mut rep): (TensorField, SolveReport) =
            run_solver(&data, &mask, &s.params(), s.objective().into(), &s.solver(), None)?;
        rep.seconds = args.timing.then(|| started.elapsed().as_secs_f64());
        create(&output, |o| write_dtf(&rec, o))?;
        write_json(&report.unwrap_or_else(|| output.with_extension("json")), &rep)?;
        write_json(
            &provenance_path(&output),
            &Provenance {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command,
                inputs: inputs.clone(),
                settings: s.resolved(),
            },
        )?;
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let orig = load_field(&args.orig)?;
    let rec = load_field(&args.rec)?;
    println!("snr {}", snr(&orig, &rec)?);
    if let Some(path) = &args.profile {
        let largest = column_eigen_profile(&rec, EigenvalueRank::Largest);
        let smallest = column_eigen_profile(&rec, EigenvalueRank::Smallest);
        create(path, |o| {
            writeln!(o, "column,largest,smallest")?;
            for (j, (a, b)) in largest.iter().zip(&smallest).enumerate() {
                writeln!(o, "{j},{a:e},{b:e}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

pub fn render(args: &RenderArgs) -> CliResult<()> {
    let field = load_field(&args.input)?;
    let svg = render_svg(&field);
    create(&args.output, |o| Ok(o.write_all(svg.as_bytes())?))
}
