use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use azimodes::decomp::{azimuthal_grid, min_grid, schmidt_number, Side};
use azimodes::format::{csv_line, real};
use azimodes::physics::{check_validity, gain_of_frequency, HZ_PER_THZ};
use azimodes::scan::{analyze, frequency_steps, scan_k, FrequencyPoint};
use azimodes::scatter::{
    bogolyubov_gains, effective_mode_number, intensity, shifted_mode_curves, write_curves_csv,
};
use azimodes::verify::{self, Level, VerifyOptions};
use azimodes::{ChiVariant, Error, ExperimentConfig, GainModel};

use crate::cli::{
    Command, Common, GainModelArg, IntensityArgs, LevelArg, ModesArgs, PlotArgs, PlotKind,
    ScanArgs, SideArg, VerifyArgs,
};
use crate::meta::{RunMetadata, RunPoint};
use crate::svg::{render, Figure, Series};
use crate::table::Table;

#[derive(Debug)]
pub enum Failure {
    /// Bad flag or configuration value.
    Usage(String),
    /// Frequency outside the model's validity range.
    Validity(String),
    /// Oracle suite found a residual above tolerance.
    Verify(String),
    Other(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Validity(_) => 3,
            Failure::Verify(_) | Failure::Other(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Validity(m) | Failure::Verify(m) | Failure::Other(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfValidity(_) => Failure::Validity(e.to_string()),
            Error::InvalidArgument { .. } | Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Modes(a) => modes(a),
        Command::Scan(a) => scan(a),
        Command::Intensity(a) => intensity_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::Plot(a) => plot(a),
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let Some(path) = &common.config else {
        return Ok(ExperimentConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
        .map_err(|e| Failure::Usage(format!("--config {}: {e}", path.display())))
}

fn check_frequency(flag: &str, f: f64) -> Outcome {
    check_validity(f).map_err(|e| match e {
        Error::OutOfValidity(_) => Failure::Validity(format!("{flag} {f}: {e}")),
        other => Failure::from(other),
    })
}

fn resolve_gain(flag_value: Option<f64>, f: f64, cfg: &ExperimentConfig) -> Result<f64, Failure> {
    let g = match flag_value {
        Some(g) => g,
        None => gain_of_frequency(f, cfg)?,
    };
    if !(g.is_finite() && g >= 0.0) {
        return Err(Failure::Usage(format!(
            "--gain {g}: must be finite and nonnegative"
        )));
    }
    Ok(g)
}

fn resolve_grid(flag_value: Option<usize>, n_max: usize) -> Result<usize, Failure> {
    let min = min_grid(n_max);
    match flag_value {
        None => Ok(min.next_power_of_two().max(256)),
        Some(n) if n < min => Err(Failure::Usage(format!(
            "--grid {n}: at least {min} points are needed for n_max = {n_max}"
        ))),
        Some(n) => Ok(n),
    }
}

fn prepare_out(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::Other(format!("--out {}: {e}", dir.display())))
}

fn run_point(p: &FrequencyPoint, grid: Option<usize>) -> RunPoint {
    RunPoint {
        f_thz: p.f_thz,
        tau: p.tau,
        n_max: p.n_max,
        grid,
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], meta: &mut RunMetadata) -> Outcome {
    fs::write(dir.join(name), bytes)?;
    meta.outputs.push(name.to_string());
    Ok(())
}

fn mode_count(flag: u32, available: usize) -> Result<usize, Failure> {
    let j = flag as usize;
    if j > available {
        return Err(Failure::Usage(format!(
            "--modes {j}: only {available} modes exist at this frequency"
        )));
    }
    Ok(j)
}

fn print_summary(p: &FrequencyPoint, gain: f64) -> Outcome {
    let schmidt = schmidt_number(&p.decomposition)?;
    print!(
        "f = {} THz  tau = {}  n_max = {}  R_0 = {}  Schmidt K = {}",
        p.f_thz,
        real(p.tau),
        p.n_max,
        real(p.decomposition.values()[0]),
        real(schmidt)
    );
    if gain > 0.0 {
        let k = effective_mode_number(&bogolyubov_gains(&p.decomposition, gain)?)?;
        print!("  gainLG = {gain}  K = {}", real(k));
    }
    println!();
    Ok(())
}

fn modes(args: ModesArgs) -> Outcome {
    let start = Instant::now();
    let cfg = load_config(&args.common)?;
    let chi: ChiVariant = args.common.chi.into();
    check_frequency("--freq", args.freq)?;
    let gain = resolve_gain(args.gain, args.freq, &cfg)?;
    let point = analyze(&cfg, chi, args.freq)?;
    let dec = &point.decomposition;
    let grid = resolve_grid(args.grid, point.n_max)?;
    let j = mode_count(args.modes, dec.len())?;
    let out = &args.common.out;
    prepare_out(out)?;

    let mut meta = RunMetadata::new("modes", cfg, chi);
    meta.gains = vec![gain];
    meta.runs.push(run_point(&point, Some(grid)));

    let spectrum = bogolyubov_gains(dec, gain)?;
    let occupations = spectrum.occupations();
    let mut table = String::from("j,R,parity,g,occupation\n");
    let columns = dec
        .values()
        .iter()
        .zip(dec.parity())
        .zip(spectrum.g())
        .zip(&occupations);
    for (k, (((r, parity), g), n)) in columns.take(j).enumerate() {
        let cells = [
            k.to_string(),
            real(*r),
            parity.to_string(),
            real(*g),
            real(*n),
        ];
        table.push_str(&csv_line(cells));
        table.push('\n');
    }
    write_file(out, "eigenvalues.csv", table.as_bytes(), &mut meta)?;

    let phi = azimuthal_grid::<f64>(grid);
    let mut idler_csv = Vec::new();
    for (side, name) in [
        (Side::Idler, "modes_idler.csv"),
        (Side::Signal, "modes_signal.csv"),
    ] {
        let curves = shifted_mode_curves(dec, side, grid, j)?;
        let mut buf = Vec::new();
        write_curves_csv(&phi, &curves, &mut buf)?;
        if side == Side::Idler {
            idler_csv = buf.clone();
        }
        write_file(out, name, &buf, &mut meta)?;
    }
    if args.svg {
        let title = format!("{chi}, f = {} THz: idler modes shifted by R_j", args.freq);
        let svg = modes_svg(&String::from_utf8_lossy(&idler_csv), &title)?;
        write_file(out, "modes.svg", svg.as_bytes(), &mut meta)?;
    }
    print_summary(&point, gain)?;
    meta.wall_time_s = start.elapsed().as_secs_f64();
    meta.write(out)?;
    Ok(())
}

fn scan(args: ScanArgs) -> Outcome {
    let start = Instant::now();
    let mut cfg = load_config(&args.common)?;
    let chi: ChiVariant = args.common.chi.into();
    if let Some(m) = args.gain_model {
        cfg.gain_model = match m {
            GainModelArg::Fixed => GainModel::Fixed,
            GainModelArg::PumpScaled => GainModel::PumpScaled,
        };
    }
    if let Some(f) = args.ref_freq {
        if !(f.is_finite() && f > 0.0) {
            return Err(Failure::Usage(format!("--ref-freq {f}: must be positive")));
        }
        cfg.gain_ref_frequency = f * HZ_PER_THZ;
    }
    check_frequency("--freq-min", args.freq_min)?;
    check_frequency("--freq-max", args.freq_max)?;
    if args.freq_min > args.freq_max {
        return Err(Failure::Usage(format!(
            "--freq-min {} exceeds --freq-max {}",
            args.freq_min, args.freq_max
        )));
    }
    if let Some(g) = args.gains.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Failure::Usage(format!(
            "--gains: {g} is not a positive gain"
        )));
    }
    let frequencies = frequency_steps(args.freq_min, args.freq_max, args.steps as usize)?;
    let result = scan_k(&cfg, chi, &frequencies, &args.gains)?;
    let out = &args.common.out;
    prepare_out(out)?;

    let mut meta = RunMetadata::new("scan", cfg, chi);
    meta.gains = args.gains.clone();
    for &f in &frequencies {
        if let Some(r) = result.rows.iter().find(|r| r.f_thz == f) {
            meta.runs.push(RunPoint {
                f_thz: f,
                tau: r.tau,
                n_max: r.n_max,
                grid: None,
            });
        }
    }
    let mut csv = Vec::new();
    result.write_csv(&mut csv)?;
    write_file(out, "k_scan.csv", &csv, &mut meta)?;
    if args.svg {
        let title = format!("{chi}: effective mode number ({} gain)", cfg.gain_model);
        let svg = kscan_svg(&String::from_utf8_lossy(&csv), &title)?;
        write_file(out, "k_scan.svg", svg.as_bytes(), &mut meta)?;
    }
    println!(
        "{} rows written to {}",
        result.rows.len(),
        out.join("k_scan.csv").display()
    );
    meta.wall_time_s = start.elapsed().as_secs_f64();
    meta.write(out)?;
    Ok(())
}

fn intensity_cmd(args: IntensityArgs) -> Outcome {
    let start = Instant::now();
    let cfg = load_config(&args.common)?;
    let chi: ChiVariant = args.common.chi.into();
    check_frequency("--freq", args.freq)?;
    let gain = resolve_gain(args.gain, args.freq, &cfg)?;
    let point = analyze(&cfg, chi, args.freq)?;
    let dec = &point.decomposition;
    let grid = resolve_grid(args.grid, point.n_max)?;
    let j = mode_count(args.modes, dec.len())?;
    let side = match args.side {
        SideArg::Idler => Side::Idler,
        SideArg::Signal => Side::Signal,
    };
    let out = &args.common.out;
    prepare_out(out)?;

    let mut meta = RunMetadata::new("intensity", cfg, chi);
    meta.gains = vec![gain];
    meta.runs.push(run_point(&point, Some(grid)));
    let spectrum = bogolyubov_gains(dec, gain)?;
    let profile = intensity(dec, &spectrum, side, grid, j)?;
    let mut csv = Vec::new();
    profile.write_csv(&mut csv)?;
    write_file(out, "intensity.csv", &csv, &mut meta)?;
    if args.svg {
        let title = format!(
            "{chi}, f = {} THz, gainLG = {gain}: {side} intensity",
            args.freq
        );
        let svg = modes_svg(&String::from_utf8_lossy(&csv), &title)?;
        write_file(out, "intensity.svg", svg.as_bytes(), &mut meta)?;
    }
    print_summary(&point, gain)?;
    meta.wall_time_s = start.elapsed().as_secs_f64();
    meta.write(out)?;
    Ok(())
}

fn verify_cmd(args: VerifyArgs) -> Outcome {
    let level = match args.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let report = verify::run(
        level,
        VerifyOptions {
            perturb_coupling: args.inject_fault,
        },
    )?;
    print!("{}", report.to_text());
    if let Some(path) = &args.json {
        fs::write(path, report.to_json() + "\n")
            .map_err(|e| Failure::Other(format!("--json {}: {e}", path.display())))?;
    }
    if !report.passed() {
        let names: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
        return Err(Failure::Verify(format!(
            "failed checks: {}",
            names.join("; ")
        )));
    }
    Ok(())
}

fn read_table(text: &str, source: &Path) -> Result<Table, Failure> {
    Table::parse(text).map_err(|e| Failure::Other(format!("{}: {e}", source.display())))
}

/// First column on the x axis, every other column a line.
fn modes_figure(table: &Table, title: &str) -> Figure {
    let x = table.column(0);
    Figure {
        title: title.to_string(),
        x_label: table.header[0].clone(),
        y_label: "value".into(),
        series: (1..table.header.len())
            .map(|c| Series {
                label: table.header[c].clone(),
                points: x.iter().copied().zip(table.column(c)).collect(),
            })
            .collect(),
    }
}

/// `K` against frequency, one line per gain label.
fn kscan_figure(table: &Table, title: &str) -> Result<Figure, String> {
    let col = |name: &str| {
        table
            .column_index(name)
            .ok_or_else(|| format!("row 1: missing column `{name}`"))
    };
    let (fc, gc, kc) = (col("f_THz")?, col("gainLG")?, col("K")?);
    let mut series: Vec<(f64, Series)> = Vec::new();
    for row in &table.rows {
        let g = row[gc];
        let idx = match series.iter().position(|(label, _)| *label == g) {
            Some(i) => i,
            None => {
                series.push((
                    g,
                    Series {
                        label: format!("gainLG = {g}"),
                        points: Vec::new(),
                    },
                ));
                series.len() - 1
            }
        };
        series[idx].1.points.push((row[fc], row[kc]));
    }
    Ok(Figure {
        title: title.to_string(),
        x_label: "f_THz".into(),
        y_label: "K".into(),
        series: series.into_iter().map(|(_, s)| s).collect(),
    })
}

fn modes_svg(csv: &str, title: &str) -> Result<String, Failure> {
    let table = read_table(csv, Path::new("<generated>"))?;
    Ok(render(&modes_figure(&table, title)))
}

fn kscan_svg(csv: &str, title: &str) -> Result<String, Failure> {
    let table = read_table(csv, Path::new("<generated>"))?;
    kscan_figure(&table, title)
        .map(|f| render(&f))
        .map_err(Failure::Other)
}

fn plot(args: PlotArgs) -> Outcome {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Other(format!("--in {}: {e}", args.input.display())))?;
    let table = read_table(&text, &args.input)?;
    let title = file_stem(&args.input);
    let svg = match args.kind {
        PlotKind::Modes => render(&modes_figure(&table, &title)),
        PlotKind::Kscan => kscan_figure(&table, &title)
            .map(|f| render(&f))
            .map_err(|e| Failure::Other(format!("{}: {e}", args.input.display())))?,
    };
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        prepare_out(parent)?;
    }
    fs::write(&args.out, svg)
        .map_err(|e| Failure::Other(format!("--out {}: {e}", args.out.display())))?;
    Ok(())
}

fn file_stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| PathBuf::from(p).display().to_string())
}
