use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use oamchip::analysis::{interfere, oam_spectrum, ring_power_ratio, Reference};
use oamchip::beam::{ring_matched_waist, BeamSpec, ObjectiveSpec};
use oamchip::holography::{phase_flatten_project, DEFAULT_SMF_WAIST};
use oamchip::io;
use oamchip::propagation::{
    coupling_sweep, launch_field, propagate, transmission, BpmParams, Launch, DEFAULT_APERTURE_UM,
};
use oamchip::quantum::{g2_zero, iccd_image, LightKind, SpdcSource};
use oamchip::scenario::{self, run_scenario, Overrides, Scenario, MANIFEST_NAME};
use oamchip::waveguide::{doughnut_profile, solve_modes_with, CoreShape, DoughnutGeometry, SolverOptions};
use oamchip::{Error, Grid, Result};

#[derive(Parser, Debug)]
#[command(name = "oamchip", version, about = "OAM doughnut-waveguide chip simulator")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Scenario config file or bundled scenario name (fig2, fig3, suppE, fig4).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Propagation step (um).
    #[arg(long = "dz", global = true, value_name = "UM")]
    dz_um: Option<f64>,
    /// Simulation grid as `<nx>x<ny>:<dx_um>`.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<(usize, usize, f64)>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Write an LG beam (or an equal superposition of charges) as OAMFLD01.
    GenBeam {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1")]
        ell: Vec<i32>,
        #[arg(long, default_value_t = 0)]
        p: u32,
        /// Waist (um); defaults to the ring-matched waist of the doughnut.
        #[arg(long)]
        waist_um: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        offset_x_um: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        offset_y_um: f64,
        /// Also write a 16-bit intensity PGM here.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Write the doughnut index profile as OAMIDX01.
    BuildChip {
        #[arg(long, default_value_t = oamchip::waveguide::DEFAULT_DOUGHNUT_DELTA_N)]
        delta_n: f64,
        #[arg(long, default_value_t = oamchip::waveguide::DEFAULT_BACKGROUND_INDEX)]
        n0: f64,
        #[arg(long, default_value_t = 8.0)]
        ring_diameter_um: f64,
        #[arg(long, default_value_t = 2.5)]
        core_diameter_um: f64,
        #[arg(long, default_value_t = 12)]
        cores: usize,
        #[arg(long)]
        include_center: bool,
        #[arg(long)]
        supergaussian: bool,
    },
    /// Guided modes of an index map: modes.csv and one OAMFLD01 per mode.
    SolveModes {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 3)]
        modes: usize,
    },
    /// Propagate a field through an index map: output.oamfld and power.csv.
    Propagate {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = oamchip::propagation::CHIP_LENGTH_UM)]
        length_um: f64,
        #[arg(long, default_value_t = DEFAULT_APERTURE_UM)]
        aperture_um: f64,
    },
    /// OAM power spectrum as `l,power_fraction`.
    Spectrum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        l_max: i32,
    },
    /// Phase-flattening projection onto each mask charge.
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,1")]
        ell: Vec<i32>,
        #[arg(long, default_value_t = DEFAULT_SMF_WAIST)]
        smf_waist: f64,
    },
    /// Interferogram with a Gaussian reference as a 16-bit PGM.
    Interfere {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 12.0)]
        ref_waist_um: f64,
        /// Reference wavefront curvature radius (mm); 0 is flat.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        curvature_mm: f64,
    },
    /// Inner and outer ring powers by both estimators.
    Rings {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2.5,5.5,6,9")]
        radii_um: Vec<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        cut_angle_deg: f64,
    },
    /// Chip efficiency and first-order content for every objective and charge.
    Sweep {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,1,2")]
        ell: Vec<i32>,
        #[arg(long, value_delimiter = ',', default_value = "16X,20X,30X")]
        objectives: Vec<String>,
        #[arg(long, default_value_t = 0.48)]
        input_waist_mm: f64,
        #[arg(long, default_value_t = DEFAULT_APERTURE_UM)]
        aperture_um: f64,
    },
    /// Second-order coherence against the squeezing parameter.
    G2 {
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2,0.3,0.4,0.5")]
        lambdas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
    /// Monte-Carlo camera frame of a field as a 16-bit PGM.
    Iccd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        photons: u64,
        /// Mean dark counts per pixel per frame.
        #[arg(long, default_value_t = 0.0)]
        dark_rate: f64,
    },
    /// Run a scenario and write its artifacts and manifest.
    Run,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize, f64), String> {
    let bad = || format!("expected <nx>x<ny>:<dx_um>, got `{s}`");
    let (dims, dx) = s.split_once(':').ok_or_else(bad)?;
    let (nx, ny) = dims.split_once('x').ok_or_else(bad)?;
    let nx = nx.trim().parse().map_err(|_| bad())?;
    let ny = ny.trim().parse().map_err(|_| bad())?;
    let dx: f64 = dx.trim().parse().map_err(|_| bad())?;
    if nx == 0 || ny == 0 || dx.is_nan() || dx <= 0.0 {
        return Err(bad());
    }
    Ok((nx, ny, dx))
}

impl Global {
    fn grid(&self) -> Result<Grid> {
        match self.grid {
            Some((nx, ny, dx)) => Grid::new(nx, ny, dx, dx, oamchip::grid::DEFAULT_WAVELENGTH_UM),
            None => Ok(Grid::default_chip()),
        }
    }

    fn bpm(&self) -> BpmParams {
        let mut p = BpmParams::default();
        if let Some(dz) = self.dz_um {
            p.dz = dz;
        }
        p
    }

    fn out_file(&self, what: &str) -> Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| Error::InvalidParams(format!("--out <file> is required for {what}")))
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// CSV to `--out` or stdout.
    fn emit_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let text = io::csv(header, rows);
        match &self.out {
            Some(p) => io::atomic_write(p, text.as_bytes()),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn objectives_by_label(labels: &[String]) -> Result<Vec<ObjectiveSpec>> {
    let table = ObjectiveSpec::table();
    labels
        .iter()
        .map(|l| {
            table
                .iter()
                .find(|o| &o.label == l)
                .cloned()
                .ok_or_else(|| Error::InvalidParams(format!("unknown objective `{l}`")))
        })
        .collect()
}

fn execute(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match cli.cmd {
        Cmd::GenBeam { ell, p, waist_um, offset_x_um, offset_y_um, pgm } => {
            let grid = g.grid()?;
            let amp = 1.0 / (ell.len() as f64).sqrt();
            let beams: Vec<BeamSpec> = ell
                .iter()
                .map(|&l| {
                    let w = waist_um.unwrap_or_else(|| ring_matched_waist(l.abs().max(1), 4.0));
                    BeamSpec { amplitude: amp, ..BeamSpec::lg(l, p, w) }.with_center(offset_x_um, offset_y_um)
                })
                .collect();
            let field = launch_field(&grid, &beams, &Launch::ideal())?;
            io::write_field(g.out_file("gen-beam")?, &field)?;
            if let Some(path) = pgm {
                io::write_intensity_pgm(&path, &grid, &field.intensity())?;
            }
        }
        Cmd::BuildChip { delta_n, n0, ring_diameter_um, core_diameter_um, cores, include_center, supergaussian } => {
            let geom = DoughnutGeometry {
                ring_diameter: ring_diameter_um,
                n_cores: cores,
                core_diameter: core_diameter_um,
                include_center,
                delta_n,
                background_index: n0,
                core_shape: if supergaussian { CoreShape::SuperGaussian } else { CoreShape::Gaussian },
            };
            let profile = doughnut_profile(&g.grid()?, &geom)?;
            io::write_index(g.out_file("build-chip")?, &profile)?;
        }
        Cmd::SolveModes { index, modes } => {
            let profile = io::read_index(&index)?;
            let opts = SolverOptions { seed: g.seed.unwrap_or(SolverOptions::default().seed), ..Default::default() };
            let found = solve_modes_with(&profile, modes, &opts)?;
            let dir = g.out_dir();
            let mut rows = Vec::new();
            for (k, m) in found.iter().enumerate() {
                io::write_field(&dir.join(format!("mode_{k}.oamfld")), &m.field)?;
                rows.push(vec![k.to_string(), io::num(m.n_eff)]);
            }
            io::atomic_write(&dir.join("modes.csv"), io::csv(&["mode_index", "n_eff"], &rows).as_bytes())?;
        }
        Cmd::Propagate { index, input, length_um, aperture_um } => {
            let profile = io::read_index(&index)?;
            let field = io::read_field(&input)?;
            let params = BpmParams { length: length_um, ..g.bpm() };
            let res = propagate(&field, &profile, &params)?;
            let dir = g.out_dir();
            io::write_field(&dir.join("output.oamfld"), &res.output)?;
            let rows: Vec<Vec<String>> =
                res.power_trace.iter().map(|&(z, p)| vec![io::num(z), io::num(p)]).collect();
            io::atomic_write(&dir.join("power.csv"), io::csv(&["z_um", "guided_power"], &rows).as_bytes())?;
            println!("transmission = {}", transmission(&res, &field, aperture_um)?);
        }
        Cmd::Spectrum { input, l_max } => {
            let s = oam_spectrum(&io::read_field(&input)?, l_max)?;
            let rows: Vec<Vec<String>> = s.iter().map(|(l, p)| vec![l.to_string(), io::num(p)]).collect();
            g.emit_csv(&["l", "power_fraction"], &rows)?;
        }
        Cmd::Project { input, ell, smf_waist } => {
            let field = io::read_field(&input)?;
            let rows = ell
                .iter()
                .map(|&l| Ok(vec![l.to_string(), io::num(phase_flatten_project(&field, l, smf_waist)?)]))
                .collect::<Result<Vec<_>>>()?;
            g.emit_csv(&["l_mask", "coupling"], &rows)?;
        }
        Cmd::Interfere { input, ref_waist_um, curvature_mm } => {
            let field = io::read_field(&input)?;
            let reference = Reference { curvature_mm, ..Reference::flat(ref_waist_um) };
            let map = interfere(&field, &reference)?;
            io::write_intensity_pgm(g.out_file("interfere")?, &map.grid, &map.values)?;
        }
        Cmd::Rings { input, radii_um, cut_angle_deg } => {
            let radii: [f64; 4] = radii_um
                .try_into()
                .map_err(|_| Error::InvalidRadii("expected four radii".into()))?;
            let a = ring_power_ratio(&io::read_field(&input)?, radii, cut_angle_deg.to_radians())?;
            let rows: Vec<Vec<String>> = [a.trapezoid, a.annulus]
                .iter()
                .map(|r| {
                    vec![
                        format!("{:?}", r.method).to_lowercase(),
                        io::num(r.inner_power),
                        io::num(r.outer_power),
                        io::num(r.ratio),
                    ]
                })
                .collect();
            g.emit_csv(&["method", "inner_power", "outer_power", "ratio"], &rows)?;
        }
        Cmd::Sweep { index, ell, objectives, input_waist_mm, aperture_um } => {
            let profile = io::read_index(&index)?;
            let objs = objectives_by_label(&objectives)?;
            let beams: Vec<BeamSpec> = ell.iter().map(|&l| BeamSpec::lg(l, 0, 1.0)).collect();
            let rows = coupling_sweep(&beams, &objs, input_waist_mm, &profile, &g.bpm(), &Launch::default(), aperture_um)?
                .iter()
                .map(|r| {
                    let s = oam_spectrum(&r.output, 10)?;
                    Ok(vec![
                        r.objective.label.clone(),
                        io::num(r.waist),
                        r.beam.ell.to_string(),
                        io::num(r.efficiency),
                        io::num(s.get(-1)),
                        io::num(s.get(1)),
                        s.argmax().to_string(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            g.emit_csv(&["objective", "waist_um", "l_in", "efficiency", "p_minus1", "p_plus1", "argmax"], &rows)?;
        }
        Cmd::G2 { lambdas, eta } => {
            let rows = lambdas
                .iter()
                .map(|&lambda| {
                    let src = SpdcSource::with_efficiency(lambda, eta)?;
                    Ok(vec![
                        io::num(lambda),
                        io::num(g2_zero(LightKind::Thermal, &src)),
                        io::num(g2_zero(LightKind::Heralded, &src)),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            g.emit_csv(&["lambda", "g2_thermal", "g2_heralded"], &rows)?;
        }
        Cmd::Iccd { input, photons, dark_rate } => {
            let field = io::read_field(&input)?;
            let img = iccd_image(&field, photons, dark_rate, g.seed.unwrap_or(0))?;
            io::write_count_pgm(g.out_file("iccd")?, &img)?;
        }
        Cmd::Run => {
            let name = g
                .config
                .as_deref()
                .ok_or_else(|| Error::InvalidParams("run needs --config <file|fig2|fig3|suppE|fig4>".into()))?;
            let (text, base) = if Path::new(name).is_file() {
                let p = Path::new(name);
                (fs::read_to_string(p)?, p.parent().unwrap_or(Path::new(".")).to_path_buf())
            } else if let Some(t) = scenario::bundled(name) {
                (t.to_string(), PathBuf::from("."))
            } else {
                return Err(Error::InvalidParams(format!("no config file or bundled scenario named `{name}`")));
            };
            let over = Overrides { seed: g.seed, dz: g.dz_um, grid: g.grid };
            let s = Scenario::parse(&text, &over, &base)?;
            let out = g.out_dir();
            let manifest = run_scenario(&s, &out)?;
            eprintln!(
                "{}: {} artifacts, manifest {}",
                s.name,
                manifest.artifacts.len(),
                out.join(MANIFEST_NAME).display()
            );
            for (step, msg) in &manifest.failures {
                eprintln!("step {step} failed: {msg}");
            }
            return Ok(manifest.is_success());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.global.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
