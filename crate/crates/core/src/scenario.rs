//! Scenario runner: resolves a config into a [`Scenario`], runs its steps and
//! writes the artifacts followed by a manifest.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::analysis::{interfere, oam_spectrum, ring_power_ratio, OamSpectrum, Reference};
use crate::beam::{beam_field, bloch_components, cardinal_states, ring_matched_waist, BeamSpec, ObjectiveSpec};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::holography::{fork_hologram, phase_flatten_project, DEFAULT_GRATING_PERIOD_UM, DEFAULT_SMF_WAIST};
use crate::io;
use crate::propagation::{
    coupling_sweep, launch_field, propagate, transmission, BpmParams, Launch, PropagationResult, DEFAULT_APERTURE_UM,
};
use crate::quantum::{g2_zero, heralded_distribution, iccd_image, unheralded_distribution, LightKind, SpdcSource};
use crate::waveguide::{doughnut_profile, solve_modes_with, CoreShape, DoughnutGeometry, IndexProfile, SolverOptions};

pub const MANIFEST_NAME: &str = "manifest.txt";

const FIG2: &str = include_str!("../scenarios/fig2.conf");
const FIG3: &str = include_str!("../scenarios/fig3.conf");
const SUPPE: &str = include_str!("../scenarios/suppE.conf");
const FIG4: &str = include_str!("../scenarios/fig4.conf");

/// Config text of a bundled scenario.
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "fig2" => Some(FIG2),
        "fig3" => Some(FIG3),
        "suppE" => Some(SUPPE),
        "fig4" => Some(FIG4),
        _ => None,
    }
}

pub const BUNDLED_NAMES: [&str; 4] = ["fig2", "fig3", "suppE", "fig4"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Index map and guided modes.
    Modes,
    /// Fork holograms and the phase-flattening projection matrix.
    Holograms,
    /// Single-charge inputs through the chip.
    Transport,
    /// Six cardinal states of the `bloch_ell` pair.
    Bloch,
    /// Equal two- and three-state superpositions.
    Superposition,
    /// Objective-dependent coupling sweep.
    Objectives,
    G2,
    Iccd,
}

impl Step {
    pub fn name(&self) -> &'static str {
        match self {
            Step::Modes => "modes",
            Step::Holograms => "holograms",
            Step::Transport => "transport",
            Step::Bloch => "bloch",
            Step::Superposition => "superposition",
            Step::Objectives => "objectives",
            Step::G2 => "g2",
            Step::Iccd => "iccd",
        }
    }
}

impl FromStr for Step {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "modes" => Step::Modes,
            "holograms" => Step::Holograms,
            "transport" => Step::Transport,
            "bloch" => Step::Bloch,
            "superposition" => Step::Superposition,
            "objectives" => Step::Objectives,
            "g2" => Step::G2,
            "iccd" => Step::Iccd,
            other => return Err(format!("unknown step `{other}`")),
        })
    }
}

/// Command-line values that take precedence over the config.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub dz: Option<f64>,
    /// `(nx, ny, dx)` with `dy = dx`.
    pub grid: Option<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub steps: Vec<Step>,
    pub seed: u64,
    pub grid: Grid,
    pub chip: DoughnutGeometry,
    /// Precomputed `OAMIDX01` map replacing the generated doughnut.
    pub index_file: Option<PathBuf>,
    pub bpm: BpmParams,
    pub launch: Launch,
    pub ells: Vec<i32>,
    /// Common beam waist (um); `None` matches each ring to `ring_radius`.
    pub waist: Option<f64>,
    pub ring_radius: f64,
    pub bloch_ell: i32,
    pub mode_count: usize,
    pub l_max: i32,
    pub aperture: f64,
    pub ring_radii: [f64; 4],
    pub cut_angle: f64,
    pub reference: Reference,
    pub grating_period: f64,
    pub smf_waist: f64,
    pub objectives: Vec<ObjectiveSpec>,
    pub objective_ells: Vec<i32>,
    pub input_waist_mm: f64,
    pub lambdas: Vec<f64>,
    pub herald_efficiency: f64,
    pub n_photons: u64,
    pub dark_rate_triggered: f64,
    pub dark_rate_free: f64,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("scenario", &["name", "steps", "seed"]),
    ("grid", &["nx", "ny", "dx_um", "dy_um", "wavelength_um"]),
    (
        "chip",
        &["n0", "delta_n", "ring_diameter_um", "core_diameter_um", "cores", "include_center", "core_shape", "index_file"],
    ),
    ("bpm", &["dz_um", "length_um", "absorber_width_um", "absorber_exponent", "absorber_rate", "record_every"]),
    ("launch", &["offset_x_um", "offset_y_um", "admixture"]),
    ("beams", &["ells", "waist_um", "ring_radius_um", "bloch_ell"]),
    ("modes", &["count"]),
    (
        "analysis",
        &[
            "l_max",
            "aperture_um",
            "ring_radii_um",
            "cut_angle_deg",
            "reference_waist_um",
            "reference_curvature_mm",
            "grating_period_um",
            "smf_waist",
        ],
    ),
    ("objectives", &["labels", "ells", "input_waist_mm"]),
    ("quantum", &["lambdas", "herald_efficiency", "photons", "dark_rate_triggered", "dark_rate_free"]),
];

impl Scenario {
    /// Resolves a parsed config; `base` anchors relative file paths.
    pub fn from_config(cfg: &Config, over: &Overrides, base: &Path) -> Result<Scenario> {
        cfg.check_known(KNOWN)?;
        let steps = cfg
            .list::<String>("scenario", "steps", vec![])?
            .iter()
            .map(|s| s.parse::<Step>().map_err(|m| cfg.error_at("scenario", "steps", m)))
            .collect::<Result<Vec<_>>>()?;

        let mut grid = Grid::new(
            cfg.value("grid", "nx", 300usize)?,
            cfg.value("grid", "ny", 300usize)?,
            cfg.value("grid", "dx_um", 0.2)?,
            cfg.value("grid", "dy_um", cfg.value("grid", "dx_um", 0.2)?)?,
            cfg.value("grid", "wavelength_um", crate::grid::DEFAULT_WAVELENGTH_UM)?,
        )
        .map_err(|e| cfg.error_at("grid", "nx", e.to_string()))?;
        if let Some((nx, ny, dx)) = over.grid {
            grid = Grid::new(nx, ny, dx, dx, grid.wavelength)?;
        }

        let d = DoughnutGeometry::default();
        let core_shape = match cfg.get("chip", "core_shape").unwrap_or("gaussian") {
            "gaussian" => CoreShape::Gaussian,
            "supergaussian" => CoreShape::SuperGaussian,
            other => return Err(cfg.error_at("chip", "core_shape", format!("unknown shape `{other}`"))),
        };
        let chip = DoughnutGeometry {
            ring_diameter: cfg.value("chip", "ring_diameter_um", d.ring_diameter)?,
            n_cores: cfg.value("chip", "cores", d.n_cores)?,
            core_diameter: cfg.value("chip", "core_diameter_um", d.core_diameter)?,
            include_center: cfg.value("chip", "include_center", d.include_center)?,
            delta_n: cfg.value("chip", "delta_n", d.delta_n)?,
            background_index: cfg.value("chip", "n0", d.background_index)?,
            core_shape,
        };
        let index_file = cfg.get("chip", "index_file").map(|p| base.join(p));
        if let Some(p) = &index_file {
            if !p.is_file() {
                return Err(cfg.error_at("chip", "index_file", format!("{} does not exist", p.display())));
            }
        }

        let b = BpmParams::default();
        let mut bpm = BpmParams {
            dz: cfg.value("bpm", "dz_um", b.dz)?,
            length: cfg.value("bpm", "length_um", b.length)?,
            n_ref: None,
            absorber_width: cfg.value("bpm", "absorber_width_um", b.absorber_width)?,
            absorber_exponent: cfg.value("bpm", "absorber_exponent", b.absorber_exponent)?,
            absorber_rate: cfg.value("bpm", "absorber_rate", b.absorber_rate)?,
            record_every: cfg.value("bpm", "record_every", b.record_every)?,
        };
        if let Some(dz) = over.dz {
            bpm.dz = dz;
        }

        let l = Launch::default();
        let launch = Launch {
            offset: (cfg.value("launch", "offset_x_um", l.offset.0)?, cfg.value("launch", "offset_y_um", l.offset.1)?),
            first_order_admixture: cfg.value("launch", "admixture", l.first_order_admixture)?,
        };

        let waist = match cfg.get("beams", "waist_um") {
            None | Some("ring") => None,
            Some(_) => Some(cfg.value("beams", "waist_um", 0.0)?),
        };
        let radii: Vec<f64> = cfg.list("analysis", "ring_radii_um", vec![2.5, 5.5, 6.0, 9.0])?;
        let ring_radii: [f64; 4] = radii
            .try_into()
            .map_err(|_| cfg.error_at("analysis", "ring_radii_um", "expected four radii"))?;

        let labels: Vec<String> = cfg.list("objectives", "labels", vec!["16X".into(), "20X".into(), "30X".into()])?;
        let table = ObjectiveSpec::table();
        let objectives = labels
            .iter()
            .map(|lab| {
                table
                    .iter()
                    .find(|o| &o.label == lab)
                    .cloned()
                    .ok_or_else(|| cfg.error_at("objectives", "labels", format!("unknown objective `{lab}`")))
            })
            .collect::<Result<Vec<_>>>()?;

        let s = Scenario {
            name: cfg.get("scenario", "name").unwrap_or("unnamed").to_string(),
            steps,
            seed: over.seed.map_or_else(|| cfg.value("scenario", "seed", 0u64), Ok)?,
            grid,
            chip,
            index_file,
            bpm,
            launch,
            ells: cfg.list("beams", "ells", vec![-1, 0, 1])?,
            waist,
            ring_radius: cfg.value("beams", "ring_radius_um", chip.ring_diameter / 2.0)?,
            bloch_ell: cfg.value("beams", "bloch_ell", 1)?,
            mode_count: cfg.value("modes", "count", 3usize)?,
            l_max: cfg.value("analysis", "l_max", 10)?,
            aperture: cfg.value("analysis", "aperture_um", DEFAULT_APERTURE_UM)?,
            ring_radii,
            cut_angle: cfg.value("analysis", "cut_angle_deg", 0.0)? * PI / 180.0,
            reference: Reference {
                waist: cfg.value("analysis", "reference_waist_um", 12.0)?,
                curvature_mm: cfg.value("analysis", "reference_curvature_mm", 0.0)?,
                phase: 0.0,
                amplitude: 1.0,
            },
            grating_period: cfg.value("analysis", "grating_period_um", DEFAULT_GRATING_PERIOD_UM)?,
            smf_waist: cfg.value("analysis", "smf_waist", DEFAULT_SMF_WAIST)?,
            objectives,
            objective_ells: cfg.list("objectives", "ells", vec![-2, -1, 1, 2])?,
            input_waist_mm: cfg.value("objectives", "input_waist_mm", 0.48)?,
            lambdas: cfg.list("quantum", "lambdas", vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5])?,
            herald_efficiency: cfg.value("quantum", "herald_efficiency", 1.0)?,
            n_photons: cfg.value("quantum", "photons", 20_000u64)?,
            dark_rate_triggered: cfg.value("quantum", "dark_rate_triggered", 1e-3)?,
            dark_rate_free: cfg.value("quantum", "dark_rate_free", 0.5)?,
        };
        if s.bloch_ell <= 0 {
            return Err(cfg.error_at("beams", "bloch_ell", "must be positive"));
        }
        Ok(s)
    }

    pub fn parse(text: &str, over: &Overrides, base: &Path) -> Result<Scenario> {
        Scenario::from_config(&Config::parse(text)?, over, base)
    }

    /// SHA-256 over the resolved parameters. Comments, layout, key order and
    /// explicitly written defaults leave it unchanged; the name is a label.
    pub fn config_hash(&self) -> String {
        let canonical = Scenario { name: String::new(), ..self.clone() };
        hex(&Sha256::digest(format!("{canonical:?}").as_bytes()))
    }

    /// Waist of an `ell` beam at the chip facet.
    pub fn waist_for(&self, ell: i32) -> f64 {
        self.waist.unwrap_or_else(|| ring_matched_waist(ell.abs().max(1), self.ring_radius))
    }

    pub fn profile(&self) -> Result<IndexProfile> {
        match &self.index_file {
            Some(p) => {
                let prof = io::read_index(p)?;
                if !prof.grid().same_as(&self.grid) {
                    return Err(Error::GridMismatch);
                }
                Ok(prof)
            }
            None => doughnut_profile(&self.grid, &self.chip),
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    /// `(relative path, sha256)`, sorted by path.
    pub artifacts: Vec<(String, String)>,
    /// `(step, message)` for steps that failed.
    pub failures: Vec<(String, String)>,
}

impl Manifest {
    pub fn is_success(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.scenario);
        let _ = writeln!(s, "config_hash = {}", self.config_hash);
        let _ = writeln!(s, "seed = {}", self.seed);
        for (path, sum) in &self.artifacts {
            let _ = writeln!(s, "artifact = {path} sha256:{sum}");
        }
        for (step, msg) in &self.failures {
            let _ = writeln!(s, "failed = {step}: {msg}");
        }
        s
    }
}

/// Collects artifacts written during a run.
struct Sink<'a> {
    dir: &'a Path,
    written: Mutex<Vec<(String, String)>>,
}

impl Sink<'_> {
    fn put(&self, name: &str, bytes: &[u8]) -> Result<()> {
        io::atomic_write(&self.dir.join(name), bytes)?;
        self.written
            .lock()
            .expect("artifact list poisoned")
            .push((name.to_string(), hex(&Sha256::digest(bytes))));
        Ok(())
    }

    fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        self.put(name, io::csv(header, rows).as_bytes())
    }

    fn intensity(&self, name: &str, grid: &Grid, values: &[f64]) -> Result<()> {
        let (bytes, side) = io::intensity_pgm(grid, values);
        self.put(name, &bytes)?;
        self.put(&format!("{name}.txt"), side.as_bytes())
    }

    fn field_image(&self, name: &str, field: &ComplexField) -> Result<()> {
        self.intensity(name, field.grid(), &field.intensity())
    }

    fn spectrum(&self, name: &str, s: &OamSpectrum) -> Result<()> {
        let rows: Vec<Vec<String>> = s.iter().map(|(l, p)| vec![l.to_string(), io::num(p)]).collect();
        self.csv(name, &["l", "power_fraction"], &rows)
    }
}

fn tag(ell: i32) -> String {
    if ell == 0 {
        "0".into()
    } else {
        format!("{ell:+}")
    }
}

/// Runs every step and writes the manifest last. Step failures are recorded
/// in the manifest rather than aborting the run; only I/O errors on the
/// output directory or manifest are returned as `Err`.
pub fn run_scenario(s: &Scenario, out: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(out)?;
    let sink = Sink { dir: out, written: Mutex::new(Vec::new()) };
    let mut failures = Vec::new();
    let mut profile: Option<IndexProfile> = None;
    for step in &s.steps {
        let needs_chip = !matches!(step, Step::Holograms | Step::G2 | Step::Iccd);
        let res = (|| -> Result<()> {
            if needs_chip && profile.is_none() {
                profile = Some(s.profile()?);
            }
            match step {
                Step::Modes => run_modes(s, profile.as_ref().expect("profile"), &sink),
                Step::Holograms => run_holograms(s, &sink),
                Step::Transport => run_transport(s, profile.as_ref().expect("profile"), &sink),
                Step::Bloch => run_bloch(s, profile.as_ref().expect("profile"), &sink),
                Step::Superposition => run_superposition(s, profile.as_ref().expect("profile"), &sink),
                Step::Objectives => run_objectives(s, profile.as_ref().expect("profile"), &sink),
                Step::G2 => run_g2(s, &sink),
                Step::Iccd => run_iccd(s, &sink),
            }
        })();
        if let Err(e) = res {
            failures.push((step.name().to_string(), e.to_string()));
        }
    }
    let mut artifacts = sink.written.into_inner().expect("artifact list poisoned");
    artifacts.sort();
    let manifest = Manifest {
        scenario: s.name.clone(),
        config_hash: s.config_hash(),
        seed: s.seed,
        artifacts,
        failures,
    };
    io::atomic_write(&out.join(MANIFEST_NAME), manifest.render().as_bytes())?;
    Ok(manifest)
}

fn run_modes(s: &Scenario, profile: &IndexProfile, sink: &Sink) -> Result<()> {
    let opts = SolverOptions { seed: s.seed, ..SolverOptions::default() };
    let modes = solve_modes_with(profile, s.mode_count, &opts)?;
    sink.put("index.oamidx", &io::encode_index(profile))?;
    let contrast: Vec<f64> = profile.values().iter().map(|n| n - profile.n0()).collect();
    sink.intensity("index.pgm", profile.grid(), &contrast)?;
    let mut rows = Vec::new();
    for (k, m) in modes.iter().enumerate() {
        rows.push(vec![k.to_string(), io::num(m.n_eff)]);
        sink.put(&format!("mode_{k}.oamfld"), &io::encode_field(&m.field))?;
        sink.field_image(&format!("mode_{k}.pgm"), &m.field)?;
    }
    sink.csv("modes.csv", &["mode_index", "n_eff"], &rows)
}

fn run_holograms(s: &Scenario, sink: &Sink) -> Result<()> {
    let mut rows = Vec::new();
    for &ell in &s.ells {
        let mask = fork_hologram(&s.grid, ell, s.grating_period)?;
        sink.put(&format!("hologram_l{}.pgm", tag(ell)), &io::mask_pgm(&mask))?;
    }
    let fields = s
        .ells
        .iter()
        .map(|&ell| beam_field(&s.grid, &BeamSpec::lg(ell, 0, s.waist_for(ell))))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, i32)> = (0..fields.len()).flat_map(|i| s.ells.iter().map(move |&m| (i, m))).collect();
    let couplings = pairs
        .par_iter()
        .map(|&(i, m)| phase_flatten_project(&fields[i], m, s.smf_waist))
        .collect::<Result<Vec<_>>>()?;
    for (&(i, m), c) in pairs.iter().zip(couplings) {
        rows.push(vec![s.ells[i].to_string(), m.to_string(), io::num(c)]);
    }
    sink.csv("projection.csv", &["l_beam", "l_mask", "coupling"], &rows)
}

struct Run {
    input: ComplexField,
    result: PropagationResult,
    efficiency: f64,
    spec_in: OamSpectrum,
    spec_out: OamSpectrum,
}

fn chip_run(s: &Scenario, profile: &IndexProfile, beams: &[BeamSpec]) -> Result<Run> {
    let input = launch_field(&s.grid, beams, &s.launch)?;
    let result = propagate(&input, profile, &s.bpm)?;
    let efficiency = transmission(&result, &input, s.aperture)?;
    let spec_in = oam_spectrum(&input, s.l_max)?;
    let spec_out = oam_spectrum(&result.output, s.l_max)?;
    Ok(Run { input, result, efficiency, spec_in, spec_out })
}

/// Images, spectra, field and power trace of one chip run under `stem`.
fn emit_run(s: &Scenario, sink: &Sink, stem: &str, run: &Run) -> Result<()> {
    sink.field_image(&format!("{stem}_in.pgm"), &run.input)?;
    sink.field_image(&format!("{stem}_out.pgm"), &run.result.output)?;
    sink.put(&format!("{stem}_out.oamfld"), &io::encode_field(&run.result.output))?;
    let fringes = interfere(&run.result.output, &s.reference)?;
    sink.intensity(&format!("{stem}_interference.pgm"), &fringes.grid, &fringes.values)?;
    sink.spectrum(&format!("{stem}_spectrum_in.csv"), &run.spec_in)?;
    sink.spectrum(&format!("{stem}_spectrum_out.csv"), &run.spec_out)?;
    let trace: Vec<Vec<String>> =
        run.result.power_trace.iter().map(|&(z, p)| vec![io::num(z), io::num(p)]).collect();
    sink.csv(&format!("{stem}_power.csv"), &["z_um", "guided_power"], &trace)
}

fn run_transport(s: &Scenario, profile: &IndexProfile, sink: &Sink) -> Result<()> {
    let runs = s
        .ells
        .par_iter()
        .map(|&ell| chip_run(s, profile, &[BeamSpec::lg(ell, 0, s.waist_for(ell))]))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut ring_rows = Vec::new();
    for (&ell, run) in s.ells.iter().zip(&runs) {
        emit_run(s, sink, &format!("transport_l{}", tag(ell)), run)?;
        let o = &run.spec_out;
        rows.push(vec![
            ell.to_string(),
            io::num(run.efficiency),
            io::num(o.get(-1)),
            io::num(o.get(0)),
            io::num(o.get(1)),
            io::num(o.get(ell)),
            o.argmax().to_string(),
        ]);
        let rings = ring_power_ratio(&run.result.output, s.ring_radii, s.cut_angle)?;
        for r in [rings.trapezoid, rings.annulus] {
            let method = format!("{:?}", r.method).to_lowercase();
            ring_rows.push(vec![
                ell.to_string(),
                method,
                io::num(r.inner_power),
                io::num(r.outer_power),
                io::num(r.ratio),
            ]);
        }
    }
    sink.csv("transport.csv", &["l_in", "efficiency", "p_minus1", "p_0", "p_plus1", "p_same", "argmax"], &rows)?;
    sink.csv("rings.csv", &["l_in", "method", "inner_power", "outer_power", "ratio"], &ring_rows)
}

fn run_bloch(s: &Scenario, profile: &IndexProfile, sink: &Sink) -> Result<()> {
    let ell = s.bloch_ell;
    let states = cardinal_states();
    let runs = states
        .par_iter()
        .map(|&(_, theta, phi)| chip_run(s, profile, &bloch_components(theta, phi, ell, s.waist_for(ell))?))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for (&(label, theta, phi), run) in states.iter().zip(&runs) {
        emit_run(s, sink, &format!("bloch_{label}"), run)?;
        rows.push(vec![
            label.to_string(),
            io::num(theta),
            io::num(phi),
            io::num(run.efficiency),
            io::num(run.spec_in.get(ell)),
            io::num(run.spec_in.get(-ell)),
            io::num(run.spec_out.get(ell)),
            io::num(run.spec_out.get(-ell)),
        ]);
    }
    sink.csv(
        "bloch.csv",
        &["state", "theta", "phi", "efficiency", "p_in_plus", "p_in_minus", "p_out_plus", "p_out_minus"],
        &rows,
    )
}

/// Equal-weight superposition of the given charges with a shared waist.
pub fn equal_superposition(ells: &[i32], waist: f64) -> Vec<BeamSpec> {
    let a = 1.0 / (ells.len() as f64).sqrt();
    ells.iter().map(|&l| BeamSpec { amplitude: a, ..BeamSpec::lg(l, 0, waist) }).collect()
}

fn run_superposition(s: &Scenario, profile: &IndexProfile, sink: &Sink) -> Result<()> {
    let w = s.waist_for(1);
    let cases: [(&str, Vec<i32>); 2] = [("two_state", vec![-1, 1]), ("three_state", vec![-1, 0, 1])];
    let runs = cases
        .par_iter()
        .map(|(_, ells)| chip_run(s, profile, &equal_superposition(ells, w)))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for ((label, _), run) in cases.iter().zip(&runs) {
        emit_run(s, sink, &format!("superposition_{label}"), run)?;
        let mut row = vec![label.to_string(), io::num(run.efficiency)];
        for sp in [&run.spec_in, &run.spec_out] {
            row.extend([-1, 0, 1].iter().map(|&l| io::num(sp.get(l))));
        }
        rows.push(row);
    }
    sink.csv(
        "superposition.csv",
        &["state", "efficiency", "p_in_minus1", "p_in_0", "p_in_plus1", "p_out_minus1", "p_out_0", "p_out_plus1"],
        &rows,
    )
}

fn run_objectives(s: &Scenario, profile: &IndexProfile, sink: &Sink) -> Result<()> {
    // The sweep replaces the waist with the focused spot of each objective.
    let beams: Vec<BeamSpec> = s.objective_ells.iter().map(|&l| BeamSpec::lg(l, 0, 1.0)).collect();
    let sweep = coupling_sweep(&beams, &s.objectives, s.input_waist_mm, profile, &s.bpm, &s.launch, s.aperture)?;
    let mut rows = Vec::new();
    for row in &sweep {
        let spec = oam_spectrum(&row.output, s.l_max)?;
        sink.spectrum(&format!("objective_{}_l{}_spectrum_out.csv", row.objective.label, tag(row.beam.ell)), &spec)?;
        rows.push(vec![
            row.objective.label.clone(),
            io::num(row.waist),
            row.beam.ell.to_string(),
            io::num(row.efficiency),
            io::num(spec.get(-1)),
            io::num(spec.get(0)),
            io::num(spec.get(1)),
            spec.argmax().to_string(),
        ]);
    }
    sink.csv(
        "objectives.csv",
        &["objective", "waist_um", "l_in", "efficiency", "p_minus1", "p_0", "p_plus1", "argmax"],
        &rows,
    )
}

fn run_g2(s: &Scenario, sink: &Sink) -> Result<()> {
    let mut rows = Vec::new();
    let mut dist_rows = Vec::new();
    for &lambda in &s.lambdas {
        let src = SpdcSource::with_efficiency(lambda, s.herald_efficiency)?;
        rows.push(vec![
            io::num(lambda),
            io::num(g2_zero(LightKind::Thermal, &src)),
            io::num(g2_zero(LightKind::Heralded, &src)),
        ]);
        let free = unheralded_distribution(&src, None);
        let held = if lambda > 0.0 { Some(heralded_distribution(&src, None)?) } else { None };
        for n in 0..=8usize {
            let ph = held.as_ref().map_or(0.0, |d| d.p.get(n).copied().unwrap_or(0.0));
            dist_rows.push(vec![
                io::num(lambda),
                n.to_string(),
                io::num(free.p.get(n).copied().unwrap_or(0.0)),
                io::num(ph),
            ]);
        }
    }
    sink.csv("g2.csv", &["lambda", "g2_thermal", "g2_heralded"], &rows)?;
    sink.csv("photon_number.csv", &["lambda", "n", "p_unheralded", "p_heralded"], &dist_rows)
}

fn run_iccd(s: &Scenario, sink: &Sink) -> Result<()> {
    let mut rows = Vec::new();
    for (k, &ell) in s.ells.iter().enumerate() {
        let field = beam_field(&s.grid, &BeamSpec::lg(ell, 0, s.waist_for(ell)))?;
        for (j, (mode, rate)) in [("triggered", s.dark_rate_triggered), ("free", s.dark_rate_free)].iter().enumerate() {
            let seed = s.seed.wrapping_add((2 * k + j) as u64);
            let img = iccd_image(&field, s.n_photons, *rate, seed)?;
            let name = format!("iccd_l{}_{mode}.pgm", tag(ell));
            let (bytes, side) = io::count_pgm(&img);
            sink.put(&name, &bytes)?;
            sink.put(&format!("{name}.txt"), side.as_bytes())?;
            rows.push(vec![
                ell.to_string(),
                mode.to_string(),
                seed.to_string(),
                img.n_photons.to_string(),
                img.dark_counts.to_string(),
                io::num(img.total_variation(&field)?),
            ]);
        }
    }
    sink.csv("iccd.csv", &["l", "mode", "seed", "photons", "dark_counts", "total_variation"], &rows)
}
