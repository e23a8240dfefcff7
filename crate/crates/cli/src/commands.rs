use std::fs;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;
use spmt_core::bojtc::{balanced_jps, compose_joint_input, correlation_plane};
use spmt_core::detect::{correlate_tiles, report_from_patches, score_patch, DetectionReport};
use spmt_core::frame::{normalize_power, Frame, SegmentGrid};
use spmt_core::io::{load_frame, write_heatmap, write_png16};
use spmt_core::pmt::{pmt as pmt_transform, PmtParams, PmtSignature};
use spmt_core::scenegen::{figure3_reference, figure3_spec, render_scene, SceneManifest, SceneSpec};
use spmt_core::segmentation::{segment_pmt, SignatureSheet};
use spmt_core::sweep::{inclusive_range, Sweep, SweepRow};

use crate::config::{GridSpec, RunConfig};
use crate::{Failure, SceneArgs};

const SINGLE: GridSpec = GridSpec { rows: 1, cols: 1 };
const FIGURE3_GRID: GridSpec = GridSpec { rows: 4, cols: 3 };
/// Largest random intra-segment shift, in pixels, for seeded figure3 scenes.
const SEED_SHIFT: i32 = 6;
/// Side of one tile's block in the overview heatmap.
const OVERVIEW_BLOCK: usize = 16;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| Failure::Pipeline(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Pipeline(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    write_bytes(path, (text + "\n").as_bytes())
}

fn subdir(dir: &Path, name: &str) -> Result<PathBuf, Failure> {
    let d = dir.join(name);
    fs::create_dir_all(&d).map_err(|e| Failure::Pipeline(format!("cannot create {}: {e}", d.display())))?;
    Ok(d)
}

fn signature_of(frame: &Frame, params: &PmtParams) -> Result<PmtSignature, Failure> {
    params.validate_for(frame.width(), frame.height())?;
    Ok(pmt_transform(&normalize_power(frame)?, params)?)
}

pub fn pmt(cfg: &RunConfig, input: &Path) -> Result<(), Failure> {
    let frame = load_frame(input)?;
    let params = cfg.params_for(frame.width(), frame.height())?;
    let sig = signature_of(&frame, &params)?;
    let dir = out_dir(cfg)?;
    write_bytes(&dir.join("signature.bin"), &sig.to_bytes())?;
    write_json(&dir.join("params.json"), &params)?;
    write_heatmap(&sig.to_frame(), dir.join("signature.pgm"))?;
    println!("signature {}x{} (rho x theta) written to {}", params.n_rho, params.n_theta, dir.display());
    Ok(())
}

fn write_sheet(dir: &Path, sheet: &SignatureSheet) -> Result<(), Failure> {
    write_heatmap(sheet.sheet_frame(), dir.join("sheet.pgm"))?;
    write_json(&dir.join("sheet_manifest.json"), &sheet.manifest())?;
    write_json(&dir.join("params.json"), sheet.params())?;
    let tiles = subdir(dir, "tiles")?;
    for (k, sig) in sheet.signatures().iter().enumerate() {
        if let Some(sig) = sig {
            write_bytes(&tiles.join(format!("tile_{k:03}.bin")), &sig.to_bytes())?;
        }
    }
    Ok(())
}

pub fn segment(cfg: &RunConfig, input: &Path) -> Result<(), Failure> {
    let frame = load_frame(input)?;
    let grid = cfg.grid_for(frame.width(), frame.height(), SINGLE)?;
    let params = cfg.params_for(grid.segment_width, grid.segment_height)?;
    let sheet = segment_pmt(&frame, &grid, &params)?;
    let dir = out_dir(cfg)?;
    write_sheet(&dir, &sheet)?;
    let empty = (0..sheet.len()).filter(|&k| sheet.tile_is_empty(k)).count();
    println!("{} segments ({empty} empty) written to {}", sheet.len(), dir.display());
    Ok(())
}

/// Scene, its grid, the reference frame, and ground truth when generated.
struct Inputs {
    scene: Frame,
    grid: SegmentGrid,
    reference: Frame,
    manifest: Option<SceneManifest>,
}

fn seeded_figure3(phi_deg: f64, alpha: f64, seed: Option<u64>) -> SceneSpec {
    let mut spec = figure3_spec(phi_deg.to_radians(), alpha);
    if let Some(seed) = seed {
        let mut rng = StdRng::seed_from_u64(seed);
        for p in &mut spec.placements {
            p.shift = (
                rng.gen_range(-SEED_SHIFT..=SEED_SHIFT) as f64,
                rng.gen_range(-SEED_SHIFT..=SEED_SHIFT) as f64,
            );
        }
    }
    spec
}

fn figure3_inputs(cfg: &RunConfig, phi_deg: f64, alpha: f64, reference: Option<&Path>) -> Result<Inputs, Failure> {
    if cfg.grid.is_some_and(|g| g != FIGURE3_GRID) {
        return Err(Failure::Config(format!("the figure3 scene uses a {FIGURE3_GRID} grid")));
    }
    if !phi_deg.is_finite() || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Failure::Config(format!("phi {phi_deg} and alpha {alpha} must be finite, alpha > 0")));
    }
    let (scene, manifest) = render_scene(&seeded_figure3(phi_deg, alpha, cfg.seed))?;
    let reference = match reference {
        Some(p) => load_frame(p)?,
        None => figure3_reference(),
    };
    Ok(Inputs { scene, grid: manifest.grid, reference, manifest: Some(manifest) })
}

fn load_inputs(cfg: &RunConfig, args: &SceneArgs) -> Result<Inputs, Failure> {
    if args.figure3 {
        return figure3_inputs(cfg, args.phi, args.alpha, args.reference.as_deref());
    }
    let (Some(scene), Some(reference)) = (&args.scene, &args.reference) else {
        return Err(Failure::Config("a scene image and --reference are required without --figure3".into()));
    };
    let scene = load_frame(scene)?;
    let grid = cfg.grid_for(scene.width(), scene.height(), SINGLE)?;
    Ok(Inputs { scene, grid, reference: load_frame(reference)?, manifest: None })
}

/// Everything the correlation stage needs, validated before any transform runs.
struct Prepared {
    inputs: Inputs,
    reference: PmtSignature,
    sheet: SignatureSheet,
}

fn prepare(cfg: &RunConfig, inputs: Inputs) -> Result<Prepared, Failure> {
    let params = cfg.params_for(inputs.grid.segment_width, inputs.grid.segment_height)?;
    params.validate_for(inputs.reference.width(), inputs.reference.height())?;
    let reference = signature_of(&inputs.reference, &params)?;
    let sheet = segment_pmt(&inputs.scene, &inputs.grid, &params)?;
    Ok(Prepared { inputs, reference, sheet })
}

fn write_patches(dir: &Path, patches: &[Option<Frame>]) -> Result<(), Failure> {
    let pdir = subdir(dir, "patches")?;
    for (k, patch) in patches.iter().enumerate() {
        if let Some(patch) = patch {
            write_heatmap(patch, pdir.join(format!("tile_{k:03}.pgm")))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PatchSummary {
    index: usize,
    row: usize,
    col: usize,
    peak: Option<f64>,
    lag_rho: Option<i64>,
    lag_theta: Option<i64>,
}

pub fn correlate(cfg: &RunConfig, args: &SceneArgs) -> Result<(), Failure> {
    let prep = prepare(cfg, load_inputs(cfg, args)?)?;
    let detect_cfg = cfg.detect_config()?;
    let (patches, geometry) = correlate_tiles(&prep.reference, &prep.sheet, cfg.use_bojtc())?;
    let dir = out_dir(cfg)?;
    write_patches(&dir, &patches)?;
    let summary: Vec<PatchSummary> = patches
        .iter()
        .enumerate()
        .map(|(index, patch)| {
            let (row, col) = prep.sheet.grid().cell(index);
            let best = patch.as_ref().and_then(|p| score_patch(p, &detect_cfg).best().copied());
            PatchSummary {
                index,
                row,
                col,
                peak: patch.as_ref().map(|p| p.max()),
                lag_rho: best.map(|b| b.lag_rho),
                lag_theta: best.map(|b| b.lag_theta),
            }
        })
        .collect();
    write_json(&dir.join("correlations.json"), &summary)?;
    if let Some(geometry) = geometry {
        write_json(&dir.join("geometry.json"), &geometry)?;
    }
    println!("{} correlation patches written to {}", patches.len(), dir.display());
    Ok(())
}

/// One block per tile, brightness = tile score.
fn overview(report: &DetectionReport) -> Result<Frame, Failure> {
    let g = report.grid;
    let (w, h) = (g.cols * OVERVIEW_BLOCK, g.rows * OVERVIEW_BLOCK);
    Ok(Frame::from_fn(w, h, |c, r| report.tiles[g.index(r / OVERVIEW_BLOCK, c / OVERVIEW_BLOCK)].score)?)
}

fn print_report(report: &DetectionReport) {
    for t in &report.tiles {
        let verdict = match (t.empty, t.matched) {
            (true, _) => "empty".to_string(),
            (false, false) => "no match".to_string(),
            (false, true) => format!(
                "MATCH phi {:.1} deg, alpha {:.3}",
                t.phi_deg.unwrap_or(f64::NAN),
                t.alpha.unwrap_or(f64::NAN)
            ),
        };
        println!("tile {:>3} ({}, {}): score {:.4}  {verdict}", t.index, t.row, t.col, t.score);
    }
    println!("{} of {} tiles matched ({})", report.matched_indices().len(), report.tiles.len(), report.scorer);
}

fn detect_into(dir: &Path, cfg: &RunConfig, prep: &Prepared, use_bojtc: bool) -> Result<DetectionReport, Failure> {
    let detect_cfg = cfg.detect_config()?;
    let (patches, geometry) = correlate_tiles(&prep.reference, &prep.sheet, use_bojtc)?;
    let report = report_from_patches(&patches, &prep.sheet, &detect_cfg, geometry)?;
    write_bytes(&dir.join("report.json"), (report.to_json() + "\n").as_bytes())?;
    write_patches(dir, &patches)?;
    write_heatmap(&overview(&report)?, dir.join("overview.pgm"))?;
    if let Some(m) = &prep.inputs.manifest {
        write_bytes(&dir.join("scene.json"), (m.to_json() + "\n").as_bytes())?;
    }
    Ok(report)
}

pub fn detect(cfg: &RunConfig, args: &SceneArgs) -> Result<(), Failure> {
    let prep = prepare(cfg, load_inputs(cfg, args)?)?;
    let dir = out_dir(cfg)?;
    let report = detect_into(&dir, cfg, &prep, cfg.use_bojtc())?;
    print_report(&report);
    Ok(())
}

pub fn demo_figure3(cfg: &RunConfig, phi_deg: f64, alpha: f64) -> Result<(), Failure> {
    let prep = prepare(cfg, figure3_inputs(cfg, phi_deg, alpha, None)?)?;
    let dir = out_dir(cfg)?;
    write_png16(&prep.inputs.scene, dir.join("scene.png"))?;
    write_png16(&prep.inputs.reference, dir.join("reference.png"))?;
    write_heatmap(&prep.reference.to_frame(), dir.join("reference_signature.pgm"))?;
    write_sheet(&dir, &prep.sheet)?;

    let input = compose_joint_input(&prep.reference, &prep.sheet)?;
    let jps = balanced_jps(&input.joint, &input.ref_only, &input.query_only)?;
    let plane = correlation_plane(&jps, &input.geometry, &prep.reference)?;
    write_heatmap(&input.joint, dir.join("joint.pgm"))?;
    write_heatmap(&plane.data, dir.join("plane.pgm"))?;
    write_json(&dir.join("geometry.json"), &input.geometry)?;

    let report = detect_into(&dir, cfg, &prep, true)?;
    print_report(&report);
    Ok(())
}

fn parse_range(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("{what} range '{s}' is not start:end:step")))?;
    match parts[..] {
        [v] if v.is_finite() => Ok(vec![v]),
        [a, b, step] if a.is_finite() && b.is_finite() && step > 0.0 && b >= a => Ok(inclusive_range(a, b, step)),
        _ => Err(Failure::Config(format!("{what} range '{s}' needs start <= end and step > 0"))),
    }
}

pub fn sweep(cfg: &RunConfig, phi_range: &str, alpha_range: &str) -> Result<(), Failure> {
    let phis = parse_range(phi_range, "phi")?;
    let alphas = parse_range(alpha_range, "alpha")?;
    if alphas.iter().any(|&a| a <= 0.0) {
        return Err(Failure::Config(format!("alpha range '{alpha_range}' must stay positive")));
    }
    let canvas = spmt_core::sweep::SWEEP_CANVAS;
    let params = cfg.params_for(canvas, canvas)?;
    let sweep = Sweep::new(params, cfg.detect_config()?)?;
    let cells: Vec<(f64, f64)> = phis.iter().flat_map(|&p| alphas.iter().map(move |&a| (p, a))).collect();
    let rows = cells
        .par_iter()
        .map(|&(p, a)| sweep.cell(p, a).map_err(|e| Failure::Pipeline(format!("cell phi {p}, alpha {a}: {e}"))))
        .collect::<Result<Vec<SweepRow>, _>>()?;
    let mut csv = String::from(SweepRow::CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    let dir = out_dir(cfg)?;
    write_bytes(&dir.join("sweep.csv"), csv.as_bytes())?;
    println!("{} sweep rows written to {}", rows.len(), dir.join("sweep.csv").display());
    Ok(())
}
