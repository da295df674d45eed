//! The non-run subcommands: gradcheck, presets, compare, plotdata.

use std::collections::BTreeMap;
use std::path::Path;

use wide_core::gradcheck::{self, FD_TOLERANCE};
use wide_core::presets::registry;

use crate::csvio::{read_csv, write_atomic};
use crate::error::{CliError, EXIT_CHECKS, EXIT_CONFIG};

pub fn gradcheck(seed: u64, fields: usize) -> Result<i32, CliError> {
    let rows =
        gradcheck::run(seed, fields).map_err(|e| CliError::new(EXIT_CONFIG, e.to_string()))?;
    println!(
        "{:<42} {:>14} {:>14} {:>14}",
        "preset", "energy", "dissipation", "functional"
    );
    let mut failed = false;
    for row in &rows {
        let mark = if row.pass() { "" } else { "  <-- FAIL" };
        println!(
            "{:<42} {:>14.3e} {:>14.3e} {:>14.3e}{mark}",
            row.preset, row.energy_error, row.dissipation_error, row.functional_error
        );
        failed |= !row.pass();
    }
    println!(
        "{} presets x {fields} fields, tolerance {FD_TOLERANCE:.1e}",
        rows.len()
    );
    Ok(if failed { EXIT_CHECKS } else { 0 })
}

pub fn presets() -> Result<i32, CliError> {
    for (name, description) in registry() {
        println!("{name:<34} {description}");
    }
    Ok(0)
}

/// Nodal field values grouped by layer time, as parsed from `field.csv`.
fn load_field(dir: &Path) -> Result<BTreeMap<u64, Vec<f64>>, CliError> {
    let table = read_csv(&dir.join("field.csv"))?;
    if table.header != ["t", "x", "w"] {
        return Err(CliError::new(
            EXIT_CONFIG,
            format!(
                "{}: unexpected field.csv header {:?}",
                dir.display(),
                table.header
            ),
        ));
    }
    let mut layers: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for row in &table.rows {
        if row.len() != 3 {
            return Err(CliError::new(
                EXIT_CONFIG,
                format!("{}: malformed field.csv row", dir.display()),
            ));
        }
        layers.entry(row[0].to_bits()).or_default().push(row[2]);
    }
    Ok(layers)
}

/// Diff two run directories: per-time and space-time distances of the
/// fields plus worst absolute gaps of the scalar traces.
pub fn compare_dirs(dir_a: &Path, dir_b: &Path) -> Result<i32, CliError> {
    let a = load_field(dir_a)?;
    let b = load_field(dir_b)?;
    if a.len() != b.len() {
        return Err(CliError::new(
            EXIT_CONFIG,
            format!("layer counts differ: {} vs {}", a.len(), b.len()),
        ));
    }
    let mut worst_time = 0.0f64;
    let mut worst_l2 = 0.0f64;
    let mut total_sq = 0.0f64;
    let mut prev_t: Option<f64> = None;
    for ((ta, va), (tb, vb)) in a.iter().zip(b.iter()) {
        if ta != tb || va.len() != vb.len() {
            return Err(CliError::new(
                EXIT_CONFIG,
                "run directories use different grids".to_string(),
            ));
        }
        let t = f64::from_bits(*ta);
        let sq: f64 = va
            .iter()
            .zip(vb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            / va.len() as f64;
        let l2 = sq.sqrt();
        if l2 > worst_l2 {
            worst_l2 = l2;
            worst_time = t;
        }
        if let Some(p) = prev_t {
            total_sq += (t - p) * sq;
        }
        prev_t = Some(t);
    }
    println!("layers compared: {}", a.len());
    println!("worst per-time rms gap: {worst_l2:.6e} at t = {worst_time:.6}");
    println!("space-time rms gap: {:.6e}", total_sq.sqrt());

    for name in ["energy.csv", "approx_energy.csv", "convergence.csv"] {
        let pa = dir_a.join(name);
        let pb = dir_b.join(name);
        if pa.exists() && pb.exists() {
            let ta = read_csv(&pa)?;
            let tb = read_csv(&pb)?;
            let mut worst = 0.0f64;
            if ta.rows.len() == tb.rows.len() {
                for (ra, rb) in ta.rows.iter().zip(&tb.rows) {
                    for (x, y) in ra.iter().zip(rb) {
                        if x.is_finite() && y.is_finite() {
                            worst = worst.max((x - y).abs());
                        }
                    }
                }
                println!("{name}: worst absolute gap {worst:.6e}");
            } else {
                println!(
                    "{name}: row counts differ ({} vs {})",
                    ta.rows.len(),
                    tb.rows.len()
                );
            }
        }
    }
    Ok(0)
}

/// Emit gnuplot-friendly whitespace columns: `field.dat` with blank lines
/// between time blocks and `energy.dat` with (t, E) pairs.
pub fn plotdata(run_dir: &Path, out: Option<&Path>) -> Result<i32, CliError> {
    let short_row = |name: &str| CliError::new(EXIT_CONFIG, format!("{name}: malformed row"));
    let out_dir = out.unwrap_or(run_dir);
    let field = read_csv(&run_dir.join("field.csv"))?;
    let mut text = String::new();
    let mut last_t: Option<f64> = None;
    for row in &field.rows {
        if row.len() < 3 {
            return Err(short_row("field.csv"));
        }
        if let Some(t) = last_t {
            if row[0] != t {
                text.push('\n');
            }
        }
        last_t = Some(row[0]);
        text.push_str(&format!(
            "{:.12e} {:.12e} {:.12e}\n",
            row[0], row[1], row[2]
        ));
    }
    write_atomic(&out_dir.join("field.dat"), &text)?;

    let energy = read_csv(&run_dir.join("energy.csv"))?;
    let t_col = 0;
    let e_col = energy
        .header
        .iter()
        .position(|h| h == "total")
        .ok_or_else(|| CliError::new(EXIT_CONFIG, "energy.csv has no `total` column"))?;
    let mut text = String::new();
    for row in &energy.rows {
        if row.len() <= e_col {
            return Err(short_row("energy.csv"));
        }
        text.push_str(&format!("{:.12e} {:.12e}\n", row[t_col], row[e_col]));
    }
    write_atomic(&out_dir.join("energy.dat"), &text)?;
    println!(
        "wrote {} and {}",
        out_dir.join("field.dat").display(),
        out_dir.join("energy.dat").display()
    );
    Ok(0)
}
