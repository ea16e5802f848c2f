//! Gnuplot scripts for result tables.

use std::path::{Path, PathBuf};

use crate::error::CliError;
use crate::experiments::read_columns;
use crate::output::{format_float, write_file, SCHEMA_PREFIX};

struct PlotLayout {
    x: &'static str,
    y: &'static str,
    log_x: bool,
    log_y: bool,
}

fn layout(schema: &str) -> Option<PlotLayout> {
    let decay = |y| PlotLayout {
        x: "t",
        y,
        log_x: true,
        log_y: true,
    };
    Some(match schema {
        "kernel" => PlotLayout {
            x: "j",
            y: "modulus",
            log_x: false,
            log_y: false,
        },
        "line" | "halfline" | "coupled" | "stepline" | "star" | "delta-line" => decay("sup_norm"),
        "alphap" => decay("norm"),
        "oscint" => decay("scaled"),
        "torus" => PlotLayout {
            x: "t",
            y: "scaled",
            log_x: true,
            log_y: false,
        },
        "vdc" => PlotLayout {
            x: "xi",
            y: "margin",
            log_x: false,
            log_y: false,
        },
        _ => return None,
    })
}

/// `(schema, reference slope)` from the first line of a result CSV.
pub fn read_schema(text: &str) -> Result<(String, Option<f64>), CliError> {
    let first = text.lines().next().unwrap_or_default();
    let rest = first
        .strip_prefix(SCHEMA_PREFIX)
        .ok_or_else(|| CliError::config("missing schema comment line"))?;
    let mut parts = rest.split("; ");
    let name = parts.next().unwrap_or_default();
    let schema = name
        .strip_suffix("/v1")
        .ok_or_else(|| CliError::config(format!("unsupported schema version in {name:?}")))?;
    let slope = parts
        .find_map(|p| p.strip_prefix("reference_slope: "))
        .map(|s| s.parse::<f64>().map_err(|_| CliError::config(format!("bad reference slope {s:?}"))))
        .transpose()?;
    Ok((schema.to_owned(), slope))
}

/// Gnuplot source for the CSV at `csv_path`.
pub fn plot_script(csv_path: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", csv_path.display())))?;
    let (schema, slope) = read_schema(&text)?;
    let plot = layout(&schema).ok_or_else(|| CliError::config(format!("schema {schema:?} has no plot layout")))?;
    let (xs, ys) = read_columns(csv_path, plot.x, plot.y)?;
    if xs.is_empty() {
        return Err(CliError::config(format!("{} has no data rows", csv_path.display())));
    }
    let file = csv_path.file_name().and_then(|f| f.to_str()).unwrap_or("data.csv");
    let mut s = String::new();
    s.push_str(&format!("# {schema} plot of {file}\n"));
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set key autotitle columnhead\n");
    match (plot.log_x, plot.log_y) {
        (true, true) => s.push_str("set logscale xy\n"),
        (true, false) => s.push_str("set logscale x\n"),
        (false, true) => s.push_str("set logscale y\n"),
        (false, false) => {}
    }
    s.push_str(&format!("set xlabel '{}'\nset ylabel '{}'\n", plot.x, plot.y));
    let data = format!("'{file}' using (column('{}')):(column('{}')) with linespoints title '{}'", plot.x, plot.y, plot.y);
    let anchor = xs.iter().zip(&ys).find(|(x, y)| **x > 0.0 && **y > 0.0);
    match (slope, anchor, plot.log_x && plot.log_y) {
        (Some(slope), Some((&x0, &y0)), true) => {
            let scale = y0 / x0.powf(slope);
            s.push_str(&format!("guide(x) = {} * x**({})\n", format_float(scale), format_float(slope)));
            s.push_str(&format!("plot {data}, guide(x) with lines dashtype 2 title 'slope {slope:.4}'\n"));
        }
        _ => s.push_str(&format!("plot {data}\n")),
    }
    Ok(s)
}

/// Writes the script next to `out_dir/<stem>.gp` and returns its path.
pub fn emit_plot_script(csv_path: &Path, out_dir: Option<&Path>) -> Result<PathBuf, CliError> {
    let script = plot_script(csv_path)?;
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => csv_path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let target = dir.join(format!("{stem}.gp"));
    write_file(&target, &script)?;
    Ok(target)
}
