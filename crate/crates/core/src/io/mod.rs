//! File formats and the compressed RLE mask codec.
//!
//! * detection records: one detection per line, 72 whitespace-separated
//!   numbers (`frame class score cx cy depth off_x off_y` then 32 `x y`
//!   vertex pairs), `#` starts a comment;
//! * result records: KITTI-MOTS lines `frame track class height width rle`;
//! * PGM masks and heatmaps, SVG overlays, TOML configuration.

mod config;
mod pgm;
mod rle;
mod svg;
mod text;

use std::path::Path;

use crate::error::{Error, Result};

pub use config::{load_pipeline_config, load_scenario, parse_pipeline_config, parse_scenario, PipelineConfig};
pub use pgm::{heatmap_to_pgm, parse_pgm, read_pgm};
pub use rle::{decode_rle, encode_rle, mask_to_runs};
pub use svg::render_svg;
pub use text::{
    format_detections, format_results, ground_truth_records, parse_detections, parse_detections_str, parse_results,
    parse_results_str, records_to_sequence, sequence_records, track_records, write_detections, write_results,
    DetectionFile, ResultRecord,
};

/// Writes `contents` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
