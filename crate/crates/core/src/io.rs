//! Plot-ready CSV exports. Every writer takes any `io::Write`;
//! [`write_file`] opens a file and hands it to one of them.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::continuum::{MetricTreeSkeleton, SSBMPath};
use crate::error::Result;
use crate::infinite::IPCInstance;
use crate::stoch::AtomicMeasure;
use crate::walk::{LocalTimeCurve, RTRWTrajectory, WalkPath};

fn rows<W: Write, R: serde::Serialize>(out: W, header: &[&str], items: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in items {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Creates `path` (and its parent directories) and runs `f` on it.
pub fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_measure<W: Write>(out: W, m: &AtomicMeasure) -> Result<()> {
    rows(out, &["x", "y"], m.atoms().iter().copied())
}

pub fn write_laplace_curve<W: Write>(out: W, curve: &[(f64, f64)]) -> Result<()> {
    rows(out, &["lambda", "value"], curve.iter().copied())
}

/// One row per requested clock time.
pub fn write_ssbm_path<W: Write>(out: W, path: &SSBMPath) -> Result<()> {
    rows(
        out,
        &["clockTime", "position"],
        path.clock_times.iter().copied().zip(path.positions.iter().copied()),
    )
}

pub fn write_skeleton<W: Write>(out: W, sk: &MetricTreeSkeleton) -> Result<()> {
    rows(out, &["parentNode", "childNode", "length"], sk.edges())
}

/// Invaded edges in invasion order; `invasionIndex` is the step at which the
/// child was invaded.
pub fn write_ipc_edges<W: Write>(out: W, inst: &IPCInstance) -> Result<()> {
    let t = &inst.tree;
    let edges = inst
        .invasion_order
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| t.parent(v).map(|p| (p, v, inst.weights[v], i)));
    rows(out, &["parentId", "childId", "weight", "invasionIndex"], edges)
}

/// A tree walk: one row per step.
pub fn write_walk<W: Write>(out: W, path: &WalkPath) -> Result<()> {
    rows(out, &["time", "site"], path.vertices.iter().enumerate())
}

/// A trapped walk: the arrival time at each visited site.
pub fn write_trajectory<W: Write>(out: W, tr: &RTRWTrajectory) -> Result<()> {
    let arrivals = std::iter::once(0.0).chain(tr.departures.iter().copied());
    rows(out, &["time", "site"], arrivals.zip(tr.sites.iter().copied()))
}

/// Local time at the root, thinned to every `stride`-th step (and the last).
pub fn write_local_time<W: Write>(out: W, curve: &LocalTimeCurve, stride: usize) -> Result<()> {
    let stride = stride.max(1);
    let last = curve.samples.len().saturating_sub(1);
    let pts = curve
        .samples
        .iter()
        .enumerate()
        .filter(|&(t, _)| t % stride == 0 || t == last);
    rows(out, &["t", "l_t"], pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::local_time_root;

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn headers_and_rows() {
        let m = AtomicMeasure::from_atoms(vec![(0.5, 2.0), (0.25, 1.0)]).unwrap();
        assert_eq!(text(|b| write_measure(b, &m)), "x,y\n0.25,1.0\n0.5,2.0\n");
        assert_eq!(
            text(|b| write_laplace_curve(b, &[(0.0, 0.0)])),
            "lambda,value\n0.0,0.0\n"
        );
        let tr = RTRWTrajectory {
            sites: vec![0, 1],
            departures: vec![1.5, f64::INFINITY],
        };
        assert_eq!(text(|b| write_trajectory(b, &tr)), "time,site\n0.0,0\n1.5,1\n");
        let lt = local_time_root(&WalkPath {
            vertices: vec![0, 1, 0, 1],
        });
        assert_eq!(text(|b| write_local_time(b, &lt, 2)), "t,l_t\n0,1\n2,2\n3,2\n");
    }

    #[test]
    fn empty_measure_has_header_only() {
        assert_eq!(text(|b| write_measure(b, &AtomicMeasure::empty())), "x,y\n");
    }
}
