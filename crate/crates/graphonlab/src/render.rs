//! Grayscale heatmaps of kernels as binary PGM, origin in the top left:
//! row `i` samples `x = (i+1/2)/R`, column `j` samples `y = (j+1/2)/R`.

use crate::error::{Error, Result};
use crate::graphon::Kernel;

pub const MIN_RESOLUTION: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderSpec {
    pub resolution: usize,
    /// Comment lines written into the header.
    pub comments: Vec<String>,
}

impl RenderSpec {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::Range(format!("resolution {resolution} (at least {MIN_RESOLUTION})")));
        }
        Ok(RenderSpec {
            resolution,
            comments: Vec::new(),
        })
    }

    pub fn comment(mut self, line: impl Into<String>) -> Self {
        self.comments.push(line.into());
        self
    }
}

/// 0 is white, 1 is black.
pub fn gray(v: f64) -> u8 {
    (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8
}

pub fn pixels(w: &dyn Kernel, resolution: usize) -> Vec<u8> {
    let r = resolution as f64;
    let mut out = Vec::with_capacity(resolution * resolution);
    for i in 0..resolution {
        let x = (i as f64 + 0.5) / r;
        for j in 0..resolution {
            out.push(gray(w.value(x, (j as f64 + 0.5) / r)));
        }
    }
    out
}

pub fn render_pgm(w: &dyn Kernel, spec: &RenderSpec) -> Result<Vec<u8>> {
    let mut out = b"P5\n".to_vec();
    for c in &spec.comments {
        if c.contains(['\n', '\r']) {
            return Err(Error::Range("PGM comments must be single lines".into()));
        }
        out.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    out.extend_from_slice(format!("{0} {0}\n255\n", spec.resolution).as_bytes());
    out.extend(pixels(w, spec.resolution));
    Ok(out)
}

/// Header fields and raster of a binary PGM.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<String>, &[u8])> {
    let bad = |m: &str| Error::parse(0, format!("pgm: {m}"));
    let mut pos = 0;
    let mut line = || -> Result<String> {
        let end = bytes[pos..].iter().position(|&b| b == b'\n').ok_or_else(|| bad("truncated header"))?;
        let s = String::from_utf8_lossy(&bytes[pos..pos + end]).into_owned();
        pos += end + 1;
        Ok(s)
    };
    if line()? != "P5" {
        return Err(bad("magic"));
    }
    let mut comments = Vec::new();
    let dims = loop {
        let l = line()?;
        match l.strip_prefix('#') {
            Some(c) => comments.push(c.trim_start().to_string()),
            None => break l,
        }
    };
    let mut it = dims.split_whitespace().map(|t| t.parse::<usize>().map_err(|_| bad("dimensions")));
    let (w, h) = (it.next().ok_or_else(|| bad("width"))??, it.next().ok_or_else(|| bad("height"))??);
    if line()? != "255" {
        return Err(bad("maxval"));
    }
    let raster = &bytes[pos..];
    if raster.len() != w * h {
        return Err(bad("raster size"));
    }
    Ok((w, h, comments, raster))
}
