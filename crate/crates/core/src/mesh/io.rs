//! OFF-style mesh files with extra `BOUNDARY` and `OUTLINE` blocks:
//!
//! ```text
//! OFF
//! # r0 0.5
//! <points> <triangles> 0
//! x y 0            (one per point)
//! 3 a b c          (one per triangle)
//! BOUNDARY <points>
//! 0|1              (one per point)
//! OUTLINE <vertices>
//! x y              (one per outline vertex)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use crate::point::Point;
use crate::{Error, Result};

use super::TriMesh;

impl TriMesh {
    pub fn to_off(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "OFF\n# r0 {}", self.r0());
        let _ = writeln!(s, "{} {} 0", self.num_points(), self.num_triangles());
        for p in self.points() {
            let _ = writeln!(s, "{} {} 0", p.x, p.y);
        }
        for t in self.triangles() {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(s, "BOUNDARY {}", self.num_points());
        for &b in self.is_boundary() {
            s.push_str(if b { "1\n" } else { "0\n" });
        }
        let _ = writeln!(s, "OUTLINE {}", self.outline().len());
        for p in self.outline() {
            let _ = writeln!(s, "{} {}", p.x, p.y);
        }
        s
    }

    pub fn from_off(text: &str) -> Result<Self> {
        let mut r0 = None;
        let mut all = Vec::new();
        for l in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            match l.strip_prefix('#') {
                Some(c) => {
                    if let Some(v) = c.trim().strip_prefix("r0") {
                        r0 = v.trim().parse::<f64>().ok();
                    }
                }
                None => all.push(l),
            }
        }
        let mut it = all.into_iter();
        let mut next = |what: &str| it.next().ok_or_else(|| Error::Parse(format!("missing {what}")));

        if next("header")? != "OFF" {
            return Err(Error::Parse("expected OFF header".into()));
        }
        let counts = nums::<usize>(next("counts")?)?;
        if counts.len() < 2 {
            return Err(Error::Parse("counts line needs point and triangle counts".into()));
        }
        let (np, nt) = (counts[0], counts[1]);
        let mut points = Vec::with_capacity(np);
        for _ in 0..np {
            let v = nums::<f64>(next("point")?)?;
            if v.len() < 2 {
                return Err(Error::Parse("point line needs two coordinates".into()));
            }
            points.push(Point::new(v[0], v[1]));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let v = nums::<usize>(next("triangle")?)?;
            if v.len() != 4 || v[0] != 3 {
                return Err(Error::Parse("only triangles are supported".into()));
            }
            triangles.push([v[1], v[2], v[3]]);
        }
        let block = next("BOUNDARY block")?;
        if block.strip_prefix("BOUNDARY").map(str::trim) != Some(&np.to_string()) {
            return Err(Error::Parse(format!("expected `BOUNDARY {np}`")));
        }
        let mut is_boundary = Vec::with_capacity(np);
        for _ in 0..np {
            is_boundary.push(match next("boundary flag")? {
                "0" => false,
                "1" => true,
                other => return Err(Error::Parse(format!("bad boundary flag `{other}`"))),
            });
        }
        let mut outline = Vec::new();
        if let Ok(line) = next("OUTLINE block") {
            let m: usize = line
                .strip_prefix("OUTLINE")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::Parse("expected `OUTLINE <count>`".into()))?;
            for _ in 0..m {
                let v = nums::<f64>(next("outline vertex")?)?;
                if v.len() != 2 {
                    return Err(Error::Parse("outline vertex needs two coordinates".into()));
                }
                outline.push(Point::new(v[0], v[1]));
            }
        }
        let r0 = r0.ok_or_else(|| Error::Parse("missing `# r0` comment".into()))?;
        TriMesh::new(points, triangles, is_boundary, r0, outline)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_off(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_off())?;
        Ok(())
    }
}

fn nums<T: std::str::FromStr>(line: &str) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|w| w.parse::<T>().map_err(|_| Error::Parse(format!("bad number `{w}`"))))
        .collect()
}
