//! Small convex-polygon kernel: half-plane clipping and areas.

pub type Poly = Vec<[f64; 2]>;

/// Area of a simple polygon (absolute value of the shoelace sum).
pub fn polygon_area(p: &[[f64; 2]]) -> f64 {
    let n = p.len();
    if n < 3 {
        return 0.0;
    }
    let o = p[0];
    let mut s = 0.0;
    for i in 1..n - 1 {
        let (a, b) = ([p[i][0] - o[0], p[i][1] - o[1]], [p[i + 1][0] - o[0], p[i + 1][1] - o[1]]);
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s.abs()
}

/// Clips a convex polygon to the half-plane `a . p <= c`.
pub fn clip_halfplane(poly: &[[f64; 2]], a: [f64; 2], c: f64) -> Poly {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    if n == 0 {
        return out;
    }
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let fp = a[0] * p[0] + a[1] * p[1] - c;
        let fq = a[0] * q[0] + a[1] * q[1] - c;
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Convex polygon whose edges remember the constraint that produced them.
/// `tags[k]` labels the edge from `verts[k]` to `verts[k + 1]`.
#[derive(Clone, Debug, Default)]
pub struct TaggedPoly {
    pub verts: Vec<[f64; 2]>,
    pub tags: Vec<Option<usize>>,
}

impl TaggedPoly {
    /// Axis-aligned square `[-l, l]^2`, counter-clockwise, untagged edges.
    pub fn square(l: f64) -> Self {
        TaggedPoly {
            verts: vec![[-l, -l], [l, -l], [l, l], [-l, l]],
            tags: vec![None; 4],
        }
    }

    pub fn is_empty(&self) -> bool {
        self.verts.len() < 3 || self.area() == 0.0
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.verts)
    }

    /// Largest value of `a . p` over the vertices.
    pub fn support(&self, a: [f64; 2]) -> f64 {
        self.verts
            .iter()
            .map(|p| a[0] * p[0] + a[1] * p[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_norm(&self) -> f64 {
        self.verts
            .iter()
            .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
            .fold(0.0, f64::max)
    }

    /// Clips to `a . p <= c`; the new edge is tagged with `tag`.
    pub fn clip(&mut self, a: [f64; 2], c: f64, tag: usize) {
        let n = self.verts.len();
        if n == 0 {
            return;
        }
        let f: Vec<f64> = self.verts.iter().map(|p| a[0] * p[0] + a[1] * p[1] - c).collect();
        if f.iter().all(|&v| v <= 0.0) {
            return;
        }
        let mut verts = Vec::with_capacity(n + 1);
        let mut tags = Vec::with_capacity(n + 1);
        for i in 0..n {
            let j = (i + 1) % n;
            let (p, q) = (self.verts[i], self.verts[j]);
            let (fp, fq) = (f[i], f[j]);
            if fp <= 0.0 {
                verts.push(p);
                if fq <= 0.0 {
                    tags.push(self.tags[i]);
                } else {
                    // leaving: the edge continues to the crossing point
                    tags.push(self.tags[i]);
                    if fp < 0.0 {
                        let t = fp / (fp - fq);
                        verts.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                        tags.push(Some(tag));
                    } else {
                        // p lies on the line; the cut edge starts at p
                        *tags.last_mut().unwrap() = Some(tag);
                    }
                }
            } else if fq < 0.0 {
                // entering
                let t = fp / (fp - fq);
                verts.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                tags.push(self.tags[i]);
            }
        }
        self.verts = verts;
        self.tags = tags;
    }

    /// Lengths of edges grouped by tag.
    pub fn tagged_edges(&self) -> impl Iterator<Item = (Option<usize>, f64)> + '_ {
        let n = self.verts.len();
        (0..n).map(move |k| {
            let (p, q) = (self.verts[k], self.verts[(k + 1) % n]);
            (self.tags[k], ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_square_in_half() {
        let mut p = TaggedPoly::square(1.0);
        p.clip([1.0, 0.0], 0.0, 7);
        assert!((p.area() - 2.0).abs() < 1e-14);
        let tagged: f64 = p.tagged_edges().filter(|(t, _)| *t == Some(7)).map(|(_, l)| l).sum();
        assert!((tagged - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clip_away_everything() {
        let mut p = TaggedPoly::square(1.0);
        p.clip([1.0, 0.0], -2.0, 0);
        assert!(p.is_empty());
    }

    #[test]
    fn untagged_clip_keeps_area() {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let c = clip_halfplane(&sq, [1.0, 1.0], 1.0);
        assert!((polygon_area(&c) - 0.5).abs() < 1e-15);
    }
}
